import json

import numpy as np
import pytest

from argrel.models import Resources
from argrel.synthetic import marker_lexicon, marker_vectors


def write_records(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write((r if isinstance(r, str) else json.dumps(r)) + "\n")
    return path


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def marker_resources():
    return Resources(marker_vectors(), marker_lexicon())

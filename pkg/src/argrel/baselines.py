"""Non-neural baselines: random forest and linear SVM over standard + extra features.

Baseline vectors extend the 41 standard features with child and parent
TF-IDF, counts of nouns/verbs/adjectives shared by the two texts, and the
(pos - neg) / (pos + neg + 1) sentiment score of each text. Everything is
min-max normalized on the training set.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import ArgumentPair, Relation
from .evaluation import score
from .features import (
    Normalizer,
    PosTag,
    PosTagger,
    SentimentLexicon,
    Token,
    apply_normalizer,
    build_feature_vector,
    default_tagger,
    fit_normalizer,
    text_tokens,
)
from .nn import save_checkpoint

DEFAULT_C_GRID = (0.01, 0.1, 1.0, 10.0, 100.0)


def alt_sentiment_score(tokens: Sequence[Token | str], lexicon: SentimentLexicon) -> float:
    words = [t.surface if isinstance(t, Token) else t for t in tokens]
    polarities = [lexicon.polarity(w) for w in words]
    n_pos, n_neg = polarities.count(1), polarities.count(-1)
    return (n_pos - n_neg) / (n_pos + n_neg + 1)


COMMON_TAGS = (PosTag.NOUN, PosTag.VERB, PosTag.ADJECTIVE)


def common_pos_counts(child: Sequence[Token], parent: Sequence[Token]) -> np.ndarray:
    out = []
    for tag in COMMON_TAGS:
        a = {t.surface for t in child if t.pos is tag}
        b = {t.surface for t in parent if t.pos is tag}
        out.append(len(a & b))
    return np.array(out, dtype=float)


@dataclass(frozen=True)
class TfidfModel:
    vocabulary: dict[str, int]
    idf: np.ndarray

    @classmethod
    def fit(cls, documents: Sequence[Sequence[str]], max_vocab: int = 1000) -> "TfidfModel":
        df = Counter()
        for doc in documents:
            df.update(set(doc))
        ranked = sorted(df.items(), key=lambda kv: (-kv[1], kv[0]))[:max_vocab]
        vocab = {w: i for i, (w, _) in enumerate(ranked)}
        n = len(documents)
        idf = np.array([math.log((1 + n) / (1 + c)) + 1.0 for _, c in ranked])
        return cls(vocab, idf)

    def transform(self, documents: Sequence[Sequence[str]]) -> np.ndarray:
        """L2-normalized tf-idf rows; words outside the vocabulary are ignored."""
        out = np.zeros((len(documents), len(self.vocabulary)))
        for row, doc in enumerate(documents):
            for word, count in Counter(doc).items():
                j = self.vocabulary.get(word)
                if j is not None:
                    out[row, j] = count * self.idf[j]
            norm = np.linalg.norm(out[row])
            if norm > 0:
                out[row] /= norm
        return out


# -- random forest -----------------------------------------------------------------

def gini(labels: np.ndarray) -> float:
    if len(labels) == 0:
        return 0.0
    p = np.bincount(labels, minlength=2) / len(labels)
    return float(1.0 - np.sum(p ** 2))


def _best_split(X: np.ndarray, y: np.ndarray, features: np.ndarray):
    """Best (feature, threshold, weighted gini) over ``features``, or None."""
    n = len(y)
    best = None
    for f in features:
        order = np.argsort(X[:, f], kind="stable")
        xs, ys = X[order, f], y[order]
        valid = np.flatnonzero(xs[1:] > xs[:-1])  # split after position i
        if valid.size == 0:
            continue
        ones_left = np.cumsum(ys)[valid]
        n_left = valid + 1
        n_right = n - n_left
        ones_right = ys.sum() - ones_left
        p_l, p_r = ones_left / n_left, ones_right / n_right
        g_l = 2 * p_l * (1 - p_l)
        g_r = 2 * p_r * (1 - p_r)
        weighted = (n_left * g_l + n_right * g_r) / n
        k = int(np.argmin(weighted))
        if best is None or weighted[k] < best[2] - 1e-15:
            i = valid[k]
            best = (int(f), 0.5 * (xs[i] + xs[i + 1]), float(weighted[k]))
    return best


@dataclass
class DecisionTree:
    """CART tree in flat-array form; ``feature == -1`` marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    label: np.ndarray

    @classmethod
    def grow(cls, X: np.ndarray, y: np.ndarray, max_features: int, rng: np.random.Generator,
             min_samples_split: int = 2) -> "DecisionTree":
        feature, threshold, left, right, label = [], [], [], [], []

        def new_node():
            for arr in (feature, left, right, label):
                arr.append(-1)
            threshold.append(0.0)
            return len(feature) - 1

        root = new_node()
        stack = [(root, np.arange(len(y)))]
        n_features = X.shape[1]
        while stack:
            node, idx = stack.pop()
            ys = y[idx]
            counts = np.bincount(ys, minlength=2)
            # leaf ties go to support
            label[node] = 0 if counts[0] > counts[1] else 1
            if len(idx) < min_samples_split or counts.min() == 0:
                continue
            split = None
            perm = rng.permutation(n_features)
            for start in range(0, n_features, max_features):
                split = _best_split(X[idx], ys, perm[start:start + max_features])
                if split is not None:
                    break
            if split is None:
                continue
            f, thr, _ = split
            go_left = X[idx, f] <= thr
            feature[node], threshold[node] = f, thr
            l_node, r_node = new_node(), new_node()
            left[node], right[node] = l_node, r_node
            stack.append((r_node, idx[~go_left]))
            stack.append((l_node, idx[go_left]))
        return cls(*(np.array(a) for a in (feature, threshold, left, right, label)))

    def predict(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(len(X), dtype=int)
        while True:
            f = self.feature[node]
            inner = f >= 0
            if not inner.any():
                return self.label[node]
            rows = np.flatnonzero(inner)
            go_left = X[rows, f[rows]] <= self.threshold[node[rows]]
            node[rows] = np.where(go_left, self.left[node[rows]], self.right[node[rows]])


@dataclass
class RandomForest:
    trees: list[DecisionTree]

    def predict(self, X: np.ndarray) -> np.ndarray:
        votes = np.stack([t.predict(X) for t in self.trees])
        support_votes = votes.sum(axis=0)
        # ties go to support
        return (2 * support_votes >= len(self.trees)).astype(int)


def _check_two_classes(y: np.ndarray) -> None:
    if len(np.unique(y)) < 2:
        raise ValueError("baseline training needs both classes present")


def train_random_forest(X, y, seed: int, n_trees: int = 15) -> RandomForest:
    """Bootstrap-aggregated gini trees with sqrt(n_features) candidates per split."""
    X, y = np.asarray(X, dtype=float), np.asarray(y, dtype=int)
    _check_two_classes(y)
    rng = np.random.default_rng(seed)
    max_features = max(1, int(math.sqrt(X.shape[1])))
    trees = []
    for _ in range(n_trees):
        sample = rng.integers(0, len(y), size=len(y))
        trees.append(DecisionTree.grow(X[sample], y[sample], max_features, rng))
    return RandomForest(trees)


def rf_predict(forest: RandomForest, vector) -> Relation:
    return (Relation.ATTACK, Relation.SUPPORT)[int(forest.predict(np.atleast_2d(vector))[0])]


# -- linear SVM -------------------------------------------------------------------

@dataclass
class LinearSVM:
    w: np.ndarray
    b: float
    C: float

    def decision(self, X: np.ndarray) -> np.ndarray:
        return X @ self.w + self.b

    def predict(self, X: np.ndarray) -> np.ndarray:
        return (self.decision(X) >= 0).astype(int)


def fit_hinge(X: np.ndarray, y: np.ndarray, C: float, max_iter: int = 1000) -> LinearSVM:
    """Full-batch subgradient descent on (1/2C)|w|^2 + mean hinge loss.

    The bias is learned as the weight of a constant input column. Step size
    follows the 1/(lambda t) schedule; the average of the second half of the
    iterates is returned.
    """
    signs = 2.0 * y - 1.0
    Xa = np.hstack([X, np.ones((len(X), 1))])
    lam = 1.0 / C
    w = np.zeros(Xa.shape[1])
    w_sum = np.zeros_like(w)
    n_avg = 0
    for t in range(1, max_iter + 1):
        margins = signs * (Xa @ w)
        active = margins < 1.0
        grad = lam * w - (signs[active] @ Xa[active]) / len(y)
        w = w - grad / (lam * t)
        if t > max_iter // 2:
            w_sum += w
            n_avg += 1
    w = w_sum / n_avg
    return LinearSVM(w[:-1], float(w[-1]), C)


def _macro_f1(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    labels = (Relation.ATTACK, Relation.SUPPORT)
    s = score([labels[i] for i in y_true], [labels[i] for i in y_pred])
    defined = [v for v in (s.f1_attack, s.f1_support) if v is not None]
    return sum(defined) / len(defined)


def train_linear_svm(X, y, c_grid: Sequence[float] = DEFAULT_C_GRID, seed: int = 42,
                     max_iter: int = 1000) -> LinearSVM:
    """Pick C by macro-F1 on a seeded 20% validation split, then refit on everything."""
    X, y = np.asarray(X, dtype=float), np.asarray(y, dtype=int)
    _check_two_classes(y)
    grid = list(c_grid)
    if not grid:
        raise ValueError("c_grid must not be empty")
    best_c = grid[0]
    if len(grid) > 1:
        rng = np.random.default_rng(seed)
        order = rng.permutation(len(y))
        n_val = max(1, int(round(0.2 * len(y))))
        val, fit = order[:n_val], order[n_val:]
        if len(np.unique(y[fit])) < 2:
            fit = order
        best_score = -1.0
        for c in grid:
            model = fit_hinge(X[fit], y[fit], c, max_iter)
            s = _macro_f1(y[val], model.predict(X[val]))
            if s > best_score:
                best_c, best_score = c, s
    return fit_hinge(X, y, best_c, max_iter)


def svm_predict(svm: LinearSVM, vector) -> Relation:
    return (Relation.ATTACK, Relation.SUPPORT)[int(svm.predict(np.atleast_2d(vector))[0])]


# -- end-to-end baseline classifier ---------------------------------------------------

@dataclass(frozen=True)
class BaselineConfig:
    kind: str = "rf"
    n_trees: int = 15
    c_grid: tuple[float, ...] = DEFAULT_C_GRID
    max_vocab: int = 1000
    svm_iter: int = 1000
    seed: int = 42

    def __post_init__(self):
        if self.kind not in ("rf", "svm"):
            raise ValueError(f"unknown baseline {self.kind!r}")
        object.__setattr__(self, "c_grid", tuple(float(c) for c in self.c_grid))


class BaselineClassifier:
    def __init__(self, config: BaselineConfig, lexicon: SentimentLexicon | None = None,
                 tagger: PosTagger | None = None):
        self.config = config
        self.lexicon = lexicon or SentimentLexicon()
        self.tagger = tagger or default_tagger()
        self.tfidf: TfidfModel | None = None
        self.normalizer: Normalizer | None = None
        self.model: RandomForest | LinearSVM | None = None

    def _raw(self, pairs: Sequence[ArgumentPair], fit_tfidf: bool = False) -> np.ndarray:
        child = [text_tokens(p.child, self.tagger) for p in pairs]
        parent = [text_tokens(p.parent, self.tagger) for p in pairs]
        words = lambda toks: [t.surface for t in toks if t.pos is not PosTag.PUNCT]
        child_words = [words(t) for t in child]
        parent_words = [words(t) for t in parent]
        if fit_tfidf:
            self.tfidf = TfidfModel.fit(child_words + parent_words, self.config.max_vocab)
        extra = np.array([
            [*common_pos_counts(c, p), alt_sentiment_score(cw, self.lexicon),
             alt_sentiment_score(pw, self.lexicon)]
            for c, p, cw, pw in zip(child, parent, child_words, parent_words)
        ]).reshape(len(pairs), 5)
        standard = np.array([build_feature_vector(p, self.lexicon, self.tagger) for p in pairs])
        return np.hstack([
            standard.reshape(len(pairs), -1),
            self.tfidf.transform(child_words),
            self.tfidf.transform(parent_words),
            extra,
        ])

    def vectors(self, pairs: Sequence[ArgumentPair]) -> np.ndarray:
        return apply_normalizer(self.normalizer, self._raw(pairs))

    def fit(self, pairs: Sequence[ArgumentPair]) -> "BaselineClassifier":
        raw = self._raw(pairs, fit_tfidf=True)
        self.normalizer = fit_normalizer(raw)
        X = apply_normalizer(self.normalizer, raw)
        y = np.array([int(p.label is Relation.SUPPORT) for p in pairs])
        if self.config.kind == "rf":
            self.model = train_random_forest(X, y, self.config.seed, self.config.n_trees)
        else:
            self.model = train_linear_svm(X, y, self.config.c_grid, self.config.seed, self.config.svm_iter)
        return self

    def predict(self, pairs: Sequence[ArgumentPair]) -> list[Relation]:
        if not pairs:
            return []
        labels = (Relation.ATTACK, Relation.SUPPORT)
        return [labels[i] for i in self.model.predict(self.vectors(pairs))]

    def save(self, path: str | Path) -> None:
        arrays = {
            "normalizer/mins": self.normalizer.mins,
            "normalizer/maxs": self.normalizer.maxs,
            "tfidf/vocabulary": np.array(sorted(self.tfidf.vocabulary, key=self.tfidf.vocabulary.get)),
            "tfidf/idf": self.tfidf.idf,
        }
        if isinstance(self.model, RandomForest):
            for i, tree in enumerate(self.model.trees):
                for attr in ("feature", "threshold", "left", "right", "label"):
                    arrays[f"tree{i:03d}/{attr}"] = getattr(tree, attr)
        else:
            arrays["svm/w"] = self.model.w
            arrays["svm/b"] = np.array([self.model.b])
            arrays["svm/C"] = np.array([self.model.C])
        save_checkpoint(path, arrays, {"kind": "baseline", "config": {
            **self.config.__dict__, "c_grid": list(self.config.c_grid)}})

    @classmethod
    def from_checkpoint(cls, arrays: dict, meta: dict, lexicon=None, tagger=None) -> "BaselineClassifier":
        clf = cls(BaselineConfig(**meta["config"]), lexicon, tagger)
        clf.normalizer = Normalizer(arrays["normalizer/mins"], arrays["normalizer/maxs"])
        vocab = [str(w) for w in arrays["tfidf/vocabulary"]]
        clf.tfidf = TfidfModel({w: i for i, w in enumerate(vocab)}, arrays["tfidf/idf"])
        if clf.config.kind == "rf":
            trees = []
            for i in range(clf.config.n_trees):
                trees.append(DecisionTree(*(arrays[f"tree{i:03d}/{a}"] for a in
                                            ("feature", "threshold", "left", "right", "label"))))
            clf.model = RandomForest(trees)
        else:
            clf.model = LinearSVM(arrays["svm/w"], float(arrays["svm/b"][0]), float(arrays["svm/C"][0]))
        return clf

"""Command-line entry point: ``argrel {stats,train,eval,benchmark,gradcheck}``."""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path
from typing import Sequence

import numpy as np
import yaml

from . import corpus as corpus_mod
from .baselines import BaselineClassifier, BaselineConfig
from .corpus import DATASETS, REPORT_ORDER, CorpusError, compute_stats, load_corpus
from .embeddings import DEFAULT_SEQ_LEN, VectorTable, load_vectors
from .evaluation import (
    BASELINE_KINDS,
    BenchmarkCell,
    BenchmarkPlan,
    aggregate,
    balance_training,
    render_table,
    run_benchmark,
    score,
    training_sets,
    write_reports,
)
from .features import PosTagger, SentimentLexicon
from .models import (
    ARCHITECTURES,
    Batch,
    ModelConfig,
    NeuralClassifier,
    Resources,
    build_model,
    check_model_gradients,
)
from .nn import load_checkpoint

log = logging.getLogger("argrel")

BASELINES = BASELINE_KINDS


class CommandError(Exception):
    """A user-facing failure; printed without a traceback."""


@dataclasses.dataclass
class RunConfig:
    corpus: str | None = None
    vectors: dict[str, tuple[str, int]] = dataclasses.field(default_factory=dict)
    lexicon: str | None = None
    pos_rules: str | None = None
    model: dict = dataclasses.field(default_factory=dict)
    baseline: dict = dataclasses.field(default_factory=dict)
    train: list[str] | None = None
    benchmark: dict = dataclasses.field(default_factory=dict)
    seed: int = 42
    out: str = "out"
    jobs: int = 1


def _parse_vectors(raw) -> dict[str, tuple[str, int]]:
    if raw is None:
        return {}
    if isinstance(raw, dict) and "path" in raw:
        raw = {Path(raw["path"]).stem: raw}
    if not isinstance(raw, dict):
        raise CommandError("config: 'vectors' must map names to {path, dim}")
    out = {}
    for name, spec in raw.items():
        try:
            out[str(name)] = (str(spec["path"]), int(spec["dim"]))
        except (TypeError, KeyError, ValueError):
            raise CommandError(f"config: vectors.{name} needs 'path' and 'dim'") from None
    return out


def load_run_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        raw = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    except OSError as exc:
        raise CommandError(f"cannot read config {path}: {exc.strerror}") from None
    except yaml.YAMLError as exc:
        raise CommandError(f"config {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise CommandError(f"config {path}: top level must be a mapping")
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(raw) - known
    if unknown:
        raise CommandError(f"config {path}: unknown keys {', '.join(sorted(unknown))}")
    raw["vectors"] = _parse_vectors(raw.get("vectors"))
    return RunConfig(**raw)


def resolve(args: argparse.Namespace) -> RunConfig:
    """Config file values with command-line flags layered on top."""
    cfg = load_run_config(getattr(args, "config", None))
    if getattr(args, "corpus", None):
        cfg.corpus = args.corpus
    if getattr(args, "vectors", None):
        if not args.dim:
            raise CommandError("--vectors needs --dim")
        cfg.vectors = {Path(args.vectors).stem: (args.vectors, args.dim)}
    if getattr(args, "lexicon", None):
        cfg.lexicon = args.lexicon
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "out", None):
        cfg.out = args.out
    if getattr(args, "jobs", None):
        cfg.jobs = args.jobs
    if getattr(args, "seq_len", None):
        cfg.model["seq_len"] = args.seq_len
    if getattr(args, "architecture", None):
        cfg.model["architecture"] = args.architecture
    if getattr(args, "features", None):
        cfg.model["feature_set"] = args.features
    if getattr(args, "epochs", None):
        cfg.model["epochs"] = args.epochs
    if getattr(args, "train", None):
        cfg.train = args.train
    return cfg


def _require_file(path: str | None, what: str) -> str:
    if not path:
        raise CommandError(f"no {what} given")
    if not Path(path).is_file():
        raise CommandError(f"{what} not found: {path}")
    return path


def _load_corpus(cfg: RunConfig):
    try:
        return load_corpus(_require_file(cfg.corpus, "corpus"))
    except CorpusError as exc:
        raise CommandError(f"corpus: {exc}") from None


def _load_lexicon(cfg: RunConfig) -> SentimentLexicon:
    if not cfg.lexicon:
        return SentimentLexicon()
    try:
        return SentimentLexicon.from_file(_require_file(cfg.lexicon, "lexicon"))
    except ValueError as exc:
        raise CommandError(f"features: {exc}") from None


def _load_tagger(cfg: RunConfig) -> PosTagger:
    if cfg.pos_rules:
        return PosTagger.from_file(_require_file(cfg.pos_rules, "POS rule table"))
    return PosTagger.from_file()


def _load_tables(cfg: RunConfig) -> dict[str, VectorTable]:
    tables = {}
    for name, (path, dim) in cfg.vectors.items():
        try:
            tables[name] = load_vectors(_require_file(path, "vector file"), dim)
        except ValueError as exc:
            raise CommandError(f"embeddings: {exc}") from None
    return tables


def _model_config(cfg: RunConfig, **overrides) -> ModelConfig:
    try:
        return ModelConfig.from_dict({"seed": cfg.seed, **cfg.model, **overrides})
    except (TypeError, ValueError) as exc:
        raise CommandError(f"models: {exc}") from None


def _baseline_config(cfg: RunConfig, kind: str) -> BaselineConfig:
    try:
        return BaselineConfig(**{"seed": cfg.seed, **cfg.baseline, "kind": kind})
    except (TypeError, ValueError) as exc:
        raise CommandError(f"baselines: {exc}") from None


@dataclasses.dataclass
class ClassifierFactory:
    """Builds an unfitted classifier for a benchmark cell (picklable for worker processes)."""

    run: RunConfig
    tables: dict[str, VectorTable]
    lexicon: SentimentLexicon
    tagger: PosTagger

    def __call__(self, cell: BenchmarkCell):
        if cell.architecture in BASELINES:
            return BaselineClassifier(_baseline_config(self.run, cell.architecture), self.lexicon, self.tagger)
        config = _model_config(self.run, architecture=cell.architecture, feature_set=cell.feature_set)
        return NeuralClassifier(config, Resources(self.tables[cell.embedding], self.lexicon, self.tagger))


# -- commands -------------------------------------------------------------------

def cmd_stats(args) -> int:
    cfg = resolve(args)
    stats = compute_stats(_load_corpus(cfg))
    print(f"{'dataset':<8} {'attacks':>8} {'supports':>9}")
    for s in stats:
        print(f"{s.dataset:<8} {s.attacks:>8} {s.supports:>9}")
    return 0


def _train_ids(cfg: RunConfig, pairs) -> list[str]:
    present = [ds for ds in DATASETS if any(p.dataset == ds for p in pairs)]
    ids = cfg.train or present
    for ds in ids:
        corpus_mod.check_dataset(ds)
    return list(ids)


def cmd_train(args) -> int:
    cfg = resolve(args)
    pairs = _load_corpus(cfg)
    train_ids = _train_ids(cfg, pairs)
    train = [p for p in pairs if p.dataset in set(train_ids)]
    if not train:
        raise CommandError("corpus: no pairs in the training datasets")
    train = balance_training(train, cfg.benchmark.get("oversample", ["essay"]), cfg.seed)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    lexicon, tagger = _load_lexicon(cfg), _load_tagger(cfg)
    arch = cfg.model.get("architecture", "attention")
    if arch in BASELINES:
        clf = BaselineClassifier(_baseline_config(cfg, arch), lexicon, tagger).fit(train)
        losses = []
    else:
        tables = _load_tables(cfg)
        if len(tables) != 1:
            raise CommandError("train needs exactly one vector table (--vectors/--dim)")
        table = next(iter(tables.values()))
        clf = NeuralClassifier(_model_config(cfg), Resources(table, lexicon, tagger))
        history = clf.fit(train)
        losses = history.losses
        with open(out / "train.log", "w", encoding="utf-8") as fh:
            for i, loss in enumerate(history.pretrain_losses, 1):
                fh.write(f"pretrain_epoch {i} reconstruction_loss {loss:.8f}\n")
            for i, loss in enumerate(losses, 1):
                fh.write(f"epoch {i} loss {loss:.8f}\n")
    clf.save(out / "model.npz")
    for i, loss in enumerate(losses, 1):
        print(f"epoch {i} loss {loss:.6f}")
    print(f"checkpoint: {out / 'model.npz'}")
    return 0


def load_classifier(path: str, cfg: RunConfig):
    arrays, meta = load_checkpoint(_require_file(path, "checkpoint"))
    lexicon, tagger = _load_lexicon(cfg), _load_tagger(cfg)
    if meta["kind"] == "baseline":
        return BaselineClassifier.from_checkpoint(arrays, meta, lexicon, tagger)
    tables = _load_tables(cfg)
    if len(tables) != 1:
        raise CommandError("eval of a neural checkpoint needs --vectors/--dim")
    try:
        return NeuralClassifier.from_checkpoint(arrays, meta, Resources(next(iter(tables.values())), lexicon, tagger))
    except ValueError as exc:
        raise CommandError(f"models: {exc}") from None


def cmd_eval(args) -> int:
    cfg = resolve(args)
    clf = load_classifier(args.checkpoint, cfg)
    pairs = _load_corpus(cfg)
    exclude = set(args.exclude or [])
    rows = {}
    for ds in REPORT_ORDER:
        test = [p for p in pairs if p.dataset == ds]
        if test:
            rows[ds] = score([p.label for p in test], clf.predict(test))
    try:
        report = aggregate(rows, exclude, name=Path(args.checkpoint).stem)
    except ValueError as exc:
        raise CommandError(f"eval: {exc}") from None
    paths = write_reports([report], cfg.out)
    print(render_table([report]), end="")
    print(f"reports: {', '.join(str(p) for p in paths)}")
    return 0


def benchmark_plan(cfg: RunConfig, pairs, tables) -> BenchmarkPlan:
    b = cfg.benchmark
    archs = b.get("architectures", list(ARCHITECTURES))
    for a in archs:
        if a not in ARCHITECTURES and a not in BASELINES:
            raise CommandError(f"benchmark: unknown architecture {a!r}")
    neural = [a for a in archs if a in ARCHITECTURES]
    if neural and not tables:
        raise CommandError("benchmark: neural architectures need vector tables")
    present = {p.dataset for p in pairs}
    if "train_sets" in b:
        train_sets = [tuple(t) if isinstance(t, list) else (t,) for t in b["train_sets"]]
    else:
        train_sets = training_sets(present, pair_with_others=bool(b.get("pair_with_others", False)))
    if not train_sets:
        raise CommandError("benchmark: no training datasets available")
    return BenchmarkPlan(
        architectures=archs,
        embeddings=b.get("embeddings", list(tables)),
        feature_sets=b.get("feature_sets", ["syntactic", "all"]),
        train_sets=train_sets,
        oversample=frozenset(b.get("oversample", ["essay"])),
    )


def cmd_benchmark(args) -> int:
    cfg = resolve(args)
    pairs = _load_corpus(cfg)
    tables = _load_tables(cfg)
    plan = benchmark_plan(cfg, pairs, tables)
    factory = ClassifierFactory(cfg, tables, _load_lexicon(cfg), _load_tagger(cfg))
    try:
        reports = run_benchmark(plan, pairs, factory, seed=cfg.seed, jobs=cfg.jobs)
    except (CorpusError, ValueError) as exc:
        raise CommandError(f"benchmark: {exc}") from None
    paths = write_reports(reports, cfg.out)
    print(render_table(reports), end="")
    print(f"reports: {', '.join(str(p) for p in paths)}")
    return 0


# toy scale for finite-difference checks
GRADCHECK_SCALE = dict(seq_len=5, emb_dim=6, gru_hidden=4, batch=3)


def toy_batch(rng: np.random.Generator, config: ModelConfig, emb_dim: int, batch: int) -> Batch:
    L = config.seq_len
    lengths_c = rng.integers(1, L + 1, size=batch)
    lengths_p = rng.integers(1, L + 1, size=batch)
    cmask = np.arange(L)[None, :] < lengths_c[:, None]
    pmask = np.arange(L)[None, :] < lengths_p[:, None]
    child = rng.normal(size=(batch, L, emb_dim)) * cmask[..., None]
    parent = rng.normal(size=(batch, L, emb_dim)) * pmask[..., None]
    feats = rng.uniform(size=(batch, config.n_features))
    labels = rng.integers(0, 2, size=batch)
    return Batch(child, cmask, parent, pmask, feats, labels)


def gradcheck_architecture(arch: str, seed: int, tolerance: float = 1e-4):
    s = GRADCHECK_SCALE
    config = ModelConfig(architecture=arch, gru_hidden=s["gru_hidden"], seq_len=s["seq_len"],
                         dense_sizes=(32,), ae_hidden=8, seed=seed)
    model = build_model(config, s["emb_dim"])
    batch = toy_batch(np.random.default_rng([seed, 7]), config, s["emb_dim"], s["batch"])
    if arch == "autoencoder":
        model.fit_scaler([model.raw_input(batch)])
    return check_model_gradients(model, batch, tolerance)


def cmd_gradcheck(args) -> int:
    archs = args.architecture or list(ARCHITECTURES)
    ok = True
    for arch in archs:
        for seed in range(args.seeds):
            reports = gradcheck_architecture(arch, seed, args.tolerance)
            for i, report in enumerate(reports):
                # the autoencoder also checks its reconstruction objective
                label = arch if i == 0 else f"{arch}/recon"
                status = "pass" if report.passed else "FAIL"
                print(f"{label:<18} seed {seed}  max_rel_err {report.max_error:.3e}  {status}")
                ok &= report.passed
    return 0 if ok else 1


# -- argument parsing -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="argrel", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log per-epoch progress")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, vectors=True, model=False):
        p.add_argument("--config", help="YAML run configuration")
        p.add_argument("--corpus", help="line-delimited JSON corpus")
        p.add_argument("--lexicon", help="sentiment lexicon (word<TAB>pos<TAB>neg)")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output directory")
        if vectors:
            p.add_argument("--vectors", help="pretrained word-vector text file")
            p.add_argument("--dim", type=int, help="word-vector dimension")
            p.add_argument("--seq-len", type=int, help=f"sequence length (default {DEFAULT_SEQ_LEN})")
        if model:
            p.add_argument("--architecture", choices=ARCHITECTURES + BASELINES)
            p.add_argument("--features", choices=("syntactic", "all"))
            p.add_argument("--epochs", type=int)

    p = sub.add_parser("stats", help="per-dataset attack/support counts")
    p.add_argument("--config")
    p.add_argument("--corpus")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("train", help="train one model and write a checkpoint")
    common(p, model=True)
    p.add_argument("--train", nargs="+", metavar="DATASET", help="training dataset ids")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on every dataset in a corpus")
    common(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--exclude", nargs="+", metavar="DATASET",
                   help="datasets left out of the averages (e.g. the training datasets)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("benchmark", help="cross-dataset train/test matrix")
    common(p)
    p.add_argument("--jobs", type=int, help="parallel worker processes")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("gradcheck", help="finite-difference gradient check at toy scale")
    p.add_argument("--architecture", nargs="+", choices=ARCHITECTURES)
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--tolerance", type=float, default=1e-4)
    p.set_defaults(func=cmd_gradcheck)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s %(levelname)s %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (CommandError, CorpusError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

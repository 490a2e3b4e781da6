"""The four relation classifiers (concat, mix, autoencoder, attention) and training.

Every model maps (child sequence, parent sequence, standard features) to a
probability over (attack, support). Class index 0 is attack, 1 is support.
"""
from __future__ import annotations

import dataclasses
import logging
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import ArgumentPair, Relation
from .embeddings import DEFAULT_SEQ_LEN, VectorTable, embed_batch
from .features import (
    N_FEATURES,
    SYNTACTIC_SLOTS,
    Normalizer,
    PosTag,
    PosTagger,
    SentimentLexicon,
    apply_normalizer,
    default_tagger,
    feature_matrix,
    fit_normalizer,
    tokenize,
)
from .nn import (
    GRU,
    Adam,
    Dense,
    GradCheckReport,
    Param,
    bce,
    bce_grad,
    grad_check,
    load_checkpoint,
    masked_softmax,
    save_checkpoint,
    softmax,
    softmax_cross_entropy,
)

log = logging.getLogger(__name__)

ARCHITECTURES = ("concat", "mix", "autoencoder", "attention")
FEATURE_SETS = ("syntactic", "all")
HIDDEN_GRID = (32, 64, 128, 256)
DEFAULT_DENSE = {
    "concat": (256, 64),
    "mix": (256, 64),
    "autoencoder": (32,),
    "attention": (128,),
}
LABELS = (Relation.ATTACK, Relation.SUPPORT)


def label_index(rel: Relation) -> int:
    return LABELS.index(rel)


@dataclass(frozen=True)
class ModelConfig:
    architecture: str = "attention"
    gru_hidden: int = 128
    dense_sizes: tuple[int, ...] | None = None
    seq_len: int = DEFAULT_SEQ_LEN
    feature_set: str = "all"
    seed: int = 42
    epochs: int = 10
    batch_size: int = 32
    lr: float = 1e-3
    ae_hidden: int = 128
    ae_epochs: int = 10

    def __post_init__(self):
        if self.architecture not in ARCHITECTURES:
            raise ValueError(f"unknown architecture {self.architecture!r}")
        if self.feature_set not in FEATURE_SETS:
            raise ValueError(f"unknown feature set {self.feature_set!r}")
        if self.dense_sizes is None:
            object.__setattr__(self, "dense_sizes", DEFAULT_DENSE[self.architecture])
        else:
            object.__setattr__(self, "dense_sizes", tuple(int(s) for s in self.dense_sizes))
        if not 1 <= len(self.dense_sizes) <= 2 or any(s not in HIDDEN_GRID for s in self.dense_sizes):
            raise ValueError(
                f"dense_sizes must be 1 or 2 layers drawn from {HIDDEN_GRID}, got {self.dense_sizes}"
            )
        for name in ("gru_hidden", "seq_len", "epochs", "batch_size", "ae_hidden"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.ae_epochs < 0:
            raise ValueError("ae_epochs must be non-negative")

    @property
    def n_features(self) -> int:
        return len(SYNTACTIC_SLOTS) if self.feature_set == "syntactic" else N_FEATURES

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["dense_sizes"] = list(self.dense_sizes)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown model config keys: {', '.join(sorted(unknown))}")
        return cls(**d)


@dataclass
class Batch:
    child: np.ndarray  # (B, L, d)
    child_mask: np.ndarray  # (B, L)
    parent: np.ndarray
    parent_mask: np.ndarray
    features: np.ndarray  # (B, F)
    labels: np.ndarray | None = None  # (B,) ints

    def __len__(self) -> int:
        return self.child.shape[0]


class ClassifierHead:
    """Sigmoid dense stack followed by a linear 2-way output layer."""

    def __init__(self, n_in: int, sizes: Sequence[int], rng: np.random.Generator):
        self.layers = []
        width = n_in
        for i, size in enumerate(sizes):
            self.layers.append(Dense(f"dense{i}", width, size, "sigmoid", rng))
            width = size
        self.layers.append(Dense("output", width, 2, "identity", rng))

    def params(self) -> list[Param]:
        return [p for layer in self.layers for p in layer.params()]

    def forward(self, x: np.ndarray) -> np.ndarray:
        for layer in self.layers:
            x = layer.forward(x)
        return x

    def backward(self, d_logits: np.ndarray) -> np.ndarray:
        d = d_logits
        for layer in reversed(self.layers):
            d = layer.backward(d)
        return d


class RelationModel:
    architecture = ""

    def __init__(self, config: ModelConfig, emb_dim: int, n_features: int):
        self.config = config
        self.emb_dim = emb_dim
        self.n_features = n_features
        self.rng = np.random.default_rng(config.seed)

    def params(self) -> list[Param]:
        raise NotImplementedError

    def all_params(self) -> list[Param]:
        """Every stored parameter, including frozen ones."""
        return self.params()

    def _logits(self, batch: Batch) -> np.ndarray:
        raise NotImplementedError

    def _backward(self, d_logits: np.ndarray) -> None:
        raise NotImplementedError

    def _check(self, batch: Batch) -> None:
        for name in ("child", "parent"):
            seq = getattr(batch, name)
            if seq.ndim != 3 or seq.shape[2] != self.emb_dim:
                raise ValueError(f"{name} must be (batch, steps, {self.emb_dim}), got {seq.shape}")
        if batch.features.shape != (len(batch), self.n_features):
            raise ValueError(
                f"features must be ({len(batch)}, {self.n_features}), got {batch.features.shape}"
            )

    def forward(self, batch: Batch) -> np.ndarray:
        self._check(batch)
        return softmax(self._logits(batch), axis=1)

    def loss(self, batch: Batch) -> float:
        self._check(batch)
        loss, _, _ = softmax_cross_entropy(self._logits(batch), batch.labels)
        return loss

    def loss_and_backward(self, batch: Batch) -> float:
        self._check(batch)
        loss, _, d_logits = softmax_cross_entropy(self._logits(batch), batch.labels)
        self._backward(d_logits)
        return loss

    def state_dict(self) -> dict[str, np.ndarray]:
        return {p.name: p.value.copy() for p in self.all_params()}

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        for p in self.all_params():
            if p.name not in state:
                raise ValueError(f"checkpoint is missing parameter {p.name}")
            if state[p.name].shape != p.value.shape:
                raise ValueError(f"shape mismatch for {p.name}")
            p.value[...] = state[p.name]

    def gradcheck_targets(self) -> list:
        return [self]


class ConcatModel(RelationModel):
    """Separate GRUs over child and parent; final states joined with features."""

    architecture = "concat"

    def __init__(self, config, emb_dim, n_features):
        super().__init__(config, emb_dim, n_features)
        h = config.gru_hidden
        self.gru_child = GRU("gru_child", emb_dim, h, self.rng)
        self.gru_parent = GRU("gru_parent", emb_dim, h, self.rng)
        self.head = ClassifierHead(2 * h + n_features, config.dense_sizes, self.rng)

    def params(self):
        return self.gru_child.params() + self.gru_parent.params() + self.head.params()

    def _logits(self, batch):
        _, hc = self.gru_child.forward(batch.child, batch.child_mask)
        _, hp = self.gru_parent.forward(batch.parent, batch.parent_mask)
        return self.head.forward(np.concatenate([hc, hp, batch.features], axis=1))

    def _backward(self, d_logits):
        h = self.config.gru_hidden
        dx = self.head.backward(d_logits)
        self.gru_child.backward(None, dx[:, :h])
        self.gru_parent.backward(None, dx[:, h:2 * h])


class MixModel(RelationModel):
    """One GRU over the child sequence followed by the parent sequence."""

    architecture = "mix"

    def __init__(self, config, emb_dim, n_features):
        super().__init__(config, emb_dim, n_features)
        self.gru = GRU("gru", emb_dim, config.gru_hidden, self.rng)
        self.head = ClassifierHead(config.gru_hidden + n_features, config.dense_sizes, self.rng)

    def params(self):
        return self.gru.params() + self.head.params()

    def _logits(self, batch):
        seq = np.concatenate([batch.child, batch.parent], axis=1)
        mask = np.concatenate([batch.child_mask, batch.parent_mask], axis=1)
        _, h = self.gru.forward(seq, mask)
        return self.head.forward(np.concatenate([h, batch.features], axis=1))

    def _backward(self, d_logits):
        dx = self.head.backward(d_logits)
        self.gru.backward(None, dx[:, :self.config.gru_hidden])


def similarity_scores(C: np.ndarray, P: np.ndarray, w: np.ndarray, b: float) -> np.ndarray:
    """s[..., i, j] = w · [c_i ; p_j] + b for row stacks C (..., Lc, d) and P (..., Lp, d)."""
    d = C.shape[-1]
    return (C @ w[:d])[..., :, None] + (P @ w[d:])[..., None, :] + b


class AttentionModel(RelationModel):
    """Bidirectional child/parent attention over first-stage GRU outputs.

    For each direction: s = W[c_i ; p_j] + b, α = row softmax over unmasked
    parent steps, c' = α P, c'' = [C ; c']; a second GRU reads c''.
    """

    architecture = "attention"

    def __init__(self, config, emb_dim, n_features):
        super().__init__(config, emb_dim, n_features)
        h = config.gru_hidden
        self.gru_child = GRU("gru_child", emb_dim, h, self.rng)
        self.gru_parent = GRU("gru_parent", emb_dim, h, self.rng)
        limit = np.sqrt(6.0 / (2 * h + 1))
        self.w_cp = Param("att_child.W", self.rng.uniform(-limit, limit, 2 * h))
        self.b_cp = Param("att_child.b", np.zeros(1))
        self.w_pc = Param("att_parent.W", self.rng.uniform(-limit, limit, 2 * h))
        self.b_pc = Param("att_parent.b", np.zeros(1))
        self.gru_child2 = GRU("gru_child_aware", 2 * h, h, self.rng)
        self.gru_parent2 = GRU("gru_parent_aware", 2 * h, h, self.rng)
        self.head = ClassifierHead(2 * h + n_features, config.dense_sizes, self.rng)
        self.alpha = self.beta = None

    def params(self):
        return (
            self.gru_child.params() + self.gru_parent.params()
            + [self.w_cp, self.b_cp, self.w_pc, self.b_pc]
            + self.gru_child2.params() + self.gru_parent2.params()
            + self.head.params()
        )

    def _logits(self, batch):
        C, _ = self.gru_child.forward(batch.child, batch.child_mask)
        P, _ = self.gru_parent.forward(batch.parent, batch.parent_mask)
        alpha = masked_softmax(
            similarity_scores(C, P, self.w_cp.value, self.b_cp.value[0]),
            batch.parent_mask[:, None, :],
        )
        beta = masked_softmax(
            similarity_scores(P, C, self.w_pc.value, self.b_pc.value[0]),
            batch.child_mask[:, None, :],
        )
        c_aware = np.concatenate([C, alpha @ P], axis=2)
        p_aware = np.concatenate([P, beta @ C], axis=2)
        _, fc = self.gru_child2.forward(c_aware, batch.child_mask)
        _, fp = self.gru_parent2.forward(p_aware, batch.parent_mask)
        self.alpha, self.beta = alpha, beta
        self._cache = (C, P)
        return self.head.forward(np.concatenate([fc, fp, batch.features], axis=1))

    @staticmethod
    def _attend_backward(d_att, weights, rows, cols, w, b):
        """Backprop through att = softmax(W[rows_i ; cols_j] + b) @ cols.

        Returns (d rows, d cols) and accumulates into w, b.
        """
        h = rows.shape[-1]
        d_cols = np.swapaxes(weights, 1, 2) @ d_att
        d_weights = d_att @ np.swapaxes(cols, 1, 2)
        ds = weights * (d_weights - (d_weights * weights).sum(axis=-1, keepdims=True))
        ds_rows, ds_cols = ds.sum(axis=2), ds.sum(axis=1)
        w.grad[:h] += np.einsum("bi,bih->h", ds_rows, rows)
        w.grad[h:] += np.einsum("bj,bjh->h", ds_cols, cols)
        b.grad += ds.sum()
        d_rows = ds_rows[..., None] * w.value[:h]
        d_cols += ds_cols[..., None] * w.value[h:]
        return d_rows, d_cols

    def _backward(self, d_logits):
        h = self.config.gru_hidden
        C, P = self._cache
        dx = self.head.backward(d_logits)
        dc_aware = self.gru_child2.backward(None, dx[:, :h])
        dp_aware = self.gru_parent2.backward(None, dx[:, h:2 * h])
        dC, dP = dc_aware[..., :h].copy(), dp_aware[..., :h].copy()
        d_rows, d_cols = self._attend_backward(dc_aware[..., h:], self.alpha, C, P, self.w_cp, self.b_cp)
        dC += d_rows
        dP += d_cols
        d_rows, d_cols = self._attend_backward(dp_aware[..., h:], self.beta, P, C, self.w_pc, self.b_pc)
        dP += d_rows
        dC += d_cols
        self.gru_child.backward(dC, None)
        self.gru_parent.backward(dP, None)


class AutoencoderModel(RelationModel):
    """Sigmoid autoencoder over the flattened embedding pair plus a small classifier.

    The encoder f(X) = σ(X W1) is pretrained to reconstruct X through
    σ(f(X) W2) under binary cross-entropy, then frozen; the classifier reads
    [f(X) ; features].
    """

    architecture = "autoencoder"

    def __init__(self, config, emb_dim, n_features):
        super().__init__(config, emb_dim, n_features)
        n_x = 2 * config.seq_len * emb_dim
        self.n_x = n_x
        self.encoder = Dense("encoder", n_x, config.ae_hidden, "sigmoid", self.rng, bias=False)
        self.decoder = Dense("decoder", config.ae_hidden, n_x, "sigmoid", self.rng, bias=False)
        self.head = ClassifierHead(config.ae_hidden + n_features, config.dense_sizes, self.rng)
        self.input_min = Param("input_scale.min", np.zeros(n_x))
        self.input_max = Param("input_scale.max", np.ones(n_x))

    def params(self):
        return self.head.params()

    def all_params(self):
        return (self.encoder.params() + self.decoder.params() + self.head.params()
                + [self.input_min, self.input_max])

    def _check(self, batch):
        super()._check(batch)
        L = self.config.seq_len
        if batch.child.shape[1] != L or batch.parent.shape[1] != L:
            raise ValueError(f"autoencoder needs sequences of exactly {L} steps")

    def raw_input(self, batch: Batch) -> np.ndarray:
        B = len(batch)
        return np.concatenate([batch.child.reshape(B, -1), batch.parent.reshape(B, -1)], axis=1)

    def fit_scaler(self, raw_inputs: Sequence[np.ndarray]) -> None:
        """Fit per-dimension min/max on training inputs (an iterable of (B, n_x) blocks)."""
        lo = np.full(self.n_x, np.inf)
        hi = np.full(self.n_x, -np.inf)
        for block in raw_inputs:
            lo = np.minimum(lo, block.min(axis=0))
            hi = np.maximum(hi, block.max(axis=0))
        self.input_min.value[...] = lo
        self.input_max.value[...] = hi

    def scale(self, raw: np.ndarray) -> np.ndarray:
        lo, hi = self.input_min.value, self.input_max.value
        span = hi - lo
        scaled = np.where(span > 0, (raw - lo) / np.where(span > 0, span, 1.0), 0.0)
        return np.clip(scaled, 0.0, 1.0)

    def encode(self, batch: Batch) -> np.ndarray:
        self._check(batch)
        return self.encoder.forward(self.scale(self.raw_input(batch)))

    def _logits(self, batch):
        code = self.encoder.forward(self.scale(self.raw_input(batch)))
        return self.head.forward(np.concatenate([code, batch.features], axis=1))

    def _backward(self, d_logits):
        self.head.backward(d_logits)

    # reconstruction objective
    def reconstruction_loss(self, x: np.ndarray) -> float:
        return bce(self.decoder.forward(self.encoder.forward(x)), x)

    def reconstruction_loss_and_backward(self, x: np.ndarray) -> float:
        x_hat = self.decoder.forward(self.encoder.forward(x))
        self.encoder.backward(self.decoder.backward(bce_grad(x_hat, x)))
        return bce(x_hat, x)

    def gradcheck_targets(self):
        return [self, ReconstructionObjective(self)]

    def pretrain(self, batches, epochs: int, lr: float) -> list[float]:
        """Train encoder/decoder on reconstruction; ``batches`` yields scaled (B, n_x) inputs."""
        params = self.encoder.params() + self.decoder.params()
        opt = Adam(params, lr=lr)
        history = []
        for epoch in range(epochs):
            losses, sizes = [], []
            for x in batches(epoch):
                if x.min() < 0.0 or x.max() > 1.0:
                    raise ValueError("autoencoder input must be rescaled to [0, 1]")
                opt.zero_grad()
                losses.append(self.reconstruction_loss_and_backward(x))
                sizes.append(len(x))
                opt.step()
            history.append(float(np.average(losses, weights=sizes)))
            log.info("pretrain epoch %d reconstruction_loss %.6f", epoch + 1, history[-1])
        return history


class ReconstructionObjective:
    """Adapter exposing the autoencoder reconstruction loss to ``grad_check``."""

    def __init__(self, model: AutoencoderModel):
        self.model = model

    def params(self):
        return self.model.encoder.params() + self.model.decoder.params()

    def _x(self, batch):
        return self.model.scale(self.model.raw_input(batch))

    def loss(self, batch):
        return self.model.reconstruction_loss(self._x(batch))

    def loss_and_backward(self, batch):
        return self.model.reconstruction_loss_and_backward(self._x(batch))


MODEL_CLASSES = {
    cls.architecture: cls for cls in (ConcatModel, MixModel, AutoencoderModel, AttentionModel)
}


def build_model(config: ModelConfig, emb_dim: int, n_features: int | None = None) -> RelationModel:
    n_features = config.n_features if n_features is None else n_features
    return MODEL_CLASSES[config.architecture](config, emb_dim, n_features)


def check_model_gradients(model: RelationModel, batch: Batch, tolerance: float = 1e-4) -> list[GradCheckReport]:
    return [grad_check(target, batch, tolerance) for target in model.gradcheck_targets()]


# -- data preparation and training ---------------------------------------------

@dataclass(frozen=True)
class Resources:
    table: VectorTable
    lexicon: SentimentLexicon = field(default_factory=SentimentLexicon)
    tagger: PosTagger = field(default_factory=default_tagger)


@dataclass
class PreparedData:
    """Tokenized pairs with their raw standard features; embedded lazily per batch."""

    child_tokens: list[list[str]]
    parent_tokens: list[list[str]]
    raw_features: np.ndarray
    labels: np.ndarray | None

    def __len__(self) -> int:
        return len(self.child_tokens)


def _words(text: str, tagger: PosTagger) -> list[str]:
    return [t.surface for t in tagger.tag(tokenize(text)) if t.pos is not PosTag.PUNCT]


def prepare(pairs: Sequence[ArgumentPair], resources: Resources) -> PreparedData:
    tagger = resources.tagger
    labels = np.array([label_index(p.label) for p in pairs], dtype=int)
    return PreparedData(
        [_words(p.child, tagger) for p in pairs],
        [_words(p.parent, tagger) for p in pairs],
        feature_matrix(pairs, resources.lexicon, tagger),
        labels,
    )


def select_features(normalized: np.ndarray, feature_set: str) -> np.ndarray:
    return normalized[:, SYNTACTIC_SLOTS] if feature_set == "syntactic" else normalized


@dataclass
class TrainHistory:
    losses: list[float] = field(default_factory=list)
    pretrain_losses: list[float] = field(default_factory=list)


class NeuralClassifier:
    """Feature normalization, embedding lookup and a relation model, trained end to end."""

    def __init__(self, config: ModelConfig, resources: Resources):
        self.config = config
        self.resources = resources
        self.normalizer: Normalizer | None = None
        self.model = build_model(config, resources.table.dim)

    def _batch(self, data: PreparedData, idx: np.ndarray) -> Batch:
        table, L = self.resources.table, self.config.seq_len
        child, cmask = embed_batch([data.child_tokens[i] for i in idx], table, L)
        parent, pmask = embed_batch([data.parent_tokens[i] for i in idx], table, L)
        feats = select_features(apply_normalizer(self.normalizer, data.raw_features[idx]),
                                self.config.feature_set)
        labels = None if data.labels is None else data.labels[idx]
        return Batch(child, cmask, parent, pmask, feats, labels)

    def _chunks(self, n: int, order: np.ndarray | None = None):
        order = np.arange(n) if order is None else order
        bs = self.config.batch_size
        for start in range(0, n, bs):
            yield order[start:start + bs]

    def fit(self, pairs: Sequence[ArgumentPair], epochs: int | None = None,
            stop_at_train_f1: float | None = None) -> TrainHistory:
        if not pairs:
            raise ValueError("cannot train on an empty corpus")
        data = prepare(pairs, self.resources)
        self.normalizer = fit_normalizer(data.raw_features)
        return train(self, data, epochs=epochs, stop_at_train_f1=stop_at_train_f1)

    def predict_proba(self, pairs: Sequence[ArgumentPair]) -> np.ndarray:
        if not pairs:
            return np.zeros((0, 2))
        data = prepare(pairs, self.resources)
        return np.concatenate([
            self.model.forward(self._batch(data, idx)) for idx in self._chunks(len(data))
        ])

    def predict(self, pairs: Sequence[ArgumentPair]) -> list[Relation]:
        return [LABELS[i] for i in self.predict_proba(pairs).argmax(axis=1)]

    def save(self, path: str | Path) -> None:
        arrays = {f"param/{k}": v for k, v in self.model.state_dict().items()}
        arrays["normalizer/mins"] = self.normalizer.mins
        arrays["normalizer/maxs"] = self.normalizer.maxs
        save_checkpoint(path, arrays, {
            "kind": "neural",
            "config": self.config.to_dict(),
            "emb_dim": self.resources.table.dim,
        })

    @classmethod
    def from_checkpoint(cls, arrays: dict, meta: dict, resources: Resources) -> "NeuralClassifier":
        if meta["emb_dim"] != resources.table.dim:
            raise ValueError(
                f"checkpoint expects {meta['emb_dim']}-d vectors, got {resources.table.dim}-d"
            )
        clf = cls(ModelConfig.from_dict(meta["config"]), resources)
        clf.model.load_state_dict({k[6:]: v for k, v in arrays.items() if k.startswith("param/")})
        clf.normalizer = Normalizer(arrays["normalizer/mins"], arrays["normalizer/maxs"])
        return clf


def train(clf: NeuralClassifier, data: PreparedData, epochs: int | None = None,
          stop_at_train_f1: float | None = None) -> TrainHistory:
    """Mini-batch Adam training with a seeded per-epoch shuffle.

    ``stop_at_train_f1`` ends training early once both per-class training F1
    scores reach the threshold (checked after each epoch).
    """
    from .evaluation import confusion_counts, f1

    config, model = clf.config, clf.model
    epochs = config.epochs if epochs is None else epochs
    n = len(data)
    if len(np.unique(data.labels)) < 2:
        warnings.warn("training data contains a single class", RuntimeWarning, stacklevel=2)
    rng = np.random.default_rng([config.seed, 1])
    history = TrainHistory()

    if isinstance(model, AutoencoderModel):
        model.fit_scaler(model.raw_input(clf._batch(data, idx)) for idx in clf._chunks(n))
        pre_rng = np.random.default_rng([config.seed, 2])
        history.pretrain_losses = model.pretrain(
            lambda epoch: (model.scale(model.raw_input(clf._batch(data, idx)))
                           for idx in clf._chunks(n, pre_rng.permutation(n))),
            config.ae_epochs, config.lr,
        )

    opt = Adam(model.params(), lr=config.lr)
    for epoch in range(epochs):
        losses, sizes = [], []
        for idx in clf._chunks(n, rng.permutation(n)):
            opt.zero_grad()
            losses.append(model.loss_and_backward(clf._batch(data, idx)))
            sizes.append(len(idx))
            opt.step()
        history.losses.append(float(np.average(losses, weights=sizes)))
        log.info("epoch %d loss %.6f", epoch + 1, history.losses[-1])
        if stop_at_train_f1 is not None:
            pred = np.concatenate([
                model.forward(clf._batch(data, idx)).argmax(axis=1) for idx in clf._chunks(n)
            ])
            counts = confusion_counts([LABELS[i] for i in data.labels], [LABELS[i] for i in pred])
            scores = [f1(counts, rel) for rel in LABELS]
            if all(s is None or s >= stop_at_train_f1 for s in scores):
                break
    return history

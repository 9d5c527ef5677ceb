"""Mention-pair features, candidate windows and the feedforward pair scorer.

A pair input concatenates both mention representations (mean of first and
last token embeddings) with per-mention features and pair features. The
layout is self-describing so checkpoints stay readable when vocabularies
change. Distances are one-hot log2 buckets capped at 64k; the remaining
pair features are scalars.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

from . import nnet
from .model import CATEGORIES, Document, GENDERS, Mention, NUMBERS, PERSONS, PipelineConfig

# Fixed dependency-relation vocabulary; unlisted labels hit the unknown slot.
DEP_LABELS = ("root", "nsubj", "obj", "iobj", "obl", "nmod", "appos",
              "det", "amod", "conj", "dep", "<unk>")

N_DISTANCE_BUCKETS = 18  # 0, then log2 buckets 1..17 capped at 64k


def distance_bucket(d: int) -> int:
    if d <= 0:
        return 0
    return min(int(np.log2(d)) + 1, N_DISTANCE_BUCKETS - 1)


def _one_hot(n: int, i: int) -> np.ndarray:
    v = np.zeros(n)
    v[i] = 1.0
    return v


def _enum_one_hot(values: tuple, value: str) -> np.ndarray:
    idx = values.index(value) if value in values else len(values) - 1
    return _one_hot(len(values), idx)


MENTION_FEATURE_DIM = 2 + len(CATEGORIES) + len(DEP_LABELS) + len(GENDERS) \
    + len(NUMBERS) + len(PERSONS)
PAIR_FEATURE_DIM = 5 * N_DISTANCE_BUCKETS + 6


@dataclass(frozen=True)
class PairFeatureLayout:
    """Contiguous named segments of the pair input vector."""

    embedding_dim: int
    segments: tuple[tuple[str, int, int], ...] = field(init=False)  # (name, offset, size)

    def __post_init__(self) -> None:
        sizes = [
            ("embedding_a", self.embedding_dim),
            ("embedding_b", self.embedding_dim),
            ("features_a", MENTION_FEATURE_DIM),
            ("features_b", MENTION_FEATURE_DIM),
            ("pair", PAIR_FEATURE_DIM),
        ]
        offset = 0
        segments = []
        for name, size in sizes:
            segments.append((name, offset, size))
            offset += size
        object.__setattr__(self, "segments", tuple(segments))

    @property
    def total_dim(self) -> int:
        name, offset, size = self.segments[-1]
        return offset + size

    def slice_of(self, name: str) -> slice:
        for seg_name, offset, size in self.segments:
            if seg_name == name:
                return slice(offset, offset + size)
        raise KeyError(name)


def candidate_antecedents(mentions: list[Mention], i: int,
                          config: PipelineConfig) -> list[int]:
    """The ``min(window, i)`` mentions immediately preceding mention ``i``,
    nearest first; the window depends on the anaphor's category."""
    window = config.window_for(mentions[i].category)
    return list(range(i - 1, max(-1, i - 1 - window), -1))


def mention_feature_vector(mention: Mention, doc: Document) -> np.ndarray:
    sentence_index = doc.tokens[mention.start].sentence_index
    position = mention.start - doc.sentence_start(sentence_index)
    head = doc.tokens[mention.head_token]
    parts = [
        np.array([float(len(mention)), float(position)]),
        _enum_one_hot(CATEGORIES, mention.category),
        _enum_one_hot(DEP_LABELS, head.dependency_relation),
        _enum_one_hot(GENDERS, head.gender_hint),
        _enum_one_hot(NUMBERS, head.number_hint),
        _enum_one_hot(PERSONS, head.person_hint),
    ]
    return np.concatenate(parts)


def pair_feature_vector(m_ante: Mention, m_ana: Mention,
                        doc: Document) -> np.ndarray:
    """Eleven pair features; the five distances are one-hot bucket blocks."""
    buckets = [
        distance_bucket(m_ana.id - m_ante.id),
        distance_bucket(abs(m_ana.start - m_ante.start)),
        distance_bucket(abs(m_ana.end - m_ante.end)),
        distance_bucket(doc.tokens[m_ana.start].sentence_index
                        - doc.tokens[m_ante.start].sentence_index),
        distance_bucket(doc.tokens[m_ana.start].paragraph_index
                        - doc.tokens[m_ante.start].paragraph_index),
    ]
    ante_tokens = set(range(m_ante.start, m_ante.end + 1))
    ana_tokens = set(range(m_ana.start, m_ana.end + 1))
    shared = len(ante_tokens & ana_tokens) / len(ante_tokens | ana_tokens)
    text_match = float(doc.mention_text(m_ante) == doc.mention_text(m_ana))
    head_match = float(doc.tokens[m_ante.head_token].text
                       == doc.tokens[m_ana.head_token].text)
    dep_match = float(doc.tokens[m_ante.head_token].dependency_relation
                      == doc.tokens[m_ana.head_token].dependency_relation)
    scalars = np.array([
        float(m_ana.nesting_level - m_ante.nesting_level),
        shared,
        text_match,
        head_match,
        dep_match,
        1.0,  # entity-type match; only PER is annotated
    ])
    blocks = [_one_hot(N_DISTANCE_BUCKETS, b) for b in buckets]
    return np.concatenate(blocks + [scalars])


def mention_representation(mention: Mention, doc: Document) -> np.ndarray:
    """Mean of the first and last token embeddings (the single row for
    one-token mentions)."""
    if doc.embeddings is None:
        raise ValueError(f"document {doc.doc_id} carries no embeddings")
    first = np.asarray(doc.embeddings[mention.start], dtype=float)
    last = np.asarray(doc.embeddings[mention.end], dtype=float)
    return (first + last) / 2.0


def encode_pair(m_ante: Mention, m_ana: Mention, doc: Document,
                layout: PairFeatureLayout) -> np.ndarray:
    values = {
        "embedding_a": mention_representation(m_ante, doc),
        "embedding_b": mention_representation(m_ana, doc),
        "features_a": mention_feature_vector(m_ante, doc),
        "features_b": mention_feature_vector(m_ana, doc),
        "pair": pair_feature_vector(m_ante, m_ana, doc),
    }
    out = np.empty(layout.total_dim)
    for name, offset, size in layout.segments:
        segment = values[name]
        if segment.shape[0] != size:
            raise ValueError(f"segment {name}: got {segment.shape[0]}, expected {size}")
        out[offset:offset + size] = segment
    return out


# ---------------------------------------------------------------------------
# Scorer model

PAIR_CHECKPOINT_MAGIC = b"PRPS"
PAIR_CHECKPOINT_VERSION = 1
N_HIDDEN_LAYERS = 3


@dataclass
class PairScorerModel:
    input_dim: int
    hidden_dim: int
    dropout_rate: float
    params: dict[str, np.ndarray]
    layout: PairFeatureLayout

    def clone_params(self) -> dict[str, np.ndarray]:
        return {k: v.copy() for k, v in self.params.items()}


@dataclass
class PairTrainConfig:
    batch_pairs: int = 16_000
    learning_rate: float = 1.4e-4
    weight_decay: float = 1e-5
    max_epochs: int = 20
    train_fraction: float = 0.85
    seed: int = 0

    def __post_init__(self) -> None:
        if self.batch_pairs < 1 or self.learning_rate <= 0:
            raise ValueError("batch size and learning rate must be positive")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie in (0, 1)")


def new_pair_scorer(layout: PairFeatureLayout, hidden_dim: int = 1_900,
                    dropout_rate: float = 0.6, seed: int = 0) -> PairScorerModel:
    rng = np.random.default_rng(seed)
    dims = [layout.total_dim] + [hidden_dim] * N_HIDDEN_LAYERS
    params: dict[str, np.ndarray] = {}
    for layer in range(N_HIDDEN_LAYERS):
        params[f"W{layer}"] = nnet.glorot(rng, dims[layer], dims[layer + 1])
        params[f"b{layer}"] = np.zeros(dims[layer + 1])
    params["W_out"] = nnet.glorot(rng, hidden_dim, 1)
    params["b_out"] = np.zeros(1)
    return PairScorerModel(layout.total_dim, hidden_dim, dropout_rate,
                           params, layout)


def scorer_forward(model: PairScorerModel, batch: np.ndarray,
                   train: bool = False,
                   rng: np.random.Generator | None = None):
    if batch.ndim != 2 or batch.shape[1] != model.input_dim:
        raise ValueError(f"batch shape {batch.shape} does not match "
                         f"input dim {model.input_dim}")
    if not np.all(np.isfinite(batch)):
        raise ValueError("non-finite values in scorer input")
    p = model.params
    x = batch
    caches = []
    for layer in range(N_HIDDEN_LAYERS):
        a, aff_cache = nnet.affine_forward(x, p[f"W{layer}"], p[f"b{layer}"])
        h, relu_mask = nnet.relu_forward(a)
        drop_mask = None
        if train and model.dropout_rate > 0.0 and rng is not None:
            keep = 1.0 - model.dropout_rate
            drop_mask = (rng.random(h.shape) < keep) / keep
            h = h * drop_mask
        caches.append((aff_cache, relu_mask, drop_mask))
        x = h
    logits, out_cache = nnet.affine_forward(x, p["W_out"], p["b_out"])
    scores = nnet.sigmoid(logits[:, 0])
    return scores, (caches, out_cache, logits)


def score_pairs(model: PairScorerModel, batch: np.ndarray) -> np.ndarray:
    """Deterministic inference scores in (0, 1)."""
    scores, _ = scorer_forward(model, batch, train=False)
    return scores


def bce_loss_and_grads(model: PairScorerModel, batch: np.ndarray,
                       labels: np.ndarray, train: bool = False,
                       rng: np.random.Generator | None = None):
    """Mean binary cross-entropy over the batch, with gradients.

    The gradient flows through the sigmoid analytically:
    d(loss)/d(logit) = (score - label) / n.
    """
    scores, (caches, out_cache, _) = scorer_forward(model, batch, train, rng)
    eps = 1e-12
    loss = float(-np.mean(labels * np.log(scores + eps)
                          + (1.0 - labels) * np.log(1.0 - scores + eps)))
    grads = {k: np.zeros_like(v) for k, v in model.params.items()}
    d_logits = ((scores - labels) / batch.shape[0])[:, None]
    dx, dW, db = nnet.affine_backward(d_logits, out_cache)
    grads["W_out"] += dW
    grads["b_out"] += db
    for layer in range(N_HIDDEN_LAYERS - 1, -1, -1):
        aff_cache, relu_mask, drop_mask = caches[layer]
        if drop_mask is not None:
            dx = dx * drop_mask
        dx = nnet.relu_backward(dx, relu_mask)
        dx, dW, db = nnet.affine_backward(dx, aff_cache)
        grads[f"W{layer}"] += dW
        grads[f"b{layer}"] += db
    return loss, grads


# ---------------------------------------------------------------------------
# Pair extraction and training


@dataclass
class LabeledPair:
    doc_index: int
    antecedent_id: int
    anaphor_id: int
    label: float


def extract_labeled_pairs(corpus: list[Document],
                          config: PipelineConfig) -> list[LabeledPair]:
    """All in-window (candidate, anaphor) pairs, labeled coreferent iff the
    two mentions share a gold chain. No subsampling of negatives."""
    pairs = []
    for d, doc in enumerate(corpus):
        for i in range(len(doc.mentions)):
            ana = doc.mentions[i]
            for j in candidate_antecedents(doc.mentions, i, config):
                same = doc.mentions[j].chain_id == ana.chain_id
                pairs.append(LabeledPair(d, j, i, 1.0 if same else 0.0))
    return pairs


def encode_pairs(corpus: list[Document], pairs: list[LabeledPair],
                 layout: PairFeatureLayout) -> np.ndarray:
    batch = np.empty((len(pairs), layout.total_dim))
    for row, pair in enumerate(pairs):
        doc = corpus[pair.doc_index]
        batch[row] = encode_pair(doc.mentions[pair.antecedent_id],
                                 doc.mentions[pair.anaphor_id], doc, layout)
    return batch


def train_pair_scorer(corpus: list[Document], config: PairTrainConfig,
                      pipeline: PipelineConfig | None = None,
                      hidden_dim: int = 1_900, dropout_rate: float = 0.6
                      ) -> tuple[PairScorerModel, list[dict]]:
    """Train the scorer on gold-chain pair labels; returns the
    best-validation checkpoint and the epoch log."""
    pipeline = pipeline or PipelineConfig()
    if not corpus or corpus[0].embeddings is None:
        raise ValueError("corpus documents must carry embeddings")
    layout = PairFeatureLayout(corpus[0].embeddings.shape[1])
    pairs = extract_labeled_pairs(corpus, pipeline)
    if not pairs:
        raise ValueError("no mention pairs in corpus")

    rng = np.random.default_rng(config.seed)
    batch = encode_pairs(corpus, pairs, layout)
    labels = np.array([p.label for p in pairs])
    order = rng.permutation(len(pairs))
    n_train = max(1, int(round(config.train_fraction * len(pairs))))
    if n_train == len(pairs) and len(pairs) > 1:
        n_train -= 1
    train_idx, val_idx = order[:n_train], order[n_train:]
    if val_idx.size == 0:
        val_idx = train_idx

    model = new_pair_scorer(layout, hidden_dim, dropout_rate, config.seed)
    optimizer = nnet.AdamW(config.learning_rate, config.weight_decay)
    best_loss = np.inf
    best_params = model.clone_params()
    log = []
    for epoch in range(config.max_epochs):
        perm = rng.permutation(train_idx)
        total = 0.0
        for lo in range(0, len(perm), config.batch_pairs):
            rows = perm[lo:lo + config.batch_pairs]
            loss, grads = bce_loss_and_grads(
                model, batch[rows], labels[rows], train=True, rng=rng)
            if not np.isfinite(loss):
                raise RuntimeError("non-finite training loss")
            optimizer.step(model.params, grads)
            total += loss * len(rows)
        val_loss, _ = bce_loss_and_grads(model, batch[val_idx], labels[val_idx])
        log.append({"epoch": epoch, "train_loss": total / len(perm),
                    "validation_loss": val_loss,
                    "learning_rate": optimizer.learning_rate})
        if val_loss < best_loss:
            best_loss = val_loss
            best_params = model.clone_params()
    model.params = best_params
    return model, log


@dataclass
class PairEvaluation:
    class0: "PRFWithSupport"
    class1: "PRFWithSupport"
    accuracy: float
    error_rate_by_decile: list[float]  # 10 buckets over predicted score


@dataclass(frozen=True)
class PRFWithSupport:
    precision: float
    recall: float
    f1: float
    support: int


def _prf_support(tp: int, fp: int, fn: int, support: int) -> PRFWithSupport:
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return PRFWithSupport(p, r, f, support)


def evaluate_pair_scorer(model: PairScorerModel, corpus: list[Document],
                         pipeline: PipelineConfig | None = None
                         ) -> PairEvaluation:
    """Class-0/class-1 precision, recall and F1 at threshold 0.5, plus the
    error rate per predicted-score decile. A score of exactly 0.5 counts
    as non-coreferent."""
    pipeline = pipeline or PipelineConfig()
    pairs = extract_labeled_pairs(corpus, pipeline)
    batch = encode_pairs(corpus, pairs, model.layout)
    labels = np.array([p.label for p in pairs])
    scores = score_pairs(model, batch)
    predicted = (scores > 0.5).astype(float)

    tp1 = int(np.sum((predicted == 1) & (labels == 1)))
    fp1 = int(np.sum((predicted == 1) & (labels == 0)))
    fn1 = int(np.sum((predicted == 0) & (labels == 1)))
    tp0 = int(np.sum((predicted == 0) & (labels == 0)))
    fp0 = fn1
    fn0 = fp1
    accuracy = float(np.mean(predicted == labels)) if len(pairs) else 0.0

    deciles = np.minimum((scores * 10).astype(int), 9)
    error_rates = []
    for bucket in range(10):
        mask = deciles == bucket
        if not mask.any():
            error_rates.append(0.0)
        else:
            error_rates.append(float(np.mean(predicted[mask] != labels[mask])))

    return PairEvaluation(
        class0=_prf_support(tp0, fp0, fn0, int(np.sum(labels == 0))),
        class1=_prf_support(tp1, fp1, fn1, int(np.sum(labels == 1))),
        accuracy=accuracy,
        error_rate_by_decile=error_rates,
    )


# ---------------------------------------------------------------------------
# Checkpoints

_PAIR_HEADER = struct.Struct("<4sII")


def save_pair_scorer(model: PairScorerModel, path) -> None:
    keys = sorted(model.params)
    header = {
        "input_dim": model.input_dim,
        "hidden_dim": model.hidden_dim,
        "dropout_rate": model.dropout_rate,
        "embedding_dim": model.layout.embedding_dim,
        "segments": [[name, offset, size]
                     for name, offset, size in model.layout.segments],
        "params": [[k, list(model.params[k].shape)] for k in keys],
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_PAIR_HEADER.pack(PAIR_CHECKPOINT_MAGIC,
                                   PAIR_CHECKPOINT_VERSION, len(blob)))
        fh.write(blob)
        for k in keys:
            fh.write(np.ascontiguousarray(model.params[k], dtype="<f4").tobytes())


def load_pair_scorer(path) -> PairScorerModel:
    with open(path, "rb") as fh:
        magic, version, header_len = _PAIR_HEADER.unpack(fh.read(_PAIR_HEADER.size))
        if magic != PAIR_CHECKPOINT_MAGIC:
            raise ValueError(f"bad checkpoint magic {magic!r}")
        if version != PAIR_CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {version}")
        header = json.loads(fh.read(header_len).decode("utf-8"))
        params = {}
        for key, shape in header["params"]:
            count = int(np.prod(shape)) if shape else 1
            raw = fh.read(count * 4)
            if len(raw) != count * 4:
                raise ValueError("truncated checkpoint payload")
            params[key] = np.frombuffer(raw, dtype="<f4").astype(float).reshape(shape)
        if fh.read(1):
            raise ValueError("trailing bytes after checkpoint payload")
    layout = PairFeatureLayout(header["embedding_dim"])
    expected = [[name, offset, size] for name, offset, size in layout.segments]
    if header["segments"] != expected:
        raise ValueError("checkpoint layout does not match this build's features")
    return PairScorerModel(header["input_dim"], header["hidden_dim"],
                           header["dropout_rate"], params, layout)

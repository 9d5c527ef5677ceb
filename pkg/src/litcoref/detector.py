"""Stacked sequence taggers for mention detection.

One tagger per nesting level: token embeddings go through locked dropout,
a gated (highway) projection, a bidirectional sequence encoder and an
affine emission layer feeding a linear-chain CRF. At inference the spans
decoded by the per-level taggers are combined; partially overlapping
(non-nested) spans keep only the higher-confidence one.

Two encoders satisfy the same contract (n x proj_dim -> n x 2*hidden):
``mixer``, a windowed affine blend that is cheap and default for tests,
and ``recurrent``, bidirectional gated recurrent cells.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import crf, nnet
from .bioes import LABELS, LABEL_INDEX, bioes_decode, bioes_encode
from .metrics import PRF
from .model import (
    Document,
    Mention,
    SINGLETON,
    canonical_sort_key,
    classify_mention,
    compute_nesting_levels,
)

MIXER_WINDOW = 2

CHECKPOINT_MAGIC = b"PRTM"
CHECKPOINT_VERSION = 1


@dataclass
class TaggerModel:
    embedding_dim: int
    projection_dim: int
    hidden_size: int
    encoder: str  # "mixer" | "recurrent"
    dropout_rate: float
    params: dict[str, np.ndarray]
    labels: tuple[str, ...] = LABELS

    def clone_params(self) -> dict[str, np.ndarray]:
        return {k: v.copy() for k, v in self.params.items()}


@dataclass
class TaggerTrainConfig:
    batch_sentences: int = 16
    learning_rate: float = 1.4e-4
    weight_decay: float = 1e-5
    plateau_factor: float = 0.5
    plateau_patience: int = 2
    max_epochs: int = 20
    locked_dropout: float = 0.5
    train_fraction: float = 0.85
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie in (0, 1)")
        if self.learning_rate <= 0 or self.batch_sentences < 1:
            raise ValueError("learning rate and batch size must be positive")


def new_tagger(embedding_dim: int, projection_dim: int, hidden_size: int,
               encoder: str = "mixer", dropout_rate: float = 0.5,
               seed: int = 0) -> TaggerModel:
    rng = np.random.default_rng(seed)
    p: dict[str, np.ndarray] = {}
    p["proj_W"] = nnet.glorot(rng, embedding_dim, projection_dim)
    p["proj_b"] = np.zeros(projection_dim)
    p["hw_Wh"] = nnet.glorot(rng, projection_dim, projection_dim)
    p["hw_bh"] = np.zeros(projection_dim)
    p["hw_Wt"] = nnet.glorot(rng, projection_dim, projection_dim)
    # Bias the carry gate towards the identity at the start of training.
    p["hw_bt"] = np.full(projection_dim, -1.0)
    if encoder == "mixer":
        for name in ("mix_Wf_self", "mix_Wf_ctx", "mix_Wb_self", "mix_Wb_ctx"):
            p[name] = nnet.glorot(rng, projection_dim, hidden_size)
        p["mix_bf"] = np.zeros(hidden_size)
        p["mix_bb"] = np.zeros(hidden_size)
    elif encoder == "recurrent":
        for prefix, sub in (("gru_f", nnet.gru_init(rng, projection_dim, hidden_size)),
                            ("gru_b", nnet.gru_init(rng, projection_dim, hidden_size))):
            for k, v in sub.items():
                p[f"{prefix}_{k}"] = v
    else:
        raise ValueError(f"unknown encoder {encoder!r}")
    p["emit_W"] = nnet.glorot(rng, 2 * hidden_size, len(LABELS))
    p["emit_b"] = np.zeros(len(LABELS))
    p["crf_T"] = crf.init_transitions(rng)
    return TaggerModel(embedding_dim, projection_dim, hidden_size,
                       encoder, dropout_rate, p)


def _gru_params(params: dict, prefix: str) -> dict:
    return {k: params[f"{prefix}_{k}"] for k in nnet.gru_param_shapes(1, 1)}


def emissions_forward(model: TaggerModel, embeddings: np.ndarray,
                      train: bool = False,
                      rng: np.random.Generator | None = None):
    if embeddings.shape[1] != model.embedding_dim:
        raise ValueError(
            f"embedding dim {embeddings.shape[1]} != model {model.embedding_dim}")
    p = model.params
    x, drop_mask = nnet.locked_dropout(embeddings, model.dropout_rate, rng, train)
    proj, proj_cache = nnet.affine_forward(x, p["proj_W"], p["proj_b"])
    hw, hw_cache = nnet.highway_forward(proj, p["hw_Wh"], p["hw_bh"],
                                        p["hw_Wt"], p["hw_bt"])
    if model.encoder == "mixer":
        enc, enc_cache = nnet.mixer_forward(
            hw, p["mix_Wf_self"], p["mix_Wf_ctx"], p["mix_bf"],
            p["mix_Wb_self"], p["mix_Wb_ctx"], p["mix_bb"], MIXER_WINDOW)
    else:
        enc, enc_cache = nnet.bigru_forward(hw, _gru_params(p, "gru_f"),
                                            _gru_params(p, "gru_b"))
    emissions, emit_cache = nnet.affine_forward(enc, p["emit_W"], p["emit_b"])
    return emissions, (drop_mask, proj_cache, hw_cache, enc_cache, emit_cache)


def emissions_backward(model: TaggerModel, d_emissions: np.ndarray, cache,
                       grads: dict[str, np.ndarray]) -> None:
    drop_mask, proj_cache, hw_cache, enc_cache, emit_cache = cache
    d_enc, dW, db = nnet.affine_backward(d_emissions, emit_cache)
    grads["emit_W"] += dW
    grads["emit_b"] += db
    if model.encoder == "mixer":
        d_hw, mixer_grads = nnet.mixer_backward(d_enc, enc_cache)
        for name, grad in mixer_grads.items():
            grads[f"mix_{name}"] += grad
    else:
        d_hw, grads_f, grads_b = nnet.bigru_backward(d_enc, enc_cache)
        for k, v in grads_f.items():
            grads[f"gru_f_{k}"] += v
        for k, v in grads_b.items():
            grads[f"gru_b_{k}"] += v
    d_proj, dWh, dbh, dWt, dbt = nnet.highway_backward(d_hw, hw_cache)
    grads["hw_Wh"] += dWh
    grads["hw_bh"] += dbh
    grads["hw_Wt"] += dWt
    grads["hw_bt"] += dbt
    _, dW, db = nnet.affine_backward(d_proj, proj_cache)
    grads["proj_W"] += dW
    grads["proj_b"] += db


def sentence_loss_and_grads(model: TaggerModel, embeddings: np.ndarray,
                            gold_labels: np.ndarray,
                            train: bool = False,
                            rng: np.random.Generator | None = None):
    """CRF negative log-likelihood of one sentence with full gradients."""
    grads = {k: np.zeros_like(v) for k, v in model.params.items()}
    if embeddings.shape[0] == 0:
        return 0.0, grads
    emissions, cache = emissions_forward(model, embeddings, train, rng)
    nll, d_emissions, d_trans = crf.nll_and_gradients(
        emissions, model.params["crf_T"], gold_labels)
    grads["crf_T"] += d_trans
    emissions_backward(model, d_emissions, cache, grads)
    return nll, grads


def viterbi_decode(model: TaggerModel, embeddings: np.ndarray,
                   enforce_bioes: bool = True):
    """Decode one sentence: label strings plus per-token posterior
    confidence from forward-backward."""
    emissions, _ = emissions_forward(model, embeddings, train=False)
    path, confidence = crf.decode_with_confidence(
        emissions, model.params["crf_T"], enforce_bioes)
    return [LABELS[i] for i in path], confidence


# ---------------------------------------------------------------------------
# Training


@dataclass
class SentenceExample:
    doc_id: str
    rows: np.ndarray      # token indices into the document
    embeddings: np.ndarray
    labels: np.ndarray    # label indices


def _document_sentences(doc: Document):
    rows: dict[int, list[int]] = {}
    for tok in doc.tokens:
        rows.setdefault(tok.sentence_index, []).append(tok.index)
    return [np.asarray(rows[s]) for s in sorted(rows)]


def build_examples(corpus: list[Document], level: int) -> list[SentenceExample]:
    examples = []
    total_mentions = 0
    for doc in corpus:
        if doc.embeddings is None:
            raise ValueError(f"document {doc.doc_id} carries no embeddings")
        spans_at_level = [m.span() for m in doc.mentions
                          if m.nesting_level == level]
        total_mentions += len(spans_at_level)
        for rows in _document_sentences(doc):
            lo, hi = int(rows[0]), int(rows[-1])
            spans = [(s - lo, e - lo) for s, e in spans_at_level
                     if lo <= s and e <= hi]
            labels = bioes_encode(spans, len(rows))
            examples.append(SentenceExample(
                doc.doc_id, rows, np.asarray(doc.embeddings[rows], dtype=float),
                np.asarray([LABEL_INDEX[l] for l in labels], dtype=int)))
    if total_mentions == 0:
        raise ValueError(f"corpus has no mentions at nesting level {level}")
    return examples


def _exact_match_prf(predicted: set, gold: set) -> PRF:
    tp = len(predicted & gold)
    return PRF.from_counts(tp, len(predicted), tp, len(gold))


def validation_f1(model: TaggerModel, examples: list[SentenceExample]) -> float:
    predicted, gold = set(), set()
    for i, ex in enumerate(examples):
        labels, confidence = viterbi_decode(model, ex.embeddings)
        spans, _ = bioes_decode(labels, list(confidence))
        predicted |= {(i, s, e) for s, e, _ in spans}
        gold_spans, _ = bioes_decode([LABELS[j] for j in ex.labels])
        gold |= {(i, s, e) for s, e, _ in gold_spans}
    return _exact_match_prf(predicted, gold).f1


@dataclass
class TrainLogEntry:
    epoch: int
    train_loss: float
    validation_f1: float
    learning_rate: float

    def to_json(self) -> str:
        return json.dumps({
            "epoch": self.epoch,
            "train_loss": self.train_loss,
            "validation_f1": self.validation_f1,
            "learning_rate": self.learning_rate,
        })


def train_tagger(corpus: list[Document], level: int, config: TaggerTrainConfig,
                 projection_dim: int | None = None, hidden_size: int = 256,
                 encoder: str = "mixer",
                 log_path: str | Path | None = None
                 ) -> tuple[TaggerModel, list[TrainLogEntry]]:
    """Train one nesting level's tagger; returns the best-validation
    checkpoint and the per-epoch log."""
    examples = build_examples(corpus, level)
    embedding_dim = examples[0].embeddings.shape[1]
    if projection_dim is None:
        projection_dim = 2 * embedding_dim

    model = new_tagger(embedding_dim, projection_dim, hidden_size, encoder,
                       dropout_rate=config.locked_dropout, seed=config.seed)
    rng = np.random.default_rng(config.seed)

    order = rng.permutation(len(examples))
    n_train = max(1, int(round(config.train_fraction * len(examples))))
    if n_train == len(examples) and len(examples) > 1:
        n_train -= 1
    train_set = [examples[i] for i in order[:n_train]]
    val_set = [examples[i] for i in order[n_train:]] or train_set

    optimizer = nnet.AdamW(config.learning_rate, config.weight_decay)
    scheduler = nnet.ReduceLROnPlateau(optimizer, config.plateau_factor,
                                       config.plateau_patience)
    best_f1 = -1.0
    best_params = model.clone_params()
    log: list[TrainLogEntry] = []

    for epoch in range(config.max_epochs):
        perm = rng.permutation(len(train_set))
        total_loss = 0.0
        for lo in range(0, len(perm), config.batch_sentences):
            batch = [train_set[i] for i in perm[lo:lo + config.batch_sentences]]
            grads = {k: np.zeros_like(v) for k, v in model.params.items()}
            batch_loss = 0.0
            for ex in batch:
                loss, g = sentence_loss_and_grads(
                    model, ex.embeddings, ex.labels, train=True, rng=rng)
                batch_loss += loss
                for k in grads:
                    grads[k] += g[k]
            scale = 1.0 / len(batch)
            if not np.isfinite(batch_loss):
                raise RuntimeError("non-finite training loss")
            for k in grads:
                grads[k] *= scale
            optimizer.step(model.params, grads)
            total_loss += batch_loss
        val_f1 = validation_f1(model, val_set)
        log.append(TrainLogEntry(epoch, total_loss / max(1, len(train_set)),
                                 val_f1, optimizer.learning_rate))
        if val_f1 > best_f1:
            best_f1 = val_f1
            best_params = model.clone_params()
        scheduler.step(val_f1)

    model.params = best_params
    if log_path is not None:
        Path(log_path).write_text(
            "\n".join(entry.to_json() for entry in log) + ("\n" if log else ""),
            encoding="utf-8")
    return model, log


# ---------------------------------------------------------------------------
# Inference over documents


@dataclass
class DetectedSpan:
    start: int
    end: int
    confidence: float
    level_hint: int

    def span(self) -> tuple[int, int]:
        return (self.start, self.end)


def _decode_document(model: TaggerModel, doc: Document, level_hint: int
                     ) -> list[DetectedSpan]:
    spans = []
    for rows in _document_sentences(doc):
        embeddings = np.asarray(doc.embeddings[rows], dtype=float)
        labels, confidence = viterbi_decode(model, embeddings)
        decoded, _ = bioes_decode(labels, list(confidence))
        lo = int(rows[0])
        spans.extend(DetectedSpan(lo + s, lo + e, c, level_hint)
                     for s, e, c in decoded)
    return spans


def _crosses(a: tuple[int, int], b: tuple[int, int]) -> bool:
    return a[0] < b[0] <= a[1] < b[1] or b[0] < a[0] <= b[1] < a[1]


def resolve_overlaps(spans: list[DetectedSpan]) -> list[DetectedSpan]:
    """Deduplicate identical spans (keep the more confident) and drop the
    lower-confidence side of every partially overlapping pair."""
    best: dict[tuple[int, int], DetectedSpan] = {}
    for span in spans:
        cur = best.get(span.span())
        if cur is None or span.confidence > cur.confidence:
            best[span.span()] = span
    ordered = sorted(best.values(),
                     key=lambda s: (-s.confidence, s.start, s.end))
    kept: list[DetectedSpan] = []
    for span in ordered:
        if any(_crosses(span.span(), other.span()) for other in kept):
            continue
        kept.append(span)
    return sorted(kept, key=lambda s: canonical_sort_key(s.span()))


def detect_mentions(level0_model: TaggerModel, level1_model: TaggerModel,
                    doc: Document) -> list[Mention]:
    """Combine both levels' decoded spans into document mentions.

    Nesting levels are recomputed on the surviving spans; the head falls
    back to the last token of the span.
    """
    if doc.embeddings is None:
        raise ValueError(f"document {doc.doc_id} carries no embeddings")
    spans = (_decode_document(level0_model, doc, 0)
             + _decode_document(level1_model, doc, 1))
    survivors = resolve_overlaps(spans)
    levels = compute_nesting_levels([s.span() for s in survivors])
    mentions = []
    for i, (span, level) in enumerate(zip(survivors, levels)):
        mention = Mention(
            id=i, start=span.start, end=span.end, nesting_level=level,
            category="common", head_token=span.end, chain_id=SINGLETON,
            confidence=float(span.confidence))
        mention.category, _ = classify_mention(mention, doc.tokens)
        mentions.append(mention)
    return mentions


def evaluate_mentions(predicted, gold) -> PRF:
    """Exact span match: a predicted mention counts iff (start, end) equals
    a gold mention's."""
    def spans(items):
        out = set()
        for item in items:
            if isinstance(item, tuple):
                out.add(item)
            else:
                out.add((item.start, item.end))
        return out
    return _exact_match_prf(spans(predicted), spans(gold))


# ---------------------------------------------------------------------------
# Checkpoints

_HEADER_STRUCT = struct.Struct("<4sII")


def save_tagger(model: TaggerModel, path: str | Path) -> None:
    keys = sorted(model.params)
    header = {
        "embedding_dim": model.embedding_dim,
        "projection_dim": model.projection_dim,
        "hidden_size": model.hidden_size,
        "encoder": model.encoder,
        "dropout_rate": model.dropout_rate,
        "labels": list(model.labels),
        "params": [[k, list(model.params[k].shape)] for k in keys],
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_HEADER_STRUCT.pack(CHECKPOINT_MAGIC, CHECKPOINT_VERSION, len(blob)))
        fh.write(blob)
        for k in keys:
            fh.write(np.ascontiguousarray(model.params[k], dtype="<f4").tobytes())


def load_tagger(path: str | Path) -> TaggerModel:
    with open(path, "rb") as fh:
        magic, version, header_len = _HEADER_STRUCT.unpack(
            fh.read(_HEADER_STRUCT.size))
        if magic != CHECKPOINT_MAGIC:
            raise ValueError(f"bad checkpoint magic {magic!r}")
        if version != CHECKPOINT_VERSION:
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
    return TaggerModel(
        embedding_dim=header["embedding_dim"],
        projection_dim=header["projection_dim"],
        hidden_size=header["hidden_size"],
        encoder=header["encoder"],
        dropout_rate=header["dropout_rate"],
        params=params,
        labels=tuple(header["labels"]),
    )

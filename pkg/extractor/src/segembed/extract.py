"""End-to-end extraction: document JSON in, embedding binary out.

Input documents use the coreference toolkit's JSON schema (only ``doc_id``
and the token texts are consumed). The output is the portable ``PRPC``
binary that toolkit reads back, plus a sidecar JSON recording the encoder,
the context length and the token/subword alignment.

Binary layout (little endian): magic ``PRPC``, u32 version = 1,
u64 n_tokens, u32 dim, then n_tokens x dim float32 values row-major.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .encoders import MisalignmentError, split_subwords
from .segments import SegmentPlan, average_overlaps, plan_segments

EMBEDDING_MAGIC = b"PRPC"
EMBEDDING_VERSION = 1
_HEADER = struct.Struct("<4sIQI")


def read_document_tokens(path: str | Path) -> tuple[str, list[str]]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(payload, dict) or "tokens" not in payload:
        raise ValueError(f"{path}: not a document JSON file")
    tokens = []
    for i, token in enumerate(payload["tokens"]):
        if not isinstance(token, dict) or "text" not in token:
            raise ValueError(f"{path}: tokens[{i}] has no text")
        tokens.append(str(token["text"]))
    return str(payload.get("doc_id", Path(path).stem)), tokens


def write_embedding_binary(matrix: np.ndarray, path: str | Path) -> None:
    matrix = np.ascontiguousarray(matrix, dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(EMBEDDING_MAGIC, EMBEDDING_VERSION,
                              matrix.shape[0], matrix.shape[1]))
        fh.write(matrix.tobytes())


def tokenize_segment(tokens: list[str], start: int, end: int):
    """Subwords plus their absolute token positions and per-token counts."""
    subwords: list[str] = []
    positions: list[int] = []
    counts: list[int] = []
    bad: list[tuple[int, str]] = []
    for t in range(start, end):
        pieces = split_subwords(tokens[t])
        if not pieces:
            bad.append((t, tokens[t]))
            continue
        subwords.extend(pieces)
        positions.extend([t] * len(pieces))
        counts.append(len(pieces))
    if bad:
        raise MisalignmentError(bad)
    return subwords, positions, counts


def pool_subwords(vectors: np.ndarray, counts: list[int]) -> np.ndarray:
    """Mean over each token's subwords: one row per token, always."""
    out = np.empty((len(counts), vectors.shape[1]))
    row = 0
    for i, count in enumerate(counts):
        out[i] = vectors[row:row + count].mean(axis=0)
        row += count
    return out


def extract_matrix(tokens: list[str], encoder,
                   context_length: int) -> tuple[np.ndarray, SegmentPlan, list[int]]:
    plan = plan_segments(len(tokens), context_length)
    segment_outputs = []
    for start, end in plan.segments:
        subwords, positions, counts = tokenize_segment(tokens, start, end)
        vectors = encoder.encode_subwords(subwords, positions)
        segment_outputs.append(pool_subwords(vectors, counts))
    if plan.segments:
        matrix = average_overlaps(segment_outputs, plan)
    else:
        matrix = np.zeros((0, encoder.dim))
    subword_counts = [len(split_subwords(t)) for t in tokens]
    return matrix, plan, subword_counts


def extract(input_path: str | Path, encoder, context_length: int,
            out_path: str | Path) -> Path:
    """Write the embedding binary and its sidecar; returns the binary path."""
    doc_id, tokens = read_document_tokens(input_path)
    matrix, plan, subword_counts = extract_matrix(tokens, encoder,
                                                  context_length)
    out_path = Path(out_path)
    write_embedding_binary(matrix, out_path)
    sidecar = {
        "doc_id": doc_id,
        "encoder": encoder.identifier(),
        "context_length": context_length,
        "n_tokens": len(tokens),
        "dim": int(matrix.shape[1]),
        "n_segments": len(plan.segments),
        "token_subword_counts": subword_counts,
    }
    sidecar_path = out_path.with_name(out_path.name + ".json")
    sidecar_path.write_text(json.dumps(sidecar, indent=1, sort_keys=True),
                            encoding="utf-8")
    return out_path

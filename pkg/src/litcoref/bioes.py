"""BIOES label scheme for single-type (PER) span tagging."""

from __future__ import annotations

LABELS = ("O", "B-PER", "I-PER", "E-PER", "S-PER")
LABEL_INDEX = {label: i for i, label in enumerate(LABELS)}

O, B, I, E, S = range(5)


class OverlapError(ValueError):
    """Same-level spans overlap and cannot be encoded as one sequence."""


def bioes_encode(spans: list[tuple[int, int]], n_tokens: int) -> list[str]:
    """Encode non-overlapping spans (inclusive bounds) as BIOES labels."""
    labels = ["O"] * n_tokens
    for start, end in sorted(spans):
        if not 0 <= start <= end < n_tokens:
            raise ValueError(f"span ({start}, {end}) outside [0, {n_tokens})")
        if any(labels[t] != "O" for t in range(start, end + 1)):
            raise OverlapError(f"span ({start}, {end}) overlaps a previous span")
        if start == end:
            labels[start] = "S-PER"
        else:
            labels[start] = "B-PER"
            for t in range(start + 1, end):
                labels[t] = "I-PER"
            labels[end] = "E-PER"
    return labels


def bioes_decode(
    labels: list[str],
    confidences: list[float] | None = None,
) -> tuple[list[tuple[int, int, float]], list[str]]:
    """Decode labels into ``(start, end, confidence)`` spans.

    Span confidence is the mean of its token confidences. Ill-formed
    fragments (an I or E with no open B, a B never closed) are dropped and
    reported as diagnostics rather than guessed at.
    """
    if confidences is None:
        confidences = [1.0] * len(labels)
    spans: list[tuple[int, int, float]] = []
    diagnostics: list[str] = []
    open_start: int | None = None    # well-formed fragment opened by B
    orphan_start: int | None = None  # ill-formed fragment opened by I or E

    def drop(start: int, end: int, reason: str) -> None:
        diagnostics.append(f"tokens {start}..{end}: {reason} dropped")

    def flush_pending(t: int) -> None:
        nonlocal open_start, orphan_start
        if open_start is not None:
            drop(open_start, t - 1, "unterminated B..I fragment")
            open_start = None
        if orphan_start is not None:
            drop(orphan_start, t - 1, "orphan I/E fragment")
            orphan_start = None

    for t, label in enumerate(labels):
        if label not in LABEL_INDEX:
            raise ValueError(f"unknown label {label!r}")
        if label == "S-PER":
            flush_pending(t)
            spans.append((t, t, confidences[t]))
        elif label == "B-PER":
            flush_pending(t)
            open_start = t
        elif label == "I-PER":
            if open_start is None and orphan_start is None:
                orphan_start = t
        elif label == "E-PER":
            if open_start is not None:
                conf = sum(confidences[open_start:t + 1]) / (t - open_start + 1)
                spans.append((open_start, t, conf))
                open_start = None
            else:
                start = orphan_start if orphan_start is not None else t
                drop(start, t, "orphan I/E fragment")
                orphan_start = None
        else:  # O
            flush_pending(t)
    flush_pending(len(labels))
    return spans, diagnostics

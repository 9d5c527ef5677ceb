"""Overlapping-segment planning and overlap averaging.

Long documents exceed the encoder's context window, so tokens are encoded
in segments of length L with stride L/2: each token is seen with at least
half a window of context on each side where the document allows it. The
final embedding of a token is the plain arithmetic mean of its vectors
from every covering segment.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SegmentPlan:
    n_tokens: int
    context_length: int
    segments: tuple[tuple[int, int], ...]  # [start, end) token ranges
    coverage: tuple[tuple[int, ...], ...]  # per token: covering segment ids


def plan_segments(n_tokens: int, context_length: int) -> SegmentPlan:
    """Segments start at multiples of L/2; the last one is clipped.

    A start is scheduled only while a full window still fits beyond the
    previous stride, so a short document gets the single clipped segment
    that already covers it.
    """
    if context_length < 2 or context_length % 2 != 0:
        raise ValueError("context length must be an even integer >= 2")
    if n_tokens < 0:
        raise ValueError("token count must be non-negative")
    half = context_length // 2
    starts = []
    if n_tokens > 0:
        starts.append(0)
        k = 1
        while k * half <= n_tokens - half:
            starts.append(k * half)
            k += 1
    segments = tuple((s, min(s + context_length, n_tokens)) for s in starts)
    coverage_lists: list[list[int]] = [[] for _ in range(n_tokens)]
    for i, (start, end) in enumerate(segments):
        for t in range(start, end):
            coverage_lists[t].append(i)
    coverage = tuple(tuple(c) for c in coverage_lists)
    for t, covering in enumerate(coverage):
        if not covering:
            raise AssertionError(f"token {t} not covered by any segment")
    return SegmentPlan(n_tokens, context_length, segments, coverage)


def average_overlaps(segment_outputs: list[np.ndarray],
                     plan: SegmentPlan) -> np.ndarray:
    """Mean of each token's vectors across its covering segments."""
    if len(segment_outputs) != len(plan.segments):
        raise ValueError(
            f"{len(segment_outputs)} segment outputs for "
            f"{len(plan.segments)} planned segments")
    dims = set()
    for output, (start, end) in zip(segment_outputs, plan.segments):
        if output.shape[0] != end - start:
            raise ValueError(
                f"segment [{start}, {end}) produced {output.shape[0]} rows")
        dims.add(output.shape[1])
    if len(dims) > 1:
        raise ValueError(f"inconsistent segment dimensions {sorted(dims)}")
    dim = dims.pop() if dims else 0
    matrix = np.zeros((plan.n_tokens, dim))
    for t, covering in enumerate(plan.coverage):
        rows = [segment_outputs[s][t - plan.segments[s][0]] for s in covering]
        matrix[t] = np.mean(rows, axis=0)
    return matrix

"""Encoder abstraction with a deterministic stub.

An encoder turns a segment's subwords into vectors. Real pretrained
encoders plug in behind the same interface; the stub keeps the test suite
free of model downloads and is deterministic in the absolute token
position, which makes overlap averaging exactly checkable.
"""

from __future__ import annotations

import numpy as np

MAX_SUBWORD_LEN = 4


class MisalignmentError(ValueError):
    """Tokens that cannot be carried through the subword tokenizer."""

    def __init__(self, tokens: list[tuple[int, str]]):
        listing = ", ".join(f"{i}:{text!r}" for i, text in tokens)
        super().__init__(f"untokenizable tokens: {listing}")
        self.tokens = tokens


def split_subwords(token: str) -> list[str]:
    """Greedy fixed-width chunking, a stand-in for a BPE vocabulary."""
    if not token:
        return []
    return [token[i:i + MAX_SUBWORD_LEN]
            for i in range(0, len(token), MAX_SUBWORD_LEN)]


class StubEncoder:
    """Emits a vector that depends only on the absolute token position.

    Every subword of token t maps to the same seeded pseudo-random vector
    f(t), regardless of which segment the token is seen in. Mean pooling
    over subwords and averaging over segments must therefore return f(t)
    exactly, which the acceptance suite exploits as an oracle.
    """

    def __init__(self, dim: int, seed: int = 7):
        if dim < 1:
            raise ValueError("dimension must be positive")
        self.dim = dim
        self.seed = seed

    def identifier(self) -> str:
        return f"stub:{self.dim}"

    def vector_for_position(self, position: int) -> np.ndarray:
        rng = np.random.default_rng([self.seed, position])
        return rng.normal(0.0, 1.0, self.dim)

    def encode_subwords(self, subwords: list[str],
                        positions: list[int]) -> np.ndarray:
        if len(subwords) != len(positions):
            raise ValueError("one position is required per subword")
        out = np.empty((len(subwords), self.dim))
        for row, position in enumerate(positions):
            out[row] = self.vector_for_position(position)
        return out


def make_encoder(identifier: str):
    """``stub:<dim>`` is the only built-in; others name pretrained models
    that are out of scope for this package's tests."""
    parts = identifier.split(":")
    if parts[0] == "stub" and len(parts) == 2:
        try:
            dim = int(parts[1])
        except ValueError:
            raise ValueError(f"bad stub dimension in {identifier!r}") from None
        return StubEncoder(dim)
    raise ValueError(
        f"unknown encoder {identifier!r}; available: stub:<dim>")

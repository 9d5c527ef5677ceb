"""Document, mention and chain data model.

Documents hold a flat token sequence plus character mentions that may nest
up to two levels deep. Every mention belongs to exactly one coreference
chain; a chain with a single mention is a singleton. Plural mentions form
chains of their own, disjoint from the chains of their conjuncts.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

CATEGORIES = ("pronoun", "common", "proper")
CATEGORY_HINTS = ("pronoun", "common", "proper", "other", "unknown")
GENDERS = ("masculine", "feminine", "unknown")
NUMBERS = ("singular", "plural", "unknown")
PERSONS = ("first", "second", "third", "unknown")
STRATEGIES = ("left_to_right", "easy_first_global")

#: Chain id marking a mention as a singleton at ingestion time.
#: Normalization replaces it with a generated one-element chain.
SINGLETON = None

MAX_NESTING = 2


class MalformedAnnotationError(ValueError):
    """Raised for span sets that cannot be a valid annotation."""


@dataclass(frozen=True)
class Token:
    index: int
    text: str
    sentence_index: int
    paragraph_index: int
    category_hint: str = "unknown"
    dependency_relation: str = ""
    gender_hint: str = "unknown"
    number_hint: str = "unknown"
    person_hint: str = "unknown"


@dataclass
class Mention:
    """A token span referring to a character.

    ``start`` and ``end`` are inclusive token indices. ``chain_id`` is an
    entity identifier, or :data:`SINGLETON` before normalization.
    """

    id: int
    start: int
    end: int
    nesting_level: int
    category: str
    head_token: int
    chain_id: str | None
    is_plural: bool = False
    confidence: float = 1.0

    def span(self) -> tuple[int, int]:
        return (self.start, self.end)

    def __len__(self) -> int:
        return self.end - self.start + 1


@dataclass
class Chain:
    chain_id: str
    mention_ids: list[int]
    gender_label: str = "unknown"

    def is_singleton(self) -> bool:
        return len(self.mention_ids) == 1


@dataclass
class Document:
    doc_id: str
    tokens: list[Token]
    mentions: list[Mention]
    chains: list[Chain]
    embeddings: np.ndarray | None = None

    @property
    def n_tokens(self) -> int:
        return len(self.tokens)

    def chain_of(self, mention_id: int) -> str | None:
        return self.mentions[mention_id].chain_id

    def chain_by_id(self, chain_id: str) -> Chain:
        for chain in self.chains:
            if chain.chain_id == chain_id:
                return chain
        raise KeyError(chain_id)

    def sentence_start(self, sentence_index: int) -> int:
        """Index of the first token of a sentence present in the document."""
        for tok in self.tokens:
            if tok.sentence_index == sentence_index:
                return tok.index
        raise KeyError(sentence_index)

    def mention_text(self, mention: Mention) -> str:
        return " ".join(t.text for t in self.tokens[mention.start:mention.end + 1])


@dataclass
class PipelineConfig:
    pronoun_window: int = 30
    noun_window: int = 300
    null_threshold: float = 0.5
    clustering_strategy: str = "left_to_right"
    embedding_dim: int = 1024

    def __post_init__(self) -> None:
        if self.pronoun_window < 1 or self.noun_window < 1:
            raise ValueError("antecedent windows must be >= 1")
        if not 0.0 < self.null_threshold < 1.0:
            raise ValueError("null_threshold must lie in (0, 1)")
        if self.clustering_strategy not in STRATEGIES:
            raise ValueError(f"unknown clustering strategy {self.clustering_strategy!r}")
        if self.embedding_dim < 1:
            raise ValueError("embedding_dim must be >= 1")

    def window_for(self, category: str) -> int:
        return self.pronoun_window if category == "pronoun" else self.noun_window


def canonical_sort_key(span: tuple[int, int]) -> tuple[int, int]:
    """Sort key placing containers before the mentions nested in them."""
    return (span[0], -span[1])


def _strictly_contains(outer: tuple[int, int], inner: tuple[int, int]) -> bool:
    return (outer[0] <= inner[0] and inner[1] <= outer[1]) and outer != inner


def _crossing(a: tuple[int, int], b: tuple[int, int]) -> bool:
    return a[0] < b[0] <= a[1] < b[1] or b[0] < a[0] <= b[1] < a[1]


def containment_counts(spans: list[tuple[int, int]]) -> list[int]:
    """Count, for each span, how many other spans strictly contain it.

    Raises :class:`MalformedAnnotationError` for partially overlapping,
    non-nested span pairs; nesting depth is not checked here.
    """
    counts = [0] * len(spans)
    for i, a in enumerate(spans):
        for j, b in enumerate(spans):
            if i == j:
                continue
            if _crossing(a, b):
                raise MalformedAnnotationError(
                    f"crossing spans {a} and {b} cannot be nested"
                )
            if _strictly_contains(b, a):
                counts[i] += 1
    return counts


def compute_nesting_levels(spans: list[tuple[int, int]]) -> list[int]:
    """Nesting level of each span: the number of spans strictly containing it.

    Levels beyond :data:`MAX_NESTING` are rejected, as are crossing spans.
    """
    levels = containment_counts(spans)
    for span, level in zip(spans, levels):
        if level > MAX_NESTING:
            raise MalformedAnnotationError(
                f"span {span} nested at level {level}, deeper than {MAX_NESTING}"
            )
    return levels


def classify_mention(mention: Mention, tokens: list[Token]) -> tuple[str, bool]:
    """Derive the mention category from its head token hint.

    Returns ``(category, flagged)``; ``flagged`` marks heads whose hint was
    neither pronoun, common nor proper, which default to common.
    """
    hint = tokens[mention.head_token].category_hint
    if hint == "pronoun":
        return "pronoun", False
    if hint == "proper":
        return "proper", False
    if hint == "common":
        return "common", False
    return "common", True


@dataclass
class Violation:
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.location}: {self.message}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, location: str, message: str) -> None:
        self.violations.append(Violation(location, message))

    def __str__(self) -> str:
        if self.ok:
            return "document is well-formed"
        return "\n".join(str(v) for v in self.violations)


def normalize_singletons(doc: Document) -> Document:
    """Turn singleton-marked mentions into one-element chains.

    Generated chain ids never collide with annotated ones.
    """
    mentions = [replace(m) for m in doc.mentions]
    chains = [Chain(c.chain_id, list(c.mention_ids), c.gender_label) for c in doc.chains]
    taken = {c.chain_id for c in chains}
    for mention in mentions:
        if mention.chain_id is not SINGLETON:
            continue
        new_id = f"singleton:{mention.id}"
        while new_id in taken:
            new_id += "'"
        taken.add(new_id)
        mention.chain_id = new_id
        chains.append(Chain(new_id, [mention.id]))
    return Document(doc.doc_id, doc.tokens, mentions, chains, doc.embeddings)


def validate_document(doc: Document) -> ValidationReport:
    """Check every model invariant; the report is empty iff the document
    is well-formed. Violations are collected, never raised."""
    report = ValidationReport()
    n = len(doc.tokens)

    for i, tok in enumerate(doc.tokens):
        loc = f"tokens[{i}]"
        if tok.index != i:
            report.add(loc, f"token index {tok.index} breaks contiguity (expected {i})")
        if i > 0:
            prev = doc.tokens[i - 1]
            if tok.sentence_index < prev.sentence_index:
                report.add(loc, "sentence_index decreases")
            if tok.paragraph_index < prev.paragraph_index:
                report.add(loc, "paragraph_index decreases")
        if tok.category_hint not in CATEGORY_HINTS:
            report.add(loc, f"unknown category hint {tok.category_hint!r}")
        if tok.gender_hint not in GENDERS:
            report.add(loc, f"unknown gender hint {tok.gender_hint!r}")
        if tok.number_hint not in NUMBERS:
            report.add(loc, f"unknown number hint {tok.number_hint!r}")
        if tok.person_hint not in PERSONS:
            report.add(loc, f"unknown person hint {tok.person_hint!r}")

    spans_ok = True
    for i, m in enumerate(doc.mentions):
        loc = f"mentions[{i}]"
        if m.id != i:
            report.add(loc, f"mention id {m.id} out of order (expected {i})")
        if m.start > m.end:
            report.add(loc, f"span ({m.start}, {m.end}) has end before start")
            spans_ok = False
        if m.start < 0 or m.end >= n:
            report.add(loc, f"span ({m.start}, {m.end}) outside token range [0, {n})")
            spans_ok = False
        if not m.start <= m.head_token <= m.end:
            report.add(loc, f"head token {m.head_token} outside span")
        if m.category not in CATEGORIES:
            report.add(loc, f"unknown category {m.category!r}")
        if not 0.0 <= m.confidence <= 1.0:
            report.add(loc, f"confidence {m.confidence} outside [0, 1]")
        if m.chain_id is SINGLETON:
            report.add(loc, "unnormalized singleton marker")

    ordered = sorted(range(len(doc.mentions)),
                     key=lambda i: canonical_sort_key(doc.mentions[i].span()))
    if ordered != list(range(len(doc.mentions))):
        report.add("mentions", "not sorted by (start ascending, end descending)")

    seen_spans: dict[tuple[int, int], int] = {}
    for m in doc.mentions:
        if m.span() in seen_spans:
            report.add(f"mentions[{m.id}]",
                       f"duplicate span {m.span()} of mention {seen_spans[m.span()]}")
        else:
            seen_spans[m.span()] = m.id

    if spans_ok:
        try:
            levels = containment_counts([m.span() for m in doc.mentions])
        except MalformedAnnotationError as err:
            report.add("mentions", str(err))
        else:
            for m, level in zip(doc.mentions, levels):
                if level > MAX_NESTING:
                    report.add(f"mentions[{m.id}]",
                               f"nested at level {level}, deeper than {MAX_NESTING}")
                elif m.nesting_level != level:
                    report.add(f"mentions[{m.id}]",
                               f"nesting_level {m.nesting_level} != computed {level}")

    assigned: dict[int, str] = {}
    for c, chain in enumerate(doc.chains):
        loc = f"chains[{c}]"
        if chain.mention_ids != sorted(chain.mention_ids):
            report.add(loc, "mention_ids not sorted")
        if chain.gender_label not in GENDERS:
            report.add(loc, f"unknown gender label {chain.gender_label!r}")
        for mid in chain.mention_ids:
            if not 0 <= mid < len(doc.mentions):
                report.add(loc, f"mention id {mid} does not resolve")
                continue
            if mid in assigned:
                report.add(loc, f"mention {mid} already in chain {assigned[mid]!r}")
            else:
                assigned[mid] = chain.chain_id
            if doc.mentions[mid].chain_id != chain.chain_id:
                report.add(loc, f"mention {mid} carries chain "
                                f"{doc.mentions[mid].chain_id!r}, not {chain.chain_id!r}")
    for m in doc.mentions:
        if m.id not in assigned and m.chain_id is not SINGLETON:
            report.add(f"mentions[{m.id}]", "not covered by any chain")

    if doc.embeddings is not None and doc.embeddings.shape[0] != n:
        report.add("embeddings",
                   f"{doc.embeddings.shape[0]} rows for {n} tokens")
    return report


def attach_embeddings(doc: Document, matrix: np.ndarray,
                      expected_dim: int | None = None) -> None:
    if matrix.ndim != 2:
        raise ValueError("embedding matrix must be 2-dimensional")
    if matrix.shape[0] != doc.n_tokens:
        raise ValueError(
            f"embedding rows ({matrix.shape[0]}) != document tokens ({doc.n_tokens})"
        )
    if expected_dim is not None and matrix.shape[1] != expected_dim:
        raise ValueError(
            f"embedding dim {matrix.shape[1]} != configured {expected_dim}"
        )
    doc.embeddings = matrix

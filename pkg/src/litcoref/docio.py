"""On-disk formats: document JSON, embedding binary, lexicons, CoNLL export.

The document JSON schema is original to this toolkit:

    {"doc_id": ..., "format_version": 1,
     "tokens":   [{"text", "sentence", "paragraph", "category", "dep",
                   "gender", "number", "person"}, ...],
     "mentions": [{"start", "end", "head", "level", "category", "chain",
                   "plural"}, ...],
     "chain_genders": {"<chain_id>": "m" | "f" | "u"}}

``chain`` is null for singletons; ``head`` defaults to the last token of
the span and ``level`` to the computed nesting level.

The embedding binary is little-endian: magic ``PRPC``, u32 version, u64
token count, u32 dimension, then ``n_tokens x dim`` float32 values in
row-major order. The fixed 20-byte header keeps it memory-mappable.
"""

from __future__ import annotations

import json
import struct
import unicodedata
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .model import (
    CATEGORIES,
    CATEGORY_HINTS,
    GENDERS,
    NUMBERS,
    PERSONS,
    SINGLETON,
    Chain,
    Document,
    Mention,
    Token,
    canonical_sort_key,
    compute_nesting_levels,
    MalformedAnnotationError,
    normalize_singletons,
    validate_document,
)

FORMAT_VERSION = 1

EMBEDDING_MAGIC = b"PRPC"
EMBEDDING_VERSION = 1
_EMBEDDING_HEADER = struct.Struct("<4sIQI")

_GENDER_CODES = {"m": "masculine", "f": "feminine", "u": "unknown"}
_GENDER_TO_CODE = {v: k for k, v in _GENDER_CODES.items()}


class ParseError(ValueError):
    """Input does not match the expected schema; ``path`` locates the field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class ValidationError(ValueError):
    """Parsed input violates a model invariant."""

    def __init__(self, report):
        super().__init__(str(report))
        self.report = report


def _expect(obj, key, kind, path):
    if key not in obj:
        raise ParseError(f"{path}.{key}", "missing field")
    value = obj[key]
    if kind is int and isinstance(value, bool):
        raise ParseError(f"{path}.{key}", "expected an integer")
    if not isinstance(value, kind):
        raise ParseError(f"{path}.{key}", f"expected {kind.__name__}")
    return value


def _enum(obj, key, allowed, path, default=None):
    if key not in obj and default is not None:
        return default
    value = _expect(obj, key, str, path)
    if value not in allowed:
        raise ParseError(f"{path}.{key}", f"{value!r} not one of {sorted(allowed)}")
    return value


def parse_document(data: bytes | str) -> Document:
    """Parse document JSON into a validated :class:`Document`.

    Singleton markers are normalized into one-element chains; chains are
    reconstructed from the per-mention chain ids.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        raw = json.loads(data)
    except json.JSONDecodeError as err:
        raise ParseError("$", f"invalid JSON: {err}") from err
    if not isinstance(raw, dict):
        raise ParseError("$", "document must be a JSON object")

    version = raw.get("format_version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise ParseError("$.format_version", f"unsupported version {version}")
    doc_id = _expect(raw, "doc_id", str, "$")

    tokens = []
    raw_tokens = _expect(raw, "tokens", list, "$")
    for i, rt in enumerate(raw_tokens):
        path = f"$.tokens[{i}]"
        if not isinstance(rt, dict):
            raise ParseError(path, "expected object")
        tokens.append(Token(
            index=i,
            text=_expect(rt, "text", str, path),
            sentence_index=_expect(rt, "sentence", int, path),
            paragraph_index=_expect(rt, "paragraph", int, path),
            category_hint=_enum(rt, "category", CATEGORY_HINTS, path, "unknown"),
            dependency_relation=rt.get("dep", ""),
            gender_hint=_enum(rt, "gender", GENDERS, path, "unknown"),
            number_hint=_enum(rt, "number", NUMBERS, path, "unknown"),
            person_hint=_enum(rt, "person", PERSONS, path, "unknown"),
        ))

    raw_mentions = _expect(raw, "mentions", list, "$")
    parsed = []
    for i, rm in enumerate(raw_mentions):
        path = f"$.mentions[{i}]"
        if not isinstance(rm, dict):
            raise ParseError(path, "expected object")
        start = _expect(rm, "start", int, path)
        end = _expect(rm, "end", int, path)
        chain = rm.get("chain", SINGLETON)
        if chain is not SINGLETON and not isinstance(chain, str):
            raise ParseError(f"{path}.chain", "expected string or null")
        parsed.append({
            "start": start,
            "end": end,
            "head": rm.get("head", end),
            "level": rm.get("level"),
            "category": _enum(rm, "category", CATEGORIES, path, "common"),
            "chain": chain,
            "plural": bool(rm.get("plural", False)),
            "confidence": float(rm.get("confidence", 1.0)),
        })

    parsed.sort(key=lambda m: canonical_sort_key((m["start"], m["end"])))
    spans = [(m["start"], m["end"]) for m in parsed]
    levels = None
    if all(0 <= s <= e < len(tokens) for s, e in spans):
        try:
            levels = compute_nesting_levels(spans)
        except MalformedAnnotationError:
            levels = None

    mentions = []
    for i, m in enumerate(parsed):
        level = m["level"] if m["level"] is not None else (
            levels[i] if levels is not None else 0)
        mentions.append(Mention(
            id=i,
            start=m["start"],
            end=m["end"],
            nesting_level=level,
            category=m["category"],
            head_token=m["head"],
            chain_id=m["chain"],
            is_plural=m["plural"],
            confidence=m["confidence"],
        ))

    chain_genders = raw.get("chain_genders", {})
    if not isinstance(chain_genders, dict):
        raise ParseError("$.chain_genders", "expected object")
    for cid, code in chain_genders.items():
        if code not in _GENDER_CODES:
            raise ParseError(f"$.chain_genders.{cid}", f"{code!r} not one of m/f/u")

    by_chain: dict[str, list[int]] = {}
    for m in mentions:
        if m.chain_id is not SINGLETON:
            by_chain.setdefault(m.chain_id, []).append(m.id)
    chains = [
        Chain(cid, sorted(ids), _GENDER_CODES.get(chain_genders.get(cid, "u"), "unknown"))
        for cid, ids in sorted(by_chain.items())
    ]

    doc = normalize_singletons(Document(doc_id, tokens, mentions, chains))
    report = validate_document(doc)
    if not report.ok:
        raise ValidationError(report)
    return doc


def write_document(doc: Document) -> str:
    """Serialize a document to JSON; inverse of :func:`parse_document`."""
    tokens = [{
        "text": t.text,
        "sentence": t.sentence_index,
        "paragraph": t.paragraph_index,
        "category": t.category_hint,
        "dep": t.dependency_relation,
        "gender": t.gender_hint,
        "number": t.number_hint,
        "person": t.person_hint,
    } for t in doc.tokens]
    mentions = [{
        "start": m.start,
        "end": m.end,
        "head": m.head_token,
        "level": m.nesting_level,
        "category": m.category,
        "chain": m.chain_id,
        "plural": m.is_plural,
        "confidence": m.confidence,
    } for m in doc.mentions]
    chain_genders = {
        c.chain_id: _GENDER_TO_CODE[c.gender_label]
        for c in sorted(doc.chains, key=lambda c: c.chain_id)
    }
    payload = {
        "doc_id": doc.doc_id,
        "format_version": FORMAT_VERSION,
        "tokens": tokens,
        "mentions": mentions,
        "chain_genders": chain_genders,
    }
    return json.dumps(payload, ensure_ascii=False, indent=1, sort_keys=True)


def load_document(path: str | Path) -> Document:
    return parse_document(Path(path).read_bytes())


def save_document(doc: Document, path: str | Path) -> None:
    Path(path).write_text(write_document(doc), encoding="utf-8")


# ---------------------------------------------------------------------------
# Embedding binary


class EmbeddingFormatError(ValueError):
    pass


def write_embeddings(matrix: np.ndarray, path: str | Path) -> None:
    matrix = np.ascontiguousarray(matrix, dtype="<f4")
    if matrix.ndim != 2:
        raise EmbeddingFormatError("embedding matrix must be 2-dimensional")
    header = _EMBEDDING_HEADER.pack(
        EMBEDDING_MAGIC, EMBEDDING_VERSION, matrix.shape[0], matrix.shape[1])
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(matrix.tobytes())


def read_embeddings(path: str | Path, mmap: bool = False) -> np.ndarray:
    """Read the embedding binary; bit-exact inverse of :func:`write_embeddings`.

    ``mmap=True`` memory-maps the payload instead of loading it, for
    novel-length matrices.
    """
    path = Path(path)
    with open(path, "rb") as fh:
        header = fh.read(_EMBEDDING_HEADER.size)
        if len(header) < _EMBEDDING_HEADER.size:
            raise EmbeddingFormatError("truncated header")
        magic, version, n_tokens, dim = _EMBEDDING_HEADER.unpack(header)
        if magic != EMBEDDING_MAGIC:
            raise EmbeddingFormatError(f"bad magic {magic!r}")
        if version != EMBEDDING_VERSION:
            raise EmbeddingFormatError(f"unsupported version {version}")
        expected = n_tokens * dim * 4
        actual = path.stat().st_size - _EMBEDDING_HEADER.size
        if actual < expected:
            raise EmbeddingFormatError(
                f"truncated payload: {actual} bytes, header declares {expected}")
        if actual > expected:
            raise EmbeddingFormatError(
                f"{actual - expected} trailing bytes after declared payload")
        if mmap:
            return np.memmap(path, dtype="<f4", mode="r",
                             offset=_EMBEDDING_HEADER.size,
                             shape=(n_tokens, dim))
        payload = fh.read(expected)
    return np.frombuffer(payload, dtype="<f4").reshape(n_tokens, dim).copy()


# ---------------------------------------------------------------------------
# Lexicons


def fold_name(name: str) -> str:
    """Lowercase, strip diacritics, keep the first hyphen component."""
    name = name.split("-", 1)[0]
    decomposed = unicodedata.normalize("NFD", name.casefold())
    return "".join(ch for ch in decomposed if not unicodedata.combining(ch))


def fold_token(text: str) -> str:
    decomposed = unicodedata.normalize("NFD", text.casefold())
    return "".join(ch for ch in decomposed if not unicodedata.combining(ch))


@dataclass
class FirstNameLexicon:
    """Folded first name -> (male_count, female_count)."""

    counts: dict[str, tuple[int, int]]

    def lookup(self, name: str) -> tuple[int, int] | None:
        return self.counts.get(fold_name(name))


@dataclass
class GenderClueLexicon:
    """Folded token -> list of (gender, clue_kind)."""

    clues: dict[str, list[tuple[str, str]]]

    def lookup(self, text: str) -> list[tuple[str, str]]:
        return self.clues.get(fold_token(text), [])


def _tsv_rows(path: str | Path):
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        yield lineno, line.split("\t")


def load_firstname_lexicon(path: str | Path) -> FirstNameLexicon:
    counts: dict[str, tuple[int, int]] = {}
    rows = 0
    for lineno, parts in _tsv_rows(path):
        if len(parts) != 3:
            raise ParseError(f"{path}:{lineno}", "expected name, male_count, female_count")
        name, male_s, female_s = parts
        try:
            male, female = int(male_s), int(female_s)
        except ValueError as err:
            raise ParseError(f"{path}:{lineno}", f"non-numeric count: {err}") from err
        if male < 0 or female < 0:
            raise ParseError(f"{path}:{lineno}", "negative count")
        if male == 0 and female == 0:
            raise ParseError(f"{path}:{lineno}", "both counts zero")
        key = fold_name(name)
        prev = counts.get(key, (0, 0))
        counts[key] = (prev[0] + male, prev[1] + female)
        rows += 1
    if rows == 0:
        raise ParseError(str(path), "empty lexicon")
    return FirstNameLexicon(counts)


CLUE_KINDS = ("pronoun", "noun", "article", "adjective", "honorific")


def load_genderclue_lexicon(path: str | Path) -> GenderClueLexicon:
    clues: dict[str, list[tuple[str, str]]] = {}
    rows = 0
    for lineno, parts in _tsv_rows(path):
        if len(parts) != 3:
            raise ParseError(f"{path}:{lineno}", "expected token, gender, clue_kind")
        token, code, kind = parts
        if code not in ("m", "f"):
            raise ParseError(f"{path}:{lineno}", f"gender {code!r} not m/f")
        if kind not in CLUE_KINDS:
            raise ParseError(f"{path}:{lineno}", f"clue kind {kind!r} unknown")
        gender = _GENDER_CODES[code]
        key = fold_token(token)
        existing = clues.setdefault(key, [])
        for g, k in existing:
            if k == kind and g != gender:
                raise ParseError(f"{path}:{lineno}",
                                 f"{token!r} mapped to both genders as {kind}")
        if (gender, kind) not in existing:
            existing.append((gender, kind))
        rows += 1
    if rows == 0:
        raise ParseError(str(path), "empty lexicon")
    return GenderClueLexicon(clues)


# ---------------------------------------------------------------------------
# CoNLL-style export


class ConllExportError(ValueError):
    pass


def export_conll(doc: Document, chains: list[list[int]]) -> str:
    """Render a partition in CoNLL-2012 column style.

    The final column carries open/close parenthesis chain encoding;
    re-importing reproduces the same entity partition.
    """
    chain_of: dict[int, int] = {}
    for number, chain in enumerate(chains, start=1):
        for mid in chain:
            if not 0 <= mid < len(doc.mentions):
                raise ConllExportError(f"chain references unknown mention {mid}")
            chain_of[mid] = number

    members = sorted(chain_of, key=lambda mid: canonical_sort_key(doc.mentions[mid].span()))
    spans = [doc.mentions[mid].span() for mid in members]
    for i, a in enumerate(spans):
        for b in spans[i + 1:]:
            if a[0] < b[0] <= a[1] < b[1] or b[0] < a[0] <= b[1] < a[1]:
                raise ConllExportError(f"crossing spans {a} and {b} are unencodable")

    opens: dict[int, list[int]] = {}
    closes: dict[int, list[int]] = {}
    singles: dict[int, list[int]] = {}
    for mid in members:
        m = doc.mentions[mid]
        number = chain_of[mid]
        if m.start == m.end:
            singles.setdefault(m.start, []).append(number)
        else:
            opens.setdefault(m.start, []).append(number)
            closes.setdefault(m.end, []).append(number)

    lines = [f"#begin document ({doc.doc_id}); part 000"]
    open_stack: list[tuple[int, int]] = []  # (end, number), innermost last
    for tok in doc.tokens:
        parts = []
        starting = [mid for mid in members
                    if doc.mentions[mid].start == tok.index
                    and doc.mentions[mid].start != doc.mentions[mid].end]
        starting.sort(key=lambda mid: -doc.mentions[mid].end)  # outermost first
        for mid in starting:
            parts.append(f"({chain_of[mid]}")
            open_stack.append((doc.mentions[mid].end, chain_of[mid]))
        for number in singles.get(tok.index, ()):
            parts.append(f"({number})")
        ending = [entry for entry in open_stack if entry[0] == tok.index]
        for end, number in reversed(ending):  # innermost closes first
            parts.append(f"{number})")
            open_stack.remove((end, number))
        column = "|".join(parts) if parts else "-"
        lines.append(f"{doc.doc_id}\t{tok.index}\t{tok.text}\t{column}")
    lines.append("#end document")
    return "\n".join(lines) + "\n"


def import_conll(text: str) -> list[set[tuple[int, int]]]:
    """Read a CoNLL export back into a partition of token spans."""
    clusters: dict[int, set[tuple[int, int]]] = {}
    stacks: dict[int, list[int]] = {}
    for line in text.splitlines():
        if not line or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 4:
            raise ParseError("conll", f"expected 4 columns, got {len(fields)}")
        index = int(fields[1])
        column = fields[3]
        if column == "-":
            continue
        for part in column.split("|"):
            if part.startswith("(") and part.endswith(")"):
                number = int(part[1:-1])
                clusters.setdefault(number, set()).add((index, index))
            elif part.startswith("("):
                number = int(part[1:])
                stacks.setdefault(number, []).append(index)
            elif part.endswith(")"):
                number = int(part[:-1])
                stack = stacks.get(number)
                if not stack:
                    raise ParseError("conll", f"closing unopened chain {number}")
                start = stack.pop()
                clusters.setdefault(number, set()).add((start, index))
            else:
                raise ParseError("conll", f"malformed coreference tag {part!r}")
    leftovers = [n for n, s in stacks.items() if s]
    if leftovers:
        raise ParseError("conll", f"unclosed chains {sorted(leftovers)}")
    return [clusters[n] for n in sorted(clusters)]


# ---------------------------------------------------------------------------
# Chain output JSON (resolver results)


def write_chains(doc_id: str, chains: list[list[int]], strategy: str,
                 diagnostics: list[str] | None = None) -> str:
    payload = {
        "doc_id": doc_id,
        "chains": [sorted(c) for c in chains],
        "strategy": strategy,
        "diagnostics": diagnostics or [],
    }
    return json.dumps(payload, ensure_ascii=False, indent=1, sort_keys=True)


def parse_chains(data: bytes | str) -> tuple[str, list[list[int]], str]:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    raw = json.loads(data)
    if not isinstance(raw, dict):
        raise ParseError("$", "chain file must be a JSON object")
    doc_id = _expect(raw, "doc_id", str, "$")
    chains = _expect(raw, "chains", list, "$")
    out = []
    for i, chain in enumerate(chains):
        if not isinstance(chain, list) or not all(isinstance(m, int) for m in chain):
            raise ParseError(f"$.chains[{i}]", "expected list of mention ids")
        out.append(sorted(chain))
    return doc_id, out, raw.get("strategy", "")

"""Length sweeps, corpus statistics and the synthetic-corpus generator.

The generator produces validated documents with gold chains, morphological
hints and deterministic pseudo-embeddings (a seeded function of entity and
category), so that detector and scorer learning are feasible at desk scale.
Entity mention positions follow per-category gap targets; an optional burst
mode makes entities disappear for long stretches, the regime in which the
global proper-mention strategy pays off.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from .metrics import MetricReport, PRF, document_gold_partition, score_partitions
from .model import Chain, Document, Mention, Token, canonical_sort_key, compute_nesting_levels

# ---------------------------------------------------------------------------
# Document splitting


@dataclass
class SplitDiagnostics:
    dropped_mentions: int = 0
    dropped_tokens: int = 0


def split_document(doc: Document, length: int
                   ) -> tuple[list[Document], SplitDiagnostics]:
    """Cut a document into ``floor(n / length)`` non-overlapping samples of
    exactly ``length`` tokens.

    The trailing remainder is dropped, as is any mention crossing a sample
    boundary; chains are re-scoped to each sample.
    """
    if length < 1:
        raise ValueError("sample length must be >= 1")
    diagnostics = SplitDiagnostics()
    n = doc.n_tokens
    n_samples = n // length
    diagnostics.dropped_tokens = n - n_samples * length
    boundaries = [k * length for k in range(1, n_samples + 1)]
    diagnostics.dropped_mentions = sum(
        1 for m in doc.mentions
        if any(m.start < b <= m.end for b in boundaries))
    samples = []
    for s in range(n_samples):
        lo, hi = s * length, (s + 1) * length
        tokens = [Token(t.index - lo, t.text, t.sentence_index, t.paragraph_index,
                        t.category_hint, t.dependency_relation, t.gender_hint,
                        t.number_hint, t.person_hint)
                  for t in doc.tokens[lo:hi]]
        inside = [m for m in doc.mentions if lo <= m.start and m.end < hi]
        inside.sort(key=lambda m: canonical_sort_key(m.span()))
        levels = compute_nesting_levels([(m.start, m.end) for m in inside])
        mentions = [Mention(i, m.start - lo, m.end - lo, level, m.category,
                            m.head_token - lo, m.chain_id, m.is_plural,
                            m.confidence)
                    for i, (m, level) in enumerate(zip(inside, levels))]
        gender_of = {c.chain_id: c.gender_label for c in doc.chains}
        by_chain: dict[str, list[int]] = {}
        for m in mentions:
            by_chain.setdefault(m.chain_id, []).append(m.id)
        chains = [Chain(cid, sorted(ids), gender_of.get(cid, "unknown"))
                  for cid, ids in sorted(by_chain.items())]
        embeddings = None
        if doc.embeddings is not None:
            embeddings = np.asarray(doc.embeddings[lo:hi])
        samples.append(Document(f"{doc.doc_id}#L{length}s{s}", tokens,
                                mentions, chains, embeddings))
    return samples, diagnostics


# ---------------------------------------------------------------------------
# Length sweep


@dataclass
class LengthSweepCell:
    length: int
    retained_docs: int
    samples_per_doc: list[int]
    report: MetricReport | None  # macro average; None when no doc retained


def _mean_prf(values: list[PRF]) -> PRF:
    return PRF(
        float(np.mean([v.precision for v in values])),
        float(np.mean([v.recall for v in values])),
        float(np.mean([v.f1 for v in values])),
    )


def mean_reports(reports: list[MetricReport]) -> MetricReport:
    return MetricReport(
        muc=_mean_prf([r.muc for r in reports]),
        b_cubed=_mean_prf([r.b_cubed for r in reports]),
        ceaf_e=_mean_prf([r.ceaf_e for r in reports]),
        conll_f1=float(np.mean([r.conll_f1 for r in reports])),
    )


def length_sweep(corpus: list[Document], lengths: list[int], run
                 ) -> list[LengthSweepCell]:
    """Evaluate ``run(sample) -> predicted chains`` over non-overlapping
    samples: per-document mean, then macro-average over retained documents."""
    cells = []
    for length in lengths:
        doc_reports = []
        samples_per_doc = []
        for doc in corpus:
            samples, _ = split_document(doc, length)
            if not samples:
                continue
            sample_reports = [
                score_partitions(document_gold_partition(sample), run(sample))
                for sample in samples
            ]
            doc_reports.append(mean_reports(sample_reports))
            samples_per_doc.append(len(samples))
        cells.append(LengthSweepCell(
            length, len(doc_reports), samples_per_doc,
            mean_reports(doc_reports) if doc_reports else None))
    return cells


def sweep_to_tsv(cells: list[LengthSweepCell], strategy: str) -> str:
    lines = ["length\tstrategy\tretained_docs\tsamples\tmuc_f1\tb_cubed_f1"
             "\tceaf_e_f1\tconll_f1"]
    for cell in cells:
        if cell.report is None:
            lines.append(f"{cell.length}\t{strategy}\t0\t0\t-\t-\t-\t-")
            continue
        r = cell.report
        lines.append(
            f"{cell.length}\t{strategy}\t{cell.retained_docs}"
            f"\t{sum(cell.samples_per_doc)}"
            f"\t{r.muc.f1:.5f}\t{r.b_cubed.f1:.5f}\t{r.ceaf_e.f1:.5f}"
            f"\t{r.conll_f1:.5f}")
    return "\n".join(lines) + "\n"


def sweep_to_ldjson(cells: list[LengthSweepCell], strategy: str) -> str:
    import json

    lines = []
    for cell in cells:
        record = {"length": cell.length, "strategy": strategy,
                  "retained_docs": cell.retained_docs,
                  "samples": sum(cell.samples_per_doc)}
        if cell.report is not None:
            record.update(muc_f1=cell.report.muc.f1,
                          b_cubed_f1=cell.report.b_cubed.f1,
                          ceaf_e_f1=cell.report.ceaf_e.f1,
                          conll_f1=cell.report.conll_f1)
        lines.append(json.dumps(record, sort_keys=True))
    return "\n".join(lines) + "\n"


def sweep_to_series(cells: list[LengthSweepCell]) -> str:
    """Plot-ready two-column series (length, CoNLL F1), one block per
    metric, suitable for gnuplot's ``index`` selection."""
    blocks = []
    for metric in ("muc", "b_cubed", "ceaf_e", "conll"):
        rows = [f"# {metric}_f1"]
        for cell in cells:
            if cell.report is None:
                continue
            value = (cell.report.conll_f1 if metric == "conll"
                     else getattr(cell.report, metric).f1)
            rows.append(f"{cell.length}\t{value:.5f}")
        blocks.append("\n".join(rows))
    return "\n\n\n".join(blocks) + "\n"


# ---------------------------------------------------------------------------
# Corpus statistics


@dataclass
class CorpusStats:
    n_docs: int
    mentions_per_doc: float
    singleton_ratio: float          # mentions in singleton chains / mentions
    chains_per_doc: float
    mentions_per_chain_avg: float
    mentions_per_chain_max: int
    entity_spread_avg: float        # start-to-start token distance
    entity_spread_max: int
    spread_defined: bool            # False when every chain is a singleton
    second_level_ratio: float
    third_level_ratio: float
    plural_ratio: float
    category_ratios: dict[str, float]

    def to_tsv(self) -> str:
        rows = [
            ("documents", self.n_docs),
            ("mentions_per_doc", round(self.mentions_per_doc, 2)),
            ("singleton_ratio", round(self.singleton_ratio, 4)),
            ("chains_per_doc", round(self.chains_per_doc, 2)),
            ("mentions_per_chain_avg", round(self.mentions_per_chain_avg, 2)),
            ("mentions_per_chain_max", self.mentions_per_chain_max),
            ("entity_spread_avg", round(self.entity_spread_avg, 2)),
            ("entity_spread_max", self.entity_spread_max),
            ("spread_defined", int(self.spread_defined)),
            ("second_level_ratio", round(self.second_level_ratio, 4)),
            ("third_level_ratio", round(self.third_level_ratio, 4)),
            ("plural_ratio", round(self.plural_ratio, 4)),
        ]
        rows += [(f"category_ratio_{k}", round(v, 4))
                 for k, v in sorted(self.category_ratios.items())]
        return "\n".join(f"{k}\t{v}" for k, v in rows) + "\n"


def corpus_stats(corpus: list[Document]) -> CorpusStats:
    if not corpus:
        raise ValueError("empty corpus")
    n_mentions = sum(len(d.mentions) for d in corpus)
    n_chains = sum(len(d.chains) for d in corpus)
    singleton_mentions = sum(
        len(c.mention_ids) for d in corpus for c in d.chains if c.is_singleton())
    chain_sizes = [len(c.mention_ids) for d in corpus for c in d.chains]
    spreads = []
    for doc in corpus:
        for chain in doc.chains:
            if chain.is_singleton():
                continue
            first = doc.mentions[chain.mention_ids[0]]
            last = doc.mentions[chain.mention_ids[-1]]
            spreads.append(last.start - first.start)
    levels = [m.nesting_level for d in corpus for m in d.mentions]
    categories = [m.category for d in corpus for m in d.mentions]
    plural = sum(1 for d in corpus for m in d.mentions if m.is_plural)

    def ratio(count: int) -> float:
        return count / n_mentions if n_mentions else 0.0

    return CorpusStats(
        n_docs=len(corpus),
        mentions_per_doc=n_mentions / len(corpus),
        singleton_ratio=ratio(singleton_mentions),
        chains_per_doc=n_chains / len(corpus),
        mentions_per_chain_avg=n_mentions / n_chains if n_chains else 0.0,
        mentions_per_chain_max=max(chain_sizes, default=0),
        entity_spread_avg=float(np.mean(spreads)) if spreads else 0.0,
        entity_spread_max=max(spreads, default=0),
        spread_defined=bool(spreads),
        second_level_ratio=ratio(sum(1 for l in levels if l == 1)),
        third_level_ratio=ratio(sum(1 for l in levels if l == 2)),
        plural_ratio=ratio(plural),
        category_ratios={cat: ratio(sum(1 for c in categories if c == cat))
                         for cat in ("pronoun", "common", "proper")},
    )


# ---------------------------------------------------------------------------
# Nearest-antecedent distances

PERCENTILES = (50, 90, 95, 99, 100)


def nearest_rank_percentile(values: list[int], percentile: float) -> int:
    if not values:
        raise ValueError("no values")
    ordered = sorted(values)
    rank = max(1, int(np.ceil(percentile / 100.0 * len(ordered))))
    return ordered[min(rank, len(ordered)) - 1]


def antecedent_distance_distribution(corpus: list[Document]
                                     ) -> dict[str, dict[int, int]]:
    """Mention-id distance to the previous same-chain mention, per anaphor
    category; nearest-rank percentiles."""
    distances: dict[str, list[int]] = {"pronoun": [], "common": [],
                                       "proper": [], "all": []}
    for doc in corpus:
        previous: dict[str, int] = {}
        for m in doc.mentions:
            if m.chain_id in previous:
                d = m.id - previous[m.chain_id]
                distances[m.category].append(d)
                distances["all"].append(d)
            previous[m.chain_id] = m.id
    table: dict[str, dict[int, int]] = {}
    for category, values in distances.items():
        if values:
            table[category] = {p: nearest_rank_percentile(values, p)
                               for p in PERCENTILES}
        else:
            table[category] = {}
    return table


def distances_to_tsv(table: dict[str, dict[int, int]]) -> str:
    lines = ["category\t" + "\t".join(f"p{p}" for p in PERCENTILES)]
    for category in ("pronoun", "common", "proper", "all"):
        row = table.get(category, {})
        cells = [str(row.get(p, "-")) for p in PERCENTILES]
        lines.append(category + "\t" + "\t".join(cells))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Synthetic corpus generator

FILLER_WORDS = ("or", "puis", "alors", "dans", "vers", "pres", "sous",
                "maison", "jardin", "chemin", "riviere", "soir", "matin",
                "longtemps", "souvent", "enfin", "pendant", "voyage")
COMMON_NOUNS = ("artiste", "camarade", "collegue", "enfant", "partenaire",
                "locataire")
# Alternating male/female first names, matching the generator's
# even-masculine entity parity.
DEFAULT_NAME_POOL = ("Ralph Brown", "Indiana Delmare", "Jean Fontaine",
                     "Marie Valreas", "Raymon Ramiere", "Noemie Laurent",
                     "Leon Vasquez", "Sylvia Carter")


@dataclass
class SyntheticCorpusConfig:
    """Generator settings.

    ``burst_length = 0`` schedules mentions by per-category gap targets.
    With ``burst_length > 0`` each entity instead appears in consecutive
    bursts of that many mentions, visited round-robin, so an entity is
    absent for about ``(n_entities - 1) * burst_length`` mentions between
    bursts; every burst opens with the full proper name followed by the
    short form, guaranteeing in-window proper-pair evidence.
    """

    n_docs: int = 1
    tokens_per_doc: int = 1_000
    n_entities: int = 4
    pronoun_ratio: float = 0.7
    proper_pool: tuple[str, ...] = DEFAULT_NAME_POOL
    gap_means: dict[str, float] = field(default_factory=lambda: {
        "pronoun": 2.0, "common": 12.0, "proper": 20.0})
    coordination_rate: float = 0.0
    burst_length: int = 0  # 0 disables burst mode
    embedding_dim: int = 16
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.pronoun_ratio <= 1.0:
            raise ValueError("pronoun_ratio must lie in [0, 1]")
        if not 0.0 <= self.coordination_rate <= 1.0:
            raise ValueError("coordination_rate must lie in [0, 1]")
        if min(self.n_docs, self.tokens_per_doc, self.n_entities,
               self.embedding_dim) < 1:
            raise ValueError("counts must be positive")
        worst_gap = max(self.gap_means.values())
        if worst_gap >= self.tokens_per_doc:
            raise ValueError(
                f"gap mean {worst_gap} is infeasible for documents of "
                f"{self.tokens_per_doc} tokens")


@dataclass
class _EntityState:
    index: int
    chain_id: str
    gender: str
    full_name: tuple[str, ...]
    short_name: tuple[str, ...]
    common_noun: str


class _DocBuilder:
    def __init__(self, doc_id: str, rng: np.random.Generator):
        self.doc_id = doc_id
        self.rng = rng
        self.tokens: list[Token] = []
        self.raw_mentions: list[dict] = []
        self.sentence = 0
        self.paragraph = 0
        self.sentence_tokens = 0
        self.sentences_in_paragraph = 0

    def add_token(self, text: str, **hints) -> int:
        index = len(self.tokens)
        self.tokens.append(Token(index, text, self.sentence, self.paragraph,
                                 hints.get("category", "unknown"),
                                 hints.get("dep", ""),
                                 hints.get("gender", "unknown"),
                                 hints.get("number", "unknown"),
                                 hints.get("person", "unknown")))
        self.sentence_tokens += 1
        return index

    def maybe_break_sentence(self) -> None:
        if self.sentence_tokens >= 10:
            self.add_token(".", category="other")
            self.sentence += 1
            self.sentence_tokens = 0
            self.sentences_in_paragraph += 1
            if self.sentences_in_paragraph >= 5:
                self.paragraph += 1
                self.sentences_in_paragraph = 0

    def filler(self) -> None:
        for _ in range(int(self.rng.integers(1, 4))):
            word = FILLER_WORDS[int(self.rng.integers(0, len(FILLER_WORDS)))]
            self.add_token(word, category="other")
        self.maybe_break_sentence()


def _gap(rng: np.random.Generator, mean: float) -> int:
    return max(1, int(round(rng.normal(mean, mean / 4.0))))


def _emit_mention(builder: _DocBuilder, entity: _EntityState,
                  category: str, surface: str) -> None:
    if category == "pronoun":
        text = "il" if entity.gender == "masculine" else "elle"
        t = builder.add_token(text, category="pronoun", gender=entity.gender,
                              number="singular", person="third", dep="nsubj")
        span = (t, t, t)
    elif category == "proper":
        name = entity.full_name if surface == "full" else entity.short_name
        first = last = None
        for word in name:
            t = builder.add_token(word, category="proper", number="singular",
                                  person="third",
                                  dep="nsubj" if word == name[-1] else "nmod")
            first = t if first is None else first
            last = t
        span = (first, last, last)
    else:
        t = builder.add_token(entity.common_noun, category="common",
                              number="singular", person="third", dep="nsubj")
        span = (t, t, t)
    builder.raw_mentions.append({
        "start": span[0], "end": span[1], "head": span[2],
        "category": category, "chain": entity.chain_id, "plural": False,
    })


def _emit_coordination(builder: _DocBuilder, a: _EntityState, b: _EntityState,
                       group_chain: str) -> None:
    start = len(builder.tokens)
    for word in a.full_name:
        builder.add_token(word, category="proper", number="singular",
                          person="third",
                          dep="nsubj" if word == a.full_name[-1] else "nmod")
    a_span = (start, len(builder.tokens) - 1)
    builder.add_token("et", category="other", dep="cc")
    b_start = len(builder.tokens)
    for word in b.full_name:
        builder.add_token(word, category="proper", number="singular",
                          person="third",
                          dep="conj" if word == b.full_name[-1] else "nmod")
    b_span = (b_start, len(builder.tokens) - 1)
    builder.raw_mentions.append({
        "start": start, "end": b_span[1], "head": b_span[1],
        "category": "proper", "chain": group_chain, "plural": True,
    })
    builder.raw_mentions.append({
        "start": a_span[0], "end": a_span[1], "head": a_span[1],
        "category": "proper", "chain": a.chain_id, "plural": False,
    })
    builder.raw_mentions.append({
        "start": b_span[0], "end": b_span[1], "head": b_span[1],
        "category": "proper", "chain": b.chain_id, "plural": False,
    })


def _entity_vector(seed: int, entity_index: int, dim: int) -> np.ndarray:
    rng = np.random.default_rng([seed, 101, entity_index])
    return rng.normal(0.0, 1.0, dim) / np.sqrt(dim)


def _category_vector(seed: int, category: str, dim: int) -> np.ndarray:
    rng = np.random.default_rng([seed, 202, ("pronoun", "common",
                                             "proper").index(category)])
    return rng.normal(0.0, 0.5, dim) / np.sqrt(dim)


def _entity_cast(config: SyntheticCorpusConfig, doc_index: int
                 ) -> list[_EntityState]:
    entities = []
    for e in range(config.n_entities):
        pool_index = doc_index + e
        if pool_index < len(config.proper_pool):
            name = config.proper_pool[pool_index]
        else:
            name = f"Perso{pool_index} Nom{pool_index}"  # pool exhausted
        words = tuple(name.split())
        entities.append(_EntityState(
            index=e,
            chain_id=f"e{e}",
            gender="masculine" if e % 2 == 0 else "feminine",
            full_name=words,
            short_name=(words[0],),
            common_noun=COMMON_NOUNS[e % len(COMMON_NOUNS)],
        ))
    return entities


def _emit_distractor(builder: _DocBuilder, serial: int) -> None:
    # Background singleton: fills a mention slot no tracked entity is due
    # for, so that mention-id gaps realize their scheduled values.
    t = builder.add_token(f"figurant{serial}", category="common",
                          number="singular", person="third", dep="nsubj")
    builder.raw_mentions.append({
        "start": t, "end": t, "head": t, "category": "common",
        "chain": f"bg{serial}", "plural": False,
    })


def _generate_scheduled(builder: _DocBuilder, entities: list[_EntityState],
                        config: SyntheticCorpusConfig,
                        rng: np.random.Generator) -> None:
    """Per-category gap targets drive an event queue over mention slots;
    slots with no entity due are filled by singleton distractors."""
    heap: list[tuple[int, int, str, str]] = []  # (due, entity, category, surface)
    for entity in entities:
        heapq.heappush(heap, (entity.index, entity.index, "proper", "full"))
    emitted = 0
    distractors = 0
    groups = 0
    while heap and len(builder.tokens) < config.tokens_per_doc:
        due = heap[0][0]
        builder.filler()
        if due > emitted:
            _emit_distractor(builder, distractors)
            distractors += 1
            emitted += 1
            continue
        _, e, category, surface = heapq.heappop(heap)
        entity = entities[e]
        anchor = emitted
        if (category == "proper" and config.coordination_rate > 0.0
                and config.n_entities >= 2
                and rng.random() < config.coordination_rate):
            partner = entities[(e + 1) % config.n_entities]
            _emit_coordination(builder, entity, partner, f"group{groups}")
            groups += 1
            emitted += 3
        else:
            _emit_mention(builder, entity, category, surface)
            emitted += 1
        draw = rng.random()
        if draw < config.pronoun_ratio:
            nxt = "pronoun"
        elif rng.random() < 0.5:
            nxt = "proper"
        else:
            nxt = "common"
        gap = _gap(rng, config.gap_means[nxt])
        surface_next = "short" if rng.random() < 0.5 else "full"
        heapq.heappush(heap, (anchor + gap, e, nxt, surface_next))


def _generate_bursts(builder: _DocBuilder, entities: list[_EntityState],
                     config: SyntheticCorpusConfig,
                     rng: np.random.Generator) -> None:
    """Round-robin serial bursts; each burst is full name, short name, then
    pronouns and occasional proper mentions."""
    while len(builder.tokens) < config.tokens_per_doc:
        for entity in entities:
            if len(builder.tokens) >= config.tokens_per_doc:
                break
            for position in range(config.burst_length):
                builder.filler()
                if position == 0:
                    _emit_mention(builder, entity, "proper", "full")
                elif position == 1:
                    _emit_mention(builder, entity, "proper", "short")
                elif rng.random() < config.pronoun_ratio:
                    _emit_mention(builder, entity, "pronoun", "full")
                else:
                    surface = "short" if rng.random() < 0.5 else "full"
                    _emit_mention(builder, entity, "proper", surface)


def generate_synthetic_corpus(config: SyntheticCorpusConfig) -> list[Document]:
    """Deterministic corpus with controlled antecedent gaps.

    The same configuration always produces byte-identical documents and
    embeddings.
    """
    corpus = []
    for d in range(config.n_docs):
        rng = np.random.default_rng([config.seed, d])
        builder = _DocBuilder(f"synth-{d:03d}", rng)
        entities = _entity_cast(config, d)
        if config.burst_length > 0:
            _generate_bursts(builder, entities, config, rng)
        else:
            _generate_scheduled(builder, entities, config, rng)
        if builder.sentence_tokens:
            builder.add_token(".", category="other")
        corpus.append(_finalize_document(builder, entities, config))
    return corpus


def _finalize_document(builder: _DocBuilder, entities: list[_EntityState],
                       config: SyntheticCorpusConfig) -> Document:
    raw = sorted(builder.raw_mentions,
                 key=lambda m: canonical_sort_key((m["start"], m["end"])))
    levels = compute_nesting_levels([(m["start"], m["end"]) for m in raw])
    mentions = [Mention(i, m["start"], m["end"], level, m["category"],
                        m["head"], m["chain"], m["plural"])
                for i, (m, level) in enumerate(zip(raw, levels))]
    gender_of = {e.chain_id: e.gender for e in entities}
    by_chain: dict[str, list[int]] = {}
    for m in mentions:
        by_chain.setdefault(m.chain_id, []).append(m.id)
    chains = [Chain(cid, sorted(ids), gender_of.get(cid, "unknown"))
              for cid, ids in sorted(by_chain.items())]

    entity_of_token: dict[int, tuple[int, str]] = {}
    for m in mentions:
        for e in entities:
            if e.chain_id == m.chain_id:
                for t in range(m.start, m.end + 1):
                    entity_of_token[t] = (e.index, m.category)
    dim = config.embedding_dim
    noise_rng = np.random.default_rng([config.seed, 303,
                                       int(builder.doc_id.split("-")[-1])])
    embeddings = noise_rng.normal(0.0, 0.05, (len(builder.tokens), dim))
    for t, (e_index, category) in sorted(entity_of_token.items()):
        embeddings[t] += _entity_vector(config.seed, e_index, dim)
        embeddings[t] += 0.5 * _category_vector(config.seed, category, dim)

    return Document(builder.doc_id, builder.tokens, mentions, chains,
                    embeddings)

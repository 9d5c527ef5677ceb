"""From pair scores to entity chains.

Antecedent ranking picks the highest-scoring candidate unless every score
falls below the null threshold. Two clustering strategies are provided:
plain left-to-right merging, and the easy-first global strategy that first
promotes unanimous local proper-name evidence to document-wide must-links,
blocks merges across coordination-derived cannot-links, and processes
positive decisions in descending confidence order. The post-processing is
untrained.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .docio import fold_token
from .model import Document, Mention, PipelineConfig

DEFAULT_HONORIFICS = frozenset({
    "m", "m.", "mr", "mr.", "mrs", "mrs.", "mme", "mlle", "mgr",
    "monsieur", "madame", "mademoiselle", "monseigneur", "maitre",
    "sir", "lady", "lord", "miss", "dr", "dr.", "saint", "st", "st.",
})
DEFAULT_DETERMINERS = frozenset({
    "le", "la", "les", "l'", "un", "une", "des", "du", "de", "d'",
    "the", "a", "an",
})
DEFAULT_CONJUNCTIONS = frozenset({"et", "ainsi que", "ni"})
_PUNCTUATION = frozenset({",", ";", "-", "--"})


@dataclass
class AntecedentDecision:
    anaphor_id: int
    best_antecedent_id: int | None
    best_score: float
    all_scores: dict[int, float]


@dataclass
class ConstraintSet:
    must_link: set[tuple[int, int]] = field(default_factory=set)
    cannot_link: set[tuple[int, int]] = field(default_factory=set)

    def conflicts(self) -> set[tuple[int, int]]:
        return self.must_link & self.cannot_link


def _ordered(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


def rank_antecedents(anaphor: Mention, scored: dict[int, float],
                     config: PipelineConfig) -> AntecedentDecision:
    """Argmax selection with null fallback; ties break to the nearest
    candidate (largest mention id)."""
    best_id = None
    best_score = 0.0
    for cand_id in sorted(scored, reverse=True):  # nearest first
        score = scored[cand_id]
        if score > config.null_threshold and score > best_score:
            best_id, best_score = cand_id, score
    if best_id is None:
        best_score = max(scored.values()) if scored else 0.0
    return AntecedentDecision(anaphor.id, best_id, float(best_score), scored)


class UnionFind:
    """Disjoint sets with member tracking, to let merges be vetoed on
    cluster contents."""

    def __init__(self, ids):
        self.parent = {i: i for i in ids}
        self.members = {i: {i} for i in ids}

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> int:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if len(self.members[ra]) < len(self.members[rb]):
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.members[ra] |= self.members.pop(rb)
        return ra

    def clusters(self) -> list[list[int]]:
        roots = {}
        for i in self.parent:
            roots.setdefault(self.find(i), set()).add(i)
        chains = [sorted(v) for v in roots.values()]
        chains.sort(key=lambda c: c[0])
        return chains


def cluster_left_to_right(decisions: list[AntecedentDecision]) -> list[list[int]]:
    """Merge each anaphor with its chosen antecedent in reading order; a
    null decision starts a new entity."""
    uf = UnionFind([d.anaphor_id for d in decisions])
    for decision in sorted(decisions, key=lambda d: d.anaphor_id):
        if decision.best_antecedent_id is None:
            continue
        if decision.best_antecedent_id >= decision.anaphor_id:
            raise ValueError(
                f"antecedent {decision.best_antecedent_id} does not precede "
                f"anaphor {decision.anaphor_id}")
        uf.union(decision.anaphor_id, decision.best_antecedent_id)
    return uf.clusters()


def proper_key(mention: Mention, doc: Document,
               honorifics: frozenset = DEFAULT_HONORIFICS,
               determiners: frozenset = DEFAULT_DETERMINERS) -> tuple[str, ...]:
    """Case- and diacritic-folded token multiset of a proper mention, with
    honorifics and determiners removed."""
    folded = [fold_token(doc.tokens[t].text)
              for t in range(mention.start, mention.end + 1)]
    kept = [f for f in folded
            if f not in honorifics and f not in determiners
            and f not in _PUNCTUATION]
    return tuple(sorted(kept))


def _proper_key_groups(mentions: list[Mention], doc: Document
                       ) -> dict[tuple[str, ...], list[int]]:
    groups: dict[tuple[str, ...], list[int]] = {}
    for m in mentions:
        if m.category != "proper":
            continue
        key = proper_key(m, doc)
        if key:
            groups.setdefault(key, []).append(m.id)
    return groups


def global_proper_propagation(mentions: list[Mention],
                              decisions: list[AntecedentDecision],
                              doc: Document,
                              config: PipelineConfig) -> set[tuple[int, int]]:
    """Promote unanimous local proper-key evidence to document-wide links.

    For a key pair with at least one locally scored pair, all of which are
    predicted coreferent, every document mention pair bearing those keys
    becomes a must-link (including within each key). Any conflicting local
    evidence cancels the key pair entirely.
    """
    groups = _proper_key_groups(mentions, doc)
    key_of = {mid: key for key, ids in groups.items() for mid in ids}

    unanimous: dict[tuple, bool] = {}
    for decision in decisions:
        ana_key = key_of.get(decision.anaphor_id)
        if ana_key is None:
            continue
        for cand_id, score in decision.all_scores.items():
            cand_key = key_of.get(cand_id)
            if cand_key is None:
                continue
            pair_key = tuple(sorted((ana_key, cand_key)))
            positive = score > config.null_threshold
            unanimous[pair_key] = unanimous.get(pair_key, True) and positive

    must_link: set[tuple[int, int]] = set()
    for (key_a, key_b), all_positive in unanimous.items():
        if not all_positive:
            continue
        pool = sorted(set(groups[key_a]) | set(groups[key_b]))
        for i, a in enumerate(pool):
            for b in pool[i + 1:]:
                must_link.add((a, b))
    return must_link


def extract_cannot_links(doc: Document, mentions: list[Mention],
                         conjunctions: frozenset = DEFAULT_CONJUNCTIONS
                         ) -> set[tuple[int, int]]:
    """Coordinations like "[[A] and [B]]" forbid A-B coreference.

    A plural mention containing exactly two next-level nested mentions
    separated by a coordinating conjunction yields a cannot-link, which is
    propagated to every same-key proper mention pair document-wide.
    """
    groups = _proper_key_groups(mentions, doc)
    cannot: set[tuple[int, int]] = set()
    for plural in mentions:
        if not plural.is_plural:
            continue
        nested = [m for m in mentions
                  if m.id != plural.id
                  and plural.start <= m.start and m.end <= plural.end
                  and m.nesting_level == plural.nesting_level + 1]
        if len(nested) != 2:
            continue
        left, right = sorted(nested, key=lambda m: m.start)
        if left.end >= right.start:
            continue
        between = [fold_token(doc.tokens[t].text)
                   for t in range(left.end + 1, right.start)]
        between = [t for t in between if t not in _PUNCTUATION]
        if " ".join(between) not in conjunctions:
            continue
        cannot.add(_ordered(left.id, right.id))
        left_key = proper_key(left, doc) if left.category == "proper" else None
        right_key = proper_key(right, doc) if right.category == "proper" else None
        if left_key and right_key and left_key != right_key:
            for a in groups.get(left_key, ()):
                for b in groups.get(right_key, ()):
                    cannot.add(_ordered(a, b))
    return cannot


def cluster_easy_first(decisions: list[AntecedentDecision],
                       constraints: ConstraintSet,
                       config: PipelineConfig
                       ) -> tuple[list[list[int]], list[str]]:
    """Constraint-aware clustering in descending confidence order.

    Must-links merge first (they win logged conflicts with cannot-links).
    Each positive decision then merges at its best candidate unless that
    union would put a cannot-link pair in one cluster, in which case the
    decision falls to the next-best candidate above the threshold, or to
    null when none is left.
    """
    diagnostics: list[str] = []
    for pair in sorted(constraints.conflicts()):
        diagnostics.append(f"constraint conflict: {pair} is both must and cannot link")

    uf = UnionFind([d.anaphor_id for d in decisions])
    banned: dict[int, set[int]] = {}
    for a, b in constraints.cannot_link:
        banned.setdefault(a, set()).add(b)
        banned.setdefault(b, set()).add(a)

    def violates(root_a: int, root_b: int) -> bool:
        small, large = uf.members[root_a], uf.members[root_b]
        if len(small) > len(large):
            small, large = large, small
        for member in small:
            for partner in banned.get(member, ()):
                if partner in large:
                    return True
        return False

    for a, b in sorted(constraints.must_link):
        ra, rb = uf.find(a), uf.find(b)
        if ra == rb:
            continue
        if violates(ra, rb):
            diagnostics.append(
                f"must-link ({a}, {b}) merges a cannot-link pair; must-link wins")
        uf.union(a, b)

    positive = [d for d in decisions if d.best_antecedent_id is not None]
    positive.sort(key=lambda d: (-d.best_score, d.anaphor_id))
    for decision in positive:
        candidates = sorted(
            ((score, cand_id) for cand_id, score in decision.all_scores.items()
             if score > config.null_threshold),
            key=lambda pair: (-pair[0], -pair[1]))
        for _, cand_id in candidates:
            ra, rb = uf.find(decision.anaphor_id), uf.find(cand_id)
            if ra == rb:
                break
            if violates(ra, rb):
                continue
            uf.union(ra, rb)
            break
    return uf.clusters(), diagnostics


# ---------------------------------------------------------------------------
# Scoring front-ends


def oracle_scorer():
    """Score 1.0 for same-gold-chain pairs and 0.0 otherwise; usable with
    gold mentions or any mention set carrying chain ids."""
    def score(doc: Document, candidates: list[Mention],
              anaphor: Mention) -> np.ndarray:
        return np.array([1.0 if c.chain_id == anaphor.chain_id else 0.0
                         for c in candidates])
    return score


def model_scorer(model):
    """Batch the candidate pairs of one anaphor through the pair scorer."""
    from .pairs import encode_pair, score_pairs

    def score(doc: Document, candidates: list[Mention],
              anaphor: Mention) -> np.ndarray:
        if not candidates:
            return np.zeros(0)
        batch = np.stack([encode_pair(c, anaphor, doc, model.layout)
                          for c in candidates])
        return score_pairs(model, batch)
    return score


def score_decisions(doc: Document, mentions: list[Mention], scorer,
                    config: PipelineConfig) -> list[AntecedentDecision]:
    from .pairs import candidate_antecedents

    decisions = []
    for i in range(len(mentions)):
        candidate_ids = candidate_antecedents(mentions, i, config)
        candidates = [mentions[j] for j in candidate_ids]
        scores = scorer(doc, candidates, mentions[i])
        scored = {j: float(s) for j, s in zip(candidate_ids, scores)}
        decisions.append(rank_antecedents(mentions[i], scored, config))
    return decisions


def resolve_document(doc: Document, scorer, config: PipelineConfig,
                     mentions: list[Mention] | None = None,
                     strategy: str | None = None):
    """Run ranking plus the selected clustering strategy.

    Returns ``(chains, decisions, diagnostics)``; ``mentions`` defaults to
    the document's gold mentions.
    """
    mentions = doc.mentions if mentions is None else mentions
    strategy = strategy or config.clustering_strategy
    decisions = score_decisions(doc, mentions, scorer, config)
    if strategy == "left_to_right":
        return cluster_left_to_right(decisions), decisions, []
    if strategy == "easy_first_global":
        must = global_proper_propagation(mentions, decisions, doc, config)
        cannot = extract_cannot_links(doc, mentions)
        constraints = ConstraintSet(must, cannot)
        chains, diagnostics = cluster_easy_first(decisions, constraints, config)
        return chains, decisions, diagnostics
    raise ValueError(f"unknown clustering strategy {strategy!r}")


# ---------------------------------------------------------------------------
# Error taxonomy


@dataclass
class AntecedentErrorReport:
    correct: int = 0
    out_window_wrong_link: int = 0
    out_window_wrong_null: int = 0
    in_window_wrong_link: int = 0
    in_window_wrong_null: int = 0

    @property
    def total(self) -> int:
        return (self.correct + self.out_window_wrong_link
                + self.out_window_wrong_null + self.in_window_wrong_link
                + self.in_window_wrong_null)

    @property
    def out_of_window(self) -> int:
        return self.out_window_wrong_link + self.out_window_wrong_null

    @property
    def in_window_wrong(self) -> int:
        return self.in_window_wrong_link + self.in_window_wrong_null

    def rate(self, count: int) -> float:
        return count / self.total if self.total else 0.0


def antecedent_error_report(decisions: list[AntecedentDecision],
                            doc: Document,
                            config: PipelineConfig) -> AntecedentErrorReport:
    """Classify each ranking decision against the gold chains.

    A decision is correct when it links to any earlier mention of the gold
    chain, or predicts null for a chain-initial mention. Wrong decisions
    split by whether the nearest gold antecedent was within the window.
    """
    report = AntecedentErrorReport()
    chain_of = {m.id: m.chain_id for m in doc.mentions}
    previous: dict[str, int] = {}
    nearest_gold: dict[int, int | None] = {}
    for m in doc.mentions:
        nearest_gold[m.id] = previous.get(m.chain_id)
        previous[m.chain_id] = m.id

    for decision in decisions:
        i = decision.anaphor_id
        gold_antecedent = nearest_gold[i]
        chosen = decision.best_antecedent_id
        if gold_antecedent is None:
            if chosen is None:
                report.correct += 1
            else:
                report.in_window_wrong_link += 1
            continue
        if chosen is not None and chain_of[chosen] == chain_of[i]:
            report.correct += 1
            continue
        window = config.window_for(doc.mentions[i].category)
        out_of_reach = (i - gold_antecedent) > window
        if out_of_reach:
            if chosen is None:
                report.out_window_wrong_null += 1
            else:
                report.out_window_wrong_link += 1
        else:
            if chosen is None:
                report.in_window_wrong_null += 1
            else:
                report.in_window_wrong_link += 1
    return report

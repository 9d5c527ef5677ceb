"""Coreference evaluation metrics: MUC, B-cubed, CEAF-e and their mean.

Partitions are given as iterables of mention collections. When the gold
and predicted mention universes differ, the missing mentions are added to
the deficient side as singletons before scoring, and the adjustment is
reported on the result.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

Partition = list[frozenset]


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, p_num: float, p_den: float,
                    r_num: float, r_den: float) -> "PRF":
        p = p_num / p_den if p_den > 0 else 0.0
        r = r_num / r_den if r_den > 0 else 0.0
        f = 2 * p * r / (p + r) if p + r > 0 else 0.0
        return cls(p, r, f)


@dataclass(frozen=True)
class MetricReport:
    muc: PRF
    b_cubed: PRF
    ceaf_e: PRF
    conll_f1: float
    twinless_gold: int = 0
    twinless_pred: int = 0


def _as_partition(clusters) -> Partition:
    partition = [frozenset(c) for c in clusters if len(c) > 0]
    seen = set()
    for cluster in partition:
        if cluster & seen:
            raise ValueError("clusters overlap; not a partition")
        seen |= cluster
    return partition


def _align_universes(gold: Partition, pred: Partition):
    """Extend each side with the other side's unmatched mentions as
    singletons, so both partitions cover the same universe."""
    gold_mentions = frozenset().union(*gold) if gold else frozenset()
    pred_mentions = frozenset().union(*pred) if pred else frozenset()
    only_gold = gold_mentions - pred_mentions
    only_pred = pred_mentions - gold_mentions
    gold = gold + [frozenset([m]) for m in sorted(only_pred, key=repr)]
    pred = pred + [frozenset([m]) for m in sorted(only_gold, key=repr)]
    return gold, pred, len(only_gold), len(only_pred)


def _cluster_index(partition: Partition) -> dict:
    index = {}
    for i, cluster in enumerate(partition):
        for mention in cluster:
            index[mention] = i
    return index


def _muc_half(numerator_side: Partition, other_index: dict) -> tuple[int, int]:
    num = den = 0
    for cluster in numerator_side:
        partitions = {other_index[m] for m in cluster}
        num += len(cluster) - len(partitions)
        den += len(cluster) - 1
    return num, den


def muc(gold, pred) -> PRF:
    """Link-based metric of Vilain et al.: for each key entity, the number
    of links missing to connect its partition cells, and symmetrically."""
    gold, pred, _, _ = _align_universes(_as_partition(gold), _as_partition(pred))
    r_num, r_den = _muc_half(gold, _cluster_index(pred))
    p_num, p_den = _muc_half(pred, _cluster_index(gold))
    return PRF.from_counts(p_num, p_den, r_num, r_den)


def _b_cubed_half(numerator_side: Partition, other: Partition,
                  other_index: dict) -> tuple[float, int]:
    num = 0.0
    total = 0
    for cluster in numerator_side:
        for mention in cluster:
            overlap = cluster & other[other_index[mention]]
            num += len(overlap) / len(cluster)
            total += 1
    return num, total


def b_cubed(gold, pred) -> PRF:
    """Mention-weighted metric: per-mention overlap of its gold and
    predicted clusters."""
    gold, pred, _, _ = _align_universes(_as_partition(gold), _as_partition(pred))
    r_num, r_den = _b_cubed_half(gold, pred, _cluster_index(pred))
    p_num, p_den = _b_cubed_half(pred, gold, _cluster_index(gold))
    return PRF.from_counts(p_num, p_den, r_num, r_den)


def _phi4(a: frozenset, b: frozenset) -> float:
    return 2.0 * len(a & b) / (len(a) + len(b))


def ceaf_e(gold, pred) -> PRF:
    """Entity-based metric over the optimal one-to-one entity alignment
    maximizing the phi4 similarity, solved as an assignment problem."""
    gold, pred, _, _ = _align_universes(_as_partition(gold), _as_partition(pred))
    if not gold or not pred:
        return PRF.from_counts(0.0, len(pred), 0.0, len(gold))
    similarity = np.zeros((len(gold), len(pred)))
    for i, g in enumerate(gold):
        for j, p in enumerate(pred):
            similarity[i, j] = _phi4(g, p)
    rows, cols = linear_sum_assignment(similarity, maximize=True)
    total = float(similarity[rows, cols].sum())
    return PRF.from_counts(total, len(pred), total, len(gold))


def conll_f1(muc_f1: float, b_cubed_f1: float, ceaf_e_f1: float) -> float:
    return (muc_f1 + b_cubed_f1 + ceaf_e_f1) / 3.0


def score_partitions(gold, pred) -> MetricReport:
    """All three metrics plus their average F1 in one report."""
    gold_p = _as_partition(gold)
    pred_p = _as_partition(pred)
    aligned_gold, aligned_pred, twinless_gold, twinless_pred = _align_universes(
        gold_p, pred_p)
    m = muc(aligned_gold, aligned_pred)
    b = b_cubed(aligned_gold, aligned_pred)
    c = ceaf_e(aligned_gold, aligned_pred)
    return MetricReport(
        muc=m, b_cubed=b, ceaf_e=c,
        conll_f1=conll_f1(m.f1, b.f1, c.f1),
        twinless_gold=twinless_gold,
        twinless_pred=twinless_pred,
    )


def document_gold_partition(doc) -> list[frozenset]:
    return [frozenset(chain.mention_ids) for chain in doc.chains]

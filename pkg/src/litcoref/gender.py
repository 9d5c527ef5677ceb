"""Character gender prediction in three cumulative stages.

Stage 1 reads explicit clues (pronoun forms, gendered nouns, articles,
adjectives, honorifics) from the mention span. Stage 2 looks proper
mentions up in a first-name frequency lexicon. Stage 3 resolves each
chain's majority over the decided mentions and assigns it to every mention
of the chain. Singleton and plural chains are excluded from propagation
and evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .docio import FirstNameLexicon, GenderClueLexicon, fold_token
from .model import Chain, Document, Mention
from .resolver import DEFAULT_HONORIFICS

STAGES = ("rules", "rules+firstnames", "rules+firstnames+coreference")


def heuristic_gender(mention: Mention, doc: Document,
                     clues: GenderClueLexicon) -> str:
    """Unanimous in-span clue lookup; conflicting or absent clues give
    unknown."""
    found = set()
    for t in range(mention.start, mention.end + 1):
        for gender, _kind in clues.lookup(doc.tokens[t].text):
            found.add(gender)
    if len(found) == 1:
        return found.pop()
    return "unknown"


def firstname_gender(mention: Mention, doc: Document,
                     lexicon: FirstNameLexicon,
                     ratio_threshold: float = 0.9) -> str:
    """Majority gender of the mention's first name, when decisive enough.

    The candidate name is the first non-honorific token of the span; the
    majority side must hold at least ``ratio_threshold`` of the lexicon
    counts, otherwise the name stays unknown.
    """
    if mention.category != "proper":
        return "unknown"
    candidate = None
    for t in range(mention.start, mention.end + 1):
        if fold_token(doc.tokens[t].text) not in DEFAULT_HONORIFICS:
            candidate = doc.tokens[t].text
            break
    if candidate is None:
        return "unknown"
    counts = lexicon.lookup(candidate)
    if counts is None:
        return "unknown"
    male, female = counts
    total = male + female
    if male / total >= ratio_threshold:
        return "masculine"
    if female / total >= ratio_threshold:
        return "feminine"
    return "unknown"


@dataclass(frozen=True)
class MentionGender:
    label: str = "unknown"
    source: str = "none"  # heuristic | firstname | propagated | none


@dataclass
class ChainGender:
    label: str = "unknown"
    ratio: float = 0.0  # majority share of decided mentions, in [0.5, 1]


@dataclass
class GenderAssignment:
    mentions: dict[int, MentionGender] = field(default_factory=dict)
    chains: dict[str, ChainGender] = field(default_factory=dict)


def eligible_chains(doc: Document, chains: list[Chain] | None = None
                    ) -> list[Chain]:
    """Chains considered for gender work: non-singleton and non-plural."""
    out = []
    for chain in (doc.chains if chains is None else chains):
        if chain.is_singleton():
            continue
        if any(doc.mentions[mid].is_plural for mid in chain.mention_ids):
            continue
        out.append(chain)
    return out


def partition_chains(doc: Document, partition: list[list[int]]) -> list[Chain]:
    """Wrap a predicted partition as chains usable for propagation."""
    chains = [Chain(f"pred{i}", sorted(ids))
              for i, ids in enumerate(partition)]
    return eligible_chains(doc, chains)


def label_mentions(doc: Document, clues: GenderClueLexicon,
                   firstnames: FirstNameLexicon | None = None,
                   ratio_threshold: float = 0.9) -> GenderAssignment:
    """Per-mention stage-1 (and stage-2, when a lexicon is given) labels."""
    assignment = GenderAssignment()
    for mention in doc.mentions:
        label = heuristic_gender(mention, doc, clues)
        if label != "unknown":
            assignment.mentions[mention.id] = MentionGender(label, "heuristic")
            continue
        if firstnames is not None:
            label = firstname_gender(mention, doc, firstnames, ratio_threshold)
            if label != "unknown":
                assignment.mentions[mention.id] = MentionGender(label, "firstname")
                continue
        assignment.mentions[mention.id] = MentionGender()
    return assignment


def propagate_gender(doc: Document, chains: list[Chain],
                     assignment: GenderAssignment) -> GenderAssignment:
    """Assign each chain's majority label to all its mentions.

    Exact ties and chains without any decided mention stay unknown. A
    mention whose stage-1/2 label disagrees with the majority is
    overwritten and marked propagated; agreeing labels keep their source.
    """
    out = GenderAssignment(mentions=dict(assignment.mentions), chains={})
    for chain in chains:
        labels = [assignment.mentions[mid].label for mid in chain.mention_ids
                  if mid in assignment.mentions]
        males = sum(1 for label in labels if label == "masculine")
        females = sum(1 for label in labels if label == "feminine")
        decided = males + females
        if decided == 0 or males == females:
            out.chains[chain.chain_id] = ChainGender()
            continue
        majority = "masculine" if males > females else "feminine"
        out.chains[chain.chain_id] = ChainGender(
            majority, max(males, females) / decided)
        for mid in chain.mention_ids:
            current = out.mentions.get(mid, MentionGender())
            if current.label != majority:
                out.mentions[mid] = MentionGender(majority, "propagated")
    return out


@dataclass(frozen=True)
class ClassScore:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass
class StageReport:
    stage: str
    masculine: ClassScore
    feminine: ClassScore


def _class_score(predicted: dict[int, str], gold: dict[int, str],
                 label: str) -> ClassScore:
    tp = sum(1 for mid, g in gold.items() if g == label
             and predicted.get(mid) == label)
    fp = sum(1 for mid, g in gold.items() if g != label
             and predicted.get(mid) == label)
    fn = sum(1 for mid, g in gold.items() if g == label
             and predicted.get(mid) != label)
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return ClassScore(p, r, f, sum(1 for g in gold.values() if g == label))


def _stage_predictions(doc: Document, clues: GenderClueLexicon,
                       firstnames: FirstNameLexicon,
                       chains: list[Chain] | None,
                       ratio_threshold: float):
    gold: dict[int, str] = {}
    for chain in eligible_chains(doc):
        if chain.gender_label == "unknown":
            continue
        for mid in chain.mention_ids:
            gold[mid] = chain.gender_label
    stage1 = label_mentions(doc, clues)
    stage2 = label_mentions(doc, clues, firstnames, ratio_threshold)
    propagation_chains = chains if chains is not None else eligible_chains(doc)
    stage3 = propagate_gender(doc, propagation_chains, stage2)
    predictions = []
    for assignment in (stage1, stage2, stage3):
        predictions.append({mid: g.label for mid, g in assignment.mentions.items()
                            if g.label != "unknown"})
    return gold, predictions


def _stage_reports(gold: dict, predictions: list[dict]) -> list[StageReport]:
    return [StageReport(
        stage=stage_name,
        masculine=_class_score(predicted, gold, "masculine"),
        feminine=_class_score(predicted, gold, "feminine"),
    ) for stage_name, predicted in zip(STAGES, predictions)]


def evaluate_gender(doc: Document, clues: GenderClueLexicon,
                    firstnames: FirstNameLexicon,
                    chains: list[Chain] | None = None,
                    ratio_threshold: float = 0.9) -> list[StageReport]:
    """Cumulative three-stage report against gold entity genders.

    Scores cover the mentions of gender-annotated, non-singleton,
    non-plural gold chains; predictions outside that universe are ignored.
    ``chains`` selects the partition used for propagation (gold by default).
    """
    gold, predictions = _stage_predictions(doc, clues, firstnames, chains,
                                           ratio_threshold)
    return _stage_reports(gold, predictions)


def evaluate_gender_corpus(corpus: list[Document], clues: GenderClueLexicon,
                           firstnames: FirstNameLexicon,
                           chains_per_doc: list[list[Chain] | None] | None = None,
                           ratio_threshold: float = 0.9) -> list[StageReport]:
    """Micro-averaged three-stage report pooled over a corpus."""
    pooled_gold: dict = {}
    pooled_predictions: list[dict] = [{}, {}, {}]
    for d, doc in enumerate(corpus):
        chains = chains_per_doc[d] if chains_per_doc is not None else None
        gold, predictions = _stage_predictions(doc, clues, firstnames, chains,
                                               ratio_threshold)
        for mid, label in gold.items():
            pooled_gold[(d, mid)] = label
        for stage, predicted in enumerate(predictions):
            for mid, label in predicted.items():
                pooled_predictions[stage][(d, mid)] = label
    return _stage_reports(pooled_gold, pooled_predictions)


def reports_to_tsv(reports: list[StageReport]) -> str:
    lines = ["stage\tclass\tprecision\trecall\tf1\tsupport"]
    for report in reports:
        for label, score in (("masculine", report.masculine),
                             ("feminine", report.feminine)):
            lines.append(f"{report.stage}\t{label}\t{score.precision:.4f}"
                         f"\t{score.recall:.4f}\t{score.f1:.4f}\t{score.support}")
    return "\n".join(lines) + "\n"


def assignment_to_json(doc: Document, assignment: GenderAssignment) -> str:
    import json

    return json.dumps({
        "doc_id": doc.doc_id,
        "mentions": {str(mid): {"label": g.label, "source": g.source}
                     for mid, g in sorted(assignment.mentions.items())},
        "chains": {cid: {"label": c.label, "ratio": c.ratio}
                   for cid, c in sorted(assignment.chains.items())},
    }, ensure_ascii=False, indent=1, sort_keys=True)

import json

import pytest

from litcoref import docio
from litcoref.model import (
    MalformedAnnotationError,
    Mention,
    PipelineConfig,
    Token,
    classify_mention,
    compute_nesting_levels,
    validate_document,
)


class TestNestingLevels:
    def test_possessive_inside_nominal(self):
        # "my" inside "my parents"
        assert compute_nesting_levels([(7, 7), (7, 8)]) == [1, 0]

    def test_single_span_is_outermost(self):
        assert compute_nesting_levels([(3, 5)]) == [0]

    def test_third_level_nesting(self):
        # her < her husband < Mrs. Smith and her husband
        spans = [(13, 13), (13, 14), (10, 14)]
        assert compute_nesting_levels(spans) == [2, 1, 0]

    def test_crossing_spans_rejected(self):
        with pytest.raises(MalformedAnnotationError):
            compute_nesting_levels([(0, 2), (2, 4)])

    def test_depth_beyond_two_rejected(self):
        spans = [(0, 9), (1, 8), (2, 7), (3, 6)]
        with pytest.raises(MalformedAnnotationError):
            compute_nesting_levels(spans)

    def test_equal_spans_do_not_contain_each_other(self):
        assert compute_nesting_levels([(1, 2), (1, 2)]) == [0, 0]

    def test_order_independent(self):
        spans = [(13, 13), (13, 14), (10, 14), (0, 0)]
        forward = compute_nesting_levels(spans)
        reordered = list(reversed(spans))
        backward = compute_nesting_levels(reordered)
        assert forward == list(reversed(backward))


class TestClassifyMention:
    def _tokens(self, hint):
        return [Token(0, "w", 0, 0, category_hint=hint)]

    def _mention(self):
        return Mention(0, 0, 0, 0, "common", 0, "c")

    def test_pronoun_hint(self):
        assert classify_mention(self._mention(), self._tokens("pronoun")) == \
            ("pronoun", False)

    def test_proper_hint(self):
        assert classify_mention(self._mention(), self._tokens("proper")) == \
            ("proper", False)

    def test_other_hint_defaults_to_common_with_flag(self):
        assert classify_mention(self._mention(), self._tokens("other")) == \
            ("common", True)


class TestExampleSentence:
    def test_levels_after_canonical_sort(self, example_doc):
        assert [m.nesting_level for m in example_doc.mentions] == \
            [0, 0, 0, 1, 0, 1, 1, 2]

    def test_six_entities(self, example_doc):
        assert len(example_doc.chains) == 6
        sizes = sorted(len(c.mention_ids) for c in example_doc.chains)
        assert sizes == [1, 1, 1, 1, 2, 2]

    def test_containers_sort_before_nested(self, example_doc):
        for i, outer in enumerate(example_doc.mentions):
            for inner in example_doc.mentions[:i]:
                strictly_inside = (outer.start <= inner.start
                                   and inner.end <= outer.end
                                   and outer.span() != inner.span())
                assert not strictly_inside

    def test_chain_partition_covers_every_mention(self, example_doc):
        total = sum(len(c.mention_ids) for c in example_doc.chains)
        assert total == len(example_doc.mentions)


class TestValidateDocument:
    def test_well_formed(self, example_doc):
        assert validate_document(example_doc).ok

    def test_span_reversed(self, example_doc):
        example_doc.mentions[0].start, example_doc.mentions[0].end = 3, 1
        report = validate_document(example_doc)
        assert any("end before start" in str(v) for v in report.violations)

    def test_mention_in_two_chains(self, example_doc):
        example_doc.chains[0].mention_ids.append(
            example_doc.chains[1].mention_ids[0])
        report = validate_document(example_doc)
        assert any("already in chain" in str(v) for v in report.violations)

    def test_wrong_nesting_level(self, example_doc):
        example_doc.mentions[3].nesting_level = 0
        report = validate_document(example_doc)
        assert any("computed" in str(v) for v in report.violations)

    def test_embedding_row_mismatch(self, example_doc):
        import numpy as np

        example_doc.embeddings = np.zeros((3, 4))
        report = validate_document(example_doc)
        assert any("rows" in str(v) for v in report.violations)

    def test_validation_is_pure(self, example_doc):
        first = str(validate_document(example_doc))
        second = str(validate_document(example_doc))
        assert first == second


class TestPipelineConfig:
    def test_defaults(self):
        config = PipelineConfig()
        assert config.pronoun_window == 30
        assert config.noun_window == 300
        assert config.null_threshold == 0.5
        assert config.embedding_dim == 1024

    def test_window_by_category(self):
        config = PipelineConfig()
        assert config.window_for("pronoun") == 30
        assert config.window_for("proper") == 300
        assert config.window_for("common") == 300

    def test_rejects_bad_threshold(self):
        with pytest.raises(ValueError):
            PipelineConfig(null_threshold=1.0)

    def test_rejects_zero_window(self):
        with pytest.raises(ValueError):
            PipelineConfig(pronoun_window=0)


def test_duplicate_span_is_validation_error():
    payload = {
        "doc_id": "dup",
        "tokens": [{"text": "a", "sentence": 0, "paragraph": 0},
                   {"text": "b", "sentence": 0, "paragraph": 0}],
        "mentions": [
            {"start": 0, "end": 1, "category": "common", "chain": "x"},
            {"start": 0, "end": 1, "category": "common", "chain": "y"},
        ],
    }
    with pytest.raises(docio.ValidationError):
        docio.parse_document(json.dumps(payload))

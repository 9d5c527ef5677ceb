import pytest

from litcoref.bioes import OverlapError, bioes_decode, bioes_encode


class TestEncode:
    def test_single_and_multi_token(self):
        assert bioes_encode([(0, 0), (2, 4)], 6) == \
            ["S-PER", "O", "B-PER", "I-PER", "E-PER", "O"]

    def test_no_spans(self):
        assert bioes_encode([], 3) == ["O", "O", "O"]

    def test_two_token_span(self):
        assert bioes_encode([(0, 1)], 2) == ["B-PER", "E-PER"]

    def test_overlap_rejected(self):
        with pytest.raises(OverlapError):
            bioes_encode([(0, 2), (2, 4)], 6)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            bioes_encode([(0, 5)], 3)


class TestDecode:
    def test_inverse_of_encode(self):
        spans, diagnostics = bioes_decode(
            ["S-PER", "O", "B-PER", "I-PER", "E-PER", "O"])
        assert [(s, e) for s, e, _ in spans] == [(0, 0), (2, 4)]
        assert diagnostics == []

    def test_orphan_fragment_dropped_with_diagnostic(self):
        spans, diagnostics = bioes_decode(["I-PER", "E-PER", "O"])
        assert spans == []
        assert len(diagnostics) == 1

    def test_confidence_is_token_mean(self):
        spans, _ = bioes_decode(["B-PER", "E-PER"], [0.8, 0.6])
        (start, end, confidence), = spans
        assert (start, end) == (0, 1)
        assert confidence == pytest.approx(0.7)

    def test_unterminated_open_dropped(self):
        spans, diagnostics = bioes_decode(["B-PER", "I-PER", "O"])
        assert spans == []
        assert diagnostics

    def test_unknown_label_rejected(self):
        with pytest.raises(ValueError):
            bioes_decode(["B-LOC"])


class TestRoundTrip:
    @pytest.mark.parametrize("spans,n", [
        ([], 1),
        ([(0, 0)], 1),
        ([(0, 3)], 5),
        ([(0, 0), (1, 1), (2, 2)], 3),
        ([(1, 2), (4, 4), (6, 9)], 10),
    ])
    def test_decode_encode_identity(self, spans, n):
        labels = bioes_encode(spans, n)
        decoded, diagnostics = bioes_decode(labels)
        assert [(s, e) for s, e, _ in decoded] == sorted(spans)
        assert diagnostics == []

import json

import numpy as np
import pytest

from segembed.cli import main
from segembed.encoders import (
    MisalignmentError,
    StubEncoder,
    make_encoder,
    split_subwords,
)
from segembed.extract import (
    extract,
    extract_matrix,
    pool_subwords,
    read_document_tokens,
    tokenize_segment,
)


def document_payload(words):
    return {
        "doc_id": "doc",
        "format_version": 1,
        "tokens": [{"text": w, "sentence": 0, "paragraph": 0} for w in words],
        "mentions": [],
        "chain_genders": {},
    }


@pytest.fixture
def doc_path(tmp_path):
    words = ["Indiana", "regardait", "la", "riviere", "pendant",
             "que", "Ralph", "parlait", "doucement", "encore"]
    path = tmp_path / "doc.json"
    path.write_text(json.dumps(document_payload(words)))
    return path


class TestSubwords:
    def test_short_token_is_one_piece(self):
        assert split_subwords("la") == ["la"]

    def test_long_token_chunked(self):
        assert split_subwords("regardait") == ["rega", "rdai", "t"]

    def test_empty_token_has_no_pieces(self):
        assert split_subwords("") == []

    def test_pooling_means_each_token(self):
        vectors = np.array([[1.0], [3.0], [10.0]])
        pooled = pool_subwords(vectors, [2, 1])
        assert np.allclose(pooled, [[2.0], [10.0]])

    def test_misalignment_lists_offenders(self):
        with pytest.raises(MisalignmentError, match="1:''"):
            tokenize_segment(["ok", ""], 0, 2)


class TestEncoders:
    def test_stub_is_position_deterministic(self):
        encoder = StubEncoder(dim=4)
        first = encoder.encode_subwords(["ab", "cd"], [3, 3])
        again = encoder.encode_subwords(["zz", "qq"], [3, 3])
        assert np.array_equal(first, again)

    def test_make_encoder_parses_stub(self):
        encoder = make_encoder("stub:16")
        assert encoder.dim == 16

    def test_unknown_encoder_rejected(self):
        with pytest.raises(ValueError, match="unknown encoder"):
            make_encoder("some-giant-model")


class TestExtractMatrix:
    def test_matches_stub_oracle_exactly(self):
        encoder = StubEncoder(dim=4)
        tokens = [f"mot{i}" for i in range(10)]
        matrix, plan, _ = extract_matrix(tokens, encoder, 4)
        assert [s for s, _ in plan.segments] == [0, 2, 4, 6, 8]
        expected = np.stack([encoder.vector_for_position(t)
                             for t in range(10)])
        assert np.allclose(matrix, expected, atol=0)

    def test_empty_document(self):
        matrix, plan, counts = extract_matrix([], StubEncoder(3), 4)
        assert matrix.shape == (0, 3)
        assert counts == []


class TestExtractFiles:
    def test_sidecar_contents(self, tmp_path, doc_path):
        out = tmp_path / "doc.emb"
        extract(doc_path, StubEncoder(8), 4, out)
        sidecar = json.loads((tmp_path / "doc.emb.json").read_text())
        assert sidecar["encoder"] == "stub:8"
        assert sidecar["context_length"] == 4
        assert sidecar["n_tokens"] == 10
        assert sidecar["dim"] == 8
        assert len(sidecar["token_subword_counts"]) == 10

    def test_rerun_is_byte_identical(self, tmp_path, doc_path):
        out_a = tmp_path / "a.emb"
        out_b = tmp_path / "b.emb"
        extract(doc_path, StubEncoder(8), 4, out_a)
        extract(doc_path, StubEncoder(8), 4, out_b)
        assert out_a.read_bytes() == out_b.read_bytes()

    def test_cli_end_to_end(self, tmp_path, doc_path, capsys):
        out = tmp_path / "doc.emb"
        code = main(["extract", "--input", str(doc_path),
                     "--encoder", "stub:8", "--context", "4",
                     "--out", str(out)])
        assert code == 0
        assert out.exists()
        assert "wrote" in capsys.readouterr().out

    def test_cli_usage_error(self):
        assert main(["extract", "--nope"]) == 1

    def test_cli_bad_encoder(self, tmp_path, doc_path):
        code = main(["extract", "--input", str(doc_path),
                     "--encoder", "nope", "--context", "4",
                     "--out", str(tmp_path / "x.emb")])
        assert code == 2

    def test_cli_odd_context(self, tmp_path, doc_path):
        code = main(["extract", "--input", str(doc_path),
                     "--encoder", "stub:4", "--context", "5",
                     "--out", str(tmp_path / "x.emb")])
        assert code == 2

    def test_non_document_input_rejected(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("[1, 2, 3]")
        with pytest.raises(ValueError, match="not a document"):
            read_document_tokens(bad)

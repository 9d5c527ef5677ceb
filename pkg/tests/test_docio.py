import json

import numpy as np
import pytest

from litcoref import docio
from litcoref.metrics import score_partitions


MINIMAL = {
    "doc_id": "mini",
    "tokens": [
        {"text": "Anna", "sentence": 0, "paragraph": 0, "category": "proper"},
        {"text": "vit", "sentence": 0, "paragraph": 0},
        {"text": "ici", "sentence": 0, "paragraph": 0},
        {"text": ".", "sentence": 0, "paragraph": 0},
        {"text": "Elle", "sentence": 1, "paragraph": 0, "category": "pronoun"},
        {"text": "dort", "sentence": 1, "paragraph": 0},
    ],
    "mentions": [
        {"start": 0, "end": 0, "category": "proper", "chain": "anna"},
        {"start": 4, "end": 4, "category": "pronoun", "chain": "anna"},
    ],
    "chain_genders": {"anna": "f"},
}


class TestDocumentJson:
    def test_minimal_roundtrip(self):
        doc = docio.parse_document(json.dumps(MINIMAL))
        assert doc.doc_id == "mini"
        assert len(doc.chains) == 1
        assert doc.chains[0].mention_ids == [0, 1]
        assert doc.chains[0].gender_label == "feminine"

    def test_parse_write_identity(self, example_doc):
        text = docio.write_document(example_doc)
        again = docio.parse_document(text)
        assert docio.write_document(again) == text

    def test_example_reconstruction(self, example_doc):
        assert len(example_doc.mentions) == 8
        assert len(example_doc.chains) == 6

    def test_schema_error_has_path(self):
        bad = dict(MINIMAL, tokens=[{"sentence": 0, "paragraph": 0}])
        with pytest.raises(docio.ParseError) as err:
            docio.parse_document(json.dumps(bad))
        assert "tokens[0]" in str(err.value)

    def test_bad_enum_rejected(self):
        bad = json.loads(json.dumps(MINIMAL))
        bad["tokens"][0]["gender"] = "m"
        with pytest.raises(docio.ParseError):
            docio.parse_document(json.dumps(bad))

    def test_level_checked_when_present(self):
        bad = json.loads(json.dumps(MINIMAL))
        bad["mentions"][0]["level"] = 2
        with pytest.raises(docio.ValidationError):
            docio.parse_document(json.dumps(bad))

    def test_invalid_json(self):
        with pytest.raises(docio.ParseError):
            docio.parse_document(b"{not json")


class TestEmbeddingBinary:
    def test_bit_roundtrip(self, tmp_path):
        path = tmp_path / "m.emb"
        matrix = np.arange(12, dtype=np.float32).reshape(3, 4) / 7.0
        docio.write_embeddings(matrix, path)
        again = docio.read_embeddings(path)
        assert again.dtype == np.float32
        assert np.array_equal(matrix, again)
        docio.write_embeddings(again, tmp_path / "m2.emb")
        assert (tmp_path / "m.emb").read_bytes() == \
            (tmp_path / "m2.emb").read_bytes()

    def test_memory_mapped_read(self, tmp_path):
        path = tmp_path / "m.emb"
        matrix = np.random.default_rng(0).normal(size=(5, 3)).astype(np.float32)
        docio.write_embeddings(matrix, path)
        mapped = docio.read_embeddings(path, mmap=True)
        assert np.array_equal(np.asarray(mapped), matrix)

    def test_truncated_payload(self, tmp_path):
        path = tmp_path / "m.emb"
        docio.write_embeddings(np.zeros((10, 4), dtype=np.float32), path)
        data = path.read_bytes()
        path.write_bytes(data[:-4])  # lose one value
        with pytest.raises(docio.EmbeddingFormatError, match="truncated"):
            docio.read_embeddings(path)

    def test_trailing_bytes_rejected(self, tmp_path):
        path = tmp_path / "m.emb"
        docio.write_embeddings(np.zeros((2, 2), dtype=np.float32), path)
        path.write_bytes(path.read_bytes() + b"xx")
        with pytest.raises(docio.EmbeddingFormatError, match="trailing"):
            docio.read_embeddings(path)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "m.emb"
        docio.write_embeddings(np.zeros((1, 1), dtype=np.float32), path)
        data = bytearray(path.read_bytes())
        data[:4] = b"NOPE"
        path.write_bytes(bytes(data))
        with pytest.raises(docio.EmbeddingFormatError, match="magic"):
            docio.read_embeddings(path)

    def test_attach_dim_mismatch(self, example_doc):
        from litcoref.model import attach_embeddings

        matrix = np.zeros((len(example_doc.tokens), 8))
        with pytest.raises(ValueError, match="dim"):
            attach_embeddings(example_doc, matrix, expected_dim=16)


class TestFirstNameLexicon:
    def test_two_entries(self, tmp_path):
        path = tmp_path / "n.tsv"
        path.write_text("Marie\t300\t56000\nJean\t48000\t150\n")
        lex = docio.load_firstname_lexicon(path)
        assert lex.lookup("Marie") == (300, 56000)
        assert lex.lookup("JEAN") == (48000, 150)

    def test_duplicates_summed(self, tmp_path):
        path = tmp_path / "n.tsv"
        path.write_text("Camille\t100\t200\nCamille\t50\t50\n")
        lex = docio.load_firstname_lexicon(path)
        assert lex.lookup("camille") == (150, 250)

    def test_negative_count_rejected(self, tmp_path):
        path = tmp_path / "n.tsv"
        path.write_text("Jean\t-1\t10\n")
        with pytest.raises(docio.ParseError, match="negative"):
            docio.load_firstname_lexicon(path)

    def test_non_numeric_rejected(self, tmp_path):
        path = tmp_path / "n.tsv"
        path.write_text("Jean\tmany\t10\n")
        with pytest.raises(docio.ParseError, match="non-numeric"):
            docio.load_firstname_lexicon(path)

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "n.tsv"
        path.write_text("# just a comment\n")
        with pytest.raises(docio.ParseError, match="empty"):
            docio.load_firstname_lexicon(path)

    def test_folding_diacritics_and_hyphens(self):
        assert docio.fold_name("Jean-Pierre") == "jean"
        assert docio.fold_name("Noémie") == "noemie"
        assert docio.fold_name("ANDRÉ") == "andre"


class TestGenderClueLexicon:
    def test_conflict_within_kind_rejected(self, tmp_path):
        path = tmp_path / "c.tsv"
        path.write_text("il\tm\tpronoun\nil\tf\tpronoun\n")
        with pytest.raises(docio.ParseError, match="both genders"):
            docio.load_genderclue_lexicon(path)

    def test_lookup_folds(self, clue_lexicon):
        assert ("masculine", "pronoun") in clue_lexicon.lookup("Il")


class TestConllExport:
    def test_single_chain_pattern(self):
        payload = {
            "doc_id": "t",
            "tokens": [{"text": w, "sentence": 0, "paragraph": 0}
                       for w in ("a", "b", "c")],
            "mentions": [
                {"start": 0, "end": 0, "category": "common", "chain": "x"},
                {"start": 2, "end": 2, "category": "common", "chain": "x"},
            ],
        }
        doc = docio.parse_document(json.dumps(payload))
        text = docio.export_conll(doc, [[0, 1]])
        columns = [line.split("\t")[-1] for line in text.splitlines()
                   if line and not line.startswith("#")]
        assert columns == ["(1)", "-", "(1)"]

    def test_empty_chain_set(self, example_doc):
        text = docio.export_conll(example_doc, [])
        columns = [line.split("\t")[-1] for line in text.splitlines()
                   if line and not line.startswith("#")]
        assert set(columns) == {"-"}

    def test_nested_stacked_parentheses_roundtrip(self, example_doc):
        chains = [list(c.mention_ids) for c in example_doc.chains]
        text = docio.export_conll(example_doc, chains)
        partition = docio.import_conll(text)
        original = [
            {(example_doc.mentions[m].start, example_doc.mentions[m].end)
             for m in chain} for chain in chains]
        report = score_partitions(
            [frozenset(c) for c in original],
            [frozenset(c) for c in partition])
        assert report.conll_f1 == pytest.approx(1.0)

    def test_reimport_identity_on_fixture(self, example_doc):
        chains = [list(c.mention_ids) for c in example_doc.chains]
        text = docio.export_conll(example_doc, chains)
        spans = docio.import_conll(text)
        expected = {frozenset((example_doc.mentions[m].start,
                               example_doc.mentions[m].end) for m in chain)
                    for chain in chains}
        assert {frozenset(c) for c in spans} == expected

    def test_crossing_spans_unencodable(self, example_doc):
        from litcoref.model import Mention

        example_doc.mentions.append(
            Mention(8, 11, 13, 0, "common", 13, "smith"))
        with pytest.raises(docio.ConllExportError, match="crossing"):
            docio.export_conll(example_doc, [[5, 8]])

    def test_score_cli_accepts_conll(self, example_doc, tmp_path, capsys):
        from litcoref.cli import main

        chains = [list(c.mention_ids) for c in example_doc.chains]
        conll_path = tmp_path / "gold.conll"
        conll_path.write_text(docio.export_conll(example_doc, chains))
        doc_path = tmp_path / "doc.json"
        doc_path.write_text(docio.write_document(example_doc))
        code = main(["score", "--gold", str(doc_path),
                     "--pred", str(conll_path),
                     "--manifest", str(tmp_path / "m.json")])
        assert code == 0
        assert "CoNLL F1=1.00000" in capsys.readouterr().out

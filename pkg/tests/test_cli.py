import json
import subprocess
import sys

import pytest

from conftest import CLUE_ROWS, FIRSTNAME_ROWS
from litcoref.cli import main

SYNTH_CONFIG = """# window-friendly toy corpus
n_docs = 2
tokens_per_doc = 700
n_entities = 3
pronoun_ratio = 0.6
gap_pronoun = 2
gap_common = 10
gap_proper = 15
embedding_dim = 12
seed = 5
"""


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    config = root / "synth.cfg"
    config.write_text(SYNTH_CONFIG)
    out_dir = root / "corpus"
    code = main(["synth", "--config", str(config), "--out-dir", str(out_dir),
                 "--manifest", str(root / "synth.manifest.json")])
    assert code == 0
    docs = sorted(out_dir.glob("*.json"))
    assert len(docs) == 2
    return root, docs


def run_cli(args):
    return main([str(a) for a in args])


class TestValidate:
    def test_valid_documents(self, workspace, capsys, tmp_path):
        root, docs = workspace
        code = run_cli(["validate", "--input", *docs,
                        "--manifest", tmp_path / "m.json"])
        assert code == 0
        out = capsys.readouterr().out
        assert out.count("OK") == 2

    def test_invalid_document_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({
            "doc_id": "bad",
            "tokens": [{"text": "a", "sentence": 0, "paragraph": 0}],
            "mentions": [{"start": 0, "end": 2, "category": "common",
                          "chain": "x"}],
        }))
        code = run_cli(["validate", "--input", bad,
                        "--manifest", tmp_path / "m.json"])
        assert code == 2
        assert "INVALID" in capsys.readouterr().err

    def test_unknown_flag_exits_1(self, capsys, tmp_path):
        assert run_cli(["validate", "--nope", tmp_path / "x"]) == 1

    def test_unknown_subcommand_exits_1(self, capsys):
        assert run_cli(["frobnicate"]) == 1

    def test_missing_file_exits_2(self, tmp_path, capsys):
        code = run_cli(["validate", "--input", tmp_path / "absent.json",
                        "--manifest", tmp_path / "m.json"])
        assert code == 2


class TestScore:
    def test_worked_fixture_values(self, tmp_path, capsys):
        gold = tmp_path / "gold.json"
        pred = tmp_path / "pred.json"
        gold.write_text(json.dumps(
            {"doc_id": "w", "chains": [[0, 1, 2], [3]], "strategy": "gold",
             "diagnostics": []}))
        pred.write_text(json.dumps(
            {"doc_id": "w", "chains": [[0, 1], [2, 3]], "strategy": "x",
             "diagnostics": []}))
        code = run_cli(["score", "--gold", gold, "--pred", pred,
                        "--manifest", tmp_path / "m.json"])
        assert code == 0
        out = capsys.readouterr().out
        assert "MUC P=0.50000 R=0.50000 F1=0.50000" in out
        assert "F1=0.70588" in out
        assert "F1=0.73333" in out
        assert "CoNLL F1=0.64641" in out


class TestResolveAndScore:
    def test_gold_mentions_oracle_roundtrip(self, workspace, tmp_path, capsys):
        root, docs = workspace
        chains_path = tmp_path / "chains.json"
        code = run_cli(["resolve", "--input", docs[0], "--gold-mentions",
                        "--oracle-pairs", "--strategy", "left_to_right",
                        "--out", chains_path,
                        "--manifest", tmp_path / "m1.json"])
        assert code == 0
        code = run_cli(["score", "--gold", docs[0], "--pred", chains_path,
                        "--manifest", tmp_path / "m2.json"])
        assert code == 0
        assert "CoNLL F1=1.00000" in capsys.readouterr().out

    def test_resolve_requires_mention_source(self, workspace, tmp_path):
        root, docs = workspace
        code = run_cli(["resolve", "--input", docs[0], "--oracle-pairs",
                        "--out", tmp_path / "c.json",
                        "--manifest", tmp_path / "m.json"])
        assert code == 1

    def test_resolve_requires_scorer(self, workspace, tmp_path):
        root, docs = workspace
        code = run_cli(["resolve", "--input", docs[0], "--gold-mentions",
                        "--out", tmp_path / "c.json",
                        "--manifest", tmp_path / "m.json"])
        assert code == 1

    def test_jobs_flag_reproduces_serial_output(self, workspace, tmp_path):
        root, docs = workspace
        serial_dir = tmp_path / "serial"
        parallel_dir = tmp_path / "parallel"
        for jobs, out_dir in (("1", serial_dir), ("2", parallel_dir)):
            code = run_cli(["resolve", "--input", *docs, "--gold-mentions",
                            "--oracle-pairs", "--strategy", "easy_first_global",
                            "--jobs", jobs, "--out", out_dir,
                            "--manifest", tmp_path / f"m{jobs}.json"])
            assert code == 0
        serial = sorted(p.name for p in serial_dir.glob("*.json"))
        assert serial == sorted(p.name for p in parallel_dir.glob("*.json"))
        for name in serial:
            assert (serial_dir / name).read_text() == \
                (parallel_dir / name).read_text()


class TestTrainingCommands:
    def test_train_detect_resolve_pipeline(self, workspace, tmp_path, capsys):
        root, docs = workspace
        model0 = tmp_path / "level0.prtm"
        code = run_cli(["train-detector", "--corpus", *docs, "--level", "0",
                        "--out", model0, "--epochs", "8", "--lr", "0.05",
                        "--dropout", "0.0", "--hidden", "8",
                        "--projection", "12", "--seed", "3",
                        "--train-log", tmp_path / "log.jsonl",
                        "--manifest", tmp_path / "m1.json"])
        assert code == 0
        assert model0.exists()
        assert (tmp_path / "log.jsonl").read_text().strip()

        detected = tmp_path / "detected.json"
        code = run_cli(["detect", "--input", docs[0], "--level0", model0,
                        "--level1", model0, "--out", detected, "--report",
                        "--manifest", tmp_path / "m2.json"])
        assert code == 0
        assert "F1=" in capsys.readouterr().out

        chains = tmp_path / "chains.json"
        code = run_cli(["resolve", "--input", docs[0],
                        "--mentions", detected, "--oracle-pairs",
                        "--strategy", "left_to_right", "--out", chains,
                        "--manifest", tmp_path / "m3.json"])
        assert code == 0

    def test_train_pairs_and_resolve(self, workspace, tmp_path, capsys):
        root, docs = workspace
        model = tmp_path / "pairs.prps"
        code = run_cli(["train-pairs", "--corpus", *docs, "--out", model,
                        "--epochs", "12", "--lr", "0.005", "--batch", "512",
                        "--hidden", "24", "--dropout", "0.0", "--seed", "2",
                        "--pronoun-window", "10", "--noun-window", "20",
                        "--embedding-dim", "12",
                        "--manifest", tmp_path / "m1.json"])
        assert code == 0
        chains = tmp_path / "chains.json"
        code = run_cli(["resolve", "--input", docs[0], "--gold-mentions",
                        "--pairs", model, "--strategy", "easy_first_global",
                        "--pronoun-window", "10", "--noun-window", "20",
                        "--out", chains, "--manifest", tmp_path / "m2.json"])
        assert code == 0
        code = run_cli(["score", "--gold", docs[0], "--pred", chains,
                        "--manifest", tmp_path / "m3.json"])
        assert code == 0
        out = capsys.readouterr().out
        conll = float(out.rsplit("F1=", 1)[1])
        assert conll >= 0.6


class TestReportingCommands:
    def test_stats_output(self, workspace, tmp_path, capsys):
        root, docs = workspace
        code = run_cli(["stats", "--corpus", *docs,
                        "--manifest", tmp_path / "m.json"])
        assert code == 0
        out = capsys.readouterr().out
        assert "mentions_per_doc\t" in out
        assert "singleton_ratio\t" in out

    def test_antecedent_dist_output(self, workspace, tmp_path, capsys):
        root, docs = workspace
        code = run_cli(["antecedent-dist", "--corpus", *docs,
                        "--manifest", tmp_path / "m.json"])
        assert code == 0
        out = capsys.readouterr().out
        assert out.startswith("category\tp50")
        assert "pronoun\t" in out

    def test_length_sweep_both_strategies(self, workspace, tmp_path, capsys):
        root, docs = workspace
        code = run_cli(["length-sweep", "--corpus", *docs,
                        "--lengths", "300", "--oracle-pairs",
                        "--strategy", "both",
                        "--ldjson", tmp_path / "sweep.ldjson",
                        "--series-dir", tmp_path / "series",
                        "--manifest", tmp_path / "m.json"])
        assert code == 0
        out = capsys.readouterr().out
        assert "left_to_right" in out and "easy_first_global" in out
        rows = [json.loads(line) for line in
                (tmp_path / "sweep.ldjson").read_text().splitlines()]
        assert {row["strategy"] for row in rows} == \
            {"left_to_right", "easy_first_global"}
        assert (tmp_path / "series" / "left_to_right.dat").exists()

    def test_gender_report(self, workspace, tmp_path, capsys):
        root, docs = workspace
        clues = tmp_path / "clues.tsv"
        clues.write_text(CLUE_ROWS)
        names = tmp_path / "firstnames.tsv"
        names.write_text(FIRSTNAME_ROWS)
        code = run_cli(["gender", "--corpus", *docs, "--clues", clues,
                        "--firstnames", names,
                        "--assignments", tmp_path / "assign.json",
                        "--manifest", tmp_path / "m.json"])
        assert code == 0
        out = capsys.readouterr().out
        assert out.startswith("stage\tclass")
        assert "rules+firstnames+coreference" in out
        assert json.loads((tmp_path / "assign.json").read_text())


class TestManifest:
    def test_manifest_contents(self, workspace, tmp_path):
        root, docs = workspace
        manifest = tmp_path / "m.json"
        run_cli(["stats", "--corpus", docs[0], "--seed", "7",
                 "--manifest", manifest])
        payload = json.loads(manifest.read_text())
        assert payload["command"] == "stats"
        assert payload["seed"] == 7
        assert payload["version"]
        assert any(digest.startswith("sha256:")
                   for digest in payload["inputs"].values())
        assert "duration_s" in payload

    def test_config_file_and_env(self, workspace, tmp_path, monkeypatch,
                                 capsys):
        root, docs = workspace
        config = tmp_path / "pipeline.cfg"
        config.write_text("noun_window = 17\npronoun_window = 4\nseed = 9\n")
        monkeypatch.setenv("LITCOREF_CONFIG", str(config))
        manifest = tmp_path / "m.json"
        code = run_cli(["resolve", "--input", docs[0], "--gold-mentions",
                        "--oracle-pairs", "--out", tmp_path / "c.json",
                        "--manifest", manifest])
        assert code == 0
        payload = json.loads(manifest.read_text())
        assert payload["config"]["noun_window"] == 17
        assert payload["config"]["pronoun_window"] == 4
        assert payload["seed"] == 9

    def test_byte_reproducible_resolution(self, workspace, tmp_path):
        root, docs = workspace
        outputs = []
        for tag in ("a", "b"):
            out = tmp_path / f"chains-{tag}.json"
            code = run_cli(["resolve", "--input", docs[0], "--gold-mentions",
                            "--oracle-pairs", "--seed", "5", "--out", out,
                            "--manifest", tmp_path / f"m-{tag}.json"])
            assert code == 0
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1]


class TestModuleEntryPoint:
    def test_python_dash_m_usage_error(self):
        result = subprocess.run(
            [sys.executable, "-m", "litcoref", "--definitely-not-a-flag"],
            capture_output=True, text=True)
        assert result.returncode == 1

    def test_python_dash_m_version(self):
        result = subprocess.run(
            [sys.executable, "-m", "litcoref", "--version"],
            capture_output=True, text=True)
        assert result.returncode == 0

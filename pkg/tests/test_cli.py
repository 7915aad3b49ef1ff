import json
import subprocess
import sys

import pytest

from inchify.cli import main

from conftest import DATA_DIR
from pairs import corpus_tsv


@pytest.fixture
def smi(tmp_path):
    def write(content: str):
        path = tmp_path / "in.smi"
        path.write_text(content, encoding="utf-8")
        return str(path)
    return write


def run(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestFeaturize:
    def test_benzene_six_tuples(self, smi, capsys):
        code, out, _ = run(["featurize", "--in", smi("c1ccccc1 benzene")],
                           capsys)
        assert code == 0
        record = json.loads(out)
        assert record["id"] == "benzene"
        assert len(record["atoms"]) == 6
        assert record["charge"] == 0

    def test_empty_input_exits_2(self, smi, capsys):
        code, _, _ = run(["featurize", "--in", smi("")], capsys)
        assert code == 2

    def test_bad_line_reported_with_number(self, smi, capsys):
        code, out, err = run(
            ["featurize", "--in", smi("CCO\nC(\n")], capsys)
        assert code == 0
        assert "line 2" in err
        assert len(out.strip().splitlines()) == 1

    def test_trace_flag(self, smi, capsys):
        code, out, _ = run(
            ["featurize", "--in", smi("[NH4+] ion"), "--trace"], capsys)
        assert code == 0
        record = json.loads(out)
        assert any(t["applications"] for t in record["trace"])

    def test_phantom_indices_reported(self, smi, capsys):
        code, out, _ = run(
            ["featurize", "--in", smi("[H+].[Cl-] salt")], capsys)
        assert code == 0
        record = json.loads(out)
        assert record["phantoms"] == [0] and record["ids"] == [1]

    def test_bad_flag_exits_64(self, smi, capsys):
        with pytest.raises(SystemExit) as err:
            main(["featurize", "--in", smi("C"), "--bogus"])
        assert err.value.code == 64

    def test_missing_subcommand_exits_64(self, capsys):
        with pytest.raises(SystemExit) as err:
            main([])
        assert err.value.code == 64


class TestFingerprint:
    def test_golden_file_byte_for_byte(self, tmp_path, capsys):
        out_path = tmp_path / "fps.txt"
        code = main(["fingerprint",
                     "--in", str(DATA_DIR / "golden_molecules.smi"),
                     "--radius", "2", "--mode", "inchified",
                     "--out", str(out_path)])
        assert code == 0
        assert out_path.read_bytes() == \
            (DATA_DIR / "golden_fps.txt").read_bytes()

    def test_negative_radius_usage_error(self, smi, capsys):
        code, _, _ = run(["fingerprint", "--in", smi("C"), "--radius", "-1",
                          "--mode", "daylight"], capsys)
        assert code == 64

    def test_reserved_key_for_charged_molecule(self, smi, capsys):
        code, out, _ = run(["fingerprint", "--in", smi("C[N+](C)(C)C"),
                            "--radius", "2", "--mode", "inchified"], capsys)
        assert code == 0
        assert "1:1" in out.split("\t")[1].split()

    def test_json_lines(self, smi, capsys):
        code, out, _ = run(["fingerprint", "--in", smi("C methane"),
                            "--radius", "0", "--mode", "daylight", "--json"],
                           capsys)
        assert code == 0
        record = json.loads(out)
        assert record["id"] == "methane" and record["fingerprint"]

    def test_output_independent_of_thread_count(self, smi, capsys):
        content = "CCO a\nc1ccccc1 b\nNC(C)=S c\nC( bad\n"
        argv = ["fingerprint", "--in", smi(content), "--radius", "2",
                "--mode", "inchified"]
        single = run(argv + ["--threads", "1"], capsys)
        pooled = run(argv + ["--threads", "2"], capsys)
        assert single == pooled


class TestValidate:
    def test_golden_corpus(self, tmp_path, capsys):
        path = tmp_path / "corpus.tsv"
        path.write_text(corpus_tsv(), encoding="utf-8")
        code, out, _ = run(["validate", "--in", str(path),
                            "--window", "100", "--radii", "2,4,6"], capsys)
        assert code == 0
        matrices = json.loads(
            [line for line in out.splitlines() if line.startswith("{")][0])
        assert matrices["inchified"]["samekey_difffp"] == 0
        assert matrices["inchified"]["diffkey_samefp"] == 0
        assert matrices["daylight"]["samekey_difffp"] > 0
        assert "mode\tradius\tquantile\tvalue" in out

    def test_unsorted_corpus_exits_1(self, tmp_path, capsys):
        path = tmp_path / "corpus.tsv"
        path.write_text("smiles\tidentityKey\nC\tK2\nCC\tK1\n",
                        encoding="utf-8")
        code, _, err = run(["validate", "--in", str(path)], capsys)
        assert code == 1
        assert "sorted" in err

    def test_window_one_two_records(self, tmp_path, capsys):
        path = tmp_path / "corpus.tsv"
        path.write_text("smiles\tidentityKey\nC\tK1\nCC\tK2\n",
                        encoding="utf-8")
        code, out, _ = run(["validate", "--in", str(path), "--window", "1",
                            "--radii", "2"], capsys)
        assert code == 0
        matrices = json.loads(
            [line for line in out.splitlines() if line.startswith("{")][0])
        total = sum(matrices["daylight"].values())
        assert total == 1

    def test_deterministic_reruns(self, tmp_path, capsys):
        path = tmp_path / "corpus.tsv"
        path.write_text(corpus_tsv(), encoding="utf-8")
        argv = ["validate", "--in", str(path), "--window", "10",
                "--radii", "2"]
        first = run(argv, capsys)
        second = run(argv, capsys)
        assert first == second


class TestBench:
    def test_row_labels(self, smi, capsys):
        code, out, _ = run(["bench", "--in", smi("CCO\nc1ccccc1\n"),
                            "--bins", "10"], capsys)
        assert code == 0
        rows = [line.split("\t")[0] for line in out.splitlines()[1:]]
        assert rows == ["parse", "daylight-fp", "inchified-fp",
                        "abs-overhead", "rel-overhead"]

    def test_single_molecule_one_bin(self, smi, capsys):
        code, out, _ = run(["bench", "--in", smi("CCO")], capsys)
        assert code == 0
        parse_row = out.splitlines()[1].split("\t")[1:]
        assert sum(1 for cell in parse_row if cell != "-") == 1


class TestRules:
    def test_rules_dump(self, capsys):
        code, out, _ = run(["rules"], capsys)
        assert code == 0
        assert len(json.loads(out)) == 11


def test_console_script_installed():
    result = subprocess.run([sys.executable, "-m", "inchify.cli", "rules"],
                            capture_output=True, text=True)
    assert result.returncode == 0 and result.stdout.startswith("[")

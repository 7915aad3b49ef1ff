import itertools

import pytest

from inchify import CorpusError, compare_pairs, load_corpus, tanimoto
from inchify.corpus import (CorpusRecord, equivalent_pairs, nearest_rank,
                            tanimoto_quantiles)
from inchify.corpus_worker import featurize_smiles


def write_corpus(tmp_path, rows, header="smiles\tidentityKey"):
    path = tmp_path / "corpus.tsv"
    path.write_text("\n".join([header] + rows) + "\n", encoding="utf-8")
    return path


class TestLoadCorpus:
    def test_three_valid_lines(self, tmp_path):
        path = write_corpus(tmp_path, ["C\tK1", "CC\tK2", "CCO\tK3"])
        records = list(load_corpus(path))
        assert len(records) == 3
        assert records[0] == CorpusRecord(smiles="C", identity_key="K1")

    def test_bad_smiles_skipped_and_counted(self, tmp_path):
        path = write_corpus(tmp_path, ["C\tK1", "C(\tK2", "CC\tK3"])
        reader = load_corpus(path)
        assert len(list(reader)) == 2
        assert len(reader.skipped) == 1
        assert reader.skipped[0][0] == 3

    def test_max_atoms_filter(self, tmp_path):
        path = write_corpus(tmp_path, ["C\tK1", "CCCCC\tK2"])
        reader = load_corpus(path, max_atoms=3)
        assert [r.smiles for r in reader] == ["C"]

    def test_labels_parsed(self, tmp_path):
        path = write_corpus(tmp_path, ["C\tK1\t1.5"],
                            header="smiles\tidentityKey\tlabel")
        assert list(load_corpus(path))[0].label == 1.5

    def test_missing_file(self, tmp_path):
        with pytest.raises(CorpusError):
            load_corpus(tmp_path / "nope.tsv")

    def test_malformed_header(self, tmp_path):
        path = write_corpus(tmp_path, ["C\tK1"], header="a\tb")
        with pytest.raises(CorpusError):
            list(load_corpus(path))

    def test_smi_format(self, tmp_path):
        path = tmp_path / "mols.smi"
        path.write_text("C K1\nCC K2\n", encoding="utf-8")
        assert len(list(load_corpus(path, fmt="smi"))) == 2


def toy_records():
    return [
        CorpusRecord("NC(C)=S", "KA"),
        CorpusRecord("N=C(C)S", "KA"),
        CorpusRecord("CCO", "KB"),
        CorpusRecord("c1ccccc1", "KC"),
    ]


class TestComparePairs:
    def test_same_structure_same_key(self):
        records = [CorpusRecord("CCO", "K1"), CorpusRecord("CCO", "K1")]
        matrices = compare_pairs(records, window=3)
        for mode in ("daylight", "inchified"):
            assert matrices[mode].samekey_samefp == 1
            assert matrices[mode].total == 1

    def test_toy_corpus_against_exhaustive_enumeration(self):
        records = toy_records()
        window = 3
        matrices = compare_pairs(records, window=window)
        fps = {r.smiles: featurize_smiles((r.smiles, 2)) for r in records}
        for mode in ("daylight", "inchified"):
            expected = {"ss": 0, "sd": 0, "ds": 0, "dd": 0}
            for i, j in itertools.combinations(range(len(records)), 2):
                if j - i > window:
                    continue
                same_key = records[i].identity_key == records[j].identity_key
                same_fp = fps[records[i].smiles][mode] == \
                    fps[records[j].smiles][mode]
                key = ("s" if same_key else "d") + ("s" if same_fp else "d")
                expected[key] += 1
            matrix = matrices[mode]
            assert (matrix.samekey_samefp, matrix.samekey_difffp,
                    matrix.diffkey_samefp, matrix.diffkey_difffp) == \
                (expected["ss"], expected["sd"], expected["ds"], expected["dd"])

    def test_window_totals(self):
        records = [CorpusRecord("C", f"K{i}") for i in range(6)]
        matrices = compare_pairs(records, window=2)
        expected = sum(min(2, 6 - 1 - i) for i in range(6))
        assert matrices["daylight"].total == expected

    def test_window_one_two_records(self):
        records = [CorpusRecord("C", "K1"), CorpusRecord("CC", "K2")]
        assert compare_pairs(records, window=1)["daylight"].total == 1

    def test_unsorted_detected(self):
        records = [CorpusRecord("C", "K2"), CorpusRecord("CC", "K1")]
        with pytest.raises(CorpusError):
            compare_pairs(records, window=5)

    def test_thread_count_does_not_change_result(self):
        records = toy_records()
        single = compare_pairs(records, window=3, threads=1)
        pooled = compare_pairs(records, window=3, threads=2)
        for mode in ("daylight", "inchified"):
            assert single[mode] == pooled[mode]


class TestQuantiles:
    def test_nearest_rank_oracle(self):
        values = [0.1, 0.9, 0.4, 0.5, 0.3]
        # nearest-rank by hand: sorted [0.1, 0.3, 0.4, 0.5, 0.9]
        assert nearest_rank(values, 0.10) == 0.1
        assert nearest_rank(values, 0.25) == 0.3
        assert nearest_rank(values, 0.50) == 0.4
        assert nearest_rank(values, 0.75) == 0.5
        assert nearest_rank(values, 0.90) == 0.9
        assert nearest_rank(values, 1.00) == 0.9

    def test_quantiles_monotone(self):
        pairs = equivalent_pairs(toy_records())
        rows = tanimoto_quantiles(pairs, [2], [0.1, 0.5, 0.9])
        by_mode = {}
        for mode, _, level, value in rows:
            by_mode.setdefault(mode, []).append(value)
        for series in by_mode.values():
            assert series == sorted(series)

    def test_identical_pairs_all_one(self):
        pairs = [("CCO", "CCO"), ("C", "C")]
        rows = tanimoto_quantiles(pairs, [2], [0.1, 0.5, 0.9])
        assert all(value == 1.0 for _, _, _, value in rows)

    def test_five_hand_built_pairs(self):
        pairs = [("NC(C)=S", "N=C(C)S"), ("CCO", "CCO"), ("C", "CC"),
                 ("c1ccccc1", "c1ccccc1"), ("CC(=O)O", "CC(=O)[O-].[Na+]")]
        values = []
        for a, b in pairs:
            fa = featurize_smiles((a, 2))["daylight"]
            fb = featurize_smiles((b, 2))["daylight"]
            values.append(tanimoto(fa, fb))
        rows = tanimoto_quantiles(pairs, [2], [0.5])
        daylight_median = next(v for m, _, _, v in rows if m == "daylight")
        assert daylight_median == nearest_rank(values, 0.5)

    def test_empty_pairs_rejected(self):
        with pytest.raises(CorpusError):
            tanimoto_quantiles([], [2], [0.5])

    def test_equivalent_pairs_grouping(self):
        pairs = equivalent_pairs(toy_records())
        assert pairs == [("NC(C)=S", "N=C(C)S")]


def test_golden_corpus_file_matches_registry():
    from conftest import DATA_DIR
    from pairs import corpus_tsv
    assert (DATA_DIR / "golden_corpus.tsv").read_text(
        encoding="utf-8") == corpus_tsv()


def test_golden_molecule_list_matches_registry():
    from conftest import DATA_DIR
    from pairs import corpus_groups
    lines = []
    for key, members in corpus_groups():
        for idx, smiles in enumerate(members):
            lines.append(f"{smiles} {key}-{idx}")
    assert (DATA_DIR / "golden_molecules.smi").read_text(
        encoding="utf-8") == "\n".join(lines) + "\n"

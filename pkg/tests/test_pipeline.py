import pytest

from inchify import MolGraph, kekulize, parse_smiles
from inchify import inchify as run_pipeline
from inchify.graph import Atom
from inchify.pipeline import (InvariantSet, compute_total_charge, deprotonate,
                              detect_movable_charges, detect_tautomers,
                              disconnect_metals, fold_hydrogens,
                              neutralize_fragments, normalize_charges,
                              reduce_valence, restore_mobile_isotopes)


def prepared(smiles: str) -> MolGraph:
    g = parse_smiles(smiles)
    compute_total_charge(g)
    kekulize(g)
    fold_hydrogens(g)
    return g


class TestTotalCharge:
    def test_neutral(self):
        assert compute_total_charge(parse_smiles("CCO")).total_charge == 0

    def test_negative(self):
        assert compute_total_charge(parse_smiles("CC([O-])=O")).total_charge == -1

    def test_positive(self):
        assert compute_total_charge(parse_smiles("C[NH3+]")).total_charge == 1

    def test_never_recomputed(self):
        g = parse_smiles("CC([O-])=O")
        g.total_charge = 5
        assert compute_total_charge(g).total_charge == 5


class TestFoldHydrogens:
    def test_isotopic_water(self):
        g = fold_hydrogens(parse_smiles("[2H]O[2H]"))
        oxygen = g.atoms[1]
        assert oxygen.num_hs == 2 and oxygen.set_hs == {0, 2}
        assert g.atoms[0].phantom and g.atoms[2].phantom
        assert g.initial_set_hs == {0, 2}

    def test_bare_proton(self):
        g = fold_hydrogens(parse_smiles("[H+]"))
        assert g.atoms[0].phantom

    def test_isotopic_cation_not_folded(self):
        g = fold_hydrogens(parse_smiles("[2H+]"))
        assert not g.atoms[0].phantom

    def test_plain_molecule_unchanged(self):
        g = fold_hydrogens(parse_smiles("C"))
        assert not g.atoms[0].phantom and g.atoms[0].num_hs == 4

    def test_h2_folds_lower_into_higher(self):
        g = fold_hydrogens(parse_smiles("[H][H]"))
        assert g.atoms[0].phantom and not g.atoms[1].phantom
        assert g.atoms[1].num_hs == 1

    def test_deuterium_keeps_its_proton(self):
        g = fold_hydrogens(parse_smiles("[2H][H]"))
        assert not g.atoms[0].phantom and g.atoms[0].num_hs == 1
        assert g.atoms[1].phantom


class TestDisconnectMetals:
    def test_nacl(self):
        g = disconnect_metals(prepared("[Na]Cl"))
        assert g.atoms[0].q == 1 and g.atoms[1].q == -1
        assert not g.has_bond(0, 1)

    def test_radical_neighbor(self):
        g = prepared("[CH2][Mg]C")
        assert g.atoms[0].num_rs == 1
        disconnect_metals(g)
        assert g.atoms[1].q == 3
        assert g.atoms[0].q == -2 and g.atoms[0].num_rs == 0
        assert g.atoms[2].q == -1

    def test_metal_free_unchanged(self):
        g = prepared("CCO")
        before = g.dump()
        assert disconnect_metals(g).dump() == before

    def test_neighbor_bond_stereo_dropped(self):
        g = prepared("[Na]/N=C/C")
        disconnect_metals(g)
        assert g.bond(1, 2).stereo == 0


class TestNormalizeRows:
    def test_row1_adjacent_pair(self):
        g = prepared("[NH-][NH3+]")
        normalize_charges(g)
        assert g.atoms[0].q == 0 and g.atoms[1].q == 0
        assert g.bond(0, 1).order == 2.0

    def test_row3_iminium(self):
        g = prepared("C[CH+]NC")
        normalize_charges(g)
        assert g.atoms[1].q == 0 and g.atoms[2].q == 1
        assert g.bond(1, 2).order == 2.0

    def test_no_charged_pairs_unchanged(self):
        g = prepared("CCO")
        before = g.dump()
        assert normalize_charges(g).dump() == before


class TestDeprotonate:
    def test_ammonium(self):
        g = deprotonate(prepared("[NH4+]"))
        assert g.atoms[0].q == 0 and g.atoms[0].num_hs == 3

    def test_chain_rewrite(self):
        g = deprotonate(prepared("OC=[N+](C)C"))
        assert g.atoms[0].num_hs == 0
        assert g.bond(0, 1).order == 2.0 and g.bond(1, 2).order == 1.0
        assert g.atoms[2].q == 0

    def test_neutral_amine_unchanged(self):
        g = prepared("CCN")
        before = g.dump()
        assert deprotonate(g).dump() == before


class TestNeutralizeFragments:
    def test_acetate_to_acid(self):
        g = neutralize_fragments(prepared("CC([O-])=O"))
        oxygen = g.atoms[2]
        assert oxygen.q == 0 and oxygen.num_hs == 1

    def test_protonated_ether(self):
        g = neutralize_fragments(prepared("[OH+](C)C"))
        assert g.atoms[0].q == 0 and g.atoms[0].num_hs == 0

    def test_neutral_fragment_unaltered(self):
        g = prepared("CCO")
        before = g.dump()
        assert neutralize_fragments(g).dump() == before

    def test_quaternary_ammonium_stays_charged(self):
        g = neutralize_fragments(prepared("C[N+](C)(C)C"))
        assert g.atoms[1].q == 1


class TestReduceValence:
    def test_sulfur(self):
        g = reduce_valence(prepared("[SH4]"))
        assert g.atoms[0].num_hs == 2

    def test_phosphorus(self):
        g = reduce_valence(prepared("[PH5]"))
        assert g.atoms[0].num_hs == 3

    def test_methane_unchanged(self):
        g = reduce_valence(prepared("C"))
        assert g.atoms[0].num_hs == 4

    def test_repeated_reduction(self):
        g = reduce_valence(prepared("[SH6]"))
        assert g.atoms[0].num_hs == 2


class TestMovableCharges:
    def test_amidinium_tagged(self):
        g = detect_movable_charges(prepared("C[N+](C)=CN(C)C"))
        assert g.bond(1, 3).order == 1.5 and g.bond(3, 4).order == 1.5
        assert g.atoms[1].q == 1

    def test_nh_blocks_match(self):
        g = prepared("C[N+](C)=CNC")
        before = [b.order for b in g.bonds()]
        detect_movable_charges(g)
        assert [b.order for b in g.bonds()] == before

    def test_no_charged_nitrogen_unchanged(self):
        g = prepared("CN=CC")
        before = g.dump()
        assert detect_movable_charges(g).dump() == before


class TestTautomers:
    def test_thioamide(self):
        g = detect_tautomers(prepared("NC(C)=S"))
        nitrogen, sulfur = g.atoms[0], g.atoms[3]
        assert nitrogen.q == -1 and nitrogen.num_hs == 0
        assert sulfur.q == -1 and sulfur.num_hs == 0
        assert g.bond(0, 1).order == 1.5 and g.bond(1, 3).order == 1.5

    def test_chained_discovery_through_tags(self):
        g = prepared("CCN(C)C(=[N+](C)C)N")
        detect_movable_charges(g)
        detect_tautomers(g)
        amine = g.atoms[8]
        assert amine.q == -1 and amine.num_hs == 0

    def test_saturated_alcohol_unchanged(self):
        g = prepared("CCO")
        before = g.dump()
        assert detect_tautomers(g).dump() == before


class TestMobileIsotopes:
    def test_two_isotopes_fold_into_nh(self):
        g = prepared("[2H]N[3H]")
        nitrogen = g.atoms[1]
        assert nitrogen.num_hs == 3 and nitrogen.set_hs == {0, 2}
        restore_mobile_isotopes(g)
        assert (nitrogen.num_2h, nitrogen.num_3h) == (1, 1)

    def test_mobile_deuterium_restored(self):
        g = prepared("O=CN([2H])[2H]")
        detect_tautomers(g)
        restore_mobile_isotopes(g)
        deuteriums = [a for a in g.atoms if a.isotope == 2]
        assert all(not a.phantom for a in deuteriums)
        assert g.atoms[2].num_2h == 0

    def test_anchored_deuterium_stays_folded(self):
        g = prepared("[2H]OCC")
        restore_mobile_isotopes(g)
        assert g.atoms[0].phantom
        assert g.atoms[1].num_2h == 1

    def test_no_isotopes_no_change(self):
        g = prepared("CCO")
        before = g.dump()
        assert restore_mobile_isotopes(g).dump() == before


class TestInchify:
    def test_benzene_tuples(self):
        _, invariants, _ = run_pipeline(parse_smiles("c1ccccc1"))
        assert invariants.atoms == ((6, 0, 2, 1, 1, 0, 0, 0, 0),) * 6
        assert invariants.graph_charge == 0

    def test_salt_forms_equal(self):
        _, a, _ = run_pipeline(parse_smiles("[Na]Cl"))
        _, b, _ = run_pipeline(parse_smiles("[Na+].[Cl-]"))
        assert a == b

    def test_thioamide_tautomers_equal(self):
        _, a, _ = run_pipeline(parse_smiles("NC(C)=S"))
        _, b, _ = run_pipeline(parse_smiles("N=C(C)S"))
        assert a == b

    def test_longer_chains_n1(self):
        for a, b in (("OC=CC=[N+](C)C", "O=CC=C[NH+](C)C"),
                     ("C[N+](C)=CC=CN(C)C", "CN(C)C=CC=[N+](C)C"),
                     ("NC=CC=O", "N=CC=CO")):
            _, fa, _ = run_pipeline(parse_smiles(a))
            _, fb, _ = run_pipeline(parse_smiles(b))
            assert sorted(fa.atoms) == sorted(fb.atoms), (a, b)
            assert fa.graph_charge == fb.graph_charge

    def test_idempotent_at_invariant_level(self):
        for smiles in ("NC(C)=S", "C(C(=O)[O-])[NH3+]", "[Na]Cl",
                       "O=CN([2H])[2H]", "c1ccc2ccccc2c1"):
            g, first, _ = run_pipeline(parse_smiles(smiles))
            _, second, _ = run_pipeline(g.copy())
            assert first == second, smiles

    def test_charge_recorded_before_rewrites(self):
        g, invariants, _ = run_pipeline(parse_smiles("C(C(=O)[O-])[NH3+]"))
        assert invariants.graph_charge == 0
        _, protonated, _ = run_pipeline(parse_smiles("OC=[N+](C)C"))
        assert protonated.graph_charge == 1

    def test_invariant_json_shape(self):
        _, invariants, _ = run_pipeline(parse_smiles("[Na]Cl"))
        data = invariants.as_dict()
        assert list(data) == ["charge", "ids", "atoms", "bonds"]
        assert len(data["atoms"]) == len(data["ids"])

    def test_step_traces_report_applications(self):
        _, _, traces = run_pipeline(parse_smiles("C(C(=O)[O-])[NH3+]"))
        by_step = {t.step: t.applications for t in traces}
        assert by_step[4] >= 1 and by_step[5] >= 1

    def test_anomaly_audit_flag(self):
        # row 4 leaves a sub-valent carbon; applied literally but audited
        g = parse_smiles("C[C+]=CN(C)C")
        _, _, traces = run_pipeline(g)
        assert any("valence" in note for note in traces[2].anomalies)

    def test_atom_ids_stable(self):
        g = parse_smiles("CC(=O)O[Na]")
        count = len(g.atoms)
        run_pipeline(g)
        assert len(g.atoms) == count

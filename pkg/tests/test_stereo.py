import itertools
import math
import random

import pytest

from inchify import parse_smiles
from inchify import inchify as run_pipeline
from inchify.graph import Atom, MolGraph
from inchify.stereo import assign_cip, filter_stereo


def labels(smiles: str):
    _, invariants, _ = run_pipeline(parse_smiles(smiles))
    return [t[8] for t in invariants.atoms], [b[2] for b in invariants.bonds]


class TestBondLabels:
    def test_trans_is_e(self):
        _, bonds = labels("F/C=C/F")
        assert bonds == [0, 1, 0]

    def test_cis_is_z(self):
        _, bonds = labels("F/C=C\\F")
        assert bonds == [0, -1, 0]

    def test_priority_not_reference_side(self):
        # Reference neighbors are Cl and F; priorities follow Cl > F on
        # the left and F > H on the right.
        _, bonds = labels("Cl/C(C)=C/F")
        assert bonds.count(1) == 1

    def test_identical_substituents_no_label(self):
        _, bonds = labels("C/C(C)=C/F")
        assert all(code == 0 for code in bonds)


def oracle_rs(priority_by_position: list[int], tag: int) -> int:
    """Independent R/S decision from explicit 3D coordinates.

    Positions hold the canonical-order neighbors; ``priority_by_position``
    gives each one's CIP rank (0 = highest).  Tag semantics: looking from
    the first canonical neighbor toward the center, the remaining three
    run counterclockwise for tag 1, clockwise for tag 2.
    """
    first = (0.0, 0.0, 1.0)
    rest = []
    for k in range(3):
        angle = 2 * math.pi * k / 3 * (1 if tag == 1 else -1)
        rest.append((math.cos(angle), math.sin(angle), -0.5))
    coords = [first] + rest
    ranked = sorted(range(4), key=priority_by_position.__getitem__)
    p1, p2, p3, p4 = (coords[i] for i in ranked)
    u = tuple(a - b for a, b in zip(p2, p1))
    v = tuple(a - b for a, b in zip(p3, p1))
    normal = (u[1] * v[2] - u[2] * v[1],
              u[2] * v[0] - u[0] * v[2],
              u[0] * v[1] - u[1] * v[0])
    # The viewer stands opposite p4 and looks along +p4.  The triangle
    # normal (right-hand rule) faces the side from which p1->p2->p3 looks
    # counterclockwise, so clockwise-from-viewer (R) means the normal
    # points with +p4.
    sense = sum(n * w for n, w in zip(normal, p4))
    return 1 if sense > 0 else -1


def tetrahedral_graph(z_by_position: list[int], tag: int) -> MolGraph:
    g = MolGraph()
    g.add_atom(Atom(z=6, chiral_tag=tag))
    for z in z_by_position:
        neighbor = g.add_atom(Atom(z=z))
        g.add_bond(0, neighbor)
    return g


class TestAtomLabelOracle:
    def test_all_24_orderings_both_tags(self):
        halogens = [9, 17, 35, 53]  # F < Cl < Br < I by priority
        for ordering in itertools.permutations(halogens):
            priorities = [sorted(halogens, reverse=True).index(z)
                          for z in ordering]
            for tag in (1, 2):
                g = tetrahedral_graph(list(ordering), tag)
                assign_cip(g)
                assert g.atoms[0].cip_code == oracle_rs(priorities, tag), \
                    (ordering, tag)

    def test_spec_example_is_r(self):
        atoms, _ = labels("[C@@H](N)(O)C")
        assert atoms[0] == 1

    def test_l_alanine_is_s(self):
        atoms, _ = labels("N[C@@H](C)C(=O)O")
        assert atoms[1] == -1

    def test_duplicate_substituents_unlabeled(self):
        atoms, _ = labels("C[C@H](C)O")
        assert all(code == 0 for code in atoms)

    def test_isotope_only_difference_rule2(self):
        atoms, _ = labels("[2H][C@H](F)Cl")
        assert atoms.count(1) + atoms.count(-1) == 1


class TestFilters:
    def test_bond_to_sulfur_dropped(self):
        _, bonds = labels("C/S=C/C")
        assert all(code == 0 for code in bonds)

    def test_trivalent_acyclic_nitrogen_dropped(self):
        atoms, _ = labels("CC[N@](C)CCO")
        assert all(code == 0 for code in atoms)

    def test_aziridine_nitrogen_retained(self):
        atoms, _ = labels("C[N@]1CC1C")
        assert atoms[1] != 0

    def test_nh_condition_dropped(self):
        atoms, _ = labels("C[P@H](=O)C")
        assert all(code == 0 for code in atoms)

    def test_two_terminal_neighbors_dropped(self):
        atoms, _ = labels("C[P@](=O)(O)C")
        assert all(code == 0 for code in atoms)

    def test_sulfoxide_retained(self):
        atoms, _ = labels("C[S@](=O)CC")
        assert atoms.count(0) == len(atoms) - 1

    def test_filter_only_zeroes(self):
        g = parse_smiles("N[C@@H](C)C(=O)O")
        run = assign_cip(g)
        before = [a.cip_code for a in run.atoms]
        filter_stereo(run)
        after = [a.cip_code for a in run.atoms]
        for x, y in zip(before, after):
            assert y == x or y == 0


class TestParityProperties:
    @pytest.mark.parametrize("a,b", [
        ("N[C@H](C)C(=O)O", "N[C@@H](C)C(=O)O"),
        ("C[S@](=O)CC", "C[S@@](=O)CC"),
        ("[2H][C@H](F)Cl", "[2H][C@@H](F)Cl"),
    ])
    def test_swapping_tag_flips_sign(self, a, b):
        la, _ = labels(a)
        lb, _ = labels(b)
        assert sum(la) == -sum(lb) and sum(la) != 0

    def test_labels_stable_under_relabeling(self):
        rng = random.Random(11)
        for smiles in ("N[C@@H](C)C(=O)O", "F/C=C/F", "C[N@]1CC1C",
                       "C[S@](=O)CC"):
            g = parse_smiles(smiles)
            _, reference, _ = run_pipeline(g.copy())
            for _ in range(10):
                perm = list(range(len(g.atoms)))
                rng.shuffle(perm)
                _, shuffled, _ = run_pipeline(g.relabel(perm))
                assert sorted(t[8] for t in shuffled.atoms) == \
                    sorted(t[8] for t in reference.atoms)
                assert sorted(b[2] for b in shuffled.bonds) == \
                    sorted(b[2] for b in reference.bonds)

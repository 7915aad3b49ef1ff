"""CIP stereo labels (R/S, E/Z) and the stereogenicity filters.

Priorities come from a hierarchical digraph comparison implementing Rule
1a (atomic number), duplicate atoms for multiple bonds, and Rule 2 (mass
number), breadth-first with depth bounded by the atom count.  Rules 3-5
are not implemented: molecules whose priorities tie under Rules 1a/2 get
label 0 and a diagnostic.

Ring closures insert duplicate leaves when a branch walks back onto its
own path, the standard hierarchical-digraph construction.  Folded
hydrogens appear as leaf children carrying their isotope mass; internal
order-1.5 tags contribute no duplicate atoms.
"""

from __future__ import annotations

from functools import cmp_to_key

from .graph import MolGraph, in_three_ring, parity_of_sort

_ATOM = "atom"
_DUP = "dup"
_H = "h"
_LONE = "lp"

_BOND_CIP_ELEMENTS = frozenset({6, 7, 14, 32})            # C N Si Ge
_ATOM_CIP_ELEMENTS = frozenset({5, 6, 7, 14, 15, 16, 32, 33, 34, 50})
_CONDITION_III_ELEMENTS = frozenset({7, 15, 33, 16, 34})  # N P As S Se
_TERMINAL_X = frozenset({8, 16, 34, 52, 7})               # O S Se Te N

_COMPARE_BUDGET = 200_000


class _Exhausted(Exception):
    pass


class _Comparer:
    """Pairwise branch comparison over the hierarchical digraph."""

    def __init__(self, g: MolGraph, use_mass: bool):
        self.g = g
        self.use_mass = use_mass
        self.budget = _COMPARE_BUDGET

    def key(self, node) -> tuple[int, int]:
        kind = node[0]
        if kind == _ATOM:
            atom = self.g.atoms[node[1]]
            return (atom.z, atom.isotope if self.use_mass else 0)
        if kind == _DUP:
            return (node[1], 0)
        if kind == _H:
            return (1, node[1] if self.use_mass else 0)
        return (0, 0)  # lone pair

    def children(self, node) -> list:
        if node[0] != _ATOM:
            return []
        _, i, parent, path = node
        out = []
        atom = self.g.atoms[i]
        for j in self.g.neighbors(i):
            order = self.g.bond(i, j).order
            dups = 1 if order == 2.0 else 2 if order == 3.0 else 0
            z_j = self.g.atoms[j].z
            if j == parent:
                out.extend([(_DUP, z_j)] * dups)
            elif j in path:
                out.extend([(_DUP, z_j)] * (1 + dups))
            else:
                out.append((_ATOM, j, i, path | {i}))
                out.extend([(_DUP, z_j)] * dups)
        n_iso = atom.num_1h + atom.num_2h + atom.num_3h
        out.extend([(_H, 0)] * (atom.num_hs - n_iso))
        out.extend([(_H, 1)] * atom.num_1h)
        out.extend([(_H, 2)] * atom.num_2h)
        out.extend([(_H, 3)] * atom.num_3h)
        return out

    def compare(self, a, b, depth: int) -> int:
        self.budget -= 1
        if self.budget <= 0:
            raise _Exhausted
        ka, kb = self.key(a), self.key(b)
        if ka != kb:
            return 1 if ka > kb else -1
        if depth <= 0:
            return 0
        ca = self.children(a)
        cb = self.children(b)
        if not ca and not cb:
            return 0
        comparator = cmp_to_key(lambda x, y: self.compare(x, y, depth - 1))
        ca.sort(key=comparator, reverse=True)
        cb.sort(key=comparator, reverse=True)
        for x, y in zip(ca, cb):
            r = self.compare(x, y, depth - 1)
            if r:
                return r
        if len(ca) != len(cb):
            return 1 if len(ca) > len(cb) else -1
        return 0


def _compare_branches(g: MolGraph, a, b) -> int | None:
    """Two-phase CIP comparison; None when the budget runs out."""
    depth = max(2, len(g.atoms))
    try:
        r = _Comparer(g, use_mass=False).compare(a, b, depth)
        if r:
            return r
        return _Comparer(g, use_mass=True).compare(a, b, depth)
    except _Exhausted:
        return None


def _atom_branch(center: int, j: int) -> tuple:
    return (_ATOM, j, center, frozenset((center,)))


def assign_cip(g: MolGraph, diagnostics: list[str] | None = None) -> MolGraph:
    """Assign R/S to chiral-tagged atoms and E/Z to stereo double bonds."""
    if diagnostics is None:
        diagnostics = []
    for i, atom in enumerate(g.atoms):
        atom.cip_code = 0
        if atom.phantom or atom.chiral_tag == 0:
            continue
        atom.cip_code = _atom_label(g, i, diagnostics)
    for bond in g.bonds():
        bond.cip_code = 0
        if bond.order == 2.0 and bond.stereo and bond.stereo_refs:
            bond.cip_code = _bond_label(g, bond, diagnostics)
    return g


def _atom_label(g: MolGraph, i: int, diagnostics: list[str]) -> int:
    atom = g.atoms[i]
    if atom.num_hs != len(atom.stereo_h_slots):
        diagnostics.append(f"atom {i}: hydrogen count changed under chiral tag")
        return 0
    branches = [_atom_branch(i, j) for j in g.neighbors(i)]
    branches += [(_H, iso) for iso in atom.stereo_h_slots]
    if len(branches) == 3:
        branches.append((_LONE,))
    if len(branches) != 4:
        return 0
    order = _rank(g, branches)
    if order is None:
        diagnostics.append(f"atom {i}: undecidable priorities under Rules 1a/2")
        return 0
    tag = atom.chiral_tag
    if parity_of_sort(order):
        tag = 3 - tag
    return 1 if tag == 2 else -1


def _rank(g: MolGraph, branches: list) -> list[int] | None:
    """Positions of branches sorted by descending priority; None on ties."""
    results: dict[tuple[int, int], int] = {}
    for x in range(len(branches)):
        for y in range(x + 1, len(branches)):
            r = _compare_branches(g, branches[x], branches[y])
            if r is None or r == 0:
                return None
            results[(x, y)] = r

    def cmp(x: int, y: int) -> int:
        if x == y:
            return 0
        return -results[(x, y)] if x < y else results[(y, x)]

    return sorted(range(len(branches)), key=cmp_to_key(cmp))


def _bond_label(g: MolGraph, bond, diagnostics: list[str]) -> int:
    flip = 0
    for end, other, ref in ((bond.a, bond.b, bond.stereo_refs[0]),
                            (bond.b, bond.a, bond.stereo_refs[1])):
        top = _top_substituent(g, end, other, diagnostics)
        if top is None:
            return 0
        ref_branch = _ref_branch(g, end, ref)
        if ref_branch is None:
            return 0
        if top != ref_branch:
            flip ^= 1
    same_side = (bond.stereo == 1) ^ bool(flip)
    return -1 if same_side else 1


def _top_substituent(g: MolGraph, end: int, other: int, diagnostics):
    atom = g.atoms[end]
    branches = [_atom_branch(end, j) for j in g.neighbors(end) if j != other]
    n_iso = atom.num_1h + atom.num_2h + atom.num_3h
    hs = [(_H, 0)] * (atom.num_hs - n_iso) + [(_H, 1)] * atom.num_1h + \
        [(_H, 2)] * atom.num_2h + [(_H, 3)] * atom.num_3h
    branches += hs
    if not branches or len(branches) > 2:
        return None
    if len(branches) == 1:
        return branches[0]
    r = _compare_branches(g, branches[0], branches[1])
    if r is None or r == 0:
        if r is None:
            diagnostics.append(f"bond end {end}: priority comparison exhausted")
        return None
    return branches[0] if r > 0 else branches[1]


def _ref_branch(g: MolGraph, end: int, ref: int):
    if g.has_bond(end, ref):
        return _atom_branch(end, ref)
    ref_atom = g.atoms[ref]
    if ref_atom.phantom and ref_atom.z == 1:
        return (_H, ref_atom.isotope)
    return None


def filter_stereo(g: MolGraph) -> MolGraph:
    """Zero the labels InChI does not treat as possibly stereogenic."""
    for bond in g.bonds():
        if bond.cip_code == 0:
            continue
        if (g.atoms[bond.a].z not in _BOND_CIP_ELEMENTS
                or g.atoms[bond.b].z not in _BOND_CIP_ELEMENTS):
            bond.cip_code = 0
    for i, atom in enumerate(g.atoms):
        if atom.cip_code == 0 or atom.phantom:
            continue
        if atom.z not in _ATOM_CIP_ELEMENTS:
            atom.cip_code = 0
            continue
        neighbor_count = g.degree(i) + atom.num_hs
        if atom.z == 7 and neighbor_count != 4 and not in_three_ring(g, i):
            atom.cip_code = 0
            continue
        if atom.z in _CONDITION_III_ELEMENTS:
            if atom.num_hs >= 1:
                atom.cip_code = 0
                continue
            terminal = [j for j in g.neighbors(i)
                        if g.degree(j) == 1 and g.atoms[j].z in _TERMINAL_X]
            if len(terminal) >= 2 and sum(g.atoms[j].num_hs for j in terminal) > 0:
                atom.cip_code = 0
    return g

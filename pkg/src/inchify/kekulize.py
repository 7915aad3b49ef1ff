"""Kekulization: replace declared-aromatic bonds by single/double bonds.

Aromaticity is taken as declared by the input (lowercase atoms, ``:``
bonds); there is no independent aromaticity perception.  Every aromatic
atom must need exactly zero or one double bond given its element, charge
and hydrogen count; a backtracking perfect matching over the "needy"
atoms then assigns the double bonds.

Branching follows refined invariant ranks (Morgan-style partition
refinement) with the atom id as the final tiebreak.  Rank-first ordering
keeps the chosen kekulé form stable under atom relabeling, which plain
lowest-id-first branching does not guarantee for fused ring systems;
repeated runs on equal inputs still produce identical bond orders.
"""

from __future__ import annotations

from .elements import Z_TO_SYMBOL, charge_adjusted_valences
from .errors import KekulizationError
from .graph import MolGraph


def kekulize(g: MolGraph) -> MolGraph:
    """Resolve all declared-aromatic bonds of ``g`` in place."""
    aromatic_bonds = [b for b in g.bonds() if b.aromatic_input]
    aromatic_atoms = sorted({i for i, a in enumerate(g.atoms) if a.aromatic})
    if not aromatic_bonds and not aromatic_atoms:
        return g

    needs: dict[int, bool] = {}
    for i in aromatic_atoms:
        needs[i] = _needs_double_bond(g, i)

    needy = [i for i in aromatic_atoms if needs[i]]
    matching = _perfect_matching(g, needy)
    if matching is None:
        raise KekulizationError(
            f"no alternating bond assignment for aromatic system "
            f"{{{', '.join(map(str, needy))}}}", atoms=needy)

    for bond in aromatic_bonds:
        pair = frozenset((bond.a, bond.b))
        bond.order = 2.0 if pair in matching else 1.0
        bond.aromatic_input = False
    for i in aromatic_atoms:
        atom = g.atoms[i]
        atom.aromatic = False
        total = int(sum(b.order for b in g.incident_bonds(i))) \
            + atom.num_hs + atom.num_rs
        if total not in charge_adjusted_valences(atom.z, atom.q):
            raise KekulizationError(
                f"atom {i} ({Z_TO_SYMBOL[atom.z]}) has non-standard valence "
                f"{total} after kekulization", atoms=[i])
    return g


def _needs_double_bond(g: MolGraph, i: int) -> bool:
    atom = g.atoms[i]
    candidates = charge_adjusted_valences(atom.z, atom.q)
    if not candidates:
        raise KekulizationError(
            f"aromatic atom {i} ({Z_TO_SYMBOL[atom.z]}) has no valence table",
            atoms=[i])
    sigma = sum(1 if b.order == 1.5 else int(b.order)
                for b in g.incident_bonds(i))
    total = sigma + atom.num_hs + atom.num_rs
    for v in candidates:
        if v - total in (0, 1):
            return v - total == 1
    raise KekulizationError(
        f"aromatic atom {i} ({Z_TO_SYMBOL[atom.z]}) cannot carry a valid "
        f"kekulé valence (sigma valence {total})", atoms=[i])


def _invariant_ranks(g: MolGraph) -> list[int]:
    """Relabeling-invariant atom ranks by iterative partition refinement."""
    n = len(g.atoms)
    base = []
    pairs: list[list[tuple[int, int]]] = []
    for i, atom in enumerate(g.atoms):
        incident = [(int(2 * bond.order), j) for j, bond in g._adj[i].items()]
        pairs.append(incident)
        orders = tuple(sorted(order for order, _ in incident))
        base.append((atom.z, atom.q, atom.num_hs, atom.num_rs, atom.isotope,
                     int(atom.aromatic), orders))
    ranks = _dense_ranks(base)
    distinct = len(set(ranks))
    for _ in range(n):
        refined = [
            (ranks[i], tuple(sorted((order, ranks[j]) for order, j in pairs[i])))
            for i in range(n)]
        ranks = _dense_ranks(refined)
        now_distinct = len(set(ranks))
        if now_distinct == distinct:
            break
        distinct = now_distinct
    return ranks


def _dense_ranks(keys: list) -> list[int]:
    order = {key: rank for rank, key in enumerate(sorted(set(keys)))}
    return [order[key] for key in keys]


def _perfect_matching(g: MolGraph, needy: list[int]):
    """Pair every needy atom with a needy neighbor along aromatic bonds.

    Returns a set of frozenset pairs, or None when impossible.
    """
    ranks = _invariant_ranks(g)
    needy_set = set(needy)
    adjacency = {
        i: sorted((j for j in g.neighbors(i)
                   if g.bond(i, j).aromatic_input and j in needy_set),
                  key=lambda j: (ranks[j], j))
        for i in needy
    }
    matching: set[frozenset] = set()
    free = set(needy)

    def backtrack() -> bool:
        if not free:
            return True
        a = min(free, key=lambda i: (ranks[i], i))
        free.discard(a)
        for b in adjacency[a]:
            if b in free:
                free.discard(b)
                matching.add(frozenset((a, b)))
                if backtrack():
                    return True
                matching.discard(frozenset((a, b)))
                free.add(b)
        free.add(a)
        return False

    return matching if backtrack() else None

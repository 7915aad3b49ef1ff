"""Core molecular-graph data model.

Atoms are stored in a dense list and keep their indices for the whole life
of the graph: pipeline steps never delete an atom, they mark it phantom.
Bonds live in per-atom adjacency maps; both endpoints share one Bond object.

Debug serialization (:meth:`MolGraph.dump`) is line oriented, one record per
line, fields space separated:

    ATOM id Z Q numRs numHs num1H num2H num3H isotope degree ring phantom chiral cip
    BOND i j order stereo cip

Atoms come first in id order, then bonds sorted by (i, j) with i < j.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import GraphError


@dataclass
class Atom:
    """Per-atom attribute record, mutated in place by pipeline steps."""

    z: int
    q: int = 0
    num_rs: int = 0
    num_hs: int = 0
    num_1h: int = 0
    num_2h: int = 0
    num_3h: int = 0
    set_hs: set[int] = field(default_factory=set)
    isotope: int = 0
    in_ring: bool = False
    phantom: bool = False
    chiral_tag: int = 0
    cip_code: int = 0
    aromatic: bool = False
    # Isotope numbers of the hydrogen block in the chiral neighbor ordering
    # (0 = natural); only meaningful while chiral_tag != 0.
    stereo_h_slots: tuple[int, ...] = ()


@dataclass
class Bond:
    """Bond record shared by both adjacency entries.

    ``order`` is 1.0, 1.5, 2.0 or 3.0; 1.5 marks declared-aromatic input
    bonds before kekulization and internally tagged bonds afterwards.
    ``stereo`` is 0 (none), 1 (reference neighbors on the same side) or
    2 (opposite sides); ``stereo_refs`` holds the reference neighbor of
    ``a`` and of ``b`` while ``stereo`` is nonzero.
    """

    a: int
    b: int
    order: float = 1.0
    stereo: int = 0
    stereo_refs: tuple[int, int] | None = None
    cip_code: int = 0
    aromatic_input: bool = False

    def other(self, i: int) -> int:
        return self.b if i == self.a else self.a

    def drop_stereo(self) -> None:
        self.stereo = 0
        self.stereo_refs = None


class MolGraph:
    """Atoms plus adjacency, total charge and mobile-isotope bookkeeping."""

    def __init__(self):
        self.atoms: list[Atom] = []
        self._adj: list[dict[int, Bond]] = []
        self._nbrs: list[list[int] | None] = []
        self.total_charge: int | None = None
        self.initial_set_hs: set[int] = set()

    # -- construction -------------------------------------------------

    def add_atom(self, atom: Atom) -> int:
        self.atoms.append(atom)
        self._adj.append({})
        self._nbrs.append(None)
        return len(self.atoms) - 1

    def add_bond(self, i: int, j: int, order: float = 1.0, **kw) -> Bond:
        self._check_atom(i)
        self._check_atom(j)
        if i == j:
            raise GraphError(f"self bond on atom {i}")
        if j in self._adj[i]:
            raise GraphError(f"duplicate bond ({i}, {j})")
        bond = Bond(a=i, b=j, order=order, **kw)
        self._adj[i][j] = bond
        self._adj[j][i] = bond
        self._nbrs[i] = self._nbrs[j] = None
        return bond

    # -- queries ------------------------------------------------------

    def __len__(self) -> int:
        return len(self.atoms)

    def _check_atom(self, i: int) -> None:
        if not 0 <= i < len(self.atoms):
            raise GraphError(f"unknown atom id {i}")

    def neighbors(self, i: int) -> list[int]:
        """Ids bonded to ``i``, ascending for determinism."""
        self._check_atom(i)
        cached = self._nbrs[i]
        if cached is None:
            cached = self._nbrs[i] = sorted(self._adj[i])
        return cached

    def degree(self, i: int) -> int:
        self._check_atom(i)
        return len(self._adj[i])

    def bond(self, i: int, j: int) -> Bond:
        self._check_atom(i)
        self._check_atom(j)
        try:
            return self._adj[i][j]
        except KeyError:
            raise GraphError(f"no bond ({i}, {j})") from None

    def has_bond(self, i: int, j: int) -> bool:
        return 0 <= i < len(self.atoms) and j in self._adj[i]

    def bonds(self) -> list[Bond]:
        """All bonds, sorted by (min endpoint, max endpoint)."""
        out = []
        for i, adj in enumerate(self._adj):
            if len(adj) > 1:
                for j in sorted(adj):
                    if i < j:
                        out.append(adj[j])
            else:
                for j, bond in adj.items():
                    if i < j:
                        out.append(bond)
        return out

    def incident_bonds(self, i: int) -> list[Bond]:
        self._check_atom(i)
        return [self._adj[i][j] for j in sorted(self._adj[i])]

    # -- mutation -----------------------------------------------------

    def remove_bond(self, i: int, j: int) -> None:
        self.bond(i, j)  # raises if missing
        del self._adj[i][j]
        del self._adj[j][i]
        self._nbrs[i] = self._nbrs[j] = None

    # -- structure ----------------------------------------------------

    def fragments(self) -> list[set[int]]:
        """Connected components over non-phantom atoms.

        Deterministic: components ordered by their smallest member id.
        """
        seen: set[int] = set()
        out: list[set[int]] = []
        for start in range(len(self.atoms)):
            if start in seen or self.atoms[start].phantom:
                continue
            comp = {start}
            stack = [start]
            seen.add(start)
            while stack:
                v = stack.pop()
                for u in self._adj[v]:
                    if u not in seen:
                        seen.add(u)
                        comp.add(u)
                        stack.append(u)
            out.append(comp)
        return out

    def copy(self) -> "MolGraph":
        g = MolGraph()
        for atom in self.atoms:
            g.add_atom(Atom(
                z=atom.z, q=atom.q, num_rs=atom.num_rs, num_hs=atom.num_hs,
                num_1h=atom.num_1h, num_2h=atom.num_2h, num_3h=atom.num_3h,
                set_hs=set(atom.set_hs), isotope=atom.isotope,
                in_ring=atom.in_ring, phantom=atom.phantom,
                chiral_tag=atom.chiral_tag, cip_code=atom.cip_code,
                aromatic=atom.aromatic, stereo_h_slots=atom.stereo_h_slots,
            ))
        for bond in self.bonds():
            g.add_bond(bond.a, bond.b, order=bond.order, stereo=bond.stereo,
                       stereo_refs=bond.stereo_refs, cip_code=bond.cip_code,
                       aromatic_input=bond.aromatic_input)
        g.total_charge = self.total_charge
        g.initial_set_hs = set(self.initial_set_hs)
        return g

    def dump(self) -> str:
        """Line-oriented text dump used by golden tests (format above)."""
        lines = []
        for i, a in enumerate(self.atoms):
            lines.append(
                f"ATOM {i} {a.z} {a.q} {a.num_rs} {a.num_hs} {a.num_1h} "
                f"{a.num_2h} {a.num_3h} {a.isotope} {self.degree(i)} "
                f"{int(a.in_ring)} {int(a.phantom)} {a.chiral_tag} {a.cip_code}"
            )
        for b in self.bonds():
            i, j = min(b.a, b.b), max(b.a, b.b)
            lines.append(f"BOND {i} {j} {b.order:g} {b.stereo} {b.cip_code}")
        return "\n".join(lines) + "\n"

    # -- relabeling ---------------------------------------------------

    def relabel(self, perm: list[int]) -> "MolGraph":
        """New graph with atom ``i`` renamed to ``perm[i]``.

        Chiral tags are re-expressed relative to the new ascending-id
        neighbor convention, so stereo semantics are preserved.
        """
        n = len(self.atoms)
        if sorted(perm) != list(range(n)):
            raise GraphError("perm is not a permutation of atom ids")
        g = MolGraph()
        g.atoms = [None] * n  # type: ignore[list-item]
        g._adj = [{} for _ in range(n)]
        g._nbrs = [None] * n
        for i, atom in enumerate(self.atoms):
            new = Atom(
                z=atom.z, q=atom.q, num_rs=atom.num_rs, num_hs=atom.num_hs,
                num_1h=atom.num_1h, num_2h=atom.num_2h, num_3h=atom.num_3h,
                set_hs={perm[h] for h in atom.set_hs}, isotope=atom.isotope,
                in_ring=atom.in_ring, phantom=atom.phantom,
                chiral_tag=atom.chiral_tag, cip_code=atom.cip_code,
                aromatic=atom.aromatic, stereo_h_slots=atom.stereo_h_slots,
            )
            if atom.chiral_tag:
                old_order = self.neighbors(i)
                mapped = [perm[x] for x in old_order]
                if parity_of_sort(mapped):
                    new.chiral_tag = 3 - atom.chiral_tag
            g.atoms[perm[i]] = new
        for bond in self.bonds():
            refs = bond.stereo_refs
            g.add_bond(perm[bond.a], perm[bond.b], order=bond.order,
                       stereo=bond.stereo,
                       stereo_refs=(perm[refs[0]], perm[refs[1]]) if refs else None,
                       cip_code=bond.cip_code,
                       aromatic_input=bond.aromatic_input)
        g.total_charge = self.total_charge
        g.initial_set_hs = {perm[h] for h in self.initial_set_hs}
        return g


def parity_of_sort(values: list) -> bool:
    """True when sorting ``values`` is an odd permutation (entries unique)."""
    order = sorted(range(len(values)), key=values.__getitem__)
    seen = [False] * len(order)
    odd = False
    for start in range(len(order)):
        if seen[start]:
            continue
        length = 0
        v = start
        while not seen[v]:
            seen[v] = True
            v = order[v]
            length += 1
        if length % 2 == 0:
            odd = not odd
    return odd


def perceive_rings(g: MolGraph) -> MolGraph:
    """Set ``in_ring`` for every atom on some cycle.

    An atom is in a ring iff it is incident to a non-bridge edge; bridges
    are found with one iterative DFS over the whole graph.
    """
    n = len(g.atoms)
    disc = [-1] * n
    low = [0] * n
    tree_parent = [-1] * n
    timer = 0
    for root in range(n):
        if disc[root] != -1:
            continue
        stack: list[tuple[int, int]] = [(root, 0)]
        disc[root] = low[root] = timer
        timer += 1
        tree_edges: list[tuple[int, int]] = []
        while stack:
            v, idx = stack.pop()
            nbrs = g.neighbors(v)
            if idx < len(nbrs):
                stack.append((v, idx + 1))
                u = nbrs[idx]
                if u == tree_parent[v]:
                    continue
                if disc[u] == -1:
                    tree_parent[u] = v
                    disc[u] = low[u] = timer
                    timer += 1
                    tree_edges.append((v, u))
                    stack.append((u, 0))
                else:
                    low[v] = min(low[v], disc[u])
        for v, u in reversed(tree_edges):
            low[v] = min(low[v], low[u])
    on_cycle = [False] * n
    for bond in g.bonds():
        a, b = bond.a, bond.b
        if tree_parent[b] == a:
            parent, child = a, b
        elif tree_parent[a] == b:
            parent, child = b, a
        else:
            # back edge: always on a cycle
            on_cycle[a] = on_cycle[b] = True
            continue
        if low[child] <= disc[parent]:  # not a bridge
            on_cycle[a] = on_cycle[b] = True
    for i, atom in enumerate(g.atoms):
        atom.in_ring = on_cycle[i]
    return g


def smallest_ring_size(g: MolGraph, i: int) -> int:
    """Size of the smallest cycle through atom ``i``, or 0 if acyclic.

    BFS from each neighbor back to ``i`` with the direct edge removed.
    """
    best = 0
    for first in g.neighbors(i):
        dist = {first: 1}
        queue = [first]
        found = 0
        while queue and not found:
            nxt = []
            for v in queue:
                for u in g.neighbors(v):
                    if v == first and u == i:
                        continue
                    if u == i:
                        found = dist[v] + 1
                    elif u not in dist:
                        dist[u] = dist[v] + 1
                        nxt.append(u)
            queue = nxt
        if found and (best == 0 or found < best):
            best = found
    return best


def in_three_ring(g: MolGraph, i: int) -> bool:
    """True when two neighbors of ``i`` are bonded to each other."""
    nbrs = g.neighbors(i)
    for x in range(len(nbrs)):
        for y in range(x + 1, len(nbrs)):
            if g.has_bond(nbrs[x], nbrs[y]):
                return True
    return False

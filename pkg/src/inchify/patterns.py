"""Declarative matcher for linear chain patterns over molecular graphs.

This deliberately implements only the constrained fragment of SMARTS the
normalization rules need: a chain of atom constraints (element set,
charge test, hydrogen-count test, optional charge-or-hydrogen
disjunction) joined by bond-kind constraints, with an optional repeating
unit that stretches the chain as a function of a non-negative ``n``.

Matches are simple paths (no repeated atoms).  Phantom atoms never
match.  Results are sorted lexicographically by atom-id tuple, and for
palindromic patterns each path is reported in one direction only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

from .errors import FixpointError
from .graph import MolGraph

SINGLE = "single"
DOUBLE = "double"
SINGLE_OR_DOUBLE = "single-or-double"
SINGLE_OR_TAGGED = "single-or-tagged"
DOUBLE_OR_TAGGED = "double-or-tagged"

_BOND_TESTS = {
    SINGLE: lambda o: o == 1.0,
    DOUBLE: lambda o: o == 2.0,
    SINGLE_OR_DOUBLE: lambda o: o in (1.0, 2.0),
    SINGLE_OR_TAGGED: lambda o: o in (1.0, 1.5),
    DOUBLE_OR_TAGGED: lambda o: o in (2.0, 1.5),
}

_CHARGE_TESTS = {
    "any": lambda q: True,
    "pos": lambda q: q >= 1,
    "neg": lambda q: q <= -1,
    "+1": lambda q: q == 1,
}

_H_TESTS = {
    "any": lambda h: True,
    "h0": lambda h: h == 0,
    "!h0": lambda h: h >= 1,
    "h1": lambda h: h == 1,
    "h>=2": lambda h: h >= 2,
}


@dataclass(frozen=True)
class AtomConstraint:
    """Predicate over one atom: element set plus charge/hydrogen tests.

    ``allowed_z`` of None is the wildcard.  When ``charge_or_h`` is set,
    the atom must additionally satisfy at least one of the two named
    tests (a disjunction such as "has a hydrogen or is negative").
    """

    allowed_z: frozenset[int] | None = None
    charge: str = "any"
    h: str = "any"
    charge_or_h: tuple[str, str] | None = None

    def matches(self, atom) -> bool:
        if atom.phantom:
            return False
        if self.allowed_z is not None and atom.z not in self.allowed_z:
            return False
        if not _CHARGE_TESTS[self.charge](atom.q):
            return False
        if not _H_TESTS[self.h](atom.num_hs):
            return False
        if self.charge_or_h is not None:
            q_test, h_test = self.charge_or_h
            if not (_CHARGE_TESTS[q_test](atom.q)
                    or _H_TESTS[h_test](atom.num_hs)):
                return False
        return True

    def describe(self) -> dict:
        out: dict = {"z": sorted(self.allowed_z) if self.allowed_z else "any"}
        if self.charge != "any":
            out["charge"] = self.charge
        if self.h != "any":
            out["h"] = self.h
        if self.charge_or_h:
            out["charge_or_h"] = list(self.charge_or_h)
        return out


@dataclass(frozen=True)
class ChainPattern:
    """Linear pattern; ``repeat`` inserts extra (atom, bond) units n times.

    ``atoms``/``bonds`` describe the chain at n = 0.  ``repeat``, when
    present, is (atom insert position, atom units, bond insert position,
    bond units); expansion at n splices each unit list in n times.
    """

    atoms: tuple[AtomConstraint, ...]
    bonds: tuple[str, ...]
    repeat: tuple[int, tuple[AtomConstraint, ...], int, tuple[str, ...]] | None = None
    n_range: tuple[int, ...] = (0,)

    def __post_init__(self):
        if len(self.bonds) != len(self.atoms) - 1:
            raise ValueError("need exactly one bond constraint between atoms")

    def expand(self, n: int) -> tuple[tuple[AtomConstraint, ...], tuple[str, ...]]:
        if n not in self.n_range:
            raise ValueError(f"n={n} outside pattern range {self.n_range}")
        if self.repeat is None or n == 0:
            return self.atoms, self.bonds
        apos, aunits, bpos, bunits = self.repeat
        atoms = self.atoms[:apos] + aunits * n + self.atoms[apos:]
        bonds = self.bonds[:bpos] + bunits * n + self.bonds[bpos:]
        return atoms, bonds

    def describe(self) -> dict:
        out = {
            "atoms": [a.describe() for a in self.atoms],
            "bonds": list(self.bonds),
            "n_range": list(self.n_range),
        }
        if self.repeat:
            apos, aunits, bpos, bunits = self.repeat
            out["repeat"] = {
                "atom_position": apos,
                "atom_units": [a.describe() for a in aunits],
                "bond_position": bpos,
                "bond_units": list(bunits),
            }
        return out


def match_chain(g: MolGraph, pattern: ChainPattern, n: int) -> list[tuple[int, ...]]:
    """All simple paths of ``g`` satisfying ``pattern`` expanded at ``n``."""
    acons, bkinds = pattern.expand(n)
    btests = [_BOND_TESTS[k] for k in bkinds]
    length = len(acons)
    atoms = g.atoms
    adjacency: list[list[tuple[int, float]]] | None = None
    out: list[tuple[int, ...]] = []
    path: list[int] = []

    def extend(depth: int):
        if depth == length:
            out.append(tuple(path))
            return
        test = btests[depth - 1]
        con = acons[depth]
        for nxt, order in adjacency[path[-1]]:
            if nxt in path or not test(order) or not con.matches(atoms[nxt]):
                continue
            path.append(nxt)
            extend(depth + 1)
            path.pop()

    first = acons[0]
    for start in range(len(atoms)):
        if first.matches(atoms[start]):
            if length == 1:
                out.append((start,))
                continue
            if adjacency is None:
                # built lazily: most scans reject every start atom
                adjacency = [sorted((j, bond.order) for j, bond in cell.items())
                             for cell in g._adj]
            path.append(start)
            extend(1)
            path.pop()

    if length > 1 and (acons, bkinds) == (acons[::-1], bkinds[::-1]):
        out = [t for t in out if t <= t[::-1]]
    out.sort()
    return out


@dataclass
class RewriteRule:
    """A chain pattern plus the graph action applied to each match.

    ``measure`` documents the quantity each application strictly
    decreases (the termination argument for fixpoint iteration).
    """

    name: str
    pattern: ChainPattern
    action: Callable[[MolGraph, tuple[int, ...]], None]
    measure: str = ""
    touched: set[int] = field(default_factory=set)

    def describe(self) -> dict:
        return {"name": self.name, "measure": self.measure,
                "pattern": self.pattern.describe()}


def apply_until_fixpoint(g: MolGraph, rule: RewriteRule) -> int:
    """Apply ``rule`` to its first match, rescan, repeat until no match.

    Scans smallest n first, lexicographically-first tuple within an n.
    Returns the number of applications; raises FixpointError past the
    10·|atoms| cap, which signals a non-terminating rule.
    """
    cap = 10 * max(1, len(g.atoms))
    applications = 0
    while True:
        match = None
        for n in rule.pattern.n_range:
            found = match_chain(g, rule.pattern, n)
            if found:
                match = found[0]
                break
        if match is None:
            return applications
        rule.action(g, match)
        rule.touched.update(match)
        applications += 1
        if applications > cap:
            raise FixpointError(
                f"rule {rule.name!r} exceeded {cap} applications")


def rules_to_json(rules: list[RewriteRule]) -> str:
    """JSON dump of a rule table, for inspection alongside the code."""
    return json.dumps([r.describe() for r in rules], indent=2)

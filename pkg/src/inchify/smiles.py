"""SMILES parsing and a diagnostic SMILES writer.

Supported subset: the organic subset B C N O P S F Cl Br I (lowercase
b c n o p s for aromatic atoms), bracket atoms with isotope, charge,
H-count and @/@@ chirality, bond symbols ``- = # : / \\``, ring closures
1-99 (``%nn``), branches and dot-separated components.  No wildcards, no
reaction SMILES.

Tetrahedral chirality is normalized at parse time to a fixed convention:
``chiral_tag`` 1 means that, looking from the first neighbor in canonical
order (ascending surviving atom ids, folded hydrogens last), the remaining
neighbors run counterclockwise; 2 means clockwise.  Directional bonds are
resolved immediately into per-double-bond ``stereo``/``stereo_refs`` facts.

The writer is for diagnostics only: output re-parses to an isomorphic
graph (same atom invariant tuples and bond orders) but is not canonical.
Order-1.5 bonds between non-aromatic atoms are emitted with a ``:`` marker
and such strings are excluded from the round-trip contract.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .elements import (AROMATIC_BRACKET, AROMATIC_ORGANIC, DEFAULT_VALENCES,
                       ORGANIC_SUBSET, SYMBOL_TO_Z, Z_TO_SYMBOL,
                       charge_adjusted_valences)
from .errors import ParseError
from .graph import Atom, MolGraph, parity_of_sort

_BOND_ORDERS = {"-": 1.0, "=": 2.0, "#": 3.0, ":": 1.5}
_TWO_CHAR_ORGANIC = ("Cl", "Br")
_TWO_CHAR_AROMATIC = ("se", "as")


@dataclass
class _AtomInfo:
    """Parse-time bookkeeping for one atom."""

    idx: int
    bracket: bool
    aromatic: bool
    explicit_hs: int = 0       # bracket H count
    chiral: int = 0            # 0 none, 1 @, 2 @@
    pos: int = 0
    written_order: list = field(default_factory=list)  # atom ids and "H"


def parse_smiles(text: str, valence_slack: int = 0) -> MolGraph:
    """Parse SMILES ``text`` into a :class:`MolGraph`.

    ``valence_slack`` extra valence units are tolerated above the standard
    maximum before an over-valence parse error is raised.
    """
    if not text:
        raise ParseError("empty SMILES", 0)
    p = _Parser(text, valence_slack)
    return p.parse()


class _Parser:
    def __init__(self, text: str, valence_slack: int):
        self.text = text
        self.slack = valence_slack
        self.g = MolGraph()
        self.infos: list[_AtomInfo] = []
        self.pos = 0
        self.prev: int | None = None
        self.stack: list[int | None] = []
        self.pending: str | None = None
        self.pending_pos = 0
        # ring-closure number -> (atom id, bond symbol or None, offset)
        self.open_rings: dict[int, tuple[int, str | None, int]] = {}
        # directional facts: (begin atom, end atom, "/" or "\\")
        self.directions: list[tuple[int, int, str]] = []

    def fail(self, message: str, offset: int | None = None):
        raise ParseError(message, self.pos if offset is None else offset)

    # -- main loop ------------------------------------------------------

    def parse(self) -> MolGraph:
        text = self.text
        n = len(text)
        while self.pos < n:
            c = text[self.pos]
            if c == "(":
                if self.pending is not None:
                    self.fail("bond symbol before '('")
                if self.prev is None:
                    self.fail("branch with no preceding atom")
                self.stack.append(self.prev)
                self.pos += 1
            elif c == ")":
                if self.pending is not None:
                    self.fail("dangling bond symbol before ')'")
                if not self.stack:
                    self.fail("unmatched ')'")
                self.prev = self.stack.pop()
                self.pos += 1
            elif c == ".":
                if self.pending is not None:
                    self.fail("bond symbol before '.'")
                self.prev = None
                self.pos += 1
            elif c in "-=#:/\\":
                if self.pending is not None:
                    self.fail("two bond symbols in a row")
                if self.prev is None:
                    self.fail("bond symbol with no preceding atom")
                self.pending = c
                self.pending_pos = self.pos
                self.pos += 1
            elif c.isdigit() or c == "%":
                self.ring_closure()
            elif c == "[":
                self.bracket_atom()
            else:
                self.organic_atom()
        if self.stack:
            self.fail("unclosed '('")
        if self.open_rings:
            num, (_, _, where) = sorted(self.open_rings.items())[0]
            raise ParseError(f"unmatched ring closure {num}", where)
        if self.pending is not None:
            raise ParseError("dangling bond symbol", self.pending_pos)
        self.finish_hydrogens()
        self.finish_chirality()
        self.resolve_directions()
        return self.g

    # -- atoms ------------------------------------------------------------

    def organic_atom(self):
        text = self.text
        sym = text[self.pos:self.pos + 2]
        if sym in _TWO_CHAR_ORGANIC:
            self.new_atom(sym, aromatic=False, bracket=False, width=2)
            return
        c = text[self.pos]
        if c in ORGANIC_SUBSET:
            self.new_atom(c, aromatic=False, bracket=False, width=1)
        elif c in AROMATIC_ORGANIC:
            self.new_atom(c.upper(), aromatic=True, bracket=False, width=1)
        else:
            self.fail(f"unexpected character {c!r}")

    def bracket_atom(self):
        text = self.text
        start = self.pos
        self.pos += 1
        isotope = 0
        while self.pos < len(text) and text[self.pos].isdigit():
            isotope = isotope * 10 + int(text[self.pos])
            self.pos += 1
        aromatic = False
        two = text[self.pos:self.pos + 2]
        if two in _TWO_CHAR_AROMATIC:
            symbol, aromatic = two.capitalize(), True
            self.pos += 2
        elif two in SYMBOL_TO_Z and len(two) == 2 and two[1].islower():
            symbol = two
            self.pos += 2
        elif self.pos < len(text) and text[self.pos] in AROMATIC_BRACKET:
            symbol, aromatic = text[self.pos].upper(), True
            self.pos += 1
        elif self.pos < len(text) and text[self.pos].isupper():
            symbol = text[self.pos]
            self.pos += 1
            if symbol not in SYMBOL_TO_Z:
                raise ParseError(f"unknown element {symbol!r}", start + 1)
        else:
            self.fail("expected element symbol in brackets")
        chiral = 0
        if text[self.pos:self.pos + 2] == "@@":
            chiral = 2
            self.pos += 2
        elif text[self.pos:self.pos + 1] == "@":
            chiral = 1
            self.pos += 1
        hcount = 0
        if text[self.pos:self.pos + 1] == "H":
            self.pos += 1
            hcount = 1
            digits = ""
            while self.pos < len(text) and text[self.pos].isdigit():
                digits += text[self.pos]
                self.pos += 1
            if digits:
                hcount = int(digits)
        charge = 0
        if text[self.pos:self.pos + 1] in ("+", "-"):
            sign = 1 if text[self.pos] == "+" else -1
            mark = text[self.pos]
            self.pos += 1
            if text[self.pos:self.pos + 1].isdigit():
                mag = 0
                while self.pos < len(text) and text[self.pos].isdigit():
                    mag = mag * 10 + int(text[self.pos])
                    self.pos += 1
                charge = sign * mag
            else:
                charge = sign
                while text[self.pos:self.pos + 1] == mark:
                    charge += sign
                    self.pos += 1
        if text[self.pos:self.pos + 1] == ":":
            self.pos += 1
            if not text[self.pos:self.pos + 1].isdigit():
                self.fail("expected atom-class digits after ':'")
            while self.pos < len(text) and text[self.pos].isdigit():
                self.pos += 1
        if text[self.pos:self.pos + 1] != "]":
            self.fail("expected ']'")
        self.pos += 1
        self.new_atom(symbol, aromatic=aromatic, bracket=True, width=0,
                      isotope=isotope, charge=charge, hcount=hcount,
                      chiral=chiral, start=start)

    def new_atom(self, symbol: str, aromatic: bool, bracket: bool, width: int,
                 isotope: int = 0, charge: int = 0, hcount: int = 0,
                 chiral: int = 0, start: int | None = None):
        at_pos = self.pos if start is None else start
        z = SYMBOL_TO_Z.get(symbol)
        if z is None:
            raise ParseError(f"unknown element {symbol!r}", at_pos)
        atom = Atom(z=z, q=charge, isotope=isotope, aromatic=aromatic)
        if bracket:
            atom.num_hs = hcount
        idx = self.g.add_atom(atom)
        info = _AtomInfo(idx=idx, bracket=bracket, aromatic=aromatic,
                         explicit_hs=hcount if bracket else 0,
                         chiral=chiral, pos=at_pos)
        self.infos.append(info)
        if self.prev is not None:
            self.make_bond(self.prev, idx)
            info.written_order.append(self.prev)
            self.infos[self.prev].written_order.append(idx)
        if bracket and hcount:
            info.written_order.extend(["H"] * hcount)
        self.prev = idx
        self.pos += width

    # -- bonds ------------------------------------------------------------

    def bond_order(self, i: int, j: int, symbol: str | None):
        """(order, aromatic_input) for a bond from its symbol and endpoints."""
        arom_i = self.infos[i].aromatic
        arom_j = self.infos[j].aromatic
        if symbol is None:
            if arom_i and arom_j:
                return 1.5, True
            return 1.0, False
        if symbol in ("/", "\\"):
            return 1.0, False
        if symbol == ":":
            if not (arom_i and arom_j):
                self.fail("aromatic bond between non-aromatic atoms")
            return 1.5, True
        return _BOND_ORDERS[symbol], False

    def make_bond(self, i: int, j: int, symbol: str | None = "use-pending",
                  direction_from_i: bool = True):
        if symbol == "use-pending":
            symbol = self.pending
            self.pending = None
        order, aromatic_input = self.bond_order(i, j, symbol)
        if self.g.has_bond(i, j):
            self.fail(f"duplicate bond between atoms {i} and {j}")
        self.g.add_bond(i, j, order=order, aromatic_input=aromatic_input)
        if symbol in ("/", "\\"):
            if direction_from_i:
                self.directions.append((i, j, symbol))
            else:
                self.directions.append((j, i, symbol))

    def ring_closure(self):
        text = self.text
        if self.prev is None:
            self.fail("ring closure with no preceding atom")
        if text[self.pos] == "%":
            digits = text[self.pos + 1:self.pos + 3]
            if len(digits) < 2 or not digits.isdigit():
                self.fail("expected two digits after '%'")
            number = int(digits)
            self.pos += 3
        else:
            number = int(text[self.pos])
            self.pos += 1
        symbol = self.pending
        self.pending = None
        if number in self.open_rings:
            other, other_symbol, where = self.open_rings.pop(number)
            if other == self.prev:
                self.fail(f"ring closure {number} bonds atom to itself")
            eff, from_open = self.merge_ring_symbols(other_symbol, symbol, where)
            self.make_bond(other, self.prev, eff, direction_from_i=from_open)
            self.infos[other].written_order[
                self.infos[other].written_order.index(("rc", number))] = self.prev
            self.infos[self.prev].written_order.append(other)
        else:
            self.open_rings[number] = (self.prev, symbol, self.pos - 1)
            self.infos[self.prev].written_order.append(("rc", number))

    def merge_ring_symbols(self, s_open: str | None, s_close: str | None,
                           where: int):
        """Combine bond symbols from both ends of a ring closure.

        Returns (symbol, direction_from_open_atom).  A directional symbol
        on the closing end is expressed looking from the closing atom, so
        it is equivalent to the flipped symbol looking from the opener.
        """
        if s_open is None and s_close is None:
            return None, True
        if s_close is None:
            return s_open, True
        if s_open is None:
            return s_close, False
        if s_open in ("/", "\\") and s_close in ("/", "\\"):
            if s_open == s_close:
                raise ParseError("conflicting ring-closure bond directions",
                                 where)
            return s_open, True
        if s_open != s_close:
            raise ParseError("conflicting ring-closure bond orders", where)
        return s_open, True

    # -- post-processing ---------------------------------------------------

    def finish_hydrogens(self):
        for info in self.infos:
            atom = self.g.atoms[info.idx]
            orders = [b.order for b in self.g.incident_bonds(info.idx)]
            sigma = sum(1 if o == 1.5 else int(o) for o in orders)
            full = sum(o for o in orders)
            if not info.bracket:
                valences = DEFAULT_VALENCES[atom.z]
                if info.aromatic:
                    atom.num_hs = max(0, int(valences[0] - sigma - 1))
                else:
                    atom.num_hs = max(0, int(valences[0] - full))
                    if full + atom.num_hs > valences[-1] + self.slack:
                        raise ParseError(
                            f"valence {int(full)} exceeds maximum for "
                            f"{Z_TO_SYMBOL[atom.z]}", info.pos)
            else:
                if info.aromatic:
                    continue  # no radical assignment for aromatic atoms
                candidates = charge_adjusted_valences(atom.z, atom.q)
                if not candidates:
                    continue  # metals: no checking, no radicals
                explicit = int(full) + atom.num_hs
                fitting = [v for v in candidates if v >= explicit]
                if not fitting:
                    if explicit > candidates[-1] + self.slack:
                        raise ParseError(
                            f"valence {explicit} exceeds maximum for "
                            f"{Z_TO_SYMBOL[atom.z]}{atom.q:+d}"
                            if atom.q else
                            f"valence {explicit} exceeds maximum for "
                            f"{Z_TO_SYMBOL[atom.z]}", info.pos)
                    continue
                atom.num_rs = fitting[0] - explicit

    def finish_chirality(self):
        for info in self.infos:
            if not info.chiral:
                continue
            atom = self.g.atoms[info.idx]
            written = list(info.written_order)
            if len(written) not in (3, 4):
                continue  # not a tetrahedral arrangement; ignore the mark
            canonical = sorted(x for x in written if x != "H")
            canonical += ["H"] * written.count("H")
            odd = _mapping_parity(written, canonical)
            atom.chiral_tag = (3 - info.chiral) if odd else info.chiral
            atom.stereo_h_slots = (0,) * written.count("H")

    def resolve_directions(self):
        side: dict[tuple[int, int], str] = {}
        for begin, end, symbol in self.directions:
            # "/" rises from begin to end: begin sits below end.
            side[(end, begin)] = "down" if symbol == "/" else "up"
            side[(begin, end)] = "up" if symbol == "/" else "down"
        for bond in self.g.bonds():
            if bond.order != 2.0:
                continue
            claims_a = self.end_claims(bond.a, bond.b, side)
            claims_b = self.end_claims(bond.b, bond.a, side)
            if not claims_a or not claims_b:
                continue
            ref_a, side_a = claims_a[0]
            ref_b, side_b = claims_b[0]
            bond.stereo = 1 if side_a == side_b else 2
            bond.stereo_refs = (ref_a, ref_b)

    def end_claims(self, i: int, other: int, side):
        claims = []
        for x in self.g.neighbors(i):
            if x == other:
                continue
            s = side.get((i, x))
            if s is not None:
                claims.append((x, s))
        if len(claims) == 2 and claims[0][1] == claims[1][1]:
            raise ParseError(
                f"conflicting bond directions around atom {i}",
                self.infos[i].pos)
        return claims


def _mapping_parity(source: list, target: list) -> bool:
    """Parity of the permutation carrying ``source`` onto ``target``.

    Duplicate entries (hydrogen markers) are matched left to right.
    """
    remaining = list(range(len(target)))
    positions = []
    for item in source:
        for k in remaining:
            if target[k] == item:
                positions.append(k)
                remaining.remove(k)
                break
        else:
            raise ValueError("lists are not permutations of each other")
    return parity_of_sort(positions)


# ---------------------------------------------------------------------------
# Writer


def write_smiles(g: MolGraph) -> str:
    """Serialize ``g`` back to SMILES for diagnostics.

    Phantom atoms are skipped; disconnected components are dot separated.
    Not canonical.  Directional bond marks are not emitted; chirality is
    emitted only for atoms whose hydrogen block is at most one.
    """
    fragments = g.fragments()
    return ".".join(_write_fragment(g, frag) for frag in fragments)


def _write_fragment(g: MolGraph, members: set[int]) -> str:
    root = min(members)
    parent: dict[int, int | None] = {root: None}
    children: dict[int, list[int]] = {i: [] for i in members}
    order = [root]
    stack = [root]
    back_edges: list[tuple[int, int]] = []
    while stack:
        v = stack.pop()
        for u in g.neighbors(v):
            if u not in parent:
                parent[u] = v
                children[v].append(u)
                order.append(u)
                stack.append(u)
            elif parent.get(v) != u and (u, v) not in back_edges:
                back_edges.append((v, u))
    rings_at: dict[int, list[tuple[int, int]]] = {i: [] for i in members}
    for k, (v, u) in enumerate(sorted(back_edges), start=1):
        if k > 99:
            raise ValueError("more than 99 ring closures in one fragment")
        rings_at[v].append((k, u))
        rings_at[u].append((k, v))

    out: list[str] = []

    def emit(v: int):
        out.append(_atom_token(g, v, parent[v], rings_at[v], children[v]))
        for number, u in rings_at[v]:
            sym = _bond_symbol(g, g.bond(v, u))
            out.append(sym + (f"%{number}" if number > 9 else str(number)))
        kids = children[v]
        for idx, u in enumerate(kids):
            last = idx == len(kids) - 1
            if not last:
                out.append("(")
            out.append(_bond_symbol(g, g.bond(v, u)))
            emit(u)
            if not last:
                out.append(")")

    emit(root)
    return "".join(out)


def _bond_symbol(g: MolGraph, bond) -> str:
    if bond.order == 1.0:
        return ""
    if bond.order == 2.0:
        return "="
    if bond.order == 3.0:
        return "#"
    if g.atoms[bond.a].aromatic and g.atoms[bond.b].aromatic:
        return ""
    return ":"  # internal tag marker; not round-trippable


def _atom_token(g: MolGraph, i: int, par: int | None,
                rings: list[tuple[int, int]], kids: list[int]) -> str:
    atom = g.atoms[i]
    symbol = Z_TO_SYMBOL[atom.z]
    implicit = _implicit_count(g, i)
    plain = (symbol in ORGANIC_SUBSET and atom.q == 0 and atom.isotope == 0
             and atom.num_rs == 0 and atom.chiral_tag == 0
             and atom.num_hs == implicit)
    if atom.aromatic:
        symbol = symbol.lower()
    if plain:
        return symbol
    token = "["
    if atom.isotope:
        token += str(atom.isotope)
    token += symbol
    if atom.chiral_tag and len(atom.stereo_h_slots) <= 1 and atom.num_hs <= 1:
        written: list = ([par] if par is not None else [])
        written += ["H"] * atom.num_hs
        written += [u for _, u in rings] + kids
        canonical = sorted(x for x in written if x != "H") + \
            ["H"] * written.count("H")
        if len(written) in (3, 4):
            tag = atom.chiral_tag
            if _mapping_parity(canonical, written):
                tag = 3 - tag
            token += "@" if tag == 1 else "@@"
    if atom.num_hs == 1:
        token += "H"
    elif atom.num_hs > 1:
        token += f"H{atom.num_hs}"
    if atom.q:
        token += f"{atom.q:+d}" if abs(atom.q) > 1 else ("+" if atom.q > 0 else "-")
    return token + "]"


def _implicit_count(g: MolGraph, i: int) -> int:
    atom = g.atoms[i]
    valences = DEFAULT_VALENCES.get(atom.z)
    if valences is None:
        return -1
    orders = [b.order for b in g.incident_bonds(i)]
    if atom.aromatic:
        sigma = sum(1 if o == 1.5 else int(o) for o in orders)
        return max(0, int(valences[0] - sigma - 1))
    return max(0, int(valences[0] - sum(orders)))

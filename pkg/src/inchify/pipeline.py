"""The normalization workflow: ten ordered graph rewrites plus extraction.

Step order: preparation (total charge, kekulization, hydrogen folding),
metal disconnection, charge normalization, deprotonation, fragment
neutralization, valence reduction, movable-charge detection, tautomerism
detection, hydrogen-isotope restoration, stereochemistry.  The driver
:func:`inchify` runs all ten and extracts the invariant tuples.

Total charge is computed once, before any rewrite, and never recomputed:
re-running the pipeline on an already-processed graph keeps the stored
value, which makes the workflow idempotent at the invariant level.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .elements import (NONMETALS, STANDARD_VALENCES,
                       VALENCE_REDUCTION_ELEMENTS, charge_adjusted_valences)
from .errors import ChemError, FixpointError, PipelineError
from .graph import MolGraph, perceive_rings
from .kekulize import kekulize
from .patterns import (DOUBLE, DOUBLE_OR_TAGGED, SINGLE, SINGLE_OR_DOUBLE,
                       SINGLE_OR_TAGGED, AtomConstraint, ChainPattern,
                       RewriteRule, apply_until_fixpoint, match_chain,
                       rules_to_json)
from .stereo import assign_cip, filter_stereo

N_RANGE_DEFAULT = (0, 1, 2, 3, 4)

# Element sets used by the rewrite rules (atomic numbers).
ZN = frozenset({7})                                       # N
ZC_TABLE = frozenset({6, 8, 15, 16})                      # C O P S
ZX_TABLE = frozenset({6, 7, 8, 15, 16, 33, 34, 51, 52, 53})
ZZ_DEPROTONATE = frozenset({7, 8, 9, 15, 16, 17, 34, 35, 52, 53})
ZX_CHAIN = frozenset({7, 8, 16, 34, 52})                  # N O S Se Te
ZX_NEUTRALIZE = frozenset({8, 9, 15, 16, 17, 35, 53})     # O F P S Cl Br I
ZM_TAUTOMER = frozenset({7, 8, 16, 34, 52})               # N O S Se Te
ZQ_TAUTOMER = frozenset({6, 7, 16, 15, 51, 33, 34, 52, 35, 17, 53})

_ANY = AtomConstraint()


@dataclass
class StepTrace:
    """Audit record for one pipeline step."""

    step: int
    applications: int = 0
    touched_atoms: set[int] = field(default_factory=set)
    anomalies: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class InvariantSet:
    """Node, edge and graph invariants extracted after the final step.

    Atom tuples are (Z, Isotope, Degree, InRing, NumHs, Num1H, Num2H,
    Num3H, CIPCode) for non-phantom atoms, original ids alongside; bond
    triples are (i, j, BondCIPCode) for the surviving bonds.
    """

    graph_charge: int
    ids: tuple[int, ...]
    atoms: tuple[tuple[int, int, int, int, int, int, int, int, int], ...]
    bonds: tuple[tuple[int, int, int], ...]

    def as_dict(self) -> dict:
        return {
            "charge": self.graph_charge,
            "ids": list(self.ids),
            "atoms": [list(t) for t in self.atoms],
            "bonds": [list(t) for t in self.bonds],
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), separators=(",", ":"))

    @classmethod
    def from_graph(cls, g: MolGraph) -> "InvariantSet":
        ids = tuple(i for i, a in enumerate(g.atoms) if not a.phantom)
        atoms = tuple(
            (a.z, a.isotope, g.degree(i), int(a.in_ring), a.num_hs,
             a.num_1h, a.num_2h, a.num_3h, a.cip_code)
            for i, a in ((i, g.atoms[i]) for i in ids))
        bonds = tuple(
            (min(b.a, b.b), max(b.a, b.b), b.cip_code) for b in g.bonds())
        return cls(graph_charge=g.total_charge or 0, ids=ids,
                   atoms=atoms, bonds=bonds)


# ---------------------------------------------------------------------------
# Step 1: preparation


def compute_total_charge(g: MolGraph) -> MolGraph:
    """Sum formal charges into ``total_charge`` unless already recorded."""
    if g.total_charge is None:
        g.total_charge = sum(a.q for a in g.atoms)
    return g


def fold_hydrogens(g: MolGraph) -> MolGraph:
    """Mark hydrogen atoms phantom and move them into neighbor attributes.

    Bare protons (positive charge, natural isotope) become phantoms even
    without a neighbor.  A hydrogen bonded to a non-hydrogen, or to a
    hydrogen of greater-or-equal isotope number, has its bond dropped and
    is counted in the neighbor's hydrogen tally; isotopic hydrogens are
    additionally recorded for mobile-isotope handling.
    """
    for i, atom in enumerate(g.atoms):
        if atom.z != 1:
            continue
        if atom.q > 0 and atom.isotope == 0:
            atom.phantom = True
        for j in g.neighbors(i):
            nbr = g.atoms[j]
            if nbr.z == 1 and nbr.isotope < atom.isotope:
                continue
            _update_fold_parity(g, j, i)
            g.remove_bond(i, j)
            nbr.num_hs += 1
            atom.phantom = True
            if nbr.chiral_tag:
                nbr.stereo_h_slots = nbr.stereo_h_slots + (atom.isotope,)
            if 1 <= atom.isotope <= 3:
                nbr.set_hs.add(i)
                g.initial_set_hs.add(i)
    return g


def _update_fold_parity(g: MolGraph, center: int, h_id: int) -> None:
    """Keep ``center``'s chiral tag valid when neighbor ``h_id`` folds.

    The canonical neighbor convention is ascending surviving ids with the
    hydrogen block last, so the folding hydrogen moves from its sorted
    position to the end of the list; an odd move flips the tag.
    """
    atom = g.atoms[center]
    if not atom.chiral_tag:
        return
    nbrs = g.neighbors(center)
    position = nbrs.index(h_id)
    slide = (len(nbrs) - 1 - position) + len(atom.stereo_h_slots)
    if slide % 2:
        atom.chiral_tag = 3 - atom.chiral_tag


# ---------------------------------------------------------------------------
# Step 2: disconnection


def disconnect_metals(g: MolGraph) -> MolGraph:
    """Break all metal bonds, moving bond order and radicals into charges."""
    for i, metal in enumerate(g.atoms):
        if metal.z in NONMETALS:
            continue
        metal.num_hs = 0
        metal.set_hs = set()
        metal.chiral_tag = 0
        metal.stereo_h_slots = ()
        for j in g.neighbors(i):
            bond = g.bond(i, j)
            nbr = g.atoms[j]
            delta = int(bond.order) + nbr.num_rs
            g.remove_bond(i, j)
            metal.q += delta
            nbr.q -= delta
            nbr.num_rs = 0
            nbr.chiral_tag = 0
            nbr.stereo_h_slots = ()
            for k in g.neighbors(j):
                g.bond(j, k).drop_stereo()
    return g


# ---------------------------------------------------------------------------
# Step 3: normalization rules


def _clear_chirality(atom) -> None:
    atom.chiral_tag = 0
    atom.stereo_h_slots = ()


def _shift_charge_pair(g, donor, acceptor, sign):
    g.atoms[donor].q += sign
    g.atoms[acceptor].q -= sign


def _row1_action(g: MolGraph, m):
    _shift_charge_pair(g, m[0], m[1], +1)
    bond = g.bond(m[0], m[1])
    bond.order += 1
    bond.drop_stereo()


def _row2_action(g: MolGraph, m):
    _shift_charge_pair(g, m[0], m[2], +1)
    first, second = g.bond(m[0], m[1]), g.bond(m[1], m[2])
    first.order += 1
    second.order -= 1
    first.drop_stereo()
    second.drop_stereo()


def _row3_action(g: MolGraph, m):
    _shift_charge_pair(g, m[0], m[1], -1)
    bond = g.bond(m[0], m[1])
    bond.order += 1
    bond.drop_stereo()


def _row4_action(g: MolGraph, m):
    _shift_charge_pair(g, m[0], m[2], -1)
    first, second = g.bond(m[0], m[1]), g.bond(m[1], m[2])
    first.order -= 1
    second.order += 1
    first.drop_stereo()
    second.drop_stereo()


def _row5_action(g: MolGraph, m):
    _shift_charge_pair(g, m[0], m[3], -1)
    bonds = [g.bond(a, b) for a, b in zip(m, m[1:])]
    bonds[0].order += 1
    bonds[1].order -= 1
    bonds[2].order += 1
    for bond in bonds:
        bond.drop_stereo()


def normalization_rules() -> list[RewriteRule]:
    """Rows 1-5 of the charge/bond-order normalization table, in order."""
    xm = AtomConstraint(allowed_z=ZX_TABLE, charge="neg")
    xp = AtomConstraint(allowed_z=ZX_TABLE, charge="pos")
    cp = AtomConstraint(allowed_z=ZC_TABLE, charge="pos")
    return [
        RewriteRule(
            "normalize-1", ChainPattern((xm, xp), (SINGLE_OR_DOUBLE,)),
            _row1_action, measure="count of adjacent -/+ pairs"),
        RewriteRule(
            "normalize-2", ChainPattern((xm, _ANY, xp), (SINGLE, DOUBLE)),
            _row2_action, measure="count of 1,3 -/+ pairs"),
        RewriteRule(
            "normalize-3",
            ChainPattern((cp, AtomConstraint(allowed_z=ZN, h="!h0")), (SINGLE,)),
            _row3_action, measure="count of charged C/O/P/S next to N-H"),
        RewriteRule(
            "normalize-4",
            ChainPattern((cp, _ANY, AtomConstraint(allowed_z=ZN)),
                         (DOUBLE, SINGLE)),
            _row4_action, measure="count of charged C/O/P/S conjugated to N"),
        RewriteRule(
            "normalize-5",
            ChainPattern((AtomConstraint(allowed_z=ZN, charge="pos"), _ANY,
                          _ANY,
                          AtomConstraint(allowed_z=ZN, charge="neg", h="!h0")),
                         (SINGLE, DOUBLE, SINGLE)),
            _row5_action, measure="count of N+/N- 1,4 pairs"),
    ]


def normalize_charges(g: MolGraph, traces: StepTrace | None = None) -> MolGraph:
    trace = traces if traces is not None else StepTrace(step=3)
    for rule in normalization_rules():
        action = rule.action

        def checked(graph, match, action=action, rule=rule):
            before = sum(a.q for a in graph.atoms)
            action(graph, match)
            after = sum(a.q for a in graph.atoms)
            if before != after:
                raise ChemError(
                    f"charge conservation violated by {rule.name} on {match}")
            _audit_valence(graph, match, trace, rule.name)

        rule.action = checked
        trace.applications += apply_until_fixpoint(g, rule)
        trace.touched_atoms |= rule.touched
    return g


def _audit_valence(g: MolGraph, ids, trace: StepTrace, rule_name: str) -> None:
    for i in ids:
        atom = g.atoms[i]
        candidates = charge_adjusted_valences(atom.z, atom.q)
        if not candidates:
            continue
        valence = sum(b.order for b in g.incident_bonds(i)) \
            + atom.num_hs + atom.num_rs
        if valence != int(valence) or int(valence) not in candidates:
            trace.anomalies.append(
                f"{rule_name}: atom {i} left with valence {valence:g} "
                f"(allowed {candidates})")


# ---------------------------------------------------------------------------
# Step 4: deprotonation


def _eq1_action(g: MolGraph, m):
    atom = g.atoms[m[0]]
    atom.q -= 1
    atom.num_hs -= 1
    atom.set_hs = set()
    _clear_chirality(atom)


def _eq2_action(g: MolGraph, m):
    g.atoms[m[-1]].q -= 1
    first = g.atoms[m[0]]
    first.num_hs -= 1
    first.set_hs = set()
    _clear_chirality(first)
    for a, b in zip(m, m[1:]):
        bond = g.bond(a, b)
        bond.order = 3.0 - bond.order  # single <-> double
        bond.drop_stereo()


def deprotonation_rules(n_range=N_RANGE_DEFAULT) -> list[RewriteRule]:
    charged_het = AtomConstraint(allowed_z=ZZ_DEPROTONATE, charge="pos",
                                 h="!h0")
    chain_start = AtomConstraint(allowed_z=ZX_CHAIN, h="!h0")
    chain_end = AtomConstraint(allowed_z=ZN, charge="pos")
    return [
        RewriteRule(
            "deprotonate-charged", ChainPattern((charged_het,), ()),
            _eq1_action, measure="count of positive charges"),
        RewriteRule(
            "deprotonate-chain",
            ChainPattern((chain_start, _ANY, chain_end), (SINGLE, DOUBLE),
                         repeat=(1, (_ANY, _ANY), 1, (DOUBLE, SINGLE)),
                         n_range=n_range),
            _eq2_action, measure="count of positive nitrogen charges"),
    ]


def deprotonate(g: MolGraph, traces: StepTrace | None = None,
                n_range=N_RANGE_DEFAULT) -> MolGraph:
    trace = traces if traces is not None else StepTrace(step=4)
    for rule in deprotonation_rules(n_range):
        trace.applications += apply_until_fixpoint(g, rule)
        trace.touched_atoms |= rule.touched
    return g


# ---------------------------------------------------------------------------
# Step 5: neutralization

_EQ3 = ChainPattern((AtomConstraint(allowed_z=ZX_NEUTRALIZE, h="h1"),), ())
_EQ4 = ChainPattern((AtomConstraint(allowed_z=ZX_NEUTRALIZE, charge="neg"),), ())


def neutralize_fragments(g: MolGraph, traces: StepTrace | None = None) -> MolGraph:
    """Move each fragment's total charge toward zero by proton moves."""
    trace = traces if traces is not None else StepTrace(step=5)
    for fragment in g.fragments():
        charge = sum(g.atoms[i].q for i in fragment)
        while charge > 0:
            found = [m[0] for m in match_chain(g, _EQ3, 0) if m[0] in fragment]
            if not found:
                break
            atom = g.atoms[found[0]]
            atom.q -= 1
            atom.num_hs -= 1
            atom.set_hs = set()
            _clear_chirality(atom)
            trace.applications += 1
            trace.touched_atoms.add(found[0])
            charge -= 1
        while charge < 0:
            found = [m[0] for m in match_chain(g, _EQ4, 0) if m[0] in fragment]
            if not found:
                break
            atom = g.atoms[found[0]]
            atom.q += 1
            atom.num_hs += 1
            _clear_chirality(atom)
            trace.applications += 1
            trace.touched_atoms.add(found[0])
            charge += 1
    return g


# ---------------------------------------------------------------------------
# Step 6: valence reduction


def reduce_valence(g: MolGraph, traces: StepTrace | None = None) -> MolGraph:
    """Drop H2 from over-valent non-metal atoms until none qualifies."""
    trace = traces if traces is not None else StepTrace(step=6)
    changed = True
    while changed:
        changed = False
        for i, atom in enumerate(g.atoms):
            if atom.phantom or atom.z not in VALENCE_REDUCTION_ELEMENTS:
                continue
            if atom.num_hs < 2:
                continue
            valence = sum(b.order for b in g.incident_bonds(i)) \
                + atom.num_hs + atom.num_rs
            if valence >= STANDARD_VALENCES[atom.z][0] + 2:
                atom.num_hs -= 2
                atom.set_hs = set()
                _clear_chirality(atom)
                trace.applications += 1
                trace.touched_atoms.add(i)
                changed = True
    return g


# ---------------------------------------------------------------------------
# Step 7: movable charges


def _eq5_action(g: MolGraph, m):
    for a, b in zip(m, m[1:]):
        bond = g.bond(a, b)
        bond.order = 1.5
        bond.drop_stereo()


def movable_charge_rule(n_range=N_RANGE_DEFAULT) -> RewriteRule:
    start = AtomConstraint(allowed_z=ZN, charge="+1", h="h0")
    end = AtomConstraint(allowed_z=ZN, h="h0")
    return RewriteRule(
        "movable-charge",
        ChainPattern((start, _ANY, end), (DOUBLE, SINGLE),
                     repeat=(1, (_ANY, _ANY), 1, (SINGLE, DOUBLE)),
                     n_range=n_range),
        _eq5_action, measure="count of untagged chain bonds")


def detect_movable_charges(g: MolGraph, traces: StepTrace | None = None,
                           n_range=N_RANGE_DEFAULT) -> MolGraph:
    trace = traces if traces is not None else StepTrace(step=7)
    rule = movable_charge_rule(n_range)
    trace.applications += apply_until_fixpoint(g, rule)
    trace.touched_atoms |= rule.touched
    return g


# ---------------------------------------------------------------------------
# Step 8: tautomerism


def tautomer_pattern(n_range=N_RANGE_DEFAULT) -> ChainPattern:
    m_start = AtomConstraint(allowed_z=ZM_TAUTOMER)
    q_mid = AtomConstraint(allowed_z=ZQ_TAUTOMER)
    m_end = AtomConstraint(allowed_z=ZM_TAUTOMER, charge_or_h=("neg", "!h0"))
    return ChainPattern(
        (m_start, q_mid, m_end), (DOUBLE_OR_TAGGED, SINGLE_OR_TAGGED),
        repeat=(1, (q_mid, q_mid), 1, (SINGLE_OR_TAGGED, DOUBLE_OR_TAGGED)),
        n_range=n_range)


def detect_tautomers(g: MolGraph, traces: StepTrace | None = None,
                     n_range=N_RANGE_DEFAULT) -> MolGraph:
    """Strip mobile hydrogens from tautomeric endpoints (iterated sweeps).

    Endpoints collect in a set; sweeping stops when a full pass over all
    chain lengths adds no new tautomeric atom.  Chain bonds become
    order-1.5 tags so later sweeps can walk through them.
    """
    trace = traces if traces is not None else StepTrace(step=8)
    pattern = tautomer_pattern(n_range)
    tautomeric: set[int] = set()
    sweeps = 0
    while True:
        before = len(tautomeric)
        sweeps += 1
        if sweeps > len(g.atoms) + 1:
            raise FixpointError("tautomer detection exceeded |atoms| sweeps")
        for n in pattern.n_range:
            for match in match_chain(g, pattern, n):
                tautomeric.update((match[0], match[-1]))
                for end in (match[0], match[-1]):
                    atom = g.atoms[end]
                    atom.q = -1
                    atom.num_hs = 0
                    atom.set_hs = set()
                    _clear_chirality(atom)
                    for k in g.neighbors(end):
                        g.bond(end, k).drop_stereo()
                for a, b in zip(match, match[1:]):
                    bond = g.bond(a, b)
                    bond.drop_stereo()
                    bond.order = 1.5
                trace.applications += 1
                trace.touched_atoms.update(match)
        if len(tautomeric) == before:
            return g


# ---------------------------------------------------------------------------
# Step 9: hydrogen isotopes


def restore_mobile_isotopes(g: MolGraph) -> MolGraph:
    """Un-phantom mobile isotopic hydrogens; refresh per-isotope counts."""
    anchored: set[int] = set()
    for atom in g.atoms:
        anchored |= atom.set_hs
    for i in sorted(g.initial_set_hs):
        if i not in anchored:
            g.atoms[i].phantom = False
    for atom in g.atoms:
        atom.num_1h = sum(1 for h in atom.set_hs if g.atoms[h].isotope == 1)
        atom.num_2h = sum(1 for h in atom.set_hs if g.atoms[h].isotope == 2)
        atom.num_3h = sum(1 for h in atom.set_hs if g.atoms[h].isotope == 3)
    return g


# ---------------------------------------------------------------------------
# Driver


def inchify(g: MolGraph, n_max: int = 4):
    """Run the ten-step workflow on ``g`` in place.

    Returns (graph, InvariantSet, traces).  Step failures propagate as
    :class:`PipelineError` carrying the step index.
    """
    n_range = tuple(range(n_max + 1))
    traces = [StepTrace(step=k) for k in range(1, 11)]
    atom_count = len(g.atoms)

    def run(step: int, fn):
        try:
            fn()
        except ChemError as exc:
            raise PipelineError(step, exc) from exc
        if len(g.atoms) != atom_count:
            raise PipelineError(step, ChemError("atom ids are not stable"))
        _check_sane(g, step)

    def charge_guard(step: int, fn):
        before = sum(a.q for a in g.atoms)
        fn()
        if sum(a.q for a in g.atoms) != before:
            raise ChemError(f"step {step} changed the total formal charge")

    run(1, lambda: (compute_total_charge(g), kekulize(g), fold_hydrogens(g),
                    perceive_rings(g)))
    run(2, lambda: (charge_guard(2, lambda: disconnect_metals(g)),
                    perceive_rings(g)))
    run(3, lambda: normalize_charges(g, traces[2]))
    run(4, lambda: deprotonate(g, traces[3], n_range))
    run(5, lambda: neutralize_fragments(g, traces[4]))
    run(6, lambda: reduce_valence(g, traces[5]))
    run(7, lambda: detect_movable_charges(g, traces[6], n_range))
    run(8, lambda: detect_tautomers(g, traces[7], n_range))
    run(9, lambda: restore_mobile_isotopes(g))
    run(10, lambda: (assign_cip(g, traces[9].anomalies), filter_stereo(g)))
    return g, InvariantSet.from_graph(g), traces


def prepare_raw(g: MolGraph) -> MolGraph:
    """Kekulize, fold hydrogens and perceive rings, without normalizing.

    This is the graph the standard (daylight-invariant) fingerprints are
    computed on.
    """
    kekulize(g)
    fold_hydrogens(g)
    perceive_rings(g)
    return g


def _check_sane(g: MolGraph, step: int) -> None:
    for i, atom in enumerate(g.atoms):
        if atom.phantom and g.degree(i) > 0:
            raise PipelineError(step, ChemError(
                f"phantom atom {i} still has bonds"))
        if atom.num_hs < 0:
            raise PipelineError(step, ChemError(
                f"negative hydrogen count on atom {i}"))


def all_rules(n_range=N_RANGE_DEFAULT) -> list[RewriteRule]:
    """The full rewrite-rule table (for inspection and the JSON dump)."""
    rules = normalization_rules()
    rules += deprotonation_rules(n_range)
    rules.append(RewriteRule("neutralize-positive", _EQ3, lambda g, m: None,
                             measure="fragment charge toward zero"))
    rules.append(RewriteRule("neutralize-negative", _EQ4, lambda g, m: None,
                             measure="fragment charge toward zero"))
    rules.append(movable_charge_rule(n_range))
    rules.append(RewriteRule("tautomerize", tautomer_pattern(n_range),
                             lambda g, m: None,
                             measure="size of the tautomeric atom set"))
    return rules


def rule_table_json() -> str:
    return rules_to_json(all_rules())

"""Circular sparse count fingerprints and the generalized Tanimoto.

Two invariant modes seed the iterative refinement:

* ``daylight`` hashes the seven standard atomic invariants
  (heavy-neighbor count, valence minus hydrogens, atomic number, charge,
  attached hydrogens, ring membership, isotope flag) of the raw parsed
  graph (kekulized, hydrogens folded), and includes bond orders in the
  neighbor environments.
* ``inchified`` hashes the post-pipeline invariant tuples; bond orders
  are excluded from environments (the only bond invariant is the CIP
  code, hashed once per labeled bond), and the total charge enters
  through the two reserved keys: key 0 counts a negative total charge,
  key 1 a positive one.

Hashes fold each value tuple word-wise in FNV-1a style: starting from
offset 0xcbf29ce484222325, each value (as a two's-complement unsigned
64-bit word) is XORed in and the state multiplied by prime
0x100000001b3 modulo 2^64.  Final keys landing on the reserved values
0/1 have their top bit set instead.  Everything is deterministic across
runs and platforms.

A fingerprint is a plain dict mapping 64-bit keys to positive counts.

Text format, one molecule per line, keys ascending:

    id<TAB>key:count key:count ...
"""

from __future__ import annotations

import json

from .graph import MolGraph
from .pipeline import InvariantSet

SparseFingerprint = dict

_FNV_OFFSET = 0xcbf29ce484222325
_FNV_PRIME = 0x100000001b3
_MASK64 = (1 << 64) - 1

_TAG_DAYLIGHT = 1
_TAG_INCHIFIED = 2
_TAG_ITERATION = 3
_TAG_BOND_CIP = 4

MODES = ("daylight", "inchified")


def _hash_tuple(values: tuple[int, ...]) -> int:
    h = _FNV_OFFSET
    for value in values:
        h = ((h ^ (value & _MASK64)) * _FNV_PRIME) & _MASK64
    return h


def _final_key(h: int) -> int:
    return h | (1 << 63) if h < 2 else h


def morgan_fingerprint(source: MolGraph | InvariantSet, radius: int,
                       mode: str) -> SparseFingerprint:
    """Sparse count fingerprint of ``source`` at the given radius.

    ``source`` is the prepared raw graph for daylight mode and the
    pipeline output (graph or extracted InvariantSet) for inchified mode.
    """
    if radius < 0:
        raise ValueError("radius must be non-negative")
    if mode not in MODES:
        raise ValueError(f"unknown invariant mode {mode!r}")
    atoms, neighbor_lists, id0, graph_charge, cip_bonds = \
        _environment_inputs(source, mode)

    counts: SparseFingerprint = {}
    seen: set[frozenset[int]] = set()
    ids = dict(id0)
    env = {i: frozenset((i,)) for i in atoms}
    for r in range(radius + 1):
        if r > 0:
            new_ids = {}
            new_env = {}
            for i in atoms:
                pairs = sorted((bc, ids[j]) for bc, j in neighbor_lists[i])
                flat = [_TAG_ITERATION, r, ids[i]]
                for bc, nid in pairs:
                    flat.append(bc)
                    flat.append(nid)
                new_ids[i] = _hash_tuple(tuple(flat))
                grown = set(env[i])
                for _, j in neighbor_lists[i]:
                    grown |= env[j]
                new_env[i] = frozenset(grown)
            ids, env = new_ids, new_env
        claims: dict[frozenset[int], int] = {}
        for i in atoms:
            e = env[i]
            if e in seen:
                continue
            if e not in claims or ids[i] < claims[e]:
                claims[e] = ids[i]
        for e in sorted(claims, key=sorted):
            seen.add(e)
            key = _final_key(claims[e])
            counts[key] = counts.get(key, 0) + 1

    if mode == "inchified":
        for ka, kb, cip in cip_bonds:
            lo, hi = min(ka, kb), max(ka, kb)
            key = _final_key(_hash_tuple((_TAG_BOND_CIP, lo, hi, cip)))
            counts[key] = counts.get(key, 0) + 1
        if graph_charge < 0:
            counts[0] = -graph_charge
        elif graph_charge > 0:
            counts[1] = graph_charge
    return counts


def _environment_inputs(source, mode):
    if isinstance(source, InvariantSet):
        if mode != "inchified":
            raise ValueError("daylight mode needs the raw graph")
        atoms = list(source.ids)
        tuples = dict(zip(source.ids, source.atoms))
        id0 = {i: _hash_tuple((_TAG_INCHIFIED, *tuples[i])) for i in atoms}
        neighbor_lists = {i: [] for i in atoms}
        cip_bonds = []
        for i, j, cip in source.bonds:
            neighbor_lists[i].append((0, j))
            neighbor_lists[j].append((0, i))
            if cip:
                cip_bonds.append((id0[i], id0[j], cip))
        return atoms, neighbor_lists, id0, source.graph_charge, cip_bonds

    g: MolGraph = source
    atoms = [i for i, a in enumerate(g.atoms) if not a.phantom]
    neighbor_lists: dict[int, list[tuple[int, int]]] = {i: [] for i in atoms}
    if mode == "daylight":
        id0 = {i: _hash_tuple((_TAG_DAYLIGHT, *_daylight_tuple(g, i)))
               for i in atoms}
        for b in g.bonds():
            order = int(b.order)
            neighbor_lists[b.a].append((order, b.b))
            neighbor_lists[b.b].append((order, b.a))
        return atoms, neighbor_lists, id0, 0, []
    id0 = {i: _hash_tuple((_TAG_INCHIFIED, *_inchified_tuple(g, i)))
           for i in atoms}
    cip_bonds = []
    for b in g.bonds():
        neighbor_lists[b.a].append((0, b.b))
        neighbor_lists[b.b].append((0, b.a))
        if b.cip_code:
            cip_bonds.append((id0[b.a], id0[b.b], b.cip_code))
    return atoms, neighbor_lists, id0, g.total_charge or 0, cip_bonds


def _daylight_tuple(g: MolGraph, i: int):
    atom = g.atoms[i]
    heavy_valence = int(sum(b.order for b in g.incident_bonds(i)))
    return (g.degree(i), heavy_valence, atom.z, atom.q, atom.num_hs,
            int(atom.in_ring), int(atom.isotope != 0))


def _inchified_tuple(g: MolGraph, i: int):
    atom = g.atoms[i]
    return (atom.z, atom.isotope, g.degree(i), int(atom.in_ring),
            atom.num_hs, atom.num_1h, atom.num_2h, atom.num_3h,
            atom.cip_code)


def tanimoto(a: SparseFingerprint, b: SparseFingerprint) -> float:
    """Generalized Tanimoto over count vectors: sum(min) / sum(max)."""
    if not a and not b:
        return 1.0
    lo = hi = 0
    for key in a.keys() | b.keys():
        x = a.get(key, 0)
        y = b.get(key, 0)
        lo += x if x < y else y
        hi += y if x < y else x
    return lo / hi if hi else 1.0


def render_line(mol_id: str, fp: SparseFingerprint) -> str:
    body = " ".join(f"{k}:{fp[k]}" for k in sorted(fp))
    return f"{mol_id}\t{body}"


def parse_line(line: str) -> tuple[str, SparseFingerprint]:
    mol_id, _, body = line.rstrip("\n").partition("\t")
    fp: SparseFingerprint = {}
    for item in body.split():
        key, _, count = item.partition(":")
        fp[int(key)] = int(count)
    return mol_id, fp


def fingerprint_to_json(mol_id: str, fp: SparseFingerprint) -> str:
    return json.dumps(
        {"id": mol_id, "fingerprint": {str(k): fp[k] for k in sorted(fp)}},
        separators=(",", ":"))

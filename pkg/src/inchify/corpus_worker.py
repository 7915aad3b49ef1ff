"""Top-level worker functions, picklable for multiprocessing pools."""

from __future__ import annotations

from .errors import ChemError
from .fingerprint import morgan_fingerprint
from .pipeline import inchify, prepare_raw
from .smiles import parse_smiles


def featurize_smiles(args: tuple[str, int]) -> dict:
    """Both-mode fingerprints of one SMILES at the given radius."""
    smiles, radius = args
    parsed = parse_smiles(smiles)
    raw = prepare_raw(parsed.copy())
    final, _, _ = inchify(parsed)
    return {
        "daylight": morgan_fingerprint(raw, radius, "daylight"),
        "inchified": morgan_fingerprint(final, radius, "inchified"),
    }


def invariant_record(args: tuple[str, bool]) -> tuple[bool, object]:
    """(True, record dict) or (False, error text) for one SMILES."""
    smiles, with_trace = args
    try:
        graph, invariants, traces = inchify(parse_smiles(smiles))
    except ChemError as exc:
        return False, str(exc)
    record = invariants.as_dict()
    # phantom atoms keep their original indices; consumers give them
    # zero-valued features when padding back to the input size
    record["phantoms"] = [i for i, atom in enumerate(graph.atoms)
                          if atom.phantom]
    if with_trace:
        record["trace"] = [
            {"step": t.step, "applications": t.applications,
             "touched": sorted(t.touched_atoms), "anomalies": t.anomalies}
            for t in traces]
    return True, record


def fingerprint_record(args: tuple[str, int, str]) -> tuple[bool, object]:
    """(True, fingerprint dict) or (False, error text) for one SMILES."""
    smiles, radius, mode = args
    try:
        parsed = parse_smiles(smiles)
        if mode == "daylight":
            graph = prepare_raw(parsed)
        else:
            graph, _, _ = inchify(parsed)
        return True, morgan_fingerprint(graph, radius, mode)
    except ChemError as exc:
        return False, str(exc)

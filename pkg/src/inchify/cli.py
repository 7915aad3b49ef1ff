"""Command-line entry point.

Subcommands: ``featurize`` (invariant JSON per molecule), ``fingerprint``
(sparse count fingerprints in the text format), ``validate`` (confusion
matrices plus Tanimoto quantile table over a keyed corpus), ``bench``
(median runtimes by molecular-size bin) and ``rules`` (JSON dump of the
rewrite-rule table).

Exit codes: 0 success, 1 data error, 2 total failure, 64 usage error.
Outputs are pure functions of the input files and flags.  The default
worker count comes from the INCHIFY_THREADS environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from statistics import median

from .corpus import (compare_pairs, equivalent_pairs, load_corpus,
                     tanimoto_quantiles)
from .errors import ChemError
from .fingerprint import (MODES, fingerprint_to_json, morgan_fingerprint,
                          render_line)
from .pipeline import inchify, prepare_raw, rule_table_json
from .smiles import parse_smiles

USAGE_EXIT = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        sys.exit(USAGE_EXIT)


def _build_parser() -> _Parser:
    parser = _Parser(prog="inchify")
    sub = parser.add_subparsers(dest="command", required=True)

    feat = sub.add_parser("featurize", help="invariant JSON per molecule")
    feat.add_argument("--in", dest="infile", required=True)
    feat.add_argument("--out", dest="outfile", default="-")
    feat.add_argument("--trace", action="store_true")
    _common(feat)

    fp = sub.add_parser("fingerprint", help="sparse count fingerprints")
    fp.add_argument("--in", dest="infile", required=True)
    fp.add_argument("--out", dest="outfile", default="-")
    fp.add_argument("--radius", type=int, required=True)
    fp.add_argument("--mode", choices=MODES, required=True)
    fp.add_argument("--json", action="store_true",
                    help="JSON lines instead of the text format")
    _common(fp)

    val = sub.add_parser("validate", help="consistency evaluation")
    val.add_argument("--in", dest="infile", required=True)
    val.add_argument("--out", dest="outfile", default="-")
    val.add_argument("--window", type=int, default=100)
    val.add_argument("--radii", default="2,4,6")
    val.add_argument("--max-atoms", type=int, default=None)
    _common(val)

    bench = sub.add_parser("bench", help="median runtimes by size bin")
    bench.add_argument("--in", dest="infile", required=True)
    bench.add_argument("--out", dest="outfile", default="-")
    bench.add_argument("--bins", type=int, default=10)
    bench.add_argument("--radius", type=int, default=2)

    rules = sub.add_parser("rules", help="dump the rewrite-rule table")
    rules.add_argument("--out", dest="outfile", default="-")
    return parser


def _common(sub) -> None:
    sub.add_argument("--threads", type=int,
                     default=int(os.environ.get("INCHIFY_THREADS", "1")))


def _read_molecules(path: str) -> list[tuple[int, str, str]]:
    """(line number, smiles, id) triples from a .smi file."""
    out = []
    with open(path, encoding="utf-8") as handle:
        for number, line in enumerate(handle, start=1):
            parts = line.split()
            if not parts:
                continue
            name = parts[1] if len(parts) > 1 else str(number)
            out.append((number, parts[0], name))
    return out


class _Out:
    def __init__(self, path: str):
        self.path = path

    def __enter__(self):
        self.handle = sys.stdout if self.path == "-" else open(
            self.path, "w", encoding="utf-8")
        return self.handle

    def __exit__(self, *exc):
        if self.path != "-":
            self.handle.close()


def _map_molecules(worker, items, threads):
    """Apply a picklable worker over items, preserving input order."""
    if threads <= 1:
        return [worker(item) for item in items]
    from multiprocessing import Pool
    with Pool(threads) as pool:
        return pool.map(worker, items, chunksize=16)


def cmd_featurize(args) -> int:
    from .corpus_worker import invariant_record
    molecules = _read_molecules(args.infile)
    results = _map_molecules(invariant_record,
                             [(smiles, args.trace) for _, smiles, _ in molecules],
                             args.threads)
    successes = 0
    with _Out(args.outfile) as out:
        for (number, _, name), (ok, payload) in zip(molecules, results):
            if not ok:
                sys.stderr.write(f"line {number}: {payload}\n")
                continue
            successes += 1
            record = {"id": name, **payload}
            out.write(json.dumps(record, separators=(",", ":")) + "\n")
    return 0 if successes else 2


def cmd_fingerprint(args) -> int:
    from .corpus_worker import fingerprint_record
    if args.radius < 0:
        sys.stderr.write("error: --radius must be non-negative\n")
        return USAGE_EXIT
    molecules = _read_molecules(args.infile)
    results = _map_molecules(
        fingerprint_record,
        [(smiles, args.radius, args.mode) for _, smiles, _ in molecules],
        args.threads)
    successes = 0
    with _Out(args.outfile) as out:
        for (number, _, name), (ok, payload) in zip(molecules, results):
            if not ok:
                sys.stderr.write(f"line {number}: {payload}\n")
                continue
            successes += 1
            line = (fingerprint_to_json(name, payload) if args.json
                    else render_line(name, payload))
            out.write(line + "\n")
    return 0 if successes else 2


def cmd_validate(args) -> int:
    radii = [int(r) for r in args.radii.split(",") if r]
    if not radii or args.window < 1:
        sys.stderr.write("error: need --window >= 1 and at least one radius\n")
        return USAGE_EXIT
    reader = load_corpus(args.infile, fmt="tsv", max_atoms=args.max_atoms)
    records = list(reader)
    matrices = compare_pairs(records, window=args.window, radius=radii[0],
                             threads=args.threads)
    pairs = equivalent_pairs(records)
    quantile_levels = [0.10, 0.25, 0.50, 0.75, 0.90]
    with _Out(args.outfile) as out:
        for mode in MODES:
            out.write(matrices[mode].text_table(mode) + "\n")
        out.write(json.dumps({m: matrices[m].as_dict() for m in MODES},
                             separators=(",", ":")) + "\n")
        if pairs:
            rows = tanimoto_quantiles(pairs, radii, quantile_levels,
                                      threads=args.threads)
            out.write("mode\tradius\tquantile\tvalue\n")
            for mode, radius, q, value in rows:
                out.write(f"{mode}\t{radius}\t{q:.2f}\t{value:.4f}\n")
        if reader.skipped:
            sys.stderr.write(f"skipped {len(reader.skipped)} lines\n")
    return 0


def cmd_bench(args) -> int:
    molecules = _read_molecules(args.infile)
    width = max(1, 100 // max(1, args.bins))
    edges = [(lo + 1, lo + width) for lo in range(0, 100, width)]
    samples: dict[int, dict[str, list[float]]] = {}
    for _, smiles, _ in molecules:
        t0 = time.perf_counter()
        parsed = parse_smiles(smiles)
        t1 = time.perf_counter()
        size = len(parsed.atoms)
        if size > 100:
            continue
        raw = prepare_raw(parsed.copy())
        morgan_fingerprint(raw, args.radius, "daylight")
        t2 = time.perf_counter()
        final, _, _ = inchify(parsed)
        morgan_fingerprint(final, args.radius, "inchified")
        t3 = time.perf_counter()
        bin_index = min((size - 1) // width, len(edges) - 1)
        cell = samples.setdefault(bin_index, {"parse": [], "day": [], "inchi": []})
        cell["parse"].append((t1 - t0) * 1000)
        cell["day"].append((t2 - t1) * 1000)
        cell["inchi"].append((t3 - t2) * 1000)

    header = ["row"] + [f"{lo}-{hi}" for lo, hi in edges]
    rows = {label: [] for label in
            ("parse", "daylight-fp", "inchified-fp", "abs-overhead",
             "rel-overhead")}
    for k in range(len(edges)):
        cell = samples.get(k)
        if not cell:
            for label in rows:
                rows[label].append("-")
            continue
        parse_ms = median(cell["parse"])
        day_ms = median(cell["day"])
        inchi_ms = median(cell["inchi"])
        rows["parse"].append(f"{parse_ms:.2f}")
        rows["daylight-fp"].append(f"{day_ms:.2f}")
        rows["inchified-fp"].append(f"{inchi_ms:.2f}")
        rows["abs-overhead"].append(f"{inchi_ms - day_ms:.2f}")
        denominator = parse_ms + day_ms
        rows["rel-overhead"].append(
            f"{(parse_ms + inchi_ms) / denominator:.2f}" if denominator else "-")
    with _Out(args.outfile) as out:
        out.write("\t".join(header) + "\n")
        for label, cells in rows.items():
            out.write("\t".join([label] + cells) + "\n")
    return 0


def cmd_rules(args) -> int:
    with _Out(args.outfile) as out:
        out.write(rule_table_json() + "\n")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "featurize": cmd_featurize,
        "fingerprint": cmd_fingerprint,
        "validate": cmd_validate,
        "bench": cmd_bench,
        "rules": cmd_rules,
    }
    try:
        return handlers[args.command](args)
    except ChemError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())

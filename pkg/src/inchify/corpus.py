"""Corpus ingestion and the representation-consistency evaluation.

Input is a TSV with a ``smiles`` and ``identityKey`` header (optional
``label`` column) or a headerless ``.smi`` file with whitespace-separated
SMILES and key.  The identity key is produced by external tooling and is
only ever compared for equality.

``compare_pairs`` implements the sliding-window protocol: every record is
compared against the next ``window`` records of the key-sorted corpus,
counting fingerprint equality against key equality for both invariant
modes.  ``tanimoto_quantiles`` summarizes similarity over key-equivalent
pairs with nearest-rank quantiles.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from multiprocessing import Pool
from pathlib import Path
from typing import Iterable, Iterator

from .corpus_worker import featurize_smiles
from .errors import CorpusError, ParseError
from .fingerprint import MODES, SparseFingerprint, tanimoto
from .smiles import parse_smiles


@dataclass
class CorpusRecord:
    smiles: str
    identity_key: str
    label: float | None = None


@dataclass
class ConfusionMatrix:
    """Counts of fingerprint equality against identity-key equality."""

    samekey_samefp: int = 0
    samekey_difffp: int = 0
    diffkey_samefp: int = 0
    diffkey_difffp: int = 0

    @property
    def total(self) -> int:
        return (self.samekey_samefp + self.samekey_difffp
                + self.diffkey_samefp + self.diffkey_difffp)

    def add(self, same_key: bool, same_fp: bool) -> None:
        if same_key:
            if same_fp:
                self.samekey_samefp += 1
            else:
                self.samekey_difffp += 1
        elif same_fp:
            self.diffkey_samefp += 1
        else:
            self.diffkey_difffp += 1

    def as_dict(self) -> dict:
        return {
            "samekey_samefp": self.samekey_samefp,
            "samekey_difffp": self.samekey_difffp,
            "diffkey_samefp": self.diffkey_samefp,
            "diffkey_difffp": self.diffkey_difffp,
        }

    def text_table(self, title: str) -> str:
        w = max(12, len(str(self.total)))
        return "\n".join([
            f"{title:<18}{'fp equal':>{w}}{'fp differ':>{w}}",
            f"{'key equal':<18}{self.samekey_samefp:>{w}}{self.samekey_difffp:>{w}}",
            f"{'key differ':<18}{self.diffkey_samefp:>{w}}{self.diffkey_difffp:>{w}}",
        ])


@dataclass
class CorpusReader:
    """Streaming record source; skipped lines are counted, not fatal."""

    path: Path
    fmt: str = "tsv"
    max_atoms: int | None = None
    skipped: list[tuple[int, str]] = field(default_factory=list)

    def __iter__(self) -> Iterator[CorpusRecord]:
        with open(self.path, encoding="utf-8") as handle:
            lines = iter(enumerate(handle, start=1))
            label_col = None
            if self.fmt == "tsv":
                try:
                    _, header = next(lines)
                except StopIteration:
                    raise CorpusError(f"{self.path}: empty corpus") from None
                columns = header.rstrip("\n").split("\t")
                if columns[:2] != ["smiles", "identityKey"]:
                    raise CorpusError(
                        f"{self.path}: malformed header {columns[:2]}")
                if "label" in columns:
                    label_col = columns.index("label")
            for number, line in lines:
                line = line.rstrip("\n")
                if not line:
                    continue
                record = self._parse_line(number, line, label_col)
                if record is not None:
                    yield record

    def _parse_line(self, number, line, label_col) -> CorpusRecord | None:
        if self.fmt == "tsv":
            parts = line.split("\t")
        else:
            parts = line.split()
        if len(parts) < 2 or not parts[0] or not parts[1]:
            self.skipped.append((number, "missing smiles or identity key"))
            return None
        label = None
        if label_col is not None and len(parts) > label_col and parts[label_col]:
            label = float(parts[label_col])
        try:
            g = parse_smiles(parts[0])
        except ParseError as exc:
            self.skipped.append((number, str(exc)))
            return None
        if self.max_atoms is not None and len(g.atoms) > self.max_atoms:
            self.skipped.append((number, f"more than {self.max_atoms} atoms"))
            return None
        return CorpusRecord(smiles=parts[0], identity_key=parts[1], label=label)


def load_corpus(path, fmt: str = "tsv",
                max_atoms: int | None = None) -> CorpusReader:
    path = Path(path)
    if not path.exists():
        raise CorpusError(f"{path}: no such file")
    if fmt not in ("tsv", "smi"):
        raise CorpusError(f"unknown corpus format {fmt!r}")
    return CorpusReader(path=path, fmt=fmt, max_atoms=max_atoms)


def _fingerprints(records: Iterable[CorpusRecord], radius: int,
                  threads: int = 1):
    """Yield (record, {mode: fingerprint}) preserving input order."""
    if threads <= 1:
        for record in records:
            yield record, featurize_smiles((record.smiles, radius))
        return
    records = list(records)
    with Pool(threads) as pool:
        args = [(r.smiles, radius) for r in records]
        for record, fps in zip(records,
                               pool.map(featurize_smiles, args, chunksize=64)):
            yield record, fps


def compare_pairs(records: Iterable[CorpusRecord], window: int = 100,
                  radius: int = 2, threads: int = 1) -> dict[str, ConfusionMatrix]:
    """Compare each record with the next ``window`` records (key-sorted)."""
    if window < 1:
        raise CorpusError("window must be at least 1")
    matrices = {mode: ConfusionMatrix() for mode in MODES}
    recent: deque = deque()
    previous_key = None
    for record, fps in _fingerprints(records, radius, threads):
        if previous_key is not None and record.identity_key < previous_key:
            raise CorpusError(
                f"corpus not sorted by identity key at {record.identity_key!r}")
        previous_key = record.identity_key
        for old_key, old_fps in recent:
            same_key = old_key == record.identity_key
            for mode in MODES:
                matrices[mode].add(same_key, old_fps[mode] == fps[mode])
        recent.append((record.identity_key, fps))
        if len(recent) > window:
            recent.popleft()
    return matrices


def equivalent_pairs(records: Iterable[CorpusRecord]) -> list[tuple[str, str]]:
    """All unordered SMILES pairs sharing an identity key."""
    groups: dict[str, list[str]] = {}
    for record in records:
        groups.setdefault(record.identity_key, []).append(record.smiles)
    pairs = []
    for key in sorted(groups):
        members = groups[key]
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                pairs.append((members[i], members[j]))
    return pairs


def nearest_rank(values: list[float], q: float) -> float:
    """Nearest-rank quantile of ``values`` at level ``q`` in (0, 1]."""
    if not values:
        raise CorpusError("empty value set")
    ordered = sorted(values)
    rank = max(1, math.ceil(q * len(ordered)))
    return ordered[min(rank, len(ordered)) - 1]


def tanimoto_quantiles(pairs: list[tuple[str, str]], radii: list[int],
                       quantiles: list[float],
                       threads: int = 1) -> list[tuple[str, int, float, float]]:
    """Rows of (mode, radius, quantile, value) over key-equivalent pairs."""
    if not pairs:
        raise CorpusError("no equivalent pairs to evaluate")
    rows = []
    for radius in radii:
        values: dict[str, list[float]] = {mode: [] for mode in MODES}
        smiles_set = sorted({s for pair in pairs for s in pair})
        cache = {}
        for record, fps in _fingerprints(
                [CorpusRecord(s, "-") for s in smiles_set], radius, threads):
            cache[record.smiles] = fps
        for a, b in pairs:
            for mode in MODES:
                values[mode].append(tanimoto(cache[a][mode], cache[b][mode]))
        for mode in MODES:
            for q in quantiles:
                rows.append((mode, radius, q, nearest_rank(values[mode], q)))
    return rows

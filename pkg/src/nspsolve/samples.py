"""Aggregated solver output with deterministic serialization.

A SampleSet collapses repeated reads of the same bit vector into one record
with a count.  Records are kept sorted by (energy, bit string), so two runs
that visit the same states in any order serialize to identical bytes.
Wall-clock metadata never goes in here; run manifests carry that instead.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import DimensionError, UndefinedStatisticError
from .qubo import bits_from_string, bits_to_string

SCHEMA_VERSION = 1


class SampleRecord(NamedTuple):
    bits: str
    energy: float
    count: int


@dataclass(frozen=True)
class SampleSet:
    """Sorted, aggregated samples plus solver provenance."""

    records: tuple[SampleRecord, ...]
    num_reads: int
    provenance: dict

    def __post_init__(self):
        total = sum(r.count for r in self.records)
        if total != self.num_reads:
            raise DimensionError(f"record counts sum to {total}, expected {self.num_reads}")
        keys = [(r.energy, r.bits) for r in self.records]
        if keys != sorted(keys):
            raise DimensionError("records must be sorted by (energy, bits)")
        if len({r.bits for r in self.records}) != len(self.records):
            raise DimensionError("duplicate bit vectors in records")

    def __len__(self) -> int:
        return len(self.records)

    @property
    def num_vars(self) -> int:
        if not self.records:
            raise UndefinedStatisticError("empty sample set has no variable count")
        return len(self.records[0].bits)

    def best(self) -> SampleRecord:
        """Lowest-energy record; ties already resolve to the smallest bits."""
        if not self.records:
            raise UndefinedStatisticError("empty sample set has no best record")
        return self.records[0]

    def bits_array(self) -> np.ndarray:
        """(num_records, num_vars) matrix of the distinct sampled states."""
        if not self.records:
            raise UndefinedStatisticError("empty sample set has no states")
        return np.stack([bits_from_string(r.bits) for r in self.records])

    def counts(self) -> np.ndarray:
        return np.array([r.count for r in self.records], dtype=np.int64)

    def energies(self) -> np.ndarray:
        return np.array([r.energy for r in self.records])


def from_bit_rows(rows, energies, provenance: dict, num_reads: int | None = None) -> SampleSet:
    """Aggregate per-read rows into a SampleSet.

    ``rows`` is a (reads, num_vars) 0/1 matrix and ``energies`` the matching
    per-read energies; identical rows must carry identical energies.
    """
    rows = np.asarray(rows)
    energies = np.asarray(energies, dtype=float)
    if rows.ndim != 2 or energies.shape != (rows.shape[0],):
        raise DimensionError("rows and energies must be (reads, n) and (reads,)")
    merged: dict[str, list] = {}
    for row, energy in zip(rows, energies):
        key = bits_to_string(row)
        slot = merged.setdefault(key, [float(energy), 0])
        slot[1] += 1
    records = tuple(
        SampleRecord(bits, energy, count)
        for energy, bits, count in sorted((e, b, c) for b, (e, c) in merged.items())
    )
    reads = rows.shape[0] if num_reads is None else num_reads
    return SampleSet(records=records, num_reads=reads, provenance=dict(provenance))


def sampleset_to_dict(samples: SampleSet) -> dict:
    payload = {
        "version": SCHEMA_VERSION,
        "num_reads": int(samples.num_reads),
        "samples": [
            {"bits": r.bits, "energy": float(r.energy), "count": int(r.count)}
            for r in samples.records
        ],
    }
    for key, value in samples.provenance.items():
        if key in payload:
            raise DimensionError(f"provenance key {key!r} collides with a schema key")
        payload[key] = value
    return payload


def sampleset_from_dict(payload: dict) -> SampleSet:
    data = dict(payload)
    data.pop("version", None)
    num_reads = int(data.pop("num_reads"))
    records = tuple(
        SampleRecord(str(s["bits"]), float(s["energy"]), int(s["count"]))
        for s in data.pop("samples")
    )
    return SampleSet(records=records, num_reads=num_reads, provenance=data)


def save_sampleset(samples: SampleSet, path) -> None:
    """Write canonical JSON: key-sorted, newline-terminated, no timestamps."""
    text = json.dumps(sampleset_to_dict(samples), indent=2, sort_keys=True)
    Path(path).write_text(text + "\n")


def load_sampleset(path) -> SampleSet:
    return sampleset_from_dict(json.loads(Path(path).read_text()))


def fingerprint(payload: dict) -> str:
    """Short stable hash of a JSON-serializable payload."""
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]

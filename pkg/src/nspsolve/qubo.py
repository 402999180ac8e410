"""Quadratic binary problems in QUBO and Ising form.

A QUBO is stored as a sparse upper-triangular coefficient map: an entry
``(i, j) -> c`` with ``i < j`` contributes ``c * q_i * q_j`` and a diagonal
entry ``(i, i) -> c`` contributes ``c * q_i`` (binary variables are
idempotent, so the diagonal is the linear part).  The Ising form keeps the
pair couplings, per-spin fields and a constant offset separately.

The two forms are related by the exact substitution ``q = (s + 1) / 2``,
which maps every energy, not just the minimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, DomainError

SCHEMA_VERSION = 1


def as_bit_array(bits, num_vars: int | None = None) -> np.ndarray:
    """Coerce ``bits`` to a 1-d uint8 array of zeros and ones.

    Raises DomainError for values other than 0/1 and DimensionError when a
    length is given and does not match.
    """
    arr = np.atleast_1d(np.asarray(bits))
    if arr.ndim != 1:
        raise DimensionError(f"expected a 1-d bit vector, got shape {arr.shape}")
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise DomainError("bit vectors may contain only 0 and 1")
    if num_vars is not None and arr.size != num_vars:
        raise DimensionError(f"expected {num_vars} bits, got {arr.size}")
    return arr.astype(np.uint8)


def as_spin_array(spins, num_vars: int | None = None) -> np.ndarray:
    """Coerce ``spins`` to a 1-d int8 array of -1/+1 values."""
    arr = np.atleast_1d(np.asarray(spins))
    if arr.ndim != 1:
        raise DimensionError(f"expected a 1-d spin vector, got shape {arr.shape}")
    if arr.size and not np.isin(arr, (-1, 1)).all():
        raise DomainError("spin vectors may contain only -1 and +1")
    if num_vars is not None and arr.size != num_vars:
        raise DimensionError(f"expected {num_vars} spins, got {arr.size}")
    return arr.astype(np.int8)


def bits_to_string(bits) -> str:
    """Render a bit vector as a compact '0101...' string."""
    return "".join("1" if b else "0" for b in as_bit_array(bits))


def bits_from_string(text: str) -> np.ndarray:
    """Parse a '0101...' string back into a uint8 bit vector."""
    if not all(c in "01" for c in text):
        raise DomainError(f"malformed bit string {text!r}")
    return np.frombuffer(text.encode("ascii"), dtype=np.uint8) - ord("0")


def _check_terms(num_vars: int, terms: dict[tuple[int, int], float]) -> None:
    if num_vars < 0:
        raise DimensionError("num_vars must be non-negative")
    for (i, j), c in terms.items():
        if not (0 <= i <= j < num_vars):
            raise DimensionError(f"index pair ({i}, {j}) out of range for {num_vars} variables")
        if not math.isfinite(c):
            raise DomainError(f"non-finite coefficient at ({i}, {j})")


@dataclass(frozen=True)
class QuboProblem:
    """Sparse upper-triangular QUBO: sum of c_ij q_i q_j plus a constant."""

    num_vars: int
    coefficients: dict[tuple[int, int], float]
    offset: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "coefficients", dict(self.coefficients))
        _check_terms(self.num_vars, self.coefficients)
        if not math.isfinite(self.offset):
            raise DomainError("non-finite offset")


@dataclass(frozen=True, eq=False)
class IsingProblem:
    """Pair couplings J_ij (i < j), per-spin fields h_i and a constant offset."""

    num_vars: int
    couplings: dict[tuple[int, int], float]
    fields: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "couplings", dict(self.couplings))
        object.__setattr__(self, "fields", np.asarray(self.fields, dtype=float))
        if self.fields.shape != (self.num_vars,):
            raise DimensionError(f"fields must have shape ({self.num_vars},), got {self.fields.shape}")
        _check_terms(self.num_vars, self.couplings)
        for i, j in self.couplings:
            if i == j:
                raise DimensionError("Ising couplings must be strictly off-diagonal")
        if not np.isfinite(self.fields).all() or not math.isfinite(self.offset):
            raise DomainError("non-finite field or offset")


def energy_qubo(problem: QuboProblem, bits) -> float:
    """Evaluate the QUBO energy of a single assignment."""
    q = as_bit_array(bits, problem.num_vars)
    energy = problem.offset
    for (i, j), c in problem.coefficients.items():
        if q[i] and q[j]:
            energy += c
    return float(energy)


def energy_ising(problem: IsingProblem, spins) -> float:
    """Evaluate the Ising energy of a single spin assignment."""
    s = as_spin_array(spins, problem.num_vars)
    energy = problem.offset + float(problem.fields @ s)
    for (i, j), c in problem.couplings.items():
        energy += c * s[i] * s[j]
    return float(energy)


def qubo_to_ising(problem: QuboProblem) -> IsingProblem:
    """Convert a QUBO to the energy-equivalent Ising problem.

    Substituting q = (s + 1) / 2 term by term:

        c * q_i          -> c/2 * s_i + c/2
        c * q_i * q_j    -> c/4 * s_i s_j + c/4 * (s_i + s_j) + c/4

    so every assignment keeps its energy exactly (up to float rounding).
    """
    fields = np.zeros(problem.num_vars)
    couplings: dict[tuple[int, int], float] = {}
    offset = problem.offset
    for (i, j), c in problem.coefficients.items():
        if i == j:
            fields[i] += c / 2.0
            offset += c / 2.0
        else:
            couplings[(i, j)] = c / 4.0
            fields[i] += c / 4.0
            fields[j] += c / 4.0
            offset += c / 4.0
    return IsingProblem(problem.num_vars, couplings, fields, offset)


def spins_to_bits(spins) -> np.ndarray:
    """Map -1/+1 spins to 0/1 bits under q = (s + 1) / 2."""
    return ((as_spin_array(spins) + 1) // 2).astype(np.uint8)


def bits_to_spins(bits) -> np.ndarray:
    """Map 0/1 bits to -1/+1 spins, the inverse of spins_to_bits."""
    return (2 * as_bit_array(bits).astype(np.int8) - 1).astype(np.int8)


def hamming_distance(x, y) -> int:
    """Number of positions where two equal-length bit vectors differ."""
    xa = as_bit_array(x)
    ya = as_bit_array(y)
    if xa.size != ya.size:
        raise DimensionError(f"length mismatch {xa.size} != {ya.size}")
    return int(np.count_nonzero(xa != ya))


def symmetric_adjacency(num_vars: int, pairs: dict[tuple[int, int], float]):
    """Neighbor index/value arrays for the symmetric view of pair terms.

    Returns (neighbors, values) lists indexed by variable; entry k of both
    arrays for variable i describes one incident pair term.  Diagonal keys
    are rejected, callers handle linear parts separately.
    """
    nbr: list[list[int]] = [[] for _ in range(num_vars)]
    val: list[list[float]] = [[] for _ in range(num_vars)]
    for (i, j), c in pairs.items():
        if i == j:
            raise DimensionError("diagonal entry in pair terms")
        nbr[i].append(j)
        val[i].append(c)
        nbr[j].append(i)
        val[j].append(c)
    neighbors = [np.asarray(n, dtype=np.intp) for n in nbr]
    values = [np.asarray(v, dtype=float) for v in val]
    return neighbors, values


def _terms_list(pairs: dict[tuple[int, int], float]) -> list[list]:
    return [[int(i), int(j), float(c)] for (i, j), c in sorted(pairs.items())]


def qubo_to_dict(problem: QuboProblem) -> dict:
    """JSON-ready form: {version, kind, num_vars, terms: [[i, j, c], ...], offset}."""
    return {
        "version": SCHEMA_VERSION,
        "kind": "qubo",
        "num_vars": int(problem.num_vars),
        "terms": _terms_list(problem.coefficients),
        "offset": float(problem.offset),
    }


def ising_to_dict(problem: IsingProblem) -> dict:
    """JSON-ready form; fields appear as diagonal [i, i, h_i] terms."""
    terms = dict(problem.couplings)
    for i, h in enumerate(problem.fields):
        if h != 0.0:
            terms[(i, i)] = float(h)
    return {
        "version": SCHEMA_VERSION,
        "kind": "ising",
        "num_vars": int(problem.num_vars),
        "terms": _terms_list(terms),
        "offset": float(problem.offset),
    }


def problem_from_dict(payload: dict) -> QuboProblem | IsingProblem:
    """Rebuild a problem from its JSON-ready dict form."""
    kind = payload.get("kind", "qubo")
    num_vars = int(payload["num_vars"])
    offset = float(payload.get("offset", 0.0))
    terms = {(int(i), int(j)): float(c) for i, j, c in payload.get("terms", [])}
    if kind == "qubo":
        return QuboProblem(num_vars, terms, offset)
    if kind == "ising":
        fields = np.zeros(num_vars)
        couplings = {}
        for (i, j), c in terms.items():
            if i == j:
                fields[i] = c
            else:
                couplings[(i, j)] = c
        return IsingProblem(num_vars, couplings, fields, offset)
    raise DomainError(f"unknown problem kind {kind!r}")

"""Exhaustive solving of small QUBO problems.

Assignments are enumerated in ascending integer order with variable 0 as
the most significant bit, so state lists come out in lexicographic bit
order.  Energies are computed blockwise: the trailing ``block_bits``
variables form a fully vectorized energy table, the leading variables are
swept as block prefixes.  This keeps the per-assignment cost at a few
float operations, which is what makes the default 28-variable cap usable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial

import numpy as np

from .errors import CapacityError
from .parallel import run_in_order
from .qubo import QuboProblem, bits_to_string

ENUMERATION_CAP = 28
DEGENERACY_TOL = 1e-9
_BLOCK_BITS = 20


@dataclass(frozen=True, eq=False)
class GroundStateSet:
    """All minimum-energy assignments of one problem.

    ``states`` is empty only for constrained searches whose feasible set is
    empty; ``energy`` is +inf in that case.
    """

    energy: float
    states: tuple[np.ndarray, ...]
    search_space_size: int

    def bit_strings(self) -> list[str]:
        return [bits_to_string(s) for s in self.states]

    def __len__(self) -> int:
        return len(self.states)


def _check_capacity(problem: QuboProblem, max_vars: int) -> None:
    if problem.num_vars > max_vars:
        raise CapacityError(
            f"{problem.num_vars} variables exceed the exhaustive-search cap of {max_vars}"
        )


def _prefix_bits(p: int, pb: int) -> np.ndarray:
    return np.array([(p >> (pb - 1 - u)) & 1 for u in range(pb)], dtype=np.uint8)


class _BlockEvaluator:
    """Shared tables for computing one prefix block of energies at a time."""

    def __init__(self, problem: QuboProblem, block_bits: int = _BLOCK_BITS):
        n = problem.num_vars
        self.problem = problem
        self.sb = min(n, max(1, block_bits))
        self.pb = n - self.sb
        pb = self.pb
        self.prefix_diag: list[tuple[int, float]] = []
        self.prefix_pairs: list[tuple[int, int, float]] = []
        self.cross: list[tuple[int, int, float]] = []
        suffix_diag: list[tuple[int, float]] = []
        suffix_pairs: list[tuple[int, int, float]] = []
        for (i, j), c in problem.coefficients.items():
            if i == j:
                (self.prefix_diag if i < pb else suffix_diag).append((i, c))
            elif j < pb:
                self.prefix_pairs.append((i, j, c))
            elif i >= pb:
                suffix_pairs.append((i, j, c))
            else:
                self.cross.append((i, j, c))
        suffix_idx = np.arange(1 << self.sb, dtype=np.uint32)
        cols = [((suffix_idx >> (n - 1 - v)) & 1).astype(np.uint8) for v in range(pb, n)]
        base = np.full(1 << self.sb, float(problem.offset))
        for v, c in suffix_diag:
            base += c * cols[v - pb]
        for u, v, c in suffix_pairs:
            base += c * (cols[u - pb] & cols[v - pb])
        self.cols = cols
        self.base = base
        self._suffix_matrix: np.ndarray | None = None

    def block(self, p: int) -> np.ndarray:
        """Energies of all assignments sharing prefix index p, suffix ascending."""
        pbits = _prefix_bits(p, self.pb)
        e = 0.0
        for u, c in self.prefix_diag:
            if pbits[u]:
                e += c
        for u, v, c in self.prefix_pairs:
            if pbits[u] and pbits[v]:
                e += c
        # fold the prefix side of crossing pairs into per-suffix-var linears
        linear: dict[int, float] = {}
        for u, v, c in self.cross:
            if pbits[u]:
                linear[v] = linear.get(v, 0.0) + c
        out = self.base + e
        for v, c in sorted(linear.items()):
            if c:
                out += c * self.cols[v - self.pb]
        return out

    def suffix_matrix(self) -> np.ndarray:
        if self._suffix_matrix is None:
            idx = np.arange(1 << self.sb, dtype=np.uint32)[:, None]
            shifts = np.arange(self.sb - 1, -1, -1, dtype=np.uint32)
            self._suffix_matrix = ((idx >> shifts) & 1).astype(np.uint8)
        return self._suffix_matrix

    def bits_of(self, p: int, suffix_indices) -> np.ndarray:
        """Full bit rows of selected suffix indices within prefix block p."""
        rows = self.suffix_matrix()[np.asarray(suffix_indices, dtype=np.intp)]
        if self.pb:
            pbits = np.broadcast_to(_prefix_bits(p, self.pb), (len(rows), self.pb))
            rows = np.hstack([pbits, rows])
        return rows


def _scan_chunk(problem: QuboProblem, block_bits: int, tol: float, prefix_range: tuple[int, int]):
    """Per-block minima and near-minimal candidates for a range of prefixes."""
    ev = _BlockEvaluator(problem, block_bits)
    lo, hi = prefix_range
    best = math.inf
    candidates: list[tuple[int, np.ndarray, np.ndarray]] = []
    for p in range(lo, hi):
        block = ev.block(p)
        bmin = float(block.min())
        keep = np.nonzero(block <= bmin + tol)[0]
        candidates.append((p, keep, block[keep]))
        best = min(best, bmin)
    return best, candidates


def _prefix_chunks(num_prefixes: int, jobs: int) -> list[tuple[int, int]]:
    pieces = min(num_prefixes, max(1, jobs))
    bounds = np.linspace(0, num_prefixes, pieces + 1).astype(int)
    return [(int(lo), int(hi)) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]


def enumerate_ground_states(
    problem: QuboProblem,
    max_vars: int = ENUMERATION_CAP,
    tol: float = DEGENERACY_TOL,
    jobs: int = 1,
    block_bits: int = _BLOCK_BITS,
) -> GroundStateSet:
    """Return the minimum energy and every assignment attaining it.

    Degeneracy is resolved within ``tol``: every assignment within tol of
    the global minimum is returned, in ascending lexicographic bit order.
    ``jobs`` distributes prefix blocks over processes; the result does not
    depend on it.
    """
    _check_capacity(problem, max_vars)
    n = problem.num_vars
    if n == 0:
        return GroundStateSet(float(problem.offset), (np.zeros(0, dtype=np.uint8),), 1)
    ev = _BlockEvaluator(problem, block_bits)
    chunks = _prefix_chunks(1 << ev.pb, jobs)
    results = run_in_order(partial(_scan_chunk, problem, block_bits, tol), chunks, jobs)
    global_min = min(best for best, _ in results)
    states: list[np.ndarray] = []
    for _, candidates in results:
        for p, keep, energies in candidates:
            hit = keep[energies <= global_min + tol]
            if hit.size:
                states.extend(ev.bits_of(p, hit))
    return GroundStateSet(global_min, tuple(states), 1 << n)


def min_energy_under(
    problem: QuboProblem,
    predicate,
    max_vars: int = ENUMERATION_CAP,
    tol: float = DEGENERACY_TOL,
    block_bits: int = _BLOCK_BITS,
) -> GroundStateSet:
    """Exhaustive minimum over assignments accepted by ``predicate``.

    The predicate sees each bit vector in turn, so the cost is a Python
    call per assignment; keep this for small problems.  An empty feasible
    set yields an empty GroundStateSet with +inf energy, not an error.
    """
    _check_capacity(problem, max_vars)
    n = problem.num_vars
    if n == 0:
        empty = np.zeros(0, dtype=np.uint8)
        if predicate(empty):
            return GroundStateSet(float(problem.offset), (empty,), 1)
        return GroundStateSet(math.inf, (), 1)
    ev = _BlockEvaluator(problem, block_bits)
    best = math.inf
    kept: list[tuple[float, np.ndarray]] = []
    all_suffixes = np.arange(1 << ev.sb)
    for p in range(1 << ev.pb):
        block = ev.block(p)
        rows = ev.bits_of(p, all_suffixes)
        for s in range(rows.shape[0]):
            if not predicate(rows[s]):
                continue
            e = float(block[s])
            if e < best - tol:
                best = e
                kept = [(e, rows[s].copy())]
            elif e <= best + tol:
                kept.append((e, rows[s].copy()))
    if not kept:
        return GroundStateSet(math.inf, (), 1 << n)
    best = min(e for e, _ in kept)
    states = tuple(bits for e, bits in kept if e <= best + tol)
    return GroundStateSet(best, states, 1 << n)


def all_energies(problem: QuboProblem, max_vars: int = _BLOCK_BITS) -> np.ndarray:
    """Energy of every assignment, indexed in integer order (MSB = var 0)."""
    _check_capacity(problem, max_vars)
    if problem.num_vars == 0:
        return np.array([float(problem.offset)])
    ev = _BlockEvaluator(problem, block_bits=problem.num_vars)
    return ev.block(0)

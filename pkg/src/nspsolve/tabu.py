"""Tabu search and clamp-based decomposition for QUBO problems.

The search flips one bit at a time, keeping incremental local sums so a
move costs O(degree).  A flipped variable is banned for ``tenure``
iterations unless undoing it would beat the best energy seen anywhere
(aspiration).  Restarts perturb the best-so-far assignment.  All ties
break toward the lowest variable index, and every random draw comes from
``default_rng([seed, restart])``, so runs are reproducible.

Problems wider than ``subproblem_size`` go through decompose_solve, which
ranks variables by flip impact, splits them into windows of that size,
and solves each window exactly (when small enough) or with the same tabu
search while the rest stay clamped.  Passes repeat until one completes
without improving the energy.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ConfigError
from .exact import enumerate_ground_states
from .qubo import QuboProblem, qubo_to_dict, symmetric_adjacency
from .samples import SampleSet, fingerprint, from_bit_rows

_EXACT_SUBPROBLEM_CAP = 20
_PERTURB_FRACTION = 0.125
_BUDGET_CHECK_INTERVAL = 256
_MAX_PASSES = 100


@dataclass(frozen=True)
class TabuConfig:
    tenure: int = 10
    max_restarts: int = 20
    subproblem_size: int = 40
    time_budget: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.tenure < 1:
            raise ConfigError("tenure must be at least 1")
        if self.max_restarts < 1:
            raise ConfigError("max_restarts must be at least 1")
        if self.subproblem_size < 1:
            raise ConfigError("subproblem_size must be at least 1")
        if self.time_budget is not None and self.time_budget <= 0:
            raise ConfigError("time_budget must be positive when given")
        if not 0 <= int(self.seed) < 2**63:
            raise ConfigError("seed must be a non-negative 63-bit integer")


class _Landscape:
    """Dense diagonal plus sparse symmetric pair view of one QUBO."""

    def __init__(self, problem: QuboProblem):
        n = problem.num_vars
        self.offset = problem.offset
        self.diag = np.zeros(n)
        pairs = {}
        for (i, j), c in problem.coefficients.items():
            if i == j:
                self.diag[i] += c
            else:
                pairs[(i, j)] = c
        self.neighbors, self.values = symmetric_adjacency(n, pairs)

    def energy(self, x: np.ndarray) -> float:
        total = self.offset + float(self.diag @ x)
        for i, nbrs in enumerate(self.neighbors):
            if x[i]:
                total += float(self.values[i] @ (x[nbrs] * (nbrs > i)))
        return total

    def local_sums(self, x: np.ndarray) -> np.ndarray:
        return np.array([float(v @ x[nbr]) for nbr, v in zip(self.neighbors, self.values)])


def _tabu_restart(land: _Landscape, x, best_energy, config, deadline):
    """Improve one assignment in place; returns (best bits, energy, truncated)."""
    n = x.size
    sums = land.local_sums(x)
    energy = land.energy(x)
    best_x = x.copy()
    best_e = energy
    tabu_until = np.zeros(n, dtype=np.int64)
    stall_limit = max(100, 10 * n)
    since_improvement = 0
    iteration = 0
    truncated = False
    while since_improvement < stall_limit:
        delta = (1.0 - 2.0 * x) * (land.diag + sums)
        allowed = (tabu_until <= iteration) | (energy + delta < best_energy - 1e-12)
        if not allowed.any():
            allowed = np.ones(n, dtype=bool)
        move = int(np.argmin(np.where(allowed, delta, np.inf)))
        energy += float(delta[move])
        x[move] ^= 1
        step = 1.0 if x[move] else -1.0
        nbr = land.neighbors[move]
        if nbr.size:
            sums[nbr] += step * land.values[move]
        tabu_until[move] = iteration + config.tenure
        iteration += 1
        if energy < best_e - 1e-12:
            best_e = energy
            best_x = x.copy()
            since_improvement = 0
        else:
            since_improvement += 1
        if deadline is not None and iteration % _BUDGET_CHECK_INTERVAL == 0:
            if time.monotonic() > deadline:
                truncated = True
                break
    return best_x, land.energy(best_x), truncated


def tabu_solve(problem: QuboProblem, config: TabuConfig | None = None) -> SampleSet:
    """Multi-restart tabu search; one record per completed restart.

    Deterministic for a fixed seed unless ``time_budget`` is set, in which
    case a wall-clock deadline may truncate the run (flagged in the
    provenance).
    """
    config = config or TabuConfig()
    land = _Landscape(problem)
    n = problem.num_vars
    deadline = None if config.time_budget is None else time.monotonic() + config.time_budget
    rows, energies = [], []
    best_x: np.ndarray | None = None
    best_e = np.inf
    truncated = False
    for restart in range(config.max_restarts):
        rng = np.random.default_rng([int(config.seed), restart])
        if best_x is None:
            x = rng.integers(0, 2, size=n).astype(np.uint8)
        else:
            flips = rng.random(n) < _PERTURB_FRACTION
            if not flips.any() and n:
                flips[int(rng.integers(n))] = True
            x = best_x ^ flips.astype(np.uint8)
        x, energy, truncated = _tabu_restart(land, x, best_e, config, deadline)
        rows.append(x)
        energies.append(energy)
        if energy < best_e - 1e-12:
            best_e = energy
            best_x = x
        if truncated:
            break
    provenance = {
        "solver": "tabu",
        "seed": int(config.seed),
        "config": asdict(config),
        "problem": fingerprint(qubo_to_dict(problem)),
        "truncated": bool(truncated),
    }
    return from_bit_rows(np.array(rows), energies, provenance)


def clamp_subproblem(problem: QuboProblem, x: np.ndarray, free: np.ndarray) -> QuboProblem:
    """Subproblem over ``free`` (sorted) with all other bits fixed from x.

    Energies line up exactly: evaluating the subproblem on bits y equals
    evaluating the full problem on x with the free positions replaced by y.
    """
    position = {int(g): l for l, g in enumerate(free)}
    coeffs: dict[tuple[int, int], float] = {}
    offset = problem.offset

    def add(i, j, c):
        key = (i, j) if i <= j else (j, i)
        coeffs[key] = coeffs.get(key, 0.0) + c

    for (i, j), c in problem.coefficients.items():
        li, lj = position.get(i), position.get(j)
        if li is not None and lj is not None:
            add(li, lj, c)
        elif li is not None:
            if x[j]:
                add(li, li, c)
        elif lj is not None:
            if x[i]:
                add(lj, lj, c)
        elif i == j:
            offset += c * int(x[i])
        else:
            offset += c * int(x[i]) * int(x[j])
    coeffs = dict(sorted(coeffs.items()))
    return QuboProblem(len(free), coeffs, offset)


def _solve_window(problem, x, free, config, seed, deadline):
    """Best bits for one clamped window, or None when the budget is gone."""
    sub = clamp_subproblem(problem, x, free)
    if sub.num_vars <= _EXACT_SUBPROBLEM_CAP:
        return enumerate_ground_states(sub).states[0]
    budget = None
    if deadline is not None:
        budget = deadline - time.monotonic()
        if budget <= 0:
            return None
    sub_config = TabuConfig(
        tenure=config.tenure,
        max_restarts=config.max_restarts,
        subproblem_size=config.subproblem_size,
        time_budget=budget,
        seed=seed,
    )
    best = tabu_solve(sub, sub_config).best().bits
    return np.asarray([int(c) for c in best], dtype=np.uint8)


def decompose_solve(problem: QuboProblem, config: TabuConfig | None = None) -> SampleSet:
    """Iterated clamp-and-solve for problems wider than one tabu window.

    Problems that already fit are handed to tabu_solve unchanged.  Each
    pass ranks every variable by the magnitude of its flip impact at the
    current assignment and cuts the ranking into windows of
    ``subproblem_size``.  Every window is solved with the rest of the
    assignment clamped (exactly for 20 variables or fewer) and merged back
    when the full energy strictly improves.  Passes repeat until one ends
    without any improvement.
    """
    config = config or TabuConfig()
    n = problem.num_vars
    if n <= config.subproblem_size:
        return tabu_solve(problem, config)
    land = _Landscape(problem)
    deadline = None if config.time_budget is None else time.monotonic() + config.time_budget
    windows_per_pass = -(-n // config.subproblem_size)
    seeds = np.random.SeedSequence(int(config.seed)).generate_state(
        1 + _MAX_PASSES * windows_per_pass
    )
    x = np.random.default_rng(int(seeds[0])).integers(0, 2, size=n).astype(np.uint8)
    energy = land.energy(x)
    rows = [x.copy()]
    energies = [energy]
    truncated = False
    passes = 0
    window_count = 0
    for _ in range(_MAX_PASSES):
        improved = False
        delta = (1.0 - 2.0 * x) * (land.diag + land.local_sums(x))
        order = np.argsort(-np.abs(delta), kind="stable")
        for start in range(0, n, config.subproblem_size):
            if deadline is not None and time.monotonic() > deadline:
                truncated = True
                break
            free = np.sort(order[start : start + config.subproblem_size])
            window_count += 1
            y = _solve_window(problem, x, free, config, int(seeds[window_count]), deadline)
            if y is None:
                truncated = True
                break
            candidate = x.copy()
            candidate[free] = y
            candidate_energy = land.energy(candidate)
            if candidate_energy < energy - 1e-12:
                x, energy = candidate, candidate_energy
                rows.append(x.copy())
                energies.append(energy)
                improved = True
        passes += 1
        if truncated or not improved:
            break
    provenance = {
        "solver": "decompose",
        "seed": int(config.seed),
        "config": asdict(config),
        "problem": fingerprint(qubo_to_dict(problem)),
        "passes": passes,
        "truncated": bool(truncated),
    }
    return from_bit_rows(np.array(rows), energies, provenance)

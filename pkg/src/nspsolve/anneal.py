"""Metropolis annealing on Ising problems with reproducible random streams.

Every read r of a run with seed s consumes its own generator,
``default_rng([s, r])``: first the random initial state (forward mode
only), then one uniform per proposed flip, sweep by sweep in fixed
variable order.  Reads therefore never share randomness, and splitting the
reads over worker processes cannot change any of them.

Temperatures follow a geometric path between ``temp_max`` and
``temp_min``.  Reverse runs map an anneal fraction to a temperature via
``T(s) = temp_min * (temp_max / temp_min) ** (1 - s)``, so s = 1 is the
cold end; a reverse run ramps from s = 1 down to ``s_target``, holds, and
ramps back.  With ``s_target = 1`` nothing moves at all and the input
state is returned unchanged.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from functools import partial

import numpy as np

from .errors import ConfigError, DimensionError
from .parallel import run_in_order
from .qubo import IsingProblem, as_bit_array, ising_to_dict, symmetric_adjacency
from .samples import SampleSet, fingerprint, from_bit_rows

SWEEPS_PER_MICROSECOND = 10
DEFAULT_TEMP_MIN = 0.05
_TAPE_CHUNK = 64
# read-stream index reserved for drawing refine start states; ordinary
# read indices stay below it
_SELECTION_STREAM = 1 << 32


def sweeps_from_microseconds(duration: float) -> int:
    """Sweep count equivalent of an anneal duration in microseconds."""
    if duration <= 0:
        raise ConfigError("anneal duration must be positive")
    return max(1, round(duration * SWEEPS_PER_MICROSECOND))


def default_temp_max(problem: IsingProblem) -> float:
    """Twice the largest per-spin energy scale, floored at 1."""
    row = np.zeros(problem.num_vars)
    for (i, j), c in problem.couplings.items():
        row[i] += abs(c)
        row[j] += abs(c)
    peak_field = float(np.abs(problem.fields).max()) if problem.num_vars else 0.0
    peak_row = float(row.max()) if problem.num_vars else 0.0
    return max(2.0 * (peak_field + peak_row), 1.0)


@dataclass(frozen=True)
class AnnealSchedule:
    """Cooling-path description shared by forward and reverse runs."""

    mode: str = "forward"
    total_sweeps: int = 2000
    s_target: float = 0.6
    hold_sweeps: int = 100
    ramp_sweeps: int = 20
    temp_max: float | None = None
    temp_min: float = DEFAULT_TEMP_MIN
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("forward", "reverse"):
            raise ConfigError(f"unknown anneal mode {self.mode!r}")
        if self.total_sweeps < 1:
            raise ConfigError("total_sweeps must be at least 1")
        if not 0.0 < self.s_target <= 1.0:
            raise ConfigError("s_target must lie in (0, 1]")
        if self.hold_sweeps < 0 or self.ramp_sweeps < 0:
            raise ConfigError("sweep counts must be non-negative")
        if self.temp_min <= 0:
            raise ConfigError("temp_min must be positive")
        if self.temp_max is not None and self.temp_max <= self.temp_min:
            raise ConfigError("temp_max must exceed temp_min")
        if not 0 <= int(self.seed) < 2**63:
            raise ConfigError("seed must be a non-negative 63-bit integer")

    def resolve_temp_max(self, problem: IsingProblem) -> float:
        return self.temp_max if self.temp_max is not None else default_temp_max(problem)

    def describe(self, problem: IsingProblem) -> dict:
        """Schedule fields with the effective temperature ceiling filled in."""
        payload = asdict(self)
        payload["seed"] = int(payload["seed"])
        payload["temp_max"] = float(self.resolve_temp_max(problem))
        return payload


def forward_temperatures(schedule: AnnealSchedule, problem: IsingProblem) -> np.ndarray:
    """Geometric cooling from temp_max down to temp_min."""
    t_max = schedule.resolve_temp_max(problem)
    k = schedule.total_sweeps
    if k == 1:
        return np.array([schedule.temp_min])
    return t_max * (schedule.temp_min / t_max) ** (np.arange(k) / (k - 1))


def reverse_temperatures(schedule: AnnealSchedule, problem: IsingProblem) -> np.ndarray:
    """Ramp out to s_target, hold, ramp home; empty when s_target is 1."""
    if schedule.s_target >= 1.0:
        return np.empty(0)
    t_max = schedule.resolve_temp_max(problem)
    out = np.linspace(1.0, schedule.s_target, schedule.ramp_sweeps + 1)[1:]
    hold = np.full(schedule.hold_sweeps, schedule.s_target)
    home = np.linspace(schedule.s_target, 1.0, schedule.ramp_sweeps + 1)[1:]
    s_path = np.concatenate([out, hold, home])
    return schedule.temp_min * (t_max / schedule.temp_min) ** (1.0 - s_path)


def _batch_energies(problem: IsingProblem, spins: np.ndarray) -> np.ndarray:
    values = spins.astype(float)
    energies = problem.offset + values @ problem.fields
    for (i, j), c in problem.couplings.items():
        energies = energies + c * (values[:, i] * values[:, j])
    return energies


def _sweep_reads(problem: IsingProblem, temps: np.ndarray, seed: int, read_ids, initial) -> np.ndarray:
    """Run one Metropolis chain per read id; returns final spins (reads, n)."""
    n = problem.num_vars
    rngs = [np.random.default_rng([int(seed), int(r)]) for r in read_ids]
    if initial is None:
        rows = [2 * rng.integers(0, 2, size=n, dtype=np.int8) - 1 for rng in rngs]
        spins = np.stack(rows) if rows else np.empty((0, n), dtype=np.int8)
    else:
        spins = initial.astype(np.int8).copy()
    if not len(spins) or not temps.size:
        return spins
    neighbors, values = symmetric_adjacency(n, problem.couplings)
    fields = problem.fields
    for start in range(0, temps.size, _TAPE_CHUNK):
        chunk = temps[start : start + _TAPE_CHUNK]
        tape = np.stack([rng.random((chunk.size, n)) for rng in rngs])
        for c, temp in enumerate(chunk):
            for i in range(n):
                local = (spins[:, neighbors[i]] * values[i]).sum(axis=1) + fields[i]
                delta = -2.0 * spins[:, i] * local
                accept = tape[:, c, i] < np.exp(np.minimum(-delta / temp, 0.0))
                np.negative(spins[:, i], where=accept, out=spins[:, i])
    return spins


def _reads_worker(problem, temps, seed, initial, read_range):
    lo, hi = read_range
    rows = None if initial is None else initial[lo:hi]
    return _sweep_reads(problem, temps, seed, range(lo, hi), rows)


def _run_schedule(problem, temps, schedule, num_reads, initial, provenance, jobs):
    bounds = np.linspace(0, num_reads, max(1, min(jobs, num_reads)) + 1).astype(int)
    ranges = [(int(lo), int(hi)) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
    worker = partial(_reads_worker, problem, temps, schedule.seed, initial)
    blocks = run_in_order(worker, ranges, jobs)
    spins = np.concatenate(blocks) if blocks else np.empty((0, problem.num_vars), dtype=np.int8)
    bits = ((spins + 1) // 2).astype(np.uint8)
    energies = _batch_energies(problem, spins) if len(spins) else np.empty(0)
    return from_bit_rows(bits, energies, provenance, num_reads=num_reads)


def _base_provenance(solver: str, problem: IsingProblem, schedule: AnnealSchedule) -> dict:
    return {
        "solver": solver,
        "seed": int(schedule.seed),
        "schedule": schedule.describe(problem),
        "problem": fingerprint(ising_to_dict(problem)),
    }


def forward_anneal(
    problem: IsingProblem,
    schedule: AnnealSchedule | None = None,
    num_reads: int = 1000,
    jobs: int = 1,
) -> SampleSet:
    """Independent annealing reads from random initial states.

    Each read starts at a uniformly random spin assignment and follows the
    geometric cooling path; the returned SampleSet aggregates the final
    states.  Identical (schedule, num_reads) always reproduce the same set,
    whatever ``jobs`` is.
    """
    schedule = schedule or AnnealSchedule()
    if schedule.mode != "forward":
        raise ConfigError("forward_anneal needs a forward schedule")
    if num_reads < 0:
        raise ConfigError("num_reads must be non-negative")
    temps = forward_temperatures(schedule, problem)
    provenance = _base_provenance("forward-anneal", problem, schedule)
    return _run_schedule(problem, temps, schedule, num_reads, None, provenance, jobs)


def _initial_matrix(problem: IsingProblem, initial, num_reads: int) -> np.ndarray:
    arr = np.asarray(initial)
    if arr.ndim == 1:
        row = 2 * as_bit_array(arr, problem.num_vars).astype(np.int8) - 1
        return np.broadcast_to(row, (num_reads, problem.num_vars)).copy()
    if arr.ndim == 2:
        if arr.shape != (num_reads, problem.num_vars):
            raise DimensionError(
                f"initial matrix must be ({num_reads}, {problem.num_vars}), got {arr.shape}"
            )
        rows = [2 * as_bit_array(r).astype(np.int8) - 1 for r in arr]
        return np.stack(rows)
    raise DimensionError("initial state must be a bit vector or a matrix of them")


def reverse_anneal(
    problem: IsingProblem,
    initial,
    schedule: AnnealSchedule,
    num_reads: int = 1000,
    jobs: int = 1,
) -> SampleSet:
    """Anneal outward from a given state and back to the cold end.

    ``initial`` is a bit vector shared by all reads, or one row per read.
    With ``s_target = 1`` the path is empty and every read returns the
    input unchanged, which makes the identity case exactly reproducible.
    """
    if schedule.mode != "reverse":
        raise ConfigError("reverse_anneal needs a reverse schedule")
    if num_reads < 0:
        raise ConfigError("num_reads must be non-negative")
    if initial is None:
        raise ConfigError("reverse annealing needs an initial state")
    rows = _initial_matrix(problem, initial, num_reads)
    temps = reverse_temperatures(schedule, problem)
    provenance = _base_provenance("reverse-anneal", problem, schedule)
    return _run_schedule(problem, temps, schedule, num_reads, rows, provenance, jobs)


REFINE_POLICIES = ("lowest-energy", "uniform-random")


def refine(
    problem: IsingProblem,
    samples: SampleSet,
    schedule: AnnealSchedule,
    num_reads: int = 1000,
    policy: str = "lowest-energy",
    jobs: int = 1,
) -> SampleSet:
    """Reverse-anneal from states of an existing SampleSet.

    lowest-energy starts every read at the best record (ties fall to the
    lexicographically smallest bits); uniform-random draws each read's
    start from the sample distribution weighted by counts, using a
    selection stream separate from all read streams.
    """
    if policy not in REFINE_POLICIES:
        raise ConfigError(f"unknown refine policy {policy!r}")
    if not samples.records:
        raise ConfigError("cannot refine an empty sample set")
    if schedule.mode != "reverse":
        raise ConfigError("refine needs a reverse schedule")
    if policy == "lowest-energy":
        initial = samples.bits_array()[0]
    else:
        counts = samples.counts()
        sel = np.random.default_rng([int(schedule.seed), _SELECTION_STREAM])
        picks = sel.choice(len(samples), size=num_reads, p=counts / counts.sum())
        initial = samples.bits_array()[picks]
    result = reverse_anneal(problem, initial, schedule, num_reads, jobs)
    provenance = dict(result.provenance)
    provenance["solver"] = "refine"
    provenance["policy"] = policy
    provenance["source"] = fingerprint(
        {"records": [list(r) for r in samples.records], "num_reads": samples.num_reads}
    )
    return SampleSet(result.records, result.num_reads, provenance)

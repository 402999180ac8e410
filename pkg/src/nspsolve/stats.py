"""Evaluation statistics for solver output on rostering instances.

Mirrors the usual benchmark questions: how often does a sample set land
on a fully satisfying roster, how far do samples sit from the nearest
optimal roster (Hamming distance to the closest member of the ground
set, so degeneracy never penalizes a sample), and how do those numbers
move across a grid of problem sizes.  Sweeps emit one CSV row per
(nurses, days) cell with a fixed column set.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace

import numpy as np

from .anneal import AnnealSchedule, forward_anneal, refine
from .errors import CapacityError, ConfigError, DimensionError, UndefinedStatisticError
from .exact import DEGENERACY_TOL, ENUMERATION_CAP, GroundStateSet, enumerate_ground_states
from .model import NspInstance, build_qubo, is_fully_satisfying, preset_instance
from .qubo import QuboProblem, bits_from_string, qubo_to_dict, qubo_to_ising
from .samples import SampleSet, fingerprint, from_bit_rows
from .tabu import TabuConfig, decompose_solve, tabu_solve

ENGINES = ("exact", "forward", "reverse", "tabu", "decompose")

SWEEP_COLUMNS = (
    "N",
    "D",
    "engine",
    "num_reads",
    "satisfaction_frequency",
    "mean_hamming",
    "std_hamming",
    "mean_energy",
    "best_energy",
    "reference_kind",
    "seed",
)


@dataclass(frozen=True)
class EvaluationReport:
    """Summary statistics of one SampleSet against a reference ground set."""

    satisfaction_frequency: float
    mean_hamming: float
    std_hamming: float
    mean_energy: float
    best_energy: float
    reference: GroundStateSet
    sample_count: int


def satisfaction_frequency(instance: NspInstance, samples: SampleSet) -> float:
    """Multiplicity-weighted fraction of samples satisfying every constraint."""
    if not samples.records:
        raise UndefinedStatisticError("satisfaction frequency of an empty sample set")
    if samples.num_vars != instance.num_variables:
        raise DimensionError(
            f"samples have {samples.num_vars} bits, instance needs {instance.num_variables}"
        )
    hits = sum(
        int(count)
        for row, count in zip(samples.bits_array(), samples.counts())
        if is_fully_satisfying(instance, row)
    )
    return hits / samples.num_reads


def hamming_stats(samples: SampleSet, reference: GroundStateSet) -> tuple[float, float]:
    """Weighted mean and population std of distance to the nearest reference.

    Each sample is scored against the closest member of the reference set,
    so a degenerate ground set never inflates the distance.
    """
    if not samples.records or not reference.states:
        raise UndefinedStatisticError("hamming statistics need samples and a reference")
    rows = samples.bits_array()
    ref = np.stack(reference.states)
    if ref.shape[1] != rows.shape[1]:
        raise DimensionError(
            f"samples have {rows.shape[1]} bits, reference states have {ref.shape[1]}"
        )
    chunk = max(1, (1 << 22) // (ref.size + 1))
    parts = [
        (rows[lo : lo + chunk, None, :] != ref[None, :, :]).sum(axis=2).min(axis=1)
        for lo in range(0, len(rows), chunk)
    ]
    distances = np.concatenate(parts)
    weights = samples.counts()
    mean = float(np.average(distances, weights=weights))
    variance = float(np.average((distances - mean) ** 2, weights=weights))
    return mean, float(np.sqrt(variance))


def best_found_reference(samples: SampleSet) -> GroundStateSet:
    """Reference set built from the lowest-energy samples themselves."""
    if not samples.records:
        raise UndefinedStatisticError("cannot build a reference from an empty sample set")
    floor = samples.best().energy
    states = tuple(
        bits_from_string(record.bits)
        for record in samples.records
        if record.energy <= floor + DEGENERACY_TOL
    )
    return GroundStateSet(floor, states, 2**samples.num_vars)


def evaluate(
    instance: NspInstance,
    samples: SampleSet,
    reference: GroundStateSet | None = None,
    reference_cap: int = ENUMERATION_CAP,
    jobs: int = 1,
) -> EvaluationReport:
    """Score one sample set, enumerating the reference when it fits."""
    if reference is None:
        if instance.num_variables > reference_cap:
            raise CapacityError(
                f"{instance.num_variables} variables exceed the reference cap "
                f"{reference_cap}; pass an explicit reference"
            )
        reference = enumerate_ground_states(
            build_qubo(instance), max_vars=reference_cap, jobs=jobs
        )
    frequency = satisfaction_frequency(instance, samples)
    mean_hamming, std_hamming = hamming_stats(samples, reference)
    mean_energy = float(np.average(samples.energies(), weights=samples.counts()))
    return EvaluationReport(
        satisfaction_frequency=frequency,
        mean_hamming=mean_hamming,
        std_hamming=std_hamming,
        mean_energy=mean_energy,
        best_energy=samples.best().energy,
        reference=reference,
        sample_count=samples.num_reads,
    )


def _exact_sampleset(problem: QuboProblem, jobs: int) -> SampleSet:
    ground = enumerate_ground_states(problem, jobs=jobs)
    rows = np.stack(ground.states)
    provenance = {"solver": "exact", "problem": fingerprint(qubo_to_dict(problem))}
    return from_bit_rows(rows, [ground.energy] * len(ground.states), provenance)


def run_engine(
    problem: QuboProblem,
    engine: str,
    num_reads: int = 1000,
    schedule: AnnealSchedule | None = None,
    config: TabuConfig | None = None,
    seed: int = 0,
    jobs: int = 1,
) -> SampleSet:
    """Solve one QUBO with a named engine and return its SampleSet.

    The reverse engine here is the self-contained refinement pipeline:
    a forward run followed by reverse annealing from its best state.
    Reverse annealing from an explicit state is available directly in
    the annealing module.
    """
    if engine == "exact":
        return _exact_sampleset(problem, jobs)
    if engine in ("forward", "reverse"):
        ising = qubo_to_ising(problem)
        if engine == "forward":
            return forward_anneal(ising, schedule or AnnealSchedule(seed=seed), num_reads, jobs)
        if schedule is None:
            back = AnnealSchedule(mode="reverse", seed=seed)
        elif schedule.mode == "reverse":
            back = schedule
        else:
            raise ConfigError("reverse engine needs a reverse-mode schedule")
        source = forward_anneal(ising, replace(back, mode="forward"), num_reads, jobs)
        return refine(ising, source, back, num_reads, "lowest-energy", jobs)
    if engine in ("tabu", "decompose"):
        solve = tabu_solve if engine == "tabu" else decompose_solve
        return solve(problem, config or TabuConfig(seed=seed))
    raise ConfigError(f"unknown engine {engine!r}; expected one of {', '.join(ENGINES)}")


def _cell_seed(seed: int, nurses: int, days: int) -> int:
    return int(np.random.SeedSequence([int(seed), int(nurses), int(days)]).generate_state(1)[0])


def sweep_experiment(
    nurse_counts,
    day_counts,
    engine: str,
    preset: str = "single-shift",
    num_reads: int = 1000,
    schedule: AnnealSchedule | None = None,
    config: TabuConfig | None = None,
    seed: int = 0,
    reference_cap: int = ENUMERATION_CAP,
    jobs: int = 1,
) -> list[dict]:
    """One evaluation row per (nurses, days) cell.

    Every cell draws its own engine seed from the master seed, so rows
    are reproducible independently of which other cells run.  Cells whose
    reference ground set fits under ``reference_cap`` are scored against
    exact enumeration, larger ones against their own best samples
    (reference_kind records which).  A failing cell keeps its row with
    empty statistics and the error class in reference_kind.
    """
    if engine not in ENGINES:
        raise ConfigError(f"unknown engine {engine!r}; expected one of {', '.join(ENGINES)}")
    rows = []
    for nurses in nurse_counts:
        for days in day_counts:
            cell_seed = _cell_seed(seed, nurses, days)
            row = dict.fromkeys(SWEEP_COLUMNS)
            row.update(N=int(nurses), D=int(days), engine=engine, seed=cell_seed)
            try:
                instance = preset_instance(preset, int(nurses), int(days))
                problem = build_qubo(instance)
                samples = run_engine(
                    problem,
                    engine,
                    num_reads=num_reads,
                    schedule=replace(schedule, seed=cell_seed) if schedule else None,
                    config=replace(config, seed=cell_seed) if config else None,
                    seed=cell_seed,
                    jobs=jobs,
                )
                if instance.num_variables <= reference_cap:
                    reference = enumerate_ground_states(problem, jobs=jobs)
                    kind = "exact"
                else:
                    reference = best_found_reference(samples)
                    kind = "best-found"
                report = evaluate(instance, samples, reference)
                row.update(
                    num_reads=samples.num_reads,
                    satisfaction_frequency=report.satisfaction_frequency,
                    mean_hamming=report.mean_hamming,
                    std_hamming=report.std_hamming,
                    mean_energy=report.mean_energy,
                    best_energy=report.best_energy,
                    reference_kind=kind,
                )
            except Exception as exc:
                row["reference_kind"] = f"error:{type(exc).__name__}"
            rows.append(row)
    return rows


def write_sweep_csv(rows: list[dict], path) -> None:
    """Write sweep rows with the fixed column set; empty cells stay empty."""
    with open(path, "w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=SWEEP_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow({key: row.get(key) for key in SWEEP_COLUMNS})


def read_sweep_csv(path) -> list[dict]:
    """Rows of a sweep CSV with numeric fields parsed back."""
    numeric = (
        "satisfaction_frequency",
        "mean_hamming",
        "std_hamming",
        "mean_energy",
        "best_energy",
    )
    rows = []
    with open(path, newline="") as handle:
        for raw in csv.DictReader(handle):
            row: dict = dict(raw)
            for key in ("N", "D", "num_reads", "seed"):
                row[key] = int(row[key]) if row[key] else None
            for key in numeric:
                row[key] = float(row[key]) if row[key] else None
            rows.append(row)
    return rows

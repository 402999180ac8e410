"""Command-line front end: generate, solve, stats, sweep.

Every run that writes files also writes a manifest JSON next to its main
output (same stem, ``.manifest.json`` suffix) holding the full command
line, the seed actually used, fingerprints and output paths.  Output
files themselves carry no timestamps, so re-running the manifest's
command reproduces them byte for byte; the timestamp lives only in the
manifest.

Exit codes: 0 success, 2 configuration errors (also argparse usage
errors), 3 capacity, 4 dimension, 5 undefined statistic, 6 bad bit or
spin values.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .anneal import AnnealSchedule, reverse_anneal, sweeps_from_microseconds
from .errors import (
    CapacityError,
    ConfigError,
    DimensionError,
    DomainError,
    UndefinedStatisticError,
)
from .exact import ENUMERATION_CAP, enumerate_ground_states
from .model import (
    PRESETS,
    build_qubo,
    instance_to_dict,
    load_instance,
    preset_instance,
    save_instance,
    save_roster,
)
from .plots import plot_roster, plot_sweep
from .qubo import bits_from_string, qubo_to_ising
from .samples import fingerprint, load_sampleset, save_sampleset
from .stats import (
    ENGINES,
    SWEEP_COLUMNS,
    best_found_reference,
    evaluate,
    run_engine,
    sweep_experiment,
    write_sweep_csv,
)
from .tabu import TabuConfig

_ERROR_CODES = (
    (ConfigError, 2),
    (CapacityError, 3),
    (DimensionError, 4),
    (UndefinedStatisticError, 5),
    (DomainError, 6),
)


def _draw_seed() -> int:
    return int(np.random.SeedSequence().generate_state(1)[0])


def _manifest_path(out) -> Path:
    return Path(out).with_suffix(".manifest.json")


def _write_manifest(args, outputs, **fields) -> Path:
    payload = {
        "version": 1,
        "tool": f"nspsolve {__version__}",
        "command": list(args.argv),
        "outputs": [str(path) for path in outputs],
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    payload.update(fields)
    path = _manifest_path(outputs[0])
    with open(path, "w") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")
    return path


def _parse_counts(text: str) -> list[int]:
    """Comma list with ranges: "3", "2,4", "5-9", "2,5-7"."""
    values: list[int] = []
    try:
        for part in text.split(","):
            part = part.strip()
            if not part:
                continue
            if "-" in part:
                lo, hi = (int(p) for p in part.split("-", 1))
                if hi < lo:
                    raise ConfigError(f"descending range {part!r}")
                values.extend(range(lo, hi + 1))
            else:
                values.append(int(part))
    except ValueError as exc:
        raise ConfigError(f"bad count list {text!r}: {exc}") from None
    if not values:
        raise ConfigError(f"empty count list {text!r}")
    return values


def _parse_overrides(entries) -> dict:
    overrides: dict = {}
    for entry in entries or ():
        key, sep, raw = entry.partition("=")
        if not sep or not key:
            raise ConfigError(f"override {entry!r} is not key=value")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"override {entry!r} has invalid JSON: {exc}") from None
        _merge_override(overrides, key, value)
    return overrides


def _merge_override(overrides: dict, key: str, value) -> None:
    if key in overrides and overrides[key] != value:
        raise ConfigError(f"contradictory values for {key!r}: {overrides[key]!r} vs {value!r}")
    overrides[key] = value


def _schedule_from_args(args, mode: str, seed: int) -> AnnealSchedule:
    if args.anneal_us is not None and args.sweeps is not None:
        raise ConfigError("give either --sweeps or --anneal-us, not both")
    kwargs = {"mode": mode, "seed": seed}
    if args.anneal_us is not None:
        kwargs["total_sweeps"] = sweeps_from_microseconds(args.anneal_us)
    if args.sweeps is not None:
        kwargs["total_sweeps"] = args.sweeps
    for flag, field in (
        ("s_target", "s_target"),
        ("hold", "hold_sweeps"),
        ("ramp", "ramp_sweeps"),
        ("temp_max", "temp_max"),
        ("temp_min", "temp_min"),
    ):
        value = getattr(args, flag)
        if value is not None:
            kwargs[field] = value
    return AnnealSchedule(**kwargs)


def _config_from_args(args, seed: int) -> TabuConfig:
    return TabuConfig(
        tenure=args.tenure,
        max_restarts=args.restarts,
        subproblem_size=args.subproblem_size,
        time_budget=args.time_budget,
        seed=seed,
    )


def _initial_bits(source: str, num_vars: int) -> np.ndarray:
    if source.startswith("best-of:"):
        return bits_from_string(load_sampleset(source[len("best-of:") :]).best().bits)
    try:
        grid = np.loadtxt(source, delimiter=",", dtype=int, ndmin=2)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read initial roster {source!r}: {exc}") from None
    bits = grid.reshape(-1)
    if bits.size != num_vars:
        raise DimensionError(f"initial roster has {bits.size} bits, expected {num_vars}")
    return bits


def cmd_generate(args) -> int:
    shifts = args.shifts
    preset = args.preset
    if preset is None:
        preset = "three-shift" if shifts == 3 else "single-shift"
    implied = 3 if preset == "three-shift" else 1
    if shifts is not None and shifts != implied:
        raise ConfigError(f"preset {preset!r} means {implied} shifts per day, not {shifts}")
    overrides = _parse_overrides(args.override)
    for key, value in (
        ("lambda", args.opt_lambda),
        ("gamma", args.opt_gamma),
        ("eta", args.opt_eta),
        ("a", args.opt_a),
    ):
        if value is not None:
            _merge_override(overrides, key, value)
    if args.dayoff:
        grid = [[0.0] * (args.days * implied) for _ in range(args.nurses)]
        for entry in args.dayoff:
            try:
                nurse, slot, weight = entry.split(",")
                grid[int(nurse)][int(slot)] = float(weight)
            except (ValueError, IndexError) as exc:
                raise ConfigError(f"bad --dayoff {entry!r}: {exc}") from None
        _merge_override(overrides, "g", grid)
    instance = preset_instance(preset, args.nurses, args.days, overrides)
    save_instance(instance, args.out)
    _write_manifest(
        args,
        [args.out],
        preset=preset,
        instance=fingerprint(instance_to_dict(instance)),
    )
    print(f"wrote {args.out}")
    return 0


def cmd_solve(args) -> int:
    instance = load_instance(args.instance)
    problem = build_qubo(instance)
    seed = args.seed if args.seed is not None else _draw_seed()
    engine = args.engine
    if engine == "reverse":
        if args.initial is None:
            raise ConfigError("--engine reverse needs --initial (path or best-of:<sampleset>)")
        bits = _initial_bits(args.initial, problem.num_vars)
        schedule = _schedule_from_args(args, "reverse", seed)
        samples = reverse_anneal(qubo_to_ising(problem), bits, schedule, args.reads, args.jobs)
    elif engine == "forward":
        samples = run_engine(
            problem,
            engine,
            num_reads=args.reads,
            schedule=_schedule_from_args(args, "forward", seed),
            jobs=args.jobs,
        )
    elif engine in ("tabu", "decompose"):
        samples = run_engine(problem, engine, config=_config_from_args(args, seed), jobs=args.jobs)
    else:
        samples = run_engine(problem, engine, jobs=args.jobs)
    save_sampleset(samples, args.out)
    outputs = [args.out]
    if args.roster_out:
        best = bits_from_string(samples.best().bits)
        save_roster(instance, best, args.roster_out)
        figure = Path(args.roster_out).with_suffix(".png")
        plot_roster(instance, best, figure)
        outputs += [args.roster_out, str(figure)]
    _write_manifest(
        args,
        outputs,
        engine=engine,
        seed=seed,
        instance=fingerprint(instance_to_dict(instance)),
        provenance=samples.provenance,
    )
    for path in outputs:
        print(f"wrote {path}")
    return 0


def cmd_stats(args) -> int:
    instance = load_instance(args.instance)
    if args.reference is not None:
        reference = best_found_reference(load_sampleset(args.reference))
        kind = "supplied"
    elif instance.num_variables <= ENUMERATION_CAP:
        reference = enumerate_ground_states(build_qubo(instance), jobs=args.jobs)
        kind = "exact"
    else:
        raise CapacityError(
            f"{instance.num_variables} variables exceed the enumeration cap "
            f"{ENUMERATION_CAP}; pass --reference"
        )
    rows = []
    for path in args.samples:
        samples = load_sampleset(path)
        report = evaluate(instance, samples, reference)
        row = dict.fromkeys(SWEEP_COLUMNS)
        row.update(
            N=instance.num_nurses,
            D=instance.num_days,
            engine=samples.provenance.get("solver"),
            num_reads=report.sample_count,
            satisfaction_frequency=report.satisfaction_frequency,
            mean_hamming=report.mean_hamming,
            std_hamming=report.std_hamming,
            mean_energy=report.mean_energy,
            best_energy=report.best_energy,
            reference_kind=kind,
            seed=samples.provenance.get("seed"),
        )
        rows.append(row)
    if str(args.out).endswith(".json"):
        with open(args.out, "w") as handle:
            json.dump(rows, handle, indent=2, sort_keys=True)
            handle.write("\n")
    else:
        write_sweep_csv(rows, args.out)
    _write_manifest(
        args,
        [args.out],
        instance=fingerprint(instance_to_dict(instance)),
        reference_kind=kind,
    )
    print(f"wrote {args.out}")
    return 0


def cmd_sweep(args) -> int:
    nurses = _parse_counts(args.nurses)
    days = _parse_counts(args.days)
    seed = args.seed if args.seed is not None else _draw_seed()
    schedule = None
    config = None
    if args.engine in ("forward", "reverse"):
        mode = "reverse" if args.engine == "reverse" else "forward"
        schedule = _schedule_from_args(args, mode, seed)
    elif args.engine in ("tabu", "decompose"):
        config = _config_from_args(args, seed)
    rows = sweep_experiment(
        nurses,
        days,
        args.engine,
        preset=args.preset,
        num_reads=args.reads,
        schedule=schedule,
        config=config,
        seed=seed,
        jobs=args.jobs,
    )
    write_sweep_csv(rows, args.out)
    outputs = [args.out]
    if not args.no_figures:
        out = Path(args.out)
        outputs += plot_sweep(rows, str(out.parent or Path(".")), out.stem)
    _write_manifest(args, outputs, engine=args.engine, seed=seed, preset=args.preset)
    for path in outputs:
        print(f"wrote {path}")
    return 0


def _add_anneal_flags(parser) -> None:
    parser.add_argument("--sweeps", type=int, help="total Metropolis sweeps per read")
    parser.add_argument(
        "--anneal-us",
        type=float,
        help="annealing time in microseconds (10 sweeps per microsecond)",
    )
    parser.add_argument("--s-target", type=float, help="reversal depth in (0, 1]")
    parser.add_argument("--hold", type=int, help="sweeps held at the reversal point")
    parser.add_argument("--ramp", type=int, help="sweeps per reverse ramp")
    parser.add_argument("--temp-max", type=float, help="hot end temperature")
    parser.add_argument("--temp-min", type=float, help="cold end temperature")


def _add_tabu_flags(parser) -> None:
    parser.add_argument("--tenure", type=int, default=10, help="tabu tenure in moves")
    parser.add_argument("--restarts", type=int, default=20, help="tabu restarts")
    parser.add_argument(
        "--subproblem-size", type=int, default=40, help="variables per decomposition window"
    )
    parser.add_argument("--time-budget", type=float, help="wall-clock budget in seconds")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nspsolve",
        description="Nurse rostering as QUBO: generate, solve, evaluate, sweep.",
    )
    parser.add_argument("--version", action="version", version=f"nspsolve {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("generate", help="write an instance JSON file")
    gen.add_argument("nurses", type=int)
    gen.add_argument("days", type=int)
    gen.add_argument("--shifts", type=int, choices=(1, 3))
    gen.add_argument("--preset", choices=PRESETS)
    gen.add_argument("--out", default="instance.json")
    gen.add_argument("--lambda", dest="opt_lambda", type=float, help="workforce penalty")
    gen.add_argument("--gamma", dest="opt_gamma", type=float, help="duty-target penalty")
    gen.add_argument("--eta", dest="opt_eta", type=float, help="day-off penalty")
    gen.add_argument("--a", dest="opt_a", type=float, help="consecutive-duty penalty")
    gen.add_argument(
        "--dayoff",
        action="append",
        metavar="NURSE,SLOT,WEIGHT",
        help="day-off request (0-based indices; repeatable)",
    )
    gen.add_argument(
        "--override",
        action="append",
        metavar="KEY=JSON",
        help="set any instance payload key (repeatable)",
    )
    gen.set_defaults(func=cmd_generate)

    solve = commands.add_parser("solve", help="run one engine on an instance")
    solve.add_argument("instance")
    solve.add_argument("--engine", required=True, choices=ENGINES)
    solve.add_argument("--out", default="samples.json")
    solve.add_argument("--reads", type=int, default=1000)
    solve.add_argument("--seed", type=int)
    solve.add_argument("--jobs", type=int, default=1)
    solve.add_argument(
        "--initial",
        help="reverse engine start: roster CSV path or best-of:<sampleset.json>",
    )
    solve.add_argument("--roster-out", help="also write the best roster as CSV and PNG")
    _add_anneal_flags(solve)
    _add_tabu_flags(solve)
    solve.set_defaults(func=cmd_solve)

    stats = commands.add_parser("stats", help="score sample sets against a reference")
    stats.add_argument("samples", nargs="+")
    stats.add_argument("--instance", required=True)
    stats.add_argument("--reference", help="sampleset JSON whose best states are the reference")
    stats.add_argument("--out", default="report.csv")
    stats.add_argument("--jobs", type=int, default=1)
    stats.set_defaults(func=cmd_stats)

    sweep = commands.add_parser("sweep", help="scan a grid of sizes and write CSV + figures")
    sweep.add_argument("--nurses", required=True, help="e.g. 3 or 2,3 or 2-4")
    sweep.add_argument("--days", required=True, help="e.g. 5-9")
    sweep.add_argument("--engine", required=True, choices=ENGINES)
    sweep.add_argument("--preset", choices=PRESETS, default="single-shift")
    sweep.add_argument("--out", default="sweep.csv")
    sweep.add_argument("--reads", type=int, default=1000)
    sweep.add_argument("--seed", type=int)
    sweep.add_argument("--jobs", type=int, default=1)
    sweep.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    _add_anneal_flags(sweep)
    _add_tabu_flags(sweep)
    sweep.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = ["nspsolve", *argv]
    try:
        return args.func(args)
    except tuple(cls for cls, _ in _ERROR_CODES) as exc:
        print(f"error: {exc}", file=sys.stderr)
        for cls, code in _ERROR_CODES:
            if isinstance(exc, cls):
                return code
        raise


if __name__ == "__main__":
    sys.exit(main())

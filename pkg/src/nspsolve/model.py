"""Nurse rosters as quadratic binary problems.

A roster assigns nurses to duty slots (one slot per day, or three shifts per
day).  The energy of a candidate roster is a weighted sum of

* a coupling that penalizes the same nurse on chronologically adjacent
  slots, including across day boundaries,
* a hard workforce term: each slot's summed effort must equal its demand,
* a hard duty-target term: each nurse's weighted duty count must equal a
  personal target,
* a soft day-off term charging a per-(nurse, slot) priority weight whenever
  a requested slot is worked anyway.

The quadratic expansion is exact, so a roster has zero energy iff it meets
every workforce and duty target, has no adjacent duties and no violated
day-off request.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DimensionError, DomainError
from .qubo import QuboProblem, as_bit_array

SCHEMA_VERSION = 1

DEFAULT_WORKFORCE_PENALTY = 1.3
DEFAULT_DUTY_PENALTY = 0.3
DEFAULT_DAYOFF_PENALTY = 0.0
DEFAULT_CONSECUTIVE_PENALTY = 3.5

# Shift-type slot weights and the weekend day multiplier of the three-shift
# roster; chosen with integer-valued weighted duty counts in mind.
THREE_SHIFT_WEIGHTS = (2.0, 3.0, 4.0)
WEEKEND_MULTIPLIER = 2.0


@dataclass(frozen=True, eq=False)
class NspInstance:
    """A roster-sizing problem plus its penalty weights.

    Arrays may be passed as scalars (broadcast) or omitted (sensible
    defaults); they are stored as float ndarrays.  ``duty_target`` defaults
    to an even split of the total weighted duty implied by the workforce
    demands, so the default instance always admits zero-energy rosters when
    the arithmetic allows one.
    """

    num_nurses: int
    num_days: int
    shifts_per_day: int = 1
    workforce_penalty: float = DEFAULT_WORKFORCE_PENALTY
    duty_penalty: float = DEFAULT_DUTY_PENALTY
    dayoff_penalty: float = DEFAULT_DAYOFF_PENALTY
    consecutive_penalty: float = DEFAULT_CONSECUTIVE_PENALTY
    effort: np.ndarray | float = 1.0
    workforce: np.ndarray | float = 1.0
    duty_target: np.ndarray | float | None = None
    nurse_weight: np.ndarray | float = 1.0
    slot_weight: np.ndarray | float = 1.0
    dayoff_priority: np.ndarray | None = None

    def __post_init__(self):
        if self.num_nurses < 1 or self.num_days < 1:
            raise ConfigError("need at least one nurse and one day")
        if self.shifts_per_day not in (1, 3):
            raise ConfigError(f"shifts_per_day must be 1 or 3, got {self.shifts_per_day}")
        for name in ("workforce_penalty", "duty_penalty", "dayoff_penalty", "consecutive_penalty"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")
        n, s = self.num_nurses, self.num_slots
        object.__setattr__(self, "effort", _as_vector(self.effort, n, "effort"))
        object.__setattr__(self, "workforce", _as_vector(self.workforce, s, "workforce"))
        object.__setattr__(self, "nurse_weight", _as_vector(self.nurse_weight, n, "nurse_weight"))
        object.__setattr__(self, "slot_weight", _as_vector(self.slot_weight, s, "slot_weight"))
        if self.duty_target is None:
            target = default_duty_targets(n, self.workforce, self.slot_weight, self.nurse_weight)
        else:
            target = _as_vector(self.duty_target, n, "duty_target")
        object.__setattr__(self, "duty_target", target)
        floor_share = self.num_days // self.num_nurses
        if (self.duty_target < floor_share - 1e-9).any():
            raise ConfigError(f"duty targets must be at least {floor_share} (the guaranteed floor share)")
        if self.dayoff_priority is None:
            prio = np.zeros((n, s))
        else:
            prio = np.asarray(self.dayoff_priority, dtype=float)
            if prio.shape != (n, s):
                raise DimensionError(f"dayoff_priority must have shape ({n}, {s}), got {prio.shape}")
            if (prio < 0).any():
                raise DomainError("day-off priorities must be non-negative")
        object.__setattr__(self, "dayoff_priority", prio)

    @property
    def num_slots(self) -> int:
        return self.num_days * self.shifts_per_day

    @property
    def num_variables(self) -> int:
        return self.num_nurses * self.num_slots


def _as_vector(value, length: int, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = np.full(length, float(arr))
    if arr.shape != (length,):
        raise DimensionError(f"{name} must have length {length}, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise DomainError(f"{name} contains non-finite values")
    return arr


def default_duty_targets(num_nurses, workforce, slot_weight, nurse_weight) -> np.ndarray:
    """Even split of the total weighted duty implied by the demands.

    The demands pin the weighted duty sum to R = sum_k slot_weight_k *
    workforce_k (assuming unit effort, as in every preset).  An integral R
    is split as evenly as integers allow, lower nurse indices taking the
    remainder; otherwise every nurse gets the exact fractional share.  The
    share is scaled by each nurse's own weight so the targets stay mutually
    consistent.
    """
    total = float(np.asarray(slot_weight) @ np.asarray(workforce))
    n = num_nurses
    if abs(total - round(total)) < 1e-9:
        total = int(round(total))
        shares = np.full(n, total // n, dtype=float)
        shares[: total % n] += 1.0
    else:
        shares = np.full(n, total / n)
    return shares * np.asarray(nurse_weight, dtype=float)


def slot_index(instance: NspInstance, day: int, shift: int = 0) -> int:
    """Chronological slot number of (day, shift)."""
    if not 0 <= day < instance.num_days:
        raise IndexError(f"day {day} out of range")
    if not 0 <= shift < instance.shifts_per_day:
        raise IndexError(f"shift {shift} out of range")
    return day * instance.shifts_per_day + shift


def variable_index(instance: NspInstance, nurse: int, day: int, shift: int = 0) -> int:
    """Row-major binary variable index of nurse/day/shift."""
    if not 0 <= nurse < instance.num_nurses:
        raise IndexError(f"nurse {nurse} out of range")
    return nurse * instance.num_slots + slot_index(instance, day, shift)


@dataclass(frozen=True, eq=False)
class Schedule:
    """A candidate roster: one bit per (nurse, slot)."""

    instance: NspInstance
    bits: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "bits", as_bit_array(self.bits, self.instance.num_variables))

    def grid(self) -> np.ndarray:
        """(num_nurses, num_slots) duty matrix view of the bits."""
        return self.bits.reshape(self.instance.num_nurses, self.instance.num_slots)


def _duty_grid(instance: NspInstance, schedule) -> np.ndarray:
    bits = schedule.bits if isinstance(schedule, Schedule) else schedule
    bits = as_bit_array(bits, instance.num_variables)
    return bits.reshape(instance.num_nurses, instance.num_slots)


def decode(instance: NspInstance, schedule) -> np.ndarray:
    """Duty matrix (rows nurses, columns chronological slots) of a schedule."""
    return _duty_grid(instance, schedule).copy()


def encode(instance: NspInstance, grid) -> Schedule:
    """Inverse of decode: pack a duty matrix back into a Schedule."""
    arr = np.asarray(grid)
    if arr.shape != (instance.num_nurses, instance.num_slots):
        raise DimensionError(
            f"grid must have shape ({instance.num_nurses}, {instance.num_slots}), got {arr.shape}"
        )
    return Schedule(instance, arr.reshape(-1))


def build_qubo(instance: NspInstance) -> QuboProblem:
    """Expand the roster energy into an upper-triangular QUBO.

    Terms with an exactly zero accumulated coefficient are dropped, so e.g.
    a zero workforce penalty contributes nothing at all.
    """
    n, s = instance.num_nurses, instance.num_slots
    coeffs: dict[tuple[int, int], float] = {}
    offset = 0.0

    def add(i: int, j: int, c: float) -> None:
        key = (i, j) if i <= j else (j, i)
        coeffs[key] = coeffs.get(key, 0.0) + c

    a = instance.consecutive_penalty
    if a:
        for nurse in range(n):
            base = nurse * s
            for k in range(s - 1):
                add(base + k, base + k + 1, a)

    lam = instance.workforce_penalty
    if lam:
        # lam * (sum_n E_n q_nk - W_k)^2 per slot
        e = instance.effort
        for k in range(s):
            demand = instance.workforce[k]
            for i in range(n):
                add(i * s + k, i * s + k, lam * (e[i] ** 2 - 2.0 * demand * e[i]))
                for j in range(i + 1, n):
                    add(i * s + k, j * s + k, 2.0 * lam * e[i] * e[j])
            offset += lam * demand**2

    gam = instance.duty_penalty
    if gam:
        # gam * (h1_n * sum_k h2_k q_nk - F_n)^2 per nurse
        for nurse in range(n):
            w = instance.nurse_weight[nurse] * instance.slot_weight
            target = instance.duty_target[nurse]
            base = nurse * s
            for k in range(s):
                add(base + k, base + k, gam * (w[k] ** 2 - 2.0 * target * w[k]))
                for k2 in range(k + 1, s):
                    add(base + k, base + k2, 2.0 * gam * w[k] * w[k2])
            offset += gam * target**2

    eta = instance.dayoff_penalty
    if eta:
        prio = instance.dayoff_priority
        for nurse in range(n):
            for k in range(s):
                if prio[nurse, k]:
                    add(nurse * s + k, nurse * s + k, eta * prio[nurse, k])

    coeffs = {key: c for key, c in sorted(coeffs.items()) if c != 0.0}
    return QuboProblem(instance.num_variables, coeffs, offset)


def term_energies(instance: NspInstance, schedule) -> dict[str, float]:
    """Energy of each model term, evaluated directly from the duty matrix.

    Sums to the QUBO energy of the same bits; computed independently of
    build_qubo so the two can cross-check each other.
    """
    grid = _duty_grid(instance, schedule).astype(float)
    consecutive = instance.consecutive_penalty * float((grid[:, :-1] * grid[:, 1:]).sum())
    slot_load = instance.effort @ grid
    workforce = instance.workforce_penalty * float(((slot_load - instance.workforce) ** 2).sum())
    duty_counts = instance.nurse_weight * (grid @ instance.slot_weight)
    duty = instance.duty_penalty * float(((duty_counts - instance.duty_target) ** 2).sum())
    dayoff = instance.dayoff_penalty * float((instance.dayoff_priority * grid).sum())
    return {"consecutive": consecutive, "workforce": workforce, "duty": duty, "dayoff": dayoff}


@dataclass(frozen=True)
class ConstraintReport:
    """Structural satisfaction summary of one schedule."""

    workforce_ok: bool
    duty_ok: bool
    consecutive_ok: bool
    violated_slots: tuple[int, ...]
    violated_nurses: tuple[int, ...]
    consecutive_pairs: tuple[tuple[int, int], ...]
    dayoff_charge: float


def check_constraints(instance: NspInstance, schedule, tol: float = 1e-9) -> ConstraintReport:
    """Check each constraint family directly on the duty matrix."""
    grid = _duty_grid(instance, schedule).astype(float)
    slot_load = instance.effort @ grid
    bad_slots = tuple(int(k) for k in np.nonzero(np.abs(slot_load - instance.workforce) > tol)[0])
    duty_counts = instance.nurse_weight * (grid @ instance.slot_weight)
    bad_nurses = tuple(int(n) for n in np.nonzero(np.abs(duty_counts - instance.duty_target) > tol)[0])
    pair_hits = np.nonzero(grid[:, :-1] * grid[:, 1:])
    pairs = tuple((int(n), int(k)) for n, k in zip(*pair_hits))
    charge = instance.dayoff_penalty * float((instance.dayoff_priority * grid).sum())
    return ConstraintReport(
        workforce_ok=not bad_slots,
        duty_ok=not bad_nurses,
        consecutive_ok=not pairs,
        violated_slots=bad_slots,
        violated_nurses=bad_nurses,
        consecutive_pairs=pairs,
        dayoff_charge=charge,
    )


def is_fully_satisfying(instance: NspInstance, schedule) -> bool:
    """True when every workforce, duty-target and adjacency constraint holds.

    Day-off requests are preferences, not constraints, so they do not count
    against full satisfaction.
    """
    report = check_constraints(instance, schedule)
    return report.workforce_ok and report.duty_ok and report.consecutive_ok


# -- serialization -----------------------------------------------------------


def instance_to_dict(instance: NspInstance) -> dict:
    """JSON-ready form using the compact schema keys."""
    payload = {
        "version": SCHEMA_VERSION,
        "N": instance.num_nurses,
        "D": instance.num_days,
        "shifts_per_day": instance.shifts_per_day,
        "lambda": instance.workforce_penalty,
        "gamma": instance.duty_penalty,
        "eta": instance.dayoff_penalty,
        "a": instance.consecutive_penalty,
        "E": instance.effort.tolist(),
        "W": instance.workforce.tolist(),
        "F": instance.duty_target.tolist(),
        "h1": instance.nurse_weight.tolist(),
        "h2": instance.slot_weight.tolist(),
    }
    if instance.dayoff_priority.any():
        payload["g"] = instance.dayoff_priority.tolist()
    return payload


def instance_from_dict(payload: dict) -> NspInstance:
    """Rebuild an instance from its JSON-ready form.

    ``h2`` may be a per-slot list (or scalar) or a factored form
    ``{"alpha": per-day multipliers, "shift": per-shift weights}``.
    """
    data = dict(payload)
    data.pop("version", None)
    try:
        num_nurses = int(data.pop("N"))
        num_days = int(data.pop("D"))
    except KeyError as missing:
        raise ConfigError(f"instance payload lacks required key {missing}") from None
    shifts = int(data.pop("shifts_per_day", 1))
    slot_weight = data.pop("h2", 1.0)
    if isinstance(slot_weight, dict):
        try:
            alpha = _as_vector(slot_weight["alpha"], num_days, "alpha")
            per_shift = _as_vector(slot_weight["shift"], shifts, "shift weights")
        except KeyError as missing:
            raise ConfigError(f"factored h2 lacks key {missing}") from None
        slot_weight = np.repeat(alpha, shifts) * np.tile(per_shift, num_days)
    dayoff = data.pop("g", None)
    if dayoff is not None:
        dayoff = np.asarray(dayoff, dtype=float)
    kwargs = {}
    for key, field_name in (
        ("lambda", "workforce_penalty"),
        ("gamma", "duty_penalty"),
        ("eta", "dayoff_penalty"),
        ("a", "consecutive_penalty"),
    ):
        if key in data:
            kwargs[field_name] = float(data.pop(key))
    for key, field_name in (("E", "effort"), ("W", "workforce"), ("F", "duty_target"), ("h1", "nurse_weight")):
        if key in data:
            kwargs[field_name] = data.pop(key)
    if data:
        raise ConfigError(f"unknown instance keys: {sorted(data)}")
    return NspInstance(
        num_nurses=num_nurses,
        num_days=num_days,
        shifts_per_day=shifts,
        slot_weight=slot_weight,
        dayoff_priority=dayoff,
        **kwargs,
    )


def save_instance(instance: NspInstance, path) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(instance), indent=2, sort_keys=True) + "\n")


def load_instance(path) -> NspInstance:
    return instance_from_dict(json.loads(Path(path).read_text()))


def save_roster(instance: NspInstance, schedule, path) -> None:
    """Write the duty matrix as CSV: one row per nurse, one column per slot."""
    grid = _duty_grid(instance, schedule)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        for row in grid:
            writer.writerow(row.tolist())


# -- presets -----------------------------------------------------------------

PRESETS = ("single-shift", "three-shift")


def preset_dict(name: str, num_nurses: int, num_days: int) -> dict:
    """Payload (instance_from_dict form) of a named parameter preset."""
    if name == "single-shift":
        return {
            "version": SCHEMA_VERSION,
            "N": num_nurses,
            "D": num_days,
            "shifts_per_day": 1,
            "lambda": DEFAULT_WORKFORCE_PENALTY,
            "gamma": DEFAULT_DUTY_PENALTY,
            "eta": 0.0,
            "a": DEFAULT_CONSECUTIVE_PENALTY,
            "E": 1.0,
            "W": 1.0,
            "h1": 1.0,
            "h2": 1.0,
        }
    if name == "three-shift":
        alpha = [WEEKEND_MULTIPLIER if day % 7 in (5, 6) else 1.0 for day in range(num_days)]
        return {
            "version": SCHEMA_VERSION,
            "N": num_nurses,
            "D": num_days,
            "shifts_per_day": 3,
            "lambda": DEFAULT_WORKFORCE_PENALTY,
            "gamma": DEFAULT_DUTY_PENALTY,
            "eta": 0.2,
            "a": DEFAULT_CONSECUTIVE_PENALTY,
            "E": 1.0,
            "W": 1.0,
            "h1": 1.0,
            "h2": {"alpha": alpha, "shift": list(THREE_SHIFT_WEIGHTS)},
        }
    raise ConfigError(f"unknown preset {name!r}; expected one of {PRESETS}")


def preset_instance(name: str, num_nurses: int, num_days: int, overrides: dict | None = None) -> NspInstance:
    """Build a preset instance, optionally merging override payload keys."""
    payload = preset_dict(name, num_nurses, num_days)
    for key, value in (overrides or {}).items():
        if key in ("N", "D", "shifts_per_day", "version"):
            raise ConfigError(f"preset shape key {key!r} cannot be overridden")
        payload[key] = value
    return instance_from_dict(payload)

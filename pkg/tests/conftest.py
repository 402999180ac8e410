"""Shared helpers for randomized tests."""

import numpy as np

from nspsolve.model import NspInstance
from nspsolve.qubo import QuboProblem


def random_qubo(rng, num_vars, density=0.5):
    """Random sparse QUBO with gaussian coefficients."""
    coeffs = {}
    for i in range(num_vars):
        for j in range(i, num_vars):
            if rng.random() < density:
                coeffs[(i, j)] = float(rng.normal(scale=2.0))
    return QuboProblem(num_vars, coeffs, offset=float(rng.normal()))


def random_instance(rng, max_nurses=4, max_days=5):
    """Random roster instance with occasionally degenerate penalty weights."""
    n = int(rng.integers(1, max_nurses + 1))
    d = int(rng.integers(1, max_days + 1))
    shifts = int(rng.choice([1, 3]))
    num_slots = d * shifts
    dayoff = None
    if rng.random() < 0.5:
        dayoff = rng.integers(0, 3, size=(n, num_slots)) * rng.random((n, num_slots))
    return NspInstance(
        num_nurses=n,
        num_days=d,
        shifts_per_day=shifts,
        workforce_penalty=float(rng.choice([0.0, 1.3, rng.uniform(0.1, 3.0)])),
        duty_penalty=float(rng.choice([0.0, 0.3, rng.uniform(0.1, 1.0)])),
        dayoff_penalty=float(rng.choice([0.0, 0.2])),
        consecutive_penalty=float(rng.choice([0.0, 3.5, rng.uniform(0.5, 5.0)])),
        effort=rng.choice([1.0, 2.0], size=n),
        workforce=rng.integers(1, 3, size=num_slots).astype(float),
        duty_target=d // n + rng.integers(0, 3, size=n).astype(float),
        nurse_weight=rng.choice([1.0, 2.0], size=n),
        slot_weight=rng.choice([1.0, 1.5, 2.0], size=num_slots),
        dayoff_priority=dayoff,
    )

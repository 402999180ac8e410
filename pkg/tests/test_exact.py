"""Tests for exhaustive enumeration against naive brute force."""

import itertools
import math

import numpy as np
import pytest
from conftest import random_qubo

from nspsolve.errors import CapacityError
from nspsolve.exact import all_energies, enumerate_ground_states, min_energy_under
from nspsolve.model import NspInstance, build_qubo, is_fully_satisfying
from nspsolve.qubo import QuboProblem, energy_qubo


def brute_force(problem, tol=1e-9):
    """Reference: evaluate every assignment one by one."""
    best = math.inf
    table = {}
    for bits in itertools.product((0, 1), repeat=problem.num_vars):
        e = energy_qubo(problem, bits)
        table["".join(map(str, bits))] = e
        best = min(best, e)
    states = sorted(s for s, e in table.items() if e <= best + tol)
    return best, states


class TestEnumerateGroundStates:
    def test_pair_instance_ground_set(self):
        qubo = build_qubo(NspInstance(1, 2))
        result = enumerate_ground_states(qubo)
        assert result.energy == pytest.approx(1.6)
        assert result.bit_strings() == ["01", "10"]
        assert result.search_space_size == 4

    def test_states_sorted_lexicographically(self):
        rng = np.random.default_rng(0)
        qubo = random_qubo(rng, 6)
        result = enumerate_ground_states(qubo)
        strings = result.bit_strings()
        assert strings == sorted(strings)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(21)
        for _ in range(40):
            n = int(rng.integers(1, 11))
            qubo = random_qubo(rng, n, density=0.6)
            expect_energy, expect_states = brute_force(qubo)
            result = enumerate_ground_states(qubo, block_bits=4)
            assert result.energy == pytest.approx(expect_energy, abs=1e-9)
            assert result.bit_strings() == expect_states

    def test_fully_degenerate_problem(self):
        result = enumerate_ground_states(QuboProblem(3, {}, offset=5.0))
        assert result.energy == pytest.approx(5.0)
        assert len(result) == 8

    def test_near_ties_within_tolerance_are_kept(self):
        qubo = QuboProblem(2, {(0, 0): -1.0, (1, 1): -1.0 + 5e-13, (0, 1): 10.0})
        result = enumerate_ground_states(qubo)
        assert result.bit_strings() == ["01", "10"]

    def test_partition_independence(self):
        rng = np.random.default_rng(9)
        qubo = random_qubo(rng, 12, density=0.4)
        baseline = enumerate_ground_states(qubo)
        for block_bits in (3, 7, 12):
            for jobs in (1, 3):
                other = enumerate_ground_states(qubo, jobs=jobs, block_bits=block_bits)
                assert other.energy == pytest.approx(baseline.energy, abs=1e-9)
                assert other.bit_strings() == baseline.bit_strings()

    def test_ground_states_of_roster_are_satisfying(self):
        inst = NspInstance(3, 4)
        result = enumerate_ground_states(build_qubo(inst))
        assert result.energy == pytest.approx(0.0, abs=1e-9)
        assert all(is_fully_satisfying(inst, s) for s in result.states)

    def test_capacity_cap(self):
        with pytest.raises(CapacityError):
            enumerate_ground_states(QuboProblem(30, {}))
        with pytest.raises(CapacityError):
            enumerate_ground_states(QuboProblem(10, {}), max_vars=8)


class TestMinEnergyUnder:
    def test_clamped_minimum(self):
        qubo = build_qubo(NspInstance(1, 2))
        result = min_energy_under(qubo, lambda bits: bits[0] == 1)
        assert result.energy == pytest.approx(1.6)
        assert result.bit_strings() == ["10"]

    def test_empty_feasible_set(self):
        qubo = build_qubo(NspInstance(1, 2))
        result = min_energy_under(qubo, lambda bits: False)
        assert result.energy == math.inf
        assert result.states == ()
        assert result.search_space_size == 4

    def test_trivial_predicate_matches_enumeration(self):
        rng = np.random.default_rng(33)
        qubo = random_qubo(rng, 8)
        full = enumerate_ground_states(qubo)
        under = min_energy_under(qubo, lambda bits: True, block_bits=5)
        assert under.energy == pytest.approx(full.energy, abs=1e-9)
        assert under.bit_strings() == full.bit_strings()

    def test_predicate_sees_correct_bits(self):
        qubo = QuboProblem(3, {(0, 0): 1.0, (1, 1): 1.0, (2, 2): 1.0})
        result = min_energy_under(qubo, lambda bits: int(bits.sum()) == 2, block_bits=2)
        assert result.energy == pytest.approx(2.0)
        assert result.bit_strings() == ["011", "101", "110"]


class TestAllEnergies:
    def test_matches_pointwise_evaluation(self):
        rng = np.random.default_rng(17)
        qubo = random_qubo(rng, 7)
        table = all_energies(qubo)
        assert table.shape == (128,)
        for m, bits in enumerate(itertools.product((0, 1), repeat=7)):
            assert table[m] == pytest.approx(energy_qubo(qubo, bits), abs=1e-9)

    def test_respects_cap(self):
        with pytest.raises(CapacityError):
            all_energies(QuboProblem(25, {}))

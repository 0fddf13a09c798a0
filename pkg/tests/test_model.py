"""Unit tests for the vector/projection/threshold-detection primitives."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bellsim import (
    AnalyzerAxis,
    GateMemory,
    PairSourceConfig,
    PolarizationVector,
    emit_pair,
    gate_step,
    project,
    station_measure,
)

angles_st = st.floats(-10.0, 10.0, allow_nan=False)
moduli_st = st.floats(0.0, 10.0, allow_nan=False)


class TestProject:
    def test_parallel_axis_is_identity(self):
        out = project(PolarizationVector(1.0, 0.0), AnalyzerAxis(0.0))
        assert out.modulus == 1.0
        assert out.angle == 0.0

    def test_orthogonal_axes_are_exclusive(self):
        out = project(PolarizationVector(1.0, 0.0), AnalyzerAxis(math.pi / 2))
        assert out.modulus == pytest.approx(0.0, abs=1e-15)
        assert out.angle == math.pi / 2

    def test_sixty_degree_projection(self):
        # direct evaluation: 2 * |cos(pi/3)| = 1
        out = project(PolarizationVector(2.0, math.pi / 3), AnalyzerAxis(0.0))
        assert out.modulus == pytest.approx(1.0, abs=1e-12)
        assert out.angle == 0.0

    def test_input_unchanged(self):
        vec = PolarizationVector(2.0, 1.0)
        project(vec, AnalyzerAxis(0.3))
        assert vec.modulus == 2.0 and vec.angle == 1.0

    @given(moduli_st, angles_st, angles_st)
    def test_idempotent(self, modulus, vec_angle, axis_angle):
        axis = AnalyzerAxis(axis_angle)
        once = project(PolarizationVector(modulus, vec_angle), axis)
        twice = project(once, axis)
        assert twice.modulus == pytest.approx(once.modulus, rel=1e-12, abs=1e-15)
        assert twice.angle == once.angle

    @given(moduli_st, angles_st, angles_st)
    def test_energy_split(self, modulus, vec_angle, axis_angle):
        vec = PolarizationVector(modulus, vec_angle)
        axis = AnalyzerAxis(axis_angle)
        e1 = project(vec, axis).energy
        e2 = project(vec, axis.orthogonal()).energy
        assert e1 + e2 == pytest.approx(vec.energy, rel=1e-12, abs=1e-12)

    def test_composition_not_commutative(self):
        vec = PolarizationVector(1.0, 0.0)
        a = AnalyzerAxis(math.pi / 8)
        b = AnalyzerAxis(3 * math.pi / 8)
        ab = project(project(vec, a), b)
        ba = project(project(vec, b), a)
        assert ab.angle != ba.angle
        assert ab.modulus != pytest.approx(ba.modulus, abs=1e-6)

    @given(moduli_st, angles_st, angles_st)
    def test_composition_commutes_only_degenerately(self, modulus, a_angle, b_angle):
        vec = PolarizationVector(modulus, 0.3)
        a, b = AnalyzerAxis(a_angle), AnalyzerAxis(b_angle)
        ab = project(project(vec, a), b)
        ba = project(project(vec, b), a)
        if abs(ab.modulus - ba.modulus) > 1e-9 * max(1.0, vec.modulus):
            assert a.angle != b.angle
            assert project(vec, a).modulus > 0 or project(vec, b).modulus > 0

    def test_negative_modulus_rejected(self):
        with pytest.raises(ValueError):
            PolarizationVector(-0.1, 0.0)

    def test_angle_canonicalized(self):
        assert PolarizationVector(1.0, math.pi).angle == 0.0
        assert PolarizationVector(1.0, -math.pi / 4).angle == pytest.approx(3 * math.pi / 4)
        assert AnalyzerAxis(2 * math.pi).angle == 0.0


class TestEmitPair:
    def test_components_identical(self, rng):
        source = PairSourceConfig(seed=7)
        for _ in range(100):
            va, vb = emit_pair(source, rng)
            assert va.modulus == vb.modulus
            assert va.angle == vb.angle

    def test_deterministic_for_fixed_seed(self):
        draws1 = []
        draws2 = []
        for draws in (draws1, draws2):
            gen = np.random.default_rng(123)
            source = PairSourceConfig(seed=123)
            for _ in range(50):
                va, _ = emit_pair(source, gen)
                draws.append((va.modulus, va.angle))
        assert draws1 == draws2

    def test_angle_histogram_uniform(self):
        # chi-square against the uniform law on [0, pi), 4-sigma band
        gen = np.random.default_rng(2024)
        source = PairSourceConfig(seed=2024)
        n, bins = 100_000, 40
        angles = np.array([emit_pair(source, gen)[0].angle for _ in range(n)])
        assert np.all((0.0 <= angles) & (angles < math.pi))
        observed, _ = np.histogram(angles, bins=bins, range=(0.0, math.pi))
        expected = n / bins
        chi2 = float(np.sum((observed - expected) ** 2 / expected))
        df = bins - 1
        assert chi2 < df + 4.0 * math.sqrt(2.0 * df)

    def test_unpolarized_cos2_average(self):
        # time average of cos^2(v - alpha) is 1/2 for any fixed alpha
        gen = np.random.default_rng(5)
        source = PairSourceConfig(seed=5)
        angles = np.array([emit_pair(source, gen)[0].angle for _ in range(50_000)])
        for alpha in (0.0, 0.3, math.pi / 2):
            avg = float(np.mean(np.cos(angles - alpha) ** 2))
            assert avg == pytest.approx(0.5, abs=0.01)

    def test_constant_modulus_law(self, rng):
        source = PairSourceConfig(seed=1, modulus=2.5)
        va, _ = emit_pair(source, rng)
        assert va.modulus == 2.5

    def test_unknown_laws_rejected(self):
        with pytest.raises(ValueError):
            PairSourceConfig(seed=1, angle_law="vonmises")
        with pytest.raises(ValueError):
            PairSourceConfig(seed=1, modulus_law="exponential")


class TestGateStep:
    def test_fires_and_subtracts(self):
        mem, fired = gate_step(GateMemory(0.9, 1.0), 0.2)
        assert fired
        assert mem.accumulator == pytest.approx(0.1, abs=1e-12)

    def test_zero_energy_no_fire(self):
        mem, fired = gate_step(GateMemory(0.0, 1.0), 0.0)
        assert not fired
        assert mem.accumulator == 0.0

    def test_half_threshold_stream_fires_every_second_step(self):
        mem = GateMemory(0.0, 1.0)
        fires = []
        for _ in range(10):
            mem, fired = gate_step(mem, 0.5)
            fires.append(fired)
        assert fires == [False, True] * 5

    def test_single_deposit_above_threshold_fires_once(self):
        mem, fired = gate_step(GateMemory(0.0, 1.0), 2.5)
        assert fired
        assert mem.accumulator == pytest.approx(1.5)

    def test_negative_energy_rejected(self):
        with pytest.raises(ValueError):
            gate_step(GateMemory(0.0, 1.0), -1e-9)

    @given(
        st.floats(0.0, 0.999, allow_nan=False),
        st.lists(st.floats(0.0, 1.0, allow_nan=False), min_size=1, max_size=200),
    )
    @settings(max_examples=200)
    def test_firing_count_is_total_energy_over_threshold(self, start, energies):
        # with deposits bounded by u, firings = floor((acc0 + sum) / u),
        # which is within one of sum/u either way
        mem = GateMemory(start, 1.0)
        count = 0
        for e in energies:
            mem, fired = gate_step(mem, e)
            count += int(fired)
            assert 0.0 <= mem.accumulator < 1.0 + 1e-9
        total = sum(energies)
        assert count in {math.floor(total), math.ceil(total)}


class TestStationMeasure:
    def test_aligned_vector_fires_plus(self):
        outcome, axis, mem_p, mem_m = station_measure(
            PolarizationVector(1.0, 0.0),
            AnalyzerAxis(0.0),
            GateMemory(0.5, 1.0),
            GateMemory(0.5, 1.0),
        )
        assert outcome == 1
        assert axis.angle == 0.0
        assert mem_p.accumulator == pytest.approx(0.5)
        assert mem_m.accumulator == pytest.approx(0.5)  # zero energy into -1 gate

    def test_diagonal_vector_no_fire(self):
        outcome, axis, mem_p, mem_m = station_measure(
            PolarizationVector(1.0, math.pi / 4),
            AnalyzerAxis(0.0),
            GateMemory(0.0, 1.0),
            GateMemory(0.0, 1.0),
        )
        assert outcome == 0
        assert axis is None
        assert mem_p.accumulator == pytest.approx(0.5)
        assert mem_m.accumulator == pytest.approx(0.5)

    def test_minus_gate_fires(self):
        outcome, axis, _, _ = station_measure(
            PolarizationVector(1.0, math.pi / 2),
            AnalyzerAxis(0.0),
            GateMemory(0.5, 1.0),
            GateMemory(0.5, 1.0),
        )
        assert outcome == -1
        assert axis.angle == pytest.approx(math.pi / 2)

    def test_both_fire_resolves_to_larger_accumulator(self):
        # custom modulus makes both gates cross in one step
        vec = PolarizationVector(math.sqrt(2.0), math.pi / 4)  # energy 1 in each gate
        outcome, axis, _, _ = station_measure(
            vec, AnalyzerAxis(0.0), GateMemory(0.2, 1.0), GateMemory(0.3, 1.0)
        )
        assert outcome == -1
        assert axis.angle == pytest.approx(math.pi / 2)

    def test_both_fire_tie_goes_to_plus(self):
        vec = PolarizationVector(math.sqrt(2.0), math.pi / 4)
        outcome, axis, _, _ = station_measure(
            vec, AnalyzerAxis(0.0), GateMemory(0.25, 1.0), GateMemory(0.25, 1.0)
        )
        assert outcome == 1
        assert axis.angle == 0.0

    def test_unpolarized_run_splits_detections_evenly(self, rng):
        mem_p = GateMemory(0.3, 1.0)
        mem_m = GateMemory(0.7, 1.0)
        n_plus = n_det = 0
        for _ in range(20_000):
            vec = PolarizationVector(1.0, rng.uniform(0.0, math.pi))
            outcome, _, mem_p, mem_m = station_measure(vec, AnalyzerAxis(0.9), mem_p, mem_m)
            if outcome != 0:
                n_det += 1
                n_plus += outcome == 1
        assert n_plus / n_det == pytest.approx(0.5, abs=4 * 0.5 / math.sqrt(n_det))

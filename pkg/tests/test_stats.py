"""Estimator tests: counts, correlators, CHSH, CH, and the angle scan."""

import math

import numpy as np
import pytest

from bellsim import (
    CoincidenceCounts,
    ch,
    chsh,
    coincidence_rate_pp,
    correlator,
    count_coincidences,
    curve_scan,
    run,
    singles_plus_fraction,
)
from bellsim.stats import CHSH_PAIRINGS, default_scan_config
from conftest import CH_ANGLES, block_log_from_pairs, make_config, reference_block_pairs, s4_block_pairs

from oracles import chsh_direct_sum


class TestCountCoincidences:
    def test_constant_plus_plus(self):
        pairs = [[(1, 1)] * 3 for _ in range(4)]
        counts = count_coincidences(block_log_from_pairs(pairs))
        assert set(counts) == set(CHSH_PAIRINGS)
        for c in counts.values():
            assert c.n_pp == c.n_total == 3
            assert c.n_pm == c.n_mp == c.n_mm == c.n_zero == 0

    def test_partition_respects_schedule(self):
        n = 40_000
        log = run(make_config(n, seed=2))
        counts = count_coincidences(log)
        assert sum(c.n_total for c in counts.values()) == n
        for c in counts.values():
            assert c.n_total == n // 4
            assert c.n_pp + c.n_pm + c.n_mp + c.n_mm + c.n_zero == c.n_total

    def test_absent_pairings_are_omitted(self):
        log = run(make_config(1000, seed=2, schedule="constant"))
        counts = count_coincidences(log)
        assert set(counts) == {("alpha", "beta")}

    def test_zero_outcomes_counted_apart(self):
        pairs = [[(0, 1), (1, 1)] for _ in range(4)]
        counts = count_coincidences(block_log_from_pairs(pairs))
        for c in counts.values():
            assert c.n_zero == 1
            assert c.n_pp == 1
            assert c.n_coincident == 1

    def test_quantum_rate_at_pi_eighth(self):
        n = 400_000
        config = make_config(
            n, seed=31, angles=(math.pi / 8, 0.0, 0.0, 0.0), schedule="constant"
        )
        counts = count_coincidences(run(config))[("alpha", "beta")]
        assert counts.n_pp / n == pytest.approx(math.cos(math.pi / 8) ** 2 / 2, abs=0.004)


class TestCorrelator:
    def test_perfect_correlation(self):
        assert correlator(CoincidenceCounts(5, 0, 0, 5, 0, 10)) == 1.0

    def test_perfect_anticorrelation(self):
        assert correlator(CoincidenceCounts(0, 5, 5, 0, 0, 10)) == -1.0

    def test_all_zero_partition_rejected(self):
        with pytest.raises(ValueError):
            correlator(CoincidenceCounts(0, 0, 0, 0, 7, 7))

    @pytest.mark.parametrize("delta", [0.0, math.pi / 8, math.pi / 4])
    def test_cosine_law(self, delta):
        n = 200_000
        config = make_config(
            n, seed=40 + int(delta * 100), angles=(delta, 0.0, 0.0, 0.0), schedule="constant"
        )
        counts = count_coincidences(run(config))[("alpha", "beta")]
        assert correlator(counts) == pytest.approx(math.cos(2 * delta), abs=0.01)


class TestChsh:
    def test_reference_table_series_give_s_two(self):
        log = block_log_from_pairs(reference_block_pairs())
        result = chsh(log)
        assert result.e[("alpha", "beta")] == 1.0
        assert result.e[("alpha", "beta'")] == -1.0
        assert result.e[("alpha'", "beta")] == 0.0
        assert result.e[("alpha'", "beta'")] == 0.0
        assert result.s == 2.0

    def test_s4_table_pairings_give_s_four(self):
        result = chsh(block_log_from_pairs(s4_block_pairs()))
        assert result.s == 4.0

    def test_missing_pairing_rejected(self):
        log = run(make_config(100, seed=2, schedule="constant"))
        with pytest.raises(ValueError):
            chsh(log)

    def test_quantum_value_at_optimal_angles(self):
        result = chsh(run(make_config(400_000, seed=77)))
        assert result.s == pytest.approx(2 * math.sqrt(2), abs=0.03)

    def test_estimator_matches_direct_sums_on_aligned_series(self, rng):
        # when all four series share one index set, the per-pairing estimator
        # with equal block lengths equals the literal shared-index sums
        for _ in range(50):
            m = int(rng.integers(1, 21))
            a, b, ap, bp = (rng.choice([-1, 1], m) for _ in range(4))
            log = block_log_from_pairs(
                [list(zip(a, bp)), list(zip(a, b)), list(zip(ap, b)), list(zip(ap, bp))]
            )
            assert chsh(log).s == pytest.approx(chsh_direct_sum(a, b, ap, bp), abs=1e-12)

    def test_arithmetic_bound_s_at_most_four(self, rng):
        for _ in range(50):
            m = int(rng.integers(1, 30))
            pairs = [
                list(zip(rng.choice([-1, 1], m), rng.choice([-1, 1], m)))
                for _ in range(4)
            ]
            result = chsh(block_log_from_pairs(pairs))
            assert all(abs(e) <= 1.0 for e in result.e.values())
            assert result.s <= 4.0


class TestCh:
    def test_all_zero_series_give_zero(self):
        pairs = [[(0, 0)] * 2 for _ in range(4)]
        assert ch(block_log_from_pairs(pairs)).j == 0.0

    def test_quantum_violation_at_optimal_labeling(self):
        result = ch(run(make_config(400_000, seed=99, angles=CH_ANGLES)))
        assert result.j == pytest.approx((2 * math.sqrt(2) - 2) / 4, abs=0.01)
        assert result.j > 0.0

    def test_violation_regression_value(self):
        # engine-derived golden value for a pinned seed
        result = ch(run(make_config(100_000, seed=99, angles=CH_ANGLES)))
        assert result.j == pytest.approx(0.21082, abs=1e-5)

    def test_no_violation_without_instruction(self):
        result = ch(run(make_config(200_000, seed=98, angles=CH_ANGLES, contextual=False)))
        assert result.j < 0.0


class TestCurveScan:
    def test_endpoints_and_quarter_turn(self):
        base = default_scan_config(150_000, seed=5)
        points = curve_scan(base, [0.0, math.pi / 4, math.pi / 2])
        by_delta = {p.delta: p for p in points}
        assert by_delta[0.0].rate_on == pytest.approx(0.5, abs=0.005)
        assert by_delta[0.0].rate_off == pytest.approx(0.5, abs=0.005)
        assert by_delta[math.pi / 2].rate_on == pytest.approx(0.0, abs=0.005)
        assert by_delta[math.pi / 2].rate_off == pytest.approx(0.0, abs=0.005)
        assert by_delta[math.pi / 4].rate_on == pytest.approx(0.25, abs=0.005)

    def test_deterministic(self):
        base = default_scan_config(20_000, seed=6)
        p1 = curve_scan(base, [0.3, 0.9])
        p2 = curve_scan(base, [0.3, 0.9])
        assert p1 == p2

    def test_empty_deltas_rejected(self):
        with pytest.raises(ValueError):
            curve_scan(default_scan_config(100, seed=1), [])


class TestSingles:
    def test_flat_at_half(self):
        log = run(make_config(200_000, seed=55))
        for station in ("A", "B"):
            frac, det = singles_plus_fraction(log, station)
            assert frac == pytest.approx(0.5, abs=4 * 0.5 / math.sqrt(det))

    def test_rate_helper_counts_plus_plus(self):
        pairs = [[(1, 1), (1, -1)] for _ in range(4)]
        assert coincidence_rate_pp(block_log_from_pairs(pairs)) == 0.5

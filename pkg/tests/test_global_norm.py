import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from volteface.diophantine import liminf_witness
from volteface.global_norm import (
    CROSSCHECK_MODES,
    Prefactor,
    asymptotic_rate,
    envelope_g,
    global_operator_norm,
    global_operator_norm_oracle,
    longtime_prefactor_check,
    mode_of_max,
    sample_norm_curve,
    smalltime_coefficient,
)
from volteface.mode_core import DomainError, mode_norm_squared_closed, oscillation_envelope


def test_time_zero():
    assert global_operator_norm(2.0, 0.0) == 1.0
    assert global_operator_norm(0.4, 0.0) == 1.0


def test_critical_asymptote():
    ratio = global_operator_norm(1.0, 40.0) / (2 * 40.0 * math.exp(-40.0))
    assert abs(ratio - 1) < 5e-2


def test_against_dense_mode_grid():
    assert global_operator_norm(2.0, 1.0) == pytest.approx(global_operator_norm_oracle(2.0, 1.0, range(1, 41)), rel=1e-9)


def test_half_integer_modes_exceed_the_circle_norm():
    # R(t, a, 1/2) > R(t, a, 1): half-integers belong to the discrete limit, not the circle
    with_half = global_operator_norm_oracle(2.0, 1.0, CROSSCHECK_MODES)
    assert with_half == pytest.approx(math.sqrt(mode_norm_squared_closed(2.0, 0.5, 1.0).r_value), rel=1e-9)
    assert with_half > global_operator_norm(2.0, 1.0)


@pytest.mark.parametrize("a", [0.3, 0.7, 1.0, 1.5, 4.0])
def test_against_oracle_on_time_grid(a):
    for t in np.geomspace(0.05, 15, 12):
        assert global_operator_norm(a, t) == pytest.approx(global_operator_norm_oracle(a, t), rel=1e-9)


@pytest.mark.parametrize("a", [1.0, 1.3, 2.0, 5.0])
def test_first_mode_dominates_for_a_ge_one(a):
    for t in np.geomspace(1e-2, 30, 25):
        assert mode_of_max(a, t, range(1, 51)) == 1


@pytest.mark.parametrize("a", [0.2, 0.5, 0.9])
def test_zero_mode_never_attains(a):
    for t in np.geomspace(1e-2, 20, 20):
        assert math.exp(-2 * a * t) < global_operator_norm(a, t)


class TestEnvelope:
    def test_ceiling_attained_at_first_half_period(self):
        nu1 = 2 * math.sqrt(1 - 0.25)
        res = envelope_g(0.5, math.pi / nu1)
        assert res.g_value == pytest.approx(3.0, abs=1e-9)
        assert res.attaining_mode == 1 and res.certified

    def test_first_mode_before_half_period(self):
        nu1 = 2 * math.sqrt(1 - 0.25)
        for t in np.linspace(0.01, math.pi / nu1, 20):
            assert envelope_g(0.5, t).attaining_mode == 1

    def test_brute_force(self):
        a, t = 0.9, 7.3
        brute = max(oscillation_envelope(a, n, t) for n in range(1, 10_001))
        assert envelope_g(a, t).g_value == pytest.approx(brute, abs=1e-10)

    @settings(max_examples=40, deadline=None)
    @given(a=st.floats(0.05, 0.95), t=st.floats(0.0, 200.0))
    def test_bounds(self, a, t):
        res = envelope_g(a, t)
        assert 1.0 <= res.g_value <= (1 + a) / (1 - a) * (1 + 1e-12)
        assert res.certified

    @pytest.mark.parametrize("half", [False, True])
    @pytest.mark.parametrize("a, t", [(0.3, 1e-9), (0.3, 0.4), (0.45, 2.2), (0.8, 13.0)])
    def test_brute_force_both_mode_sets(self, a, t, half):
        step = 0.5 if half else 1.0
        modes = [m for m in np.arange(step, 5000 + step / 2, step) if m > a]
        brute = max(oscillation_envelope(a, m, t) for m in modes)
        assert envelope_g(a, t, half_integers=half).g_value == pytest.approx(brute, rel=1e-13)

    def test_domain(self):
        with pytest.raises(DomainError):
            envelope_g(1.0, 1.0)

    @pytest.mark.parametrize("eps", [0.5, 0.1])
    def test_liminf_witness(self, eps):
        w = liminf_witness(0.5, eps)
        assert w.hit.t >= 1
        assert envelope_g(0.5, w.hit.t).g_value <= 1 + eps


class TestRates:
    @pytest.mark.parametrize("a, lam", [(2.0, 2 - math.sqrt(3)), (1.0, 1.0), (0.3, 0.3)])
    def test_values(self, a, lam):
        s = asymptotic_rate(a)
        assert s.rate == pytest.approx(lam, rel=1e-14)
        assert s.eigen_rate == pytest.approx(lam, rel=1e-12)

    def test_prefactor(self):
        s = asymptotic_rate(2.0)
        assert s.prefactor_description is Prefactor.CONSTANT
        assert s.prefactor == pytest.approx(4 / 3)
        assert asymptotic_rate(1.0).prefactor_description is Prefactor.LINEAR
        assert asymptotic_rate(0.5).prefactor is None

    def test_rate_peaks_at_one(self):
        grid = np.linspace(0.05, 6, 600)
        rates = [asymptotic_rate(a).rate for a in grid]
        assert 0 < min(rates) and max(rates) <= 1.0
        assert asymptotic_rate(1.0).rate == 1.0
        assert grid[int(np.argmax(rates))] == pytest.approx(1.0, abs=0.01)


class TestAsymptotics:
    def test_long_time_squared_constant(self):
        # a^2/(a^2-1) is the limit of the squared norm times e^{2 lambda t}
        chk = longtime_prefactor_check(2.0, [10, 20, 50])
        assert abs(chk.squared_ratios[-1] - 1) < 1e-6
        assert abs(chk.amplitude_ratios[-1] - 1) < 1e-6
        assert chk.norm_ratios[-1] == pytest.approx(math.sqrt(3) / 2, rel=1e-6)

    def test_long_time_monotone_near_one(self):
        chk = longtime_prefactor_check(1.1, np.linspace(5, 200, 40))
        gaps = np.abs(chk.squared_ratios - 1)
        assert np.all(np.diff(gaps) <= 1e-13)
        assert gaps[-1] < 1e-12

    def test_long_time_domain(self):
        with pytest.raises(DomainError):
            longtime_prefactor_check(1.0, [1.0])

    @pytest.mark.parametrize("a", [0.5, 1.0, 2.0, 3.0])
    def test_small_time_onset_matches_series(self, a):
        fit = smalltime_coefficient(a)
        assert fit.relative_gap("series") < 2e-2
        assert fit.nominal == min(a, 1) / 3


class TestCurve:
    def test_single_row_at_zero(self):
        c = sample_norm_curve(1.0, 0.0, 10)
        assert c.samples == [(0.0, 1.0, "closed")]

    @pytest.mark.parametrize("a", [0.3, 1.0, 2.5])
    def test_non_increasing(self, a):
        c = sample_norm_curve(a, 12.0, 300)
        assert c.norms[0] == 1.0
        assert np.all(np.diff(c.norms) <= 1e-14)

    def test_oracle_source(self):
        c = sample_norm_curve(2.0, 3.0, 6, source="oracle")
        d = sample_norm_curve(2.0, 3.0, 6)
        np.testing.assert_allclose(c.norms, d.norms, rtol=1e-9)

    def test_crosscheck_grid(self):
        assert len([m for m in CROSSCHECK_MODES if m != int(m)]) == 10
        assert max(CROSSCHECK_MODES) == 50
        assert envelope_g(0.4, 0.0).g_value == 1.0

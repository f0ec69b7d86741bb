import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from volteface.mode_core import DomainError, mode_norm_squared_closed
from volteface.scalar_opt import (
    decroi_endpoints,
    decroi_monotonicity_check,
    decroi_phi,
    optf,
    optf_extrema,
    optg,
    optg_max,
)


class TestOptf:
    def test_symmetric_case(self):
        e = optf_extrema(0.0, 1.0)
        assert (e.r_plus, e.r_minus) == (1.0, -1.0)
        assert (e.f_plus, e.f_minus) == (0.5, -0.5)

    def test_forced_case(self):
        e = optf_extrema(3.0, 16.0)
        assert e.r_plus == 8.0
        assert e.f_plus == pytest.approx(1 / 16)

    def test_grid_search(self):
        e = optf_extrema(1.7, 0.3)
        r = np.arange(-100.0, 100.0, 1e-4)
        f = optf(r, 1.7, 0.3)
        assert abs(f.max() - e.f_plus) < 1e-6
        assert abs(f.min() - e.f_minus) < 1e-6

    @pytest.mark.parametrize("b", [0.0, -1.0])
    def test_nonpositive_b(self, b):
        with pytest.raises(DomainError):
            optf_extrema(1.0, b)

    @settings(max_examples=50, deadline=None)
    @given(a=st.floats(-50, 50), b=st.floats(1e-3, 1e3))
    def test_values_are_half_reciprocal(self, a, b):
        e = optf_extrema(a, b)
        assert optf(e.r_plus, a, b) == pytest.approx(e.f_plus, rel=1e-9)
        assert optf(e.r_minus, a, b) == pytest.approx(e.f_minus, rel=1e-9)


class TestOptg:
    def test_examples(self):
        assert optg_max(2.0, 0.0) == 1.0
        assert optg_max(2.0, math.pi) == pytest.approx(3.0, rel=1e-14)
        assert optg_max(2.0, math.pi / 2) == pytest.approx(1 + 2 / (math.sqrt(7) - 1), rel=1e-14)
        assert optg_max(2.0, math.pi / 2) == pytest.approx(2.21525, abs=1e-5)

    def test_alpha_must_exceed_one(self):
        with pytest.raises(DomainError):
            optg_max(1.0, 0.5)

    def test_grid_search_small_sample(self):
        rng = np.random.default_rng(3)
        theta = np.linspace(-math.pi, math.pi, 200_001)
        for alpha, s in zip(rng.uniform(1.05, 6.0, 10), rng.uniform(-7, 7, 10)):
            assert abs(optg(theta, alpha, s).max() - optg_max(alpha, s)) < 1e-6

    @settings(max_examples=50, deadline=None)
    @given(alpha=st.floats(1.01, 20), s=st.floats(-10, 10))
    def test_strictly_below_ceiling_off_pi(self, alpha, s):
        ceiling = (alpha + 1) / (alpha - 1)
        value = optg_max(alpha, s)
        assert 1.0 <= value <= ceiling * (1 + 1e-12)
        if abs(math.cos(s) + 1) > 1e-6:
            assert value < ceiling


class TestDecroi:
    @pytest.mark.parametrize("s", [0.5, 2.0, 10.0])
    def test_monotone(self, s):
        rep = decroi_monotonicity_check(s)
        assert rep.monotone and rep.n_points == 1000

    def test_endpoints(self):
        for s in (0.5, 2.0, 10.0, 40.0):
            lo, hi = decroi_endpoints(s)
            assert hi / lo > 1
            assert decroi_phi(1e-7, s) == pytest.approx(lo, rel=1e-6)
            assert decroi_phi(1 - 1e-8, s) == pytest.approx(hi, rel=1e-6)

    def test_no_overflow_near_one(self):
        assert np.isfinite(decroi_phi(np.array([1 - 1e-8]), 50.0)).all()

    def test_substitution_orders_mode_norms(self):
        # R(t, a, n) e^{2at} = phi(sqrt(1 - (n/a)^2), 2at)
        a, t = 2.0, 1.0
        ns = np.arange(0.1, 1.95, 0.1)
        for n in ns:
            p = math.sqrt(1 - (n / a) ** 2)
            lhs = mode_norm_squared_closed(a, n, t).r_value * math.exp(2 * a * t)
            assert lhs == pytest.approx(float(decroi_phi(p, 2 * a * t)), rel=1e-10)
        rs = [mode_norm_squared_closed(a, n, t).r_value for n in ns]
        assert np.all(np.diff(rs) < 0)

    def test_bad_grid(self):
        with pytest.raises(DomainError):
            decroi_monotonicity_check(1.0, [0.0, 0.5])

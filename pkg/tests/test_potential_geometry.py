import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from volteface.global_norm import global_operator_norm
from volteface.mode_core import DomainError
from volteface.pdmp_sim import potential_semigroup_check
from volteface.potential_geometry import (
    Potential,
    PotentialInputError,
    TimeChange,
    effective_parameters,
    eigenfunction,
    eigenfunction_overlap,
    norm_with_potential,
    normalize_potential,
    optimal_rate_parameter,
    overlap_matrix,
    product_distance_norm,
    product_norm,
)

TWO_BUMP = dict(cos_coeffs=[0.0, 0.4, -0.7], sin_coeffs=[0.2])


@pytest.fixture(scope="module")
def cosine():
    return normalize_potential(Potential.cosine())[0]


@pytest.fixture(scope="module")
def two_bump():
    return normalize_potential(Potential.trig(**TWO_BUMP))[0]


class TestNormalization:
    def test_zero(self):
        pot, z = normalize_potential(Potential.zero())
        assert z == 1.0 and np.all(pot.values == 0)

    def test_constant(self):
        pot, z = normalize_potential(Potential.constant(0.8))
        assert z == pytest.approx(math.exp(-0.8), rel=1e-14)
        np.testing.assert_allclose(pot.values, 0.0, atol=1e-14)

    def test_cosine_bessel(self):
        raw = Potential.cosine()
        assert raw.Z == pytest.approx(special.i0(1.0), abs=1e-10)
        pot, z = normalize_potential(raw)
        assert abs(pot.Z - 1) <= 1e-10 and pot.is_normalized

    def test_quadrature_oracle(self):
        raw = Potential.trig(**TWO_BUMP)
        ref = integrate.quad(lambda x: math.exp(-float(raw(np.array([x]))[0])), 0, 2 * math.pi,
                             epsabs=1e-14, epsrel=1e-13)[0] / (2 * math.pi)
        assert raw.Z == pytest.approx(ref, rel=1e-12)

    def test_rejects_non_finite(self):
        with pytest.raises(PotentialInputError):
            Potential(np.array([0.0] * 7 + [np.inf]))

    def test_rejects_non_periodic(self):
        with pytest.raises(PotentialInputError):
            Potential.from_callable(lambda x: x)

    def test_input_errors_are_domain_errors(self):
        assert issubclass(PotentialInputError, DomainError)

    def test_from_file(self, tmp_path):
        x = np.linspace(0, 2 * math.pi, 400, endpoint=False)
        path = tmp_path / "v.txt"
        np.savetxt(path, np.column_stack([x, np.cos(x)]), header="x V")
        pot = Potential.from_file(path)
        np.testing.assert_allclose(pot.values, np.cos(pot.x), atol=2e-4)
        bad = tmp_path / "bad.txt"
        bad.write_text("1 2 3\n4 5 6\n")
        with pytest.raises(PotentialInputError):
            Potential.from_file(bad)


class TestTimeChange:
    def test_phi_against_quadrature(self, two_bump):
        tc = TimeChange(two_bump)
        for x in (0.3, 1.7, 4.0, 6.2):
            ref = integrate.quad(lambda u: math.exp(-float(two_bump(np.array([u]))[0])), 0, x,
                                 epsabs=1e-14, epsrel=1e-13)[0]
            assert float(tc.phi(x)) == pytest.approx(ref, abs=1e-10)
        assert tc.period == pytest.approx(2 * math.pi, rel=1e-12)

    def test_round_trip(self, cosine):
        tc = TimeChange(cosine)
        xs = np.random.default_rng(0).uniform(0, 2 * math.pi, 50)
        np.testing.assert_allclose(tc.inverse(tc.phi(xs)), xs, atol=1e-9)
        ws = np.linspace(0, tc.period, 50, endpoint=False)
        np.testing.assert_allclose(tc.phi(tc.inverse(ws)), ws, atol=1e-9)

    def test_strictly_increasing(self, two_bump):
        x = np.linspace(0, 2 * math.pi, 5000)
        assert np.all(np.diff(TimeChange(two_bump).phi(x)) > 0)

    def test_flat_is_identity(self):
        tc = TimeChange(Potential.zero())
        x = np.linspace(0, 6, 13)
        np.testing.assert_allclose(tc.phi(x), x, atol=1e-14)


class TestEigenfunctions:
    def test_flat_overlap(self):
        assert eigenfunction_overlap(Potential.zero(), 1, 1) == pytest.approx(2 * math.pi)

    def test_examples(self, cosine):
        assert abs(eigenfunction_overlap(cosine, 2, 5)) < 1e-8
        assert eigenfunction_overlap(cosine, 3, 3) == pytest.approx(2 * math.pi, abs=1e-8)

    @pytest.mark.parametrize("which", ["cosine", "two_bump"])
    def test_orthogonality_matrix(self, which, request):
        pot = request.getfixturevalue(which)
        np.testing.assert_allclose(overlap_matrix(pot, 6), 2 * math.pi * np.eye(6), atol=1e-8)

    def test_requires_normalized(self):
        with pytest.raises(DomainError):
            eigenfunction_overlap(Potential.cosine(), 1, 1)

    def test_periodic(self, cosine):
        g = eigenfunction(cosine, 3)
        assert g(0.0) == pytest.approx(g(2 * math.pi), abs=1e-10)


class TestNorms:
    def test_flat_identity(self):
        assert norm_with_potential(Potential.zero(), 2.0, 1.0) == global_operator_norm(2.0, 1.0)

    @pytest.mark.parametrize("which", ["cosine", "two_bump"])
    def test_equal_to_flat_after_normalization(self, which, request):
        pot = request.getfixturevalue(which)
        for a in (0.4, 1.0, 2.5):
            for t in (0.5, 3.0, 8.0):
                assert norm_with_potential(pot, a, t) == global_operator_norm(a, t)

    def test_constant_offset_rescaling(self):
        c = 0.6
        pot = Potential.constant(c)
        assert effective_parameters(pot, 1.0, 1.0) == pytest.approx((math.exp(-c), math.exp(c)))
        assert norm_with_potential(pot, 1.0, 1.0) == pytest.approx(global_operator_norm(math.exp(-c), math.exp(c)))

    def test_optimal_rate(self):
        assert optimal_rate_parameter(Potential.zero()) == 1.0
        assert optimal_rate_parameter(Potential.constant(0.7)) == pytest.approx(math.exp(0.7))
        assert optimal_rate_parameter(Potential.cosine()) == pytest.approx(1 / special.i0(1.0), rel=1e-10)

    def test_product(self, cosine):
        z = Potential.zero()
        assert product_norm([cosine], 1.3, 0.7) == norm_with_potential(cosine, 1.3, 0.7)
        assert product_norm([z, z], 2.0, 0.0) == 1.0
        assert product_norm([z, cosine], 1.0, 2.0) == pytest.approx(global_operator_norm(1.0, 2.0) ** 2)
        assert product_distance_norm([z, cosine], 1.0, 2.0) == pytest.approx(global_operator_norm(1.0, 2.0))
        with pytest.raises(DomainError):
            product_norm([], 1.0, 1.0)

    def test_product_distance_against_dense_tensor(self):
        # truncate each coordinate to Fourier modes |n| <= 2 (exact invariant subspace), then
        # take the top singular value of P (x) P - mu (x) mu directly
        from scipy.linalg import block_diag, expm

        from volteface.mode_core import mode_matrix

        a, t = 1.4, 0.9
        p = block_diag(*[expm(t * mode_matrix(a, n)) for n in range(-2, 3)])
        const = np.zeros(10)
        const[4:6] = 1 / math.sqrt(2)
        mu = np.outer(const, const)
        coord = np.linalg.svd(p - mu, compute_uv=False)[0]
        joint = np.linalg.svd(np.kron(p, p) - np.kron(mu, mu), compute_uv=False)[0]
        assert coord == pytest.approx(global_operator_norm(a, t), rel=1e-9)
        assert joint == pytest.approx(product_distance_norm([Potential.zero(), Potential.zero()], a, t), rel=1e-9)

    @pytest.mark.parametrize("which", ["cosine", "two_bump"])
    def test_monte_carlo_semigroup(self, which, request):
        pot = request.getfixturevalue(which)
        chk = potential_semigroup_check(pot, 1.1, 1, [1.0, 0.3 - 0.2j], 0.7, 1, 0.9, 40_000, seed=17)
        assert chk.within(4.0)

    def test_monte_carlo_constant_offset(self):
        chk = potential_semigroup_check(Potential.constant(0.5), 1.0, 1, [1.0, -0.5], 0.2, -1, 1.0, 40_000, seed=5)
        assert chk.within(4.0)


@settings(max_examples=25, deadline=None)
@given(c1=st.floats(-1.5, 1.5), s1=st.floats(-1.5, 1.5), c2=st.floats(-1, 1))
def test_random_trig_potentials_round_trip(c1, s1, c2):
    pot = normalize_potential(Potential.trig([0.0, c1, c2], [s1]))[0]
    tc = TimeChange(pot)
    xs = np.linspace(0.01, 6.27, 37)
    np.testing.assert_allclose(tc.inverse(tc.phi(xs)), xs, atol=1e-9)
    assert tc.period == pytest.approx(2 * math.pi, rel=1e-10)

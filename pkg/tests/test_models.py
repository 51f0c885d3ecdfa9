"""Reference-density model tests against scipy and finite differences."""

import numpy as np
import pytest
from scipy.stats import expon, gamma as gamma_dist

from gammakde.models import (
    GammaMarginal,
    from_pdf,
    product_exponential,
    product_gamma,
)

X_PROBE = np.array([0.2, 0.7, 1.0, 2.5, 6.0])


class TestGammaMarginal:
    @pytest.mark.parametrize("k,th", [(1.0, 1.0), (3.0, 1.0), (2.5, 0.4),
                                      (0.7, 2.0)])
    def test_pdf_matches_scipy(self, k, th):
        m = GammaMarginal(k, th)
        np.testing.assert_allclose(
            m.pdf(X_PROBE), gamma_dist.pdf(X_PROBE, a=k, scale=th), rtol=1e-12
        )

    def test_pdf_at_zero(self):
        assert GammaMarginal(3.0).pdf(0.0) == 0.0
        assert GammaMarginal(1.0, 0.5).pdf(0.0) == 2.0

    @pytest.mark.parametrize("k,th", [(1.0, 1.0), (3.0, 1.0), (2.5, 0.4)])
    def test_derivatives_match_finite_differences(self, k, th):
        m = GammaMarginal(k, th)
        h = 1e-5
        fd1 = (m.pdf(X_PROBE + h) - m.pdf(X_PROBE - h)) / (2 * h)
        fd2 = (m.d1(X_PROBE + h) - m.d1(X_PROBE - h)) / (2 * h)
        fd3 = (m.d2(X_PROBE + h) - m.d2(X_PROBE - h)) / (2 * h)
        np.testing.assert_allclose(m.d1(X_PROBE), fd1, rtol=1e-7, atol=1e-10)
        np.testing.assert_allclose(m.d2(X_PROBE), fd2, rtol=1e-6, atol=1e-9)
        np.testing.assert_allclose(m.d3(X_PROBE), fd3, rtol=1e-5, atol=1e-8)

    def test_exponential_derivatives_closed_form(self):
        # Exp(1): every derivative is (-1)^r e^{-x}
        m = GammaMarginal(1.0, 1.0)
        e = np.exp(-X_PROBE)
        np.testing.assert_allclose(m.d1(X_PROBE), -e, rtol=1e-13)
        np.testing.assert_allclose(m.d2(X_PROBE), e, rtol=1e-13)
        np.testing.assert_allclose(m.d3(X_PROBE), -e, rtol=1e-13)

    def test_cdf_quantile_inverse(self):
        m = GammaMarginal(2.3, 1.7)
        q = np.array([0.01, 0.3, 0.5, 0.9, 0.999])
        np.testing.assert_allclose(m.cdf(m.quantile(q)), q, rtol=1e-12)

    def test_rejects_bad_parameters(self):
        with pytest.raises(ValueError):
            GammaMarginal(0.0)
        with pytest.raises(ValueError):
            GammaMarginal(1.0, -1.0)


class TestProductModels:
    def test_exponential_product_pdf(self):
        m = product_exponential(rates=[1.0, 2.0], d=2)
        x = np.array([[0.5, 0.3], [1.0, 1.0]])
        want = expon.pdf(x[:, 0]) * expon.pdf(x[:, 1], scale=0.5)
        np.testing.assert_allclose(m.pdf(x), want, rtol=1e-12)

    def test_gamma_product_pdf(self):
        m = product_gamma([3.0, 2.0], scales=[1.0, 0.5])
        x = np.array([[1.0, 0.7]])
        want = (gamma_dist.pdf(1.0, a=3.0)
                * gamma_dist.pdf(0.7, a=2.0, scale=0.5))
        assert m.pdf(x)[0] == pytest.approx(want, rel=1e-12)

    def test_grad_matches_finite_differences(self):
        m = product_gamma([3.0, 2.0, 1.5])
        rng = np.random.Generator(np.random.Philox(key=5))
        x = rng.uniform(0.3, 4.0, size=(6, 3))
        g = m.grad(x)
        h = 1e-6
        for j in range(3):
            hi, lo = x.copy(), x.copy()
            hi[:, j] += h
            lo[:, j] -= h
            fd = (m.pdf(hi) - m.pdf(lo)) / (2 * h)
            np.testing.assert_allclose(g[:, j], fd, rtol=1e-7, atol=1e-11)

    def test_hess_diag_matches_finite_differences(self):
        m = product_gamma([3.0, 2.0])
        x = np.array([[1.0, 0.8], [2.0, 1.5]])
        hd = m.hess_diag(x)
        h = 1e-4
        for j in range(2):
            hi, lo = x.copy(), x.copy()
            hi[:, j] += h
            lo[:, j] -= h
            fd = (m.pdf(hi) - 2 * m.pdf(x) + m.pdf(lo)) / h**2
            np.testing.assert_allclose(hd[:, j], fd, rtol=1e-6)

    def test_third_and_mixed_against_marginals(self):
        # d^3 f / dx_0^2 dx_1 = g0'' * g1' for a product of two marginals
        m0, m1 = GammaMarginal(3.0), GammaMarginal(2.0)
        m = product_gamma([3.0, 2.0])
        x = np.array([[1.2, 0.9]])
        assert m.third(x, 0, 1)[0] == pytest.approx(
            m0.d2(1.2) * m1.d1(0.9), rel=1e-12)
        assert m.third(x, 1, 1)[0] == pytest.approx(
            m0.pdf(1.2) * m1.d3(0.9), rel=1e-12)
        assert m.mixed(x, 0, 1)[0] == pytest.approx(
            m0.d1(1.2) * m1.d1(0.9), rel=1e-12)
        assert m.mixed(x, 0, 0)[0] == pytest.approx(
            m0.d2(1.2) * m1.pdf(0.9), rel=1e-12)

    def test_quantile_is_per_axis(self):
        m = product_gamma([3.0, 1.0], scales=[1.0, 2.0])
        q = m.quantile(0.5)
        assert q.shape == (2,)
        assert q[1] == pytest.approx(2.0 * np.log(2.0), rel=1e-12)

    def test_dim_broadcast(self):
        m = product_exponential(1.0, d=3)
        assert m.dim == 3
        assert m.pdf(np.ones((1, 3)))[0] == pytest.approx(np.exp(-3.0))


class TestFromPdf:
    def test_numeric_wrapper_matches_analytic(self):
        analytic = product_gamma([3.0])
        numeric = from_pdf(lambda x: analytic.pdf(x), dim=1)
        x = np.array([[0.8], [1.5], [3.0]])
        np.testing.assert_allclose(numeric.grad(x), analytic.grad(x),
                                   rtol=1e-6)
        np.testing.assert_allclose(numeric.hess_diag(x),
                                   analytic.hess_diag(x), rtol=1e-4)
        np.testing.assert_allclose(numeric.third(x, 0, 0),
                                   analytic.third(x, 0, 0), rtol=1e-3)

    def test_numeric_wrapper_2d_mixed(self):
        analytic = product_gamma([3.0, 2.0])
        numeric = from_pdf(lambda x: analytic.pdf(x), dim=2,
                           probe=np.array([[1.0, 1.0]]))
        x = np.array([[1.0, 0.9]])
        assert numeric.mixed(x, 0, 1)[0] == pytest.approx(
            analytic.mixed(x, 0, 1)[0], rel=1e-4)

    def test_validation_catches_wrong_gradient(self):
        from gammakde.models import DensityModel
        m = product_gamma([3.0])
        with pytest.raises(ValueError, match="gradient inconsistent"):
            DensityModel(
                1, m.pdf,
                grad=lambda x: 2.0 * m.grad(x),
                hess_diag=m.hess_diag, third=m.third, mixed=m.mixed,
                quantile=m.quantile,
            )

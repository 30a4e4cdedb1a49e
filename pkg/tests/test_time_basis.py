import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dgwave.errors import DegreeTooLow, IndexOutOfRange, TooManyFactors
from dgwave.numeric_kernel import gauss_legendre
from dgwave.time_basis import TimeSlab, make_basis


def explicit_basis(t, t0, k):
    """The five shifted Legendre polynomials written out term by term."""
    s = (t - t0) / k
    return [
        np.ones_like(s),
        2 * s - 1,
        6 * s**2 - 6 * s + 1,
        20 * s**3 - 30 * s**2 + 12 * s - 1,
        70 * s**4 - 140 * s**3 + 90 * s**2 - 20 * s + 1,
    ]


@pytest.fixture
def basis():
    return make_basis(TimeSlab(3, 0.4, 0.65), 4)


def test_degree_too_low():
    with pytest.raises(DegreeTooLow):
        make_basis(TimeSlab(1, 0.0, 1.0), 1)


def test_matches_explicit_formulas(basis, rng):
    t0, k = basis.slab.t_start, basis.k
    t = rng.uniform(t0, t0 + k, 25)
    ours = basis.values(t)
    for j, ref in enumerate(explicit_basis(t, t0, k)):
        np.testing.assert_allclose(ours[j], ref, atol=1e-13)


def test_point_values(basis):
    t0, t1 = basis.slab.t_start, basis.slab.t_end
    assert basis.eval(2, t0) == pytest.approx(-1.0, abs=1e-15)
    assert basis.eval(3, 0.5 * (t0 + t1)) == pytest.approx(-0.5, abs=1e-14)
    for j in range(1, 6):
        assert basis.eval(j, t1) == pytest.approx(1.0, abs=1e-13)


def test_derivatives(basis):
    k = basis.k
    t0 = basis.slab.t_start
    for t in (t0, t0 + 0.3 * k, basis.slab.t_end):
        assert basis.eval(2, t, 1) == pytest.approx(2 / k, rel=1e-13)
        assert basis.eval(3, t, 2) == pytest.approx(12 / k**2, rel=1e-12)
        assert basis.eval(1, t, 1) == 0.0
    assert basis.eval(3, t0, 1) == pytest.approx(-6 / k, rel=1e-13)


def test_index_errors(basis):
    with pytest.raises(IndexOutOfRange):
        basis.eval(0, 0.5)
    with pytest.raises(IndexOutOfRange):
        basis.eval(6, 0.5)


def test_product_integral_examples(basis):
    k = basis.k
    assert basis.product_integral([(1, 0), (1, 0)]) == pytest.approx(k, rel=1e-14)
    assert basis.product_integral([(2, 0), (2, 0)]) == pytest.approx(k / 3, rel=1e-14)
    # independent oracle: 64-point rule on the explicit formulas
    t, w = gauss_legendre(64).mapped(basis.slab.t_start, basis.slab.t_end)
    s = (t - basis.slab.t_start) / k
    phi2 = 2 * s - 1
    dphi3 = (12 * s - 6) / k
    assert basis.product_integral([(2, 0), (3, 1)]) == pytest.approx(np.sum(w * phi2 * dphi3), abs=1e-13)


def test_product_integral_quartic_against_oracle(basis):
    t, w = gauss_legendre(64).mapped(basis.slab.t_start, basis.slab.t_end)
    ex = explicit_basis(t, basis.slab.t_start, basis.k)
    s = (t - basis.slab.t_start) / basis.k
    dphi5 = (280 * s**3 - 420 * s**2 + 180 * s - 20) / basis.k
    oracle = np.sum(w * ex[4] * ex[3] * ex[2] * dphi5)
    got = basis.product_integral([(5, 0), (4, 0), (3, 0), (5, 1)])
    assert got == pytest.approx(oracle, rel=1e-12, abs=1e-13)


def test_too_many_factors(basis):
    with pytest.raises(TooManyFactors):
        basis.product_integral([(1, 0)] * 5)
    with pytest.raises(TooManyFactors):
        basis.product_integral([])


def test_product_integral_permutation_exact(basis):
    f = [(5, 0), (2, 1), (3, 0), (4, 2)]
    values = {basis.product_integral(list(p)) for p in (f, f[::-1], [f[2], f[0], f[3], f[1]])}
    assert len(values) == 1


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 8), st.floats(1e-4, 1.0), st.floats(0.0, 5.0))
def test_orthogonality_and_traces(q, k, t0):
    b = make_basis(TimeSlab(1, t0, t0 + k), q)
    w, phi = b.quadrature_values()
    gram = (phi * w) @ phi.T
    expected = np.diag([k / (2 * i - 1) for i in range(1, q + 2)])
    np.testing.assert_allclose(gram, expected, rtol=0, atol=1e-12)
    np.testing.assert_allclose(b.right_trace(), 1.0, atol=1e-12)
    np.testing.assert_allclose(b.left_trace(), [(-1.0) ** j for j in range(q + 1)], atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2**32 - 1))
def test_derivative_matches_finite_differences(q, seed):
    rng = np.random.default_rng(seed)
    k = rng.uniform(0.05, 1.0)
    b = make_basis(TimeSlab(1, 0.0, k), q)
    t = rng.uniform(0.1 * k, 0.9 * k, 20)
    eps = 1e-6 * k
    for deriv in (1, 2):
        fd = (b.values(t + eps, deriv - 1) - b.values(t - eps, deriv - 1)) / (2 * eps)
        exact = b.values(t, deriv)
        scale = np.abs(exact).max()
        assert np.abs(fd - exact).max() <= 1e-6 * scale

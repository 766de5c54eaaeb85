import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from stablewalk import steplaw as sl
from stablewalk.dilation import ExponentStructure, NormalizationSequence
from stablewalk.stablelaw import (
    FrequencyGrid, LimitLaw, SpectralMeasure, attracting_limit, convolution_power, density,
    direct_convolution, dirichlet_form, llt_error, symbol,
)


def _two_atoms():
    return LimitLaw(ExponentStructure.diagonal([1.0]), SpectralMeasure.atoms([[1.0]], [1.0]))


def test_symbol_at_zero():
    for ll in (_two_atoms(), LimitLaw.isotropic(1.3, 2), LimitLaw.axis_stable([0.7, 2.0], [1, 1])):
        assert symbol(ll, np.zeros(ll.d)) == 0.0


def test_two_atom_symbol_is_pi_abs():
    c_weighted = 2 * (integrate.quad(lambda r: (1 - math.cos(r)) / r**2, 0, 1)[0]
                      + 1.0 - integrate.quad(lambda r: r**-2.0, 1, np.inf, weight="cos", wvar=1)[0])
    assert c_weighted == pytest.approx(math.pi, rel=1e-10)
    ll = _two_atoms()
    for xi in (0.3, 1.0, -4.5):
        assert symbol(ll, [xi]) == pytest.approx(c_weighted * abs(xi), rel=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 20), st.floats(-3, 3), st.floats(-3, 3))
def test_axis_symbol_homogeneous(t, x1, x2):
    ll = LimitLaw.axis_stable([0.6, 1.7], [1.3, 0.4])
    xi = np.array([x1, x2])
    scaled = np.array([t ** (1 / 0.6) * x1, t ** (1 / 1.7) * x2])
    assert symbol(ll, scaled) == pytest.approx(t * symbol(ll, xi), rel=1e-12, abs=1e-300)


def test_general_symbol_by_direct_quadrature():
    # rotated exponent with off-axis atoms exercises the generic integral path
    phi = 0.4
    P = np.array([[math.cos(phi), -math.sin(phi)], [math.sin(phi), math.cos(phi)]])
    es = ExponentStructure.rotated([1.2, 0.8], P)
    dirs = np.array([[1.0, 0.0], [0.6, 0.8]])
    w = np.array([0.7, 0.3])
    ll = LimitLaw(es, SpectralMeasure.atoms(dirs, w))
    xi = np.array([0.9, -1.4])
    w_e, V = np.linalg.eigh(es.E)

    def radial(y):
        a = (xi @ V) * (V.T @ y)  # <xi, r^E y> = sum_j a_j r^{w_j}
        f = lambda r: 2 * math.sin(float(np.dot(a, r ** w_e)) / 2) ** 2 / r**2
        T = 1e3
        edges = np.concatenate([[0.0], np.geomspace(1e-3, T, 3000)])
        body = sum(integrate.quad(f, lo, hi)[0] for lo, hi in zip(edges, edges[1:]))
        # beyond T: int (1 - cos)/r^2 = 1/T - int cos/r^2, the latter O(1/(phi' T^2))
        return body + 1 / T
    expected = sum(wk * (radial(y) + radial(-y)) for y, wk in zip(dirs, w))
    assert symbol(ll, xi) == pytest.approx(expected, abs=1e-5)
    assert symbol(ll, 2 * xi) != pytest.approx(2 * symbol(ll, xi))


def test_density_cauchy_and_gauss():
    cauchy = LimitLaw.axis_stable([1.0], [1.0])
    xs = np.array([0.0, 0.5, 2.0, 7.0])
    np.testing.assert_allclose(density(cauchy, xs[:, None]), 1 / (math.pi * (1 + xs**2)), rtol=1e-8)
    assert density(cauchy, [0.0]) == pytest.approx(1 / math.pi, rel=1e-10)
    gauss = LimitLaw.isotropic(2.0, 1, 0.5)
    np.testing.assert_allclose(density(gauss, xs[:, None]), stats.norm.pdf(xs), rtol=1e-8, atol=1e-12)


def test_density_product():
    ll = LimitLaw.axis_stable([1.0, 2.0], [1.0, 0.5])
    g = np.array([[a, b] for a in (-1.5, 0.0, 2.0) for b in (-1.0, 0.0, 0.7)])
    expected = stats.cauchy.pdf(g[:, 0]) * stats.norm.pdf(g[:, 1])
    np.testing.assert_allclose(density(ll, g), expected, rtol=1e-6)


def test_density_time_scaling():
    ll = LimitLaw.axis_stable([1.0], [1.0])
    # g_t(x) = t^-1 g(x/t) for alpha = 1
    assert density(ll, [1.0], t=2.0) == pytest.approx(density(ll, [0.5]) / 2, rel=1e-9)
    with pytest.raises(ValueError):
        density(ll, [0.0], t=0.0)


def test_convolution_power_small_cases():
    lazy = sl.lazy_nearest_neighbor(0.5)
    assert convolution_power(lazy, 1, 5).at(1) == pytest.approx(0.25, abs=1e-15)
    assert convolution_power(lazy, 2, 5).at(0) == pytest.approx(3 / 8, abs=1e-15)
    assert convolution_power(lazy, 0, 3).at(0) == 1.0


@pytest.mark.parametrize("law", [
    sl.one_dim_general([1, 3, 4], [0.1, 0.2, 0.15], p0=0.1),
    sl.explicit_table([[0, 0], [1, 2], [-1, -2], [2, -1], [-2, 1]], [0.2, 0.3, 0.3, 0.1, 0.1]),
])
def test_convolution_matches_direct(law):
    n = 2
    half = law.support_radius * n
    table = convolution_power(law, n, half)
    for x, p in direct_convolution(law, n).items():
        assert table.at(x) == pytest.approx(p, abs=1e-12)
    assert table.mass == pytest.approx(1.0, abs=1e-12)
    assert not table.wrapped


def test_llt_error_decreases():
    lazy = sl.lazy_nearest_neighbor(0.5)
    ll, ns = attracting_limit(lazy)
    assert llt_error(lazy, ll, ns, 256).error < llt_error(lazy, ll, ns, 32).error
    cau = sl.radial(1.0)
    ll, ns = attracting_limit(cau)
    assert llt_error(cau, ll, ns, 1024).error < llt_error(cau, ll, ns, 64).error
    with pytest.raises(ValueError):
        llt_error(lazy, ll, ns, 0)


def test_attracting_limit_symbol_matches_char_fn():
    law = sl.radial(1.0)
    ll, ns = attracting_limit(law)
    n = 10**4
    xi = np.array([0.5, 2.0])
    v, _ = law.char_fn(xi / n)
    np.testing.assert_allclose(n * (1 - v), symbol(ll, xi[:, None]), rtol=2e-3)


def test_dirichlet_form_zero_and_sine():
    ll = LimitLaw.isotropic(2.0, 1, 1.0)  # Theta = xi^2
    grid = FrequencyGrid.tensor([2000.0], panels_per_unit=1.0)
    assert dirichlet_form(ll, np.zeros(len(grid.weights)), grid) == 0.0
    xi = grid.nodes[:, 0]
    fhat = math.pi * (1 + np.exp(-1j * xi)) / (math.pi**2 - xi**2 + 0j)
    near = np.abs(np.abs(xi) - math.pi) < 1e-9
    fhat[near] = -0.5j  # limit at the removable singularity
    assert dirichlet_form(ll, fhat, grid) / 0.5 == pytest.approx(math.pi**2, rel=0.01)


def test_dirichlet_form_dilation():
    # f_lam(x) = f(lam^-E x) gives E(f_lam) = lam^(tr E - 1) E(f)
    ll = LimitLaw.axis_stable([1.0, 1.5], [1.0, 0.7])
    es = ll.exponent
    lam = 2.0
    grid = FrequencyGrid.tensor([12.0, 12.0], panels_per_unit=1.0)
    gauss_hat = lambda X: 2 * math.pi * np.exp(-0.5 * (X**2).sum(axis=1))
    base = dirichlet_form(ll, gauss_hat(grid.nodes), grid)
    D = np.diag(es.E)
    scaled_hat = lam**es.trace * gauss_hat(grid.nodes * lam**D)
    assert dirichlet_form(ll, scaled_hat, grid) == pytest.approx(lam ** (es.trace - 1) * base, rel=1e-6)


@pytest.mark.parametrize("t", [0.3, 2.0, 7.5])
def test_general_symbol_operator_homogeneity(t):
    from stablewalk.dilation import matrix_power
    phi = 1.1
    P = np.array([[math.cos(phi), -math.sin(phi)], [math.sin(phi), math.cos(phi)]])
    es = ExponentStructure.rotated([1.6, 0.9], P)
    ll = LimitLaw(es, SpectralMeasure.atoms([[1.0, 0.0], [0.0, 1.0]], [0.5, 1.0]))
    xi = np.array([0.8, 0.45])
    assert symbol(ll, matrix_power(es, t) @ xi) == pytest.approx(t * symbol(ll, xi), rel=1e-7)

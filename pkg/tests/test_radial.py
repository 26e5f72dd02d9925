"""Grid, quadrature, tail closure and FD-oracle tests."""

import numpy as np
import pytest
from scipy.integrate import quad

from excyl.bessel import bessel_k
from excyl.errors import DomainError, NumericError
from excyl.radial import (
    RadialGrid,
    RadialProfile,
    exp_weighted_prefix,
    exp_weighted_suffix,
    fd_bvp_solve,
    fd_meridional_solve,
    integrate_inner,
    integrate_outer,
    weighted_sup,
)


@pytest.fixture(scope="module")
def grid():
    return RadialGrid.graded(512, 100.0, 2.0)


def test_grid_invariants(grid):
    assert grid.nodes[0] == 1.0
    assert grid.nodes[-1] == 100.0
    assert np.all(np.diff(grid.nodes) > 0)
    with pytest.raises(DomainError):
        RadialGrid(np.linspace(0.5, 10, 50))
    with pytest.raises(DomainError):
        RadialGrid(np.ones(20))


def test_quadrature_exact_on_cubics(grid):
    for p in range(4):
        got = integrate_inner(grid.nodes ** p, grid)
        exact = (grid.nodes ** (p + 1) - 1.0) / (p + 1)
        np.testing.assert_allclose(got, exact, rtol=1e-13, atol=1e-13)


def test_inner_inverse_square():
    # int_1^2 s^-2 ds = 1/2 on a grid with 2.0 as an exact node
    g = RadialGrid(np.linspace(1.0, 4.0, 601))
    got = integrate_inner(lambda s: s ** -2.0, g, 2.0)
    assert got == pytest.approx(0.5, abs=1e-9)


def test_outer_inverse_cube(grid):
    got = integrate_outer(lambda s: s ** -3.0, grid, 1.0, decay_exponent=3.0)
    assert got == pytest.approx(0.5, abs=1e-6)


def test_outer_scaled_kernel_matches_adaptive_oracle():
    # integrand s^2 * (e^{-|k|s}-scaled kernel), k=3, from r ~ 2
    g = RadialGrid.graded(2048, 100.0, 2.0)
    suffix = exp_weighted_suffix(g, g.nodes ** 2.0, -3.0)
    j = g.node_index(g.nodes[np.argmin(np.abs(g.nodes - 2.0))])
    rj = g.nodes[j]
    ref, _ = quad(lambda s: s * s * np.exp(-3.0 * (s - rj)), rj, g.r_max,
                  limit=1500, epsabs=1e-15, epsrel=1e-13)
    assert suffix.mantissa[j] == pytest.approx(ref, rel=1e-9)


def test_inner_outer_consistency(grid):
    f = grid.nodes ** -2.5
    total = integrate_outer(f, grid, 1.0, decay_exponent=2.5)
    split = (integrate_inner(f, grid, grid.r_max)
             + integrate_outer(f, grid, grid.r_max, decay_exponent=2.5))
    assert split == pytest.approx(total, rel=1e-13)


def test_tail_closure_exact_on_power_law(grid):
    # the closure leaves no truncation bias at r_max for an exact power law,
    # so only the 4th-order quadrature error remains (N=512 here)
    p = 3.5
    got = integrate_outer(grid.nodes ** -p, grid, 1.0, decay_exponent=p)
    assert got == pytest.approx(1.0 / (p - 1.0), rel=2e-6)
    fine = RadialGrid.graded(2048, 100.0, 2.0)
    got = integrate_outer(fine.nodes ** -p, fine, 1.0, decay_exponent=p)
    assert got == pytest.approx(1.0 / (p - 1.0), rel=1e-8)


def test_nonintegrable_tail_rejected(grid):
    with pytest.raises(NumericError):
        integrate_outer(grid.nodes ** -0.5, grid, 1.0, decay_exponent=0.5)


def test_tail_mismatch_warning(grid):
    with pytest.warns(RuntimeWarning):
        integrate_outer(grid.nodes ** -2.0, grid, 1.0, decay_exponent=3.0)


def test_exp_weighted_prefix_and_suffix_match_quad(grid):
    k = 3.0
    b = grid.nodes ** 2.0 * np.exp(-0.3 * (grid.nodes - 1.0))
    pre = exp_weighted_prefix(grid, b, k)
    suf = exp_weighted_suffix(grid, b, -k)
    for j in [40, 205, 410]:
        rj = grid.nodes[j]
        fb = lambda s: s * s * np.exp(-0.3 * (s - 1.0))
        ref_p, _ = quad(lambda s: fb(s) * np.exp(k * (s - rj)), 1.0, rj,
                        limit=1200, epsabs=1e-300, epsrel=1e-13)
        ref_s, _ = quad(lambda s: fb(s) * np.exp(-k * (s - rj)), rj, grid.r_max,
                        limit=1200, epsabs=1e-300, epsrel=1e-13)
        assert pre.mantissa[j] == pytest.approx(ref_p, rel=2e-6, abs=1e-300)
        assert suf.mantissa[j] == pytest.approx(ref_s, rel=2e-6)
        assert pre.exp_shift[j] == k * rj
        assert suf.exp_shift[j] == -k * rj


def test_exp_weighted_no_overflow_huge_rate(grid):
    # |k| r_max = 4000: mantissas must stay finite
    pre = exp_weighted_prefix(grid, np.ones(len(grid)), 40.0)
    suf = exp_weighted_suffix(grid, np.ones(len(grid)), -40.0)
    assert np.all(np.isfinite(pre.mantissa))
    assert np.all(np.isfinite(suf.mantissa))
    # int_1^r e^{ks} ds * e^{-kr} -> 1/k ; int_r^inf-ish e^{-ks} e^{+kr} -> 1/k
    np.testing.assert_allclose(pre.mantissa[len(grid) // 2], 1 / 40.0, rtol=1e-6)
    np.testing.assert_allclose(suf.mantissa[len(grid) // 2], 1 / 40.0, rtol=1e-6)


def test_weighted_sup():
    g = RadialGrid.graded(128, 100.0, 2.0)
    zeta = 1.5
    n1 = weighted_sup(g.nodes ** -zeta, g, zeta)
    assert n1.value == pytest.approx(1.0, rel=1e-12)
    n2 = weighted_sup(g.nodes ** (-zeta - 1.0), g, zeta)
    assert n2.value == pytest.approx(1.0, rel=1e-12)
    assert n2.argmax_r == 1.0


def test_profile_guards():
    g = RadialGrid.graded(64, 50.0, 2.0)
    p = RadialProfile(g, np.ones(len(g)))
    with pytest.raises(NumericError):
        p.derivative(1)
    with pytest.raises(DomainError):
        RadialProfile(g, np.ones(7))


def test_differentiation_fourth_order():
    errs = []
    for n in (128, 256):
        g = RadialGrid.graded(n, 20.0, 2.0)
        f = np.exp(-(g.nodes - 1.0)) * g.nodes ** -1.0
        d_exact = -f - f / g.nodes
        errs.append(np.max(np.abs(g.differentiate(f, 1) - d_exact)))
    order = np.log2(errs[0] / errs[1])
    assert order > 3.5


# --- FD oracle ---------------------------------------------------------------


def _swirl_ops(nu):
    return (lambda r: (1.0 - nu) / r), (lambda r: -(1.0 + nu) / r ** 2)


def test_fd_oracle_homogeneous_inverse_r():
    # nu=-1 zero-mode swirl operator, f=0, bc 1 -> 1/r
    errs = []
    for n in (256, 512, 1024):
        g = RadialGrid.graded(n, 100.0, 2.0)
        p1, p0 = _swirl_ops(-1.0)
        sol = fd_bvp_solve(g, p1, p0, 0.0, np.zeros(len(g)), 1.0, 1.0)
        errs.append(np.max(np.abs(sol - 1.0 / g.nodes)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert errs[-1] < 5e-5
    assert np.all(orders > 1.9)


def test_fd_oracle_log_solution():
    # nu=-3 swirl zero mode with f = s^-4, bc 0 -> r^-2 ln r
    errs = []
    for n in (256, 512, 1024):
        g = RadialGrid.graded(n, 100.0, 2.0)
        p1, p0 = _swirl_ops(-3.0)
        sol = fd_bvp_solve(g, p1, p0, 0.0, g.nodes ** -4.0, 0.0, 2.0)
        exact = g.nodes ** -2.0 * np.log(g.nodes)
        errs.append(np.max(np.abs(sol - exact)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert errs[-1] < 5e-5
    assert np.all(orders > 1.9)


def test_fd_oracle_bessel_homogeneous():
    # nonzero-mode swirl, k=1, nu=0, f=0, bc 1 -> K_1(r)/K_1(1)
    errs = []
    for n in (256, 512, 1024):
        g = RadialGrid.graded(n, 100.0, 2.0)
        p1, p0 = _swirl_ops(0.0)
        sol = fd_bvp_solve(g, p1, p0, 1.0, np.zeros(len(g)), 1.0, 1.0)
        exact = bessel_k(1.0, g.nodes).value() / bessel_k(1.0, 1.0).value()
        errs.append(np.max(np.abs(sol - exact)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert errs[-1] < 5e-5
    assert np.all(orders > 1.9)


def _pure_stream_bc(g, k):
    from excyl.bessel import bessel_k_prime
    kk = abs(k)
    K1 = bessel_k(1.0, float(kk)).value()
    K1p = bessel_k_prime(1.0, float(kk)).value()
    # choose phi = K_1(|k| r): then g_r = -ik K1, g_z = |k| K1' + K1
    g_r = -1j * k * K1
    g_z = kk * K1p + K1
    return g_r, g_z


def test_fd_meridional_oracle_pure_stream():
    k = 2
    errs = []
    for n in (256, 512):
        g = RadialGrid.graded(n, 60.0, 2.0)
        g_r, g_z = _pure_stream_bc(g, k)
        phi, w, v_r, v_z = fd_meridional_solve(
            g, k, -1.0, np.zeros(len(g), dtype=complex), g_r, g_z, 5.0)
        exact = bessel_k(1.0, float(k) * g.nodes).value()
        errs.append(np.max(np.abs(phi - exact)))
    assert errs[-1] < 5e-4
    assert np.log2(errs[0] / errs[1]) > 1.8


def test_fd_oracle_singular_system_reported():
    g = RadialGrid.graded(64, 10.0, 1.5)
    with pytest.raises(NumericError):
        # absurd reaction term engineered to make the matrix singular is hard
        # to hit generically; non-finite rhs is the reliable failure signal
        fd_bvp_solve(g, lambda r: 0 * r, lambda r: 0 * r, 0.0,
                     np.full(len(g), np.nan), 0.0, 2.0)

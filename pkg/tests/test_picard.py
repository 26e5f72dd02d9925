"""Nonlinear assembly and fixed-point iteration tests."""

import numpy as np
import pytest

from excyl.errors import ConfigError
from excyl.fourier import BoundaryData, ForcingData, ForcingMode, FourierField, bnorm
from excyl.picard import (
    assemble_rhs,
    compute_tau,
    nonuniqueness_pair,
    picard_solve,
)
from excyl.radial import RadialGrid, RadialProfile


@pytest.fixture(scope="module")
def grid():
    return RadialGrid.graded(768, 100.0, 2.0)


# --- tau ----------------------------------------------------------------------


def test_tau_subcritical_branch():
    t = compute_tau(-1.0, 4.0, 3.0, 2.0)
    assert t.tau == pytest.approx(0.5)
    assert t.lambda_bar_theta == 4.0
    assert t.lambda_bar_z == 2.5


def test_tau_supercritical_branch():
    t = compute_tau(-4.0, 10.0, 10.0, 10.0)
    assert t.tau == pytest.approx(1.0)
    assert t.lambda_bar_theta == 4.0
    assert t.lambda_bar_z == 4.0


def test_tau_admissibility_boundary():
    t = compute_tau(-1.0, 3.01, 2.01, 1.51)
    assert t.tau == pytest.approx(0.01)


def test_tau_rejections():
    with pytest.raises(ConfigError):
        compute_tau(0.5, 4.0, 3.0, 2.0)
    with pytest.raises(ConfigError):
        compute_tau(-1.0, 3.0, 3.0, 2.0)
    with pytest.raises(ConfigError):
        compute_tau(-1.0, 4.0, 2.0, 2.0)
    with pytest.raises(ConfigError):
        compute_tau(-1.0, 4.0, 3.0, 1.5)


# --- RHS assembly ---------------------------------------------------------------


def _profile(grid, amp, rate=1.0):
    r = grid.nodes
    vals = amp * np.exp(-rate * (r - 1.0))
    d1 = -rate * vals
    d2 = rate * rate * vals
    return RadialProfile(grid, vals, d1, d2, decay_exponent=10.0)


def test_rhs_zero_iterate_returns_forcing(grid):
    r = grid.nodes
    forcing = ForcingData(modes={
        ("theta", 0): ForcingMode(lambda s: s ** -4.0, 4.0),
        ("r", 0): ForcingMode(lambda s: s ** -2.0, 2.0),
        ("z", 1): ForcingMode(lambda s: (0.1 + 0.2j) * s ** -3.0, 3.0),
    })
    vbar = FourierField.zero(grid, 2, with_sigma=True)
    rhs = assemble_rhs(vbar, forcing, 1.0, -1.0)
    np.testing.assert_allclose(rhs.rhs[("theta", 0)], r ** -4.0)
    np.testing.assert_allclose(rhs.rhs[("z", 1)], (0.1 + 0.2j) * r ** -3.0)
    # the zero radial mode is absorbed (audited), not solved
    assert np.all(rhs.rhs[("r", 0)] == 0.0)
    np.testing.assert_allclose(rhs.absorbed_fr0, r ** -2.0)


def test_rhs_swirl_only_support(grid):
    # vbar with only v_theta,+-1: quadratic terms live on k in {0, 2};
    # the k=0 radial output is absorbed, the k=2 centrifugal term survives
    vbar = FourierField.zero(grid, 2, with_sigma=False)
    c = _profile(grid, 1e-2)
    vbar.set_mode(1, "theta", c)
    vbar.set_mode(-1, "theta", c.conjugate())
    rhs = assemble_rhs(vbar, ForcingData(), 0.0, -3.0)
    r = grid.nodes
    np.testing.assert_allclose(rhs.rhs[("r", 2)], c.values ** 2 / r,
                               rtol=1e-12)
    assert np.all(rhs.rhs[("r", 0)] == 0.0)
    # audit keeps the absorbed centrifugal zero mode 2|c|^2/r
    np.testing.assert_allclose(rhs.absorbed_fr0,
                               2.0 * np.abs(c.values) ** 2 / r, rtol=1e-12)
    # no sigma coupling for nu < -2 and no theta/z quadratics from pure swirl
    assert np.max(np.abs(rhs.rhs[("theta", 1)])) == 0.0
    assert np.max(np.abs(rhs.rhs[("z", 1)])) == 0.0


def test_rhs_sigma_coupling(grid):
    vbar = FourierField.zero(grid, 1, with_sigma=True)
    vbar.sigma = 0.3
    c = _profile(grid, 1e-2)
    vbar.set_mode(1, "theta", c)
    vbar.set_mode(-1, "theta", c.conjugate())
    rhs = assemble_rhs(vbar, ForcingData(), 0.0, -1.0)
    r = grid.nodes
    np.testing.assert_allclose(rhs.rhs[("r", 1)],
                               2.0 * 0.3 * c.values / r ** 2, rtol=1e-12)


def _physical_nonlinearity(vbar, n_z=64):
    """Pseudo-spectral oracle for the quadratic forcing terms."""
    grid = vbar.grid
    z = 2.0 * np.pi * np.arange(n_z) / n_z
    k_rng = range(-vbar.k_max, vbar.k_max + 1)

    def phys(comp, der=0):
        out = np.zeros((len(grid), n_z), dtype=complex)
        for k in k_rng:
            p = vbar.profile(comp, k)
            vals = p.values if der == 0 else p.d1
            out += vals[:, None] * np.exp(1j * k * z)[None, :]
        return out

    def dz(comp):
        out = np.zeros((len(grid), n_z), dtype=complex)
        for k in k_rng:
            out += 1j * k * vbar.profile(comp, k).values[:, None] \
                * np.exp(1j * k * z)[None, :]
        return out

    r = grid.nodes[:, None]
    vr, vth, vz = phys("r"), phys("theta"), phys("z")
    out = {
        "theta": -(vr * phys("theta", 1) + vz * dz("theta") + vr * vth / r),
        "z": -(vr * phys("z", 1) + vz * dz("z")),
        "r": -(vr * phys("r", 1) + vz * dz("r") - vth * vth / r),
    }
    freqs = np.fft.fftfreq(n_z, d=1.0 / n_z).astype(int)
    modes = {}
    for comp, matrix in out.items():
        coeff = np.fft.fft(matrix, axis=1) / n_z
        for k in range(0, vbar.k_max + 1):
            (col,) = np.nonzero(freqs == k)
            modes[(comp, k)] = coeff[:, col[0]]
    return modes


def test_rhs_matches_pseudo_spectral_oracle(grid):
    rng = np.random.default_rng(7)
    vbar = FourierField.zero(grid, 3, with_sigma=False)
    r = grid.nodes
    for k in range(0, 3):
        for comp in ("r", "theta", "z"):
            if comp == "r" and k == 0:
                continue  # structural zero
            a = rng.standard_normal() * 1e-2
            b = rng.standard_normal() * 1e-2 if k else 0.0
            vals = (a + 1j * b) * np.exp(-(r - 1.0)) * r ** -1.0
            d1 = (a + 1j * b) * (-np.exp(-(r - 1.0)) * r ** -1.0
                                 - np.exp(-(r - 1.0)) * r ** -2.0)
            vbar.set_mode(k, comp, RadialProfile(grid, vals, d1, d1 * 0.0))
    vbar.mirror_negative_modes()
    rhs = assemble_rhs(vbar, ForcingData(), 0.0, -3.0)
    oracle = _physical_nonlinearity(vbar)
    for k in range(0, 4):
        for comp in ("theta", "z", "r"):
            if comp == "r" and k == 0:
                continue
            want = oracle.get((comp, k), 0.0 * r)
            np.testing.assert_allclose(rhs.rhs[(comp, k)], want, atol=1e-9,
                                       err_msg=f"{comp},{k}")


# --- the fixed-point loop -------------------------------------------------------


def test_picard_zero_data(grid):
    bundle = picard_solve(grid, -1.0, 1.0, 4, ForcingData(), BoundaryData())
    assert bundle.converged
    assert bundle.iterations == 1
    assert bundle.norms["B_tau"] == 0.0
    assert bundle.sigma == 0.0


def test_picard_small_boundary_mode(grid):
    b = BoundaryData(g_theta={1: 1e-3})
    bundle = picard_solve(grid, -1.0, 1.0, 6, ForcingData(), b, verify=True)
    assert bundle.converged
    assert bundle.iterations <= 15
    assert bundle.contraction_estimate <= 0.5
    rep = bundle.residual_report
    assert rep.max_momentum < 1e-6
    assert rep.divergence < 1e-8
    assert rep.boundary_mismatch < 1e-10


def test_picard_epsilon_scaling(grid):
    # halving the data should halve the solution norm to leading order
    b1 = BoundaryData(g_theta={1: 1e-3}, g_z={1: 0.5e-3})
    b2 = BoundaryData(g_theta={1: 0.5e-3}, g_z={1: 0.25e-3})
    s1 = picard_solve(grid, -1.0, 1.0, 6, ForcingData(), b1)
    s2 = picard_solve(grid, -1.0, 1.0, 6, ForcingData(), b2)
    ratio = s1.norms["B_tau"] / s2.norms["B_tau"]
    assert ratio == pytest.approx(2.0, rel=0.1)


def test_picard_fixed_point_stability(grid):
    # re-assembling the RHS from the converged iterate and re-solving moves
    # the solution by no more than the convergence tolerance
    from excyl.modes import solve_linear_system

    b = BoundaryData(g_theta={1: 1e-3})
    tol = 1e-11
    bundle = picard_solve(grid, -1.0, 1.0, 5, ForcingData(), b, tol=tol)
    rhs = assemble_rhs(bundle.v, bundle.forcing, bundle.mu, bundle.nu)
    decays = {("theta", 0): 3.0 + 2 * bundle.tau.tau,
              ("z", 0): 3.0 + 2 * bundle.tau.tau,
              "nonzero": 3.0 + 2 * bundle.tau.tau}
    v_again, _ = solve_linear_system(grid, bundle.nu, bundle.mu, 5, rhs.rhs,
                                     decays, b)
    assert bnorm(v_again - bundle.v, bundle.tau.tau) <= 10 * tol


def test_picard_sigma_structure(grid):
    b = BoundaryData(g_theta={0: 1e-3, 1: 1e-3})
    sup = picard_solve(grid, -3.0, 1.0, 4, ForcingData(), b)
    assert sup.sigma is None  # structurally absent for nu < -2
    sub = picard_solve(grid, -1.0, 1.0, 4, ForcingData(), b)
    assert sub.sigma is not None
    assert sub.sigma == pytest.approx(1e-3, rel=1e-3)  # dominated by g_theta0


def test_picard_large_data_warns(grid):
    b = BoundaryData(g_theta={1: 0.5})
    with pytest.warns(RuntimeWarning, match="large"):
        try:
            picard_solve(grid, -1.0, 1.0, 4, ForcingData(), b, max_iters=4)
        except Exception:
            pass  # divergence is acceptable here; only the warning is required


def test_picard_truncation_guard(grid):
    b = BoundaryData(g_theta={5: 1e-3})
    with pytest.raises(ConfigError):
        picard_solve(grid, -1.0, 1.0, 3, ForcingData(), b)


def test_picard_ball_invariance(grid):
    # all iterate norms stay within the observed-constant ball
    b = BoundaryData(g_theta={1: 2e-4})
    bundle = picard_solve(grid, -1.0, 1.0, 4, ForcingData(), b)
    data = bundle.norms["V"] + bundle.norms["E"]
    assert bundle.norms["B_tau"] <= 2.0 * bundle.c_emp * data + 1e-12


# --- non-uniqueness -------------------------------------------------------------


def test_nonuniqueness_requires_supercritical(grid):
    with pytest.raises(ConfigError, match="nu < -2"):
        nonuniqueness_pair(grid, -1.0, 1.0, 2, ForcingData(), BoundaryData(), 0.05)


def test_nonuniqueness_zero_shift_is_identity(grid):
    first, second, rep = nonuniqueness_pair(
        grid, -3.0, 1.0, 2, ForcingData(), BoundaryData(), 0.0)
    assert rep.bundle_distance == 0.0
    np.testing.assert_allclose(rep.values, 0.0, atol=1e-15)


def test_nonuniqueness_separation(grid):
    first, second, rep = nonuniqueness_pair(
        grid, -3.0, 1.0, 2, ForcingData(), BoundaryData(), 0.05)
    assert first.converged and second.converged
    i = int(np.argmin(np.abs(rep.radii - 50.0)))
    assert rep.values[i] == pytest.approx(-0.05, rel=0.05)
    assert rep.bundle_distance > 10 * 1e-10

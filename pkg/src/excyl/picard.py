"""Quadratic right-hand sides, the Picard fixed-point loop, and the
non-uniqueness experiment.

One Picard step maps the previous iterate vbar to the solution v of the
linearized system driven by

    fbar_r     = -(vbar.grad) vbar_r + vbar_theta^2/r
                 + 2 sigma_bar vbar_theta / r^2   (only when -2 <= nu < 0)
                 + f_r                             [zero mode absorbed]
    fbar_theta = -(vbar.grad) vbar_theta - vbar_r vbar_theta / r + f_theta
    fbar_z     = -(vbar.grad) vbar_z + f_z

where vbar_theta is the sigma-free swirl (the sigma/r advection terms cancel
identically in the theta equation) and the rotation coupling 2 mu v_theta/r^2
enters the meridional solve with the freshly solved swirl mode.  The zero
radial mode of fbar is absorbed into the zero mode of pressure; an audit copy
of the full absorbed profile is kept so the pressure can be recovered.

The decay index of the solution space is

    tau = min( lam_theta_bar - 3, lam_z_bar - 2, lambda - 3/2 ),
    lam_theta_bar = lam_theta            for nu >= -2,
                    min(lam_theta, 2 - nu/2)  for nu < -2,
    lam_z_bar     = min(lam_z, 2 - nu/2),

and iterate distances are measured in the tau-weighted solution norm.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .errors import ConfigError, ConvergenceError
from .fourier import (
    BoundaryData,
    ForcingData,
    FourierField,
    bnorm,
    convolve_product,
    convolution_tail_norm,
    enorm,
    vnorm,
)
from .modes import solve_linear_system
from .radial import RadialGrid

__all__ = [
    "TauInfo",
    "compute_tau",
    "RhsAssembly",
    "assemble_rhs",
    "IterationState",
    "SolutionBundle",
    "picard_solve",
    "nonuniqueness_pair",
    "SeparationReport",
]


@dataclass(frozen=True)
class TauInfo:
    tau: float
    lambda_bar_theta: float
    lambda_bar_z: float


def compute_tau(nu: float, lambda_theta: float, lambda_z: float,
                lambda_: float) -> TauInfo:
    """Decay index of the solution space from the data decay exponents."""
    if nu >= 0:
        raise ConfigError("background sink strength requires nu < 0")
    if not (lambda_theta > 3.0 and lambda_z > 2.0 and lambda_ > 1.5):
        raise ConfigError(
            "data space hypotheses violated: need lambda_theta > 3, "
            "lambda_z > 2, lambda > 3/2")
    if nu < -2.0:
        lam_th_bar = min(lambda_theta, 2.0 - 0.5 * nu)
    else:
        lam_th_bar = lambda_theta
    lam_z_bar = min(lambda_z, 2.0 - 0.5 * nu)
    tau = min(lam_th_bar - 3.0, lam_z_bar - 2.0, lambda_ - 1.5)
    if tau <= 0.0:
        raise ConfigError(
            f"decay exponents give non-positive solution index tau = {tau}")
    return TauInfo(tau, lam_th_bar, lam_z_bar)


@dataclass
class RhsAssembly:
    """Per-mode forcing arrays for k >= 0 plus bookkeeping.

    rhs maps (component, k) to sampled arrays; absorbed_fr0 is the audit copy
    of the zero radial mode (quadratics + sigma and rotation couplings +
    external forcing) that the solver drops into the pressure.
    """

    rhs: Dict[Tuple[str, int], np.ndarray]
    absorbed_fr0: np.ndarray
    absorbed_fr0_decay: float
    convolution_tail: float


def assemble_rhs(vbar: FourierField, forcing: ForcingData, mu: float,
                 nu: float) -> RhsAssembly:
    """Quadratic + external forcing for one linearized solve."""
    grid = vbar.grid
    r = grid.nodes
    k_max = vbar.k_max
    with_sigma = -2.0 <= nu < 0.0
    sigma_bar = vbar.sigma if (with_sigma and vbar.sigma is not None) else 0.0

    vr = vbar.component_values("r")
    vth = vbar.component_values("theta")
    vz = vbar.component_values("z")
    d_vr = vbar.component_d1("r")
    d_vth = vbar.component_d1("theta")
    d_vz = vbar.component_d1("z")
    il_vth = {l: 1j * l * vth[l] for l in vth}
    il_vz = {l: 1j * l * vz[l] for l in vz}
    il_vr = {l: 1j * l * vr[l] for l in vr}

    conv = lambda a, b: convolve_product(a, b, k_max)
    adv_th = conv(vr, d_vth)
    rot_th = conv(vz, il_vth)
    str_th = conv(vr, vth)
    adv_z = conv(vr, d_vz)
    rot_z = conv(vz, il_vz)
    adv_r = conv(vr, d_vr)
    rot_r = conv(vz, il_vr)
    cen_r = conv(vth, vth)

    zero = np.zeros(len(grid), dtype=complex)

    def pick(m, k):
        return m.get(k, zero)

    rhs: Dict[Tuple[str, int], np.ndarray] = {}
    for k in range(0, k_max + 1):
        f_th = (-(pick(adv_th, k) + pick(rot_th, k) + pick(str_th, k) / r)
                + forcing.sample("theta", k, r))
        f_z = (-(pick(adv_z, k) + pick(rot_z, k))
               + forcing.sample("z", k, r))
        f_r = (-(pick(adv_r, k) + pick(rot_r, k) - pick(cen_r, k) / r)
               + forcing.sample("r", k, r))
        if with_sigma:
            f_r = f_r + 2.0 * sigma_bar * pick(vth, k) / r ** 2
        rhs[("theta", k)] = f_th
        rhs[("z", k)] = f_z
        rhs[("r", k)] = f_r

    # absorb the zero radial mode into the pressure; audit the full profile,
    # including the pieces the split representation keeps implicit
    absorbed = rhs[("r", 0)] + (sigma_bar ** 2) / r ** 3 \
        + 2.0 * mu * (pick(vth, 0) + sigma_bar / r) / r ** 2
    rhs[("r", 0)] = zero
    absorbed_decay = min(3.0, forcing.decay("r", 0))

    tail = max(convolution_tail_norm(vr, d_vth, k_max),
               convolution_tail_norm(vth, vth, k_max))
    return RhsAssembly(rhs=rhs, absorbed_fr0=absorbed,
                       absorbed_fr0_decay=absorbed_decay,
                       convolution_tail=tail)


@dataclass
class IterationState:
    v_current: FourierField
    iterations: int = 0
    diff_norm_history: List[float] = field(default_factory=list)
    contraction_estimate: float = float("nan")

    def update_contraction(self):
        h = self.diff_norm_history
        ratios = [h[i + 1] / h[i] for i in range(len(h) - 1) if h[i] > 0]
        if not ratios:
            return
        last = ratios[-3:]
        if min(last) == 0.0:  # an exact fixed point was hit
            self.contraction_estimate = 0.0
        else:
            self.contraction_estimate = float(np.exp(np.mean(np.log(last))))


@dataclass
class SolutionBundle:
    v: FourierField
    nu: float
    mu: float
    tau: TauInfo
    norms: Dict[str, float]
    converged: bool
    iterations: int
    diff_history: List[float]
    contraction_estimate: float
    c_emp: float
    forcing: ForcingData
    boundary: BoundaryData
    rhs_final: Optional[RhsAssembly] = None
    residual_report: Optional[object] = None
    meridional: Optional[Dict[int, object]] = None  # per-k stream/vorticity data

    @property
    def sigma(self) -> Optional[float]:
        return self.v.sigma


SMALLNESS_WARN = 0.25


def picard_solve(grid: RadialGrid, nu: float, mu: float, k_max: int,
                 forcing: ForcingData, boundary: BoundaryData,
                 tol: float = 1e-10, max_iters: int = 25,
                 relaxation: float = 1.0, workers: int = 1,
                 verify: bool = False) -> SolutionBundle:
    """Fixed-point construction of the reduced solution, starting from 0.

    Each step assembles the quadratic forcing from the current iterate and
    re-solves every linear mode; convergence is declared when consecutive
    iterates are closer than tol in the tau-weighted norm.  Distances growing
    three steps in a row abort with a diagnostic; hitting max_iters returns
    the partial result flagged as unconverged.
    """
    tau = compute_tau(nu, forcing.lambda_theta, forcing.lambda_z,
                      forcing.lambda_)
    data_norm = enorm(forcing, grid) + vnorm(boundary)
    if data_norm > SMALLNESS_WARN:
        warnings.warn(
            f"data norm {data_norm:.3g} is large; the contraction argument "
            "only holds for small data -- iteration may diverge",
            RuntimeWarning, stacklevel=2)
    support = {abs(k) for k in boundary.k_support()} \
        | {abs(k) for k in forcing.k_support()}
    if support and max(support) > k_max:
        raise ConfigError(
            f"data excite mode {max(support)} beyond the truncation {k_max}")

    with_sigma = -2.0 <= nu < 0.0
    state = IterationState(FourierField.zero(grid, k_max, with_sigma))
    decays = {("theta", 0): min(forcing.lambda_theta, 3.0 + 2.0 * tau.tau),
              ("z", 0): min(forcing.lambda_z, 3.0 + 2.0 * tau.tau),
              "nonzero": min(forcing.lambda_, 3.0 + 2.0 * tau.tau)}
    converged = False
    rhs_final = None
    merid_final = None
    for it in range(1, max_iters + 1):
        rhs = assemble_rhs(state.v_current, forcing, mu, nu)
        v_new, merid_final = solve_linear_system(grid, nu, mu, k_max, rhs.rhs,
                                                 decays, boundary,
                                                 workers=workers)
        if relaxation != 1.0:
            v_new = state.v_current.blend(v_new, relaxation)
        diff = bnorm(v_new - state.v_current, tau.tau)
        state.v_current = v_new
        state.iterations = it
        state.diff_norm_history.append(diff)
        state.update_contraction()
        rhs_final = rhs
        if diff <= tol:
            converged = True
            break
        h = state.diff_norm_history
        if len(h) >= 4 and h[-1] > h[-2] > h[-3] > h[-4]:
            raise ConvergenceError(
                f"Picard iteration diverging: distances {h[-4:]} "
                f"(data norm {data_norm:.3g})", state=state)

    v = state.v_current
    b_norm = bnorm(v, tau.tau)
    norms = {"V": vnorm(boundary), "E": enorm(forcing, grid), "B_tau": b_norm}
    c_emp = b_norm / data_norm if data_norm > 0 else 0.0
    bundle = SolutionBundle(
        v=v, nu=nu, mu=mu, tau=tau, norms=norms, converged=converged,
        iterations=state.iterations, diff_history=state.diff_norm_history,
        contraction_estimate=state.contraction_estimate, c_emp=c_emp,
        forcing=forcing, boundary=boundary, rhs_final=rhs_final,
        meridional=merid_final)
    if verify:
        from .residuals import attach_residual_report
        attach_residual_report(bundle)
    return bundle


@dataclass
class SeparationReport:
    """r (u_theta - u_theta~) over the outer decade, z-averaged."""

    radii: np.ndarray
    values: np.ndarray
    limit_estimate: float
    delta_mu: float
    bundle_distance: float


def nonuniqueness_pair(grid: RadialGrid, nu: float, mu: float, k_max: int,
                       forcing: ForcingData, boundary: BoundaryData,
                       delta_mu: float, **picard_kwargs):
    """Two solutions of the same boundary-value problem for nu < -2.

    The second run perturbs the background rotation rate to mu + delta_mu and
    compensates on the boundary (swirl mean shifted by -delta_mu), so both
    velocity fields satisfy identical boundary conditions; their swirl
    components differ in the r^{-1} coefficient by mu - mu~ = -delta_mu.
    """
    if nu >= -2.0:
        raise ConfigError(
            "the non-uniqueness construction requires nu < -2 (whether the "
            "problem is non-unique for nu >= -2 is open)")
    first = picard_solve(grid, nu, mu, k_max, forcing, boundary,
                         **picard_kwargs)
    shifted = boundary.shifted_swirl_mean(-delta_mu)
    second = picard_solve(grid, nu, mu + delta_mu, k_max, forcing, shifted,
                          **picard_kwargs)

    mask = grid.last_decade_mask()
    r = grid.nodes[mask]
    # z-average of u_theta is the zero swirl mode plus the background
    u1 = np.real(first.v.profile("theta", 0).values[mask]) + mu / r
    u2 = np.real(second.v.profile("theta", 0).values[mask]) + (mu + delta_mu) / r
    sep = r * (u1 - u2)
    dist = bnorm(first.v - second.v, first.tau.tau)
    report = SeparationReport(radii=r, values=sep,
                              limit_estimate=float(sep[-1]),
                              delta_mu=delta_mu, bundle_distance=dist)
    return first, second, report

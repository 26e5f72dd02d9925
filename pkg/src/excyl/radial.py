"""Graded radial grid on [1, r_max], quadrature and finite-difference oracles.

The half-line [1, inf) is truncated at r_max with node grading
r_i = 1 + (i/n)^gamma (r_max - 1); tails of outer integrals are closed
analytically with the declared power-law exponent.  Per-cell quadrature
integrates the cubic through the four nodes around each cell, so it is exact
on cubics and the composite rule is 4th order.  Differentiation uses 5-point
stencils (4th order interior, one-sided at the ends).

For the k != 0 Green's formulas the integrands carry e^{+|k|s} or e^{-|k|s}
factors; exp_weighted_prefix / exp_weighted_suffix accumulate those in
blocked scaled arithmetic and return ScaledValue arrays whose exp_shift is
rate * r, so downstream kernel products cancel shifts exactly.

fd_bvp_solve is the independent verification path: a second-order
finite-difference solution of the two-point problems

    -(v'' + p1(r) v' + p0(r) v - ksq v) = f,  v(1) given, v decaying,

closed at r_max by the Robin condition v' + (decay/r + sqrt(ksq)) v = 0.
Every closed-form representation in the mode solvers is checked against it.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .bessel import ScaledValue
from .errors import DomainError, NumericError

__all__ = [
    "RadialGrid",
    "RadialProfile",
    "WeightedNorm",
    "weighted_sup",
    "integrate_inner",
    "integrate_outer",
    "exp_weighted_prefix",
    "exp_weighted_suffix",
    "tail_closure",
    "fd_bvp_solve",
    "fd_meridional_solve",
]

_BLOCK_LOG_SPAN = 120.0  # max |rate|*(span) handled inside one scaled block


def _local_weights(points: np.ndarray, x0: float, order: int) -> np.ndarray:
    """Weights w with sum_j w_j f(points_j) ~ f^(order)(x0) (exact on polys)."""
    pts = np.asarray(points, float)
    n = pts.size
    scale = max(pts.max() - pts.min(), 1e-30)
    t = (pts - x0) / scale
    v = np.vander(t, n, increasing=True).T
    rhs = np.zeros(n)
    rhs[order] = _factorial(order) / scale ** order
    return np.linalg.solve(v, rhs)


def _factorial(n: int) -> float:
    out = 1.0
    for i in range(2, n + 1):
        out *= i
    return out


class RadialGrid:
    """Strictly increasing nodes r_0 = 1 < ... < r_n = r_max."""

    def __init__(self, nodes):
        nodes = np.asarray(nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 8:
            raise DomainError("grid needs at least 8 nodes")
        if abs(nodes[0] - 1.0) > 1e-14:
            raise DomainError("radial grid must start exactly at r = 1")
        if np.any(np.diff(nodes) <= 0):
            raise DomainError("grid nodes must be strictly increasing")
        self.nodes = nodes
        self.nodes.setflags(write=False)
        self._cache = {}

    @classmethod
    def graded(cls, n: int, r_max: float = 100.0, gamma: float = 2.0) -> "RadialGrid":
        if r_max <= 1.0 or n < 8:
            raise DomainError("need r_max > 1 and n >= 8")
        i = np.arange(n + 1, dtype=float) / n
        return cls(1.0 + i ** gamma * (r_max - 1.0))

    @property
    def n_cells(self) -> int:
        return self.nodes.size - 1

    @property
    def r_max(self) -> float:
        return float(self.nodes[-1])

    def __len__(self):
        return self.nodes.size

    def node_index(self, r: float) -> int:
        idx = int(np.argmin(np.abs(self.nodes - r)))
        if abs(self.nodes[idx] - r) > 1e-9 * max(1.0, abs(r)):
            raise DomainError(f"r = {r} is not a grid node")
        return idx

    def last_decade_mask(self) -> np.ndarray:
        return self.nodes >= self.r_max / 10.0

    # -- cached discrete operators ------------------------------------------

    def _cell_quadrature(self, subdiv: int = 1):
        """Cubic-interpolated Gauss cell quadrature, optionally subdivided.

        Returns (stencil idx (n,4), gauss radii (n,4m), gauss weights (n,4m),
        interp (n,4m,4)) where interp[c] maps the 4 stencil values of cell c
        onto its 4m Gauss nodes (m panels of 4-point Gauss per cell).
        Exponential weights are applied at the Gauss nodes, so the cubic
        interpolant is the only approximation; subdividing keeps the
        per-panel exponential variation |rate| dx below ~1.
        """
        key = ("cellquad", subdiv)
        if key in self._cache:
            return self._cache[key]
        r = self.nodes
        n = self.n_cells
        xi4 = np.array([-0.8611363115940526, -0.3399810435848563,
                        0.3399810435848563, 0.8611363115940526])
        om4 = np.array([0.3478548451374538, 0.6521451548625461,
                        0.6521451548625461, 0.3478548451374538])
        # panel-subdivided reference rule on [-1, 1]
        xi = np.concatenate([(-1.0 + (2.0 * p + 1.0 + xi4) / subdiv)
                             for p in range(subdiv)])
        om = np.tile(om4 / subdiv, subdiv)
        ng = xi.size
        idx = np.empty((n, 4), dtype=int)
        g_r = np.empty((n, ng), dtype=float)
        g_w = np.empty((n, ng), dtype=float)
        interp = np.empty((n, ng, 4), dtype=float)
        for i in range(n):
            j0 = min(max(i - 1, 0), len(r) - 4)
            pts = r[j0:j0 + 4]
            a, b = r[i], r[i + 1]
            c = 0.5 * (a + b)
            hw = 0.5 * (b - a)
            scale = max(pts.max() - pts.min(), 1e-30)
            t = (pts - c) / scale
            vp = np.vander(t, 4, increasing=True)
            xg = c + hw * xi
            tg = (xg - c) / scale
            vg = np.vander(tg, 4, increasing=True)
            idx[i] = np.arange(j0, j0 + 4)
            g_r[i] = xg
            g_w[i] = om * hw
            interp[i] = vg @ np.linalg.inv(vp)
        self._cache[key] = (idx, g_r, g_w, interp)
        return idx, g_r, g_w, interp

    def subdivision_for_rate(self, rate_mag: float) -> int:
        """Gauss panels per cell so that rate * panel width stays ~<= 1."""
        dmax = float(np.max(np.diff(self.nodes)))
        m = 1
        while m < 32 and rate_mag * dmax / m > 1.0:
            m *= 2
        return m

    def _gauss_values(self, values: np.ndarray, subdiv: int = 1) -> np.ndarray:
        idx, _, _, interp = self._cell_quadrature(subdiv)
        return np.einsum("cgj,cj->cg", interp, np.asarray(values)[idx])

    def _derivative_stencils(self, order: int):
        """5-point differentiation stencils: (indices (n+1,5), weights (n+1,5))."""
        key = ("deriv", order)
        if key in self._cache:
            return self._cache[key]
        r = self.nodes
        m = r.size
        idx = np.empty((m, 5), dtype=int)
        wts = np.empty((m, 5), dtype=float)
        for i in range(m):
            j0 = min(max(i - 2, 0), m - 5)
            idx[i] = np.arange(j0, j0 + 5)
            wts[i] = _local_weights(r[j0:j0 + 5], r[i], order)
        self._cache[key] = (idx, wts)
        return idx, wts

    def differentiate(self, values: np.ndarray, order: int = 1) -> np.ndarray:
        """4th-order differentiation along the first axis of `values`."""
        idx, wts = self._derivative_stencils(order)
        vals = np.asarray(values)
        gathered = vals[idx]  # (m, 5, ...)
        if gathered.ndim > 2:
            return np.einsum("ij,ij...->i...", wts, gathered)
        return np.einsum("ij,ij->i", wts, gathered)

    def cell_integrals(self, values: np.ndarray) -> np.ndarray:
        _, _, g_w, _ = self._cell_quadrature()
        return np.einsum("cg,cg->c", g_w, self._gauss_values(values))


# ----------------------------------------------------------------------------
# profiles and weighted norms


@dataclass
class RadialProfile:
    """One Fourier mode's radial dependence, sampled on the grid."""

    grid: RadialGrid
    values: np.ndarray
    d1: Optional[np.ndarray] = None
    d2: Optional[np.ndarray] = None
    decay_exponent: Optional[float] = None

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.shape != self.grid.nodes.shape:
            raise DomainError("profile values must be sampled on the grid nodes")
        for name in ("d1", "d2"):
            arr = getattr(self, name)
            if arr is not None:
                arr = np.asarray(arr)
                if arr.shape != self.grid.nodes.shape:
                    raise DomainError(f"profile {name} shape mismatch")
                setattr(self, name, arr)

    @classmethod
    def zero(cls, grid: RadialGrid) -> "RadialProfile":
        z = np.zeros(len(grid), dtype=complex)
        return cls(grid, z, z.copy(), z.copy(), decay_exponent=None)

    def derivative(self, order: int) -> np.ndarray:
        if order == 0:
            return self.values
        if order == 1:
            if self.d1 is None:
                raise NumericError("profile is missing its first derivative")
            return self.d1
        if order == 2:
            if self.d2 is None:
                raise NumericError("profile is missing its second derivative")
            return self.d2
        raise DomainError("only derivatives of order <= 2 are stored")

    def weighted_sup(self, zeta: float, order: int = 0) -> "WeightedNorm":
        return weighted_sup(self.derivative(order), self.grid, zeta)

    def conjugate(self) -> "RadialProfile":
        return RadialProfile(
            self.grid, np.conj(self.values),
            None if self.d1 is None else np.conj(self.d1),
            None if self.d2 is None else np.conj(self.d2),
            self.decay_exponent)

    def __add__(self, other: "RadialProfile") -> "RadialProfile":
        return self._combine(other, 1.0)

    def __sub__(self, other: "RadialProfile") -> "RadialProfile":
        return self._combine(other, -1.0)

    def scaled(self, c) -> "RadialProfile":
        return RadialProfile(
            self.grid, c * self.values,
            None if self.d1 is None else c * self.d1,
            None if self.d2 is None else c * self.d2,
            self.decay_exponent)

    def _combine(self, other, sgn):
        if other.grid is not self.grid and not np.array_equal(
                other.grid.nodes, self.grid.nodes):
            raise DomainError("profiles live on different grids")

        def comb(a, b):
            if a is None or b is None:
                return None
            return a + sgn * b

        dec = None
        if self.decay_exponent is not None and other.decay_exponent is not None:
            dec = min(self.decay_exponent, other.decay_exponent)
        return RadialProfile(self.grid, self.values + sgn * other.values,
                             comb(self.d1, other.d1), comb(self.d2, other.d2), dec)


@dataclass(frozen=True)
class WeightedNorm:
    """sup over nodes of r^zeta |s(r)| plus the node where it is attained."""

    zeta: float
    value: float
    argmax_r: float


def weighted_sup(values, grid: RadialGrid, zeta: float) -> WeightedNorm:
    w = grid.nodes ** zeta * np.abs(np.asarray(values))
    i = int(np.argmax(w))
    return WeightedNorm(zeta, float(w[i]), float(grid.nodes[i]))


# ----------------------------------------------------------------------------
# plain quadrature with tail closure


def _sample(f, grid: RadialGrid) -> np.ndarray:
    if callable(f):
        return np.asarray(f(grid.nodes))
    arr = np.asarray(f)
    if arr.shape != grid.nodes.shape:
        raise DomainError("sampled integrand does not match the grid")
    return arr


def tail_closure(value_at_rmax, r_max: float, p: float):
    """int_{r_max}^inf A s^{-p} ds with A matched at the last node."""
    if p <= 1.0:
        raise NumericError(f"non-integrable tail: decay exponent {p} <= 1")
    return value_at_rmax * r_max / (p - 1.0)


def _check_declared_tail(values, grid: RadialGrid, p: float, total) -> None:
    """Warn when the fitted last-decade slope contradicts the declared one."""
    mask = grid.last_decade_mask()
    v = np.abs(np.asarray(values)[mask])
    closure = np.abs(tail_closure(values[-1], grid.r_max, p))
    if closure <= 1e-12 * max(np.abs(total), 1e-300) or np.any(v <= 0):
        return
    slope = np.polyfit(np.log(grid.nodes[mask]), np.log(v), 1)[0]
    if abs(slope + p) > 0.25:
        warnings.warn(
            f"declared tail exponent {p} but fitted slope {-slope:.3f}; "
            "outer integral tail closure may be inaccurate",
            RuntimeWarning, stacklevel=3)


def integrate_inner(f, grid: RadialGrid, r: Optional[float] = None):
    """int_1^r f ds at grid nodes (all nodes when r is None)."""
    vals = _sample(f, grid)
    cells = grid.cell_integrals(vals)
    prefix = np.concatenate(([0.0], np.cumsum(cells)))
    if r is None:
        return prefix
    return prefix[grid.node_index(r)]


def integrate_outer(f, grid: RadialGrid, r: Optional[float] = None,
                    decay_exponent: Optional[float] = None, check_tail: bool = True):
    """int_r^inf f ds = quadrature to r_max + analytic power-law tail."""
    vals = _sample(f, grid)
    cells = grid.cell_integrals(vals)
    suffix = np.concatenate((np.cumsum(cells[::-1])[::-1], [0.0]))
    if decay_exponent is None:
        raise NumericError("outer integrals need a declared decay exponent")
    tail = tail_closure(vals[-1], grid.r_max, decay_exponent)
    if check_tail:
        _check_declared_tail(vals, grid, decay_exponent, suffix[0] + tail)
    out = suffix + tail
    if r is None:
        return out
    return out[grid.node_index(r)]


# ----------------------------------------------------------------------------
# exponentially weighted prefix/suffix integrals in scaled arithmetic


def exp_weighted_prefix(grid: RadialGrid, b, rate: float) -> ScaledValue:
    """P(r_j) = int_1^{r_j} b(s) e^{rate s} ds as ScaledValue with shift rate*r_j.

    rate must be >= 0: prefix integrals only pair with growing kernels in the
    Green's representations.
    """
    if rate < 0:
        raise DomainError("exp_weighted_prefix expects rate >= 0")
    b = _sample(b, grid)
    r = grid.nodes
    n = grid.n_cells
    out = np.zeros(len(grid), dtype=b.dtype if np.iscomplexobj(b) else float)
    if rate == 0.0:
        cells = grid.cell_integrals(b)
        out[1:] = np.cumsum(cells)
        return ScaledValue(out, np.zeros_like(r))
    bounds = _block_bounds(r, rate)
    carry = 0.0  # prefix value scaled by e^{-rate * r[block end]}
    m = grid.subdivision_for_rate(rate)
    _, g_r, g_w, _ = grid._cell_quadrature(m)
    b_gauss = grid._gauss_values(b, m)
    for lo, hi in bounds:  # cells lo..hi-1
        factors = np.exp(rate * (g_r[lo:hi] - r[hi]))
        blk_cells = np.einsum("cg,cg,cg->c", g_w[lo:hi], b_gauss[lo:hi], factors)
        local = np.cumsum(blk_cells)  # prefix within block, scaled by e^{-rate r[hi]}
        carry_here = carry * np.exp(rate * (r[lo] - r[hi]))
        total = carry_here + local
        # per-node mantissa at shift rate*r_j
        out[lo + 1: hi + 1] = total * np.exp(rate * (r[hi] - r[lo + 1: hi + 1]))
        carry = total[-1]
    return ScaledValue(out, rate * r)


def exp_weighted_suffix(grid: RadialGrid, b, rate: float,
                        tail_exponent: Optional[float] = None,
                        check_tail: bool = False) -> ScaledValue:
    """S(r_j) = int_{r_j}^inf b(s) e^{rate s} ds with shift rate*r_j.

    rate must be <= 0 (decaying integrands).  For rate == 0 a declared
    power-law tail exponent closes the [r_max, inf) part; for rate < 0 the
    exponential factor makes that remainder negligible.
    """
    if rate > 0:
        raise DomainError("exp_weighted_suffix expects rate <= 0")
    b = _sample(b, grid)
    r = grid.nodes
    out = np.zeros(len(grid), dtype=b.dtype if np.iscomplexobj(b) else float)
    if rate == 0.0:
        cells = grid.cell_integrals(b)
        out[:-1] = np.cumsum(cells[::-1])[::-1]
        if tail_exponent is not None:
            tail = tail_closure(b[-1], grid.r_max, tail_exponent)
            if check_tail:
                _check_declared_tail(b, grid, tail_exponent, out[0] + tail)
            out = out + tail
        return ScaledValue(out, np.zeros_like(r))
    bounds = _block_bounds(r, -rate)
    carry = 0.0  # suffix scaled by e^{-rate * r[block start]}
    m = grid.subdivision_for_rate(-rate)
    _, g_r, g_w, _ = grid._cell_quadrature(m)
    b_gauss = grid._gauss_values(b, m)
    for lo, hi in reversed(bounds):
        factors = np.exp(rate * (g_r[lo:hi] - r[lo]))
        blk_cells = np.einsum("cg,cg,cg->c", g_w[lo:hi], b_gauss[lo:hi], factors)
        local = np.cumsum(blk_cells[::-1])[::-1]  # suffix within block @ shift rate*r[lo]
        carry_here = carry * np.exp(rate * (r[hi] - r[lo]))
        total = local + carry_here
        out[lo:hi] = total * np.exp(rate * (r[lo] - r[lo:hi]))
        carry = total[0] if total.size else carry_here
    return ScaledValue(out, rate * r)


def _block_bounds(r: np.ndarray, rate_mag: float):
    """Split cells into blocks with rate_mag * span <= _BLOCK_LOG_SPAN."""
    n = r.size - 1
    bounds = []
    lo = 0
    while lo < n:
        span = _BLOCK_LOG_SPAN / max(rate_mag, 1e-300)
        hi = int(np.searchsorted(r, r[lo] + span, side="right") - 1)
        hi = max(hi, lo + 1)
        hi = min(hi, n)
        bounds.append((lo, hi))
        lo = hi
    return bounds


# ----------------------------------------------------------------------------
# finite-difference oracles


def _nonuniform_second_order_rows(r: np.ndarray):
    """Coefficients of v', v'' at interior nodes from 3-point stencils."""
    hm = r[1:-1] - r[:-2]
    hp = r[2:] - r[1:-1]
    denom = hm * hp * (hm + hp)
    # v' ~ a1 v_{i-1} + b1 v_i + c1 v_{i+1}
    a1 = -hp ** 2 / denom
    b1 = (hp ** 2 - hm ** 2) / denom
    c1 = hm ** 2 / denom
    # v'' ~ a2 v_{i-1} + b2 v_i + c2 v_{i+1}
    a2 = 2.0 * hp / denom
    b2 = -2.0 * (hm + hp) / denom
    c2 = 2.0 * hm / denom
    return (a1, b1, c1), (a2, b2, c2)


def fd_bvp_solve(grid: RadialGrid, p1: Callable, p0: Callable, ksq: float,
                 rhs, bc_left: complex, decay_exponent: float) -> np.ndarray:
    """Second-order FD solution of -(v'' + p1 v' + p0 v - ksq v) = f.

    Dirichlet value at r = 1.  The outer closure comes from the decay class
    p: for ksq > 0 the Robin condition v' + (sqrt(ksq) + p/r) v = 0, and for
    ksq = 0 the annihilator (r d/dr + p)^2 v = 0, which is exact on both
    r^-p and r^-p log r asymptotics.  Independent of the Green's-function
    solvers (different discretization, different code path); used as the
    correctness oracle for all of them.
    """
    import scipy.sparse as sp
    import scipy.sparse.linalg as spla

    r = grid.nodes
    m = r.size
    f = _sample(rhs, grid)
    complex_sys = np.iscomplexobj(f) or np.iscomplexobj(np.asarray(bc_left))
    dtype = complex if complex_sys else float

    (a1, b1, c1), (a2, b2, c2) = _nonuniform_second_order_rows(r)
    ri = r[1:-1]
    p1v = p1(ri)
    p0v = p0(ri)
    rows, cols, data = [], [], []
    b = np.zeros(m, dtype=dtype)
    ii = np.arange(1, m - 1)
    for off, coef in ((-1, -(a2 + p1v * a1)),
                      (0, -(b2 + p1v * b1) - p0v + ksq),
                      (+1, -(c2 + p1v * c1))):
        rows.extend(ii)
        cols.extend(ii + off)
        data.extend(coef)
    b[1:-1] = f[1:-1]

    rows.append(0)
    cols.append(0)
    data.append(1.0)
    b[0] = bc_left

    # outer closure row from 5-point one-sided derivative stencils
    d1 = _local_weights(r[-5:], r[-1], 1)
    p = decay_exponent
    if ksq > 0:
        beta = p / r[-1] + np.sqrt(ksq)
        row = d1.copy()
        row[-1] += beta
    else:
        d2 = _local_weights(r[-5:], r[-1], 2)
        row = r[-1] ** 2 * d2 + (2.0 * p + 1.0) * r[-1] * d1
        row[-1] += p * p
    rows.extend([m - 1] * 5)
    cols.extend(range(m - 5, m))
    data.extend(row)
    b[m - 1] = 0.0

    mat = sp.csr_matrix((data, (rows, cols)), shape=(m, m), dtype=dtype)
    with np.errstate(all="ignore"):
        try:
            sol = spla.spsolve(mat, b)
        except Exception as exc:  # singular matrix => ill-posed parameters
            raise NumericError(f"FD oracle linear system is singular: {exc}") from exc
    if not np.all(np.isfinite(sol)):
        raise NumericError("FD oracle produced non-finite values "
                           "(ill-posed parameter combination?)")
    return sol


def fd_meridional_solve(grid: RadialGrid, k: int, nu: float, big_f,
                        g_r: complex, g_z: complex, decay_exponent: float):
    """Coupled second-order FD solve of the stream/vorticity system.

    Unknowns (phi, w) with
        -(phi'' + phi'/r - k^2 phi - phi/r^2) = w
        -(w'' + (1-nu)/r w' - ((1-nu)/r^2 + k^2) w) = F
    boundary rows -ik phi(1) = g_r, phi'(1) + phi(1) = g_z and Robin decay
    closures for both unknowns at r_max.  Returns (phi, w, v_r, v_z) arrays.
    """
    if k == 0:
        raise DomainError("coupled meridional oracle requires k != 0")
    import scipy.sparse as sp
    import scipy.sparse.linalg as spla

    r = grid.nodes
    m = r.size
    F = _sample(big_f, grid)
    (a1, b1, c1), (a2, b2, c2) = _nonuniform_second_order_rows(r)
    ri = r[1:-1]
    kk = abs(k)

    rows, cols, data = [], [], []
    rhs = np.zeros(2 * m, dtype=complex)

    def add(i, j, v):
        rows.append(i)
        cols.append(j)
        data.append(v)

    # phi equations at interior nodes: row i in [1, m-2]
    p1v = 1.0 / ri
    p0v = -(1.0 / ri ** 2)
    for t, i in enumerate(range(1, m - 1)):
        add(i, i - 1, -(a2[t] + p1v[t] * a1[t]))
        add(i, i, -(b2[t] + p1v[t] * b1[t]) - p0v[t] + kk * kk)
        add(i, i + 1, -(c2[t] + p1v[t] * c1[t]))
        add(i, m + i, -1.0)  # -w
        rhs[i] = 0.0
    # w equations at interior nodes: row m+i
    q1v = (1.0 - nu) / ri
    q0v = -((1.0 - nu) / ri ** 2)
    for t, i in enumerate(range(1, m - 1)):
        add(m + i, m + i - 1, -(a2[t] + q1v[t] * a1[t]))
        add(m + i, m + i, -(b2[t] + q1v[t] * b1[t]) - q0v[t] + kk * kk)
        add(m + i, m + i + 1, -(c2[t] + q1v[t] * c1[t]))
        rhs[m + i] = F[i]

    # boundary: phi(1) = -g_r/(ik) = i g_r / k
    add(0, 0, 1.0)
    rhs[0] = g_r * 1j / k
    # boundary: phi'(1) + phi(1) = g_z (2nd-order one-sided)
    w0 = _local_weights(r[:3], r[0], 1)
    add(m, 0, w0[0] + 1.0)
    add(m, 1, w0[1])
    add(m, 2, w0[2])
    rhs[m] = g_z

    beta = decay_exponent / r[-1] + kk
    w1 = _local_weights(r[-3:], r[-1], 1)
    for off in (0, m):  # same Robin closure for phi and w
        add(m - 1 + off, off + m - 3, w1[0])
        add(m - 1 + off, off + m - 2, w1[1])
        add(m - 1 + off, off + m - 1, w1[2] + beta)
        rhs[m - 1 + off] = 0.0

    mat = sp.csr_matrix((data, (rows, cols)), shape=(2 * m, 2 * m))
    sol = spla.spsolve(mat, rhs)
    if not np.all(np.isfinite(sol)):
        raise NumericError("coupled FD oracle produced non-finite values")
    phi, w = sol[:m], sol[m:]
    d_phi = grid.differentiate(phi, 1)
    v_r = -1j * k * phi
    v_z = d_phi + phi / r
    return phi, w, v_r, v_z

"""Grid-level Dunkl operator, right inverse, and resolvent of nonlocal problems.

Everything here acts on ParityGrid data.  The reflection-differential
operator splits over parity:

    (D f)_even = f_odd' + 2k f_odd / x        (limit (1+2k) f_odd'(0) at 0)
    (D f)_odd  = f_even'

Its right inverse maps the odd part to a cumulative integral and the even
part through a one-sided weighted integral; subtracting the functional's
value of the result gives the normalized inverse annihilated by phi.

The resolvent solves  D u = lambda u + f,  phi{u} = 0  by a Runge-Kutta
march of the parity system (regular initial data, forward-stable against
the singular x^(-2k) mode) followed by a rank-one correction along the
eigenfunction.  Residuals are checked on return; a lambda at (or
numerically at) an indicatrix zero is refused at problem construction.
"""

from __future__ import annotations

import numpy as np

from . import functionals
from .dunkl_kernel import (
    DIVISOR_TOL,
    Indicatrix,
    indicatrix_eval,
    u_jet_grid,
)
from .errors import DivisorOfZero, ParameterError, ResidualError
from .poly_ops import DunklParam
from .scalar_grid import (
    ParityGrid,
    cumulative_integral,
    derivative_uniform,
    gauss_jacobi,
)
from ._kernels import interp_parity

ODE_RESIDUAL_TOL = 1e-6
PHI_RESIDUAL_TOL = 1e-8
MAX_RESOLVENT_POWER = 8

_SQUAD = {}


def _s_rule(k: DunklParam, q: int = 48):
    """Nodes/weights for int_0^1 s^(2k) g(s) ds, cached per parameter."""
    key = (k.kf, q)
    if key not in _SQUAD:
        rule = gauss_jacobi(q, 0.0, 2.0 * k.kf)
        s = (1.0 + rule.nodes) / 2.0
        w = rule.weights * 2.0 ** (-(2.0 * k.kf + 1.0))
        _SQUAD[key] = (s, w)
    return _SQUAD[key]


def dunkl_apply_grid(f: ParityGrid, k) -> ParityGrid:
    """Apply the reflection-differential operator to grid data (5-point stencils)."""
    k = DunklParam.of(k)
    kf = k.kf
    h = f.h
    d_odd = derivative_uniform(f.odd, h, -1)
    d_even = derivative_uniform(f.even, h, +1)
    even_out = d_odd.copy()
    if kf != 0.0:
        xs = f.nodes
        quot = np.empty_like(f.odd)
        quot[0] = d_odd[0]  # f_odd/x -> f_odd'(0)
        quot[1:] = f.odd[1:] / xs[1:]
        even_out = even_out + 2.0 * kf * quot
    odd_out = d_even
    odd_out[0] = 0.0
    return ParityGrid(f.xmax, f.n, even_out, odd_out)


def lambda_k_grid(f: ParityGrid, k) -> ParityGrid:
    """Right inverse: even part from the cumulative integral of f_odd, odd part
    from the s^(2k)-weighted average of f_even along [0, x]."""
    k = DunklParam.of(k)
    even_out = cumulative_integral(f.odd, f.h, left_parity=-1)
    s, w = _s_rule(k)
    xs = f.nodes
    pts = np.outer(xs, s).ravel()
    zero = np.zeros_like(f.even)
    fe = interp_parity(np.ascontiguousarray(f.even), zero, f.h, pts).reshape(len(xs), len(s))
    odd_out = xs * (fe @ w)
    odd_out[0] = 0.0
    return ParityGrid(f.xmax, f.n, even_out, odd_out)


def lk_grid(f: ParityGrid, k, phi: functionals.Functional) -> ParityGrid:
    """Normalized right inverse: subtract the functional's value so phi{result}=0."""
    g = lambda_k_grid(f, k)
    c = functionals.apply(phi, g)
    return ParityGrid(g.xmax, g.n, g.even - c, g.odd)


class ResolventProblem:
    """Data of  D u = lambda u + f  with  phi{u} = 0.

    Construction refuses lambda at which the indicatrix is numerically zero
    (|E| <= 1e-10); pass a prebuilt Indicatrix to amortize series setup.
    """

    __slots__ = ("k", "phi", "lam", "f", "ind", "E")

    def __init__(self, k, phi: functionals.Functional, lam: complex, f: ParityGrid,
                 ind: Indicatrix = None):
        self.k = DunklParam.of(k)
        self.phi = phi
        self.lam = complex(lam)
        self.f = f
        if ind is None:
            ind = Indicatrix.build(self.k, phi)
        self.ind = ind
        self.E = indicatrix_eval(ind, self.lam)
        if abs(self.E) <= DIVISOR_TOL:
            raise DivisorOfZero(
                f"indicatrix vanishes at lambda={self.lam}: |E|={abs(self.E):.3e}")

    def with_source(self, f: ParityGrid) -> "ResolventProblem":
        return ResolventProblem(self.k, self.phi, self.lam, f, ind=self.ind)


def _midpoints(vals: np.ndarray, parity: int) -> np.ndarray:
    """Cubic midpoint interpolation with parity reflection on the left."""
    n = len(vals) - 1
    ext = np.empty(n + 3, vals.dtype)
    ext[1:n + 2] = vals
    ext[0] = parity * vals[1]
    ext[n + 2] = 4.0 * vals[n] - 6.0 * vals[n - 1] + 4.0 * vals[n - 2] - vals[n - 3]
    return (-ext[:-3] + 9.0 * ext[1:-2] + 9.0 * ext[2:-1] - ext[3:]) / 16.0


_J_START = 6  # nodes covered by the series start before the RK march takes over


def _series_start(kf: float, lam: complex, fe: np.ndarray, fo: np.ndarray, h: float):
    """Power-series solution of the parity system on the first few nodes.

    The quotient term makes Runge-Kutta stages lose accuracy right at the
    origin, so the first nodes come from the recurrence

        o_m = (lam e_{m-1} + fe_{m-1}) / (m + 2k),   e_{m+1} = (lam o_m + fo_m)/(m+1)

    fed by local parity-polynomial fits of the source term.
    """
    # even fit through nodes 0..5 in the variable (x/(5h))^2
    t = (np.arange(6) / 5.0) ** 2
    M = np.vander(t, 6, increasing=True)
    ae = np.linalg.solve(M, fe[:6])
    FE = np.zeros(14, np.complex128)
    FE[0:11:2] = ae / (5.0 * h) ** np.arange(0, 11, 2)
    # odd fit through nodes 1..6 of fo(x)/x in the variable (x/(6h))^2
    t = (np.arange(1, 7) / 6.0) ** 2
    M = np.vander(t, 6, increasing=True)
    ao = np.linalg.solve(M, fo[1:7] / (h * np.arange(1, 7)))
    FO = np.zeros(14, np.complex128)
    FO[1:12:2] = ao / (6.0 * h) ** np.arange(0, 11, 2)

    e = np.zeros(15, np.complex128)
    o = np.zeros(15, np.complex128)
    for m in range(1, 14, 2):
        o[m] = (lam * e[m - 1] + FE[m - 1]) / (m + 2.0 * kf)
        e[m + 1] = (lam * o[m] + FO[m]) / (m + 1)
    xs = h * np.arange(_J_START + 1)
    pw = np.vander(xs, 15, increasing=True)
    return pw @ e, pw @ o


def resolvent_apply(rp: ResolventProblem, check: bool = True) -> ParityGrid:
    """Solve the resolvent problem on the grid of its source term.

    March the parity system by classical Runge-Kutta (midpoint data by cubic
    interpolation), then correct by a multiple of the eigenfunction so the
    functional annihilates the result.
    """
    lam = rp.lam
    kf = rp.k.kf
    f = rp.f
    n, h = f.n, f.h
    fe, fo = f.even, f.odd
    fem, fom = _midpoints(fe, +1), _midpoints(fo, -1)

    we = np.zeros(n + 1, np.complex128)
    wo = np.zeros(n + 1, np.complex128)
    c0 = 1.0 + 2.0 * kf
    we[: _J_START + 1], wo[: _J_START + 1] = _series_start(kf, lam, fe, fo, h)

    def rhs(x, a, b, fev, fov):
        # a = w_even, b = w_odd
        da = lam * b + fov
        if x < 1e-12 * h:
            db = (lam * a + fev) / c0
        else:
            db = lam * a + fev - 2.0 * kf * b / x
        return da, db

    for j in range(_J_START, n):
        x = j * h
        a, b = we[j], wo[j]
        k1a, k1b = rhs(x, a, b, fe[j], fo[j])
        k2a, k2b = rhs(x + h / 2, a + h / 2 * k1a, b + h / 2 * k1b, fem[j], fom[j])
        k3a, k3b = rhs(x + h / 2, a + h / 2 * k2a, b + h / 2 * k2b, fem[j], fom[j])
        k4a, k4b = rhs(x + h, a + h * k3a, b + h * k3b, fe[j + 1], fo[j + 1])
        we[j + 1] = a + h / 6 * (k1a + 2 * k2a + 2 * k3a + k4a)
        wo[j + 1] = b + h / 6 * (k1b + 2 * k2b + 2 * k3b + k4b)

    w = ParityGrid(f.xmax, n, we, wo)
    phi_w = functionals.apply(rp.phi, w)
    ug = u_jet_grid(rp.ind.series, lam, 0, f.xmax, n)
    coef = phi_w / rp.E
    u = ParityGrid(f.xmax, n, we - coef * ug.even, wo - coef * ug.odd)

    if check:
        resid = dunkl_apply_grid(u, rp.k) - (lam * u) - f
        r = resid.sup_norm()
        bound = ODE_RESIDUAL_TOL * (1.0 + f.sup_norm())
        if r >= bound:
            raise ResidualError(f"resolvent residual {r:.3e} exceeds {bound:.3e}")
        pr = abs(functionals.apply(rp.phi, u))
        if pr >= PHI_RESIDUAL_TOL:
            raise ResidualError(f"functional residual {pr:.3e} exceeds {PHI_RESIDUAL_TOL:.1e}")
    return u


def resolvent_power_apply(rp: ResolventProblem, l: int, check: bool = True) -> ParityGrid:
    """l successive resolvent applications, 1 <= l <= 8."""
    if not 1 <= l <= MAX_RESOLVENT_POWER:
        raise ParameterError(f"power must be in 1..{MAX_RESOLVENT_POWER}")
    g = resolvent_apply(rp, check=check)
    for _ in range(l - 1):
        rp = rp.with_source(g)
        g = resolvent_apply(rp, check=check)
    return g

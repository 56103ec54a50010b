"""Intertwining operator, nonlocal convolutions, and multiplier operators.

The intertwining operator V maps ordinary differentiation to the Dunkl
operator.  Forward application is a one-dimensional Jacobi-weighted average

    V f(x) = b_k int_{-1}^{1} f(x y) (1-y)^(k-1) (1+y)^k dy,    V{1} = 1,

and for 0 < k < 1 the inverse is an Abel-type pair of integrals which the
substitution y = x sqrt(s) turns into smooth profiles handled by Jacobi
quadrature plus one 5-point differentiation.

On the classical side of V sits the auxiliary convolution

    (f *~ g)(x) = phi~_t{ int_t^x f(x+t-tau) g(tau) dtau },

with phi~ = phi o V applied in the t-variable.  Conjugating by V gives the
Dunkl convolution for 0 < k < 1 (k = 0 degenerates to the classical case).
Multiplier operators act through the kernel class spanned by the Appell
functions and the resolvent kernels, where composition identities make the
Dunkl derivative of a convolution available without numerical
differentiation of the result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from . import functionals
from ._kernels import interp_parity
from .dunkl_kernel import Indicatrix
from .errors import KernelClassError, ParameterError, RoundTripError
from .poly_ops import DunklParam
from .resolvent import ResolventProblem, lk_grid, resolvent_apply
from .scalar_grid import MIN_GRID_N, ParityGrid, derivative_uniform, gauss_jacobi

VK_Q = 64
CONV_Q = 48
ROUNDTRIP_TOL = 1e-3

_RULES = {}


def _unit_jacobi_rule(q: int, alpha: float, beta: float):
    """Nodes s in [0,1] and weights for int_0^1 s^alpha (1-s)^beta g(s) ds."""
    key = (q, alpha, beta)
    if key not in _RULES:
        rule = gauss_jacobi(q, alpha, beta)
        s = (1.0 - rule.nodes) / 2.0
        w = rule.weights * 0.5 ** (alpha + beta + 1.0)
        _RULES[key] = (s, w)
    return _RULES[key]


def vk_forward(f: ParityGrid, k) -> ParityGrid:
    """Apply the intertwining operator (identity at k = 0)."""
    k = DunklParam.of(k)
    if k.kf == 0.0:
        return f.copy()
    key = ("vkf", k.kf)
    if key not in _RULES:
        rule = gauss_jacobi(VK_Q, k.kf - 1.0, k.kf)
        _RULES[key] = (rule.nodes, rule.weights / rule.weights.sum())
    y, w = _RULES[key]
    pts = np.outer(f.nodes, y)
    vals = interp_parity(f.even, f.odd, f.h, pts.ravel()).reshape(pts.shape)
    vp = vals @ w                    # V f at +nodes
    vals = interp_parity(f.even, f.odd, f.h, (-pts).ravel()).reshape(pts.shape)
    vm = vals @ w                    # V f at -nodes
    ev = (vp + vm) / 2.0
    ov = (vp - vm) / 2.0
    ov[0] = 0.0
    return ParityGrid(f.xmax, f.n, ev, ov)


def vk_inverse_smallk(f: ParityGrid, k) -> ParityGrid:
    """Inverse intertwining operator for 0 < k < 1.

    Substituting y = x sqrt(s) in the Abel integrals gives

        I_e(x) = (x/2)   int_0^1 (1-s)^(-k) s^(k-1/2) f_e(x sqrt(s)) ds
        I_o(x) = (x^2/2) int_0^1 (1-s)^(-k) s^k       f_o(x sqrt(s)) ds

    and the result has even part c_k I_e'(x)/2 and odd part c_k I_o'(x)/(2x)
    with c_k = 2 sqrt(pi) / (Gamma(k+1/2) Gamma(1-k)).  The derivative is the
    only finite-difference step.  A forward round trip is verified on return;
    drift beyond 1e-3 raises RoundTripError.
    """
    k = DunklParam.of(k)
    kf = k.kf
    if not 0.0 < kf < 1.0:
        raise ParameterError("inverse intertwining requires 0 < k < 1")
    ck = 2.0 * math.sqrt(math.pi) / (math.gamma(kf + 0.5) * math.gamma(1.0 - kf))
    xs = f.nodes
    zero = np.zeros_like(f.even)

    s, w = _unit_jacobi_rule(VK_Q, kf - 0.5, -kf)
    pts = np.outer(xs, np.sqrt(s))
    fe = interp_parity(f.even, zero, f.h, pts.ravel()).reshape(pts.shape)
    Ie = (xs / 2.0) * (fe @ w)

    s, w = _unit_jacobi_rule(VK_Q, kf, -kf)
    pts = np.outer(xs, np.sqrt(s))
    fo = interp_parity(zero, f.odd, f.h, pts.ravel()).reshape(pts.shape)
    # odd part sampled at +x sqrt(s): equals f_o there
    Io = (xs * xs / 2.0) * (fo @ w)

    ev = ck / 2.0 * derivative_uniform(Ie, f.h, -1)
    dIo = derivative_uniform(Io, f.h, -1)
    ov = np.empty_like(dIo)
    ov[0] = 0.0
    ov[1:] = ck * dIo[1:] / (2.0 * xs[1:])
    out = ParityGrid(f.xmax, f.n, ev, ov)

    rt = vk_forward(out, k)
    drift = (rt - f).sup_norm()
    if drift >= ROUNDTRIP_TOL * (1.0 + f.sup_norm()):
        raise RoundTripError(f"forward/inverse round trip drift {drift:.3e}")
    return out


# ---------------------------------------------------------------------------
# the auxiliary (classical-side) convolution

class TildeProblem:
    """Parameter bundle for the auxiliary convolution: k, phi, and the
    composed functional phi~ = phi o V applied to grid data in t."""

    __slots__ = ("k", "phi")

    def __init__(self, k, phi: functionals.Functional):
        self.k = DunklParam.of(k)
        self.phi = phi

    def phi_tilde(self, h: ParityGrid) -> complex:
        return functionals.apply(self.phi, vk_forward(h, self.k))


def _inner_profile(f: ParityGrid, g: ParityGrid, t: float, sx: np.ndarray,
                   sig: np.ndarray, sw: np.ndarray) -> np.ndarray:
    """H(x, t) = int_t^x f(x+t-tau) g(tau) dtau for all signed nodes x."""
    span = sx - t
    fa = sx[:, None] - span[:, None] * sig[None, :]
    ga = t + span[:, None] * sig[None, :]
    fv = interp_parity(f.even, f.odd, f.h, fa.ravel()).reshape(fa.shape)
    gv = interp_parity(g.even, g.odd, g.h, ga.ravel()).reshape(ga.shape)
    return span * ((fv * gv) @ sw)


_TILDE_ROWS = {}


def _phi_tilde_row(tp: TildeProblem, nt: int, tmax: float) -> np.ndarray:
    """Row vector r with phi~{h} = r . h(signed t-nodes), from unit responses."""
    key = (tp.k.kf, tuple(tp.phi.atoms), nt, tmax)
    if key in _TILDE_ROWS:
        return _TILDE_ROWS[key]
    m = 2 * nt + 1
    row = np.empty(m, np.complex128)
    for idx in range(m):
        vals = np.zeros(m)
        vals[idx] = 1.0
        ev = (vals[nt:] + vals[nt::-1]) / 2.0
        ov = (vals[nt:] - vals[nt::-1]) / 2.0
        ov[0] = 0.0
        row[idx] = tp.phi_tilde(ParityGrid(tmax, nt, ev, ov))
    _TILDE_ROWS[key] = row
    return row


def tilde_conv(f: ParityGrid, g: ParityGrid, tp: TildeProblem) -> ParityGrid:
    """The auxiliary convolution f *~ g on the grid of f."""
    if f.n != g.n or f.xmax != g.xmax:
        raise ParameterError("operands must share one grid")
    if tp.phi.radius > f.xmax:
        raise ParameterError("functional atoms exceed the grid domain")
    n = f.n
    sx = np.concatenate([-f.nodes[:0:-1], f.nodes])  # signed nodes, ascending
    sig, gl_w = np.polynomial.legendre.leggauss(CONV_Q)
    sig = (sig + 1.0) / 2.0
    sw = gl_w / 2.0

    if tp.phi.is_dirac_at_zero():
        vals = _inner_profile(f, g, 0.0, sx, sig, sw)
    else:
        # t-grid over the functional's reach; phi~ needs H(x, .) as a grid.
        # phi~ is linear in the nodal t-values, so it collapses to one row.
        nt = max(MIN_GRID_N, int(math.ceil(tp.phi.radius / f.h)))
        tmax = tp.phi.radius
        ht = tmax / nt
        row = _phi_tilde_row(tp, nt, tmax)
        H = np.empty((sx.shape[0], 2 * nt + 1), np.complex128)
        for j in range(-nt, nt + 1):
            H[:, nt + j] = _inner_profile(f, g, j * ht, sx, sig, sw)
        vals = H @ row

    ev = (vals[n:] + vals[n::-1]) / 2.0
    ov = (vals[n:] - vals[n::-1]) / 2.0
    ov[0] = 0.0
    return ParityGrid(f.xmax, n, ev, ov)


def lambda_tilde(f: ParityGrid, tp: TildeProblem) -> ParityGrid:
    """{1} *~ f: the phi~-corrected antiderivative."""
    one = ParityGrid(f.xmax, f.n, np.ones(f.n + 1, np.complex128),
                     np.zeros(f.n + 1, np.complex128))
    return tilde_conv(one, f, tp)


def dunkl_conv_smallk(f: ParityGrid, g: ParityGrid, k, phi: functionals.Functional) -> ParityGrid:
    """Dunkl convolution f * g for 0 <= k < 1 by conjugation with V."""
    k = DunklParam.of(k)
    tp = TildeProblem(k, phi)
    if k.kf == 0.0:
        return tilde_conv(f, g, tp)
    fi = vk_inverse_smallk(f, k)
    gi = vk_inverse_smallk(g, k)
    return vk_forward(tilde_conv(fi, gi, tp), k)


# ---------------------------------------------------------------------------
# kernel class and multipliers

@dataclass(frozen=True)
class KernelTerm:
    """One summand of a kernel-class function."""

    kind: str               # "appell" or "resolvent_kernel"
    order: int = 0          # Appell index
    lam: complex = 0.0      # resolvent eigenvalue
    coef: complex = 1.0


def appell_kernel(n: int, coef: complex = 1.0) -> KernelTerm:
    if n < 0:
        raise ParameterError("Appell index must be >= 0")
    return KernelTerm(kind="appell", order=n, coef=coef)


def resolvent_kernel(lam: complex, coef: complex = 1.0) -> KernelTerm:
    return KernelTerm(kind="resolvent_kernel", lam=complex(lam), coef=coef)


KernelClass = Union[KernelTerm, Sequence[KernelTerm]]


def _terms(m: KernelClass):
    if isinstance(m, KernelTerm):
        terms = [m]
    else:
        try:
            terms = list(m)
        except TypeError:
            raise KernelClassError(f"not in the kernel class: {m!r}") from None
    if not terms:
        raise KernelClassError("empty kernel-class function")
    for t in terms:
        if not isinstance(t, KernelTerm) or t.kind not in ("appell", "resolvent_kernel"):
            raise KernelClassError(f"not in the kernel class: {t!r}")
        if t.kind == "appell" and (t.order < 0 or t.order != int(t.order)):
            raise KernelClassError(f"appell term needs integer order >= 0, got {t.order!r}")
    return terms


def kernel_conv(m: KernelClass, f: ParityGrid, k, phi: functionals.Functional,
                ind: Indicatrix = None) -> ParityGrid:
    """m * f for kernel-class m, through L/resolvent compositions (any k >= 0)."""
    k = DunklParam.of(k)
    if ind is None:
        ind = Indicatrix.build(k, phi)
    out = None
    for t in _terms(m):
        if t.kind == "appell":
            g = f
            for _ in range(t.order + 1):
                g = lk_grid(g, k, phi)
        else:
            g = resolvent_apply(ResolventProblem(k, phi, t.lam, f, ind=ind))
        g = t.coef * g
        out = g if out is None else out + g
    return out


def multiplier_apply(m: KernelClass, f: ParityGrid, k, phi: functionals.Functional,
                     ind: Indicatrix = None) -> ParityGrid:
    """The multiplier operator Af = D(m * f), with D applied analytically.

    Composition identities per term: D(A_n * f) = A_{n-1} * f for n >= 1 and
    = f for n = 0; D(l(lam,.) * f) = lam (l * f) + f.
    """
    k = DunklParam.of(k)
    if ind is None:
        ind = Indicatrix.build(k, phi)
    out = None
    for t in _terms(m):
        if t.kind == "appell":
            if t.order == 0:
                g = f.copy()
            else:
                g = kernel_conv(KernelTerm("appell", order=t.order - 1), f, k, phi, ind)
        else:
            g = resolvent_apply(ResolventProblem(k, phi, t.lam, f, ind=ind))
            g = complex(t.lam) * g + f
        g = t.coef * g
        out = g if out is None else out + g
    return out


def multiplier_check(A: Callable[[ParityGrid], ParityGrid], f: ParityGrid, g: ParityGrid,
                     k, phi: functionals.Functional) -> float:
    """Commutation defect sup|A(f*g) - (Af)*g| of a candidate multiplier."""
    lhs = A(dunkl_conv_smallk(f, g, k, phi))
    rhs = dunkl_conv_smallk(A(f), g, k, phi)
    nn = min(lhs.n, rhs.n)
    return float(max(np.max(np.abs(lhs.even[: nn + 1] - rhs.even[: nn + 1])),
                     np.max(np.abs(lhs.odd[: nn + 1] - rhs.odd[: nn + 1]))))

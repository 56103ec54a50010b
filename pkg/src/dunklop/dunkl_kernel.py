"""Dunkl eigenfunction, indicatrix, and resolvent kernel evaluation.

The normalized eigenfunction of the Dunkl operator (eigenvalue lambda,
value 1 at the origin) has the entire-series form

    u(lambda x) = sum_n  c_n lambda^n x^n,   c_n = 1 / (b_1 b_2 ... b_n),

with the same b_m factors that drive the monomial calculus.  Pairing the
x-variable with a normalized nonlocal functional gives the indicatrix

    E(lambda) = phi_x{u(lambda x)} = sum_n c_n phi{x^n} lambda^n,

an entire function whose zeros are exactly the resonances of the nonlocal
problems solved elsewhere in the package.  The resolvent kernel is the
quotient u(lambda x)/E(lambda); its lambda-derivative jets (computed by
series jets and the Leibniz quotient recurrence, never by finite
differences) provide the kernels attached to multiple characteristic roots.

A normalized spherical-Bessel form of u serves as an independent
cross-check oracle and is exported for the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List

import numpy as np

from . import functionals
from .errors import (
    DivisorOfZero,
    IncompleteZeroSet,
    NonConvergence,
    ParameterError,
    RangeError,
)
from .poly_ops import DunklParam
from .scalar_grid import ParityGrid

SERIES_WINDOW = 50.0
SERIES_NMAX = 400
SERIES_RTOL = 1e-18

DIVISOR_TOL = 1e-10


@dataclass(frozen=True)
class KernelSeries:
    """Taylor coefficients c_n of the normalized eigenfunction."""

    k: DunklParam
    coeffs: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, k) -> "KernelSeries":
        k = DunklParam.of(k)
        kf = k.kf
        b = np.arange(1, SERIES_NMAX + 1, dtype=np.float64)
        b[::2] += 2.0 * kf  # odd m = 1, 3, ... sit at even indices here
        c = np.empty(SERIES_NMAX + 1)
        c[0] = 1.0
        np.cumprod(1.0 / b, out=c[1:])
        return cls(k=k, coeffs=c)


def u_eval(ks: KernelSeries, lam: complex, x: float, d: int = 0) -> complex:
    """d-th lambda-derivative of u(lambda x) at a single point.

    Truncates when a term falls below 1e-18 of the partial sum; refuses
    |lambda * x| > 50 (RangeError) where that criterion is no longer a
    faithful accuracy bound.
    """
    lam = complex(lam)
    x = float(x)
    if d < 0:
        raise ParameterError("derivative order must be >= 0")
    if abs(lam) * abs(x) > SERIES_WINDOW:
        raise RangeError(f"|lambda*x| = {abs(lam) * abs(x):.3g} exceeds window {SERIES_WINDOW}")
    if ks.k.kf == 0.0:
        # the k=0 eigenfunction is the exponential; evaluating it directly
        # sidesteps series cancellation at large imaginary lambda*x
        import cmath
        return x ** d * cmath.exp(lam * x)
    c = ks.coeffs
    # term_n = c_n * n!/(n-d)! * lam^(n-d) * x^n, starting at n = d
    term = c[d] * math.factorial(d) * x ** d
    acc = term
    n = d
    while n < SERIES_NMAX:
        n += 1
        term = term * (c[n] / c[n - 1]) * (n / (n - d)) * lam * x
        acc += term
        if abs(term) < SERIES_RTOL * max(abs(acc), 1e-300):
            break
    return complex(acc)


def u_jet_grid(ks: KernelSeries, lam: complex, d: int, xmax: float, n: int) -> ParityGrid:
    """Grid of the d-th lambda-derivative of u(lambda .), split by parity."""
    lam = complex(lam)
    if abs(lam) * xmax > SERIES_WINDOW:
        raise RangeError(f"|lambda|*xmax = {abs(lam) * xmax:.3g} exceeds window {SERIES_WINDOW}")
    xs = np.linspace(0.0, xmax, n + 1)
    if ks.k.kf == 0.0:
        vp = xs ** d * np.exp(lam * xs)
        vm = (-xs) ** d * np.exp(-lam * xs)
        return ParityGrid(xmax, n, (vp + vm) / 2.0, (vp - vm) / 2.0)
    even = np.zeros(n + 1, np.complex128)
    odd = np.zeros(n + 1, np.complex128)
    c = ks.coeffs
    xp = xs ** d  # x^m as m runs
    coef = c[d] * math.factorial(d)  # lam^(m-d) factor starts at 1
    m = d
    term = coef * xp
    (even if m % 2 == 0 else odd)[:] += term
    top = float(np.max(np.abs(term)))
    while m < SERIES_NMAX:
        m += 1
        coef = coef * (c[m] / c[m - 1]) * (m / (m - d)) * lam
        xp = xp * xs
        term = coef * xp
        if m % 2 == 0:
            even += term
        else:
            odd += term
        t = float(np.max(np.abs(term)))
        top = max(top, t)
        if t < SERIES_RTOL * max(top, 1e-300):
            break
    return ParityGrid(xmax, n, even, odd)


def bessel_j_normalized(alpha: float, z: complex) -> complex:
    """Spherical-style normalized Bessel function j_alpha(z) with j_alpha(0)=1.

    j_alpha(z) = Gamma(alpha+1) sum_m (-1)^m (z/2)^(2m) / (m! Gamma(m+alpha+1)).
    """
    z = complex(z)
    if abs(z) > SERIES_WINDOW:
        raise RangeError(f"|z| = {abs(z):.3g} exceeds window {SERIES_WINDOW}")
    q = -(z / 2.0) ** 2
    term = 1.0 + 0.0j
    acc = term
    for m in range(1, SERIES_NMAX + 1):
        term = term * q / (m * (m + alpha))
        acc += term
        if abs(term) < SERIES_RTOL * max(abs(acc), 1e-300):
            break
    return acc


def u_bessel_form(k, lam: complex, x: float) -> complex:
    """Independent evaluation of u(lambda x) through normalized Bessel functions."""
    k = DunklParam.of(k)
    z = complex(lam) * float(x)
    iz = 1j * z
    return bessel_j_normalized(k.kf - 0.5, iz) + z / (2.0 * k.kf + 1.0) * bessel_j_normalized(k.kf + 0.5, iz)


# ---------------------------------------------------------------------------
# indicatrix

@dataclass(frozen=True)
class Indicatrix:
    k: DunklParam
    phi: functionals.Functional
    series: KernelSeries = field(repr=False)
    coeffs: np.ndarray = field(repr=False)  # e_n = c_n phi{x^n}
    radius: float = 0.0

    @classmethod
    def build(cls, k, phi: functionals.Functional) -> "Indicatrix":
        k = DunklParam.of(k)
        ks = KernelSeries.build(k)
        kf = k.kf
        b = np.arange(1, SERIES_NMAX + 1, dtype=np.float64)
        b[::2] += 2.0 * kf
        e = np.zeros(SERIES_NMAX + 1)
        for at in phi.atoms:
            c = float(at.c)
            if isinstance(at, functionals.PointAtom):
                r = 1.0
                a = float(at.a)
                e[0] += c
                for n in range(1, SERIES_NMAX + 1):
                    r *= a / b[n - 1]
                    e[n] += c * r
            else:
                lo, hi = float(at.a), float(at.b)
                sl, sh = lo, hi  # s_n(t) = t^(n+1)/prod(b_1..b_n)
                e[0] += c * (sh - sl)
                for n in range(1, SERIES_NMAX + 1):
                    sl *= lo / b[n - 1]
                    sh *= hi / b[n - 1]
                    e[n] += c * (sh - sl) / (n + 1)
        return cls(k=k, phi=phi, series=ks, coeffs=e, radius=phi.radius)


def indicatrix_eval(ind: Indicatrix, lam: complex, d: int = 0) -> complex:
    """d-th derivative of the indicatrix at lambda (raw derivative, not a jet)."""
    lam = complex(lam)
    if abs(lam) * ind.radius > SERIES_WINDOW:
        raise RangeError(
            f"|lambda|*radius = {abs(lam) * ind.radius:.3g} exceeds window {SERIES_WINDOW}")
    e = ind.coeffs
    acc = 0.0 + 0.0j
    # sum_{n>=d} e_n n!/(n-d)! lam^(n-d); build powers iteratively
    pw = 1.0 + 0.0j
    top = 0.0
    fall = 0
    for n in range(d, SERIES_NMAX + 1):
        f = 1.0
        for i in range(d):
            f *= (n - i)
        term = e[n] * f * pw
        acc += term
        pw *= lam
        t = abs(term)
        top = max(top, t)
        if t < SERIES_RTOL * max(top, 1e-300):
            fall += 1
            if fall > 4:
                break
        else:
            fall = 0
    return complex(acc)


def _indicatrix_eval_many(ind: Indicatrix, lams: np.ndarray, d: int = 0) -> np.ndarray:
    """Vectorized indicatrix derivative over an array of lambda values."""
    e = ind.coeffs
    lams = np.asarray(lams, np.complex128)
    acc = np.zeros(lams.shape, np.complex128)
    pw = np.ones(lams.shape, np.complex128)
    top = 0.0
    fall = 0
    for n in range(d, SERIES_NMAX + 1):
        f = 1.0
        for i in range(d):
            f *= (n - i)
        term = e[n] * f * pw
        acc += term
        pw *= lams
        t = float(np.max(np.abs(term)))
        top = max(top, t)
        if t < SERIES_RTOL * max(top, 1e-300):
            fall += 1
            if fall > 4:
                break
        else:
            fall = 0
    return acc


def indicatrix_zeros(ind: Indicatrix, radius: float, tol: float = 1e-9) -> List[complex]:
    """All zeros of the indicatrix in |lambda| < radius.

    Newton iteration from a 40x40 complex seed grid, deduplication at 1e-6,
    residual verification |E| < tol, and an argument-principle winding count
    on the circle |lambda| = radius as an independent completeness check
    (the circle is nudged outward by up to a few percent if a zero sits too
    close to it).  A count mismatch raises IncompleteZeroSet.
    """
    if radius <= 0:
        raise ParameterError("radius must be positive")
    if radius * ind.radius > SERIES_WINDOW:
        raise RangeError("radius exceeds the series accuracy window for this functional")

    side = np.linspace(-radius, radius, 40)
    re, im = np.meshgrid(side, side)
    seeds = (re + 1j * im).ravel()
    seeds = seeds[np.abs(seeds) <= radius]
    z = seeds.astype(np.complex128)
    alive = np.ones(z.shape[0], bool)
    for _ in range(80):
        if not alive.any():
            break
        E = _indicatrix_eval_many(ind, z[alive])
        dE = _indicatrix_eval_many(ind, z[alive], 1)
        bad = (np.abs(dE) < 1e-300) | ~np.isfinite(E) | ~np.isfinite(dE)
        step = np.where(bad, 0.0, E / np.where(bad, 1.0, dE))
        zn = z[alive] - step
        esc = (np.abs(zn) > 2.5 * radius) | ~np.isfinite(zn) | bad
        conv = np.abs(step) < 1e-14 * (1.0 + np.abs(zn))
        z[alive] = zn
        idx = np.where(alive)[0]
        alive[idx[esc | conv]] = False

    finite = z[np.isfinite(z) & (np.abs(z) < radius)]
    resid = np.abs(_indicatrix_eval_many(ind, finite)) if finite.size else np.array([])
    found: List[complex] = []
    for zz, rr in zip(finite, resid):
        if rr >= tol:
            continue
        if all(abs(zz - w) > 1e-6 for w in found):
            found.append(complex(zz))
    found = _symmetrize_conjugates(found)
    found.sort(key=lambda w: (round(abs(w), 9), math.atan2(w.imag, w.real)))

    winding = _winding_count(ind, radius)
    if winding != len(found):
        raise IncompleteZeroSet(
            f"found {len(found)} zeros but winding count is {winding} inside |lambda|={radius}",
            zeros=found, winding=winding)
    return found


def _symmetrize_conjugates(zs: List[complex]) -> List[complex]:
    out: List[complex] = []
    used = [False] * len(zs)
    for i, z in enumerate(zs):
        if used[i]:
            continue
        if abs(z.imag) < 1e-12:
            out.append(complex(z.real, 0.0))
            used[i] = True
            continue
        partner = None
        for j in range(i + 1, len(zs)):
            if not used[j] and abs(zs[j] - z.conjugate()) < 1e-6:
                partner = j
                break
        if partner is None:
            out.append(z)
            used[i] = True
        else:
            avg = (z + zs[partner].conjugate()) / 2.0
            out.extend([avg, avg.conjugate()])
            used[i] = used[partner] = True
    return out


def _winding_count(ind: Indicatrix, radius: float) -> int:
    r = radius
    window = SERIES_WINDOW / ind.radius if ind.radius > 0 else math.inf
    for _ in range(4):
        th = np.linspace(0.0, 2.0 * math.pi, 512, endpoint=False)
        vals = np.abs(_indicatrix_eval_many(ind, r * np.exp(1j * th)))
        scale = max(float(vals.max()), 1e-300)
        if float(vals.min()) > 1e-6 * scale or r * 1.02 > window:
            break
        r *= 1.02  # zero too close to the contour; nudge outward
    prev = None
    m = 1024
    while m <= 65536:
        th = np.linspace(0.0, 2.0 * math.pi, m, endpoint=False)
        ring = r * np.exp(1j * th)
        E = _indicatrix_eval_many(ind, ring)
        dE = _indicatrix_eval_many(ind, ring, 1)
        integrand = dE / E * 1j * ring  # dz = i z dtheta
        total = complex(integrand.mean()) * 2.0 * math.pi / (2.0j * math.pi)
        if abs(total.imag) < 1e-3 and abs(total.real - round(total.real)) < 1e-3:
            w = int(round(total.real))
            if prev == w:
                return w
            prev = w
        m *= 2
    raise NonConvergence("argument-principle winding integral failed to stabilize")


# ---------------------------------------------------------------------------
# resolvent kernel (quotient jets)

def _num_jets(ks: KernelSeries, lam: complex, x: float, d: int) -> List[complex]:
    return [u_eval(ks, lam, x, p) / math.factorial(p) for p in range(d + 1)]


def _den_jets(ind: Indicatrix, lam: complex, d: int) -> List[complex]:
    return [indicatrix_eval(ind, lam, p) / math.factorial(p) for p in range(d + 1)]


def resolvent_kernel_eval(ind: Indicatrix, lam: complex, x: float, d: int = 0) -> complex:
    """Taylor jet (1/d!) d^d/dlambda^d of u(lambda x)/E(lambda) at lambda.

    Raises DivisorOfZero when |E(lambda)| <= 1e-10 (lambda is at or
    numerically at an indicatrix zero, where the quotient has no meaning).
    """
    a = _num_jets(ind.series, lam, x, d)
    b = _den_jets(ind, lam, d)
    if abs(b[0]) <= DIVISOR_TOL:
        raise DivisorOfZero(f"indicatrix vanishes at lambda={lam}: |E|={abs(b[0]):.3e}")
    q: List[complex] = []
    for p in range(d + 1):
        s = a[p]
        for i in range(1, p + 1):
            s -= b[i] * q[p - i]
        q.append(s / b[0])
    return q[d]


def resolvent_kernel_grid(ind: Indicatrix, lam: complex, d: int, xmax: float, n: int) -> ParityGrid:
    """Grid of the order-d Taylor jet of the resolvent kernel in lambda."""
    b = _den_jets(ind, lam, d)
    if abs(b[0]) <= DIVISOR_TOL:
        raise DivisorOfZero(f"indicatrix vanishes at lambda={lam}: |E|={abs(b[0]):.3e}")
    num = [u_jet_grid(ind.series, lam, p, xmax, n) for p in range(d + 1)]
    jets: List[ParityGrid] = []
    for p in range(d + 1):
        ge = num[p].even / math.factorial(p)
        go = num[p].odd / math.factorial(p)
        for i in range(1, p + 1):
            ge = ge - complex(b[i]) * jets[p - i].even
            go = go - complex(b[i]) * jets[p - i].odd
        jets.append(ParityGrid(xmax, n, ge / b[0], go / b[0]))
    return jets[d]

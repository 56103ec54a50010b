"""Exact polynomial calculus for the Dunkl operator on the real line.

The Dunkl operator with parameter k >= 0 acts on monomials as

    D_k x^m = b_m x^(m-1),   b_m = m + 2k for odd m, b_m = m for even m,

and the right inverse fixed by vanishing at the origin acts as

    x^m -> x^(m+1) / b_(m+1).

With a normalized nonlocal functional phi this produces the phi-adapted
right inverse L_k = Lambda_k - phi{Lambda_k .} and from it the Appell-type
polynomial family A_0 = 1, A_(n+1) = L_k A_n, which underlies the Taylor
expansion implemented at the bottom of the module.

Everything here is exact when coefficients, k, and the functional atoms are
rational (fractions.Fraction); floating inputs run the same formulas in
complex arithmetic.  The two regimes never mix silently.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from . import functionals
from .errors import ParameterError
from .scalar_grid import is_exact, parse_scalar

NEG_INF = float("-inf")


@dataclass(frozen=True)
class DunklParam:
    """Dunkl parameter k >= 0; rational k keeps the calculus exact."""

    k: Union[Fraction, float]

    def __post_init__(self):
        if isinstance(self.k, (int, Fraction)) and not isinstance(self.k, bool):
            object.__setattr__(self, "k", Fraction(self.k))
        elif isinstance(self.k, float):
            pass
        else:
            raise ParameterError(f"bad Dunkl parameter {self.k!r}")
        if self.k < 0:
            raise ParameterError(f"Dunkl parameter must be >= 0, got {self.k}")

    @classmethod
    def of(cls, v) -> "DunklParam":
        if isinstance(v, DunklParam):
            return v
        if isinstance(v, str):
            v = parse_scalar(v)
        if isinstance(v, complex):
            raise ParameterError("Dunkl parameter must be real")
        return cls(v)

    @property
    def kf(self) -> float:
        return float(self.k)

    @property
    def exact(self) -> bool:
        return isinstance(self.k, Fraction)

    def b(self, m: int):
        """Monomial eigenvalue-like factor: D_k x^m = b(m) x^(m-1)."""
        if m % 2 == 1:
            return m + 2 * self.k
        return m if self.exact else float(m)


class Polynomial:
    """Dense univariate polynomial; coeffs[i] multiplies x^i.

    Coefficients are either all exact (int/Fraction) or all floating
    (float/complex); arithmetic between the two regimes is refused.
    """

    __slots__ = ("coeffs", "exact")

    def __init__(self, coeffs: Sequence):
        cs = list(coeffs)
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        if not cs:
            cs = [0]
        self.coeffs = tuple(cs)
        kinds = {is_exact(c) for c in self.coeffs}
        if kinds == {True, False}:
            raise ParameterError("polynomial mixes exact and floating coefficients")
        self.exact = kinds == {True}

    @property
    def degree(self):
        if len(self.coeffs) == 1 and self.coeffs[0] == 0:
            return NEG_INF
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return self.degree == NEG_INF

    def _join(self, other: "Polynomial"):
        if self.exact != other.exact and not (self.is_zero() or other.is_zero()):
            raise ParameterError("cannot mix exact and floating polynomials")

    def __add__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        self._join(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [0] * (n - len(self.coeffs))
        b = list(other.coeffs) + [0] * (n - len(other.coeffs))
        return Polynomial([x + y for x, y in zip(a, b)])

    def __sub__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self + (-other)

    def __neg__(self):
        return Polynomial([-c for c in self.coeffs])

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            self._join(other)
            out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
            for i, a in enumerate(self.coeffs):
                if a == 0:
                    continue
                for j, b in enumerate(other.coeffs):
                    out[i + j] = out[i + j] + a * b
            return Polynomial(out)
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            if not self.exact and not self.is_zero() and other != 0:
                other = complex(other)
            return Polynomial([c * other for c in self.coeffs])
        if isinstance(other, (float, complex)):
            if self.exact and not self.is_zero():
                raise ParameterError("cannot scale an exact polynomial by a float; convert first")
            return Polynomial([c * other for c in self.coeffs])
        return NotImplemented

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, Polynomial) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __call__(self, x):
        return self.eval(x)

    def eval(self, x):
        """Horner evaluation; x may be a scalar (any arithmetic type) or array."""
        if isinstance(x, np.ndarray):
            acc = np.zeros_like(x, dtype=np.complex128)
            for c in reversed(self.coeffs):
                acc = acc * x + complex(c)
            return acc
        acc = 0 * x if not is_exact(x) else Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self) -> "Polynomial":
        if self.degree < 1:
            return Polynomial([0])
        return Polynomial([m * c for m, c in enumerate(self.coeffs)][1:])

    def to_float(self) -> "Polynomial":
        return Polynomial([complex(c) for c in self.coeffs])

    def __repr__(self):
        return f"Polynomial({list(self.coeffs)})"


def _check_modes(p: Polynomial, k: DunklParam, phi=None):
    exact = p.exact or p.is_zero()
    if exact != k.exact and not p.is_zero():
        raise ParameterError("polynomial and Dunkl parameter use different scalar modes")
    if phi is not None and not p.is_zero() and exact and not phi.exact:
        raise ParameterError("exact polynomial with floating functional; convert explicitly")


def dunkl_derivative_poly(p: Polynomial, k) -> Polynomial:
    """D_k p, degree drops by exactly one on nonconstant input."""
    k = DunklParam.of(k)
    _check_modes(p, k)
    if p.degree < 1:
        return Polynomial([0])
    out = [p.coeffs[m] * k.b(m) for m in range(1, len(p.coeffs))]
    return Polynomial(out)


def lambda_k_poly(p: Polynomial, k) -> Polynomial:
    """Right inverse of D_k vanishing at 0: x^m -> x^(m+1)/b(m+1)."""
    k = DunklParam.of(k)
    _check_modes(p, k)
    if p.is_zero():
        return Polynomial([0])
    out = [Fraction(0) if p.exact else 0.0j]
    for m, c in enumerate(p.coeffs):
        d = k.b(m + 1)
        out.append(c / d if not is_exact(c) else Fraction(c, 1) / d)
    return Polynomial(out)


def lk_poly(p: Polynomial, k, phi: functionals.Functional) -> Polynomial:
    """phi-adapted right inverse: L_k p = Lambda_k p - phi{Lambda_k p}."""
    k = DunklParam.of(k)
    _check_modes(p, k, phi)
    lam = lambda_k_poly(p, k)
    shift = functionals.apply(phi, lam)
    cs = list(lam.coeffs)
    cs[0] = cs[0] - shift
    return Polynomial(cs)


def appell_sequence(n_max: int, k, phi: functionals.Functional) -> list:
    """[A_0, ..., A_n]: A_0 = 1, A_(j+1) = L_k A_j.

    Each A_j has degree exactly j, D_k A_(j+1) = A_j, and phi{A_j} = 0 for
    j >= 1.
    """
    if n_max < 0:
        raise ParameterError("need n_max >= 0")
    k = DunklParam.of(k)
    one = Polynomial([Fraction(1)]) if (k.exact and phi.exact) else Polynomial([1.0 + 0.0j])
    seq = [one]
    for _ in range(n_max):
        seq.append(lk_poly(seq[-1], k, phi))
    return seq


def taylor_reconstruct(f: Polynomial, n_terms: int, k, phi: functionals.Functional):
    """Split f into its degree-(n_terms-1) expansion and the remainder.

    Returns (expansion, remainder) with

        expansion = sum_(j < n_terms) phi{D_k^j f} A_j,
        remainder = L_k^n_terms (D_k^n_terms f),

    whose sum reproduces f exactly in exact mode (verified here, along with
    the one-step consistency remainder_n = phi{D_k^n f} A_n + remainder_(n+1),
    which is the Cauchy form of the remainder realized through the iterated
    right inverse).
    """
    if n_terms < 1:
        raise ParameterError("need at least one expansion term")
    k = DunklParam.of(k)
    _check_modes(f, k, phi)
    seq = appell_sequence(n_terms, k, phi)
    derivs = [f]
    for _ in range(n_terms + 1):
        derivs.append(dunkl_derivative_poly(derivs[-1], k))

    def expansion_and_remainder(n):
        expf = Polynomial([0])
        for j in range(n):
            cj = functionals.apply(phi, derivs[j])
            expf = expf + seq[j] * cj
        rem = derivs[n]
        for _ in range(n):
            rem = lk_poly(rem, k, phi)
        return expf, rem

    expf, rem = expansion_and_remainder(n_terms)
    if f.exact and k.exact and phi.exact:
        if expf + rem != f:
            raise ArithmeticError("expansion + remainder failed to reproduce input")
        seq_next = appell_sequence(n_terms + 1, k, phi)
        _, rem_next = expansion_and_remainder(n_terms + 1)
        c = functionals.apply(phi, derivs[n_terms])
        if rem != seq_next[n_terms] * c + rem_next:
            raise ArithmeticError("remainder failed its one-step Cauchy-form consistency")
    return expf, rem


def monomial(m: int, exact: bool = True) -> Polynomial:
    cs = [Fraction(0)] * m + [Fraction(1)] if exact else [0.0] * m + [1.0]
    return Polynomial(cs)

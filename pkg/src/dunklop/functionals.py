"""Nonlocal boundary functionals: finite point masses plus uniform-weight
interval integrals, normalized so that phi{1} = 1.

The functional is the boundary-condition object of the whole calculus; its
polynomial moments phi{x^m} are exact (rational) whenever the atom data is
rational, which is what keeps the polynomial side of the package exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from .errors import ParameterError, UnnormalizedFunctional
from .scalar_grid import ParityGrid, integrate_uniform_interval, is_exact, parse_scalar

Number = Union[int, float, Fraction]


@dataclass(frozen=True)
class PointAtom:
    a: Number
    c: Number


@dataclass(frozen=True)
class IntervalAtom:
    a: Number
    b: Number
    c: Number  # uniform weight over [a, b]


class Functional:
    """phi{f} = sum c_i f(a_i) + sum c_j int_{a_j}^{b_j} f."""

    def __init__(self, atoms: Sequence[Union[PointAtom, IntervalAtom]]):
        atoms = tuple(atoms)
        if not atoms:
            raise ParameterError("functional needs at least one atom")
        for at in atoms:
            if isinstance(at, IntervalAtom):
                if not at.b > at.a:
                    raise ParameterError(f"interval atom needs b > a, got [{at.a}, {at.b}]")
            elif not isinstance(at, PointAtom):
                raise ParameterError(f"unknown atom {at!r}")
        self.atoms = atoms
        total = self.moment(0)
        if is_exact(total):
            ok = total == 1
        else:
            ok = abs(total - 1.0) <= 1e-12
        if not ok:
            raise UnnormalizedFunctional(f"phi{{1}} = {total}, expected 1")
        self.exact = all(
            is_exact(at.a) and is_exact(at.c) and (not isinstance(at, IntervalAtom) or is_exact(at.b))
            for at in atoms
        )

    def moment(self, m: int):
        """phi{x^m}; exact when the atom data is exact."""
        if m < 0 or m != int(m):
            raise ParameterError(f"moment order must be a nonnegative integer, got {m}")
        m = int(m)
        total = 0
        for at in self.atoms:
            if isinstance(at, PointAtom):
                total = total + at.c * at.a ** m
            else:
                total = total + at.c * (at.b ** (m + 1) - at.a ** (m + 1)) * _inv(m + 1, at)
        return total

    @property
    def radius(self) -> float:
        r = 0.0
        for at in self.atoms:
            r = max(r, abs(float(at.a)))
            if isinstance(at, IntervalAtom):
                r = max(r, abs(float(at.b)))
        return r

    def is_dirac_at_zero(self) -> bool:
        return all(isinstance(at, PointAtom) and float(at.a) == 0.0 for at in self.atoms)

    def __repr__(self):
        parts = []
        for at in self.atoms:
            if isinstance(at, PointAtom):
                parts.append(f"{at.c}*d[{at.a}]")
            else:
                parts.append(f"{at.c}*int[{at.a},{at.b}]")
        return "Functional(" + " + ".join(parts) + ")"


def _inv(n: int, at):
    if is_exact(at.a) and is_exact(at.c) and is_exact(getattr(at, "b", 0)):
        return Fraction(1, n)
    return 1.0 / n


def apply(phi: Functional, f):
    """Apply the functional to a Polynomial (exact moments) or a ParityGrid.

    Grid point atoms use cubic interpolation, interval atoms integrate the
    piecewise-cubic interpolant on the signed nodes; both are O(h^4).
    """
    if hasattr(f, "coeffs"):
        total = 0
        for m, c in enumerate(f.coeffs):
            if c != 0:
                total = total + c * phi.moment(m)
        return total
    if isinstance(f, ParityGrid):
        if phi.radius > f.xmax * (1.0 + 1e-12):
            raise ParameterError(
                f"functional reaches |x|={phi.radius} beyond the grid xmax={f.xmax}")
        total = 0.0 + 0.0j
        pts = [float(at.a) for at in phi.atoms if isinstance(at, PointAtom)]
        if pts:
            vals = f.eval(np.array(pts))
            i = 0
            for at in phi.atoms:
                if isinstance(at, PointAtom):
                    total += complex(at.c) * vals[i]
                    i += 1
        signed = None
        for at in phi.atoms:
            if isinstance(at, IntervalAtom):
                if signed is None:
                    signed = f.signed_values()
                total += complex(at.c) * integrate_uniform_interval(
                    signed, -f.xmax, f.h, float(at.a), float(at.b))
        return total
    raise ParameterError(f"cannot apply functional to {type(f).__name__}")


# ---------------------------------------------------------------------------
# stock functionals and config parsing

def dirac(a: Number = 0) -> Functional:
    return Functional([PointAtom(Fraction(a) if is_exact(a) else a, Fraction(1))])


def point_pair(c: Number = 1) -> Functional:
    """(f(c) + f(-c)) / 2."""
    cc = Fraction(c) if is_exact(c) else c
    half = Fraction(1, 2) if is_exact(c) else 0.5
    return Functional([PointAtom(cc, half), PointAtom(-cc, half)])


def uniform_interval(a: Number = 0, b: Number = 1) -> Functional:
    aa = Fraction(a) if is_exact(a) else a
    bb = Fraction(b) if is_exact(b) else b
    c = 1 / Fraction(bb - aa) if (is_exact(a) and is_exact(b)) else 1.0 / float(b - a)
    return Functional([IntervalAtom(aa, bb, c)])


_NAMED = {
    "dirac0": dirac,
    "dirac1": lambda: dirac(1),
    "sym1": point_pair,
    "int01": uniform_interval,
}


def from_config(spec) -> Functional:
    """Build a functional from a config value.

    Accepts a named shortcut ("dirac0", "dirac1", "sym1", "int01") or a list
    of atom dicts: {"type": "point", "a": ..., "c": ...} or
    {"type": "integral", "a": ..., "b": ..., "c": ...}.  Scalar fields may
    be numbers or "p/q" strings.
    """
    if isinstance(spec, str):
        if spec not in _NAMED:
            raise ParameterError(f"unknown functional name {spec!r}; know {sorted(_NAMED)}")
        return _NAMED[spec]()
    if not isinstance(spec, list):
        raise ParameterError("functional spec must be a name or a list of atoms")
    atoms = []
    for item in spec:
        if not isinstance(item, dict):
            raise ParameterError(f"atom must be an object, got {item!r}")
        kind = item.get("type")
        if kind == "point":
            extra = set(item) - {"type", "a", "c"}
            if extra:
                raise ParameterError(f"unknown point-atom fields {sorted(extra)}")
            atoms.append(PointAtom(_real(item, "a"), _real(item, "c")))
        elif kind == "integral":
            extra = set(item) - {"type", "a", "b", "c"}
            if extra:
                raise ParameterError(f"unknown integral-atom fields {sorted(extra)}")
            atoms.append(IntervalAtom(_real(item, "a"), _real(item, "b"), _real(item, "c")))
        else:
            raise ParameterError(f"unknown atom type {kind!r}")
    return Functional(atoms)


def _real(item: dict, key: str):
    if key not in item:
        raise ParameterError(f"atom missing field {key!r}")
    v = parse_scalar(item[key])
    if isinstance(v, complex):
        raise ParameterError(f"atom field {key!r} must be real")
    return v

"""Hot numeric kernels with two interchangeable backends.

The default backend compiles the loops with numba (cached to disk); setting
the environment variable ``DUNKLOP_PURE_NUMPY=1`` before import selects the
vectorized pure-numpy implementations instead.  Both backends are importable
directly (``numpy_interp_parity`` / ``numba_interp_parity`` and friends) so
equivalence tests and benchmarks can compare them without touching the flag.

All kernels work on the parity representation of a grid function: ``even``
and ``odd`` hold samples of the even/odd parts on the uniform nodes
``0, h, ..., n*h``, and the function value at a signed point ``p`` is
``even(|p|) + sign(p) * odd(|p|)``.  Off-node values use 4-point cubic
Lagrange interpolation (O(h^4) on smooth data); stencils clamp at the ends.
"""

from __future__ import annotations

import os

import numpy as np

_FLAG = os.environ.get("DUNKLOP_PURE_NUMPY", "").strip().lower()
_WANT_NUMPY = _FLAG in ("1", "true", "yes", "on")

# A quotient odd(rho)/rho below this rho is replaced by 0; it only arises
# multiplied by coefficients that vanish at the same rate.
_RHO_FLOOR = 1e-30


def _cubic_indices_weights(a: np.ndarray, h: float, n: int):
    """Stencil base index and the 4 Lagrange weights for |points| array a."""
    j = np.floor(a / h).astype(np.int64) - 1
    np.clip(j, 0, n - 3, out=j)
    u = a / h - j
    w0 = -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0
    w1 = u * (u - 2.0) * (u - 3.0) / 2.0
    w2 = -u * (u - 1.0) * (u - 3.0) / 2.0
    w3 = u * (u - 1.0) * (u - 2.0) / 6.0
    return j, w0, w1, w2, w3


def numpy_interp_parity(even, odd, h, pts):
    pts = np.asarray(pts, dtype=np.float64)
    n = even.shape[0] - 1
    a = np.abs(pts)
    s = np.where(pts < 0.0, -1.0, 1.0)
    j, w0, w1, w2, w3 = _cubic_indices_weights(a, h, n)
    ev = w0 * even[j] + w1 * even[j + 1] + w2 * even[j + 2] + w3 * even[j + 3]
    ov = w0 * odd[j] + w1 * odd[j + 1] + w2 * odd[j + 2] + w3 * odd[j + 3]
    return ev + s * ov


def numpy_translate_grid(even, odd, h, xs, y, cn, cw):
    """Even/odd parts of the translated grid at the nonnegative nodes xs.

    cn, cw: quadrature nodes/weights on (-1, 1) for the weight (1-c^2)^(k-1);
    the overall normalization constant is applied by the caller.
    """
    ay = abs(y)
    sy = 0.0 if y == 0.0 else (1.0 if y > 0.0 else -1.0)
    x = xs[:, None]
    c = cn[None, :]
    s = np.where(x > 0.0, sy, 0.0)
    rho2 = x * x + y * y - 2.0 * x * ay * c
    rho = np.sqrt(np.maximum(rho2, 0.0))
    j, w0, w1, w2, w3 = _cubic_indices_weights(rho, h, even.shape[0] - 1)
    fe = w0 * even[j] + w1 * even[j + 1] + w2 * even[j + 2] + w3 * even[j + 3]
    fo = w0 * odd[j] + w1 * odd[j + 1] + w2 * odd[j + 2] + w3 * odd[j + 3]
    q = np.where(rho > _RHO_FLOOR, fo / np.where(rho > _RHO_FLOOR, rho, 1.0), 0.0)
    ev = (fe + q * (y - s * c * x)) @ cw
    ov = (-s * c * fe + q * (x - s * c * y)) @ cw
    return ev, ov


def numpy_translate_points(even, odd, h, xs, ys, cn, cw):
    """Translated values T^y f(x) for paired sample arrays xs, ys."""
    x = np.asarray(xs, dtype=np.float64)[:, None]
    yv = np.asarray(ys, dtype=np.float64)[:, None]
    c = cn[None, :]
    s = np.sign(x) * np.sign(yv)
    rho2 = x * x + yv * yv - 2.0 * np.abs(x * yv) * c
    rho = np.sqrt(np.maximum(rho2, 0.0))
    j, w0, w1, w2, w3 = _cubic_indices_weights(rho, h, even.shape[0] - 1)
    fe = w0 * even[j] + w1 * even[j + 1] + w2 * even[j + 2] + w3 * even[j + 3]
    fo = w0 * odd[j] + w1 * odd[j + 1] + w2 * odd[j + 2] + w3 * odd[j + 3]
    q = np.where(rho > _RHO_FLOOR, fo / np.where(rho > _RHO_FLOOR, rho, 1.0), 0.0)
    return (fe * (1.0 - s * c) + q * (x + yv) * (1.0 - s * c)) @ cw


def _build_numba():
    from numba import njit

    @njit(cache=True)
    def nb_interp_parity(even, odd, h, pts):
        n = even.shape[0] - 1
        out = np.empty(pts.shape[0], np.complex128)
        for i in range(pts.shape[0]):
            p = pts[i]
            a = -p if p < 0.0 else p
            sg = -1.0 if p < 0.0 else 1.0
            j = int(a / h) - 1
            if j < 0:
                j = 0
            elif j > n - 3:
                j = n - 3
            u = a / h - j
            w0 = -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0
            w1 = u * (u - 2.0) * (u - 3.0) / 2.0
            w2 = -u * (u - 1.0) * (u - 3.0) / 2.0
            w3 = u * (u - 1.0) * (u - 2.0) / 6.0
            ev = w0 * even[j] + w1 * even[j + 1] + w2 * even[j + 2] + w3 * even[j + 3]
            ov = w0 * odd[j] + w1 * odd[j + 1] + w2 * odd[j + 2] + w3 * odd[j + 3]
            out[i] = ev + sg * ov
        return out

    @njit(cache=True)
    def nb_translate_grid(even, odd, h, xs, y, cn, cw):
        n = even.shape[0] - 1
        ay = -y if y < 0.0 else y
        sy = 0.0
        if y > 0.0:
            sy = 1.0
        elif y < 0.0:
            sy = -1.0
        ev_out = np.zeros(xs.shape[0], np.complex128)
        ov_out = np.zeros(xs.shape[0], np.complex128)
        for i in range(xs.shape[0]):
            x = xs[i]
            s = sy if x > 0.0 else 0.0
            acc_e = 0.0 + 0.0j
            acc_o = 0.0 + 0.0j
            for m in range(cn.shape[0]):
                c = cn[m]
                rho2 = x * x + y * y - 2.0 * x * ay * c
                rho = np.sqrt(rho2) if rho2 > 0.0 else 0.0
                j = int(rho / h) - 1
                if j < 0:
                    j = 0
                elif j > n - 3:
                    j = n - 3
                u = rho / h - j
                w0 = -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0
                w1 = u * (u - 2.0) * (u - 3.0) / 2.0
                w2 = -u * (u - 1.0) * (u - 3.0) / 2.0
                w3 = u * (u - 1.0) * (u - 2.0) / 6.0
                fe = w0 * even[j] + w1 * even[j + 1] + w2 * even[j + 2] + w3 * even[j + 3]
                fo = w0 * odd[j] + w1 * odd[j + 1] + w2 * odd[j + 2] + w3 * odd[j + 3]
                q = fo / rho if rho > _RHO_FLOOR else 0.0 + 0.0j
                acc_e += cw[m] * (fe + q * (y - s * c * x))
                acc_o += cw[m] * (-s * c * fe + q * (x - s * c * y))
            ev_out[i] = acc_e
            ov_out[i] = acc_o
        return ev_out, ov_out

    @njit(cache=True)
    def nb_translate_points(even, odd, h, xs, ys, cn, cw):
        n = even.shape[0] - 1
        out = np.empty(xs.shape[0], np.complex128)
        for i in range(xs.shape[0]):
            x = xs[i]
            yv = ys[i]
            s = 0.0
            if x * yv > 0.0:
                s = 1.0
            elif x * yv < 0.0:
                s = -1.0
            axy = x * yv
            if axy < 0.0:
                axy = -axy
            acc = 0.0 + 0.0j
            for m in range(cn.shape[0]):
                c = cn[m]
                rho2 = x * x + yv * yv - 2.0 * axy * c
                rho = np.sqrt(rho2) if rho2 > 0.0 else 0.0
                j = int(rho / h) - 1
                if j < 0:
                    j = 0
                elif j > n - 3:
                    j = n - 3
                u = rho / h - j
                w0 = -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0
                w1 = u * (u - 2.0) * (u - 3.0) / 2.0
                w2 = -u * (u - 1.0) * (u - 3.0) / 2.0
                w3 = u * (u - 1.0) * (u - 2.0) / 6.0
                fe = w0 * even[j] + w1 * even[j + 1] + w2 * even[j + 2] + w3 * even[j + 3]
                fo = w0 * odd[j] + w1 * odd[j + 1] + w2 * odd[j + 2] + w3 * odd[j + 3]
                q = fo / rho if rho > _RHO_FLOOR else 0.0 + 0.0j
                acc += cw[m] * (fe * (1.0 - s * c) + q * (x + yv) * (1.0 - s * c))
            out[i] = acc
        return out

    return nb_interp_parity, nb_translate_grid, nb_translate_points


numba_interp_parity = None
numba_translate_grid = None
numba_translate_points = None
_BACKEND = "numpy"

if not _WANT_NUMPY:
    try:
        numba_interp_parity, numba_translate_grid, numba_translate_points = _build_numba()
        _BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _BACKEND = "numpy"

if _BACKEND == "numba":
    interp_parity = numba_interp_parity
    translate_grid = numba_translate_grid
    translate_points = numba_translate_points
else:
    interp_parity = numpy_interp_parity
    translate_grid = numpy_translate_grid
    translate_points = numpy_translate_points


def active_backend() -> str:
    """'numba' or 'numpy', as selected at import time."""
    return _BACKEND


def load_numba_impls():
    """Return the three numba kernels, compiling on first use.

    Used by the benchmark and the backend-equivalence tests even when the
    pure-numpy flag is set.  Raises ImportError if numba is unavailable.
    """
    global numba_interp_parity, numba_translate_grid, numba_translate_points
    if numba_interp_parity is None:
        numba_interp_parity, numba_translate_grid, numba_translate_points = _build_numba()
    return numba_interp_parity, numba_translate_grid, numba_translate_points

"""Special functions used by the builtin coefficient cases.

All functions accept scalars or numpy arrays and return the same shape
(a Python float for scalar input).  They are evaluated from their series
or continued-fraction definitions; no external special-function library
is involved, so scipy/mpmath can serve as independent test oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, PoleError, ValidationError

__all__ = ["SeriesTolerance", "hyp0f1", "gudermannian", "erf", "erfc"]

# 0F1 is summed directly; below this the alternating series loses too
# many digits to cancellation to honour rel_tol.
HYP0F1_Z_MIN = -50.0


@dataclass(frozen=True)
class SeriesTolerance:
    """Stopping rule for series summation."""

    rel_tol: float = 1e-14
    max_terms: int = 500

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValidationError(f"rel_tol must be positive, got {self.rel_tol}")
        if self.max_terms < 1:
            raise ValidationError(f"max_terms must be >= 1, got {self.max_terms}")


DEFAULT_TOL = SeriesTolerance()


def _scalar_out(x, like):
    return float(x) if np.ndim(like) == 0 else x


def hyp0f1(a: float, z, tol: SeriesTolerance = DEFAULT_TOL):
    """Confluent hypergeometric limit function 0F1(;a;z) = sum z^k/((a)_k k!).

    The series is summed with Kahan compensation.  Successive terms obey
    ``term[k+1] = term[k] * z / ((a + k) * (k + 1))``; summation stops once
    the terms are geometrically decreasing and the bound on the remaining
    tail is below ``tol.rel_tol`` times the running sum.

    Raises PoleError for a in {0, -1, -2, ...} and ConvergenceError when
    ``tol.max_terms`` is exhausted or z < -50.
    """
    if a <= 0 and float(a).is_integer():
        raise PoleError(f"0F1 parameter a={a} is a Pochhammer pole")
    zz = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(zz)):
        raise ConvergenceError("0F1 argument must be finite")
    if np.any(zz < HYP0F1_Z_MIN):
        raise ConvergenceError(
            f"0F1 direct summation refused for z < {HYP0F1_Z_MIN} "
            f"(min z = {zz.min():g})"
        )
    total = np.ones_like(zz)
    comp = np.zeros_like(zz)
    term = np.ones_like(zz)
    active = np.ones(zz.shape, dtype=bool)
    for k in range(tol.max_terms):
        ratio = zz / ((a + k) * (k + 1.0))
        term = term * ratio
        # Kahan step
        y = term - comp
        t = total + y
        comp = np.where(active, (t - total) - y, comp)
        total = np.where(active, t, total)
        r_next = np.abs(zz / ((a + k + 1.0) * (k + 2.0)))
        tail = np.abs(term) * r_next / np.maximum(1.0 - r_next, 1e-300)
        done = (r_next < 0.5) & (tail <= tol.rel_tol * np.abs(total))
        done |= term == 0.0
        active &= ~done
        if not active.any():
            return _scalar_out(total, z)
    raise ConvergenceError(
        f"0F1(a={a}) did not converge in {tol.max_terms} terms"
    )


def gudermannian(t):
    """gd t = 2 arctan(tanh(t/2)); odd, increasing, range (-pi/2, pi/2)."""
    tt = np.asarray(t, dtype=float)
    return _scalar_out(2.0 * np.arctan(np.tanh(0.5 * tt)), t)


_TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)
_ERF_SERIES_MAX = 3.0
# erfc switches to the continued fraction earlier: 1 - erf cancels once erfc is small
_ERFC_CF_MIN = 1.0


def _erf_series(x: float) -> float:
    # erf x = (2/sqrt(pi)) exp(-x^2) sum 2^n x^(2n+1) / (2n+1)!!  (no cancellation)
    x2 = x * x
    term = x
    total = x
    n = 0
    while abs(term) > 1e-17 * abs(total):
        term *= 2.0 * x2 / (2 * n + 3)
        total += term
        n += 1
        if n > 200:
            raise ConvergenceError(f"erf series did not converge at x={x}")
    return _TWO_OVER_SQRT_PI * math.exp(-x2) * total


def _erfc_cf(x: float) -> float:
    # erfc x = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))), x > 0
    tiny = 1e-300
    f = x
    c = x
    d = 0.0
    for n in range(1, 500):
        an = 0.5 * n
        d = x + an * d
        d = 1.0 / (d if d != 0.0 else tiny)
        c = x + an / (c if c != 0.0 else tiny)
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < 1e-16:
            return math.exp(-x * x) / (math.sqrt(math.pi) * f)
    raise ConvergenceError(f"erfc continued fraction did not converge at x={x}")


def _erf_scalar(x: float) -> float:
    if x != x:
        return x
    ax = abs(x)
    if ax <= _ERF_SERIES_MAX:
        return _erf_series(x)
    v = 1.0 - _erfc_cf(ax) if ax < 27.0 else 1.0
    return v if x > 0 else -v


def erf(t):
    """Error function, to ~1e-15 absolute on the real line."""
    tt = np.asarray(t, dtype=float)
    if tt.ndim == 0:
        return _erf_scalar(float(tt))
    out = np.empty_like(tt)
    flat = out.reshape(-1)
    for i, v in enumerate(tt.reshape(-1)):
        flat[i] = _erf_scalar(float(v))
    return out


def erfc(t):
    """Complementary error function 1 - erf(t), accurate in the right tail."""
    tt = np.asarray(t, dtype=float)

    def one(x):
        if x >= _ERFC_CF_MIN:
            return _erfc_cf(x) if x < 27.0 else 0.0
        return 1.0 - _erf_scalar(x)

    if tt.ndim == 0:
        return one(float(tt))
    return np.vectorize(one, otypes=[float])(tt)

"""Exact seed solutions of the Manakov system

    i chi_tau + chi_xixi + 2 (|phi|^2 + |chi|^2) chi = 0,
    i phi_tau + phi_xixi + 2 (|phi|^2 + |chi|^2) phi = 0.

Dark-bright solitons and rational rogue waves of types I and II.  All
samplers take broadcastable (xi, tau) arrays and return complex arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import SingularPointError, ValidationError

__all__ = [
    "DBParams",
    "RWParams",
    "RW2Intermediates",
    "SeedPair",
    "db_soliton",
    "rogue_wave_I",
    "rogue_wave_II",
    "rw2_intermediates",
    "plane_wave",
    "make_seed",
    "SEED_KINDS",
]

S3 = math.sqrt(3.0)
D_FLOOR = 1e-13


@dataclass(frozen=True)
class DBParams:
    """Dark-bright soliton parameters; ``E`` is the centre shift."""

    C: float = 1.0
    e: float = -1.0
    a3: float = 1.0
    b3: float = 1.0
    E: float = field(init=False)

    def __post_init__(self):
        if self.C == 0:
            raise ValidationError("dark-bright soliton needs C != 0")
        if self.a3 == 0 and self.b3 == 0:
            raise ValidationError("dark-bright soliton needs (a3, b3) != (0, 0)")
        object.__setattr__(
            self, "E", 0.5 * math.log((self.a3**2 + self.b3**2) / (2 * self.C**2))
        )

    def centre(self, tau):
        """xi at which the dark core / bright peak sits."""
        return -self.E / self.C + 2 * self.e * np.asarray(tau, dtype=float)


@dataclass(frozen=True)
class RWParams:
    d2: float = 1.0
    q: float = 0.0
    sign_c1: int = 1
    sign_c2: int = 1
    A: float = field(init=False)
    d1: float = field(init=False)
    c1: float = field(init=False)
    c2: float = field(init=False)

    def __post_init__(self):
        if self.sign_c1 not in (-1, 1) or self.sign_c2 not in (-1, 1):
            raise ValidationError("sign_c1, sign_c2 must be +1 or -1")
        A = self.d2 + 3 * self.q
        if A == 0:
            raise ValidationError("rogue wave needs A = d2 + 3q != 0")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "d1", self.d2 - 2 * A)
        object.__setattr__(self, "c1", self.sign_c1 * 2 * A)
        object.__setattr__(self, "c2", self.sign_c2 * 2 * A)

    def phases(self, xi, tau):
        xi = np.asarray(xi, dtype=float)
        tau = np.asarray(tau, dtype=float)
        w = 2 * self.c1**2 + 2 * self.c2**2
        return (self.d1 * xi + (w - self.d1**2) * tau,
                self.d2 * xi + (w - self.d2**2) * tau)


@dataclass(frozen=True)
class RW2Intermediates:
    D: np.ndarray
    G1: np.ndarray
    G2: np.ndarray
    H1: np.ndarray
    H2: np.ndarray


@dataclass(frozen=True)
class SeedPair:
    """Constant-coefficient solution pair; ``evaluate(xi, tau) -> (chi, phi)``."""

    evaluate: Callable
    kind: str
    params: dict

    def __call__(self, xi, tau):
        return self.evaluate(xi, tau)

    def chi_fn(self, xi, tau):
        return self.evaluate(xi, tau)[0]

    def phi_fn(self, xi, tau):
        return self.evaluate(xi, tau)[1]

    # does the modulus tend to a nonzero constant as |xi| -> infinity?
    @property
    def has_background(self) -> bool:
        return self.kind in ("rw1", "rw2", "db", "plane")


def _cis(theta):
    return np.cos(theta) + 1j * np.sin(theta)


def _sech(X):
    # 2 e^{-|X|} / (1 + e^{-2|X|}): no overflow for large |X|
    decay = np.exp(-np.abs(X))
    return 2 * decay / (1 + decay * decay)


def db_soliton(p: DBParams, amplitude: str = "exact") -> SeedPair:
    """Dark component C tanh(X), bright component P sech(X), X = C(xi - 2e tau) + E.

    ``amplitude="exact"`` uses P = -sqrt(2) C (a3 + i b3)/|a3 + i b3|, the value
    for which the pair solves the Manakov system.  ``"printed"`` uses
    P = -4 C^2 (a3 + i b3), kept for comparison only: it is not a solution
    unless 16 C^4 (a3^2 + b3^2) = 2 C^2.
    """
    C, e = p.C, p.e
    if amplitude == "exact":
        P = -math.sqrt(2.0) * abs(C) * complex(p.a3, p.b3) / math.hypot(p.a3, p.b3)
    elif amplitude == "printed":
        P = -4 * C * C * complex(p.a3, p.b3)
    else:
        raise ValidationError(f"amplitude must be 'exact' or 'printed', got {amplitude!r}")

    def evaluate(xi, tau):
        xi = np.asarray(xi, dtype=float)
        tau = np.asarray(tau, dtype=float)
        X = C * (xi - 2 * e * tau) + p.E
        chi = C * np.tanh(X) * _cis(e * xi + (2 * C * C - e * e) * tau)
        phi = P * _sech(X) * _cis(e * xi + (3 * C * C - e * e) * tau)
        return chi, phi

    return SeedPair(evaluate, "db", {"C": C, "e": e, "a3": p.a3, "b3": p.b3,
                                     "amplitude": amplitude})


def rogue_wave_I(p: RWParams) -> SeedPair:
    """Type I rogue wave (quadratic denominator in A B, A^2 tau)."""
    A = p.A

    def evaluate(xi, tau):
        xi = np.asarray(xi, dtype=float)
        tau = np.asarray(tau, dtype=float)
        X = A * (xi + 6 * p.q * tau)
        T = A * A * tau
        den = (12 * X + 8 * S3) * X + (144 * T * T + 5)
        re1 = -6 * S3 * X - 36 * S3 * T - 3
        im1 = 36 * T + 6 * X + 5 * S3
        re2 = -6 * S3 * X + 36 * S3 * T - 3
        im2 = 36 * T - 6 * X - 5 * S3
        th1, th2 = p.phases(xi, tau)
        chi = A * (complex(-1, -S3) + (re1 + 1j * im1) / den) * _cis(th1)
        phi = A * (complex(-1, S3) + (re2 + 1j * im2) / den) * _cis(th2)
        return chi, phi

    return SeedPair(evaluate, "rw1", {"d2": p.d2, "q": p.q})


def _horner(coeffs, x):
    # coeffs in increasing powers
    acc = np.zeros_like(x) + coeffs[-1]
    for c in reversed(coeffs[:-1]):
        acc = acc * x + c
    return acc


def rw2_intermediates(p: RWParams, xi, tau) -> RW2Intermediates:
    """The five polynomials in X = A B and T = A^2 tau."""
    xi = np.asarray(xi, dtype=float)
    tau = np.asarray(tau, dtype=float)
    A = p.A
    X = A * (xi + 6 * p.q * tau)
    T = A * A * tau
    hx = lambda *c: _horner(c, X)  # noqa: E731

    # shared X-polynomials
    p_9 = hx(9.0, 8 * S3, 6.0)
    p_g1 = hx(S3, 12.0, 6 * S3)
    p_g2 = hx(3.0, 2 * S3)
    p_h2 = hx(13 * S3, 6.0)

    D = _horner([hx(1.0, 4 * S3, 24.0, 16 * S3, 12.0), 0.0 * X, 48 * p_9,
                 0.0 * X, 1728.0 + 0.0 * X], T)
    g_even0 = hx(-1.0, 0.0, 6.0, 4 * S3)
    G1 = -3 * _horner([g_even0, 4 * p_g1, 24 * p_g2, 288 * S3 + 0.0 * X], T)
    G2 = 3 * _horner([-g_even0, 4 * p_g1, -24 * p_g2, 288 * S3 + 0.0 * X], T)
    h0 = hx(S3, 12.0, 18 * S3, 12.0)
    H1 = _horner([h0, 12 * p_9, 24 * p_h2, 864.0 + 0.0 * X], T)
    H2 = _horner([-h0, 12 * p_9, -24 * p_h2, 864.0 + 0.0 * X], T)
    return RW2Intermediates(D, G1, G2, H1, H2)


def rogue_wave_II(p: RWParams) -> SeedPair:
    """Type II rogue wave (quartic denominator D); raises SingularPointError if |D| < 1e-13."""
    A = p.A

    def evaluate(xi, tau):
        r = rw2_intermediates(p, xi, tau)
        if np.any(np.abs(r.D) < D_FLOOR):
            raise SingularPointError("rogue wave II denominator D vanishes on the sample set")
        th1, th2 = p.phases(xi, tau)
        chi = A * (complex(-1, -S3) + (r.G1 + 1j * r.H1) / r.D) * _cis(th1)
        phi = A * (complex(-1, S3) + (r.G2 + 1j * r.H2) / r.D) * _cis(th2)
        return chi, phi

    return SeedPair(evaluate, "rw2", {"d2": p.d2, "q": p.q})


def plane_wave(y: float = 0.0, z: float = 0.0) -> SeedPair:
    """Unit-modulus linear waves exp(i(y xi + y^2 tau)) and exp(i(z xi + z^2 tau)).

    Solutions of i u_tau - u_xixi = 0 (the transformed system with l0 = +1
    and no nonlinearity); used by the blow-up construction.
    """

    def evaluate(xi, tau):
        xi = np.asarray(xi, dtype=float)
        tau = np.asarray(tau, dtype=float)
        return _cis(y * xi + y * y * tau), _cis(z * xi + z * z * tau)

    return SeedPair(evaluate, "plane", {"y": y, "z": z})


SEED_KINDS = ("db", "rw1", "rw2", "plane")


def make_seed(kind: str, params=None, **kw) -> SeedPair:
    """Seed by name with a parameter mapping (unknown keys are a ValidationError)."""
    params = dict(params or {})
    try:
        if kind == "db":
            amp = params.pop("amplitude", kw.get("amplitude", "exact"))
            return db_soliton(DBParams(**params), amplitude=amp)
        if kind == "rw1":
            return rogue_wave_I(RWParams(**params))
        if kind == "rw2":
            return rogue_wave_II(RWParams(**params))
        if kind == "plane":
            return plane_wave(**params)
    except TypeError as exc:
        raise ValidationError(f"bad parameters for seed {kind!r}: {exc}") from None
    raise ValidationError(f"unknown seed {kind!r}; known: {', '.join(SEED_KINDS)}")

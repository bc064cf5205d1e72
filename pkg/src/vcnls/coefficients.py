"""Time-dependent coefficient sets of the VCNLS system and the case catalog.

A :class:`CoefficientSet` bundles the seven coefficient handles

    i psi_t = -a psi_xx + (b x^2 - i d - x f) psi + i (g - c x) psi_x
              + h (|phi|^{2s} + |psi|^{2s}) psi

with the exponent ``s``, the nonlinearity scale ``lam`` of the
integrability condition ``h = lam * a * beta^2 * mu^s`` and the sign
``l0`` of the transformed dispersion.  Handles must accept numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Optional

import numpy as np
from scipy.optimize import brentq

from . import specfun
from .errors import DomainError, SingularCoefficientError, UnknownCaseError, ValidationError

__all__ = [
    "CoefficientSet",
    "CoefficientValues",
    "CharacteristicCoefficients",
    "STANDARD_INIT",
    "evaluate",
    "eta_sigma",
    "characteristic_residual",
    "synthesize_h",
    "builtin_case",
    "case_ids",
    "catalog",
    "const",
]

Handle = Callable[[np.ndarray], np.ndarray]

# (alpha, beta, gamma, delta, epsilon, kappa, mu) at t = 0 for every worked case
STANDARD_INIT = (0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 1.0)

_DOMAIN_SLACK = 1e-12
_EDGE = 1e-3  # distance kept from the first coefficient singularity


def const(value: float) -> Handle:
    """Constant coefficient handle that broadcasts over array input."""
    v = float(value)

    def _c(t):
        return v + 0.0 * np.asarray(t, dtype=float)

    _c.constant = v
    return _c


ZERO = const(0.0)


@dataclass(frozen=True)
class CoefficientValues:
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    f: np.ndarray
    g: np.ndarray
    h: np.ndarray


@dataclass(frozen=True)
class CharacteristicCoefficients:
    eta: np.ndarray
    sigma: np.ndarray


@dataclass(frozen=True)
class CoefficientSet:
    """One VCNLS system.  Immutable; share freely across threads.

    ``forcing_free`` declares f = g = 0 identically, which lets the closed
    form skip the drive kernels.  ``printed`` (builtin cases only) maps
    ``(t, init)`` to the closed-form Riccati functions stated for the case,
    used as regression fixtures.  ``printed_h`` is the nonlinearity stated
    for the case, which may differ from the integrability-consistent ``h``.
    """

    a: Handle
    b: Handle = ZERO
    c: Handle = ZERO
    d: Handle = ZERO
    f: Handle = ZERO
    g: Handle = ZERO
    h: Handle = ZERO
    a_prime: Optional[Handle] = None
    d_prime: Optional[Handle] = None
    s: float = 1.0
    lam: Optional[float] = -2.0
    l0: int = -1
    n: int = 1
    domain: tuple = (0.0, 3.0)
    case_id: Optional[str] = None
    forcing_free: bool = False
    formula_strings: Mapping[str, str] = field(default_factory=dict)
    printed: Optional[Callable] = None
    printed_h: Optional[Handle] = None
    standard_init: tuple = STANDARD_INIT
    default_seed: Optional[str] = None
    default_params: Mapping[str, float] = field(default_factory=dict)
    # (x_lo, x_hi, t_lo, t_hi) for the residual ladders: centred on the lifted
    # peak and sized so the 4th-order stencils resolve it at 65..257 points
    verify_window: Optional[tuple] = None

    def __post_init__(self):
        if self.l0 not in (-1, 1):
            raise ValidationError(f"l0 must be +1 or -1, got {self.l0}")
        if not self.s > 0:
            raise ValidationError(f"s must be positive, got {self.s}")
        if self.n < 1:
            raise ValidationError(f"dimension n must be >= 1, got {self.n}")
        t0, t1 = self.domain
        if not t1 > t0:
            raise ValidationError(f"empty domain {self.domain}")

    def with_(self, **changes) -> "CoefficientSet":
        return replace(self, **changes)

    def check_domain(self, t):
        t0, t1 = self.domain
        tt = np.asarray(t, dtype=float)
        if np.any(tt < t0 - _DOMAIN_SLACK) or np.any(tt > t1 + _DOMAIN_SLACK):
            raise DomainError(
                f"t outside declared domain [{t0:g}, {t1:g}] of case {self.case_id}"
            )

    def aprime(self, t, step=1e-6):
        if self.a_prime is not None:
            return self.a_prime(t)
        return (self.a(t + step) - self.a(t - step)) / (2 * step)

    def dprime(self, t, step=1e-6):
        if self.d_prime is not None:
            return self.d_prime(t)
        return (self.d(t + step) - self.d(t - step)) / (2 * step)

    def descriptor(self) -> dict:
        """JSON-serialisable catalog entry (formula strings are display only)."""
        return {
            "case_id": self.case_id,
            "domain": [float(self.domain[0]), float(self.domain[1])],
            "lambda": self.lam,
            "l0": self.l0,
            "s": self.s,
            "n": self.n,
            "default_seed": self.default_seed,
            "default_params": dict(self.default_params),
            "verify_window": list(self.verify_window) if self.verify_window else None,
            "formula_strings": dict(self.formula_strings),
        }


def evaluate(cs: CoefficientSet, t) -> CoefficientValues:
    cs.check_domain(t)
    return CoefficientValues(
        a=cs.a(t), b=cs.b(t), c=cs.c(t), d=cs.d(t), f=cs.f(t), g=cs.g(t), h=cs.h(t)
    )


def eta_sigma(cs: CoefficientSet, t) -> CharacteristicCoefficients:
    """eta = a'/a - 2c + 4d and sigma = ab - cd + d^2 + (d/2)(a'/a - d'/d).

    The d-bracket is expanded to d a'/(2a) - d'/2 so d(t) = 0 is regular.
    """
    a = np.asarray(cs.a(t), dtype=float)
    if np.any(a == 0.0):
        raise SingularCoefficientError(f"a(t) vanishes at t={t}")
    ap = cs.aprime(t)
    b, c, d = cs.b(t), cs.c(t), cs.d(t)
    dp = cs.dprime(t)
    eta = ap / a - 2 * c + 4 * d
    sigma = a * b - c * d + d * d + d * ap / (2 * a) - 0.5 * dp
    return CharacteristicCoefficients(eta=eta, sigma=sigma)


def characteristic_residual(mu, cs: CoefficientSet, t, step: float = 1e-3):
    """mu'' - eta mu' + 4 sigma mu at t.

    ``mu`` returns either a value or a tuple ``(mu, mu', mu'')``; in the
    first case derivatives come from 6th-order central differences.
    """
    out = mu(t)
    if isinstance(out, tuple):
        m, m1, m2 = out
    else:
        m = out
        hs = step
        f = [mu(t + k * hs) for k in (-3, -2, -1, 1, 2, 3)]
        m1 = (-f[0] + 9 * f[1] - 45 * f[2] + 45 * f[3] - 9 * f[4] + f[5]) / (60 * hs)
        m2 = (
            2 * f[0] - 27 * f[1] + 270 * f[2] - 490 * m + 270 * f[3] - 27 * f[4] + 2 * f[5]
        ) / (180 * hs * hs)
    es = eta_sigma(cs, t)
    return m2 - es.eta * m1 + 4 * es.sigma * m


def synthesize_h(cs: CoefficientSet, beta: Handle, mu: Handle) -> Handle:
    """t -> lam * a(t) * beta(t)^2 * mu(t)^s."""
    lam = 0.0 if cs.lam is None else float(cs.lam)
    s = cs.s

    def h(t):
        return lam * cs.a(t) * beta(t) ** 2 * np.asarray(mu(t), dtype=float) ** s

    return h


# --------------------------------------------------------------------------
# builtin catalog

SQ2 = math.sqrt(2.0)
SQ8 = math.sqrt(8.0)


def _airy_z(t):
    t = np.asarray(t, dtype=float)
    return -4.0 * t**3 / 9.0


def _F(p, t):
    return specfun.hyp0f1(p, _airy_z(t))


def _safe_div(num, den, limit):
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = num / den
    return np.where(den == 0.0, limit, q)


def _require_standard(init, case):
    if init is not None and tuple(float(v) for v in init) != STANDARD_INIT:
        raise ValidationError(f"printed formulas of {case} hold for the standard init only")


def _rw1_hyp():
    def printed(t, init=None):
        _require_standard(init, "rw1-hyp")
        t = np.asarray(t, dtype=float)
        F23, F43, F73 = _F(2 / 3, t), _F(4 / 3, t), _F(7 / 3, t)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            alpha = 1 / (4 * t) - (1 + t**3 * F23 * F73) / (4 * t * F23 * F43)
        alpha = np.where(t == 0, 0.0, alpha)
        return dict(
            alpha=alpha,
            beta=1 / F23,
            gamma=t * F43 / F23,
            delta=1 / F23,
            epsilon=-2 * t * F43 / F23,
            kappa=-t * F43 / F23,
            mu=np.exp(2 * t) * F23,
        )

    def h(t):
        return -2 * np.exp(2 * np.asarray(t, float)) / _F(2 / 3, t)

    t_sing = brentq(lambda t: specfun.hyp0f1(2 / 3, -4 * t**3 / 9), 1.0, 1.5, xtol=1e-14)
    return CoefficientSet(
        a=const(1.0), a_prime=ZERO, b=lambda t: np.asarray(t, float), d=const(1.0),
        d_prime=ZERO, h=h, printed_h=h, printed=printed, forcing_free=True,
        domain=(0.0, t_sing - _EDGE), case_id="rw1-hyp", default_seed="rw1",
        default_params={"d2": 1.0, "q": 0.0},
        verify_window=(-0.76, -0.4, 0.0, 0.1),
        formula_strings={
            "a": "1", "b": "t", "c": "0", "d": "1", "f": "0", "g": "0",
            "h": "-2 exp(2t) / 0F1(2/3, -4t^3/9)",
            "mu": "exp(2t) 0F1(2/3, -4t^3/9)",
        },
    )


def _rw1_cos():
    def printed(t, init=None):
        _require_standard(init, "rw1-cos")
        t = np.asarray(t, dtype=float)
        z = 0.0 * t
        return dict(
            alpha=z, beta=z + 1, gamma=-np.sin(t) / 2, delta=z + 1,
            epsilon=np.sin(t), kappa=np.sin(t) / 2, mu=np.exp(-2 * t),
        )

    def h(t):
        t = np.asarray(t, float)
        return np.exp(-2 * t) * np.cos(t)

    return CoefficientSet(
        a=lambda t: -np.cos(t) / 2, a_prime=lambda t: np.sin(t) / 2,
        d=const(-1.0), d_prime=ZERO, h=h, printed_h=h, printed=printed,
        forcing_free=True, domain=(0.0, math.pi / 2 - _EDGE), case_id="rw1-cos",
        default_seed="rw1", default_params={"d2": 1.0, "q": -1.0},
        verify_window=(0.23, 0.35, 0.0, 0.025),
        formula_strings={
            "a": "-cos(t)/2", "b": "0", "c": "0", "d": "-1", "f": "0", "g": "0",
            "h": "exp(-2t) cos(t)", "mu": "exp(-2t)",
        },
    )


def _rw2_gd():
    def S(t):
        return SQ8 * specfun.gudermannian(t)

    def mu(t):
        s_ = S(t)
        return np.cosh(s_) - SQ2 / 2 * np.sinh(s_)

    def printed(t, init=None):
        _require_standard(init, "rw2-gd")
        s_ = S(t)
        th = np.tanh(s_)
        # coth-forms multiplied through by tanh: regular at t = 0
        gamma = th / (4 * th - 4 * SQ2)
        return dict(
            alpha=th / (th - SQ2),
            beta=SQ2 / (SQ2 * np.cosh(s_) - np.sinh(s_)),
            gamma=gamma,
            delta=SQ2 / (SQ2 * np.cosh(s_) - np.sinh(s_)),
            epsilon=-th / (2 * th - SQ8),
            kappa=-gamma,
            mu=mu(t),
        )

    def a(t):
        return -0.5 / np.cosh(t)

    def ap(t):
        return 0.5 * np.tanh(t) / np.cosh(t)

    def h(t):
        return 1 / (np.cosh(t) * mu(t))

    def h_printed(t):
        s_ = S(t)
        return -2 / np.cosh(t) / (-2 * np.cosh(s_) + SQ2 * np.sinh(s_))

    return CoefficientSet(
        a=a, a_prime=ap, b=lambda t: -4 * a(t), c=lambda t: 4 * a(t),
        d=lambda t: 2 * a(t), d_prime=lambda t: 2 * ap(t), h=h, printed_h=h_printed,
        printed=printed, forcing_free=True, domain=(0.0, 3.0), case_id="rw2-gd",
        default_seed="rw2", default_params={"d2": -0.5, "q": 0.0},
        verify_window=(0.01, 0.71, 0.0, 0.2),
        formula_strings={
            "a": "-sech(t)/2", "b": "-4a", "c": "4a", "d": "2a", "f": "0", "g": "0",
            "h": "-2 sech(t) / (-2 cosh(sqrt8 gd t) + sqrt2 sinh(sqrt8 gd t))",
            "mu": "cosh(sqrt8 gd t) - (sqrt2/2) sinh(sqrt8 gd t)",
        },
    )


def _theta(t):
    """theta = sqrt8 t cos t + sqrt2 (t^2 - 1) sin t (phase of the rw2-theta case)."""
    t = np.asarray(t, dtype=float)
    return SQ8 * t * np.cos(t) + SQ2 * (t * t - 1) * np.sin(t)


def _rw2_theta():
    def mu(t):
        th = _theta(t)
        return np.cosh(th) - SQ2 * np.sinh(th)

    def printed(t, init=None):
        _require_standard(init, "rw2-theta")
        th = _theta(t)
        tn = np.tanh(th)
        with np.errstate(divide="ignore"):  # beta is infinite where mu = 0
            beta = 1 / (np.cosh(th) - SQ2 * np.sinh(th))
        return dict(
            alpha=tn / (SQ2 - 2 * tn),
            beta=beta,
            gamma=tn / (4 * tn - SQ8),
            delta=beta,
            epsilon=tn / (SQ2 - 2 * tn),
            kappa=tn / (SQ8 - 4 * tn),
            mu=mu(t),
        )

    def a(t):
        t = np.asarray(t, float)
        return -(1 + t * t) * np.cos(t) / 2

    def ap(t):
        t = np.asarray(t, float)
        return -(2 * t * np.cos(t) - (1 + t * t) * np.sin(t)) / 2

    def h(t):
        return -2 * a(t) / mu(t)

    def h_printed(t):
        return 2 * a(t) / mu(t)

    t_mu0 = brentq(mu, 0.1, 1.2, xtol=1e-14)
    return CoefficientSet(
        a=a, a_prime=ap, b=lambda t: 2 * a(t), c=lambda t: 4 * a(t),
        d=lambda t: 2 * a(t), d_prime=lambda t: 2 * ap(t), h=h, printed_h=h_printed,
        printed=printed, forcing_free=True,
        domain=(0.0, min(math.pi / 2, t_mu0) - _EDGE), case_id="rw2-theta",
        default_seed="rw2", default_params={"d2": 1.0, "q": -1.0},
        verify_window=(0.05, 0.13, 0.0, 0.01),
        formula_strings={
            "a": "-(1+t^2) cos(t)/2", "b": "2a", "c": "4a", "d": "2a", "f": "0", "g": "0",
            "h": "-2a / (cosh theta - sqrt2 sinh theta)",
            "h_printed": "2a / (cosh theta - sqrt2 sinh theta)",
            "theta": "sqrt8 t cos t + sqrt2 (t^2 - 1) sin t",
            "mu": "cosh theta - sqrt2 sinh theta",
        },
    )


def _db_hyp():
    def mu(t):
        t = np.asarray(t, float)
        return _F(2 / 3, t) - 2 * t * _F(4 / 3, t)

    def printed(t, init=None):
        _require_standard(init, "db-hyp")
        t = np.asarray(t, dtype=float)
        F23, F43, F73 = _F(2 / 3, t), _F(4 / 3, t), _F(7 / 3, t)
        m = F23 - 2 * t * F43
        with np.errstate(divide="ignore", invalid="ignore"):
            alpha = (
                0.25 + 1 / (8 * t)
                + 1 / (-8 * t * F23 * F43 + 16 * t * t * F43**2)
                - t * t * F73 / (8 * F43)
            )
        alpha = np.where(t == 0, 0.0, alpha)
        return dict(
            alpha=alpha, beta=1 / m, gamma=2 * t * F43 / m, delta=1 / m,
            epsilon=-4 * t * F43 / m, kappa=-2 * t * F43 / m, mu=m,
        )

    def h(t):
        return -4 / mu(t)

    t_sing = brentq(mu, 0.2, 0.8, xtol=1e-14)
    return CoefficientSet(
        a=const(2.0), a_prime=ZERO, b=lambda t: (np.asarray(t, float) + 1) / 2,
        c=const(-2.0), d=const(-1.0), d_prime=ZERO, h=h, printed_h=h,
        printed=printed, forcing_free=True, domain=(0.0, t_sing - _EDGE),
        case_id="db-hyp", default_seed="db",
        default_params={"e": -1.0, "C": 1.0, "a3": 1.0, "b3": 1.0},
        verify_window=(-1.5, 1.5, 0.0, 0.2),
        formula_strings={
            "a": "2", "b": "(t+1)/2", "c": "-2", "d": "-1", "f": "0", "g": "0",
            "h": "-4 / (0F1(2/3,-4t^3/9) - 2t 0F1(4/3,-4t^3/9))",
            "mu": "0F1(2/3,-4t^3/9) - 2t 0F1(4/3,-4t^3/9)",
        },
    )


def _db_trig():
    def printed(t, init=None):
        t = np.asarray(t, dtype=float)
        init = STANDARD_INIT if init is None else tuple(float(v) for v in init)
        al0, be0, ga0, de0, ep0, ka0, mu0 = init
        if (al0, be0, ga0, mu0) != (0.0, 1.0, 0.0, 1.0):
            raise ValidationError("db-trig printed formulas need alpha0=gamma0=0, beta0=mu0=1")
        z = 0.0 * t
        return dict(
            alpha=np.sin(t) / 4, beta=z + 1, gamma=t, delta=z + de0,
            epsilon=ep0 - 2 * de0 * t, kappa=ka0 - de0**2 * t,
            mu=np.exp(3 - 3 * np.cos(t)),
        )

    def h(t):
        return -2 * np.exp(3 - 3 * np.cos(t))

    return CoefficientSet(
        a=const(1.0), a_prime=ZERO,
        b=lambda t: (np.sin(t) ** 2 - np.cos(t)) / 4,
        c=lambda t: -np.sin(t), d=lambda t: np.sin(t), d_prime=lambda t: np.cos(t),
        h=h, printed_h=h, printed=printed, forcing_free=True, domain=(0.0, 3.0),
        case_id="db-trig", default_seed="db",
        default_params={"e": -1.0, "C": 2.0, "a3": -1.0, "b3": 1.0},
        verify_window=(-0.65, 1.35, 0.0, 0.4),
        formula_strings={
            "a": "1", "b": "(sin^2 t - cos t)/4", "c": "-sin t", "d": "sin t",
            "f": "0", "g": "0", "h": "-2 exp(3 - 3 cos t)", "mu": "exp(3 - 3 cos t)",
        },
    )


def _integral_h(h, alpha0, s, t):
    from scipy.integrate import quad

    def one(tt):
        v, _ = quad(lambda u: h(u) / (1 + 2 * alpha0 * u) ** s, 0.0, tt,
                    epsabs=1e-13, epsrel=1e-13, limit=200)
        return v

    tt = np.asarray(t, dtype=float)
    if tt.ndim == 0:
        return one(float(tt))
    return np.array([one(float(v)) for v in tt.reshape(-1)]).reshape(tt.shape)


def blowup_free_case(h: Optional[Handle] = None, s: float = 1.0) -> CoefficientSet:
    """a = 1/2 with b = c = d = f = g = 0 and a free nonlinearity h(t)."""
    hh = const(1.0) if h is None else h

    def printed(t, init=None):
        init = STANDARD_INIT if init is None else tuple(float(v) for v in init)
        al0, be0, ga0, de0, ep0, ka0, mu0 = init
        t = np.asarray(t, dtype=float)
        r = 1 + 2 * al0 * t
        kappa = (
            ka0 - de0**2 * t / (2 * r)
            - 2 / mu0**s * _integral_h(hh, al0, s, t)
        )
        return dict(
            alpha=al0 / r, beta=be0 / r, gamma=ga0 - be0**2 * t / (2 + 4 * al0 * t),
            delta=de0 / r, epsilon=ep0 - be0 * de0 * t / r, kappa=kappa, mu=mu0 * r,
        )

    return CoefficientSet(
        a=const(0.5), a_prime=ZERO, d_prime=ZERO, h=hh, printed_h=hh, s=s,
        lam=None, l0=1, printed=printed, forcing_free=True, domain=(0.0, 3.0),
        case_id="blowup-free", default_seed="plane",
        default_params={"y": 0.0, "z": 0.0},
        standard_init=(-0.25, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0),
        verify_window=(-2.0, 2.0, 0.0, 1.0),
        formula_strings={
            "a": "1/2", "b": "0", "c": "0", "d": "0", "f": "0", "g": "0",
            "h": "user supplied (default 1)", "mu": "mu0 (1 + 2 alpha0 t)",
            "T_b": "-1/(2 alpha0), alpha0 < 0",
        },
    )


def _nd2_tanh():
    def printed(t, init=None):
        _require_standard(init, "nd2-tanh")
        t = np.asarray(t, dtype=float)
        th, sh = np.tanh(4 * t), 1 / np.cosh(4 * t)
        return dict(
            alpha=th / 2, beta=sh, gamma=-th / 2, delta=sh, epsilon=-th,
            kappa=-th / 2, mu=np.cosh(4 * t) ** 2,
        )

    return CoefficientSet(
        a=const(2.0), a_prime=ZERO, b=const(-2.0), d_prime=ZERO, h=const(-8.0),
        printed_h=const(-8.0), lam=-4.0, l0=1, n=2, printed=printed,
        forcing_free=True, domain=(0.0, 3.0), case_id="nd2-tanh", default_seed="db",
        default_params={"e": -1.0, "C": 1.0, "a3": 1.0, "b3": 1.0},
        verify_window=(-1.0, 1.0, 0.0, 0.1),
        formula_strings={
            "a": "2", "b": "-2", "h": "-8", "mu": "cosh^2(4t)",
            "reduction": "u = chi(xi1 + xi2, -2 tau)",
        },
    )


def _nd3_erf():
    rp2 = math.sqrt(math.pi / 2)

    def printed(t, init=None):
        _require_standard(init, "nd3-erf")
        t = np.asarray(t, dtype=float)
        E = specfun.erf(SQ2 * t)
        return dict(
            alpha=t / 4, beta=np.exp(-t * t), gamma=-rp2 * E, delta=np.exp(-t * t),
            epsilon=-math.sqrt(2 * math.pi) * E, kappa=-rp2 * E, mu=np.exp(3 * t * t),
        )

    return CoefficientSet(
        a=const(2.0), a_prime=ZERO, b=lambda t: -(1 + 2 * np.asarray(t, float) ** 2) / 4,
        d_prime=ZERO, h=lambda t: -12 * np.exp(np.asarray(t, float) ** 2),
        printed_h=lambda t: -12 * np.exp(np.asarray(t, float) ** 2),
        lam=-6.0, l0=1, n=3, printed=printed, forcing_free=True, domain=(0.0, 3.0),
        case_id="nd3-erf", default_seed="rw1", default_params={"d2": 1.0, "q": 0.0},
        verify_window=(-0.3, 0.3, 0.0, 0.02),
        formula_strings={
            "a": "2", "b": "-(1+2t^2)/4", "h": "-12 exp(t^2)", "mu": "exp(3t^2)",
            "reduction": "u = chi(xi1 + xi2 + xi3, -3 tau)",
        },
    )


_FACTORIES = {
    "rw1-hyp": _rw1_hyp,
    "rw1-cos": _rw1_cos,
    "rw2-gd": _rw2_gd,
    "rw2-theta": _rw2_theta,
    "db-hyp": _db_hyp,
    "db-trig": _db_trig,
    "blowup-free": blowup_free_case,
    "nd2-tanh": _nd2_tanh,
    "nd3-erf": _nd3_erf,
}

_CACHE: dict = {}


def case_ids() -> list:
    return list(_FACTORIES)


def builtin_case(case_id: str, **overrides) -> CoefficientSet:
    """Catalog lookup; keyword overrides go to the case factory (blowup-free: h, s)."""
    try:
        factory = _FACTORIES[case_id]
    except KeyError:
        raise UnknownCaseError(
            f"unknown case {case_id!r}; known: {', '.join(_FACTORIES)}"
        ) from None
    if overrides:
        return factory(**overrides)
    if case_id not in _CACHE:
        _CACHE[case_id] = factory()
    return _CACHE[case_id]


def catalog() -> list:
    return [builtin_case(cid).descriptor() for cid in _FACTORIES]

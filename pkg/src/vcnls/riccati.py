"""Riccati system of the similarity transformation.

Three independent routes to the seven functions (alpha, beta, gamma, delta,
epsilon, kappa, mu):

* :func:`closed_form` -- the multiparameter solution built from the
  fundamental pair (mu0, mu1) of the characteristic equation plus the
  drive kernels delta0, epsilon0, kappa0;
* :func:`ode_oracle` -- direct adaptive integration of the six Riccati
  equations together with mu' = (4 a alpha + 2 d) mu;
* :func:`modified_ode` / :func:`nd_ode` -- the blow-up variant (extra
  -2h/mu^s in kappa, l0 = 1) and the n-dimensional system.

The characteristic equation mu'' - eta mu' + 4 sigma mu = 0 is integrated
in the equivalent first-order form

    mu' = 2 d mu + 4 a P,    P' = -b mu + 2 (d - c) P,    P = alpha * mu,

which is regular where a(t) vanishes.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, fields
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.optimize import brentq

from .coefficients import CoefficientSet
from .errors import BlowupEncountered, IntegrationError, ValidationError

__all__ = [
    "RiccatiInit",
    "RiccatiState",
    "NDRiccatiInit",
    "NDRiccatiState",
    "FundamentalPair",
    "ClosedForm",
    "ClosedFormTrajectory",
    "RiccatiTrajectory",
    "NDRiccatiTrajectory",
    "BlowupReport",
    "fundamental_solutions",
    "closed_form",
    "closed_form_appendix",
    "ode_oracle",
    "ode_trajectory",
    "modified_ode",
    "modified_trajectory",
    "nd_ode",
    "nd_trajectory",
    "nd_closed_form",
    "NDClosedFormTrajectory",
    "nd_characteristic_residual",
    "blowup_time",
    "states_to_csv",
    "riccati_rhs",
]

NAMES = ("alpha", "beta", "gamma", "delta", "epsilon", "kappa", "mu")

ALPHA_BLOWUP = 1e12
MU_FLOOR = 1e-13
T_MIN = 1e-8
DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-10
# oracle entry points: local error 1e-10 lets global drift reach ~1e-8 on rw2-theta
ORACLE_TOL = 1e-12


@dataclass(frozen=True)
class RiccatiInit:
    alpha0: float = 0.0
    beta0: float = 1.0
    gamma0: float = 0.0
    delta0: float = 1.0
    epsilon0: float = 0.0
    kappa0: float = 0.0
    mu0: float = 1.0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not math.isfinite(v):
                raise ValidationError(f"{f.name} must be finite, got {v}")
        if self.beta0 == 0:
            raise ValidationError("beta(0) must be nonzero")
        if self.mu0 == 0:
            raise ValidationError("mu(0) must be nonzero")

    @classmethod
    def from_tuple(cls, values) -> "RiccatiInit":
        return cls(*(float(v) for v in values))

    def as_tuple(self) -> tuple:
        return tuple(getattr(self, f.name) for f in fields(self))


@dataclass(frozen=True)
class RiccatiState:
    t: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    delta: np.ndarray
    epsilon: np.ndarray
    kappa: np.ndarray
    mu: np.ndarray

    def as_array(self) -> np.ndarray:
        """Shape (7, ...) stack in the order alpha .. mu."""
        return np.stack([np.asarray(getattr(self, k), dtype=float) for k in NAMES])

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in NAMES}

    @classmethod
    def from_array(cls, t, arr) -> "RiccatiState":
        return cls(t, *arr)


def _as_init(init) -> RiccatiInit:
    if isinstance(init, RiccatiInit):
        return init
    return RiccatiInit.from_tuple(init)


def _squeeze(t, arr):
    # scalar t -> scalar fields
    return arr[..., 0] if np.ndim(t) == 0 else arr


# --------------------------------------------------------------------------
# fundamental pair


class FundamentalPair:
    """Fundamental solutions of the characteristic equation.

    mu0(0) = 0, mu0'(0) = 2 a(0); mu1(0) = 1, mu1'(0) = 0.  Also carries
    w(t) = exp(-int_0^t (c - 2d)) and the companion P = (mu' - 2 d mu)/(4a).
    """

    def __init__(self, cs: CoefficientSet, span, rtol: float, atol: float):
        self.cs = cs
        a0 = float(cs.a(0.0))
        if a0 == 0.0:
            raise ValidationError("the fundamental pair needs a(0) != 0")
        self.a0 = a0
        self.wronskian0 = -2.0 * a0  # mu0 mu1' - mu0' mu1 at t = 0
        d0 = float(cs.d(0.0))
        self.y0 = np.array([0.0, 0.5, 1.0, -d0 / (2 * a0), 0.0])
        self._branches = []
        lo, hi = float(span[0]), float(span[1])
        for end in (hi, lo):
            if end == 0.0:
                continue
            sol = solve_ivp(self._rhs, (0.0, end), self.y0, method="DOP853",
                            rtol=rtol, atol=atol, dense_output=True)
            if sol.status != 0:
                raise IntegrationError(f"fundamental pair integration failed: {sol.message}")
            self._branches.append((min(0.0, end), max(0.0, end), sol.sol))
        self.span = (lo, hi)

    def _rhs(self, t, y):
        cs = self.cs
        a, b, c, d = cs.a(t), cs.b(t), cs.c(t), cs.d(t)
        m0, p0, m1, p1, _ = y
        return [
            2 * d * m0 + 4 * a * p0,
            -b * m0 + 2 * (d - c) * p0,
            2 * d * m1 + 4 * a * p1,
            -b * m1 + 2 * (d - c) * p1,
            -(c - 2 * d),
        ]

    def raw(self, t) -> np.ndarray:
        """(m0, p0, m1, p1, log w) stacked along axis 0."""
        tt = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty((5,) + tt.shape)
        done = np.zeros(tt.shape, dtype=bool)
        if np.any(tt == 0.0):
            out[:, tt == 0.0] = self.y0[:, None]
            done |= tt == 0.0
        for lo, hi, fn in self._branches:
            sel = (~done) & (tt >= lo - 1e-14) & (tt <= hi + 1e-14)
            if sel.any():
                out[:, sel] = fn(tt[sel])
                done |= sel
        if not done.all():
            raise ValidationError(
                f"t outside the integrated span {self.span} of the fundamental pair"
            )
        return out if np.ndim(t) else out[:, 0]

    def mu0(self, t):
        m0, p0, *_ = self.raw(t)
        d, a = self.cs.d(t), self.cs.a(t)
        return m0, 2 * d * m0 + 4 * a * p0

    def mu1(self, t):
        _, _, m1, p1, _ = self.raw(t)
        d, a = self.cs.d(t), self.cs.a(t)
        return m1, 2 * d * m1 + 4 * a * p1

    def w(self, t):
        return np.exp(self.raw(t)[4])

    def wronskian(self, t):
        m0, m0p = self.mu0(t)
        m1, m1p = self.mu1(t)
        return m0 * m1p - m0p * m1

    def second_derivatives(self, t):
        """mu0'' and mu1'' from the first-order system (exact given the state)."""
        cs = self.cs
        m0, p0, m1, p1, _ = self.raw(t)
        a, b, c, d = cs.a(t), cs.b(t), cs.c(t), cs.d(t)
        ap, dp = cs.aprime(t), cs.dprime(t)
        res = []
        for m, p in ((m0, p0), (m1, p1)):
            mp = 2 * d * m + 4 * a * p
            pp = -b * m + 2 * (d - c) * p
            res.append(2 * dp * m + 2 * d * mp + 4 * ap * p + 4 * a * pp)
        return tuple(res)


def fundamental_solutions(cs: CoefficientSet, domain=None, tol: float = 1e-12,
                          check_points: int = 101) -> FundamentalPair:
    """Integrate the fundamental pair on ``domain`` (default: cs.domain).

    The pair is checked against the characteristic equation (with the
    coefficient-set's own a', d') on ``check_points`` nodes where a != 0.
    """
    from .coefficients import eta_sigma

    span = cs.domain if domain is None else domain
    lo, hi = min(0.0, span[0]), max(0.0, span[1])
    pair = FundamentalPair(cs, (lo, hi), rtol=tol, atol=tol * 1e-2)
    grid = np.linspace(lo, hi, check_points)
    grid = grid[np.abs(cs.a(grid)) > 1e-6]
    if grid.size:
        es = eta_sigma(cs, grid)
        m2s = pair.second_derivatives(grid)
        for (m, mp), m2 in zip((pair.mu0(grid), pair.mu1(grid)), m2s):
            r = m2 - es.eta * mp + 4 * es.sigma * m
            scale = np.maximum.reduce([np.ones_like(m), np.abs(m2),
                                       np.abs(es.eta * mp), np.abs(4 * es.sigma * m)])
            worst = np.max(np.abs(r) / scale)
            if worst > 1e3 * tol + 1e-9:
                raise IntegrationError(
                    f"fundamental pair violates the characteristic equation "
                    f"(relative residual {worst:.2e}); check a_prime/d_prime"
                )
    return pair


# --------------------------------------------------------------------------
# closed form


def _sigma(cs, t):
    a = cs.a(t)
    d = cs.d(t)
    return (a * cs.b(t) - cs.c(t) * d + d * d + d * cs.aprime(t) / (2 * a)
            - 0.5 * cs.dprime(t))


class ClosedForm:
    """Multiparameter Riccati solution for fixed coefficients.

    Kernels delta0, epsilon0, kappa0 are integrals over the dense fundamental
    pair computed with adaptive Gauss-Kronrod quadrature; they vanish
    identically when the coefficient set is declared forcing free.
    """

    def __init__(self, cs: CoefficientSet, pair: Optional[FundamentalPair] = None,
                 span=None, quad_tol: float = 1e-10, tol: float = 1e-12):
        self.cs = cs
        self.pair = pair if pair is not None else fundamental_solutions(cs, span, tol)
        self.quad_tol = quad_tol
        self.forcing_free = cs.forcing_free

    # kernels --------------------------------------------------------------
    def _F(self, s):
        cs = self.cs
        return cs.f(s) - cs.d(s) / cs.a(s) * cs.g(s)

    def _delta0_integrand(self, s):
        cs = self.cs
        m0, m0p = self.pair.mu0(s)
        return (self._F(s) * m0 + cs.g(s) / (2 * cs.a(s)) * m0p) / self.pair.w(s)

    def _quad(self, fn, t):
        v, _ = quad(fn, 0.0, t, epsabs=self.quad_tol, epsrel=self.quad_tol, limit=200)
        return v

    def delta0(self, t: float) -> float:
        cs = self.cs
        if self.forcing_free:
            return 0.0
        if abs(t) < T_MIN:
            return float(cs.g(0.0)) / (2 * float(cs.a(0.0)))
        m0, _ = self.pair.mu0(t)
        return float(self.pair.w(t)) / float(m0) * self._quad(self._delta0_integrand, t)

    def epsilon0(self, t: float) -> float:
        if self.forcing_free:
            return 0.0
        if abs(t) < T_MIN:
            return -self.delta0(0.0)
        cs = self.cs
        pair = self.pair

        def i1(s):
            m0, m0p = pair.mu0(s)
            return cs.a(s) * _sigma(cs, s) * pair.w(s) / m0p**2 * m0 * self.delta0(s)

        def i2(s):
            _, m0p = pair.mu0(s)
            return cs.a(s) * pair.w(s) / m0p * self._F(s)

        _, m0p = pair.mu0(t)
        return (-2 * float(cs.a(t)) * float(pair.w(t)) / float(m0p) * self.delta0(t)
                + 8 * self._quad(i1, t) + 2 * self._quad(i2, t))

    def kappa0(self, t: float) -> float:
        if self.forcing_free or abs(t) < T_MIN:
            return 0.0
        cs = self.cs
        pair = self.pair

        def i1(s):
            m0, m0p = pair.mu0(s)
            return cs.a(s) * _sigma(cs, s) / m0p**2 * (m0 * self.delta0(s)) ** 2

        def i2(s):
            m0, m0p = pair.mu0(s)
            return cs.a(s) / m0p * m0 * self.delta0(s) * self._F(s)

        m0, m0p = pair.mu0(t)
        return (float(cs.a(t)) * float(m0) / float(m0p) * self.delta0(t) ** 2
                - 4 * self._quad(i1, t) - 2 * self._quad(i2, t))

    def kernels(self, t):
        tt = np.atleast_1d(np.asarray(t, dtype=float))
        if self.forcing_free:
            z = np.zeros_like(tt)
            out = (z, z.copy(), z.copy())
        else:
            out = tuple(np.array([fn(float(v)) for v in tt])
                        for fn in (self.delta0, self.epsilon0, self.kappa0))
        return out if np.ndim(t) else tuple(o[0] for o in out)

    # evaluation -----------------------------------------------------------
    def __call__(self, init, t, l0: Optional[int] = None) -> RiccatiState:
        init = _as_init(init)
        cs = self.cs
        l0 = cs.l0 if l0 is None else l0
        al0, be0, ga0, de0, ep0, ka0, mu_0 = init.as_tuple()
        tt = np.atleast_1d(np.asarray(t, dtype=float))
        m0, p0, m1, p1, logw = self.pair.raw(tt)
        w = np.exp(logw)
        k = al0 + float(cs.d(0.0)) / (2 * float(cs.a(0.0)))
        mu = mu_0 * (m1 + 2 * k * m0)
        P = mu_0 * (p1 + 2 * k * p0)
        # alpha(0) + gamma0(t) = mu / (2 mu(0) mu0)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            S = mu / (2 * mu_0 * m0)
        near = (m0 != 0.0) & (np.abs(S) < MU_FLOOR)
        near |= mu == 0.0
        if near.any():
            raise BlowupEncountered(
                f"alpha(0) + gamma0(t) vanishes at t = {tt[near][0]:.15g}"
            )
        d0k, e0k, k0k = self.kernels(tt)
        alpha = P / mu
        beta = be0 * mu_0 * w / mu
        gamma = ga0 - l0 * be0**2 * mu_0 * m0 / (2 * mu)
        delta = d0k + w * mu_0 * (de0 + e0k) / mu
        epsilon = ep0 - be0 * mu_0 * m0 * (de0 + e0k) / mu
        kappa = ka0 + k0k - mu_0 * m0 * (de0 + e0k) ** 2 / (2 * mu)
        arr = np.stack([alpha, beta, gamma, delta, epsilon, kappa, mu])
        at0 = tt == 0.0
        if at0.any():
            arr[:, at0] = np.array(init.as_tuple())[:, None]
        return RiccatiState.from_array(t, _squeeze(t, arr))


class ClosedFormTrajectory:
    """:class:`ClosedForm` bound to one initial record; same interface as
    :class:`RiccatiTrajectory` (``values``, ``state``, ``derivatives``)."""

    def __init__(self, cs, init, span=None, l0=None, tol=1e-12):
        self.cs = cs
        self.init = _as_init(init)
        self.l0 = cs.l0 if l0 is None else l0
        span = cs.domain if span is None else span
        self.span = (min(0.0, float(span[0])), max(0.0, float(span[1])))
        self.cf = ClosedForm(cs, span=self.span, tol=tol)

    def values(self, t) -> np.ndarray:
        return self.cf(self.init, t, l0=self.l0).as_array()

    def state(self, t) -> RiccatiState:
        return self.cf(self.init, t, l0=self.l0)

    def derivatives(self, t) -> np.ndarray:
        return riccati_rhs(self.cs, np.asarray(t, dtype=float), self.values(t), l0=self.l0)

    __call__ = state


def closed_form(cs: CoefficientSet, init, t, pair: Optional[FundamentalPair] = None,
                l0: Optional[int] = None) -> RiccatiState:
    """Closed-form Riccati state at time(s) t (see :class:`ClosedForm`)."""
    tt = np.asarray(t, dtype=float)
    if pair is None:
        lo = min(0.0, float(tt.min()))
        hi = max(0.0, float(tt.max()), cs.domain[1])
        pair = fundamental_solutions(cs, (lo, hi))
    return ClosedForm(cs, pair)(init, t, l0=l0)


def closed_form_appendix(cf: ClosedForm, init, t, l0: Optional[int] = None) -> RiccatiState:
    """Literal kernel formulas alpha0 .. gamma0 with 1/(alpha(0)+gamma0).

    Singular where mu0 = 0; only for t > T_MIN away from such points.  Used to
    cross-check the regularised algebra of :class:`ClosedForm`.
    """
    init = _as_init(init)
    cs = cf.cs
    l0 = cs.l0 if l0 is None else l0
    al0, be0, ga0, de0, ep0, ka0, mu_0 = init.as_tuple()
    tt = np.asarray(t, dtype=float)
    m0, m0p = cf.pair.mu0(tt)
    m1, _ = cf.pair.mu1(tt)
    w = cf.pair.w(tt)
    a, d = cs.a(tt), cs.d(tt)
    a0, d0 = float(cs.a(0.0)), float(cs.d(0.0))
    A0 = m0p / (4 * a * m0) - d / (2 * a)
    B0 = -w / m0
    G0 = m1 / (2 * 1.0 * m0) + d0 / (2 * a0)
    D0, E0, K0 = cf.kernels(tt)
    S = al0 + G0
    return RiccatiState(
        t=t,
        alpha=A0 - B0**2 / (4 * S),
        beta=-be0 * B0 / (2 * S),
        gamma=ga0 - l0 * be0**2 / (4 * S),
        delta=D0 - B0 * (de0 + E0) / (2 * S),
        epsilon=ep0 - be0 * (de0 + E0) / (2 * S),
        kappa=ka0 + K0 - (de0 + E0) ** 2 / (4 * S),
        mu=2 * mu_0 * m0 * S,
    )


# --------------------------------------------------------------------------
# direct integration


def riccati_rhs(cs: CoefficientSet, t, y, l0: Optional[int] = None,
                modified: bool = False):
    """Right-hand side of the Riccati system including mu' = (4 a alpha + 2 d) mu."""
    l0 = cs.l0 if l0 is None else l0
    al, be, ga, de, ep, ka, mu = y
    a, b, c, d, f, g = cs.a(t), cs.b(t), cs.c(t), cs.d(t), cs.f(t), cs.g(t)
    damp = c + 4 * a * al
    dk = g * de - a * de * de
    if modified:
        dk = dk - 2 * cs.h(t) / np.abs(mu) ** cs.s
    return np.array([
        -(b + 2 * c * al + 4 * a * al * al),
        -damp * be,
        -a * be * be * l0,
        -damp * de + f + 2 * al * g,
        (g - 2 * a * de) * be,
        dk,
        (4 * a * al + 2 * d) * mu,
    ], dtype=float)


class RiccatiTrajectory:
    """Dense-output solution of the (modified) Riccati system on a span.

    Immutable after construction; evaluation is thread safe.
    """

    def __init__(self, cs: CoefficientSet, init, span, rtol=DEFAULT_RTOL,
                 atol=DEFAULT_ATOL, modified=False, l0=None):
        self.cs = cs
        self.init = _as_init(init)
        self.modified = modified
        self.l0 = 1 if modified else (cs.l0 if l0 is None else l0)
        self._y0 = np.array(self.init.as_tuple())
        lo, hi = min(0.0, float(span[0])), max(0.0, float(span[1]))
        self.span = (lo, hi)
        self._branches = []
        mu_floor = MU_FLOOR * abs(self.init.mu0)

        def ev_alpha(t, y):
            return ALPHA_BLOWUP - abs(y[0])

        def ev_mu(t, y):
            return abs(y[6]) - mu_floor

        ev_alpha.terminal = ev_mu.terminal = True
        fun = lambda t, y: riccati_rhs(cs, t, y, l0=self.l0, modified=modified)  # noqa: E731
        for end in (hi, lo):
            if end == 0.0:
                continue
            sol = solve_ivp(fun, (0.0, end), self._y0, method="DOP853", rtol=rtol,
                            atol=atol, dense_output=True, events=(ev_alpha, ev_mu))
            reached = sol.t[-1]
            if sol.status == 1 or (sol.status == -1 and abs(sol.y[0, -1]) > 1e6):
                raise BlowupEncountered(
                    f"Riccati trajectory blows up near t = {reached:.12g} "
                    f"(|alpha| = {abs(sol.y[0, -1]):.3g}, mu = {sol.y[6, -1]:.3g})"
                )
            if sol.status != 0:
                raise IntegrationError(f"Riccati integration failed: {sol.message}")
            self._branches.append((min(0.0, end), max(0.0, end), sol.sol))

    def values(self, t) -> np.ndarray:
        tt = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty((7,) + tt.shape)
        done = tt == 0.0
        out[:, done] = self._y0[:, None]
        for lo, hi, fn in self._branches:
            sel = (~done) & (tt >= lo - 1e-14) & (tt <= hi + 1e-14)
            if sel.any():
                out[:, sel] = fn(tt[sel])
                done = done | sel
        if not done.all():
            raise ValidationError(f"t outside the integrated span {self.span}")
        return out if np.ndim(t) else out[:, 0]

    def state(self, t) -> RiccatiState:
        return RiccatiState.from_array(t, self.values(t))

    def derivatives(self, t) -> np.ndarray:
        """Exact time derivatives (from the right-hand side) at t."""
        y = self.values(t)
        return riccati_rhs(self.cs, np.asarray(t, dtype=float), y, l0=self.l0,
                           modified=self.modified)

    __call__ = state


def _span_for(t, cs):
    tt = np.asarray(t, dtype=float)
    return (min(0.0, float(tt.min())), max(0.0, float(tt.max())))


def ode_trajectory(cs, init, span=None, tol=DEFAULT_RTOL, l0=None) -> RiccatiTrajectory:
    span = cs.domain if span is None else span
    return RiccatiTrajectory(cs, init, span, rtol=tol, atol=tol, l0=l0)


def ode_oracle(cs: CoefficientSet, init, t, tol: float = ORACLE_TOL,
               l0: Optional[int] = None) -> RiccatiState:
    """Riccati state from direct integration (local error controlled by tol)."""
    return RiccatiTrajectory(cs, init, _span_for(t, cs), rtol=tol, atol=tol,
                             l0=l0).state(t)


def modified_trajectory(cs, init, span=None, tol=DEFAULT_RTOL) -> RiccatiTrajectory:
    span = cs.domain if span is None else span
    return RiccatiTrajectory(cs, init, span, rtol=tol, atol=tol, modified=True)


def modified_ode(cs: CoefficientSet, init, t, tol: float = ORACLE_TOL) -> RiccatiState:
    """Blow-up Riccati system: gamma' = -a beta^2, kappa' gains -2h/|mu|^s."""
    return RiccatiTrajectory(cs, init, _span_for(t, cs), rtol=tol, atol=tol,
                             modified=True).state(t)


# --------------------------------------------------------------------------
# n dimensions


@dataclass(frozen=True)
class NDRiccatiInit:
    alpha0: float
    beta0: float
    gamma0: float
    delta0: tuple
    epsilon0: tuple
    kappa0: tuple
    mu0: float

    def __post_init__(self):
        n = len(self.delta0)
        if n < 1 or len(self.epsilon0) != n or len(self.kappa0) != n:
            raise ValidationError("delta0, epsilon0, kappa0 need one entry per dimension")
        if self.beta0 == 0 or self.mu0 == 0:
            raise ValidationError("beta(0) and mu(0) must be nonzero")

    @property
    def n(self) -> int:
        return len(self.delta0)

    @classmethod
    def standard(cls, n: int) -> "NDRiccatiInit":
        return cls(0.0, 1.0, 0.0, (1.0,) * n, (0.0,) * n, (0.0,) * n, 1.0)

    def vector(self) -> np.ndarray:
        return np.concatenate([[self.alpha0, self.beta0, self.gamma0],
                               self.delta0, self.epsilon0, self.kappa0, [self.mu0]])


@dataclass(frozen=True)
class NDRiccatiState:
    t: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    delta: np.ndarray  # shape (n, ...)
    epsilon: np.ndarray
    kappa: np.ndarray
    mu: np.ndarray


def _nd_rhs(cs, n, t, y):
    al, be, ga = y[0], y[1], y[2]
    de, ep = y[3:3 + n], y[3 + n:3 + 2 * n]
    mu = y[-1]
    a, b = cs.a(t), cs.b(t)
    return np.concatenate([
        [-(b + 4 * a * al * al), -4 * a * al * be, -a * be * be],
        -4 * a * al * de,
        -2 * a * be * de,
        -a * de * de,
        [4 * n * a * al * mu],
    ])


class NDRiccatiTrajectory:
    def __init__(self, cs, n, init: NDRiccatiInit, span, rtol=DEFAULT_RTOL,
                 atol=DEFAULT_ATOL):
        if init.n != n:
            raise ValidationError(f"initial record has dimension {init.n}, expected {n}")
        self.cs, self.n, self.init = cs, n, init
        self._y0 = init.vector()
        lo, hi = min(0.0, float(span[0])), max(0.0, float(span[1]))
        self.span = (lo, hi)
        self._branches = []

        def ev_alpha(t, y):
            return ALPHA_BLOWUP - abs(y[0])

        ev_alpha.terminal = True
        for end in (hi, lo):
            if end == 0.0:
                continue
            sol = solve_ivp(lambda t, y: _nd_rhs(cs, n, t, y), (0.0, end), self._y0,
                            method="DOP853", rtol=rtol, atol=atol, dense_output=True,
                            events=ev_alpha)
            if sol.status == 1:
                raise BlowupEncountered(f"n-D Riccati blows up near t = {sol.t[-1]:.12g}")
            if sol.status != 0:
                raise IntegrationError(f"n-D Riccati integration failed: {sol.message}")
            self._branches.append((min(0.0, end), max(0.0, end), sol.sol))

    def values(self, t) -> np.ndarray:
        tt = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty((self._y0.size,) + tt.shape)
        done = tt == 0.0
        out[:, done] = self._y0[:, None]
        for lo, hi, fn in self._branches:
            sel = (~done) & (tt >= lo - 1e-14) & (tt <= hi + 1e-14)
            if sel.any():
                out[:, sel] = fn(tt[sel])
                done = done | sel
        if not done.all():
            raise ValidationError(f"t outside the integrated span {self.span}")
        return out if np.ndim(t) else out[:, 0]

    def state(self, t) -> NDRiccatiState:
        y = self.values(t)
        n = self.n
        return NDRiccatiState(t, y[0], y[1], y[2], y[3:3 + n], y[3 + n:3 + 2 * n],
                              y[3 + 2 * n:3 + 3 * n], y[-1])

    __call__ = state


def nd_trajectory(cs, n, init=None, span=None, tol=DEFAULT_RTOL) -> NDRiccatiTrajectory:
    init = NDRiccatiInit.standard(n) if init is None else init
    span = cs.domain if span is None else span
    return NDRiccatiTrajectory(cs, n, init, span, rtol=tol, atol=tol)


def nd_characteristic_residual(cs, n, mu_fn, t, step=1e-3):
    """mu'' - (a'/a) mu' + 4 n a b mu + ((1-n)/n) mu'^2 / mu via 6th-order differences."""
    f = [mu_fn(t + k * step) for k in (-3, -2, -1, 0, 1, 2, 3)]
    m = f[3]
    m1 = (-f[0] + 9 * f[1] - 45 * f[2] + 45 * f[4] - 9 * f[5] + f[6]) / (60 * step)
    m2 = (2 * f[0] - 27 * f[1] + 270 * f[2] - 490 * m + 270 * f[4] - 27 * f[5]
          + 2 * f[6]) / (180 * step * step)
    a = cs.a(t)
    return m2 - cs.aprime(t) / a * m1 + 4 * n * a * cs.b(t) * m + (1 - n) / n * m1 * m1 / m


def nd_ode(cs: CoefficientSet, n: int, init: Optional[NDRiccatiInit], t,
           tol: float = DEFAULT_RTOL, check: bool = True) -> NDRiccatiState:
    """n-D Riccati state; optionally checks mu against the nonlinear characteristic eq."""
    if n < 1:
        raise ValidationError("dimension must be >= 1")
    tt = np.asarray(t, dtype=float)
    step = 1e-3
    span = (min(0.0, float(tt.min())) - 4 * step, max(0.0, float(tt.max())) + 4 * step)
    traj = NDRiccatiTrajectory(cs, n, NDRiccatiInit.standard(n) if init is None else init,
                               span, rtol=tol, atol=tol)
    st = traj.state(t)
    if check:
        mu = lambda s: traj.values(s)[-1]  # noqa: E731
        r = nd_characteristic_residual(cs, n, mu, tt, step)
        m = np.abs(traj.values(tt)[-1])
        # dense-output noise amplified by the 1/step^2 stencil
        bound = 1e-5 * np.maximum(1.0, m) * (1 + abs(float(cs.a(0.0))) * n)
        if np.any(np.abs(r) > bound + 1e3 * tol / step**2):
            raise IntegrationError("n-D trajectory violates the nonlinear characteristic equation")
    return st


def nd_closed_form(cs: CoefficientSet, n: int, init: Optional[NDRiccatiInit], t,
                   cf: Optional[ClosedForm] = None) -> NDRiccatiState:
    """n-D state from the 1-D closed form (l0 = +1) applied per component.

    With c = d = f = g = 0 every component obeys the 1-D system with l0 = 1;
    the n-D mu is mu(0) (mu_1D / mu(0))^n.
    """
    init = NDRiccatiInit.standard(n) if init is None else init
    if init.n != n:
        raise ValidationError(f"initial record has dimension {init.n}, expected {n}")
    if cf is None:
        cf = ClosedForm(cs, span=(min(0.0, float(np.min(t))), max(0.0, float(np.max(t)))))
    cache = {}
    comps = []
    for i in range(n):
        key = (init.delta0[i], init.epsilon0[i], init.kappa0[i])
        if key not in cache:
            cache[key] = cf(RiccatiInit(init.alpha0, init.beta0, init.gamma0, *key,
                                        init.mu0), t, l0=1)
        comps.append(cache[key])
    c0 = comps[0]
    mu = init.mu0 * (np.asarray(c0.mu) / init.mu0) ** n
    return NDRiccatiState(
        t, c0.alpha, c0.beta, c0.gamma,
        np.stack([c.delta for c in comps]), np.stack([c.epsilon for c in comps]),
        np.stack([c.kappa for c in comps]), mu,
    )


class NDClosedFormTrajectory:
    """n-D closed form bound to one initial record; ``state(t)`` like
    :class:`NDRiccatiTrajectory`."""

    def __init__(self, cs, n, init=None, span=None, tol=1e-12):
        self.cs, self.n = cs, n
        self.init = NDRiccatiInit.standard(n) if init is None else init
        span = cs.domain if span is None else span
        self.span = (min(0.0, float(span[0])), max(0.0, float(span[1])))
        self.cf = ClosedForm(cs, span=self.span, tol=tol)

    def state(self, t) -> NDRiccatiState:
        return nd_closed_form(self.cs, self.n, self.init, t, cf=self.cf)

    __call__ = state


# --------------------------------------------------------------------------
# blow-up


@dataclass(frozen=True)
class BlowupReport:
    t_blowup: Optional[float]
    bracket: tuple
    mu_at_bracket: tuple

    def as_dict(self) -> dict:
        return {"t_blowup": self.t_blowup, "bracket": list(self.bracket),
                "mu_at_bracket": list(self.mu_at_bracket)}


def blowup_time(cs: CoefficientSet, init, search=(0.0, 3.0), samples: int = 4001,
                xtol: float = 1e-12) -> BlowupReport:
    """Smallest t in ``search`` with mu(t) = 0 (sign bracketing + Brent bisection).

    mu is taken from the fundamental pair, which stays regular through the
    zero (the Riccati variables themselves diverge there).
    """
    init = _as_init(init)
    lo, hi = float(search[0]), float(search[1])
    pair = fundamental_solutions(cs, (min(0.0, lo), max(0.0, hi)), check_points=0)
    k = init.alpha0 + float(cs.d(0.0)) / (2 * float(cs.a(0.0)))

    def mu(t):
        m0, _, m1, _, _ = pair.raw(t)
        return init.mu0 * (m1 + 2 * k * m0)

    ts = np.linspace(lo, hi, samples)
    ms = mu(ts)
    tiny = 1e-12 * abs(init.mu0)
    hit = np.nonzero(np.abs(ms) < tiny)[0]
    flip = np.nonzero(np.sign(ms[1:]) != np.sign(ms[:-1]))[0]
    first_hit = hit[0] if hit.size else samples
    first_flip = flip[0] if flip.size else samples
    if first_hit == samples and first_flip == samples:
        return BlowupReport(None, (lo, hi), (float(ms[0]), float(ms[-1])))
    if first_hit <= first_flip:
        j = first_hit
        tb = float(ts[j])
        return BlowupReport(tb, (float(ts[max(j - 1, 0)]), float(ts[min(j + 1, samples - 1)])),
                            (float(ms[max(j - 1, 0)]), float(ms[min(j + 1, samples - 1)])))
    j = first_flip
    t_lo, t_hi = float(ts[j]), float(ts[j + 1])
    tb = brentq(lambda s: float(mu(s)), t_lo, t_hi, xtol=xtol, rtol=4 * np.finfo(float).eps)
    return BlowupReport(tb, (t_lo, t_hi), (float(ms[j]), float(ms[j + 1])))


# --------------------------------------------------------------------------
# CSV


def states_to_csv(states: Sequence[RiccatiState] | RiccatiState, fh=None, src=None) -> str:
    """Write t, alpha .. mu (and an optional src column) rows; returns the text."""
    if isinstance(states, RiccatiState):
        states = [states]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["t", *NAMES] + (["src"] if src is not None else [])
    writer.writerow(header)
    for st in states:
        t = np.atleast_1d(st.t)
        arr = np.atleast_2d(st.as_array().reshape(7, -1))
        for j in range(t.size):
            row = [repr(float(t[j]))] + [repr(float(v)) for v in arr[:, j]]
            if src is not None:
                row.append(src)
            writer.writerow(row)
    text = buf.getvalue()
    if fh is not None:
        fh.write(text)
    return text

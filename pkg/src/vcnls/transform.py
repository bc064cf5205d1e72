"""Similarity lift of constant-coefficient seeds to VCNLS solutions.

1-D:   psi(x, t) = mu^{-1/2} exp(i(alpha x^2 + delta x + kappa)) chi(beta x + epsilon, gamma)
n-D:   psi(x, t) = mu^{-1/2} exp(i sum_i(alpha x_i^2 + delta_i x_i + kappa_i)) u(xi, tau)
       with u(xi, tau) = chi(sum_i xi_i, -n tau)
blow-up: pure-phase Gaussian ansatz driven by the modified Riccati system.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import riccati as ric
from .coefficients import CoefficientSet
from .errors import BlowupEncountered, IntegrabilityViolation, ValidationError
from .manakov import SeedPair

__all__ = [
    "LiftedSolution",
    "NDLiftedSolution",
    "BlowupParams",
    "FieldPair",
    "lift",
    "lift_nd",
    "blowup_solution",
    "check_integrability",
    "sample_field",
]

INTEGRABILITY_TOL = 1e-9
MANAKOV_CONVENTION = (-1, -2.0)  # (l0, lambda) turning the transformed system into Manakov form


def _time_pad(cs):
    t0, t1 = cs.domain
    return 0.1 * (t1 - t0)


def _default_span(cs, riccati_source):
    # The linear fundamental pair is regular past the domain end; the nonlinear
    # Riccati flow may diverge just beyond it, so the ODE route stays inside.
    pad = _time_pad(cs)
    hi = cs.domain[1] + (pad if riccati_source == "closed" else min(pad, 5e-4))
    return (cs.domain[0] - pad, hi)


def check_integrability(cs: CoefficientSet, traj, points: int = 100, tol=INTEGRABILITY_TOL,
                        window=None):
    """max |h - lam a beta^2 mu^s| / (1 + |h|) over a grid; raises IntegrabilityViolation."""
    if cs.lam is None:
        raise IntegrabilityViolation(f"case {cs.case_id} declares no integrability condition")
    lo, hi = cs.domain if window is None else window
    t = np.linspace(lo, hi, points)
    st = traj.state(t)
    h = cs.h(t)
    target = cs.lam * cs.a(t) * st.beta**2 * np.abs(st.mu) ** cs.s
    err = float(np.max(np.abs(h - target) / (1 + np.abs(h))))
    if not err <= tol:
        raise IntegrabilityViolation(
            f"h violates h = lam a beta^2 mu^s by {err:.3e} (tol {tol:g}) for case {cs.case_id}"
        )
    return err


def _unique_eval(fn, t):
    """Evaluate fn on the distinct values of t and broadcast back."""
    tt = np.asarray(t, dtype=float)
    u, inv = np.unique(tt.ravel(), return_inverse=True)
    vals = fn(u)
    return vals[..., inv].reshape(vals.shape[:-1] + tt.shape)


@dataclass
class LiftedSolution:
    """Evaluable VCNLS solution; ``sampler(x, t) -> (psi, phi)`` (broadcasting)."""

    cs: CoefficientSet
    seed: Optional[SeedPair]
    init: ric.RiccatiInit
    riccati: object  # trajectory with values(t) -> (7, ...) array
    source: str = ""
    scale: float = 1.0
    kind: str = "lift"
    blowup_params: Optional["BlowupParams"] = None
    t_blowup: Optional[float] = None

    def riccati_values(self, t):
        tt = np.asarray(t, dtype=float)
        if self.t_blowup is not None and np.any(tt >= self.t_blowup):
            raise BlowupEncountered(f"sample time at or past blow-up T_b = {self.t_blowup:.12g}")
        return _unique_eval(self.riccati.values, tt)

    def sampler(self, x, t):
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        shape = np.broadcast_shapes(x.shape, t.shape)
        al, be, ga, de, ep, ka, mu = (np.broadcast_to(v, shape) for v in self.riccati_values(t))
        x = np.broadcast_to(x, shape)
        if np.any(mu <= 0):
            raise BlowupEncountered("mu(t) <= 0 on the sample set; no real amplitude branch")
        amp = self.scale / np.sqrt(mu)
        if self.kind == "blowup":
            y, z = self.blowup_params.y, self.blowup_params.z
            base = al * x * x + de * x + ka
            psi = amp * np.exp(1j * (base + be * x * y + ga * y * y + ep * y))
            phi = amp * np.exp(1j * (base + be * x * z + ga * z * z + ep * z))
            return psi, phi
        phase = np.exp(1j * (al * x * x + de * x + ka))
        chi, ph = self.seed(be * x + ep, ga)
        return amp * phase * chi, amp * phase * ph

    __call__ = sampler

    def scaled(self, factor: float) -> "LiftedSolution":
        """Copy with the amplitude multiplied by ``factor`` (negative controls)."""
        from dataclasses import replace

        return replace(self, scale=self.scale * factor)

    def with_coefficients(self, cs: CoefficientSet) -> "LiftedSolution":
        from dataclasses import replace

        return replace(self, cs=cs)

    @property
    def has_background(self) -> bool:
        return self.kind == "blowup" or (self.seed is not None and self.seed.has_background)


def _trajectory(cs, init, riccati_source, span, l0=None):
    if riccati_source == "closed":
        return ric.ClosedFormTrajectory(cs, init, span, l0=l0)
    if riccati_source == "ode":
        return ric.RiccatiTrajectory(cs, init, span, rtol=1e-12, atol=1e-12, l0=l0)
    raise ValidationError(f"riccati source must be 'closed' or 'ode', got {riccati_source!r}")


def lift(seed: SeedPair, cs: CoefficientSet, init=None, riccati_source: Optional[str] = None,
         span=None, check: bool = True) -> LiftedSolution:
    """Lift a Manakov seed through the similarity transformation.

    The seed solves the transformed system only in the (l0, lambda) = (-1, -2)
    convention with s = 1, so both are required.  The integrability
    condition and mu > 0 are checked on the declared domain when ``check``.
    """
    if (cs.l0, cs.lam) != MANAKOV_CONVENTION:
        raise IntegrabilityViolation(
            f"lift needs (l0, lambda) = {MANAKOV_CONVENTION}, case has ({cs.l0}, {cs.lam})"
        )
    if cs.s != 1:
        raise ValidationError("soliton/rogue-wave lifts are defined for s = 1 only")
    if cs.n != 1:
        raise ValidationError("use lift_nd for n-dimensional cases")
    init = ric._as_init(cs.standard_init if init is None else init)
    if riccati_source is None:
        riccati_source = "closed" if cs.forcing_free else "ode"
    if span is None:
        span = _default_span(cs, riccati_source)
    traj = _trajectory(cs, init, riccati_source, span)
    if check:
        check_integrability(cs, traj)
        mu = traj.values(np.linspace(cs.domain[0], cs.domain[1], 201))[6]
        if np.any(mu <= 0):
            raise BlowupEncountered(f"mu(t) <= 0 on the domain of case {cs.case_id}")
    return LiftedSolution(cs, seed, init, traj, source=seed.kind)


@dataclass(frozen=True)
class BlowupParams:
    y: float = 0.0
    z: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.y) and math.isfinite(self.z)):
            raise ValidationError("blow-up parameters y, z must be finite")


def blowup_solution(cs: CoefficientSet, init=None, p: BlowupParams = BlowupParams(),
                    t_end: Optional[float] = None) -> LiftedSolution:
    """Explicit solution mu^{-1/2} exp(i(alpha x^2 + beta x y + gamma y^2 + delta x + epsilon y + kappa)).

    Riccati functions come from the modified system on [0, t_end) where
    t_end defaults to min(domain end, T_b); sampling at or past T_b raises.
    """
    init = ric._as_init(cs.standard_init if init is None else init)
    report = ric.blowup_time(cs, init, (0.0, cs.domain[1]))
    tb = report.t_blowup
    hi = cs.domain[1] if t_end is None else float(t_end)
    if tb is not None:
        hi = min(hi, tb * (1 - 1e-9))
    # padded below 0 so residual stencils can reach t < 0 (mu grows backwards)
    lo = -_time_pad(cs)
    traj = ric.RiccatiTrajectory(cs, init, (lo, hi), rtol=1e-12, atol=1e-12, modified=True)
    return LiftedSolution(cs, None, init, traj, source="blowup", kind="blowup",
                          blowup_params=p, t_blowup=tb)


@dataclass
class NDLiftedSolution:
    """n-D lift; ``sampler(xs, t)`` with ``xs`` a sequence of n broadcastable arrays."""

    cs: CoefficientSet
    seed: SeedPair
    n: int
    init: ric.NDRiccatiInit
    riccati: object  # state(t) -> NDRiccatiState
    scale: float = 1.0

    def _values(self, tu):
        st = self.riccati.state(tu)
        n = self.n
        return np.concatenate([np.stack([st.alpha, st.beta, st.gamma]), st.delta,
                               st.epsilon, st.kappa, st.mu[None]])

    def sampler(self, xs, t):
        n = self.n
        if len(xs) != n:
            raise ValidationError(f"expected {n} coordinate arrays, got {len(xs)}")
        xs = [np.asarray(x, dtype=float) for x in xs]
        t = np.asarray(t, dtype=float)
        shape = np.broadcast_shapes(*(x.shape for x in xs), t.shape)
        # Riccati values only on t's own shape; the per-axis phase factors stay
        # low-rank until the final product
        v = _unique_eval(self._values, t)
        al, be, ga = v[0], v[1], v[2]
        de, ep, ka = v[3:3 + n], v[3 + n:3 + 2 * n], v[3 + 2 * n:3 + 3 * n]
        mu = v[-1]
        if np.any(mu <= 0):
            raise BlowupEncountered("mu(t) <= 0 on the sample set")
        amp = self.scale / np.sqrt(mu)
        xi_sum = 0.0
        for i, x in enumerate(xs):
            amp = amp * np.exp(1j * (al * x * x + de[i] * x + ka[i]))
            xi_sum = xi_sum + (be * x + ep[i])
        chi, ph = self.seed(np.broadcast_to(xi_sum, shape), -n * ga)
        amp = np.broadcast_to(amp, shape)
        return amp * chi, amp * ph

    __call__ = sampler

    def scaled(self, factor: float) -> "NDLiftedSolution":
        from dataclasses import replace

        return replace(self, scale=self.scale * factor)


def lift_nd(seed: SeedPair, cs: CoefficientSet, n: Optional[int] = None, init=None,
            riccati_source: str = "closed", check: bool = True) -> NDLiftedSolution:
    """n-D lift with the additive reduction u = chi(sum xi_i, -n tau).

    The reduction maps the seed's Manakov form onto the transformed n-D
    system only when lambda = -2n (with l0 = +1).
    """
    n = cs.n if n is None else n
    if cs.l0 != 1:
        raise IntegrabilityViolation("n-D lifts use l0 = +1")
    if cs.lam is None or not math.isclose(cs.lam, -2.0 * n):
        raise IntegrabilityViolation(
            f"the additive reduction needs lambda = -2n = {-2 * n}, case has {cs.lam}"
        )
    if cs.n != n and not (n == 1):
        raise ValidationError(f"case {cs.case_id} is {cs.n}-dimensional, asked for {n}")
    for name in ("c", "d", "f", "g"):
        if np.any(getattr(cs, name)(np.linspace(*cs.domain, 11)) != 0):
            raise ValidationError(f"n-D system requires {name} = 0")
    init = ric.NDRiccatiInit.standard(n) if init is None else init
    span = _default_span(cs, riccati_source)
    if riccati_source == "closed":
        traj = ric.NDClosedFormTrajectory(cs, n, init, span)
    elif riccati_source == "ode":
        traj = ric.NDRiccatiTrajectory(cs, n, init, span, rtol=1e-12, atol=1e-12)
    else:
        raise ValidationError(f"riccati source must be 'closed' or 'ode', got {riccati_source!r}")
    if check:
        t = np.linspace(cs.domain[0], cs.domain[1], 100)
        st = traj.state(t)
        if np.any(st.mu <= 0):
            raise BlowupEncountered("mu(t) <= 0 on the domain")
        h = cs.h(t)
        target = cs.lam * cs.a(t) * st.beta**2 * st.mu**cs.s
        err = float(np.max(np.abs(h - target) / (1 + np.abs(h))))
        if err > INTEGRABILITY_TOL:
            raise IntegrabilityViolation(f"h violates h = lam a beta^2 mu^s by {err:.3e}")
    return NDLiftedSolution(cs, seed, n, init, traj)


# --------------------------------------------------------------------------
# sampled output


@dataclass
class FieldPair:
    x: np.ndarray  # (nx,)
    t: np.ndarray  # (nt,)
    psi: np.ndarray  # (nt, nx) complex
    phi: np.ndarray
    header: dict = field(default_factory=dict)

    def to_csv(self, fh=None, plot: bool = False) -> str:
        """Long-format CSV. ``plot=True`` gives x, t, abs2_psi, abs2_phi, abs_diff."""
        buf = io.StringIO()
        buf.write("# " + json.dumps(self.header, sort_keys=True) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        if plot:
            w.writerow(["x", "t", "abs2_psi", "abs2_phi", "abs_diff"])
        else:
            w.writerow(["x", "t", "re_psi", "im_psi", "re_phi", "im_phi"])
        for j, tj in enumerate(self.t):
            for i, xi in enumerate(self.x):
                p, q = self.psi[j, i], self.phi[j, i]
                if plot:
                    row = (xi, tj, abs(p) ** 2, abs(q) ** 2, abs(p - q))
                else:
                    row = (xi, tj, p.real, p.imag, q.real, q.imag)
                w.writerow([repr(float(v)) for v in row])
        text = buf.getvalue()
        if fh is not None:
            fh.write(text)
        return text

    @classmethod
    def from_csv(cls, text: str) -> "FieldPair":
        lines = text.splitlines()
        header = json.loads(lines[0][2:]) if lines and lines[0].startswith("# ") else {}
        body = [ln for ln in lines if not ln.startswith("#")]
        rows = list(csv.reader(body[1:]))
        data = np.array(rows, dtype=float)
        x = np.unique(data[:, 0])
        t = np.unique(data[:, 1])
        psi = (data[:, 2] + 1j * data[:, 3]).reshape(t.size, x.size)
        phi = (data[:, 4] + 1j * data[:, 5]).reshape(t.size, x.size)
        return cls(x, t, psi, phi, header)


def sample_field(sol: LiftedSolution, x, t, header: Optional[dict] = None) -> FieldPair:
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    psi, phi = sol(x[None, :], t[:, None])
    return FieldPair(x, t, psi, phi, dict(header or {}))

"""Finite-difference residuals of candidate solutions, convergence studies
and blow-up scans.

Residuals use 4th-order central differences in space and time.  Fields are
always re-sampled from analytic samplers, including the two halo nodes on
each side of the reporting window, so no one-sided stencils are needed.
Work is split into fixed time slabs (independent of the thread count) and
reduced in slab order, so reports are bit-identical for any VCNLS_THREADS.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .coefficients import CoefficientSet
from .errors import GridTooCoarse, ValidationError

__all__ = [
    "Grid",
    "ResidualReport",
    "ConvergenceReport",
    "residual_vcnls",
    "residual_manakov",
    "residual_nd",
    "convergence_study",
    "blowup_scan",
    "BlowupScan",
    "ladder",
    "seed_window",
    "window_grids",
    "LADDER_SIZES",
    "thread_count",
    "d1_stencil",
    "d2_stencil",
    "MAX_TOL",
    "MIN_ORDER",
]

STENCIL_ORDER = 4
HALO = 2
MAX_TOL = 1e-5
MIN_ORDER = 3.3
PHASE_LIMIT = math.pi / 4
CHUNK_POINTS = 2_000_000  # sampled points per slab


def thread_count() -> int:
    env = os.environ.get("VCNLS_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValidationError(f"VCNLS_THREADS must be an integer, got {env!r}") from None
    return max(1, min(4, os.cpu_count() or 1))


@dataclass(frozen=True)
class Grid:
    """Uniform space-time grid; ``ndim`` spatial axes share the x bounds."""

    x_min: float
    x_max: float
    nx: int
    t_min: float
    t_max: float
    nt: int
    ndim: int = 1

    def __post_init__(self):
        if self.nx < 9 or self.nt < 9:
            raise ValidationError(f"grid needs nx, nt >= 9 (stencil width), got {self.nx}, {self.nt}")
        if not (self.x_max > self.x_min and self.t_max > self.t_min):
            raise ValidationError("grid bounds must be increasing")
        if self.ndim < 1:
            raise ValidationError("ndim must be >= 1")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.nx - 1)

    @property
    def dt(self) -> float:
        return (self.t_max - self.t_min) / (self.nt - 1)

    @property
    def volume(self) -> float:
        return (self.x_max - self.x_min) ** self.ndim * (self.t_max - self.t_min)

    def x(self, halo: int = 0) -> np.ndarray:
        k = np.arange(-halo, self.nx + halo)
        return self.x_min + k * self.dx

    def t(self, halo: int = 0) -> np.ndarray:
        k = np.arange(-halo, self.nt + halo)
        return self.t_min + k * self.dt

    def refined(self, nx: int, nt: Optional[int] = None) -> "Grid":
        return Grid(self.x_min, self.x_max, nx, self.t_min, self.t_max,
                    nx if nt is None else nt, self.ndim)

    def shifted(self, cells_x: int = 0, cells_t: int = 0) -> "Grid":
        return Grid(self.x_min + cells_x * self.dx, self.x_max + cells_x * self.dx, self.nx,
                    self.t_min + cells_t * self.dt, self.t_max + cells_t * self.dt,
                    self.nt, self.ndim)

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ResidualReport:
    max_residual_eq1: float
    max_residual_eq2: float
    l2_residual_eq1: float
    l2_residual_eq2: float
    grid: Grid
    stencil_order: int = STENCIL_ORDER
    system: str = "vcnls"

    @property
    def max_residual(self) -> float:
        return max(self.max_residual_eq1, self.max_residual_eq2)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["max_residual"] = self.max_residual
        return d

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True)


@dataclass(frozen=True)
class ConvergenceReport:
    grids: list
    residual_sequence: list
    observed_order: float
    saturated: bool = False
    stencil_order: int = STENCIL_ORDER
    reports: list = field(default_factory=list, compare=False)

    @property
    def final_residual(self) -> float:
        return self.residual_sequence[-1]

    def passed(self, max_tol: float = MAX_TOL, min_order: float = MIN_ORDER) -> bool:
        return ladder(self, max_tol, min_order)

    def as_dict(self) -> dict:
        return {
            "grids": [g.as_dict() for g in self.grids],
            "residual_sequence": list(self.residual_sequence),
            "observed_order": None if math.isnan(self.observed_order) else self.observed_order,
            "saturated": self.saturated,
            "stencil_order": self.stencil_order,
            "reports": [r.as_dict() for r in self.reports],
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True)


def ladder(conv: ConvergenceReport, max_tol: float = MAX_TOL, min_order: float = MIN_ORDER) -> bool:
    """Pass iff the finest residual is below max_tol and the order is at least min_order.

    A saturated study (residual at round-off on every grid) passes on the
    residual criterion alone.
    """
    if conv.saturated:
        return conv.final_residual < max_tol
    return conv.final_residual < max_tol and conv.observed_order >= min_order


LADDER_SIZES = (65, 129, 257)


def seed_window(seed) -> tuple:
    """(x_lo, x_hi, tau_lo, tau_hi) around the core of a Manakov seed.

    Rogue-wave cores scale like 1/|A| in xi and 1/A^2 in tau.  Type I gets
    an extra min(1, 1/|A|) shrink; for type II that shrink only pushes the
    residual onto its round-off floor, so it is left out.
    """
    kind, p = seed.kind, seed.params
    if kind in ("rw1", "rw2"):
        amp = p["d2"] + 3 * p["q"]
        shrink = min(1.0, 1.0 / abs(amp))
        if kind == "rw1":
            centre, half, span = -1 / (math.sqrt(3.0) * amp), 0.2, 0.05
        else:
            centre, half, span = -0.1817 / amp, 0.06, 0.02
            shrink = 1.0
        half, span = half * shrink / abs(amp), span * shrink / amp**2
    elif kind == "db":
        C = p["C"]
        shift = 0.5 * math.log((p["a3"] ** 2 + p["b3"] ** 2) / (2 * C * C))
        shrink = min(1.0, 1.0 / abs(C))
        centre, half, span = -shift / C, 3 * shrink / abs(C), 0.25 * shrink / C**2
    elif kind == "plane":
        centre, half, span = 0.0, 1.0, 0.1
    else:
        raise ValidationError(f"no default window for seed kind {kind!r}")
    return (centre - half, centre + half, -span, span)


def window_grids(window, sizes=LADDER_SIZES, ndim: int = 1, nt=None) -> list:
    """Grids over ``window`` = (x_lo, x_hi, t_lo, t_hi); nt defaults to nx
    in 1-D and (nx + 1) // 2 otherwise."""
    x_lo, x_hi, t_lo, t_hi = (float(v) for v in window)
    out = []
    for k, n in enumerate(sizes):
        m = nt[k] if nt is not None else (n if ndim == 1 else (n + 1) // 2)
        out.append(Grid(x_lo, x_hi, int(n), t_lo, t_hi, int(m), ndim))
    return out


# --------------------------------------------------------------------------
# stencils


def _shift(f, axis, lo, hi):
    """View of f with `lo` nodes dropped at the start and `hi` at the end of `axis`."""
    idx = [slice(None)] * f.ndim
    idx[axis] = slice(lo, f.shape[axis] - hi)
    return f[tuple(idx)]


def d1_stencil(f, h, axis):
    """4th-order first derivative at interior points (2 halo nodes dropped per side)."""
    s = lambda a, b: _shift(f, axis, a, b)  # noqa: E731
    return (-s(4, 0) + 8 * s(3, 1) - 8 * s(1, 3) + s(0, 4)) / (12 * h)


def d2_stencil(f, h, axis):
    """4th-order second derivative at interior points."""
    s = lambda a, b: _shift(f, axis, a, b)  # noqa: E731
    return (-s(4, 0) + 16 * s(3, 1) - 30 * s(2, 2) + 16 * s(1, 3) - s(0, 4)) / (12 * h * h)


def _inner(f, axes):
    idx = [slice(None)] * f.ndim
    for ax in axes:
        idx[ax] = slice(HALO, f.shape[ax] - HALO)
    return f[tuple(idx)]


def _check_resolution(fields, axes):
    """Raise GridTooCoarse if the phase jumps by more than pi/4 between neighbours
    where the modulus exceeds 10% of its maximum."""
    limit = math.cos(PHASE_LIMIT)
    for f in fields:
        mag = np.abs(f)
        top = mag.max()
        if top == 0:
            continue
        big = mag > 0.1 * top
        for ax in axes:
            a, b = _shift(f, ax, 0, 1), _shift(f, ax, 1, 0)
            both = _shift(big, ax, 0, 1) & _shift(big, ax, 1, 0)
            # |arg(b conj a)| > limit  <=>  Re(b conj a) < |a||b| cos(limit)
            dot = b.real * a.real + b.imag * a.imag
            bad = both & (dot < limit * _shift(mag, ax, 0, 1) * _shift(mag, ax, 1, 0))
            if bad.any():
                worst = float(np.abs(np.angle(b[both] * np.conj(a[both]))).max())
                raise GridTooCoarse(
                    f"phase changes by {worst:.3f} rad per cell along axis {ax} "
                    f"(limit pi/4); refine the grid or shrink the window"
                )


def _slabs(grid: Grid):
    per_level = (grid.nx + 2 * HALO) ** grid.ndim
    m = max(1, min(grid.nt, CHUNK_POINTS // per_level - 2 * HALO))
    return [(j, min(j + m, grid.nt)) for j in range(0, grid.nt, m)]


def _reduce(parts, grid: Grid, system: str) -> ResidualReport:
    n_nodes = grid.nx**grid.ndim * grid.nt
    mx1 = max(p[0] for p in parts)
    mx2 = max(p[1] for p in parts)
    ss1 = math.fsum(p[2] for p in parts)
    ss2 = math.fsum(p[3] for p in parts)
    l2 = lambda ss: math.sqrt(ss / n_nodes * grid.volume)  # noqa: E731
    return ResidualReport(float(mx1), float(mx2), l2(ss1), l2(ss2), grid, STENCIL_ORDER, system)


def _partial(r1, r2):
    a1 = np.abs(r1)
    a2 = np.abs(r2)
    return (float(a1.max()), float(a2.max()),
            math.fsum((a1 * a1).ravel()), math.fsum((a2 * a2).ravel()))


def _run(grid: Grid, slab_fn, system: str, threads: Optional[int]) -> ResidualReport:
    slabs = _slabs(grid)
    nthreads = thread_count() if threads is None else max(1, int(threads))
    if nthreads == 1 or len(slabs) == 1:
        parts = [slab_fn(a, b) for a, b in slabs]
    else:
        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            parts = list(pool.map(lambda ab: slab_fn(*ab), slabs))
    return _reduce(parts, grid, system)


def _check_decay(fields, axes, required: bool):
    if not required:
        return
    for f in fields:
        mag = np.abs(f)
        top = mag.max()
        if top == 0:
            continue
        for ax in axes:
            n = mag.shape[ax]
            edge = max(np.take(mag, [HALO, n - 1 - HALO], axis=ax).max(), 0.0)
            if edge >= 1e-8 * top:
                raise ValidationError(
                    f"window too narrow: boundary modulus {edge:.2e} is not below "
                    f"1e-8 of the interior maximum {top:.2e}"
                )


def _sampler_of(sol):
    return sol.sampler if hasattr(sol, "sampler") else sol


def _needs_decay(sol, require_decay):
    if require_decay is not None:
        return require_decay
    bg = getattr(sol, "has_background", None)
    return False if bg is None else not bg


# --------------------------------------------------------------------------
# residual operators


def residual_vcnls(cs: CoefficientSet, sol, grid: Grid, threads: Optional[int] = None,
                   check_resolution: bool = True,
                   require_decay: Optional[bool] = None) -> ResidualReport:
    """Residual i psi_t - RHS of both VCNLS equations at the grid nodes."""
    if grid.ndim != 1:
        raise ValidationError("residual_vcnls works on 1-D grids")
    sample = _sampler_of(sol)
    decay = _needs_decay(sol, require_decay)
    x = grid.x(HALO)
    t_all = grid.t(HALO)
    xi = x[HALO:-HALO][None, :]
    s = cs.s

    def slab(j0, j1):
        t = t_all[j0:j1 + 2 * HALO]
        psi, phi = sample(x[None, :], t[:, None])
        psi = np.asarray(psi, dtype=complex)
        phi = np.asarray(phi, dtype=complex)
        if check_resolution:
            _check_resolution((psi, phi), (0, 1))
        _check_decay((psi, phi), (1,), decay)
        tc = t[HALO:-HALO][:, None]
        a, b, c, d = cs.a(tc), cs.b(tc), cs.c(tc), cs.d(tc)
        f, g, h = cs.f(tc), cs.g(tc), cs.h(tc)
        out = []
        p_in, q_in = _inner(psi, (0, 1)), _inner(phi, (0, 1))
        nl = h * (np.abs(q_in) ** (2 * s) + np.abs(p_in) ** (2 * s))
        for u, u_in in ((psi, p_in), (phi, q_in)):
            ut = d1_stencil(u, grid.dt, 0)[:, HALO:-HALO]
            ux = d1_stencil(u, grid.dx, 1)[HALO:-HALO]
            uxx = d2_stencil(u, grid.dx, 1)[HALO:-HALO]
            rhs = (-a * uxx + (b * xi * xi - 1j * d - xi * f) * u_in
                   + 1j * (g - c * xi) * ux + nl * u_in)
            out.append(1j * ut - rhs)
        return _partial(*out)

    return _run(grid, slab, "vcnls", threads)


def residual_manakov(seed, grid: Grid, l0: int = -1, lam: float = -2.0, s: float = 1.0,
                     threads: Optional[int] = None, check_resolution: bool = True) -> ResidualReport:
    """Residual of i chi_tau - l0 chi_xixi + l0 lam (|phi|^2s + |chi|^2s) chi (x = xi, t = tau)."""
    if grid.ndim != 1:
        raise ValidationError("residual_manakov works on 1-D grids")
    sample = seed.evaluate if hasattr(seed, "evaluate") else seed
    x = grid.x(HALO)
    t_all = grid.t(HALO)

    def slab(j0, j1):
        t = t_all[j0:j1 + 2 * HALO]
        chi, phi = sample(x[None, :], t[:, None])
        chi = np.asarray(chi, dtype=complex) + 0 * t[:, None]
        phi = np.asarray(phi, dtype=complex) + 0 * t[:, None]
        if check_resolution:
            _check_resolution((chi, phi), (0, 1))
        c_in, p_in = _inner(chi, (0, 1)), _inner(phi, (0, 1))
        nl = l0 * lam * (np.abs(p_in) ** (2 * s) + np.abs(c_in) ** (2 * s))
        out = []
        for u, u_in in ((chi, c_in), (phi, p_in)):
            ut = d1_stencil(u, grid.dt, 0)[:, HALO:-HALO]
            uxx = d2_stencil(u, grid.dx, 1)[HALO:-HALO]
            out.append(1j * ut - l0 * uxx + nl * u_in)
        return _partial(*out)

    return _run(grid, slab, "manakov", threads)


def residual_nd(cs: CoefficientSet, sol, grid: Grid, threads: Optional[int] = None,
                check_resolution: bool = True) -> ResidualReport:
    """Residual i psi_t + a Lap psi - b |x|^2 psi - h (|phi|^2s + |psi|^2s) psi on an n-D grid."""
    n = grid.ndim
    sample = _sampler_of(sol)
    x = grid.x(HALO)
    t_all = grid.t(HALO)
    s = cs.s
    dx2 = grid.dx

    def axis_coords(k, m):
        shape = [1] * (n + 1)
        shape[k + 1] = m
        return shape

    def slab(j0, j1):
        t = t_all[j0:j1 + 2 * HALO]
        xs = [x.reshape(axis_coords(k, x.size)) for k in range(n)]
        psi, phi = sample(xs, t.reshape([-1] + [1] * n))
        psi = np.asarray(psi, dtype=complex)
        phi = np.asarray(phi, dtype=complex)
        if check_resolution:
            _check_resolution((psi, phi), tuple(range(n + 1)))
        all_axes = tuple(range(n + 1))
        xin = x[HALO:-HALO]
        r2 = sum(xin.reshape(axis_coords(k, xin.size)) ** 2 for k in range(n))
        tc = t[HALO:-HALO].reshape([-1] + [1] * n)
        a, b, h = cs.a(tc), cs.b(tc), cs.h(tc)
        p_in, q_in = _inner(psi, all_axes), _inner(phi, all_axes)
        nl = h * (np.abs(q_in) ** (2 * s) + np.abs(p_in) ** (2 * s))
        out = []
        for u, u_in in ((psi, p_in), (phi, q_in)):
            # trim the other axes first so each stencil only touches the reported nodes
            ut = d1_stencil(_inner(u, tuple(range(1, n + 1))), grid.dt, 0)
            lap = 0
            for k in range(1, n + 1):
                others = tuple(ax for ax in all_axes if ax != k)
                lap = lap + d2_stencil(_inner(u, others), dx2, k)
            out.append(1j * ut + a * lap - b * r2 * u_in - nl * u_in)
        return _partial(*out)

    return _run(grid, slab, f"nd{n}", threads)


# --------------------------------------------------------------------------
# convergence


def convergence_study(residual_op: Callable[[Grid], ResidualReport],
                      refinements: Sequence[Grid], metric: str = "max",
                      floor: float = 1e-13) -> ConvergenceReport:
    """Least-squares slope of log(residual) against log(dx) over >= 3 grids.

    The residual sequence uses the per-grid max over both equations
    (``metric="l2"`` for the L2 norm).  If every residual is below ``floor``
    the study is saturated and the order is reported as NaN.
    """
    grids = list(refinements)
    if len(grids) < 3:
        raise ValidationError("convergence_study needs at least 3 grids")
    reports = [residual_op(g) for g in grids]
    if metric == "max":
        seq = [r.max_residual for r in reports]
    elif metric == "l2":
        seq = [max(r.l2_residual_eq1, r.l2_residual_eq2) for r in reports]
    else:
        raise ValidationError(f"unknown metric {metric!r}")
    if all(v < floor for v in seq):
        return ConvergenceReport(grids, seq, float("nan"), True, STENCIL_ORDER, reports)
    hs = np.log([g.dx for g in grids])
    rs = np.log(np.maximum(seq, np.finfo(float).tiny))
    slope = float(np.polyfit(hs, rs, 1)[0])
    return ConvergenceReport(grids, seq, slope, False, STENCIL_ORDER, reports)


# --------------------------------------------------------------------------
# blow-up scan


@dataclass(frozen=True)
class BlowupScan:
    t: np.ndarray
    sup_norm: np.ndarray
    mu: np.ndarray
    invariant_spread: float  # max relative deviation of sup_norm * sqrt|mu|

    @property
    def constant(self) -> bool:
        return self.invariant_spread <= 1e-8

    def to_csv(self, fh=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "sup_norm", "mu"])
        for row in zip(self.t, self.sup_norm, self.mu):
            w.writerow([repr(float(v)) for v in row])
        text = buf.getvalue()
        if fh is not None:
            fh.write(text)
        return text


def blowup_scan(sol, cs: CoefficientSet, init, times, x=None) -> BlowupScan:
    """Sup norm of psi over a wide x grid at each time, with mu from the trajectory."""
    times = np.asarray(times, dtype=float)
    x = np.linspace(-20.0, 20.0, 2001) if x is None else np.asarray(x, dtype=float)
    psi, phi = sol(x[None, :], times[:, None])
    sup = np.maximum(np.abs(psi).max(axis=1), np.abs(phi).max(axis=1))
    mu = sol.riccati_values(times)[6]
    inv = sup * np.sqrt(np.abs(mu))
    spread = float(np.max(np.abs(inv / inv[0] - 1))) if inv.size else 0.0
    return BlowupScan(times, sup, mu, spread)

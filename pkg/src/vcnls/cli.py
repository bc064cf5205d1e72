"""``vcnls`` command line: case catalog, field export, residual ladders,
Riccati comparisons, blow-up scans and method-of-lines cross-checks.

Exit codes: 0 pass, 1 verification failed, 2 usage or validation error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
import warnings
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import coefficients as coef
from . import riccati as ric
from .errors import (ConvergenceError, IntegrabilityViolation, NumericalError,
                     SingularCoefficientError, ValidationError)
from .manakov import SEED_KINDS, make_seed
from .numsolver import EvolutionConfig, crosscheck
from .transform import (BlowupParams, FieldPair, blowup_solution, lift, lift_nd,
                        sample_field)
from .verify import (LADDER_SIZES, MAX_TOL, MIN_ORDER, blowup_scan, convergence_study,
                     ladder, residual_manakov, residual_nd, residual_vcnls, seed_window,
                     thread_count, window_grids)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
ODE_AGREEMENT = 1e-7
ND_REDUCTION = 8.0  # required residual drop per refinement when only two grids are given
INIT_FLAGS = (("alpha0", "alpha0"), ("beta0", "beta0"), ("gamma0", "gamma0"),
              ("delta0", "delta0"), ("eps0", "epsilon0"), ("kappa0", "kappa0"),
              ("mu0", "mu0"))


# --------------------------------------------------------------------------
# argument helpers


def _value(text):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def _params(pairs):
    out = {}
    for item in pairs or []:
        key, sep, val = item.partition("=")
        if not sep or not key:
            raise ValidationError(f"--param expects key=value, got {item!r}")
        out[key] = _value(val)
    return out


def _floats(text, count=None, name="value"):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise ValidationError(f"{name} must be comma-separated numbers, got {text!r}") from None
    if count is not None and len(vals) != count:
        raise ValidationError(f"{name} needs {count} numbers, got {len(vals)}")
    return vals


def _ints(text, name="value"):
    try:
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise ValidationError(f"{name} must be comma-separated integers, got {text!r}") from None


def _init(cs, args):
    base = dict(zip(ric.NAMES, cs.standard_init))
    base = {f"{k}0": v for k, v in base.items()}
    for flag, key in INIT_FLAGS:
        v = getattr(args, flag, None)
        if v is not None:
            base[key] = v
    return ric.RiccatiInit(**base)


def _seed(cs, args):
    kind = args.seed or cs.default_seed
    params = dict(cs.default_params) if kind == cs.default_seed else {}
    params.update(_params(args.param))
    allowed = ("plane",) if cs.case_id == "blowup-free" else ("db", "rw1", "rw2")
    if kind not in allowed:
        raise ValidationError(
            f"seed {kind!r} cannot be combined with case {cs.case_id}; use one of {allowed}"
        )
    return kind, params


def _solution(cs, args, init):
    kind, params = _seed(cs, args)
    if cs.case_id == "blowup-free":
        try:
            p = BlowupParams(**params)
        except TypeError as exc:
            raise ValidationError(f"bad blow-up parameters: {exc}") from None
        return blowup_solution(cs, init, p), kind, params
    seed = make_seed(kind, params)
    if cs.n > 1:
        if init != ric._as_init(cs.standard_init):
            raise ValidationError("n-dimensional cases use their standard initial data")
        return lift_nd(seed, cs), kind, params
    return lift(seed, cs, init), kind, params


def _out_path(args):
    return None if args.out in (None, "-") else Path(args.out)


def _emit(text, args):
    path = _out_path(args)
    if path is None:
        sys.stdout.write(text)
        return []
    path.write_text(text)
    return [str(path)]


def _write_manifest(args, manifest, outputs):
    manifest["outputs"] = list(outputs)
    target = getattr(args, "manifest", None)
    if target is None and _out_path(args) is not None:
        target = str(_out_path(args)) + ".manifest.json"
    text = json.dumps(manifest, indent=2, sort_keys=True, default=_json_default)
    if target is None:
        sys.stderr.write(text + "\n")
    else:
        manifest["outputs"].append(str(target))
        text = json.dumps(manifest, indent=2, sort_keys=True, default=_json_default)
        Path(target).write_text(text + "\n")


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def _manifest(command, args, **extra):
    m = {"command": command, "case_id": getattr(args, "case", None), "seed": None,
         "params": {}, "init": None, "grid": None, "tolerances": {}, "passed": None,
         "threads": thread_count()}
    m.update(extra)
    return m


# --------------------------------------------------------------------------
# commands


def cmd_cases(args):
    cat = coef.catalog()
    if args.json:
        sys.stdout.write(json.dumps(cat, indent=2, sort_keys=True) + "\n")
    else:
        for entry in cat:
            lo, hi = entry["domain"]
            sys.stdout.write(
                f"{entry['case_id']:<12} n={entry['n']} seed={entry['default_seed']:<5} "
                f"t in [{lo:g}, {hi:.6g}]  mu = {entry['formula_strings'].get('mu', '-')}\n"
            )
    return EXIT_OK


def cmd_field(args):
    started = time.perf_counter()
    cs = coef.builtin_case(args.case)
    init = _init(cs, args)
    sol, kind, params = _solution(cs, args, init)
    if args.nx < 2 or args.nt < 1:
        raise ValidationError(f"field grid needs nx >= 2 and nt >= 1, got {args.nx}, {args.nt}")
    lo, hi = cs.domain
    t_min = lo if args.t_min is None else args.t_min
    t_max = hi if args.t_max is None else args.t_max
    if cs.case_id == "blowup-free" and sol.t_blowup is not None and t_max >= sol.t_blowup:
        t_max = _clip_warning(sol.t_blowup, t_max)
    if not (lo <= t_min <= t_max <= hi + 1e-12):
        raise ValidationError(f"time range [{t_min}, {t_max}] must lie in the domain [{lo}, {hi}]")
    if not args.x_max > args.x_min:
        raise ValidationError("need x_max > x_min")
    x = np.linspace(args.x_min, args.x_max, args.nx)
    t = np.linspace(t_min, t_max, args.nt)
    header = {"case_id": cs.case_id, "seed": kind, "params": params}
    if cs.n > 1:
        # slice x_1 = x, x_2 = ... = x_n = 0
        zeros = [np.zeros_like(x)[None, :]] * (cs.n - 1)
        psi, phi = sol.sampler([x[None, :], *zeros], t[:, None])
        header["slice"] = "x_2 = ... = x_n = 0"
        fp = FieldPair(x, t, psi, phi, header)
    else:
        fp = sample_field(sol, x, t, header)
    outputs = _emit(fp.to_csv(plot=not args.raw), args)
    grid = {"x_min": args.x_min, "x_max": args.x_max, "nx": args.nx,
            "t_min": float(t_min), "t_max": float(t_max), "nt": args.nt}
    m = _manifest("field", args, seed=kind, params=params, init=init.as_tuple(), grid=grid,
                  passed=True, wall_time=time.perf_counter() - started)
    _write_manifest(args, m, outputs)
    return EXIT_OK


def _clip_warning(tb, t_max):
    clipped = tb * (1 - 1e-3)
    warnings.warn(f"requested times up to {t_max:g} pass the blow-up time {tb:.12g}; "
                  f"clipped to {clipped:.12g}", stacklevel=2)
    return clipped


def _reduction(seq):
    coarse, fine = seq
    drop = coarse / fine if fine > 0 else math.inf
    return drop >= ND_REDUCTION, {"residual_sequence": list(seq), "reduction": drop}


def cmd_verify(args):
    started = time.perf_counter()
    cs = coef.builtin_case(args.case)
    init = _init(cs, args)
    sizes = tuple(_ints(args.ladder, "--ladder")) if args.ladder else None
    if args.system == "manakov":
        kind, params = _seed(cs, args)
        seed = make_seed(kind, params)
        window = _floats(args.window, 4, "--window") if args.window else seed_window(seed)
        sizes = sizes or LADDER_SIZES
        if len(sizes) < 3:
            raise ValidationError("the Manakov ladder needs at least 3 grid sizes")
        if args.corrupt != 1.0:
            base, factor = seed, args.corrupt
            seed = type(base)(lambda xi, tau: tuple(factor * v for v in base(xi, tau)),
                              base.kind, base.params)
        grids = window_grids(window, sizes)
        conv = convergence_study(lambda g: residual_manakov(seed, g, l0=-1, lam=-2.0), grids)
        passed, report = ladder(conv), conv.as_dict()
    else:
        sol, kind, params = _solution(cs, args, init)
        if args.corrupt != 1.0:
            sol = sol.scaled(args.corrupt)
        window = _floats(args.window, 4, "--window") if args.window else cs.verify_window
        if window is None:
            raise ValidationError(f"case {cs.case_id} has no default window; pass --window")
        if cs.n > 1:
            default = (33, 65, 129) if cs.n == 2 else (49, 97)
            sizes = sizes or default
            nts = [(n + 1) // 2 if cs.n == 2 else (2 * n + 1) // 3 for n in sizes]
            grids = window_grids(window, sizes, ndim=cs.n, nt=nts)
            if len(sizes) == 2:
                seq = [residual_nd(cs, sol, g).max_residual for g in grids]
                passed, report = _reduction(seq)
            else:
                conv = convergence_study(lambda g: residual_nd(cs, sol, g), grids)
                passed, report = ladder(conv), conv.as_dict()
        else:
            sizes = sizes or LADDER_SIZES
            if len(sizes) < 3:
                raise ValidationError("the VCNLS ladder needs at least 3 grid sizes")
            grids = window_grids(window, sizes)
            conv = convergence_study(lambda g: residual_vcnls(cs, sol, g), grids)
            passed, report = ladder(conv), conv.as_dict()
    report = {"system": args.system, "passed": bool(passed), "corrupt": args.corrupt,
              "window": [float(v) for v in window], "report": report}
    outputs = _emit(json.dumps(report, indent=2, sort_keys=True, default=_json_default) + "\n",
                    args)
    m = _manifest("verify", args, seed=kind, params=params, init=init.as_tuple(),
                  grid={"window": [float(v) for v in window], "sizes": list(sizes)},
                  tolerances={"max_residual": MAX_TOL, "min_order": MIN_ORDER},
                  passed=bool(passed), wall_time=time.perf_counter() - started)
    _write_manifest(args, m, outputs)
    return EXIT_OK if passed else EXIT_FAIL


def cmd_riccati(args):
    started = time.perf_counter()
    cs = coef.builtin_case(args.case)
    if cs.n > 1:
        raise ValidationError("riccati compares 1-D trajectories; n-D cases are not supported")
    init = _init(cs, args)
    lo, hi = cs.domain
    t_min = lo if args.t_min is None else args.t_min
    t_max = hi if args.t_max is None else args.t_max
    if args.nt < 1 or not (lo <= t_min <= t_max <= hi + 1e-12):
        raise ValidationError(f"time grid must have nt >= 1 inside the domain [{lo}, {hi}]")
    report = ric.blowup_time(cs, init, (t_min, t_max))
    if report.t_blowup is not None and report.t_blowup > t_min:
        t_max = _clip_warning(report.t_blowup, t_max)
    elif report.t_blowup is not None:
        raise ValidationError(f"mu vanishes at t = {report.t_blowup:.12g} in the requested range")
    t = np.linspace(t_min, t_max, args.nt)
    closed = ric.closed_form(cs, init, t)
    ode = ric.ode_oracle(cs, init, t)
    a, b = closed.as_array(), ode.as_array()
    worst = float(np.max(np.abs(a - b) / (1 + np.abs(b))))
    passed = worst <= ODE_AGREEMENT
    text = ric.states_to_csv(closed, src="closed")
    text += ric.states_to_csv(ode, src="ode").split("\n", 1)[1]
    outputs = _emit(text, args)
    m = _manifest("riccati", args, init=init.as_tuple(),
                  grid={"t_min": float(t_min), "t_max": float(t_max), "nt": args.nt},
                  tolerances={"agreement": ODE_AGREEMENT, "ode_rtol": ric.DEFAULT_RTOL},
                  max_scaled_difference=worst, passed=bool(passed),
                  wall_time=time.perf_counter() - started)
    _write_manifest(args, m, outputs)
    return EXIT_OK if passed else EXIT_FAIL


def _blowup_case(h, s, t_max):
    cs = coef.blowup_free_case(coef.const(h), s=s)
    return cs.with_(domain=(0.0, max(3.0, float(t_max))))


def cmd_blowup(args):
    started = time.perf_counter()
    if args.nt < 2:
        raise ValidationError("blow-up scan needs nt >= 2")
    alpha0 = args.alpha0
    expected = -1 / (2 * alpha0) if alpha0 < 0 else None
    t_max = args.t_max if args.t_max is not None else (0.99 * expected if expected else 3.0)
    if not t_max > 0:
        raise ValidationError("--t-max must be positive")
    cs = _blowup_case(args.h, args.s, t_max)
    init = ric.RiccatiInit(alpha0, 1.0, 0.0, 0.0, 0.0, 0.0, args.mu0)
    report = ric.blowup_time(cs, init, (0.0, cs.domain[1]))
    tb = report.t_blowup
    if tb is None:
        sys.stderr.write(f"no blow-up: mu stays positive on [0, {cs.domain[1]:g}] "
                         f"for alpha0 = {alpha0:g}\n")
    elif t_max >= tb:
        t_max = _clip_warning(tb, t_max)
    sol = blowup_solution(cs, init, BlowupParams(args.y, args.z))
    times = np.linspace(0.0, t_max, args.nt)
    scan = blowup_scan(sol, cs, init, times)
    outputs = _emit(scan.to_csv(), args)
    tb_ok = tb is None if expected is None else abs(tb - expected) <= 1e-9
    passed = bool(tb_ok and scan.constant)
    summary = {"t_blowup": tb, "expected": expected, "invariant_spread": scan.invariant_spread,
               "passed": passed}
    sys.stderr.write(json.dumps(summary, sort_keys=True) + "\n")
    m = _manifest("blowup", args, case_id="blowup-free", seed="plane",
                  params={"y": args.y, "z": args.z, "h": args.h, "s": args.s},
                  init=init.as_tuple(), grid={"t_max": float(t_max), "nt": args.nt},
                  tolerances={"t_blowup": 1e-9, "invariant": 1e-8}, passed=passed,
                  wall_time=time.perf_counter() - started, **{k: summary[k] for k in summary
                                                              if k != "passed"})
    _write_manifest(args, m, outputs)
    return EXIT_OK if passed else EXIT_FAIL


def cmd_evolve(args):
    started = time.perf_counter()
    cs = coef.builtin_case(args.case)
    if cs.n > 1 or cs.case_id == "blowup-free":
        raise ValidationError("evolve supports the 1-D lifted cases only")
    init = _init(cs, args)
    sol, kind, params = _solution(cs, args, init)
    cfg = EvolutionConfig.spatial(args.x_min, args.x_max, args.nx, args.t0, args.t1,
                                  rel_tol=args.rtol, abs_tol=args.atol, boundary=args.boundary)
    cs.check_domain([args.t0, args.t1])
    target = cs
    if args.h_scale != 1.0:
        target = cs.with_(h=lambda t, h=cs.h, k=args.h_scale: k * h(t))
    record = crosscheck(target, sol, cfg)
    passed = record["l2_rel_error"] < args.max_error
    record.update({"passed": bool(passed), "h_scale": args.h_scale, "max_error": args.max_error})
    outputs = _emit(json.dumps(record, indent=2, sort_keys=True) + "\n", args)
    m = _manifest("evolve", args, seed=kind, params=params, init=init.as_tuple(),
                  grid={"x_min": args.x_min, "x_max": args.x_max, "nx": args.nx,
                        "t0": args.t0, "t1": args.t1},
                  tolerances={"rtol": args.rtol, "atol": args.atol, "max_error": args.max_error},
                  passed=bool(passed), wall_time=time.perf_counter() - started)
    _write_manifest(args, m, outputs)
    return EXIT_OK if passed else EXIT_FAIL


# --------------------------------------------------------------------------
# parser


def _add_init(p):
    g = p.add_argument_group("Riccati initial data (defaults: the case's standard values)")
    for flag, _ in INIT_FLAGS:
        g.add_argument(f"--{flag}", type=float, default=None)


def _add_seed(p):
    p.add_argument("--seed", choices=SEED_KINDS, default=None,
                   help="seed solution (default: the case's seed)")
    p.add_argument("--param", action="append", metavar="KEY=VALUE",
                   help="seed parameter, repeatable (e.g. --param d2=1 --param q=0)")


def _add_output(p):
    p.add_argument("--out", default=None, help="output file (default: stdout)")
    p.add_argument("--manifest", default=None,
                   help="manifest path (default: OUT.manifest.json, or stderr without --out)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vcnls", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cases", help="list the builtin cases")
    p.add_argument("--json", action="store_true", help="machine-readable catalog")
    p.set_defaults(func=cmd_cases)

    case_help = f"case id, one of: {', '.join(coef.case_ids())}"

    p = sub.add_parser("field", help="sample |psi|^2, |phi|^2, |psi - phi| on a grid (CSV)")
    p.add_argument("case", help=case_help)
    _add_seed(p)
    _add_init(p)
    p.add_argument("--x-min", type=float, default=-8.0)
    p.add_argument("--x-max", type=float, default=8.0)
    p.add_argument("--nx", type=int, default=201)
    p.add_argument("--t-min", type=float, default=None)
    p.add_argument("--t-max", type=float, default=None)
    p.add_argument("--nt", type=int, default=101)
    p.add_argument("--raw", action="store_true", help="write real/imaginary parts instead")
    _add_output(p)
    p.set_defaults(func=cmd_field)

    p = sub.add_parser("verify", help="residual convergence ladder (JSON)")
    p.add_argument("case", help=case_help)
    _add_seed(p)
    _add_init(p)
    p.add_argument("--system", choices=("vcnls", "manakov"), default="vcnls",
                   help="lifted VCNLS residual or the seed's own Manakov residual")
    p.add_argument("--ladder", default=None, help="comma-separated grid sizes")
    p.add_argument("--window", default=None, help="x_lo,x_hi,t_lo,t_hi")
    p.add_argument("--corrupt", type=float, default=1.0,
                   help="scale the candidate amplitude (negative control)")
    _add_output(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("riccati", help="closed form vs ODE integration (CSV)")
    p.add_argument("case", help=case_help)
    _add_init(p)
    p.add_argument("--t-min", type=float, default=None)
    p.add_argument("--t-max", type=float, default=None)
    p.add_argument("--nt", type=int, default=101)
    _add_output(p)
    p.set_defaults(func=cmd_riccati)

    p = sub.add_parser("blowup", help="free-particle blow-up scan (CSV)")
    p.add_argument("--alpha0", type=float, default=-0.25)
    p.add_argument("--mu0", type=float, default=1.0)
    p.add_argument("--h", type=float, default=1.0, help="constant nonlinearity h")
    p.add_argument("--s", type=float, default=1.0, help="nonlinearity exponent")
    p.add_argument("--y", type=float, default=0.0)
    p.add_argument("--z", type=float, default=0.0)
    p.add_argument("--t-max", type=float, default=None)
    p.add_argument("--nt", type=int, default=101)
    _add_output(p)
    p.set_defaults(func=cmd_blowup)

    p = sub.add_parser("evolve", help="method-of-lines cross-check (JSON)")
    p.add_argument("case", help=case_help)
    _add_seed(p)
    _add_init(p)
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--t1", type=float, default=0.3)
    p.add_argument("--x-min", type=float, default=-1.0)
    p.add_argument("--x-max", type=float, default=1.0)
    p.add_argument("--nx", type=int, default=513)
    p.add_argument("--rtol", type=float, default=1e-8)
    p.add_argument("--atol", type=float, default=1e-8)
    p.add_argument("--boundary", choices=("analytic-clamped", "zero"),
                   default="analytic-clamped")
    p.add_argument("--h-scale", type=float, default=1.0,
                   help="multiply h by this factor in the integrator (negative control)")
    p.add_argument("--max-error", type=float, default=1e-3)
    _add_output(p)
    p.set_defaults(func=cmd_evolve)
    return parser


@contextmanager
def _warnings_to_stderr():
    def show(message, category, filename, lineno, file=None, line=None):
        sys.stderr.write(f"warning: {message}\n")

    old = warnings.showwarning
    warnings.showwarning = show
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always", UserWarning)
            yield
    finally:
        warnings.showwarning = old


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    try:
        with _warnings_to_stderr():
            return args.func(args)
    except (ValidationError, IntegrabilityViolation) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except (NumericalError, ConvergenceError, SingularCoefficientError) as exc:
        sys.stderr.write(f"numerical failure ({type(exc).__name__}): {exc}\n")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

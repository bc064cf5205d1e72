import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from vcnls.coefficients import ZERO, CoefficientSet, builtin_case, const
from vcnls.errors import BoundaryLeakError, ValidationError
from vcnls.manakov import make_seed
from vcnls.numsolver import EvolutionConfig, HaloSeries, crosscheck, evolve, l2_norm, rhs_factory
from vcnls.transform import lift

FREE = CoefficientSet(a=const(0.5), domain=(0.0, 5.0))


def gaussian(centre=0.0, width=1.0, k=0.0, amp=1.0, ratio=0.5):
    def sample(x, t):
        g = amp * np.exp(-((x - centre) / width) ** 2 + 1j * k * x)
        return g + 0j * t, ratio * g + 0j * t
    return sample


def norm2(field, dx):
    return l2_norm(field.psi[0], dx) ** 2


def default_lift(case_id):
    cs = builtin_case(case_id)
    return cs, lift(make_seed(cs.default_seed, dict(cs.default_params)), cs)


# ---------------------------------------------------------------- configuration

def test_config_validation():
    with pytest.raises(ValidationError):
        EvolutionConfig.spatial(-1, 1, 65, 1.0, 0.5)
    with pytest.raises(ValidationError):
        EvolutionConfig.spatial(-1, 1, 65, 0, 1, rel_tol=0.0)
    with pytest.raises(ValidationError):
        EvolutionConfig.spatial(-1, 1, 65, 0, 1, boundary="periodic")
    cfg = EvolutionConfig.spatial(-1, 1, 65, 0, 0.2)
    assert (cfg.rel_tol, cfg.abs_tol, cfg.boundary) == (1e-8, 1e-8, "analytic-clamped")


def test_l2_norm():
    assert l2_norm(np.ones(100), 0.01) == pytest.approx(1.0)
    assert l2_norm(np.array([3j, 4.0]), 1.0) == 5.0


def test_zero_boundary_needs_decayed_data():
    cs, sol = default_lift("db-trig")
    cfg = EvolutionConfig.spatial(-3, 3, 129, 0, 0.1, boundary="zero")
    with pytest.raises(ValidationError):
        evolve(cs, sol, cfg)


def test_clamped_needs_reference():
    cs, sol = default_lift("db-trig")
    start = evolve(cs, sol, EvolutionConfig.spatial(-3, 3, 129, 0, 0.0))
    with pytest.raises(ValidationError):
        evolve(cs, start, EvolutionConfig.spatial(-3, 3, 129, 0, 0.1))


# ---------------------------------------------------------------- examples

def test_free_gaussian_conserves_norm():
    cfg = EvolutionConfig.spatial(-20, 20, 801, 0.0, 1.0, boundary="zero")
    out = evolve(FREE, gaussian(), cfg)
    start = evolve(FREE, gaussian(), EvolutionConfig.spatial(-20, 20, 801, 0, 0, boundary="zero"))
    dx = cfg.grid.dx
    assert abs(norm2(out, dx) / norm2(start, dx) - 1) < 1e-6


def test_free_gaussian_matches_exact_spreading():
    # |psi|^2 of a free Gaussian under i psi_t = -psi_xx/2: width^2 grows as 1 + 4 a^2 t^2 (a = 1/2)
    cfg = EvolutionConfig.spatial(-20, 20, 801, 0.0, 1.0, rel_tol=1e-10, abs_tol=1e-10,
                                  boundary="zero")
    out = evolve(FREE, gaussian(width=math.sqrt(2)), cfg)
    x = out.x
    # exp(-x^2/2) evolves with s(t) = 1 + i t: psi = s^{-1/2} exp(-x^2 / (2 s))
    s = 1 + 1j * 1.0
    exact = s ** -0.5 * np.exp(-x * x / (2 * s))
    assert np.abs(out.psi[0] - exact).max() < 1e-6


def test_gain_loss_rate():
    cs = builtin_case("rw1-cos").with_(h=ZERO)
    t1 = 0.05
    cfg = EvolutionConfig.spatial(-12, 12, 961, 0.0, t1, rel_tol=1e-10, abs_tol=1e-12,
                                  boundary="zero")
    init = gaussian(width=1.0)
    start = evolve(cs, init, cfg.__class__(cfg.grid, 0.0, 0.0, boundary="zero"))
    out = evolve(cs, init, cfg)
    dx = cfg.grid.dx
    ratio = norm2(out, dx) / norm2(start, dx)
    rate, _ = quad(lambda t: float(cs.c(t) - 2 * cs.d(t)), 0, t1)
    assert math.log(ratio) == pytest.approx(rate, abs=1e-4 * t1)


def test_db_crosscheck():
    cs, sol = default_lift("db-trig")
    rec = crosscheck(cs, sol, EvolutionConfig.spatial(-3, 3, 513, 0.0, 0.5))
    assert rec["l2_rel_error"] < 1e-3
    assert rec["linf_rel_error"] < 1e-3


def test_crosscheck_zero_span():
    cs, sol = default_lift("rw1-cos")
    rec = crosscheck(cs, sol, EvolutionConfig.spatial(-1, 1, 129, 0.1, 0.1))
    assert rec["l2_rel_error"] == 0.0 and rec["linf_rel_error"] == 0.0


def test_crosscheck_negative_control():
    cs, sol = default_lift("db-trig")
    cfg = EvolutionConfig.spatial(-3, 3, 257, 0.0, 0.2)
    good = crosscheck(cs, sol, cfg)["l2_rel_error"]
    bad = crosscheck(cs.with_(h=lambda t: 1.1 * cs.h(t)), sol, cfg)["l2_rel_error"]
    assert bad >= 10 * good


def test_boundary_leak():
    cfg = EvolutionConfig.spatial(-8, 8, 321, 0.0, 4.0, boundary="zero")
    with pytest.raises(BoundaryLeakError):
        evolve(FREE, gaussian(centre=0.0, width=0.5, k=4.0), cfg)


def test_halo_series_accuracy():
    cs, sol = default_lift("rw1-cos")
    x_halo = np.array([-1.02, -1.01, 1.01, 1.02])
    series = HaloSeries(sol, x_halo, 0.0, 0.3)
    t = np.linspace(0, 0.3, 23)
    p, q = sol(x_halo[None, :], t[:, None])
    ref = np.concatenate([p, q], axis=1).T
    assert np.abs(series(t) - ref).max() <= 1e-11 * np.abs(ref).max()


@pytest.mark.property
def test_self_convergence():
    cs, sol = default_lift("db-trig")
    errs = [crosscheck(cs, sol, EvolutionConfig.spatial(-3, 3, n, 0.0, 0.1, rel_tol=1e-12,
                                                        abs_tol=1e-12))["l2_rel_error"]
            for n in (65, 129)]
    assert 10 <= errs[0] / errs[1] <= 25


# ---------------------------------------------------------------- properties

@settings(max_examples=100)
@given(centre=st.floats(-3, 3), width=st.floats(0.7, 2.0), k=st.floats(-1.5, 1.5),
       amp=st.floats(0.1, 2.0))
def test_free_norm_drift_property(centre, width, k, amp):
    cfg = EvolutionConfig.spatial(-24, 24, 321, 0.0, 1.0, boundary="zero")
    init = gaussian(centre, width, k, amp)
    out = evolve(FREE, init, cfg)
    x = out.x
    p0, _ = init(x, 0.0)
    dx = cfg.grid.dx
    assert abs(norm2(out, dx) / l2_norm(p0, dx) ** 2 - 1) < 1e-6


@given(centre=st.floats(-2, 2), width=st.floats(0.7, 1.5), k=st.floats(-1, 1),
       ratio=st.floats(0.1, 2.0), hval=st.floats(-1, 1))
def test_component_exchange_symmetry(centre, width, k, ratio, hval):
    cs = CoefficientSet(a=const(0.5), b=const(0.1), d=const(0.05), h=const(hval),
                        domain=(0.0, 1.0))
    fwd = gaussian(centre, width, k, 1.0, ratio)
    swapped = lambda x, t: fwd(x, t)[::-1]  # noqa: E731
    cfg = EvolutionConfig.spatial(-12, 12, 161, 0.0, 0.2, boundary="zero")
    x = cfg.grid.x()
    rhs = rhs_factory(cs, x, "zero")
    p, q = fwd(x, 0.0)
    n = x.size
    np.testing.assert_array_equal(rhs(0.1, np.concatenate([q, p])),
                                  np.roll(rhs(0.1, np.concatenate([p, q])), n))
    # the step controller's norm sums the state in a different order, so the evolved
    # fields agree to the time-integration tolerance rather than bitwise
    a = evolve(cs, fwd, cfg)
    b = evolve(cs, swapped, cfg)
    scale = np.abs(a.psi).max()
    np.testing.assert_allclose(b.psi, a.phi, rtol=0, atol=1e-8 * scale)
    np.testing.assert_allclose(b.phi, a.psi, rtol=0, atol=1e-8 * scale)

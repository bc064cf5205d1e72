import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vcnls import manakov as mk
from vcnls.errors import SingularPointError, ValidationError
from vcnls.verify import convergence_study, residual_manakov, seed_window, window_grids

S3 = math.sqrt(3.0)


# ---- naive transcription oracle: the formulas typed out term by term, no shared subexpressions

def naive_rw1(xi, tau, d2, q):
    A = d2 + 3 * q
    d1 = d2 - 2 * A
    c = 2 * A
    B = xi + 6 * q * tau
    th1 = d1 * xi + (4 * c * c - d1 * d1) * tau
    th2 = d2 * xi + (4 * c * c - d2 * d2) * tau
    den = 12 * A**2 * B**2 + 8 * A * B * S3 + 144 * tau**2 * A**4 + 5
    chi = A * np.exp(1j * th1) * (-1 - 1j * S3 + (-6 * A * B * S3 - 36 * tau * A**2 * S3 - 3
                                                  + 1j * (36 * A**2 * tau + 6 * A * B + 5 * S3)) / den)
    phi = A * np.exp(1j * th2) * (-1 + 1j * S3 + (-6 * A * B * S3 + 36 * tau * A**2 * S3 - 3
                                                  + 1j * (36 * A**2 * tau - 6 * A * B - 5 * S3)) / den)
    return chi, phi


def naive_rw2(xi, tau, d2, q):
    A = d2 + 3 * q
    d1 = d2 - 2 * A
    c = 2 * A
    B = xi + 6 * q * tau
    X = A * B
    t = tau
    th1 = d1 * xi + (4 * c * c - d1 * d1) * tau
    th2 = d2 * xi + (4 * c * c - d2 * d2) * tau
    D = (1 + 4 * S3 * X + 24 * X**2 + 16 * S3 * X**3 + 12 * X**4
         + 48 * A**4 * (9 + 8 * S3 * X + 6 * X**2) * t**2 + 1728 * A**8 * t**4)
    G1 = -3 * (-1 + 6 * X**2 + 4 * S3 * X**3 + 4 * A**2 * (S3 + 12 * X + 6 * S3 * X**2) * t
               + 24 * A**4 * (3 + 2 * S3 * X) * t**2 + 288 * S3 * A**6 * t**3)
    G2 = 3 * (1 - 6 * X**2 - 4 * S3 * X**3 + 4 * A**2 * (S3 + 12 * X + 6 * S3 * X**2) * t
              - 24 * A**4 * (3 + 2 * S3 * X) * t**2 + 288 * S3 * A**6 * t**3)
    H1 = (S3 + 12 * X + 18 * S3 * X**2 + 12 * X**3 + 12 * A**2 * (9 + 8 * S3 * X + 6 * X**2) * t
          + 24 * A**4 * (13 * S3 + 6 * X) * t**2 + 864 * A**6 * t**3)
    H2 = (-S3 - 12 * X - 18 * S3 * X**2 - 12 * X**3 + 12 * A**2 * (9 + 8 * S3 * X + 6 * X**2) * t
          - 24 * A**4 * (13 * S3 + 6 * X) * t**2 + 864 * A**6 * t**3)
    chi = A * (-1 - 1j * S3 + (G1 + 1j * H1) / D) * np.exp(1j * th1)
    phi = A * (-1 + 1j * S3 + (G2 + 1j * H2) / D) * np.exp(1j * th2)
    return chi, phi, (D, G1, G2, H1, H2)


def naive_db(xi, tau, C, e, a3, b3, amp):
    E = 0.5 * np.log((a3**2 + b3**2) / (2 * C**2))
    X = C * (xi - 2 * e * tau) + E
    chi = C * np.tanh(X) * np.exp(1j * (e * xi + (2 * C * C - e * e) * tau))
    phi = amp / np.cosh(X) * np.exp(1j * (e * xi + (3 * C * C - e * e) * tau))
    return chi, phi


rw_params = st.tuples(st.floats(-2, 2), st.floats(-1, 1)).filter(
    lambda p: abs(p[0] + 3 * p[1]) > 0.1)
points = st.tuples(st.floats(-5, 5), st.floats(-2, 2))


# ---------------------------------------------------------------- params

def test_db_params():
    p = mk.DBParams(2.0, 0.5, 3.0, -1.0)
    assert p.E == 0.5 * math.log((9 + 1) / (2 * 4.0))
    with pytest.raises(ValidationError):
        mk.DBParams(C=0.0)
    with pytest.raises(ValidationError):
        mk.DBParams(a3=0.0, b3=0.0)


def test_rw_params():
    p = mk.RWParams(1.0, -1.0)
    assert (p.A, p.d1, p.c1, p.c2) == (-2.0, 5.0, -4.0, -4.0)
    assert mk.RWParams(1, 0, -1, 1).c1 == -2.0
    with pytest.raises(ValidationError):
        mk.RWParams(3.0, -1.0)
    with pytest.raises(ValidationError):
        mk.RWParams(1.0, 0.0, sign_c1=0)


def test_make_seed():
    assert mk.make_seed("rw1", {"d2": 1, "q": 0}).kind == "rw1"
    assert mk.make_seed("db", {"C": 1}).params["amplitude"] == "exact"
    assert mk.make_seed("plane", {"y": 1.0}).kind == "plane"
    with pytest.raises(ValidationError):
        mk.make_seed("rw2", {"bogus": 1})
    with pytest.raises(ValidationError):
        mk.make_seed("soliton")
    with pytest.raises(ValidationError):
        mk.db_soliton(mk.DBParams(), amplitude="loud")


# ---------------------------------------------------------------- examples

def test_db_core_and_peak():
    p = mk.DBParams(1.5, 0.3, 1.0, 2.0)
    for amplitude, peak in (("printed", 4 * 1.5**2 * math.hypot(1, 2)),
                            ("exact", math.sqrt(2) * 1.5)):
        seed = mk.db_soliton(p, amplitude)
        for tau in (-0.4, 0.0, 0.7):
            xi = -p.E / p.C + 2 * p.e * tau
            chi, phi = seed(xi, tau)
            assert abs(chi) < 1e-15
            assert abs(phi) == pytest.approx(peak, rel=1e-14)
        assert p.centre(0.7) == pytest.approx(-p.E / p.C + 1.4 * p.e)


def test_db_origin_and_far_field():
    seed = mk.db_soliton(mk.DBParams(1.0, -1.0, 1.0, 1.0))
    chi, _ = seed(0.0, 0.0)
    assert abs(chi) == 0.0
    for xi in (-40.0, 40.0):
        assert abs(seed(xi, 0.3)[0]) == pytest.approx(1.0, abs=1e-14)


def test_rw1_limits():
    for d2, q in ((1, 0), (1, -1), (-0.5, 0)):
        seed = mk.rogue_wave_I(mk.RWParams(d2, q))
        A = d2 + 3 * q
        chi, phi = seed(np.array([-1e3, 1e3]), 0.2)
        np.testing.assert_allclose(np.abs(chi), 2 * abs(A), rtol=1e-3)
        np.testing.assert_allclose(np.abs(phi), 2 * abs(A), rtol=1e-3)
    # denominator constant term: at B = tau = 0 the rational part is (-3 + 5 sqrt3 i)/5
    chi, _ = mk.rogue_wave_I(mk.RWParams(1, 0))(0.0, 0.0)
    assert chi == pytest.approx(complex(-1, -S3) + complex(-3, 5 * S3) / 5, abs=1e-15)


def test_rw2_origin_regression():
    p = mk.RWParams(-0.5, 0.0)
    r = mk.rw2_intermediates(p, 0.0, 0.0)
    assert (float(r.D), float(r.G1), float(r.H1)) == (1.0, 3.0, pytest.approx(S3))
    assert (float(r.G2), float(r.H2)) == (3.0, pytest.approx(-S3))
    chi, phi = mk.rogue_wave_II(p)(0.0, 0.0)
    assert chi == pytest.approx(2 * p.A, abs=1e-15)
    assert phi == pytest.approx(2 * p.A, abs=1e-15)


def test_rw2_far_field_and_render():
    p = mk.RWParams(-0.5, 0.0)
    seed = mk.rogue_wave_II(p)
    chi, phi = seed(np.array([-1e3, 1e3]), -0.1)
    np.testing.assert_allclose(np.abs(chi), 1.0, rtol=1e-3)
    np.testing.assert_allclose(np.abs(phi), 1.0, rtol=1e-3)
    xi, tau = np.meshgrid(np.linspace(-5, 5, 101), np.linspace(-5, 5, 101))
    chi, phi = seed(xi, tau)
    assert np.all(np.isfinite(chi)) and np.all(np.isfinite(phi))


def test_rw2_singular_guard(monkeypatch):
    monkeypatch.setattr(mk, "D_FLOOR", 2.0)
    with pytest.raises(SingularPointError):
        mk.rogue_wave_II(mk.RWParams(1, 0))(0.0, 0.0)


def test_plane_wave_linear():
    seed = mk.plane_wave(0.7, -1.2)
    chi, phi = seed(np.linspace(-3, 3, 7), 0.4)
    np.testing.assert_allclose(np.abs(chi), 1.0)
    np.testing.assert_allclose(np.abs(phi), 1.0)
    assert seed.chi_fn(0.0, 0.0) == 1.0 and seed.phi_fn(0.0, 0.0) == 1.0


# ---------------------------------------------------------------- seed residuals

@pytest.mark.property
@pytest.mark.parametrize("kind,params", [
    ("db", {"C": 1, "e": -1, "a3": 1, "b3": 1}),
    ("db", {"C": 2, "e": -1, "a3": -1, "b3": 1}),
    ("db", {"C": 0.7, "e": 0.5, "a3": 2, "b3": -0.5}),
    ("rw1", {"d2": 1, "q": 0}),
    ("rw1", {"d2": 1, "q": -1}),
    ("rw1", {"d2": -0.5, "q": 0.2}),
    ("rw2", {"d2": -0.5, "q": 0}),
    ("rw2", {"d2": 1, "q": -1}),
    ("rw2", {"d2": 1, "q": 0}),
])
def test_seed_residual_converges(kind, params):
    seed = mk.make_seed(kind, params)
    conv = convergence_study(lambda g: residual_manakov(seed, g), window_grids(seed_window(seed)))
    assert conv.observed_order >= 3.3
    assert conv.final_residual < 1e-5
    assert conv.passed()


def test_printed_db_amplitude_is_not_a_solution():
    seed = mk.db_soliton(mk.DBParams(2.0, -1.0, -1.0, 1.0), amplitude="printed")
    conv = convergence_study(lambda g: residual_manakov(seed, g), window_grids(seed_window(seed)))
    assert conv.final_residual > 1.0
    assert not conv.passed()


def test_wrong_nonlinear_sign():
    seed = mk.make_seed("db", {"C": 1, "e": -1, "a3": 1, "b3": 1})
    grid = window_grids(seed_window(seed), (129,))[0]
    assert residual_manakov(seed, grid, lam=2.0).max_residual > 0.1


# ---------------------------------------------------------------- properties

@given(p=rw_params, pt=points)
def test_rw1_matches_naive(p, pt):
    chi, phi = mk.rogue_wave_I(mk.RWParams(*p))(*pt)
    n_chi, n_phi = naive_rw1(*pt, *p)
    A = abs(p[0] + 3 * p[1])
    assert abs(chi - n_chi) <= 1e-12 * A * (1 + abs(n_chi))
    assert abs(phi - n_phi) <= 1e-12 * A * (1 + abs(n_phi))


@given(p=rw_params, pt=points)
def test_rw2_matches_naive(p, pt):
    prm = mk.RWParams(*p)
    chi, phi = mk.rogue_wave_II(prm)(*pt)
    n_chi, n_phi, polys = naive_rw2(*pt, *p)
    r = mk.rw2_intermediates(prm, *pt)
    for got, want in zip((r.D, r.G1, r.G2, r.H1, r.H2), polys):
        assert float(got) == pytest.approx(want, rel=1e-11, abs=1e-11 * abs(polys[0]))
    assert float(r.D) > 0
    A = abs(prm.A)
    assert abs(chi - n_chi) <= 1e-10 * A * (1 + abs(n_chi))
    assert abs(phi - n_phi) <= 1e-10 * A * (1 + abs(n_phi))


@given(p=rw_params, kind=st.sampled_from(["rw1", "rw2"]))
def test_rw_far_field(p, kind):
    seed = mk.make_seed(kind, {"d2": p[0], "q": p[1]})
    A = abs(p[0] + 3 * p[1])
    chi, phi = seed(np.array([-1e4, 1e4]) / A, 0.1)
    np.testing.assert_allclose(np.abs(chi), 2 * A, rtol=1e-3)
    np.testing.assert_allclose(np.abs(phi), 2 * A, rtol=1e-3)


@given(p=rw_params, kind=st.sampled_from(["rw1", "rw2"]),
       s1=st.sampled_from([-1, 1]), s2=st.sampled_from([-1, 1]), pt=points)
def test_phase_invariant_under_c_signs(p, kind, s1, s2, pt):
    a = mk.make_seed(kind, {"d2": p[0], "q": p[1]})(*pt)
    b = mk.make_seed(kind, {"d2": p[0], "q": p[1], "sign_c1": s1, "sign_c2": s2})(*pt)
    assert a == b


@given(C=st.floats(0.3, 3).map(lambda v: v * np.random.default_rng(1).choice([-1, 1])),
       e=st.floats(-2, 2), a3=st.floats(-2, 2), b3=st.floats(-2, 2), seed_=st.integers(0, 2**31))
def test_db_modulus_identities(C, e, a3, b3, seed_):
    if math.hypot(a3, b3) < 1e-3:
        a3 = 1.0
    rng = np.random.default_rng(seed_)
    xi = rng.uniform(-5, 5, 1000)
    tau = rng.uniform(-2, 2, 1000)
    p = mk.DBParams(C, e, a3, b3)
    X = C * (xi - 2 * e * tau) + p.E
    chi, phi = mk.db_soliton(p, "printed")(xi, tau)
    np.testing.assert_allclose(np.abs(chi) ** 2, C**2 * np.tanh(X) ** 2, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(np.abs(phi) ** 2, 16 * C**4 * (a3**2 + b3**2) / np.cosh(X) ** 2,
                               rtol=1e-12, atol=1e-12)
    n_chi, n_phi = naive_db(xi, tau, C, e, a3, b3, -4 * C * C * complex(a3, b3))
    np.testing.assert_allclose(chi, n_chi, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(phi, n_phi, rtol=1e-12, atol=1e-12 * abs(C) ** 2)
    _, e_phi = mk.db_soliton(p, "exact")(xi, tau)
    np.testing.assert_allclose(np.abs(e_phi) ** 2, 2 * C**2 / np.cosh(X) ** 2, rtol=1e-12,
                               atol=1e-12)

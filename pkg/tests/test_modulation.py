import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import jv

from giantatom.modulation import (Constant, Cosine, Linear, SchemeParseError, accumulated_phase,
                                  bessel_j_sequence, delta_phase, delta_phase_quad, dynamical_phase,
                                  format_scheme, jacobi_anger_factor, omega_shift, parse_angle,
                                  parse_scheme)

PI = math.pi


def test_constant_shift_and_phase_are_zero():
    t = np.linspace(0.2, 5, 11)
    assert np.all(omega_shift(Constant(), t) == 0)
    assert np.all(delta_phase(Constant(), t, 0.2) == 0)


def test_cosine_closed_form_value():
    # 2 chi sin(pi/4) cos(pi/4) = chi for Omega tau = pi/2
    sc = Cosine.from_depth(1.0, PI)
    assert delta_phase(sc, 0.5, 0.5) == pytest.approx(1.0, abs=1e-14)


def test_linear_closed_form_value():
    assert delta_phase(Linear(1.0), 1.0, 0.2) == pytest.approx(0.2 * 0.9, abs=1e-15)
    assert delta_phase(Linear(0.5), 2.0, 1.0) == pytest.approx(0.75, abs=1e-15)


def test_dynamical_phase_combines_static_and_excess():
    sc = Cosine.from_depth(1.0, PI)
    val = dynamical_phase(sc, 0.5, 0.5, 0.3)
    assert val == pytest.approx(1.3, abs=1e-14)


def test_chi_and_alpha_relation():
    sc = Cosine(alpha=2.5 * PI, omega=5 * PI)
    assert sc.chi == pytest.approx(0.5)
    assert Cosine.from_depth(2.0, 3.0).alpha == pytest.approx(6.0)


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
@settings(max_examples=1000, deadline=None)
@given(
    chi=st.floats(0, 5), omega=st.floats(0.1, 60), theta=st.floats(-PI, PI),
    tau=st.floats(0.01, 10), dt=st.floats(0, 10),
)
def test_cosine_closed_form_matches_quadrature(chi, omega, theta, tau, dt):
    sc = Cosine.from_depth(chi, omega, theta)
    t = tau + dt
    closed = delta_phase(sc, t, tau)
    quad = delta_phase_quad(sc, t, tau)
    assert abs(closed - quad) <= 1e-10 * max(1.0, abs(closed)) + 1e-10


@settings(max_examples=300, deadline=None)
@given(beta=st.floats(-3, 3), tau=st.floats(0.01, 5), dt=st.floats(0, 10))
def test_linear_closed_form_matches_quadrature(beta, tau, dt):
    sc = Linear(beta)
    t = tau + dt
    closed = delta_phase(sc, t, tau)
    assert abs(closed - delta_phase_quad(sc, t, tau)) <= 1e-10 * max(1.0, abs(closed))


@settings(max_examples=300, deadline=None)
@given(chi=st.floats(0, 5), omega=st.floats(0.1, 30), theta=st.floats(-PI, PI),
       tau=st.floats(0.01, 5), dt=st.floats(0, 5), k=st.integers(1, 5))
def test_cosine_excess_phase_is_periodic(chi, omega, theta, tau, dt, k):
    sc = Cosine.from_depth(chi, omega, theta)
    t = tau + dt
    a = delta_phase(sc, t, tau)
    b = delta_phase(sc, t + k * sc.period, tau)
    assert abs(a - b) <= 1e-12 * max(1.0, omega * (t + k * sc.period))


@settings(max_examples=300, deadline=None)
@given(chi=st.floats(0, 5), n=st.integers(1, 6), theta=st.floats(-PI, PI),
       tau=st.floats(0.05, 5), dt=st.floats(0, 10))
def test_full_period_delay_nulls_excess_phase(chi, n, theta, tau, dt):
    sc = Cosine.from_depth(chi, 2 * PI * n / tau, theta)
    assert abs(delta_phase(sc, tau + dt, tau)) <= 1e-12 * max(1.0, chi) * (1 + n * (1 + dt / tau))


@settings(max_examples=300, deadline=None)
@given(chi=st.floats(0, 5), omega=st.floats(0.1, 30), theta=st.floats(-PI, PI),
       tau=st.floats(0.01, 5), dt=st.floats(0, 10))
def test_excess_phase_bounded_by_twice_chi(chi, omega, theta, tau, dt):
    sc = Cosine.from_depth(chi, omega, theta)
    assert abs(delta_phase(sc, tau + dt, tau)) <= 2 * chi * (1 + 1e-12)


def test_accumulated_phase_is_excess_over_full_window():
    sc = Cosine.from_depth(1.0, 3.0, 0.4)
    t = 1.7
    assert accumulated_phase(sc, t) == pytest.approx(delta_phase_quad(sc, t, t), abs=1e-12)


def test_window_before_tau_rejected():
    with pytest.raises(ValueError):
        delta_phase(Cosine.from_depth(1, 1), 0.1, 0.2)
    with pytest.raises(ValueError):
        delta_phase(Linear(1.0), 1.0, -0.1)


def test_invalid_cosine_rejected():
    with pytest.raises(ValueError):
        Cosine(alpha=1.0, omega=0.0)
    with pytest.raises(ValueError):
        Cosine(alpha=math.nan, omega=1.0)
    with pytest.raises(ValueError):
        Linear(math.inf)


@pytest.mark.parametrize("x", [0.0, 1e-40, 1e-3, 0.5, 2.0, 7.3, 10.0, 20.0, -3.2])
def test_bessel_sequence_matches_scipy(x):
    n_max = 60
    ours = bessel_j_sequence(n_max, x)
    ref = jv(np.arange(n_max + 1), x)
    assert np.max(np.abs(ours - ref)) <= 1e-12


def test_jacobi_anger_converges_with_order():
    chi, phi0 = 2.5, 0.7
    x = np.linspace(0, 2 * PI, 50)
    exact = np.exp(1j * phi0 + 2j * chi * np.sin(x))
    errs = [np.max(np.abs(jacobi_anger_factor(chi, phi0, x, q) - exact)) for q in (2, 5, 10, 20)]
    assert all(a > b for a, b in zip(errs, errs[1:]))
    assert errs[-1] < 1e-10


def test_jacobi_anger_reproduces_feedback_factor():
    # Omega tau = pi, theta = 0: Delta = 2 chi sin(Omega t)
    tau, chi = 0.2, 1.3
    sc = Cosine.from_depth(chi, PI / tau)
    t = np.linspace(tau, 3, 40)
    direct = np.exp(1j * dynamical_phase(sc, t, tau, 0.4))
    series = jacobi_anger_factor(chi, 0.4, sc.omega * t, 40)
    assert np.max(np.abs(direct - series)) < 1e-10


def test_jacobi_anger_rejects_bad_arguments():
    with pytest.raises(ValueError):
        jacobi_anger_factor(1.0, 0.0, 0.0, -1)
    with pytest.raises(ValueError):
        jacobi_anger_factor(-1.0, 0.0, 0.0, 3)


@pytest.mark.parametrize("text,value", [
    ("5pi", 5 * PI), ("-pi/2", -PI / 2), ("0.5pi", 0.5 * PI), ("pi", PI), ("1.25", 1.25), ("2*pi", 2 * PI),
])
def test_parse_angle(text, value):
    assert parse_angle(text) == pytest.approx(value, rel=1e-15)


@pytest.mark.parametrize("text", ["", "abc", "5pix", "pi/0"])
def test_parse_angle_rejects(text):
    with pytest.raises(ValueError):
        parse_angle(text)


def test_parse_scheme_variants():
    assert parse_scheme("constant") == Constant()
    c = parse_scheme("cosine:chi=1,omega=5pi")
    assert c.alpha == pytest.approx(5 * PI) and c.theta == 0.0
    c = parse_scheme("cosine:alpha=2,omega=4,theta=pi/2")
    assert (c.alpha, c.omega) == (2.0, 4.0) and c.theta == pytest.approx(PI / 2)
    assert parse_scheme("linear:beta=0.5") == Linear(0.5)


@pytest.mark.parametrize("scheme", [
    Constant(), Cosine(alpha=0.1 + 0.2, omega=5 * PI, theta=0.3), Linear(-1.0 / 3.0),
])
def test_format_parse_roundtrip(scheme):
    assert parse_scheme(format_scheme(scheme)) == scheme


@pytest.mark.parametrize("text,key", [
    ("cosine:chi=", "chi"),
    ("cosine:chi=1", "omega"),
        ("cosine:omega=abc,chi=1", "omega"),
    ("linear:", "beta"),
    ("linear:beta=1,gamma=2", "gamma"),
])
def test_parse_scheme_errors_name_the_key(text, key):
    with pytest.raises(SchemeParseError) as info:
        parse_scheme(text)
    assert info.value.key == key
    assert key in str(info.value)


def test_parse_scheme_rejects_alpha_with_chi():
    with pytest.raises(SchemeParseError) as info:
        parse_scheme("cosine:alpha=1,chi=1,omega=2")
    assert info.value.key in ("alpha", "chi")


def test_parse_scheme_unknown_kind():
    with pytest.raises(SchemeParseError):
        parse_scheme("sawtooth:a=1")

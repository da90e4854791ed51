import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dpsim.analytic import (MODELS, ExtrapolationError, RzParams, assemble_layout, limit_model_propagator,
                            limit_probability, model_propagator, rz_propagator, rz_propagator_flipped,
                            series_coefficient_check)
from dpsim.special import GammaDomainError
from dpsim.su2 import compose, resonant_propagator, transition_probability

pi = math.pi


def _rz_dense(alpha, tau, delta):
    # independent evaluation of the segment with mpmath and dense matrices
    mpmath.mp.dps = 25
    w = mpmath.mpf(1) / 2 * (1 - 1j * mpmath.mpf(alpha) * tau)
    a = mpmath.gamma(w) ** 2 / (mpmath.gamma(w - mpmath.mpf(delta) / 2) * mpmath.gamma(w + mpmath.mpf(delta) / 2))
    a = complex(a * mpmath.exp(-1j * mpmath.pi * alpha / 2))
    b = -1j * math.sin(pi * delta / 2) / math.cosh(pi * alpha * tau / 2)
    return np.array([[a, b], [-b.conjugate(), a.conjugate()]])


def _model_dense(model, alpha, tau, delta):
    r = lambda t: np.array([[math.cos(t), math.sin(t)], [-math.sin(t), math.cos(t)]])
    half = resonant_propagator(pi * alpha / 2).matrix()
    u1 = _rz_dense(alpha, tau, delta)
    u2 = u1 * np.array([[1, -1], [-1, 1]])
    core = {"A": u1, "B": u1, "BB": u2 @ u1, "NB": u1 @ u1}[model]
    m = r(-pi / 4) @ core @ r(pi / 4)
    if model != "A":
        m = half @ m
    if model in ("BB", "NB"):
        m = m @ half
    return m


def test_golden_segment():
    u = rz_propagator(RzParams(1.0, 0.1, 2 / 3))
    assert abs(u.a - complex(-0.080887660902413663338, -0.51152956244278764416)) < 1e-12
    assert abs(u.b - complex(0.0, -0.85544999448291912212)) < 1e-14
    assert u.unitarity_defect < 1e-12


@pytest.mark.parametrize("model", MODELS)
@pytest.mark.parametrize("alpha, tau, delta", [(1.0, 0.1, 2 / 3), (0.35, 0.3, 0.5), (2.7, 0.05, 2 / 3), (1.9, 0.2, 0.2)])
def test_model_matches_dense_oracle(model, alpha, tau, delta):
    u = model_propagator(model, RzParams(alpha, tau, delta))
    assert np.max(np.abs(u.matrix() - _model_dense(model, alpha, tau, delta))) < 1e-12


def test_no_pulse_is_free_evolution():
    u = rz_propagator(RzParams(0.8, 0.2, 0.0))
    assert u.b == 0
    assert abs(u.a - cmath.exp(-0.4j * pi)) < 1e-13


def test_short_pulse_limit():
    u = rz_propagator(RzParams(1.0, 1e-6, 0.5))
    # rotated-basis segment: cos(pi/4) up to the free phase e^{-i pi/2}
    assert abs(abs(u.a) - math.cos(pi / 4)) < 1e-5
    assert abs(u.b - (-1j * math.sin(pi / 4))) < 1e-5


@given(st.floats(0, 3), st.floats(0.01, 0.3), st.floats(-0.9, 0.9))
def test_flipped_segment(alpha, tau, delta):
    p = RzParams(alpha, tau, delta)
    u, v = rz_propagator(p), rz_propagator_flipped(p)
    assert v.a == u.a and v.b == -u.b
    assert (v @ u).unitarity_defect < 1e-12


def test_flipped_boundary_case():
    # delta = 1, tau -> small: |b| close to 1
    p = RzParams(1e-3, 1e-3, 0.999999)
    u = compose([rz_propagator(p), rz_propagator_flipped(p)])
    assert u.unitarity_defect < 1e-12


@given(st.sampled_from(MODELS), st.floats(0, 3), st.sampled_from([0.01, 0.05, 0.1, 0.2, 0.3]),
       st.sampled_from([0.5, 2 / 3]))
def test_models_unitary(model, alpha, tau, delta):
    assert model_propagator(model, RzParams(alpha, tau, delta)).unitarity_defect < 1e-10


@given(st.floats(0, 3), st.floats(0.01, 0.3))
def test_model_a_without_pulse_is_resonant(alpha, tau):
    p = transition_probability(model_propagator("A", RzParams(alpha, tau, 0.0)))
    assert p == pytest.approx(math.sin(pi * alpha / 2) ** 2, abs=1e-12)


@given(st.floats(0, 3), st.floats(0.01, 0.3), st.floats(0, 1))
def test_b_is_half_pulse_after_a(alpha, tau, delta):
    p = RzParams(alpha, tau, delta)
    b = model_propagator("B", p)
    ref = resonant_propagator(pi * alpha / 2) @ model_propagator("A", p)
    assert abs(transition_probability(b) - transition_probability(ref)) < 1e-13


def test_nb_inverts_in_short_pulse_limit():
    p = transition_probability(model_propagator("NB", RzParams(1.0, 1e-6, 2 / 3)))
    assert p == pytest.approx(1.0, abs=1e-6)


def test_bb_golden_at_finite_width():
    p = transition_probability(model_propagator("BB", RzParams(1.0, 0.05, 2 / 3)))
    assert p == pytest.approx(0.99829871754108823, abs=1e-12)


@pytest.mark.parametrize("model, alpha, delta, expected", [
    ("A", 1.0, 0.5, 0.5),
    ("B", 1.0, 2 / 3, 0.5),
    ("A", 0.3, 0.0, math.sin(0.15 * pi) ** 2),
])
def test_limit_probability_values(model, alpha, delta, expected):
    assert limit_probability(model, alpha, delta) == pytest.approx(expected, abs=1e-14)


def test_limit_probability_only_for_single_pulse_models():
    with pytest.raises(ValueError):
        limit_probability("BB", 1.0, 0.5)


@pytest.mark.parametrize("model", ["A", "B"])
def test_limit_probability_is_short_pulse_limit(model):
    for alpha in np.linspace(0, 3, 31):
        for delta in (0.5, 2 / 3):
            p = transition_probability(model_propagator(model, RzParams(alpha, 1e-6, delta)))
            assert abs(p - limit_probability(model, alpha, delta)) < 1e-4


@pytest.mark.parametrize("model", MODELS)
def test_limit_layout_is_short_pulse_limit(model):
    for alpha in np.linspace(0, 3, 13):
        a = transition_probability(model_propagator(model, RzParams(alpha, 1e-7, 2 / 3)))
        b = transition_probability(limit_model_propagator(model, alpha, 2 / 3))
        assert abs(a - b) < 1e-5


@pytest.mark.parametrize("model, delta, order, coefficient", [
    ("A", 0.5, 2, -pi ** 2 / 8),
    ("B", 2 / 3, 3, pi ** 3 / 16),
    ("BB", 0.0, 1, 3 * pi / 2),
    ("BB", 2 / 3, 3, None),
    ("NB", 2 / 3, 3, None),
])
def test_series_coefficients(model, delta, order, coefficient):
    c = series_coefficient_check(model, delta)
    assert c.order == order
    if coefficient is not None:
        assert c.coefficient == pytest.approx(coefficient, rel=1e-3)
    assert all(x < 1e-8 for x in c.lower_orders)


def test_series_no_nonzero_order():
    with pytest.raises(ExtrapolationError):
        series_coefficient_check("A", 1.0, max_order=2)


def test_assemble_layout_roundtrip():
    p = RzParams(1.4, 0.1, 0.5)
    assert assemble_layout("NB", rz_propagator(p), rz_propagator_flipped(p), 1.4).allclose(
        model_propagator("NB", p), atol=0)


def test_invalid_inputs():
    with pytest.raises(ValueError):
        RzParams(1.0, 0.0, 0.5)
    with pytest.raises(ValueError):
        RzParams(-1.0, 0.1, 0.5)
    with pytest.raises(ValueError):
        model_propagator("C", RzParams(1.0, 0.1, 0.5))
    with pytest.raises(GammaDomainError):
        rz_propagator(RzParams(0.0, 0.1, 1.0))

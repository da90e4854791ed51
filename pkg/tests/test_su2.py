import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from dpsim import (Propagator2, StateVector, compose, constant_propagator, resonant_propagator, rotation,
                   transition_probability, with_phase)

angles = st.floats(-20, 20, allow_nan=False)
small = st.floats(-5, 5, allow_nan=False)


@st.composite
def propagators(draw):
    theta = draw(st.floats(0, math.pi / 2))
    pa, pb = draw(angles), draw(angles)
    return Propagator2(math.cos(theta) * cmath.exp(1j * pa), math.sin(theta) * cmath.exp(1j * pb))


def _hamiltonian(omega, detuning):
    return 0.5 * np.array([[-detuning, omega], [omega, detuning]], dtype=complex)


@given(small, small, st.floats(0, 10))
def test_constant_propagator_matches_matrix_exponential(omega, detuning, duration):
    u = constant_propagator(omega, detuning, duration)
    ref = expm(-1j * duration * _hamiltonian(omega, detuning))
    assert np.max(np.abs(u.matrix() - ref)) < 1e-11


@given(propagators(), propagators())
def test_product_is_matrix_product(u, v):
    assert np.max(np.abs((u @ v).matrix() - u.matrix() @ v.matrix())) < 1e-13


@given(propagators(), propagators(), propagators())
def test_associativity(u, v, w):
    assert ((u @ v) @ w).allclose(u @ (v @ w), atol=1e-13)


@given(st.lists(propagators(), min_size=1, max_size=12))
def test_products_stay_unitary(props):
    assert compose(props).unitarity_defect < 1e-12


@given(propagators())
def test_dagger_inverts(u):
    assert (u @ u.dagger()).allclose(Propagator2.identity(), atol=1e-13)


def test_compose_is_chronological():
    u1 = resonant_propagator(0.3)
    u2 = with_phase(resonant_propagator(1.1), 0.7)
    assert compose([u1, u2]).allclose(u2 @ u1)


def test_compose_accepts_rotation_matrices():
    # a real rotation is itself of Cayley-Klein form
    r = rotation(math.pi / 4)
    total = compose([rotation(-math.pi / 4), resonant_propagator(1.0), r])
    ref = r @ resonant_propagator(1.0).matrix() @ rotation(-math.pi / 4)
    assert np.max(np.abs(total.matrix() - ref)) < 1e-14


def test_compose_rejects_non_ck_matrix():
    with pytest.raises(ValueError, match="Cayley-Klein"):
        compose([np.diag([1.0, 2.0])])


def test_compose_empty():
    with pytest.raises(ValueError):
        compose([])


def test_non_finite_parameters_rejected():
    with pytest.raises(ValueError):
        Propagator2(float("nan"), 0)
    with pytest.raises(ValueError):
        rotation(float("inf"))


@pytest.mark.parametrize("area, p", [(math.pi, 1.0), (math.pi / 2, 0.5), (2 * math.pi, 0.0), (0.0, 0.0)])
def test_resonant_pulse(area, p):
    assert transition_probability(resonant_propagator(area)) == pytest.approx(p, abs=1e-15)


@given(propagators(), angles)
def test_phase_shift_keeps_probability(u, phi):
    assert transition_probability(with_phase(u, phi)) == pytest.approx(transition_probability(u), abs=1e-14)


def test_phase_shift_is_coupling_phase():
    # Omega -> Omega e^{i phi}: H12 gains e^{i phi}
    omega, det, t, phi = 0.8, 0.3, 2.0, 0.9
    h = _hamiltonian(omega, det)
    h[0, 1] *= cmath.exp(1j * phi)
    h[1, 0] *= cmath.exp(-1j * phi)
    u = with_phase(constant_propagator(omega, det, t), phi)
    assert np.max(np.abs(u.matrix() - expm(-1j * t * h))) < 1e-12


def test_apply_and_populations():
    s = resonant_propagator(math.pi / 2).apply(StateVector(1, 0))
    assert s.norm == pytest.approx(1.0)
    p1, p2 = s.populations()
    assert p1 == pytest.approx(0.5) and p2 == pytest.approx(0.5)


def test_allclose_up_to_phase():
    u = resonant_propagator(1.2)
    v = Propagator2(-u.a, -u.b)
    assert not u.allclose(v)
    assert u.allclose(v, up_to_phase=True)

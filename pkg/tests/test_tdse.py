import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dpsim.analytic import RzParams, model_propagator, rz_propagator
from dpsim.phases import bb_phases
from dpsim.su2 import Propagator2, constant_propagator, resonant_propagator, transition_probability
from dpsim.tdse import (IntegrationError, IntegratorConfig, propagate, propagate_interaction,
                        propagate_with_diagnostics, rz_segment_numeric)
from dpsim.waveforms import (HamiltonianSampler, PulseShapeKind, SequenceSpec, ShapedPulse, build_sequence,
                             model_sequence, sample)

pi = math.pi
INTERACTION = IntegratorConfig(picture="interaction")


@pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0, 2.3])
def test_constant_rabi(alpha):
    u = propagate(sample(SequenceSpec(1, alpha)))
    assert u.allclose(resonant_propagator(alpha * pi), atol=1e-8)


def test_constant_detuned():
    u = propagate(HamiltonianSampler(0.7, 0.4, 0.0, 5.0))
    assert u.allclose(constant_propagator(0.7, 0.4, 5.0), atol=1e-8)


def test_zero_hamiltonian_is_identity():
    for cfg in (None, INTERACTION):
        assert propagate(HamiltonianSampler(0.0, 0.0, 0.0, 3.0), cfg).allclose(Propagator2.identity(), atol=1e-14)


def test_case_a_matches_closed_form():
    u = propagate(sample(model_sequence("A", 1.0, 0.1, 0.5)))
    assert u.allclose(model_propagator("A", RzParams(1.0, 0.1, 0.5)), atol=1e-6, up_to_phase=True)


@pytest.mark.parametrize("alpha, tau, delta", [(1.0, 0.1, 2 / 3), (0.3, 0.3, 0.5), (2.6, 0.01, 0.5), (1.7, 0.2, -0.4)])
def test_segment_oracle_matches_closed_form(alpha, tau, delta):
    num = rz_segment_numeric(alpha, tau, delta)
    ref = rz_propagator(RzParams(alpha, tau, delta))
    assert num.allclose(ref, atol=1e-9)


def test_pictures_agree_bb3():
    s = sample(build_sequence(bb_phases(3), 1.1, 0.05))
    p1 = transition_probability(propagate(s))
    p2 = transition_probability(propagate(s, INTERACTION))
    assert abs(p1 - p2) < 1e-8


def test_pictures_agree_delta_like_pulse():
    s = sample(build_sequence(bb_phases(3), 0.9, 0.002))
    p1 = transition_probability(propagate(s))
    p2 = transition_probability(propagate(s, INTERACTION))
    assert abs(p1 - p2) < 1e-7


def test_fixed_step_convergence_order():
    ref = model_propagator("A", RzParams(3.0, 0.01, 0.5))
    errs = []
    for h in (0.2, 0.1):
        u = propagate(sample(model_sequence("A", 3.0, 0.01, 0.5)), IntegratorConfig(fixed_step=True, max_step=h))
        errs.append(max(abs(u.a - ref.a), abs(u.b - ref.b)))
    assert errs[0] / errs[1] >= 2 ** 4


@pytest.mark.parametrize("cfg", [None, INTERACTION])
def test_time_splitting_composes(cfg):
    pulses = build_sequence((0.0, 1.9, 0.4), 1.2, 0.05, PulseShapeKind.GAUSSIAN, 0.3).pulses
    end, mid = 3 * pi, 1.3 * pi
    whole = propagate(HamiltonianSampler(1.2, 0.3, 0.0, end, pulses), cfg)
    first = propagate(HamiltonianSampler(1.2, 0.3, 0.0, mid, pulses), cfg)
    second = propagate(HamiltonianSampler(1.2, 0.3, mid, end, pulses), cfg)
    assert (second @ first).allclose(whole, atol=1e-9)


sequences = st.builds(
    lambda phases, alpha, tau, kind, det: build_sequence(phases, alpha, tau, kind, det),
    st.lists(st.floats(-4, 4), min_size=1, max_size=5),
    st.floats(0, 3), st.floats(0.005, 0.3), st.sampled_from(list(PulseShapeKind)), st.floats(-1, 1))


@given(sequences)
def test_unitarity_every_integration(spec):
    for cfg in (None, INTERACTION):
        u, diag = propagate_with_diagnostics(sample(spec), cfg)
        assert diag.drift <= 1e-8
        assert u.unitarity_defect <= 1e-8


def test_deterministic():
    s = sample(build_sequence(bb_phases(5), 0.95, 0.03, "lorentzian"))
    assert propagate(s) == propagate(s)


def test_step_budget():
    with pytest.raises(IntegrationError, match="budget"):
        propagate(sample(build_sequence(bb_phases(3), 1.0, 0.05)), IntegratorConfig(max_steps=10))


def test_underflow_reports_location():
    # tolerances below double-precision roundoff can never be met
    s = sample(build_sequence(bb_phases(5), 0.9, 0.01, "rect", static_detuning=0.2))
    with pytest.raises(IntegrationError, match=r"underflow at t="):
        propagate(s, IntegratorConfig(rel_tol=1e-13, abs_tol=1e-15))


@pytest.mark.parametrize("kwargs", [dict(rel_tol=0.0), dict(abs_tol=0.1), dict(max_step=0.0), dict(picture="heisenberg")])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        IntegratorConfig(**kwargs)


def test_coupling_pulse_window():
    # a detuning pulse sequence at zero Rabi frequency only adds phases
    u = propagate(sample(SequenceSpec(2, 0.0, (ShapedPulse("sech", pi, 0.05, 1.0),))))
    assert transition_probability(u) < 1e-20
    assert abs(abs(u.a) - 1) < 1e-12


@pytest.mark.parametrize("kind, static", [("sech", 0.0), ("gaussian", 0.3)])
def test_against_scipy_dop853(kind, static):
    from scipy.integrate import solve_ivp

    s = sample(build_sequence(bb_phases(3), 1.3, 0.05, kind, static))

    def rhs(t, y):
        om, de = s(t)
        c1, c2 = y[0] + 1j * y[1], y[2] + 1j * y[3]
        d1 = -0.5j * (-de * c1 + om * c2)
        d2 = -0.5j * (om * c1 + de * c2)
        return [d1.real, d1.imag, d2.real, d2.imag]

    y = np.array([1.0, 0.0, 0.0, 0.0])
    pts = s.event_points()
    for a, b in zip(pts[:-1], pts[1:]):
        y = solve_ivp(rhs, (a, b), y, method="DOP853", rtol=1e-12, atol=1e-14, max_step=0.005).y[:, -1]
    u = propagate(s)
    assert abs(u.a - complex(y[0], y[1])) < 1e-9
    assert abs(-u.b.conjugate() - complex(y[2], y[3])) < 1e-9

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from dpsim.phases import bb_phases
from dpsim.waveforms import (CATALAN, PulseShapeKind, SequenceSpec, ShapedPulse, build_sequence, envelope,
                             mean_abs_offset, model_sequence, sample, spec_from_text, spec_to_text)

KINDS = list(PulseShapeKind)
pi = math.pi


def _quad_area(env):
    # piecewise adaptive quadrature, split so peaks and edges are resolved
    lo, hi = env.support
    pts = np.concatenate([np.linspace(lo, -50 * env.tau, 4), np.linspace(-50 * env.tau, 50 * env.tau, 201)[1:-1],
                          np.linspace(50 * env.tau, hi, 4)]) if hi > 50 * env.tau else np.linspace(lo, hi, 201)
    return sum(quad(env, a, b, epsabs=1e-14, epsrel=1e-13, limit=200)[0] for a, b in zip(pts[:-1], pts[1:]))


@pytest.mark.parametrize("kind", KINDS)
def test_unit_area_by_quadrature(kind):
    assert _quad_area(envelope(kind, 0.05)) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("tau", [0.005, 0.03, 0.3])
def test_pulse_area_by_quadrature(kind, tau):
    p = ShapedPulse(kind, 0.0, tau, -1.7)
    assert p.area * _quad_area(p.envelope) == pytest.approx(-1.7, abs=1e-9)


@pytest.mark.parametrize("kind", KINDS)
def test_cumulative_matches_quadrature(kind):
    env = envelope(kind, 0.07)
    for t in (-0.3, -0.01, 0.0, 0.05, 0.2):
        lo = env.support[0]
        ref = quad(env, lo, min(t, env.support[1]), points=[0.0] if lo < 0 < t else None, limit=400)[0]
        assert env.cumulative(t) == pytest.approx(ref, abs=1e-10)
    assert env.cumulative(-1e9) == 0.0 and env.cumulative(1e9) == pytest.approx(1.0, abs=1e-15)


def test_shapes_and_supports():
    tau = 0.05
    assert envelope("sech", tau).peak == pytest.approx(1 / (pi * tau), rel=1e-12)
    assert envelope("rect", tau).peak == pytest.approx(1 / (pi * tau), rel=1e-14)
    lo, hi = envelope("rectangular", tau).support
    assert hi - lo == pytest.approx(pi * tau)
    assert envelope("gaussian", tau).support == (-10 * tau, 10 * tau)
    assert envelope("lorentzian", tau).support == pytest.approx((-200 * tau, 200 * tau))
    assert envelope("sech", tau)(41 * tau) == 0.0


@pytest.mark.parametrize("kind", ["sech", "gaussian"])
def test_truncation_renormalization_small(kind):
    assert abs(envelope(kind, 0.1).norm - 1) < 1e-8


def test_lorentzian_renormalization():
    assert envelope("lorentzian", 0.1).norm == pytest.approx(2 * math.atan(200) / pi, rel=1e-14)


@pytest.mark.parametrize("kind", KINDS)
def test_mean_abs_offset(kind):
    env = envelope(kind, 0.1)
    lo, hi = env.support
    ref = 2 * quad(lambda t: t * env(t), 0, hi, limit=400)[0]
    assert mean_abs_offset(kind, 0.1) == pytest.approx(ref, rel=1e-8)


def test_catalan():
    assert CATALAN == pytest.approx(sum((-1) ** k / (2 * k + 1) ** 2 for k in range(200000)), abs=1e-10)


def test_parse():
    assert PulseShapeKind.parse("S") is PulseShapeKind.SECH
    assert PulseShapeKind.parse("gauss") is PulseShapeKind.GAUSSIAN
    with pytest.raises(ValueError, match="unknown pulse shape"):
        PulseShapeKind.parse("triangle")


@pytest.mark.parametrize("tau", [0.0, -0.1, float("nan")])
def test_bad_width(tau):
    with pytest.raises(ValueError):
        envelope("sech", tau)


def test_bb3_sequence():
    spec = build_sequence(bb_phases(3), 1.0, 0.05)
    assert spec.duration == pytest.approx(3 * pi)
    assert [p.center for p in spec.pulses] == pytest.approx([pi, 2 * pi])
    assert [p.area for p in spec.pulses] == pytest.approx([2 * pi / 3, -2 * pi / 3])


def test_single_segment_has_no_pulses():
    s = sample(build_sequence((0.0,), 1.0, 0.05, static_detuning=0.3))
    om, de = s(np.linspace(0, pi, 7))
    assert np.all(om == 1.0) and np.all(de == 0.3)


def test_case_a_layout():
    spec = model_sequence("A", 1.0, 0.05, 0.5)
    assert spec.duration == pytest.approx(pi)
    (p,) = spec.pulses
    assert p.center == pytest.approx(pi / 2) and p.area == pytest.approx(pi / 2)
    assert model_sequence("B", 1.0, 0.05, 0.5).duration == pytest.approx(1.5 * pi)
    assert [q.area for q in model_sequence("NB", 1.0, 0.05, 2 / 3).pulses] == pytest.approx([2 * pi / 3] * 2)


def test_sampler_values():
    tau = 0.01
    s = sample(build_sequence(bb_phases(3), 0.9, tau, static_detuning=0.2))
    assert s(pi)[1] == pytest.approx(0.2 + (2 * pi / 3) / (pi * tau), rel=1e-12)
    assert abs(s(1.5 * pi)[1] - 0.2) < 1e-10
    assert s(2.0)[0] == 0.9
    assert s(-0.1) == (0.0, 0.0) and s(10.0) == (0.0, 0.0)


@given(st.sampled_from(KINDS), st.floats(0.005, 0.3))
def test_detuning_integral_counts_full_area(kind, tau):
    spec = SequenceSpec(2, 0.0, (ShapedPulse(kind, pi, tau, 1.3),), 0.4, duration=2 * pi + 400 * tau)
    s = sample(spec)
    if envelope(kind, tau).half_width <= pi:
        assert s.detuning_integral(s.t_end) == pytest.approx(0.4 * spec.duration + 1.3, abs=1e-10)


def test_event_points_include_edges():
    s = sample(build_sequence(bb_phases(3), 1.0, 0.05, "rect"))
    pts = s.event_points()
    for c in (pi, 2 * pi):
        for x in (c - pi * 0.025, c, c + pi * 0.025):
            assert np.min(np.abs(pts - x)) < 1e-15


def test_sequence_validation():
    with pytest.raises(ValueError):
        SequenceSpec(0, 1.0)
    with pytest.raises(ValueError):
        SequenceSpec(1, 1.0, (ShapedPulse("sech", 4.0, 0.1, 1.0),))
    with pytest.raises(ValueError):
        SequenceSpec(1, 1.0, rabi_shape="gaussian")
    with pytest.raises(ValueError):
        build_sequence((), 1.0, 0.1)


def test_text_round_trip():
    spec = build_sequence((0.0, 2.6, 0.7, 2.6, 0.0), 1.1, 0.037, "lorentzian", static_detuning=-0.25)
    back = spec_from_text(spec_to_text(spec))
    assert back == spec


def test_text_parse_errors():
    assert spec_from_text("# header\nn_segments=1\n\nalpha=1.0  # Rabi\n").alpha == 1.0
    with pytest.raises(ValueError, match="line 2"):
        spec_from_text("n_segments=1\nalpha\n")
    with pytest.raises(ValueError, match="line 3"):
        spec_from_text("n_segments=1\nalpha=1\npulse=sech,1.0\n")
    with pytest.raises(ValueError, match="missing"):
        spec_from_text("alpha=1\n")

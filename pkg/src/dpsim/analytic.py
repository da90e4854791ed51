"""Closed-form propagators of the inverted Rosen-Zener layouts.

Constant Rabi frequency alpha with sech detuning pulses of width tau and
area pi*delta. In the basis rotated by pi/4 each pulse segment is a
Rosen-Zener problem with a known exact solution. Four layouts are provided:

* A  - one segment with the pulse in its middle;
* B  - A followed by a resonant half segment;
* BB - half segment, two segments with pulses of opposite sign, half segment;
* NB - as BB with both pulses of the same sign.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from dpsim.phases import cp_limit_propagator
from dpsim.special import gamma_ratio_rz
from dpsim.su2 import Propagator2, compose, resonant_propagator, rotation, transition_probability

MODELS = ("A", "B", "BB", "NB")


@dataclass(frozen=True)
class RzParams:
    """alpha: Rabi area scale; tau: pulse width (T/pi); delta: Delta_0 * tau."""

    alpha: float
    tau: float
    delta: float

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not self.alpha >= 0:
            raise ValueError(f"alpha must be non-negative, got {self.alpha}")

    @property
    def peak_detuning(self) -> float:
        return self.delta / self.tau


def _model_name(model: str) -> str:
    m = str(model).upper()
    if m not in MODELS:
        raise ValueError(f"unknown model {model!r}; expected one of {', '.join(MODELS)}")
    return m


def rz_propagator(p: RzParams) -> Propagator2:
    """Exact segment propagator in the rotated basis (symmetric representation)."""
    a = gamma_ratio_rz(p.alpha, p.tau, p.delta)
    b = -1j * math.sin(0.5 * math.pi * p.delta) / math.cosh(0.5 * math.pi * p.alpha * p.tau)
    return Propagator2(a, b)


def rz_propagator_flipped(p: RzParams) -> Propagator2:
    """Segment with the detuning pulse sign reversed: b -> -b."""
    u = rz_propagator(p)
    return Propagator2(u.a, -u.b)


def _sandwich(segments: list[Propagator2], alpha: float, half_before: bool, half_after: bool) -> Propagator2:
    half = resonant_propagator(0.5 * math.pi * alpha)
    chain = ([half] if half_before else []) + [rotation(math.pi / 4)] + segments + [rotation(-math.pi / 4)]
    if half_after:
        chain.append(half)
    return compose(chain)


def assemble_layout(model: str, u1: Propagator2, u2: Propagator2, alpha: float) -> Propagator2:
    """Place segment propagators into a layout.

    A  = R(-pi/4) U1 R(pi/4)
    B  = U_half A
    BB = U_half R(-pi/4) U2 U1 R(pi/4) U_half
    NB = U_half R(-pi/4) U1 U1 R(pi/4) U_half
    with U_half the resonant pulse of area pi*alpha/2 and U2 the segment
    with the reversed pulse. ``u2`` is used by BB only.
    """
    model = _model_name(model)
    if model == "A":
        return _sandwich([u1], alpha, False, False)
    if model == "B":
        return _sandwich([u1], alpha, False, True)
    if model == "BB":
        return _sandwich([u1, u2], alpha, True, True)
    return _sandwich([u1, u1], alpha, True, True)


def model_propagator(model: str, p: RzParams) -> Propagator2:
    """Total closed-form propagator of layout A, B, BB or NB."""
    return assemble_layout(model, rz_propagator(p), rz_propagator_flipped(p), p.alpha)


def limit_probability(model: str, alpha: float, delta: float) -> float:
    """Zero-width transition probability of layouts A and B."""
    model = _model_name(model)
    c2 = math.cos(0.5 * math.pi * delta) ** 2
    if model == "A":
        return c2 * math.sin(0.5 * math.pi * alpha) ** 2
    if model == "B":
        return (1 - c2) * math.sin(0.25 * math.pi * alpha) ** 2 + c2 * math.sin(0.75 * math.pi * alpha) ** 2
    raise ValueError("closed-form limit probability exists for models A and B only")


def limit_layout(model: str, delta: float) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """(phases, segment durations) of a layout with zero-width pulses."""
    model = _model_name(model)
    jump = math.pi * delta
    h, full = 0.5 * math.pi, math.pi
    if model == "A":
        return (0.0, jump), (h, h)
    if model == "B":
        return (0.0, jump, jump), (h, h, h)
    if model == "BB":
        return (0.0, jump, 0.0), (full, full, full)
    return (0.0, jump, 2 * jump), (full, full, full)


def limit_model_propagator(model: str, alpha: float, delta: float) -> Propagator2:
    """Layout propagator in the zero-width limit, as a composite pulse."""
    phases, durations = limit_layout(model, delta)
    return cp_limit_propagator(phases, alpha, 0.0, durations)


# -- leading-order analysis around the nominal point --------------------------

@dataclass(frozen=True)
class SeriesCoefficient:
    order: int
    coefficient: float
    lower_orders: tuple[float, ...]  # |coefficient| estimates below ``order``
    residual: float  # last Richardson correction at ``order``


class ExtrapolationError(RuntimeError):
    pass


# Central-difference stencils for the k-th derivative, offsets -m..m.
_STENCILS = {
    1: (np.array([-1, 0, 1]), np.array([-0.5, 0.0, 0.5])),
    2: (np.array([-1, 0, 1]), np.array([1.0, -2.0, 1.0])),
    3: (np.array([-2, -1, 0, 1, 2]), np.array([-0.5, 1.0, 0.0, -1.0, 0.5])),
    4: (np.array([-2, -1, 0, 1, 2]), np.array([1.0, -4.0, 6.0, -4.0, 1.0])),
}

RICHARDSON_STEPS = (1e-2, 5e-3, 2.5e-3)


def _series_quantity(model: str, delta: float):
    if model in ("A", "B"):
        return 1.0, lambda a: transition_probability(limit_model_propagator(model, a, delta)) - 0.5
    if model == "BB":
        return 1.0, lambda a: limit_model_propagator(model, a, delta).a
    return 2.0, lambda a: limit_model_propagator(model, a, delta).b


def taylor_coefficient(f, x0: float, order: int, steps=RICHARDSON_STEPS) -> tuple[complex, float]:
    """f^(order)(x0)/order! by central differences, Richardson-extrapolated.

    The step sequence halves, and the stencil error is even in the step, so
    two extrapolation levels remove the h^2 and h^4 terms. Returns the
    estimate and the magnitude of the last correction.
    """
    offsets, weights = _STENCILS[order]
    table = []
    for h in steps:
        vals = [f(x0 + int(o) * h) for o, w in zip(offsets, weights) if w != 0.0]
        ws = [w for w in weights if w != 0.0]
        table.append(sum(w * v for w, v in zip(ws, vals)) / h ** order)
    residual = 0.0
    for level in (1, 2):
        factor = 4.0 ** level
        new = [(factor * table[i + 1] - table[i]) / (factor - 1) for i in range(len(table) - 1)]
        residual = abs(new[-1] - table[-1])
        table = new
    return table[-1] / math.factorial(order), residual


def series_coefficient_check(model: str, delta: float, threshold: float = 1e-6,
                             max_order: int = 4) -> SeriesCoefficient:
    """Leading nonvanishing Taylor order of the error quantity near the nominal point.

    Quantities (zero-width limit, alpha = alpha0 + eps): P - 1/2 for A and B
    (alpha0 = 1), U_11 for BB (alpha0 = 1), U_12 for NB (alpha0 = 2). For
    BB and NB the coefficient is reported as a magnitude.
    """
    model = _model_name(model)
    alpha0, f = _series_quantity(model, delta)
    lower = []
    for order in range(1, max_order + 1):
        c, residual = taylor_coefficient(f, alpha0, order)
        if abs(c) > threshold:
            if residual > 1e-3 * abs(c) + 1e-9:
                raise ExtrapolationError(
                    f"order-{order} coefficient {c} did not converge (residual {residual:.3e})")
            coeff = float(c.real) if model in ("A", "B") else float(abs(c))
            return SeriesCoefficient(order, coeff, tuple(lower), residual)
        lower.append(float(abs(c)))
    raise ExtrapolationError(
        f"no coefficient above {threshold} up to order {max_order}; estimates {lower}")

"""Detuning-pulse shapes and the time-dependent controls (Omega(t), Delta(t)).

Every envelope g(t; tau) has unit area on a finite support and is
renormalized after truncation, so a pulse ``area * g(t - center)`` carries
exactly ``area`` of detuning phase.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import erf

from dpsim.phases import phases_to_areas


class PulseShapeKind(enum.Enum):
    SECH = "sech"
    GAUSSIAN = "gaussian"
    LORENTZIAN = "lorentzian"
    RECTANGULAR = "rectangular"

    @classmethod
    def parse(cls, value) -> "PulseShapeKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"s": "sech", "g": "gaussian", "gauss": "gaussian", "l": "lorentzian",
                   "lorentz": "lorentzian", "r": "rectangular", "rect": "rectangular"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise ValueError(f"unknown pulse shape {value!r}") from None

    @property
    def code(self) -> int:
        return _KIND_CODES[self]


_KIND_CODES = {
    PulseShapeKind.SECH: 0,
    PulseShapeKind.GAUSSIAN: 1,
    PulseShapeKind.LORENTZIAN: 2,
    PulseShapeKind.RECTANGULAR: 3,
}

# Truncation half-widths in units of tau.
SECH_CUTOFF = 40.0
GAUSSIAN_CUTOFF = 10.0
LORENTZIAN_CUTOFF = 200.0


def _gd(x):
    """Gudermannian function, an antiderivative of sech."""
    return 2.0 * np.arctan(np.tanh(0.5 * np.asarray(x, dtype=float)))


@dataclass(frozen=True)
class Envelope:
    """Unit-area pulse envelope centered at t = 0 on [-half_width, half_width]."""

    kind: PulseShapeKind
    tau: float
    half_width: float
    norm: float  # area of the untruncated form over the support

    def _raw(self, t):
        tau = self.tau
        if self.kind is PulseShapeKind.SECH:
            return 1.0 / (np.cosh(t / tau) * math.pi * tau)
        if self.kind is PulseShapeKind.GAUSSIAN:
            return np.exp(-0.5 * (t / tau) ** 2) / (tau * math.sqrt(2 * math.pi))
        if self.kind is PulseShapeKind.LORENTZIAN:
            return tau / (math.pi * (t * t + tau * tau))
        return np.full_like(t, 1.0 / (math.pi * tau))

    def _raw_cdf(self, t):
        tau = self.tau
        if self.kind is PulseShapeKind.SECH:
            return _gd(t / tau) / math.pi
        if self.kind is PulseShapeKind.GAUSSIAN:
            return 0.5 * erf(t / (tau * math.sqrt(2.0)))
        if self.kind is PulseShapeKind.LORENTZIAN:
            return np.arctan(t / tau) / math.pi
        return t / (math.pi * tau)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        inside = np.abs(t) <= self.half_width
        out = np.where(inside, self._raw(np.where(inside, t, 0.0)) / self.norm, 0.0)
        return out if out.ndim else float(out)

    def cumulative(self, t):
        """Integral of the envelope from -infinity to t (0 before, 1 after)."""
        t = np.clip(np.asarray(t, dtype=float), -self.half_width, self.half_width)
        out = (self._raw_cdf(t) - self._raw_cdf(-self.half_width)) / self.norm
        return out if out.ndim else float(out)

    @property
    def peak(self) -> float:
        return float(self(0.0))

    @property
    def support(self) -> tuple[float, float]:
        return -self.half_width, self.half_width


def envelope(kind, tau: float) -> Envelope:
    """Unit-area envelope of the given shape and width tau (units T/pi).

    sech(t/tau)/(pi tau) cut at 40 tau; Gaussian of standard deviation tau
    cut at 10 tau; Lorentzian of half-width tau cut at 200 tau; rectangle
    of height 1/(pi tau) and width pi tau. Each is rescaled to unit area
    over its support.
    """
    kind = PulseShapeKind.parse(kind)
    if not (tau > 0 and math.isfinite(tau)):
        raise ValueError(f"pulse width tau must be positive, got {tau}")
    half = {
        PulseShapeKind.SECH: SECH_CUTOFF * tau,
        PulseShapeKind.GAUSSIAN: GAUSSIAN_CUTOFF * tau,
        PulseShapeKind.LORENTZIAN: LORENTZIAN_CUTOFF * tau,
        PulseShapeKind.RECTANGULAR: 0.5 * math.pi * tau,
    }[kind]
    probe = Envelope(kind, tau, half, 1.0)
    norm = float(probe._raw_cdf(half) - probe._raw_cdf(-half))
    return Envelope(kind, tau, half, norm)


CATALAN = 0.915965594177219015


def mean_abs_offset(kind, tau: float) -> float:
    """First absolute moment of the unit-area envelope, integral |t| g(t) dt.

    Sets the leading finite-width correction of a pulse; matching it
    across shapes makes their profiles agree to first order in tau.
    """
    kind = PulseShapeKind.parse(kind)
    if kind is PulseShapeKind.SECH:
        return 4.0 * CATALAN * tau / math.pi
    if kind is PulseShapeKind.GAUSSIAN:
        return tau * math.sqrt(2.0 / math.pi)
    if kind is PulseShapeKind.LORENTZIAN:
        c = LORENTZIAN_CUTOFF
        return tau * math.log1p(c * c) / (2.0 * math.atan(c))
    return 0.25 * math.pi * tau


@dataclass(frozen=True)
class ShapedPulse:
    """One detuning pulse: area * g(t - center; tau)."""

    kind: PulseShapeKind
    center: float
    tau: float
    area: float

    def __post_init__(self):
        object.__setattr__(self, "kind", PulseShapeKind.parse(self.kind))
        if not (self.tau > 0 and math.isfinite(self.tau)):
            raise ValueError(f"pulse width tau must be positive, got {self.tau}")
        if not (math.isfinite(self.center) and math.isfinite(self.area)):
            raise ValueError("pulse center and area must be finite")

    @property
    def envelope(self) -> Envelope:
        return envelope(self.kind, self.tau)

    @property
    def peak_detuning(self) -> float:
        """Delta_0 of the pulse, area times the envelope peak."""
        return self.area * self.envelope.peak


@dataclass(frozen=True)
class SequenceSpec:
    """Constant Rabi frequency alpha over ``duration`` plus detuning pulses.

    ``duration`` defaults to n_segments * pi; the half-segment layouts of
    the single-pulse models set it explicitly.
    """

    n_segments: int
    alpha: float
    pulses: tuple[ShapedPulse, ...] = ()
    static_detuning: float = 0.0
    duration: float | None = None
    rabi_shape: str = "constant"

    def __post_init__(self):
        if int(self.n_segments) != self.n_segments or self.n_segments < 1:
            raise ValueError(f"n_segments must be a positive integer, got {self.n_segments}")
        if self.rabi_shape != "constant":
            raise ValueError("only a constant Rabi frequency is supported")
        if not math.isfinite(self.alpha) or not math.isfinite(self.static_detuning):
            raise ValueError("alpha and static_detuning must be finite")
        object.__setattr__(self, "pulses", tuple(self.pulses))
        if self.duration is None:
            object.__setattr__(self, "duration", self.n_segments * math.pi)
        if not self.duration > 0:
            raise ValueError("duration must be positive")
        for p in self.pulses:
            if not 0.0 <= p.center <= self.duration:
                raise ValueError(f"pulse center {p.center} outside [0, {self.duration}]")


def build_sequence(phases: Sequence[float], alpha: float, tau: float, kind=PulseShapeKind.SECH,
                   static_detuning: float = 0.0, normalize_areas: bool = False) -> SequenceSpec:
    """Detuning-pulse realization of a composite phase list.

    N segments of length pi at constant Rabi alpha; pulse k (area
    phases[k+1] - phases[k]) is centered on the boundary t = k pi.
    """
    phases = list(phases)
    if not phases:
        raise ValueError("phase list must not be empty")
    areas = phases_to_areas(phases, normalize=normalize_areas)
    kind = PulseShapeKind.parse(kind)
    pulses = tuple(ShapedPulse(kind, (k + 1) * math.pi, tau, area) for k, area in enumerate(areas))
    return SequenceSpec(len(phases), alpha, pulses, static_detuning)


def model_sequence(model: str, alpha: float, tau: float, delta: float, kind=PulseShapeKind.SECH,
                   static_detuning: float = 0.0) -> SequenceSpec:
    """Waveform of the single- and two-pulse Rosen-Zener layouts.

    A: one segment, pulse of area pi*delta at pi/2.
    B: as A followed by a resonant half segment (duration 3pi/2).
    BB: three segments, pulses +pi*delta at pi and -pi*delta at 2pi.
    NB: as BB with both pulses +pi*delta.
    """
    model = model.upper()
    area = math.pi * delta
    kind = PulseShapeKind.parse(kind)
    if model == "A":
        return SequenceSpec(1, alpha, (ShapedPulse(kind, 0.5 * math.pi, tau, area),), static_detuning)
    if model == "B":
        return SequenceSpec(1, alpha, (ShapedPulse(kind, 0.5 * math.pi, tau, area),), static_detuning,
                            duration=1.5 * math.pi)
    if model in ("BB", "NB"):
        second = -area if model == "BB" else area
        pulses = (ShapedPulse(kind, math.pi, tau, area), ShapedPulse(kind, 2 * math.pi, tau, second))
        return SequenceSpec(3, alpha, pulses, static_detuning)
    raise ValueError(f"unknown model {model!r}; expected A, B, BB or NB")


@dataclass(frozen=True)
class HamiltonianSampler:
    """t -> (Omega(t), Delta(t)) for H = 1/2 [[-Delta, Omega], [Omega, Delta]].

    Both channels are a constant plus a sum of shaped pulses on
    [t_start, t_end]; outside that window both vanish. Coupling pulses
    are only used by the rotated-basis Rosen-Zener oracle.
    """

    omega: float
    detuning: float
    t_start: float
    t_end: float
    detuning_pulses: tuple[ShapedPulse, ...] = ()
    coupling_pulses: tuple[ShapedPulse, ...] = ()
    _env: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.t_end > self.t_start:
            raise ValueError("empty time window")
        for p in self.detuning_pulses + self.coupling_pulses:
            self._env[p] = p.envelope

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start

    def _channel(self, t, const, pulses):
        val = np.full_like(t, const, dtype=float)
        for p in pulses:
            val = val + p.area * self._env[p](t - p.center)
        return val

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        inside = (t >= self.t_start) & (t <= self.t_end)
        om = np.where(inside, self._channel(t, self.omega, self.coupling_pulses), 0.0)
        de = np.where(inside, self._channel(t, self.detuning, self.detuning_pulses), 0.0)
        if om.ndim == 0:
            return float(om), float(de)
        return om, de

    def detuning_integral(self, t):
        """D(t): integral of Delta from t_start to t."""
        t = np.clip(np.asarray(t, dtype=float), self.t_start, self.t_end)
        d = self.detuning * (t - self.t_start)
        for p in self.detuning_pulses:
            env = self._env[p]
            d = d + p.area * (env.cumulative(t - p.center) - env.cumulative(self.t_start - p.center))
        return d if np.ndim(d) else float(d)

    def event_points(self) -> np.ndarray:
        """Window ends plus every pulse center and support edge inside the window."""
        pts = [self.t_start, self.t_end]
        for p in self.detuning_pulses + self.coupling_pulses:
            h = self._env[p].half_width
            pts += [p.center - h, p.center, p.center + h]
        pts = np.unique(np.asarray(pts, dtype=float))
        return pts[(pts >= self.t_start) & (pts <= self.t_end)]

    def kernel_arrays(self) -> dict:
        """Flat arrays describing the pulses, for the compiled integrator."""
        pulses = [(0, p) for p in self.coupling_pulses] + [(1, p) for p in self.detuning_pulses]
        env = [self._env[p] for _, p in pulses]
        return {
            "chan": np.array([c for c, _ in pulses], dtype=np.int64),
            "kind": np.array([p.kind.code for _, p in pulses], dtype=np.int64),
            "center": np.array([p.center for _, p in pulses], dtype=float),
            "tau": np.array([p.tau for _, p in pulses], dtype=float),
            "area": np.array([p.area for _, p in pulses], dtype=float),
            "half": np.array([e.half_width for e in env], dtype=float),
            "norm": np.array([e.norm for e in env], dtype=float),
        }


def sample(spec: SequenceSpec) -> HamiltonianSampler:
    """Sampler t -> (alpha, static_detuning + sum_k area_k g(t - center_k))."""
    return HamiltonianSampler(spec.alpha, spec.static_detuning, 0.0, spec.duration, spec.pulses)


# -- plain-text key=value serialization --------------------------------------

def spec_to_text(spec: SequenceSpec) -> str:
    lines = [
        f"n_segments={spec.n_segments}",
        f"alpha={spec.alpha!r}",
        f"static_detuning={spec.static_detuning!r}",
        f"duration={spec.duration!r}",
        f"rabi_shape={spec.rabi_shape}",
    ]
    for p in spec.pulses:
        lines.append(f"pulse={p.kind.value},{p.center!r},{p.tau!r},{p.area!r}")
    return "\n".join(lines) + "\n"


def spec_from_text(text: str) -> SequenceSpec:
    """Inverse of :func:`spec_to_text`; ``#`` comments and blank lines are ignored."""
    fields: dict = {}
    pulses = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        try:
            if key == "pulse":
                kind, center, tau, area = (s.strip() for s in value.split(","))
                pulses.append(ShapedPulse(PulseShapeKind.parse(kind), float(center), float(tau), float(area)))
            elif key == "n_segments":
                fields[key] = int(value)
            elif key in ("alpha", "static_detuning", "duration"):
                fields[key] = float(value)
            elif key == "rabi_shape":
                fields[key] = value
            else:
                raise ValueError(f"unknown key {key!r}")
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    missing = {"n_segments", "alpha"} - fields.keys()
    if missing:
        raise ValueError(f"missing keys: {', '.join(sorted(missing))}")
    return SequenceSpec(pulses=tuple(pulses), **fields)

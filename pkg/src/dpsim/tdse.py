"""Numerical propagator of the two-state Schroedinger equation.

Both columns of U(t_end, t_start) are integrated with an adaptive
Dormand-Prince 5(4) pair, compiled with numba. The window is split at every
pulse center and support edge so no step straddles a kink, and the step is
capped at tau/10 inside pulse supports and at ``max_step`` elsewhere.

Two pictures are available. The Schroedinger picture integrates
H = 1/2 [[-Delta, Omega], [Omega, Delta]] directly. The interaction picture
integrates the coupling Omega e^{-i D(t)} with D the exact running integral
of Delta, then maps back, so both return the same Schroedinger propagator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from dpsim.su2 import Propagator2
from dpsim.waveforms import HamiltonianSampler, PulseShapeKind, ShapedPulse

SCHROEDINGER = "schroedinger"
INTERACTION = "interaction"


class IntegrationError(RuntimeError):
    """Step-size underflow, step budget exhausted, or unitarity drift."""


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = math.pi / 20
    picture: str = SCHROEDINGER
    fixed_step: bool = False
    max_steps: int = 20_000_000

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol"):
            v = getattr(self, name)
            if not 0.0 < v <= 1e-2:
                raise ValueError(f"{name} must lie in (0, 1e-2], got {v}")
        if not self.max_step > 0:
            raise ValueError("max_step must be positive")
        if self.picture not in (SCHROEDINGER, INTERACTION):
            raise ValueError(f"unknown picture {self.picture!r}")


DEFAULT_CONFIG = IntegratorConfig()

# Local error target as a fraction of the requested tolerance: per-step errors
# add up over thousands of steps, and the result must stay unitary to
# 10 x rel_tol.
_LOCAL_SAFETY = 0.1

# Dormand-Prince 5(4) tableau.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = np.zeros((7, 7))
_A[1, :1] = [1 / 5]
_A[2, :2] = [3 / 40, 9 / 40]
_A[3, :3] = [44 / 45, -56 / 15, 32 / 9]
_A[4, :4] = [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]
_A[5, :5] = [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]
_A[6, :6] = [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]
_B = _A[6].copy()
_E = _B - np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])

_OK, _UNDERFLOW, _TOO_MANY = 0, 1, 2


@numba.njit(cache=True, nogil=True)
def _gd(x):
    return 2.0 * math.atan(math.tanh(0.5 * x))


@numba.njit(cache=True, nogil=True)
def _raw(kind, x, tau):
    if kind == 0:
        return 1.0 / (math.cosh(x / tau) * math.pi * tau)
    if kind == 1:
        return math.exp(-0.5 * (x / tau) ** 2) / (tau * math.sqrt(2.0 * math.pi))
    if kind == 2:
        return tau / (math.pi * (x * x + tau * tau))
    return 1.0 / (math.pi * tau)


@numba.njit(cache=True, nogil=True)
def _raw_cdf(kind, x, tau):
    if kind == 0:
        return _gd(x / tau) / math.pi
    if kind == 1:
        return 0.5 * math.erf(x / (tau * math.sqrt(2.0)))
    if kind == 2:
        return math.atan(x / tau) / math.pi
    return x / (math.pi * tau)


@numba.njit(cache=True, nogil=True)
def _controls(t, t0, omega0, delta0, chan, kind, center, tau, area, half, norm):
    """Omega(t), Delta(t) and D(t) = int_{t0}^t Delta."""
    om = omega0
    de = delta0
    dint = delta0 * (t - t0)
    for k in range(chan.shape[0]):
        x = t - center[k]
        h = half[k]
        if chan[k] == 0:
            if -h <= x <= h:
                om += area[k] * _raw(kind[k], x, tau[k]) / norm[k]
        else:
            if -h <= x <= h:
                de += area[k] * _raw(kind[k], x, tau[k]) / norm[k]
            # running area from max(t0, center - h) to t
            lo = max(t0 - center[k], -h)
            hi = min(max(x, -h), h)
            if hi > lo:
                dint += area[k] * (_raw_cdf(kind[k], hi, tau[k]) - _raw_cdf(kind[k], lo, tau[k])) / norm[k]
    return om, de, dint


@numba.njit(cache=True, nogil=True)
def _rhs(t, y, out, t0, omega0, delta0, chan, kind, center, tau, area, half, norm, interaction):
    om, de, dint = _controls(t, t0, omega0, delta0, chan, kind, center, tau, area, half, norm)
    # y = [U00, U10, U01, U11] (column-major); out = -i H y
    if interaction:
        h01 = 0.5 * om * complex(math.cos(dint), -math.sin(dint))
        h10 = h01.conjugate()
        for c in range(2):
            u0 = y[2 * c]
            u1 = y[2 * c + 1]
            out[2 * c] = -1j * (h01 * u1)
            out[2 * c + 1] = -1j * (h10 * u0)
    else:
        for c in range(2):
            u0 = y[2 * c]
            u1 = y[2 * c + 1]
            out[2 * c] = -0.5j * (-de * u0 + om * u1)
            out[2 * c + 1] = -0.5j * (om * u0 + de * u1)


@numba.njit(cache=True, nogil=True)
def _integrate(edges, caps, omega0, delta0, chan, kind, center, tau, area, half, norm,
               rtol, atol, interaction, fixed, max_steps, A, B, C, E):
    y = np.zeros(4, dtype=np.complex128)
    y[0] = 1.0
    y[3] = 1.0
    ynew = np.empty(4, dtype=np.complex128)
    ytmp = np.empty(4, dtype=np.complex128)
    k = np.zeros((7, 4), dtype=np.complex128)
    kout = np.empty(4, dtype=np.complex128)
    t0 = edges[0]
    nsteps = 0
    h = -1.0
    for seg in range(edges.shape[0] - 1):
        ta = edges[seg]
        tb = edges[seg + 1]
        cap = caps[seg]
        length = tb - ta
        if fixed:
            nfix = max(1, int(math.ceil(length / cap - 1e-9)))
            hfix = length / nfix
        if h <= 0.0:
            h = min(cap, length) * 0.1
        t = ta
        last = False
        have_k0 = False
        istep = 0
        while True:
            if fixed:
                if istep >= nfix:
                    break
                h = hfix
            else:
                remaining = tb - t
                if remaining <= 0.0:
                    break
                if h > cap:
                    h = cap
                last = remaining - h <= 0.01 * h
                if last:
                    h = remaining
            if not have_k0:
                _rhs(t, y, kout, t0, omega0, delta0, chan, kind, center, tau, area, half, norm, interaction)
                k[0, :] = kout
                have_k0 = True
            for s in range(1, 7):
                for i in range(4):
                    acc = 0j
                    for j in range(s):
                        acc += A[s, j] * k[j, i]
                    ytmp[i] = y[i] + h * acc
                _rhs(t + C[s] * h, ytmp, kout, t0, omega0, delta0, chan, kind, center, tau, area, half,
                     norm, interaction)
                k[s, :] = kout
            # FSAL: stage 6 is evaluated at the 5th-order solution
            for i in range(4):
                ynew[i] = ytmp[i]
            nsteps += 1
            if nsteps > max_steps:
                return _TOO_MANY, y, t, nsteps
            if fixed:
                accept = True
            else:
                err = 0.0
                for i in range(4):
                    e = 0j
                    for j in range(7):
                        e += E[j] * k[j, i]
                    sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
                    err += (abs(h * e) / sc) ** 2
                err = math.sqrt(err / 4.0)
                accept = err <= 1.0
                if err == 0.0:
                    fac = 5.0
                else:
                    fac = min(5.0, max(0.2, 0.9 * err ** -0.2))
                    if not accept:
                        fac = min(fac, 1.0)
            if accept:
                if fixed:
                    t = ta + (istep + 1) * h
                else:
                    t = tb if last else t + h
                for i in range(4):
                    y[i] = ynew[i]
                k[0, :] = k[6, :]
                istep += 1
            if not fixed:
                h = h * fac
                if not accept and h < 1e-13 * max(1.0, abs(t)):
                    return _UNDERFLOW, y, t, nsteps
    return _OK, y, edges[edges.shape[0] - 1], nsteps


def _step_caps(sampler: HamiltonianSampler, edges: np.ndarray, max_step: float) -> np.ndarray:
    pulses = sampler.detuning_pulses + sampler.coupling_pulses
    caps = np.full(len(edges) - 1, max_step)
    mids = 0.5 * (edges[:-1] + edges[1:])
    for p in pulses:
        h = p.envelope.half_width
        inside = np.abs(mids - p.center) <= h
        caps[inside] = np.minimum(caps[inside], p.tau / 10.0)
    return caps


def _run(sampler: HamiltonianSampler, cfg: IntegratorConfig, interaction: bool) -> tuple[Propagator2, float, int]:
    edges = sampler.event_points()
    caps = _step_caps(sampler, edges, cfg.max_step)
    arr = sampler.kernel_arrays()
    status, y, t_stop, nsteps = _integrate(
        edges, caps, float(sampler.omega), float(sampler.detuning),
        arr["chan"], arr["kind"], arr["center"], arr["tau"], arr["area"], arr["half"], arr["norm"],
        _LOCAL_SAFETY * cfg.rel_tol, _LOCAL_SAFETY * cfg.abs_tol, interaction, cfg.fixed_step, cfg.max_steps, _A, _B, _C, _E)
    if status == _UNDERFLOW:
        raise IntegrationError(f"step size underflow at t={t_stop:.6g} (stiff detuning?) after {nsteps} steps")
    if status == _TOO_MANY:
        raise IntegrationError(f"step budget of {cfg.max_steps} exhausted at t={t_stop:.6g}")
    u = np.array([[y[0], y[2]], [y[1], y[3]]])
    if interaction:
        d_end = float(sampler.detuning_integral(sampler.t_end))
        u = np.diag([np.exp(0.5j * d_end), np.exp(-0.5j * d_end)]) @ u
    drift = np.max(np.abs(u.conj().T @ u - np.eye(2)))
    limit = 10.0 * cfg.rel_tol if not cfg.fixed_step else 1e-2
    if drift > limit:
        raise IntegrationError(f"unitarity drift {drift:.3e} exceeds {limit:.1e}")
    # project onto Cayley-Klein form
    ck = Propagator2(0.5 * (u[0, 0] + u[1, 1].conjugate()), 0.5 * (u[0, 1] - u[1, 0].conjugate()))
    return ck, float(drift), int(nsteps)


def propagate(sampler: HamiltonianSampler, cfg: IntegratorConfig | None = None) -> Propagator2:
    """Propagator over the sampler's window in the picture chosen by ``cfg``."""
    cfg = cfg or DEFAULT_CONFIG
    return _run(sampler, cfg, cfg.picture == INTERACTION)[0]


def propagate_interaction(sampler: HamiltonianSampler, cfg: IntegratorConfig | None = None) -> Propagator2:
    """As :func:`propagate`, integrated in the interaction picture."""
    return _run(sampler, cfg or DEFAULT_CONFIG, True)[0]


@dataclass(frozen=True)
class Diagnostics:
    drift: float  # max |U^dagger U - 1| before projection
    steps: int


def propagate_with_diagnostics(sampler: HamiltonianSampler,
                               cfg: IntegratorConfig | None = None) -> tuple[Propagator2, Diagnostics]:
    cfg = cfg or DEFAULT_CONFIG
    u, drift, steps = _run(sampler, cfg, cfg.picture == INTERACTION)
    return u, Diagnostics(drift, steps)


def rz_segment_numeric(alpha: float, tau: float, delta: float,
                       cfg: IntegratorConfig | None = None) -> Propagator2:
    """One Rosen-Zener segment integrated in the pi/4-rotated basis.

    Integrates H = 1/2 [[alpha, Delta(t)], [Delta(t), -alpha]] with a sech
    coupling of area pi*delta across its full support, strips the free
    evolution outside the segment and re-dresses it for a segment of
    duration pi centered on the pulse. This is the numerical counterpart
    of the closed-form segment propagator; it does not truncate the pulse
    at the segment edges.
    """
    pulse = ShapedPulse(PulseShapeKind.SECH, 0.0, tau, math.pi * delta)
    half = max(pulse.envelope.half_width, 0.5 * math.pi)
    sampler = HamiltonianSampler(0.0, -alpha, -half, half, coupling_pulses=(pulse,))
    u = propagate_interaction(sampler, cfg)
    free_out = Propagator2(np.exp(0.5j * alpha * (half - 0.5 * math.pi)), 0.0)
    return free_out @ u @ free_out

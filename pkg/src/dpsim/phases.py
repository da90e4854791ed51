"""Composite-pulse phase families and their detuning-pulse areas.

A phase list assigns one coupling phase to each unit segment. Realized with
detuning pulses, the jump between segments k and k+1 becomes a pulse of
area phases[k+1] - phases[k].

Sign note: with H = 1/2 [[-Delta, Omega], [Omega, Delta]] a detuning area A
shifts the coupling phase by -A, so a waveform built from ``phases``
reproduces the composite pulse of ``-phases``. Both give the same
transition probability whenever the static detuning is zero or the list
is a palindrome (transposition maps one onto the other); otherwise the
waveform with static detuning d matches the composite pulse at -d.
"""

from __future__ import annotations

import math
from typing import Sequence

from dpsim.su2 import Propagator2, compose, constant_propagator, with_phase

TWO_PI = 2.0 * math.pi


def _check_odd(n_pulses: int) -> int:
    if int(n_pulses) != n_pulses or n_pulses < 1 or n_pulses % 2 == 0:
        raise ValueError(f"number of pulses must be a positive odd integer, got {n_pulses}")
    return int(n_pulses)


def bb_phases(n_pulses: int) -> tuple[float, ...]:
    """Broadband phases, symmetric with phi_k = k(k-1) n pi / N, reduced to [0, 2pi)."""
    N = _check_odd(n_pulses)
    n = (N - 1) // 2
    half = [math.fmod(k * (k - 1) * n * math.pi / N, TWO_PI) for k in range(1, n + 2)]
    return tuple(half + half[-2::-1])


def nb_phases(n_pulses: int) -> tuple[float, ...]:
    """Narrowband phases (0, phi_1, -phi_1, ..., phi_n, -phi_n), phi_k = 2 k pi / N."""
    N = _check_odd(n_pulses)
    out = [0.0]
    for k in range(1, (N - 1) // 2 + 1):
        phi = 2 * k * math.pi / N
        out += [phi, -phi]
    return tuple(out)


def universal_phases() -> tuple[float, ...]:
    """Five-pulse universal composite phases (0, 5, 2, 5, 0) pi/6."""
    return tuple(k * math.pi / 6 for k in (0, 5, 2, 5, 0))


def normalize_angle(x: float) -> float:
    """Representative of x modulo 2pi in (-pi, pi]."""
    r = math.remainder(x, TWO_PI)
    return math.pi if r <= -math.pi else r


def phases_to_areas(phases: Sequence[float], normalize: bool = False) -> tuple[float, ...]:
    """Detuning-pulse areas phases[k+1] - phases[k].

    With ``normalize`` each area is mapped to (-pi, pi]; the two choices are
    equivalent only in the zero-width limit.
    """
    areas = [phases[k + 1] - phases[k] for k in range(len(phases) - 1)]
    if normalize:
        areas = [normalize_angle(a) for a in areas]
    return tuple(areas)


def cp_limit_propagator(phases: Sequence[float], alpha: float, static_detuning: float = 0.0,
                        durations: Sequence[float] | None = None) -> Propagator2:
    """Composite pulse with instantaneous phase jumps (the tau -> 0 limit).

    Segment k is the exact constant-Hamiltonian propagator (Rabi alpha,
    detuning ``static_detuning``, duration pi unless ``durations`` says
    otherwise) with its coupling phase shifted by phases[k].
    """
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    if not len(phases):
        raise ValueError("phase list must not be empty")
    if durations is None:
        durations = [math.pi] * len(phases)
    elif len(durations) != len(phases):
        raise ValueError("durations and phases differ in length")
    return compose(with_phase(constant_propagator(alpha, static_detuning, d), phi)
                   for phi, d in zip(phases, durations))

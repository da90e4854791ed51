"""Detuning-pulse control of two-state quantum systems.

Exact Rosen-Zener propagators, composite-phase sequences, shaped detuning
waveforms and a numerical Schroedinger integrator, plus scan tooling.

Units: hbar = 1, time in T/pi, frequency in pi/T. One unit segment lasts
pi and the constant Rabi frequency equals the area scale alpha.
"""

from dpsim.su2 import (
    Propagator2,
    StateVector,
    compose,
    constant_propagator,
    resonant_propagator,
    rotation,
    transition_probability,
    with_phase,
)

__all__ = [
    "Propagator2",
    "StateVector",
    "compose",
    "constant_propagator",
    "resonant_propagator",
    "rotation",
    "transition_probability",
    "with_phase",
]

__version__ = "0.1.0"

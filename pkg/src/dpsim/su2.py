"""SU(2) propagators in Cayley-Klein form.

A propagator is stored as the pair (a, b) of

    U = [[a, b], [-conj(b), conj(a)]]

so the symmetry class is carried structurally and products never leave it.
All sequence arguments are in chronological order: the first element acts
first and therefore ends up as the rightmost matrix factor.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

# Tolerance for accepting a dense 2x2 matrix as Cayley-Klein.
CK_ATOL = 1e-12


@dataclass(frozen=True)
class StateVector:
    """Probability amplitudes (c1, c2) of the two basis states."""

    c1: complex
    c2: complex

    @property
    def norm(self) -> float:
        return math.sqrt(abs(self.c1) ** 2 + abs(self.c2) ** 2)

    def populations(self) -> tuple[float, float]:
        return abs(self.c1) ** 2, abs(self.c2) ** 2


@dataclass(frozen=True)
class Propagator2:
    """Two-state propagator [[a, b], [-b*, a*]]."""

    a: complex
    b: complex

    def __post_init__(self):
        a, b = complex(self.a), complex(self.b)
        if not (cmath.isfinite(a) and cmath.isfinite(b)):
            raise ValueError(f"non-finite Cayley-Klein parameters a={a}, b={b}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def identity(cls) -> "Propagator2":
        return cls(1.0, 0.0)

    @classmethod
    def from_matrix(cls, m, atol: float = CK_ATOL) -> "Propagator2":
        """Project a dense 2x2 matrix onto (a, b), checking its form."""
        m = np.asarray(m, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
        dev = max(abs(m[1, 1] - m[0, 0].conjugate()), abs(m[1, 0] + m[0, 1].conjugate()))
        if dev > atol:
            raise ValueError(f"matrix is not of Cayley-Klein form (deviation {dev:.3e})")
        return cls(m[0, 0], m[0, 1])

    def matrix(self) -> np.ndarray:
        a, b = self.a, self.b
        return np.array([[a, b], [-b.conjugate(), a.conjugate()]], dtype=complex)

    def __matmul__(self, other: "Propagator2") -> "Propagator2":
        # [[a1, b1], [-b1*, a1*]] @ [[a2, b2], [-b2*, a2*]]
        a1, b1, a2, b2 = self.a, self.b, other.a, other.b
        return Propagator2(a1 * a2 - b1 * b2.conjugate(), a1 * b2 + b1 * a2.conjugate())

    def dagger(self) -> "Propagator2":
        return Propagator2(self.a.conjugate(), -self.b)

    def apply(self, state: StateVector) -> StateVector:
        a, b = self.a, self.b
        return StateVector(a * state.c1 + b * state.c2,
                           -b.conjugate() * state.c1 + a.conjugate() * state.c2)

    @property
    def unitarity_defect(self) -> float:
        """| |a|^2 + |b|^2 - 1 |."""
        return abs(abs(self.a) ** 2 + abs(self.b) ** 2 - 1.0)

    def is_unitary(self, tol: float = CK_ATOL) -> bool:
        return self.unitarity_defect <= tol

    def allclose(self, other: "Propagator2", atol: float = 1e-12, up_to_phase: bool = False) -> bool:
        """Element-wise comparison, optionally modulo a global phase.

        A global phase e^{i chi} generally leaves SU(2); modulo phase the
        test compares the full matrices after aligning the largest element.
        """
        if not up_to_phase:
            return abs(self.a - other.a) <= atol and abs(self.b - other.b) <= atol
        m1, m2 = self.matrix(), other.matrix()
        k = np.unravel_index(np.argmax(np.abs(m2)), m2.shape)
        if abs(m1[k]) == 0.0:
            return False
        phase = m2[k] / m1[k]
        phase /= abs(phase)
        return bool(np.max(np.abs(m1 * phase - m2)) <= atol)


PropagatorLike = Union[Propagator2, np.ndarray]


def _as_propagator(u: PropagatorLike) -> Propagator2:
    if isinstance(u, Propagator2):
        return u
    return Propagator2.from_matrix(u)


def rotation(theta: float) -> np.ndarray:
    """Real basis rotation R(theta) = [[cos, sin], [-sin, cos]]."""
    if not math.isfinite(theta):
        raise ValueError("rotation angle must be finite")
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, s], [-s, c]])


def resonant_propagator(area: float) -> Propagator2:
    """Resonant pulse of the given area: a = cos(A/2), b = -i sin(A/2)."""
    if not math.isfinite(area):
        raise ValueError("pulse area must be finite")
    return Propagator2(math.cos(area / 2), -1j * math.sin(area / 2))


def constant_propagator(omega: float, detuning: float, duration: float) -> Propagator2:
    """Exact propagator of H = 1/2 [[-detuning, omega], [omega, detuning]].

    Uses the generalized Rabi frequency sqrt(omega^2 + detuning^2).
    """
    g = math.hypot(omega, detuning)
    x = 0.5 * g * duration
    # sin(x)/g, continuous through g = 0
    s_over_g = 0.5 * duration * (math.sin(x) / x if x > 1e-8 else 1.0 - x * x / 6.0)
    return Propagator2(complex(math.cos(x), detuning * s_over_g), -1j * omega * s_over_g)


def with_phase(u: Propagator2, phi: float) -> Propagator2:
    """Phase-shift the coupling, Omega -> Omega e^{i phi}: b -> b e^{i phi}."""
    return Propagator2(u.a, u.b * cmath.exp(1j * phi))


def compose(props: Iterable[PropagatorLike]) -> Propagator2:
    """Total propagator U_N ... U_2 U_1 of a chronological list.

    Dense 2x2 entries (e.g. basis rotations) are accepted and must be of
    Cayley-Klein form within 1e-12.
    """
    total = None
    for u in props:
        u = _as_propagator(u)
        total = u if total is None else u @ total
    if total is None:
        raise ValueError("cannot compose an empty sequence of propagators")
    return total


def transition_probability(u: Propagator2) -> float:
    """|U_12|^2 = |U_21|^2 = |b|^2."""
    return abs(u.b) ** 2

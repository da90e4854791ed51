"""Complex gamma function (Lanczos, g = 7, n = 9) and the Rosen-Zener ratio."""

from __future__ import annotations

import cmath
import math

_G = 7.0
_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_LOG_PI = math.log(math.pi)


class GammaDomainError(ValueError):
    """Raised when a gamma argument hits a pole or is not finite."""


def _check(z: complex, label: str = "z") -> complex:
    z = complex(z)
    if not cmath.isfinite(z):
        raise GammaDomainError(f"gamma argument {label}={z} is not finite")
    if z.imag == 0.0 and z.real <= 0.0 and z.real == math.floor(z.real):
        raise GammaDomainError(f"gamma pole at {label}={z.real:g}")
    return z


def _lanczos_log(z: complex) -> complex:
    # valid for Re z >= 0.5
    z -= 1.0
    x = _COEFFS[0]
    for i in range(1, len(_COEFFS)):
        x += _COEFFS[i] / (z + i)
    t = z + _G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * cmath.log(t) - t + cmath.log(x)


def log_gamma(z: complex) -> complex:
    """A logarithm of Gamma(z).

    The branch is not the principal log-gamma branch; only exp() of the
    result, or of sums of such results, is meaningful.
    """
    z = _check(z)
    if z.real < 0.5:
        # Gamma(z) Gamma(1 - z) = pi / sin(pi z)
        return _LOG_PI - cmath.log(cmath.sin(math.pi * z)) - _lanczos_log(1.0 - z)
    return _lanczos_log(z)


def complex_gamma(z: complex) -> complex:
    """Gamma(z) for complex z away from the poles 0, -1, -2, ..."""
    z = _check(z)
    if z.real < 0.5:
        return math.pi / (cmath.sin(math.pi * z) * cmath.exp(_lanczos_log(1.0 - z)))
    return cmath.exp(_lanczos_log(z))


def gamma_ratio_rz(alpha: float, tau: float, delta0tau: float) -> complex:
    """Rosen-Zener Cayley-Klein parameter a for one detuning pulse.

    Returns Gamma^2[(1 - i alpha tau)/2] exp(-i alpha pi/2) divided by
    Gamma[(1 - i alpha tau - delta)/2] Gamma[(1 - i alpha tau + delta)/2],
    with delta = delta0tau. Evaluated through log-gamma so that large
    imaginary arguments do not overflow.
    """
    w = 0.5 * complex(1.0, -alpha * tau)
    zm = _check(w - 0.5 * delta0tau, "(1 - i*alpha*tau - delta)/2")
    zp = _check(w + 0.5 * delta0tau, "(1 - i*alpha*tau + delta)/2")
    zn = _check(w, "(1 - i*alpha*tau)/2")
    return cmath.exp(2.0 * log_gamma(zn) - log_gamma(zm) - log_gamma(zp) - 0.5j * math.pi * alpha)

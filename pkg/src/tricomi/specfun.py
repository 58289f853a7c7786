"""Self-contained special-function evaluators: Euler gamma, Airy Ai on the
nonnegative axis, and the Macdonald function K_{1/3}.

All three are implemented from scratch (no scipy) so that the Airy and
Macdonald routes stay numerically independent of each other; the kernel and
verification modules cross-check them against one another.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SpecialFunctionAccuracy",
    "DEFAULT_ACCURACY",
    "gamma",
    "airy_ai",
    "macdonald_k13",
]


@dataclass(frozen=True)
class SpecialFunctionAccuracy:
    """Requested relative accuracy for the evaluators in this module."""

    relative_tolerance: float = 1e-12

    def __post_init__(self) -> None:
        if not (0.0 < self.relative_tolerance <= 1e-6):
            raise ValueError(
                "relative_tolerance must lie in (0, 1e-6], got "
                f"{self.relative_tolerance!r}"
            )


DEFAULT_ACCURACY = SpecialFunctionAccuracy()

_SQRT_TWO_PI = math.sqrt(2.0 * math.pi)

# Lanczos approximation, g = 7, 9 terms.  Fixed, widely documented coefficient
# set with ~15 significant digits over the positive axis.
_LANCZOS_G = 7.0
_LANCZOS_COEFFS = (
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


def gamma(x: float, accuracy: SpecialFunctionAccuracy = DEFAULT_ACCURACY) -> float:
    """Euler gamma function for x > 0.

    Raises ValueError for x <= 0 and OverflowError once the result exceeds
    the double-precision range (x > ~171.6).
    """
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise ValueError(f"gamma requires x > 0, got {x!r}")
    if x < 0.5:
        # One recurrence step moves the argument into the Lanczos sweet spot.
        return gamma(x + 1.0, accuracy) / x
    series = _LANCZOS_COEFFS[0]
    for i, c in enumerate(_LANCZOS_COEFFS[1:], start=1):
        series += c / (x - 1.0 + i)
    t = x + _LANCZOS_G - 0.5
    # Single exp keeps intermediates in range up to the true overflow point.
    exponent = (x - 0.5) * math.log(t) - t
    try:
        value = _SQRT_TWO_PI * series * math.exp(exponent)
    except OverflowError:
        raise OverflowError(f"gamma({x}) exceeds the double-precision range")
    if math.isinf(value):
        raise OverflowError(f"gamma({x}) exceeds the double-precision range")
    return value


# ---------------------------------------------------------------------------
# Airy Ai
# ---------------------------------------------------------------------------

# Branch switch: below, the Maclaurin pair loses < 2 digits to cancellation;
# above, the damped integral representation is already at machine accuracy.
_AIRY_SERIES_CUTOFF = 2.0

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def _airy_series(z: float, rel_tol: float) -> float:
    """Maclaurin evaluation Ai(z) = c1*f(z) - c2*g(z)."""
    c1 = 1.0 / (3.0 ** (2.0 / 3.0) * gamma(2.0 / 3.0))
    c2 = 1.0 / (3.0 ** (1.0 / 3.0) * gamma(1.0 / 3.0))
    z3 = z * z * z
    f_term, g_term = 1.0, z
    f_sum, g_sum = f_term, g_term
    k = 0
    while True:
        f_term *= z3 / ((3 * k + 2) * (3 * k + 3))
        g_term *= z3 / ((3 * k + 3) * (3 * k + 4))
        f_sum += f_term
        g_sum += g_term
        k += 1
        if abs(f_term) < 0.25 * rel_tol * abs(f_sum) and abs(g_term) < 0.25 * rel_tol * (
            abs(g_sum) + 1e-300
        ):
            break
        if k > 200:  # cannot happen for z <= cutoff, guard against misuse
            break
    return c1 * f_sum - c2 * g_sum


def _airy_integral(z: float) -> float:
    """Damped integral representation, valid for z > 0:

        Ai(z) = (e^{-zeta}/pi) * int_0^inf exp(-sqrt(z) u^2) cos(u^3/3) du,
        zeta = (2/3) z^{3/2}.

    The integrand is entire and the Gaussian factor truncates it sharply, so a
    composite Gauss-Legendre rule resolves it to machine accuracy.
    """
    sqrt_z = math.sqrt(z)
    zeta = (2.0 / 3.0) * z * sqrt_z
    u_max = math.sqrt(45.0 / sqrt_z)
    # Panel count tracks the oscillation budget of cos(u^3/3) on [0, u_max].
    phase = u_max**3 / 3.0
    panels = max(16, int(math.ceil(phase / (0.5 * math.pi))) + 4)
    edges = np.linspace(0.0, u_max, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    u = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    vals = np.exp(-sqrt_z * u * u) * np.cos(u * u * u / 3.0)
    integral = float(np.sum((vals @ _GL_WEIGHTS) * half))
    if zeta > 700.0:
        # e^{-zeta} underflows; the result is below the double-precision floor.
        return 0.0
    return math.exp(-zeta) * integral / math.pi


def airy_ai(z: float, accuracy: SpecialFunctionAccuracy = DEFAULT_ACCURACY) -> float:
    """Airy function Ai(z) for z >= 0; strictly positive and decreasing."""
    z = float(z)
    if not math.isfinite(z) or z < 0.0:
        raise ValueError(f"airy_ai requires z >= 0, got {z!r}")
    if z <= _AIRY_SERIES_CUTOFF:
        return _airy_series(z, accuracy.relative_tolerance)
    return _airy_integral(z)


# ---------------------------------------------------------------------------
# Macdonald function K_{1/3}
# ---------------------------------------------------------------------------


def _k13_trapezoid_sum(z: float, step: float) -> float:
    """Trapezoidal sum for S(z) = int_0^inf exp(-z(cosh t - 1)) cosh(t/3) dt.

    The integrand extends evenly to the whole line and decays
    double-exponentially, so the trapezoidal rule converges geometrically in
    1/step.  Terms are accumulated until they fall below 1e-18 of the running
    sum (the series terminates because of the double-exponential decay).
    """
    total = 0.5  # t = 0 contributes exp(0)*cosh(0)/2 = 1/2
    j = 1
    block = 64
    while True:
        t = step * np.arange(j, j + block)
        terms = np.exp(-z * (np.cosh(t) - 1.0)) * np.cosh(t / 3.0)
        running = total + np.cumsum(terms)
        small = terms < 1e-18 * running
        if small.any():
            stop = int(np.argmax(small))
            total = float(running[stop])
            return total * step
        total = float(running[-1])
        j += block
        if j > 200_000:
            raise RuntimeError("macdonald_k13 truncation failed to terminate")


def macdonald_k13(z: float, accuracy: SpecialFunctionAccuracy = DEFAULT_ACCURACY) -> float:
    """Macdonald function K_{1/3}(z) for z > 0.

    Evaluates exp(z)*K_{1/3}(z) from the cosh-integral representation and
    rescales, which preserves relative accuracy down to the underflow of
    exp(-z) itself.
    """
    z = float(z)
    if not math.isfinite(z) or z <= 0.0:
        raise ValueError(f"macdonald_k13 requires z > 0, got {z!r}")
    # Initial step resolves the z-dependent width of the integrand peak.
    step = 0.25 / max(1.0, math.sqrt(z) / 2.0)
    value = _k13_trapezoid_sum(z, step)
    for _ in range(8):
        refined = _k13_trapezoid_sum(z, step / 2.0)
        if abs(refined - value) <= 0.25 * accuracy.relative_tolerance * abs(refined):
            value = refined
            break
        step /= 2.0
        value = refined
    return math.exp(-z) * value

"""Special functions and exact constants.

Gamma on (0, 3] (Lanczos), sine/cosine integrals Si/Ci, the oscillatory
tail integral int_W^inf e^{iw}/w dw, principal complex powers, and the
limit constants of the flat-phase theorem.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

__all__ = [
    "EULER_GAMMA",
    "TheoremConstant",
    "gamma_real",
    "sin_cos_integrals",
    "shifted_si",
    "e1_tail",
    "principal_power",
    "c_constant",
]

EULER_GAMMA = 0.57721566490153286061

# Lanczos approximation, g = 7, 9 coefficients (double precision).
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


def gamma_real(x: float) -> float:
    """Gamma(x) for real x > 0 via the Lanczos approximation.

    Relative error below 1e-13 on the range (0, 3] used here (and well
    beyond); raises for x <= 0.
    """
    if x <= 0:
        raise ValueError("gamma_real requires x > 0")
    if x < 0.5:
        # reflection keeps the Lanczos argument away from 0
        return math.pi / (math.sin(math.pi * x) * gamma_real(1.0 - x))
    z = x - 1.0
    acc = _LANCZOS_COEFFS[0]
    for i, c in enumerate(_LANCZOS_COEFFS[1:], start=1):
        acc += c / (z + i)
    t = z + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (z + 0.5) * math.exp(-t) * acc


def _sici_series(x: float) -> tuple[float, float]:
    # Si(x)  = sum_{k>=0} (-1)^k x^{2k+1} / ((2k+1)(2k+1)!)
    # Cin(x) = int_0^x (1-cos t)/t dt
    #        = sum_{m>=1} (-1)^{m+1} x^{2m} / (2m (2m)!)
    # Ci(x)  = gamma + log x - Cin(x)
    si = 0.0
    cin = 0.0
    sign = 1.0
    odd_term = x  # x^{2k+1}/(2k+1)!
    k = 0
    while True:
        si += sign * odd_term / (2 * k + 1)
        even_term = odd_term * x / (2 * k + 2)  # x^{2k+2}/(2k+2)!
        cin += sign * even_term / (2 * k + 2)   # m = k+1 => sign (-1)^{m+1} = (-1)^k
        odd_term = even_term * x / (2 * k + 3)
        sign = -sign
        k += 1
        if odd_term < 1e-19 * (1.0 + abs(si)) and k > 2:
            break
        if k > 120:
            break
    ci = EULER_GAMMA + math.log(x) - cin
    return si, ci


def _e1_imag_cf(x: float) -> complex:
    """E1(-ix) for x > 0 by the modified Lentz continued fraction.

    E1(z) = e^{-z} / (z + 1 - 1/(z + 3 - 4/(z + 5 - 9/(...)))), valid away
    from the negative real axis; pure imaginary argument converges for the
    x range used here (x > 4).
    """
    z = complex(0.0, -x)
    tiny = 1e-300
    b = z + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 400):
        a = -float(i) * float(i)
        b += 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        if c == 0:
            c = tiny
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return cmath.exp(-z) * h


def sin_cos_integrals(x: float) -> tuple[float, float]:
    """(Si(x), Ci(x)) for x > 0 to near machine accuracy.

    Power series up to x = 8; beyond that both are recovered from the
    continued fraction for E1(-ix) = -Ci(x) - i(Si(x) - pi/2).
    """
    if x <= 0:
        raise ValueError("sin_cos_integrals requires x > 0")
    if x <= 8.0:
        return _sici_series(x)
    e1 = _e1_imag_cf(x)
    ci = -e1.real
    si = -e1.imag + math.pi / 2.0
    return si, ci


def shifted_si(x: float) -> float:
    """si(x) = Si(x) - pi/2, the shifted sine integral."""
    si, _ = sin_cos_integrals(x)
    return si - math.pi / 2.0


def e1_tail(w: float) -> complex:
    """int_W^inf e^{iw}/w dw = -Ci(W) - i si(W), for W >= 1."""
    if w < 1.0:
        raise ValueError("e1_tail supports W >= 1 only")
    si, ci = sin_cos_integrals(w)
    return complex(-ci, -(si - math.pi / 2.0))


def principal_power(z: complex, exponent: float) -> complex:
    """Principal branch z**exponent, Arg z in (-pi, pi); cut on (-inf, 0]."""
    z = complex(z)
    if z.imag == 0.0 and z.real <= 0.0:
        raise ValueError("principal_power undefined on the branch cut (-inf, 0]")
    return cmath.exp(exponent * cmath.log(z))


@dataclass(frozen=True)
class TheoremConstant:
    """Limit constant for the flat-phase family, parameterized by the
    power q of the polynomial direction."""

    q: int
    value: complex


def c_constant(q: int) -> TheoremConstant:
    """Limit constant: 4 Gamma(1/q+1) e^{i pi/(2q)} for even q,
    4 Gamma(1/q+1) cos(pi/(2q)) for odd q."""
    if q < 2 or int(q) != q:
        raise ValueError("q must be an integer >= 2")
    q = int(q)
    mag = 4.0 * gamma_real(1.0 / q + 1.0)
    if q % 2 == 0:
        value = mag * cmath.exp(1j * math.pi / (2 * q))
    else:
        value = complex(mag * math.cos(math.pi / (2 * q)), 0.0)
    return TheoremConstant(q, value)

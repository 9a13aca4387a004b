"""Phase family, bump amplitudes, cutoffs and derived proof amplitudes.

The phase under study is f(x1, x2) = sign * x2^q + e^{-1/|x1|^p}: a monomial
direction crossed with a term that is exponentially flat at the origin.
This module provides:

* `flat_term` / `flat_inverse`: the flat factor and its inverse bijection
  (0, inf) <-> (0, 1);
* compactly supported smooth bumps with analytic derivatives to order 2;
* the smooth cutoff pair (alpha, beta) with alpha = 1 on [-1, 1],
  alpha = 0 outside [-2, 2];
* the derived amplitudes produced by the stabilizing changes of variables:
  psi_tilde, a_of_u, and the 2D remainder R.

Everything evaluates on numpy arrays and is immutable after construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

__all__ = [
    "FlatPhaseParams",
    "SmoothBump",
    "MonomialBump",
    "ScaledFunction",
    "SumFunction",
    "Reflected1D",
    "CutoffPair",
    "ProductAmplitude",
    "RadialBumpAmplitude",
    "ReflectedAmplitude",
    "AmplitudeSlice",
    "flat_term",
    "flat_inverse",
    "standard_bump",
    "cutoff_pair",
    "psi_tilde",
    "psi_tilde_neglog",
    "a_of_u",
    "a_of_neglog",
    "remainder_R",
    "plan_remainder_edges",
    "default_support_radius",
]


@dataclass(frozen=True)
class FlatPhaseParams:
    """Parameters of the phase sign*x2^q + e^{-1/|x1|^p}."""

    p: float
    q: int
    sign: int = 1

    def __post_init__(self):
        if not self.p > 0:
            raise ValueError("p must be positive")
        if self.q < 2 or int(self.q) != self.q:
            raise ValueError("q must be an integer >= 2")
        if self.sign not in (+1, -1):
            raise ValueError("sign must be +1 or -1")


def flat_term(x, p: float):
    """e^{-1/|x|^p}, with the flat value 0 at x = 0.

    Computed as exp(-exp(-p log|x|)) so 1/|x|^p never overflows on its own;
    underflow of the result to exact 0 is harmless.
    """
    if p <= 0:
        raise ValueError("p must be positive")
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    nz = x != 0
    with np.errstate(over="ignore", under="ignore"):
        inner = np.exp(-p * np.log(np.abs(x[nz])))
        out[nz] = np.exp(-np.minimum(inner, 745.0))
    out[nz] = np.where(inner > 744.0, 0.0, out[nz])
    if out.ndim == 0:
        return float(out)
    return out


def flat_inverse(u, p: float):
    """Inverse of flat_term on (0, 1): x = (-1/log u)^{1/p}."""
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0) or np.any(u >= 1):
        raise ValueError("flat_inverse requires u in (0, 1)")
    x = (-1.0 / np.log(u)) ** (1.0 / p)
    if x.ndim == 0:
        return float(x)
    return x


def default_support_radius(p: float) -> float:
    """Default bump radius: strictly inside min(1/2, (1/log 2)^{1/p}),
    so all change-of-variable representations apply."""
    return 0.5 * min(0.5, (1.0 / math.log(2.0)) ** (1.0 / p))


class SmoothBump:
    """psi(x) = exp(-x^2 / (r^2 - x^2)) for |x| < r, 0 outside.

    Infinitely differentiable, psi(0) = 1, with analytic first and second
    derivatives.
    """

    def __init__(self, radius: float):
        if radius <= 0:
            raise ValueError("radius must be positive")
        self.support_radius = float(radius)

    @property
    def value_at_0(self) -> float:
        return 1.0

    def _inside(self, x):
        r = self.support_radius
        return np.abs(x) < r * (1.0 - 1e-14)

    def value(self, x):
        x = np.asarray(x, dtype=float)
        r = self.support_radius
        out = np.zeros_like(x)
        m = self._inside(x)
        xm = x[m]
        out[m] = np.exp(-xm * xm / (r * r - xm * xm))
        return out if out.ndim else float(out)

    def deriv1(self, x):
        x = np.asarray(x, dtype=float)
        r = self.support_radius
        out = np.zeros_like(x)
        m = self._inside(x)
        xm = x[m]
        d = r * r - xm * xm
        out[m] = np.exp(-xm * xm / d) * (-2.0 * xm * r * r / d**2)
        return out if out.ndim else float(out)

    def deriv2(self, x):
        x = np.asarray(x, dtype=float)
        r = self.support_radius
        out = np.zeros_like(x)
        m = self._inside(x)
        xm = x[m]
        d = r * r - xm * xm
        g1 = -2.0 * xm * r * r / d**2
        g2 = -2.0 * r * r * (r * r + 3.0 * xm * xm) / d**3
        out[m] = np.exp(-xm * xm / d) * (g1 * g1 + g2)
        return out if out.ndim else float(out)


class MonomialBump:
    """x^k times a SmoothBump: vanishes to order k at the origin."""

    def __init__(self, radius: float, k: int):
        if k < 1:
            raise ValueError("k must be >= 1")
        self._bump = SmoothBump(radius)
        self.k = int(k)
        self.support_radius = self._bump.support_radius

    @property
    def value_at_0(self) -> float:
        return 0.0

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return x**self.k * self._bump.value(x)

    def deriv1(self, x):
        x = np.asarray(x, dtype=float)
        k = self.k
        lead = k * x ** (k - 1) if k > 1 else np.ones_like(x)
        return lead * self._bump.value(x) + x**k * self._bump.deriv1(x)

    def deriv2(self, x):
        x = np.asarray(x, dtype=float)
        k = self.k
        b, b1, b2 = self._bump.value(x), self._bump.deriv1(x), self._bump.deriv2(x)
        if k == 1:
            return 2.0 * b1 + x * b2
        return (k * (k - 1) * x ** (k - 2) * b
                + 2.0 * k * x ** (k - 1) * b1 + x**k * b2)


class ScaledFunction:
    """c * psi for a scalar c."""

    def __init__(self, base, c: float):
        self._base = base
        self._c = float(c)
        self.support_radius = base.support_radius

    @property
    def value_at_0(self) -> float:
        return self._c * self._base.value_at_0

    def value(self, x):
        return self._c * self._base.value(x)

    def deriv1(self, x):
        return self._c * self._base.deriv1(x)

    def deriv2(self, x):
        return self._c * self._base.deriv2(x)


class SumFunction:
    """Pointwise sum of smooth compactly supported functions."""

    def __init__(self, *parts):
        if not parts:
            raise ValueError("need at least one part")
        self._parts = parts
        self.support_radius = max(f.support_radius for f in parts)

    @property
    def value_at_0(self) -> float:
        return sum(f.value_at_0 for f in self._parts)

    def value(self, x):
        return sum(f.value(x) for f in self._parts)

    def deriv1(self, x):
        return sum(f.deriv1(x) for f in self._parts)

    def deriv2(self, x):
        return sum(f.deriv2(x) for f in self._parts)


class Reflected1D:
    """psi(s x) for a sign s in {+1, -1}."""

    def __init__(self, base, s: int):
        self._base = base
        self._s = int(s)
        self.support_radius = base.support_radius

    @property
    def value_at_0(self) -> float:
        return self._base.value_at_0

    def value(self, x):
        return self._base.value(self._s * np.asarray(x, dtype=float))

    def deriv1(self, x):
        return self._s * self._base.deriv1(self._s * np.asarray(x, dtype=float))

    def deriv2(self, x):
        return self._base.deriv2(self._s * np.asarray(x, dtype=float))


def standard_bump(r: float) -> SmoothBump:
    """The default compactly supported amplitude of radius r."""
    return SmoothBump(r)


def _h(s):
    """e^{-1/s} for s > 0, 0 otherwise; the flat transition building block."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    m = s > 1e-12
    out[m] = np.exp(-1.0 / s[m])
    return out


def _h1(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    m = s > 1e-12
    out[m] = np.exp(-1.0 / s[m]) / s[m] ** 2
    return out


def _h2(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    m = s > 1e-12
    sm = s[m]
    out[m] = np.exp(-1.0 / sm) * (1.0 - 2.0 * sm) / sm**4
    return out


class CutoffPair:
    """Smooth partition alpha + beta = 1 with alpha = 1 on |x| <= 1 and
    alpha = 0 on |x| >= 2: alpha = h(2-|x|) / (h(2-|x|) + h(|x|-1))."""

    def alpha(self, x):
        x = np.asarray(x, dtype=float)
        m = np.abs(x)
        out = np.asarray(np.where(m <= 1.0, 1.0, 0.0), dtype=float)
        mid = (m > 1.0) & (m < 2.0)
        a = _h(2.0 - m[mid])
        b = _h(m[mid] - 1.0)
        out[mid] = a / (a + b)
        return out if out.ndim else float(out)

    def beta(self, x):
        return 1.0 - self.alpha(x)

    def alpha_d1(self, x):
        """d alpha / dx, supported in 1 < |x| < 2."""
        x = np.asarray(x, dtype=float)
        m = np.abs(x)
        out = np.zeros_like(m)
        mid = (m > 1.0) & (m < 2.0)
        mm = m[mid]
        a, b = _h(2.0 - mm), _h(mm - 1.0)
        am = -_h1(2.0 - mm)       # d/dm h(2-m)
        bm = _h1(mm - 1.0)        # d/dm h(m-1)
        dm = (am * b - a * bm) / (a + b) ** 2
        out[mid] = dm * np.sign(x[mid])
        return out if out.ndim else float(out)

    def beta_d1(self, x):
        d = self.alpha_d1(x)
        return -d

    def alpha_d2(self, x):
        x = np.asarray(x, dtype=float)
        m = np.abs(x)
        out = np.zeros_like(m)
        mid = (m > 1.0) & (m < 2.0)
        mm = m[mid]
        a, b = _h(2.0 - mm), _h(mm - 1.0)
        am, bm = -_h1(2.0 - mm), _h1(mm - 1.0)
        amm, bmm = _h2(2.0 - mm), _h2(mm - 1.0)
        s = a + b
        first = (am * b - a * bm) / s**2
        second = (amm * b - a * bmm) / s**2 - 2.0 * first * (am + bm) / s
        out[mid] = second  # even function: d2/dx2 = d2/dm2 on both branches
        return out if out.ndim else float(out)


def cutoff_pair() -> CutoffPair:
    return CutoffPair()


# ---------------------------------------------------------------------------
# Derived amplitudes from the change of variables u = e^{-1/x^p}.
# Internally everything is parameterized by ell = -log u = 1/x^p, which
# stays representable when u itself would underflow.

def psi_tilde_neglog(ell, psi, p: float):
    """psi((1/ell)^{1/p}) for ell = -log u > 0, extended by psi(0) at ell=inf."""
    ell = np.asarray(ell, dtype=float)
    if np.any(ell <= 0):
        raise ValueError("ell must be positive")
    x = ell ** (-1.0 / p)
    return psi.value(x)


def psi_tilde(u, psi, p: float):
    """Pushforward of psi under the flat change of variables:
    psi((-1/log u)^{1/p}) for u in (0, 1/2), psi(0) at u = 0."""
    u = np.asarray(u, dtype=float)
    if np.any(u >= 0.5):
        raise ValueError("psi_tilde defined on [0, 1/2)")
    if np.any(u < 0):
        raise ValueError("u must be nonnegative")
    scalar = u.ndim == 0
    u = np.atleast_1d(u)
    out = np.empty_like(u)
    zero = u == 0.0
    out[zero] = psi.value_at_0
    if np.any(~zero):
        out[~zero] = psi_tilde_neglog(-np.log(u[~zero]), psi, p)
    return float(out[0]) if scalar else out


def a_of_neglog(ell, psi, p: float):
    """The integration-by-parts amplitude in terms of ell = -log u:

    a = [-1 + (1/p+1)/ell] psi(ell^{-1/p}) + (1/p) psi'(ell^{-1/p}) ell^{-1/p-1}
    with the continuous extension a -> -psi(0) as ell -> inf.
    """
    ell = np.asarray(ell, dtype=float)
    if np.any(ell <= 0):
        raise ValueError("ell must be positive")
    x = ell ** (-1.0 / p)
    bracket = -1.0 + (1.0 / p + 1.0) / ell
    out = bracket * psi.value(x) + (1.0 / p) * psi.deriv1(x) * ell ** (-1.0 / p - 1.0)
    return out if out.ndim else float(out)


def a_of_u(u, psi, p: float):
    """a(u) on (0, 1/2), with a(0) = -psi(0)."""
    u = np.asarray(u, dtype=float)
    if np.any(u >= 0.5) or np.any(u < 0):
        raise ValueError("a_of_u defined on [0, 1/2)")
    scalar = u.ndim == 0
    u = np.atleast_1d(u)
    out = np.empty_like(u)
    zero = u == 0.0
    out[zero] = -psi.value_at_0
    if np.any(~zero):
        out[~zero] = a_of_neglog(-np.log(u[~zero]), psi, p)
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# 2D amplitudes.

class ProductAmplitude:
    """phi(x1, x2) = psi1(x1) * psi2(x2)."""

    def __init__(self, psi1, psi2):
        self.psi1 = psi1
        self.psi2 = psi2
        self.support = (psi1.support_radius, psi2.support_radius)

    @property
    def is_product(self) -> bool:
        return True

    def value_at_origin(self) -> float:
        return self.psi1.value_at_0 * self.psi2.value_at_0

    def value(self, x1, x2):
        return self.psi1.value(x1) * self.psi2.value(x2)

    def d_x2(self, x1, x2):
        return self.psi1.value(x1) * self.psi2.deriv1(x2)

    def reflected(self, s1: int, s2: int) -> "ProductAmplitude":
        return ProductAmplitude(Reflected1D(self.psi1, s1),
                                Reflected1D(self.psi2, s2))


class RadialBumpAmplitude:
    """Non-product bump phi = exp(-rho^2/(r^2 - rho^2)), rho^2 = x1^2 + x2^2."""

    def __init__(self, radius: float):
        if radius <= 0:
            raise ValueError("radius must be positive")
        self.radius = float(radius)
        self.support = (self.radius, self.radius)

    @property
    def is_product(self) -> bool:
        return False

    def value_at_origin(self) -> float:
        return 1.0

    def value(self, x1, x2):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        r2 = self.radius**2
        rho2 = np.atleast_1d(x1 * x1 + x2 * x2)
        out = np.zeros_like(rho2)
        m = rho2 < r2 * (1.0 - 1e-14)
        out[m] = np.exp(-rho2[m] / (r2 - rho2[m]))
        if np.ndim(x1) == 0 and np.ndim(x2) == 0:
            return float(out[0])
        return out

    def d_x2(self, x1, x2):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        r2 = self.radius**2
        rho2 = np.atleast_1d(x1 * x1 + x2 * x2)
        x2b = np.broadcast_to(np.atleast_1d(x2), rho2.shape)
        out = np.zeros_like(rho2)
        m = rho2 < r2 * (1.0 - 1e-14)
        d = r2 - rho2[m]
        out[m] = np.exp(-rho2[m] / d) * (-2.0 * x2b[m] * r2 / d**2)
        if np.ndim(x1) == 0 and np.ndim(x2) == 0:
            return float(out[0])
        return out

    def reflected(self, s1: int, s2: int) -> "ReflectedAmplitude":
        return ReflectedAmplitude(self, s1, s2)


class ReflectedAmplitude:
    """phi(s1 x1, s2 x2) for signs s1, s2 in {+1, -1}."""

    def __init__(self, base, s1: int, s2: int):
        self._base = base
        self._s1, self._s2 = int(s1), int(s2)
        self.support = base.support

    @property
    def is_product(self) -> bool:
        return self._base.is_product

    def value_at_origin(self) -> float:
        return self._base.value_at_origin()

    def value(self, x1, x2):
        return self._base.value(self._s1 * np.asarray(x1), self._s2 * np.asarray(x2))

    def d_x2(self, x1, x2):
        return self._s2 * self._base.d_x2(self._s1 * np.asarray(x1),
                                          self._s2 * np.asarray(x2))


class AmplitudeSlice:
    """x1 |-> phi(x1, x2_fixed), presented as a 1D compactly supported
    amplitude (values only; no derivative data needed downstream)."""

    def __init__(self, phi, x2: float):
        self._phi = phi
        self._x2 = float(x2)
        self.support_radius = phi.support[0]

    @property
    def value_at_0(self) -> float:
        return float(self._phi.value(0.0, self._x2))

    def value(self, x):
        return self._phi.value(np.asarray(x, dtype=float), self._x2)


_GL16_NODES, _GL16_WEIGHTS = leggauss(16)


def _gauss_vec(f, a: float, b: float) -> np.ndarray:
    c, h = 0.5 * (a + b), 0.5 * (b - a)
    vals = f(c + h * _GL16_NODES)  # shape (16, n)
    return h * np.tensordot(_GL16_WEIGHTS, vals, axes=(0, 0))


def _adaptive_edges(f, a: float, b: float, tol: float, depth: int = 0,
                    edges: list[float] | None = None) -> list[float]:
    """Panel edges for which single-panel 16-point Gauss matches its own
    two-panel refinement to `tol` in max-norm."""
    if edges is None:
        edges = [a]
    whole = _gauss_vec(f, a, b)
    m = 0.5 * (a + b)
    halves = _gauss_vec(f, a, m) + _gauss_vec(f, m, b)
    if np.max(np.abs(whole - halves)) <= tol or depth >= 12:
        edges.append(b)
        return edges
    _adaptive_edges(f, a, m, 0.5 * tol, depth + 1, edges)
    _adaptive_edges(f, m, b, 0.5 * tol, depth + 1, edges)
    return edges


def _adaptive_vec(f, a: float, b: float, tol: float) -> np.ndarray:
    """Adaptive vector-valued quadrature (16-point Gauss, bisection on the
    max-norm difference against the two-panel refinement)."""
    edges = _adaptive_edges(f, a, b, tol)
    return sum(_gauss_vec(f, lo, hi) for lo, hi in zip(edges[:-1], edges[1:]))


def _dP_dx2_rows(phi, q: int, x2: float, x1v: np.ndarray):
    def rows_at(s_arr):
        # dP/dx2 (x1, z) = e^{z^q} (q z^{q-1} phi + dphi/dx2)(x1, z), z = s x2;
        # one broadcasted call over the (x1, s) grid
        z = np.asarray(s_arr, dtype=float) * x2
        ez = np.exp(z**q)
        x1g = x1v[:, None]
        zg = z[None, :]
        vals = ez[None, :] * (q * zg ** (q - 1) * phi.value(x1g, zg)
                              + phi.d_x2(x1g, zg))
        return vals.T
    return rows_at


def plan_remainder_edges(x2: float, phi, q: int, probe_x1,
                         tol: float = 1e-12) -> list[float]:
    """Adaptive s-panel edges for the remainder's s-integral at this x2,
    chosen on a probe set of x1 values; reusable for later evaluations at
    the same x2 (the slice objects of the iterated integrals)."""
    probe = np.atleast_1d(np.asarray(probe_x1, dtype=float))
    return _adaptive_edges(_dP_dx2_rows(phi, q, x2, probe), 0.0, 1.0, tol)


def remainder_R(x1, x2: float, phi, q: int, cutoffs: CutoffPair | None = None,
                s_edges: list[float] | None = None):
    """Remainder amplitude of the x2-Taylor splitting of phi:

    R(x1, x2) = e^{-x2^q} ( beta(x2) P(x1, 0)/x2 + int_0^1 dP/dx2(x1, s x2) ds ),
    P(x1, x2) = e^{x2^q} phi(x1, x2), with R(x1, 0) = dphi/dx2(x1, 0).

    The beta term vanishes identically for |x2| <= 1.  Vectorized over x1.
    The s-integral is done adaptively (steep compactly supported amplitudes
    have boundary layers along the segment s -> (x1, s x2) that a fixed
    rule cannot resolve), or on precomputed `s_edges` panels.
    """
    if cutoffs is None:
        cutoffs = cutoff_pair()
    x1 = np.asarray(x1, dtype=float)
    scalar = x1.ndim == 0
    x1v = np.atleast_1d(x1)
    if x2 == 0.0:
        out = np.asarray(phi.d_x2(x1v, 0.0), dtype=float)
        return float(out[0]) if scalar else out
    rows_at = _dP_dx2_rows(phi, q, x2, x1v)
    if s_edges is None:
        s_int = _adaptive_vec(rows_at, 0.0, 1.0, 1e-12)
    else:
        s_int = sum(_gauss_vec(rows_at, lo, hi)
                    for lo, hi in zip(s_edges[:-1], s_edges[1:]))
    beta_term = 0.0
    b = float(cutoffs.beta(x2))
    if b != 0.0:
        beta_term = b * np.asarray(phi.value(x1v, 0.0), dtype=float) / x2
    out = math.exp(-(x2**q)) * (beta_term + s_int)
    return float(out[0]) if scalar else out

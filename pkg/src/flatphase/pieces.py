"""Evaluators for the named integrals of the flat-phase decomposition.

The one-dimensional family (amplitude psi, scale X = log t)

    L  = int_0^inf  e^{i t e^{-1/x^p}} psi(x) dx
    L1 = same over [0, X^{-1/p}],  L2 = same over [X^{-1/p}, inf)
    L2 = M1 + M2  (one integration by parts in u = e^{-1/x^p})

and the two-dimensional family for phi(x1, x2), phase sign*x2^q + flat(x1):

    Itilde = J1 + J2,  J1 = K1 - K2 + K3,  K3 = H1 + H2,  J2 = N1 + N2.

Each piece has a "direct" representation (the definition as written,
usable for moderate X) and a "transformed" one (the stabilizing change of
variables, usable at arbitrarily large X).  Outer x2-integrals are always
rescaled to y = t x2^q so the oscillation e^{iy} has unit frequency, and
evaluated with Filon panels plus an integration-by-parts tail.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .phases import (AmplitudeSlice, CutoffPair, FlatPhaseParams, a_of_neglog,
                     cutoff_pair, flat_term, plan_remainder_edges,
                     psi_tilde_neglog, remainder_R)
from .quadrature import (DEFAULT_TOL, Interval, QuadratureResult,
                         ToleranceConfig, integrate_adaptive, integrate_filon,
                         integrate_oscillatory)
from .specfun import gamma_real

__all__ = [
    "PieceId",
    "PieceValue",
    "EvalRequest",
    "X_DIRECT_MAX",
    "X_DIRECT2D_MAX",
    "X_ITERATED_MAX",
    "eval_L",
    "eval_L1",
    "eval_L2",
    "eval_M1",
    "eval_M2",
    "eval_K1_factor",
    "eval_S_power",
    "eval_K1",
    "eval_K2",
    "eval_K3",
    "eval_H1",
    "eval_H2",
    "eval_J1",
    "eval_J2",
    "eval_N1",
    "eval_N2",
    "eval_Itilde",
    "eval_I2d",
    "eval_piece",
]

X_DIRECT_MAX = 30.0      # beyond this the unscaled phases lose accuracy
X_DIRECT_L_MAX = 12.0    # full L in x-space: oscillation count grows like e^X
X_DIRECT2D_MAX = 15.0
X_ITERATED_MAX = 60.0

_PHASE_CUT = 45.0        # e^{-45}: below double rounding of every target


class PieceId(enum.Enum):
    L = "L"
    L1 = "L1"
    L2 = "L2"
    M1 = "M1"
    M2 = "M2"
    I2D = "I2D"
    ITILDE_PLUS = "ITILDE_PLUS"
    ITILDE_MINUS = "ITILDE_MINUS"
    J1 = "J1"
    J2 = "J2"
    K1 = "K1"
    K2 = "K2"
    K3 = "K3"
    H1 = "H1"
    H2 = "H2"
    N1 = "N1"
    N2 = "N2"
    S_POWER = "S_POWER"


@dataclass
class PieceValue:
    value: complex
    abs_error_estimate: float
    representation_used: str

    def __post_init__(self):
        if not (math.isfinite(self.value.real) and math.isfinite(self.value.imag)):
            raise ArithmeticError("piece value is not finite")


@dataclass
class EvalRequest:
    piece: PieceId
    params: FlatPhaseParams
    amplitude: object
    X: float
    representation: str = "auto"
    tol: ToleranceConfig = field(default_factory=ToleranceConfig)


def _as_result(q: QuadratureResult, rep: str) -> PieceValue:
    return PieceValue(complex(q.value), float(q.abs_error_estimate), rep)


def _u_support(psi, p: float) -> float:
    """Upper end of the u-support of psi-tilde: e^{-1/r^p} for support radius r."""
    return float(flat_term(psi.support_radius, p))


# ---------------------------------------------------------------------------
# L1: over [0, X^{-1/p}] the phase t e^{-1/x^p} = e^{X - 1/x^p} stays in [0, 1],
# so nothing oscillates.  The transformed representation rewrites, with
# v = X u and x(v) = (X+v)^{-1/p},
#   L1 = int_0^{x(u0 X)} psi dx
#        + (p X^{1+1/p})^{-1} int_{u0 X}^{inf} (e^{i sgn e^{-v}} - 1)
#                                  psi(x(v)) (1 + v/X)^{-1-1/p} dv,
# where the first term is the v-integral of the non-oscillating part pulled
# back exactly, and the second is cut at v = 45 (e^{-45} phase residual).
# u0 = 0 gives L1 itself; u0 > 0 gives the tail piece used by alternate
# splits of L.

def _smooth_psi_integral(psi, x_up: float, tol: ToleranceConfig):
    hi = min(x_up, psi.support_radius)
    if hi <= 0:
        return QuadratureResult(0j, 0.0, 0, True)
    return integrate_adaptive(lambda x: np.asarray(psi.value(x), dtype=complex),
                              Interval(0.0, hi), tol)


def _l1_transformed(X: float, psi, p: float, tol: ToleranceConfig,
                    sgn: int = 1, u_start: float = 0.0):
    x_up = (X * (1.0 + u_start)) ** (-1.0 / p)
    part1 = _smooth_psi_integral(psi, x_up, tol)
    v_lo = u_start * X
    if v_lo >= _PHASE_CUT:
        return part1
    pref = 1.0 / (p * X ** (1.0 + 1.0 / p))

    def integrand(v):
        x = (X + v) ** (-1.0 / p)
        phase = np.exp(1j * sgn * np.exp(-v)) - 1.0
        return phase * psi.value(x) * (1.0 + v / X) ** (-1.0 - 1.0 / p)

    part2 = integrate_adaptive(integrand, Interval(v_lo, _PHASE_CUT), tol)
    combined = QuadratureResult(part1.value + pref * part2.value,
                                part1.abs_error_estimate
                                + pref * part2.abs_error_estimate
                                + 1e-16 * abs(part1.value),
                                part1.n_evals + part2.n_evals,
                                part1.converged and part2.converged)
    return combined


def _l1_direct(X: float, psi, p: float, tol: ToleranceConfig, sgn: int = 1):
    x_star = X ** (-1.0 / p)
    hi = min(x_star, psi.support_radius)
    if hi <= 0:
        return QuadratureResult(0j, 0.0, 0, True)

    def integrand(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x, dtype=complex)
        nz = x > 0
        expo = X - x[nz] ** (-p)
        phase = np.exp(np.minimum(expo, 0.0))
        out[nz] = np.exp(1j * sgn * phase) * psi.value(x[nz])
        out[~nz] = psi.value(x[~nz]) * 1.0  # phase tends to 0 at x=0
        return out

    return integrate_adaptive(integrand, Interval(0.0, hi), tol)


def eval_L1(X: float, psi, p: float, representation: str = "auto",
            tol: ToleranceConfig = DEFAULT_TOL, t_sign: int = 1) -> PieceValue:
    """First piece of L: integral over [0, X^{-1/p}]."""
    if X <= 1.0:
        raise ValueError("X must exceed 1")
    rep = representation
    if rep == "auto":
        rep = "transformed"
    if rep == "direct":
        if X > X_DIRECT_MAX:
            raise ValueError(f"direct representation limited to X <= {X_DIRECT_MAX}")
        return _as_result(_l1_direct(X, psi, p, tol, t_sign), "direct")
    return _as_result(_l1_transformed(X, psi, p, tol, t_sign), "transformed")


# ---------------------------------------------------------------------------
# L2: after u = e^{-1/x^p} the piece reads (with ell = -log u)
#   L2 = (1/p) int_{1/t}^{1/2} e^{i t u} u^{-1} ell^{-(1/p+1)} psi(ell^{-1/p}) du,
# and after w = t u it becomes a unit-frequency integral from w = 1.
# The 1/p is the Jacobian dx/du = (1/p) u^{-1} ell^{-(1/p+1)}, verified
# against direct x-space quadrature; without it the decomposition
# L = L1 + L2 fails for p != 1.

def _l2_amplitude_w(X: float, psi, p: float):
    a = 1.0 / p + 1.0

    def amp(w):
        w = np.asarray(w, dtype=float)
        out = np.zeros_like(w, dtype=complex)
        pos = w > 0
        ell = X - np.log(w[pos])
        out[pos] = (1.0 / (p * w[pos])) * ell ** (-a) * psi_tilde_neglog(ell, psi, p)
        return out

    return amp


def _l2_transformed(X: float, psi, p: float, tol: ToleranceConfig,
                    sgn: int = 1, w_start: float = 1.0):
    u_sup = _u_support(psi, p)
    w_end = u_sup * math.exp(X)
    if w_end <= w_start:
        return QuadratureResult(0j, 0.0, 0, True)
    amp = _l2_amplitude_w(X, psi, p)
    return integrate_oscillatory(amp, float(sgn), Interval(w_start, math.inf),
                                 tol, support_end=w_end)


def _l2_direct(X: float, psi, p: float, tol: ToleranceConfig, sgn: int = 1):
    t = math.exp(X)
    u_sup = _u_support(psi, p)
    a = 1.0 / p + 1.0

    def amp(u):
        u = np.asarray(u, dtype=float)
        out = np.zeros_like(u, dtype=complex)
        pos = u > 0
        ell = -np.log(u[pos])
        out[pos] = (1.0 / (p * u[pos])) * ell ** (-a) * psi_tilde_neglog(ell, psi, p)
        return out

    return integrate_oscillatory(amp, sgn * t, Interval(1.0 / t, 0.5), tol,
                                 support_end=u_sup)


def eval_L2(X: float, psi, p: float, representation: str = "auto",
            tol: ToleranceConfig = DEFAULT_TOL, t_sign: int = 1) -> PieceValue:
    """Second piece of L: integral over [X^{-1/p}, infinity)."""
    if X <= 1.0:
        raise ValueError("X must exceed 1")
    rep = representation
    if rep == "auto":
        rep = "transformed"
    if rep == "direct":
        if X > X_DIRECT_MAX:
            raise ValueError(f"direct representation limited to X <= {X_DIRECT_MAX}")
        return _as_result(_l2_direct(X, psi, p, tol, t_sign), "direct")
    return _as_result(_l2_transformed(X, psi, p, tol, t_sign), "transformed")


def eval_L(X: float, psi, p: float, representation: str = "auto",
           tol: ToleranceConfig = DEFAULT_TOL, t_sign: int = 1) -> PieceValue:
    """Full flat-phase integral L = int_0^inf e^{i t e^{-1/x^p}} psi(x) dx.

    direct: adaptive in x (oscillation count grows like e^X, so X <= 12);
    transformed: recombined from the stabilized pieces with the split moved
    to x = (2X)^{-1/p}, which exercises a different decomposition than
    L1 + L2 at the standard split.
    """
    if X <= 1.0:
        raise ValueError("X must exceed 1")
    rep = representation
    if rep == "auto":
        rep = "direct" if X <= X_DIRECT_L_MAX else "transformed"
    if rep == "direct":
        if X > X_DIRECT_L_MAX:
            raise ValueError(f"direct L limited to X <= {X_DIRECT_L_MAX}")
        t = math.exp(X)

        def integrand(x):
            x = np.asarray(x, dtype=float)
            u = flat_term(x, p)
            return np.exp(1j * t_sign * t * u) * psi.value(x)

        big = ToleranceConfig(tol.abs_tol, tol.rel_tol,
                              max(tol.max_subdivisions, 20000),
                              max(tol.max_evals, 2_000_000))
        res = integrate_adaptive(integrand, Interval(0.0, psi.support_radius), big)
        return _as_result(res, "direct")
    head = _l1_transformed(X, psi, p, tol, t_sign, u_start=1.0)
    tail = _l2_transformed(X, psi, p, tol, t_sign, w_start=math.exp(-X))
    return _as_result(head + tail, "transformed")


# ---------------------------------------------------------------------------
# M1/M2: the boundary term and the differentiated integral from one
# integration by parts of L2 in the u variable.

def eval_M1(X: float, psi, p: float, t_sign: int = 1) -> PieceValue:
    """Boundary term of the integration by parts of L2 in u:
    (1/p) i sgn e^{i sgn} psi(X^{-1/p}) X^{-(1/p+1)}; closed form.
    (1/p is the substitution Jacobian carried by L2.)"""
    if X <= 1.0:
        raise ValueError("X must exceed 1")
    val = (1j * t_sign * np.exp(1j * t_sign)
           * psi_tilde_neglog(X, psi, p) * X ** (-(1.0 / p + 1.0)) / p)
    return PieceValue(complex(val), 1e-16 * abs(val), "closed-form")


def _m2_amplitude_w(X: float, psi, p: float):
    a = 1.0 / p + 1.0

    def amp(w):
        w = np.asarray(w, dtype=float)
        out = np.zeros_like(w, dtype=complex)
        pos = w > 0
        ell = X - np.log(w[pos])
        out[pos] = (w[pos] ** (-2.0) / p) * ell ** (-a) * a_of_neglog(ell, psi, p)
        return out

    return amp


def eval_M2(X: float, psi, p: float, representation: str = "auto",
            tol: ToleranceConfig = DEFAULT_TOL, t_sign: int = 1) -> PieceValue:
    """Differentiated piece of L2 after one integration by parts."""
    if X <= 1.0:
        raise ValueError("X must exceed 1")
    rep = representation
    if rep == "auto":
        rep = "transformed"
    u_sup = _u_support(psi, p)
    if rep == "direct":
        if X > X_DIRECT_MAX:
            raise ValueError(f"direct representation limited to X <= {X_DIRECT_MAX}")
        t = math.exp(X)
        a = 1.0 / p + 1.0

        def amp(u):
            u = np.asarray(u, dtype=float)
            out = np.zeros_like(u, dtype=complex)
            pos = u > 0
            ell = -np.log(u[pos])
            out[pos] = u[pos] ** (-2.0) * ell ** (-a) * a_of_neglog(ell, psi, p)
            return out

        res = integrate_oscillatory(amp, t_sign * t, Interval(1.0 / t, 0.5), tol,
                                    support_end=u_sup)
        pref = -1.0 / (1j * t_sign * t)
        return PieceValue(pref * res.value, abs(pref) * res.abs_error_estimate,
                          "direct")
    w_end = u_sup * math.exp(X)
    amp = _m2_amplitude_w(X, psi, p)
    res = integrate_oscillatory(amp, float(t_sign), Interval(1.0, math.inf), tol,
                                support_end=w_end)
    val = 1j * t_sign * res.value
    return PieceValue(complex(val), res.abs_error_estimate, "transformed")


# ---------------------------------------------------------------------------
# Closed-form x2 factor of K1 and the power-phase factor S.

def eval_K1_factor(q: int, X: float) -> complex:
    """int_0^inf e^{-[1-it] x2^q} dx2 = Gamma(1/q+1) (1-it)^{-1/q}, t = e^X.

    Evaluated in log-polar form so it stays finite for any X: modulus
    (1+t^2)^{-1/(2q)}, argument arctan(t)/q.
    """
    if q < 2:
        raise ValueError("q must be >= 2")
    g = gamma_real(1.0 / q + 1.0)
    if X >= 0:
        mag = math.exp(-X / q) * (1.0 + math.exp(-2.0 * X)) ** (-0.5 / q)
    else:
        mag = (1.0 + math.exp(2.0 * X)) ** (-0.5 / q)
    t = math.exp(X) if X < 700 else math.inf
    ang = math.atan(t) / q
    return g * mag * complex(math.cos(ang), math.sin(ang))


def eval_S_power(q: int, X: float, psi2, sign: int = 1,
                 tol: ToleranceConfig = DEFAULT_TOL) -> PieceValue:
    """Pure power-phase factor S = int_0^inf e^{i sign t x^q} psi2(x) dx.

    Substituting y = t x^q makes the phase linear:
    S = (1/q) t^{-1/q} int_0^{t r^q} e^{i sign y} psi2((y/t)^{1/q}) y^{1/q-1} dy,
    handled by graded Filon panels plus the integration-by-parts tail.
    """
    if q < 2:
        raise ValueError("q must be >= 2")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    r = psi2.support_radius
    y_end = math.exp(X + q * math.log(r))
    pref = math.exp(-X / q) / q

    def amp(y):
        y = np.asarray(y, dtype=float)
        out = np.zeros_like(y, dtype=complex)
        pos = y > 0
        with np.errstate(divide="ignore"):
            x = np.exp((np.log(y[pos]) - X) / q)
        out[pos] = psi2.value(x) * y[pos] ** (1.0 / q - 1.0)
        return out

    res = integrate_oscillatory(amp, float(sign), Interval(0.0, math.inf), tol,
                                support_end=y_end)
    return PieceValue(pref * res.value, pref * res.abs_error_estimate, "scaled")


# ---------------------------------------------------------------------------
# Outer x2-integrals for the 2D pieces.  All are rescaled to y = t x2^q,
# where the oscillation is e^{i sign y}; the inner slice evaluation is a
# full 1D piece evaluation, so inner error estimates are propagated through
# the recorded samples.

class _InnerRecorder:
    """Amplitude adapter: evaluates inner slices elementwise and records
    (y, inner_error) samples for error propagation."""

    def __init__(self, fn):
        self._fn = fn
        self.samples: list[tuple[float, float]] = []

    def __call__(self, y):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        out = np.empty(y.shape, dtype=complex)
        for i, yi in enumerate(y):
            v, e = self._fn(float(yi))
            out[i] = v
            self.samples.append((float(yi), float(e)))
        return out

    def propagated_error(self) -> float:
        if not self.samples:
            return 0.0
        pts = sorted(self.samples)
        ys = np.array([p[0] for p in pts])
        es = np.array([p[1] for p in pts])
        if ys.size < 2:
            return float(es[0])
        # incoherent bound: integral of the weighted inner error estimates
        # (oscillatory suppression would only shrink the true effect)
        return float(np.trapezoid(es, ys))


def _outer_scaled(X: float, q: int, inner, y_exponent: float,
                  extra, y_start: float, y_end: float,
                  tol: ToleranceConfig, sign: int = 1):
    """int_{y_start}^{y_end} e^{i sign y} inner((y/t)^{1/q}) y^{y_exponent} extra(y) dy."""

    def fn(yi: float):
        if yi <= 0:
            return 0j, 0.0
        x2 = math.exp((math.log(yi) - X) / q)
        v, e = inner(x2)
        w = yi ** y_exponent * (extra(yi) if extra is not None else 1.0)
        return v * w, abs(w) * e

    rec = _InnerRecorder(fn)
    # the slice argument (y/t)^{1/q} is root-like at y = 0, so the stub is
    # always adaptive; deep grading only for singular weights y^{negative}
    depth = 40 if y_exponent < 0 else 20
    res = integrate_oscillatory(rec, float(sign), Interval(y_start, math.inf),
                                tol, support_end=y_end, lo_grading_depth=depth)
    err = res.abs_error_estimate + rec.propagated_error()
    return res.value, err, res.converged


def _outer_alpha(X: float, q: int, inner, u2_exponent: float,
                 tol: ToleranceConfig, sign: int = 1, cutoffs: CutoffPair | None = None):
    """int_0^2 e^{i sign u2^q} inner(u2 t^{-1/q}) alpha(u2) u2^{u2_exponent} du2,
    evaluated directly (the phase spans at most 2^q radians)."""
    if cutoffs is None:
        cutoffs = cutoff_pair()
    tscale = math.exp(-X / q)

    def fn(u2: float):
        if u2 <= 0:
            u2 = 0.0
        v, e = inner(u2 * tscale)
        a = float(cutoffs.alpha(u2))
        w = a * u2 ** u2_exponent if u2 > 0 else (a if u2_exponent == 0 else 0.0)
        return v * w * complex(math.cos(sign * u2**q), math.sin(sign * u2**q)), abs(w) * e

    rec = _InnerRecorder(fn)
    res = integrate_adaptive(rec, Interval(0.0, 2.0), tol)
    err = res.abs_error_estimate + rec.propagated_error()
    return res.value, err, res.converged


# ---------------------------------------------------------------------------
# The 2D pieces.

def _inner_tol(tol: ToleranceConfig) -> ToleranceConfig:
    """Tolerance for inner slice evaluations: relative accuracy matters
    (slice values feed an outer oscillatory integral), absolute floor keeps
    near-zero slices cheap."""
    return ToleranceConfig(max(tol.abs_tol * 100.0, 1e-10), max(tol.rel_tol, 1e-8),
                           200, 100_000)


def _outer_tol(tol: ToleranceConfig) -> ToleranceConfig:
    """Tolerance for the outer rescaled integral.  Its natural magnitude is
    O(0.1) before the e^{-X/q} prefactors are applied, and every inner
    sample is itself a quadrature, so moderate relative accuracy is the
    right cost point; the reported error estimates stay honest."""
    return ToleranceConfig(max(tol.abs_tol * 300.0, 3e-8), max(tol.rel_tol, 1e-7),
                           tol.max_subdivisions, tol.max_evals)


def eval_K1(X: float, phi, params: FlatPhaseParams,
            tol: ToleranceConfig = DEFAULT_TOL) -> PieceValue:
    """K1 = L1(t; phi(.,0)) * Gamma(1/q+1)(1-it)^{-1/q}."""
    sl = AmplitudeSlice(phi, 0.0)
    l1 = _l1_transformed(X, sl, params.p, _inner_tol(tol))
    fac = eval_K1_factor(params.q, X)
    return PieceValue(l1.value * fac, abs(fac) * l1.abs_error_estimate
                      + 1e-16 * abs(l1.value * fac), "factored")


def eval_K2_factor(q: int, X: float, tol: ToleranceConfig = DEFAULT_TOL,
                   cutoffs: CutoffPair | None = None, t_sign: int = 1) -> tuple[complex, float]:
    """int_0^inf e^{-[1-it] x2^q} beta(x2) dx2 via y = x2^q and one analytic
    integration by parts (the boundary terms vanish: beta is flat at 1).

    The extra 1/t from the integration by parts keeps the superpolynomially
    small true value from being drowned by interpolation noise.
    """
    if cutoffs is None:
        cutoffs = cutoff_pair()
    t = math.exp(X)
    omega = t_sign * t

    def gprime(y):
        y = np.asarray(y, dtype=float)
        z = y ** (1.0 / q)
        b = cutoffs.beta(z)
        b1 = cutoffs.beta_d1(z)
        return np.exp(-y) * (-b * y ** (1.0 / q - 1.0)
                             + (1.0 / q) * b1 * y ** (2.0 / q - 2.0)
                             + (1.0 / q - 1.0) * b * y ** (1.0 / q - 2.0)) + 0j

    res = integrate_filon(gprime, omega, Interval(1.0, 45.0 + 2.0**q), tol)
    pref = -1.0 / (1j * omega * q)
    err = abs(pref) * res.abs_error_estimate + 3e-20  # e^{-45} truncation
    return pref * res.value, err


def eval_K2(X: float, phi, params: FlatPhaseParams,
            tol: ToleranceConfig = DEFAULT_TOL) -> PieceValue:
    sl = AmplitudeSlice(phi, 0.0)
    l1 = _l1_transformed(X, sl, params.p, _inner_tol(tol))
    fac, ferr = eval_K2_factor(params.q, X, tol)
    val = l1.value * fac
    err = abs(l1.value) * ferr + abs(fac) * l1.abs_error_estimate
    return PieceValue(val, err + 1e-18, "factored")


def _r_slice_factory(phi, q: int, cutoffs: CutoffPair):
    class _RSlice:
        """x1 |-> R(x1, x2): the s-quadrature panel plan is built once per
        slice (first evaluation) and reused for every later x1 batch."""

        def __init__(self, x2: float):
            self._x2 = float(x2)
            self.support_radius = phi.support[0]
            self._edges: list[float] | None = None

        @property
        def value_at_0(self):
            return float(self.value(np.array([0.0]))[0])

        def value(self, x):
            x = np.asarray(x, dtype=float)
            if self._x2 != 0.0 and self._edges is None:
                probe = np.linspace(0.0, self.support_radius, 33)
                self._edges = plan_remainder_edges(self._x2, phi, q, probe)
            return remainder_R(x, self._x2, phi, q, cutoffs, s_edges=self._edges)

    return _RSlice


def eval_K3(X: float, phi, params: FlatPhaseParams,
            tol: ToleranceConfig = DEFAULT_TOL) -> PieceValue:
    """K3 = int_0^inf e^{i t x2^q} L1(t; R(., x2)) x2 dx2, y-rescaled."""
    q, p = params.q, params.p
    cutoffs = cutoff_pair()
    RSlice = _r_slice_factory(phi, q, cutoffs)
    itol = _inner_tol(tol)

    def inner(x2: float):
        res = _l1_transformed(X, RSlice(x2), p, itol)
        return res.value, res.abs_error_estimate

    # R(., x2) vanishes only once alpha does (x2 >= 2), not at the phi support
    y_end = math.exp(X + q * math.log(2.0))
    pref = math.exp(-2.0 * X / q) / q
    val, err, ok = _outer_scaled(X, q, inner, 2.0 / q - 1.0, None, 0.0, y_end,
                                 _outer_tol(tol))
    return PieceValue(pref * val, pref * err, "iterated")


def eval_H1(X: float, phi, params: FlatPhaseParams,
            tol: ToleranceConfig = DEFAULT_TOL) -> PieceValue:
    """H1: the alpha(t^{1/q} x2)-localized part of K3, on u2 in [0, 2]."""
    q, p = params.q, params.p
    cutoffs = cutoff_pair()
    RSlice = _r_slice_factory(phi, q, cutoffs)
    itol = _inner_tol(tol)

    def inner(x2: float):
        res = _l1_transformed(X, RSlice(x2), p, itol)
        return res.value, res.abs_error_estimate

    val, err, ok = _outer_alpha(X, q, inner, 1.0, _outer_tol(tol), cutoffs=cutoffs)
    pref = math.exp(-2.0 * X / q)
    return PieceValue(pref * val, pref * err, "iterated")


def eval_H2(X: float, phi, params: FlatPhaseParams,
            tol: ToleranceConfig = DEFAULT_TOL) -> PieceValue:
    """H2: the beta(t^{1/q} x2) complement of H1 (support y >= 1)."""
    q, p = params.q, params.p
    cutoffs = cutoff_pair()
    RSlice = _r_slice_factory(phi, q, cutoffs)
    itol = _inner_tol(tol)

    def inner(x2: float):
        res = _l1_transformed(X, RSlice(x2), p, itol)
        return res.value, res.abs_error_estimate

    def beta_factor(y):
        return float(cutoffs.beta(y ** (1.0 / q)))

    y_end = math.exp(X + q * math.log(2.0))  # R-slice support, as in eval_K3
    pref = math.exp(-2.0 * X / q) / q
    val, err, ok = _outer_scaled(X, q, inner, 2.0 / q - 1.0, beta_factor,
                                 1.0, y_end, _outer_tol(tol))
    return PieceValue(pref * val, pref * err, "iterated")


def eval_J1(X: float, phi, params: FlatPhaseParams,
            tol: ToleranceConfig = DEFAULT_TOL) -> PieceValue:
    """J1 = int_0^inf e^{i t x2^q} L1(t; phi(., x2)) dx2, y-rescaled."""
    q, p = params.q, params.p
    itol = _inner_tol(tol)

    def inner(x2: float):
        res = _l1_transformed(X, AmplitudeSlice(phi, x2), p, itol)
        return res.value, res.abs_error_estimate

    y_end = math.exp(X + q * math.log(phi.support[1]))
    pref = math.exp(-X / q) / q
    val, err, ok = _outer_scaled(X, q, inner, 1.0 / q - 1.0, None, 0.0, y_end,
                                 _outer_tol(tol))
    return PieceValue(pref * val, pref * err, "iterated")


def eval_J2(X: float, phi, params: FlatPhaseParams,
            tol: ToleranceConfig = DEFAULT_TOL) -> PieceValue:
    """J2 = int_0^inf e^{i t x2^q} L2(t; phi(., x2)) dx2, y-rescaled."""
    q, p = params.q, params.p
    itol = _inner_tol(tol)

    def inner(x2: float):
        res = _l2_transformed(X, AmplitudeSlice(phi, x2), p, itol)
        return res.value, res.abs_error_estimate

    y_end = math.exp(X + q * math.log(phi.support[1]))
    pref = math.exp(-X / q) / q
    val, err, ok = _outer_scaled(X, q, inner, 1.0 / q - 1.0, None, 0.0, y_end,
                                 _outer_tol(tol))
    return PieceValue(pref * val, pref * err, "iterated")


def eval_N1(X: float, phi, params: FlatPhaseParams,
            tol: ToleranceConfig = DEFAULT_TOL) -> PieceValue:
    """N1: alpha-localized part of J2, directly on u2 in [0, 2]."""
    q, p = params.q, params.p
    itol = _inner_tol(tol)

    def inner(x2: float):
        res = _l2_transformed(X, AmplitudeSlice(phi, x2), p, itol)
        return res.value, res.abs_error_estimate

    val, err, ok = _outer_alpha(X, q, inner, 0.0, _outer_tol(tol))
    pref = math.exp(-X / q)
    return PieceValue(pref * val, pref * err, "iterated")


def eval_N2(X: float, phi, params: FlatPhaseParams,
            tol: ToleranceConfig = DEFAULT_TOL) -> PieceValue:
    """N2: beta complement of N1 (support y >= 1)."""
    q, p = params.q, params.p
    cutoffs = cutoff_pair()
    itol = _inner_tol(tol)

    def inner(x2: float):
        res = _l2_transformed(X, AmplitudeSlice(phi, x2), p, itol)
        return res.value, res.abs_error_estimate

    def beta_factor(y):
        return float(cutoffs.beta(y ** (1.0 / q)))

    y_end = math.exp(X + q * math.log(phi.support[1]))
    pref = math.exp(-X / q) / q
    val, err, ok = _outer_scaled(X, q, inner, 1.0 / q - 1.0, beta_factor,
                                 1.0, y_end, _outer_tol(tol))
    return PieceValue(pref * val, pref * err, "iterated")


def eval_Itilde(X: float, phi, params: FlatPhaseParams, sign: int | None = None,
                method: str = "auto", tol: ToleranceConfig = DEFAULT_TOL) -> PieceValue:
    """Quadrant integral over x1, x2 > 0 with phase sign*x2^q + flat(x1).

    factored (product amplitudes): L(t; psi1) * S^(sign)(t; psi2), exact by
    Fubini; iterated: outer y-integral over inner L slices.
    """
    if sign is None:
        sign = params.sign
    q, p = params.q, params.p
    if method == "auto":
        method = "factored" if getattr(phi, "is_product", False) else "iterated"
    if method == "factored":
        if not getattr(phi, "is_product", False):
            raise ValueError("factored method requires a product amplitude")
        l_val = eval_L(X, phi.psi1, p, "transformed", tol)
        s_val = eval_S_power(q, X, phi.psi2, sign, tol)
        val = l_val.value * s_val.value
        err = (abs(l_val.value) * s_val.abs_error_estimate
               + abs(s_val.value) * l_val.abs_error_estimate)
        return PieceValue(val, err, "factored")
    if X > X_ITERATED_MAX:
        raise ValueError(f"iterated method limited to X <= {X_ITERATED_MAX}")
    itol = _inner_tol(tol)

    def inner(x2: float):
        sl = AmplitudeSlice(phi, x2)
        r1 = _l1_transformed(X, sl, p, itol)
        r2 = _l2_transformed(X, sl, p, itol)
        return r1.value + r2.value, r1.abs_error_estimate + r2.abs_error_estimate

    y_end = math.exp(X + q * math.log(phi.support[1]))
    pref = math.exp(-X / q) / q
    val, err, ok = _outer_scaled(X, q, inner, 1.0 / q - 1.0, None, 0.0, y_end,
                                 _outer_tol(tol), sign=sign)
    return PieceValue(pref * val, pref * err, "iterated")


def _i2d_direct2d(X: float, phi, params: FlatPhaseParams,
                  tol: ToleranceConfig) -> PieceValue:
    """Brute-force tensorized adaptive cubature of the full 2D integral.

    Oscillation count grows like e^X in both directions: intended as a
    mutual oracle at small X.
    """
    q, p = params.q, params.p
    t = math.exp(X)
    r1, r2 = phi.support
    inner_tol = ToleranceConfig(tol.abs_tol * 0.1 / (2 * r2), tol.rel_tol,
                                4000, 500_000)

    def outer_integrand(x2_arr):
        out = np.empty(np.shape(x2_arr), dtype=complex)
        for i, x2 in enumerate(np.atleast_1d(x2_arr)):
            def inner_integrand(x1):
                u = flat_term(x1, p)
                return np.exp(1j * t * u) * phi.value(x1, float(x2))
            res = integrate_adaptive(inner_integrand, Interval(-r1, r1), inner_tol)
            out[i] = res.value * complex(math.cos(t * float(x2) ** q),
                                         math.sin(t * float(x2) ** q))
        return out

    big = ToleranceConfig(tol.abs_tol, tol.rel_tol, 4000, 10_000_000)
    res = integrate_adaptive(outer_integrand, Interval(-r2, r2), big)
    return _as_result(res, "direct2d")


def eval_I2d(X: float, phi, params: FlatPhaseParams, method: str = "auto",
             tol: ToleranceConfig = DEFAULT_TOL) -> PieceValue:
    """Full 2D oscillatory integral over the plane, as a quadrant sum.

    factored requires a product amplitude (any X); iterated works for
    general amplitudes (X <= 60); direct2d is the brute-force oracle
    (X <= 15, affordable only for small X).
    """
    q = params.q
    if method == "auto":
        method = "factored" if getattr(phi, "is_product", False) else "iterated"
    if method == "direct2d":
        if X > X_DIRECT2D_MAX:
            raise ValueError(f"direct2d limited to X <= {X_DIRECT2D_MAX}")
        return _i2d_direct2d(X, phi, params, tol)
    total = 0j
    err = 0.0
    for s1 in (1, -1):
        for s2 in (1, -1):
            refl = phi.reflected(s1, s2)
            sign = 1 if (s2 > 0 or q % 2 == 0) else -1
            part = eval_Itilde(X, refl, params, sign=sign, method=method, tol=tol)
            total += part.value
            err += part.abs_error_estimate
    return PieceValue(total, err, method)


# ---------------------------------------------------------------------------
# Dispatcher.

def eval_piece(req: EvalRequest) -> PieceValue:
    """Evaluate any named piece from an EvalRequest."""
    piece, X, tol = req.piece, req.X, req.tol
    p, q = req.params.p, req.params.q
    rep = req.representation
    if rep == "direct" and X > X_DIRECT_MAX:
        raise ValueError(f"direct representation limited to X <= {X_DIRECT_MAX}")
    one_d = {PieceId.L: eval_L, PieceId.L1: eval_L1, PieceId.L2: eval_L2,
             PieceId.M2: eval_M2}
    if piece in one_d:
        return one_d[piece](X, req.amplitude, p, rep, tol)
    if piece is PieceId.M1:
        return eval_M1(X, req.amplitude, p)
    if piece is PieceId.S_POWER:
        return eval_S_power(q, X, req.amplitude, req.params.sign, tol)
    two_d = {PieceId.J1: eval_J1, PieceId.J2: eval_J2, PieceId.K1: eval_K1,
             PieceId.K2: eval_K2, PieceId.K3: eval_K3, PieceId.H1: eval_H1,
             PieceId.H2: eval_H2, PieceId.N1: eval_N1, PieceId.N2: eval_N2}
    if piece in two_d:
        return two_d[piece](X, req.amplitude, req.params, tol)
    if piece is PieceId.ITILDE_PLUS:
        return eval_Itilde(X, req.amplitude, req.params, sign=1,
                           method="auto" if rep == "auto" else rep, tol=tol)
    if piece is PieceId.ITILDE_MINUS:
        return eval_Itilde(X, req.amplitude, req.params, sign=-1,
                           method="auto" if rep == "auto" else rep, tol=tol)
    if piece is PieceId.I2D:
        return eval_I2d(X, req.amplitude, req.params,
                        method="auto" if rep == "auto" else rep, tol=tol)
    raise ValueError(f"unknown piece {piece}")

"""Scaled quantities, extrapolation in 1/log t, and verification runners.

The limits under study converge like c0 + c1/X + c2/X^2 + ... in X = log t,
so scaled piece values are fitted by least squares against polynomials in
s = 1/X and the constant term is reported as the limit estimate.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .phases import FlatPhaseParams
from .pieces import (EvalRequest, PieceId, PieceValue, eval_I2d, eval_L1,
                     eval_L2, eval_piece)
from .quadrature import ToleranceConfig
from .specfun import c_constant, e1_tail

__all__ = [
    "ScalingLaw",
    "GridSpec",
    "LimitEstimate",
    "VerificationReport",
    "DEFAULT_GRID",
    "BOUND_GRID",
    "scaled_value",
    "extrapolate",
    "verify_lemma21",
    "verify_theorem11",
    "check_bound",
    "growth_ratio_check",
    "piece_decay_law",
]


@dataclass(frozen=True)
class ScalingLaw:
    """Normalization e^{X t_exponent} X^{logt_exponent} applied to a piece
    value; the exponents come from the decay law under test."""

    t_exponent: float
    logt_exponent: float

    def __post_init__(self):
        if not (math.isfinite(self.t_exponent) and math.isfinite(self.logt_exponent)):
            raise ValueError("scaling exponents must be finite")


@dataclass(frozen=True)
class GridSpec:
    """Strictly increasing evaluation scales X > 1."""

    xs: tuple[float, ...]

    def __post_init__(self):
        xs = tuple(float(x) for x in self.xs)
        if any(x <= 1.0 for x in xs):
            raise ValueError("grid points must exceed 1")
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("grid must be strictly increasing")
        object.__setattr__(self, "xs", xs)

    def __iter__(self):
        return iter(self.xs)

    def __len__(self):
        return len(self.xs)


DEFAULT_GRID = GridSpec((25.0, 50.0, 100.0, 200.0, 400.0))
BOUND_GRID = GridSpec((10.0, 15.0, 20.0, 25.0, 30.0))


@dataclass
class LimitEstimate:
    c_hat: complex
    fit_degree: int
    residual_rms: float
    grid: GridSpec


@dataclass
class VerificationReport:
    claim: str
    target: complex
    estimate: LimitEstimate
    rel_error: float
    tolerance: float
    passed: bool
    details: dict = field(default_factory=dict)


def scaled_value(value: complex, X: float, law: ScalingLaw) -> complex:
    """value * e^{X t_exp} * X^{logt_exp}, assembled in log form so the
    scale factor never overflows on its own at X = 400."""
    if X <= 1.0:
        raise ValueError("X must exceed 1")
    log_factor = X * law.t_exponent + law.logt_exponent * math.log(X)
    mag = abs(value)
    if mag == 0.0:
        return 0j
    log_mag = math.log(mag) + log_factor
    if log_mag > 700.0:
        raise OverflowError(
            "scaled value overflows: piece value inconsistent with the decay law")
    return cmath.exp(log_mag + 1j * cmath.phase(value))


def extrapolate(values, degree: int) -> LimitEstimate:
    """Least-squares fit of scaled values against 1, s, ..., s^degree with
    s = 1/X; returns the constant term with the fit residual.

    `values`: sequence of (X, complex value) pairs, at least degree+2 of
    them on distinct X.
    """
    pts = [(float(x), complex(v)) for x, v in values]
    if degree < 0:
        raise ValueError("degree must be >= 0")
    if len(pts) < degree + 2:
        raise ValueError("need at least degree+2 points")
    xs = np.array([x for x, _ in pts])
    if len(np.unique(xs)) != len(xs):
        raise ValueError("grid points must be distinct")
    vs = np.array([v for _, v in pts])
    s = 1.0 / xs
    vander = np.vander(s, degree + 1, increasing=True)
    coef_re, res_re, *_ = np.linalg.lstsq(vander, vs.real, rcond=None)
    coef_im, res_im, *_ = np.linalg.lstsq(vander, vs.imag, rcond=None)
    fit = vander @ coef_re + 1j * (vander @ coef_im)
    rms = float(np.sqrt(np.mean(np.abs(fit - vs) ** 2)))
    grid = GridSpec(tuple(np.sort(xs)))
    return LimitEstimate(complex(coef_re[0], coef_im[0]), degree, rms, grid)


def _report(claim: str, target: complex, est: LimitEstimate, tol: float,
            **details) -> VerificationReport:
    denom = max(abs(target), 1e-300)
    rel = abs(est.c_hat - target) / denom
    return VerificationReport(claim, target, est, rel, tol, rel <= tol,
                              dict(details))


def verify_lemma21(part: str, p: float, psi, grid: GridSpec = DEFAULT_GRID,
                   tol: float | None = None, fit_degree: int = 2,
                   quad_tol: ToleranceConfig | None = None) -> VerificationReport:
    """Extrapolation check of the one-dimensional limits:

    part 'i' : X^{1/p} L1 -> psi(0)
    part 'ii': X^{1/p+1} L2 -> psi(0) * int_1^inf e^{iw}/w dw
    """
    if part not in ("i", "ii"):
        raise ValueError("part must be 'i' or 'ii'")
    if len(grid) < fit_degree + 2:
        raise ValueError("grid too small for the fit degree")
    qtol = quad_tol or ToleranceConfig()
    data = []
    if part == "i":
        law = ScalingLaw(0.0, 1.0 / p)
        target = complex(psi.value_at_0)
        default_tol = 0.02
        for X in grid:
            v = eval_L1(X, psi, p, "transformed", qtol)
            data.append((X, scaled_value(v.value, X, law)))
    else:
        law = ScalingLaw(0.0, 1.0 / p + 1.0)
        target = psi.value_at_0 * e1_tail(1.0)
        default_tol = 0.05
        for X in grid:
            v = eval_L2(X, psi, p, "transformed", qtol)
            data.append((X, scaled_value(v.value, X, law)))
    est = extrapolate(data, fit_degree)
    return _report(f"lemma21.{part}", target, est,
                   default_tol if tol is None else tol,
                   p=p, law=(law.t_exponent, law.logt_exponent),
                   data=[(x, v.real, v.imag) for x, v in data])


def verify_theorem11(p: float, q: int, phi, grid: GridSpec = DEFAULT_GRID,
                     method: str = "factored", tol: float | None = None,
                     fit_degree: int = 2,
                     quad_tol: ToleranceConfig | None = None) -> VerificationReport:
    """Extrapolation check of the headline limit
    t^{1/q} X^{1/p} I -> C_q phi(0, 0)."""
    qtol = quad_tol or ToleranceConfig()
    params = FlatPhaseParams(p=p, q=q)
    law = ScalingLaw(1.0 / q, 1.0 / p)
    target = c_constant(q).value * phi.value_at_origin()
    data = []
    for X in grid:
        v = eval_I2d(X, phi, params, method=method, tol=qtol)
        data.append((X, scaled_value(v.value, X, law)))
    est = extrapolate(data, fit_degree)
    return _report("theorem11", target, est, 0.02 if tol is None else tol,
                   p=p, q=q, method=method,
                   data=[(x, v.real, v.imag) for x, v in data])


def piece_decay_law(piece: PieceId, p: float, q: int) -> ScalingLaw:
    """Decay law each piece is bounded against (the proof's estimates)."""
    table = {
        PieceId.L: ScalingLaw(0.0, 1.0 / p),
        PieceId.L1: ScalingLaw(0.0, 1.0 / p),
        PieceId.L2: ScalingLaw(0.0, 1.0 / p + 1.0),
        PieceId.M1: ScalingLaw(0.0, 1.0 / p + 1.0),
        PieceId.M2: ScalingLaw(0.0, 1.0 / p + 1.0),
        PieceId.J1: ScalingLaw(1.0 / q, 1.0 / p),
        PieceId.J2: ScalingLaw(1.0 / q, 1.0 / p + 1.0),
        PieceId.K1: ScalingLaw(1.0 / q, 1.0 / p),
        PieceId.K2: ScalingLaw(2.0, 0.0),  # empirical superdecay proxy: t^2 |K2| -> 0
        PieceId.K3: ScalingLaw(2.0 / q, 1.0 / p),
        PieceId.H1: ScalingLaw(2.0 / q, 1.0 / p),
        PieceId.H2: ScalingLaw(2.0 / q, 1.0 / p),
        PieceId.N1: ScalingLaw(1.0 / q, 1.0 / p + 1.0),
        PieceId.N2: ScalingLaw(1.0 / q, 1.0 / p + 1.0),
        PieceId.I2D: ScalingLaw(1.0 / q, 1.0 / p),
        PieceId.ITILDE_PLUS: ScalingLaw(1.0 / q, 1.0 / p),
        PieceId.ITILDE_MINUS: ScalingLaw(1.0 / q, 1.0 / p),
        PieceId.S_POWER: ScalingLaw(1.0 / q, 0.0),
    }
    return table[piece]


def check_bound(piece: PieceId, params: FlatPhaseParams, amplitude,
                law: ScalingLaw, grid: GridSpec = BOUND_GRID,
                quad_tol: ToleranceConfig | None = None,
                trend_slack: float = 1.10) -> VerificationReport:
    """Boundedness check: |scaled piece| finite over the grid with a
    non-increasing last-octave trend (value at X_max no more than
    trend_slack times the value near X_max/2)."""
    qtol = quad_tol or ToleranceConfig()
    mags = []
    for X in grid:
        req = EvalRequest(piece, params, amplitude, X, "auto", qtol)
        v = eval_piece(req)
        mags.append((X, abs(scaled_value(v.value, X, law))))
    xs = [x for x, _ in mags]
    vals = [m for _, m in mags]
    sup = max(vals)
    x_max = xs[-1]
    half_idx = min(range(len(xs)), key=lambda i: abs(xs[i] - 0.5 * x_max))
    floor = 1e-12 * max(sup, 1e-300)
    trend_ok = vals[-1] <= trend_slack * max(vals[half_idx], floor)
    est = LimitEstimate(complex(sup), 0, 0.0, grid)
    passed = math.isfinite(sup) and trend_ok
    return VerificationReport(f"bound.{piece.value}", complex(sup), est,
                              0.0 if passed else 1.0, 0.0, passed,
                              {"mags": mags, "trend_ok": trend_ok,
                               "law": (law.t_exponent, law.logt_exponent)})


def growth_ratio_check(values, expected_octave_ratio: float,
                       rel_slack: float = 0.2) -> tuple[bool, list[float]]:
    """For (X, value) samples on a doubling grid, check that
    |v(2X)| / |v(X)| stays within rel_slack of the expected ratio.

    Used to exhibit growth like X^{1/p} under a wrong normalization:
    the expected octave ratio is then 2^{1/p}.
    """
    pts = sorted((float(x), abs(complex(v))) for x, v in values)
    ratios = []
    ok = True
    for (x1, v1), (x2, v2) in zip(pts, pts[1:]):
        if abs(x2 - 2.0 * x1) > 1e-9 * x1:
            continue
        if v1 == 0:
            ok = False
            continue
        r = v2 / v1
        ratios.append(r)
        if abs(r / expected_octave_ratio - 1.0) > rel_slack:
            ok = False
    if not ratios:
        ok = False
    return ok, ratios

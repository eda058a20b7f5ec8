"""Two functional calculi for quaternionic matrices, cross-verified.

The group calculus feeds a measure straight into the operator group,

    f(T) = int d mu(t) exp(-tT),          (measure weight on the LEFT)

the bounded contour calculus integrates the right S-resolvent against the
function values over a circle surrounding the S-spectrum,

    f[T] = (1/2pi) oint f(s) ds_I S_R(s, T),      ds_I = -ds I,

and the strip formulas reconstruct both the group and f(T) from the
boundary of a strip W_c = {|Re(s)| < c} containing the spectrum:

    exp(tT) u = (1/2pi) int_{dW_c} e^(ts) (a-s)^(-2) ds_I S_R(s,T) (a-T)^2 u
    f(T) u    = (1/2pi) int_{dW_c} f(s)   (a-s)^(-2) ds_I S_R(s,T) (a-T)^2 u

for real a with omega < c < |a|.  The boundary consists of the oriented
lines ``s = c + I tau`` and ``s = -c - I tau`` (tau ascending), on which
``ds_I`` contributes ``+d tau`` and ``-d tau`` respectively; the
``(a - s)^(-2)`` regularizer makes the integrands absolutely integrable
with an O(1/tau^3) tail once the resolvent decay is accounted for, which
yields an explicit truncation bound.

All agreements between the routes - and the residue bookkeeping behind the
strip formulas - are exercised numerically by the acceptance suite.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg

from . import qlinalg
from .errors import AdmissibilityError, DomainError, SpectralProximityError
from .kernels import kernel_power
from .measures import (QMeasure, _kernel_pattern, exp_moment, strip_limit)
from .quadrature import (CircleContour, dyadic_breakpoints, exp_tail_cut,
                         integrate_adaptive, integrate_periodic)
from .qlinalg import (GroupEnvelope, QMatrix, SSpectrum, basis_column,
                      group_envelope, qexp_matrix, s_spectrum, scalar_embed,
                      unembed)
from .quaternion import E1, ONE, Quaternion, decompose, qexp, recompose
from .slicefn import SliceFunction, TransformFunction

__all__ = [
    "CalcProblem",
    "f_of_T_group",
    "s_calc_bounded",
    "strip_group_reconstruction",
    "strip_f_of_T",
    "ResidueBreakdown",
    "residue_oracle",
    "ComparisonReport",
    "compare_calculi",
    "poly_apply",
    "InversionRecord",
    "inverting_sequence_run",
]


@dataclass
class CalcProblem:
    """An operator, an admissible measure, and the settings tying them together.

    The measure must have a finite exponential moment beyond the group rate
    ``omega`` (checked on construction); the transform is then right slice
    regular on a strip strictly containing the spectral real parts.
    """

    T: QMatrix
    measure: QMeasure
    envelope: Optional[GroupEnvelope] = None
    fn: Optional[SliceFunction] = None
    unit: Quaternion = field(default_factory=lambda: E1)
    tol: float = 1e-9

    def __post_init__(self):
        if self.envelope is None:
            self.envelope = group_envelope(self.T)
        limit = strip_limit(self.measure)
        if not limit > self.envelope.omega:
            raise AdmissibilityError(
                f"measure strip limit {limit:g} does not clear omega = "
                f"{self.envelope.omega:g}; no admissible epsilon exists")
        self.spectrum = s_spectrum(self.T)

    def function(self) -> SliceFunction:
        return self.fn if self.fn is not None else TransformFunction(self.measure)

    def strip_margin(self) -> float:
        return strip_limit(self.measure) - self.envelope.omega


def f_of_T_group(problem: CalcProblem, tol: Optional[float] = None) -> QMatrix:
    """``f(T) = int d mu(t) exp(-tT)`` with envelope-certified truncation.

    Atoms contribute exact ``a_i * exp(-t_i T)`` terms; density pieces are
    integrated in the embedding with the tail cut where
    ``|weight(t)| M e^(omega |t|)`` certifiably drops below the tolerance.
    """
    tol = problem.tol if tol is None else tol
    T, env = problem.T, problem.envelope
    n = T.n
    total = QMatrix.zeros(n, n)
    for atom in problem.measure.atoms:
        total = total + qexp_matrix(T, -atom.t).left_mul(atom.weight)
    Z = T.embed()
    for d in problem.measure.densities:
        amp = d.abs_scale() * env.M
        if math.isinf(d.hi):
            decay = -(d.rate.w + env.omega)
            t_hi = exp_tail_cut(amp, d.power, decay, 0.1 * tol)
        else:
            t_hi = d.hi
        if math.isinf(d.lo):
            decay = d.rate.w - env.omega
            t_lo = -exp_tail_cut(amp, d.power, decay, 0.1 * tol)
        else:
            t_lo = d.lo

        def integrand(t: float) -> np.ndarray:
            val = scalar_embed(d.weight_at(t), n) @ scipy.linalg.expm(-t * Z)
            return np.stack([val.real, val.imag], axis=-1)

        res = integrate_adaptive(integrand, t_lo, t_hi, tol=tol,
                                 initial_points=dyadic_breakpoints(t_lo, t_hi))
        total = total + unembed(res.value[..., 0] + 1j * res.value[..., 1],
                                structure_tol=1e-6)
    return total


def s_calc_bounded(f: SliceFunction, T: QMatrix, radius: float,
                   unit: Quaternion = E1, tol: float = 1e-10,
                   contour_margin: float = 1e-3) -> QMatrix:
    """Bounded-operator contour calculus over ``|s| = radius`` in one slice.

    Requires the spectrum strictly inside the circle and ``f`` right slice
    regular on the closed ball; the result is independent of the radius and
    of the slice, which the acceptance suite verifies.
    """
    return _s_calc_bounded_err(f, T, radius, unit, tol, contour_margin)[0]


def _s_calc_bounded_err(f, T, radius, unit, tol, contour_margin=1e-3):
    spec = s_spectrum(T)
    if radius <= spec.max_modulus() + contour_margin:
        raise SpectralProximityError(
            f"contour radius {radius:g} does not clear the spectral radius "
            f"{spec.max_modulus():g}", distance=radius - spec.max_modulus())
    if not f.domain.contains_ball(radius):
        raise DomainError("function is not regular on the closed contour ball")
    contour = CircleContour(0.0, radius, unit)

    def integrand(theta: float) -> np.ndarray:
        s = contour.point(theta)
        ds_i = qexp(unit * theta) * radius
        R = qlinalg.s_resolvent_right(s, T, spectrum=spec)
        return R.left_mul(f(s) * ds_i).data

    res = integrate_periodic(integrand, tol=tol)
    return QMatrix(res.value / (2.0 * math.pi)), res.error / (2.0 * math.pi)


def _strip_truncation(pref_sup: float, w_norm: float, tol: float,
                      T_norm: float, c: float) -> float:
    """Cutoff L with the combined two-line tail below a tenth of ``tol``.

    Beyond ``|tau| >= L >= max(2|T|, c, 1)`` the integrand norm is bounded
    by ``pref_sup * (1/tau^2) * (6/tau) * |w| / 2pi`` per line, so the full
    tail is at most ``6 pref_sup |w| / (pi L^2)``.
    """
    target = 0.1 * tol
    L = math.sqrt(6.0 * pref_sup * w_norm / (math.pi * target))
    return max(L, 2.0 * T_norm, c + 1.0, 5.0)


def _strip_integral(pref: Callable[[Quaternion], Quaternion], pref_sup: float,
                    alpha: float, T: QMatrix, w: QMatrix, c: float,
                    unit: Quaternion, tol: float,
                    truncation: Optional[float], spectrum: SSpectrum):
    """Common body of the strip formulas.

    Integrates ``(1/2pi) pref(s) (alpha-s)^(-2) ds_I S_R(s,T) w`` over the
    two oriented boundary lines of ``W_c`` in the slice plane of ``unit``;
    returns the column, the quadrature error plus tail bound, and L.
    """
    n = T.n
    a_q = Quaternion(alpha)
    L = _strip_truncation(pref_sup, w.norm(), tol, T.norm(), c) \
        if truncation is None else truncation
    tail = 6.0 * pref_sup * w.norm() / (math.pi * L * L)
    if truncation is not None and tail > tol:
        raise DomainError(
            f"requested truncation {truncation:g} only certifies a tail bound "
            f"{tail:.3e}, larger than tol {tol:g}")
    two_pi = 2.0 * math.pi

    def integrand(tau: float) -> np.ndarray:
        out = np.zeros((n, 1, 4))
        for line_sign, ds_sign in ((1.0, 1.0), (-1.0, -1.0)):
            s = recompose(line_sign * c, line_sign * tau, unit)
            scalar = pref(s) * ((a_q - s) ** (-2))
            col = (qlinalg.s_resolvent_right(s, T, spectrum=spectrum) @ w)
            out += ds_sign * col.left_mul(scalar).data
        return out / two_pi

    res = integrate_adaptive(integrand, -L, L, tol=0.8 * tol,
                             initial_points=dyadic_breakpoints(-L, L))
    return QMatrix(res.value), res.error + tail, L


def _validate_strip_params(omega: float, c: float, alpha: float):
    if not (omega < c < abs(alpha)):
        raise DomainError(
            f"strip parameters must satisfy omega < c < |alpha| "
            f"(got omega={omega:g}, c={c:g}, alpha={alpha:g})")


def strip_group_reconstruction(T: QMatrix, t: float, alpha: float, c: float,
                               u: QMatrix, tol: float = 1e-5,
                               truncation: Optional[float] = None,
                               unit: Quaternion = E1,
                               envelope: Optional[GroupEnvelope] = None) -> QMatrix:
    """Reconstruct ``exp(tT) u`` from the strip-boundary integral (any real t)."""
    env = envelope if envelope is not None else group_envelope(T)
    _validate_strip_params(env.omega, c, alpha)
    spec = s_spectrum(T)
    aI = QMatrix.identity(T.n) * alpha
    w = (aI - T) @ ((aI - T) @ u)
    pref_sup = math.exp(abs(t) * c)
    col, _, _ = _strip_integral(lambda s: qexp(s * t), pref_sup, alpha, T, w,
                                c, unit, tol, truncation, spec)
    return col


def strip_f_of_T(problem: CalcProblem, alpha: float, c: float, u: QMatrix,
                 tol: float = 1e-6, truncation: Optional[float] = None) -> QMatrix:
    """Evaluate ``f(T) u`` from the strip-boundary integral."""
    return _strip_f_of_T_err(problem, alpha, c, u, tol, truncation)[0]


def _strip_f_of_T_err(problem, alpha, c, u, tol, truncation=None):
    env = problem.envelope
    _validate_strip_params(env.omega, c, alpha)
    if not c < strip_limit(problem.measure):
        raise DomainError(
            f"c = {c:g} must stay below the transform strip limit "
            f"{strip_limit(problem.measure):g} so f is regular on the closure")
    f = problem.function()
    aI = QMatrix.identity(problem.T.n) * alpha
    w = (aI - problem.T) @ ((aI - problem.T) @ u)
    pref_sup = exp_moment(problem.measure, c)
    col, err, _ = _strip_integral(f, pref_sup, alpha, problem.T, w, c,
                                  problem.unit, tol, truncation, problem.spectrum)
    return col, err


@dataclass(frozen=True)
class ResidueBreakdown:
    """Closed-form residue contributions of ``K_R(p,s)(a-s)^(-2)`` paired with
    ``g(s) = S_R(s,T)(a-T)^2 u``, against small-circle quadratures."""

    contributions: dict       # alpha_order2, alpha_order1, pole, pole_conj -> column
    circles: dict             # alpha, pole, pole_conj -> column
    total: QMatrix
    strip_value: QMatrix
    max_circle_mismatch: float
    strip_mismatch: float


def residue_oracle(p: Quaternion, alpha: float, T: QMatrix,
                   unit: Quaternion = E1, u: Optional[QMatrix] = None,
                   delta: float = 0.1, c: Optional[float] = None,
                   tol: float = 1e-9) -> ResidueBreakdown:
    """Residues of the strip integrand at its three slice-plane singularities.

    In the slice plane of ``unit`` the function ``K_R(p,s)(alpha-s)^(-2)``
    has a double pole at ``alpha`` and simple poles at ``p_I`` and
    ``conj(p_I)``; the closed forms are

        at alpha:  K_R^2(p, alpha) g(alpha)  and  K_R(p, alpha) g'(alpha),
        at p_I:    -(1 - I_p I)/2 (alpha - p_I)^(-2) g(p_I),
        at conj:   -(1 + I_p I)/2 (alpha - conj(p_I))^(-2) g(conj(p_I)).

    Each must match the positively oriented small-circle integral around
    its singularity, and the sum must equal minus the strip-boundary
    integral of the same integrand (contour deformation).
    """
    spec = s_spectrum(T)
    env = group_envelope(T)
    p0, p1, ip = decompose(p)
    if p1 < 1e-9:
        raise DomainError("residue oracle expects p off the real axis "
                          "(a real p merges the pole pair)")
    if math.hypot(alpha - p0, p1) < 10.0 * delta:
        raise DomainError("singularities at alpha and [p] are too close together")
    n = T.n
    if u is None:
        ones = np.zeros((n, 1, 4))
        ones[:, 0, 0] = 1.0
        u = QMatrix(ones)
    aI = QMatrix.identity(n) * alpha
    w = (aI - T) @ ((aI - T) @ u)
    a_q = Quaternion(alpha)

    def g(s: Quaternion) -> QMatrix:
        return qlinalg.s_resolvent_right(s, T, spectrum=spec) @ w

    def f_scalar(s: Quaternion) -> Quaternion:
        return kernel_power(p, s, 1) * ((a_q - s) ** (-2))

    p_i = recompose(p0, p1, unit)
    p_i_conj = p_i.conjugate()
    dg_alpha = -(qlinalg.s_resolvent_right_power(2, a_q, T, spectrum=spec) @ w)
    contributions = {
        "alpha_order2": g(a_q).left_mul(kernel_power(p, a_q, 2)),
        "alpha_order1": dg_alpha.left_mul(kernel_power(p, a_q, 1)),
        "pole": g(p_i).left_mul(
            (ONE - ip * unit) * 0.5 * (-1.0) * ((a_q - p_i) ** (-2))),
        "pole_conj": g(p_i_conj).left_mul(
            (ONE + ip * unit) * 0.5 * (-1.0) * ((a_q - p_i_conj) ** (-2))),
    }

    def circle_integral(center: Quaternion) -> QMatrix:
        # small circle center + delta*e^(I theta) in C_I; ds_I = delta e^(I theta) d theta
        def integrand(theta: float) -> np.ndarray:
            ds_i = qexp(unit * theta) * delta
            s = center + ds_i
            return (g(s).left_mul(f_scalar(s) * ds_i)).data

        res = integrate_periodic(integrand, tol=tol)
        return QMatrix(res.value / (2.0 * math.pi))

    circles = {
        "alpha": circle_integral(a_q),
        "pole": circle_integral(p_i),
        "pole_conj": circle_integral(p_i_conj),
    }
    total = (contributions["alpha_order2"] + contributions["alpha_order1"]
             + contributions["pole"] + contributions["pole_conj"])
    mismatches = [
        (circles["alpha"] - (contributions["alpha_order2"]
                             + contributions["alpha_order1"])).norm(),
        (circles["pole"] - contributions["pole"]).norm(),
        (circles["pole_conj"] - contributions["pole_conj"]).norm(),
    ]
    # strip integral of the same integrand equals minus the residue sum;
    # _strip_integral supplies the (alpha - s)^(-2) regularizer itself, so
    # the prefactor here is the bare kernel
    if c is None:
        c = 0.5 * (env.omega + min(abs(alpha), abs(p0)))
    _validate_strip_params(env.omega, c, alpha)
    line_dist = min(abs(p0 - c), abs(p0 + c))
    pref_sup = (c + p1 + 2.0 * abs(p)) / (line_dist * line_dist)
    strip_col, _, _ = _strip_integral(lambda s: kernel_power(p, s, 1), pref_sup,
                                      alpha, T, w, c, unit, tol, None, spec)
    return ResidueBreakdown(
        contributions=contributions,
        circles=circles,
        total=total,
        strip_value=strip_col,
        max_circle_mismatch=max(mismatches),
        strip_mismatch=(strip_col + total).norm(),
    )


@dataclass(frozen=True)
class ComparisonReport:
    """Values of f(T) along every applicable route with pairwise residuals.

    ``error_estimates`` holds one conservative quadrature/truncation bound
    per route; when the run is healthy every pairwise residual stays below
    the sum of the two routes' estimates.
    """

    value_group: QMatrix
    value_strip: QMatrix
    value_circle: Optional[QMatrix]
    value_closed: Optional[QMatrix]
    residuals: dict
    error_estimates: dict
    skipped: dict
    settings: dict

    def max_residual(self) -> float:
        return max(self.residuals.values()) if self.residuals else 0.0


def compare_calculi(problem: CalcProblem, alpha: float, c: float,
                    radius: Optional[float] = None,
                    strip_tol: float = 1e-6, circle_tol: float = 1e-9) -> ComparisonReport:
    """Compute f(T) by every applicable route and report pairwise residuals.

    Routes that do not apply (no circle radius, function not regular on the
    ball, measure not of kernel type for the closed form) are skipped with
    an explicit reason, never silently.
    """
    T = problem.T
    n = T.n
    values = {}
    estimates = {}
    skipped = {}
    values["group"] = f_of_T_group(problem)
    # the group quadrature enforces its tolerance per density piece
    estimates["group"] = 1.1 * problem.tol * max(len(problem.measure.densities), 1)
    col_errs = []
    cols = []
    for j in range(n):
        col, err = _strip_f_of_T_err(problem, alpha, c, basis_column(n, j),
                                     tol=strip_tol)
        cols.append(col)
        col_errs.append(err)
    values["strip"] = QMatrix(np.concatenate([col.data for col in cols], axis=1))
    estimates["strip"] = float(np.sqrt(np.sum(np.square(col_errs))))
    f = problem.function()
    if radius is None:
        skipped["circle"] = "no contour radius requested"
    elif not f.domain.contains_ball(radius):
        skipped["circle"] = "function is not regular on the closed contour ball"
    else:
        values["circle"], estimates["circle"] = _s_calc_bounded_err(
            f, T, radius, problem.unit, circle_tol)
    kernel_p = _kernel_parameter(problem.measure)
    if kernel_p is not None:
        values["closed"] = qlinalg.s_resolvent_right(kernel_p, T,
                                                     spectrum=problem.spectrum)
        estimates["closed"] = 1e-13 * (1.0 + values["closed"].norm())
    else:
        skipped["closed"] = "measure is not a kernel measure; no closed form"
    residuals = {}
    names = sorted(values)
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            residuals[f"{a}-{b}"] = (values[a] - values[b]).norm()
    return ComparisonReport(
        value_group=values["group"],
        value_strip=values["strip"],
        value_circle=values.get("circle"),
        value_closed=values.get("closed"),
        residuals=residuals,
        error_estimates=estimates,
        skipped=skipped,
        settings={"alpha": alpha, "c": c, "radius": radius,
                  "strip_tol": strip_tol, "circle_tol": circle_tol},
    )


def _kernel_parameter(mu: QMeasure) -> Optional[Quaternion]:
    return _kernel_pattern(mu)


def poly_apply(coefficients: Sequence, T: QMatrix) -> QMatrix:
    """Evaluate an intrinsic (real-coefficient) polynomial at ``T`` by Horner."""
    coeffs = []
    for ccoef in coefficients:
        if isinstance(ccoef, Quaternion):
            if ccoef.imag_norm() > 0.0:
                raise DomainError("polynomial calculus requires real (intrinsic) coefficients")
            coeffs.append(ccoef.w)
        else:
            coeffs.append(float(ccoef))
    n = T.n
    result = QMatrix.zeros(n, n)
    for a_k in reversed(coeffs):
        result = result @ T + QMatrix.identity(n) * a_k
    return result


@dataclass(frozen=True)
class InversionRecord:
    """Residuals of ``P_n[T] f(T) u -> u`` plus sampled-bound evidence."""

    rows: tuple               # (n, residual, bound_sample_max, conv_sample_max, op_norm)
    passed: bool
    tolerance: float
    warnings: tuple


def inverting_sequence_run(polynomials: Sequence[Sequence[float]],
                           problem: CalcProblem, u: QMatrix,
                           tol: float = 1e-7,
                           bound_cap: float = 100.0) -> InversionRecord:
    """Drive ``P_n[T] f(T) u`` toward ``u`` and record the evidence.

    For each polynomial the record holds the residual, the sampled sup of
    ``|P_n(s) f(s)|`` on a strip grid (the uniform-bound hypothesis), the
    sampled sup of ``|P_n(s) f(s) - 1|`` (the convergence hypothesis) and
    the operator norm of ``P_n[T] f(T)``.  Bound violations are warnings,
    not failures: the hypotheses are sampled evidence, not proofs.
    """
    fT = f_of_T_group(problem)
    fTu = fT @ u
    f = problem.function()
    w_lim = min(strip_limit(problem.measure), 5.0)
    grid = _strip_grid(problem.envelope.omega, w_lim)
    rows = []
    warnings = []
    for idx, coeffs in enumerate(polynomials, start=1):
        PT = poly_apply(coeffs, problem.T)
        residual = (PT @ fTu - u).norm()
        op_norm = (PT @ fT).norm()
        bound_max = 0.0
        conv_max = 0.0
        for s in grid:
            val = _poly_eval(coeffs, s) * f(s)
            bound_max = max(bound_max, abs(val))
            conv_max = max(conv_max, abs(val - ONE))
        if bound_max > bound_cap:
            warnings.append(
                f"P_{idx}: sampled |P f| = {bound_max:.3e} exceeds the bound cap")
        rows.append((idx, residual, bound_max, conv_max, op_norm))
    passed = bool(rows) and rows[-1][1] <= tol
    return InversionRecord(rows=tuple(rows), passed=passed, tolerance=tol,
                           warnings=tuple(warnings))


def _poly_eval(coeffs: Sequence[float], s: Quaternion) -> Quaternion:
    total = Quaternion(0.0)
    sp = ONE
    for a_k in coeffs:
        total = total + float(a_k) * sp
        sp = sp * s
    return total


def _strip_grid(omega: float, w_lim: float) -> list:
    """Deterministic sample points strictly inside the strip, three slices."""
    units = [E1, Quaternion(0, 0, 1, 0),
             Quaternion(0, 1 / math.sqrt(2), 0, 1 / math.sqrt(2))]
    res = []
    hi = omega + 0.9 * (w_lim - omega) if w_lim > omega else 0.9 * w_lim
    for re in np.linspace(-hi, hi, 5):
        for im in (0.3, 1.0, 2.5):
            for unit in units:
                res.append(recompose(float(re), im, unit))
    return res

"""The built-in acceptance suite: every identity the package rests on.

Each criterion function runs one numbered check on deterministic fixtures
and returns a JSON-able record ``{"id", "name", "passed", "tolerance",
"observed", "details"}``.  ``run_selftest`` executes all of them; given the
same seed it produces byte-identical reports, so two runs can be diffed.

The final criterion is a mutation guard: it re-runs the resolvent-equation
and route-agreement checks with the resolvent numerator sign flipped (a
test-only patch) and passes only if both checks then fail, which protects
the suite against vacuous passes.
"""
from __future__ import annotations

import math
from contextlib import contextmanager
from typing import Callable, Optional

import numpy as np

from . import qlinalg
from .calculus import (CalcProblem, compare_calculi, f_of_T_group,
                       inverting_sequence_run, poly_apply, residue_oracle,
                       s_calc_bounded, strip_group_reconstruction)
from .kernels import cauchy_kernel_right
from .measures import (Atom, ExpDensity, QMeasure, apply_linear_factor,
                       convolve, derivative_measure, kernel_measure,
                       laplace_stieltjes, product_measure)
from .quadrature import dyadic_breakpoints, exp_tail_cut, integrate_adaptive
from .qlinalg import (QMatrix, basis_column, group_envelope, hy_bound_check,
                      qexp_matrix, s_spectrum)
from .quaternion import E1, E2, Quaternion, qexp, recompose
from .slicefn import RightPolynomial, right_regularity_residual, slice_fd

__all__ = ["run_selftest", "CRITERIA"]

_FIXTURE_T = QMatrix.diag([E1, E2 * 0.5])


def _rand_quat(rng, scale: float = 1.0) -> Quaternion:
    return Quaternion(*(rng.uniform(-scale, scale, size=4)))


def _rand_unit(rng) -> Quaternion:
    while True:
        v = rng.normal(size=3)
        n = np.linalg.norm(v)
        if n > 1e-3:
            return Quaternion(0.0, *(v / n))


def _rand_qmatrix(rng, n: int, entry_cap: float = 2.0) -> QMatrix:
    arr = rng.uniform(-1.0, 1.0, size=(n, n, 4))
    norms = np.sqrt((arr ** 2).sum(axis=-1, keepdims=True))
    scale = np.minimum(1.0, entry_cap / np.maximum(norms, 1e-12))
    return QMatrix(arr * scale * rng.uniform(0.3, 1.0))


def criterion_1_resolvent_equation(seed: int = 0, triples: int = 200,
                                   resolvent: Optional[Callable] = None) -> dict:
    """``s S_R(s,T) v - S_R(s,T) T v = v`` over random (T, s, v)."""
    rng = np.random.default_rng(seed)
    res_fn = resolvent if resolvent is not None else qlinalg.s_resolvent_right
    worst = 0.0
    for k in range(triples):
        n = 2 if k % 2 == 0 else 3
        T = _rand_qmatrix(rng, n)
        spec = s_spectrum(T)
        while True:
            s = _rand_quat(rng, 1.5 * (1.0 + T.norm()))
            if spec.distance(s) >= 0.1:
                break
        v = QMatrix(rng.normal(size=(n, 1, 4)))
        v = v * (1.0 / v.norm())
        R = res_fn(s, T)
        lhs = (R @ v).left_mul(s) - R @ (T @ v)
        residual = (lhs - v).norm()
        bound = 1e-9 * (1.0 + abs(s)) * (1.0 + T.norm())
        worst = max(worst, residual / bound)
    return {"id": 1, "name": "s_resolvent_equation", "passed": worst <= 1.0,
            "tolerance": 1.0, "observed": worst,
            "details": {"triples": triples, "scaled_by": "1e-9*(1+|s|)*(1+|T|)"}}


def _kernel_laplace_quadrature(s: Quaternion, x: Quaternion, side: str,
                               tol: float = 1e-9) -> Quaternion:
    """Quadrature of the defining integral of the right kernel.

    Positive side: ``int_0^inf e^(-st) e^(xt) dt`` for ``Re(s) > Re(x)``;
    negative side: ``-int_{-inf}^0`` of the same for ``Re(s) < Re(x)``.
    """
    if side == "positive":
        decay = s.w - x.w
        t_star = exp_tail_cut(1.0, 0, decay, 0.1 * tol)

        def integrand(t: float) -> np.ndarray:
            return (qexp(s * (-t)) * qexp(x * t)).to_array()

        res = integrate_adaptive(integrand, 0.0, t_star, tol=tol,
                                 initial_points=dyadic_breakpoints(0.0, t_star))
        return Quaternion.from_array(res.value)
    decay = x.w - s.w
    t_star = exp_tail_cut(1.0, 0, decay, 0.1 * tol)

    def integrand(t: float) -> np.ndarray:
        return (qexp(s * (-t)) * qexp(x * t)).to_array()

    res = integrate_adaptive(integrand, -t_star, 0.0, tol=tol,
                             initial_points=dyadic_breakpoints(-t_star, 0.0))
    return -Quaternion.from_array(res.value)


def criterion_2_kernel_laplace(seed: int = 0, pairs: int = 50) -> dict:
    """The kernel equals the Laplace transform of ``t -> e^(xt)``, both sides."""
    rng = np.random.default_rng(seed + 1)
    tol = 1e-7
    worst = 0.0
    for _ in range(pairs):
        x = _rand_quat(rng, 1.5)
        s = _rand_quat(rng, 1.5)
        s = Quaternion(x.w + 0.5 + abs(s.w), s.x, s.y, s.z)
        val = _kernel_laplace_quadrature(s, x, "positive")
        worst = max(worst, abs(val - cauchy_kernel_right(s, x)))
        s_neg = Quaternion(x.w - 0.5 - abs(s.w), s.x, s.y, s.z)
        val = _kernel_laplace_quadrature(s_neg, x, "negative")
        worst = max(worst, abs(val - cauchy_kernel_right(s_neg, x)))
    return {"id": 2, "name": "kernel_laplace_identity", "passed": worst <= tol,
            "tolerance": tol, "observed": worst, "details": {"pairs": pairs}}


def criterion_3_resolvent_from_group() -> dict:
    """Group Laplace transform matches the closed resolvent on both sides."""
    T = _FIXTURE_T
    env = group_envelope(T)
    tol = 1e-7
    worst = 0.0
    cases = []
    for s in (Quaternion(2.0), Quaternion(1.0, 0.0, 0.0, 1.0),
              Quaternion(-2.0), Quaternion(-1.0, 0.0, 0.0, -1.0)):
        L = qlinalg.laplace_of_group(s, T, envelope=env, tol=1e-9)
        diff = (L - qlinalg.s_resolvent_right(s, T)).norm()
        cases.append({"s": [s.w, s.x, s.y, s.z], "residual": diff})
        worst = max(worst, diff)
    return {"id": 3, "name": "resolvent_from_group", "passed": worst <= tol,
            "tolerance": tol, "observed": worst, "details": {"cases": cases}}


def criterion_4_three_routes() -> dict:
    """Group, strip and circle routes agree with each other and the closed form."""
    T = _FIXTURE_T
    env = group_envelope(T)
    prob = CalcProblem(T=T, measure=kernel_measure(Quaternion(10.0), env.omega),
                       envelope=env)
    rep = compare_calculi(prob, alpha=5.0, c=0.5, radius=3.0, strip_tol=1e-7)
    tol = 1e-5
    worst = rep.max_residual()
    return {"id": 4, "name": "three_route_agreement",
            "passed": worst <= tol and not rep.skipped,
            "tolerance": tol, "observed": worst,
            "details": {"residuals": rep.residuals, "skipped": rep.skipped}}


def criterion_5_group_reconstruction() -> dict:
    """Strip-boundary reconstruction of ``exp(tT) u`` for positive and negative t."""
    T = _FIXTURE_T
    env = group_envelope(T)
    tol = 1e-4
    worst = 0.0
    for t in (-1.0, -0.5, 0.5, 1.0):
        exact = qexp_matrix(T, t)
        for j in range(T.n):
            u = basis_column(T.n, j)
            rec = strip_group_reconstruction(T, t, alpha=2.0, c=0.5, u=u,
                                             tol=1e-5, envelope=env)
            worst = max(worst, (rec - exact @ u).norm())
    return {"id": 5, "name": "strip_group_reconstruction", "passed": worst <= tol,
            "tolerance": tol, "observed": worst,
            "details": {"t_values": [-1.0, -0.5, 0.5, 1.0], "alpha": 2.0, "c": 0.5}}


def criterion_6_residues() -> dict:
    """Closed-form residues match small-circle quadratures on three slices."""
    T = _FIXTURE_T
    p = Quaternion(3.0, 4.0, 0.0, 0.0)
    tol = 1e-7
    worst = 0.0
    strip_worst = 0.0
    for unit in (E1, E2, Quaternion(0.0, 1 / math.sqrt(2), 0.0, 1 / math.sqrt(2))):
        br = residue_oracle(p, 10.0, T, unit=unit, delta=0.1, tol=1e-9)
        worst = max(worst, br.max_circle_mismatch)
        strip_worst = max(strip_worst, br.strip_mismatch)
    return {"id": 6, "name": "residue_oracle", "passed": worst <= tol,
            "tolerance": tol, "observed": worst,
            "details": {"strip_consistency": strip_worst}}


def criterion_7_contour_independence() -> dict:
    """Circle calculus of ``s -> s^2`` is radius- and slice-independent, equals T^2."""
    T = QMatrix.diag([Quaternion(1.0, 2.0, 0.0, 0.0), Quaternion(3.0)])
    f = RightPolynomial([0.0, 0.0, 1.0])
    tol = 1e-8
    values = [s_calc_bounded(f, T, radius, unit=unit, tol=1e-11)
              for radius in (5.0, 7.0) for unit in (E1, E2)]
    worst = 0.0
    for i in range(len(values)):
        for j in range(i + 1, len(values)):
            worst = max(worst, (values[i] - values[j]).norm())
    direct = (values[0] - T @ T).norm()
    worst_all = max(worst, direct)
    return {"id": 7, "name": "contour_slice_independence", "passed": worst_all <= tol,
            "tolerance": tol, "observed": worst_all,
            "details": {"pairwise": worst, "vs_direct_square": direct}}


def _abs_measure(mu: QMeasure) -> QMeasure:
    return QMeasure(atoms=[Atom(a.t, Quaternion(abs(a.weight))) for a in mu.atoms])


def criterion_8_measure_algebra(seed: int = 0) -> dict:
    """Product variation identity, convolution variation bound, transform product."""
    rng = np.random.default_rng(seed + 8)
    prod_worst = 0.0
    for _ in range(100):
        mu = QMeasure(atoms=[Atom(float(rng.integers(-3, 4)), _rand_quat(rng, 2.0))
                             for _ in range(rng.integers(1, 5))])
        nu = QMeasure(atoms=[Atom(float(rng.integers(-3, 4)), _rand_quat(rng, 2.0))
                             for _ in range(rng.integers(1, 5))])
        lhs = product_measure(mu, nu).total_variation()
        rhs = mu.total_variation() * nu.total_variation()
        prod_worst = max(prod_worst, abs(lhs - rhs) / (1.0 + rhs))
    conv_violation = 0.0
    for _ in range(100):
        mu = QMeasure(atoms=[Atom(float(rng.integers(-3, 4)), _rand_quat(rng, 2.0))
                             for _ in range(rng.integers(2, 5))])
        nu = QMeasure(atoms=[Atom(float(rng.integers(-3, 4)), _rand_quat(rng, 2.0))
                             for _ in range(rng.integers(2, 5))])
        conv = convolve(mu, nu)
        bound = convolve(_abs_measure(mu), _abs_measure(nu))
        lo = float(rng.uniform(-7.5, 0.0))
        hi = lo + float(rng.uniform(0.5, 8.0))
        gap = conv.total_variation(lo, hi) - bound.total_variation(lo, hi)
        conv_violation = max(conv_violation, gap)
    trans_worst = 0.0
    mu = QMeasure(atoms=[Atom(0.0, Quaternion(1, 1, 0, 0)),
                         Atom(0.5, Quaternion(0, 0, 1, -2)),
                         Atom(-0.3, Quaternion(0.7))])
    nu = QMeasure(atoms=[Atom(0.2, Quaternion(0.5)), Atom(-0.4, Quaternion(1.5)),
                         Atom(1.0, Quaternion(-0.25))])
    conv = convolve(mu, nu)
    for k in range(20):
        s = recompose(-0.9 + 0.09 * k, 0.3 + 0.1 * k, _rand_unit(rng))
        lhs = laplace_stieltjes(conv, s)
        rhs = laplace_stieltjes(mu, s) * laplace_stieltjes(nu, s)
        trans_worst = max(trans_worst, abs(lhs - rhs))
    passed = (prod_worst <= 1e-12 and conv_violation <= 1e-12 and trans_worst <= 1e-8)
    return {"id": 8, "name": "measure_algebra", "passed": passed,
            "tolerance": 1e-8, "observed": max(prod_worst, conv_violation, trans_worst),
            "details": {"product_variation": prod_worst,
                        "convolution_bound_violation": conv_violation,
                        "transform_product": trans_worst}}


def _mixed_fixture() -> QMeasure:
    return QMeasure(
        atoms=[Atom(0.3, Quaternion(1.0, 1.0, 0.0, -0.5)),
               Atom(-0.7, Quaternion(0.2, 0.0, -1.0, 0.0))],
        densities=[ExpDensity(Quaternion(0.4, 0.0, 0.2, 0.0), Quaternion(-1.5),
                              0.0, math.inf),
                   ExpDensity(Quaternion(0.5, 0.0, 0.0, -0.1), Quaternion(1.2),
                              -math.inf, 0.0)])


def criterion_9_transform_regularity(seed: int = 0) -> dict:
    """Transforms are right slice regular; slice derivatives match weighted measures."""
    rng = np.random.default_rng(seed + 9)
    mu = _mixed_fixture()
    tol = 1e-6
    fn = lambda s: laplace_stieltjes(mu, s, tol=1e-13)
    reg_worst = 0.0
    for _ in range(50):
        s = recompose(float(rng.uniform(-0.9, 0.9)),
                      float(rng.uniform(0.2, 2.5)), _rand_unit(rng))
        reg_worst = max(reg_worst, right_regularity_residual(fn, s))
    deriv_worst = 0.0
    for n in (1, 2):
        mu_n = derivative_measure(mu, n)
        for k in range(10):
            s = recompose(-0.8 + 0.17 * k, 0.4 + 0.15 * k, _rand_unit(rng))
            h = 1e-5 if n == 1 else 3e-3
            fd = slice_fd(lambda t: laplace_stieltjes(mu, s + t, tol=1e-13),
                          h, order=n)
            exact = laplace_stieltjes(mu_n, s, tol=1e-13)
            deriv_worst = max(deriv_worst, abs(fd - exact))
    worst = max(reg_worst, deriv_worst)
    return {"id": 9, "name": "transform_regularity_and_derivative",
            "passed": worst <= tol, "tolerance": tol, "observed": worst,
            "details": {"regularity": reg_worst, "derivative": deriv_worst}}


def criterion_10_product_rule() -> dict:
    """``(fg)(T) = f(T) g(T)`` for quaternion-weighted f and real atomic g."""
    T = _FIXTURE_T
    env = group_envelope(T)
    mu = QMeasure(atoms=[Atom(0.0, Quaternion(1, 1, 0, 0)),
                         Atom(0.5, Quaternion(0, 0, 1, -2)),
                         Atom(-0.3, Quaternion(0.7))])
    nu = QMeasure(atoms=[Atom(0.2, Quaternion(0.5)), Atom(-0.4, Quaternion(1.5)),
                         Atom(1.0, Quaternion(-0.25))])
    tol = 1e-8
    fg = f_of_T_group(CalcProblem(T=T, measure=convolve(mu, nu), envelope=env))
    f_times_g = (f_of_T_group(CalcProblem(T=T, measure=mu, envelope=env))
                 @ f_of_T_group(CalcProblem(T=T, measure=nu, envelope=env)))
    worst = (fg - f_times_g).norm()
    return {"id": 10, "name": "intrinsic_product_rule", "passed": worst <= tol,
            "tolerance": tol, "observed": worst, "details": {}}


def criterion_11_inversion() -> dict:
    """Inverting sequences and the polynomial-calculus identity."""
    T = _FIXTURE_T
    env = group_envelope(T)
    mu3 = kernel_measure(Quaternion(3.0), env.omega)
    prob3 = CalcProblem(T=T, measure=mu3, envelope=env, tol=1e-10)
    mu33 = convolve(mu3, mu3)
    prob33 = CalcProblem(T=T, measure=mu33, envelope=env, tol=1e-10)
    worst_simple = 0.0
    worst_squared = 0.0
    worst_poly = 0.0
    for j in range(T.n):
        u = basis_column(T.n, j)
        rec = inverting_sequence_run([[3.0, -1.0]], prob3, u, tol=1e-7)
        worst_simple = max(worst_simple, rec.rows[-1][1])
        rec2 = inverting_sequence_run([[9.0, -6.0, 1.0]], prob33, u, tol=1e-6)
        worst_squared = max(worst_squared, rec2.rows[-1][1])
        # polynomial identity P[T] f(T) u = (P f)(T) u via the measure route
        lhs = poly_apply([3.0, -1.0], T) @ (f_of_T_group(prob3) @ u)
        pf_measure = apply_linear_factor(3.0, mu3)
        rhs = f_of_T_group(CalcProblem(T=T, measure=pf_measure, envelope=env)) @ u
        worst_poly = max(worst_poly, (lhs - rhs).norm())
    passed = worst_simple <= 1e-7 and worst_squared <= 1e-6 and worst_poly <= 1e-7
    return {"id": 11, "name": "inversion_and_polynomial_identity", "passed": passed,
            "tolerance": 1e-7, "observed": max(worst_simple, worst_poly),
            "details": {"simple": worst_simple, "squared": worst_squared,
                        "poly_identity": worst_poly}}


def criterion_12_envelope_hy() -> dict:
    """Envelope bound on a grid plus the resolvent-power generation bound."""
    T = _FIXTURE_T
    env = group_envelope(T, t_max=5.0, grid=201)
    envelope_violation = 0.0
    for t in np.linspace(-5.0, 5.0, 201):
        nrm = qexp_matrix(T, float(t)).norm()
        envelope_violation = max(envelope_violation,
                                 nrm - env.M * math.exp(env.omega * abs(t)))
    hy = hy_bound_check(T, [1.0, -1.0, 2.0, -2.0], n_max=4, envelope=env)
    passed = envelope_violation <= 1e-10 and hy.passed
    return {"id": 12, "name": "group_envelope_and_power_bound", "passed": passed,
            "tolerance": 1e-6, "observed": hy.max_ratio,
            "details": {"M": env.M, "omega": env.omega,
                        "envelope_violation": envelope_violation,
                        "hy_max_ratio": hy.max_ratio}}


@contextmanager
def _flipped_resolvent():
    """Test-only mutation: flips the resolvent numerator sign."""
    original = qlinalg.s_resolvent_right

    def flipped(s, T, spectrum=None):
        return -original(s, T, spectrum=spectrum)

    qlinalg.s_resolvent_right = flipped
    try:
        yield
    finally:
        qlinalg.s_resolvent_right = original


def criterion_13_mutation_sensitivity(seed: int = 0) -> dict:
    """The suite must catch a sign flip in the resolvent (criteria 1 and 4)."""
    with _flipped_resolvent():
        c1 = criterion_1_resolvent_equation(seed=seed, triples=20)
        c4 = criterion_4_three_routes()
    passed = (not c1["passed"]) and (not c4["passed"])
    return {"id": 13, "name": "mutation_sensitivity", "passed": passed,
            "tolerance": 0.0,
            "observed": float(c1["observed"]),
            "details": {"resolvent_equation_failed": not c1["passed"],
                        "route_agreement_failed": not c4["passed"]}}


CRITERIA = (
    criterion_1_resolvent_equation,
    criterion_2_kernel_laplace,
    criterion_3_resolvent_from_group,
    criterion_4_three_routes,
    criterion_5_group_reconstruction,
    criterion_6_residues,
    criterion_7_contour_independence,
    criterion_8_measure_algebra,
    criterion_9_transform_regularity,
    criterion_10_product_rule,
    criterion_11_inversion,
    criterion_12_envelope_hy,
    criterion_13_mutation_sensitivity,
)

_SEEDED = {1, 2, 8, 9, 13}


def run_selftest(seed: int = 0) -> dict:
    """Run every acceptance criterion; deterministic given the seed."""
    results = []
    for idx, fn in enumerate(CRITERIA, start=1):
        results.append(fn(seed=seed) if idx in _SEEDED else fn())
    return {"criteria": results,
            "passed": all(r["passed"] for r in results),
            "seed": seed}

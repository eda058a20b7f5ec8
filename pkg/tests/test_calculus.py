import math

import numpy as np
import pytest

from quatcalc import (E1, E2, E3, ONE, AdmissibilityError, Atom, CalcProblem,
                      DomainError, ExpDensity, QMeasure, Quaternion,
                      basis_column, combine, compare_calculi, convolve, dirac,
                      f_of_T_group, group_envelope, inverting_sequence_run,
                      kernel_measure, poly_apply, qexp_matrix, residue_oracle,
                      s_calc_bounded, s_resolvent_right, scale_left,
                      strip_f_of_T, strip_group_reconstruction)
from quatcalc.measures import exp_moment
from quatcalc.qlinalg import QMatrix
from quatcalc.slicefn import KernelPowerFunction, RightPolynomial, TransformFunction

T_FIX = QMatrix.diag([E1, E2 * 0.5])
ENV = group_envelope(T_FIX)


def problem(measure, tol=1e-9):
    return CalcProblem(T=T_FIX, measure=measure, envelope=ENV, tol=tol)


# -- group calculus ----------------------------------------------------------


def test_group_calculus_atoms():
    assert (f_of_T_group(problem(dirac(0.0))) - QMatrix.identity(2)).norm() < 1e-15
    diff = f_of_T_group(problem(dirac(1.0))) - qexp_matrix(T_FIX, -1.0)
    assert diff.norm() < 1e-12


def test_group_calculus_kernel_measure():
    mu = kernel_measure(Quaternion(2.0), ENV.omega)
    got = f_of_T_group(problem(mu, tol=1e-9))
    assert (got - s_resolvent_right(Quaternion(2.0), T_FIX)).norm() < 1e-7


def test_group_calculus_norm_bound():
    mu = combine(dirac(0.5, Quaternion(1, 2, 0, 0)),
                 QMeasure(densities=[ExpDensity(Quaternion(0.3), Quaternion(-2.0),
                                                0.0, math.inf)]))
    fT = f_of_T_group(problem(mu))
    assert fT.norm() <= ENV.M * exp_moment(mu, ENV.omega) * (1 + 1e-9)


def test_group_calculus_linearity():
    mu = dirac(0.7, Quaternion(0, 1, 1, 0))
    nu = dirac(-0.4, Quaternion(2.0))
    a = Quaternion(0.5, -1, 0, 2)
    lhs = f_of_T_group(problem(combine(scale_left(a, mu), nu)))
    rhs = f_of_T_group(problem(mu)).left_mul(a) + f_of_T_group(problem(nu))
    assert (lhs - rhs).norm() < 1e-13


def test_problem_rejects_inadmissible_measure():
    T = QMatrix.diag([Quaternion(1, 1, 0, 0), Quaternion(-1)])  # omega = 1
    with pytest.raises(AdmissibilityError):
        CalcProblem(T=T, measure=kernel_measure(Quaternion(0.5)))


# -- circle calculus ----------------------------------------------------------


def test_circle_calculus_examples():
    one = RightPolynomial([1.0])
    assert (s_calc_bounded(one, T_FIX, 3.0) - QMatrix.identity(2)).norm() < 1e-12

    T = QMatrix.diag([Quaternion(1, 2, 0, 0), Quaternion(3)])
    ident = RightPolynomial([0.0, 1.0])
    assert (s_calc_bounded(ident, T, 5.0) - T).norm() < 1e-9

    kern = KernelPowerFunction(Quaternion(10.0), 1)
    got = s_calc_bounded(kern, T, 5.0, tol=1e-11)
    assert (got - s_resolvent_right(Quaternion(10.0), T)).norm() < 1e-8


def test_circle_calculus_guards():
    T = QMatrix.diag([Quaternion(1, 2, 0, 0), Quaternion(3)])
    with pytest.raises(DomainError):
        s_calc_bounded(RightPolynomial([1.0]), T, 2.0)  # spectrum outside circle
    with pytest.raises(DomainError):
        s_calc_bounded(KernelPowerFunction(Quaternion(4.0), 1), T, 5.0)


# -- strip formulas ---------------------------------------------------------------


def test_strip_identity_function():
    # the sign convention is pinned by f == 1 reproducing u
    for j in range(2):
        u = basis_column(2, j)
        got = strip_f_of_T(problem(dirac(0.0)), alpha=2.0, c=0.5, u=u, tol=1e-6)
        assert (got - u).norm() < 1e-9


def test_strip_kernel_function():
    mu = kernel_measure(Quaternion(2.0), ENV.omega)
    R = s_resolvent_right(Quaternion(2.0), T_FIX)
    for j in range(2):
        u = basis_column(2, j)
        got = strip_f_of_T(problem(mu), alpha=5.0, c=0.5, u=u, tol=1e-6)
        assert (got - R @ u).norm() < 1e-5


def test_strip_agrees_with_group_route():
    mu = combine(dirac(1.0), dirac(-1.0, Quaternion(0.5)))
    fT = f_of_T_group(problem(mu))
    u = basis_column(2, 0)
    got = strip_f_of_T(problem(mu), alpha=2.0, c=0.5, u=u, tol=1e-6)
    assert (got - fT @ u).norm() < 1e-5


def test_strip_route_slice_independent():
    mu = kernel_measure(Quaternion(10.0), ENV.omega)
    u = basis_column(2, 1)
    values = []
    for unit in (E1, E2, (E1 + E3) * (1 / math.sqrt(2))):
        prob = problem(mu)
        prob.unit = unit
        values.append(strip_f_of_T(prob, alpha=5.0, c=0.5, u=u, tol=1e-7))
    for v in values[1:]:
        assert (v - values[0]).norm() < 1e-7


def test_strip_group_reconstruction_zero_operator():
    T = QMatrix.zeros(2, 2)
    u = basis_column(2, 0)
    got = strip_group_reconstruction(T, 0.0, alpha=2.0, c=1.0, u=u, tol=1e-6)
    assert (got - u).norm() < 1e-6


def test_strip_parameter_validation():
    u = basis_column(2, 0)
    with pytest.raises(DomainError):
        strip_group_reconstruction(T_FIX, 1.0, alpha=0.4, c=0.5, u=u)
    with pytest.raises(DomainError):
        # c beyond the transform strip of mu_2
        strip_f_of_T(problem(kernel_measure(Quaternion(2.0), ENV.omega)),
                     alpha=5.0, c=2.5, u=u)


# -- residues ---------------------------------------------------------------------


def test_residue_closed_form_value():
    # -(1 - I_p I)/2 (alpha - p_I)^(-2) for p = 3+4e1 on the slice of e2
    br = residue_oracle(Quaternion(3, 4, 0, 0), 10.0, T_FIX, unit=E2, delta=0.1)
    p_i = Quaternion(3, 0, 4, 0)
    res = (ONE - E1 * E2) * 0.5 * (-1.0) * ((Quaternion(10.0) - p_i) ** (-2))
    aI = QMatrix.identity(2) * 10.0
    w = (aI - T_FIX) @ ((aI - T_FIX) @ QMatrix(np.array([[[1.0, 0, 0, 0]],
                                                         [[1.0, 0, 0, 0]]])))
    g = s_resolvent_right(p_i, T_FIX) @ w
    expected = g.left_mul(res)
    assert (br.contributions["pole"] - expected).norm() < 1e-12
    assert br.max_circle_mismatch < 1e-9
    assert br.strip_mismatch < 1e-7


def test_residue_oracle_on_base_slice():
    # for I = I_p the conjugate pole is removable and its contribution vanishes
    br = residue_oracle(Quaternion(3, 4, 0, 0), 10.0, T_FIX, unit=E1, delta=0.1)
    assert br.contributions["pole_conj"].norm() < 1e-14
    assert br.circles["pole_conj"].norm() < 1e-10


def test_residue_oracle_guards():
    with pytest.raises(DomainError):
        residue_oracle(Quaternion(3.0), 10.0, T_FIX)  # real p merges the poles
    with pytest.raises(DomainError):
        residue_oracle(Quaternion(9.9, 0.2, 0, 0), 10.0, T_FIX)


# -- comparison --------------------------------------------------------------------


def test_compare_exponential_function():
    # f(s) = e^(-s): group route gives exp(-T); the entire transform is
    # regular on any ball, so the circle route applies as well
    rep = compare_calculi(problem(dirac(1.0)), alpha=2.0, c=0.5, radius=3.0,
                          strip_tol=1e-6)
    assert (rep.value_group - qexp_matrix(T_FIX, -1.0)).norm() < 1e-12
    assert rep.value_circle is not None
    assert (rep.value_circle - rep.value_group).norm() < 1e-8
    assert rep.skipped == {"closed": "measure is not a kernel measure; no closed form"}


def test_compare_skips_circle_when_not_regular():
    # mu_2's transform strip is |Re| < 2: a radius-3 ball does not fit
    mu = kernel_measure(Quaternion(2.0), ENV.omega)
    rep = compare_calculi(problem(mu), alpha=1.5, c=0.5, radius=3.0,
                          strip_tol=1e-6)
    assert "circle" in rep.skipped
    assert rep.value_closed is not None
    assert rep.residuals["closed-group"] < 1e-7


def test_compare_residuals_within_error_estimates():
    mu = kernel_measure(Quaternion(10.0), ENV.omega)
    rep = compare_calculi(problem(mu), alpha=5.0, c=0.5, radius=3.0,
                          strip_tol=1e-7)
    for pair, residual in rep.residuals.items():
        a, b = pair.split("-")
        assert residual <= rep.error_estimates[a] + rep.error_estimates[b]


# -- polynomial calculus -------------------------------------------------------------


def test_poly_apply_examples():
    assert (poly_apply([1.0], T_FIX) - QMatrix.identity(2)).norm() == 0.0
    T = QMatrix.diag([E1, Quaternion(0)])
    got = poly_apply([2.0, -1.0], T)
    assert (got - QMatrix.diag([Quaternion(2, -1, 0, 0), Quaternion(2)])).norm() < 1e-15
    with pytest.raises(DomainError):
        poly_apply([E1], T)


def test_inverting_sequence_trivial():
    rec = inverting_sequence_run([[1.0]], problem(dirac(0.0)), basis_column(2, 0))
    assert rec.passed and rec.rows[0][1] < 1e-14


def test_inverting_sequence_reports_bounds():
    mu3 = kernel_measure(Quaternion(3.0), ENV.omega)
    rec = inverting_sequence_run([[3.0, -1.0]], problem(mu3, tol=1e-10),
                                 basis_column(2, 1), tol=1e-7)
    assert rec.passed
    n, residual, bound_max, conv_max, op_norm = rec.rows[0]
    assert n == 1
    assert bound_max <= 1.0 + 1e-9   # |(3-s) K_R(3,s)| = 1 on the strip
    assert conv_max < 1e-9
    assert abs(op_norm - 1.0) < 1e-9

import math

import numpy as np
import pytest

from conftest import rand_quat, rand_unit
from quatcalc import (E1, E2, E3, ONE, Atom, AxialDomain, CircleContour,
                      DomainError, ExpDensity, ExpKernel, KernelPowerFunction,
                      QMeasure, Quaternion, RightPolynomial, SingularityError,
                      StemFunction, TransformFunction, cauchy_reconstruct,
                      cr_residual, is_intrinsic, kernel_measure,
                      laplace_stieltjes, qexp, recompose,
                      right_regularity_residual, splitting)
from quatcalc.kernels import cauchy_kernel_right

INF = math.inf


def gauss_transform_oracle(mu, s, t_span=60.0, n_nodes=4000):
    """Independent Gauss-Legendre evaluation of the transform of a measure."""
    total = Quaternion(0)
    for atom in mu.atoms:
        total = total + atom.weight * qexp(s * (-atom.t))
    nodes, weights = np.polynomial.legendre.leggauss(80)
    for d in mu.densities:
        lo = max(d.lo, -t_span)
        hi = min(d.hi, t_span)
        panels = np.linspace(lo, hi, 61)
        for a, b in zip(panels[:-1], panels[1:]):
            mid, half = 0.5 * (a + b), 0.5 * (b - a)
            for t, w in zip(mid + half * nodes, half * weights):
                total = total + d.weight_at(t) * qexp(s * (-t)) * w
    return total


# -- evaluation -----------------------------------------------------------------


def test_eval_examples():
    ident = RightPolynomial([0.0, 1.0])
    x = Quaternion(2, 0, 0, 1)
    assert ident(x).isclose(x)

    kern = KernelPowerFunction(Quaternion(3.0), 1)
    assert kern(Quaternion(1.0)).isclose(Quaternion(0.5))

    stem = StemFunction(E1, lambda z: z * z)
    x = Quaternion(1, 0, 1, 0)
    assert stem(x).isclose(x * x, 1e-14)


def test_eval_errors():
    kern = KernelPowerFunction(Quaternion(0, 1, 0, 0), 1)
    with pytest.raises(SingularityError):
        kern(E2)  # e2 lies on the singular sphere [e1]
    f = TransformFunction(kernel_measure(Quaternion(2.0)))
    with pytest.raises(DomainError):
        f(Quaternion(2.5))


def test_stem_representation_formula_consistency():
    # stems on different base slices of the same closed form agree everywhere
    rng = np.random.default_rng(0)
    poly = RightPolynomial([Quaternion(0.5), E2, Quaternion(1, 1, 0, 0)])
    stems = [StemFunction(unit, lambda z: poly(z)) for unit in (E1, E2, (E1 + E3) * (1 / math.sqrt(2)))]
    for _ in range(20):
        x = rand_quat(rng, 2.0)
        vals = [s(x) for s in stems]
        for v in vals[1:]:
            assert abs(v - vals[0]) < 1e-9
        assert abs(vals[0] - poly(x)) < 1e-9


def test_canonical_direction_never_leaks():
    # real evaluation points exercise the canonical e1 direction; the
    # representation formula collapses it regardless of the stem slice
    poly = RightPolynomial([E3, Quaternion(0.5, 0, 1, 0)])
    for unit in (E1, E2, (E2 + E3) * (1 / math.sqrt(2))):
        stem = StemFunction(unit, lambda z: poly(z))
        for x in (Quaternion(0.0), Quaternion(-1.7), Quaternion(2.3)):
            assert abs(stem(x) - poly(x)) < 1e-14


def test_stem_pair_components_slice_independent():
    # alpha, beta of the representation formula do not depend on the unit
    poly = RightPolynomial([E3, Quaternion(1.0), Quaternion(0, 1, 0, 0)])
    x0, x1 = 0.4, 1.3
    references = None
    for unit in (E1, E2, E3):
        x_i = recompose(x0, x1, unit)
        alpha = (poly(x_i) + poly(x_i.conjugate())) * 0.5
        beta = ((poly(x_i.conjugate()) - poly(x_i)) * 0.5) * unit
        if references is None:
            references = (alpha, beta)
        else:
            assert abs(alpha - references[0]) < 1e-13
            assert abs(beta - references[1]) < 1e-13


# -- derivatives -----------------------------------------------------------------


def test_slice_derivative_examples():
    sq = RightPolynomial([0.0, 0.0, 1.0])
    x = Quaternion(1, 1, 0, 0)
    assert sq.slice_derivative(x).isclose(x * 2.0, 1e-14)

    expk = ExpKernel(0.7)
    got = expk.slice_derivative(x)
    assert got.isclose(qexp(x * -0.7) * -0.7, 1e-13)

    mu = QMeasure(atoms=[Atom(0.4, Quaternion(1, 0, 1, 0))],
                  densities=[ExpDensity(Quaternion(0.6), Quaternion(-1.8), 0.0, INF)])
    f = TransformFunction(mu, tol=1e-13)
    fd = _fd2(lambda q: laplace_stieltjes(mu, q, tol=1e-13), Quaternion(0.1, 0.9, 0, 0))
    assert abs(fd - f.slice_derivative(Quaternion(0.1, 0.9, 0, 0), 2)) < 1e-7


def _fd2(fn, x, h=3e-3):
    def second(step):
        return (fn(x + Quaternion(step)) - fn(x) * 2.0 + fn(x - Quaternion(step))) * (1.0 / step ** 2)
    d1, d2 = second(h), second(h / 2)
    return (d2 * 4.0 - d1) * (1.0 / 3.0)


def test_kernel_function_derivative_rule():
    f = KernelPowerFunction(Quaternion(2, 1, 0, 0), 1)
    x = Quaternion(0.2, 0, 1.1, 0)
    h = 1e-5

    def fd(step):
        return (f(x + Quaternion(step)) - f(x - Quaternion(step))) * (0.5 / step)

    rich = (fd(h / 2) * 4.0 - fd(h)) * (1.0 / 3.0)
    assert abs(rich - f.slice_derivative(x, 1)) < 1e-7


# -- intrinsic classification -----------------------------------------------------


def test_is_intrinsic_examples():
    assert is_intrinsic(RightPolynomial([1.0, -2.0, 1.0])).intrinsic
    report = is_intrinsic(RightPolynomial([E1]))
    assert not report.intrinsic and report.max_deviation == pytest.approx(2.0)
    assert is_intrinsic(KernelPowerFunction(Quaternion(2.0), 1)).intrinsic


def test_real_measure_transform_is_intrinsic():
    mu = QMeasure(atoms=[Atom(0.5, Quaternion(2.0))],
                  densities=[ExpDensity(Quaternion(1.0), Quaternion(-2.0), 0.0, INF)])
    assert is_intrinsic(TransformFunction(mu, tol=1e-12), samples=24).intrinsic
    mu_q = QMeasure(atoms=[Atom(0.5, E2)])
    assert not is_intrinsic(TransformFunction(mu_q), samples=24).intrinsic


def test_intrinsic_product_stays_right_regular():
    g = KernelPowerFunction(Quaternion(3.0), 1)       # intrinsic
    f = RightPolynomial([E2, Quaternion(1, 1, 0, 0)])  # generic right regular
    rng = np.random.default_rng(1)
    for _ in range(10):
        x = recompose(rng.uniform(-1, 1), rng.uniform(0.3, 1.5), rand_unit(rng))
        res = right_regularity_residual(lambda q: f(q) * g(q), x)
        assert res < 1e-6


# -- regularity residuals ------------------------------------------------------------


def test_kernel_right_regularity_in_x():
    s = Quaternion(1.7, 0.5, -0.8, 0.2)
    rng = np.random.default_rng(2)
    for _ in range(8):
        x = recompose(rng.uniform(-1, 1), rng.uniform(0.3, 1.2), rand_unit(rng))
        assert right_regularity_residual(lambda q: cauchy_kernel_right(s, q), x) < 1e-6


def test_transform_eval_matches_independent_quadrature():
    mu = QMeasure(atoms=[Atom(0.3, Quaternion(1, 1, 0, -0.5))],
                  densities=[ExpDensity(Quaternion(0.4, 0, 0.2, 0),
                                        Quaternion(-1.5), 0.0, INF)])
    rng = np.random.default_rng(3)
    for _ in range(6):
        s = recompose(rng.uniform(-0.8, 0.8), rng.uniform(0.2, 2.0), rand_unit(rng))
        mine = laplace_stieltjes(mu, s, tol=1e-12)
        oracle = gauss_transform_oracle(mu, s)
        assert abs(mine - oracle) < 1e-8


# -- Cauchy formula ---------------------------------------------------------------


def test_cauchy_reconstruct_examples():
    f = RightPolynomial([0.0, 0.0, 1.0])
    x = Quaternion(1, 0, 1, 0)
    got = cauchy_reconstruct(f, x, CircleContour(0.0, 3.0, E1), tol=1e-12)
    assert abs(got - x * x) < 1e-8

    one = RightPolynomial([1.0])
    got = cauchy_reconstruct(one, Quaternion(0.5, 0.2, 0.4, 0),
                             CircleContour(0.0, 2.0, E2), tol=1e-12)
    assert abs(got - ONE) < 1e-10

    r3 = cauchy_reconstruct(f, x, CircleContour(0.0, 3.0, E1), tol=1e-12)
    r5 = cauchy_reconstruct(f, x, CircleContour(0.0, 5.0, E1), tol=1e-12)
    assert abs(r3 - r5) < 1e-8


def test_cauchy_reconstruct_slice_independent():
    f = RightPolynomial([Quaternion(0.3), Quaternion(1.0), E3 * 0.5])
    x = Quaternion(-0.4, 0.8, 0.3, -0.2)
    vals = [cauchy_reconstruct(f, x, CircleContour(0.0, 4.0, unit), tol=1e-12)
            for unit in (E1, E2, (E2 + E3) * (1 / math.sqrt(2)))]
    for v in vals[1:]:
        assert abs(v - vals[0]) < 1e-9
    assert abs(vals[0] - f(x)) < 1e-9


def test_cauchy_reconstruct_requires_enclosure():
    f = RightPolynomial([1.0])
    with pytest.raises(DomainError):
        cauchy_reconstruct(f, Quaternion(5.0), CircleContour(0.0, 2.0, E1))


# -- splitting -------------------------------------------------------------------


def test_splitting_examples():
    f1, f2 = splitting(RightPolynomial([E2]), E1, E2)
    z = complex(0.4, -0.7)
    assert f1(z) == pytest.approx(0.0)
    assert f2(z) == pytest.approx(1.0)

    f1, f2 = splitting(RightPolynomial([0.0, 0.0, 1.0]), E1, E2)
    assert f1(z) == pytest.approx(z * z)
    assert f2(z) == pytest.approx(0.0)

    f1, f2 = splitting(RightPolynomial([E2, Quaternion(1.0)]), E1, E2)
    assert f1(z) == pytest.approx(z)
    assert f2(z) == pytest.approx(1.0)
    assert cr_residual(f1, z) < 1e-7
    assert cr_residual(f2, z) < 1e-7


def test_splitting_requires_orthogonal_units():
    with pytest.raises(DomainError):
        splitting(RightPolynomial([1.0]), E1, E1)


# -- domains --------------------------------------------------------------------


def test_domain_membership():
    strip = AxialDomain.strip(1.0)
    assert strip.contains(Quaternion(0.5, 3, 0, 0))
    assert not strip.contains(Quaternion(1.0))
    ball = AxialDomain.ball(2.0)
    assert ball.contains(Quaternion(1, 1, 0, 0))
    assert not ball.contains(Quaternion(2, 1, 0, 0))
    assert ball.contains_ball(1.5) and not ball.contains_ball(2.5)



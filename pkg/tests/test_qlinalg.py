import math

import numpy as np
import pytest

from conftest import rand_qmatrix, rand_quat, rand_unit
from quatcalc import (E1, E2, E3, ONE, DomainError, QMatrix, Quaternion,
                      RangeError, SlowConvergenceError, SpectralProximityError,
                      basis_column, group_envelope, hy_bound_check,
                      laplace_of_group, left_regularity_residual,
                      pseudo_resolvent, qexp_matrix, qmat_inverse,
                      s_resolvent_right, s_resolvent_right_power, s_spectrum,
                      unembed)

FIXTURE = QMatrix.diag([E1, E2 * 0.5])


def fd_s0(fn, s, h=1e-5):
    def diff(step):
        return (fn(s + Quaternion(step)) - fn(s - Quaternion(step))) * (0.5 / step)
    d1, d2 = diff(h), diff(h / 2)
    return (d2 * 4.0 - d1) * (1.0 / 3.0)


# -- embedding ---------------------------------------------------------------


def test_embed_examples():
    np.testing.assert_allclose(QMatrix.diag([ONE]).embed(), np.eye(2), atol=0)
    np.testing.assert_allclose(QMatrix.diag([E1]).embed(),
                               np.diag([1j, -1j]), atol=0)
    chi_e2 = QMatrix.diag([E2]).embed()
    np.testing.assert_allclose(chi_e2, np.array([[0, 1], [-1, 0]]), atol=0)
    np.testing.assert_allclose(chi_e2 @ chi_e2, -np.eye(2), atol=0)


def test_embedding_homomorphism():
    rng = np.random.default_rng(2)
    for _ in range(30):
        A, B = rand_qmatrix(rng, 3), rand_qmatrix(rng, 3)
        np.testing.assert_allclose((A @ B).embed(), A.embed() @ B.embed(),
                                   atol=1e-12)
        np.testing.assert_allclose((A + B).embed(), A.embed() + B.embed(),
                                   atol=1e-14)
        assert (unembed(A.embed() @ B.embed()) - A @ B).norm() <= 1e-12


def test_unembed_rejects_foreign_matrices():
    with pytest.raises(ValueError):
        unembed(np.array([[1.0, 0.0], [0.0, 2.0]], dtype=complex))


def test_operator_norm_bounds_action():
    rng = np.random.default_rng(3)
    for _ in range(30):
        A = rand_qmatrix(rng, 2)
        v = QMatrix(rng.normal(size=(2, 1, 4)))
        assert (A @ v).norm() <= A.norm() * v.norm() * (1 + 1e-12)


def test_right_linearity():
    rng = np.random.default_rng(4)
    A = rand_qmatrix(rng, 3)
    v = QMatrix(rng.normal(size=(3, 1, 4)))
    a = rand_quat(rng)
    lhs = A @ v.right_mul(a)
    rhs = (A @ v).right_mul(a)
    assert (lhs - rhs).norm() < 1e-13


# -- inverse -----------------------------------------------------------------


def test_inverse_examples():
    eye = QMatrix.identity(3)
    assert (qmat_inverse(eye) - eye).norm() < 1e-14
    A = QMatrix.diag([Quaternion(3, 2, 0, 0), ONE])
    expected = QMatrix.diag([Quaternion(3, -2, 0, 0) * (1 / 13), ONE])
    inv = qmat_inverse(A)
    assert (inv - expected).norm() < 1e-14
    assert (A @ inv - eye.identity(2)).norm() < 1e-14
    singular = QMatrix.from_rows([[ONE, ONE], [Quaternion(0), Quaternion(0)]])
    with pytest.raises(DomainError):
        qmat_inverse(singular)


# -- S-spectrum ----------------------------------------------------------------


def test_s_spectrum_examples():
    spec = s_spectrum(QMatrix.diag([Quaternion(1, 2, 0, 0), Quaternion(3)]))
    assert [(sp.x0, sp.x1) for sp in spec.spheres] == [(1.0, 2.0), (3.0, 0.0)]
    assert spec.multiplicities == (1, 1)

    spec0 = s_spectrum(QMatrix.zeros(2, 2))
    assert spec0.spheres == ((0.0, 0.0),)
    assert spec0.multiplicities == (2,)

    spec2 = s_spectrum(QMatrix.diag([E1, E2]))
    assert len(spec2.spheres) == 1
    assert spec2.spheres[0].x0 == pytest.approx(0.0, abs=1e-12)
    assert spec2.spheres[0].x1 == pytest.approx(1.0, abs=1e-12)
    assert spec2.multiplicities == (2,)


def test_spectrum_in_norm_ball():
    rng = np.random.default_rng(5)
    for _ in range(20):
        T = rand_qmatrix(rng, 3)
        spec = s_spectrum(T)
        assert sum(spec.multiplicities) == 3
        assert spec.max_modulus() <= T.norm() + 1e-9


def test_axial_symmetry_of_spectrum():
    # every point of a spectral sphere makes the sphere polynomial singular
    T = QMatrix.diag([Quaternion(0.3, 1.2, 0, 0), Quaternion(-0.5, 0, 0.7, 0)])
    spec = s_spectrum(T)
    rng = np.random.default_rng(6)
    for sp in spec.spheres:
        for _ in range(5):
            s = sp.point(rand_unit(rng))
            R = T @ T - T * (2 * s.w) + QMatrix.identity(2) * s.norm_sq()
            smin = np.linalg.svd(R.embed(), compute_uv=False)[-1]
            assert smin < 1e-10
    # and points away from the spectrum do not
    s_far = Quaternion(5.0, 1.0, 0, 0)
    R = T @ T - T * (2 * s_far.w) + QMatrix.identity(2) * s_far.norm_sq()
    assert np.linalg.svd(R.embed(), compute_uv=False)[-1] > 1.0


# -- resolvents -----------------------------------------------------------------


def test_pseudo_resolvent_examples():
    P = pseudo_resolvent(Quaternion(2), QMatrix.zeros(2, 2))
    assert (P - QMatrix.identity(2) * 0.25).norm() < 1e-14

    T = QMatrix.diag([E1, E2])
    P = pseudo_resolvent(Quaternion(2), T)
    # entrywise scalar polynomial q^2 - 4q + 4 at q = e1 gives 3 - 4 e1
    expected = QMatrix.diag([(Quaternion(3, -4, 0, 0)).inverse(),
                             (Quaternion(3, 0, -4, 0)).inverse()])
    assert (P - expected).norm() < 1e-13
    R = T @ T - T * 4.0 + QMatrix.identity(2) * 4.0
    assert (R @ P - QMatrix.identity(2)).norm() < 1e-10

    with pytest.raises(SpectralProximityError):
        pseudo_resolvent(E1, T)


def test_resolvent_real_point_examples():
    T = QMatrix.diag([Quaternion(1, 2, 0, 0), Quaternion(3)])
    R = s_resolvent_right(Quaternion(4), T)
    expected = QMatrix.diag([Quaternion(3, 2, 0, 0) * (1 / 13), ONE])
    assert (R - expected).norm() < 1e-13

    s = Quaternion(0.7, 1.1, -0.3, 0.2)
    R0 = s_resolvent_right(s, QMatrix.zeros(2, 2))
    assert (R0 - QMatrix.identity(2).left_mul(s.inverse())).norm() < 1e-14


def test_resolvent_real_point_vs_plain_inverse():
    rng = np.random.default_rng(7)
    for _ in range(20):
        T = rand_qmatrix(rng, 2)
        alpha = T.norm() + 1.0 + rng.uniform(0, 2)
        lhs = s_resolvent_right(Quaternion(alpha), T)
        rhs = qmat_inverse(QMatrix.identity(2) * alpha - T)
        assert (lhs - rhs).norm() <= 1e-11


def test_resolvent_power_vs_derivative():
    # d/ds0 S_R(s,T) = -S_R^2(s,T)
    T = FIXTURE
    s = Quaternion(2.0, 0.5, 0.3, 0)
    fd = fd_s0(lambda q: s_resolvent_right(q, T), s)
    power2 = s_resolvent_right_power(2, s, T)
    assert (fd + power2).norm() < 1e-6
    # and for real alpha the power equals the iterated inverse
    R = s_resolvent_right(Quaternion(4.0), T)
    assert (s_resolvent_right_power(3, Quaternion(4.0), T) - R @ R @ R).norm() < 1e-12


def test_resolvent_equation_samples():
    rng = np.random.default_rng(8)
    for _ in range(25):
        n = int(rng.integers(2, 4))
        T = rand_qmatrix(rng, n)
        spec = s_spectrum(T)
        while True:
            s = rand_quat(rng, 1.0 + T.norm())
            if spec.distance(s) > 0.1:
                break
        v = QMatrix(rng.normal(size=(n, 1, 4)))
        R = s_resolvent_right(s, T)
        residual = ((R @ v).left_mul(s) - R @ (T @ v) - v).norm()
        assert residual <= 1e-10 * (1 + abs(s)) * v.norm() * (1 + T.norm())


def test_resolvent_left_slice_regular():
    T = FIXTURE
    v = basis_column(2, 0) + basis_column(2, 1).right_mul(E3)
    spots = [Quaternion(2.0, 0.8, 0, 0), Quaternion(-1.8, 0.0, 1.1, 0),
             Quaternion(0.1, 1.4, 1.4, 0.5)]
    for s in spots:
        res = left_regularity_residual(lambda q: (s_resolvent_right(q, T) @ v).data, s)
        assert res < 1e-6


# -- exponential and group -------------------------------------------------------


def test_qexp_matrix_examples():
    T = FIXTURE
    assert (qexp_matrix(T, 0.0) - QMatrix.identity(2)).norm() < 1e-15
    rot = qexp_matrix(QMatrix.diag([E1, Quaternion(0)]), math.pi)
    assert (rot - QMatrix.diag([Quaternion(-1), ONE])).norm() < 1e-12


def test_qexp_matrix_taylor_oracle():
    rng = np.random.default_rng(9)
    T = rand_qmatrix(rng, 3, scale=0.4)
    T = T * (0.9 / T.norm())
    series = QMatrix.identity(3)
    term = QMatrix.identity(3)
    for k in range(1, 31):
        term = term @ T * (1.0 / k)
        series = series + term
    assert (qexp_matrix(T) - series).norm() < 1e-10


def test_group_law():
    rng = np.random.default_rng(10)
    T = rand_qmatrix(rng, 2)
    for s, t in ((0.5, 0.25), (-1.0, 0.75)):
        lhs = qexp_matrix(T, s + t)
        rhs = qexp_matrix(T, s) @ qexp_matrix(T, t)
        assert (lhs - rhs).norm() < 1e-12


def test_qexp_overflow_guard():
    with pytest.raises(RangeError):
        qexp_matrix(QMatrix.diag([Quaternion(100.0)]), 10.0)


def test_laplace_of_group_examples():
    half = laplace_of_group(Quaternion(2), QMatrix.zeros(2, 2), tol=1e-10)
    assert (half - QMatrix.identity(2) * 0.5).norm() < 1e-9

    T = QMatrix.diag([E1, E2])
    env = group_envelope(T)
    for s in (Quaternion(2), Quaternion(-2)):
        L = laplace_of_group(s, T, envelope=env, tol=1e-9)
        assert (L - s_resolvent_right(s, T)).norm() < 1e-7

    with pytest.raises(DomainError):
        laplace_of_group(Quaternion(0.0, 3.0, 0, 0), T, envelope=env)
    with pytest.raises(SlowConvergenceError):
        laplace_of_group(Quaternion(1e-4), T, envelope=env)


def test_group_envelope_examples():
    env0 = group_envelope(QMatrix.zeros(2, 2))
    assert env0.M == pytest.approx(1.0, abs=1e-9)
    assert env0.omega == pytest.approx(0.0, abs=1e-8)

    env = group_envelope(FIXTURE)
    assert env.omega == pytest.approx(0.0, abs=1e-8)
    assert 1.0 <= env.M < 1.0 + 1e-9

    env2 = group_envelope(QMatrix.diag([Quaternion(1, 1, 0, 0), Quaternion(-1)]))
    assert env2.omega == pytest.approx(1.0, abs=1e-8)


def test_hy_bound_examples():
    report = hy_bound_check(QMatrix.zeros(2, 2), [0.5, -0.5, 2.0], n_max=5)
    assert report.passed
    assert report.max_ratio <= 1.0 + 1e-9

    report = hy_bound_check(FIXTURE, [1.0, -1.0, 2.0, -2.0], n_max=4)
    assert report.passed

    with pytest.raises(DomainError):
        hy_bound_check(FIXTURE, [0.0])

import numpy as np
import pytest

from conftest import rand_quat
from quatcalc import (E1, E2, Quaternion, SingularityError, cauchy_kernel_left,
                      cauchy_kernel_right, kernel_power, sphere_polynomial)


def fd_x0(fn, x, h=1e-5):
    """Richardson-extrapolated central difference in the real direction."""
    def diff(step):
        return (fn(x + Quaternion(step)) - fn(x - Quaternion(step))) * (0.5 / step)
    d1, d2 = diff(h), diff(h / 2)
    return (d2 * 4.0 - d1) * (1.0 / 3.0)


def test_kernel_real_case():
    # commuting arguments reduce to (s - x)^(-1)
    assert cauchy_kernel_right(Quaternion(3), Quaternion(1)).isclose(Quaternion(0.5))
    assert kernel_power(Quaternion(3), Quaternion(1), 2).isclose(Quaternion(0.25))


def test_kernel_power_matches_kernel_at_one():
    rng = np.random.default_rng(21)
    for _ in range(100):
        s, x = rand_quat(rng, 2.0), rand_quat(rng, 2.0)
        if sphere_polynomial(s, x).norm_sq() < 1e-4:
            continue
        assert abs(kernel_power(s, x, 1) - cauchy_kernel_right(s, x)) < 1e-13


def test_kernel_power_is_x0_derivative():
    s = Quaternion(2, 1, 0, 0)
    x = E2
    fd = fd_x0(lambda q: cauchy_kernel_right(s, q), x)
    assert abs(fd - kernel_power(s, x, 2)) < 1e-6


def test_kernel_s0_derivative_sign():
    # d^m/ds0^m K_R(s, x) = (-1)^m m! K_R^(m+1)(s, x)
    rng = np.random.default_rng(31)
    for _ in range(10):
        s, x = rand_quat(rng, 1.5), rand_quat(rng, 1.5)
        if sphere_polynomial(s, x).norm_sq() < 1e-2:
            continue
        fd1 = fd_x0(lambda q: cauchy_kernel_right(q, x), s)
        assert abs(fd1 - (-1.0) * kernel_power(s, x, 2)) < 1e-6
        fd2 = fd_x0(lambda q: kernel_power(q, x, 2), s)
        assert abs(fd2 - (-2.0) * kernel_power(s, x, 3)) < 1e-5


def test_left_right_kernel_identity():
    # S_L(s, x) = -S_R(x, s)
    rng = np.random.default_rng(41)
    checked = 0
    while checked < 50:
        s, x = rand_quat(rng, 2.0), rand_quat(rng, 2.0)
        if sphere_polynomial(s, x).norm_sq() < 1e-3 or sphere_polynomial(x, s).norm_sq() < 1e-3:
            continue
        assert abs(cauchy_kernel_left(s, x) + cauchy_kernel_right(x, s)) < 1e-12
        checked += 1


def test_singular_sphere_rejected():
    # e2 lies on the sphere [e1]; the kernel has no value there
    with pytest.raises(SingularityError):
        cauchy_kernel_right(E1, E2)
    with pytest.raises(SingularityError):
        kernel_power(E1, E1, 2)

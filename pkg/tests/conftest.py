"""Shared helpers for the test suite: seeded random quaternionic data."""
import numpy as np

from quatcalc import QMatrix, Quaternion


def rand_quat(rng, scale=1.0):
    return Quaternion(*rng.uniform(-scale, scale, size=4))


def rand_unit(rng):
    while True:
        v = rng.normal(size=3)
        n = np.linalg.norm(v)
        if n > 1e-3:
            return Quaternion(0.0, *(v / n))


def rand_qmatrix(rng, n, scale=1.0):
    return QMatrix(rng.uniform(-scale, scale, size=(n, n, 4)))


def left_mul_matrix(q):
    """4x4 real matrix of left multiplication by q: an independent oracle
    for the Hamilton product (components ordered w, x, y, z)."""
    w, x, y, z = q.w, q.x, q.y, q.z
    return np.array([
        [w, -x, -y, -z],
        [x,  w, -z,  y],
        [y,  z,  w, -x],
        [z, -y,  x,  w],
    ])

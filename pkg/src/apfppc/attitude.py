"""Rotation and reduced-attitude primitives.

Quaternions are scalar-last ``[x, y, z, w]``.  ``quat_to_dcm`` returns the
attitude matrix ``A_bi`` that maps inertial-frame vectors into the body frame,
so that ``A_bi`` obeys ``dA/dt = -skew(w) @ A`` for a body rate ``w``.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True)
def skew(v):
    """Cross-product matrix: ``skew(v) @ w == np.cross(v, w)``."""
    out = np.zeros((3, 3))
    out[0, 1] = -v[2]
    out[0, 2] = v[1]
    out[1, 0] = v[2]
    out[1, 2] = -v[0]
    out[2, 0] = -v[1]
    out[2, 1] = v[0]
    return out


@njit(cache=True)
def l_operator(x):
    """Inertia regressor for a diagonal inertia: ``J @ x == l_operator(x) @ diag(J)``."""
    out = np.zeros((3, 3))
    out[0, 0] = x[0]
    out[1, 1] = x[1]
    out[2, 2] = x[2]
    return out


@njit(cache=True)
def cross(a, b):
    out = np.empty(3)
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]
    return out


@njit(cache=True)
def quat_normalize(q):
    return q / math.sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3])


@njit(cache=True)
def quat_to_dcm(q):
    """Attitude matrix ``A_bi`` of a unit quaternion (scalar last)."""
    x, y, z, w = q[0], q[1], q[2], q[3]
    a = np.empty((3, 3))
    a[0, 0] = w * w + x * x - y * y - z * z
    a[0, 1] = 2.0 * (x * y + w * z)
    a[0, 2] = 2.0 * (x * z - w * y)
    a[1, 0] = 2.0 * (x * y - w * z)
    a[1, 1] = w * w - x * x + y * y - z * z
    a[1, 2] = 2.0 * (y * z + w * x)
    a[2, 0] = 2.0 * (x * z + w * y)
    a[2, 1] = 2.0 * (y * z - w * x)
    a[2, 2] = w * w - x * x - y * y + z * z
    return a


@njit(cache=True)
def quat_derivative(q, w):
    """Quaternion rate consistent with ``dA_bi/dt = -skew(w) @ A_bi``."""
    x, y, z, s = q[0], q[1], q[2], q[3]
    out = np.empty(4)
    out[0] = 0.5 * (s * w[0] + y * w[2] - z * w[1])
    out[1] = 0.5 * (s * w[1] + z * w[0] - x * w[2])
    out[2] = 0.5 * (s * w[2] + x * w[1] - y * w[0])
    out[3] = -0.5 * (x * w[0] + y * w[1] + z * w[2])
    return out


@njit(cache=True)
def propagate_attitude(q, w, dt):
    """Advance ``q`` by a constant body rate ``w`` over ``dt`` (exact exponential).

    The result is renormalized; a zero rate returns the input unchanged.
    """
    wn = math.sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2])
    if wn == 0.0:
        return q.copy()
    half = 0.5 * wn * dt
    c = math.cos(half)
    s = math.sin(half) / wn
    # (cos I + sin/|w| * Omega(w)) q, with Omega(w) q = 2 * quat_derivative(q, w)
    out = c * q + 2.0 * s * quat_derivative(q, w)
    return quat_normalize(out)


@njit(cache=True)
def pointing_error(b_b, r_b):
    """``x_e = 1 - B_b . r_b``; 0 when aligned, 2 when anti-aligned."""
    return 1.0 - (b_b[0] * r_b[0] + b_b[1] * r_b[1] + b_b[2] * r_b[2])


def quat_from_axis_angle(axis, angle):
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    return np.concatenate([axis * math.sin(0.5 * angle), [math.cos(0.5 * angle)]])


def boresight_inertial(q, b_b):
    """Boresight direction in the inertial frame, ``B_i = A_bi^T B_b``."""
    return quat_to_dcm(np.asarray(q, dtype=float)).T @ np.asarray(b_b, dtype=float)


def angle_deg(x_e):
    """Pointing angle in degrees from the pointing error ``x_e = 1 - cos(theta)``."""
    # 2*asin(sqrt(x/2)) keeps precision for x_e near 0, unlike acos(1 - x)
    return np.degrees(2.0 * np.arcsin(np.sqrt(np.clip(np.asarray(x_e, dtype=float), 0.0, 2.0) / 2.0)))

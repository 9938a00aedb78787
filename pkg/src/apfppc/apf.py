"""Potential fields for pointing: attraction on x_e, sec-type cone repulsion,
and the log barrier on per-axis body rate."""

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .attitude import cross
from .errors import OutsideDomain, RateLimitViolated


@dataclass(frozen=True)
class ForbiddenZone:
    """Pointing-forbidden cone around inertial axis ``axis`` with half-angle ``theta_f``.

    The repulsion field acts for ``gamma = B . f`` in ``[P0, P1)`` where
    ``P1 = cos(theta_f)`` and ``P0 = cos(theta_f + acting_margin)``.  The
    switching-indicator segment points default to ``cos(theta_f + 10 deg)`` and
    ``cos(theta_f + 5 deg)``.
    """

    axis: tuple
    theta_f: float
    acting_margin: float = math.radians(10.0)
    indicator_margins: tuple = (math.radians(10.0), math.radians(5.0))

    def __post_init__(self):
        f = np.asarray(self.axis, dtype=float)
        n = np.linalg.norm(f)
        if abs(n - 1.0) > 1e-14:  # keep already-unit axes bit-exact across config round trips
            f = f / n
        object.__setattr__(self, "axis", tuple(float(x) for x in f))
        if not (-1.0 < self.p0 < self.p1 < 1.0):
            raise ValueError("zone needs -1 < P0 < P1 < 1")
        if not self.s_f0 < self.s_f1 < self.p1:
            raise ValueError("indicator segment points must satisfy S_f0 < S_f1 < cos(theta_f)")

    @property
    def p0(self):
        return math.cos(self.theta_f + self.acting_margin)

    @property
    def p1(self):
        return math.cos(self.theta_f)

    @property
    def a_n(self):
        return math.pi / (2.0 * (self.p1 - self.p0))

    @property
    def b_n(self):
        return -self.a_n * self.p0

    @property
    def s_f0(self):
        return math.cos(self.theta_f + self.indicator_margins[0])

    @property
    def s_f1(self):
        return math.cos(self.theta_f + self.indicator_margins[1])


@dataclass(frozen=True)
class ApfGains:
    k_a: float = 2.5
    k_r: float = 0.5
    k_omega: float = 0.03
    m_omega: float = 0.0524

    def __post_init__(self):
        if min(self.k_a, self.k_r, self.k_omega, self.m_omega) <= 0.0:
            raise ValueError("APF gains must be positive")


@njit(cache=True)
def repulsion_value(gamma, p0, p1, k_r):
    """Cone field: 1 outside the acting region, ``k_r sec(a gamma + b) + 1 - k_r`` inside."""
    if gamma >= p1:
        raise OutsideDomain("boresight inside forbidden cone")
    if gamma < p0:
        return 1.0
    a = math.pi / (2.0 * (p1 - p0))
    return k_r / math.cos(a * (gamma - p0)) + 1.0 - k_r


@njit(cache=True)
def repulsion_gradient(gamma, b_b, f_b, p0, p1):
    """Rate-gradient of one cone field: ``dU_r/dt = k_r * grad . w``."""
    if gamma >= p1:
        raise OutsideDomain("boresight inside forbidden cone")
    if gamma < p0:
        return np.zeros(3)
    a = math.pi / (2.0 * (p1 - p0))
    arg = a * (gamma - p0)
    sec = 1.0 / math.cos(arg)
    return -a * sec * math.tan(arg) * cross(f_b, b_b)


@njit(cache=True)
def potential(x_e, gammas, p0, p1, k_a, k_r):
    """Total field ``U = k_a x_e * sum_N U_r^N``."""
    u_r = 0.0
    for n in range(gammas.shape[0]):
        u_r += repulsion_value(gammas[n], p0[n], p1[n], k_r)
    return k_a * x_e * u_r


@njit(cache=True)
def combined_gradient(b_b, r_b, f_b, p0, p1, k_a, k_r):
    """Rate-gradient ``grad_U`` of the total field, so that ``dU/dt = grad_U . w``.

    ``f_b`` holds one body-frame zone axis per row.
    """
    x_e = 1.0 - (b_b[0] * r_b[0] + b_b[1] * r_b[1] + b_b[2] * r_b[2])
    u_a = k_a * x_e
    u_r = 0.0
    rep = np.zeros(3)
    for n in range(f_b.shape[0]):
        fn = f_b[n]
        g = b_b[0] * fn[0] + b_b[1] * fn[1] + b_b[2] * fn[2]
        u_r += repulsion_value(g, p0[n], p1[n], k_r)
        rep += repulsion_gradient(g, b_b, fn, p0[n], p1[n])
    return k_a * u_r * cross(r_b, b_b) + k_r * u_a * rep


@njit(cache=True)
def velocity_barrier(w, k_omega, m_omega):
    """Log barrier on per-axis rate.

    Returns ``(V_omega, R_omega)`` where ``R_omega`` holds the diagonal of the
    gain matrix ``diag(k_omega / (M^2 - w_i^2))``.
    """
    m2 = m_omega * m_omega
    v = 0.0
    r = np.empty(3)
    for i in range(3):
        gap = m2 - w[i] * w[i]
        if gap <= 0.0:
            raise RateLimitViolated("angular rate component at or above limit")
        v += math.log(m2 / gap)
        r[i] = k_omega / gap
    return 0.5 * k_omega * v, r

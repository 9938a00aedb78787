"""Truth model of the rigid spacecraft: Euler dynamics, disturbance, saturation."""

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .attitude import cross, quat_derivative, quat_normalize
from .errors import NonFiniteState


@dataclass(frozen=True)
class PlantParams:
    """Physical plant.  ``inertia`` holds the diagonal of J in kg m^2."""

    inertia: tuple = (2.0, 2.9, 2.3)
    u_max: float = 0.05
    omega_p: float = 0.01
    disturbance: bool = True

    def __post_init__(self):
        if len(self.inertia) != 3 or min(self.inertia) <= 0.0:
            raise ValueError("inertia must be three positive diagonal entries")
        if self.u_max <= 0.0:
            raise ValueError("u_max must be positive")


@dataclass
class ReducedAttitudeState:
    q: np.ndarray
    omega: np.ndarray

    def __post_init__(self):
        self.q = quat_normalize(np.asarray(self.q, dtype=float))
        self.omega = np.asarray(self.omega, dtype=float)


@njit(cache=True)
def disturbance(t, omega_p):
    """Environmental torque in N m: three-channel sinusoid of base frequency ``omega_p``."""
    d = np.empty(3)
    w = omega_p * t
    d[0] = 1e-3 * (4.0 * math.sin(3.0 * w) + 3.0 * math.cos(10.0 * w) - 4.0)
    d[1] = 1e-3 * (-1.5 * math.sin(2.0 * w) + 3.0 * math.cos(5.0 * w) + 4.0)
    d[2] = 1e-3 * (3.0 * math.sin(10.0 * w) - 8.0 * math.cos(4.0 * w) + 4.0)
    return d


@njit(cache=True)
def saturate_torque(u, u_max):
    """Component-wise clamp to ``[-u_max, u_max]``."""
    out = np.empty(3)
    for i in range(3):
        out[i] = min(max(u[i], -u_max), u_max)
    return out


@njit(cache=True)
def rate_derivative(w, torque, inertia):
    """``J^-1 (-w x Jw + torque)`` for diagonal ``J``."""
    jw = inertia * w
    return (torque - cross(w, jw)) / inertia


@njit(cache=True)
def dynamics_derivative(q, w, u, d, inertia):
    """Return ``(dq/dt, dw/dt)`` for applied torque ``u`` and disturbance ``d``."""
    return quat_derivative(q, w), rate_derivative(w, u + d, inertia)


@njit(cache=True)
def _plant_rk4(q, w, u, t, dt, inertia, omega_p, use_disturbance):
    y = np.empty(7)
    y[:4] = q
    y[4:] = w
    ks = np.empty((4, 7))
    stage_t = (t, t + 0.5 * dt, t + 0.5 * dt, t + dt)
    for k in range(4):
        if k == 0:
            ys = y
        elif k < 3:
            ys = y + 0.5 * dt * ks[k - 1]
        else:
            ys = y + dt * ks[2]
        d = disturbance(stage_t[k], omega_p) if use_disturbance else np.zeros(3)
        dq, dw = dynamics_derivative(ys[:4], ys[4:], u, d, inertia)
        ks[k, :4] = dq
        ks[k, 4:] = dw
    y = y + dt / 6.0 * (ks[0] + 2.0 * ks[1] + 2.0 * ks[2] + ks[3])
    return quat_normalize(y[:4]), y[4:]


def step(state, u, t, dt, params):
    """Advance the open-loop plant one RK4 step with torque ``u`` held constant.

    ``u`` is saturated before use.  The closed-loop integrator lives in
    :mod:`apfppc.closedloop`; this is the plant-only counterpart.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    inertia = np.asarray(params.inertia, dtype=float)
    u_sat = saturate_torque(np.asarray(u, dtype=float), params.u_max)
    q, w = _plant_rk4(state.q, state.omega, u_sat, float(t), float(dt), inertia,
                      params.omega_p, params.disturbance)
    if not (np.all(np.isfinite(q)) and np.all(np.isfinite(w))):
        raise NonFiniteState(f"plant state not finite after step at t={t + dt:.6f}")
    return ReducedAttitudeState(q, w)

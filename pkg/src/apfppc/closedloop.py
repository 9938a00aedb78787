"""Compiled closed loop: plant + envelope + adaptive controller on one RK4 grid.

State layout (19 entries)::

    q[0:4]  w[4:7]  rho[7]  w_hat[8:11]  g_a[11]  theta_hat[12:15]
    delta_dsc[15]  w_dsc[16:19]

The controller torque is recomputed from the stage state at every RK4 stage.
Hard constraints are checked at every stage; a breach stops the run with a
status code instead of raising, so the harness can report it.
"""

import math
from typing import NamedTuple

import numpy as np
from numba import njit

from .apf import combined_gradient, velocity_barrier
from .attitude import cross, quat_normalize, quat_to_dcm, quat_derivative
from .controller import (
    beta1,
    beta2,
    beta2_partials,
    control_torque,
    envelope_delta,
    filter_derivative,
    gradient_u_rate,
    nominal_control,
    pointing_gradient,
    pointing_gradient_rate,
    regression_set,
    theta_hat_rate,
)
from .plant import disturbance, rate_derivative, saturate_torque
from .sppf import blf_value, omega_q, rho_dot, switching_function

STATE_SIZE = 19

OK = 0
ZONE_VIOLATION = 1
RATE_VIOLATION = 2
ENVELOPE_VIOLATION = 3
NON_FINITE = 4

STATUS_NAMES = {
    OK: "ok",
    ZONE_VIOLATION: "OutsideDomain",
    RATE_VIOLATION: "RateLimitViolated",
    ENVELOPE_VIOLATION: "EnvelopeViolated",
    NON_FINITE: "NonFiniteState",
}

# per-step monitor columns
MON_T, MON_XE, MON_EPS, MON_OMQ, MON_RATE, MON_MARGIN, MON_RHO = range(7)
MON_COLS = 7


class LoopParams(NamedTuple):
    inertia: np.ndarray
    u_max: float
    omega_p: float
    use_disturbance: bool
    b_b: np.ndarray
    r_i: np.ndarray
    f_i: np.ndarray
    p0: np.ndarray
    p1: np.ndarray
    sf0: np.ndarray
    sf1: np.ndarray
    pf: np.ndarray
    k_a: float
    k_r: float
    k_omega: float
    m_omega: float
    k_rho: float
    rho_inf: float
    k_b: float
    k_s: float
    sw: np.ndarray  # rate switch (s0, s1, p)
    se: np.ndarray  # envelope switch
    sr: np.ndarray  # rho switch
    k_damp: float
    c_beta: float
    k_f: float
    k_ad: float
    tau_dsc: float
    eps_omega: float
    beta2_sign: float
    ppc: bool


def diag_size(m):
    return 18 + m


@njit(cache=True)
def evaluate(t, y, prm):
    """Closed-loop derivative and diagnostics at one state.

    Returns ``(status, ydot, diag, beta, delta_n, u_n)``.  ``diag`` follows the
    telemetry column order: x_e, eps_q, rho_q, omega_q_raw, omega_q, w(3),
    u(3), gamma(m), theta_eff(3), g_a, filt_err, V_omega, V_B.
    """
    m = prm.f_i.shape[0]
    ydot = np.zeros(STATE_SIZE)
    diag = np.zeros(18 + m)
    beta = np.zeros(3)
    for k in range(STATE_SIZE):
        if not math.isfinite(y[k]):
            return NON_FINITE, ydot, diag, beta, 0.0, np.zeros(3)

    q = quat_normalize(y[0:4])
    w = y[4:7]
    rho = y[7]
    w_hat = y[8:11]
    g_a = y[11]
    theta_hat = y[12:15]
    delta_dsc = y[15]
    w_dsc = y[16:19]

    a_bi = quat_to_dcm(q)
    b_b = prm.b_b
    r_b = a_bi @ prm.r_i
    f_b = np.empty((m, 3))
    gammas = np.empty(m)
    for n in range(m):
        f_b[n] = a_bi @ prm.f_i[n]
        gammas[n] = b_b[0] * f_b[n, 0] + b_b[1] * f_b[n, 1] + b_b[2] * f_b[n, 2]
    x_e = 1.0 - (b_b[0] * r_b[0] + b_b[1] * r_b[1] + b_b[2] * r_b[2])
    if x_e < 0.0:
        x_e = 0.0
    eps = x_e / rho

    diag[0] = x_e
    diag[1] = eps
    diag[2] = rho
    diag[5:8] = w
    diag[11:11 + m] = gammas

    status = OK
    for n in range(m):
        if gammas[n] >= prm.p1[n]:
            status = ZONE_VIOLATION
    for i in range(3):
        if abs(w[i]) >= prm.m_omega:
            status = RATE_VIOLATION
    if eps >= 1.0 or rho <= 0.0:
        status = ENVELOPE_VIOLATION
    if status != OK:
        return status, ydot, diag, beta, 0.0, np.zeros(3)

    c = cross(r_b, b_b)
    xe_dot = c[0] * w[0] + c[1] * w[1] + c[2] * w[2]
    r_rho = prm.k_b / (1.0 - eps)

    # switching indicators and envelope rate
    safety = np.empty(m + 4)
    for n in range(m):
        safety[n] = switching_function(gammas[n], prm.pf[n], prm.sf0[n], prm.sf1[n])
    for i in range(3):
        safety[m + i] = switching_function(w[i] * w[i], prm.sw[2], prm.sw[0], prm.sw[1])
    safety[m + 3] = switching_function(eps, prm.se[2], prm.se[0], prm.se[1])
    om_rho = switching_function(rho, prm.sr[2], prm.sr[0], prm.sr[1])
    om_raw, om_q = omega_q(safety, om_rho, prm.k_s)
    rho_d = rho_dot(rho, x_e, xe_dot, om_q, prm.k_rho, prm.rho_inf)

    # nominal control
    grad_u = combined_gradient(b_b, r_b, f_b, prm.p0, prm.p1, prm.k_a, prm.k_r)
    v_omega, r_omega = velocity_barrier(w, prm.k_omega, prm.m_omega)
    if prm.ppc:
        grad_c = pointing_gradient(grad_u, c, r_rho, rho)
        delta_n = envelope_delta(r_rho, rho_d, eps, rho)
    else:
        grad_c = grad_u
        delta_n = 0.0
    u_n = nominal_control(w, grad_c, r_omega, delta_n, prm.k_damp, prm.eps_omega)

    # I&I estimate and torque
    b2 = beta2(w, grad_c, delta_n, prm.k_omega, prm.m_omega, prm.k_damp, prm.eps_omega, prm.beta2_sign)
    beta = prm.c_beta * (beta1(w_hat, w) + b2)
    theta_eff = theta_hat + beta
    psi1, psi2, psi1_hat = regression_set(w, w_hat, u_n)
    u_cmd = control_torque(theta_eff, psi1 + psi2)
    u = saturate_torque(u_cmd, prm.u_max)

    # plant
    d = disturbance(t, prm.omega_p) if prm.use_disturbance else np.zeros(3)
    w_dot = rate_derivative(w, u + d, prm.inertia)
    ydot[0:4] = quat_derivative(q, w)
    ydot[4:7] = w_dot
    ydot[7] = rho_d

    # identification filter, DSC filters
    w_hat_dot, g_a_dot = filter_derivative(w_hat, w, g_a, u_n, prm.k_f, prm.k_ad)
    ydot[8:11] = w_hat_dot
    ydot[11] = g_a_dot
    delta_dot_est = (delta_n - delta_dsc) / prm.tau_dsc
    w_dot_est = (w - w_dsc) / prm.tau_dsc
    ydot[15] = delta_dot_est
    ydot[16:19] = w_dot_est

    # adaptive law
    d_delta, d_grad = beta2_partials(w, prm.k_omega, prm.m_omega, prm.eps_omega, prm.beta2_sign)
    grad_u_dot = gradient_u_rate(b_b, r_b, f_b, prm.p0, prm.p1, w, prm.k_a, prm.k_r)
    if prm.ppc:
        c_dot = cross(-cross(w, r_b), b_b)
        grad_c_dot = pointing_gradient_rate(grad_u_dot, c, c_dot, x_e, xe_dot, rho, rho_d, prm.k_b)
    else:
        grad_c_dot = grad_u_dot
    b2_bar_dot = d_delta * delta_dot_est + d_grad * grad_c_dot
    ydot[12:15] = theta_hat_rate(w, w_hat, w_hat_dot, w_dot_est, u_n, b2_bar_dot, prm.c_beta)

    diag[3] = om_raw
    diag[4] = om_q
    diag[8:11] = u
    diag[11 + m:14 + m] = theta_eff
    diag[14 + m] = g_a
    err = w_hat - w
    diag[15 + m] = math.sqrt(err[0] * err[0] + err[1] * err[1] + err[2] * err[2])
    diag[16 + m] = v_omega
    diag[17 + m] = blf_value(eps, prm.k_b)
    return OK, ydot, diag, beta, delta_n, u_n


@njit(cache=True)
def rk4_step(t, y, dt, prm):
    """One closed-loop RK4 step.  Returns ``(status, y_next, diag_at_start)``."""
    s1, k1, diag, _, _, _ = evaluate(t, y, prm)
    if s1 != OK:
        return s1, y, diag
    s2, k2, _, _, _, _ = evaluate(t + 0.5 * dt, y + 0.5 * dt * k1, prm)
    if s2 != OK:
        return s2, y, diag
    s3, k3, _, _, _, _ = evaluate(t + 0.5 * dt, y + 0.5 * dt * k2, prm)
    if s3 != OK:
        return s3, y, diag
    s4, k4, _, _, _, _ = evaluate(t + dt, y + dt * k3, prm)
    if s4 != OK:
        return s4, y, diag
    y_next = y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    y_next[0:4] = quat_normalize(y_next[0:4])
    for k in range(STATE_SIZE):
        if not math.isfinite(y_next[k]):
            return NON_FINITE, y, diag
    return OK, y_next, diag


@njit(cache=True)
def initial_state(q0, w0, prm, rho_0, theta_guess):
    """Augmented initial state.

    The filter starts at the measured rate with zero adaptive gain, DSC
    filters start at their inputs, and ``theta_hat`` is offset so that the
    effective estimate ``theta_hat + beta`` equals ``theta_guess``.
    """
    y = np.zeros(STATE_SIZE)
    y[0:4] = quat_normalize(q0)
    y[4:7] = w0
    y[7] = rho_0
    y[8:11] = w0
    y[16:19] = w0
    status, _, _, beta, delta_n, _ = evaluate(0.0, y, prm)
    y[15] = delta_n
    y[12:15] = theta_guess - beta
    return status, y


@njit(cache=True)
def run_kernel(y0, t0, dt, n_steps, decim, prm):
    """Integrate ``n_steps`` RK4 steps.

    Returns ``(status, fail_step, y_final, telemetry, monitors, quats)``:
    telemetry rows (t + diag) every ``decim`` steps plus the final state, the
    attitude quaternion on the same rows, and monitor rows at every step.  On
    failure the arrays are truncated after the failing step.
    """
    m = prm.f_i.shape[0]
    n_out = n_steps // decim + 1
    telem = np.zeros((n_out + 1, 19 + m))
    mon = np.zeros((n_steps + 1, MON_COLS))
    quats = np.zeros((n_out + 1, 4))
    y = y0.copy()
    row = 0
    status = OK
    fail_step = -1
    step = 0
    for step in range(n_steps + 1):
        t = t0 + step * dt
        if step == n_steps:
            status, _, diag, _, _, _ = evaluate(t, y, prm)
            y_next = y
        else:
            status, y_next, diag = rk4_step(t, y, dt, prm)
        mon[step, MON_T] = t
        mon[step, MON_XE] = diag[0]
        mon[step, MON_EPS] = diag[1]
        mon[step, MON_OMQ] = diag[4]
        mon[step, MON_RATE] = max(abs(diag[5]), abs(diag[6]), abs(diag[7]))
        mon[step, MON_RHO] = diag[2]
        margin = 1e300
        for n in range(m):
            margin = min(margin, prm.p1[n] - diag[11 + n])
        mon[step, MON_MARGIN] = margin
        if step % decim == 0 or step == n_steps or status != OK:
            telem[row, 0] = t
            telem[row, 1:] = diag
            quats[row] = y[0:4]
            row += 1
        if status != OK:
            fail_step = step
            break
        y = y_next
    return status, fail_step, y, telem[:row], mon[:step + 1], quats[:row]

"""Adaptive control law: static nominal term, I&I regulation functions,
identification filter, parameter adaptation and DSC derivative estimates.

The effective inertia estimate used in the torque is ``theta_hat + beta`` with
``beta = C_beta (beta1 + beta2)``.
"""

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .apf import repulsion_value
from .attitude import cross, l_operator, skew


@dataclass(frozen=True)
class ControllerGains:
    k_damp: float = 0.05  # K_omega
    c_beta: float = 0.05
    k_f: float = 30.0
    k_a: float = 1.0  # adaptation rate of the filter gain g_a
    tau_dsc: float = 0.01
    eps_omega: float = 5e-3
    beta2_sign: float = 1.0  # +1: default delta_n term; -1 makes the full diagonal PDE exact
    theta_guess: tuple = (1.5, 1.5, 1.5)
    ppc: bool = True  # False drops every envelope term (APF-only benchmark)

    def __post_init__(self):
        if min(self.k_damp, self.c_beta, self.k_f, self.k_a, self.tau_dsc, self.eps_omega) <= 0.0:
            raise ValueError("controller gains must be positive")

    def proof_conditions_hold(self):
        """Gain inequalities the closed-loop analysis relies on."""
        return self.k_damp > 1.0 / self.c_beta and self.k_f > 1.0 / self.c_beta


@njit(cache=True)
def _norm2(v):
    return v[0] * v[0] + v[1] * v[1] + v[2] * v[2]


@njit(cache=True)
def pointing_gradient(grad_u, c, r_rho, rho):
    """``grad_C = grad_U + R_rho (r_b x B_b) / rho``; ``c`` is ``r_b x B_b``."""
    return grad_u + (r_rho / rho) * c


@njit(cache=True)
def envelope_delta(r_rho, rho_dot, eps, rho):
    """``delta_n = R_rho * rho_dot * eps_q / rho``."""
    return r_rho * rho_dot * eps / rho


@njit(cache=True)
def nominal_control(w, grad_c, r_omega, delta_n, k_damp, eps_omega):
    """Static control term ``u_n``.

    ``r_omega`` is the diagonal of the rate-barrier gain.  The envelope
    compensation ``delta_n w / |w|^2`` uses the regularized denominator
    ``|w|^2 + eps_omega^2`` so it stays bounded near rest.
    """
    u = -grad_c / r_omega - k_damp * r_omega * w
    u += (delta_n / (_norm2(w) + eps_omega * eps_omega)) * w / r_omega
    return u


@njit(cache=True)
def beta2(w, grad_c, delta_n, k_omega, m_omega, k_damp, eps_omega, sign=-1.0):
    """Closed-form regulation term solving the diagonal part of the I&I PDE.

    ``sign`` multiplies the ``delta_n`` term; -1 makes ``d beta2_i / d w_i``
    equal ``-u_n,i`` term by term.
    """
    m2 = m_omega * m_omega
    s = _norm2(w) + eps_omega * eps_omega
    out = np.empty(3)
    for i in range(3):
        wi = w[i]
        r_i = k_omega / (m2 - wi * wi)
        out[i] = (m2 * wi - wi**3 / 3.0) * grad_c[i] / k_omega - 0.5 * k_damp * k_omega * math.log(1.0 / r_i)
        out[i] += sign * delta_n / (2.0 * k_omega) * (math.log(s) * (m2 + s - wi * wi) - wi * wi)
    return out


@njit(cache=True)
def beta2_partials(w, k_omega, m_omega, eps_omega, sign=-1.0):
    """``(d beta2 / d delta_n, d beta2_i / d grad_C_i)`` at fixed rate."""
    m2 = m_omega * m_omega
    s = _norm2(w) + eps_omega * eps_omega
    d_delta = np.empty(3)
    d_grad = np.empty(3)
    for i in range(3):
        wi = w[i]
        d_grad[i] = (m2 * wi - wi**3 / 3.0) / k_omega
        d_delta[i] = sign * (math.log(s) * (m2 + s - wi * wi) - wi * wi) / (2.0 * k_omega)
    return d_delta, d_grad


@njit(cache=True)
def beta1(w_hat, w):
    """``beta1 = Psi1_hat^T w`` with ``Psi1_hat = -skew(w_hat) L(w)``."""
    return (-skew(w_hat) @ l_operator(w)).T @ w


@njit(cache=True)
def regression_set(w, w_hat, u_n):
    """Return ``(Psi1, Psi2, Psi1_hat)``; ``Psi = Psi1 + Psi2``."""
    lw = l_operator(w)
    return -skew(w) @ lw, l_operator(-u_n), -skew(w_hat) @ lw


@njit(cache=True)
def control_torque(theta_eff, psi):
    """``u = -Psi (theta_hat + beta)``."""
    return -psi @ theta_eff


@njit(cache=True)
def filter_derivative(w_hat, w, g_a, u_n, k_f, k_a):
    """Identification filter and its adaptive gain: ``(d w_hat/dt, d g_a/dt)``."""
    err = w_hat - w
    return -(k_f + g_a) * err + u_n, k_a * _norm2(err)


@njit(cache=True)
def filter_step(w_hat, w, g_a, u_n, k_f, k_a, dt):
    """One RK4 step of the filter with ``w`` and ``u_n`` held over the step."""
    k1w, k1g = filter_derivative(w_hat, w, g_a, u_n, k_f, k_a)
    k2w, k2g = filter_derivative(w_hat + 0.5 * dt * k1w, w, g_a + 0.5 * dt * k1g, u_n, k_f, k_a)
    k3w, k3g = filter_derivative(w_hat + 0.5 * dt * k2w, w, g_a + 0.5 * dt * k2g, u_n, k_f, k_a)
    k4w, k4g = filter_derivative(w_hat + dt * k3w, w, g_a + dt * k3g, u_n, k_f, k_a)
    return (w_hat + dt / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w),
            g_a + dt / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g))


@njit(cache=True)
def dsc_rate(signal, state, tau):
    """First-order low-pass derivative estimate ``(signal - state) / tau``."""
    return (signal - state) / tau


def dsc_derivative(signal, state, tau, dt):
    """One explicit step of the DSC filter: ``(derivative estimate, new state)``."""
    rate = dsc_rate(signal, state, tau)
    return rate, state + dt * rate


@njit(cache=True)
def theta_hat_rate(w, w_hat, w_hat_dot, w_dot_est, u_n, beta2_bar_dot, c_beta):
    """Adaptive law ``-C_beta [dPsi1_hat^T w + (Psi1_hat + Psi2)^T u_n] - C_beta beta2_bar_dot``.

    ``w_dot_est`` stands in for the unmeasured body acceleration inside
    ``dPsi1_hat/dt = -skew(w_hat_dot) L(w) - skew(w_hat) L(w_dot)``.
    """
    dpsi_t_w = w * cross(w_hat_dot, w) + w_dot_est * cross(w_hat, w)
    psi_t_un = w * cross(w_hat, u_n) - u_n * u_n
    return -c_beta * (dpsi_t_w + psi_t_un) - c_beta * beta2_bar_dot


def theta_hat_step(theta_hat, w, w_hat, w_hat_dot, w_dot_est, u_n, beta2_bar_dot, c_beta, dt):
    return theta_hat + dt * theta_hat_rate(w, w_hat, w_hat_dot, w_dot_est, u_n, beta2_bar_dot, c_beta)


@njit(cache=True)
def gradient_u_rate(b_b, r_b, f_b, p0, p1, w, k_a, k_r):
    """Time derivative of ``grad_U`` for static inertial targets and zones.

    Body-frame vectors rotate as ``d/dt v_b = -w x v_b``.
    """
    c = cross(r_b, b_b)
    c_dot = cross(-cross(w, r_b), b_b)
    x_e = 1.0 - (b_b[0] * r_b[0] + b_b[1] * r_b[1] + b_b[2] * r_b[2])
    u_a = k_a * x_e
    u_a_dot = k_a * (c[0] * w[0] + c[1] * w[1] + c[2] * w[2])
    u_r = 0.0
    u_r_dot = 0.0
    rep = np.zeros(3)
    rep_dot = np.zeros(3)
    for n in range(f_b.shape[0]):
        fn = f_b[n]
        g = b_b[0] * fn[0] + b_b[1] * fn[1] + b_b[2] * fn[2]
        u_r += repulsion_value(g, p0[n], p1[n], k_r)
        if g < p0[n]:
            continue
        a = math.pi / (2.0 * (p1[n] - p0[n]))
        arg = a * (g - p0[n])
        sec = 1.0 / math.cos(arg)
        tan = math.tan(arg)
        fxb = cross(fn, b_b)
        grad_n = -a * sec * tan * fxb
        g_dot = -(fxb[0] * w[0] + fxb[1] * w[1] + fxb[2] * w[2])
        fxb_dot = cross(-cross(w, fn), b_b)
        rep += grad_n
        rep_dot += -a * (a * g_dot * sec * (tan * tan + sec * sec) * fxb + sec * tan * fxb_dot)
        u_r_dot += k_r * (grad_n[0] * w[0] + grad_n[1] * w[1] + grad_n[2] * w[2])
    return k_a * (u_r_dot * c + u_r * c_dot) + k_r * (u_a_dot * rep + u_a * rep_dot)


@njit(cache=True)
def pointing_gradient_rate(grad_u_dot, c, c_dot, x_e, x_e_dot, rho, rho_dot, k_b):
    """Time derivative of ``grad_C`` given ``d grad_U/dt`` and the envelope rate."""
    eps = x_e / rho
    r_rho = k_b / (1.0 - eps)
    eps_dot = (x_e_dot - rho_dot * eps) / rho
    r_rho_dot = k_b * eps_dot / (1.0 - eps) ** 2
    return grad_u_dot + (r_rho_dot / rho - r_rho * rho_dot / (rho * rho)) * c + (r_rho / rho) * c_dot

"""Switched performance envelope: mollified switches, smooth max, rho_q dynamics
and the transformed error used by the barrier Lyapunov term."""

import math
from dataclasses import dataclass, replace

import numpy as np
from numba import njit

from .errors import EnvelopeViolated

#: Below this pointing error the freeze term of rho_dot is dropped.
FREEZE_XE_FLOOR = 1e-12

#: Default normalized switch shape ``p (s1 - s0)``.  tanh rounds to exactly 1
#: once its argument passes ~19, so steep switches saturate (and freeze the
#: envelope) a little before ``s1``; shallow ones only at ``s1`` itself.
DEFAULT_STEEPNESS = 50.0


@dataclass(frozen=True)
class SwitchSpec:
    """Segment points ``s0 < s1`` and steepness ``p`` (units of 1/argument)."""

    s0: float
    s1: float
    p: float

    def __post_init__(self):
        if not self.s0 < self.s1:
            raise ValueError("switch needs s0 < s1")
        if self.p * (self.s1 - self.s0) <= 1.0:
            raise ValueError("switch steepness must exceed 1/(s1 - s0)")

    @classmethod
    def normalized(cls, s0, s1, steepness=2.0):
        """Build a switch whose shape is ``steepness = p (s1 - s0)`` regardless of scale."""
        return cls(s0, s1, steepness / (s1 - s0))

    @property
    def sm(self):
        return 0.5 * (self.s0 + self.s1)

    def __call__(self, x):
        return switching_function(float(x), self.p, self.s0, self.s1)


@dataclass(frozen=True)
class GovernorParams:
    """Envelope, barrier and switching settings.

    ``omega_switch`` acts on ``w_i**2``; zone switches live on the zones
    themselves (see :class:`apfppc.apf.ForbiddenZone`).  Every switch built from
    defaults uses the normalized shape ``steepness = p (s1 - s0)``.
    """

    k_rho: float = 0.05
    rho_inf: float = 1e-4
    rho_0: float = 4.0
    k_b: float = 0.4
    k_s: float = 100.0
    steepness: float = DEFAULT_STEEPNESS
    omega_switch: SwitchSpec = None
    ppc_switch: SwitchSpec = None
    rho_switch: SwitchSpec = None

    def __post_init__(self):
        if self.ppc_switch is None:
            object.__setattr__(self, "ppc_switch", SwitchSpec.normalized(0.9, 0.95, self.steepness))
        if self.rho_switch is None:
            spec = SwitchSpec.normalized(self.rho_inf + 1e-3, self.rho_inf + 2e-3, self.steepness)
            object.__setattr__(self, "rho_switch", spec)
        if self.rho_inf <= 0.0 or self.k_rho <= 0.0 or self.k_b <= 0.0 or self.k_s <= 0.0:
            raise ValueError("k_rho, rho_inf, k_b and k_s must be positive")
        if self.ppc_switch.s1 >= 1.0:
            raise ValueError("PPC switch must saturate before eps_q = 1")
        if not self.rho_inf < self.rho_switch.s0:
            raise ValueError("rho switch must sit above rho_inf")
        if self.rho_0 <= self.rho_inf:
            raise ValueError("initial envelope must exceed rho_inf")

    def with_rate_limit(self, m_omega):
        """Fill the rate switch from the rate limit (0.8 M^2 .. 0.9 M^2) when unset."""
        if self.omega_switch is not None:
            return self
        spec = SwitchSpec.normalized(0.8 * m_omega**2, 0.9 * m_omega**2, self.steepness)
        return replace(self, omega_switch=spec)


@njit(cache=True)
def switching_function(x, p, s0, s1):
    """Mollified switch from 0 (``x <= s0``) to 1 (``x >= s1``), 0.5 at the midpoint."""
    if x <= s0:
        return 0.0
    if x >= s1:
        return 1.0
    sm = 0.5 * (s0 + s1)
    # separate roots: the product underflows to 0 when x is a denormal away from s0 or s1
    arg = p * (s1 - s0) * (x - sm) / (math.sqrt(x - s0) * math.sqrt(s1 - x))
    return 0.5 * (math.tanh(arg) + 1.0)


@njit(cache=True)
def real_softmax(values, k_s):
    """``(1/k_s) log sum exp(k_s v)``, evaluated with a max shift."""
    vmax = values[0]
    for v in values:
        if v > vmax:
            vmax = v
    acc = 0.0
    for v in values:
        acc += math.exp(k_s * (v - vmax))
    return vmax + math.log(acc) / k_s


@njit(cache=True)
def smooth_max(values, k_s):
    """Real-softmax clamped to 1."""
    return min(1.0, real_softmax(values, k_s))


@njit(cache=True)
def omega_q(safety, omega_rho, k_s):
    """Overall indicator ``Omega_rho * RSM(safety indicators)``.

    Returns ``(raw, clamped)``; ``clamped`` is the value that drives the envelope.
    """
    rsm = real_softmax(safety, k_s)
    return omega_rho * rsm, omega_rho * min(1.0, rsm)


@njit(cache=True)
def rho_dot(rho, x_e, xe_dot, om_q, k_rho, rho_inf):
    """Envelope rate: exponential decay blended with the x_e-tracking freeze branch."""
    decay = -k_rho * (rho - rho_inf) * (1.0 - om_q)
    if om_q > 0.0 and x_e >= FREEZE_XE_FLOOR:
        return decay + xe_dot / x_e * rho * om_q
    return decay


@njit(cache=True)
def transformed_error(x_e, rho, k_b):
    """``eps_q = x_e / rho`` and the barrier gain ``R_rho = k_b / (1 - eps_q)``."""
    eps = x_e / rho
    if eps >= 1.0:
        raise EnvelopeViolated("pointing error outside performance envelope")
    return eps, k_b / (1.0 - eps)


@njit(cache=True)
def blf_value(eps, k_b):
    return -k_b * math.log(1.0 - eps)


def indicators(gammas, omega, eps, rho, zone_specs, params):
    """Evaluate every switching indicator.

    ``zone_specs`` is a sequence of :class:`SwitchSpec`, one per zone.  Returns a
    dict with arrays ``zones`` and ``rates`` plus scalars ``ppc`` and ``rho``.
    """
    om = params.omega_switch
    return {
        "zones": np.array([s(g) for s, g in zip(zone_specs, gammas)]),
        "rates": np.array([om(w * w) for w in omega]),
        "ppc": params.ppc_switch(eps),
        "rho": params.rho_switch(rho),
    }

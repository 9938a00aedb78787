import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from apfppc.apf import ForbiddenZone
from apfppc.attitude import propagate_attitude, quat_to_dcm
from apfppc.errors import EnvelopeViolated
from apfppc.sppf import (
    DEFAULT_STEEPNESS,
    FREEZE_XE_FLOOR,
    GovernorParams,
    SwitchSpec,
    blf_value,
    indicators,
    omega_q,
    real_softmax,
    rho_dot,
    smooth_max,
    switching_function,
    transformed_error,
)


def test_switch_branches_and_midpoint():
    for p in (2.0, 3.0, 4.0, 5.0, 6.0):
        assert switching_function(-0.1, p, 0.0, 0.2) == 0.0
        assert switching_function(0.0, p, 0.0, 0.2) == 0.0
        assert switching_function(0.2, p, 0.0, 0.2) == 1.0
        assert switching_function(0.5, p, 0.0, 0.2) == 1.0
        assert switching_function(0.1, p, 0.0, 0.2) == 0.5


@pytest.mark.parametrize("p", [2.0, 3.0, 4.0, 5.0, 6.0])
def test_switch_monotone_dense_sweep(p):
    x = np.linspace(0.0, 0.2, 10_000)
    v = np.array([switching_function(s, p, 0.0, 0.2) for s in x])
    assert np.all((v >= 0) & (v <= 1))
    assert np.all(np.diff(v) >= 0)


@pytest.mark.parametrize("p", [2.0, 6.0, DEFAULT_STEEPNESS / 0.2])
def test_switch_continuous_at_segment_points(p):
    assert switching_function(1e-12, p, 0.0, 0.2) < 1e-9
    assert 1.0 - switching_function(0.2 - 1e-12, p, 0.0, 0.2) < 1e-9


def test_switch_denormal_offsets():
    assert switching_function(5e-324, 2.0 / 0.3, 0.0, 0.3) == 0.0
    assert switching_function(0.3 - 5.6e-17, 2.0 / 0.3, 0.0, 0.3) == 1.0


def test_switch_spec():
    spec = SwitchSpec.normalized(0.9, 0.95, 50.0)
    assert spec.p * (spec.s1 - spec.s0) == pytest.approx(50.0)
    assert spec.sm == pytest.approx(0.925)
    assert spec(0.95) == 1.0
    assert spec(0.925) == 0.5
    with pytest.raises(ValueError):
        SwitchSpec(0.2, 0.1, 10.0)
    with pytest.raises(ValueError):
        SwitchSpec(0.0, 0.2, 4.0)  # p must exceed 1/(s1 - s0)


@given(st.floats(-1, 2), st.floats(-1, 2), st.floats(0.0, 1.0), st.floats(1.01, 100))
def test_switch_range_and_order(x, y, s0, shape):
    s1 = s0 + 0.3
    p = shape / 0.3
    a, b = switching_function(x, p, s0, s1), switching_function(y, p, s0, s1)
    assert 0.0 <= a <= 1.0
    if x <= y:
        assert a <= b


def test_rsm_examples():
    assert real_softmax(np.full(5, 0.3), 100.0) == pytest.approx(0.3 + math.log(5) / 100, abs=1e-14)
    v = np.zeros(8)
    v[-1] = 1.0
    raw = real_softmax(v, 100.0)
    assert 1.0 <= raw <= 1.0 + math.log(8) / 100
    assert smooth_max(v, 100.0) == 1.0


def test_rsm_matches_arbitrary_precision():
    vals = [0.9, 0.95, 1.0]
    mpmath.mp.dps = 50
    ref = mpmath.log(sum(mpmath.exp(100 * mpmath.mpf(v)) for v in vals)) / 100
    assert abs(real_softmax(np.array(vals), 100.0) - float(ref)) < 1e-12


def test_rsm_bound_random_sets(rng):
    for _ in range(10_000):
        k = rng.integers(1, 12)
        v = rng.uniform(0.0, 1.0, size=k)
        r = real_softmax(v, 100.0)
        assert v.max() <= r <= v.max() + math.log(k) / 100 + 1e-15
        if k > 1:
            assert r > v.max() or np.isclose(r, v.max())


def test_rsm_stable_for_large_gain():
    assert math.isfinite(real_softmax(np.array([1.0, 0.99]), 1e6))


def test_omega_q_examples():
    raw, clamped = omega_q(np.array([0.0, 0.0, 1.0, 0.0]), 1.0, 100.0)
    assert clamped == 1.0 and raw >= 1.0
    assert omega_q(np.array([0.0, 1.0]), 0.0, 100.0) == (0.0, 0.0)
    m = 3
    raw, clamped = omega_q(np.zeros(m + 4), 1.0, 100.0)
    assert raw == pytest.approx(math.log(m + 4) / 100)
    assert clamped == pytest.approx(0.0195, abs=1e-4)


def test_rho_dot_examples():
    assert rho_dot(1e-4, 0.5, 0.1, 0.0, 0.05, 1e-4) == 0.0
    assert rho_dot(4.0, 1.8617, 0.0, 0.0, 0.05, 1e-4) == pytest.approx(-0.199995, abs=1e-15)
    # full freeze: envelope moves proportionally with x_e
    assert rho_dot(2.0, 0.5, -0.01, 1.0, 0.05, 1e-4) == pytest.approx(-0.01 / 0.5 * 2.0)


def test_rho_dot_degenerate_freeze_drops_quotient():
    x = FREEZE_XE_FLOOR / 10
    assert rho_dot(2.0, x, 0.3, 0.5, 0.05, 1e-4) == pytest.approx(-0.05 * (2.0 - 1e-4) * 0.5)


def test_freeze_holds_eps_over_1000_steps():
    # attitude slews at constant rate; envelope integrated with Omega_Q forced to 1
    q = np.array([0.0, 0.0, 0.0, 1.0])
    w = np.array([0.0, 0.02, 0.03])
    b_b = np.array([1.0, 0.0, 0.0])
    r_i = np.array([-0.8617, 0.4975, -0.0995])
    r_i /= np.linalg.norm(r_i)
    dt = 1e-3

    def xe_and_rate(qq):
        r_b = quat_to_dcm(qq) @ r_i
        return 1.0 - b_b @ r_b, np.cross(r_b, b_b) @ w

    rho = 4.0
    xe, _ = xe_and_rate(q)
    eps0 = xe / rho
    worst = 0.0
    for _ in range(1000):
        ks = []
        for frac, prev in ((0.0, None), (0.5, 0), (0.5, 1), (1.0, 2)):
            qs = propagate_attitude(q, w, frac * dt) if frac else q
            rs = rho if prev is None else rho + frac * dt * ks[prev]
            x, xd = xe_and_rate(qs)
            ks.append(rho_dot(rs, x, xd, 1.0, 0.05, 1e-4))
        rho += dt / 6 * (ks[0] + 2 * ks[1] + 2 * ks[2] + ks[3])
        q = propagate_attitude(q, w, dt)
        xe, _ = xe_and_rate(q)
        worst = max(worst, abs(xe / rho - eps0) / eps0)
    assert worst < 1e-10


def test_transformed_error_examples():
    assert transformed_error(0.0, 1.0, 0.4) == (0.0, 0.4)
    eps, r = transformed_error(1.8617, 4.0, 0.4)
    assert eps == pytest.approx(0.46543, abs=1e-5)
    assert r == pytest.approx(0.4 / (1.0 - 1.8617 / 4.0), rel=1e-14)
    assert r == pytest.approx(0.74826, abs=1e-5)
    assert transformed_error(0.5, 1.0, 0.4)[1] == pytest.approx(0.8)
    with pytest.raises(EnvelopeViolated):
        transformed_error(1.0, 1.0, 0.4)


def test_blf_value():
    assert blf_value(0.0, 0.4) == 0.0
    assert blf_value(0.5, 0.4) == pytest.approx(0.4 * math.log(2))


def test_governor_defaults_and_validation():
    g = GovernorParams().with_rate_limit(0.0524)
    assert g.omega_switch.s0 == pytest.approx(0.8 * 0.0524**2)
    assert g.omega_switch.s1 == pytest.approx(0.9 * 0.0524**2)
    assert (g.ppc_switch.s0, g.ppc_switch.s1) == (0.9, 0.95)
    assert g.rho_switch.s0 == pytest.approx(1e-4 + 1e-3)
    assert g.rho_switch.s1 == pytest.approx(1e-4 + 2e-3)
    with pytest.raises(ValueError):
        GovernorParams(rho_inf=0.0)
    with pytest.raises(ValueError):
        GovernorParams(ppc_switch=SwitchSpec.normalized(0.9, 1.0))


def test_indicators():
    params = GovernorParams().with_rate_limit(0.0524)
    zone = ForbiddenZone(axis=(0, 1, 0), theta_f=math.radians(20))
    spec = SwitchSpec.normalized(zone.s_f0, zone.s_f1, params.steepness)
    rest = indicators([0.0], np.zeros(3), 0.1, 1.0, [spec], params)
    assert rest["zones"][0] == 0.0 and np.all(rest["rates"] == 0.0) and rest["ppc"] == 0.0
    assert rest["rho"] == 1.0
    w = np.array([math.sqrt(0.9) * 0.0524, 0.0, 0.0])
    hot = indicators([zone.s_f1], w, 0.95, 1e-4, [spec], params)
    assert hot["zones"][0] == 1.0 and hot["rates"][0] == 1.0 and hot["ppc"] == 1.0
    assert hot["rho"] == 0.0

"""Run loop, run summaries and Monte Carlo campaigns."""

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import closedloop as cl
from .attitude import angle_deg
from .scenario import MC_LATITUDE, sample_target

log = logging.getLogger(__name__)

TERMINAL_WINDOW = 30.0  # s, averaged at the end of each run
FREEZE_LEVEL = 1.0  # Omega_Q value that counts as frozen (post clamp)


def telemetry_columns(m):
    cols = ["t", "x_e", "theta_deg", "eps_q", "rho_q", "omega_q_raw", "omega_q",
            "w1", "w2", "w3", "u1", "u2", "u3"]
    cols += [f"gamma_{n + 1}" for n in range(m)]
    cols += ["theta_eff_1", "theta_eff_2", "theta_eff_3", "g_a", "filt_err", "V_omega", "V_B"]
    return cols


@dataclass
class Telemetry:
    """Decimated telemetry table with named columns."""

    columns: list
    data: np.ndarray
    quaternions: np.ndarray = None  # attitude on the same rows (not part of the CSV)

    def __len__(self):
        return self.data.shape[0]

    def __getitem__(self, name):
        return self.data[:, self.columns.index(name)]

    @property
    def n_zones(self):
        return sum(c.startswith("gamma_") for c in self.columns)

    @classmethod
    def from_kernel(cls, telem, m, quats=None):
        # kernel rows: t + diag (x_e, eps, rho, raw, clamped, w, u, gamma, theta_eff, ...)
        theta = angle_deg(telem[:, 1]).reshape(-1, 1)
        data = np.hstack([telem[:, :2], theta, telem[:, 2:]])
        return cls(telemetry_columns(m), data, quats)


@dataclass
class RunSummary:
    name: str
    status: str
    passed: bool
    terminal_accuracy_xe: float
    terminal_accuracy_deg: float
    max_abs_rate: float
    max_eps_q: float
    min_zone_margin: float
    freeze_intervals: list = field(default_factory=list)
    freeze_eps_drift: list = field(default_factory=list)  # max relative eps change per interval
    first_violation: dict = None
    runtime_s: float = 0.0
    target: tuple = None

    @property
    def max_abs_rate_dps(self):
        return math.degrees(self.max_abs_rate)

    def to_dict(self):
        return {
            "pass": self.passed,
            "terminal_accuracy_xe": self.terminal_accuracy_xe,
            "terminal_accuracy_deg": self.terminal_accuracy_deg,
            "max_abs_rate_dps": self.max_abs_rate_dps,
            "max_eps_q": self.max_eps_q,
            "min_zone_margin": self.min_zone_margin,
            "freeze_intervals": [list(iv) for iv in self.freeze_intervals],
            "first_violation": self.first_violation,
        }


@dataclass
class RunResult:
    config: object
    telemetry: Telemetry
    summary: RunSummary
    monitors: np.ndarray
    final_state: np.ndarray


def freeze_intervals(t, omega_q, eps):
    """Maximal spans with ``omega_q == 1``; returns ``(intervals, eps drift per interval)``."""
    frozen = np.asarray(omega_q) >= FREEZE_LEVEL
    edges = np.flatnonzero(np.diff(np.concatenate(([0], frozen.astype(np.int8), [0]))))
    intervals, drift = [], []
    for a, b in zip(edges[::2], edges[1::2]):
        intervals.append((float(t[a]), float(t[b - 1])))
        seg = eps[a:b]
        drift.append(float((seg.max() - seg.min()) / max(abs(seg[0]), 1e-300)))
    return intervals, drift


def summarize(name, status, fail_step, mon, t_final, runtime=0.0):
    """Build a :class:`RunSummary` from per-step monitor rows."""
    t = mon[:, cl.MON_T]
    xe = mon[:, cl.MON_XE]
    window = t >= t_final - TERMINAL_WINDOW - 1e-9
    ok = status == cl.OK
    term = float(xe[window].mean()) if ok and window.any() else math.nan
    intervals, drift = freeze_intervals(t, mon[:, cl.MON_OMQ], mon[:, cl.MON_EPS])
    violation = None
    if not ok:
        violation = {"kind": cl.STATUS_NAMES[status], "t": float(t[fail_step]), "step": int(fail_step)}
    margins = mon[:, cl.MON_MARGIN]
    return RunSummary(
        name=name,
        status=cl.STATUS_NAMES[status],
        passed=ok,
        terminal_accuracy_xe=term,
        terminal_accuracy_deg=float(angle_deg(term)) if ok else math.nan,
        max_abs_rate=float(mon[:, cl.MON_RATE].max()),
        max_eps_q=float(mon[:, cl.MON_EPS].max()),
        min_zone_margin=float(margins.min()) if margins.size else math.inf,
        freeze_intervals=intervals,
        freeze_eps_drift=drift,
        first_violation=violation,
        runtime_s=runtime,
    )


def run(config, validate=True):
    """Simulate one scenario and return a :class:`RunResult`.

    Monitors are checked at every RK4 stage; telemetry is decimated to the
    configured output rate.  Constraint breaches end the run early and are
    reported in the summary rather than raised.
    """
    if validate:
        config.validate()
    prm = config.loop_params()
    m = len(config.zones)
    t0 = time.perf_counter()
    status, y0 = cl.initial_state(np.asarray(config.q0, dtype=float), np.asarray(config.w0, dtype=float),
                                  prm, config.governor.rho_0, np.asarray(config.controller.theta_guess, dtype=float))
    if status != cl.OK:
        mon = np.zeros((1, cl.MON_COLS))
        summary = summarize(config.name, status, 0, mon, config.t_final)
        return RunResult(config, Telemetry(telemetry_columns(m), np.zeros((0, 19 + m + 1))), summary, mon, y0)
    status, fail_step, y, telem, mon, quats = cl.run_kernel(y0, 0.0, config.dt, config.n_steps, config.decimation, prm)
    runtime = time.perf_counter() - t0
    summary = summarize(config.name, status, fail_step, mon, config.t_final, runtime)
    summary.target = tuple(config.target)
    log.info("%s: %s, terminal x_e %.3e in %.1f s", config.name, summary.status,
             summary.terminal_accuracy_xe, runtime)
    return RunResult(config, Telemetry.from_kernel(telem, m, quats), summary, mon, y)


def campaign_config(config, seed, index, latitude=MC_LATITUDE):
    """Config of Monte Carlo run ``index``: own RNG stream from ``seed + index``."""
    rng = np.random.default_rng(seed + index)
    target = sample_target(rng, latitude)
    return replace(config, name=f"{config.name}-{index:03d}", target=tuple(target), seed=seed + index)


def _campaign_worker(args):
    config, seed, index, latitude = args
    return run(campaign_config(config, seed, index, latitude)).summary


@dataclass
class CampaignReport:
    seed: int
    summaries: list

    @property
    def all_passed(self):
        return all(s.passed for s in self.summaries)

    @property
    def worst_accuracy_deg(self):
        return max(s.terminal_accuracy_deg for s in self.summaries)

    @property
    def max_eps_q(self):
        return max(s.max_eps_q for s in self.summaries)

    def to_dict(self):
        return {
            "seed": self.seed,
            "runs": len(self.summaries),
            "all_pass": self.all_passed,
            "worst_terminal_accuracy_deg": self.worst_accuracy_deg,
            "max_eps_q": self.max_eps_q,
            "results": [{"name": s.name, "target": list(s.target), **s.to_dict()} for s in self.summaries],
        }


def monte_carlo(config, n_runs, seed, jobs=1, latitude=MC_LATITUDE):
    """Run ``n_runs`` independent targets; the report is deterministic in ``seed``."""
    if n_runs < 1:
        raise ValueError("n_runs must be at least 1")
    tasks = [(config, seed, i, latitude) for i in range(n_runs)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            summaries = list(pool.map(_campaign_worker, tasks))
    else:
        summaries = [_campaign_worker(task) for task in tasks]
    return CampaignReport(seed, summaries)

"""Command line entry point: ``apfppc simulate | montecarlo | check``.

Exit codes: 0 pass, 1 constraint violation, 2 configuration error,
3 numerical divergence.
"""

import argparse
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import export
from .apf import ApfGains
from .errors import ConfigInvalid, UnknownPreset
from .scenario import PRESETS, THETA_F, load_config, preset
from .sim import monte_carlo, run

EXIT_PASS = 0
EXIT_VIOLATION = 1
EXIT_CONFIG = 2
EXIT_DIVERGED = 3

log = logging.getLogger("apfppc")


def _status_exit(statuses):
    statuses = list(statuses)
    if "NonFiniteState" in statuses:
        return EXIT_DIVERGED
    if any(s != "ok" for s in statuses):
        return EXIT_VIOLATION
    return EXIT_PASS


def _load(args):
    cfg = load_config(args.config) if args.config else preset(args.preset)
    if getattr(args, "dt", None) is not None:
        cfg = replace(cfg, dt=args.dt)
    if getattr(args, "t_final", None) is not None:
        cfg = replace(cfg, t_final=args.t_final)
    if getattr(args, "no_disturbance", False):
        cfg = replace(cfg, plant=replace(cfg.plant, disturbance=False))
    return cfg


def _print_summary(s):
    print(f"{s.name}: {s.status}")
    print(f"  terminal accuracy  x_e={s.terminal_accuracy_xe:.3e}  ({s.terminal_accuracy_deg:.5f} deg)")
    print(f"  max |w_i|          {s.max_abs_rate_dps:.4f} deg/s")
    print(f"  max eps_q          {s.max_eps_q:.4f}")
    print(f"  min zone margin    {s.min_zone_margin:.4f}")
    print(f"  freeze intervals   {[(round(a, 3), round(b, 3)) for a, b in s.freeze_intervals]}")
    if s.first_violation:
        print(f"  first violation    {s.first_violation['kind']} at t={s.first_violation['t']:.3f} s")


def cmd_simulate(args):
    cfg = _load(args)
    cfg.validate()
    result = run(cfg)
    _print_summary(result.summary)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        export.write_csv(result.telemetry, out / "telemetry.csv")
        export.write_json(result.summary, out / "summary.json")
        track = export.boresight_track(result.telemetry.quaternions, cfg.boresight)
        export.write_plot_data(out / "plot.json", result.telemetry["t"], track, cfg.zones, cfg.target)
        print(f"  wrote {out}/telemetry.csv, summary.json, plot.json")
    return _status_exit([result.summary.status])


def cmd_montecarlo(args):
    cfg = _load(args)
    report = monte_carlo(cfg, args.runs, args.seed, jobs=args.jobs)
    for s in report.summaries:
        print(f"{s.name}  {s.status:<18} x_e={s.terminal_accuracy_xe:.3e}  "
              f"theta={s.terminal_accuracy_deg:.5f} deg  max eps={s.max_eps_q:.3f}")
    print(f"all pass: {report.all_passed}   worst accuracy: {report.worst_accuracy_deg:.5f} deg   "
          f"max eps_q: {report.max_eps_q:.3f}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        export.write_json(report, out / "montecarlo.json")
    return _status_exit(s.status for s in report.summaries)


def cmd_check(args):
    """Re-run the hard-constraint monitors on a telemetry CSV."""
    if args.config:
        cfg = load_config(args.config)
        m_omega = cfg.apf.m_omega
        limits = [z.p1 for z in cfg.zones]
    else:
        m_omega = args.m_omega
        limits = None
    tel = export.read_csv(args.telemetry)
    if not np.all(np.isfinite(tel.data)):
        print("non-finite values in telemetry")
        return EXIT_DIVERGED
    gammas = [c for c in tel.columns if c.startswith("gamma_")]
    if limits is None:
        limits = [math.cos(math.radians(args.theta_f_deg))] * len(gammas)
    if len(limits) != len(gammas):
        raise ConfigInvalid(f"telemetry has {len(gammas)} zones, config has {len(limits)}")
    failures = []
    rate = np.abs(tel.data[:, [tel.columns.index(c) for c in ("w1", "w2", "w3")]]).max(axis=1)
    if np.any(rate >= m_omega):
        failures.append(("rate limit", tel["t"][np.argmax(rate >= m_omega)]))
    eps = tel["eps_q"]
    if np.any(eps >= 1.0):
        failures.append(("performance envelope", tel["t"][np.argmax(eps >= 1.0)]))
    for name, p1 in zip(gammas, limits):
        bad = tel[name] >= p1
        if np.any(bad):
            failures.append((f"forbidden zone {name.split('_')[1]}", tel["t"][np.argmax(bad)]))
    print(f"{args.telemetry}: {len(tel)} records")
    for what, t in failures:
        print(f"  VIOLATION {what} at t={t:.3f} s")
    if not failures:
        print("  all monitors pass")
    return EXIT_VIOLATION if failures else EXIT_PASS


def build_parser():
    parser = argparse.ArgumentParser(prog="apfppc", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one scenario")
    src = sim.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=PRESETS)
    src.add_argument("--config", type=Path, help="YAML scenario file")
    sim.add_argument("--dt", type=float, default=None, help="integration step [s] (default 0.001)")
    sim.add_argument("--t-final", type=float, default=None, help="simulated time [s] (default 200)")
    sim.add_argument("--out", type=Path, default=None, help="directory for telemetry.csv, summary.json, plot.json")
    sim.add_argument("--no-disturbance", action="store_true")
    sim.set_defaults(func=cmd_simulate)

    mc = sub.add_parser("montecarlo", help="targets sampled on the 70 deg N circle")
    mc.add_argument("--runs", type=int, default=50)
    mc.add_argument("--seed", type=int, default=0)
    mc.add_argument("--jobs", type=int, default=1)
    mc.add_argument("--preset", choices=PRESETS, default="monte-carlo")
    mc.add_argument("--config", type=Path, default=None)
    mc.add_argument("--t-final", type=float, default=None)
    mc.add_argument("--no-disturbance", action="store_true")
    mc.add_argument("--out", type=Path, default=None)
    mc.set_defaults(func=cmd_montecarlo)

    chk = sub.add_parser("check", help="re-run constraint monitors on a telemetry CSV")
    chk.add_argument("telemetry", type=Path)
    chk.add_argument("--config", type=Path, default=None, help="take limits from this scenario")
    chk.add_argument("--m-omega", type=float, default=ApfGains().m_omega)
    chk.add_argument("--theta-f-deg", type=float, default=math.degrees(THETA_F))
    chk.set_defaults(func=cmd_check)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigInvalid, UnknownPreset, ValueError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FloatingPointError as exc:
        print(f"numerical divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGED


if __name__ == "__main__":
    sys.exit(main())

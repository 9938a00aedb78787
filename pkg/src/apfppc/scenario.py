"""Scenario description, the three campaign presets and YAML config I/O."""

import logging
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np
import yaml

from .apf import ApfGains, ForbiddenZone
from .attitude import boresight_inertial, quat_normalize
from .closedloop import LoopParams
from .controller import ControllerGains
from .errors import ConfigInvalid, UnknownPreset
from .plant import PlantParams
from .sppf import GovernorParams, SwitchSpec

log = logging.getLogger(__name__)

THETA_F = math.radians(20.0)
PAPER_TARGET = (-0.8617, 0.4975, -0.0995)
MC_QUATERNION = (0.0, 0.6428, 0.0, 0.7660)
MC_LATITUDE = math.radians(70.0)

TWO_CONE_AXES = (
    (0.5715, 0.8165, 0.0816),
    (-0.3369, 0.8422, -0.4211),
)
THREE_CONE_AXES = (
    (0.6529, 0.7255, 0.2176),
    (-0.4402, 0.8805, 0.1761),
    (0.0741, 0.7412, -0.6671),
)
FIVE_CONE_AXES = THREE_CONE_AXES + (
    (-0.6529, -0.7255, -0.2176),
    (0.4402, -0.8805, -0.1761),
)

PRESETS = ("two-cone", "three-cone", "monte-carlo")


def _floats(v):
    return tuple(float(x) for x in v)


def _unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


@dataclass(frozen=True)
class ScenarioConfig:
    name: str = "custom"
    plant: PlantParams = field(default_factory=PlantParams)
    apf: ApfGains = field(default_factory=ApfGains)
    governor: GovernorParams = field(default_factory=GovernorParams)
    controller: ControllerGains = field(default_factory=ControllerGains)
    zones: tuple = ()
    target: tuple = PAPER_TARGET
    q0: tuple = (0.0, 0.0, 0.0, 1.0)
    w0: tuple = (0.0, 0.0, 0.0)
    boresight: tuple = (1.0, 0.0, 0.0)
    t_final: float = 200.0
    dt: float = 1e-3
    output_rate: float = 10.0
    seed: int = 0
    runs: int = 50

    def __post_init__(self):
        object.__setattr__(self, "target", _floats(_unit(self.target)))
        object.__setattr__(self, "boresight", _floats(_unit(self.boresight)))
        object.__setattr__(self, "q0", _floats(quat_normalize(np.asarray(self.q0, dtype=float))))
        object.__setattr__(self, "w0", _floats(self.w0))
        object.__setattr__(self, "governor", self.governor.with_rate_limit(self.apf.m_omega))

    @property
    def decimation(self):
        return max(1, int(round(1.0 / (self.output_rate * self.dt))))

    @property
    def n_steps(self):
        return int(round(self.t_final / self.dt))

    def initial_boresight(self):
        return boresight_inertial(self.q0, self.boresight)

    def initial_pointing_error(self):
        return 1.0 - float(self.initial_boresight() @ np.asarray(self.target))

    def validate(self):
        """Raise :class:`ConfigInvalid` unless the scenario is admissible."""
        if self.dt <= 0.0 or self.t_final <= 0.0:
            raise ConfigInvalid("dt and t_final must be positive")
        b0 = self.initial_boresight()
        r = np.asarray(self.target)
        for n, z in enumerate(self.zones, 1):
            f = np.asarray(z.axis)
            if b0 @ f >= z.p1:
                raise ConfigInvalid(f"initial boresight inside forbidden zone {n}")
            if r @ f >= z.p1:
                raise ConfigInvalid(f"target inside forbidden zone {n}")
            if z.s_f0 <= r @ f:
                raise ConfigInvalid(f"zone {n} indicator start S_f0 must exceed r_i . f_i")
            if _near_great_circle(b0, r, f, math.radians(0.5)):
                log.warning("zone %d lies on the great circle from start to target; "
                            "potential-field local minimum possible", n)
        if np.any(np.abs(self.w0) >= self.apf.m_omega):
            raise ConfigInvalid("initial rate violates the rate limit")
        if self.initial_pointing_error() >= self.governor.rho_0:
            raise ConfigInvalid("initial pointing error outside the performance envelope")
        if self.governor.omega_switch.s1 >= self.apf.m_omega**2:
            raise ConfigInvalid("rate switch must saturate below M_omega^2")
        return self

    def loop_params(self):
        g = self.governor
        c = self.controller
        zones = self.zones
        sw = g.omega_switch
        return LoopParams(
            inertia=np.asarray(self.plant.inertia, dtype=float),
            u_max=float(self.plant.u_max),
            omega_p=float(self.plant.omega_p),
            use_disturbance=bool(self.plant.disturbance),
            b_b=np.asarray(self.boresight, dtype=float),
            r_i=np.asarray(self.target, dtype=float),
            f_i=np.array([z.axis for z in zones], dtype=float).reshape(len(zones), 3),
            p0=np.array([z.p0 for z in zones], dtype=float),
            p1=np.array([z.p1 for z in zones], dtype=float),
            sf0=np.array([z.s_f0 for z in zones], dtype=float),
            sf1=np.array([z.s_f1 for z in zones], dtype=float),
            pf=np.array([g.steepness / (z.s_f1 - z.s_f0) for z in zones], dtype=float),
            k_a=float(self.apf.k_a),
            k_r=float(self.apf.k_r),
            k_omega=float(self.apf.k_omega),
            m_omega=float(self.apf.m_omega),
            k_rho=float(g.k_rho),
            rho_inf=float(g.rho_inf),
            k_b=float(g.k_b),
            k_s=float(g.k_s),
            sw=np.array([sw.s0, sw.s1, sw.p]),
            se=np.array([g.ppc_switch.s0, g.ppc_switch.s1, g.ppc_switch.p]),
            sr=np.array([g.rho_switch.s0, g.rho_switch.s1, g.rho_switch.p]),
            k_damp=float(c.k_damp),
            c_beta=float(c.c_beta),
            k_f=float(c.k_f),
            k_ad=float(c.k_a),
            tau_dsc=float(c.tau_dsc),
            eps_omega=float(c.eps_omega),
            beta2_sign=float(c.beta2_sign),
            ppc=bool(c.ppc),
        )

    def with_target(self, r_i):
        return replace(self, target=_floats(_unit(r_i)))

    def without_ppc(self):
        return replace(self, name=self.name + "-noppc", controller=replace(self.controller, ppc=False))


def _near_great_circle(b0, r, f, tol):
    """True when ``f`` sits within ``tol`` of the short arc from ``b0`` to ``r``."""
    normal = np.cross(b0, r)
    nn = np.linalg.norm(normal)
    if nn < 1e-12:
        return True
    if abs(math.asin(np.clip(f @ normal / nn, -1.0, 1.0))) > tol:
        return False
    arc = math.acos(np.clip(b0 @ r, -1.0, 1.0))
    return math.acos(np.clip(b0 @ f, -1, 1)) < arc and math.acos(np.clip(r @ f, -1, 1)) < arc


def _zones(axes):
    return tuple(ForbiddenZone(axis=a, theta_f=THETA_F) for a in axes)


def sample_target(rng, latitude=MC_LATITUDE):
    """Target on a latitude circle with uniformly random longitude."""
    phi = rng.uniform(0.0, 2.0 * math.pi)
    return np.array([math.cos(latitude) * math.cos(phi),
                     math.cos(latitude) * math.sin(phi),
                     math.sin(latitude)])


def preset(name):
    """Scenario presets: ``two-cone``, ``three-cone`` and ``monte-carlo``.

    The ``monte-carlo`` preset carries a placeholder target; campaigns draw
    their own with :func:`sample_target`.
    """
    if name == "two-cone":
        return ScenarioConfig(name=name, zones=_zones(TWO_CONE_AXES))
    if name == "three-cone":
        return ScenarioConfig(name=name, zones=_zones(THREE_CONE_AXES))
    if name == "monte-carlo":
        target = sample_target(np.random.default_rng(0))
        return ScenarioConfig(name=name, zones=_zones(FIVE_CONE_AXES), q0=MC_QUATERNION,
                              target=tuple(target))
    raise UnknownPreset(name)


# ---------------------------------------------------------------------------
# YAML I/O.  Angles carry an explicit ``_deg`` suffix; everything else is SI.

def _switch_dict(s):
    return None if s is None else {"s0": s.s0, "s1": s.s1, "p": s.p}


def config_to_dict(cfg):
    gov = asdict(cfg.governor)
    for key in ("omega_switch", "ppc_switch", "rho_switch"):
        gov[key] = _switch_dict(getattr(cfg.governor, key))
    return {
        "scenario": {
            "name": cfg.name,
            "target": list(cfg.target),
            "q0": list(cfg.q0),
            "w0": list(cfg.w0),
            "boresight": list(cfg.boresight),
            "t_final": cfg.t_final,
            "dt": cfg.dt,
            "output_rate": cfg.output_rate,
            "seed": cfg.seed,
            "runs": cfg.runs,
        },
        "plant": {**asdict(cfg.plant), "inertia": list(cfg.plant.inertia)},
        "apf": asdict(cfg.apf),
        "governor": gov,
        "controller": {**asdict(cfg.controller), "theta_guess": list(cfg.controller.theta_guess)},
        "zones": [
            {
                "axis": list(z.axis),
                "theta_f_deg": math.degrees(z.theta_f),
                "acting_margin_deg": math.degrees(z.acting_margin),
                "indicator_margins_deg": [math.degrees(a) for a in z.indicator_margins],
            }
            for z in cfg.zones
        ],
    }


def config_from_dict(data):
    try:
        sc = dict(data.get("scenario", {}))
        plant = dict(data.get("plant", {}))
        if "inertia" in plant:
            plant["inertia"] = tuple(plant["inertia"])
        gov = dict(data.get("governor", {}))
        for key in ("omega_switch", "ppc_switch", "rho_switch"):
            if gov.get(key) is not None:
                gov[key] = SwitchSpec(**gov[key])
            elif key in gov:
                del gov[key]
        ctrl = dict(data.get("controller", {}))
        if "theta_guess" in ctrl:
            ctrl["theta_guess"] = tuple(ctrl["theta_guess"])
        zones = []
        for z in data.get("zones", []):
            kw = {"axis": tuple(z["axis"]), "theta_f": math.radians(z["theta_f_deg"])}
            if "acting_margin_deg" in z:
                kw["acting_margin"] = math.radians(z["acting_margin_deg"])
            if "indicator_margins_deg" in z:
                kw["indicator_margins"] = tuple(math.radians(a) for a in z["indicator_margins_deg"])
            zones.append(ForbiddenZone(**kw))
        for key in ("target", "q0", "w0", "boresight"):
            if key in sc:
                sc[key] = tuple(sc[key])
        return ScenarioConfig(
            plant=PlantParams(**plant),
            apf=ApfGains(**data.get("apf", {})),
            governor=GovernorParams(**gov),
            controller=ControllerGains(**ctrl),
            zones=tuple(zones),
            **sc,
        )
    except (TypeError, KeyError, ValueError) as exc:
        raise ConfigInvalid(f"bad scenario config: {exc}") from exc


def save_config(cfg, path):
    with open(path, "w") as fh:
        yaml.safe_dump(config_to_dict(cfg), fh, sort_keys=False)


def load_config(path):
    with open(path) as fh:
        data = yaml.safe_load(fh)
    if not isinstance(data, dict):
        raise ConfigInvalid(f"{path}: expected a mapping at top level")
    return config_from_dict(data)

"""Experiment configuration and its flat ``key = value`` file format.

Recognised keys (``#`` starts a comment)::

    algorithm       Baseline | As3Adaptive | As3Fixed
    problem         P1..P5 | WellPlacement
    n, m, K, L      problem size (P1-P5)
    grid            grid file for WellPlacement (generated from grid_seed if absent)
    grid_seed       seed for a synthetic 50x50 stack when no grid file is given
    trials          number of independent runs
    seed            seed_base; trial i uses seed + i
    budget          f-call budget per run
    restart         None | Simple | DoubleLambda
    init_low, init_high   box for the initial / restart mean
    sigma0          initial step size (shape matrix starts at identity)
    track_tau       true | false; per-iteration Kendall tau on the shadow counter
    as3.c_p, as3.eta, as3.gamma, as3.epsilon, as3.p0, as3.lambda_s
    term.gap, term.sigma_min, term.cond_max, term.coord_var
"""
from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ..as3 import As3Config
from ..cma_engine import RestartPolicy, Thresholds
from ..problems import ProblemParams, generate_synthetic_grids, load_grids, make_problem, make_well_problem
from ..worstcase import WorstCaseProblem


class ConfigError(ValueError):
    pass


class Algorithm(enum.Enum):
    BASELINE = "Baseline"
    AS3_ADAPTIVE = "As3Adaptive"
    AS3_FIXED = "As3Fixed"


@dataclass(frozen=True)
class ExperimentConfig:
    algorithm: Algorithm = Algorithm.AS3_ADAPTIVE
    problem: str = "P2"
    n: int = 10
    m: int = 30
    K: Optional[int] = None
    L: Optional[int] = None
    grid: Optional[str] = None
    grid_seed: int = 0
    trials: int = 20
    seed_base: int = 0
    budget_fcalls: int = 1_000_000
    restart_policy: RestartPolicy = RestartPolicy.NONE
    init_low: float = -4.0
    init_high: float = 4.0
    sigma0: float = 2.0
    track_tau: bool = False
    as3: As3Config = field(default_factory=As3Config)
    thresholds: Thresholds = field(default_factory=Thresholds)

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.budget_fcalls < 1:
            raise ConfigError("budget must be >= 1")
        if not self.sigma0 > 0:
            raise ConfigError("sigma0 must be positive")
        if not self.init_low < self.init_high:
            raise ConfigError("init_low must be below init_high")
        if self.algorithm is Algorithm.AS3_FIXED and self.as3.lambda_s is None:
            raise ConfigError("As3Fixed requires as3.lambda_s")

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    @property
    def init_box(self) -> tuple[np.ndarray, np.ndarray]:
        n = 6 if self.problem == "WellPlacement" else self.n
        return np.full(n, self.init_low), np.full(n, self.init_high)

    def build_problem(self) -> WorstCaseProblem:
        if self.problem == "WellPlacement":
            stack = load_grids(self.grid) if self.grid else generate_synthetic_grids(self.grid_seed)
            return make_well_problem(stack)
        try:
            return make_problem(ProblemParams(self.problem, self.n, self.m, self.K, self.L))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def well_placement(cls, grid: Optional[str] = None, **kw) -> "ExperimentConfig":
        """Defaults for the three-well application: box [1, 50]^6, sigma0 12.5, simple restarts."""
        base = dict(
            problem="WellPlacement",
            grid=grid,
            n=6,
            m=50,
            budget_fcalls=300_000,
            restart_policy=RestartPolicy.SIMPLE,
            init_low=1.0,
            init_high=50.0,
            sigma0=12.5,
            thresholds=Thresholds(coord_var=1e-8),
        )
        base.update(kw)
        return cls(**base)


_TOP_KEYS = {
    "algorithm": ("algorithm", lambda v: _enum(Algorithm, v)),
    "problem": ("problem", str),
    "n": ("n", int),
    "m": ("m", int),
    "k": ("K", int),
    "l": ("L", int),
    "grid": ("grid", str),
    "grid_seed": ("grid_seed", int),
    "trials": ("trials", int),
    "seed": ("seed_base", int),
    "seed_base": ("seed_base", int),
    "budget": ("budget_fcalls", lambda v: int(float(v))),
    "budget_fcalls": ("budget_fcalls", lambda v: int(float(v))),
    "restart": ("restart_policy", lambda v: _enum(RestartPolicy, v)),
    "restart_policy": ("restart_policy", lambda v: _enum(RestartPolicy, v)),
    "init_low": ("init_low", float),
    "init_high": ("init_high", float),
    "sigma0": ("sigma0", float),
    "track_tau": ("track_tau", lambda v: _bool(v)),
}
_AS3_KEYS = {"c_p": float, "eta": float, "gamma": float, "epsilon": float, "p0": float, "lambda_s": int}
_TERM_KEYS = {"gap": float, "sigma_min": float, "cond_max": float, "coord_var": float}


def _enum(cls, value: str):
    for member in cls:
        if member.value.lower() == value.strip().lower():
            return member
    raise ConfigError(f"unknown {cls.__name__} {value!r}; choose from {[m.value for m in cls]}")


def _bool(value: str) -> bool:
    v = value.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {value!r}")


def _none_or(conv):
    def parse(v):
        return None if v.strip().lower() in ("none", "") else conv(v)

    return parse


def apply_overrides(cfg: ExperimentConfig, pairs: dict) -> ExperimentConfig:
    """Apply textual ``key -> value`` overrides, validating every key."""
    top, as3, term = {}, {}, {}
    for raw_key, raw_val in pairs.items():
        key = raw_key.strip().lower()
        val = str(raw_val).strip()
        try:
            if key.startswith("as3."):
                name = key[4:]
                if name not in _AS3_KEYS:
                    raise ConfigError(f"unknown key {raw_key!r}")
                as3[name] = _none_or(_AS3_KEYS[name])(val)
            elif key.startswith("term."):
                name = key[5:]
                if name not in _TERM_KEYS:
                    raise ConfigError(f"unknown key {raw_key!r}")
                term[name] = _none_or(_TERM_KEYS[name])(val)
            elif key in _TOP_KEYS:
                attr, conv = _TOP_KEYS[key]
                top[attr] = _none_or(conv)(val) if attr in ("K", "L", "grid") else conv(val)
            else:
                raise ConfigError(f"unknown key {raw_key!r}")
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"bad value for {raw_key!r}: {exc}") from None
    if as3:
        top["as3"] = dataclasses.replace(cfg.as3, **as3)
    if term:
        top["thresholds"] = dataclasses.replace(cfg.thresholds, **term)
    return cfg.replace(**top)


def parse_config_text(text: str) -> dict:
    pairs = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        k, v = line.split("=", 1)
        pairs[k.strip()] = v.strip()
    return pairs


def load_config(path, base: Optional[ExperimentConfig] = None) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    pairs = parse_config_text(text)
    if base is None:
        problem = pairs.get("problem", "").strip()
        base = ExperimentConfig.well_placement() if problem.lower() == "wellplacement" else ExperimentConfig()
    return apply_overrides(base, pairs)


def dump_config(cfg: ExperimentConfig) -> str:
    lines = [
        f"algorithm = {cfg.algorithm.value}",
        f"problem = {cfg.problem}",
        f"n = {cfg.n}",
        f"m = {cfg.m}",
        f"K = {cfg.K}",
        f"L = {cfg.L}",
        f"grid = {cfg.grid}",
        f"grid_seed = {cfg.grid_seed}",
        f"trials = {cfg.trials}",
        f"seed = {cfg.seed_base}",
        f"budget = {cfg.budget_fcalls}",
        f"restart = {cfg.restart_policy.value}",
        f"init_low = {cfg.init_low!r}",
        f"init_high = {cfg.init_high!r}",
        f"sigma0 = {cfg.sigma0!r}",
        f"track_tau = {str(cfg.track_tau).lower()}",
    ]
    for f in dataclasses.fields(cfg.as3):
        lines.append(f"as3.{f.name} = {getattr(cfg.as3, f.name)}")
    for f in dataclasses.fields(cfg.thresholds):
        lines.append(f"term.{f.name} = {getattr(cfg.thresholds, f.name)}")
    return "\n".join(lines) + "\n"

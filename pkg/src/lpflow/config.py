"""Run configuration: strict YAML parsing with field-by-field validation.

Unknown keys are rejected rather than silently ignored, every range error
names the offending field, and the defaults are the normalized parameter
case (a = 0, nu = mu1 = mu2 = b = 1) on the 2 pi torus.
"""

from dataclasses import dataclass, fields as dc_fields

import yaml

SYSTEMS = ("oldroyd", "mhd", "ns-forced")
VELOCITY_RECIPES = ("zero", "taylor-green", "random")
STRESS_RECIPES = ("zero", "bump", "random-bump")
MAGNETIC_RECIPES = ("zero", "orszag-tang", "random")
FORCE_RECIPES = ("none", "single-mode", "taylor-green-hold")
SCHEMES = ("imex-rk2", "explicit-rk2")

_TWO_PI = 6.283185307179586


class ConfigError(ValueError):
    """Malformed or out-of-range run configuration."""


@dataclass(frozen=True)
class SimulationConfig:
    """Fully validated run description; construct via parse_config/load_config."""

    system: str = "oldroyd"
    n: int = 64
    length: float = _TWO_PI
    nu: float = 1.0
    a: float = 0.0
    mu1: float = 1.0
    mu2: float = 1.0
    b: float = 1.0
    initial_velocity: str = "taylor-green"
    amplitude: float = 1.0
    slope: float = 2.0
    initial_stress: str = "bump"
    epsilon: float = 0.15
    delta: float = 0.02
    initial_magnetic: str = "orszag-tang"
    magnetic_amplitude: float = 1.0
    force: str = "none"
    force_amplitude: float = 1.0
    seed: int = 0
    dt: float = 1e-3
    t_final: float = 1.0
    cadence: int = 10
    alpha: float = 0.5
    beta: float = 0.5
    planchon_deltas: tuple = (0.25, 0.1, 0.05)
    output_dir: str = "out"
    checkpoint_interval: int = 0
    scheme: str = "imex-rk2"
    safety: float = 0.5
    velocity_cap: float = 1e4
    dealias: bool = True

    def as_dict(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in dc_fields(self)}
        out["planchon_deltas"] = list(self.planchon_deltas)
        return out


def _require(ok: bool, message: str) -> None:
    if not ok:
        raise ConfigError(message)


def _is_num(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def validate(config: SimulationConfig) -> SimulationConfig:
    """Check every field; raises ConfigError naming the first bad one."""
    c = config
    _require(c.system in SYSTEMS, f"system must be one of {SYSTEMS}; got {c.system!r}")
    _require(
        isinstance(c.n, int) and c.n >= 16 and (c.n & (c.n - 1)) == 0,
        f"n must be a power of two >= 16; got {c.n!r}",
    )
    _require(_is_num(c.length) and c.length > 0, f"length must be positive; got {c.length!r}")
    for name in ("nu", "a", "mu1", "mu2"):
        val = getattr(c, name)
        _require(_is_num(val) and val >= 0, f"{name} must be nonnegative; got {val!r}")
    _require(
        _is_num(c.b) and -1.0 <= c.b <= 1.0, f"b must lie in [-1, 1]; got {c.b!r}"
    )
    _require(
        c.initial_velocity in VELOCITY_RECIPES,
        f"initial_velocity must be one of {VELOCITY_RECIPES}; got {c.initial_velocity!r}",
    )
    _require(
        c.initial_stress in STRESS_RECIPES,
        f"initial_stress must be one of {STRESS_RECIPES}; got {c.initial_stress!r}",
    )
    _require(
        c.initial_magnetic in MAGNETIC_RECIPES,
        f"initial_magnetic must be one of {MAGNETIC_RECIPES}; got {c.initial_magnetic!r}",
    )
    _require(
        c.force in FORCE_RECIPES, f"force must be one of {FORCE_RECIPES}; got {c.force!r}"
    )
    for name in ("amplitude", "magnetic_amplitude", "force_amplitude"):
        val = getattr(c, name)
        _require(_is_num(val) and val >= 0, f"{name} must be nonnegative; got {val!r}")
    _require(_is_num(c.slope) and c.slope >= 0, f"slope must be nonnegative; got {c.slope!r}")
    _require(_is_num(c.epsilon) and c.epsilon >= 0, f"epsilon must be nonnegative; got {c.epsilon!r}")
    _require(_is_num(c.delta) and c.delta >= 0, f"delta must be nonnegative; got {c.delta!r}")
    _require(isinstance(c.seed, int) and c.seed >= 0, f"seed must be a nonnegative integer; got {c.seed!r}")
    _require(_is_num(c.dt) and c.dt > 0, f"dt must be positive; got {c.dt!r}")
    _require(
        _is_num(c.t_final) and c.t_final >= c.dt,
        f"t_final must be at least dt; got {c.t_final!r}",
    )
    _require(
        isinstance(c.cadence, int) and c.cadence >= 1,
        f"cadence must be a positive integer; got {c.cadence!r}",
    )
    _require(_is_num(c.alpha) and 0 < c.alpha < 1, f"alpha must lie in (0, 1); got {c.alpha!r}")
    _require(_is_num(c.beta) and 0 < c.beta < 1, f"beta must lie in (0, 1); got {c.beta!r}")
    _require(
        isinstance(c.planchon_deltas, (list, tuple))
        and all(_is_num(d) and d > 0 for d in c.planchon_deltas),
        f"planchon_deltas must be a list of positive numbers; got {c.planchon_deltas!r}",
    )
    _require(isinstance(c.output_dir, str) and c.output_dir != "", "output_dir must be a nonempty string")
    _require(
        isinstance(c.checkpoint_interval, int) and c.checkpoint_interval >= 0,
        f"checkpoint_interval must be a nonnegative integer; got {c.checkpoint_interval!r}",
    )
    _require(c.scheme in SCHEMES, f"scheme must be one of {SCHEMES}; got {c.scheme!r}")
    _require(
        _is_num(c.safety) and 0 < c.safety <= 1, f"safety must lie in (0, 1]; got {c.safety!r}"
    )
    _require(
        _is_num(c.velocity_cap) and c.velocity_cap > 0,
        f"velocity_cap must be positive; got {c.velocity_cap!r}",
    )
    _require(isinstance(c.dealias, bool), f"dealias must be a boolean; got {c.dealias!r}")
    return c


def from_mapping(data: dict) -> SimulationConfig:
    """Build and validate a config from a plain mapping (strict keys)."""
    if not isinstance(data, dict):
        raise ConfigError(f"config document must be a mapping; got {type(data).__name__}")
    known = {f.name for f in dc_fields(SimulationConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    clean = dict(data)
    if "planchon_deltas" in clean and isinstance(clean["planchon_deltas"], list):
        clean["planchon_deltas"] = tuple(clean["planchon_deltas"])
    if "length" in clean and isinstance(clean["length"], int):
        clean["length"] = float(clean["length"])
    return validate(SimulationConfig(**clean))


def parse_config(text: str) -> SimulationConfig:
    """Parse a YAML document into a validated SimulationConfig."""
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"config parse error{where}: {exc}") from exc
    if data is None:
        data = {}
    return from_mapping(data)


def load_config(path) -> SimulationConfig:
    """Read and parse a YAML config file."""
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())

"""Run configuration: typed container, presets, and the text parser.

Config files are line-based ``key = value`` with ``#`` comments.  Unknown
keys are rejected and every numeric field is range-checked; parse and range
errors carry the offending line number.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

from .errors import ConfigError
from .lattice import KLattice
from .seeds import FlowConfig

#: paper-scale unit of time; all run I/O expresses time in these units
DEFAULT_TAU = 1.5625e-8


@dataclass
class RunConfig:
    """Validated parameters of one simulation or expansion run."""

    seed: str = "antisymmetric"  # complex | antisymmetric
    a: float = 6.0
    b: float | None = None  # default a/2
    eps: float = 0.5
    delta: float = 1.0
    n1: int = 16
    n2: int = 16
    n3: int = 64
    amplitude: float | None = None
    energy: float | None = None
    tau: float = DEFAULT_TAU
    horizon_tau: float = 1.0e6
    integrator: str = "etd-rk2"  # etd-rk2 | picard
    snapshot_every: int = 16
    h_tau: float | None = None  # fixed step override, tau units
    step_divisor: int = 4096
    step_safety: float = 0.25
    support_threshold: float = 1e-6
    h_min_tau: float = 1e-6
    blowup_factor: float = 1e6
    guard_shell_fraction: float = 0.1
    guard_threshold: float = 1e-3
    guard_action: str = "stop"  # stop | flag
    picard_windows: int = 16
    picard_steps: int = 32
    picard_tol: float = 1e-12
    workers: int = 1
    rng_seed: int = 0

    def validated(self) -> "RunConfig":
        c = replace(self, b=self.b if self.b is not None else self.a / 2.0)
        if c.seed not in ("complex", "antisymmetric"):
            raise ConfigError(f"seed must be 'complex' or 'antisymmetric', got {c.seed!r}")
        if c.integrator not in ("etd-rk2", "picard"):
            raise ConfigError(f"integrator must be 'etd-rk2' or 'picard', got {c.integrator!r}")
        if c.guard_action not in ("stop", "flag"):
            raise ConfigError(f"guard_action must be 'stop' or 'flag', got {c.guard_action!r}")
        for name in _POSITIVE_KEYS:
            val = getattr(c, name)
            if val is not None and not val > 0:
                raise ConfigError(f"{name} must be positive, got {val}")
        for name in _INT_KEYS - {"rng_seed"}:
            if int(getattr(c, name)) < 1:
                raise ConfigError(f"{name} must be a positive integer, got {getattr(c, name)}")
        if not (0.0 < c.guard_shell_fraction < 1.0):
            raise ConfigError(f"guard_shell_fraction must be in (0,1), got {c.guard_shell_fraction}")
        if (c.amplitude is None) == (c.energy is None):
            raise ConfigError("exactly one of amplitude / energy must be set")
        # delegate the seed-geometry constraints (a > b > 1, 0 < eps < b, coverage)
        c.flow_config()
        return c

    def lattice(self) -> KLattice:
        return KLattice(self.delta, (self.n1, self.n2, self.n3))

    def flow_config(self) -> FlowConfig:
        b = self.b if self.b is not None else self.a / 2.0
        return FlowConfig(
            a=self.a, b=b, eps=self.eps, lattice=self.lattice(),
            amplitude=self.amplitude, energy=self.energy,
        )

    @property
    def horizon(self) -> float:
        """Horizon in absolute time units."""
        return self.horizon_tau * self.tau


#: named parameter sets; "paper2" mirrors the published full-scale run and is
#: documented as paper-scale, far beyond desk hardware -- parse it, don't run it
PRESETS: dict[str, dict] = {
    "desk": {
        "seed": "antisymmetric", "a": 6.0, "b": 3.0, "eps": 0.5, "delta": 1.0,
        "n1": 16, "n2": 16, "n3": 64, "energy": 130.0,
        "horizon_tau": 1.6e6, "snapshot_every": 16,
    },
    "paper2": {
        "seed": "antisymmetric", "a": 30.0, "b": 15.0, "eps": 1.0, "delta": 1.0,
        "n1": 254, "n2": 254, "n3": 3000, "energy": 2.5e5,
        "tau": 1.5625e-8,
    },
}

_FIELD_NAMES = {f.name for f in fields(RunConfig)}
_INT_KEYS = {"n1", "n2", "n3", "snapshot_every", "step_divisor", "picard_windows",
             "picard_steps", "workers", "rng_seed"}
_STR_KEYS = {"seed", "integrator", "guard_action"}
_POSITIVE_KEYS = {"a", "b", "eps", "delta", "amplitude", "energy", "tau", "horizon_tau",
                  "h_tau", "step_safety", "support_threshold", "h_min_tau",
                  "blowup_factor", "guard_threshold", "picard_tol"}


def _convert(key: str, raw: str, lineno: int):
    if key in _STR_KEYS:
        return raw
    try:
        value = int(raw) if key in _INT_KEYS else float(raw)
    except ValueError:
        raise ConfigError(f"line {lineno}: value for {key!r} is not a number: {raw!r}") from None
    if key in _POSITIVE_KEYS and not value > 0:
        raise ConfigError(f"line {lineno}: {key} must be positive, got {raw}")
    if key in _INT_KEYS and key != "rng_seed" and value < 1:
        raise ConfigError(f"line {lineno}: {key} must be a positive integer, got {raw}")
    if key == "guard_shell_fraction" and not (0.0 < value < 1.0):
        raise ConfigError(f"line {lineno}: guard_shell_fraction must be in (0,1), got {raw}")
    return value


def parse_config(text: str, preset: str | None = None) -> RunConfig:
    """Parse ``key = value`` lines into a validated :class:`RunConfig`.

    A ``preset = NAME`` line (or the ``preset`` argument) applies the named
    parameter set first; explicit keys then override it.
    """
    pairs: list[tuple[int, str, object]] = []
    preset_name = preset
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line.rstrip()!r}")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key == "preset":
            preset_name = raw
            continue
        if key not in _FIELD_NAMES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        pairs.append((lineno, key, _convert(key, raw, lineno)))

    cfg = RunConfig()
    if preset_name is not None:
        if preset_name not in PRESETS:
            raise ConfigError(f"unknown preset {preset_name!r}; available: {sorted(PRESETS)}")
        cfg = replace(cfg, **PRESETS[preset_name])
    overrides: dict = {key: value for _, key, value in pairs}
    # an explicit amplitude displaces a preset energy and vice versa
    if "amplitude" in overrides and "energy" not in overrides:
        overrides["energy"] = None
    if "energy" in overrides and "amplitude" not in overrides:
        overrides["amplitude"] = None
    return replace(cfg, **overrides).validated()

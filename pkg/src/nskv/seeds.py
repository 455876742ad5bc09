"""Initial data: the two-lobe tornado seed and its antisymmetric combination.

The single-lobe seed is

    v0(k) = A * (k1, k2, -(k1^2+k2^2)/k3) * g(k1) g(k2) g(k3 - a) chi_b(k3 - a)

with g the standard Gaussian density and chi_b a smooth compactly supported
cutoff.  The vector prefactor makes <v0(k), k> vanish identically, so both
seeds are solenoidal by algebra, not by projection.  The antisymmetric seed
adds the mirror lobe at -a and flips sign under k -> -k, which makes the
reconstructed velocity field real.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError
from .lattice import KLattice, VecField, parseval_energy

SQRT_2PI = np.sqrt(2.0 * np.pi)

#: transverse Gaussian widths the lattice must cover for a faithful seed
MIN_TRANSVERSE_WIDTHS = 6.0


@dataclass(frozen=True)
class FlowConfig:
    """Physical and numerical parameters of one flow.

    Exactly one of ``amplitude`` / ``energy`` is given; in the second case
    the amplitude is calibrated so the initial energy matches.  The
    viscosity is fixed to 1 (any other value can be scaled away).
    """

    a: float
    b: float
    eps: float
    lattice: KLattice
    amplitude: float | None = None
    energy: float | None = None

    def __post_init__(self):
        if not self.a > 0:
            raise ConfigError(f"seed center a must be positive, got {self.a}")
        if not (1.0 < self.b < self.a - 1.0):
            raise ConfigError(f"cutoff radius must satisfy 1 < b < a-1, got b={self.b}, a={self.a}")
        if not (0.0 < self.eps < self.b):
            raise ConfigError(f"cutoff width must satisfy 0 < eps < b, got eps={self.eps}, b={self.b}")
        if (self.amplitude is None) == (self.energy is None):
            raise ConfigError("exactly one of amplitude / energy must be specified")
        if self.amplitude is not None and not self.amplitude > 0:
            raise ConfigError(f"amplitude must be positive, got {self.amplitude}")
        if self.energy is not None and not self.energy > 0:
            raise ConfigError(f"target energy must be positive, got {self.energy}")


def gaussian_density(x):
    """Standard Gaussian density exp(-x^2/2)/sqrt(2*pi)."""
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * x * x) / SQRT_2PI


def cutoff_chi(x, b: float, eps: float):
    """C^2 plateau cutoff: 1 for |x| <= b-eps, 0 for |x| >= b.

    The transition is the quintic smoothstep s(u) = 1 - u^3(10 - 15u + 6u^2)
    of u = (|x| - (b-eps))/eps, monotone in |x|.
    """
    if not (0.0 < eps < b):
        raise DomainError(f"cutoff needs 0 < eps < b, got eps={eps}, b={b}")
    u = (np.abs(np.asarray(x, dtype=float)) - (b - eps)) / eps
    u = np.clip(u, 0.0, 1.0)
    return 1.0 - u**3 * (10.0 - 15.0 * u + 6.0 * u * u)


def _check_lattice_covers(cfg: FlowConfig, two_lobes: bool):
    lat = cfg.lattice
    n1, n2, n3 = lat.half_extents
    k3_reach = n3 * lat.step
    if k3_reach < cfg.a + cfg.b:
        raise ConfigError(
            f"lattice reaches |k3| <= {k3_reach:g} but the seed support needs {cfg.a + cfg.b:g}"
        )
    for name, n in (("k1", n1), ("k2", n2)):
        if n * lat.step < MIN_TRANSVERSE_WIDTHS:
            raise ConfigError(
                f"lattice reaches |{name}| <= {n * lat.step:g}; need >= {MIN_TRANSVERSE_WIDTHS:g} "
                "Gaussian widths transversally"
            )
    del two_lobes  # both seeds need the same coverage on a symmetric lattice


def _lobe_weight(cfg: FlowConfig, k3: np.ndarray, center_sign: float) -> np.ndarray:
    """g(k3 -+ a) * chi_b(k3 -+ a); exactly zero outside |k3 -+ a| < b."""
    shifted = k3 - center_sign * cfg.a
    return gaussian_density(shifted) * cutoff_chi(shifted, cfg.b, cfg.eps)


def _assemble(cfg: FlowConfig, axial_weight: np.ndarray, amplitude: float) -> np.ndarray:
    k1, k2, k3 = cfg.lattice.k_components()
    transverse = gaussian_density(k1) * gaussian_density(k2)
    w = transverse * axial_weight
    # the axial weight vanishes identically where |k3| < a - b > 0, so the
    # 1/k3 component is only ever evaluated off k3 = 0
    safe_k3 = np.where(w != 0.0, k3, 1.0)
    vals = np.empty(cfg.lattice.shape + (3,))
    vals[..., 0] = amplitude * k1 * w
    vals[..., 1] = amplitude * k2 * w
    vals[..., 2] = amplitude * (-(k1**2 + k2**2) / safe_k3) * w
    return vals


def build_complex_seed(cfg: FlowConfig) -> VecField:
    """Single-lobe seed centered at k = (0,0,a); solenoidal, not antisymmetric.

    Uses cfg.amplitude if given, else unit amplitude (calibrate afterwards).
    """
    _check_lattice_covers(cfg, two_lobes=False)
    amp = cfg.amplitude if cfg.amplitude is not None else 1.0
    _, _, k3 = cfg.lattice.k_components()
    vals = _assemble(cfg, _lobe_weight(cfg, k3, +1.0), amp)
    return VecField(cfg.lattice, vals, antisymmetric=False, solenoidal=True)


def build_antisym_seed(cfg: FlowConfig) -> VecField:
    """Two-lobe antisymmetric seed; equals the odd part of the lobe pair."""
    _check_lattice_covers(cfg, two_lobes=True)
    amp = cfg.amplitude if cfg.amplitude is not None else 1.0
    _, _, k3 = cfg.lattice.k_components()
    axial = _lobe_weight(cfg, k3, +1.0) + _lobe_weight(cfg, k3, -1.0)
    vals = _assemble(cfg, axial, amp)
    return VecField(cfg.lattice, vals, antisymmetric=True, solenoidal=True)


def calibrate_amplitude(f: VecField, energy: float) -> tuple[VecField, float]:
    """Scale f so its Parseval energy equals ``energy``; returns (field, factor)."""
    if not energy > 0:
        raise DomainError(f"target energy must be positive, got {energy}")
    e1 = parseval_energy(f)
    if e1 == 0.0:
        raise DomainError("cannot calibrate the amplitude of a zero field")
    factor = float(np.sqrt(energy / e1))
    return f.scaled(factor), factor


def build_seed(cfg: FlowConfig, kind: str) -> tuple[VecField, float]:
    """Build the configured seed and resolve its amplitude.

    Returns (field, amplitude).  With cfg.energy set, the field is built at
    unit amplitude and calibrated; the returned amplitude is the calibration
    factor.
    """
    if kind == "complex":
        field = build_complex_seed(cfg)
    elif kind == "antisymmetric":
        field = build_antisym_seed(cfg)
    else:
        raise ConfigError(f"unknown seed kind {kind!r}")
    if cfg.energy is not None:
        return calibrate_amplitude(field, cfg.energy)
    return field, float(cfg.amplitude)

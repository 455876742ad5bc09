"""Wavenumber-lattice geometry, vector-field storage, and spectral functionals.

Fields live on a uniform lattice k = delta*(j1, j2, j3), |j_i| <= N_i,
centered at the origin.  Values are the real 3-vector v(k); the physical
velocity is recovered by the sine sum in :mod:`nskv.physical`.  Under this
convention the energy and enstrophy integrals carry the exact (2*pi)^3
constants, and all k-integrals are Riemann sums with weight delta^3.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from .errors import DomainError, PreconditionError

TWO_PI_CUBED = (2.0 * np.pi) ** 3

#: a field is treated as solenoidal when divergence_max stays below this
SOLENOIDAL_TOL = 1e-6


@dataclass(frozen=True)
class KLattice:
    """Truncated uniform wavenumber lattice.

    Parameters
    ----------
    step : float
        Lattice spacing delta > 0.
    half_extents : (int, int, int)
        Positive node counts N_i per half-axis; nodes are delta*(j1,j2,j3)
        with |j_i| <= N_i, so the lattice is centrally symmetric.
    """

    step: float
    half_extents: tuple[int, int, int]

    def __post_init__(self):
        if not self.step > 0:
            raise DomainError(f"lattice step must be positive, got {self.step}")
        he = tuple(int(n) for n in self.half_extents)
        if len(he) != 3 or any(n < 1 for n in he):
            raise DomainError(f"half_extents must be three positive integers, got {self.half_extents}")
        object.__setattr__(self, "half_extents", he)

    @property
    def shape(self) -> tuple[int, int, int]:
        return tuple(2 * n + 1 for n in self.half_extents)

    @property
    def node_count(self) -> int:
        n1, n2, n3 = self.shape
        return n1 * n2 * n3

    @cached_property
    def axes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Per-axis wavenumber coordinates delta*(-N_i .. N_i)."""
        return tuple(self.step * np.arange(-n, n + 1, dtype=float) for n in self.half_extents)

    @cached_property
    def k_squared(self) -> np.ndarray:
        k1, k2, k3 = self.axes
        return (k1[:, None, None] ** 2 + k2[None, :, None] ** 2 + k3[None, None, :] ** 2)

    def k_components(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Broadcastable (n1,1,1), (1,n2,1), (1,1,n3) wavevector components."""
        k1, k2, k3 = self.axes
        return k1[:, None, None], k2[None, :, None], k3[None, None, :]

    def index_to_wavevector(self, idx) -> np.ndarray:
        j = np.asarray(idx, dtype=int)
        if j.shape != (3,) or np.any(j < 0) or np.any(j >= self.shape):
            raise DomainError(f"index {idx} outside lattice of shape {self.shape}")
        return self.step * (j - np.asarray(self.half_extents))

    def wavevector_to_index(self, k) -> tuple[int, int, int]:
        j = np.asarray(k, dtype=float) / self.step + np.asarray(self.half_extents)
        ji = np.rint(j).astype(int)
        if np.max(np.abs(j - ji)) > 1e-9 or np.any(ji < 0) or np.any(ji >= self.shape):
            raise DomainError(f"wavevector {k} is not a node of this lattice")
        return tuple(int(x) for x in ji)

    def contains(self, k) -> bool:
        try:
            self.wavevector_to_index(k)
        except DomainError:
            return False
        return True

    @property
    def center(self) -> tuple[int, int, int]:
        return self.half_extents


@dataclass(frozen=True)
class VecField:
    """Real 3-vector field sampled on a :class:`KLattice`.

    ``values`` has shape ``lattice.shape + (3,)`` (axis order k1, k2, k3,
    component).  Flags record symmetries the field is known to satisfy;
    operations propagate them and never set a flag they did not enforce.
    Treat instances as immutable: operations return new fields.
    """

    lattice: KLattice
    values: np.ndarray
    antisymmetric: bool = False
    solenoidal: bool = False

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != self.lattice.shape + (3,):
            raise DomainError(
                f"values shape {vals.shape} does not match lattice shape {self.lattice.shape + (3,)}"
            )
        object.__setattr__(self, "values", vals)

    @classmethod
    def zeros(cls, lattice: KLattice, **flags) -> "VecField":
        return cls(lattice, np.zeros(lattice.shape + (3,)), **flags)

    def with_values(self, values: np.ndarray, **flags) -> "VecField":
        merged = dict(antisymmetric=self.antisymmetric, solenoidal=self.solenoidal)
        merged.update(flags)
        return VecField(self.lattice, values, **merged)

    def scaled(self, factor: float) -> "VecField":
        return self.with_values(self.values * float(factor))

    def sup_norm(self) -> float:
        """Largest euclidean vector magnitude over all nodes."""
        return float(np.sqrt(np.max(np.sum(self.values**2, axis=-1), initial=0.0)))

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))


def reverse_values(values: np.ndarray) -> np.ndarray:
    """Sample the field at -k: reverses every lattice axis."""
    return values[::-1, ::-1, ::-1, :]


def antisym_part(values: np.ndarray) -> np.ndarray:
    return 0.5 * (values - reverse_values(values))


def project_solenoidal(k, v) -> np.ndarray:
    """Orthogonal projection of v onto the plane normal to k.

    P_k v = v - (<v,k>/|k|^2) k.  The k = 0 node has no projector; callers
    pin that node to zero instead.
    """
    k = np.asarray(k, dtype=float)
    v = np.asarray(v, dtype=float)
    k2 = float(np.dot(k, k))
    if k2 == 0.0:
        raise DomainError("solenoidal projector is undefined at k = 0")
    return v - (np.dot(v, k) / k2) * k


def antisymmetrize(f: VecField) -> VecField:
    """Odd part (f(k) - f(-k))/2; pins the origin node to zero."""
    w = antisym_part(f.values)
    c = f.lattice.center
    w[c[0], c[1], c[2], :] = 0.0
    # the odd part of a solenoidal field is still solenoidal
    return VecField(f.lattice, w, antisymmetric=True, solenoidal=f.solenoidal)


def divergence_max(f: VecField) -> float:
    """Worst normalized compressive component max_k |<f(k),k>| / max(1, |k||f(k)|)."""
    k1, k2, k3 = f.lattice.k_components()
    dots = f.values[..., 0] * k1 + f.values[..., 1] * k2 + f.values[..., 2] * k3
    kmag = np.sqrt(f.lattice.k_squared)
    fmag = np.sqrt(np.sum(f.values**2, axis=-1))
    scale = np.maximum(1.0, kmag * fmag)
    return float(np.max(np.abs(dots) / scale, initial=0.0))


def parseval_energy(f: VecField) -> float:
    """Total energy (2*pi)^3/2 * delta^3 * sum |f(k)|^2."""
    d3 = f.lattice.step**3
    return 0.5 * TWO_PI_CUBED * d3 * float(np.sum(f.values**2))


def parseval_enstrophy(f: VecField) -> float:
    """Total enstrophy (2*pi)^3 * delta^3 * sum |k|^2 |f(k)|^2.

    Requires a solenoidal field (the identity |k x v|^2 = |k|^2 |v|^2 needs
    v perpendicular to k).
    """
    if divergence_max(f) > SOLENOIDAL_TOL:
        raise PreconditionError(
            f"enstrophy requires a solenoidal field (divergence_max > {SOLENOIDAL_TOL:g})"
        )
    d3 = f.lattice.step**3
    return TWO_PI_CUBED * d3 * float(np.sum(f.lattice.k_squared * np.sum(f.values**2, axis=-1)))


def lattice_rescale_map(f: VecField, lam: int) -> VecField:
    """Scaling-law companion field w(k) = lam^2 * f(lam*k).

    The output keeps the lattice step and shrinks the half-extents to
    floor(N_i/lam), so every target node lam*k is a source node.
    """
    lam = int(lam)
    if lam <= 0:
        raise DomainError(f"rescale factor must be a positive integer, got {lam}")
    if lam == 1:
        return f.with_values(f.values.copy())
    src = f.lattice
    he = tuple(n // lam for n in src.half_extents)
    if any(n < 1 for n in he):
        raise DomainError(f"half_extents {src.half_extents} too small for rescale factor {lam}")
    out_lat = KLattice(src.step, he)
    sl = tuple(slice(n0 - lam * n, n0 + lam * n + 1, lam) for n0, n in zip(src.half_extents, he))
    w = lam**2 * f.values[sl[0], sl[1], sl[2], :]
    return VecField(out_lat, w, antisymmetric=f.antisymmetric, solenoidal=f.solenoidal)


@dataclass(frozen=True)
class XGrid:
    """Uniform sampling of a box in physical space.

    ``axes`` are strictly increasing per-axis coordinates with constant
    spacing.  Use :meth:`centered` for symmetric boxes and
    :meth:`period_cell` for the fundamental cell of the lattice-sum
    reconstruction, on which plane quadratures of squared fields are exact.
    """

    axes: tuple[np.ndarray, np.ndarray, np.ndarray]

    def __post_init__(self):
        axes = tuple(np.asarray(a, dtype=float) for a in self.axes)
        if len(axes) != 3:
            raise DomainError("XGrid needs three axes")
        for a in axes:
            if a.ndim != 1 or a.size < 2:
                raise DomainError("each XGrid axis needs at least 2 points")
            d = np.diff(a)
            if np.any(d <= 0) or np.max(np.abs(d - d[0])) > 1e-12 * abs(d[0]):
                raise DomainError("XGrid axes must be uniform and increasing")
        object.__setattr__(self, "axes", axes)

    @classmethod
    def centered(cls, extent, npoints) -> "XGrid":
        ext = tuple(float(e) for e in np.broadcast_to(extent, (3,)))
        npt = tuple(int(m) for m in np.broadcast_to(npoints, (3,)))
        if any(e <= 0 for e in ext):
            raise DomainError(f"extent must be positive, got {ext}")
        if any(m < 2 for m in npt):
            raise DomainError(f"points per axis must be >= 2, got {npt}")
        return cls(tuple(np.linspace(-e / 2, e / 2, m) for e, m in zip(ext, npt)))

    @classmethod
    def period_cell(cls, lattice: KLattice, refine: int = 1) -> "XGrid":
        """Grid over one period [-pi/delta, pi/delta) per axis.

        With at least 2*N_i+1 points per axis (refine=1) the plane sums of
        |field|^2 reproduce the Parseval totals exactly.
        """
        if refine < 1:
            raise DomainError("refine must be >= 1")
        d = lattice.step
        axes = []
        for n in lattice.half_extents:
            m = refine * (2 * n + 1)
            h = 2.0 * np.pi / (d * m)
            axes.append(-np.pi / d + h * np.arange(m))
        return cls(tuple(axes))

    @property
    def npoints(self) -> tuple[int, int, int]:
        return tuple(a.size for a in self.axes)

    @property
    def steps(self) -> tuple[float, float, float]:
        return tuple(float(a[1] - a[0]) for a in self.axes)

    @property
    def extent(self) -> tuple[float, float, float]:
        return tuple(float(a[-1] - a[0]) for a in self.axes)

    @property
    def cell_volume(self) -> float:
        h1, h2, h3 = self.steps
        return h1 * h2 * h3

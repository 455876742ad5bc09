"""Physical-space reconstruction and the flow observables.

For an antisymmetric field the velocity and vorticity are the lattice sums

    u(x)     = delta^3 * sum_k v(k) sin(<k,x>)
    omega(x) = delta^3 * sum_k (k x v(k)) cos(<k,x>)

evaluated exactly (no periodized FFT) by separable contraction of the
complex exponential over one lattice axis at a time.  The sums are periodic
with period 2*pi/delta per axis; grids must stay inside one cell.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, PreconditionError
from .lattice import TWO_PI_CUBED, KLattice, VecField, XGrid

#: nodes with |u||omega| below this carry no alignment weight
ALIGNMENT_FLOOR = 1e-30

#: transverse boundary decay demanded of physical-space marginal rows
BOUNDARY_DECAY = 1e-6


def _nudft3(values: np.ndarray, lattice: KLattice, grid: XGrid) -> np.ndarray:
    """sum_k values(k) exp(i <k,x>) on the grid, shape (m1,m2,m3,3) complex."""
    k1, k2, k3 = lattice.axes
    x1, x2, x3 = grid.axes
    p1 = np.exp(1j * np.outer(x1, k1))
    p2 = np.exp(1j * np.outer(x2, k2))
    p3 = np.exp(1j * np.outer(x3, k3))
    t = np.tensordot(p1, values, axes=([1], [0]))  # (m1, n2, n3, 3)
    t = np.tensordot(p2, t, axes=([1], [1]))       # (m2, m1, n3, 3)
    t = np.tensordot(p3, t, axes=([1], [2]))       # (m3, m2, m1, 3)
    return np.transpose(t, (2, 1, 0, 3))


def _require_antisymmetric(v: VecField, what: str):
    if not v.antisymmetric:
        raise PreconditionError(f"{what} is defined for antisymmetric fields only")


def reconstruct_velocity(v: VecField, grid: XGrid) -> np.ndarray:
    """Velocity on the grid; real because the cosine part cancels by parity."""
    _require_antisymmetric(v, "velocity reconstruction")
    d3 = v.lattice.step**3
    return d3 * _nudft3(v.values, v.lattice, grid).imag


def curl_values(v: VecField) -> np.ndarray:
    """Nodewise k x v(k)."""
    k1, k2, k3 = v.lattice.k_components()
    w = np.empty_like(v.values)
    w[..., 0] = k2 * v.values[..., 2] - k3 * v.values[..., 1]
    w[..., 1] = k3 * v.values[..., 0] - k1 * v.values[..., 2]
    w[..., 2] = k1 * v.values[..., 1] - k2 * v.values[..., 0]
    return w


def reconstruct_vorticity(v: VecField, grid: XGrid) -> np.ndarray:
    _require_antisymmetric(v, "vorticity reconstruction")
    d3 = v.lattice.step**3
    return d3 * _nudft3(curl_values(v), v.lattice, grid).real


@dataclass
class MarginalSeries:
    """Rows of one marginal density over time.

    Row sums times the coordinate step reproduce the matching Parseval
    total; for physical-space rows this is exact on a period-cell grid.
    The header documents that the (2*pi)^3 convention is included.
    """

    coords: np.ndarray
    kind: str  # "k3" | "x3"
    times: list[float] = field(default_factory=list)
    rows: list[np.ndarray] = field(default_factory=list)
    flags: list[bool] = field(default_factory=list)

    def append(self, t: float, row: np.ndarray, flagged: bool = False):
        self.times.append(float(t))
        self.rows.append(np.asarray(row, dtype=float))
        self.flags.append(bool(flagged))


def marginal_enstrophy_k3(v: VecField) -> tuple[np.ndarray, np.ndarray]:
    """Per-k3-plane enstrophy density (2*pi)^3 delta^2 sum_{k1,k2} |k|^2 |v|^2.

    Returns (k3 coordinates, density); density . delta sums to the total
    enstrophy by regrouping.
    """
    lat = v.lattice
    w = lat.k_squared * np.sum(v.values**2, axis=-1)
    density = TWO_PI_CUBED * lat.step**2 * w.sum(axis=(0, 1))
    return lat.axes[2].copy(), density


def marginal_enstrophy_x3(v: VecField, grid: XGrid) -> tuple[np.ndarray, np.ndarray, bool]:
    """Per-x3-plane quadrature of |omega|^2.

    Returns (x3 coordinates, density, flagged); ``flagged`` is True when the
    integrand has not decayed below BOUNDARY_DECAY of its maximum on the
    transverse boundary, i.e. the row under-represents the continuum
    marginal (it still matches the lattice total on a period-cell grid).
    """
    _require_antisymmetric(v, "physical-space marginal")
    omega = reconstruct_vorticity(v, grid)
    sq = np.sum(omega**2, axis=-1)
    h1, h2, _ = grid.steps
    density = h1 * h2 * sq.sum(axis=(0, 1))
    peak = float(sq.max(initial=0.0))
    boundary = 0.0
    if peak > 0.0:
        boundary = max(sq[0, :, :].max(), sq[-1, :, :].max(), sq[:, 0, :].max(), sq[:, -1, :].max())
    flagged = bool(peak > 0.0 and boundary > BOUNDARY_DECAY * peak)
    return grid.axes[2].copy(), density, flagged


def max_speed(v: VecField, grid: XGrid) -> tuple[float, np.ndarray]:
    """Maximum |u| over the grid, refined once on a 4x finer local grid.

    The refinement re-evaluates the exact lattice sum in a 2-step
    neighborhood of the coarse argmax with the step divided by 4.
    """
    _require_antisymmetric(v, "maximal speed")
    u = reconstruct_velocity(v, grid)
    speed = np.sqrt(np.sum(u**2, axis=-1))
    idx = np.unravel_index(int(np.argmax(speed)), speed.shape)
    center = np.array([grid.axes[i][idx[i]] for i in range(3)])
    steps = grid.steps
    fine_axes = tuple(
        center[i] + np.linspace(-2 * steps[i], 2 * steps[i], 17) for i in range(3)
    )
    fine = XGrid(fine_axes)
    uf = reconstruct_velocity(v, fine)
    sf = np.sqrt(np.sum(uf**2, axis=-1))
    fidx = np.unravel_index(int(np.argmax(sf)), sf.shape)
    loc = np.array([fine.axes[i][fidx[i]] for i in range(3)])
    return float(sf[fidx]), loc


def alignment_cosine(v: VecField, grid: XGrid) -> float:
    """Energy-weighted mean cosine of the angle between u and omega.

    Nodes where |u||omega| underflows carry no weight in the numerator; the
    weights |u|^2/2 normalize the average.  Zero field returns 0.
    """
    _require_antisymmetric(v, "alignment cosine")
    u = reconstruct_velocity(v, grid)
    omega = reconstruct_vorticity(v, grid)
    usq = np.sum(u**2, axis=-1)
    wsq = np.sum(omega**2, axis=-1)
    weight = 0.5 * usq
    denom = float(weight.sum())
    if denom == 0.0:
        return 0.0
    norms = np.sqrt(usq * wsq)
    mask = norms >= ALIGNMENT_FLOOR
    dots = np.sum(u * omega, axis=-1)
    num = float(np.sum(weight[mask] * dots[mask] / norms[mask]))
    return num / denom


def quadratic_peak(x: np.ndarray, y: np.ndarray, i: int) -> tuple[float, float]:
    """Vertex of the parabola through samples i-1, i, i+1 of (x, y).

    Handles non-uniform sample spacing; degenerates to the middle sample
    when the three points are collinear.
    """
    xs = np.asarray(x[i - 1 : i + 2], dtype=float)
    ys = np.asarray(y[i - 1 : i + 2], dtype=float)
    # center for conditioning
    c2, c1, c0 = np.polyfit(xs - xs[1], ys, 2)
    if c2 == 0.0:
        return float(xs[1]), float(ys[1])
    xv = -c1 / (2.0 * c2)
    yv = c0 + c1 * xv + c2 * xv * xv
    return float(xs[1] + xv), float(yv)


def detect_peak_time(series, name: str):
    """Interior maximum of one diagnostic series, quadratically refined.

    Returns (t_peak, value) or None when the discrete maximum sits on an
    endpoint (no interior peak).
    """
    t = np.asarray(series.t_tau, dtype=float)
    y = np.asarray(getattr(series, name), dtype=float)
    if t.size < 3:
        return None
    i = int(np.argmax(y))
    if i == 0 or i == t.size - 1:
        return None
    return quadratic_peak(t, y, i)


def default_xgrid(lattice: KLattice, a: float, *, points_per_wavelength: int = 16,
                  wavelengths: float = 2.0, transverse_points: int = 33) -> XGrid:
    """Observation box for the tornado flow.

    Axially: ``wavelengths`` periods of the dominant wavelength 2*pi/a at
    ``points_per_wavelength`` resolution.  Transversally the box would need
    to grow until the field decays below BOUNDARY_DECAY, but it may never
    exceed the reconstruction period; the flow concentrates near the axis,
    so the full transverse period cell is used.
    """
    if not a > 0:
        raise DomainError("dominant wavenumber a must be positive")
    wavelength = 2.0 * np.pi / a
    ax_extent = wavelengths * wavelength
    ax_points = max(2, int(round(points_per_wavelength * wavelengths)) + 1)
    period = 2.0 * np.pi / lattice.step
    # spacing period/M; endpoints stop short of the wrap point
    trans_extent = period * (transverse_points - 1) / transverse_points
    axes = (
        np.linspace(-trans_extent / 2, trans_extent / 2, transverse_points),
        np.linspace(-trans_extent / 2, trans_extent / 2, transverse_points),
        np.linspace(-ax_extent / 2, ax_extent / 2, ax_points),
    )
    return XGrid(axes)

"""Power-series engine: recursion of the expansion terms, partial sums,
central-limit rescaling, fixed-point fits, and critical-amplitude estimates.

Writing the solution as

    v_A(k,t) = A g1(k,t) + int_0^t e^{-k^2(t-s)} sum_{p>=2} A^p g_p(k,s) ds,
    g1(k,s) = e^{-s k^2} v0(k),

and substituting into the integral equation, the orders satisfy the compact
recursion

    g_p(k,s) = sum_{q=1}^{p-1} B(G_q(., s), G_{p-q}(., s))(k),   p >= 2,

where G_1 = g1 and, for p >= 2, G_p(k,s) = int_0^s e^{-k^2(s-r)} g_p(k,r) dr
is the heat-smoothed partial kernel.  Expanding the q = 1 and q = p-1 terms
recovers the double-time-integral recursion with its single-time boundary
terms; the q in between are the interior terms.  The equivalence is locked
in by the partial-sum-versus-solver test, and the p = 2 case reproduces the
explicit first convolution B(g1, g1) identically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .bilinear import ConvPlan, bilinear_fast, plan_convolution
from .errors import ConfigError, DomainError
from .evolution import heat_step
from .lattice import KLattice, VecField
from .seeds import FlowConfig, build_seed, gaussian_density

#: default memory ceiling for a table (both stored kernels included)
DEFAULT_GP_BUDGET = 2 * 1024**3


def gp_table_bytes(lattice: KLattice, max_order: int, n_times: int) -> int:
    """Bytes needed to hold the order terms and their heat-smoothed partials."""
    per_field = lattice.node_count * 3 * 8
    return 2 * max_order * n_times * per_field


@dataclass
class GpTable:
    """Expansion terms g_p(k, s) of one seed on a uniform time grid.

    ``terms[p][i]`` is g_p at times[i] (p is 1-based), and ``partials[p][i]``
    the heat-smoothed G_p used by the recursion and the partial sums.  The
    stored terms include the seed amplitude; the evaluation-time parameter of
    :func:`series_partial_sum` multiplies on top of it.
    """

    config: FlowConfig
    seed_kind: str
    amplitude: float
    times: np.ndarray
    terms: dict[int, list[VecField]]
    partials: dict[int, list[VecField]]

    @property
    def max_order(self) -> int:
        return max(self.terms)

    @property
    def s_max(self) -> float:
        return float(self.times[-1])

    @property
    def lattice(self) -> KLattice:
        return self.config.lattice

    def lobe_center(self, p: int) -> np.ndarray:
        """Expected support center of order p (complex seed): p*(0,0,a)."""
        return np.array([0.0, 0.0, p * self.config.a])


def _validate_time_grid(times) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size < 2:
        raise DomainError("time grid needs at least two points")
    if abs(t[0]) > 0:
        raise DomainError("time grid must start at 0")
    d = np.diff(t)
    if np.any(d <= 0) or np.max(np.abs(d - d[0])) > 1e-12 * d[0]:
        raise DomainError("time grid must be uniform and increasing")
    return t


def compute_gp_table(cfg: FlowConfig, max_order: int, times, *, seed_kind: str = "complex",
                     plan: ConvPlan | None = None,
                     memory_budget: int = DEFAULT_GP_BUDGET) -> GpTable:
    """Fill orders 1..max_order of the expansion by the compact recursion."""
    if max_order < 2:
        raise DomainError(f"need max_order >= 2, got {max_order}")
    t = _validate_time_grid(times)
    need = gp_table_bytes(cfg.lattice, max_order, t.size)
    if need > memory_budget:
        raise ConfigError(
            f"expansion table needs {need} bytes but the budget is {memory_budget}; "
            f"raise memory_budget or shrink the lattice/grid"
        )
    if plan is None:
        plan = plan_convolution(cfg.lattice)

    v0, amplitude = build_seed(cfg, seed_kind)
    dt = float(t[1] - t[0])
    decay_dt = np.exp(-cfg.lattice.k_squared * dt)[..., None]

    g1 = [heat_step(v0, float(s)) for s in t]
    terms: dict[int, list[VecField]] = {1: g1}
    partials: dict[int, list[VecField]] = {1: g1}

    for p in range(2, max_order + 1):
        gp: list[VecField] = []
        for i in range(t.size):
            acc = None
            for q in range(1, p):
                b = bilinear_fast(partials[q][i], partials[p - q][i], plan)
                acc = b.values if acc is None else acc + b.values
            gp.append(VecField(cfg.lattice, acc,
                               antisymmetric=v0.antisymmetric, solenoidal=True))
        part: list[VecField] = [VecField.zeros(cfg.lattice, antisymmetric=v0.antisymmetric,
                                               solenoidal=True)]
        for i in range(1, t.size):
            vals = decay_dt * part[i - 1].values + 0.5 * dt * (
                decay_dt * gp[i - 1].values + gp[i].values
            )
            part.append(VecField(cfg.lattice, vals,
                                 antisymmetric=v0.antisymmetric, solenoidal=True))
        terms[p] = gp
        partials[p] = part

    return GpTable(cfg, seed_kind, amplitude, t, terms, partials)


def _grid_index(table: GpTable, s: float) -> tuple[int, float]:
    """Bracketing grid index i and fraction for time s in [0, s_max]."""
    t = table.times
    if s < -1e-15 or s > t[-1] * (1.0 + 1e-12) + 1e-300:
        raise DomainError(f"time {s} is outside the table grid [0, {t[-1]}]")
    dt = float(t[1] - t[0])
    pos = min(max(s / dt, 0.0), float(t.size - 1))
    i = min(int(pos), t.size - 2)
    return i, pos - i


def _term_at(table: GpTable, p: int, s: float) -> np.ndarray:
    """g_p values at time s, linear in s between grid points."""
    i, frac = _grid_index(table, s)
    if frac == 0.0:
        return table.terms[p][i].values
    if frac == 1.0:
        return table.terms[p][i + 1].values
    return (1.0 - frac) * table.terms[p][i].values + frac * table.terms[p][i + 1].values


def series_partial_sum(table: GpTable, a_mult: float, t: float, max_order: int) -> VecField:
    """Evaluate the truncated expansion at time t with multiplier a_mult.

    Orders above ``max_order`` are dropped.  At grid times the quadrature is
    the stored trapezoid partial; between them the last interval is closed
    with a linear-in-s end value (same order).
    """
    if max_order < 1 or max_order > table.max_order:
        raise DomainError(f"max_order must be in [1, {table.max_order}], got {max_order}")
    i, frac = _grid_index(table, t)
    lat = table.lattice
    v0 = table.terms[1][0]
    if frac == 0.0 or frac == 1.0:
        idx = i if frac == 0.0 else i + 1
        acc = a_mult * table.partials[1][idx].values.copy()
        for p in range(2, max_order + 1):
            acc += a_mult**p * table.partials[p][idx].values
    else:
        dt = float(table.times[1] - table.times[0])
        rem = frac * dt
        decay = np.exp(-lat.k_squared * rem)[..., None]
        acc = a_mult * (np.exp(-lat.k_squared * t)[..., None] * v0.values)
        for p in range(2, max_order + 1):
            g_end = _term_at(table, p, t)
            part = decay * table.partials[p][i].values + 0.5 * rem * (
                decay * table.terms[p][i].values + g_end
            )
            acc += a_mult**p * part
    return VecField(lat, acc, antisymmetric=v0.antisymmetric, solenoidal=True)


@dataclass(frozen=True)
class YProfile:
    """One expansion order in the central-limit chart Y = (k - p k0)/sqrt(p)."""

    axes: tuple[np.ndarray, np.ndarray, np.ndarray]
    values: np.ndarray
    order: int
    time: float


def rescale_gp(table: GpTable, p: int, s: float, y_max: float = 3.0) -> YProfile:
    """Interpolate g_p onto the rescaled chart around its lobe center.

    The chart spacing is delta/sqrt(p), so for integer lobe centers the
    trilinear interpolation degenerates to an exact gather.
    """
    if table.seed_kind != "complex":
        raise DomainError("the rescaling chart needs the single-lobe (complex) seed")
    if p < 1 or p > table.max_order:
        raise DomainError(f"order {p} outside table range [1, {table.max_order}]")
    lat = table.lattice
    d = lat.step
    sq = np.sqrt(float(p))
    j_max = int(np.floor(y_max * sq / d))
    y_axes = tuple((d / sq) * np.arange(-j_max, j_max + 1) for _ in range(3))
    center = table.lobe_center(p)
    k_axes = [center[i] + sq * y_axes[i] for i in range(3)]
    for i in range(3):
        lo, hi = lat.axes[i][0], lat.axes[i][-1]
        if k_axes[i][0] < lo - 1e-12 or k_axes[i][-1] > hi + 1e-12:
            raise DomainError(
                f"chart for order {p} spans [{k_axes[i][0]:g}, {k_axes[i][-1]:g}] "
                f"but axis {i + 1} of the lattice ends at {hi:g}"
            )
    vals = _term_at(table, p, s)
    interp = RegularGridInterpolator(lat.axes, vals, method="linear",
                                     bounds_error=False, fill_value=0.0)
    mesh = np.stack(np.meshgrid(*k_axes, indexing="ij"), axis=-1)
    out = interp(mesh.reshape(-1, 3)).reshape(mesh.shape[:-1] + (3,))
    return YProfile(y_axes, out, p, float(s))


def fit_fixed_point(profile: YProfile, p: int) -> tuple[float, float]:
    """Least-squares planar slope of the profile against c*(Y1,Y2,0)*g(Y)g(Y)g(Y).

    Returns (c_hat, axial_residual) with the residual the ratio of the
    third-component norm to the planar norm of the data.
    """
    del p  # chart metadata travels with the profile
    y1, y2, y3 = np.meshgrid(*profile.axes, indexing="ij")
    env = gaussian_density(y1) * gaussian_density(y2) * gaussian_density(y3)
    b1 = y1 * env
    b2 = y2 * env
    d = profile.values
    planar_sq = float(np.sum(d[..., 0] ** 2 + d[..., 1] ** 2))
    axial_sq = float(np.sum(d[..., 2] ** 2))
    if planar_sq + axial_sq == 0.0:
        raise DomainError("cannot fit a zero profile")
    basis_sq = float(np.sum(b1**2 + b2**2))
    c_hat = float(np.sum(d[..., 0] * b1 + d[..., 1] * b2)) / basis_sq
    if planar_sq == 0.0:
        return c_hat, float("inf")
    return c_hat, float(np.sqrt(axial_sq / planar_sq))


@dataclass
class LambdaEstimate:
    """Growth-factor estimates per order at one time."""

    time: float
    orders: np.ndarray  # p for each ratio entry
    ratios: np.ndarray  # lambda-hat_p, NaN where undefined
    value: float | None  # last defined entry, the working estimate

    @property
    def defined(self) -> np.ndarray:
        return np.isfinite(self.ratios)


def estimate_lambda(table: GpTable, s: float) -> LambdaEstimate:
    """Sup-norm ratio estimator lambda_p = |g_{p+1}| p / (|g_p| (p+1))."""
    if table.max_order < 4:
        raise DomainError("growth estimation needs a table of order >= 4")
    norms = {}
    for p in range(1, table.max_order + 1):
        vals = _term_at(table, p, s)
        norms[p] = float(np.sqrt(np.max(np.sum(vals**2, axis=-1), initial=0.0)))
    orders = np.arange(1, table.max_order)
    ratios = np.full(orders.shape, np.nan)
    for idx, p in enumerate(orders):
        if norms[p] > 0.0:
            ratios[idx] = norms[p + 1] * p / (norms[p] * (p + 1))
    defined = np.isfinite(ratios)
    value = float(ratios[defined][-1]) if np.any(defined) else None
    return LambdaEstimate(float(s), orders, ratios, value)


def lambda_history(table: GpTable) -> np.ndarray:
    """Working lambda estimate at every grid time (NaN where undefined)."""
    out = np.full(table.times.shape, np.nan)
    for i, s in enumerate(table.times):
        est = estimate_lambda(table, float(s))
        if est.value is not None:
            out[i] = est.value
    return out


@dataclass
class CriticalAmplitudeReport:
    """Reciprocal-growth estimate of the critical multiplier, with an
    optional bisection bracket from evolution runs."""

    a_c_series: float
    time: float
    bracket: tuple[float, float] | None = None
    outcomes: list[tuple[float, str]] | None = None

    @property
    def agreement_factor(self) -> float | None:
        if self.bracket is None:
            return None
        mid = float(np.sqrt(self.bracket[0] * self.bracket[1]))
        return max(self.a_c_series / mid, mid / self.a_c_series)


def estimate_critical_amplitude(table: GpTable, s: float,
                                bracket: tuple[float, float] | None = None,
                                outcomes=None) -> CriticalAmplitudeReport:
    """1/lambda-hat at time s, packaged with an optional run bracket."""
    est = estimate_lambda(table, s)
    if est.value is None or est.value <= 0.0:
        raise DomainError("growth estimate undefined; cannot place the critical amplitude")
    return CriticalAmplitudeReport(1.0 / est.value, float(s), bracket, outcomes)


def bracket_critical_amplitude(classify, a_lo: float, a_hi: float,
                               n_steps: int = 6) -> tuple[tuple[float, float], list]:
    """Geometric bisection of the blow-up threshold.

    ``classify(A)`` returns True when the run at multiplier A triggers
    blow-up suspicion.  ``a_lo`` must classify False and ``a_hi`` True.
    Returns ((a_lo, a_hi), outcomes) with outcomes the tested (A, label)
    pairs.
    """
    if not (0 < a_lo < a_hi):
        raise DomainError("need 0 < a_lo < a_hi")
    outcomes = []
    lo_blows = classify(a_lo)
    outcomes.append((a_lo, "blows" if lo_blows else "decays"))
    if lo_blows:
        raise DomainError(f"lower amplitude {a_lo} already triggers blow-up suspicion")
    hi_blows = classify(a_hi)
    outcomes.append((a_hi, "blows" if hi_blows else "decays"))
    if not hi_blows:
        raise DomainError(f"upper amplitude {a_hi} does not trigger blow-up suspicion")
    for _ in range(n_steps):
        mid = float(np.sqrt(a_lo * a_hi))
        if classify(mid):
            outcomes.append((mid, "blows"))
            a_hi = mid
        else:
            outcomes.append((mid, "decays"))
            a_lo = mid
    return (a_lo, a_hi), outcomes

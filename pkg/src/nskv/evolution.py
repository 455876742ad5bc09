"""Time advancement of the integral formulation.

The heat factor exp(-|k|^2 t) is applied exactly; the quadratic term enters
through exponential quadrature.  Two marchers are provided: a two-stage
exponential integrator (second order) and a Picard fixed-point solver for
short horizons.  A boundary guard watches for spurious enstrophy production
at the transverse truncation edge, and blow-up suspicion is a reportable
terminal state, never an exception or a silent clip.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bilinear import ConvPlan, bilinear_fast, plan_convolution, support_radius
from .config import RunConfig
from .errors import DomainError, NoConvergenceError
from .lattice import (
    VecField,
    XGrid,
    antisym_part,
    divergence_max,
    parseval_energy,
    parseval_enstrophy,
)
from .physical import alignment_cosine, default_xgrid, max_speed
from .seeds import build_seed

#: below this |z| the phi functions switch to their series
PHI_SERIES_CUT = 1e-3

STATUS_OK = "ok"
STATUS_BLOWUP = "blow-up-suspected"
STATUS_UNTRUSTED = "untrusted-beyond-t*"
STATUS_COMPLETED = "completed"


def phi1(z):
    """(e^z - 1)/z with the removable singularity filled by series."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < PHI_SERIES_CUT
    safe = np.where(small, 1.0, z)
    direct = np.expm1(safe) / safe
    series = 1.0 + z / 2.0 + z**2 / 6.0 + z**3 / 24.0
    return np.where(small, series, direct)


def phi2(z):
    """(e^z - 1 - z)/z^2 with the removable singularity filled by series."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < PHI_SERIES_CUT
    safe = np.where(small, 1.0, z)
    direct = (np.expm1(safe) - safe) / safe**2
    series = 0.5 + z / 6.0 + z**2 / 24.0 + z**3 / 120.0
    return np.where(small, series, direct)


def heat_step(v: VecField, h: float) -> VecField:
    """Nodewise multiplication by exp(-|k|^2 h)."""
    if h < 0:
        raise DomainError(f"heat step needs h >= 0, got {h}")
    decay = np.exp(-v.lattice.k_squared * h)
    return v.with_values(v.values * decay[..., None])


@dataclass
class StepperState:
    """Marching state: time, field, current step, and per-step stats."""

    t: float
    v: VecField
    h: float
    stats: dict = field(default_factory=dict)
    status: str = STATUS_OK


def _finish(v_next_values: np.ndarray, template: VecField) -> VecField:
    vals = v_next_values
    if template.antisymmetric:
        vals = antisym_part(vals)
    c = template.lattice.center
    vals[c[0], c[1], c[2], :] = 0.0
    return VecField(template.lattice, vals,
                    antisymmetric=template.antisymmetric, solenoidal=True)


def etd_rk2_step(state: StepperState, plan: ConvPlan) -> StepperState:
    """One predictor/corrector exponential step of size state.h.

    Non-finite output marks the returned state blow-up-suspected; the field
    is left at the last finite value.
    """
    v, h = state.v, state.h
    if not h > 0:
        raise DomainError(f"step size must be positive, got {h}")
    z = -v.lattice.k_squared * h
    decay = np.exp(z)[..., None]
    f1 = (h * phi1(z))[..., None]
    f2 = (h * phi2(z))[..., None]

    b0 = bilinear_fast(v, v, plan)
    pred = v.with_values(decay * v.values + f1 * b0.values, solenoidal=True)
    if not pred.is_finite():
        return StepperState(state.t, v, h, {"sup": v.sup_norm()}, STATUS_BLOWUP)
    b1 = bilinear_fast(pred, pred, plan)
    corr = pred.values + f2 * (b1.values - b0.values)
    out = _finish(corr, v)
    if not out.is_finite():
        return StepperState(state.t, v, h, {"sup": v.sup_norm()}, STATUS_BLOWUP)
    return StepperState(state.t + h, out, h, {"sup": out.sup_norm()}, STATUS_OK)


def picard_solve(v0: VecField, horizon: float, n_steps: int, tol: float,
                 plan: ConvPlan | None = None, max_iter: int = 200) -> VecField:
    """Fixed-point iteration of the integral equation on [0, horizon].

    Iterates v <- heat(v0) + integral of heat-weighted B(v,v) on a uniform
    grid with trapezoid quadrature until the sup-norm update falls below
    ``tol``.  Three consecutive growing updates raise NoConvergenceError
    (shorten the horizon).
    """
    if not horizon > 0 or n_steps < 1:
        raise DomainError("picard_solve needs horizon > 0 and n_steps >= 1")
    if plan is None:
        plan = plan_convolution(v0.lattice)
    dt = horizon / n_steps
    k2 = v0.lattice.k_squared[..., None]
    decay_dt = np.exp(-k2 * dt)
    base = [heat_step(v0, i * dt).values for i in range(n_steps + 1)]
    current = [b.copy() for b in base]

    def wrap(values: np.ndarray) -> VecField:
        return VecField(v0.lattice, values, antisymmetric=v0.antisymmetric,
                        solenoidal=v0.solenoidal)

    prev_diff = np.inf
    growth_streak = 0
    for _ in range(max_iter):
        bvals = [bilinear_fast(wrap(c), wrap(c), plan).values for c in current]
        nxt = [base[0].copy()]
        integral = np.zeros_like(base[0])
        for i in range(1, n_steps + 1):
            integral = decay_dt * integral + 0.5 * dt * (decay_dt * bvals[i - 1] + bvals[i])
            nxt.append(base[i] + integral)
        diff = max(
            float(np.sqrt(np.max(np.sum((a - b) ** 2, axis=-1), initial=0.0)))
            for a, b in zip(nxt, current)
        )
        current = nxt
        if diff <= tol:
            return _finish(current[-1], v0)
        if diff > prev_diff:
            growth_streak += 1
            if growth_streak >= 3:
                raise NoConvergenceError(
                    f"picard iteration diverging (update {diff:.3e}); shorten the horizon"
                )
        else:
            growth_streak = 0
        prev_diff = diff
    raise NoConvergenceError(f"picard iteration did not reach tol={tol:g} in {max_iter} sweeps")


def boundary_guard(v: VecField, shell_fraction: float) -> float:
    """Fraction of total enstrophy on the outer transverse shell.

    The shell holds nodes with |k1| or |k2| above (1 - shell_fraction) of
    the respective half-extent.
    """
    if not (0.0 < shell_fraction < 1.0):
        raise DomainError(f"shell fraction must be in (0,1), got {shell_fraction}")
    lat = v.lattice
    k1, k2, _ = lat.k_components()
    cut1 = (1.0 - shell_fraction) * lat.half_extents[0] * lat.step
    cut2 = (1.0 - shell_fraction) * lat.half_extents[1] * lat.step
    w = lat.k_squared * np.sum(v.values**2, axis=-1)
    total = float(w.sum())
    if total == 0.0:
        return 0.0
    shell = (np.abs(k1) > cut1) | (np.abs(k2) > cut2)
    shell = np.broadcast_to(shell, w.shape)
    return float(w[shell].sum()) / total


@dataclass
class DiagSeries:
    """Recorded diagnostics; times strictly increasing, all entries finite."""

    t_tau: list[float] = field(default_factory=list)
    energy: list[float] = field(default_factory=list)
    enstrophy: list[float] = field(default_factory=list)
    max_speed: list[float] = field(default_factory=list)
    align_cos: list[float] = field(default_factory=list)
    boundary_frac: list[float] = field(default_factory=list)

    def append(self, t_tau, energy, enstrophy, max_speed, align_cos, boundary_frac):
        if self.t_tau and not t_tau > self.t_tau[-1]:
            raise DomainError("diagnostic times must be strictly increasing")
        self.t_tau.append(float(t_tau))
        self.energy.append(float(energy))
        self.enstrophy.append(float(enstrophy))
        self.max_speed.append(float(max_speed))
        self.align_cos.append(float(align_cos))
        self.boundary_frac.append(float(boundary_frac))

    def __len__(self):
        return len(self.t_tau)

    def last_finite(self) -> bool:
        if not self.t_tau:
            return True
        return all(np.isfinite(getattr(self, name)[-1]) for name in
                   ("energy", "enstrophy", "max_speed", "align_cos", "boundary_frac"))


@dataclass
class RunResult:
    status: str
    amplitude: float
    t_star_tau: float | None
    snapshots: list[tuple[float, VecField]]
    diagnostics: DiagSeries
    config: RunConfig


class _Recorder:
    """Takes diagnostic records and classifies them against the run limits."""

    def __init__(self, cfg: RunConfig, xgrid):
        self.cfg = cfg
        self.xgrid = xgrid
        # parity kills the signed alignment average over a symmetric box
        # (u is odd, omega even), so the cosine is taken on the upper half
        self.align_grid = None
        if xgrid is not None:
            x3 = xgrid.axes[2]
            upper = x3[x3 > 1e-12]
            if upper.size >= 2:
                self.align_grid = XGrid((xgrid.axes[0], xgrid.axes[1], upper))
        self.diag = DiagSeries()
        self.snapshots: list[tuple[float, VecField]] = []
        self.s0: float | None = None
        self.t_star_tau: float | None = None

    def record(self, t_abs: float, fld: VecField) -> str:
        cfg = self.cfg
        t_tau = t_abs / cfg.tau
        energy = parseval_energy(fld)
        enstrophy = parseval_enstrophy(fld) if divergence_max(fld) <= 1e-6 else float("nan")
        guard = boundary_guard(fld, cfg.guard_shell_fraction)
        if self.xgrid is not None and fld.antisymmetric:
            speed, _ = max_speed(fld, self.xgrid)
            grid = self.align_grid if self.align_grid is not None else self.xgrid
            align = alignment_cosine(fld, grid)
        else:
            speed, align = 0.0, 0.0
        self.diag.append(t_tau, energy, enstrophy, speed, align, guard)
        self.snapshots.append((t_tau, fld))
        if not self.diag.last_finite():
            return STATUS_BLOWUP
        if self.s0 is None:
            self.s0 = enstrophy
        elif self.s0 > 0.0 and enstrophy > cfg.blowup_factor * self.s0:
            return STATUS_BLOWUP
        if guard > cfg.guard_threshold:
            if self.t_star_tau is None:
                self.t_star_tau = t_tau
            if cfg.guard_action == "stop":
                return STATUS_UNTRUSTED
        return STATUS_OK


def _active_step(v: VecField, cfg: RunConfig) -> float:
    """Step heuristic from the active spectral support."""
    r_perp, r_ax = support_radius(v, cfg.support_threshold)
    k2max = 2.0 * r_perp**2 + r_ax**2
    cap = cfg.horizon / cfg.step_divisor
    if k2max <= 0.0:
        return cap
    return min(cfg.step_safety / k2max, cap)


def run_simulation(cfg: RunConfig, plan: ConvPlan | None = None) -> RunResult:
    """March the configured seed to the horizon, recording diagnostics.

    Records are taken every ``snapshot_every`` steps and at both endpoints.
    The run stops early with a reportable status on blow-up suspicion
    (enstrophy above blowup_factor times its initial value, non-finite
    values, or a step-halving cascade below h_min_tau) and, unless
    guard_action is "flag", on a boundary-guard violation.
    """
    cfg = cfg.validated()
    flow = cfg.flow_config()
    v, amplitude = build_seed(flow, cfg.seed)
    if plan is None:
        plan = plan_convolution(v.lattice, workers=cfg.workers)
    xgrid = default_xgrid(v.lattice, cfg.a) if cfg.seed == "antisymmetric" else None
    rec = _Recorder(cfg, xgrid)

    def result(status: str) -> RunResult:
        if status == STATUS_COMPLETED and rec.t_star_tau is not None:
            status = STATUS_UNTRUSTED
        return RunResult(status, amplitude, rec.t_star_tau, rec.snapshots, rec.diag, cfg)

    r = rec.record(0.0, v)
    if r != STATUS_OK:
        return result(r)

    if cfg.integrator == "picard":
        window = cfg.horizon / cfg.picard_windows
        t = 0.0
        for _ in range(cfg.picard_windows):
            v = picard_solve(v, window, cfg.picard_steps, cfg.picard_tol, plan)
            t += window
            if not v.is_finite():
                return result(STATUS_BLOWUP)
            r = rec.record(t, v)
            if r != STATUS_OK:
                return result(r)
        return result(STATUS_COMPLETED)

    horizon = cfg.horizon
    h_min = cfg.h_min_tau * cfg.tau
    h = cfg.h_tau * cfg.tau if cfg.h_tau is not None else _active_step(v, cfg)
    steps = 0
    state = StepperState(0.0, v, h)
    while state.t < horizon * (1.0 - 1e-12):
        state.h = min(h, horizon - state.t)
        nxt = etd_rk2_step(state, plan)
        if nxt.status == STATUS_BLOWUP:
            h *= 0.5
            if h < h_min:
                return result(STATUS_BLOWUP)
            continue
        state = nxt
        steps += 1
        if cfg.h_tau is None and steps % 16 == 0:
            h = _active_step(state.v, cfg)
        if steps % cfg.snapshot_every == 0 or state.t >= horizon * (1.0 - 1e-12):
            r = rec.record(state.t, state.v)
            if r != STATUS_OK:
                return result(r)
    return result(STATUS_COMPLETED)

"""Scratch calibration sweep for the desk-scale qualitative run (not shipped)."""
import sys
import time

import numpy as np

from nskv.config import RunConfig
from nskv.evolution import run_simulation
from nskv.physical import marginal_enstrophy_k3, marginal_enstrophy_x3
from nskv.lattice import XGrid

TAU = 1.5625e-8
HORIZON_ABS = float(sys.argv[2]) if len(sys.argv) > 2 else 0.12

for e0 in [float(x) for x in sys.argv[1].split(",")]:
    cfg = RunConfig(seed="antisymmetric", a=6.0, b=3.0, eps=0.5, delta=1.0,
                    n1=16, n2=16, n3=64, energy=e0, tau=TAU,
                    horizon_tau=HORIZON_ABS / TAU, snapshot_every=16,
                    step_divisor=256, guard_action="flag")
    t0 = time.perf_counter()
    res = run_simulation(cfg)
    dt = time.perf_counter() - t0
    d = res.diagnostics
    S = np.array(d.enstrophy); V = np.array(d.max_speed); C = np.array(d.align_cos)
    t = np.array(d.t_tau) * TAU
    iS, iV = int(np.argmax(S)), int(np.argmax(V))
    print(f"E0={e0:8.1f} A={res.amplitude:.3f} status={res.status} steps~{len(d)*16} time={dt:.0f}s")
    print(f"  S0={S[0]:.3e} Smax/S0={S.max()/S[0]:.2f} at t={t[iS]:.4f} (idx {iS}/{len(d)-1})")
    print(f"  Vmax/V0={V.max()/V[0]:.2f} at t={t[iV]:.4f} (idx {iV})  TV<=TE: {t[iV]<=t[iS]}")
    print(f"  C0={C[0]:.2e} Cmax={C.max():.3f} Cmin={C.min():.3f} C_at_TE={C[iS]:.3f}")
    print(f"  guard_max={max(d.boundary_frac):.2e} t_star={res.t_star_tau}")
    # k3 marginal at enstrophy peak
    fld = res.snapshots[iS][1]
    k3, row = marginal_enstrophy_k3(fld)
    pos = k3 > 0
    # local maxima
    r = row[pos]; kk = k3[pos]
    locmax = [(kk[i], r[i]) for i in range(1, len(r) - 1) if r[i] >= r[i-1] and r[i] >= r[i+1]]
    locmax.sort(key=lambda x: -x[1])
    print("  k3 peaks:", [(float(k), f"{v:.2e}") for k, v in locmax[:4]])
    xg = XGrid.period_cell(fld.lattice)
    x3, xrow, flag = marginal_enstrophy_x3(fld, xg)
    pos = x3 > 0
    xr = xrow[pos]; xx = x3[pos]
    i = int(np.argmax(xr))
    print(f"  x3 peak at {xx[i]:.4f} (pi/a={np.pi/6:.4f}) flag={flag}")
    sys.stdout.flush()

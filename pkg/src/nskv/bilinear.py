"""The quadratic interaction of the integral formulation.

B(v,w)(k) = delta^3 * sum_{k'} <v(k-k'), k> P_k w(k')

with the fields extended by zero outside the lattice (the lattice truncates
R^3; contributions whose difference falls off-lattice vanish).  Two routes
compute the same values:

* :func:`bilinear_direct` -- literal summation over all node pairs, compiled
  with numba but single-threaded and fixed-order; the slow reference.
* :func:`bilinear_fast` -- nine zero-padded linear convolutions via the real
  FFT, the <.,k> weight and the projector applied nodewise afterwards.

Both force the k = 0 output to zero (the projector is undefined there and
the flows of interest never populate it).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft
from numba import njit

from .errors import DomainError
from .lattice import KLattice, VecField, antisym_part


@dataclass(frozen=True)
class ConvPlan:
    """Padded transform geometry for one lattice, reusable across calls.

    Padding to at least 2*(2N_i+1)-1 per axis makes the circular convolution
    of the FFT route equal to the linear (zero-extended) one; sizes are then
    rounded up to an efficient transform length.
    """

    lattice: KLattice
    padded_shape: tuple[int, int, int]
    workers: int = 1

    def __post_init__(self):
        need = tuple(2 * n - 1 for n in self.lattice.shape)
        if any(p < m for p, m in zip(self.padded_shape, need)):
            raise DomainError(f"padded shape {self.padded_shape} below exact-convolution minimum {need}")


def plan_convolution(lattice: KLattice, workers: int = 1) -> ConvPlan:
    padded = tuple(sfft.next_fast_len(2 * n - 1, real=True) for n in lattice.shape)
    return ConvPlan(lattice, padded, workers=int(workers))


def _check_same_lattice(v: VecField, w: VecField):
    if v.lattice != w.lattice:
        raise DomainError("bilinear term needs both fields on the same lattice")


def _project_and_flag(lattice: KLattice, btilde: np.ndarray, v: VecField, w: VecField) -> VecField:
    """Nodewise projection of the pre-projection vector, zero at k=0."""
    k1, k2, k3 = lattice.k_components()
    k2sq = lattice.k_squared
    dots = btilde[..., 0] * k1 + btilde[..., 1] * k2 + btilde[..., 2] * k3
    inv = np.zeros_like(k2sq)
    np.divide(1.0, k2sq, out=inv, where=k2sq > 0)
    coef = dots * inv
    out = np.empty_like(btilde)
    out[..., 0] = btilde[..., 0] - coef * k1
    out[..., 1] = btilde[..., 1] - coef * k2
    out[..., 2] = btilde[..., 2] - coef * k3
    c = lattice.center
    out[c[0], c[1], c[2], :] = 0.0
    anti = v.antisymmetric and w.antisymmetric
    if anti:
        # the parity identity B(-k) = -B(k) holds exactly; discard FFT roundoff
        out = antisym_part(out)
    return VecField(lattice, out, antisymmetric=anti, solenoidal=True)


def bilinear_fast(v: VecField, w: VecField, plan: ConvPlan) -> VecField:
    """Transform-route evaluation; value-identical to the direct sum."""
    _check_same_lattice(v, w)
    if plan.lattice != v.lattice:
        raise DomainError("convolution plan was built for a different lattice")
    lat = v.lattice
    n1, n2, n3 = lat.shape
    ps = plan.padded_shape
    wk = plan.workers

    vhat = [sfft.rfftn(v.values[..., i], s=ps, workers=wk) for i in range(3)]
    if w is v:
        what = vhat
    else:
        what = [sfft.rfftn(w.values[..., j], s=ps, workers=wk) for j in range(3)]

    # conv index of output node j is j + N (zero-extended linear convolution)
    o1, o2, o3 = lat.half_extents
    window = (slice(o1, o1 + n1), slice(o2, o2 + n2), slice(o3, o3 + n3))
    k1, k2, k3 = lat.k_components()
    kc = (k1, k2, k3)

    d3 = lat.step**3
    btilde = np.zeros(lat.shape + (3,))
    for j in range(3):
        acc = np.zeros(lat.shape)
        for i in range(3):
            conv = sfft.irfftn(vhat[i] * what[j], s=ps, workers=wk)[window]
            acc += kc[i] * conv
        btilde[..., j] = d3 * acc
    return _project_and_flag(lat, btilde, v, w)


@njit(cache=True)
def _direct_kernel(v, w, ax1, ax2, ax3, d3, out):  # pragma: no cover - compiled
    n1, n2, n3 = v.shape[0], v.shape[1], v.shape[2]
    c1, c2, c3 = (n1 - 1) // 2, (n2 - 1) // 2, (n3 - 1) // 2
    for j1 in range(n1):
        k1 = ax1[j1]
        for j2 in range(n2):
            k2 = ax2[j2]
            for j3 in range(n3):
                k3 = ax3[j3]
                a1 = 0.0
                a2 = 0.0
                a3 = 0.0
                # difference node d = j - m + c must stay on the lattice
                for m1 in range(max(0, j1 + c1 - n1 + 1), min(n1, j1 + c1 + 1)):
                    d1 = j1 - m1 + c1
                    for m2 in range(max(0, j2 + c2 - n2 + 1), min(n2, j2 + c2 + 1)):
                        d2 = j2 - m2 + c2
                        for m3 in range(max(0, j3 + c3 - n3 + 1), min(n3, j3 + c3 + 1)):
                            d3i = j3 - m3 + c3
                            s = (
                                v[d1, d2, d3i, 0] * k1
                                + v[d1, d2, d3i, 1] * k2
                                + v[d1, d2, d3i, 2] * k3
                            )
                            a1 += s * w[m1, m2, m3, 0]
                            a2 += s * w[m1, m2, m3, 1]
                            a3 += s * w[m1, m2, m3, 2]
                ksq = k1 * k1 + k2 * k2 + k3 * k3
                if ksq > 0.0:
                    dot = (a1 * k1 + a2 * k2 + a3 * k3) / ksq
                    a1 -= dot * k1
                    a2 -= dot * k2
                    a3 -= dot * k3
                else:
                    a1 = 0.0
                    a2 = 0.0
                    a3 = 0.0
                out[j1, j2, j3, 0] = d3 * a1
                out[j1, j2, j3, 1] = d3 * a2
                out[j1, j2, j3, 2] = d3 * a3


def bilinear_direct(v: VecField, w: VecField) -> VecField:
    """Exact direct summation over all node pairs (slow reference route)."""
    _check_same_lattice(v, w)
    lat = v.lattice
    ax1, ax2, ax3 = lat.axes
    out = np.empty(lat.shape + (3,))
    _direct_kernel(v.values, w.values, ax1, ax2, ax3, lat.step**3, out)
    anti = v.antisymmetric and w.antisymmetric
    return VecField(lat, out, antisymmetric=anti, solenoidal=True)


def support_radius(f: VecField, threshold: float) -> tuple[float, float]:
    """Smallest transverse and axial half-extents holding all nodes with
    |f(k)| >= threshold * max|f|.  Returns (0, 0) for a zero field."""
    if not threshold > 0:
        raise DomainError(f"threshold must be positive, got {threshold}")
    mag = np.sqrt(np.sum(f.values**2, axis=-1))
    peak = float(np.max(mag, initial=0.0))
    if peak == 0.0:
        return 0.0, 0.0
    mask = mag >= threshold * peak
    k1, k2, k3 = f.lattice.k_components()
    trans = np.maximum(np.abs(k1), np.abs(k2)) * np.ones_like(mag)
    axial = np.abs(k3) * np.ones_like(mag)
    return float(np.max(trans[mask])), float(np.max(axial[mask]))

import numpy as np
import pytest

from nskv.bilinear import (
    ConvPlan,
    bilinear_direct,
    bilinear_fast,
    plan_convolution,
    support_radius,
)
from nskv.errors import DomainError
from nskv.lattice import KLattice, VecField, antisymmetrize, divergence_max
from nskv.seeds import FlowConfig, build_antisym_seed

from conftest import random_field, rel_dev


def triple_loop_oracle(v: VecField, w: VecField) -> np.ndarray:
    """Reference summation written independently of the production kernels:
    walks wavevectors (not array offsets) and projects with explicit algebra."""
    lat = v.lattice
    n = lat.half_extents
    d = lat.step
    out = np.zeros(lat.shape + (3,))
    rng1 = range(-n[0], n[0] + 1)
    rng2 = range(-n[1], n[1] + 1)
    rng3 = range(-n[2], n[2] + 1)
    for j1 in rng1:
        for j2 in rng2:
            for j3 in rng3:
                k = d * np.array([j1, j2, j3], dtype=float)
                acc = np.zeros(3)
                for m1 in rng1:
                    for m2 in rng2:
                        for m3 in rng3:
                            d1, d2, d3 = j1 - m1, j2 - m2, j3 - m3
                            if abs(d1) > n[0] or abs(d2) > n[1] or abs(d3) > n[2]:
                                continue
                            vv = v.values[d1 + n[0], d2 + n[1], d3 + n[2]]
                            ww = w.values[m1 + n[0], m2 + n[1], m3 + n[2]]
                            acc = acc + (vv @ k) * ww
                ksq = k @ k
                if ksq > 0:
                    acc = acc - (acc @ k) / ksq * k
                else:
                    acc = np.zeros(3)
                out[j1 + n[0], j2 + n[1], j3 + n[2]] = d**3 * acc
    return out


class TestBilinearDirect:
    def test_bilinearity_and_zero(self, small_lattice, small_plan):
        rng = np.random.default_rng(10)
        v = random_field(small_lattice, rng)
        w = random_field(small_lattice, rng)
        z = VecField.zeros(small_lattice)
        assert bilinear_direct(z, w).sup_norm() == 0.0
        assert bilinear_direct(v, z).sup_norm() == 0.0
        b1 = bilinear_direct(v.scaled(3.0), w)
        b0 = bilinear_direct(v, w)
        assert rel_dev(b1.values, 3.0 * b0.values) <= 1e-14

    def test_single_pair_self_interaction_vanishes(self, small_lattice):
        f = VecField.zeros(small_lattice)
        for k, s in (((0, 0, 4), 1.0), ((0, 0, -4), -1.0)):
            i = small_lattice.wavevector_to_index(k)
            f.values[i[0], i[1], i[2], 0] = s
        f = VecField(small_lattice, f.values, antisymmetric=True, solenoidal=True)
        assert bilinear_direct(f, f).sup_norm() == 0.0

    def test_matches_independent_triple_loop(self):
        lat = KLattice(1.0, (2, 2, 3))
        rng = np.random.default_rng(11)
        v = random_field(lat, rng)
        w = random_field(lat, rng)
        got = bilinear_direct(v, w).values
        want = triple_loop_oracle(v, w)
        assert rel_dev(got, want) <= 1e-12

    def test_lattice_mismatch(self, small_lattice):
        rng = np.random.default_rng(12)
        v = random_field(small_lattice, rng)
        w = random_field(KLattice(1.0, (4, 4, 7)), rng)
        with pytest.raises(DomainError):
            bilinear_direct(v, w)


class TestBilinearFast:
    def test_matches_direct_on_random_fields(self, small_lattice, small_plan):
        rng = np.random.default_rng(13)
        for _ in range(10):
            v = random_field(small_lattice, rng)
            w = random_field(small_lattice, rng)
            fast = bilinear_fast(v, w, small_plan)
            direct = bilinear_direct(v, w)
            assert rel_dev(fast.values, direct.values) <= 1e-10

    def test_output_orthogonal_to_k(self, small_lattice, small_plan):
        rng = np.random.default_rng(14)
        b = bilinear_fast(random_field(small_lattice, rng),
                          random_field(small_lattice, rng), small_plan)
        assert divergence_max(b) <= 1e-12
        c = small_lattice.center
        assert np.all(b.values[c[0], c[1], c[2]] == 0.0)

    def test_preserves_antisymmetry(self, small_lattice, small_plan):
        rng = np.random.default_rng(15)
        v = antisymmetrize(random_field(small_lattice, rng))
        w = antisymmetrize(random_field(small_lattice, rng))
        b = bilinear_fast(v, w, small_plan)
        assert b.antisymmetric
        assert np.max(np.abs(b.values + b.values[::-1, ::-1, ::-1, :])) <= 1e-12

    def test_plan_checks(self, small_lattice, small_plan):
        rng = np.random.default_rng(16)
        other = KLattice(1.0, (3, 3, 3))
        v = random_field(other, rng)
        with pytest.raises(DomainError):
            bilinear_fast(v, v, small_plan)
        with pytest.raises(DomainError):
            ConvPlan(small_lattice, (4, 4, 4))

    def test_self_argument_shortcut_consistent(self, small_lattice, small_plan):
        rng = np.random.default_rng(17)
        v = random_field(small_lattice, rng)
        w = VecField(small_lattice, v.values.copy())
        same = bilinear_fast(v, v, small_plan)
        copy = bilinear_fast(v, w, small_plan)
        assert rel_dev(same.values, copy.values) <= 1e-13


class TestSupportRadius:
    def test_single_pair(self, small_lattice):
        f = VecField.zeros(small_lattice)
        for k, s in (((0, 0, 4), 1.0), ((0, 0, -4), -1.0)):
            i = small_lattice.wavevector_to_index(k)
            f.values[i[0], i[1], i[2], 0] = s
        assert support_radius(f, 1e-3) == (0.0, 4.0)

    def test_zero_field(self, small_lattice):
        assert support_radius(VecField.zeros(small_lattice), 0.5) == (0.0, 0.0)

    def test_seed_envelope(self, desk_flow):
        v = build_antisym_seed(desk_flow)
        r_perp, r_ax = support_radius(v, 1e-3)
        assert desk_flow.a - desk_flow.b <= r_ax <= desk_flow.a + desk_flow.b
        assert r_perp <= desk_flow.lattice.half_extents[0] * desk_flow.lattice.step

    def test_threshold_validation(self, desk_seed):
        with pytest.raises(DomainError):
            support_radius(desk_seed, 0.0)

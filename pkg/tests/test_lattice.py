import numpy as np
import pytest

from nskv.errors import DomainError, PreconditionError
from nskv.lattice import (
    TWO_PI_CUBED,
    KLattice,
    VecField,
    XGrid,
    antisymmetrize,
    divergence_max,
    lattice_rescale_map,
    parseval_energy,
    parseval_enstrophy,
    project_solenoidal,
)
from nskv.seeds import FlowConfig, build_antisym_seed

from conftest import random_field


class TestKLattice:
    def test_shape_and_count(self):
        lat = KLattice(1.0, (2, 3, 4))
        assert lat.shape == (5, 7, 9)
        assert lat.node_count == 5 * 7 * 9

    def test_central_symmetry(self):
        lat = KLattice(0.5, (3, 3, 5))
        rng = np.random.default_rng(1)
        for _ in range(20):
            idx = tuple(rng.integers(0, s) for s in lat.shape)
            k = lat.index_to_wavevector(idx)
            assert lat.contains(-k)

    def test_index_maps_are_inverse(self):
        lat = KLattice(0.25, (2, 2, 3))
        for j1 in range(lat.shape[0]):
            for j2 in range(lat.shape[1]):
                for j3 in range(lat.shape[2]):
                    k = lat.index_to_wavevector((j1, j2, j3))
                    assert lat.wavevector_to_index(k) == (j1, j2, j3)

    def test_invalid(self):
        with pytest.raises(DomainError):
            KLattice(0.0, (2, 2, 2))
        with pytest.raises(DomainError):
            KLattice(1.0, (0, 2, 2))
        with pytest.raises(DomainError):
            KLattice(1.0, (2, 2, 2)).wavevector_to_index((0.5, 0, 0))


class TestProjectSolenoidal:
    def test_parallel_vector_annihilated(self):
        assert np.allclose(project_solenoidal((0, 0, 1), (0, 0, 5)), 0.0)

    def test_orthogonal_vector_unchanged(self):
        out = project_solenoidal((0, 0, 1), (1, 0, 0))
        assert np.allclose(out, (1, 0, 0))

    def test_direct_formula(self):
        out = project_solenoidal((1, 1, 0), (1, 0, 0))
        assert np.allclose(out, (0.5, -0.5, 0.0))

    def test_zero_wavevector_rejected(self):
        with pytest.raises(DomainError):
            project_solenoidal((0, 0, 0), (1, 2, 3))

    def test_idempotent_and_orthogonal(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            k = rng.standard_normal(3)
            v = rng.standard_normal(3)
            p1 = project_solenoidal(k, v)
            p2 = project_solenoidal(k, p1)
            scale = np.linalg.norm(v)
            assert np.max(np.abs(p2 - p1)) <= 1e-14 * max(1.0, scale)
            assert abs(np.dot(p1, k)) <= 1e-14 * np.linalg.norm(k) * max(1.0, scale)


class TestAntisymmetrize:
    def test_idempotent(self, small_lattice):
        rng = np.random.default_rng(3)
        f = random_field(small_lattice, rng)
        w1 = antisymmetrize(f)
        w2 = antisymmetrize(w1)
        assert np.array_equal(w1.values, w2.values)
        assert w1.antisymmetric

    def test_even_part_annihilated(self, small_lattice):
        rng = np.random.default_rng(4)
        f = random_field(small_lattice, rng)
        sym = VecField(small_lattice, 0.5 * (f.values + f.values[::-1, ::-1, ::-1, :]))
        assert antisymmetrize(sym).sup_norm() == 0.0

    def test_single_node(self, small_lattice):
        f = VecField.zeros(small_lattice)
        idx = small_lattice.wavevector_to_index((1, 0, 2))
        f.values[idx[0], idx[1], idx[2], 0] = 1.0
        w = antisymmetrize(f)
        assert np.allclose(w.values[idx[0], idx[1], idx[2]], (0.5, 0, 0))
        midx = small_lattice.wavevector_to_index((-1, 0, -2))
        assert np.allclose(w.values[midx[0], midx[1], midx[2]], (-0.5, 0, 0))

    def test_origin_pinned(self, small_lattice):
        rng = np.random.default_rng(5)
        w = antisymmetrize(random_field(small_lattice, rng))
        c = small_lattice.center
        assert np.all(w.values[c[0], c[1], c[2]] == 0.0)

    def test_commutes_with_projection(self, small_lattice):
        rng = np.random.default_rng(6)
        f = random_field(small_lattice, rng)

        def project_all(values):
            out = values.copy()
            for idx in np.ndindex(small_lattice.shape):
                k = small_lattice.index_to_wavevector(idx)
                if np.any(k):
                    out[idx] = project_solenoidal(k, values[idx])
            return out

        a = project_all(antisymmetrize(f).values)
        b = antisymmetrize(VecField(small_lattice, project_all(f.values)))
        c = small_lattice.center
        a[c[0], c[1], c[2]] = 0.0
        assert np.max(np.abs(a - b.values)) <= 1e-14


class TestFunctionals:
    def test_zero_field(self, small_lattice):
        z = VecField.zeros(small_lattice, solenoidal=True)
        assert divergence_max(z) == 0.0
        assert parseval_energy(z) == 0.0
        assert parseval_enstrophy(z) == 0.0

    def test_fully_compressive_node(self, small_lattice):
        f = VecField.zeros(small_lattice)
        idx = small_lattice.wavevector_to_index((0, 0, 2))
        f.values[idx[0], idx[1], idx[2]] = (0.0, 0.0, 2.0)
        assert divergence_max(f) == pytest.approx(1.0)

    def test_pair_energy(self, small_lattice):
        f = VecField.zeros(small_lattice)
        for k, sign in (((0, 0, 4), 1.0), ((0, 0, -4), -1.0)):
            idx = small_lattice.wavevector_to_index(k)
            f.values[idx[0], idx[1], idx[2], 0] = sign
        assert parseval_energy(f) == pytest.approx(TWO_PI_CUBED)

    def test_pair_enstrophy(self, small_lattice):
        a = 4.0
        f = VecField.zeros(small_lattice)
        for k, sign in (((0, 0, a), 1.0), ((0, 0, -a), -1.0)):
            idx = small_lattice.wavevector_to_index(k)
            f.values[idx[0], idx[1], idx[2], 0] = sign
        assert parseval_enstrophy(f) == pytest.approx(2 * a**2 * TWO_PI_CUBED)

    def test_enstrophy_spectral_lower_bound(self, desk_seed):
        mag = np.sum(desk_seed.values**2, axis=-1)
        ksq = desk_seed.lattice.k_squared
        kmin_sq = float(np.min(ksq[mag > 0]))
        assert parseval_enstrophy(desk_seed) >= kmin_sq * 2.0 * parseval_energy(desk_seed)

    def test_enstrophy_requires_solenoidal(self, small_lattice):
        rng = np.random.default_rng(8)
        f = random_field(small_lattice, rng)
        with pytest.raises(PreconditionError):
            parseval_enstrophy(f)

    def test_parseval_invariant_under_antisymmetrize(self, desk_seed):
        again = antisymmetrize(desk_seed)
        assert parseval_energy(again) == pytest.approx(parseval_energy(desk_seed), rel=1e-14)
        assert parseval_enstrophy(again) == pytest.approx(parseval_enstrophy(desk_seed), rel=1e-14)


class TestRescaleMap:
    def test_identity(self, desk_seed):
        out = lattice_rescale_map(desk_seed, 1)
        assert np.array_equal(out.values, desk_seed.values)
        assert out.lattice == desk_seed.lattice

    def test_single_node(self, small_lattice):
        f = VecField.zeros(small_lattice)
        idx = small_lattice.wavevector_to_index((0, 0, 2))
        f.values[idx[0], idx[1], idx[2], 0] = 1.0
        w = lattice_rescale_map(f, 2)
        assert w.lattice.half_extents == (2, 2, 4)
        jdx = w.lattice.wavevector_to_index((0, 0, 1))
        assert w.values[jdx[0], jdx[1], jdx[2], 0] == 4.0
        assert np.count_nonzero(w.values) == 1

    def test_energy_transforms_linearly(self):
        # E(rescaled) = lam * E needs the integrand resolved at spacing
        # lam*delta; the C^2 cutoff limits convergence to ~(lam*delta)^3,
        # measured 1.8e-4 at delta = 1/8
        lat = KLattice(0.125, (48, 48, 48))
        cfg = FlowConfig(a=4.0, b=2.0, eps=1.0, lattice=lat, amplitude=1.0)
        f = build_antisym_seed(cfg)
        w = lattice_rescale_map(f, 2)
        assert parseval_energy(w) == pytest.approx(2.0 * parseval_energy(f), rel=5e-4)

    def test_invalid_factor(self, desk_seed):
        with pytest.raises(DomainError):
            lattice_rescale_map(desk_seed, 0)
        with pytest.raises(DomainError):
            lattice_rescale_map(desk_seed, -2)


class TestXGrid:
    def test_validation(self):
        with pytest.raises(DomainError):
            XGrid.centered((0.0, 1.0, 1.0), (4, 4, 4))
        with pytest.raises(DomainError):
            XGrid.centered((1.0, 1.0, 1.0), (1, 4, 4))

    def test_period_cell_spacing(self):
        lat = KLattice(1.0, (2, 2, 3))
        g = XGrid.period_cell(lat)
        assert g.npoints == (5, 5, 7)
        h1 = g.steps[0]
        assert h1 == pytest.approx(2 * np.pi / 5)
        assert g.axes[0][0] == pytest.approx(-np.pi)

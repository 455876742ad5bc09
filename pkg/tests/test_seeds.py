import numpy as np
import pytest

from nskv.errors import ConfigError, DomainError
from nskv.lattice import KLattice, antisymmetrize, divergence_max, parseval_energy
from nskv.seeds import (
    FlowConfig,
    build_antisym_seed,
    build_complex_seed,
    build_seed,
    calibrate_amplitude,
    cutoff_chi,
    gaussian_density,
)


class TestGaussianDensity:
    def test_peak_value(self):
        assert gaussian_density(0.0) == pytest.approx(0.3989422804014327, abs=1e-16)

    def test_symmetry(self):
        x = np.linspace(0.1, 5.0, 23)
        assert np.array_equal(gaussian_density(x), gaussian_density(-x))

    def test_unit_mass_lattice_sum(self):
        x = np.arange(-8.0, 8.0 + 1e-12, 1.0)
        assert np.sum(gaussian_density(x)) == pytest.approx(1.0, abs=1e-6)


class TestCutoffChi:
    def test_plateau(self):
        assert cutoff_chi(0.0, 15.0, 1.0) == 1.0
        assert cutoff_chi(13.9, 15.0, 1.0) == 1.0

    def test_support_edge(self):
        assert cutoff_chi(15.0, 15.0, 1.0) == 0.0
        assert cutoff_chi(-15.0, 15.0, 1.0) == 0.0
        assert cutoff_chi(20.0, 15.0, 1.0) == 0.0

    def test_transition_midpoint(self):
        assert cutoff_chi(14.5, 15.0, 1.0) == pytest.approx(0.5, abs=1e-15)
        assert cutoff_chi(-14.5, 15.0, 1.0) == pytest.approx(0.5, abs=1e-15)

    def test_monotone_in_abs(self):
        x = np.linspace(0.0, 16.0, 400)
        y = cutoff_chi(x, 15.0, 1.0)
        assert np.all(np.diff(y) <= 1e-15)

    def test_invalid_parameters(self):
        with pytest.raises(DomainError):
            cutoff_chi(1.0, 2.0, 2.5)
        with pytest.raises(DomainError):
            cutoff_chi(1.0, 2.0, 0.0)


class TestFlowConfig:
    def test_geometry_constraints(self):
        lat = KLattice(1.0, (8, 8, 16))
        with pytest.raises(ConfigError):
            FlowConfig(a=4.0, b=0.5, eps=0.1, lattice=lat, amplitude=1.0)
        with pytest.raises(ConfigError):
            FlowConfig(a=4.0, b=3.5, eps=0.5, lattice=lat, amplitude=1.0)
        with pytest.raises(ConfigError):
            FlowConfig(a=4.0, b=2.0, eps=2.5, lattice=lat, amplitude=1.0)

    def test_exactly_one_amplitude_spec(self):
        lat = KLattice(1.0, (8, 8, 16))
        with pytest.raises(ConfigError):
            FlowConfig(a=4.0, b=2.0, eps=0.5, lattice=lat)
        with pytest.raises(ConfigError):
            FlowConfig(a=4.0, b=2.0, eps=0.5, lattice=lat, amplitude=1.0, energy=2.0)

    def test_lattice_must_cover_support(self):
        with pytest.raises(ConfigError):
            build_complex_seed(
                FlowConfig(a=9.0, b=6.0, eps=1.0, lattice=KLattice(1.0, (8, 8, 10)),
                           amplitude=1.0)
            )
        with pytest.raises(ConfigError):
            build_complex_seed(
                FlowConfig(a=4.0, b=2.0, eps=0.5, lattice=KLattice(1.0, (4, 8, 16)),
                           amplitude=1.0)
            )


def paper_scale_config():
    return FlowConfig(a=30.0, b=15.0, eps=1.0, lattice=KLattice(1.0, (8, 8, 46)),
                      amplitude=1.0)


class TestComplexSeed:
    def test_vanishes_on_axis(self):
        cfg = paper_scale_config()
        v = build_complex_seed(cfg)
        idx = cfg.lattice.wavevector_to_index((0, 0, 30))
        assert np.all(v.values[idx[0], idx[1], idx[2]] == 0.0)

    def test_algebraically_solenoidal(self):
        v = build_complex_seed(paper_scale_config())
        assert divergence_max(v) <= 1e-13

    def test_closed_form_value(self):
        # independent evaluation of the closed form at k = (1, 0, a):
        # (k1 g(1) g(0) g(0), 0, -(1/a) g(1) g(0) g(0)) with chi == 1 there
        cfg = paper_scale_config()
        v = build_complex_seed(cfg)
        g = lambda x: np.exp(-0.5 * x * x) / np.sqrt(2 * np.pi)
        expected = g(1.0) * g(0.0) * g(0.0)  # exp(-1/2) / (2 pi)^(3/2)
        assert expected == pytest.approx(0.038510836890748947, abs=1e-16)
        idx = cfg.lattice.wavevector_to_index((1, 0, 30))
        got = v.values[idx[0], idx[1], idx[2]]
        assert got[0] == pytest.approx(expected, rel=1e-14)
        assert got[1] == 0.0
        assert got[2] == pytest.approx(-expected / 30.0, rel=1e-14)

    def test_not_antisymmetric(self):
        v = build_complex_seed(paper_scale_config())
        assert not v.antisymmetric and v.solenoidal


class TestAntisymSeed:
    def test_odd_parity_exact(self, desk_flow):
        v = build_antisym_seed(desk_flow)
        assert np.array_equal(v.values, -v.values[::-1, ::-1, ::-1, :])

    def test_vanishes_on_axis(self, desk_flow):
        v = build_antisym_seed(desk_flow)
        for k3 in (desk_flow.a, -desk_flow.a):
            idx = desk_flow.lattice.wavevector_to_index((0, 0, k3))
            assert np.all(v.values[idx[0], idx[1], idx[2]] == 0.0)

    def test_solenoidal(self, desk_flow):
        assert divergence_max(build_antisym_seed(desk_flow)) <= 1e-12

    def test_equals_own_antisymmetrization(self, desk_flow):
        v = build_antisym_seed(desk_flow)
        w = antisymmetrize(v)
        assert np.array_equal(v.values, w.values)

    def test_support_window(self, desk_flow):
        v = build_antisym_seed(desk_flow)
        _, _, k3 = desk_flow.lattice.k_components()
        outside = (np.abs(np.abs(k3) - desk_flow.a) >= desk_flow.b) * np.ones(v.lattice.shape, bool)
        assert np.all(v.values[outside] == 0.0)

    def test_energy_twice_single_lobe(self, desk_flow):
        va = build_antisym_seed(desk_flow)
        vc = build_complex_seed(desk_flow)
        assert parseval_energy(va) == pytest.approx(2.0 * parseval_energy(vc), rel=1e-6)


class TestCalibration:
    def test_identity_when_matched(self, desk_seed):
        e = parseval_energy(desk_seed)
        out, factor = calibrate_amplitude(desk_seed, e)
        assert factor == pytest.approx(1.0, rel=1e-14)
        assert np.allclose(out.values, desk_seed.values)

    def test_quadratic_scaling(self, desk_seed):
        e = parseval_energy(desk_seed)
        out, factor = calibrate_amplitude(desk_seed, 4.0 * e)
        assert factor == pytest.approx(2.0, rel=1e-13)
        assert parseval_energy(out) == pytest.approx(4.0 * e, rel=1e-12)

    def test_zero_field_rejected(self, small_lattice):
        from nskv.lattice import VecField

        with pytest.raises(DomainError):
            calibrate_amplitude(VecField.zeros(small_lattice), 1.0)

    def test_build_seed_resolves_energy(self):
        lat = KLattice(1.0, (8, 8, 16))
        cfg = FlowConfig(a=4.0, b=2.0, eps=0.5, lattice=lat, energy=250.0)
        v, amp = build_seed(cfg, "antisymmetric")
        assert parseval_energy(v) == pytest.approx(250.0, rel=1e-12)
        assert amp > 0

    def test_energy_matches_continuum_quadrature(self):
        # independent oracle: fine Riemann sum of the closed-form integrand.
        # a half-unit lattice step resolves the unit-width Gaussians (their
        # aliasing underflows), and the cutoff sits deep in the tail where
        # its limited smoothness carries weight ~ exp(-16)
        a, b, eps = 7.0, 5.0, 1.0
        lat = KLattice(0.5, (12, 12, 28))
        cfg = FlowConfig(a=a, b=b, eps=eps, lattice=lat, amplitude=1.0)
        v = build_antisym_seed(cfg)

        d = 0.125
        k1 = np.arange(-6.0, 6.0 + 1e-9, d)
        k3 = np.arange(-14.0, 14.0 + 1e-9, d)
        g = lambda x: np.exp(-0.5 * x * x) / np.sqrt(2 * np.pi)

        def chi(x):
            u = np.clip((np.abs(x) - (b - eps)) / eps, 0.0, 1.0)
            return 1.0 - u**3 * (10.0 - 15.0 * u + 6.0 * u * u)

        K1, K2, K3 = np.meshgrid(k1, k1, k3, indexing="ij")
        axial = g(K3 - a) * chi(K3 - a) + g(K3 + a) * chi(K3 + a)
        w = g(K1) * g(K2) * axial
        safe = np.where(w != 0, K3, 1.0)
        sq = (K1**2 + K2**2 + ((K1**2 + K2**2) / safe) ** 2) * w**2
        oracle = 0.5 * (2 * np.pi) ** 3 * d**3 * float(np.sum(sq))
        assert parseval_energy(v) == pytest.approx(oracle, rel=1e-6)

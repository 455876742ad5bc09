import numpy as np
import pytest

from nskv.bilinear import plan_convolution
from nskv.lattice import KLattice, VecField
from nskv.seeds import FlowConfig, build_antisym_seed


@pytest.fixture(scope="session")
def small_lattice():
    return KLattice(1.0, (4, 4, 8))


@pytest.fixture(scope="session")
def small_plan(small_lattice):
    return plan_convolution(small_lattice)


@pytest.fixture(scope="session")
def desk_flow():
    """Seed geometry small enough for fast solver tests."""
    lat = KLattice(1.0, (6, 6, 12))
    return FlowConfig(a=4.0, b=2.0, eps=0.5, lattice=lat, amplitude=1.0)


@pytest.fixture(scope="session")
def desk_seed(desk_flow):
    return build_antisym_seed(desk_flow)


def random_field(lattice, rng, antisymmetric=False):
    vals = rng.standard_normal(lattice.shape + (3,))
    f = VecField(lattice, vals)
    if antisymmetric:
        from nskv.lattice import antisymmetrize

        return antisymmetrize(f)
    return f


def rel_dev(a: np.ndarray, b: np.ndarray) -> float:
    scale = np.max(np.abs(b))
    if scale == 0.0:
        return float(np.max(np.abs(a - b)))
    return float(np.max(np.abs(a - b)) / scale)

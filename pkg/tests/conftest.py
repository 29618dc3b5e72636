import numpy as np
import pytest

from covseed import decomposition_pair, isotypic_decompose
from covseed.scenarios import cyclic, spin_j, su_d_tensor2, u1_phase


@pytest.fixture(scope="session")
def spin1_pair():
    return decomposition_pair(spin_j(1))


@pytest.fixture(scope="session")
def su3_pair():
    return decomposition_pair(su_d_tensor2(3))


@pytest.fixture(scope="session")
def su3_trivial_pair():
    return decomposition_pair(su_d_tensor2(3, trivial_stabilizer=True))


@pytest.fixture(scope="session")
def u1_4_pair():
    return decomposition_pair(u1_phase(4))


@pytest.fixture(scope="session")
def u1_2_pair():
    return decomposition_pair(u1_phase(2))


@pytest.fixture(scope="session")
def cyclic3_pair():
    return decomposition_pair(cyclic(3, [0, 1, 2]))


@pytest.fixture(scope="session")
def u1_deg21_pair():
    return decomposition_pair(u1_phase(3, degeneracies=[2, 1]))


@pytest.fixture(scope="session")
def su3_reference_seed(su3_pair):
    """The rank-2 reference seed of the tensor-square scenario:
    6 on the doubled reference line, 3 on the orthogonal antisymmetric line."""
    from covseed import Seed
    g, g0 = su3_pair
    e = np.eye(3)
    psi2 = np.kron(e[0], e[0])
    w = (np.kron(e[1], e[2]) - np.kron(e[2], e[1])) / np.sqrt(2.0)
    xi = 6.0 * np.outer(psi2, psi2) + 3.0 * np.outer(w, w)
    return Seed(xi, g, g0)


def random_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


@pytest.fixture
def rng():
    return np.random.default_rng(2024)

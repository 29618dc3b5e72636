import numpy as np
import pytest
import scipy.linalg

from covseed import (
    FigureOfMerit,
    Seed,
    average_figure_of_merit,
    check_seed,
    is_extremal,
    likelihood,
    merit_normalization,
    ml_map,
    optimize_likelihood,
    project_to_seed_set,
    stability_threshold,
    twirl,
    unique_optimum_certificate,
)
from covseed.numerics import support_basis
from covseed.scenarios import random_seed

from conftest import random_state


def top_projector(seed):
    v = support_basis(np.array(seed.matrix), 1e-9)
    return v @ v.conj().T


def test_spin1_pure_axis_state(spin1_pair):
    g, g0 = spin1_pair
    rho = np.diag([0.5, 0.3, 0.2]).astype(complex)
    res = optimize_likelihood(rho, g, g0)
    assert res.converged
    assert res.iterations <= 50
    assert abs(res.value - 1.5) < 1e-8
    assert check_seed(res.seed).valid
    target = np.diag([3.0, 0.0, 0.0]).astype(complex)
    assert np.max(np.abs(res.seed.matrix - target)) < 1e-6
    assert res.certified_optimal
    assert abs(res.certified_value - 1.5) < 1e-10
    assert res.unique
    assert abs(res.stability_alpha_max - 0.625) < 1e-10
    assert unique_optimum_certificate(res, rho)


def test_uniform_state_not_unique(spin1_pair):
    # every valid seed scores 1 on the maximally mixed state; the optimum is
    # certified but cannot be unique because the returned point is interior
    g, g0 = spin1_pair
    rho = np.eye(3, dtype=complex) / 3.0
    res = optimize_likelihood(rho, g, g0)
    assert res.converged
    assert abs(res.value - 1.0) < 1e-10
    assert res.certified_optimal
    assert abs(res.certified_value - 1.0) < 1e-10
    assert not res.unique
    assert not is_extremal(res.seed).extremal


def test_advisory_certificate_failure(u1_2_pair):
    # two distinct charges force a unit diagonal, so the likelihood of any
    # diagonal state is constant 1; the spectral bound 2*0.9 is unreachable
    g, g0 = u1_2_pair
    rho = np.diag([0.9, 0.1]).astype(complex)
    res = optimize_likelihood(rho, g, g0)
    assert res.converged
    assert abs(res.value - 1.0) < 1e-10
    assert abs(res.certified_value - 1.8) < 1e-10
    assert not res.certified_optimal
    assert not res.unique
    assert not unique_optimum_certificate(res, rho)


def test_su3_support_state_recovers_reference(su3_pair, su3_reference_seed):
    g, g0 = su3_pair
    p = top_projector(su3_reference_seed)
    rho = p / 2.0
    res = optimize_likelihood(rho, g, g0)
    assert res.converged
    assert abs(res.value - 4.5) < 1e-8
    assert res.certified_optimal and res.unique
    assert np.max(np.abs(res.seed.matrix - su3_reference_seed.matrix)) < 1e-9

    # randomization with a kernel-supported state keeps the same optimum
    kernel = np.eye(9) - p
    col = next(kernel[:, j] for j in range(9) if np.linalg.norm(kernel[:, j]) > 0.5)
    v = col / np.linalg.norm(col)
    sigma = np.outer(v, v.conj())
    assert abs(stability_threshold(res.seed, sigma) - 1.0 / 3.0) < 1e-12

    mixed = 0.7 * rho + 0.3 * sigma
    res2 = optimize_likelihood(mixed, g, g0)
    assert res2.converged and res2.unique and res2.certified_optimal
    assert abs(res2.value - 3.15) < 1e-8
    assert abs(res2.stability_alpha_max - 1.0 / 3.0) < 1e-10
    assert np.max(np.abs(res2.seed.matrix - su3_reference_seed.matrix)) < 1e-8


def test_stability_threshold_arithmetic(spin1_pair):
    g, g0 = spin1_pair
    xi = np.diag([3.0, 0.0, 0.0]).astype(complex)
    seed = Seed(xi, g, g0)
    sigma = np.diag([0.0, 0.6, 0.4]).astype(complex)
    assert abs(stability_threshold(seed, sigma) - 0.625) < 1e-12
    overlapping = np.diag([1.0, 0.0, 0.0]).astype(complex)
    with pytest.raises(ValueError, match="support"):
        stability_threshold(seed, overlapping)
    with pytest.raises(ValueError, match="state"):
        stability_threshold(seed, np.diag([0.0, 2.0, -1.0]).astype(complex))


def test_ml_map_identity_indicator(cyclic3_pair, rng):
    # the point mass at the identity element reproduces the state itself
    g, g0 = cyclic3_pair
    rho = random_state(3, rng)
    fom = FigureOfMerit(kind="weighted", weight=lambda t: 1.0 if t == 0 else 0.0)
    assert np.max(np.abs(ml_map(rho, fom, g) - rho)) < 1e-12
    assert abs(merit_normalization(fom, g) - 1.0 / 3.0) < 1e-15


def test_ml_map_uniform_is_twirl(u1_4_pair, rng):
    g, _ = u1_4_pair
    rho = random_state(4, rng)
    fom = FigureOfMerit(kind="weighted", weight=lambda phi: 1.0)
    assert np.max(np.abs(ml_map(rho, fom, g) - twirl(rho, g))) < 1e-10
    assert abs(merit_normalization(fom, g) - 1.0) < 1e-15


def test_ml_map_lie_constant_weight(spin1_pair, rng):
    g, _ = spin1_pair
    rho = random_state(3, rng)
    fom = FigureOfMerit(kind="weighted", weight=lambda v: 2.5)
    assert np.max(np.abs(ml_map(rho, fom, g) - twirl(rho, g))) < 1e-12
    assert abs(merit_normalization(fom, g) - 2.5) < 1e-15
    with pytest.raises(ValueError, match="Lie"):
        bad = FigureOfMerit(kind="weighted", weight=lambda v: float(v[0]))
        ml_map(rho, bad, g)


def test_weight_validation(cyclic3_pair, rng):
    g, _ = cyclic3_pair
    rho = random_state(3, rng)
    zero = FigureOfMerit(kind="weighted", weight=lambda t: 0.0)
    with pytest.raises(ValueError, match="not positive"):
        merit_normalization(zero, g)
    negative = FigureOfMerit(kind="weighted", weight=lambda t: -1.0 if t == 1 else 1.0)
    with pytest.raises(ValueError, match="negative"):
        ml_map(rho, negative, g)
    with pytest.raises(ValueError, match="kind"):
        FigureOfMerit(kind="fidelity")
    with pytest.raises(ValueError, match="weight"):
        FigureOfMerit(kind="weighted")


def test_merit_factorizes_through_ml_map(u1_4_pair, cyclic3_pair, rng):
    # avg_g f(g) Tr[U rho U† Xi] = k * Tr[M(rho) Xi] for both model kinds
    cases = [
        (u1_4_pair, lambda phi: (1.0 + 0.8 * np.cos(phi)) ** 2),
        (cyclic3_pair, lambda t: float(2 + t)),
    ]
    for (g, g0), f in cases:
        fom = FigureOfMerit(kind="weighted", weight=f)
        for _ in range(5):
            seed = random_seed(g, g0, rng=rng)
            rho = random_state(g.dim, rng)
            lhs = average_figure_of_merit(seed, rho, fom)
            k = merit_normalization(fom, g)
            rhs = k * likelihood(ml_map(rho, fom, g), seed)
            assert abs(lhs - rhs) < 1e-10


def test_merit_against_quadrature_oracle(u1_4_pair, rng):
    # independent route: midpoint quadrature with matrix exponentials; exact
    # for trigonometric polynomials of this degree at 256 nodes
    g, g0 = u1_4_pair
    charge = np.array(g.model.matrices[0])
    fom = FigureOfMerit(kind="weighted", weight=lambda phi: 1.0 + np.cos(phi))
    for _ in range(3):
        seed = random_seed(g, g0, rng=rng)
        rho = random_state(4, rng)
        total = 0.0
        nodes = 256
        for k in range(nodes):
            phi = -np.pi + 2.0 * np.pi * (k + 0.5) / nodes
            u = scipy.linalg.expm(1j * phi * charge)
            total += (1.0 + np.cos(phi)) * np.trace(u @ rho @ u.conj().T @ seed.matrix).real
        total /= nodes
        assert abs(average_figure_of_merit(seed, rho, fom) - total) < 1e-10


def test_merit_finite_exact_sum(cyclic3_pair, rng):
    g, g0 = cyclic3_pair
    f = lambda t: float(1 + 2 * t)
    fom = FigureOfMerit(kind="weighted", weight=f)
    seed = random_seed(g, g0, rng=rng)
    rho = random_state(3, rng)
    total = sum(f(t) * np.trace(np.array(g.model.matrices[t]) @ rho
                                @ np.array(g.model.matrices[t]).conj().T
                                @ seed.matrix).real
                for t in range(3)) / 3.0
    assert abs(average_figure_of_merit(seed, rho, fom) - total) < 1e-12


def test_project_to_seed_set(su3_pair, rng):
    g, g0 = su3_pair
    for _ in range(3):
        a = rng.normal(size=(9, 9)) + 1j * rng.normal(size=(9, 9))
        seed = project_to_seed_set(a + a.conj().T, g, g0)
        assert check_seed(seed, tol=1e-7).valid
        again = project_to_seed_set(seed.matrix, g, g0)
        assert np.max(np.abs(again.matrix - seed.matrix)) < 1e-7


def test_state_validation(spin1_pair):
    g, g0 = spin1_pair
    with pytest.raises(ValueError, match="state"):
        optimize_likelihood(np.diag([1.0, 1.0, -1.0]).astype(complex), g, g0)
    with pytest.raises(ValueError, match="dimension"):
        optimize_likelihood(np.eye(4) / 4.0, g, g0)

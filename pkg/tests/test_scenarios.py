import numpy as np
import pytest
import scipy.linalg

from covseed import check_seed, is_extremal, isotypic_decompose
from covseed.scenarios import (
    SCENARIO_BUILDERS,
    build_scenario,
    build_seed,
    correlation_matrix_to_seed,
    cyclic,
    decomposition_pair,
    random_seed,
    rank_one_seed,
    seed_to_correlation_matrix,
    spin_j,
    su_d_tensor2,
    u1_phase,
)


def test_spin_half():
    sc = spin_j(0.5)
    assert sc.dim == 2
    g, g0 = decomposition_pair(sc)
    assert [(c.dim_irrep, c.multiplicity) for c in g.classes] == [(2, 1)]
    assert len(g0.classes) == 2  # the z axis splits the two weights
    jz = np.array(sc.stabilizer.matrices[0])
    assert np.max(np.abs(jz - np.diag([0.5, -0.5]))) < 1e-12


def test_spin_builder_validation():
    with pytest.raises(ValueError):
        spin_j(0.7)
    with pytest.raises(ValueError):
        spin_j(-1.0)


def test_ladder_commutators():
    # the generators must satisfy the angular momentum algebra
    sc = spin_j(1.5)
    jx, jy, jz = (np.array(m) for m in sc.rep.matrices)
    assert np.max(np.abs(jx @ jy - jy @ jx - 1j * jz)) < 1e-12
    assert np.max(np.abs(jy @ jz - jz @ jy - 1j * jx)) < 1e-12
    casimir = jx @ jx + jy @ jy + jz @ jz
    assert np.max(np.abs(casimir - 1.5 * 2.5 * np.eye(4))) < 1e-12


def test_su3_scenario_classes(su3_pair):
    g, g0 = su3_pair
    assert sorted((c.dim_irrep, c.multiplicity) for c in g.classes) == [(3, 1), (6, 1)]
    assert sorted((c.dim_irrep, c.multiplicity) for c in g0.classes) == [
        (1, 1), (1, 1), (2, 2), (3, 1)]


def test_su_d_generators_are_special(rng):
    # group elements must have unit determinant: traceless Hermitian algebra
    for sc in (su_d_tensor2(2), su_d_tensor2(3)):
        gens = [np.array(m) for m in sc.rep.matrices]
        for _ in range(5):
            coeffs = rng.normal(size=len(gens))
            h = sum(c * k for c, k in zip(coeffs, gens))
            u = scipy.linalg.expm(1j * h)
            det = np.linalg.det(u)
            assert abs(det - 1.0) < 1e-9
        for gen in sc.stabilizer.matrices:
            assert abs(np.trace(np.array(gen))) < 1e-12


def test_su_d_stabilizer_fixes_reference_line():
    sc = su_d_tensor2(3)
    e00 = np.zeros(9)
    e00[0] = 1.0
    for gen in sc.stabilizer.matrices:
        # e_1 (x) e_1 spans an eigenline of every stabilizer generator, so
        # the subgroup fixes the reference ray up to a phase
        g = np.array(gen)
        lam = e00 @ g @ e00
        assert np.max(np.abs(g @ e00 - lam * e00)) < 1e-12


def test_u1_phase_charges_and_degeneracies():
    sc = u1_phase(4)
    assert np.max(np.abs(np.array(sc.rep.matrices[0]) - np.diag([0, 1, 2, 3]))) < 1e-12
    sc = u1_phase(3, degeneracies=[2, 1])
    assert np.max(np.abs(np.array(sc.rep.matrices[0]) - np.diag([0, 0, 1]))) < 1e-12
    with pytest.raises(ValueError):
        u1_phase(3, degeneracies=[2, 2])
    with pytest.raises(ValueError):
        u1_phase(0)


def test_u1_finite_cyclic_stabilizer():
    # a Z_2 stabilizer inside the phase circle pins the charge parities
    sc = u1_phase(3, stabilizer=2)
    assert sc.stabilizer.kind == "finite"
    mats = [np.array(u) for u in sc.stabilizer.matrices]
    parity = np.diag([1.0, -1.0, 1.0])
    assert any(np.max(np.abs(u - parity)) < 1e-12 for u in mats)

    g, g0 = decomposition_pair(sc)
    xi = np.ones((3, 3), dtype=complex)
    rep = check_seed(build_seed(sc, xi))
    # entries between opposite parities break the commutation constraint
    comm = xi @ parity - parity @ xi
    assert rep.comm_violation > 0.5 * np.max(np.abs(comm)) > 0.0
    ok = np.array([[1, 0, 1], [0, 1, 0], [1, 0, 1]], dtype=complex)
    assert check_seed(build_seed(sc, ok)).valid


def test_u1_full_stabilizer_forces_diagonal():
    sc = u1_phase(3, stabilizer="full")
    assert check_seed(build_seed(sc, np.eye(3, dtype=complex))).valid
    off = np.eye(3, dtype=complex)
    off[0, 1] = off[1, 0] = 0.5
    assert not check_seed(build_seed(sc, off)).valid


def test_cyclic_scenarios():
    sc = cyclic(3, [0, 1, 2])
    assert sc.dim == 3
    mats = [np.array(u) for u in sc.rep.matrices]
    assert len(mats) == 3
    w = np.exp(2j * np.pi / 3)
    assert np.max(np.abs(mats[1] - np.diag([1, w, w * w]))) < 1e-12

    assert cyclic(1, [0, 0]).rep.kind == "finite"  # trivial group, two slots
    with pytest.raises(ValueError):
        cyclic(0, [0])
    with pytest.raises(ValueError):
        build_scenario("nope")
    assert set(SCENARIO_BUILDERS) == {"spin_j", "su_d_tensor2", "u1_phase", "cyclic"}


def test_random_seed_always_valid(spin1_pair, su3_pair, u1_4_pair, rng):
    for g, g0 in (spin1_pair, su3_pair, u1_4_pair):
        for _ in range(5):
            seed = random_seed(g, g0, rng=rng)
            assert check_seed(seed, tol=1e-7).valid


def test_rank_one_seeds_extremal(spin1_pair, u1_4_pair, cyclic3_pair,
                                 su3_trivial_pair, rng):
    pairs = (spin1_pair, u1_4_pair, cyclic3_pair, su3_trivial_pair)
    for g, g0 in pairs:
        for _ in range(3):
            seed = rank_one_seed(g, g0, rng=rng)
            assert check_seed(seed, tol=1e-7).valid
            assert np.linalg.matrix_rank(np.array(seed.matrix), tol=1e-8) == 1
            assert is_extremal(seed).extremal


def test_rank_one_infeasibility(u1_deg21_pair, su3_pair):
    # a repeated charge leaves no rank-one seed at all
    g, g0 = u1_deg21_pair
    with pytest.raises(ValueError, match="multiplicity"):
        rank_one_seed(g, g0)
    # the vector-fixing stabilizer has no one-dimensional class compatible
    # with both group classes
    g, g0 = su3_pair
    with pytest.raises(ValueError):
        rank_one_seed(g, g0)


def test_correlation_round_trip(rng):
    v = np.exp(1j * rng.uniform(0, 2 * np.pi, size=4))
    c = np.outer(v, v.conj())
    np.fill_diagonal(c, 1.0)
    seed = correlation_matrix_to_seed(c)
    assert check_seed(seed).valid
    back = seed_to_correlation_matrix(seed)
    assert np.array_equal(back, c)  # bit-exact storage
    assert is_extremal(seed).extremal  # unit-modulus rank one

    blocky = np.eye(4, dtype=complex)
    blocky[0, 1] = blocky[1, 0] = 0.5
    seed2 = correlation_matrix_to_seed(blocky)
    assert np.array_equal(seed_to_correlation_matrix(seed2), blocky)


def test_correlation_validation(u1_4_pair):
    with pytest.raises(ValueError):
        correlation_matrix_to_seed(np.ones((2, 3)))
    bad_diag = np.eye(3, dtype=complex)
    bad_diag[0, 0] = 2.0
    with pytest.raises(ValueError):
        correlation_matrix_to_seed(bad_diag)
    not_psd = np.eye(2, dtype=complex)
    not_psd[0, 1] = not_psd[1, 0] = 2.0
    with pytest.raises(ValueError):
        correlation_matrix_to_seed(not_psd)
    wrong = build_scenario("u1_phase", d=3, degeneracies=[2, 1])
    with pytest.raises(ValueError):
        correlation_matrix_to_seed(np.eye(3, dtype=complex), scenario=wrong)

    g, g0 = u1_4_pair
    from covseed import Seed
    seed = Seed(np.diag([2.0, 0.0, 1.0, 1.0]).astype(complex), g, g0)
    with pytest.raises(ValueError):
        seed_to_correlation_matrix(seed)


def test_scenario_notes_present():
    for name, builder in SCENARIO_BUILDERS.items():
        sc = {"spin_j": lambda: spin_j(1.0),
              "su_d_tensor2": lambda: su_d_tensor2(2),
              "u1_phase": lambda: u1_phase(2),
              "cyclic": lambda: cyclic(2, [0, 1])}[name]()
        assert isinstance(sc.name, str) and sc.name
        assert sc.dim == sc.rep.dim
        assert isinstance(sc.notes, str) and sc.notes

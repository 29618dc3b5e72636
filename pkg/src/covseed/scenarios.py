"""Ready-made symmetry scenarios and seed constructors.

A scenario bundles a unitary representation with its stability subgroup.
Builders cover the common cases: spin systems under rotations with an axial
stabilizer, tensor-square representations of the special unitary group with
the stabilizer of a reference vector, phase representations of U(1), and
cyclic groups acting by charges.  On top of those sit seed constructors:
random valid seeds, rank-one seeds where they exist, and the bijection
between unit-diagonal correlation matrices and trivially-stabilized phase
seeds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .covariant import Seed, check_seed
from .grouprep import (
    DEFAULT_RNG_SEED,
    GroupModel,
    IsotypicDecomposition,
    commutant_basis,
    isotypic_decompose,
)
from .numerics import hermitian_basis_from_span, resolve_tol
from .optimize import project_to_seed_set

__all__ = [
    "Scenario",
    "spin_j",
    "su_d_tensor2",
    "u1_phase",
    "cyclic",
    "build_scenario",
    "SCENARIO_BUILDERS",
    "decomposition_pair",
    "build_seed",
    "random_seed",
    "rank_one_seed",
    "correlation_matrix_to_seed",
    "seed_to_correlation_matrix",
]


@dataclass(frozen=True)
class Scenario:
    """A representation together with its stability subgroup."""

    name: str
    rep: GroupModel
    stabilizer: GroupModel
    dim: int
    notes: str = ""


def _ladder_matrices(j: float):
    """Angular momentum matrices in the |j, m> basis, m descending."""
    n = int(round(2 * j)) + 1
    m_vals = np.array([j - k for k in range(n)])
    jz = np.diag(m_vals).astype(complex)
    jp = np.zeros((n, n), dtype=complex)
    for k in range(1, n):
        m = m_vals[k]
        jp[k - 1, k] = np.sqrt(j * (j + 1) - m * (m + 1))
    jm = jp.conj().T
    jx = 0.5 * (jp + jm)
    jy = -0.5j * (jp - jm)
    return jx, jy, jz


def spin_j(j: float) -> Scenario:
    """Spin-j rotations with the rotations about the z axis as stabilizer."""
    if j < 0 or abs(2 * j - round(2 * j)) > 1e-12:
        raise ValueError(f"j must be a nonnegative half-integer, got {j}")
    jx, jy, jz = _ladder_matrices(j)
    rep = GroupModel.lie([jx, jy, jz])
    stab = GroupModel.one_parameter(jz)
    return Scenario(name=f"spin_{j:g}", rep=rep, stabilizer=stab, dim=jx.shape[0],
                    notes="basis |j,m> with m descending; stabilizer generated by Jz")


def _su_generators(d: int):
    """Hermitian traceless basis of su(d): symmetric, antisymmetric, diagonal."""
    gens = []
    for k in range(d):
        for l in range(k + 1, d):
            s = np.zeros((d, d), dtype=complex)
            s[k, l] = s[l, k] = 1.0
            gens.append(s)
            a = np.zeros((d, d), dtype=complex)
            a[k, l] = -1.0j
            a[l, k] = 1.0j
            gens.append(a)
    for m in range(1, d):
        dm = np.zeros((d, d), dtype=complex)
        for k in range(m):
            dm[k, k] = 1.0
        dm[m, m] = -float(m)
        gens.append(dm * np.sqrt(2.0 / (m * (m + 1))))
    return gens


def _hermitian_unit_basis_dim(r: int):
    basis = []
    for k in range(r):
        e = np.zeros((r, r), dtype=complex)
        e[k, k] = 1.0
        basis.append(e)
    for k in range(r):
        for l in range(k + 1, r):
            s = np.zeros((r, r), dtype=complex)
            s[k, l] = s[l, k] = 1.0
            basis.append(s)
            a = np.zeros((r, r), dtype=complex)
            a[k, l] = -1.0j
            a[l, k] = 1.0j
            basis.append(a)
    return basis


def su_d_tensor2(d: int, trivial_stabilizer: bool = False) -> Scenario:
    """Tensor square of the defining SU(d) representation on C^d (x) C^d.

    The stabilizer fixes the reference vector e_1 (x) e_1: its algebra is
    u(d-1) embedded as diag(-tr B, B), lifted to the tensor square.  With
    ``trivial_stabilizer`` the same representation is paired with the
    trivial subgroup instead.
    """
    if d < 2:
        raise ValueError("d must be at least 2")
    eye = np.eye(d, dtype=complex)
    lifted = [np.kron(g, eye) + np.kron(eye, g) for g in _su_generators(d)]
    rep = GroupModel.lie(lifted)
    if trivial_stabilizer:
        stab = GroupModel.trivial(d * d)
        note = "trivial stabilizer variant"
    else:
        stab_gens = []
        for b in _hermitian_unit_basis_dim(d - 1):
            k = np.zeros((d, d), dtype=complex)
            k[0, 0] = -np.trace(b)
            k[1:, 1:] = b
            stab_gens.append(np.kron(k, eye) + np.kron(eye, k))
        stab = GroupModel.lie(stab_gens)
        note = "stabilizer of the reference vector e_1 (x) e_1"
    return Scenario(name=f"su{d}_tensor2", rep=rep, stabilizer=stab, dim=d * d,
                    notes=note)


def u1_phase(d: int, degeneracies=None, stabilizer="trivial") -> Scenario:
    """Phase representation t -> diag(e^{i c t}) with integer charges.

    Charges are 0..k-1 repeated according to ``degeneracies`` (all distinct
    by default).  ``stabilizer`` is "trivial", "full" (the group itself), or
    an integer k for the cyclic subgroup of order k.
    """
    if degeneracies is None:
        degeneracies = [1] * d
    if sum(degeneracies) != d:
        raise ValueError(f"degeneracies sum to {sum(degeneracies)}, expected {d}")
    if any(g <= 0 for g in degeneracies):
        raise ValueError("degeneracies must be positive")
    charges = np.concatenate([np.full(g, c) for c, g in enumerate(degeneracies)])
    gen = np.diag(charges.astype(float)).astype(complex)
    rep = GroupModel.one_parameter(gen)
    if stabilizer == "trivial":
        stab = GroupModel.trivial(d)
    elif stabilizer == "full":
        stab = GroupModel.one_parameter(gen)
    elif isinstance(stabilizer, int) and stabilizer >= 1:
        ang = 2.0 * np.pi / stabilizer
        stab = GroupModel.finite([np.diag(np.exp(1j * ang * t * charges))
                                  for t in range(stabilizer)])
    else:
        raise ValueError(f"unsupported stabilizer spec {stabilizer!r}")
    return Scenario(name=f"u1_phase_{d}", rep=rep, stabilizer=stab, dim=d,
                    notes=f"charges {charges.astype(int).tolist()}")


def cyclic(n: int, charges) -> Scenario:
    """Cyclic group Z_n acting by t -> diag(omega^{c t}), omega = e^{2 pi i/n}."""
    if n < 1:
        raise ValueError("n must be at least 1")
    charges = np.asarray(charges, dtype=int)
    if charges.ndim != 1 or charges.size == 0:
        raise ValueError("charges must be a nonempty vector of integers")
    omega = 2.0 * np.pi / n
    elements = [np.diag(np.exp(1j * omega * t * charges)) for t in range(n)]
    rep = GroupModel.finite(elements)
    stab = GroupModel.trivial(charges.size)
    return Scenario(name=f"cyclic_{n}", rep=rep, stabilizer=stab, dim=charges.size,
                    notes=f"charges {charges.tolist()}")


SCENARIO_BUILDERS = {
    "spin_j": spin_j,
    "su_d_tensor2": su_d_tensor2,
    "u1_phase": u1_phase,
    "cyclic": cyclic,
}


def build_scenario(name: str, **params) -> Scenario:
    """Dispatch to a named scenario builder."""
    try:
        builder = SCENARIO_BUILDERS[name]
    except KeyError:
        known = ", ".join(sorted(SCENARIO_BUILDERS))
        raise ValueError(f"unknown scenario {name!r} (known: {known})") from None
    return builder(**params)


def decomposition_pair(scenario: Scenario, tol: float | None = None,
                       rng_seed: int = DEFAULT_RNG_SEED):
    """Isotypic decompositions of the representation and its stabilizer."""
    g_dec = isotypic_decompose(scenario.rep, tol=tol, rng_seed=rng_seed)
    g0_dec = isotypic_decompose(scenario.stabilizer, tol=tol, rng_seed=rng_seed)
    return g_dec, g0_dec


def build_seed(scenario: Scenario, matrix, tol: float | None = None,
               rng_seed: int = DEFAULT_RNG_SEED) -> Seed:
    """Wrap a matrix as a seed under the scenario's decompositions."""
    g_dec, g0_dec = decomposition_pair(scenario, tol=tol, rng_seed=rng_seed)
    return Seed(matrix, g_dec, g0_dec)


def random_seed(g_dec: IsotypicDecomposition, g0_dec: IsotypicDecomposition,
                rng=None, spread: float = 1.0) -> Seed:
    """A random valid seed: a random stabilizer-commuting Hermitian
    perturbation of the identity, projected back onto the seed set."""
    rng = np.random.default_rng(rng)
    basis = hermitian_basis_from_span(commutant_basis(g0_dec.model, resolve_tol(None)),
                                      resolve_tol(None))
    coeffs = rng.standard_normal(len(basis))
    start = np.eye(g_dec.dim, dtype=complex)
    for c, h in zip(coeffs, basis):
        start += spread * c * h
    return project_to_seed_set(start, g_dec, g0_dec)


def _invariant_line_classes(g0_dec: IsotypicDecomposition):
    """Stabilizer classes whose irrep is one-dimensional, as column bases."""
    out = []
    for cls in g0_dec.classes:
        if cls.dim_irrep == 1:
            # columns span the full character eigenspace of this class
            out.append(cls.isometry)
        else:
            out.append(None)
    return out


def rank_one_seed(g_dec: IsotypicDecomposition, g0_dec: IsotypicDecomposition,
                  rng=None, attempts: int = 8, iters: int = 300,
                  tol: float = 1e-10) -> Seed:
    """A rank-one valid seed y y†, or ValueError when none exists.

    A rank-one seed must commute with the stabilizer, so y has to be a
    common eigenvector: it lives inside a single one-dimensional stabilizer
    class.  Within that subspace the normalization constraints say the
    class-mu component matrix of y has orthogonal columns of norm sqrt(d_mu),
    which is solved by alternating a column-polar correction with the
    projection back onto the subspace.  Obstructions that are exact (a class
    component forced to vanish, or multiplicity exceeding irrep dimension)
    are reported as infeasibility; otherwise exhausting the randomized
    search raises too.
    """
    rng = np.random.default_rng(rng)
    n = g_dec.dim
    candidates = [v for v in _invariant_line_classes(g0_dec) if v is not None]
    if not candidates:
        raise ValueError("no rank-one seed exists: the stabilizer has no "
                         "one-dimensional class to host a common eigenvector")
    shapes = [(cls.dim_irrep, cls.multiplicity, cls.pieces) for cls in g_dec.classes]
    search_failed = False
    for v in candidates:
        # exact obstructions inside this candidate subspace
        blocked = False
        for d, m, pieces in shapes:
            if m > d:
                raise ValueError("no rank-one seed exists: a class has "
                                 "multiplicity above its irrep dimension")
            comp = np.concatenate([p.conj().T @ v for p in pieces], axis=0)
            if np.linalg.norm(comp) < 1e-12:
                blocked = True
                break
        if blocked:
            continue
        for _ in range(attempts):
            c = rng.standard_normal(v.shape[1]) + 1j * rng.standard_normal(v.shape[1])
            y = v @ c
            ok = False
            for _ in range(iters):
                y_new = np.zeros(n, dtype=complex)
                defect = 0.0
                for d, m, pieces in shapes:
                    a = np.stack([p.conj().T @ y for p in pieces], axis=1)  # d x m
                    u, _s, vh = np.linalg.svd(a, full_matrices=False)
                    a_t = np.sqrt(float(d)) * (u @ vh)
                    defect = max(defect, float(np.max(np.abs(
                        a.conj().T @ a - d * np.eye(m)))))
                    for i in range(m):
                        y_new += pieces[i] @ a_t[:, i]
                y = v @ (v.conj().T @ y_new)
                if defect < tol and np.linalg.norm(y - y_new) < 1e-9:
                    ok = True
                    break
            if ok:
                seed = Seed(np.outer(y, y.conj()), g_dec, g0_dec)
                if check_seed(seed).valid:
                    return seed
            search_failed = True
    if search_failed:
        raise ValueError("no rank-one seed found: the randomized search "
                         "exhausted its attempts without a feasible vector")
    raise ValueError("no rank-one seed exists: every candidate subspace has a "
                     "class component forced to zero")


def correlation_matrix_to_seed(c_matrix, scenario: Scenario | None = None,
                               tol: float = 1e-8,
                               rng_seed: int = DEFAULT_RNG_SEED) -> Seed:
    """Seed of a trivially-stabilized distinct-charge phase scenario from a
    unit-diagonal PSD Hermitian matrix.

    For distinct charges the normalization constraints pin exactly the
    diagonal, so correlation matrices and valid seeds are the same convex
    body; the matrix is stored without modification and round trips
    bit-exactly through ``seed_to_correlation_matrix``.
    """
    c = np.asarray(c_matrix, dtype=complex)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ValueError("correlation matrix must be square")
    d = c.shape[0]
    if np.max(np.abs(c - c.conj().T)) > tol:
        raise ValueError("correlation matrix is not Hermitian")
    if np.max(np.abs(np.diag(c) - 1.0)) > tol:
        raise ValueError("correlation matrix must have unit diagonal")
    if float(np.linalg.eigvalsh(0.5 * (c + c.conj().T))[0]) < -tol:
        raise ValueError("correlation matrix is not positive semidefinite")
    if scenario is None:
        scenario = u1_phase(d)
    if scenario.dim != d:
        raise ValueError("scenario dimension does not match the matrix")
    g_dec, g0_dec = decomposition_pair(scenario, rng_seed=rng_seed)
    if any(cls.multiplicity != 1 or cls.dim_irrep != 1 for cls in g_dec.classes) \
            or len(g_dec.classes) != d:
        raise ValueError("the correspondence needs d distinct one-dimensional "
                         "classes (distinct charges)")
    if g0_dec.model.kind != "finite" or len(g0_dec.model.matrices) != 1:
        raise ValueError("the correspondence needs a trivial stabilizer")
    return Seed(c, g_dec, g0_dec)


def seed_to_correlation_matrix(seed: Seed, tol: float = 1e-8) -> np.ndarray:
    """Inverse of ``correlation_matrix_to_seed``: returns the seed matrix
    after checking it is a unit-diagonal correlation matrix."""
    c = np.array(seed.matrix)
    if np.max(np.abs(np.diag(c) - 1.0)) > tol:
        raise ValueError("seed diagonal is not 1; not a correlation-type seed")
    return c

"""Covariant measurement seeds and their defining constraints.

A covariant measurement over a group orbit is determined by one operator,
its seed: the density at the reference point.  A matrix is a valid seed
exactly when it is positive semidefinite, satisfies the trace-normalization
constraints Tr[T_ij Xi] = d_mu * delta_ij against the group decomposition's
intertwiners (equivalent to the group average of the seed being the
identity), and commutes with the stability subgroup.

Seeds that commute with the stabilizer decompose blockwise: on each
stabilizer isotypic block the seed acts as identity (x) X†X for a factor X
on the multiplicity space.  The factor is fixed to the Hermitian PSD square
root gauge, which all downstream extremality computations rely on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grouprep import GroupModel, IsotypicDecomposition
from .numerics import (
    as_matrix,
    hermitian_sqrt,
    partial_trace_left,
    rank_tol,
    require_hermitian,
    resolve_tol,
)

__all__ = [
    "Seed",
    "ConstraintReport",
    "SeedBlocks",
    "check_seed",
    "block_form",
    "seed_from_blocks",
    "povm_density",
    "born_probability",
]


@dataclass(frozen=True)
class Seed:
    """A candidate seed: matrix plus the two decompositions it lives under.

    ``g_dec`` is the decomposition of the full symmetry group,
    ``g0_dec`` that of the stability subgroup.  Validity is advisory
    (see ``check_seed``), so invalid candidates can still be analyzed.
    """

    matrix: np.ndarray
    g_dec: IsotypicDecomposition
    g0_dec: IsotypicDecomposition

    def __post_init__(self):
        m = as_matrix(self.matrix)
        if m.shape[0] != self.g_dec.dim or m.shape[0] != self.g0_dec.dim:
            raise ValueError("seed dimension does not match the decompositions")
        frozen = np.array(m)
        frozen.setflags(write=False)
        object.__setattr__(self, "matrix", frozen)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class ConstraintReport:
    """Violation magnitudes of the three seed constraints.

    psd_margin is the smallest eigenvalue (negative = PSD violation);
    norm_violation the largest deviation from Tr[T_ij Xi] = d * delta_ij;
    comm_violation the largest commutator norm against the stabilizer model.
    """

    psd_margin: float
    norm_violation: float
    comm_violation: float
    valid: bool
    tolerance: float


def check_seed(seed: Seed, tol: float = 1e-8) -> ConstraintReport:
    """Evaluate the three defining constraints of a seed candidate.

    ``valid`` is True when psd_margin >= -tol and the other violations are
    at most tol.  The input must be Hermitian; that is a type error, not a
    reported violation.
    """
    xi = require_hermitian(seed.matrix)
    psd_margin = float(np.linalg.eigvalsh(xi)[0])

    norm_violation = 0.0
    for cls in seed.g_dec.classes:
        m = cls.multiplicity
        d = cls.dim_irrep
        for i in range(m):
            for j in range(m):
                val = np.trace(cls.intertwiners[i, j] @ xi)
                target = d if i == j else 0.0
                norm_violation = max(norm_violation, abs(val - target))

    comm_violation = 0.0
    for mat in seed.g0_dec.model.constraint_matrices():
        comm = xi @ mat - mat @ xi
        comm_violation = max(comm_violation, float(np.linalg.norm(comm, 2)))

    valid = (psd_margin >= -tol and norm_violation <= tol and comm_violation <= tol)
    return ConstraintReport(psd_margin=psd_margin, norm_violation=norm_violation,
                            comm_violation=comm_violation, valid=valid, tolerance=tol)


@dataclass(frozen=True)
class SeedBlocks:
    """Blockwise form of a stabilizer-commuting seed.

    One Hermitian PSD factor per stabilizer class (on that class's
    multiplicity space), in the decomposition's block order; ``ranks`` are
    the tolerant ranks of the factors and ``residual`` is the reassembly
    error of the block decomposition.
    """

    labels: tuple
    factors: tuple
    ranks: tuple
    residual: float


def block_form(seed: Seed, tol: float = 1e-8, rank_cut: float | None = None) -> SeedBlocks:
    """Extract the per-block factors X of a seed.

    On each stabilizer class the seed must act as identity (x) X†X; the
    factor returned is the Hermitian PSD square root of the multiplicity
    block.  A reassembly residual beyond ``tol`` means the seed does not
    commute with the stabilizer and is an error.

    ``rank_cut`` controls the tolerant rank of the factors (package default
    when omitted).
    """
    xi = require_hermitian(seed.matrix)
    labels, factors, ranks = [], [], []
    rebuilt = np.zeros_like(xi)
    for cls in seed.g0_dec.classes:
        d, m = cls.dim_irrep, cls.multiplicity
        w = np.array(cls.isometry)
        block = w.conj().T @ xi @ w
        mult_block = partial_trace_left(block, d, m) / d
        mult_block = 0.5 * (mult_block + mult_block.conj().T)
        factor = hermitian_sqrt(mult_block)
        labels.append(cls.label)
        factors.append(factor)
        ranks.append(rank_tol(factor, rank_cut))
        rebuilt += w @ np.kron(np.eye(d), mult_block) @ w.conj().T
    residual = float(np.max(np.abs(xi - rebuilt)))
    if residual > tol:
        raise ValueError(
            f"block extraction residual {residual:.3e} exceeds {tol:.1e}; "
            f"the seed does not lie in the stabilizer commutant")
    return SeedBlocks(labels=tuple(labels), factors=tuple(factors),
                      ranks=tuple(ranks), residual=residual)


def seed_from_blocks(blocks: SeedBlocks, g0_dec: IsotypicDecomposition) -> np.ndarray:
    """Assemble the seed matrix sum_nu W_nu (I (x) X†X) W_nu† from factors."""
    if len(blocks.factors) != len(g0_dec.classes):
        raise ValueError("factor count does not match the stabilizer classes")
    out = np.zeros((g0_dec.dim, g0_dec.dim), dtype=complex)
    for cls, factor in zip(g0_dec.classes, blocks.factors):
        x = as_matrix(factor)
        if x.shape[0] != cls.multiplicity:
            raise ValueError(f"factor for class {cls.label} has dimension {x.shape[0]}, "
                             f"expected multiplicity {cls.multiplicity}")
        w = np.array(cls.isometry)
        out += w @ np.kron(np.eye(cls.dim_irrep), x.conj().T @ x) @ w.conj().T
    return 0.5 * (out + out.conj().T)


def povm_density(seed: Seed, point) -> np.ndarray:
    """Measurement density at a group point: U_g Xi U_g†."""
    u = seed.g_dec.model.unitary(point)
    return u @ seed.matrix @ u.conj().T


def born_probability(state, seed: Seed, point, tol: float = 1e-8) -> float:
    """Outcome density Tr[rho U_g Xi U_g†] for a state rho.

    The state must be Hermitian, PSD within ``tol`` and unit trace within
    ``tol``.
    """
    rho = require_hermitian(state)
    if rho.shape != seed.matrix.shape:
        raise ValueError("state dimension does not match the seed")
    low = float(np.linalg.eigvalsh(rho)[0])
    tr = float(np.trace(rho).real)
    if low < -tol or abs(tr - 1.0) > tol:
        raise ValueError(f"invalid state: min eigenvalue {low:.3e}, trace {tr:.6f}")
    return float(np.trace(rho @ povm_density(seed, point)).real)

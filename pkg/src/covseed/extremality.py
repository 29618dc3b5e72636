"""Extremality certificates for covariant measurement seeds.

A valid seed is an extremal point of the convex seed set exactly when it
admits no nonzero admissible perturbation: a Hermitian direction Theta,
supported inside the seed's support, commuting with the stabilizer, with
Tr[T_ij Theta] = 0 against every intertwiner of the group decomposition.
Three equivalent decision routes are provided:

* ``is_extremal`` compresses the intertwiners through the seed's block
  factors and compares the rank of the resulting Gram matrix with the
  dimension of the seed's blockwise operator space (the span test);
* ``perturbation_space`` solves for the admissible directions in the
  blockwise parametrization and counts them;
* ``minimal_support_check`` parametrizes Hermitian directions on the
  seed's support directly and imposes the stabilizer commutation and trace
  constraints as a raw nullspace problem.

``convex_split`` turns a witness direction into an explicit proper convex
decomposition of a non-extremal seed, and ``rank_bounds`` reports the
multiplicity-based rank bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .covariant import Seed, SeedBlocks, block_form
from .numerics import (
    hs_norm,
    partial_trace_left,
    require_hermitian,
    resolve_tol,
    support_basis,
)

__all__ = [
    "PerturbationSpace",
    "ExtremalityCertificate",
    "RankBoundReport",
    "ConvexSplit",
    "lemma_feasibility",
    "perturbation_space",
    "is_extremal",
    "minimal_support_check",
    "convex_split",
    "rank_bounds",
]


def lemma_feasibility(psd_matrix, direction, tol: float | None = None) -> tuple[bool, float]:
    """Support containment test with a guaranteed perturbation radius.

    ``psd_matrix + t * direction`` stays PSD for small |t| in both directions
    exactly when the direction's support lies inside the matrix's support.
    Returns ``(feasible, epsilon)`` where epsilon = (smallest nonzero
    eigenvalue) / (direction operator norm); epsilon is guaranteed feasible
    and is +inf for a numerically zero direction, 0.0 when infeasible.
    """
    t = resolve_tol(tol)
    a = require_hermitian(psd_matrix)
    theta = require_hermitian(direction)
    w, v = np.linalg.eigh(a)
    top = w[-1] if w.size else 0.0
    if top <= 0.0:
        # zero matrix: only the zero direction is feasible
        feasible = hs_norm(theta) <= t
        return feasible, (math.inf if feasible else 0.0)
    keep = w > t * top
    p_in = v[:, keep]
    p_out = v[:, ~keep]
    theta_norm = float(np.linalg.norm(theta, 2))
    scale = t * max(1.0, theta_norm)
    off = float(np.linalg.norm(p_out.conj().T @ theta @ p_out, 2)) if p_out.shape[1] else 0.0
    cross = float(np.linalg.norm(p_out.conj().T @ theta @ p_in, 2)) if p_out.shape[1] else 0.0
    if off + cross > scale:
        return False, 0.0
    if theta_norm <= t:
        return True, math.inf
    lam_min_nonzero = float(np.min(w[keep]))
    return True, lam_min_nonzero / theta_norm


@dataclass(frozen=True)
class PerturbationSpace:
    """Admissible perturbation directions of a seed (blockwise route)."""

    basis: tuple
    dimension: int


@dataclass(frozen=True)
class ExtremalityCertificate:
    """Outcome of the span (Gram-rank) extremality test.

    ``span_operators`` are the compressed intertwiner images, one
    block-diagonal operator on the direct sum of the seed's block supports
    per (class, i, j); ``span_labels`` names them.  ``witness`` is a
    normalized admissible perturbation direction when not extremal.
    """

    extremal: bool
    gram_rank: int
    block_dim: int
    span_operators: tuple
    span_labels: tuple
    witness: np.ndarray | None


@dataclass(frozen=True)
class RankBoundReport:
    """Multiplicity-based rank bounds for seeds of a scenario."""

    lower_bound: int
    budget_lhs: int
    budget_rhs: int
    budget_ok: bool


@dataclass(frozen=True)
class ConvexSplit:
    """Proper convex decomposition seed = weight * plus + (1-weight) * minus."""

    plus: Seed
    minus: Seed
    weight: float


def _hermitian_unit_basis(r: int) -> list[np.ndarray]:
    """HS-orthonormal basis of r x r Hermitian matrices (r^2 elements)."""
    out = []
    for k in range(r):
        e = np.zeros((r, r), dtype=complex)
        e[k, k] = 1.0
        out.append(e)
    inv = 1.0 / np.sqrt(2.0)
    for k in range(r):
        for l in range(k + 1, r):
            e = np.zeros((r, r), dtype=complex)
            e[k, l] = inv
            e[l, k] = inv
            out.append(e)
            e = np.zeros((r, r), dtype=complex)
            e[k, l] = 1j * inv
            e[l, k] = -1j * inv
            out.append(e)
    return out


class _BlockData:
    """Per-stabilizer-class data for the blockwise computations."""

    def __init__(self, cls, factor: np.ndarray, tol: float):
        self.cls = cls
        self.factor = factor
        # rank from the squared factor: the square root amplifies noise
        # (eps -> sqrt(eps)), the square restores the original noise floor
        self.range_basis = support_basis(factor @ factor, tol)  # (m, r)
        self.rank = self.range_basis.shape[1]


def _block_data(seed: Seed, tol: float, blocks: SeedBlocks | None = None) -> list[_BlockData]:
    blocks = blocks if blocks is not None else block_form(seed)
    return [_BlockData(cls, factor, tol)
            for cls, factor in zip(seed.g0_dec.classes, blocks.factors)]


def _compressed_family(seed: Seed, data: list[_BlockData]):
    """Compress every intertwiner through the seed's block factors.

    For each group class mu and index pair (i, j), the compressed image has
    one r_nu x r_nu block per stabilizer class: Q† X S X Q with S the
    partial trace of the intertwiner over the irrep factor.  Returns labels
    and the per-block matrix lists (blocks with zero rank are dropped).
    """
    labels = []
    families = []
    active = [b for b in data if b.rank > 0]
    for g_cls in seed.g_dec.classes:
        m = g_cls.multiplicity
        for i in range(m):
            for j in range(m):
                tij = g_cls.intertwiners[i, j]
                comp = []
                for b in active:
                    d_nu, m_nu = b.cls.dim_irrep, b.cls.multiplicity
                    w = np.array(b.cls.isometry)
                    s = partial_trace_left(w.conj().T @ tij @ w, d_nu, m_nu)
                    f = b.factor @ s @ b.factor  # X Hermitian: X S X
                    comp.append(b.range_basis.conj().T @ f @ b.range_basis)
                labels.append((g_cls.label, i, j))
                families.append(comp)
    return labels, families, active


def _family_vectors(families, active) -> np.ndarray:
    dim = sum(b.rank * b.rank for b in active)
    if not families:
        return np.zeros((0, dim), dtype=complex)
    return np.array([np.concatenate([blk.reshape(-1) for blk in comp]) if comp
                     else np.zeros(0, dtype=complex)
                     for comp in families])


def _assemble_direction(seed: Seed, active, block_mats: list[np.ndarray]) -> np.ndarray:
    """Lift compressed Hermitian block matrices to a full-space direction."""
    n = seed.dim
    out = np.zeros((n, n), dtype=complex)
    for b, a_hat in zip(active, block_mats):
        a_full = b.range_basis @ a_hat @ b.range_basis.conj().T
        core = b.factor @ a_full @ b.factor
        w = np.array(b.cls.isometry)
        out += w @ np.kron(np.eye(b.cls.dim_irrep), core) @ w.conj().T
    return 0.5 * (out + out.conj().T)


def is_extremal(seed: Seed, tol: float | None = None) -> ExtremalityCertificate:
    """Span test: the seed is extremal iff the compressed intertwiner images
    span the full blockwise operator space.

    The decision compares the rank of the Gram matrix of the compressed
    family (complex span) with sum_nu r_nu^2.  When deficient, a witness
    direction is built from a null vector of the family and returned
    normalized to unit Hilbert-Schmidt norm.
    """
    t = resolve_tol(tol)
    data = _block_data(seed, t)
    labels, families, active = _compressed_family(seed, data)
    block_dim = sum(b.rank * b.rank for b in active)
    vecs = _family_vectors(families, active)

    if block_dim == 0:
        return ExtremalityCertificate(extremal=True, gram_rank=0, block_dim=0,
                                      span_operators=(), span_labels=tuple(labels),
                                      witness=None)

    gram = vecs @ vecs.conj().T
    if gram.size:
        ew = np.linalg.eigvalsh(0.5 * (gram + gram.conj().T))
        top = ew[-1] if ew.size else 0.0
        gram_rank = int(np.count_nonzero(ew > t * top)) if top > 0 else 0
    else:
        gram_rank = 0
    extremal = gram_rank == block_dim

    witness = None
    if not extremal:
        u, s, vh = np.linalg.svd(vecs, full_matrices=True)
        null_vec = vh[gram_rank]  # A-coefficients orthogonal to the family
        offset = 0
        block_mats = []
        best = None
        candidates = []
        for b in active:
            r = b.rank
            v = null_vec[offset:offset + r * r].reshape(r, r)
            offset += r * r
            block_mats.append(v)
        for combine in (lambda v: 0.5 * (v + v.conj().T),
                        lambda v: 0.5j * (v - v.conj().T)):
            mats = [combine(v) for v in block_mats]
            size = sum(hs_norm(m) ** 2 for m in mats)
            candidates.append((size, mats))
        candidates.sort(key=lambda c: -c[0])
        _, herm_mats = candidates[0]
        witness = _assemble_direction(seed, active, herm_mats)
        norm = hs_norm(witness)
        if norm > 0:
            witness = witness / norm

    span_ops = tuple(scipy.linalg.block_diag(*comp) if comp else np.zeros((0, 0))
                     for comp in families)
    return ExtremalityCertificate(extremal=extremal, gram_rank=gram_rank,
                                  block_dim=block_dim, span_operators=span_ops,
                                  span_labels=tuple(labels), witness=witness)


def perturbation_space(seed: Seed, tol: float | None = None) -> PerturbationSpace:
    """Admissible perturbations in the blockwise parametrization.

    Directions are Theta = sum_nu W_nu (I (x) X A X) W_nu† with A Hermitian
    on the block factor's range; the trace constraints against the group
    intertwiners become a real linear system whose nullspace is returned as
    full-space Hermitian directions.  Dimension 0 is equivalent to
    extremality.
    """
    t = resolve_tol(tol)
    data = _block_data(seed, t)
    labels, families, active = _compressed_family(seed, data)
    param_bases = [_hermitian_unit_basis(b.rank) for b in active]
    n_params = sum(len(pb) for pb in param_bases)
    if n_params == 0:
        return PerturbationSpace(basis=(), dimension=0)

    rows = []
    for (label, i, j), comp in zip(labels, families):
        if j < i:
            continue  # conjugate-redundant with (j, i)
        row = np.zeros(n_params, dtype=complex)
        col = 0
        for pb, f_blk in zip(param_bases, comp):
            for e in pb:
                row[col] = np.trace(e @ f_blk)
                col += 1
        rows.append(row.real)
        if i != j:
            rows.append(row.imag)
    if rows:
        mat = np.array(rows)
        u, s, vh = np.linalg.svd(mat)
        scale = s[0] if s.size and s[0] > 0 else 1.0
        rank = int(np.count_nonzero(s > t * scale)) if s.size else 0
        null = vh[rank:]
    else:
        null = np.eye(n_params)

    basis = []
    for coeff in null:
        col = 0
        block_mats = []
        for pb in param_bases:
            r = pb[0].shape[0]
            a_hat = np.zeros((r, r), dtype=complex)
            for e in pb:
                a_hat = a_hat + coeff[col] * e
                col += 1
            block_mats.append(a_hat)
        basis.append(_assemble_direction(seed, active, block_mats))
    return PerturbationSpace(basis=tuple(basis), dimension=len(basis))


def minimal_support_check(seed: Seed, tol: float | None = None) -> bool:
    """Support-restricted route: no other valid seed lives on this support.

    Parametrizes Hermitian directions on the seed's support outright and
    imposes stabilizer commutation plus the intertwiner trace constraints
    as one nullspace problem; True iff only the zero direction survives.
    """
    t = resolve_tol(tol)
    xi = require_hermitian(seed.matrix)
    v = support_basis(xi, t)
    r = v.shape[1]
    if r == 0:
        return True
    params = _hermitian_unit_basis(r)
    directions = [v @ e @ v.conj().T for e in params]

    complex_rows = []
    for mat in seed.g0_dec.model.constraint_matrices():
        block = np.array([(d @ mat - mat @ d).reshape(-1) for d in directions]).T
        complex_rows.append(block)
    trace_rows_re = []
    trace_rows_im = []
    for g_cls in seed.g_dec.classes:
        m = g_cls.multiplicity
        for i in range(m):
            for j in range(i, m):
                tij = g_cls.intertwiners[i, j]
                row = np.array([np.trace(tij @ d) for d in directions])
                trace_rows_re.append(row.real)
                if i != j:
                    trace_rows_im.append(row.imag)

    pieces = []
    for block in complex_rows:
        pieces.append(block.real)
        pieces.append(block.imag)
    if trace_rows_re:
        pieces.append(np.array(trace_rows_re))
    if trace_rows_im:
        pieces.append(np.array(trace_rows_im))
    mat = np.vstack(pieces)
    s = np.linalg.svd(mat, compute_uv=False)
    scale = s[0] if s.size and s[0] > 0 else 1.0
    rank = int(np.count_nonzero(s > t * scale)) if s.size else 0
    return (len(params) - rank) == 0


def _min_eig(mat: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(mat)[0])


def _boundary_parameter(xi: np.ndarray, theta: np.ndarray, eps_seed: float,
                        feas_tol: float) -> float:
    """Largest t with xi + t*theta PSD, by bisection to absolute width 1e-12."""
    lo = eps_seed
    if _min_eig(xi + lo * theta) < -feas_tol:
        # the guaranteed radius failed numerically; restart from zero
        lo = 0.0
    hi = max(2.0 * eps_seed, 1e-6)
    grow = 0
    while _min_eig(xi + hi * theta) >= -feas_tol:
        lo = hi
        hi *= 2.0
        grow += 1
        if grow > 200:
            raise RuntimeError("perturbation appears PSD-feasible for unbounded t; "
                               "not an admissible direction")
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if _min_eig(xi + mid * theta) >= -feas_tol:
            lo = mid
        else:
            hi = mid
    return lo


def convex_split(seed: Seed, perturbation, tol: float | None = None) -> ConvexSplit:
    """Split a seed along an admissible perturbation direction.

    Returns seeds zeta± = seed ± t± * perturbation with t± maximal for
    positivity (each zeta hits a new zero eigenvalue, so each has strictly
    smaller rank), and the weight lambda = t-/(t+ + t-) with
    lambda * plus + (1-lambda) * minus recombining to the seed.

    Raises ValueError for a numerically zero direction or one failing the
    admissibility conditions (support containment, stabilizer commutation,
    trace constraints).
    """
    t = resolve_tol(tol)
    xi = require_hermitian(seed.matrix)
    theta = require_hermitian(perturbation)
    scale = max(1.0, float(np.linalg.norm(xi, 2)))
    if hs_norm(theta) <= t * scale:
        raise ValueError("perturbation direction is numerically zero")

    feasible, eps = lemma_feasibility(xi, theta, t)
    if not feasible:
        raise ValueError("perturbation support is not contained in the seed support")
    for mat in seed.g0_dec.model.constraint_matrices():
        if np.max(np.abs(theta @ mat - mat @ theta)) > 1e-7 * scale:
            raise ValueError("perturbation does not commute with the stabilizer")
    for g_cls in seed.g_dec.classes:
        m = g_cls.multiplicity
        for i in range(m):
            for j in range(m):
                if abs(np.trace(g_cls.intertwiners[i, j] @ theta)) > 1e-7 * scale:
                    raise ValueError("perturbation violates the trace constraints")

    feas_tol = 1e-13 * scale
    t_plus = _boundary_parameter(xi, theta, eps, feas_tol)
    t_minus = _boundary_parameter(xi, -theta, eps, feas_tol)
    plus = Seed(xi + t_plus * theta, seed.g_dec, seed.g0_dec)
    minus = Seed(xi - t_minus * theta, seed.g_dec, seed.g0_dec)
    weight = t_minus / (t_plus + t_minus)
    return ConvexSplit(plus=plus, minus=minus, weight=weight)


def rank_bounds(seed: Seed, tol: float | None = None) -> RankBoundReport:
    """Multiplicity rank bounds.

    ``lower_bound`` = max over group classes of ceil(m/d): no valid seed on
    this decomposition has smaller rank.  The budget compares the seed's
    blockwise dimension sum_nu r_nu^2 (lhs) against sum_mu m_mu^2 (rhs);
    extremal seeds always satisfy lhs <= rhs.
    """
    t = resolve_tol(tol)
    lower = max(-(-cls.multiplicity // cls.dim_irrep) for cls in seed.g_dec.classes)
    data = _block_data(seed, t)
    lhs = sum(b.rank * b.rank for b in data)
    rhs = sum(cls.multiplicity ** 2 for cls in seed.g_dec.classes)
    return RankBoundReport(lower_bound=int(lower), budget_lhs=int(lhs),
                           budget_rhs=int(rhs), budget_ok=lhs <= rhs)

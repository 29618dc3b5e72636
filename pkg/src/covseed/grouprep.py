"""Unitary group models and their isotypic (Wedderburn) decomposition.

A group acts on a finite-dimensional Hilbert space through one of three
models: an explicit finite list of unitaries, a one-parameter family
``exp(i * angle * N)`` with Hermitian ``N``, or a connected Lie group given
by Hermitian generators.  All structural computations reduce to commutation
with the model's constraint matrices (elements or generators), so Lie and
one-parameter models are handled without enumerating group elements.

The decomposition splits the space into isotypic blocks ``H_mu (x) M_mu``
(irreducible representation tensor multiplicity), returning for each class
an isometry onto the block, the block projector, and the family of
intertwiners ``T_ij`` that map the j-th irreducible copy onto the i-th.
The intertwiners are partial isometries normalized so that
``T_ij T_ji = T_ii`` and ``Tr[T_ii] = d_mu``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .numerics import (
    DEFAULT_RNG_SEED,
    as_matrix,
    cluster_ranges,
    hermitian_basis_from_span,
    hermitian_eig,
    hs_norm,
    require_hermitian,
    resolve_tol,
)

__all__ = [
    "GroupModel",
    "IsotypicClass",
    "IsotypicDecomposition",
    "DecompositionError",
    "commutant_basis",
    "isotypic_decompose",
    "intertwiner_check",
    "IntertwinerReport",
    "twirl",
    "frame_operator",
]


class DecompositionError(RuntimeError):
    """Raised when the randomized splitting cannot be resolved at tolerance."""


def _frozen(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=complex)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class GroupModel:
    """A unitary group action on C^dim.

    Attributes
    ----------
    kind : str
        One of ``"finite"``, ``"one_parameter"``, ``"lie"``.
    dim : int
        Dimension of the carrier space.
    matrices : tuple of ndarray
        Group elements (finite) or Hermitian generators (one_parameter, lie).
    integer_spectrum : bool or None
        For one-parameter models, whether the generator spectrum is integral
        (period 2*pi); None for other kinds.
    """

    kind: str
    dim: int
    matrices: tuple = ()
    integer_spectrum: bool | None = None

    @staticmethod
    def finite(elements) -> "GroupModel":
        """Model from an explicit list of unitaries, closed under adjoint."""
        els = [as_matrix(u) for u in elements]
        if not els:
            raise ValueError("a finite model needs at least one element")
        n = els[0].shape[0]
        for u in els:
            if u.shape != (n, n):
                raise ValueError("all elements must share one dimension")
            if np.max(np.abs(u.conj().T @ u - np.eye(n))) > 1e-10:
                raise ValueError("finite model element is not unitary within 1e-10")
        for u in els:
            adj = u.conj().T
            if min(np.max(np.abs(adj - v)) for v in els) > 1e-8:
                raise ValueError("finite model element list is not closed under adjoint")
        return GroupModel("finite", n, tuple(_frozen(u) for u in els))

    @staticmethod
    def one_parameter(generator) -> "GroupModel":
        """Model of the family exp(i * angle * N) for Hermitian N."""
        n_mat = require_hermitian(generator)
        w = np.linalg.eigvalsh(n_mat)
        integral = bool(np.all(np.abs(w - np.round(w)) <= 1e-8))
        return GroupModel("one_parameter", n_mat.shape[0], (_frozen(n_mat),), integral)

    @staticmethod
    def lie(generators, dim: int | None = None) -> "GroupModel":
        """Connected group generated by Hermitian matrices.

        An empty generator list (with explicit ``dim``) is the trivial group.
        """
        gens = [require_hermitian(g) for g in generators]
        if gens:
            n = gens[0].shape[0]
            for g in gens:
                if g.shape != (n, n):
                    raise ValueError("all generators must share one dimension")
            if dim is not None and dim != n:
                raise ValueError("dim conflicts with generator shape")
        elif dim is None:
            raise ValueError("empty generator list requires an explicit dim")
        else:
            n = int(dim)
        return GroupModel("lie", n, tuple(_frozen(g) for g in gens))

    @staticmethod
    def trivial(dim: int) -> "GroupModel":
        """The trivial group, modeled as the finite list [identity]."""
        return GroupModel.finite([np.eye(dim)])

    def constraint_matrices(self) -> tuple:
        """Matrices whose commutant equals the commutant of the group."""
        return self.matrices

    def unitary(self, point) -> np.ndarray:
        """Group element at a point of the model's parameter domain.

        finite: integer index into the element list.
        one_parameter: real angle, giving exp(i * angle * N).
        lie: real coefficient vector c, giving exp(i * sum_a c_a K_a).
        """
        if self.kind == "finite":
            idx = int(point)
            if idx != point or not 0 <= idx < len(self.matrices):
                raise ValueError(f"invalid group point {point!r} for a finite model "
                                 f"with {len(self.matrices)} elements")
            return np.array(self.matrices[idx])
        if self.kind == "one_parameter":
            angle = float(point)
            w, v = hermitian_eig(self.matrices[0])
            return (v * np.exp(1j * angle * w)) @ v.conj().T
        coeffs = np.asarray(point, dtype=float)
        if coeffs.shape != (len(self.matrices),):
            raise ValueError(f"invalid group point: expected {len(self.matrices)} "
                             f"real coefficients, got shape {coeffs.shape}")
        if not self.matrices:
            return np.eye(self.dim, dtype=complex)
        h = sum(c * k for c, k in zip(coeffs, self.matrices))
        return scipy.linalg.expm(1j * h)

    def sample_unitaries(self, rng: np.random.Generator, count: int = 3) -> list[np.ndarray]:
        """A few group elements for redundancy checks (all of them if finite)."""
        if self.kind == "finite":
            return [np.array(u) for u in self.matrices]
        if self.kind == "one_parameter":
            return [self.unitary(a) for a in rng.uniform(-np.pi, np.pi, size=count)]
        if not self.matrices:
            return [np.eye(self.dim, dtype=complex)]
        return [self.unitary(rng.uniform(-np.pi, np.pi, size=len(self.matrices)))
                for _ in range(count)]


@dataclass(frozen=True)
class IsotypicClass:
    """One equivalence class of irreducibles inside a decomposition.

    ``isometry`` maps C^{d*m} (irrep index fastest, i.e. the kron layout
    ``irrep (x) multiplicity``) onto the isotypic block. ``pieces[i]`` is the
    (n, d) isometry onto the i-th irreducible copy, with bases aligned so
    that every copy carries identical representation matrices.
    ``intertwiners[i, j]`` is T_ij = pieces[i] @ pieces[j]†.
    """

    label: str
    dim_irrep: int
    multiplicity: int
    isometry: np.ndarray
    projector: np.ndarray
    pieces: np.ndarray
    intertwiners: np.ndarray


@dataclass(frozen=True)
class IsotypicDecomposition:
    """Isotypic decomposition of a group model's carrier space."""

    model: GroupModel
    dim: int
    classes: tuple
    rng_seed: int
    tolerance: float

    def class_shapes(self) -> list[tuple[int, int]]:
        """(irrep dimension, multiplicity) per class, in block order."""
        return [(c.dim_irrep, c.multiplicity) for c in self.classes]


def commutant_basis(model: GroupModel, tol: float | None = None) -> list[np.ndarray]:
    """Hilbert-Schmidt-orthonormal basis of the commutant algebra.

    The commutant is computed as the joint nullspace of the stacked
    commutator maps B -> [B, M] over the model's constraint matrices.
    With no constraints (trivial Lie model) the full matrix algebra is
    returned as matrix units.
    """
    t = resolve_tol(tol)
    n = model.dim
    mats = model.constraint_matrices()
    if not mats:
        eye = np.eye(n * n, dtype=complex)
        return [eye[k].reshape(n, n) for k in range(n * n)]
    eye = np.eye(n, dtype=complex)
    blocks = [np.kron(eye, m.T) - np.kron(m, eye) for m in mats]
    stacked = np.vstack(blocks)
    u, s, vh = np.linalg.svd(stacked, full_matrices=False)
    # anchor the rank cut to the constraint scale, not to s[0]: a map that is
    # zero up to floating-point noise must count as rank 0
    anchor = max(float(np.linalg.norm(m, 2)) for m in mats)
    scale = max(float(s[0]) if s.size else 0.0, anchor)
    rank = int(np.count_nonzero(s > t * scale)) if scale > 0.0 else 0
    null_vecs = vh[rank:].conj()
    return [vec.reshape(n, n) for vec in null_vecs]


def _center_coefficient_basis(basis: list[np.ndarray], tol: float) -> list[np.ndarray]:
    """Basis of the center of the algebra spanned by ``basis``.

    Elements Z = sum_i a_i B_i with [Z, B_j] = 0 for every j; solved as a
    nullspace over the coefficient vector a.
    """
    c = len(basis)
    n = basis[0].shape[0]
    rows = []
    for bj in basis:
        block = np.zeros((n * n, c), dtype=complex)
        for i, bi in enumerate(basis):
            block[:, i] = (bi @ bj - bj @ bi).reshape(-1)
        rows.append(block)
    stacked = np.vstack(rows)
    u, s, vh = np.linalg.svd(stacked, full_matrices=False)
    # basis elements are HS-normalized, so genuine noncommutativity shows up
    # at scale O(1); an abelian algebra gives pure noise, which must not count
    scale = max(float(s[0]) if s.size else 0.0, 1.0)
    rank = int(np.count_nonzero(s > tol * scale))
    coeffs = vh[rank:].conj()
    out = []
    for a in coeffs:
        z = sum(ai * bi for ai, bi in zip(a, basis))
        out.append(z)
    return out


def _random_hermitian_combination(herm_basis: list[np.ndarray], rng: np.random.Generator) -> np.ndarray:
    coeffs = rng.standard_normal(len(herm_basis))
    return sum(c * h for c, h in zip(coeffs, herm_basis))


def _eigencluster_isometries(h: np.ndarray, expected: int | None, what: str,
                             ) -> tuple[list[np.ndarray], float]:
    """Split the space into eigenvalue-cluster subspaces of a Hermitian matrix.

    Returns isometries (orthonormal eigenvector groups) and the smallest gap
    between adjacent clusters, for diagnostics.  ``expected`` is the cluster
    count demanded by the algebra; a mismatch is reported by the caller.
    """
    w, v = hermitian_eig(h)
    ranges = cluster_ranges(w)
    gaps = [w[b] - w[b - 1] for (_, b) in ranges[:-1]] if len(ranges) > 1 else []
    min_gap = float(min(gaps)) if gaps else float("inf")
    isos = [v[:, a:b] for (a, b) in ranges]
    if expected is not None and len(isos) != expected:
        raise DecompositionError(
            f"eigenvalue clustering of the {what} produced {len(isos)} clusters "
            f"where {expected} were expected (smallest inter-cluster gap {min_gap:.3e}); "
            f"the random probe did not separate the blocks at this tolerance")
    return isos, min_gap


def _span_rank(mats: list[np.ndarray], tol: float) -> int:
    stack = np.array([m.reshape(-1) for m in mats])
    s = np.linalg.svd(stack, compute_uv=False)
    if s.size == 0 or s[0] <= 0.0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))


def _solve_intertwiner(mats_a: list[np.ndarray], mats_b: list[np.ndarray],
                       tol: float) -> np.ndarray:
    """Unitary C with mats_a[k] @ C = C @ mats_b[k] for all k.

    The two lists are restrictions of the model's constraint matrices to two
    irreducible pieces.  Equivalence of irreducibles makes the solution space
    one-dimensional with an invertible (hence scalable to unitary) solution;
    anything else is reported as a splitting failure.
    """
    d = mats_a[0].shape[0]
    eye = np.eye(d, dtype=complex)
    if mats_a:
        blocks = [np.kron(a, eye) - np.kron(eye, b.T) for a, b in zip(mats_a, mats_b)]
        stacked = np.vstack(blocks)
        u, s, vh = np.linalg.svd(stacked, full_matrices=False)
        # anchored to the restriction scale: pieces whose restricted matrices
        # are zero up to noise (trivial characters) intertwine freely
        anchor = max(float(np.linalg.norm(m, 2))
                     for m in list(mats_a) + list(mats_b))
        scale = max(float(s[0]) if s.size else 0.0, anchor)
        rank = int(np.count_nonzero(s > tol * scale)) if scale > 0.0 else 0
        null_dim = d * d - rank
        if null_dim != 1:
            raise DecompositionError(
                f"intertwiner equation has solution space of dimension {null_dim}, "
                f"expected 1; irreducible pieces are not cleanly equivalent at tolerance")
        c = vh[rank:].conj()[0].reshape(d, d)
    else:
        if d != 1:
            raise DecompositionError("constraint-free model with d > 1 piece")
        c = eye.copy()
    # scale to unitary: C†C = c * I for an intertwiner between unitary irreps
    norm = np.sqrt(np.trace(c.conj().T @ c).real / d)
    if norm <= 0:
        raise DecompositionError("degenerate intertwiner solution")
    c = c / norm
    defect = np.max(np.abs(c.conj().T @ c - eye))
    if defect > 1e-7:
        raise DecompositionError(f"intertwiner solution is not unitary (defect {defect:.3e})")
    return c


def isotypic_decompose(model: GroupModel, tol: float | None = None,
                       rng_seed: int = DEFAULT_RNG_SEED) -> IsotypicDecomposition:
    """Decompose the carrier space into isotypic blocks.

    Strategy: compute the commutant, split the space by the eigenvalue
    clusters of a random Hermitian element of the commutant's *center*
    (isotypic blocks), then split each block by a random Hermitian element
    of the restricted commutant (irreducible pieces), and align the pieces
    with unitary intertwiners so every copy carries the same representation
    matrices.  Randomness is seeded and recorded; failed splits are retried
    with fresh draws before reporting a DecompositionError.

    Parameters
    ----------
    model : GroupModel
    tol : float, optional
        Rank/containment tolerance (package default when omitted).
    rng_seed : int
        Seed for the random probes, recorded on the result.
    """
    t = resolve_tol(tol)
    rng = np.random.default_rng(rng_seed)
    n = model.dim
    basis = commutant_basis(model, t)
    if not basis:
        raise DecompositionError("empty commutant; the identity should always commute")
    herm = hermitian_basis_from_span(basis, t)
    center = _center_coefficient_basis(basis, t)
    center_herm = hermitian_basis_from_span(center, t)
    n_classes = len(center)

    block_isos = _retry_split(
        lambda: _eigencluster_isometries(
            _random_hermitian_combination(center_herm, rng), n_classes, "commutant center"),
        attempts=5)

    constraint = [np.array(m) for m in model.constraint_matrices()]
    classes = []
    for b_index, v_block in enumerate(block_isos):
        big = v_block.shape[1]
        restricted = [v_block.conj().T @ b @ v_block for b in basis]
        m_sq = _span_rank(restricted, t)
        mult = int(round(np.sqrt(m_sq)))
        if mult * mult != m_sq:
            raise DecompositionError(
                f"restricted commutant of block {b_index} has dimension {m_sq}, "
                f"not a perfect square")
        if big % mult != 0:
            raise DecompositionError(
                f"block {b_index} of dimension {big} is not divisible by multiplicity {mult}")
        d_irr = big // mult

        if mult == 1:
            pieces = [v_block]
        else:
            herm_restricted = hermitian_basis_from_span(restricted, t)

            def split_block():
                probe = _random_hermitian_combination(herm_restricted, rng)
                isos, gap = _eigencluster_isometries(probe, mult, f"block {b_index} commutant")
                if any(iso.shape[1] != d_irr for iso in isos):
                    raise DecompositionError(
                        f"block {b_index} split into unequal pieces "
                        f"{[iso.shape[1] for iso in isos]} (gap {gap:.3e})")
                return [v_block @ iso for iso in isos], gap

            pieces, _ = _retry_split(split_block, attempts=5, wrap=False)
            ref = pieces[0]
            ref_mats = [ref.conj().T @ m @ ref for m in constraint]
            aligned = [ref]
            for piece in pieces[1:]:
                own_mats = [piece.conj().T @ m @ piece for m in constraint]
                c = _solve_intertwiner(own_mats, ref_mats, t)
                aligned.append(piece @ c)
            pieces = aligned

        piece_arr = np.array(pieces)  # (m, n, d)
        isometry = np.zeros((n, d_irr * mult), dtype=complex)
        for i, y in enumerate(pieces):
            for a in range(d_irr):
                isometry[:, a * mult + i] = y[:, a]
        projector = isometry @ isometry.conj().T
        inter = np.empty((mult, mult, n, n), dtype=complex)
        for i in range(mult):
            for j in range(mult):
                inter[i, j] = pieces[i] @ pieces[j].conj().T
        classes.append(IsotypicClass(
            label=f"c{b_index}",
            dim_irrep=d_irr,
            multiplicity=mult,
            isometry=_frozen(isometry),
            projector=_frozen(0.5 * (projector + projector.conj().T)),
            pieces=_frozen(piece_arr),
            intertwiners=_frozen(inter),
        ))

    total = sum(c.dim_irrep * c.multiplicity for c in classes)
    if total != n:
        raise DecompositionError(f"block dimensions sum to {total}, expected {n}")
    completeness = sum(np.array(c.projector) for c in classes) - np.eye(n)
    if np.max(np.abs(completeness)) > 1e-8:
        raise DecompositionError("isotypic projectors do not resolve the identity")
    return IsotypicDecomposition(model=model, dim=n, classes=tuple(classes),
                                 rng_seed=rng_seed, tolerance=t)


def _retry_split(attempt, attempts: int, wrap: bool = True):
    last = None
    for k in range(attempts):
        try:
            result = attempt()
            if k > 0:
                warnings.warn(f"randomized split succeeded after {k + 1} draws", stacklevel=3)
            return result[0] if wrap else result
        except DecompositionError as exc:
            last = exc
    raise last


@dataclass(frozen=True)
class IntertwinerReport:
    """Violation magnitudes for a decomposition's intertwiner family."""

    invariance: float
    composition: float
    projector_defect: float
    completeness: float

    @property
    def max_violation(self) -> float:
        return max(self.invariance, self.composition, self.projector_defect,
                   self.completeness)


def intertwiner_check(dec: IsotypicDecomposition, model: GroupModel | None = None,
                      rng_seed: int = DEFAULT_RNG_SEED) -> IntertwinerReport:
    """Verify the defining identities of the intertwiner family.

    Checks invariance U T_ij U† = T_ij on the model's constraint matrices
    (commutators for generator models) plus a few sampled group elements,
    partial-isometry composition T_ij T_jk = T_ik, projector structure of
    the T_ii, and completeness of the block projectors.
    """
    model = model if model is not None else dec.model
    rng = np.random.default_rng(rng_seed)
    n = dec.dim
    invariance = 0.0
    composition = 0.0
    projector_defect = 0.0

    sampled = model.sample_unitaries(rng)
    for cls in dec.classes:
        m = cls.multiplicity
        t_fam = cls.intertwiners
        for i in range(m):
            for j in range(m):
                tij = t_fam[i, j]
                if model.kind == "finite":
                    for u in model.matrices:
                        invariance = max(invariance, float(np.max(np.abs(u @ tij @ u.conj().T - tij))))
                else:
                    for k_mat in model.matrices:
                        invariance = max(invariance, float(np.max(np.abs(k_mat @ tij - tij @ k_mat))))
                    for u in sampled:
                        invariance = max(invariance, float(np.max(np.abs(u @ tij @ u.conj().T - tij))))
                for k in range(m):
                    composition = max(composition, float(np.max(np.abs(
                        t_fam[i, j] @ t_fam[j, k] - t_fam[i, k]))))
                hermit = np.max(np.abs(t_fam[i, j].conj().T - t_fam[j, i]))
                projector_defect = max(projector_defect, float(hermit))
            tii = t_fam[i, i]
            projector_defect = max(projector_defect, float(np.max(np.abs(tii @ tii - tii))))
            projector_defect = max(projector_defect,
                                   abs(float(np.trace(tii).real) - cls.dim_irrep))
    total = sum(np.array(c.projector) for c in dec.classes) - np.eye(n)
    completeness = float(np.max(np.abs(total)))
    return IntertwinerReport(invariance=invariance, composition=composition,
                             projector_defect=projector_defect, completeness=completeness)


def twirl(op, dec: IsotypicDecomposition) -> np.ndarray:
    """Group average of an operator, via the intertwiner expansion.

    The average equals the orthogonal projection onto the commutant:
    sum over classes and index pairs of Tr[T_ji O] / d * T_ij.  For finite
    models this coincides with the explicit uniform element average when the
    element list is the full group (for a generating sublist the commutant
    projection is still the correct group average of the generated group).
    """
    o = as_matrix(op)
    if o.shape[0] != dec.dim:
        raise ValueError(f"operator dimension {o.shape[0]} does not match {dec.dim}")
    out = np.zeros_like(o)
    for cls in dec.classes:
        m = cls.multiplicity
        d = cls.dim_irrep
        pieces = np.array(cls.pieces)
        # coeff[i, j] = Tr[T_ji O] = Tr[pieces_i† O pieces_j]
        for i in range(m):
            for j in range(m):
                coeff = np.trace(pieces[i].conj().T @ o @ pieces[j])
                out += (coeff / d) * cls.intertwiners[i, j]
    return out


def frame_operator(op, dec: IsotypicDecomposition) -> np.ndarray:
    """Group average of an operator; equals the identity for any valid seed."""
    return twirl(op, dec)

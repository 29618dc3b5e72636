"""Dense Hermitian linear algebra with explicit tolerance policy.

Every yes/no question asked elsewhere in this package ("is this zero",
"what is the rank", "is this support contained in that one") is a
floating-point decision.  This module centralizes those decisions so that
the decision procedures built on top of them are comparable: one default
tolerance, overridable per call, and one eigenvalue-clustering rule.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "DEFAULT_TOL",
    "DEFAULT_RNG_SEED",
    "CLUSTER_RATIO",
    "as_matrix",
    "require_hermitian",
    "hermitian_eig",
    "rank_tol",
    "psd_project",
    "hermitian_sqrt",
    "hs_inner",
    "hs_norm",
    "cluster_ranges",
    "support_basis",
    "partial_trace_left",
    "hermitian_basis_from_span",
]

#: Default tolerance for every "equals zero" / containment / rank decision.
DEFAULT_TOL = 1e-9

#: Default seed for all randomized choices (reported alongside results).
DEFAULT_RNG_SEED = 0xC0FFEE

#: Eigenvalues closer than CLUSTER_RATIO * (spectral range) belong to one cluster.
CLUSTER_RATIO = 1e-7


def resolve_tol(tol: float | None) -> float:
    """Substitute the package default when ``tol`` is None."""
    if tol is None:
        return DEFAULT_TOL
    if tol <= 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    return float(tol)


def as_matrix(a) -> np.ndarray:
    """Coerce to a square complex matrix.

    Raises
    ------
    ValueError
        If the input is not two-dimensional and square.
    """
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m


def hermiticity_defect(a: np.ndarray) -> float:
    """Max entrywise deviation of ``a`` from its conjugate transpose."""
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


def require_hermitian(a, tol: float = 1e-10) -> np.ndarray:
    """Validate Hermiticity and return the symmetrized matrix.

    The defect is measured relative to max(1, largest entry magnitude), so
    the check scales with the operator rather than with machine units.
    """
    m = as_matrix(a)
    scale = max(1.0, float(np.max(np.abs(m))) if m.size else 0.0)
    defect = hermiticity_defect(m)
    if defect > tol * scale:
        raise ValueError(f"matrix is not Hermitian: defect {defect:.3e} exceeds {tol:.1e} * {scale:.3e}")
    return 0.5 * (m + m.conj().T)


def hermitian_eig(a, tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Parameters
    ----------
    a : array_like
        Square matrix, Hermitian within ``tol`` (relative).
    tol : float
        Hermiticity tolerance.

    Returns
    -------
    w : ndarray
        Real eigenvalues in ascending order.
    v : ndarray
        Unitary matrix of eigenvectors, columns matching ``w``.
    """
    m = require_hermitian(a, tol)
    w, v = np.linalg.eigh(m)
    return w, v


def rank_tol(a, tol: float | None = None) -> int:
    """Numerical rank: count of singular values above tol * scale.

    The scale is max(largest singular value, 1), so matrices that are zero
    up to floating-point noise count as rank 0.  Package quantities are
    normalized to order-one scales (unit traces per class, unit diagonals),
    so the absolute anchor is meaningful; rescale first for tiny inputs.
    """
    t = resolve_tol(tol)
    m = np.asarray(a, dtype=complex)
    if m.size == 0:
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    return int(np.count_nonzero(s > t * max(float(s[0]), 1.0)))


def psd_project(a, tol: float = 1e-10) -> np.ndarray:
    """Nearest (Frobenius) positive semidefinite matrix to ``a``.

    Clips negative eigenvalues of the symmetrized input to zero.
    """
    w, v = hermitian_eig(a, tol)
    w = np.clip(w, 0.0, None)
    out = (v * w) @ v.conj().T
    return 0.5 * (out + out.conj().T)


def hermitian_sqrt(a, tol: float = 1e-10) -> np.ndarray:
    """Hermitian PSD square root of a PSD matrix.

    Eigenvalues in [-1e-10, 0) are treated as zero; anything more negative
    is an error, since the square root would not exist.
    """
    w, v = hermitian_eig(a, tol)
    if w.size and w[0] < -1e-10:
        raise ValueError(f"matrix has eigenvalue {w[0]:.3e} < -1e-10; no PSD square root")
    w = np.sqrt(np.clip(w, 0.0, None))
    out = (v * w) @ v.conj().T
    return 0.5 * (out + out.conj().T)


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt inner product Tr[a† b]."""
    ma = np.asarray(a, dtype=complex)
    mb = np.asarray(b, dtype=complex)
    if ma.shape != mb.shape:
        raise ValueError(f"shape mismatch: {ma.shape} vs {mb.shape}")
    return complex(np.vdot(ma, mb))


def hs_norm(a) -> float:
    """Hilbert-Schmidt (Frobenius) norm."""
    return float(np.linalg.norm(np.asarray(a, dtype=complex)))


def cluster_ranges(values: np.ndarray, ratio: float = CLUSTER_RATIO) -> list[tuple[int, int]]:
    """Group an ascending real array into clusters separated by spectral gaps.

    Two neighbours belong to the same cluster when their gap is at most
    ``ratio`` times the spectral scale (the larger of the range and the
    largest magnitude, so an all-equal spectrum with floating-point noise
    stays one cluster).  Returns half-open index ranges ``(start, stop)``.
    """
    vals = np.asarray(values, dtype=float)
    n = vals.size
    if n == 0:
        return []
    span = float(vals[-1] - vals[0])
    scale = max(span, float(np.max(np.abs(vals))))
    if scale <= 0.0:
        return [(0, n)]
    threshold = ratio * scale
    ranges = []
    start = 0
    for i in range(1, n):
        if vals[i] - vals[i - 1] > threshold:
            ranges.append((start, i))
            start = i
    ranges.append((start, n))
    return ranges


def support_basis(a, tol: float | None = None) -> np.ndarray:
    """Orthonormal basis (columns) of the support of a PSD Hermitian matrix.

    Support = span of eigenvectors whose eigenvalue exceeds
    tol * max(largest eigenvalue, 1); the absolute anchor makes a
    numerically-zero matrix have empty support (see ``rank_tol``).
    Returns an (n, r) array; r may be zero.
    """
    t = resolve_tol(tol)
    w, v = hermitian_eig(a)
    if w.size == 0 or w[-1] <= 0.0:
        return v[:, :0]
    keep = w > t * max(float(w[-1]), 1.0)
    return v[:, keep]


def partial_trace_left(block: np.ndarray, d: int, m: int) -> np.ndarray:
    """Trace out the leading d-dimensional tensor factor of a (d*m, d*m) matrix."""
    b = np.asarray(block, dtype=complex)
    if b.shape != (d * m, d * m):
        raise ValueError(f"expected shape {(d * m, d * m)}, got {b.shape}")
    return np.einsum("aiaj->ij", b.reshape(d, m, d, m))


def _real_vec(h: np.ndarray) -> np.ndarray:
    flat = h.reshape(-1)
    return np.concatenate([flat.real, flat.imag])


def hermitian_basis_from_span(mats: list[np.ndarray], tol: float | None = None) -> list[np.ndarray]:
    """Real-orthonormal Hermitian basis of the Hermitian part of a †-closed span.

    Given matrices whose complex span is closed under the adjoint, returns
    Hermitian matrices orthonormal in the real Hilbert-Schmidt inner product
    that span the Hermitian elements of that span.
    """
    t = resolve_tol(tol)
    if not mats:
        return []
    n = mats[0].shape[0]
    rows = []
    for b in mats:
        rows.append(_real_vec(0.5 * (b + b.conj().T)))
        rows.append(_real_vec(0.5j * (b - b.conj().T)))
    stack = np.array(rows)
    u, s, vh = np.linalg.svd(stack, full_matrices=False)
    if s.size == 0 or s[0] <= 0.0:
        return []
    rank = int(np.count_nonzero(s > t * s[0]))
    out = []
    for k in range(rank):
        vec = vh[k]
        h = (vec[: n * n] + 1j * vec[n * n:]).reshape(n, n)
        out.append(0.5 * (h + h.conj().T))
    return out

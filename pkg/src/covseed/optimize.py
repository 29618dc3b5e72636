"""Likelihood-type figures of merit over the convex seed set.

The likelihood of a state under a seed is Tr[rho Xi].  Group-averaged
figures of merit with an invariant weight reduce to a likelihood through
the weighted-average map M: F = k * L_{M(rho)}[Xi] with k the weight's
group average, so one optimizer covers both.

``optimize_likelihood`` runs projected gradient ascent inside the real
coordinate space of the stabilizer commutant (so the commutation constraint
holds by construction), projecting after each step onto the intersection of
the PSD cone and the trace-normalization affine set with Dykstra's
alternating scheme.  After convergence the spectral structure of rho is
analyzed: when rho is a scaled support projector plus an orthogonal rest
with a strict spectral gap, the closed-form optimum value lambda_top * dim
serves as an optimality certificate, and uniqueness follows when the
optimizer's seed is extremal with support equal to the projector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .covariant import Seed, check_seed
from .extremality import is_extremal
from .grouprep import IsotypicDecomposition, commutant_basis, twirl
from .numerics import (
    cluster_ranges,
    hermitian_basis_from_span,
    hermitian_eig,
    hs_norm,
    psd_project,
    require_hermitian,
    resolve_tol,
    support_basis,
)

__all__ = [
    "FigureOfMerit",
    "OptimizationResult",
    "ConvergenceError",
    "likelihood",
    "merit_normalization",
    "ml_map",
    "average_figure_of_merit",
    "optimize_likelihood",
    "project_to_seed_set",
    "unique_optimum_certificate",
    "stability_threshold",
    "QUADRATURE_NODES",
]

#: Nodes of the periodic trapezoid rule for one-parameter group averages.
QUADRATURE_NODES = 4096


class ConvergenceError(RuntimeError):
    """Raised when an iterative routine exhausts its budget far from a fixed point."""


@dataclass(frozen=True)
class FigureOfMerit:
    """Figure of merit: plain likelihood or a weighted group average.

    kind="delta_likelihood" is the likelihood itself.  kind="weighted"
    carries a nonnegative weight function on group points (index for finite
    models, angle for one-parameter models, coefficient vector for Lie
    models, where only constant weights are meaningful).
    """

    kind: str
    weight: Callable | None = None

    def __post_init__(self):
        if self.kind not in ("delta_likelihood", "weighted"):
            raise ValueError(f"unknown figure-of-merit kind {self.kind!r}")
        if self.kind == "weighted" and self.weight is None:
            raise ValueError("weighted figure of merit requires a weight function")


def _validate_state(state, dim: int, tol: float = 1e-8) -> np.ndarray:
    rho = require_hermitian(state)
    if rho.shape[0] != dim:
        raise ValueError(f"state dimension {rho.shape[0]} does not match {dim}")
    low = float(np.linalg.eigvalsh(rho)[0])
    tr = float(np.trace(rho).real)
    if low < -tol or abs(tr - 1.0) > tol:
        raise ValueError(f"invalid state: min eigenvalue {low:.3e}, trace {tr:.6f}")
    return rho


def likelihood(state, seed: Seed) -> float:
    """Tr[rho Xi], the likelihood of the state under the seed."""
    rho = _validate_state(state, seed.dim)
    return float(np.trace(rho @ seed.matrix).real)


def _weighted_nodes(fom: FigureOfMerit, dec: IsotypicDecomposition):
    """Group quadrature for a weighted figure of merit.

    Returns (unitaries, haar_weights, weight_values) or None for a Lie
    model with constant weight (handled through the twirl).  Weights are
    validated nonnegative.
    """
    model = dec.model
    if model.kind == "finite":
        unitaries = [np.array(u) for u in model.matrices]
        haar = np.full(len(unitaries), 1.0 / len(unitaries))
        values = np.array([float(fom.weight(t)) for t in range(len(unitaries))])
    elif model.kind == "one_parameter":
        angles = -np.pi + 2.0 * np.pi * np.arange(QUADRATURE_NODES) / QUADRATURE_NODES
        w, v = hermitian_eig(model.matrices[0])
        unitaries = [(v * np.exp(1j * a * w)) @ v.conj().T for a in angles]
        haar = np.full(QUADRATURE_NODES, 1.0 / QUADRATURE_NODES)
        values = np.array([float(fom.weight(a)) for a in angles])
    else:
        rng = np.random.default_rng(0)
        points = [np.zeros(len(model.matrices))] + [
            rng.uniform(-np.pi, np.pi, size=len(model.matrices)) for _ in range(6)]
        vals = [float(fom.weight(p)) for p in points]
        spread = max(vals) - min(vals)
        if spread > 1e-10 * max(1.0, max(abs(v) for v in vals)):
            raise ValueError("nonconstant weights on a Lie model are not supported; "
                             "supply a finite or one-parameter model instead")
        return None, None, vals[0]
    if np.min(values) < -1e-12:
        raise ValueError("figure-of-merit weight takes negative values")
    return unitaries, haar, values


def merit_normalization(fom: FigureOfMerit, dec: IsotypicDecomposition) -> float:
    """Group average k of the weight; errors when k is not positive."""
    if fom.kind != "weighted":
        raise ValueError("normalization is defined for the weighted kind only")
    unitaries, haar, values = _weighted_nodes(fom, dec)
    k = float(values) if unitaries is None else float(np.dot(haar, values))
    if k <= 0.0:
        raise ValueError(f"weight normalization k = {k:.3e} is not positive")
    return k


def ml_map(state, fom: FigureOfMerit, dec: IsotypicDecomposition) -> np.ndarray:
    """Weighted-average map M(rho) = k^{-1} * avg_g f(g) U_g rho U_g†.

    M(rho) is again a state; optimizing the likelihood of M(rho) optimizes
    the weighted figure of merit, up to the factor k.
    """
    if fom.kind != "weighted":
        raise ValueError("ml_map is defined for the weighted kind only")
    rho = _validate_state(state, dec.dim)
    unitaries, haar, values = _weighted_nodes(fom, dec)
    if unitaries is None:
        out = twirl(rho, dec)
    else:
        k = float(np.dot(haar, values))
        if k <= 0.0:
            raise ValueError(f"weight normalization k = {k:.3e} is not positive")
        out = np.zeros_like(rho)
        for u, h, f in zip(unitaries, haar, values):
            if f != 0.0:
                out += (h * f) * (u @ rho @ u.conj().T)
        out /= k
    return 0.5 * (out + out.conj().T)


def average_figure_of_merit(seed: Seed, state, fom: FigureOfMerit) -> float:
    """Group-averaged figure of merit of a seed for a state.

    delta_likelihood: the likelihood itself.  weighted:
    avg_g f(g) Tr[U_g rho U_g† Xi], which equals k * likelihood(ml_map(rho)).
    """
    if fom.kind == "delta_likelihood":
        return likelihood(state, seed)
    rho = _validate_state(state, seed.dim)
    dec = seed.g_dec
    unitaries, haar, values = _weighted_nodes(fom, dec)
    if unitaries is None:
        return float(values) * float(np.trace(twirl(rho, dec) @ seed.matrix).real)
    total = 0.0
    for u, h, f in zip(unitaries, haar, values):
        if f != 0.0:
            total += h * f * float(np.trace(u @ rho @ u.conj().T @ seed.matrix).real)
    return total


class _SeedGeometry:
    """Real coordinates of the stabilizer commutant plus the seed constraints.

    Coordinates are taken against an HS-orthonormal Hermitian basis of the
    stabilizer commutant; the trace-normalization constraints become an
    affine system A x = b in those coordinates.
    """

    def __init__(self, g_dec: IsotypicDecomposition, g0_dec: IsotypicDecomposition,
                 tol: float):
        self.g_dec = g_dec
        self.g0_dec = g0_dec
        self.dim = g_dec.dim
        basis = commutant_basis(g0_dec.model, tol)
        self.herm = hermitian_basis_from_span(basis, tol)
        rows, rhs = [], []
        for cls in g_dec.classes:
            m, d = cls.multiplicity, cls.dim_irrep
            for i in range(m):
                for j in range(i, m):
                    vals = np.array([np.trace(cls.intertwiners[i, j] @ h)
                                     for h in self.herm])
                    rows.append(vals.real)
                    rhs.append(float(d) if i == j else 0.0)
                    if i != j:
                        rows.append(vals.imag)
                        rhs.append(0.0)
        self.a_mat = np.array(rows)
        self.b_vec = np.array(rhs)
        self.a_pinv = np.linalg.pinv(self.a_mat)

    def coords(self, op: np.ndarray) -> np.ndarray:
        return np.array([np.vdot(h, op).real for h in self.herm])

    def lift(self, x: np.ndarray) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for c, h in zip(x, self.herm):
            out += c * h
        return out

    def project_affine(self, x: np.ndarray) -> np.ndarray:
        return x - self.a_pinv @ (self.a_mat @ x - self.b_vec)

    def project_psd(self, x: np.ndarray) -> np.ndarray:
        return self.coords(psd_project(self.lift(x)))

    def dykstra(self, x: np.ndarray, tol: float = 1e-13, max_cycles: int = 600) -> np.ndarray:
        """Project onto {PSD} ∩ {A x = b} by Dykstra's alternating scheme."""
        p = np.zeros_like(x)
        q = np.zeros_like(x)
        y = x
        for _ in range(max_cycles):
            u = self.project_psd(y + p)
            p = y + p - u
            y_new = self.project_affine(u + q)
            q = u + q - y_new
            if np.linalg.norm(y_new - y) < tol * max(1.0, np.linalg.norm(y_new)):
                return y_new
            y = y_new
        return y


@dataclass(frozen=True)
class OptimizationResult:
    """Optimizer output plus the certificate analysis of the input state.

    ``certified_value`` is the closed-form optimum lambda_top * dim when the
    state decomposes as (1-alpha) P/r + alpha sigma with a strict spectral
    gap; ``certified_optimal`` records whether the iterate attained it
    (attainment can genuinely fail when no extremal seed lives on P's
    support, so a mismatch is not a convergence failure).  ``unique`` is the
    uniqueness certificate, ``stability_alpha_max`` the randomization
    threshold 1/(1 + r * q̄) when sigma is present.
    """

    seed: Seed
    value: float
    iterations: int
    converged: bool
    unique: bool
    stability_alpha_max: float | None
    certified_optimal: bool
    certified_value: float | None


def _state_structure(rho: np.ndarray, tol: float):
    """Top eigencluster data: (P basis, r, lambda_top, alpha, q_bar, gap_ok)."""
    w, v = hermitian_eig(rho)
    ranges = cluster_ranges(w)
    a, b = ranges[-1]
    p_basis = v[:, a:b]
    r = b - a
    lam_top = float(np.mean(w[a:b]))
    alpha = 1.0 - lam_top * r
    if a == 0:
        return p_basis, r, lam_top, max(alpha, 0.0), None, True
    rest = w[:a]
    sigma_top = float(rest[-1])
    if alpha <= tol:
        # numerically pure P/r with stray mass below tolerance
        return p_basis, r, lam_top, 0.0, None, True
    q_bar = sigma_top / alpha
    gap_ok = sigma_top < lam_top - tol
    return p_basis, r, lam_top, alpha, q_bar, gap_ok


def optimize_likelihood(state, g_dec: IsotypicDecomposition,
                        g0_dec: IsotypicDecomposition, *,
                        tol: float | None = None, max_iter: int = 10000,
                        step: float | None = None,
                        start: np.ndarray | None = None) -> OptimizationResult:
    """Maximize Tr[rho Xi] over the convex seed set.

    Projected gradient ascent in the stabilizer-commutant coordinates:
    Xi <- Pi_C(Xi + eta * twirl_{G0}(rho)), eta = 1/||rho|| with halving on
    objective decrease, stopping when the step change drops below 1e-9 or
    after ``max_iter`` iterations (non-convergence is reported on the
    result, not raised).  The identity is the default starting point; it is
    always a valid seed.
    """
    t = resolve_tol(tol)
    rho = _validate_state(state, g_dec.dim)
    geom = _SeedGeometry(g_dec, g0_dec, t)
    grad = geom.coords(rho)

    if start is None:
        x = geom.coords(np.eye(g_dec.dim, dtype=complex))
    else:
        x = geom.coords(require_hermitian(start))
    x = geom.dykstra(x)

    eta0 = (step if step is not None
            else 1.0 / max(float(np.linalg.norm(rho, 2)), 1e-12))
    eta = eta0
    value = float(np.dot(x, grad))
    converged = False
    iterations = 0
    step_tol = 1e-9
    for it in range(max_iter):
        iterations = it + 1
        x_new = geom.dykstra(x + eta * grad)
        val_new = float(np.dot(x_new, grad))
        if val_new < value - 1e-12:
            eta *= 0.5
            if eta < eta0 * 2.0 ** -60:
                converged = True
                break
            continue
        delta = float(np.linalg.norm(x_new - x))
        x, value = x_new, val_new
        if delta < step_tol:
            converged = True
            break

    x = geom.dykstra(x, tol=5e-15, max_cycles=5000)
    xi = geom.lift(x)
    xi = 0.5 * (xi + xi.conj().T)
    seed = Seed(xi, g_dec, g0_dec)
    value = float(np.trace(rho @ xi).real)

    p_basis, r, lam_top, alpha, q_bar, gap_ok = _state_structure(rho, t)
    certified_value = None
    certified_optimal = False
    stability = None
    if q_bar is not None:
        stability = 1.0 / (1.0 + r * q_bar)
    if gap_ok:
        certified_value = lam_top * g_dec.dim
        certified_optimal = abs(value - certified_value) <= 1e-8
    unique = False
    if certified_optimal:
        unique = _uniqueness(seed, p_basis, t)
    return OptimizationResult(seed=seed, value=value, iterations=iterations,
                              converged=converged, unique=unique,
                              stability_alpha_max=stability,
                              certified_optimal=certified_optimal,
                              certified_value=certified_value)


def _uniqueness(seed: Seed, p_basis: np.ndarray, tol: float) -> bool:
    """Support of the seed equals the span of p_basis, and the seed is extremal."""
    supp = support_basis(seed.matrix, tol)
    if supp.shape[1] != p_basis.shape[1]:
        return False
    # mutual containment: the cross Gram must be an isometry
    cross = p_basis.conj().T @ supp
    if np.max(np.abs(cross.conj().T @ cross - np.eye(supp.shape[1]))) > 1e-7:
        return False
    return bool(is_extremal(seed, tol).extremal)


def project_to_seed_set(matrix, g_dec: IsotypicDecomposition,
                        g0_dec: IsotypicDecomposition,
                        tol: float | None = None) -> Seed:
    """Nearest valid seed (Hilbert-Schmidt) to a stabilizer-commuting matrix."""
    t = resolve_tol(tol)
    geom = _SeedGeometry(g_dec, g0_dec, t)
    x = geom.coords(require_hermitian(matrix))
    x = geom.dykstra(x, tol=5e-15, max_cycles=5000)
    xi = geom.lift(x)
    return Seed(0.5 * (xi + xi.conj().T), g_dec, g0_dec)


def unique_optimum_certificate(result: OptimizationResult, state,
                               tol: float | None = None) -> bool:
    """Uniqueness certificate for an optimizer result.

    True when the state's top eigenprojector P (with a strict spectral gap
    to the rest) matches the optimum seed's support, the optimum attains the
    closed-form value lambda_top * dim, and the seed is extremal.  False
    otherwise; False is "not certified", not a disproof.
    """
    t = resolve_tol(tol)
    rho = _validate_state(state, result.seed.dim)
    p_basis, r, lam_top, alpha, q_bar, gap_ok = _state_structure(rho, t)
    if not gap_ok:
        return False
    value = float(np.trace(rho @ result.seed.matrix).real)
    if abs(value - lam_top * result.seed.dim) > 1e-8:
        return False
    return _uniqueness(result.seed, p_basis, t)


def stability_threshold(seed: Seed, sigma, tol: float = 1e-8) -> float:
    """Randomization threshold 1/(1 + r * q̄) of the uniqueness certificate.

    ``sigma`` must be a state supported orthogonally to the seed: mixing
    rho = (1-alpha) P/r + alpha sigma keeps the same unique optimum for all
    alpha below the returned threshold.  ``r`` is the seed's support rank
    and q̄ the largest eigenvalue of sigma.
    """
    sig = _validate_state(sigma, seed.dim, tol)
    supp = support_basis(seed.matrix)
    overlap = float(np.linalg.norm(supp.conj().T @ sig @ supp, 2)) if supp.shape[1] else 0.0
    if overlap > tol:
        raise ValueError(f"sigma overlaps the seed support (norm {overlap:.3e})")
    r = supp.shape[1]
    q_bar = float(np.linalg.eigvalsh(sig)[-1])
    return 1.0 / (1.0 + r * q_bar)

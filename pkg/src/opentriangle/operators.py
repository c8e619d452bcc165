"""Spectral core: triangle diagrams, PSD square roots, identity checks.

The central objects are the two-point matrix B, its cube Q = B^3 (the
triangle diagram), the size-resolved family B_n with square roots
S_n = sqrt(B_n), and the chain of identities

    Q(v, w) = sum_n <B_n B 1_v, B 1_w> = sum_n <S_n B 1_v, S_n B 1_w>

whose tail is controlled by Cauchy-Schwarz.  Everything here is a pure
function of dense matrices; products use a fixed reduction order (einsum
without optimization) so repeated runs produce bit-identical reports.

The eigensolver is a hand-rolled cyclic Jacobi iteration rather than a
LAPACK call: it is transparent, has high relative accuracy on the small
eigenvalues that decide PSD verdicts, and is adequate for the matrix sizes
this package deals with.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EigenConvergenceError, NotPositiveSemidefiniteError
from .exact import SizeResolvedFamily
from .graphs import Automorphism, TransitiveGraph

__all__ = [
    "EigenDecomposition",
    "OpenTriangleProfile",
    "SpectralIdentityReport",
    "DecompositionReport",
    "TailBoundReport",
    "commutation_defect",
    "family_roots",
    "is_psd",
    "matmul_fixed",
    "open_triangle_profile",
    "sqrt_psd",
    "symmetric_eigen",
    "tail_bound_check",
    "triangle_diagram",
    "triangle_finiteness_series",
    "triangle_value",
    "verify_decomposition",
    "verify_spectral_identity",
]

JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
PSD_TOL = 1e-9
IDENTITY_TOL = 1e-8
SYMMETRY_TOL = 1e-14


def _frobenius(M: np.ndarray) -> float:
    return float(np.sqrt(np.sum(M * M)))


def check_symmetric(M: np.ndarray, name: str = "matrix") -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be square, got shape {M.shape}")
    if not np.isfinite(M).all():
        raise ValueError(f"{name} has non-finite entries")
    defect = np.abs(M - M.T).max() if M.size else 0.0
    if defect > SYMMETRY_TOL * max(1.0, _frobenius(M)):
        raise ValueError(f"{name} is not symmetric: max |M - M^T| = {defect:.3e}")
    return M


def matmul_fixed(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Dense product with a fixed per-entry reduction order (no BLAS dispatch)."""
    return np.einsum("ij,jk->ik", A, B, optimize=False)


def _dot(x: np.ndarray, y: np.ndarray) -> float:
    return float(np.einsum("i,i->", x, y, optimize=False))


def _matvec(M: np.ndarray, x: np.ndarray) -> np.ndarray:
    return np.einsum("ij,j->i", M, x, optimize=False)


# ----------------------------------------------------------------------
# Triangle diagram
# ----------------------------------------------------------------------


def triangle_diagram(B: np.ndarray) -> np.ndarray:
    """Q = B^3 by two dense multiplications."""
    B = check_symmetric(B, "two-point matrix")
    return matmul_fixed(matmul_fixed(B, B), B)


def triangle_value(B: np.ndarray, v: int) -> float:
    """Q(v, v) = sum_{x,y} B(v,x) B(x,y) B(y,v) without forming all of Q."""
    B = check_symmetric(B, "two-point matrix")
    row = B[v]
    return float(np.einsum("x,xy,y->", row, B, row, optimize=False))


@dataclass(frozen=True)
class OpenTriangleProfile:
    """max_{w outside the radius-R ball around v} Q(v, w), per radius R.

    Radii run from 0 to eccentricity(v) - 1; larger R leave an empty
    complement and are omitted.  Values are nonincreasing in R because the
    maximum ranges over a shrinking set.
    """

    vertex: int
    radii: tuple[int, ...]
    values: tuple[float, ...]

    def as_rows(self):
        return list(zip(self.radii, self.values))


def open_triangle_profile(
    g: TransitiveGraph, Q: np.ndarray, v: int
) -> OpenTriangleProfile:
    dist = g.distance_row(v)
    radii = []
    values = []
    for radius in range(int(dist.max())):
        outside = dist > radius
        radii.append(radius)
        values.append(float(Q[v, outside].max()))
    return OpenTriangleProfile(vertex=v, radii=tuple(radii), values=tuple(values))


# ----------------------------------------------------------------------
# Eigensolver
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class EigenDecomposition:
    """Ascending eigenvalues with matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sweeps: int
    residual: float  # off-diagonal Frobenius mass at termination

    def reconstruct(self) -> np.ndarray:
        V = self.eigenvectors
        return matmul_fixed(V * self.eigenvalues, V.T)


def _offdiag_norm(A: np.ndarray) -> float:
    off = A - np.diag(np.diag(A))
    return _frobenius(off)


def symmetric_eigen(
    M: np.ndarray, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS
) -> EigenDecomposition:
    """Cyclic Jacobi diagonalization of a symmetric matrix.

    Sweeps rotate every upper-triangle pair in row order until the
    off-diagonal Frobenius mass drops below tol * ||M||_F.  Pairs already
    below target/n are skipped, which both saves work and guarantees the
    sweep loop terminates exactly when the target is met.
    """
    M = check_symmetric(M)
    n = M.shape[0]
    A = M.copy()
    V = np.eye(n)
    norm = _frobenius(M)
    target = tol * norm
    pair_eps = target / max(1, n)
    sweeps = 0
    residual = _offdiag_norm(A)
    while residual > target:
        if sweeps >= max_sweeps:
            raise EigenConvergenceError(residual, target, sweeps)
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= pair_eps:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (
                    abs(theta) + math.sqrt(theta * theta + 1.0)
                )
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p = A[:, p].copy()
                col_q = A[:, q].copy()
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                row_p = A[p, :].copy()
                row_q = A[q, :].copy()
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
                A[p, q] = A[q, p] = 0.0
                vec_p = V[:, p].copy()
                vec_q = V[:, q].copy()
                V[:, p] = c * vec_p - s * vec_q
                V[:, q] = s * vec_p + c * vec_q
        sweeps += 1
        residual = _offdiag_norm(A)
    order = np.argsort(np.diag(A), kind="stable")
    return EigenDecomposition(
        eigenvalues=np.diag(A)[order],
        eigenvectors=V[:, order],
        sweeps=sweeps,
        residual=residual,
    )


def is_psd(M: np.ndarray, tol: float = PSD_TOL) -> tuple[bool, float]:
    """Whether lambda_min >= -tol * max(1, ||M||_F); returns the verdict and lambda_min."""
    decomp = symmetric_eigen(M)
    lambda_min = float(decomp.eigenvalues[0])
    return lambda_min >= -tol * max(1.0, _frobenius(np.asarray(M, dtype=float))), lambda_min


def sqrt_psd(M: np.ndarray, tol: float = PSD_TOL) -> np.ndarray:
    """Spectral square root of a PSD matrix.

    Eigenvalues within tol * max(1, ||M||_F) of zero are rounding debris and
    are snapped to exactly zero before taking square roots -- positive debris
    included, because sqrt turns an O(eps) eigenvalue into O(sqrt(eps)) of
    spurious, basis-dependent mass.  Anything below -tolerance is a genuine
    non-PSD input and is refused, so bugs do not silently turn into clamps.
    """
    M = check_symmetric(M)
    decomp = symmetric_eigen(M)
    threshold = tol * max(1.0, _frobenius(M))
    lambda_min = float(decomp.eigenvalues[0])
    if lambda_min < -threshold:
        raise NotPositiveSemidefiniteError(lambda_min, threshold)
    snapped = np.where(np.abs(decomp.eigenvalues) <= threshold, 0.0, decomp.eigenvalues)
    # S = V diag(sqrt(lambda)) V^T written as W W^T with W = V diag(lambda^(1/4)):
    # S[i,j] and S[j,i] are then the same sum in the same order, so S is
    # exactly symmetric.
    W = decomp.eigenvectors * snapped**0.25
    return np.einsum("ik,jk->ij", W, W, optimize=False)


def family_roots(
    family: SizeResolvedFamily, tol: float = PSD_TOL
) -> tuple[np.ndarray, ...]:
    """S_n = sqrt(B_n) for every n, computed once for reuse across checks."""
    return tuple(sqrt_psd(M, tol=tol) for M in family)


# ----------------------------------------------------------------------
# Identity verification
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class DecompositionReport:
    """Entrywise residual of sum_n B_n against B."""

    max_residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tolerance

    def as_dict(self) -> dict:
        return {
            "check": "decomposition",
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def verify_decomposition(
    B: np.ndarray, family: SizeResolvedFamily, tol: float = 1e-12
) -> DecompositionReport:
    B = np.asarray(B, dtype=float)
    total = family.total()
    if total.shape != B.shape:
        raise ValueError(
            f"family matrices have shape {total.shape}, two-point matrix {B.shape}"
        )
    off_diag = ~np.eye(B.shape[0], dtype=bool)
    residual = float(np.abs(total - B)[off_diag].max()) if off_diag.any() else 0.0
    # B's diagonal is pinned to exactly 1; compare the family against that too
    diag_residual = float(np.abs(np.diag(total) - np.diag(B)).max())
    return DecompositionReport(
        max_residual=max(residual, diag_residual), tolerance=tol
    )


@dataclass(frozen=True)
class SpectralIdentityReport:
    """Q(v, w) computed three ways: cubing, through B_n, and through S_n."""

    vertex_pair: tuple[int, int]
    direct: float
    intermediate: float
    spectral: float
    tolerance: float

    @property
    def intermediate_error(self) -> float:
        return abs(self.intermediate - self.direct)

    @property
    def spectral_error(self) -> float:
        return abs(self.spectral - self.direct)

    @property
    def passed(self) -> bool:
        return (
            self.intermediate_error <= self.tolerance
            and self.spectral_error <= self.tolerance
        )

    def as_dict(self) -> dict:
        return {
            "check": "spectral_identity",
            "v": self.vertex_pair[0],
            "w": self.vertex_pair[1],
            "direct": self.direct,
            "intermediate": self.intermediate,
            "spectral": self.spectral,
            "intermediate_error": self.intermediate_error,
            "spectral_error": self.spectral_error,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def verify_spectral_identity(
    B: np.ndarray,
    family: SizeResolvedFamily,
    v: int,
    w: int,
    tol: float = IDENTITY_TOL,
    roots: tuple[np.ndarray, ...] | None = None,
) -> SpectralIdentityReport:
    """Check Q(v,w) = sum_n <B_n B 1_v, B 1_w> = sum_n <S_n B 1_v, S_n B 1_w>.

    The first equality splits the middle B of B^3 by cluster size; the
    second moves one square root across the inner product.  Any B_n failing
    the PSD gate aborts with a refusal rather than reporting garbage.
    """
    B = check_symmetric(B, "two-point matrix")
    direct = float(triangle_diagram(B)[v, w])
    bv = B[v]
    bw = B[w]
    if roots is None:
        roots = family_roots(family)
    intermediate = math.fsum(_dot(_matvec(M, bv), bw) for M in family)
    spectral = math.fsum(
        _dot(_matvec(S, bv), _matvec(S, bw)) for S in roots
    )
    return SpectralIdentityReport(
        vertex_pair=(v, w),
        direct=direct,
        intermediate=intermediate,
        spectral=spectral,
        tolerance=tol * max(1.0, abs(direct)),
    )


@dataclass(frozen=True)
class TailBoundReport:
    """Cauchy-Schwarz control of the cluster-size tail of Q(v, w)."""

    vertex_pair: tuple[int, int]
    n_cutoff: int
    tail: float  # sum_{n > N} <S_n B 1_v, S_n B 1_w>
    bound: float  # sum_{n > N} ||S_n B 1_v|| ||S_n B 1_w||
    bound_transitive: float  # sum_{n > N} ||S_n B 1_v||^2
    tolerance: float

    @property
    def slack(self) -> float:
        return self.bound - self.tail

    @property
    def passed(self) -> bool:
        scale = max(1.0, abs(self.bound))
        return (
            self.tail <= self.bound + 1e-12 * scale
            and abs(self.bound - self.bound_transitive) <= self.tolerance * scale
        )

    def as_dict(self) -> dict:
        return {
            "check": "tail_bound",
            "v": self.vertex_pair[0],
            "w": self.vertex_pair[1],
            "n_cutoff": self.n_cutoff,
            "tail": self.tail,
            "bound": self.bound,
            "bound_transitive": self.bound_transitive,
            "slack": self.slack,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def tail_bound_check(
    B: np.ndarray,
    family: SizeResolvedFamily,
    v: int,
    w: int,
    n_cutoff: int,
    tol: float = IDENTITY_TOL,
    roots: tuple[np.ndarray, ...] | None = None,
) -> TailBoundReport:
    """Bound the n > n_cutoff part of Q(v, w) by term-by-term Cauchy-Schwarz.

    On a transitive graph ||S_n B 1_w|| = ||S_n B 1_v||, so the bound can be
    evaluated at the root vertex alone; the report carries both forms and
    checks they agree.
    """
    B = check_symmetric(B, "two-point matrix")
    if not 0 <= n_cutoff <= len(family):
        raise ValueError(f"cutoff {n_cutoff} outside 0..{len(family)}")
    bv = B[v]
    bw = B[w]
    if roots is None:
        roots = family_roots(family)
    tail_terms = []
    bound_terms = []
    transitive_terms = []
    for S in roots[n_cutoff:]:
        xv = _matvec(S, bv)
        xw = _matvec(S, bw)
        tail_terms.append(_dot(xv, xw))
        bound_terms.append(math.sqrt(_dot(xv, xv)) * math.sqrt(_dot(xw, xw)))
        transitive_terms.append(_dot(xv, xv))
    return TailBoundReport(
        vertex_pair=(v, w),
        n_cutoff=n_cutoff,
        tail=math.fsum(tail_terms),
        bound=math.fsum(bound_terms),
        bound_transitive=math.fsum(transitive_terms),
        tolerance=tol,
    )


def triangle_finiteness_series(
    B: np.ndarray,
    family: SizeResolvedFamily,
    v: int,
    roots: tuple[np.ndarray, ...] | None = None,
) -> np.ndarray:
    """Partial sums of sum_n ||S_n B 1_v||^2; the total is Q(v, v)."""
    B = check_symmetric(B, "two-point matrix")
    bv = B[v]
    if roots is None:
        roots = family_roots(family)
    terms = []
    for S in roots:
        x = _matvec(S, bv)
        terms.append(_dot(x, x))
    return np.cumsum(terms)


def commutation_defect(S: np.ndarray, phi: Automorphism) -> float:
    """|| S P - P S ||_F for the permutation matrix P of phi.

    Column permutation gives S P = S[:, perm] and row permutation gives
    P S = S[inverse, :], so the defect needs no matrix product.
    """
    S = np.asarray(S, dtype=float)
    right = S[:, phi.permutation]
    left = S[phi.inverse, :]
    return _frobenius(right - left)

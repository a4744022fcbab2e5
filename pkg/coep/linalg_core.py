"""Dense complex matrix arithmetic shared by every other module.

Matrices are plain ``numpy`` arrays of dtype complex128. Subspaces are kept
as orthonormal (Euclidean) bases. Every exact "= 0" statement of the theory
becomes a thresholded decision here, driven by a ``ToleranceConfig``.
"""

import logging
from dataclasses import dataclass, replace
from typing import NamedTuple, Optional, Tuple

import numpy as np
import numpy.typing as npt
import scipy.linalg

from coep.errors import InvalidInputError, NumericalError, ShapeError, SingularityError
from coep.norm_types import NormSpec
from coep.operator_norms import load_norm

logger = logging.getLogger(__name__)

ComplexMatrix = npt.NDArray[np.complex128]


@dataclass(frozen=True)
class ToleranceConfig:
    rank_tol: float = 1e-10
    residual_tol: float = 1e-9
    invertibility_tol: float = 1e-9
    hermitian_tol: float = 1e-8
    subspace_tol: float = 1e-9

    def __post_init__(self):
        for name, value in self.to_dict().items():
            if not value > 0:
                raise InvalidInputError(f"Tolerance {name} must be strictly positive, got {value}")

    def with_overrides(self, **overrides) -> "ToleranceConfig":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def to_dict(self) -> dict:
        return {
            "rank_tol": self.rank_tol,
            "residual_tol": self.residual_tol,
            "invertibility_tol": self.invertibility_tol,
            "hermitian_tol": self.hermitian_tol,
            "subspace_tol": self.subspace_tol,
        }


DEFAULT_TOLERANCES = ToleranceConfig()


@dataclass(frozen=True)
class Subspace:
    """Subspace of C^ambient_dim held through an orthonormal basis (columns)."""

    basis: ComplexMatrix

    @classmethod
    def zero(cls, ambient_dim: int) -> "Subspace":
        return cls(np.zeros((ambient_dim, 0), dtype=complex))

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        return cls(np.eye(ambient_dim, dtype=complex))

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def is_zero(self) -> bool:
        return self.dim == 0

    @property
    def is_full(self) -> bool:
        return self.dim == self.ambient_dim

    def projector(self) -> ComplexMatrix:
        return self.basis @ self.basis.conj().T


class InvertibilityVerdict(NamedTuple):
    invertible: bool
    margin: float


def as_matrix(a) -> ComplexMatrix:
    """Validate and convert to a 2-D complex128 array."""
    matrix = np.asarray(a, dtype=complex)
    if matrix.ndim != 2 or 0 in matrix.shape:
        raise ShapeError(f"Expected a non-empty 2-D matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise InvalidInputError("Matrix has non-finite entries")
    return matrix


def as_square(a) -> ComplexMatrix:
    matrix = as_matrix(a)
    if matrix.shape[0] != matrix.shape[1]:
        raise ShapeError(f"Expected a square matrix, got shape {matrix.shape}")
    return matrix


def identity_like(a: ComplexMatrix) -> ComplexMatrix:
    return np.eye(a.shape[0], dtype=complex)


def operator_norm(a, norm: NormSpec) -> float:
    return load_norm(norm).operator_norm(as_matrix(a))


def euclidean_norm(a) -> float:
    return float(np.linalg.norm(a, 2)) if np.size(a) else 0.0


def close(x: ComplexMatrix, y: ComplexMatrix, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> bool:
    """Scale-aware equality in the Euclidean operator norm."""
    scale = max(1.0, euclidean_norm(x), euclidean_norm(y))
    return euclidean_norm(x - y) <= cfg.residual_tol * scale


def is_negligible(x: ComplexMatrix, scale: float, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> bool:
    return euclidean_norm(x) <= cfg.residual_tol * max(1.0, scale)


def matrix_exp(a) -> ComplexMatrix:
    # scipy's expm: scaling and squaring with a Pade approximant
    return scipy.linalg.expm(as_square(a))


def singular_values(a: ComplexMatrix) -> np.ndarray:
    return scipy.linalg.svdvals(a)


def _rank_of(s: np.ndarray, cfg: ToleranceConfig) -> int:
    # floored at 1 so rounding noise in a matrix that should vanish is rank 0
    if s.size == 0:
        return 0
    return int(np.sum(s > cfg.rank_tol * max(1.0, s[0])))


def numerical_rank(a, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> int:
    return _rank_of(singular_values(as_matrix(a)), cfg)


def _rank_split(a: ComplexMatrix, cfg: ToleranceConfig):
    u, s, vh = scipy.linalg.svd(a, full_matrices=True)
    return u, _rank_of(s, cfg), vh


def range_basis(a, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> Subspace:
    matrix = as_matrix(a)
    u, rank, _ = _rank_split(matrix, cfg)
    return Subspace(u[:, :rank])


def null_basis(a, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> Subspace:
    matrix = as_matrix(a)
    _, rank, vh = _rank_split(matrix, cfg)
    return Subspace(vh[rank:].conj().T)


def span(vectors, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> Subspace:
    """Subspace spanned by the columns of ``vectors`` (which may be empty)."""
    vectors = np.asarray(vectors, dtype=complex)
    if vectors.shape[1] == 0:
        return Subspace.zero(vectors.shape[0])
    return range_basis(vectors, cfg)


def _check_ambient(u: Subspace, v: Subspace):
    if u.ambient_dim != v.ambient_dim:
        raise ShapeError(f"Ambient dimensions differ: {u.ambient_dim} vs {v.ambient_dim}")


def principal_angles(u: Subspace, v: Subspace) -> np.ndarray:
    """Principal angles in radians, ascending; empty when either side is {0}."""
    _check_ambient(u, v)
    if u.is_zero or v.is_zero:
        return np.zeros(0)
    return np.sort(scipy.linalg.subspace_angles(u.basis, v.basis))


def subspace_sum(u: Subspace, v: Subspace, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> Subspace:
    _check_ambient(u, v)
    return span(np.hstack([u.basis, v.basis]), cfg)


def subspace_intersect(u: Subspace, v: Subspace, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> Subspace:
    """Intersection from the null space of [U, -V].

    The stacked matrix has the same singular values as [U, V], so the rank
    decision is shared with ``subspace_sum`` and dim u + dim v = dim(sum) +
    dim(intersection) holds as an integer identity.
    """
    _check_ambient(u, v)
    if u.is_zero or v.is_zero:
        return Subspace.zero(u.ambient_dim)
    stacked = np.hstack([u.basis, -v.basis])
    kernel = null_basis(stacked, cfg).basis
    if kernel.shape[1] == 0:
        return Subspace.zero(u.ambient_dim)
    vectors = u.basis @ kernel[: u.dim]
    q, _ = np.linalg.qr(vectors)
    return Subspace(q[:, : kernel.shape[1]])


def orthogonal_complement(u: Subspace, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> Subspace:
    if u.is_zero:
        return Subspace.full(u.ambient_dim)
    return null_basis(u.basis.conj().T, cfg)


def inclusion_residual(inner: Subspace, outer: Subspace) -> float:
    """Largest sine of the angles between inner and outer (0 when inner ⊆ outer)."""
    _check_ambient(inner, outer)
    if inner.is_zero:
        return 0.0
    if outer.is_zero:
        return 1.0
    leftover = inner.basis - outer.basis @ (outer.basis.conj().T @ inner.basis)
    return euclidean_norm(leftover)


def subspace_contains(outer: Subspace, inner: Subspace, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> bool:
    return inner.dim <= outer.dim and inclusion_residual(inner, outer) <= cfg.subspace_tol


def subspace_equal(u: Subspace, v: Subspace, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> bool:
    return u.dim == v.dim and subspace_contains(u, v, cfg) and subspace_contains(v, u, cfg)


def image(a: ComplexMatrix, u: Subspace, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> Subspace:
    """The subspace a(u)."""
    if u.is_zero:
        return Subspace.zero(a.shape[0])
    return span(a @ u.basis, cfg)


def contains_vector(u: Subspace, x: np.ndarray, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> bool:
    x = np.ravel(x)
    scale = np.linalg.norm(x)
    if scale == 0:
        return True
    leftover = x - u.basis @ (u.basis.conj().T @ x) if not u.is_zero else x
    return np.linalg.norm(leftover) <= cfg.subspace_tol * scale


def is_invertible(a, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> InvertibilityVerdict:
    """Reciprocal-condition test floored at unit scale; the margin is the smallest singular value."""
    s = singular_values(as_square(a))
    smallest = float(s[-1])
    if s[0] == 0:
        return InvertibilityVerdict(False, 0.0)
    return InvertibilityVerdict(bool(smallest / max(1.0, s[0]) > cfg.invertibility_tol), smallest)


def inverse(a, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> ComplexMatrix:
    matrix = as_square(a)
    verdict = is_invertible(matrix, cfg)
    if not verdict.invertible:
        raise SingularityError(
            f"Matrix is numerically singular (smallest singular value {verdict.margin:.3e})",
            margin=verdict.margin,
        )
    result = scipy.linalg.inv(matrix)
    residual = euclidean_norm(matrix @ result - identity_like(matrix))
    if residual > cfg.residual_tol * max(1.0, euclidean_norm(matrix) * euclidean_norm(result)):
        raise NumericalError(f"Inverse residual {residual:.3e} exceeds tolerance")
    return result


def solve_feasible(
    system: ComplexMatrix, rhs: np.ndarray, cfg: ToleranceConfig = DEFAULT_TOLERANCES
) -> Tuple[Optional[np.ndarray], float]:
    """Least-squares solve; returns (solution or None, relative residual)."""
    solution, *_ = scipy.linalg.lstsq(system, rhs, cond=cfg.rank_tol)
    scale = max(1.0, float(np.linalg.norm(rhs)))
    residual = float(np.linalg.norm(system @ solution - rhs)) / scale
    if residual > cfg.residual_tol:
        return None, residual
    return solution, residual

"""Generalized, normalized and Moore-Penrose inverses.

A Moore-Penrose inverse of a is the normalized generalized inverse x
(axa = a, xax = x) for which ax and xa are hermitian under the algebra norm.
There is at most one such x. Under L2 it always exists and is computed from
the SVD. Under other norms only certificates and a restricted search are
available, because existence itself depends on the norm.
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import scipy.linalg

from coep.errors import ContractError, UnsupportedNormError
from coep.hermitian import HermitianVerdict, is_hermitian
from coep.linalg_core import (
    DEFAULT_TOLERANCES,
    ComplexMatrix,
    ToleranceConfig,
    as_square,
    euclidean_norm,
    is_invertible,
    numerical_rank,
    operator_norm,
)
from coep.norm_types import EUCLIDEAN, NormKind, NormSpec

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MPCertificate:
    residual_axa: float
    residual_xax: float
    ax_verdict: HermitianVerdict
    xa_verdict: HermitianVerdict
    norm: NormSpec
    tolerance: float

    @property
    def valid(self) -> bool:
        return (
            self.residual_axa <= self.tolerance
            and self.residual_xax <= self.tolerance
            and self.ax_verdict.is_hermitian
            and self.xa_verdict.is_hermitian
        )

    @property
    def max_residual(self) -> float:
        return max(self.residual_axa, self.residual_xax)

    def to_dict(self) -> dict:
        return {
            "valid": self.valid,
            "residual_axa": self.residual_axa,
            "residual_xax": self.residual_xax,
            "ax_hermitian": self.ax_verdict.to_dict(),
            "xa_hermitian": self.xa_verdict.to_dict(),
            "norm": self.norm.to_dict(),
            "tolerance": self.tolerance,
        }


def _relative_residual(residual: ComplexMatrix, reference: ComplexMatrix, norm: NormSpec) -> float:
    return operator_norm(residual, norm) / max(1.0, operator_norm(reference, norm))


def generalized_inverse(a, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> ComplexMatrix:
    """Inner inverse b (aba = a) from a column-pivoted QR of a.

    With aP = QR and rank r, b = P [R11^-1 0; 0 0] Q^H. It is reflexive as
    well, but in general not the Moore-Penrose inverse.
    """
    matrix = as_square(a)
    n = matrix.shape[0]
    rank = numerical_rank(matrix, cfg)
    result = np.zeros((n, n), dtype=complex)
    if rank == 0:
        return result
    q, r, perm = scipy.linalg.qr(matrix, pivoting=True)
    core = np.zeros((n, n), dtype=complex)
    core[:rank, :rank] = scipy.linalg.solve_triangular(r[:rank, :rank], np.eye(rank))
    result[perm, :] = core @ q.conj().T
    return result


def normalize(a, b, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> ComplexMatrix:
    """Return bab, a normalized generalized inverse of a."""
    matrix, candidate = as_square(a), as_square(b)
    residual = euclidean_norm(matrix @ candidate @ matrix - matrix) / max(1.0, euclidean_norm(matrix))
    if residual > cfg.residual_tol:
        raise ContractError(f"b is not a generalized inverse of a (residual {residual:.3e})", residual)
    return candidate @ matrix @ candidate


def mp_verify(a, x, norm: NormSpec = EUCLIDEAN, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> MPCertificate:
    matrix, candidate = as_square(a), as_square(x)
    if matrix.shape != candidate.shape:
        raise ContractError(f"Shapes differ: {matrix.shape} vs {candidate.shape}")
    ax = matrix @ candidate
    xa = candidate @ matrix
    return MPCertificate(
        residual_axa=_relative_residual(ax @ matrix - matrix, matrix, norm),
        residual_xax=_relative_residual(xa @ candidate - candidate, candidate, norm),
        ax_verdict=is_hermitian(ax, norm, cfg),
        xa_verdict=is_hermitian(xa, norm, cfg),
        norm=norm,
        tolerance=cfg.residual_tol,
    )


def mp_inverse_euclidean(a, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> Tuple[ComplexMatrix, MPCertificate]:
    matrix = as_square(a)
    x = np.linalg.pinv(matrix, rcond=cfg.rank_tol)
    return x, mp_verify(matrix, x, EUCLIDEAN, cfg)


def rank_factorization(a, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> Tuple[ComplexMatrix, ComplexMatrix]:
    """Full-rank factorization a = F G with F n x r (pivot columns of a) and G r x n."""
    matrix = as_square(a)
    n = matrix.shape[0]
    rank = numerical_rank(matrix, cfg)
    if rank == 0:
        return np.zeros((n, 0), dtype=complex), np.zeros((0, n), dtype=complex)
    _, r, perm = scipy.linalg.qr(matrix, pivoting=True)
    f = matrix[:, perm[:rank]]
    g_permuted = np.hstack(
        [np.eye(rank), scipy.linalg.solve_triangular(r[:rank, :rank], r[:rank, rank:])]
    )
    g = np.zeros((rank, n), dtype=complex)
    g[:, perm] = g_permuted
    return f, g


def mp_rank_factorization(a, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> ComplexMatrix:
    """Euclidean Moore-Penrose inverse G^H (G G^H)^-1 (F^H F)^-1 F^H, no SVD involved."""
    f, g = rank_factorization(a, cfg)
    if f.shape[1] == 0:
        return np.zeros_like(as_square(a))
    left = scipy.linalg.solve(f.conj().T @ f, f.conj().T, assume_a="her")
    right = scipy.linalg.solve(g @ g.conj().T, left, assume_a="her")
    return g.conj().T @ right


@dataclass
class MPSearchResult:
    inverse: Optional[ComplexMatrix]
    certificate: Optional[MPCertificate]
    candidates_tried: int
    witness: str
    # non-existence is only relative to the searched candidate family
    family: List[str] = field(default_factory=lambda: ["coordinate-projections", "spectral-idempotent"])

    @property
    def found(self) -> bool:
        return self.inverse is not None


def _candidate_idempotents(matrix: ComplexMatrix, rank: int, cfg: ToleranceConfig):
    n = matrix.shape[0]
    for support in itertools.combinations(range(n), rank):
        diagonal = np.zeros(n, dtype=complex)
        diagonal[list(support)] = 1.0
        yield f"diag{support}", np.diag(diagonal)
    f, g = rank_factorization(matrix, cfg)
    core = g @ f
    if rank and is_invertible(core, cfg).invertible:
        yield "f(gf)^-1 g", f @ scipy.linalg.solve(core, g)


def mp_search_diagonalizable(a, norm: NormSpec, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> MPSearchResult:
    """Search a Moore-Penrose inverse whose products lie in a candidate family.

    ax must be an idempotent P with Pa = a and xa an idempotent Q with
    aQ = a. Given such P and Q, x = Q g P for any inner inverse g, and x is
    then certified under ``norm``. Candidates are tried in lexicographic
    order and the first valid one wins.
    """
    if norm.kind not in (NormKind.L1, NormKind.LINF, NormKind.LP):
        raise UnsupportedNormError(f"Search is defined for l1, linf and lp norms, not {norm.label}")
    matrix = as_square(a)
    rank = numerical_rank(matrix, cfg)
    g = generalized_inverse(matrix, cfg)
    scale = max(1.0, euclidean_norm(matrix))
    candidates = list(_candidate_idempotents(matrix, rank, cfg))
    left = [(name, p) for name, p in candidates if euclidean_norm(p @ matrix - matrix) <= cfg.residual_tol * scale]
    right = [(name, q) for name, q in candidates if euclidean_norm(matrix @ q - matrix) <= cfg.residual_tol * scale]

    tried = 0
    best: Optional[MPCertificate] = None
    for (p_name, p), (q_name, q) in itertools.product(left, right):
        tried += 1
        x = q @ g @ p
        certificate = mp_verify(matrix, x, norm, cfg)
        if certificate.valid:
            logger.debug("Moore-Penrose inverse found with ax=%s, xa=%s", p_name, q_name)
            return MPSearchResult(x, certificate, tried, f"ax={p_name}, xa={q_name}")
        if best is None or certificate.max_residual < best.max_residual:
            best = certificate

    if not left or not right:
        witness = "no candidate idempotent has range R(a)" if not left else "no candidate idempotent has kernel N(a)"
    else:
        witness = f"{tried} candidate pairs failed the hermitian test; best residual {best.max_residual:.3e}"
    logger.warning("No Moore-Penrose inverse in the searched family under %s: %s", norm.label, witness)
    return MPSearchResult(None, None, tried, witness)


def require_mp_pair(
    a, a_dag, cfg: ToleranceConfig = DEFAULT_TOLERANCES, norm: NormSpec = EUCLIDEAN
) -> Tuple[ComplexMatrix, ComplexMatrix]:
    """Return (a, a_dag) as arrays, or raise ContractError when a_dag is not a† under ``norm``."""
    matrix, candidate = as_square(a), as_square(a_dag)
    certificate = mp_verify(matrix, candidate, norm, cfg)
    if not certificate.valid:
        raise ContractError(
            f"Not a Moore-Penrose pair under {norm.label} (residual {certificate.max_residual:.3e}, "
            f"ax hermitian {certificate.ax_verdict.is_hermitian}, xa hermitian {certificate.xa_verdict.is_hermitian})",
            certificate.max_residual,
        )
    return matrix, candidate

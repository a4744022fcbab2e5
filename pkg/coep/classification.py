"""EP, co-EP, bi-EP and hermitian co-EP elements, and the equivalence auditors.

With p = aa† and q = a†a, a is EP when p = q, co-EP when p - q is
invertible, bi-EP when p and q commute, and hermitian co-EP when it is co-EP
and its canonical idempotent h = p(p - q)^-1 is hermitian. Each auditor
evaluates every statement of a characterization independently so that a
disagreement shows up as a mixed statement vector.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, NamedTuple, Optional, Tuple

import numpy as np
import scipy.linalg

from coep.errors import InvalidInputError, PreconditionError
from coep.hermitian import is_hermitian
from coep.linalg_core import (
    DEFAULT_TOLERANCES,
    ComplexMatrix,
    Subspace,
    ToleranceConfig,
    as_square,
    close,
    euclidean_norm,
    identity_like,
    inverse,
    is_invertible,
    is_negligible,
    null_basis,
    numerical_rank,
    orthogonal_complement,
    principal_angles,
    range_basis,
    solve_feasible,
    subspace_equal,
    subspace_intersect,
    subspace_sum,
)
from coep.mult_operators import (
    Side,
    SidesCheck,
    left_annihilator_space,
    left_ideal,
    lift,
    right_annihilator_space,
    right_ideal,
    vec,
)
from coep.norm_types import EUCLIDEAN, NormSpec
from coep.pseudoinverse import (
    MPCertificate,
    mp_inverse_euclidean,
    mp_search_diagonalizable,
    mp_verify,
    require_mp_pair,
)
from coep.matrix_io import encode_matrix
from coep.reports import CheckReport, EquivalenceAudit, Statement, json_ready

logger = logging.getLogger(__name__)

RIGHT_INVERTIBILITY_NOTE = (
    "right invertibility of a lifted operator coincides with invertibility in finite dimensions"
)


@dataclass
class ClassificationReport:
    is_mp_invertible: bool
    norm: NormSpec
    ep: Optional[bool] = None
    co_ep: Optional[bool] = None
    bi_ep: Optional[bool] = None
    hermitian_co_ep: Optional[bool] = None
    a_dag: Optional[ComplexMatrix] = None
    h: Optional[ComplexMatrix] = None
    k: Optional[ComplexMatrix] = None
    certificate: Optional[MPCertificate] = None
    margins: Dict[str, float] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        matrices = {
            name: encode_matrix(value) if value is not None else None
            for name, value in (("a_dag", self.a_dag), ("h", self.h), ("k", self.k))
        }
        return json_ready(
            {
                "is_mp_invertible": self.is_mp_invertible,
                "norm": self.norm.to_dict(),
                "ep": self.ep,
                "co_ep": self.co_ep,
                "bi_ep": self.bi_ep,
                "hermitian_co_ep": self.hermitian_co_ep,
                "certificate": self.certificate.to_dict() if self.certificate else None,
                "margins": self.margins,
                "notes": self.notes,
                **matrices,
            }
        )


class DimensionSplit(NamedTuple):
    holds: bool
    applicable: bool
    dimension: int
    rank: int
    nullity: int


class IdentityDistance(NamedTuple):
    holds: bool
    distance: float


def _products(a: ComplexMatrix, a_dag: ComplexMatrix) -> Tuple[ComplexMatrix, ComplexMatrix]:
    return a @ a_dag, a_dag @ a


def canonical_idempotents(a, a_dag, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> Tuple[ComplexMatrix, ComplexMatrix]:
    """h = p(p - q)^-1 and k = (p - q)^-1 p. Raises SingularityError unless a is co-EP."""
    p, q = _products(as_square(a), as_square(a_dag))
    d_inv = inverse(p - q, cfg)
    return p @ d_inv, d_inv @ p


def _meet_margin(u: Subspace, v: Subspace) -> float:
    """Sine of the smallest principal angle; 1 when either side is {0}."""
    angles = principal_angles(u, v)
    return float(np.sin(angles[0])) if angles.size else 1.0


def _apart(u: Subspace, v: Subspace, cfg: ToleranceConfig) -> Tuple[bool, float]:
    return subspace_intersect(u, v, cfg).is_zero, _meet_margin(u, v)


def _fill(u: Subspace, v: Subspace, cfg: ToleranceConfig) -> bool:
    return subspace_sum(u, v, cfg).is_full


def idempotent_with_range_and_kernel(
    range_part: Subspace, kernel_part: Subspace, cfg: ToleranceConfig = DEFAULT_TOLERANCES
) -> Optional[ComplexMatrix]:
    """Idempotent P with range_part ⊆ R(P) and kernel_part ⊆ N(P), or None when they meet."""
    if not subspace_intersect(range_part, kernel_part, cfg).is_zero:
        return None
    rest = orthogonal_complement(subspace_sum(range_part, kernel_part, cfg), cfg)
    frame = np.hstack([range_part.basis, rest.basis, kernel_part.basis])
    if frame.shape[1] != frame.shape[0]:
        return None
    keep = range_part.dim + rest.dim
    selector = np.diag(np.r_[np.ones(keep), np.zeros(kernel_part.dim)]).astype(complex)
    return frame @ selector @ scipy.linalg.inv(frame)


def idempotent_inside_range_and_kernel(
    range_room: Subspace, kernel_room: Subspace, cfg: ToleranceConfig = DEFAULT_TOLERANCES
) -> Optional[ComplexMatrix]:
    """Idempotent P with R(P) ⊆ range_room and N(P) ⊆ kernel_room, or None unless they span."""
    if not _fill(range_room, kernel_room, cfg):
        return None
    overlap = subspace_intersect(range_room, kernel_room, cfg)
    kernel_part = subspace_intersect(kernel_room, orthogonal_complement(overlap, cfg), cfg)
    frame = np.hstack([range_room.basis, kernel_part.basis])
    if frame.shape[1] != frame.shape[0]:
        return None
    selector = np.diag(np.r_[np.ones(range_room.dim), np.zeros(kernel_part.dim)]).astype(complex)
    return frame @ selector @ scipy.linalg.inv(frame)


def _left_idempotent_feasible(a, a_dag, cfg) -> Tuple[bool, float]:
    """Is there h with ha = a and ha† = 0? Linear in vec(h)."""
    system = np.vstack([lift(a, Side.RIGHT).action, lift(a_dag, Side.RIGHT).action])
    rhs = np.concatenate([vec(a), np.zeros(a.size, dtype=complex)])
    solution, residual = solve_feasible(system, rhs, cfg)
    if solution is not None:
        h = idempotent_with_range_and_kernel(range_basis(a, cfg), range_basis(a_dag, cfg), cfg)
        if h is None or not close(h @ a, a, cfg):
            logger.warning("Left idempotent system is feasible but no idempotent was constructed")
    return solution is not None, residual


def _right_idempotent_feasible(a, a_dag, cfg) -> Tuple[bool, float]:
    """Is there k with ak = a and a†k = 0?"""
    system = np.vstack([lift(a, Side.LEFT).action, lift(a_dag, Side.LEFT).action])
    rhs = np.concatenate([vec(a), np.zeros(a.size, dtype=complex)])
    solution, residual = solve_feasible(system, rhs, cfg)
    if solution is not None:
        k = idempotent_inside_range_and_kernel(null_basis(a_dag, cfg), null_basis(a, cfg), cfg)
        if k is None or not close(a @ k, a, cfg):
            logger.warning("Right idempotent system is feasible but no idempotent was constructed")
    return solution is not None, residual


def classify(
    a,
    norm: NormSpec = EUCLIDEAN,
    cfg: ToleranceConfig = DEFAULT_TOLERANCES,
    a_dag=None,
) -> ClassificationReport:
    matrix = as_square(a)
    report = ClassificationReport(is_mp_invertible=False, norm=norm)

    if a_dag is not None:
        candidate = as_square(a_dag)
        certificate = mp_verify(matrix, candidate, norm, cfg)
        if not certificate.valid:
            report.certificate = certificate
            report.notes.append("supplied candidate is not the Moore-Penrose inverse under this norm")
            return report
    elif norm.is_euclidean:
        candidate, certificate = mp_inverse_euclidean(matrix, cfg)
    else:
        search = mp_search_diagonalizable(matrix, norm, cfg)
        if not search.found:
            report.notes.append(f"no Moore-Penrose inverse in the searched family: {search.witness}")
            return report
        candidate, certificate = search.inverse, search.certificate

    report.is_mp_invertible = True
    report.a_dag = candidate
    report.certificate = certificate
    p, q = _products(matrix, candidate)
    difference = is_invertible(p - q, cfg)

    report.ep = close(p, q, cfg)
    report.co_ep = difference.invertible
    report.bi_ep = close(p @ q, q @ p, cfg)
    report.margins.update(
        {
            "difference_smallest_singular_value": difference.margin,
            "ep_residual": euclidean_norm(p - q),
            "commutator_residual": euclidean_norm(p @ q - q @ p),
        }
    )

    if not report.co_ep:
        report.hermitian_co_ep = False
        return report

    report.h, report.k = canonical_idempotents(matrix, candidate, cfg)
    verdict = is_hermitian(report.h, norm, cfg)
    report.hermitian_co_ep = verdict.is_hermitian
    report.margins["h_hermitian_defect"] = verdict.defect
    if verdict.numerical:
        report.notes.append(f"hermitian verdict on h is numerical under {norm.label}")

    sum_is_one = close(p + q, identity_like(matrix), cfg)
    if sum_is_one != report.hermitian_co_ep:
        logger.warning(
            "Hermitian test on h (%s) disagrees with aa†+a†a = 1 (%s) under %s",
            report.hermitian_co_ep,
            sum_is_one,
            norm.label,
        )
    logger.debug("Classified %dx%d element: ep=%s co_ep=%s bi_ep=%s", *matrix.shape, report.ep, report.co_ep, report.bi_ep)
    return report


def audit_coep(a, a_dag, lam: complex, mu: complex, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> EquivalenceAudit:
    """Nine characterizations of co-EP elements, lifted to the n^2-dimensional algebra."""
    if lam == 0 or mu == 0:
        raise InvalidInputError("λ and μ must be nonzero")
    a, a_dag = require_mp_pair(a, a_dag, cfg)
    p, q = _products(a, a_dag)
    combination = lam * a + mu * a_dag

    difference = is_invertible(p - q, cfg)
    total = is_invertible(p + q, cfg)
    combined = is_invertible(combination, cfg)
    lifts = min(
        is_invertible(lift(combination, Side.LEFT).action, cfg),
        is_invertible(lift(combination, Side.RIGHT).action, cfg),
        key=lambda verdict: (verdict.invertible, verdict.margin),
    )

    right_a, right_dag = right_ideal(a, cfg), right_ideal(a_dag, cfg)
    left_a, left_dag = left_ideal(a, cfg), left_ideal(a_dag, cfg)
    right_apart, right_margin = _apart(right_a, right_dag, cfg)
    left_apart, left_margin = _apart(left_a, left_dag, cfg)
    decomposed = right_apart and left_apart and _fill(right_a, right_dag, cfg) and _fill(left_a, left_dag, cfg)

    left_idempotent, left_residual = _left_idempotent_feasible(a, a_dag, cfg)
    right_idempotent, right_residual = _right_idempotent_feasible(a, a_dag, cfg)

    statements = [
        Statement("difference_invertible", difference.invertible, difference.margin),
        Statement("direct_sum_decompositions", decomposed, min(right_margin, left_margin)),
        Statement(
            "combination_invertible_right_ideals_apart",
            combined.invertible and right_apart,
            min(combined.margin, right_margin),
        ),
        Statement("combination_invertible_left_idempotent", combined.invertible and left_idempotent, left_residual),
        Statement(
            "lifts_right_invertible_right_ideals_apart",
            lifts.invertible and right_apart,
            min(lifts.margin, right_margin),
            note=RIGHT_INVERTIBILITY_NOTE,
        ),
        Statement("sum_invertible_right_ideals_apart", total.invertible and right_apart, min(total.margin, right_margin)),
        Statement("combination_invertible_right_idempotent", combined.invertible and right_idempotent, right_residual),
        Statement("sum_invertible_left_ideals_apart", total.invertible and left_apart, min(total.margin, left_margin)),
        Statement(
            "combination_invertible_left_ideals_apart",
            combined.invertible and left_apart,
            min(combined.margin, left_margin),
        ),
    ]
    audit = EquivalenceAudit("coep", statements, notes=[RIGHT_INVERTIBILITY_NOTE])
    if not audit.all_agree:
        logger.warning("co-EP characterizations disagree: %s", audit.values())
    return audit


def audit_hermitian_coep(
    a, a_dag, cfg: ToleranceConfig = DEFAULT_TOLERANCES, norm: NormSpec = EUCLIDEAN
) -> EquivalenceAudit:
    """Twelve characterizations of hermitian co-EP elements."""
    a, a_dag = require_mp_pair(a, a_dag, cfg, norm)
    one = identity_like(a)
    p, q = _products(a, a_dag)
    difference = is_invertible(p - q, cfg)
    co_ep = difference.invertible
    notes: List[str] = []

    h_hermitian = k_hermitian = h_is_p = k_is_p = k_is_h = False
    h_defect = k_defect = float("nan")
    if co_ep:
        h, k = canonical_idempotents(a, a_dag, cfg)
        h_verdict, k_verdict = is_hermitian(h, norm, cfg), is_hermitian(k, norm, cfg)
        h_hermitian, k_hermitian = h_verdict.is_hermitian, k_verdict.is_hermitian
        h_defect, k_defect = h_verdict.defect, k_verdict.defect
        h_is_p, k_is_p, k_is_h = close(h, p, cfg), close(k, p, cfg), close(k, h, cfg)
        if h_verdict.numerical:
            notes.append(f"hermitian verdicts on h and k are numerical under {norm.label}")

    square_vanishes = is_negligible(a @ a, euclidean_norm(a) ** 2, cfg)
    statements = [
        Statement("coep_h_hermitian", co_ep and h_hermitian, h_defect),
        Statement("coep_h_equals_range_projection", co_ep and h_is_p, difference.margin),
        Statement("projections_sum_to_one", close(p + q, one, cfg), euclidean_norm(p + q - one)),
        Statement("right_ideal_is_left_annihilator", subspace_equal(right_ideal(a, cfg), left_annihilator_space(a, cfg), cfg)),
        Statement("left_ideal_is_right_annihilator", subspace_equal(left_ideal(a, cfg), right_annihilator_space(a, cfg), cfg)),
        Statement("coep_k_equals_range_projection", co_ep and k_is_p, difference.margin),
        Statement("coep_k_hermitian", co_ep and k_hermitian, k_defect),
        Statement("coep_k_equals_h", co_ep and k_is_h, difference.margin),
        Statement("coep_square_zero", co_ep and square_vanishes, euclidean_norm(a @ a)),
        Statement(
            "dagger_right_ideal_is_left_annihilator",
            subspace_equal(right_ideal(a_dag, cfg), left_annihilator_space(a_dag, cfg), cfg),
        ),
        Statement(
            "dagger_left_ideal_is_right_annihilator",
            subspace_equal(left_ideal(a_dag, cfg), right_annihilator_space(a_dag, cfg), cfg),
        ),
        Statement("coep_bi_ep", co_ep and close(p @ q, q @ p, cfg), euclidean_norm(p @ q - q @ p)),
    ]
    audit = EquivalenceAudit("hermitian-coep", statements, notes=notes)
    if not audit.all_agree:
        # with a numerical hermitian test this is a conditioning finding
        logger.warning("Hermitian co-EP characterizations disagree under %s: %s", norm.label, audit.values())
    return audit


def audit_operator_coep(t, t_dag, lam: complex, mu: complex, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> EquivalenceAudit:
    """Seven co-EP characterizations read on column spaces of the base space."""
    if lam == 0 or mu == 0:
        raise InvalidInputError("λ and μ must be nonzero")
    t, t_dag = require_mp_pair(t, t_dag, cfg)
    one = identity_like(t)
    p, q = _products(t, t_dag)
    combined = is_invertible(lam * t + mu * t_dag, cfg)
    total = is_invertible(p + q, cfg)

    ranges_apart, ranges_margin = _apart(range_basis(t, cfg), range_basis(t_dag, cfg), cfg)
    # R(I-TT†) + R(I-T†T) = X, i.e. AT ∩ AT† = 0; every invertible T meets the intersection form
    complements_span = _fill(range_basis(one - p, cfg), range_basis(one - q, cfg), cfg)
    # P with R(T) ⊆ R(P), R(T†) ⊆ N(P) and Q with R(I-Q) ⊆ N(T), R(Q) ⊆ N(T†)
    p_exists, p_residual = _left_idempotent_feasible(t, t_dag, cfg)
    q_exists, q_residual = _right_idempotent_feasible(t, t_dag, cfg)

    statements = [
        Statement("coep", is_invertible(p - q, cfg).invertible),
        Statement("combination_invertible_ranges_apart", combined.invertible and ranges_apart, min(combined.margin, ranges_margin)),
        Statement("combination_invertible_range_idempotent", combined.invertible and p_exists, p_residual),
        Statement("sum_invertible_ranges_apart", total.invertible and ranges_apart, min(total.margin, ranges_margin)),
        Statement("combination_invertible_kernel_idempotent", combined.invertible and q_exists, q_residual),
        Statement("sum_invertible_complements_span", total.invertible and complements_span, total.margin),
        Statement("combination_invertible_complements_span", combined.invertible and complements_span, combined.margin),
    ]
    return EquivalenceAudit("operator-coep", statements)


def audit_subspace_coep(t, t_dag, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> EquivalenceAudit:
    t, t_dag = require_mp_pair(t, t_dag, cfg)
    p, q = _products(t, t_dag)
    ranges = range_basis(t, cfg), range_basis(t_dag, cfg)
    kernels = null_basis(t, cfg), null_basis(t_dag, cfg)
    ranges_apart, ranges_margin = _apart(*ranges, cfg)
    kernels_apart, kernels_margin = _apart(*kernels, cfg)
    statements = [
        Statement("coep", is_invertible(p - q, cfg).invertible),
        Statement("ranges_and_kernels_apart", ranges_apart and kernels_apart, min(ranges_margin, kernels_margin)),
        Statement("ranges_and_kernels_span", _fill(*ranges, cfg) and _fill(*kernels, cfg)),
    ]
    return EquivalenceAudit("subspace-coep", statements)


def check_dimension_split(t, cfg: ToleranceConfig = DEFAULT_TOLERANCES, t_dag=None) -> DimensionSplit:
    """A co-EP operator on C^n has rank and nullity both equal to n/2."""
    matrix = as_square(t)
    if t_dag is None:
        t_dag, _ = mp_inverse_euclidean(matrix, cfg)
    else:
        matrix, t_dag = require_mp_pair(matrix, t_dag, cfg)
    n = matrix.shape[0]
    rank = numerical_rank(matrix, cfg)
    nullity = null_basis(matrix, cfg).dim
    p, q = _products(matrix, t_dag)
    if not is_invertible(p - q, cfg).invertible:
        return DimensionSplit(True, False, n, rank, nullity)
    return DimensionSplit(n == 2 * rank == 2 * nullity, True, n, rank, nullity)


def check_difference_not_identity(a, a_dag, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> IdentityDistance:
    a, a_dag = require_mp_pair(a, a_dag, cfg)
    p, q = _products(a, a_dag)
    one = identity_like(a)
    return IdentityDistance(not close(p - q, one, cfg), euclidean_norm(p - q - one))


def check_canonical_idempotents(a, a_dag, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> CheckReport:
    """Identities tying h and k to a and a†, as matrices and as ideals."""
    a, a_dag = require_mp_pair(a, a_dag, cfg)
    if not is_invertible(a @ a_dag - a_dag @ a, cfg).invertible:
        raise PreconditionError("Canonical idempotents exist only for co-EP elements")
    one = identity_like(a)
    h, k = canonical_idempotents(a, a_dag, cfg)
    zero = np.zeros_like(a)

    def matches(label: str, lhs: ComplexMatrix, rhs: ComplexMatrix) -> Statement:
        return Statement(label, close(lhs, rhs, cfg), euclidean_norm(lhs - rhs))

    def ideals(label: str, first: Subspace, second: Subspace) -> Statement:
        return Statement(label, subspace_equal(first, second, cfg))

    statements = [
        matches("h_idempotent", h @ h, h),
        matches("h_fixes_a", h @ a, a),
        matches("h_kills_dagger", h @ a_dag, zero),
        matches("k_idempotent", k @ k, k),
        matches("a_kills_k", a @ k, zero),
        matches("dagger_fixed_by_k", a_dag @ k, a_dag),
        ideals("h_right_ideal", right_ideal(h, cfg), right_ideal(a, cfg)),
        ideals("complement_of_h_right_ideal", right_ideal(one - h, cfg), right_ideal(a_dag, cfg)),
        ideals("k_left_ideal", left_ideal(k, cfg), left_ideal(a_dag, cfg)),
        ideals("complement_of_k_left_ideal", left_ideal(one - k, cfg), left_ideal(a, cfg)),
    ]
    return CheckReport("canonical-idempotents", statements)


def check_dagger_symmetry(a, a_dag, norm: NormSpec = EUCLIDEAN, cfg: ToleranceConfig = DEFAULT_TOLERANCES):
    """(a is hermitian co-EP, a† is hermitian co-EP); the two always agree."""
    a, a_dag = require_mp_pair(a, a_dag, cfg, norm)
    forward = classify(a, norm, cfg, a_dag=a_dag)
    backward = classify(a_dag, norm, cfg, a_dag=a)
    return SidesCheck(bool(forward.hermitian_co_ep), bool(backward.hermitian_co_ep))

"""Perturbations b of a that keep the Moore-Penrose inverse in closed form.

b satisfies condition (P) at a when b - a = aa†(b - a)a†a and
||a†(b - a)|| < 1. Then b† = (1 + a†(b - a))^-1 a†, bb† = aa†, b†b = a†a,
and the relative error of b† is bounded by c / (1 - c) with c = ||a†(b - a)||.
Every quantity in one report is measured in the pair's norm.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from coep.classification import canonical_idempotents, classify
from coep.errors import ConditionPError, InvalidInputError, NumericalError, PreconditionError, ShapeError
from coep.linalg_core import (
    DEFAULT_TOLERANCES,
    ComplexMatrix,
    ToleranceConfig,
    as_square,
    close,
    euclidean_norm,
    identity_like,
    is_invertible,
    operator_norm,
)
from coep.matrix_io import encode_matrix
from coep.norm_types import EUCLIDEAN, NormSpec
from coep.pseudoinverse import MPCertificate, mp_verify, require_mp_pair
from coep.reports import CheckReport, Statement, json_ready

logger = logging.getLogger(__name__)

# contraction must stay below 1 - CONTRACTION_MARGIN
CONTRACTION_MARGIN = 1e-9
REVERSE_THRESHOLD = 0.5
SVD_AGREEMENT_TOL = 1e-9


@dataclass(frozen=True)
class PerturbationPair:
    a: ComplexMatrix
    a_dag: ComplexMatrix
    b: ComplexMatrix
    norm: NormSpec = EUCLIDEAN

    @property
    def difference(self) -> ComplexMatrix:
        return np.asarray(self.b) - np.asarray(self.a)


class ConditionP(NamedTuple):
    satisfied: bool
    residual: float
    contraction: float
    split_residual: float


class ErrorBound(NamedTuple):
    realized: float
    bound: float
    holds: bool


class NormBracket(NamedTuple):
    lower: float
    value: float
    upper: float
    holds: bool


class ReverseCheck(NamedTuple):
    holds: bool
    applicable: bool
    contraction: float


class ConditionNumberBound(NamedTuple):
    condition_number: float
    realized: float
    bound: float
    holds: bool
    applicable: bool


def _norm(x: ComplexMatrix, pair: PerturbationPair) -> float:
    return operator_norm(x, pair.norm)


def _unpack(pair: PerturbationPair, cfg: ToleranceConfig):
    a, a_dag = require_mp_pair(pair.a, pair.a_dag, cfg, pair.norm)
    b = as_square(pair.b)
    if b.shape != a.shape:
        raise ShapeError(f"a and b differ in shape: {a.shape} vs {b.shape}")
    return a, a_dag, b


def satisfies_condition_p(pair: PerturbationPair, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> ConditionP:
    a, a_dag, b = _unpack(pair, cfg)
    e = b - a
    p, q = a @ a_dag, a_dag @ a
    scale = max(1.0, _norm(e, pair))
    residual = _norm(e - p @ e @ q, pair)
    split_residual = max(_norm(e - p @ e, pair), _norm(e - e @ q, pair))
    contraction = _norm(a_dag @ e, pair)

    projected = residual <= cfg.residual_tol * scale
    if projected != (split_residual <= cfg.residual_tol * scale):
        logger.warning(
            "Corner and split forms of the projection identity disagree (%.3e vs %.3e)", residual, split_residual
        )
    satisfied = projected and contraction < 1.0 - CONTRACTION_MARGIN
    logger.debug("Condition (P): residual=%.3e contraction=%.6f satisfied=%s", residual, contraction, satisfied)
    return ConditionP(satisfied, residual, contraction, split_residual)


def _require_condition_p(pair: PerturbationPair, cfg: ToleranceConfig) -> ConditionP:
    check = satisfies_condition_p(pair, cfg)
    if not check.satisfied:
        raise ConditionPError(
            f"b does not satisfy condition (P) at a (residual {check.residual:.3e}, "
            f"contraction {check.contraction:.6f})",
            residual=check.residual,
            contraction=check.contraction,
        )
    return check


def check_factorizations(pair: PerturbationPair, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> CheckReport:
    """b = a(1 + a†e) = (1 + ea†)a and (1 + a†e)^-1 a† = a†(1 + ea†)^-1, e = b - a."""
    _require_condition_p(pair, cfg)
    a, a_dag, b = _unpack(pair, cfg)
    one = identity_like(a)
    e = b - a
    right_factor = one + a_dag @ e
    left_factor = one + e @ a_dag

    right_verdict = is_invertible(right_factor, cfg)
    left_verdict = is_invertible(left_factor, cfg)
    statements = [
        Statement("right_factorization", close(a @ right_factor, b, cfg), euclidean_norm(a @ right_factor - b)),
        Statement("left_factorization", close(left_factor @ a, b, cfg), euclidean_norm(left_factor @ a - b)),
    ]
    if right_verdict.invertible and left_verdict.invertible:
        swapped_left = scipy.linalg.solve(right_factor, a_dag)
        swapped_right = scipy.linalg.solve(left_factor.T, a_dag.T).T
        statements.append(
            Statement(
                "factors_invertible_and_swap",
                close(swapped_left, swapped_right, cfg),
                euclidean_norm(swapped_left - swapped_right),
            )
        )
    else:
        statements.append(
            Statement("factors_invertible_and_swap", False, min(right_verdict.margin, left_verdict.margin))
        )
    return CheckReport("factorizations", statements)


def perturbed_mp(pair: PerturbationPair, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> Tuple[ComplexMatrix, MPCertificate]:
    """b† = (1 + a†(b - a))^-1 a†, certified under the pair's norm."""
    _require_condition_p(pair, cfg)
    a, a_dag, b = _unpack(pair, cfg)
    b_dag = scipy.linalg.solve(identity_like(a) + a_dag @ (b - a), a_dag)
    certificate = mp_verify(b, b_dag, pair.norm, cfg)

    if not close(b @ b_dag, a @ a_dag, cfg) or not close(b_dag @ b, a_dag @ a, cfg):
        raise NumericalError("Closed-form inverse does not reproduce aa† and a†a")
    if not certificate.valid:
        logger.warning("Closed-form inverse failed certification (residual %.3e)", certificate.max_residual)
    return b_dag, certificate


def _relative_error(pair: PerturbationPair, b_dag: ComplexMatrix) -> float:
    reference = _norm(pair.a_dag, pair)
    if reference == 0:
        return 0.0
    return _norm(b_dag - pair.a_dag, pair) / reference


def _within(value: float, bound: float, cfg: ToleranceConfig) -> bool:
    return value <= bound + cfg.residual_tol * max(1.0, abs(bound))


def error_bound(pair: PerturbationPair, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> ErrorBound:
    check = _require_condition_p(pair, cfg)
    b_dag, _ = perturbed_mp(pair, cfg)
    realized = _relative_error(pair, b_dag)
    bound = check.contraction / (1.0 - check.contraction)
    return ErrorBound(realized, bound, _within(realized, bound, cfg))


def norm_bracket(pair: PerturbationPair, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> NormBracket:
    check = _require_condition_p(pair, cfg)
    b_dag, _ = perturbed_mp(pair, cfg)
    base = _norm(pair.a_dag, pair)
    lower = base / (1.0 + check.contraction)
    upper = base / (1.0 - check.contraction)
    value = _norm(b_dag, pair)
    holds = _within(lower, value, cfg) and _within(value, upper, cfg)
    return NormBracket(lower, value, upper, holds)


def reverse_condition(pair: PerturbationPair, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> ReverseCheck:
    """Below contraction 1/2, a satisfies condition (P) at b in turn."""
    check = _require_condition_p(pair, cfg)
    if check.contraction >= REVERSE_THRESHOLD:
        return ReverseCheck(True, False, float("nan"))
    b_dag, _ = perturbed_mp(pair, cfg)
    reverse = PerturbationPair(a=pair.b, a_dag=b_dag, b=pair.a, norm=pair.norm)
    result = satisfies_condition_p(reverse, cfg)
    return ReverseCheck(result.satisfied, True, result.contraction)


def condition_number_bound(pair: PerturbationPair, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> ConditionNumberBound:
    """Relative error of b† against k†(a) = ||a|| ||a†||, when ||a†|| ||b - a|| < 1."""
    a, a_dag, b = _unpack(pair, cfg)
    size = _norm(a, pair)
    condition_number = size * _norm(a_dag, pair)
    ratio = _norm(a_dag, pair) * _norm(b - a, pair)
    if size == 0 or ratio >= 1.0:
        return ConditionNumberBound(condition_number, float("nan"), float("nan"), True, False)
    realized = error_bound(pair, cfg).realized
    # k† ||b - a|| / ||a|| is ||a†|| ||b - a||
    bound = ratio / (1.0 - ratio)
    return ConditionNumberBound(condition_number, realized, bound, _within(realized, bound, cfg), True)


@dataclass
class ProductReport:
    """Inverse identities for the four mixed products and the class of each product."""

    identities: CheckReport
    product_classes: Dict[str, Dict[str, Optional[bool]]]
    base_co_ep: bool
    co_ep_preserved: Optional[bool] = None
    notes: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.identities.passed

    def to_dict(self) -> Dict[str, Any]:
        return json_ready(
            {
                "identities": self.identities.to_dict(),
                "product_classes": self.product_classes,
                "base_co_ep": self.base_co_ep,
                "co_ep_preserved": self.co_ep_preserved,
                "notes": self.notes,
            }
        )


def product_inverses(pair: PerturbationPair, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> ProductReport:
    """(ab†)† = ba†, (b†a)† = a†b, (ba†)† = ab†, (a†b)† = b†a."""
    b_dag, _ = perturbed_mp(pair, cfg)
    a, a_dag, b = _unpack(pair, cfg)
    products = {
        "a_b_dag": (a @ b_dag, b @ a_dag),
        "b_dag_a": (b_dag @ a, a_dag @ b),
        "b_a_dag": (b @ a_dag, a @ b_dag),
        "a_dag_b": (a_dag @ b, b_dag @ a),
    }
    statements = []
    classes = {}
    for name, (product, claimed) in products.items():
        certificate = mp_verify(product, claimed, pair.norm, cfg)
        statements.append(Statement(f"{name}_inverse", certificate.valid, certificate.max_residual))
        report = classify(product, pair.norm, cfg, a_dag=claimed)
        classes[name] = {"ep": report.ep, "co_ep": report.co_ep}

    base_co_ep = is_invertible(a @ a_dag - a_dag @ a, cfg).invertible
    result = ProductReport(CheckReport("product-inverses", statements), classes, base_co_ep)
    if base_co_ep:
        # each product P has PP† = aa† and P†P = aa† (or a†a twice), so it is EP
        result.co_ep_preserved = all(entry["co_ep"] for entry in classes.values())
        if not result.co_ep_preserved:
            result.notes.append("products of a co-EP base are EP, hence not co-EP")
    return result


def check_class_preservation(pair: PerturbationPair, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> CheckReport:
    """A co-EP a passes co-EP and its idempotents h, k to b."""
    a, a_dag, b = _unpack(pair, cfg)
    if not is_invertible(a @ a_dag - a_dag @ a, cfg).invertible:
        raise PreconditionError("Class preservation needs a co-EP base element")
    b_dag, _ = perturbed_mp(pair, cfg)
    difference = is_invertible(b @ b_dag - b_dag @ b, cfg)
    statements = [Statement("b_co_ep", difference.invertible, difference.margin)]
    if difference.invertible:
        h_a, k_a = canonical_idempotents(a, a_dag, cfg)
        h_b, k_b = canonical_idempotents(b, b_dag, cfg)
        statements += [
            Statement("same_h", close(h_a, h_b, cfg), euclidean_norm(h_a - h_b)),
            Statement("same_k", close(k_a, k_b, cfg), euclidean_norm(k_a - k_b)),
        ]
    return CheckReport("class-preservation", statements)


def gen_perturbation(
    a,
    a_dag,
    eps: float,
    seed=None,
    norm: NormSpec = EUCLIDEAN,
    cfg: ToleranceConfig = DEFAULT_TOLERANCES,
) -> ComplexMatrix:
    """b = a + s·aa† e a†a with e random and s chosen so that ||a†(b - a)|| = eps."""
    if not 0.0 <= eps < 1.0:
        raise InvalidInputError(f"eps must lie in [0, 1), got {eps}")
    a, a_dag = require_mp_pair(a, a_dag, cfg, norm)
    if eps == 0:
        return a.copy()
    if euclidean_norm(a) == 0:
        raise PreconditionError("The zero element admits no perturbation under condition (P)")

    rng = np.random.default_rng(seed)
    n = a.shape[0]
    p, q = a @ a_dag, a_dag @ a
    e = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    direction = p @ e @ q
    reach = operator_norm(a_dag @ direction, norm)
    if reach == 0:
        raise NumericalError("Random direction vanished on the corner aa† A a†a")
    # the norm is homogeneous, so one scaling lands on eps
    return a + (eps / reach) * direction


@dataclass
class PerturbationReport:
    eps: float
    satisfies_p: bool
    projection_residual: float
    contraction: float
    b: ComplexMatrix
    b_dag: Optional[ComplexMatrix] = None
    realized_error: float = float("nan")
    error_bound: float = float("nan")
    error_bound_holds: bool = False
    bracket: Tuple[float, float, float] = (float("nan"),) * 3
    bracket_holds: bool = False
    reverse_holds: bool = False
    reverse_applicable: bool = False
    condition_number: float = float("nan")
    condition_bound: float = float("nan")
    condition_bound_holds: bool = True
    condition_bound_applicable: bool = False
    svd_distance: float = float("nan")
    projections_preserved: bool = False

    @property
    def all_hold(self) -> bool:
        return (
            self.satisfies_p
            and self.error_bound_holds
            and self.bracket_holds
            and self.projections_preserved
            and (self.reverse_holds or not self.reverse_applicable)
            and (self.condition_bound_holds or not self.condition_bound_applicable)
            and not self.svd_distance > SVD_AGREEMENT_TOL * max(1.0, self.bracket[1])
        )

    def to_row(self) -> Dict[str, Any]:
        lower, value, upper = self.bracket
        return json_ready(
            {
                "eps": self.eps,
                "satisfies_p": self.satisfies_p,
                "projection_residual": self.projection_residual,
                "contraction": self.contraction,
                "realized_error": self.realized_error,
                "error_bound": self.error_bound,
                "error_bound_holds": self.error_bound_holds,
                "bracket_lower": lower,
                "b_dag_norm": value,
                "bracket_upper": upper,
                "bracket_holds": self.bracket_holds,
                "reverse_holds": self.reverse_holds,
                "reverse_applicable": self.reverse_applicable,
                "condition_number": self.condition_number,
                "condition_bound": self.condition_bound,
                "condition_bound_holds": self.condition_bound_holds,
                "condition_bound_applicable": self.condition_bound_applicable,
                "svd_distance": self.svd_distance,
                "all_hold": self.all_hold,
            }
        )

    def to_dict(self) -> Dict[str, Any]:
        data = self.to_row()
        data["b"] = encode_matrix(self.b)
        data["b_dag"] = encode_matrix(self.b_dag) if self.b_dag is not None else None
        return data


def build_report(pair: PerturbationPair, eps: float = float("nan"), cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> PerturbationReport:
    check = satisfies_condition_p(pair, cfg)
    report = PerturbationReport(
        eps=eps,
        satisfies_p=check.satisfied,
        projection_residual=check.residual,
        contraction=check.contraction,
        b=as_square(pair.b),
    )
    if not check.satisfied:
        return report

    b_dag, _ = perturbed_mp(pair, cfg)
    report.b_dag = b_dag
    report.projections_preserved = True
    report.realized_error, report.error_bound, report.error_bound_holds = error_bound(pair, cfg)
    bracket = norm_bracket(pair, cfg)
    report.bracket = (bracket.lower, bracket.value, bracket.upper)
    report.bracket_holds = bracket.holds
    report.reverse_holds, report.reverse_applicable, _ = reverse_condition(pair, cfg)
    condition = condition_number_bound(pair, cfg)
    report.condition_number = condition.condition_number
    report.condition_bound = condition.bound
    report.condition_bound_holds = condition.holds
    report.condition_bound_applicable = condition.applicable
    if pair.norm.is_euclidean:
        report.svd_distance = euclidean_norm(b_dag - np.linalg.pinv(report.b, rcond=cfg.rank_tol))
    return report


def perturbation_sweep(
    a,
    a_dag,
    eps_grid: Sequence[float],
    seed=None,
    norm: NormSpec = EUCLIDEAN,
    cfg: ToleranceConfig = DEFAULT_TOLERANCES,
) -> List[PerturbationReport]:
    """One report per eps along a single random direction."""
    reports = []
    for eps in eps_grid:
        b = gen_perturbation(a, a_dag, eps, seed, norm, cfg)
        reports.append(build_report(PerturbationPair(as_square(a), as_square(a_dag), b, norm), eps, cfg))
    return reports

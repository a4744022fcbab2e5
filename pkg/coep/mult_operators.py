"""Left and right multiplication operators on the algebra of n x n matrices.

An element x is identified with its column-major vectorization vec(x) in
C^(n*n), so vec(ax) = (I ⊗ a) vec(x) and vec(xa) = (a^T ⊗ I) vec(x). Ideals
and annihilators then become ranges and kernels:

    aA = R(L_a)    Aa = R(R_a)    a^-1(0) = N(L_a)    a_-1(0) = N(R_a)
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Tuple

import numpy as np

from coep.errors import InvalidInputError
from coep.linalg_core import (
    DEFAULT_TOLERANCES,
    ComplexMatrix,
    Subspace,
    ToleranceConfig,
    as_square,
    contains_vector,
    euclidean_norm,
    identity_like,
    image,
    inclusion_residual,
    is_invertible,
    null_basis,
    range_basis,
    subspace_contains,
    subspace_equal,
    subspace_intersect,
    subspace_sum,
)
from coep.pseudoinverse import generalized_inverse, require_mp_pair
from coep.reports import CheckReport, Statement

logger = logging.getLogger(__name__)


class Side(Enum):
    LEFT = "left"
    RIGHT = "right"


def vec(x: ComplexMatrix) -> np.ndarray:
    return np.asarray(x).reshape(-1, order="F")


def unvec(v: np.ndarray, n: int) -> ComplexMatrix:
    return np.asarray(v).reshape((n, n), order="F")


@dataclass(frozen=True)
class LiftedOperator:
    side: Side
    source: ComplexMatrix
    action: ComplexMatrix

    def apply(self, x: ComplexMatrix) -> ComplexMatrix:
        return unvec(self.action @ vec(x), self.source.shape[0])


def lift(a, side: Side = Side.LEFT) -> LiftedOperator:
    matrix = as_square(a)
    one = identity_like(matrix)
    if side == Side.LEFT:
        action = np.kron(one, matrix)
    else:
        action = np.kron(matrix.T, one)
    return LiftedOperator(side, matrix, action)


def right_ideal(a, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> Subspace:
    """aA"""
    return range_basis(lift(a, Side.LEFT).action, cfg)


def left_ideal(a, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> Subspace:
    """Aa"""
    return range_basis(lift(a, Side.RIGHT).action, cfg)


def left_annihilator_space(a, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> Subspace:
    """a^-1(0) = {x : ax = 0}"""
    return null_basis(lift(a, Side.LEFT).action, cfg)


def right_annihilator_space(a, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> Subspace:
    """a_-1(0) = {x : xa = 0}"""
    return null_basis(lift(a, Side.RIGHT).action, cfg)


def is_regular(a, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> Tuple[bool, float]:
    matrix = as_square(a)
    b = generalized_inverse(matrix, cfg)
    residual = euclidean_norm(matrix @ b @ matrix - matrix) / max(1.0, euclidean_norm(matrix))
    return residual <= cfg.residual_tol, residual


class SidesCheck(NamedTuple):
    lhs: bool
    rhs: bool


class SumInvertibilityCheck(NamedTuple):
    invertible: bool
    conditions: Tuple[bool, bool, bool, bool]


def _images_agree(first: Subspace, second: Subspace, target: Subspace, cfg, equal_target: bool):
    agree = subspace_equal(first, second, cfg)
    if equal_target:
        placed = subspace_equal(second, target, cfg)
    else:
        placed = subspace_contains(target, second, cfg)
    margin = max(inclusion_residual(first, second), inclusion_residual(second, first), inclusion_residual(second, target))
    return agree and placed, margin


def audit_ideal_images(a, a_dag, lam: complex, mu: complex, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> CheckReport:
    """Images of the complementary ideals (1-aa†)A and (1-a†a)A under L_{λa+μa†}."""
    if lam == 0 or mu == 0:
        raise InvalidInputError("λ and μ must be nonzero")
    a, a_dag = require_mp_pair(a, a_dag, cfg)
    one = identity_like(a)
    p, q = a @ a_dag, a_dag @ a
    s = lam * a + mu * a_dag

    left_s = lift(s).action
    left_a = lift(a).action
    left_dag = lift(a_dag).action
    w1 = right_ideal(one - p, cfg)
    w2 = right_ideal(one - q, cfg)
    p_ideal = right_ideal(p, cfg)
    q_ideal = right_ideal(q, cfg)

    image_s_w1, image_a_w1 = image(left_s, w1, cfg), image(left_a, w1, cfg)
    image_s_w2, image_dag_w2 = image(left_s, w2, cfg), image(left_dag, w2, cfg)
    first, first_margin = _images_agree(image_s_w1, image_a_w1, p_ideal, cfg, equal_target=False)
    second, second_margin = _images_agree(image_s_w2, image_dag_w2, q_ideal, cfg, equal_target=False)

    kernel_s = null_basis(left_s, cfg)
    triple = {
        "ideals_meet_trivially": subspace_intersect(w1, w2, cfg).is_zero,
        "kernel_meets_first_trivially": subspace_intersect(kernel_s, w1, cfg).is_zero,
        "kernel_meets_second_trivially": subspace_intersect(kernel_s, w2, cfg).is_zero,
    }
    triple_agrees = len(set(triple.values())) == 1

    ideal_sum = subspace_sum(w1, w2, cfg)
    dagger_inside = contains_vector(ideal_sum, vec(a_dag), cfg)
    element_inside = contains_vector(ideal_sum, vec(a), cfg)
    fourth, fourth_margin = _images_agree(image_s_w1, image_a_w1, p_ideal, cfg, equal_target=True)
    fifth, fifth_margin = _images_agree(image_s_w2, image_dag_w2, q_ideal, cfg, equal_target=True)

    statements = [
        Statement("first_ideal_image_inside_range", first, first_margin),
        Statement("second_ideal_image_inside_range", second, second_margin),
        Statement(
            "kernel_intersections_agree",
            triple_agrees,
            note=", ".join(f"{k}={v}" for k, v in triple.items()),
        ),
        Statement("first_ideal_image_fills_range", fourth, fourth_margin, applicable=dagger_inside),
        Statement("second_ideal_image_fills_range", fifth, fifth_margin, applicable=element_inside),
    ]
    return CheckReport("ideal-images", statements)


def _sum_parts(a, a_dag, cfg):
    a, a_dag = require_mp_pair(a, a_dag, cfg)
    p, q = a @ a_dag, a_dag @ a
    return a, a_dag, p, q, p + q


def _cancellation_conditions(a, a_dag, p, q, cfg) -> Tuple[bool, bool]:
    one = identity_like(a)
    ideals_apart = subspace_intersect(right_ideal(q, cfg), right_ideal(p @ (one - q), cfg), cfg).is_zero
    annihilators_apart = subspace_intersect(
        left_annihilator_space(a, cfg), left_annihilator_space(a_dag, cfg), cfg
    ).is_zero
    return ideals_apart, annihilators_apart


def check_sum_injective(a, a_dag, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> SidesCheck:
    """L_{aa†+a†a} injective vs the ideal and annihilator conditions."""
    a, a_dag, p, q, t = _sum_parts(a, a_dag, cfg)
    lhs = left_annihilator_space(t, cfg).is_zero
    ideals_apart, annihilators_apart = _cancellation_conditions(a, a_dag, p, q, cfg)
    return SidesCheck(lhs, ideals_apart and annihilators_apart)


def check_sum_surjective(a, a_dag, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> SidesCheck:
    """L_{aa†+a†a} surjective vs regularity and a trivial right annihilator."""
    a, a_dag, p, q, t = _sum_parts(a, a_dag, cfg)
    lhs = right_ideal(t, cfg).is_full
    regular, _ = is_regular(t, cfg)
    return SidesCheck(lhs, regular and right_annihilator_space(t, cfg).is_zero)


def check_sum_invertible(a, a_dag, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> SumInvertibilityCheck:
    a, a_dag, p, q, t = _sum_parts(a, a_dag, cfg)
    regular, _ = is_regular(t, cfg)
    ideals_apart, annihilators_apart = _cancellation_conditions(a, a_dag, p, q, cfg)
    conditions = (regular, right_annihilator_space(t, cfg).is_zero, ideals_apart, annihilators_apart)
    return SumInvertibilityCheck(is_invertible(t, cfg).invertible, conditions)

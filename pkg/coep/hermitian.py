"""Hermitian elements: ||exp(ita)|| = 1 for every real t.

Under the Euclidean norm this is exactly self-adjointness. For other norms
the condition is sampled on a doubling grid of t values and backed by a
one-sided derivative test on ||1 + ita||. Such verdicts are numerical: a
finite grid cannot certify every real t.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
import scipy.linalg

from coep.linalg_core import (
    DEFAULT_TOLERANCES,
    ComplexMatrix,
    ToleranceConfig,
    as_square,
    euclidean_norm,
    identity_like,
)
from coep.norm_types import NormSpec
from coep.operator_norms import load_norm

logger = logging.getLogger(__name__)

GRID_BASE = 1e-3
GRID_DOUBLINGS = 20
DERIVATIVE_STEP = 1e-5
# one-sided slopes are accepted up to sqrt(hermitian_tol)
DERIVATIVE_TOL_EXPONENT = 0.5


class HermitianMethod(Enum):
    EXACT_L2 = "exact-l2"
    SAMPLED = "sampled"
    DERIVATIVE = "derivative"


@dataclass(frozen=True)
class HermitianVerdict:
    is_hermitian: bool
    defect: float
    derivative_defect: float
    method: HermitianMethod
    numerical: bool

    def to_dict(self) -> dict:
        return {
            "is_hermitian": self.is_hermitian,
            "defect": self.defect,
            "derivative_defect": self.derivative_defect,
            "method": self.method.value,
            "numerical": self.numerical,
        }


def t_grid() -> np.ndarray:
    positive = GRID_BASE * 2.0 ** np.arange(GRID_DOUBLINGS + 1)
    return np.concatenate([positive, -positive])


def hermitian_defect(a, norm: NormSpec, cfg: ToleranceConfig = DEFAULT_TOLERANCES) -> float:
    """sup over the t-grid of | ||exp(ita)|| - 1 |."""
    matrix = as_square(a)
    operator = load_norm(norm)
    worst = 0.0
    # increasing |t|, so a blow-up at large t does not hide the small-t defect
    for t in sorted(t_grid(), key=abs):
        with np.errstate(over="ignore", invalid="ignore"):
            value = operator.operator_norm(scipy.linalg.expm(1j * t * matrix))
        if not np.isfinite(value):
            logger.debug("exp(ita) overflowed at t=%g", t)
            return float("inf")
        worst = max(worst, abs(value - 1.0))
    return worst


def derivative_defect(a, norm: NormSpec) -> float:
    """Largest one-sided slope of t -> ||1 + ita|| at 0.

    Each side uses a Richardson combination of steps h and 2h so that the
    second-order growth of a hermitian element cancels.
    """
    matrix = as_square(a)
    operator = load_norm(norm)
    one = identity_like(matrix)

    def slope(h: float) -> float:
        return (operator.operator_norm(one + 1j * h * matrix) - 1.0) / abs(h)

    worst = 0.0
    for sign in (1.0, -1.0):
        h = sign * DERIVATIVE_STEP
        worst = max(worst, abs(2.0 * slope(h) - slope(2.0 * h)))
    return worst


def is_hermitian(
    a,
    norm: NormSpec,
    cfg: ToleranceConfig = DEFAULT_TOLERANCES,
    method: Optional[HermitianMethod] = None,
) -> HermitianVerdict:
    matrix = as_square(a)
    if method is None:
        method = HermitianMethod.EXACT_L2 if norm.is_euclidean else HermitianMethod.SAMPLED

    if method == HermitianMethod.EXACT_L2:
        # defect here is the self-adjointness residual, relative to ||a||
        defect = euclidean_norm(matrix - matrix.conj().T) / max(1.0, euclidean_norm(matrix))
        return HermitianVerdict(
            is_hermitian=defect <= cfg.hermitian_tol,
            defect=defect,
            derivative_defect=0.0,
            method=method,
            numerical=False,
        )

    slope_tol = cfg.hermitian_tol ** DERIVATIVE_TOL_EXPONENT
    slope = derivative_defect(matrix, norm)
    if method == HermitianMethod.DERIVATIVE:
        return HermitianVerdict(
            is_hermitian=slope <= slope_tol,
            defect=float("nan"),
            derivative_defect=slope,
            method=method,
            numerical=True,
        )

    defect = hermitian_defect(matrix, norm, cfg)
    sampled = defect <= cfg.hermitian_tol
    by_slope = slope <= slope_tol
    if sampled != by_slope:
        logger.warning(
            "Sampled and derivative hermitian tests disagree under %s (defect %.3e, slope %.3e)",
            norm.label,
            defect,
            slope,
        )
    return HermitianVerdict(
        is_hermitian=sampled and by_slope,
        defect=defect,
        derivative_defect=slope,
        method=method,
        numerical=True,
    )

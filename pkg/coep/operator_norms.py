import logging
from functools import lru_cache

import numpy as np

from coep.errors import UnsupportedNormError
from coep.norm_types import NormKind, NormSpec

logger = logging.getLogger(__name__)


class OperatorNorm:
    def __init__(self, spec: NormSpec):
        self.spec = spec

    def vector_norm(self, x: np.ndarray) -> float:
        raise NotImplementedError("should be implemented in sub-class")

    def operator_norm(self, a: np.ndarray) -> float:
        raise NotImplementedError("should be implemented in sub-class")


class ExactOperatorNorm(OperatorNorm):
    """Induced norms with a closed form, evaluated through numpy.linalg.norm."""

    vector_order = None
    matrix_order = None

    def vector_norm(self, x: np.ndarray) -> float:
        return float(np.linalg.norm(np.ravel(x), ord=self.vector_order))

    def operator_norm(self, a: np.ndarray) -> float:
        if a.size == 0:
            return 0.0
        return float(np.linalg.norm(a, ord=self.matrix_order))


class L1Norm(ExactOperatorNorm):
    # max column sum
    vector_order = 1
    matrix_order = 1


class L2Norm(ExactOperatorNorm):
    # largest singular value
    vector_order = 2
    matrix_order = 2


class LInfNorm(ExactOperatorNorm):
    # max row sum
    vector_order = np.inf
    matrix_order = np.inf


class LpNorm(OperatorNorm):
    """Lp operator norm estimated by norm-ratio ascent with dual-norm mappings.

    Each step maps y = a x to its dual vector, pulls it back through a^H and
    maps the result to the unit Lp sphere again. The iteration stops at a
    stationary point (no dual direction improves on the current one) or when
    the ratio stops growing by more than the declared tolerance. The value
    returned is an attained ratio, hence a lower bound on the true norm.
    """

    def __init__(self, spec: NormSpec):
        super().__init__(spec)
        self.p = spec.p
        self.q = spec.p / (spec.p - 1.0)

    def vector_norm(self, x: np.ndarray) -> float:
        return float(np.linalg.norm(np.ravel(x), ord=self.p))

    @staticmethod
    def _dual(v: np.ndarray, r: float) -> np.ndarray:
        # unit vector in the dual norm of ||.||_r attaining <w, v> = ||v||_r
        magnitude = np.abs(v)
        scale = np.linalg.norm(v, ord=r)
        if scale == 0:
            return np.zeros_like(v)
        phase = np.ones_like(v)
        nonzero = magnitude > 0
        phase[nonzero] = v[nonzero] / magnitude[nonzero]
        return (magnitude / scale) ** (r - 1.0) * phase

    def _ascend(self, a: np.ndarray, x: np.ndarray) -> float:
        best = 0.0
        for step in range(self.spec.iterations):
            y = a @ x
            ratio = self.vector_norm(y)
            if ratio == 0:
                break
            if step > 0 and ratio - best <= self.spec.tolerance * ratio:
                best = max(best, ratio)
                break
            best = max(best, ratio)
            z = a.conj().T @ self._dual(y, self.p)
            # Hoelder: ||z||_q >= Re<z, x> with equality at a stationary point
            if np.linalg.norm(z, ord=self.q) <= np.real(np.vdot(z, x)) * (1.0 + self.spec.tolerance):
                break
            x = self._dual(z, self.q)
        return best

    def operator_norm(self, a: np.ndarray) -> float:
        if a.size == 0:
            return 0.0
        cols = a.shape[1]
        column_norms = np.linalg.norm(a, ord=self.p, axis=0)
        starts = [np.full(cols, cols ** (-1.0 / self.p), dtype=complex)]
        start = np.zeros(cols, dtype=complex)
        start[int(np.argmax(column_norms))] = 1.0
        starts.append(start)
        estimate = max(float(np.max(column_norms)), *(self._ascend(a, x) for x in starts))
        logger.debug("lp:%g operator norm estimate %.6e", self.p, estimate)
        return estimate


@lru_cache(maxsize=None)
def load_norm(spec: NormSpec) -> OperatorNorm:
    if spec.kind == NormKind.L1:
        return L1Norm(spec)
    elif spec.kind == NormKind.L2:
        return L2Norm(spec)
    elif spec.kind == NormKind.LINF:
        return LInfNorm(spec)
    elif spec.kind == NormKind.LP:
        return LpNorm(spec)
    else:
        raise UnsupportedNormError(f"Unsupported norm type: {spec.kind}")

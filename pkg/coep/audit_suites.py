"""Seeded instance populations and the suites that audit them.

Instance ``i`` of a run with seed ``s`` is drawn from
``SeedSequence([s, i])`` alone, so any single instance can be rebuilt from
(seed, index, dims) without generating the ones before it.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from coep.classification import (
    audit_coep,
    audit_hermitian_coep,
    audit_operator_coep,
    audit_subspace_coep,
    check_dimension_split,
    check_difference_not_identity,
)
from coep.errors import InvalidInputError
from coep.generators import SINGULAR_VALUE_RANGE, InstanceClass, gen_random_mp, generate
from coep.linalg_core import DEFAULT_TOLERANCES, ComplexMatrix, ToleranceConfig
from coep.matrix_io import encode_matrix
from coep.mult_operators import (
    audit_ideal_images,
    check_sum_injective,
    check_sum_invertible,
    check_sum_surjective,
)
from coep.pseudoinverse import mp_inverse_euclidean
from coep.reports import json_ready

logger = logging.getLogger(__name__)

MAX_DIMENSION = 16
COEFFICIENT_PAIRS = 5

CLASS_CYCLE = (
    InstanceClass.HERMITIAN_COEP,
    InstanceClass.COEP,
    InstanceClass.EP,
    InstanceClass.RANDOM,
    InstanceClass.HERMITIAN_COEP,
    InstanceClass.COEP,
    InstanceClass.EP,
    InstanceClass.RANDOM,
    InstanceClass.ZERO,
    InstanceClass.IDENTITY,
)
EVEN_ONLY = (InstanceClass.HERMITIAN_COEP, InstanceClass.COEP)


class Suite(Enum):
    COEP = "coep"
    HERMITIAN_COEP = "hermitian-coep"
    OPERATOR_COEP = "operator-coep"
    SUBSPACE_COEP = "subspace-coep"
    SUM_INJECTIVE = "sum-injective"
    SUM_SURJECTIVE = "sum-surjective"
    SUM_INVERTIBLE = "sum-invertible"
    IDEAL_IMAGES = "ideal-images"
    DIMENSION_SPLIT = "dimension-split"
    DIFFERENCE_NOT_IDENTITY = "difference-not-identity"


COEFFICIENT_SUITES = (Suite.COEP, Suite.OPERATOR_COEP, Suite.IDEAL_IMAGES)


@dataclass(frozen=True)
class Instance:
    index: int
    kind: InstanceClass
    n: int
    seed: int
    a: ComplexMatrix
    a_dag: ComplexMatrix

    def to_dict(self) -> Dict[str, Any]:
        return {
            "index": self.index,
            "kind": self.kind.value,
            "n": self.n,
            "seed": self.seed,
            "a": encode_matrix(self.a),
            "a_dag": encode_matrix(self.a_dag),
        }


def check_dims(dims: Tuple[int, int]) -> Tuple[int, int]:
    low, high = dims
    if not 1 <= low <= high <= MAX_DIMENSION:
        raise InvalidInputError(f"Dimension range must satisfy 1 <= a <= b <= {MAX_DIMENSION}, got {low}..{high}")
    return low, high


def _random_rank(n: int, rng: np.random.Generator) -> int:
    # rank n/2 is where random elements become co-EP with arbitrarily small margins
    ranks = [r for r in range(1, n + 1) if 2 * r != n]
    return int(rng.choice(ranks))


def build_instance(index: int, seed: int, dims: Tuple[int, int]) -> Instance:
    low, high = check_dims(dims)
    rng = np.random.default_rng(np.random.SeedSequence([seed, index]))
    kind = CLASS_CYCLE[index % len(CLASS_CYCLE)]
    evens = [n for n in range(low, high + 1) if n % 2 == 0]
    if kind in EVEN_ONLY and not evens:
        kind = InstanceClass.RANDOM
    n = int(rng.choice(evens if kind in EVEN_ONLY else list(range(low, high + 1))))

    if kind == InstanceClass.RANDOM:
        a = gen_random_mp(n, rng, _random_rank(n, rng))
    else:
        a = generate(kind, n, rng)
    a_dag, certificate = mp_inverse_euclidean(a)
    if not certificate.valid:
        logger.warning("Instance %d (%s, n=%d) has a weak certificate: %.3e", index, kind.value, n, certificate.max_residual)
    return Instance(index, kind, n, seed, a, a_dag)


def build_population(count: int, seed: int, dims: Tuple[int, int]) -> List[Instance]:
    if count < 1:
        raise InvalidInputError(f"Instance count must be at least 1, got {count}")
    return [build_instance(index, seed, dims) for index in range(count)]


def coefficient_pairs(seed: int, index: int, pairs: int = COEFFICIENT_PAIRS) -> List[Tuple[complex, complex]]:
    """Nonzero (λ, μ) with moduli in SINGULAR_VALUE_RANGE and uniform phases."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, index, 1]))
    moduli = rng.uniform(*SINGULAR_VALUE_RANGE, size=(pairs, 2))
    phases = np.exp(2j * np.pi * rng.random((pairs, 2)))
    values = moduli * phases
    return [(complex(lam), complex(mu)) for lam, mu in values]


@dataclass
class SuiteOutcome:
    instance: Instance
    agree: bool
    details: List[Dict[str, Any]] = field(default_factory=list)
    expected: Optional[bool] = None

    def to_dict(self, with_matrices: bool = False) -> Dict[str, Any]:
        data = {
            "index": self.instance.index,
            "kind": self.instance.kind.value,
            "n": self.instance.n,
            "agree": self.agree,
            "expected": self.expected,
            "details": self.details,
        }
        if with_matrices or not self.agree:
            data["instance"] = self.instance.to_dict()
        return json_ready(data)

    def to_row(self) -> Dict[str, Any]:
        return {
            "index": self.instance.index,
            "kind": self.instance.kind.value,
            "n": self.instance.n,
            "agree": self.agree,
        }


def _expected_value(suite: Suite, kind: InstanceClass) -> Optional[bool]:
    """Common statement value implied by the generator, where it is known."""
    if suite == Suite.HERMITIAN_COEP:
        return {InstanceClass.HERMITIAN_COEP: True, InstanceClass.COEP: False}.get(kind)
    if suite == Suite.COEP:
        if kind in EVEN_ONLY:
            return True
        if kind in (InstanceClass.EP, InstanceClass.ZERO, InstanceClass.IDENTITY):
            return False
    return None


def _audit_equivalences(audits, expected: Optional[bool]) -> Tuple[bool, List[Dict[str, Any]]]:
    agree = all(audit.all_agree for audit in audits)
    if expected is not None:
        agree = agree and all(audit.common_value == expected for audit in audits)
    return agree, [audit.to_dict() for audit in audits]


def run_instance(
    suite: Suite,
    instance: Instance,
    cfg: ToleranceConfig = DEFAULT_TOLERANCES,
    coefficients: Optional[Sequence[Tuple[complex, complex]]] = None,
) -> SuiteOutcome:
    a, a_dag = instance.a, instance.a_dag
    if coefficients is None:
        coefficients = coefficient_pairs(instance.seed, instance.index)
    expected = _expected_value(suite, instance.kind)

    if suite == Suite.COEP:
        agree, details = _audit_equivalences([audit_coep(a, a_dag, lam, mu, cfg) for lam, mu in coefficients], expected)
    elif suite == Suite.HERMITIAN_COEP:
        agree, details = _audit_equivalences([audit_hermitian_coep(a, a_dag, cfg)], expected)
    elif suite == Suite.OPERATOR_COEP:
        agree, details = _audit_equivalences(
            [audit_operator_coep(a, a_dag, lam, mu, cfg) for lam, mu in coefficients], expected
        )
    elif suite == Suite.SUBSPACE_COEP:
        agree, details = _audit_equivalences([audit_subspace_coep(a, a_dag, cfg)], expected)
    elif suite in (Suite.SUM_INJECTIVE, Suite.SUM_SURJECTIVE):
        check = (check_sum_injective if suite == Suite.SUM_INJECTIVE else check_sum_surjective)(a, a_dag, cfg)
        agree, details = check.lhs == check.rhs, [check._asdict()]
    elif suite == Suite.SUM_INVERTIBLE:
        check = check_sum_invertible(a, a_dag, cfg)
        agree, details = check.invertible == all(check.conditions), [check._asdict()]
    elif suite == Suite.IDEAL_IMAGES:
        reports = [audit_ideal_images(a, a_dag, lam, mu, cfg) for lam, mu in coefficients]
        agree, details = all(report.passed for report in reports), [report.to_dict() for report in reports]
    elif suite == Suite.DIMENSION_SPLIT:
        split = check_dimension_split(a, cfg, a_dag)
        agree, details = split.holds, [split._asdict()]
    elif suite == Suite.DIFFERENCE_NOT_IDENTITY:
        distance = check_difference_not_identity(a, a_dag, cfg)
        agree, details = distance.holds, [distance._asdict()]
    else:
        raise InvalidInputError(f"Unsupported suite: {suite}")

    if not agree:
        logger.warning("Suite %s disagrees on instance %d (%s, n=%d)", suite.value, instance.index, instance.kind.value, instance.n)
    return SuiteOutcome(instance, agree, json_ready(details), expected)


@dataclass
class SuiteSummary:
    suite: Suite
    seed: int
    dims: Tuple[int, int]
    outcomes: List[SuiteOutcome]

    @property
    def all_agree(self) -> bool:
        return all(outcome.agree for outcome in self.outcomes)

    @property
    def disagreements(self) -> List[int]:
        return [outcome.instance.index for outcome in self.outcomes if not outcome.agree]

    def to_dict(self, verbose: bool = False) -> Dict[str, Any]:
        return json_ready(
            {
                "suite": self.suite.value,
                "seed": self.seed,
                "dims": list(self.dims),
                "count": len(self.outcomes),
                "all_agree": self.all_agree,
                "disagreements": self.disagreements,
                "outcomes": [
                    outcome.to_dict(with_matrices=verbose) if verbose or not outcome.agree else outcome.to_row()
                    for outcome in self.outcomes
                ],
            }
        )

    def rows(self) -> List[Dict[str, Any]]:
        return [outcome.to_row() for outcome in self.outcomes]


def run_suite(
    suite: Suite,
    population: Sequence[Instance],
    cfg: ToleranceConfig = DEFAULT_TOLERANCES,
    coefficients: Optional[Sequence[Tuple[complex, complex]]] = None,
    workers: int = 1,
    progress: bool = True,
    seed: int = 0,
    dims: Tuple[int, int] = (1, 1),
) -> SuiteSummary:
    """Run one suite over a population; outcomes come back in index order."""
    if workers < 1:
        raise InvalidInputError(f"workers must be at least 1, got {workers}")

    def task(instance: Instance) -> SuiteOutcome:
        return run_instance(suite, instance, cfg, coefficients)

    outcomes: List[SuiteOutcome] = []
    with tqdm(total=len(population), unit="instance", disable=not progress) as pbar:
        pbar.set_description(f"Auditing {suite.value}")
        if workers == 1:
            for instance in population:
                outcomes.append(task(instance))
                pbar.update(1)
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                # map keeps submission order whatever the completion order
                for outcome in pool.map(task, population):
                    outcomes.append(outcome)
                    pbar.update(1)
    logger.info("Suite %s: %d/%d instances agree", suite.value, sum(o.agree for o in outcomes), len(outcomes))
    return SuiteSummary(suite, seed, dims, outcomes)

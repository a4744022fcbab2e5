"""Moore-Penrose inverses and co-EP elements in matrix algebras with pluggable norms."""

from coep.classification import ClassificationReport, classify
from coep.linalg_core import DEFAULT_TOLERANCES, ToleranceConfig
from coep.norm_types import EUCLIDEAN, NormSpec
from coep.pseudoinverse import MPCertificate, mp_inverse_euclidean, mp_verify

__all__ = [
    "ClassificationReport",
    "DEFAULT_TOLERANCES",
    "EUCLIDEAN",
    "MPCertificate",
    "NormSpec",
    "ToleranceConfig",
    "classify",
    "mp_inverse_euclidean",
    "mp_verify",
]

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from coep.errors import InvalidInputError


class NormKind(Enum):
    L1 = "l1"
    L2 = "l2"
    LINF = "linf"
    LP = "lp"


class EvaluationMode(Enum):
    EXACT = "exact"
    ESTIMATED = "estimated"


EXACT_KINDS = (NormKind.L1, NormKind.L2, NormKind.LINF)


@dataclass(frozen=True)
class NormSpec:
    """A vector norm on C^n together with the operator norm it induces.

    L1, L2 and LInf operator norms are always exact. Lp norms for other p
    are estimated by a norm-ratio ascent and give a lower bound.
    """

    kind: NormKind
    p: Optional[float] = None
    mode: Optional[EvaluationMode] = None
    iterations: int = 100
    tolerance: float = 1e-10

    def __post_init__(self):
        if self.kind == NormKind.LP:
            if self.p is None or not self.p > 1.0 or self.p == float("inf"):
                raise InvalidInputError(f"Lp norm needs a finite p > 1, got {self.p}")
        elif self.p is not None:
            raise InvalidInputError(f"{self.kind.value} norm takes no p parameter")
        if self.iterations < 1 or not self.tolerance > 0:
            raise InvalidInputError("estimation needs iterations >= 1 and tolerance > 0")
        implied = EvaluationMode.EXACT if self.kind in EXACT_KINDS else EvaluationMode.ESTIMATED
        if self.mode is None:
            object.__setattr__(self, "mode", implied)
        elif self.mode != implied:
            raise InvalidInputError(f"{self.kind.value} norm is evaluated {implied.value}, not {self.mode.value}")

    @classmethod
    def l1(cls) -> "NormSpec":
        return cls(NormKind.L1)

    @classmethod
    def l2(cls) -> "NormSpec":
        return cls(NormKind.L2)

    @classmethod
    def linf(cls) -> "NormSpec":
        return cls(NormKind.LINF)

    @classmethod
    def lp(cls, p: float, iterations: int = 100, tolerance: float = 1e-10) -> "NormSpec":
        return cls(
            NormKind.LP,
            p=float(p),
            iterations=iterations,
            tolerance=tolerance,
        )

    @classmethod
    def parse(cls, text: str) -> "NormSpec":
        """Parse the CLI forms l1, l2, linf and lp:<p>."""
        value = text.strip().lower()
        if value == NormKind.L1.value:
            return cls.l1()
        if value == NormKind.L2.value:
            return cls.l2()
        if value in (NormKind.LINF.value, "inf"):
            return cls.linf()
        if value.startswith("lp:"):
            try:
                p = float(value[3:])
            except ValueError:
                raise InvalidInputError(f"Cannot read p from norm '{text}'")
            return cls.lp(p)
        raise InvalidInputError(f"Unsupported norm: {text}")

    @property
    def is_exact(self) -> bool:
        return self.kind in EXACT_KINDS

    @property
    def is_euclidean(self) -> bool:
        return self.kind == NormKind.L2

    @property
    def label(self) -> str:
        if self.kind == NormKind.LP:
            return f"lp:{self.p:g}"
        return self.kind.value

    def to_dict(self) -> dict:
        data = {"kind": self.kind.value, "label": self.label, "mode": self.mode.value}
        if self.kind == NormKind.LP:
            data.update(p=self.p, iterations=self.iterations, tolerance=self.tolerance)
        return data


EUCLIDEAN = NormSpec.l2()

"""Seeded instance generators for every element class.

All constructions conjugate a structured core by Haar-random unitaries, so
the Euclidean class of the output is fixed by the core while its entries
look generic. A generator called twice with the same seed returns the same
matrix.
"""

import logging
from enum import Enum
from typing import Optional

import numpy as np
from scipy.stats import unitary_group

from coep.errors import InvalidInputError
from coep.linalg_core import ComplexMatrix

logger = logging.getLogger(__name__)

SINGULAR_VALUE_RANGE = (0.5, 2.0)
# angles between R(a) and R(a†) for non-hermitian co-EP instances
ANGLE_RANGE = (0.3, 1.2)


class InstanceClass(Enum):
    HERMITIAN_COEP = "hermitian-coep"
    COEP = "coep"
    EP = "ep"
    RANDOM = "random"
    ZERO = "zero"
    IDENTITY = "identity"


def _check_dimension(n: int, even: bool = False) -> int:
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n < 1:
        raise InvalidInputError(f"Dimension must be a positive integer, got {n!r}")
    if even and n % 2:
        raise InvalidInputError(f"Dimension must be even, got {n}")
    return int(n)


def haar_unitary(n: int, rng: np.random.Generator) -> ComplexMatrix:
    if n == 1:
        return np.array([[np.exp(2j * np.pi * rng.random())]])
    return unitary_group.rvs(n, random_state=rng)


def controlled_block(n: int, rng: np.random.Generator, rank: Optional[int] = None) -> ComplexMatrix:
    """U diag(σ) V^H with σ drawn from SINGULAR_VALUE_RANGE on ``rank`` directions."""
    rank = n if rank is None else rank
    sigma = np.zeros(n)
    sigma[:rank] = rng.uniform(*SINGULAR_VALUE_RANGE, size=rank)
    return haar_unitary(n, rng) @ np.diag(sigma) @ haar_unitary(n, rng).conj().T


def gen_hermitian_coep(n: int, seed=None) -> ComplexMatrix:
    """W [[0, B], [0, 0]] W^H with B invertible, so a² = 0 and aa† + a†a = 1."""
    n = _check_dimension(n, even=True)
    rng = np.random.default_rng(seed)
    m = n // 2
    core = np.zeros((n, n), dtype=complex)
    core[:m, m:] = controlled_block(m, rng)
    w = haar_unitary(n, rng)
    return w @ core @ w.conj().T


def gen_coep_non_hermitian(n: int, seed=None) -> ComplexMatrix:
    """a = X M Y^H with R(a) = span X, R(a†) = span Y meeting only in 0 at oblique angles.

    Y = X⊥ cos(θ) + X sin(θ) column by column, so X + Y is the whole space
    while Y^H X = sin(θ) keeps a² away from zero.
    """
    n = _check_dimension(n, even=True)
    rng = np.random.default_rng(seed)
    m = n // 2
    w = haar_unitary(n, rng)
    x, x_perp = w[:, :m], w[:, m:]
    theta = rng.uniform(*ANGLE_RANGE, size=m)
    y = x_perp @ np.diag(np.cos(theta)) + x @ np.diag(np.sin(theta))
    return x @ controlled_block(m, rng) @ y.conj().T


def gen_ep(n: int, seed=None, rank: Optional[int] = None) -> ComplexMatrix:
    """W diag(B, 0) W^H with B invertible of random size; range and co-range coincide."""
    n = _check_dimension(n)
    rng = np.random.default_rng(seed)
    if rank is None:
        rank = int(rng.integers(1, n + 1))
    if not 0 <= rank <= n:
        raise InvalidInputError(f"Rank must lie in [0, {n}], got {rank}")
    core = np.zeros((n, n), dtype=complex)
    if rank:
        core[:rank, :rank] = controlled_block(rank, rng)
    w = haar_unitary(n, rng)
    return w @ core @ w.conj().T


def gen_random_mp(n: int, seed=None, rank: Optional[int] = None) -> ComplexMatrix:
    n = _check_dimension(n)
    rng = np.random.default_rng(seed)
    if rank is None:
        rank = n
    if not 0 <= rank <= n:
        raise InvalidInputError(f"Rank must lie in [0, {n}], got {rank}")
    return controlled_block(n, rng, rank)


def generate(kind: InstanceClass, n: int, seed=None) -> ComplexMatrix:
    if kind == InstanceClass.HERMITIAN_COEP:
        return gen_hermitian_coep(n, seed)
    elif kind == InstanceClass.COEP:
        return gen_coep_non_hermitian(n, seed)
    elif kind == InstanceClass.EP:
        return gen_ep(n, seed)
    elif kind == InstanceClass.RANDOM:
        return gen_random_mp(n, seed)
    elif kind == InstanceClass.ZERO:
        return np.zeros((_check_dimension(n), n), dtype=complex)
    elif kind == InstanceClass.IDENTITY:
        return np.eye(_check_dimension(n), dtype=complex)
    else:
        raise InvalidInputError(f"Unsupported instance class: {kind}")

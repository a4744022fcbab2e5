import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coep.errors import InvalidInputError
from coep.norm_types import EvaluationMode, NormKind, NormSpec
from coep.operator_norms import L1Norm, LpNorm, load_norm


@pytest.mark.parametrize(
    "text, kind",
    [("l1", NormKind.L1), ("L2", NormKind.L2), ("linf", NormKind.LINF), ("inf", NormKind.LINF), ("lp:3", NormKind.LP)],
)
def test_parse(text, kind):
    assert NormSpec.parse(text).kind == kind


@pytest.mark.parametrize("text", ["l3", "lp:", "lp:abc", "lp:1", "lp:0.5", "lp:inf"])
def test_parse_rejects(text):
    with pytest.raises(InvalidInputError):
        NormSpec.parse(text)


def test_lp_is_estimated():
    spec = NormSpec.parse("lp:3")
    assert spec.mode == EvaluationMode.ESTIMATED
    assert not spec.is_exact
    assert spec.label == "lp:3"


def test_mode_follows_kind():
    spec = NormSpec(NormKind.LP, p=3)
    assert spec.mode == EvaluationMode.ESTIMATED
    assert spec.to_dict()["mode"] == "estimated"
    assert NormSpec(NormKind.L1).mode == EvaluationMode.EXACT
    assert spec == NormSpec.lp(3)


@pytest.mark.parametrize(
    "kind, p, mode",
    [(NormKind.LP, 3, EvaluationMode.EXACT), (NormKind.L2, None, EvaluationMode.ESTIMATED)],
)
def test_mode_contradicting_kind(kind, p, mode):
    with pytest.raises(InvalidInputError):
        NormSpec(kind, p=p, mode=mode)


def test_loader_is_cached():
    assert load_norm(NormSpec.l1()) is load_norm(NormSpec.l1())
    assert isinstance(load_norm(NormSpec.l1()), L1Norm)
    assert isinstance(load_norm(NormSpec.lp(4)), LpNorm)


def test_lp_diagonal_is_exact():
    norm = load_norm(NormSpec.lp(3))
    assert norm.operator_norm(np.diag([3, -1, 2]).astype(complex)) == pytest.approx(3.0, rel=1e-10)


def test_lp_two_matches_spectral_norm():
    a = np.array([[3, 0], [0, 1]], dtype=complex)
    assert load_norm(NormSpec.lp(2)).operator_norm(a) == pytest.approx(3.0, rel=1e-8)


def test_lp_zero_matrix():
    assert load_norm(NormSpec.lp(3)).operator_norm(np.zeros((2, 2), dtype=complex)) == 0.0


@settings(deadline=None, max_examples=40)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 5), p=st.floats(1.2, 6.0))
def test_lp_estimate_is_bracketed(seed, n, p):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    estimate = load_norm(NormSpec.lp(p)).operator_norm(a)
    column_floor = np.max(np.linalg.norm(a, ord=p, axis=0))
    # interpolation between the l1 and linf operator norms
    ceiling = np.linalg.norm(a, 1) ** (1 / p) * np.linalg.norm(a, np.inf) ** (1 - 1 / p)
    assert column_floor * (1 - 1e-12) <= estimate <= ceiling * (1 + 1e-9)

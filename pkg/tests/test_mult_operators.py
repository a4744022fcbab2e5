import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from coep.errors import ContractError, InvalidInputError
from coep.generators import gen_random_mp
from coep.linalg_core import is_invertible, subspace_equal
from coep.mult_operators import (
    Side,
    audit_ideal_images,
    check_sum_injective,
    check_sum_invertible,
    check_sum_surjective,
    is_regular,
    left_annihilator_space,
    left_ideal,
    lift,
    right_annihilator_space,
    right_ideal,
    unvec,
    vec,
)
from coep.pseudoinverse import generalized_inverse, mp_inverse_euclidean, normalize


def random_pair(seed, n, rank=None):
    a = gen_random_mp(n, seed, rank)
    return a, mp_inverse_euclidean(a)[0]


def off_balance_ranks(n):
    # rank n/2 gives co-EP elements with arbitrarily small margins
    return st.sampled_from([r for r in range(n + 1) if 2 * r != n])


class TestLift:
    def test_vec_is_column_major(self):
        x = np.array([[1, 2], [3, 4]])
        assert list(vec(x)) == [1, 3, 2, 4]
        assert_allclose(unvec(vec(x), 2), x)

    @settings(deadline=None, max_examples=30)
    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 5))
    def test_actions_match_products(self, seed, n):
        rng = np.random.default_rng(seed)
        a, x = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)) for _ in range(2))
        assert_allclose(lift(a, Side.LEFT).apply(x), a @ x, atol=1e-12)
        assert_allclose(lift(a, Side.RIGHT).apply(x), x @ a, atol=1e-12)

    def test_left_and_right_lifts_commute(self):
        rng = np.random.default_rng(1)
        a, b = rng.standard_normal((2, 3, 3))
        left, right = lift(a, Side.LEFT).action, lift(b, Side.RIGHT).action
        assert_allclose(left @ right, right @ left, atol=1e-12)

    @settings(deadline=None, max_examples=30)
    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 4), data=st.data())
    def test_lift_invertible_with_element(self, seed, n, data):
        a = gen_random_mp(n, seed, data.draw(st.integers(0, n)))
        expected = is_invertible(a).invertible
        assert is_invertible(lift(a, Side.LEFT).action).invertible == expected
        assert is_invertible(lift(a, Side.RIGHT).action).invertible == expected


class TestIdeals:
    def test_identity(self, cfg):
        assert right_ideal(np.eye(2), cfg).is_full
        assert left_annihilator_space(np.eye(2), cfg).is_zero

    def test_nilpotent_dimensions(self, nilpotent, cfg):
        a, _ = nilpotent
        assert right_ideal(a, cfg).dim == 2
        assert left_ideal(a, cfg).dim == 2
        # aA is the matrices supported on the first row, which a annihilates
        assert subspace_equal(right_ideal(a, cfg), left_annihilator_space(a, cfg), cfg)
        assert subspace_equal(left_ideal(a, cfg), right_annihilator_space(a, cfg), cfg)

    @settings(deadline=None, max_examples=30)
    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 4), data=st.data())
    def test_normalized_pair_shares_ideals(self, seed, n, data):
        a = gen_random_mp(n, seed, data.draw(st.integers(0, n)))
        b = normalize(a, generalized_inverse(a))
        assert subspace_equal(right_ideal(a @ b), right_ideal(a))
        assert subspace_equal(left_ideal(b @ a), left_ideal(a))
        assert subspace_equal(left_annihilator_space(b @ a), left_annihilator_space(a))
        assert subspace_equal(right_annihilator_space(a @ b), right_annihilator_space(a))

    def test_every_matrix_is_regular(self, nilpotent, cfg):
        assert is_regular(nilpotent[0], cfg)[0]
        assert is_regular(np.zeros((3, 3)), cfg)[0]


class TestIdealImages:
    def test_nilpotent(self, nilpotent, cfg):
        report = audit_ideal_images(*nilpotent, 1, 1, cfg)
        assert report.passed
        assert report.get("first_ideal_image_fills_range").applicable
        assert "ideals_meet_trivially=True" in report.get("kernel_intersections_agree").note

    def test_invertible(self, cfg):
        a = np.diag([1.0, 2.0])
        report = audit_ideal_images(a, np.linalg.inv(a), 1, 1, cfg)
        assert report.passed
        assert not report.get("first_ideal_image_fills_range").applicable

    def test_projection(self, projection, cfg):
        report = audit_ideal_images(*projection, 1, 1, cfg)
        assert report.passed
        assert "ideals_meet_trivially=False" in report.get("kernel_intersections_agree").note

    def test_zero_coefficient(self, nilpotent, cfg):
        with pytest.raises(InvalidInputError):
            audit_ideal_images(*nilpotent, 0, 1, cfg)

    def test_bad_pair(self, nilpotent, cfg):
        with pytest.raises(ContractError):
            audit_ideal_images(nilpotent[0], nilpotent[0], 1, 1, cfg)

    @settings(deadline=None, max_examples=25)
    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 4), lam=st.complex_numbers(min_magnitude=0.5, max_magnitude=2))
    def test_random_pairs(self, seed, n, lam):
        a, a_dag = random_pair(seed, n, rank=max(1, n - 1))
        assert audit_ideal_images(a, a_dag, lam, 1.0).passed


class TestSumChecks:
    def test_nilpotent(self, nilpotent, cfg):
        assert check_sum_injective(*nilpotent, cfg) == (True, True)
        assert check_sum_surjective(*nilpotent, cfg) == (True, True)
        assert check_sum_invertible(*nilpotent, cfg) == (True, (True, True, True, True))

    def test_projection(self, projection, cfg):
        assert check_sum_injective(*projection, cfg) == (False, False)
        assert check_sum_surjective(*projection, cfg) == (False, False)
        check = check_sum_invertible(*projection, cfg)
        assert not check.invertible
        assert not all(check.conditions)

    @settings(deadline=None, max_examples=30)
    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 5), data=st.data())
    def test_sides_agree_on_random_pairs(self, seed, n, data):
        a, a_dag = random_pair(seed, n, data.draw(off_balance_ranks(n)))
        injective = check_sum_injective(a, a_dag)
        surjective = check_sum_surjective(a, a_dag)
        invertible = check_sum_invertible(a, a_dag)
        assert injective.lhs == injective.rhs
        assert surjective.lhs == surjective.rhs
        assert invertible.invertible == all(invertible.conditions)

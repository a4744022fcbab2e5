import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from coep.errors import ConditionPError, InvalidInputError, PreconditionError
from coep.generators import gen_coep_non_hermitian, gen_hermitian_coep, gen_random_mp
from coep.linalg_core import operator_norm
from coep.norm_types import NormSpec
from coep.perturbation import (
    PerturbationPair,
    build_report,
    check_class_preservation,
    check_factorizations,
    condition_number_bound,
    error_bound,
    gen_perturbation,
    norm_bracket,
    perturbation_sweep,
    perturbed_mp,
    product_inverses,
    reverse_condition,
    satisfies_condition_p,
)
from coep.pseudoinverse import mp_inverse_euclidean

L1, L2, LINF = NormSpec.l1(), NormSpec.l2(), NormSpec.linf()


@pytest.fixture
def scaled_projection(projection):
    a, a_dag = projection
    return PerturbationPair(a, a_dag, np.diag([1.2, 0]).astype(complex))


class TestDiagonalExample:
    def test_condition_holds(self, scaled_projection, cfg):
        check = satisfies_condition_p(scaled_projection, cfg)
        assert check.satisfied
        assert check.residual == pytest.approx(0.0, abs=1e-15)
        assert check.contraction == pytest.approx(0.2, abs=1e-12)

    def test_off_corner_change_fails(self, projection, cfg):
        pair = PerturbationPair(*projection, np.diag([1.0, 0.1]))
        check = satisfies_condition_p(pair, cfg)
        assert not check.satisfied
        assert check.residual == pytest.approx(0.1, abs=1e-12)

    def test_closed_form_inverse(self, scaled_projection, cfg):
        b_dag, certificate = perturbed_mp(scaled_projection, cfg)
        assert_allclose(b_dag, np.diag([5 / 6, 0]), atol=1e-12)
        assert certificate.valid

    def test_error_bound(self, scaled_projection, cfg):
        realized, bound, holds = error_bound(scaled_projection, cfg)
        assert realized == pytest.approx(1 / 6, abs=1e-12)
        assert bound == pytest.approx(0.25, abs=1e-12)
        assert holds

    def test_norm_bracket(self, scaled_projection, cfg):
        lower, value, upper, holds = norm_bracket(scaled_projection, cfg)
        assert lower == pytest.approx(1 / 1.2, abs=1e-12)
        assert value == pytest.approx(5 / 6, abs=1e-12)
        assert upper == pytest.approx(1.25, abs=1e-12)
        assert holds

    def test_reverse_condition(self, scaled_projection, cfg):
        holds, applicable, contraction = reverse_condition(scaled_projection, cfg)
        assert holds and applicable
        assert contraction == pytest.approx(1 / 6, abs=1e-12)

    def test_condition_number_bound(self, scaled_projection, cfg):
        result = condition_number_bound(scaled_projection, cfg)
        assert result.applicable and result.holds
        assert result.condition_number == pytest.approx(1.0)
        assert result.bound == pytest.approx(0.25, abs=1e-12)

    def test_factorizations(self, scaled_projection, cfg):
        assert check_factorizations(scaled_projection, cfg).passed

    def test_products(self, scaled_projection, cfg):
        report = product_inverses(scaled_projection, cfg)
        assert report.passed
        assert not report.base_co_ep
        assert report.co_ep_preserved is None


class TestConditionP:
    def test_violating_pair_raises(self, projection, cfg):
        pair = PerturbationPair(*projection, np.diag([1.0, 0.1]))
        with pytest.raises(ConditionPError) as excinfo:
            perturbed_mp(pair, cfg)
        assert excinfo.value.residual == pytest.approx(0.1, abs=1e-12)

    def test_contraction_at_one_fails(self, projection, cfg):
        pair = PerturbationPair(*projection, np.diag([2.0, 0.0]))
        assert not satisfies_condition_p(pair, cfg).satisfied

    def test_ill_conditioned_base(self, cfg):
        a = np.diag([1.0, 1e-3])
        pair = PerturbationPair(a, np.linalg.inv(a), a + np.diag([0.0, 1e-4]))
        result = condition_number_bound(pair, cfg)
        assert result.applicable
        assert result.condition_number == pytest.approx(1e3)
        assert result.realized == pytest.approx(1 / 11, rel=1e-9)
        assert result.holds

    def test_condition_number_bound_needs_small_ratio(self, cfg):
        a = np.diag([1.0, 1e-3])
        pair = PerturbationPair(a, np.linalg.inv(a), a + np.diag([0.0, 2e-3]))
        result = condition_number_bound(pair, cfg)
        assert not result.applicable

    def test_class_preservation_needs_coep(self, scaled_projection, cfg):
        with pytest.raises(PreconditionError):
            check_class_preservation(scaled_projection, cfg)


class TestGeneratedPerturbations:
    def test_zero_eps_returns_base(self, nilpotent, cfg):
        assert_allclose(gen_perturbation(*nilpotent, 0.0, 1, L2, cfg), nilpotent[0])

    @pytest.mark.parametrize("eps", [-0.1, 1.0, 1.5])
    def test_eps_out_of_range(self, nilpotent, eps, cfg):
        with pytest.raises(InvalidInputError):
            gen_perturbation(*nilpotent, eps, 1, L2, cfg)

    def test_zero_base(self, cfg):
        zero = np.zeros((2, 2))
        with pytest.raises(PreconditionError):
            gen_perturbation(zero, zero, 0.3, 1, L2, cfg)

    @pytest.mark.parametrize("norm", [L1, L2, LINF])
    def test_contraction_lands_on_eps(self, nilpotent, norm, cfg):
        b = gen_perturbation(*nilpotent, 0.3, 7, norm, cfg)
        check = satisfies_condition_p(PerturbationPair(*nilpotent, b, norm), cfg)
        assert check.satisfied
        assert check.contraction == pytest.approx(0.3, abs=1e-12)

    def test_nilpotent_class_preserved(self, nilpotent, cfg):
        b = gen_perturbation(*nilpotent, 0.4, 3, L2, cfg)
        report = check_class_preservation(PerturbationPair(*nilpotent, b), cfg)
        assert report.passed, report.to_dict()

    def test_products_of_coep_base_are_ep(self, oblique, cfg):
        b = gen_perturbation(*oblique, 0.25, 11, L2, cfg)
        report = product_inverses(PerturbationPair(*oblique, b), cfg)
        assert report.passed
        assert report.base_co_ep
        assert report.co_ep_preserved is False
        assert all(entry["ep"] for entry in report.product_classes.values())
        assert report.notes

    @settings(deadline=None, max_examples=25)
    @given(
        seed=st.integers(0, 2**32 - 1),
        m=st.integers(1, 3),
        eps=st.sampled_from([0.1, 0.3, 0.49, 0.9]),
        hermitian=st.booleans(),
    )
    def test_generated_coep_reports_hold(self, seed, m, eps, hermitian):
        a = (gen_hermitian_coep if hermitian else gen_coep_non_hermitian)(2 * m, seed)
        a_dag, _ = mp_inverse_euclidean(a)
        b = gen_perturbation(a, a_dag, eps, seed)
        report = build_report(PerturbationPair(a, a_dag, b), eps)
        assert report.all_hold, report.to_row()
        assert report.svd_distance <= 1e-9 * max(1.0, report.bracket[1])
        assert check_class_preservation(PerturbationPair(a, a_dag, b)).passed

    @settings(deadline=None, max_examples=25)
    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 6), data=st.data())
    def test_random_bases(self, seed, n, data):
        a = gen_random_mp(n, seed, data.draw(st.integers(1, n)))
        a_dag, _ = mp_inverse_euclidean(a)
        for report in perturbation_sweep(a, a_dag, [0.1, 0.4, 0.49], seed):
            assert report.all_hold, report.to_row()


class TestSweep:
    def test_nilpotent_grid(self, nilpotent, cfg):
        reports = perturbation_sweep(*nilpotent, [0.0, 0.1, 0.2, 0.4, 0.49], 5, L2, cfg)
        assert [r.eps for r in reports] == [0.0, 0.1, 0.2, 0.4, 0.49]
        assert all(r.all_hold for r in reports)
        assert reports[0].realized_error == pytest.approx(0.0, abs=1e-15)
        for report in reports[1:]:
            assert report.contraction == pytest.approx(report.eps, abs=1e-12)
            assert report.realized_error <= report.error_bound + 1e-12

    def test_sweep_keeps_direction(self, nilpotent, cfg):
        first, second = perturbation_sweep(*nilpotent, [0.1, 0.2], 5, L2, cfg)
        e1 = first.b - nilpotent[0]
        e2 = second.b - nilpotent[0]
        assert_allclose(e2, 2 * e1, atol=1e-12)

    def test_invertible_base(self, cfg):
        a = gen_random_mp(3, 4)
        a_inv = np.linalg.inv(a)
        (report,) = perturbation_sweep(a, a_inv, [0.5], 2, L2, cfg)
        assert report.all_hold
        assert_allclose(report.b_dag, np.linalg.inv(report.b), atol=1e-9)
        assert not report.reverse_applicable

    def test_l1_sweep_on_nilpotent(self, nilpotent, cfg):
        reports = perturbation_sweep(*nilpotent, [0.2, 0.45], 3, L1, cfg)
        assert all(r.all_hold for r in reports)
        assert np.isnan(reports[0].svd_distance)
        assert operator_norm(reports[1].b_dag, L1) == pytest.approx(reports[1].bracket[1])

    def test_row_is_json_ready(self, nilpotent, cfg):
        (report,) = perturbation_sweep(*nilpotent, [0.2], 5, L2, cfg)
        row = report.to_row()
        assert row["all_hold"] is True
        assert "b" not in row
        assert report.to_dict()["b"]["rows"] == 2

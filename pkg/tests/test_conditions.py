"""
Tests for the non-degeneracy checks, graded linear algebra and the eigenvalue verifier.
"""

import numpy as np
import pytest

from src.conditions import (
    ConditionReport,
    bordered_determinant,
    box_grid,
    check_I,
    check_I_grid,
    check_K,
    check_K_grid,
    check_R,
    eigen_lower_bound,
    hessian_determinant,
    merge_reports,
)
from src.conditions import graded
from src.errors import ConditionError
from src.model import FrequencyField, ScaleSet, expand_at
from src.pipeline.example import bordered_identity, example_coorbital, hessian_identity
from src.series import DomainWindow, FourierTaylorSeries

WINDOW = DomainWindow(0.1, 1.0, 0.1)


def identity_field(n=2):
    return FrequencyField([FourierTaylorSeries.action(n, a) for a in range(n)])


def coorbital_nf(epsilon, a, xi=None):
    spec = example_coorbital(epsilon, a)
    nf, _, _ = expand_at(spec, np.ones(6) if xi is None else xi, WINDOW)
    return nf


class TestGraded:
    def test_equilibration_is_exact(self, rng):
        M = rng.normal(size=(4, 4)) * np.logspace(0, -12, 4)[:, None]
        B, r, c = graded.equilibrate(M)
        np.testing.assert_array_equal(np.ldexp(np.ldexp(B, -r[:, None]), -c[None, :]), M)

    def test_graded_singular_value(self):
        M = np.diag([2.0, 2e-8, 2e-16])
        assert graded.smallest_singular_value(M) == pytest.approx(2e-16, rel=1e-12)

    def test_zero_row_is_singular(self):
        assert graded.smallest_singular_value(np.array([[1.0, 0.0], [0.0, 0.0]])) == 0.0
        assert graded.determinant(np.array([[1.0, 2.0], [0.0, 0.0]])) == 0.0

    def test_diagonal_determinant_is_product(self):
        assert graded.determinant(np.diag([2.0, 3.0, 0.5])) == 3.0

    def test_solve(self, rng):
        M = rng.normal(size=(3, 3)) + 3 * np.eye(3)
        M[2] *= 1e-10
        b = rng.normal(size=3)
        b[2] *= 1e-10
        np.testing.assert_allclose(M @ graded.solve(M, b), b, rtol=1e-10, atol=1e-20)


class TestCheckR:
    def test_identity_map_passes(self):
        report = check_R(identity_field(), [[1.0, 2.0], [0.5, 0.25]])
        assert report.passed
        assert report.condition_id == "R"
        assert report.details["columns"] == 3

    def test_duplicated_rows_fail(self):
        x1 = FourierTaylorSeries.action(2, 0)
        report = check_R(FrequencyField([x1, x1]), [[1.0, 2.0]])
        assert not report.passed
        assert report.witness["rank"] == 1

    def test_coorbital_passes(self):
        spec = example_coorbital(0.1, 3.0)
        grid = box_grid(np.ones(6), 0.1, 2)
        report = check_R(FrequencyField.from_spec(spec), grid, equilibrate=True, primed=True)
        assert report.passed
        assert report.condition_id == "R'"
        assert report.details["samples"] == 64

    def test_empty_grid(self):
        with pytest.raises(ConditionError):
            check_R(identity_field(), np.zeros((0, 2)))

    def test_requires_polynomial_field(self):
        with pytest.raises(ConditionError):
            check_R(lambda xi: xi, [[1.0, 2.0]])


class TestCheckK:
    def test_scaled_identity(self):
        eps_min = 1e-3
        report = check_K(2 * eps_min * np.eye(3), 3, 1.0, eps_min=eps_min)
        assert report.passed
        assert report.margin == pytest.approx(2.0, rel=1e-12)

    @pytest.mark.parametrize("n1", [1, 2, 3])
    def test_zero_matrix_fails(self, n1):
        assert not check_K(np.zeros((3, 3)), n1, 1.0, eps_min=1e-3).passed

    def test_coorbital_margin(self):
        epsilon = 0.1
        nf = coorbital_nf(epsilon, 3.0)
        report = check_K(nf, 6, 1.0)
        assert report.details["sigma_min"] == pytest.approx(2 * epsilon ** 4, rel=1e-10)
        assert report.margin == pytest.approx(2.0, rel=1e-10)
        assert not check_K(nf, 6, 4.5).passed

    def test_monotone_in_c(self, rng):
        A = rng.normal(size=(4, 4))
        A = A + A.T
        strong = check_K(A, 3, 0.5, eps_min=0.1)
        weak = check_K(A, 3, 0.05, eps_min=0.1)
        assert weak.margin == pytest.approx(strong.margin * np.sqrt(10.0), rel=1e-12)
        assert weak.passed or not strong.passed

    def test_full_block_matches_eigensolve(self, rng):
        for _ in range(10):
            B = rng.normal(size=(4, 4))
            A = B @ B.T + np.eye(4)
            report = check_K(A, 4, 1.0, eps_min=0.1)
            lam = np.linalg.eigvalsh(A.T @ A)[0]
            assert report.margin ** 2 * report.threshold == pytest.approx(lam, rel=1e-8)

    def test_permutation_equivariance(self, rng):
        A = rng.normal(size=(5, 5))
        A = A + A.T
        perm = rng.permutation(5)
        base = check_K(A, 2, 1.0, eps_min=0.1)
        permuted = check_K(A[np.ix_(perm, perm)], 2, 1.0, eps_min=0.1)
        assert permuted.margin == pytest.approx(base.margin, rel=1e-12)
        assert sorted(int(perm[i]) for i in permuted.witness["rows"]) == base.witness["rows"]
        assert sorted(int(perm[j]) for j in permuted.witness["cols"]) == base.witness["cols"]

    def test_n1_range(self):
        with pytest.raises(ConditionError):
            check_K(np.eye(2), 3, 1.0, eps_min=0.1)
        with pytest.raises(ConditionError):
            check_K(np.eye(2), 0, 1.0, eps_min=0.1)

    def test_bare_matrix_needs_eps_min(self):
        with pytest.raises(ConditionError):
            check_K(np.eye(2), 1, 1.0)


class TestCheckI:
    def test_all_zero_fails(self):
        assert not check_I(np.zeros((2, 2)), 2, 1.0, eps_min=1e-3, omega=np.zeros(2)).passed

    def test_one_dimensional_bordered_block(self):
        eps_min = 1e-3
        report = check_I(np.array([[2 * eps_min]]), 1, 1.0, eps_min=eps_min, omega=np.array([1.0]))
        assert report.passed
        assert report.witness == {"rows": [0, 1], "cols": [0, 1]}

    def test_border_always_selected(self, rng):
        A = rng.normal(size=(4, 4))
        A = A + A.T
        report = check_I(A, 2, 1.0, eps_min=0.1, omega=rng.normal(size=4))
        assert report.witness["rows"][-1] == 4
        assert report.witness["cols"][-1] == 4

    def test_coorbital_passes(self):
        nf = coorbital_nf(0.1, 4.0)
        report = check_I(nf, 6, 1.0)
        assert report.passed

    def test_requires_omega_for_bare_matrix(self):
        with pytest.raises(ConditionError):
            check_I(np.eye(2), 1, 1.0, eps_min=0.1)


class TestPrimedChecks:
    def test_grid_checks_pass_on_example(self):
        spec = example_coorbital(0.1, 4.0)
        freq = FrequencyField.from_spec(spec)
        grid = box_grid(np.ones(6), 0.05, 2)
        assert check_K_grid(freq, grid, 6, 1.0, spec.scales.eps_min).passed
        report = check_I_grid(freq, grid, 6, 1.0, spec.scales.eps_min)
        assert report.passed
        assert report.condition_id == "I'"
        assert report.details["samples"] == 64

    def test_merge_keeps_worst(self):
        good = ConditionReport("K", True, 3.0, 1.0, {"point": [0.0]})
        bad = ConditionReport("K", False, 0.5, 1.0, {"point": [1.0]})
        merged = merge_reports([good, bad], "K'")
        assert not merged.passed
        assert merged.margin == 0.5
        assert merged.witness["point"] == [1.0]
        assert merge_reports([bad, good]).to_dict() == merge_reports([good, bad]).to_dict()

    def test_merge_empty(self):
        with pytest.raises(ConditionError):
            merge_reports([])

    def test_box_grid(self):
        assert box_grid([0.0, 0.0], 1.0, 1).tolist() == [[0.0, 0.0]]
        grid = box_grid([0.0, 1.0], 0.5, 3)
        assert grid.shape == (9, 2)
        assert grid.min(axis=0).tolist() == [-0.5, 0.5]


class TestDeterminantIdentities:
    def test_hessian_identity(self, rng):
        for _ in range(20):
            epsilon = rng.uniform(0.01, 0.2)
            a = rng.uniform(2.0 + 1e-6, 5.0)
            nf = coorbital_nf(epsilon, a)
            assert hessian_determinant(nf) == pytest.approx(hessian_identity(epsilon, a), rel=1e-10)

    def test_bordered_identity(self, rng):
        for _ in range(20):
            epsilon = rng.uniform(0.01, 0.2)
            a = rng.uniform(2.0 + 1e-6, 5.0)
            nf = coorbital_nf(epsilon, a)
            for _ in range(10):
                I0 = rng.uniform(0.2, 2.0, size=6)
                assert bordered_determinant(nf, I0) == pytest.approx(
                    bordered_identity(epsilon, a, I0), rel=1e-10)

    def test_bordered_at_unit_action(self):
        epsilon, a = 0.1, 4.0
        nf = coorbital_nf(epsilon, a, xi=np.eye(6)[0])
        assert bordered_determinant(nf) == pytest.approx(-128 * epsilon ** (10 + 2 * a), rel=1e-10)

    def test_identity_with_zero_frequency(self):
        from src.model import NormalForm
        nf = NormalForm(ScaleSet((0.5,)), [0.0], [[0.0, 0.0]], [2.0 * np.eye(2)], [{}], 4)
        assert bordered_determinant(nf) == 0.0
        assert hessian_determinant(nf) == 1.0


class TestEigenBound:
    def test_single_scaled_identity(self):
        scales = ScaleSet((0.3,))
        result = eigen_lower_bound([np.eye(3)], scales)
        assert result.lambda_min == pytest.approx(0.09, rel=1e-12)
        assert result.passed

    def test_common_kernel_flagged(self, rng):
        v = rng.normal(size=3)
        v /= np.linalg.norm(v)
        projector = np.eye(3) - np.outer(v, v)
        parts = [rng.normal(size=(3, 3)) @ projector for _ in range(2)]
        result = eigen_lower_bound(parts, ScaleSet((0.1, 0.01)))
        assert result.lambda_min == pytest.approx(0.0, abs=1e-14)
        assert not result.passed

    def test_matches_singular_values(self, rng):
        scales = ScaleSet((0.1, 0.01))
        for _ in range(200):
            parts = [rng.normal(size=(3, 3)) + 4 * np.eye(3), rng.normal(size=(3, 3))]
            result = eigen_lower_bound(parts, scales)
            A = 0.1 * parts[0] + 0.01 * parts[1]
            sigma = np.linalg.svd(A, compute_uv=False)[-1]
            assert result.lambda_min == pytest.approx(sigma ** 2, rel=1e-10)

    def test_dimension_mismatch(self):
        with pytest.raises(ConditionError):
            eigen_lower_bound([np.eye(2), np.eye(3)], ScaleSet((0.1, 0.01)))
        with pytest.raises(ConditionError):
            eigen_lower_bound([np.eye(2)], ScaleSet((0.1, 0.01)))

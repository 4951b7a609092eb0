"""
Tests for the Fourier-Taylor series algebra, Lie series and time-one maps.
"""

import itertools

import numpy as np
import pytest

from src.errors import DimensionMismatchError, RealityError, SeriesFormatError, SeriesOverflowError
from src.series import (
    FourierMode,
    FourierTaylorSeries,
    MultiIndex,
    DomainWindow,
    add,
    average,
    derivative,
    dumps_series,
    evaluate,
    lie_transform,
    linear_combination,
    loads_series,
    majorant_norm,
    mul,
    poisson,
    time_one_map,
    translate,
    translation_increment,
    truncate,
)

Z2 = (0, 0)


def mono(k, j, c=1.0, **kwargs):
    return FourierTaylorSeries.monomial(k, j, c, **kwargs)


class TestTypes:
    def test_multi_index_order(self):
        assert MultiIndex((1, 0, 2)).order == 3

    def test_multi_index_rejects_negative(self):
        with pytest.raises(Exception):
            MultiIndex((1, -1))

    def test_fourier_mode_norm_and_canonical(self):
        k = FourierMode((-1, 2, 0))
        assert k.norm == 3
        assert k.canonical().entries == (1, -2, 0)

    def test_domain_window_positive(self):
        with pytest.raises(ValueError):
            DomainWindow(0.0, 1.0, 1.0)

    def test_zero_coefficients_not_stored(self):
        p = FourierTaylorSeries(2, {(Z2, Z2): 0.0, ((1, 0), Z2): 2.0})
        assert len(p) == 1

    def test_cutoffs_respected(self):
        p = FourierTaylorSeries(1, {((0,), (3,)): 1.0, ((2,), (0,)): 1.0, ((0,), (1,)): 1.0},
                                taylor_cutoff=2, fourier_cutoff=1)
        assert list(p.keys()) == [((0,), (1,))]

    def test_reality_violation_rejected(self):
        with pytest.raises(RealityError):
            FourierTaylorSeries(1, {((1,), (0,)): 1.0}, real=True)

    def test_reality_accepts_conjugate_pair(self):
        p = FourierTaylorSeries(1, {((1,), (0,)): 1 + 2j, ((-1,), (0,)): 1 - 2j}, real=True)
        assert p.real
        assert evaluate(p, [0.3], [0.7]).imag == pytest.approx(0.0, abs=1e-15)


class TestAdd:
    def test_additive_inverse(self):
        a = FourierTaylorSeries(2, {(Z2, Z2): 1.0})
        b = FourierTaylorSeries(2, {(Z2, Z2): -1.0})
        assert (a + b).is_empty()

    def test_identity(self, make_series):
        a = make_series()
        assert add(a, FourierTaylorSeries.zero(2)) == a

    def test_matches_pointwise_sum(self, make_series, sample_points):
        a, b = make_series(), make_series()
        actions, angles = sample_points(2)
        np.testing.assert_allclose(
            evaluate(a + b, actions, angles),
            evaluate(a, actions, angles) + evaluate(b, actions, angles),
            rtol=1e-13, atol=1e-13,
        )

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            add(FourierTaylorSeries.constant(1, 1.0), FourierTaylorSeries.constant(2, 1.0))

    def test_cancellation_is_exact(self):
        a = FourierTaylorSeries(1, {((0,), (1,)): 0.1, ((1,), (0,)): 0.3})
        b = FourierTaylorSeries(1, {((0,), (1,)): 0.2})
        c = FourierTaylorSeries(1, {((0,), (1,)): 0.30000000000000004})
        d = linear_combination([(1.0, a), (1.0, b), (-1.0, c)])
        assert list(d.keys()) == [((1,), (0,))]


class TestMul:
    def test_action_square(self):
        i1 = FourierTaylorSeries.action(2, 0)
        assert (i1 * i1).as_dict() == {(Z2, (2, 0)): 1.0}

    def test_exponentials_multiply_to_one(self):
        e = mono((1, 0), Z2)
        f = mono((-1, 0), Z2)
        assert mul(e, f).as_dict() == {(Z2, Z2): 1.0}

    def test_matches_pointwise_product(self, make_series):
        a, b = make_series(max_degree=2), make_series(max_degree=2)
        grid = np.array(list(itertools.product([-0.4, 0.1, 0.5], repeat=2)))
        angles = np.array(list(itertools.product([0.0, 1.1, 4.0], repeat=2)))
        actions = np.repeat(grid, len(angles), axis=0)
        angles = np.tile(angles, (len(grid), 1))
        np.testing.assert_allclose(
            evaluate(a * b, actions, angles),
            evaluate(a, actions, angles) * evaluate(b, actions, angles),
            rtol=1e-12, atol=1e-12,
        )

    def test_tighter_cutoff_wins(self):
        a = FourierTaylorSeries(1, {((0,), (2,)): 1.0}, taylor_cutoff=3)
        b = FourierTaylorSeries(1, {((0,), (2,)): 1.0}, taylor_cutoff=5)
        assert mul(a, b).is_empty()


class TestPoisson:
    def test_canonical_pair(self):
        i1 = FourierTaylorSeries.action(1, 0)
        e = mono((1,), (0,))
        assert poisson(i1, e).as_dict() == {((1,), (0,)): -1j}

    def test_antisymmetric_self_bracket(self, make_series):
        f = make_series(max_degree=3)
        assert poisson(f, f).is_empty()

    def test_antisymmetry(self, make_series, sample_points):
        f, g = make_series(), make_series()
        actions, angles = sample_points(2)
        np.testing.assert_allclose(
            evaluate(poisson(f, g), actions, angles),
            -evaluate(poisson(g, f), actions, angles),
            rtol=1e-12, atol=1e-12,
        )

    def test_jacobi_identity(self, make_series):
        for _ in range(5):
            f, g, h = (make_series(max_degree=2) for _ in range(3))
            total = linear_combination([
                (1.0, poisson(f, poisson(g, h))),
                (1.0, poisson(g, poisson(h, f))),
                (1.0, poisson(h, poisson(f, g))),
            ])
            assert majorant_norm(total, 1.0, 1.0) <= 1e-11

    def test_reality_preserved(self, make_series):
        f, g = make_series(), make_series()
        assert poisson(f, g).real
        assert mul(f, g).real
        assert add(f, g).real
        assert average(f).real
        assert lie_transform(f, g, 2).real


class TestTruncate:
    def test_high_degree_dropped(self):
        p = mono((0, 0), (2, 2))
        q, r = truncate(p, 3, 4)
        assert q.is_empty() and r.is_empty()

    def test_high_order_mode_only_in_q(self):
        p = mono((2, 2), (0, 0))
        q, r = truncate(p, 3, 4)
        assert q == p
        assert r.is_empty()

    def test_projection(self, make_series):
        p = make_series(max_degree=4, max_order=4)
        _, r = truncate(p, 2, 3)
        assert truncate(r, 2, 3)[1] == r

    def test_monotone_in_order(self, make_series):
        p = make_series(max_degree=3, max_order=4)
        _, r_small = truncate(p, 2, 4)
        _, r_large = truncate(p, 3, 4)
        assert set(r_small.keys()) <= set(r_large.keys())

    def test_geometric_tail_bound(self):
        n, m, eta, rho = 2, 4, 0.1, 0.05
        r, s, sigma, K = 1.0, 2.0, 1.0, 9
        coeffs = {}
        for k in itertools.product(range(-12, 13), repeat=n):
            if sum(abs(x) for x in k) > 12:
                continue
            for j in itertools.product(range(7), repeat=n):
                if sum(j) <= 6:
                    coeffs[(k, j)] = rho ** (sum(abs(x) for x in k) + sum(j))
        p = FourierTaylorSeries(n, coeffs, real=True)
        _, rem = truncate(p, K, m)
        lhs = majorant_norm(p - rem, 2 * eta * r, s - sigma)
        assert lhs <= 2 ** n * eta ** m * majorant_norm(p, r, s)

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            truncate(FourierTaylorSeries.zero(1), 0, 4)


class TestAverage:
    def test_pure_mode_averages_to_zero(self):
        assert average(mono((1,), (0,))).is_empty()

    def test_constant_kept(self):
        p = FourierTaylorSeries(1, {((0,), (0,)): 2.5, ((1,), (0,)): 1.0})
        assert average(p).as_dict() == {((0,), (0,)): 2.5}

    def test_matches_quadrature(self, make_series):
        p = make_series(max_degree=2, max_order=3)
        grid = 2 * np.pi * np.arange(64) / 64
        angles = np.array(list(itertools.product(grid, repeat=2)))
        action = np.array([0.3, -0.2])
        values = evaluate(p, np.tile(action, (len(angles), 1)), angles)
        np.testing.assert_allclose(evaluate(average(p), action), values.mean(), rtol=1e-12, atol=1e-12)


class TestMajorantNorm:
    def test_constant(self):
        assert majorant_norm(FourierTaylorSeries.constant(2, 1.0), 0.3, 0.7) == 1.0

    def test_action(self):
        assert majorant_norm(FourierTaylorSeries.action(2, 0), 0.5, 1.0) == pytest.approx(0.5)

    def test_exponential_dominates_grid_sup(self):
        p = mono((1,), (0,), 2.0)
        norm = majorant_norm(p, 1.0, 0.3)
        assert norm == pytest.approx(2 * np.exp(0.3))
        re = np.linspace(0, 2 * np.pi, 50)
        im = np.linspace(-0.3, 0.3, 21)
        angles = (re[:, None] + 1j * im[None, :]).reshape(-1, 1)
        sup = np.abs(evaluate(p, np.zeros_like(angles), angles)).max()
        assert sup <= norm * (1 + 1e-14)

    def test_subadditive_and_submultiplicative(self, make_series):
        for _ in range(5):
            a, b = make_series(), make_series()
            assert majorant_norm(a + b, 0.5, 0.4) <= majorant_norm(a, 0.5, 0.4) + majorant_norm(b, 0.5, 0.4) + 1e-12
            assert majorant_norm(a * b, 0.5, 0.4) <= majorant_norm(a, 0.5, 0.4) * majorant_norm(b, 0.5, 0.4) * (1 + 1e-12)

    def test_overflow_reported(self):
        with pytest.raises(SeriesOverflowError):
            majorant_norm(mono((1,), (0,)), 1.0, 800.0)

    def test_requires_positive_window(self):
        with pytest.raises(ValueError):
            majorant_norm(FourierTaylorSeries.constant(1, 1.0), 0.0, 1.0)


class TestDerivativeAndTranslate:
    def test_derivatives(self):
        p = FourierTaylorSeries(2, {((1, 0), (2, 1)): 3.0})
        assert derivative(p, "I", 0).as_dict() == {((1, 0), (1, 1)): 6.0}
        assert derivative(p, "theta", 0).as_dict() == {((1, 0), (2, 1)): 3j}
        assert derivative(p, "theta", 1).is_empty()

    def test_translate_matches_shifted_evaluation(self, make_series, sample_points):
        p = make_series(max_degree=3)
        shift = np.array([0.2, -0.1])
        actions, angles = sample_points(2)
        np.testing.assert_allclose(
            evaluate(translate(p, shift), actions, angles),
            evaluate(p, actions + shift, angles),
            rtol=1e-12, atol=1e-12,
        )

    def test_increment_is_difference(self, make_series, sample_points):
        p = make_series(max_degree=3)
        shift = np.array([0.05, 0.3])
        actions, angles = sample_points(2)
        np.testing.assert_allclose(
            evaluate(translation_increment(p, shift), actions, angles),
            evaluate(p, actions + shift, angles) - evaluate(p, actions, angles),
            rtol=1e-11, atol=1e-12,
        )


class TestLieTransform:
    def test_empty_generator_is_identity(self, make_series):
        h = make_series()
        assert lie_transform(h, FourierTaylorSeries.zero(2), 4) == h

    def test_angle_free_generator_commutes_with_action(self):
        h = FourierTaylorSeries.action(2, 0)
        f = FourierTaylorSeries(2, {(Z2, (1, 1)): 0.3, (Z2, (2, 0)): 0.1}, real=True)
        assert lie_transform(h, f, 3) == h

    def test_removes_resonant_free_term(self):
        delta = 1e-3
        h = FourierTaylorSeries(2, {(Z2, (1, 0)): 1.0, (Z2, (0, 1)): 2.0})
        r = mono((1, 0), Z2, delta)
        f = mono((1, 0), Z2, delta / 1j)
        out = lie_transform(h + r, f, 2)
        assert out.coefficient((1, 0), Z2) == 0


class TestTimeOneMap:
    def test_jacobian_is_symplectic_to_remainder(self, make_series, rng):
        f = make_series(max_degree=1, max_order=1, density=1.0, scale=0.02)
        phi = time_one_map(f, order=4)
        bound = 10 * phi.remainder_norm(0.2, 0.1)
        for _ in range(20):
            actions = rng.uniform(-0.2, 0.2, size=2)
            angles = rng.uniform(0, 2 * np.pi, size=2)
            assert phi.symplectic_defect(actions, angles) <= bound + 1e-14

    def test_identity_for_empty_generator(self):
        phi = time_one_map(FourierTaylorSeries.zero(2), order=4)
        np.testing.assert_array_equal(phi.jacobian([0.1, 0.2], [0.3, 0.4]), np.eye(4))
        assert phi.displacement_norms(1.0, 1.0) == (0.0, 0.0)


class TestSerialization:
    def test_dump_and_load(self):
        p = FourierTaylorSeries(2, {((1, -1), (0, 2)): 0.1 + 0.2j, ((-1, 1), (0, 2)): 0.1 - 0.2j,
                                    (Z2, (1, 0)): 1e-300}, real=True, floor=0.0)
        text = dumps_series(p)
        assert text.splitlines()[0] == "0 0 | 1 0 | 1e-300 0.0"
        assert loads_series(text, real=True, floor=0.0) == p

    def test_comments_and_blank_lines(self):
        p = loads_series("# header\n\n0 | 2 | 1.5 0.0\n")
        assert p.as_dict() == {((0,), (2,)): 1.5}

    def test_bad_line_reports_number(self):
        with pytest.raises(SeriesFormatError) as info:
            loads_series("0 0 | 1 0 | 1.0 0.0\n0 0 | 1 | 2.0 0.0\n")
        assert info.value.line_number == 2

    def test_empty_text_needs_dimension(self):
        assert loads_series("", dim=3).is_empty()
        with pytest.raises(SeriesFormatError):
            loads_series("")

"""
Tests for scale sets, Hamiltonian specs, normal forms and frequency fields.
"""

import numpy as np
import pytest

from src.errors import DomainError, ModelError
from src.model import (
    FrequencyField,
    HamiltonianSpec,
    ScaleSet,
    expand_at,
    initial_perturbation,
    perturbation_gate,
    tail_constant,
)
from src.pipeline.example import coorbital_scales, example_coorbital
from src.series import DomainWindow, FourierTaylorSeries, evaluate, majorant_norm


def quadratic_spec(n=2, scales=(1.0,), perturbation=None, **kwargs):
    zero = (0,) * n
    parts = []
    for i, _ in enumerate(scales):
        j = tuple(2 if b == i % n else 0 for b in range(n))
        parts.append(FourierTaylorSeries(n, {(zero, j): 1.0}, real=True))
    pert = perturbation if perturbation is not None else FourierTaylorSeries.zero(n, real=True)
    return HamiltonianSpec(n=n, integrable_parts=tuple(parts), perturbation=pert, scales=ScaleSet(scales), **kwargs)


class TestScaleSet:
    def test_extremes_and_perturbation_size(self):
        scales = ScaleSet((0.5, 1e-3, 0.25), epsilon_ratio=0.1)
        assert scales.m == 3
        assert scales.eps_min == 1e-3
        assert scales.eps_max == 0.5
        assert scales.eps_pert == 0.1 * 1e-3

    @pytest.mark.parametrize("epsilons", [(), (0.0,), (1.5,), (-0.1, 0.2)])
    def test_rejects_out_of_range(self, epsilons):
        with pytest.raises(ModelError):
            ScaleSet(epsilons)

    def test_rejects_nonpositive_ratio(self):
        with pytest.raises(ModelError):
            ScaleSet((0.5,), epsilon_ratio=0.0)

    def test_ordering(self):
        assert ScaleSet((1.0, 0.1, 0.01)).is_ordered()
        assert not ScaleSet((1.0, 0.01, 0.1)).is_ordered()

    def test_tied_coorbital_scales(self):
        scales = coorbital_scales(0.1, 3.0)
        np.testing.assert_allclose(scales.epsilons, (1.0, 1e-2, 1e-3, 1e-3, 1e-4, 1e-4), rtol=1e-12)
        assert not scales.is_ordered()


class TestHamiltonianSpec:
    def test_angle_dependent_part_rejected(self):
        part = FourierTaylorSeries(1, {((1,), (0,)): 0.5, ((-1,), (0,)): 0.5}, real=True)
        with pytest.raises(ModelError):
            HamiltonianSpec(n=1, integrable_parts=(part,), perturbation=FourierTaylorSeries.zero(1),
                            scales=ScaleSet((0.5,)))

    def test_part_count_must_match_scales(self):
        with pytest.raises(ModelError):
            HamiltonianSpec(n=2, integrable_parts=quadratic_spec().integrable_parts,
                            perturbation=FourierTaylorSeries.zero(2), scales=ScaleSet((1.0, 0.5)))

    def test_small_taylor_cutoff_rejected(self):
        with pytest.raises(ModelError):
            quadratic_spec(m_taylor=2)

    def test_example_parameter_ranges(self):
        with pytest.raises(ModelError):
            example_coorbital(1.5, 4.0)
        with pytest.raises(ModelError):
            example_coorbital(0.1, 2.0)


class TestExpandAt:
    def test_quadratic_shift(self):
        spec = quadratic_spec()
        nf, tail, _ = expand_at(spec, (1.0, 0.0), DomainWindow(0.1, 1.0, 0.1))
        np.testing.assert_allclose(nf.omega, [2.0, 0.0])
        np.testing.assert_allclose(nf.A, [[2.0, 0.0], [0.0, 0.0]])
        assert nf.e == pytest.approx(1.0)
        assert tail.is_empty()

    def test_origin_keeps_coefficients(self):
        n = 2
        zero = (0, 0)
        part = FourierTaylorSeries(n, {(zero, (1, 0)): 3.0, (zero, (1, 1)): 2.0, (zero, (0, 3)): 0.5}, real=True)
        spec = HamiltonianSpec(n=n, integrable_parts=(part,), perturbation=FourierTaylorSeries.zero(n),
                               scales=ScaleSet((0.5,)))
        nf, tail, _ = expand_at(spec, (0.0, 0.0), DomainWindow(0.1, 1.0, 0.1))
        np.testing.assert_allclose(nf.omega, [1.5, 0.0])
        np.testing.assert_allclose(nf.A, [[0.0, 1.0], [1.0, 0.0]])
        assert nf.h == {(0, 3): pytest.approx(0.25)}
        assert tail.is_empty()

    def test_reassembly_matches_spec(self, rng):
        spec = example_coorbital(0.05, 3.5, mean_field=0.3)
        xi = rng.uniform(0.5, 2.0, size=6)
        nf, tail, pert = expand_at(spec, xi, DomainWindow(0.1, 1.0, 0.1))
        actions = rng.uniform(-0.3, 0.3, size=(20, 6))
        angles = rng.uniform(0.0, 2 * np.pi, size=(20, 6))
        expected = spec.value(xi + actions, angles)
        rebuilt = (evaluate(nf.as_series(), actions) + evaluate(tail, actions)
                   + spec.scales.eps_pert * evaluate(pert, actions, angles))
        np.testing.assert_allclose(rebuilt.real, expected.real, rtol=1e-12)

    def test_higher_degree_goes_to_tail(self):
        n = 1
        part = FourierTaylorSeries(n, {((0,), (5,)): 1.0}, real=True)
        spec = HamiltonianSpec(n=n, integrable_parts=(part,), perturbation=FourierTaylorSeries.zero(n),
                               scales=ScaleSet((0.5,)), m_taylor=4)
        nf, tail, _ = expand_at(spec, (1.0,), DomainWindow(0.1, 1.0, 0.1))
        assert tail.max_degree() == 5
        assert min(sum(j) for _, j in tail.keys()) == 4
        assert nf.h == {(3,): pytest.approx(0.5 * 10.0)}

    def test_domain_boundary(self):
        spec = quadratic_spec(domain=((0.0, 0.0), (1.0, 1.0)))
        with pytest.raises(DomainError):
            expand_at(spec, (0.05, 0.5), DomainWindow(0.1, 1.0, 0.1))
        expand_at(spec, (0.5, 0.5), DomainWindow(0.1, 1.0, 0.1))

    def test_base_point_shape(self):
        with pytest.raises(ModelError):
            expand_at(quadratic_spec(), (1.0, 0.0, 0.0), DomainWindow(0.1, 1.0, 0.1))


class TestNormalForm:
    def test_combined_quantities_are_scale_sums(self, rng):
        spec = example_coorbital(0.1, 4.0)
        xi = rng.uniform(0.5, 1.5, size=6)
        nf, _, _ = expand_at(spec, xi, DomainWindow(0.1, 1.0, 0.1))
        eps = np.array(spec.scales.epsilons)
        np.testing.assert_allclose(nf.omega, eps @ nf.omega_parts, rtol=1e-14)
        np.testing.assert_allclose(nf.A, np.tensordot(eps, nf.a_parts, axes=1), rtol=1e-14)
        assert nf.e == pytest.approx(float(eps @ nf.e_parts), rel=1e-14)

    def test_common_rescaling_is_linear(self):
        spec = example_coorbital(0.1, 4.0)
        nf, _, _ = expand_at(spec, np.ones(6), DomainWindow(0.1, 1.0, 0.1))
        half = nf.rescaled(0.5)
        np.testing.assert_array_equal(half.omega, 0.5 * nf.omega)
        np.testing.assert_array_equal(half.A, 0.5 * nf.A)
        assert half.e == 0.5 * nf.e

    def test_asymmetric_hessian_rejected(self):
        from src.model import NormalForm
        with pytest.raises(ModelError):
            NormalForm(ScaleSet((0.5,)), [0.0], [[1.0, 1.0]], [[[1.0, 2.0], [0.0, 1.0]]], [{}], 4)

    def test_translate_moves_base_point(self):
        spec = quadratic_spec()
        nf, _, _ = expand_at(spec, (1.0, 1.0), DomainWindow(0.1, 1.0, 0.1))
        moved = nf.translate([0.25, 0.0])
        np.testing.assert_allclose(moved.base_point, [1.25, 1.0])
        np.testing.assert_allclose(moved.omega, [2.5, 0.0])
        assert moved.e == pytest.approx(1.25 ** 2)

    def test_absorb_rejects_angle_terms(self):
        spec = quadratic_spec()
        nf, _, _ = expand_at(spec, (1.0, 1.0), DomainWindow(0.1, 1.0, 0.1))
        with pytest.raises(ModelError):
            nf.absorb(FourierTaylorSeries.monomial((1, 0), (0, 0), 1.0))

    def test_drift_constant(self):
        spec = quadratic_spec()
        nf, _, _ = expand_at(spec, (1.0, 0.0), DomainWindow(0.1, 1.0, 0.1))
        shifted = nf.set_drift_constant(0.5)
        assert shifted.drift_constant() == 0.5
        assert shifted.e == pytest.approx(1.5)


class TestPerturbationGate:
    def test_empty_perturbation_passes(self):
        window = DomainWindow(0.1, 1.0, 0.1)
        assert perturbation_gate(FourierTaylorSeries.zero(2), window, ScaleSet((0.5,)), 1.0)

    def test_strict_inequality(self):
        scales = ScaleSet((0.5,), epsilon_ratio=0.2)
        pert = FourierTaylorSeries.constant(2, 2.0 * scales.eps_pert)
        assert not perturbation_gate(pert, DomainWindow(0.1, 1.0, 0.1), scales, 2.0)

    def test_gate_constant_positive(self):
        with pytest.raises(ModelError):
            perturbation_gate(FourierTaylorSeries.zero(2), DomainWindow(0.1, 1.0, 0.1), ScaleSet((0.5,)), 0.0)

    def test_coorbital_perturbation(self):
        epsilon, a = 0.01, 3.0
        spec = example_coorbital(epsilon, a)
        window = DomainWindow(epsilon ** 0.25, 0.5, 0.1)
        nf, tail, pert = expand_at(spec, np.ones(6), window)
        full = initial_perturbation(tail, pert, spec.scales)
        assert tail.is_empty()
        assert majorant_norm(full, window.r, window.s) == pytest.approx(
            spec.scales.eps_pert * np.exp(2 * window.s))
        assert perturbation_gate(full, window, spec.scales, 10.0)
        assert not perturbation_gate(full, window, spec.scales, 1.0)
        assert tail_constant(tail, window, spec.scales) == 0.0


class TestFrequencyField:
    def test_coorbital_frequencies(self, rng):
        epsilon, a = 0.1, 3.0
        spec = example_coorbital(epsilon, a)
        freq = FrequencyField.from_spec(spec)
        xi = rng.uniform(0.5, 1.5, size=6)
        eps = np.array(spec.scales.epsilons)
        np.testing.assert_allclose(freq(xi), 2.0 * eps * xi, rtol=1e-14)
        np.testing.assert_allclose(freq.jacobian(xi), np.diag(2.0 * eps), rtol=1e-14)

    def test_batched_evaluation(self, rng):
        freq = FrequencyField.from_spec(example_coorbital(0.1, 4.0))
        points = rng.uniform(0.5, 1.5, size=(7, 6))
        batched = freq(points)
        assert batched.shape == (7, 6)
        np.testing.assert_allclose(batched[3], freq(points[3]))

    def test_derivative_stack_columns(self):
        freq = FrequencyField.from_spec(quadratic_spec(scales=(1.0, 0.5)))
        stack = freq.derivative_stack(np.array([1.0, 2.0]), 1)
        assert stack.shape == (2, 3)
        np.testing.assert_allclose(stack[:, 0], [2.0, 2.0])

    def test_lipschitz_bound_dominates_jacobian(self, rng):
        spec = example_coorbital(0.1, 4.0)
        freq = FrequencyField.from_spec(spec)
        center = np.ones(6)
        bound = freq.lipschitz_bound(center, 0.1)
        for _ in range(5):
            xi = center + rng.uniform(-0.1, 0.1, size=6)
            assert np.abs(freq.jacobian(xi)).sum(axis=1).max() <= bound * (1 + 1e-12)

    def test_component_count(self):
        with pytest.raises(ModelError):
            FrequencyField([FourierTaylorSeries.action(2, 0)])

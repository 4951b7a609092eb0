"""
Shared fixtures: seeded generators, random sparse series and the built-in
co-orbital model at small sizes.
"""

import itertools
import math

import numpy as np
import pytest

from src.series import FourierTaylorSeries


def random_series(rng, dim, max_degree=2, max_order=2, density=0.5, real=True, scale=1.0, min_degree=0):
    """Random sparse series with conjugate-symmetric coefficients when `real`."""
    coeffs = {}
    modes = [k for k in itertools.product(range(-max_order, max_order + 1), repeat=dim)
             if sum(abs(x) for x in k) <= max_order]
    degrees = [j for j in itertools.product(range(max_degree + 1), repeat=dim)
               if min_degree <= sum(j) <= max_degree]
    for k in modes:
        if real and tuple(-x for x in k) in {key[0] for key in coeffs} and any(k):
            continue
        for j in degrees:
            if rng.random() > density:
                continue
            value = scale * complex(rng.normal(), rng.normal())
            if real and not any(k):
                value = complex(value.real, 0.0)
            coeffs[(k, j)] = value
            if real and any(k):
                coeffs[(tuple(-x for x in k), j)] = value.conjugate()
    return FourierTaylorSeries(dim, coeffs, real=real)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def make_series(rng):
    def factory(dim=2, **kwargs):
        return random_series(rng, dim, **kwargs)
    return factory


@pytest.fixture
def sample_points(rng):
    def factory(dim, count=16, radius=0.5):
        actions = rng.uniform(-radius, radius, size=(count, dim))
        angles = rng.uniform(0.0, 2 * np.pi, size=(count, dim))
        return actions, angles
    return factory


def report_document(halt=None, measure=None, k_pass=True):
    trace = [
        {"nu": 0, "error": 1e-18, "new_error": 1e-38, "target": 1e-23, "deviation": 0.01, "contraction_ratio": 1e-20},
        {"nu": 1, "error": 1e-38, "new_error": 0.0, "target": 1e-40, "deviation": 1e-5, "contraction_ratio": 0.0},
    ]
    steps = [
        {"nu": row["nu"], "old_error": row["error"], "new_error": row["new_error"], "target_error": row["target"],
         "contraction_ratio": row["contraction_ratio"], "divisor_min": 2e-15, "f_norm": 1e-3,
         "lie_remainder": 1e-50, "energy_change": 0.0, "accepted": True}
        for row in trace
    ]
    return {
        "tool": {"name": "multiscale-kam-engine", "version": "0.1.0"},
        "mode": "frequency_preserving:6",
        "stages": ["conditions", "iteration"],
        "required_conditions": ["R", "K"],
        "conditions": {
            "R": {"condition_id": "R", "pass": True, "margin": 3.0, "witness": {}, "threshold": 1e-30, "details": {}},
            "K": {"condition_id": "K", "pass": k_pass, "margin": 2.0 if k_pass else 0.4, "witness": {},
                  "threshold": 1e-15, "details": {}},
            "I": {"condition_id": "I", "pass": False, "margin": 0.1, "witness": {}, "threshold": 1e-15,
                  "details": {}},
        },
        "identities": {"hessian": {"computed": 6.4e-53, "expected": 6.4e-53, "pass": True}},
        "eigen": {"lambda_min": 1e-30, "lambda_max": 400.0, "bound": 1e-15, "bound_linear": 1e-15, "c": 1.0,
                  "perturbation_norm": 0.0, "pass": False},
        "schedule": [{"nu": 0, "r": 6.4e-5, "K": 1e4}, {"nu": 1, "r": 6.4e-6, "K": 1e4 * 3.0 ** 4}],
        "iteration": {
            "stop_reason": "nu_max" if halt is None else halt["kind"],
            "halt": halt,
            "steps": steps,
            "trace": trace,
            "convergence": {"deviations": [0.01, 1e-5], "partial_sums": [0.01, 0.01001], "product_bound": 1.0101,
                            "ratio": 1e-3, "tail_estimate": 1e-8, "cauchy": True, "tol": 1e-12},
        },
        "measure": measure,
        "skipped": {},
        "verdicts": {},
        "exit_code": 0,
        "config": {"mode": "frequency_preserving:6"},
    }


MEASURE_DOCUMENT = {
    "points": [{"gamma": g, "estimate": 0.5 * g ** 0.5, "stderr": 1e-4, "hits": 100, "samples": 10_000}
               for g in (1.0, 0.1, 0.01, 0.001)],
    "beta": 0.5, "stderr": 0.01, "ci": [0.48, 0.52], "intercept": math.log(0.5), "N": 5, "samples": 10_000,
    "verdicts": {"beta_ge_1_over_N_plus_1": True, "beta_ge_1_over_N": True, "monotone": True},
    "notes": [],
}


@pytest.fixture
def sample_report():
    """Factory for report documents shaped like RunReport.to_dict()."""
    return report_document


@pytest.fixture
def measure_document():
    return dict(MEASURE_DOCUMENT)

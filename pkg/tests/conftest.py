"""
Shared test fixtures and configuration for spacetime-tt tests.
"""

import numpy as np
import pytest
from numpy.polynomial import Polynomial

from spacetime_tt import IterationRecord, NewtonReport, ProblemSpec, ResultStorage
from spacetime_tt.tt_core import tt_random


@pytest.fixture
def rng():
    """Seeded generator so random inputs are reproducible."""
    return np.random.default_rng(1234)


@pytest.fixture
def linear_problem_2d():
    """Linear advection-diffusion u_t - u_xx + 0.5 u_x = 0 on [0, 1] x [-1, 1]."""
    return ProblemSpec(
        name="linear-2d",
        diffusion=Polynomial([1.0]),
        diffusion_prime=Polynomial([0.0]),
        convection=(Polynomial([0.5]),),
        convection_prime=(Polynomial([0.0]),),
        forcing=Polynomial([0.0]),
        forcing_prime=Polynomial([0.0]),
        boundary=lambda t, x: np.exp(-t) * np.cos(x),
        initial=lambda x: np.cos(x),
        box=((-1.0, 1.0),),
    )


@pytest.fixture
def nonlinear_problem_2d():
    """u_t - (1 + u^2) u_xx + u u_x = u - u^3 on [0, 1] x [-1, 1]."""
    return ProblemSpec(
        name="nonlinear-2d",
        diffusion=Polynomial([1.0, 0.0, 1.0]),
        diffusion_prime=Polynomial([0.0, 2.0]),
        convection=(Polynomial([0.0, 1.0]),),
        convection_prime=(Polynomial([1.0]),),
        forcing=Polynomial([0.0, 1.0, 0.0, -1.0]),
        forcing_prime=Polynomial([1.0, 0.0, -3.0]),
        boundary=lambda t, x: 0.5 * np.exp(-t) * np.sin(np.pi * x / 2),
        initial=lambda x: 0.5 * np.sin(np.pi * x / 2),
        box=((-1.0, 1.0),),
    )


@pytest.fixture
def random_tt(rng):
    """Random 4-way TT tensor with ranks (3, 4, 2)."""
    return tt_random((5, 6, 4, 7), (3, 4, 2), rng, low=-1.0, high=1.0)


@pytest.fixture
def temp_storage(tmp_path):
    """ResultStorage rooted in a temporary directory."""
    return ResultStorage(base_path=tmp_path / "store")


@pytest.fixture
def sample_report():
    """A finished two-step TT Newton report."""
    report = NewtonReport(solver="tt-step-trunc", initial_residual=1.0, initial_eps=0.1, initial_ranks=(1, 1, 1))
    report.record(IterationRecord(
        residual_norm=1e-2, previous_residual_norm=1.0, update_norm=0.5, step_factor=1.0,
        elapsed=0.1, linear_iterations=4, eps=0.1, ranks=(2, 3, 2), compression_ratio=0.05,
    ))
    report.record(IterationRecord(
        residual_norm=1e-7, previous_residual_norm=1e-2, update_norm=1e-3, step_factor=0.5,
        elapsed=0.1, linear_iterations=6, eps=1e-2, ranks=(3, 4, 3), compression_ratio=0.08,
    ))
    report.finish(True, "residual", 0.25)
    return report

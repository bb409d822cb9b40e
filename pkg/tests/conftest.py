"""Shared fixtures; compiles the jit kernels once so tests time only math."""

import numpy as np
import pytest

from condgrad import Box, L1Ball, QuadSubproblem, condg_solve
from condgrad.problems import LabeledExample, LogisticProblem


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Touch every jit entry point before any test runs.

    Compilation happens on first call and would otherwise land inside
    whichever test gets there first, which matters for the timed acceptance
    checks. Harmless when the numpy fallback is active.
    """
    prob = LogisticProblem(
        [LabeledExample([(0, 1.0)], 1), LabeledExample([(1, -1.0)], 0)], d=2
    )
    x = np.zeros(2)
    prob.objective(x)
    prob.batch_mean_gradient(np.array([0, 1]), x)
    prob.batch_mean_coord_estimate(np.array([0, 1]), x, 1e-5)
    q = QuadSubproblem(g=np.array([1.0, 0.0]), u=x, y=x, gamma=1.0, tau=0.0)
    condg_solve(q, L1Ball(1.0, 2), eta=1e-3)
    condg_solve(q, Box(np.zeros(2) - 1.0, np.ones(2)), eta=1e-3)
    yield

"""Oracle access with exact call accounting.

All algorithmic access to problem data goes through the functions here so
that gradient queries (gqo), function-value queries underlying coordinate
estimates (fqo), and linear minimizations (lo, charged in the lmo module)
are counted exactly once per abstract oracle call. A coordinate estimate of
one component always charges 2d value queries even when a structured family
evaluates it with fewer arithmetic probes; the accounting tracks the oracle
model, not the implementation shortcut.
"""

import numpy as np
from dataclasses import dataclass


@dataclass
class OracleCounters:
    """Monotone tally of oracle calls. Additive across merges."""

    gqo: int = 0
    fqo: int = 0
    lo: int = 0

    def merge(self, other):
        self.gqo += other.gqo
        self.fqo += other.fqo
        self.lo += other.lo
        return self

    def snapshot(self):
        return (self.gqo, self.fqo, self.lo)


@dataclass(frozen=True)
class SmoothingConfig:
    """Finite-difference radius for zeroth-order estimates."""

    mu: float

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError(f"smoothing mu must be positive, got {self.mu}")


def default_smoothing(x0):
    """mu = 1e-5 * (1 + ||x0||_inf), scaled to the start iterate."""
    x0 = np.asarray(x0, dtype=np.float64)
    return SmoothingConfig(mu=1e-5 * (1.0 + float(np.abs(x0).max())))


def gradient_query(problem, i, x, counters):
    """One component gradient; charges gqo by 1."""
    counters.gqo += 1
    return problem.component_gradient(i, x)


def value_query(problem, i, x, counters):
    """One component value; charges fqo by 1."""
    counters.fqo += 1
    return problem.component_value(i, x)


def coord_estimate(problem, i, x, smoothing, counters):
    """Coordinate-wise central-difference estimate of one component gradient.

    sum_k (f_i(x + mu e_k) - f_i(x - mu e_k)) / (2 mu) e_k over all d
    coordinates, charging fqo by 2d. Exact for quadratic components.
    """
    counters.fqo += 2 * problem.d
    return problem.coord_estimate_component(i, x, smoothing.mu)


def full_gradient(problem, x, counters):
    """Mean of all component gradients; charges gqo by n."""
    counters.gqo += problem.n
    idx = np.arange(problem.n, dtype=np.int64)
    return problem.batch_mean_gradient(idx, x)


def full_coord_estimate(problem, x, smoothing, counters):
    """Mean of all component coordinate estimates; charges fqo by 2 d n."""
    counters.fqo += 2 * problem.d * problem.n
    idx = np.arange(problem.n, dtype=np.int64)
    return problem.batch_mean_coord_estimate(idx, x, smoothing.mu)


def batch_mean_gradient(problem, idx, x, counters):
    """Mean component gradient over an index batch; charges gqo by len(idx)."""
    counters.gqo += len(idx)
    return problem.batch_mean_gradient(idx, x)


def batch_mean_coord_estimate(problem, idx, x, smoothing, counters):
    """Mean coordinate estimate over a batch; charges fqo by 2 d len(idx)."""
    counters.fqo += 2 * problem.d * len(idx)
    return problem.batch_mean_coord_estimate(idx, x, smoothing.mu)

"""Conditional-gradient solver for the sliding prox subproblem.

Given a linear estimate g, a prox center u, a pull point y and weights
gamma > 0, tau >= 0, the subproblem is

    min_{x in C}  h(x) = gamma * (<g, x> + tau/2 ||x - y||^2) + 1/2 ||x - u||^2,

a (1 + tau gamma)-strongly convex quadratic. The loop is plain Frank-Wolfe
with the closed-form step, stopped by the duality gap <grad h(x), x - v>,
which upper-bounds h(x) - h*; returning with gap <= eta therefore certifies
an eta-accurate solution.
"""

import math

import numpy as np
from dataclasses import dataclass

from . import _kernels
from ._jit import HAVE_NUMBA
from .lmo import Box, L1Ball, lmo
from .oracles import OracleCounters

MAX_ITER_CAP = 10**6
GAP_SLACK = 1e-14  # absolute slack on the stopping test, spares boundary flutter


@dataclass
class QuadSubproblem:
    """Data of one prox subproblem; u is accepted as given, feasible or not."""

    g: np.ndarray
    u: np.ndarray
    y: np.ndarray
    gamma: float
    tau: float

    def __post_init__(self):
        self.g = np.asarray(self.g, dtype=np.float64)
        self.u = np.asarray(self.u, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.float64)
        if not (self.g.shape == self.u.shape == self.y.shape) or self.g.ndim != 1:
            raise ValueError("g, u, y must be 1-d arrays of equal shape")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.tau < 0:
            raise ValueError(f"tau must be nonnegative, got {self.tau}")


@dataclass
class CondGResult:
    point: np.ndarray
    lo_calls: int
    final_gap: float
    iterations: int


class CondGBudgetError(RuntimeError):
    """Iteration budget ran out; carries the best point seen and its gap."""

    def __init__(self, best_point, last_gap, iterations):
        super().__init__(
            f"CondG exhausted {iterations} iterations with gap {last_gap:.3e}"
        )
        self.best_point = best_point
        self.last_gap = last_gap
        self.iterations = iterations


def h_value(q, x):
    """Objective h of the subproblem at x."""
    x = np.asarray(x, dtype=np.float64)
    return float(
        q.gamma * (q.g @ x + 0.5 * q.tau * np.sum((x - q.y) ** 2))
        + 0.5 * np.sum((x - q.u) ** 2)
    )


def grad_h(q, x):
    """gamma * (g + tau (x - y)) + (x - u)."""
    x = np.asarray(x, dtype=np.float64)
    return q.gamma * (q.g + q.tau * (x - q.y)) + (x - q.u)


def fw_gap(q, x, region, counters):
    """Duality gap and its witness vertex at x; charges one LMO call."""
    grad = grad_h(q, x)
    v = lmo(region, grad, counters)
    gap = float(grad @ (x - v))
    return gap, v


def linesearch_beta(q, x, v):
    """Exact minimizer of h along [x, v], clamped to [0, 1].

    h is quadratic with curvature (gamma tau + 1) ||x - v||^2 along the
    segment, so the unconstrained step is the gap over that curvature.
    """
    x = np.asarray(x, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    dxn = x - v
    denom = (q.gamma * q.tau + 1.0) * float(dxn @ dxn)
    if denom <= 0.0:
        return 0.0
    beta = float(grad_h(q, x) @ dxn) / denom
    return min(1.0, max(0.0, beta))


def default_max_iters(q, region, eta):
    """10 * ceil(gamma (1 + tau gamma) D^2 / eta), capped at 1e6."""
    D = region.diameter()
    bound = 10 * math.ceil(q.gamma * (1.0 + q.tau * q.gamma) * D * D / eta)
    return max(1, min(bound, MAX_ITER_CAP))


def condg_solve(q, region, eta, max_iters=None, counters=None):
    """Run Frank-Wolfe on the subproblem until the gap certificate holds.

    Returns a CondGResult whose final_gap <= eta (plus 1e-14 slack), which
    certifies h(point) - min h <= eta. Raises CondGBudgetError when the
    iteration budget is exhausted first; callers that treat that as a soft
    failure can continue from err.best_point.
    """
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    if counters is None:
        counters = OracleCounters()
    if max_iters is None:
        max_iters = default_max_iters(q, region, eta)
    if max_iters < 1:
        raise ValueError(f"max_iters must be at least 1, got {max_iters}")

    if HAVE_NUMBA and isinstance(region, L1Ball):
        x, it, gap, ok = _kernels.condg_l1(
            q.g, q.u.copy(), q.y, q.gamma, q.tau, region.radius, eta, max_iters
        )
        counters.lo += it
        if ok:
            return CondGResult(point=x, lo_calls=it, final_gap=gap, iterations=it)
        raise CondGBudgetError(best_point=x, last_gap=gap, iterations=it)
    if HAVE_NUMBA and isinstance(region, Box):
        x, it, gap, ok = _kernels.condg_box(
            q.g, q.u.copy(), q.y, q.gamma, q.tau, region.lo, region.hi, eta, max_iters
        )
        counters.lo += it
        if ok:
            return CondGResult(point=x, lo_calls=it, final_gap=gap, iterations=it)
        raise CondGBudgetError(best_point=x, last_gap=gap, iterations=it)

    # region-generic loop; also the pure-numpy fallback path
    x = q.u.copy()
    it = 0
    gap = math.inf
    while it < max_iters:
        it += 1
        gap, v = fw_gap(q, x, region, counters)
        if gap <= eta + GAP_SLACK:
            return CondGResult(point=x, lo_calls=it, final_gap=gap, iterations=it)
        beta = linesearch_beta(q, x, v)
        x = (1.0 - beta) * x + beta * v
    # exact line search keeps h non-increasing, so the last iterate is best
    raise CondGBudgetError(best_point=x, last_gap=gap, iterations=it)

"""Projection-free solvers over finite sums.

arcs_run is the variance-reduced accelerated sliding method this package is
built around, in first-order and zeroth-order flavors with per-epoch
schedules produced by schedule_convex / schedule_strongly_convex. cg_run,
cgs_run, scgs_run and storc_run are the comparison baselines. All solvers
share the oracle-accounting conventions of the oracles module and emit
MetricRow progress samples; objective evaluations for those samples are
metrics, not algorithm steps, and never touch the counters.
"""

import math
import time

import numpy as np
from dataclasses import dataclass

from .condg import CondGBudgetError, QuadSubproblem, condg_solve
from .lmo import contains, lmo
from .oracles import (
    OracleCounters,
    SmoothingConfig,
    batch_mean_coord_estimate,
    batch_mean_gradient,
    default_smoothing,
    full_coord_estimate,
    full_gradient,
)
from .records import MetricRow, RunRecord

MODES = ("first_order", "zeroth_order")
CONVEXITIES = ("convex", "strongly_convex")
ZO_GAMMA_RULES = ("appendix", "main_text", "match_first_order")

_SCHED_TOL = 1e-12


def s0_for(n):
    """Epoch index after which the inner length stops doubling."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    return int(n).bit_length()  # floor(log2 n) + 1, exactly


@dataclass
class EpochSchedule:
    """Constants of one epoch: scalars alpha, p, gamma and per-step arrays.

    eta[t-1] is the CondG tolerance of inner step t, theta[t-1] its averaging
    weight, and Gamma (strongly convex runs only) holds the growth factors
    Gamma_0 .. Gamma_T used to build theta. Construction runs the sanity
    checks, so holding an EpochSchedule means the blend weights define convex
    combinations and the step invariants hold.
    """

    s: int
    T: int
    alpha: float
    p: float
    gamma: float
    eta: np.ndarray
    theta: np.ndarray
    Gamma: np.ndarray | None
    L: float
    tau: float

    def __post_init__(self):
        a, p, g = self.alpha, self.p, self.gamma
        if not (0.0 <= a <= 1.0 and 0.0 <= p <= 1.0):
            raise ValueError(f"epoch {self.s}: alpha={a}, p={p} must lie in [0, 1]")
        if not g > 0:
            raise ValueError(f"epoch {self.s}: gamma must be positive, got {g}")
        if 1.0 - a - p < -_SCHED_TOL:
            raise ValueError(f"epoch {self.s}: alpha + p exceeds 1")
        denom = 1.0 + self.tau * g - self.L * a * g
        if not denom > 0:
            raise ValueError(
                f"epoch {self.s}: need 1 + tau*gamma - L*alpha*gamma > 0, got {denom}"
            )
        if p - self.L * a * g / denom < -_SCHED_TOL:
            raise ValueError(
                f"epoch {self.s}: variance weight p={p} too small for "
                f"L*alpha*gamma/(1 + tau*gamma - L*alpha*gamma) = {self.L * a * g / denom}"
            )
        if len(self.eta) != self.T or len(self.theta) != self.T:
            raise ValueError(f"epoch {self.s}: eta and theta must have length T={self.T}")
        if not (self.eta > 0).all():
            raise ValueError(f"epoch {self.s}: CondG tolerances must be positive")
        if (self.theta < 0).any():
            raise ValueError(f"epoch {self.s}: averaging weights must be nonnegative")
        if not self.theta.sum() > 0:
            raise ValueError(f"epoch {self.s}: averaging weights sum to zero")


def _inner_length(n, s):
    s0 = s0_for(n)
    return 2 ** (s - 1) if s <= s0 else 2 ** (s0 - 1)


def _gamma_coefficient(mode, convexity, zo_gamma_rule, d):
    """Numerator scale c in gamma = 1 / (c L alpha)."""
    if mode == "first_order":
        return 3.0
    if zo_gamma_rule == "match_first_order":
        return 3.0
    if zo_gamma_rule == "main_text" and convexity == "strongly_convex":
        if d is None:
            raise ValueError("main_text zeroth-order gamma needs the dimension d")
        return 12.0 * d
    return 5.0


def _validate_schedule_args(n, L, s, D0, mode, zo_gamma_rule):
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if not L > 0:
        raise ValueError(f"L must be positive, got {L}")
    if s < 1:
        raise ValueError(f"epoch index must be >= 1, got {s}")
    if not D0 > 0:
        raise ValueError(f"D0 must be positive, got {D0}")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if zo_gamma_rule not in ZO_GAMMA_RULES:
        raise ValueError(f"zo_gamma_rule must be one of {ZO_GAMMA_RULES}, got {zo_gamma_rule!r}")


def schedule_convex(n, L, s, D0, mode, zo_gamma_rule="appendix", d=None):
    """Epoch constants for merely convex objectives.

    Inner lengths double until epoch s0 = floor(log2 n) + 1 and stay flat
    after; alpha is 1/2 through epoch s0, then decays as 2/(s - s0 + 4);
    p = 1/2 throughout; gamma = 1/(3 L alpha) in first-order mode and
    1/(5 L alpha) in zeroth-order mode; every inner step of epoch s uses the
    tolerance eta = D0 / (s T L).
    """
    _validate_schedule_args(n, L, s, D0, mode, zo_gamma_rule)
    s0 = s0_for(n)
    T = _inner_length(n, s)
    alpha = 0.5 if s <= s0 else 2.0 / (s - s0 + 4)
    p = 0.5
    coef = _gamma_coefficient(mode, "convex", zo_gamma_rule, d)
    gamma = 1.0 / (coef * L * alpha)
    eta = np.full(T, D0 / (s * T * L))
    theta = np.full(T, (gamma / alpha) * (alpha + p))
    theta[-1] = gamma / alpha
    return EpochSchedule(
        s=s, T=T, alpha=alpha, p=p, gamma=gamma, eta=eta, theta=theta, Gamma=None, L=L, tau=0.0
    )


def schedule_strongly_convex(n, L, tau, s, D0, mode, zo_gamma_rule="appendix", d=None):
    """Epoch constants under strong convexity tau > 0.

    Shares the doubling inner lengths and p = 1/2 with the convex schedule.
    With varsigma = c L / (4 tau) for the mode's gamma scale c, alpha is 1/2
    through epoch s0 and min(sqrt(n / (4 varsigma)), 1/2) after. Growth
    factors Gamma_t = (1 + tau gamma)^t (first-order; the zeroth-order form
    halves the rate) build the averaging weights
    theta_t = Gamma_{t-1} - (1 - alpha - p) Gamma_t, with the last step
    weighted Gamma_{T-1}. Tolerances keep eta = D0 / (s T L) through s0 and
    then shrink geometrically, by (4/5) per epoch when n >= varsigma and by
    1/Gamma_{T_{s0}} per epoch otherwise.
    """
    _validate_schedule_args(n, L, s, D0, mode, zo_gamma_rule)
    if not tau > 0:
        raise ValueError(f"strong convexity tau must be positive, got {tau}")
    s0 = s0_for(n)
    T = _inner_length(n, s)
    coef = _gamma_coefficient(mode, "strongly_convex", zo_gamma_rule, d)
    varsigma = coef * L / (4.0 * tau)
    alpha = 0.5 if s <= s0 else min(math.sqrt(n / (4.0 * varsigma)), 0.5)
    p = 0.5
    gamma = 1.0 / (coef * L * alpha)
    rate = tau * gamma
    if mode == "zeroth_order" and zo_gamma_rule != "match_first_order":
        rate *= 0.5
    Gamma = (1.0 + rate) ** np.arange(T + 1)
    theta = Gamma[:-1] - (1.0 - alpha - p) * Gamma[1:]
    theta[-1] = Gamma[T - 1]
    if s <= s0:
        eta_val = D0 / (s * T * L)
    elif n >= varsigma:
        eta_val = (0.8 ** (s - s0 - 1)) * D0 / (s * n * L)
    else:
        T_s0 = 2 ** (s0 - 1)
        shrink = (1.0 + rate) ** T_s0
        eta_val = shrink ** (-(s - s0 - 1)) * D0 / (s * n * L)
    eta = np.full(T, eta_val)
    return EpochSchedule(
        s=s, T=T, alpha=alpha, p=p, gamma=gamma, eta=eta, theta=theta, Gamma=Gamma, L=L, tau=tau
    )


def sliding_blend(xbar_prev, x_prev, x_tilde, alpha, p, gamma, tau):
    """The inner-step anchor point, a convex combination of the three states.

    With tau = 0 this reduces to (1 - alpha - p) xbar + alpha x + p x_tilde.
    """
    w = 1.0 + tau * gamma
    denom = 1.0 + tau * gamma * (1.0 - alpha)
    return (w * (1.0 - alpha - p) * xbar_prev + alpha * x_prev + w * p * x_tilde) / denom


@dataclass
class RunOptions:
    """Options of one arcs_run.

    mode selects the oracle (gradients or coordinate value probes), convexity
    selects the schedule family, d0 overrides the initial-gap estimate D0 and
    smoothing the finite-difference radius. batch is capped at n. record_every
    adds a progress row every that many inner steps on top of the epoch
    boundaries (0 keeps boundaries only). zo_gamma_rule: "appendix" (default)
    uses the 1/(5 L alpha) zeroth-order step scale, "main_text" the
    d-dependent variant, "match_first_order" forces first-order constants so
    paired runs of both modes traverse identical schedules. x0 overrides the
    region's start point. deterministic_timing writes elapsed_ns = 0 so
    repeated runs are byte-identical; set False to record real times.
    """

    mode: str = "first_order"
    convexity: str = "convex"
    epochs: int = 10
    batch: int = 256
    seed: int = 0
    d0: float | None = None
    smoothing: SmoothingConfig | None = None
    record_every: int = 0
    x0: np.ndarray | None = None
    zo_gamma_rule: str = "appendix"
    condg_max_iters: int | None = None
    deterministic_timing: bool = True

    def validate(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.convexity not in CONVEXITIES:
            raise ValueError(f"convexity must be one of {CONVEXITIES}, got {self.convexity!r}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch < 1:
            raise ValueError(f"batch must be >= 1, got {self.batch}")
        if self.zo_gamma_rule not in ZO_GAMMA_RULES:
            raise ValueError(
                f"zo_gamma_rule must be one of {ZO_GAMMA_RULES}, got {self.zo_gamma_rule!r}"
            )
        if self.d0 is not None and not self.d0 > 0:
            raise ValueError(f"d0 must be positive, got {self.d0}")
        if self.record_every < 0:
            raise ValueError(f"record_every must be >= 0, got {self.record_every}")


@dataclass
class SolverState:
    """End-of-run state of arcs_run."""

    x_epoch: np.ndarray
    x_tilde: np.ndarray
    rng: np.random.Generator
    counters: OracleCounters


class _Clock:
    def __init__(self, deterministic):
        self.deterministic = deterministic
        self.start = time.perf_counter_ns()

    def elapsed(self):
        return 0 if self.deterministic else time.perf_counter_ns() - self.start


def _resolve_x0(region, x0):
    x = region.initial_point() if x0 is None else np.asarray(x0, dtype=np.float64).copy()
    if not contains(region, x, 1e-9):
        raise ValueError("start point is not feasible")
    return x


def default_d0(problem, region, x0):
    """4 * (f(x0) - 0) + 3 L D^2, the coarse initial-gap estimate.

    The value term is floored at zero: a negative objective at the start says
    nothing about the gap, and D0 must stay positive.
    """
    f0 = max(problem.objective(x0), 0.0)
    D = region.diameter()
    return 4.0 * f0 + 3.0 * problem.L * D * D


def arcs_run(problem, region, options):
    """Variance-reduced sliding over epochs; returns (SolverState, RunRecord).

    Epoch s refreshes the anchor gradient at x_tilde (a full pass), then runs
    T_s inner steps. Each step draws a batch of component indices uniformly
    with replacement, forms the variance-reduced direction

        G_t = mean_i [grad_i(anchor point) - grad_i(x_tilde)] + anchor mean,

    and moves through one CondG prox solve; anchor components are
    deliberately re-evaluated every step, so an epoch costs exactly
    n + 2 b T_s gradient queries (or that many coordinate estimates at 2d
    value probes each in zeroth-order mode). A CondG budget overrun is a soft
    failure: the best point is accepted and the next progress row is flagged.
    The epoch output x_tilde is the theta-weighted average of the blended
    iterates, a convex combination by the schedule checks.
    """
    options.validate()
    n, d = problem.n, problem.d
    b = min(options.batch, n)
    sc = options.convexity == "strongly_convex"
    zo = options.mode == "zeroth_order"
    if sc and not problem.tau > 0:
        raise ValueError("strongly_convex schedules need a problem with tau > 0")
    x_prev = _resolve_x0(region, options.x0)
    x_tilde = x_prev.copy()
    counters = OracleCounters()
    rng = np.random.Generator(np.random.Philox(options.seed))
    smoothing = options.smoothing if options.smoothing is not None else default_smoothing(x_prev)
    D0 = options.d0 if options.d0 is not None else default_d0(problem, region, x_prev)
    tau_eff = problem.tau if sc else 0.0
    clock = _Clock(options.deterministic_timing)
    rows = [
        MetricRow(
            solver="arcs",
            epoch=0,
            t=0,
            gqo=0,
            fqo=0,
            lo=0,
            elapsed_ns=clock.elapsed(),
            objective=problem.objective(x_prev),
        )
    ]
    for s in range(1, options.epochs + 1):
        if sc:
            sched = schedule_strongly_convex(
                n, problem.L, problem.tau, s, D0, options.mode, options.zo_gamma_rule, d
            )
        else:
            sched = schedule_convex(n, problem.L, s, D0, options.mode, options.zo_gamma_rule, d)
        if zo:
            anchor_grad = full_coord_estimate(problem, x_tilde, smoothing, counters)
        else:
            anchor_grad = full_gradient(problem, x_tilde, counters)
        xbar = x_tilde.copy()
        wsum = np.zeros(d)
        tsum = 0.0
        flag = 0
        a, p, gamma = sched.alpha, sched.p, sched.gamma
        for t in range(1, sched.T + 1):
            idx = rng.integers(0, n, size=b)
            ux = sliding_blend(xbar, x_prev, x_tilde, a, p, gamma, tau_eff)
            if zo:
                g_here = batch_mean_coord_estimate(problem, idx, ux, smoothing, counters)
                g_anchor = batch_mean_coord_estimate(problem, idx, x_tilde, smoothing, counters)
            else:
                g_here = batch_mean_gradient(problem, idx, ux, counters)
                g_anchor = batch_mean_gradient(problem, idx, x_tilde, counters)
            G = g_here - g_anchor + anchor_grad
            sub = QuadSubproblem(g=G, u=x_prev, y=ux, gamma=gamma, tau=tau_eff)
            try:
                res = condg_solve(sub, region, sched.eta[t - 1], options.condg_max_iters, counters)
                x_prev = res.point
            except CondGBudgetError as err:
                x_prev = err.best_point
                flag = 1
            xbar = (1.0 - a - p) * xbar + a * x_prev + p * x_tilde
            wsum += sched.theta[t - 1] * xbar
            tsum += sched.theta[t - 1]
            if options.record_every and t % options.record_every == 0 and t != sched.T:
                rows.append(
                    MetricRow(
                        solver="arcs",
                        epoch=s,
                        t=t,
                        gqo=counters.gqo,
                        fqo=counters.fqo,
                        lo=counters.lo,
                        elapsed_ns=clock.elapsed(),
                        objective=problem.objective(xbar),
                        flag=flag,
                    )
                )
                flag = 0
        if not tsum > 0:
            raise AssertionError(f"epoch {s}: averaging weights sum to {tsum}")
        x_tilde = wsum / tsum
        rows.append(
            MetricRow(
                solver="arcs",
                epoch=s,
                t=sched.T,
                gqo=counters.gqo,
                fqo=counters.fqo,
                lo=counters.lo,
                elapsed_ns=clock.elapsed(),
                objective=problem.objective(x_tilde),
                flag=flag,
            )
        )
    state = SolverState(x_epoch=x_prev, x_tilde=x_tilde, rng=rng, counters=counters)
    return state, RunRecord(solver="arcs", rows=rows)


def _linesearch_step(problem, x, g, h):
    """Exact step for quadratic curvature, bounded Brent otherwise."""
    curv = problem.directional_curvature(x, h)
    slope = float(g @ h)
    if curv is not None:
        if curv <= 0.0:
            return 1.0 if slope < 0.0 else 0.0
        return min(1.0, max(0.0, -slope / curv))
    from scipy.optimize import minimize_scalar

    res = minimize_scalar(
        lambda t: problem.objective(x + t * h),
        bounds=(0.0, 1.0),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return float(res.x)


def cg_run(problem, region, steps, step_rule="classic", counters=None, x0=None,
           deterministic_timing=True):
    """Classic Frank-Wolfe on the full objective.

    step_rule "classic" uses gamma_s = 2 / (s + 2); "line_search" minimizes
    along the segment exactly when the family exposes quadratic curvature and
    by bounded scalar search otherwise. Each step charges one full gradient
    pass (gqo += n) and one LMO call; line-search value probes are free, the
    accounting model tracks gradient passes and linear minimizations only.
    """
    if steps < 0:
        raise ValueError(f"steps must be >= 0, got {steps}")
    if step_rule not in ("classic", "line_search"):
        raise ValueError(f"unknown step_rule {step_rule!r}")
    if counters is None:
        counters = OracleCounters()
    x = _resolve_x0(region, x0)
    clock = _Clock(deterministic_timing)
    rows = [
        MetricRow(
            solver="cg",
            epoch=0,
            t=0,
            gqo=counters.gqo,
            fqo=counters.fqo,
            lo=counters.lo,
            elapsed_ns=clock.elapsed(),
            objective=problem.objective(x),
        )
    ]
    for s in range(1, steps + 1):
        g = full_gradient(problem, x, counters)
        v = lmo(region, g, counters)
        h = v - x
        if step_rule == "classic":
            gam = 2.0 / (s + 2)
        else:
            gam = _linesearch_step(problem, x, g, h)
        x = x + gam * h
        rows.append(
            MetricRow(
                solver="cg",
                epoch=s,
                t=0,
                gqo=counters.gqo,
                fqo=counters.fqo,
                lo=counters.lo,
                elapsed_ns=clock.elapsed(),
                objective=problem.objective(x),
            )
        )
    return RunRecord(solver="cg", rows=rows)


@dataclass
class CgsOptions:
    """Options for cgs_run; the callables override the per-step constants.

    Defaults follow the standard sliding choices alpha_s = 3 / (s + 2) and
    gamma_s = s / (4 L). The tolerance default eta_s = L D^2 / s is the usual
    companion scale from the same literature; none of the three is tuned to
    any particular dataset, and all are overridable.
    """

    steps: int = 10
    seed: int = 0
    x0: np.ndarray | None = None
    alpha_fn: object = None
    gamma_fn: object = None
    eta_fn: object = None
    condg_max_iters: int | None = None
    deterministic_timing: bool = True

    def validate(self):
        if self.steps < 0:
            raise ValueError(f"steps must be >= 0, got {self.steps}")


def _cgs_constants(options, L, D):
    alpha_fn = options.alpha_fn or (lambda s: 3.0 / (s + 2))
    gamma_fn = options.gamma_fn or (lambda s: s / (4.0 * L))
    eta_fn = options.eta_fn or (lambda s: L * D * D / s)
    return alpha_fn, gamma_fn, eta_fn


def _sliding_outer(problem, region, options, solver, grad_source):
    """Shared skeleton of cgs_run and scgs_run.

    grad_source(step, z, counters) supplies the gradient estimate at the
    lookahead point; everything else is identical between the two methods.
    """
    options.validate()
    L = problem.L
    D = region.diameter()
    alpha_fn, gamma_fn, eta_fn = _cgs_constants(options, L, D)
    counters = OracleCounters()
    x = _resolve_x0(region, options.x0)
    y = x.copy()
    zero = np.zeros(problem.d)
    clock = _Clock(options.deterministic_timing)
    rows = [
        MetricRow(
            solver=solver,
            epoch=0,
            t=0,
            gqo=0,
            fqo=0,
            lo=0,
            elapsed_ns=clock.elapsed(),
            objective=problem.objective(y),
        )
    ]
    for s in range(1, options.steps + 1):
        a = alpha_fn(s)
        gam = gamma_fn(s)
        eta = eta_fn(s)
        z = (1.0 - a) * y + a * x
        g = grad_source(s, z, counters)
        sub = QuadSubproblem(g=g, u=x, y=zero, gamma=gam, tau=0.0)
        flag = 0
        try:
            res = condg_solve(sub, region, eta, options.condg_max_iters, counters)
            x = res.point
        except CondGBudgetError as err:
            x = err.best_point
            flag = 1
        y = (1.0 - a) * y + a * x
        rows.append(
            MetricRow(
                solver=solver,
                epoch=s,
                t=0,
                gqo=counters.gqo,
                fqo=counters.fqo,
                lo=counters.lo,
                elapsed_ns=clock.elapsed(),
                objective=problem.objective(y),
                flag=flag,
            )
        )
    return RunRecord(solver=solver, rows=rows)


def cgs_run(problem, region, options):
    """Conditional gradient sliding with exact gradients.

    The lookahead point z_s mixes the aggregate y and the prox iterate x;
    each step spends one full gradient pass and one CondG solve with tau = 0
    and a zero pull point.
    """

    def grad_source(_s, z, counters):
        return full_gradient(problem, z, counters)

    return _sliding_outer(problem, region, options, "cgs", grad_source)


@dataclass
class ScgsOptions(CgsOptions):
    """CgsOptions plus the batch growth scale c in m_k = ceil(c (k + 1)^2)."""

    batch_c: float = 1.0

    def validate(self):
        super().validate()
        if not self.batch_c > 0:
            raise ValueError(f"batch_c must be positive, got {self.batch_c}")


def scgs_batch_size(n, c, k):
    """min(n, ceil(c (k + 1)^2)); the cap keeps batches within the sum."""
    return min(n, math.ceil(c * (k + 1) ** 2))


def scgs_run(problem, region, options):
    """Stochastic conditional gradient sliding.

    Step k estimates the gradient at z_k from a batch of scgs_batch_size
    components drawn with replacement; once the growing batch hits n the
    estimate becomes the deterministic full pass (and consumes no
    randomness), which makes a full-batch run coincide with cgs_run.
    """
    rng = np.random.Generator(np.random.Philox(options.seed))
    n = problem.n

    def grad_source(s, z, counters):
        m = scgs_batch_size(n, options.batch_c, s)
        if m == n:
            return full_gradient(problem, z, counters)
        idx = rng.integers(0, n, size=m)
        return batch_mean_gradient(problem, idx, z, counters)

    return _sliding_outer(problem, region, options, "scgs", grad_source)


@dataclass
class StorcOptions:
    """Options for storc_run.

    variant "a" is the bounded-noise-at-optimum case: inner length
    T_s = ceil(2^(s/2 + 2)), batches m = ceil(rho 900 T_s), per-step
    tolerance 2 D^2 / (3 T_s) with the region diameter D. variant "c" is the
    strongly convex case: constant T_s = ceil(sqrt(32 L / tau)), shrinking
    scale D_s = L D^2 / (tau 2^(s-1)), batches m = ceil(rho 5600 T_s L / tau).
    rho in (0, 1] scales the published batch sizes down for desk-size runs;
    1 keeps them literal.
    """

    epochs: int = 5
    variant: str = "a"
    rho: float = 1.0
    seed: int = 0
    x0: np.ndarray | None = None
    condg_max_iters: int | None = None
    deterministic_timing: bool = True

    def validate(self):
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")
        if self.variant not in ("a", "c"):
            raise ValueError(f"variant must be 'a' or 'c', got {self.variant!r}")
        if not 0.0 < self.rho <= 1.0:
            raise ValueError(f"rho must be in (0, 1], got {self.rho}")


def storc_epoch_plan(options, L, tau, D, s):
    """(T_s, m_s, eta_s) for epoch s under the chosen variant."""
    if options.variant == "a":
        T = math.ceil(2 ** (s / 2.0 + 2.0))
        m = max(1, math.ceil(options.rho * 900.0 * T))
        D_s = D
    else:
        if not tau > 0:
            raise ValueError("storc variant 'c' needs a problem with tau > 0")
        T = math.ceil(math.sqrt(32.0 * L / tau))
        m = max(1, math.ceil(options.rho * 5600.0 * T * L / tau))
        D_s = L * D * D / (tau * 2.0 ** (s - 1))
    eta = 2.0 * D_s * D_s / (3.0 * T)
    return T, m, eta


def storc_run(problem, region, options):
    """Epoch-based variance-reduced sliding with cached anchor gradients.

    Each epoch stores all n component gradients at the snapshot x_tilde (one
    full pass) and the inner steps only pay for fresh evaluations at the
    blended point, so an epoch costs n + sum_t m_s gradient queries. Inner
    constants are alpha_t = 2 / (t + 1) and gamma_t = t / (3 L); with
    alpha_1 = 1 the first blend collapses onto the prox iterate.
    """
    options.validate()
    n = problem.n
    L = problem.L
    D = region.diameter()
    counters = OracleCounters()
    rng = np.random.Generator(np.random.Philox(options.seed))
    x_tilde = _resolve_x0(region, options.x0)
    clock = _Clock(options.deterministic_timing)
    rows = [
        MetricRow(
            solver="storc",
            epoch=0,
            t=0,
            gqo=0,
            fqo=0,
            lo=0,
            elapsed_ns=clock.elapsed(),
            objective=problem.objective(x_tilde),
        )
    ]
    all_idx = np.arange(n, dtype=np.int64)
    for s in range(1, options.epochs + 1):
        T, m, eta = storc_epoch_plan(options, L, problem.tau, D, s)
        anchor_rows = problem.batch_gradients(all_idx, x_tilde)
        counters.gqo += n
        anchor_mean = anchor_rows.mean(axis=0)
        x = x_tilde.copy()
        xbar = x_tilde.copy()
        flag = 0
        for t in range(1, T + 1):
            a = 2.0 / (t + 1)
            gam = t / (3.0 * L)
            ux = (1.0 - a) * xbar + a * x
            idx = rng.integers(0, n, size=m)
            fresh = batch_mean_gradient(problem, idx, ux, counters)
            G = fresh - anchor_rows[idx].mean(axis=0) + anchor_mean
            sub = QuadSubproblem(g=G, u=x, y=np.zeros(problem.d), gamma=gam, tau=0.0)
            try:
                res = condg_solve(sub, region, eta, options.condg_max_iters, counters)
                x = res.point
            except CondGBudgetError as err:
                x = err.best_point
                flag = 1
            xbar = (1.0 - a) * xbar + a * x
        x_tilde = xbar
        rows.append(
            MetricRow(
                solver="storc",
                epoch=s,
                t=T,
                gqo=counters.gqo,
                fqo=counters.fqo,
                lo=counters.lo,
                elapsed_ns=clock.elapsed(),
                objective=problem.objective(x_tilde),
                flag=flag,
            )
        )
    return RunRecord(solver="storc", rows=rows)

"""Feasible regions and their linear minimization oracles.

A region answers argmin_{v in C} <g, v> plus a few geometric queries
(diameter, membership, a deterministic start point). Regions operate on flat
float64 vectors; the nuclear-norm ball treats them as row-major d1 x d2
matrices internally.
"""

import numpy as np
from dataclasses import dataclass


class PowerIterationError(RuntimeError):
    """Top singular pair did not converge; .residual is the last change."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class PowerIterConfig:
    max_iters: int = 200
    tol: float = 1e-10
    seed: int = 0

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("power iteration needs at least one iteration")
        if not self.tol > 0:
            raise ValueError("power iteration tolerance must be positive")


def top_singular_pair(G, config):
    """Leading singular triple (u, sigma, v) of G by power iteration on G^T G.

    Stops when the Rayleigh quotient of G^T G changes by at most
    config.tol relative to its size; raises PowerIterationError otherwise.
    """
    G = np.asarray(G, dtype=np.float64)
    rng = np.random.Generator(np.random.Philox(config.seed))
    v = rng.standard_normal(G.shape[1])
    nv = np.linalg.norm(v)
    while nv == 0.0:  # vanishing draw, essentially impossible but cheap to cover
        v = rng.standard_normal(G.shape[1])
        nv = np.linalg.norm(v)
    v /= nv
    rho_prev = -np.inf
    delta = np.inf
    for _ in range(config.max_iters):
        w = G.T @ (G @ v)
        rho = float(v @ w)  # Rayleigh quotient of G^T G at the current v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            # v landed exactly in the null space; restart from a fresh draw
            v = rng.standard_normal(G.shape[1])
            v /= np.linalg.norm(v)
            rho_prev = -np.inf
            continue
        v = w / nw
        delta = abs(rho - rho_prev)
        if delta <= config.tol * max(abs(rho), 1e-300):
            Gv = G @ v
            sigma = float(np.linalg.norm(Gv))
            u = Gv / sigma if sigma > 0 else np.zeros(G.shape[0])
            return u, sigma, v
        rho_prev = rho
    raise PowerIterationError(
        f"power iteration did not converge in {config.max_iters} iterations "
        f"(last Rayleigh change {delta:.3e})",
        residual=delta,
    )


class FeasibleRegion:
    """Base class; subclasses define the oracle on flat vectors."""

    dim = 0

    def lmo_raw(self, g):
        raise NotImplementedError

    def diameter(self):
        raise NotImplementedError

    def contains(self, x, tol=1e-9):
        raise NotImplementedError

    def initial_point(self):
        raise NotImplementedError

    def _check_g(self, g):
        g = np.asarray(g, dtype=np.float64)
        if g.shape != (self.dim,):
            raise ValueError(f"dimension mismatch: expected ({self.dim},), got {g.shape}")
        return g


class L1Ball(FeasibleRegion):
    """{ x : ||x||_1 <= radius }."""

    def __init__(self, radius, dim):
        if not radius > 0:
            raise ValueError(f"radius must be positive, got {radius}")
        if dim < 1:
            raise ValueError("dimension must be at least 1")
        self.radius = float(radius)
        self.dim = int(dim)

    def lmo_raw(self, g):
        """Vertex -radius * sign(g_k) e_k at the largest |g_k|.

        Ties break to the smallest index and sign(0) counts as +1, so a zero
        gradient deterministically returns -radius * e_0.
        """
        g = self._check_g(g)
        k = int(np.argmax(np.abs(g)))
        sign = 1.0 if g[k] >= 0 else -1.0
        v = np.zeros(self.dim)
        v[k] = -self.radius * sign
        return v

    def diameter(self):
        return 2.0 * self.radius

    def contains(self, x, tol=1e-9):
        x = np.asarray(x, dtype=np.float64)
        return float(np.abs(x).sum()) <= self.radius + tol

    def initial_point(self):
        return self.lmo_raw(np.zeros(self.dim))


class Box(FeasibleRegion):
    """{ x : lo <= x <= hi } coordinatewise."""

    def __init__(self, lo, hi):
        lo = np.atleast_1d(np.asarray(lo, dtype=np.float64))
        hi = np.atleast_1d(np.asarray(hi, dtype=np.float64))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("lo and hi must be 1-d arrays of equal shape")
        if not (np.isfinite(lo).all() and np.isfinite(hi).all()):
            raise ValueError("box bounds must be finite")
        if (lo > hi).any():
            raise ValueError("box needs lo <= hi in every coordinate")
        self.lo = lo
        self.hi = hi
        self.dim = lo.shape[0]

    def lmo_raw(self, g):
        g = self._check_g(g)
        if not g.any():
            return self.lo.copy()
        return np.where(g > 0, self.lo, self.hi)

    def diameter(self):
        return float(np.linalg.norm(self.hi - self.lo))

    def contains(self, x, tol=1e-9):
        x = np.asarray(x, dtype=np.float64)
        return bool((x >= self.lo - tol).all() and (x <= self.hi + tol).all())

    def initial_point(self):
        return self.lo.copy()


class NuclearBall(FeasibleRegion):
    """{ X : ||X||_* <= radius } over flattened d1 x d2 matrices."""

    def __init__(self, radius, d1, d2, power=None):
        if not radius > 0:
            raise ValueError(f"radius must be positive, got {radius}")
        if d1 < 1 or d2 < 1:
            raise ValueError("matrix dimensions must be positive")
        self.radius = float(radius)
        self.d1 = int(d1)
        self.d2 = int(d2)
        self.dim = self.d1 * self.d2
        self.power = power if power is not None else PowerIterConfig()

    def lmo_raw(self, g):
        """-radius * u1 v1^T for the top singular pair of the gradient.

        The pair comes from power iteration under self.power; a zero gradient
        returns the rank-1 vertex built from a seeded random direction.
        """
        g = self._check_g(g)
        G = g.reshape(self.d1, self.d2)
        if not G.any():
            rng = np.random.Generator(np.random.Philox(self.power.seed))
            u = rng.standard_normal(self.d1)
            u /= np.linalg.norm(u)
            v = rng.standard_normal(self.d2)
            v /= np.linalg.norm(v)
            return (-self.radius * np.outer(u, v)).ravel()
        u, _, v = top_singular_pair(G, self.power)
        return (-self.radius * np.outer(u, v)).ravel()

    def diameter(self):
        return 2.0 * self.radius

    def contains(self, x, tol=1e-9):
        x = np.asarray(x, dtype=np.float64)
        s = np.linalg.svd(x.reshape(self.d1, self.d2), compute_uv=False)
        return float(s.sum()) <= self.radius + tol

    def initial_point(self):
        """The zero matrix: feasible and the usual completion cold start."""
        return np.zeros(self.dim)


def lmo(region, g, counters):
    """argmin_{v in C} <g, v>; charges lo by 1."""
    counters.lo += 1
    return region.lmo_raw(g)


def diameter(region):
    """sup_{x, y in C} ||x - y||_2."""
    return region.diameter()


def contains(region, x, tol=1e-9):
    """Membership with additive tolerance tol."""
    return region.contains(x, tol)

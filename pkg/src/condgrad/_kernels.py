"""Hot loops shared by the oracles and the CondG subsolver.

Everything here is written twice in spirit: the @njit functions below are the
fast path, and the callers in problems.py / condg.py provide vectorized numpy
equivalents used when numba is unavailable or disabled (see _jit). Kernels
take plain arrays (CSR pieces for the sparse logistic data) so they stay
backend-agnostic.
"""

import numpy as np

from ._jit import njit


@njit(cache=True)
def _sigmoid(z):
    if z >= 0.0:
        return 1.0 / (1.0 + np.exp(-z))
    e = np.exp(z)
    return e / (1.0 + e)


@njit(cache=True)
def _softplus(t):
    # log(1 + e^t), evaluated on the safe branch
    if t > 0.0:
        return t + np.log1p(np.exp(-t))
    return np.log1p(np.exp(t))


@njit(cache=True)
def logistic_dots(indptr, indices, data, idx, x):
    """Inner products a_i . x for the rows listed in idx."""
    m = idx.shape[0]
    z = np.zeros(m)
    for r in range(m):
        i = idx[r]
        acc = 0.0
        for j in range(indptr[i], indptr[i + 1]):
            acc += data[j] * x[indices[j]]
        z[r] = acc
    return z


@njit(cache=True)
def logistic_mean_value(indptr, indices, data, labels, idx, x):
    m = idx.shape[0]
    total = 0.0
    for r in range(m):
        i = idx[r]
        z = 0.0
        for j in range(indptr[i], indptr[i + 1]):
            z += data[j] * x[indices[j]]
        y = labels[i]
        total += y * _softplus(z) + (1.0 - y) * _softplus(-z)
    return total / m


@njit(cache=True)
def logistic_mean_grad(indptr, indices, data, labels, idx, x, d):
    """Mean of per-example gradients (sigmoid(z_i) - 1 + y_i) a_i over idx."""
    m = idx.shape[0]
    out = np.zeros(d)
    for r in range(m):
        i = idx[r]
        z = 0.0
        for j in range(indptr[i], indptr[i + 1]):
            z += data[j] * x[indices[j]]
        coef = (_sigmoid(z) - 1.0 + labels[i]) / m
        for j in range(indptr[i], indptr[i + 1]):
            out[indices[j]] += coef * data[j]
    return out


@njit(cache=True)
def logistic_mean_coord_est(indptr, indices, data, labels, idx, x, mu, d):
    """Mean of coordinate-wise central-difference estimates over idx.

    A probe along e_k only moves z_i when k carries a nonzero feature, so the
    off-support differences vanish identically and the sum collapses to one
    pair of value probes per stored feature.
    """
    m = idx.shape[0]
    out = np.zeros(d)
    for r in range(m):
        i = idx[r]
        z = 0.0
        for j in range(indptr[i], indptr[i + 1]):
            z += data[j] * x[indices[j]]
        y = labels[i]
        for j in range(indptr[i], indptr[i + 1]):
            step = mu * data[j]
            zp = z + step
            zm = z - step
            fp = y * _softplus(zp) + (1.0 - y) * _softplus(-zp)
            fm = y * _softplus(zm) + (1.0 - y) * _softplus(-zm)
            out[indices[j]] += (fp - fm) / (2.0 * mu * m)
    return out


@njit(cache=True)
def condg_l1(g, u, y, gamma, tau, radius, eta, max_iters):
    """Frank-Wolfe loop for the CondG prox subproblem over an l1 ball.

    Returns (point, iterations, last_gap, converged). One iteration is one
    LMO call; the caller charges the counter.
    """
    d = g.shape[0]
    x = u.copy()
    grad = np.empty(d)
    it = 0
    gap = 0.0
    while it < max_iters:
        it += 1
        for j in range(d):
            grad[j] = gamma * (g[j] + tau * (x[j] - y[j])) + (x[j] - u[j])
        k = 0
        best = -1.0
        for j in range(d):
            a = abs(grad[j])
            if a > best:
                best = a
                k = j
        vk = -radius if grad[k] >= 0.0 else radius
        gap = 0.0
        for j in range(d):
            gap += grad[j] * x[j]
        gap -= grad[k] * vk
        if gap <= eta + 1e-14:
            return x, it, gap, 1
        sq = 0.0
        for j in range(d):
            diff = x[j]
            if j == k:
                diff -= vk
            sq += diff * diff
        denom = (gamma * tau + 1.0) * sq
        beta = 0.0
        if denom > 0.0:
            beta = gap / denom
        if beta < 0.0:
            beta = 0.0
        elif beta > 1.0:
            beta = 1.0
        for j in range(d):
            x[j] = (1.0 - beta) * x[j]
        x[k] += beta * vk
    return x, it, gap, 0


@njit(cache=True)
def condg_box(g, u, y, gamma, tau, lo, hi, eta, max_iters):
    """Same loop as condg_l1 with the box LMO inlined."""
    d = g.shape[0]
    x = u.copy()
    grad = np.empty(d)
    v = np.empty(d)
    it = 0
    gap = 0.0
    while it < max_iters:
        it += 1
        allzero = True
        for j in range(d):
            grad[j] = gamma * (g[j] + tau * (x[j] - y[j])) + (x[j] - u[j])
            if grad[j] != 0.0:
                allzero = False
        if allzero:
            for j in range(d):
                v[j] = lo[j]
        else:
            for j in range(d):
                v[j] = lo[j] if grad[j] > 0.0 else hi[j]
        gap = 0.0
        for j in range(d):
            gap += grad[j] * (x[j] - v[j])
        if gap <= eta + 1e-14:
            return x, it, gap, 1
        sq = 0.0
        for j in range(d):
            diff = x[j] - v[j]
            sq += diff * diff
        denom = (gamma * tau + 1.0) * sq
        beta = 0.0
        if denom > 0.0:
            beta = gap / denom
        if beta < 0.0:
            beta = 0.0
        elif beta > 1.0:
            beta = 1.0
        for j in range(d):
            x[j] = (1.0 - beta) * x[j] + beta * v[j]
    return x, it, gap, 0

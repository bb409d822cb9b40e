"""Linear minimization oracles, diameters, membership, power iteration."""

import numpy as np
import pytest

from condgrad.lmo import (
    Box,
    L1Ball,
    NuclearBall,
    PowerIterConfig,
    PowerIterationError,
    contains,
    diameter,
    lmo,
    top_singular_pair,
)
from condgrad.oracles import OracleCounters


def test_l1_lmo_dominant_coordinate():
    region = L1Ball(2.0, 2)
    c = OracleCounters()
    v = lmo(region, np.array([3.0, -1.0]), c)
    np.testing.assert_array_equal(v, [-2.0, 0.0])
    assert c.lo == 1


def test_l1_lmo_tie_and_zero_rules():
    region = L1Ball(1.0, 3)
    c = OracleCounters()
    # |g| ties at indices 0 and 2 resolve to index 0
    np.testing.assert_array_equal(lmo(region, np.array([-2.0, 1.0, 2.0]), c), [1.0, 0, 0])
    # sign(0) counts as positive, so a zero gradient lands on -r e_0
    np.testing.assert_array_equal(lmo(region, np.zeros(3), c), [-1.0, 0, 0])
    assert c.lo == 2


def test_box_lmo_sign_rule():
    region = Box(np.array([-1.0, -1.0]), np.array([1.0, 1.0]))
    c = OracleCounters()
    v = lmo(region, np.array([0.5, -2.0]), c)
    np.testing.assert_array_equal(v, [-1.0, 1.0])
    # zero coordinate goes to hi under the g > 0 test, all-zero g to the lo corner
    np.testing.assert_array_equal(lmo(region, np.array([0.0, 1.0]), c), [1.0, -1.0])
    np.testing.assert_array_equal(lmo(region, np.zeros(2), c), [-1.0, -1.0])


def test_nuclear_lmo_diagonal_example():
    region = NuclearBall(1.0, 2, 2)
    c = OracleCounters()
    v = lmo(region, np.array([2.0, 0.0, 0.0, 1.0]), c)
    np.testing.assert_allclose(v.reshape(2, 2), [[-1.0, 0.0], [0.0, 0.0]], atol=2e-5)
    assert c.lo == 1


def test_diameters():
    assert diameter(L1Ball(3.0, 5)) == 6.0
    assert diameter(Box(np.zeros(4), np.ones(4))) == 2.0
    assert diameter(NuclearBall(2.0, 3, 3)) == 4.0


def test_contains_pins():
    assert contains(L1Ball(1.0, 2), np.array([0.5, 0.5]), tol=0.0)
    assert not contains(L1Ball(1.0, 2), np.array([0.6, 0.5]), tol=1e-9)
    assert contains(NuclearBall(1.0, 2, 2), np.zeros(4))
    box = Box(np.array([0.0]), np.array([2.0]))
    assert contains(box, np.array([2.0 + 1e-10]))
    assert not contains(box, np.array([2.1]))


def random_feasible_l1(rng, region, count):
    w = rng.dirichlet(np.ones(region.dim), size=count)
    signs = np.where(rng.random((count, region.dim)) < 0.5, -1.0, 1.0)
    return w * signs * region.radius * rng.random((count, 1))


def test_lo_optimality_l1_and_box():
    # the oracle value never exceeds the linear value at any feasible point
    rng = np.random.Generator(np.random.Philox(100))
    l1 = L1Ball(1.5, 6)
    box = Box(-rng.random(6) - 0.5, rng.random(6) + 0.5)
    pts_l1 = random_feasible_l1(rng, l1, 100)
    pts_box = box.lo + (box.hi - box.lo) * rng.random((100, 6))
    for _ in range(1000):
        g = rng.normal(size=6)
        v1 = l1.lmo_raw(g)
        assert g @ v1 <= (pts_l1 @ g).min() + 1e-12
        assert contains(l1, v1, 1e-12)
        v2 = box.lmo_raw(g)
        assert g @ v2 <= (pts_box @ g).min() + 1e-12
        assert contains(box, v2, 1e-12)


def test_convex_combinations_stay_feasible():
    rng = np.random.Generator(np.random.Philox(101))
    region = L1Ball(2.0, 4)
    verts = np.array([region.lmo_raw(rng.normal(size=4)) for _ in range(8)])
    for _ in range(50):
        w = rng.dirichlet(np.ones(8))
        assert contains(region, verts.T @ w, 1e-9)


def test_nuclear_lmo_near_optimal_vs_dense_svd():
    rng = np.random.Generator(np.random.Philox(102))
    for _ in range(30):
        d1 = int(rng.integers(2, 21))
        d2 = int(rng.integers(2, 21))
        G = rng.normal(size=(d1, d2))
        region = NuclearBall(1.0, d1, d2)
        v = region.lmo_raw(G.ravel())
        best = -np.linalg.svd(G, compute_uv=False)[0]
        got = float(G.ravel() @ v)
        assert got <= best * (1.0 - 1e-6) + 1e-15 or abs(got - best) <= 1e-6 * abs(best)
        assert contains(region, v, 1e-9)


def test_nuclear_zero_gradient_is_deterministic_vertex():
    region = NuclearBall(3.0, 4, 5)
    v1 = region.lmo_raw(np.zeros(20))
    v2 = region.lmo_raw(np.zeros(20))
    np.testing.assert_array_equal(v1, v2)
    s = np.linalg.svd(v1.reshape(4, 5), compute_uv=False)
    assert s[0] == pytest.approx(3.0, rel=1e-12)  # rank one at full radius
    assert s[1:].max() < 1e-12


def test_initial_points():
    np.testing.assert_array_equal(L1Ball(2.0, 3).initial_point(), [-2.0, 0.0, 0.0])
    box = Box(np.array([0.5, -1.0]), np.array([1.0, 1.0]))
    np.testing.assert_array_equal(box.initial_point(), [0.5, -1.0])
    np.testing.assert_array_equal(NuclearBall(1.0, 2, 3).initial_point(), np.zeros(6))


def test_top_singular_pair_matches_dense_svd():
    rng = np.random.Generator(np.random.Philox(103))
    G = rng.normal(size=(8, 6))
    u, sigma, v = top_singular_pair(G, PowerIterConfig())
    U, S, Vt = np.linalg.svd(G)
    assert sigma == pytest.approx(S[0], rel=1e-9)
    # u and v flip sign together, so the outer product is sign-free; vector
    # accuracy is only the square root of the Rayleigh tolerance
    np.testing.assert_allclose(np.outer(u, v), np.outer(U[:, 0], Vt[0]), atol=1e-4)


def test_power_iteration_budget_error():
    rng = np.random.Generator(np.random.Philox(104))
    G = rng.normal(size=(12, 12))
    with pytest.raises(PowerIterationError) as err:
        top_singular_pair(G, PowerIterConfig(max_iters=1))
    assert err.value.residual > 0


def test_power_iter_config_validation():
    with pytest.raises(ValueError, match="at least one iteration"):
        PowerIterConfig(max_iters=0)
    with pytest.raises(ValueError, match="tolerance must be positive"):
        PowerIterConfig(tol=0.0)


def test_region_validation_and_dimension_checks():
    with pytest.raises(ValueError, match="radius must be positive"):
        L1Ball(0.0, 2)
    with pytest.raises(ValueError, match="lo <= hi"):
        Box(np.array([1.0]), np.array([0.0]))
    with pytest.raises(ValueError, match="must be finite"):
        Box(np.array([-np.inf]), np.array([0.0]))
    with pytest.raises(ValueError, match="dimension mismatch"):
        L1Ball(1.0, 2).lmo_raw(np.zeros(3))
    with pytest.raises(ValueError, match="dimension mismatch"):
        NuclearBall(1.0, 2, 2).lmo_raw(np.zeros(3))

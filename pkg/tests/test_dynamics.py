import math

import numpy as np
import pytest

from acca import (PI, SimulationParams, StepParams, Topology, UsageError, acca_step, circ_increment, make_rng,
                  midpoint_update, noise_kick, noisy_step, parallel_step, rounded_winding, run_simulation,
                  wrap_pi)
from acca.dynamics import parallel_midpoint
from acca.harness import initial_configuration
from acca.matching import sample_matching
from acca.verify import small_increment_ring
from conftest import circ_close


def canonical(theta):
    return np.all(theta >= -PI) and np.all(theta < PI)


def test_midpoint_ordinary():
    out = midpoint_update([0.0, PI / 2, 1.0], (0, 1), Topology.path(3))
    assert out[0] == pytest.approx(PI / 4) and out[1] == pytest.approx(PI / 4)
    assert out[2] == 1.0


def test_midpoint_through_the_cut():
    out = midpoint_update([0.9 * PI, -0.9 * PI], (0, 1), Topology.path(2))
    assert circ_close(out, [-PI, -PI], 1e-12)
    assert canonical(out)


def test_midpoint_fixed_point_and_orientation():
    topo = Topology.ring(4)
    theta = np.array([0.3, 0.3, -2.0, 1.0])
    assert np.array_equal(midpoint_update(theta, (0, 1), topo), theta)
    a = midpoint_update(theta, (3, 0), topo)
    b = midpoint_update(theta, (0, 3), topo)
    assert circ_close(a, b, 1e-15)


def test_midpoint_rejects_non_edge():
    with pytest.raises(UsageError):
        midpoint_update(np.zeros(4), (0, 2), Topology.ring(4))
    with pytest.raises(UsageError):
        midpoint_update(np.zeros(4), (3, 0), Topology.path(4))


def test_midpoint_contracts_the_edge():
    rng = np.random.default_rng(0)
    topo = Topology.ring(10)
    for _ in range(2000):
        theta = rng.uniform(-PI, PI, 10)
        e = topo.edge(int(rng.integers(10)))
        out = midpoint_update(theta, e, topo)
        assert abs(circ_increment(out[e[0]], out[e[1]])) <= 1e-12
        assert canonical(out)


def test_noise_kick_examples():
    out = noise_kick([PI / 2, 0.1], 0, 0.0, 0.35)
    assert out[0] == pytest.approx(0.325 * PI, abs=1e-15)
    assert out[1] == 0.1
    theta = np.array([1.0, -2.0])
    assert np.array_equal(noise_kick(theta, 1, -PI, 0.0), theta)
    assert noise_kick([0.0], 0, 0.0, 0.7)[0] == 0.0


def test_noise_kick_targets_pi_either_representation():
    a = noise_kick([2.0], 0, PI, 0.5)
    b = noise_kick([2.0], 0, -PI, 0.5)
    assert a[0] == b[0] == pytest.approx(2.0 + 0.5 * (PI - 2.0))


@pytest.mark.parametrize("eps", [-0.1, 1.5])
def test_noise_kick_rejects_epsilon(eps):
    with pytest.raises(UsageError):
        noise_kick([0.0], 0, 0.0, eps)


def test_acca_step_single_edge_path():
    out = acca_step([0.0, PI / 2], Topology.path(2), make_rng(0))
    assert out == pytest.approx([PI / 4, PI / 4])


def test_consensus_is_absorbing(rng):
    topo = Topology.ring(50)
    theta = np.full(50, -1.3)
    for _ in range(100):
        theta = acca_step(theta, topo, rng)
    assert np.all(theta == -1.3)


def test_acca_step_deterministic():
    topo = Topology.ring(100)
    theta0 = wrap_pi(np.random.default_rng(5).uniform(-PI, PI, 100))
    runs = []
    for _ in range(2):
        rng, theta = make_rng(99), theta0
        for _ in range(500):
            theta = acca_step(theta, topo, rng)
        runs.append(theta)
    assert np.array_equal(*runs)


def test_noisy_step_with_zero_epsilon_is_acca():
    topo = Topology.path(30)
    theta = wrap_pi(np.random.default_rng(1).uniform(-PI, PI, 30))
    a, b = make_rng(4), make_rng(4)
    for _ in range(200):
        x = noisy_step(theta, topo, 0.0, a)
        y = acca_step(theta, topo, b)
        b.integers(0, topo.n)
        b.integers(0, 2)
        assert np.array_equal(x, y)
        theta = x


def test_noisy_step_full_kick_at_target():
    # everything at 0: the midpoint is a no-op and the kick either stays (target 0) or jumps to pi
    topo = Topology.ring(6)
    rng = make_rng(3)
    for _ in range(50):
        probe = make_rng(int(rng.integers(2**32)))
        replay = make_rng(0)
        replay.bit_generator.state = probe.bit_generator.state
        out = noisy_step(np.zeros(6), topo, 1.0, probe)
        replay.integers(0, 6)
        site = replay.integers(0, 6)
        target = replay.integers(0, 2)
        expected = np.zeros(6)
        if target == 1:
            expected[site] = -PI
        assert np.array_equal(out, expected)


def test_noisy_step_target_frequency():
    rng = make_rng(17)
    draws = 100_000
    hits = 0
    for _ in range(draws):
        rng.integers(0, 10)
        rng.integers(0, 10)
        hits += rng.integers(0, 2) == 0
    # same draw order as noisy_step; check the Bernoulli target directly
    assert abs(hits / draws - 0.5) <= 0.01
    topo, theta = Topology.ring(10), np.full(10, PI / 2)
    up = 0
    for _ in range(20_000):
        out = noisy_step(theta, topo, 0.5, rng)
        up += np.any(out > PI / 2 + 1e-9)
    assert abs(up / 20_000 - 0.5) <= 0.015


def test_parallel_midpoint_order_independent():
    rng = make_rng(21)
    topo = Topology.ring(40)
    for _ in range(200):
        theta = rng.uniform(-PI, PI, 40)
        edges = list(sample_matching(40, 12, "ring", rng))
        ref = parallel_midpoint(theta, edges, topo)
        perm = [edges[i] for i in rng.permutation(len(edges))]
        assert np.array_equal(parallel_midpoint(theta, perm, topo), ref)
        seq = theta.copy()
        for e in perm:
            seq = midpoint_update(seq, e, topo)
        assert np.array_equal(seq, ref)


def test_parallel_step_without_noise_is_parallel_midpoint():
    topo = Topology.ring(20)
    theta = np.random.default_rng(2).uniform(-PI, PI, 20)
    a, b = make_rng(8), make_rng(8)
    out = parallel_step(theta, topo, StepParams(0.3, 5, 0), a)
    edges = sample_matching(20, 5, "ring", b)
    assert np.array_equal(out, parallel_midpoint(theta, edges, topo))


def test_parallel_step_path_reduces_to_noisy_step_bitwise():
    # on the path a 1-matching and a 1-subset consume exactly the draws of noisy_step
    topo = Topology.path(25)
    theta = np.random.default_rng(3).uniform(-PI, PI, 25)
    a, b = make_rng(5), make_rng(5)
    x = y = theta
    for _ in range(500):
        x = parallel_step(x, topo, StepParams(0.05, 1, 1), a)
        y = noisy_step(y, topo, 0.05, b)
        assert np.array_equal(x, y)


@pytest.mark.parametrize("params", [StepParams(0.0, 51, 0), StepParams(0.0, 0, 0), StepParams(0.0, 1, 102),
                                    StepParams(2.0, 1, 1)])
def test_parallel_step_rejects_params(params):
    with pytest.raises(UsageError):
        parallel_step(np.zeros(101), Topology.ring(101), params, make_rng(0))


def test_winding_stable_under_small_increments():
    rng = make_rng(31)
    for _ in range(10_000):
        topo = Topology.ring(int(rng.integers(3, 80)))
        theta = small_increment_ring(rng, topo.n)
        assert rounded_winding(acca_step(theta, topo, rng), topo) == rounded_winding(theta, topo)


@pytest.mark.parametrize("topology, eps, k_mid, k_noise", [
    ("ring", 0.0, 1, 1), ("ring", 0.02, 7, 3), ("path", 0.01, 1, 1), ("path", 0.3, 12, 25), ("ring", 1.0, 12, 25),
    ("path", 0.002, 1, 0),
])
def test_compiled_loop_matches_reference(topology, eps, k_mid, k_noise):
    params = SimulationParams(n=25, topology=topology, epsilon=eps, k_mid=k_mid, k_noise=k_noise, steps=300,
                              record_stride=300, seed=77)
    topo = params.topo
    rng = make_rng(params.seed)
    theta = initial_configuration(params, rng)
    for _ in range(params.steps):
        theta = parallel_step(theta, topo, params.step_params, rng)
        assert canonical(theta)
    assert np.array_equal(run_simulation(params).final, theta)

"""Compiled hot loops. Arithmetic mirrors :mod:`acca.circle` and :mod:`acca.dynamics`
operation for operation so trajectories agree bit for bit."""

import math

import numpy as np
from numba import njit

PI = math.pi
TWO_PI = 2.0 * math.pi
PSI_UNDEFINED_BELOW = 1e-12


@njit(cache=True)
def wrap(x):
    r = x - TWO_PI * math.floor((x + PI) / TWO_PI)
    if r >= PI:
        r -= TWO_PI
    if r < -PI:
        r += TWO_PI
    return r


@njit(cache=True)
def kuramoto(theta):
    c = 0.0
    s = 0.0
    for x in theta:
        c += math.cos(x)
        s += math.sin(x)
    n = theta.size
    r = math.hypot(c, s) / n
    if r > 1.0:
        r = 1.0
    if r < PSI_UNDEFINED_BELOW:
        return r, np.nan
    return r, wrap(math.atan2(s, c))


@njit(cache=True)
def y_projection(theta):
    s = 0.0
    for x in theta:
        s += math.sin(x)
    return s / theta.size


@njit(cache=True)
def winding_sum(theta):
    n = theta.size
    acc = 0.0
    for i in range(n):
        acc += wrap(theta[(i + 1) % n] - theta[i])
    return acc / TWO_PI


@njit(cache=True)
def pair_weights(n):
    """Wrapped site-phase differences for the ring embedding Theta_i = 2*pi*i/n."""
    phase = np.empty(n)
    for i in range(n):
        phase[i] = wrap(TWO_PI * (i + 1) / n)
    w = np.zeros((n, n))
    den = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                w[i, j] = wrap(phase[j] - phase[i])
                den += abs(w[i, j])
    return phase, w, den


@njit(cache=True)
def tau1_numerator(theta, w):
    n = theta.size
    num = 0.0
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            d = wrap(theta[j] - theta[i])
            if d > 0.0:
                num += w[i, j]
            elif d < 0.0:
                num -= w[i, j]
    return num


@njit(cache=True)
def tau1_pairs(sites, phi):
    """Numerator and denominator of the all-ordered-pairs tau1 U-statistic."""
    n = sites.size
    num = 0.0
    den = 0.0
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            ds = wrap(sites[j] - sites[i])
            den += abs(ds)
            d = wrap(phi[j] - phi[i])
            if d > 0.0:
                num += ds
            elif d < 0.0:
                num -= ds
    return num, den


@njit(cache=True)
def choose(pool, swaps, out, m, k, rng):
    """Partial Fisher-Yates: sorted k-subset of range(m) written to out[:k].

    ``pool`` must hold the identity permutation on entry and is restored on
    exit, so each call costs O(k).
    """
    for i in range(k):
        j = rng.integers(i, m)
        swaps[i] = j
        tmp = pool[i]
        pool[i] = pool[j]
        pool[j] = tmp
    out[:k] = np.sort(pool[:k])
    for i in range(k - 1, -1, -1):
        j = swaps[i]
        tmp = pool[i]
        pool[i] = pool[j]
        pool[j] = tmp


@njit(cache=True)
def parallel_step(theta, ring, eps, k_mid, k_noise, rng, pool, swaps, out):
    n = theta.size
    shift = 0
    if ring:
        shift = rng.integers(0, n)
    choose(pool, swaps, out, n - k_mid, k_mid, rng)
    for q in range(k_mid):
        i = out[q] + q
        if ring:
            i = (i + shift) % n
        j = (i + 1) % n
        half = wrap(theta[j] - theta[i]) / 2.0
        a = wrap(theta[i] + half)
        b = wrap(theta[j] - half)
        theta[i] = a
        theta[j] = b
    if k_noise > 0:
        choose(pool, swaps, out, n, k_noise, rng)
        for q in range(k_noise):
            site = out[q]
            target = 0.0
            if rng.integers(0, 2) == 1:
                target = -PI
            theta[site] = wrap(theta[site] + eps * wrap(target - theta[site]))


@njit(cache=True)
def run(theta, ring, eps, k_mid, k_noise, steps, stride, rng, w, den, keep_frames, snap_t, stop_r):
    """Advance ``theta`` in place, recording observables every ``stride`` steps.

    ``snap_t`` lists ascending times at which to copy the configuration.
    Stops after the first record with R > stop_r when stop_r > 0.
    Returns record times, observables (R, psi, Y, tau1, W-sum), frames at
    record times, snapshots and the number of steps taken.
    """
    n = theta.size
    n_rec = steps // stride + 1
    t = np.zeros(n_rec, np.int64)
    obs = np.full((n_rec, 5), np.nan)
    frames = np.zeros((n_rec if keep_frames else 0, n))
    snaps = np.full((snap_t.size, n), np.nan)
    pool = np.arange(n)
    swaps = np.empty(n, np.int64)
    out = np.empty(n, np.int64)
    rec = 0
    nxt = 0
    step = 0
    while True:
        while nxt < snap_t.size and snap_t[nxt] == step:
            snaps[nxt, :] = theta
            nxt += 1
        if step % stride == 0:
            r, psi = kuramoto(theta)
            t[rec] = step
            obs[rec, 0] = r
            obs[rec, 1] = psi
            obs[rec, 2] = y_projection(theta)
            obs[rec, 3] = tau1_numerator(theta, w) / den
            if ring:
                obs[rec, 4] = winding_sum(theta)
            if keep_frames:
                frames[rec, :] = theta
            rec += 1
            if stop_r > 0.0 and r > stop_r:
                break
        if step == steps:
            break
        parallel_step(theta, ring, eps, k_mid, k_noise, rng, pool, swaps, out)
        step += 1
    return t[:rec], obs[:rec], frames[:rec], snaps, step

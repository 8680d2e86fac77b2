"""Update rules: pairwise circular midpoint, bi-modal noise kick, parallel bursts.

These functions return new arrays and are the readable reference for the
compiled trajectory loop in :mod:`acca._kernels`. Generator draws happen in a
fixed order that is part of the contract:

* ``acca_step``: ``integers(0, n_edges)`` for the edge.
* ``noisy_step``: edge, then ``integers(0, n)`` for the site, then
  ``integers(0, 2)`` for the target (0 -> angle 0, 1 -> angle pi).
* ``parallel_step``: the matching draws of
  :func:`acca.matching.sample_matching`, the site-subset draws of
  :func:`acca.matching.sample_subset`, then one target draw per selected site
  in ascending site order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circle import PI, Topology, circ_increment, wrap_pi
from .errors import UsageError
from .matching import sample_matching, sample_subset

# the target pi is stored as its canonical representative
TARGETS = (0.0, -PI)


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 generator; the stream for a given seed is platform independent."""
    return np.random.Generator(np.random.PCG64(int(seed)))


@dataclass(frozen=True)
class StepParams:
    epsilon: float = 0.0
    k_mid: int = 1
    k_noise: int = 0

    def validate(self, topo: Topology) -> "StepParams":
        if not 0.0 <= self.epsilon <= 1.0:
            raise UsageError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if self.k_mid < 1:
            raise UsageError("k_mid must be at least 1")
        if self.k_mid > topo.max_matching:
            raise UsageError(f"k_mid={self.k_mid} exceeds the maximum matching size {topo.max_matching} of {topo}")
        if not 0 <= self.k_noise <= topo.n:
            raise UsageError(f"k_noise must lie in [0, {topo.n}], got {self.k_noise}")
        return self


def _config(theta, topo: Topology) -> np.ndarray:
    theta = np.array(theta, dtype=np.float64)
    if theta.shape != (topo.n,):
        raise UsageError(f"configuration of shape {theta.shape} does not fit {topo}")
    return theta


def midpoint_update(theta, edge: tuple[int, int], topo: Topology) -> np.ndarray:
    """Move both endpoints of ``edge`` to their midpoint along the shortest arc."""
    topo.edge_index(edge)
    out = _config(theta, topo)
    i, j = edge
    half = circ_increment(out[i], out[j]) / 2.0
    out[i], out[j] = wrap_pi(out[i] + half), wrap_pi(out[j] - half)
    return out


def noise_kick(theta, site: int, target: float, epsilon: float) -> np.ndarray:
    """Move ``theta[site]`` a fraction ``epsilon`` of the shortest arc toward ``target``."""
    if not 0.0 <= epsilon <= 1.0:
        raise UsageError(f"epsilon must lie in [0, 1], got {epsilon}")
    out = np.array(theta, dtype=np.float64)
    if not 0 <= site < out.size:
        raise UsageError(f"site {site} out of range")
    target = wrap_pi(target)
    out[site] = wrap_pi(out[site] + epsilon * wrap_pi(target - out[site]))
    return out


def acca_step(theta, topo: Topology, rng: np.random.Generator) -> np.ndarray:
    e = int(rng.integers(0, topo.n_edges))
    return midpoint_update(theta, topo.edge(e), topo)


def noisy_step(theta, topo: Topology, epsilon: float, rng: np.random.Generator) -> np.ndarray:
    out = acca_step(theta, topo, rng)
    site = int(rng.integers(0, topo.n))
    target = TARGETS[int(rng.integers(0, 2))]
    return noise_kick(out, site, target, epsilon)


def parallel_midpoint(theta, edges, topo: Topology) -> np.ndarray:
    """Midpoint-update every edge of a matching, reading only from ``theta``."""
    src = _config(theta, topo)
    out = src.copy()
    for i, j in edges:
        topo.edge_index((i, j))
        half = circ_increment(src[i], src[j]) / 2.0
        out[i] = wrap_pi(src[i] + half)
        out[j] = wrap_pi(src[j] - half)
    return out


def parallel_step(theta, topo: Topology, params: StepParams, rng: np.random.Generator) -> np.ndarray:
    params.validate(topo)
    edges = sample_matching(topo.n, params.k_mid, topo.kind, rng)
    out = parallel_midpoint(theta, edges, topo)
    for site in sample_subset(topo.n, params.k_noise, rng):
        target = TARGETS[int(rng.integers(0, 2))]
        out[site] = wrap_pi(out[site] + params.epsilon * wrap_pi(target - out[site]))
    return out

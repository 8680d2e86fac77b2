"""Numerical checks of the tau1 closed form and the identities behind it."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import _kernels
from .circle import PI, TWO_PI, WINDING_TOL, Topology, wrap_pi
from .errors import NumericError
from .dynamics import acca_step, make_rng
from .harness import derive_seed
from .observables import alternating_odd_sum, tau1_pair_estimate, tau1_theory

KS_ALPHA = 0.01
MEAN_ABS_TOL = 0.005


@dataclass(frozen=True)
class TauRow:
    w: int
    theory: float
    estimate: float
    tolerance: float

    @property
    def error(self) -> float:
        return abs(self.estimate - self.theory)

    @property
    def passed(self) -> bool:
        return self.error <= self.tolerance


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    detail: str
    passed: bool


def tau_table(max_w: int, samples: int, seed: int = 0, alpha: float = 0.0) -> list[TauRow]:
    """Monte Carlo tau1 against the closed form for w in -max_w..-1, 1..max_w.

    Tolerance is 4 / sqrt(samples); each w has its own derived stream.
    """
    tol = 4.0 / math.sqrt(samples)
    rows = []
    for w in [*range(-max_w, 0), *range(1, max_w + 1)]:
        rng = make_rng(derive_seed(seed, int(w < 0), abs(w)))
        rows.append(TauRow(w, tau1_theory(w), tau1_pair_estimate(w, alpha, samples, rng), tol))
    return rows


def wrapped_differences(samples: int, rng: np.random.Generator) -> np.ndarray:
    theta = rng.uniform(-PI, PI, size=(2, samples))
    return wrap_pi(theta[1] - theta[0])


def check_wrapped_uniform(samples: int, rng: np.random.Generator) -> Check:
    d = wrapped_differences(samples, rng)
    p = stats.kstest(d, stats.uniform(loc=-PI, scale=TWO_PI).cdf).pvalue
    return Check("wrapped difference ~ Uniform[-pi, pi)", p, f"KS p = {p:.4g} over {samples} pairs", p > KS_ALPHA)


def check_mean_abs_difference(samples: int, rng: np.random.Generator) -> Check:
    m = float(np.abs(wrapped_differences(samples, rng)).mean())
    return Check("E|wrapped difference| = pi/2", m, f"{m:.6f} vs {PI / 2:.6f}", abs(m - PI / 2) <= MEAN_ABS_TOL)


def check_sign_identity(points: int = 100_000, span: float = 20 * PI, radius: float = 1e-9) -> Check:
    x = np.linspace(-span, span, points)
    x = x[np.abs(x - PI * np.round(x / PI)) > radius]
    bad = int(np.count_nonzero(np.sign(wrap_pi(x)) != np.sign(np.sin(x))))
    return Check("sign(wrap(x)) = sign(sin x) off pi*Z", bad, f"{bad} mismatches on {x.size} points", bad == 0)


def check_alternating_sum(max_w: int = 50) -> Check:
    bad = [w for w in range(1, max_w + 1) if alternating_odd_sum(w) != (-1) ** (w + 1) * w]
    return Check("sum (-1)^k (2k+1) = (-1)^(w+1) w", len(bad), f"w = 1..{max_w}, failures {bad}", not bad)


def small_increment_ring(rng: np.random.Generator, n: int, bound: float = PI / 2) -> np.ndarray:
    """Random ring configuration whose circular increments all satisfy |delta| <= bound."""
    while True:
        d = rng.uniform(-bound, bound, size=n)
        total = d.sum()
        d -= (total - TWO_PI * round(total / TWO_PI)) / n
        if np.abs(d).max() > bound:
            continue
        theta = wrap_pi(rng.uniform(-PI, PI) + np.concatenate(([0.0], np.cumsum(d[:-1]))))
        if np.abs(wrap_pi(np.append(theta[1:], theta[0]) - theta)).max() <= bound:
            return theta


def _winding(theta: np.ndarray) -> int:
    w = _kernels.winding_sum(theta)
    k = round(w)
    if abs(w - k) >= WINDING_TOL:
        raise NumericError(f"winding sum {w!r} is not within {WINDING_TOL} of an integer")
    return k


def check_winding_stability(trials: int, rng: np.random.Generator, max_n: int = 500) -> Check:
    """One midpoint step never changes W when every increment is at most pi/2."""
    changed = 0
    for _ in range(trials):
        topo = Topology.ring(int(rng.integers(3, max_n + 1)))
        theta = small_increment_ring(rng, topo.n)
        before = _winding(theta)
        after = _winding(acca_step(theta, topo, rng))
        changed += before != after
    return Check("max|delta| <= pi/2 keeps W over one step", changed, f"{changed} of {trials} trials changed W", changed == 0)


def identity_checks(seed: int = 0, samples: int = 1_000_000, stability_trials: int = 10_000) -> list[Check]:
    return [
        check_wrapped_uniform(samples, make_rng(derive_seed(seed, 101))),
        check_sign_identity(),
        check_alternating_sum(),
        check_mean_abs_difference(samples, make_rng(derive_seed(seed, 102))),
        check_winding_stability(stability_trials, make_rng(derive_seed(seed, 103))),
    ]

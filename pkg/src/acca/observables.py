"""Order parameters: Kuramoto (R, psi), the Y projection, and the weighted
toroidal Kendall coefficient tau1, together with its closed form on ideal
winding configurations."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from .circle import PI, TWO_PI, wrap_pi
from .errors import DomainError, NumericError, UsageError

LATTICE = "lattice"
IID = "iid"


@dataclass(frozen=True)
class KuramotoOrder:
    r: float
    psi: float | None  # None when r is below the noise floor

    @property
    def defined(self) -> bool:
        return self.psi is not None


def _as_config(theta) -> np.ndarray:
    theta = np.ascontiguousarray(theta, dtype=np.float64)
    if theta.ndim != 1 or theta.size == 0:
        raise UsageError("a configuration is a non-empty 1-d array of angles")
    return theta


def kuramoto(theta) -> KuramotoOrder:
    r, psi = _kernels.kuramoto(_as_config(theta))
    return KuramotoOrder(float(r), None if np.isnan(psi) else float(psi))


def y_projection(theta) -> float:
    """Mean of sin(theta); +1 when everyone sits at pi/2, -1 at -pi/2."""
    return float(_kernels.y_projection(_as_config(theta)))


@lru_cache(maxsize=16)
def _weights(n: int):
    _, w, den = _kernels.pair_weights(n)
    w.setflags(write=False)
    return w, den


def site_phases(n: int) -> np.ndarray:
    """Ring embedding of the sites, Theta_i = wrap(2*pi*i/n) for i = 1..n."""
    return wrap_pi(TWO_PI * np.arange(1, n + 1) / n)


def tau1_config(theta) -> float:
    """tau1 of a configuration against the ring embedding of its sites.

    All ordered pairs i != j contribute ``wrap(Theta_j - Theta_i) *
    sign(wrap(theta_j - theta_i))``; the sum is normalised by
    ``sum |wrap(Theta_j - Theta_i)|``. ``sign(0)`` counts as 0. O(n**2).
    """
    theta = _as_config(theta)
    if theta.size < 2:
        raise UsageError("tau1 needs at least two sites")
    w, den = _weights(theta.size)
    return float(_kernels.tau1_numerator(theta, w) / den)


def tau1_u_statistic(sites, phi) -> float:
    """tau1 over all ordered pairs of the samples ``(sites[i], phi[i])``."""
    sites = _as_config(sites)
    phi = _as_config(phi)
    if sites.shape != phi.shape or sites.size < 2:
        raise UsageError("need two equal-length samples of size >= 2")
    num, den = _kernels.tau1_pairs(sites, phi)
    if den == 0.0:
        raise NumericError("all site phases coincide")
    return float(num / den)


def tau1_config_sampled(theta, pairs: int, rng: np.random.Generator) -> float:
    """Estimate of :func:`tau1_config` from ``pairs`` random ordered pairs, for large n."""
    theta = _as_config(theta)
    n = theta.size
    if n < 2 or pairs < 1:
        raise UsageError("need n >= 2 and a positive pair budget")
    i = rng.integers(0, n, size=pairs)
    j = (i + rng.integers(1, n, size=pairs)) % n
    phase = site_phases(n)
    dphase = wrap_pi(phase[j] - phase[i])
    den = np.abs(dphase).sum()
    if den == 0.0:
        raise NumericError("all sampled pairs have zero phase separation")
    return float(np.sum(dphase * np.sign(wrap_pi(theta[j] - theta[i]))) / den)


def ideal_winding(n: int, w: int, alpha: float = 0.0, mode: str = LATTICE, rng: np.random.Generator | None = None):
    """Site phases Theta and twisted angles Phi = wrap(alpha + w * Theta).

    ``mode="lattice"`` places Theta on the ring embedding (a winding-``w``
    initial condition); ``mode="iid"`` draws Theta uniformly from the circle.
    """
    if n < 3:
        raise UsageError("an ideal winding configuration needs n >= 3")
    if mode == LATTICE:
        theta_sites = site_phases(n)
    elif mode == IID:
        if rng is None:
            raise UsageError("i.i.d. mode needs a generator")
        theta_sites = wrap_pi(rng.uniform(-PI, PI, size=n))
    else:
        raise UsageError(f"unknown mode {mode!r}")
    phi = wrap_pi(alpha + int(w) * theta_sites)
    return theta_sites, phi


def tau1_pair_estimate(w: int, alpha: float, samples: int, rng: np.random.Generator) -> float:
    """Monte Carlo tau1 over ``samples`` i.i.d. pairs from the ideal winding law."""
    if samples < 1:
        raise UsageError("samples must be positive")
    theta = rng.uniform(-PI, PI, size=(2, samples))
    phi = wrap_pi(alpha + int(w) * theta)
    dtheta = wrap_pi(theta[1] - theta[0])
    den = np.abs(dtheta).sum()
    if den == 0.0:
        raise NumericError("degenerate sample: every pair has zero separation")
    return float(np.sum(dtheta * np.sign(wrap_pi(phi[1] - phi[0]))) / den)


def tau1_theory(w: int) -> float:
    """Closed form (-1)**(w+1) / w for the ideal winding configuration.

    >>> tau1_theory(2)
    -0.5
    """
    if int(w) != w:
        raise DomainError("winding number must be an integer")
    w = int(w)
    if w == 0:
        raise DomainError("tau1 of an ideal winding configuration requires w != 0")
    return (1.0 if w % 2 else -1.0) / w


def alternating_odd_sum(w: int) -> int:
    """1 - 3 + 5 - ... with ``w`` terms; equals (-1)**(w+1) * w."""
    if w < 1:
        raise UsageError("w must be at least 1")
    return sum((-1) ** k * (2 * k + 1) for k in range(w))

"""Canonical angle arithmetic on [-pi, pi), circular increments and winding numbers."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericError, UsageError

PI = math.pi
TWO_PI = 2.0 * math.pi

# |W - round(W)| bound for rings of up to 10**4 sites
WINDING_TOL = 1e-9


def wrap_pi(x):
    """Map ``x`` (scalar or array, radians) to its representative in [-pi, pi).

    Uses the floor formula so every call costs a single rounding; results that
    round up to ``pi`` are folded onto ``-pi``.
    """
    if isinstance(x, (float, int, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            raise DomainError("wrap_pi requires finite input")
        r = x - TWO_PI * math.floor((x + PI) / TWO_PI)
        if r >= PI:
            r -= TWO_PI
        if r < -PI:
            r += TWO_PI
        return r
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 0:
        return wrap_pi(float(arr))
    if not np.isfinite(arr).all():
        raise DomainError("wrap_pi requires finite input")
    out = arr - TWO_PI * np.floor((arr + PI) / TWO_PI)
    out[out >= PI] -= TWO_PI
    out[out < -PI] += TWO_PI
    return out


def circ_increment(a, b):
    """Shortest signed arc from ``a`` to ``b``, i.e. ``wrap_pi(b - a)``."""
    return wrap_pi(np.subtract(b, a))


class Kind(enum.Enum):
    PATH = "path"
    RING = "ring"

    @classmethod
    def parse(cls, value: "Kind | str") -> "Kind":
        if isinstance(value, Kind):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise UsageError(f"unknown topology {value!r} (expected 'path' or 'ring')") from None


@dataclass(frozen=True)
class Topology:
    """Path or ring on sites ``0..n-1``.

    Edge ``e`` joins ``e`` and ``e + 1``; on the ring edge ``n - 1`` is the
    wrap-around edge ``(n - 1, 0)``.
    """

    kind: Kind
    n: int

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind.parse(self.kind))
        if int(self.n) != self.n:
            raise UsageError("site count must be an integer")
        object.__setattr__(self, "n", int(self.n))
        if self.kind is Kind.PATH and self.n < 2:
            raise UsageError("a path needs at least 2 sites")
        if self.kind is Kind.RING and self.n < 3:
            raise UsageError("a ring needs at least 3 sites")

    @classmethod
    def path(cls, n: int) -> "Topology":
        return cls(Kind.PATH, n)

    @classmethod
    def ring(cls, n: int) -> "Topology":
        return cls(Kind.RING, n)

    @property
    def is_ring(self) -> bool:
        return self.kind is Kind.RING

    @property
    def n_edges(self) -> int:
        return self.n if self.is_ring else self.n - 1

    @property
    def max_matching(self) -> int:
        return self.n // 2

    def edge(self, e: int) -> tuple[int, int]:
        if not 0 <= e < self.n_edges:
            raise UsageError(f"edge index {e} out of range for {self}")
        return e, (e + 1) % self.n

    def edges(self) -> list[tuple[int, int]]:
        return [self.edge(e) for e in range(self.n_edges)]

    def edge_index(self, edge: tuple[int, int]) -> int:
        """Index of ``edge`` (either orientation); raises if it is not an edge."""
        i, j = (int(v) for v in edge)
        for a, b in ((i, j), (j, i)):
            if 0 <= a < self.n and 0 <= b < self.n and b == (a + 1) % self.n:
                if a < self.n_edges:
                    return a
        raise UsageError(f"({i}, {j}) is not an edge of {self.kind.value} on {self.n} sites")

    def __str__(self) -> str:
        return f"{self.kind.value}({self.n})"


def winding_number(theta, topo: Topology) -> float:
    """Sum of ring increments divided by 2*pi (an integer up to rounding)."""
    if not topo.is_ring:
        raise UsageError("the winding number is only defined on the ring")
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (topo.n,):
        raise UsageError(f"configuration has {theta.shape} entries, topology expects {topo.n}")
    inc = wrap_pi(np.append(theta[1:], theta[0]) - theta)
    return float(np.sum(inc)) / TWO_PI


def rounded_winding(theta, topo: Topology) -> int:
    """Integer winding number of a ring configuration.

    >>> rounded_winding([0.0, 0.0, 0.0], Topology.ring(3))
    0
    """
    w = winding_number(theta, topo)
    k = round(w)
    if abs(w - k) >= WINDING_TOL:
        raise NumericError(f"winding sum {w!r} is not within {WINDING_TOL} of an integer")
    return int(k)

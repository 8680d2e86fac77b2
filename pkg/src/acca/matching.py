"""Exact counting and uniform sampling of k-matchings on paths and cycles.

A k-matching of the path on ``m`` vertices is a tiling of the path by ``m - k``
units, ``k`` of which are dominoes (a matched edge) and the rest single
vertices. Choosing which units are dominoes is a uniform ``k``-subset of
``m - k`` slots, so the path has ``C(m - k, k)`` matchings and sampling one is
a single call to :func:`sample_subset`.

For the cycle, mark a uniform starting vertex and read the tiling from there.
Every cycle matching has exactly ``n - k`` unit starts, so a uniform (start,
tiling) pair projects onto a uniform matching and gives the count
``n / (n - k) * C(n - k, k)``. No rejection is involved and the number of
generator draws depends only on ``(n, k, kind)``.
"""

from __future__ import annotations

from math import comb

import numpy as np

from .circle import Kind, Topology
from .errors import UsageError


def _check_kind_n(n: int, kind: Kind) -> None:
    if kind is Kind.PATH and n < 2:
        raise UsageError("a path needs at least 2 sites")
    if kind is Kind.RING and n < 3:
        raise UsageError("a ring needs at least 3 sites")


def count_matchings(n: int, k: int, kind: Kind | str) -> int:
    """Number of size-``k`` matchings of the path or cycle on ``n`` vertices (exact)."""
    kind = Kind.parse(kind)
    _check_kind_n(n, kind)
    if not 0 <= k <= n // 2:
        raise UsageError(f"matching size {k} out of range [0, {n // 2}]")
    if kind is Kind.PATH:
        return comb(n - k, k)
    # n * C(n-k, k) is always divisible by n - k
    return n * comb(n - k, k) // (n - k)


def sample_subset(n: int, k: int, rng: np.random.Generator) -> tuple[int, ...]:
    """Uniform ``k``-subset of ``range(n)``, returned sorted.

    Partial Fisher-Yates: draw ``i`` is ``rng.integers(i, n)`` for ``i < k``.
    """
    if n < 0 or not 0 <= k <= n:
        raise UsageError(f"cannot choose {k} of {n} sites")
    pool = list(range(n))
    for i in range(k):
        j = int(rng.integers(i, n))
        pool[i], pool[j] = pool[j], pool[i]
    return tuple(sorted(pool[:k]))


def _path_starts(m: int, k: int, rng: np.random.Generator) -> list[int]:
    slots = sample_subset(m - k, k, rng)
    return [u + j for j, u in enumerate(slots)]


def sample_matching(n: int, k: int, kind: Kind | str, rng: np.random.Generator) -> tuple[tuple[int, int], ...]:
    """Uniformly random size-``k`` matching, as sorted ``(i, j)`` edges with ``j = i + 1 mod n``.

    Draw order: on the ring one ``rng.integers(0, n)`` for the starting vertex,
    then the ``k`` partial-shuffle draws of :func:`sample_subset`.
    """
    kind = Kind.parse(kind)
    count_matchings(n, k, kind)  # validates
    if kind is Kind.PATH:
        starts = _path_starts(n, k, rng)
    else:
        s = int(rng.integers(0, n))
        starts = sorted((s + v) % n for v in _path_starts(n, k, rng))
    return tuple((i, (i + 1) % n) for i in starts)


def is_matching(edges, topo: Topology) -> bool:
    """True when ``edges`` are distinct edges of ``topo`` with no shared vertex."""
    seen: set[int] = set()
    for edge in edges:
        try:
            topo.edge_index(edge)
        except UsageError:
            return False
        i, j = edge
        if i in seen or j in seen:
            return False
        seen.update((i, j))
    return True

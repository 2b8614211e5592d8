"""Integer partitions: enumeration, conjugation, z-constants and dominance.

Partitions are plain tuples of positive integers in nonincreasing order.
The empty tuple is the unique partition of 0.
"""

from __future__ import annotations

from collections import Counter
from functools import lru_cache
from itertools import accumulate, zip_longest
from math import factorial, prod
from typing import Iterable, Iterator, Sequence

Partition = tuple[int, ...]

__all__ = [
    "Partition",
    "as_partition",
    "parse_partition",
    "format_partition",
    "enumerate_partitions",
    "partition_count",
    "conjugate",
    "multiplicities",
    "z_of",
    "cells",
    "dominance_leq",
    "dominates",
]


def as_partition(parts: Iterable[int]) -> Partition:
    """Validate ``parts`` and return it as a canonical tuple.

    Zeros are not allowed; parts must already be nonincreasing.
    """
    lam = tuple(int(p) for p in parts)
    if any(p <= 0 for p in lam):
        raise ValueError(f"partition parts must be positive: {lam}")
    if any(a < b for a, b in zip(lam, lam[1:])):
        raise ValueError(f"partition parts must be nonincreasing: {lam}")
    return lam


def parse_partition(text: str) -> Partition:
    """Parse the comma-separated form, e.g. ``"2,1,1"``; ``""`` is empty."""
    text = text.strip()
    if not text:
        return ()
    try:
        parts = [int(tok) for tok in text.split(",")]
    except ValueError:
        raise ValueError(f"cannot parse partition {text!r}") from None
    return as_partition(parts)


def format_partition(lam: Sequence[int]) -> str:
    return ",".join(str(p) for p in lam)


def _partitions_bounded(k: int, largest: int) -> Iterator[Partition]:
    # reverse lexicographic: larger first parts come first
    if k == 0:
        yield ()
        return
    for first in range(min(k, largest), 0, -1):
        for rest in _partitions_bounded(k - first, first):
            yield (first,) + rest


@lru_cache(maxsize=None)
def _enumerate(k: int) -> tuple[Partition, ...]:
    return tuple(_partitions_bounded(k, k))


def enumerate_partitions(k: int) -> list[Partition]:
    """All partitions of ``k`` in reverse lexicographic order.

    Reverse lexicographic order is a linear extension of dominance with the
    largest partition ``(k,)`` first and ``(1,)*k`` last.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    return list(_enumerate(k))


@lru_cache(maxsize=None)
def partition_count(k: int) -> int:
    """Number of partitions of ``k`` via Euler's pentagonal recurrence."""
    if k < 0:
        return 0
    if k == 0:
        return 1
    total = 0
    j = 1
    while True:
        g1 = j * (3 * j - 1) // 2
        if g1 > k:
            break
        sign = 1 if j % 2 else -1
        total += sign * partition_count(k - g1)
        g2 = j * (3 * j + 1) // 2
        if g2 <= k:
            total += sign * partition_count(k - g2)
        j += 1
    return total


def conjugate(lam: Sequence[int]) -> Partition:
    if not lam:
        return ()
    return tuple(sum(1 for p in lam if p >= j) for j in range(1, lam[0] + 1))


def multiplicities(lam: Sequence[int]) -> dict[int, int]:
    """Map each part size ``i`` to ``m_i(lam)``."""
    return dict(Counter(lam))


def z_of(lam: Sequence[int]) -> int:
    """Centralizer order ``prod_i i**m_i * m_i!``; 1 for the empty partition."""
    return prod(i**m * factorial(m) for i, m in Counter(lam).items())


def cells(lam: Sequence[int]) -> Iterator[tuple[int, int]]:
    """Yield the 1-based (row, col) cells of the Young diagram of ``lam``."""
    for i, row in enumerate(lam, start=1):
        for j in range(1, row + 1):
            yield i, j


def _prefix_sums(lam: Sequence[int], length: int) -> list[int]:
    padded = [p for p, _ in zip_longest(lam, range(length), fillvalue=0)]
    return list(accumulate(padded))


def dominance_leq(mu: Sequence[int], nu: Sequence[int]) -> bool | None:
    """Compare two partitions of equal weight in dominance order.

    Returns ``True`` when ``mu <= nu`` (including equality), ``False`` when
    ``nu < mu`` strictly, and ``None`` when the two are incomparable.
    Raises ``ValueError`` on a weight mismatch.
    """
    if sum(mu) != sum(nu):
        raise ValueError(f"dominance needs equal weights: {tuple(mu)} vs {tuple(nu)}")
    length = max(len(mu), len(nu))
    a = _prefix_sums(mu, length)
    b = _prefix_sums(nu, length)
    if all(x <= y for x, y in zip(a, b)):
        return True
    if all(x >= y for x, y in zip(a, b)):
        return False
    return None


def dominates(nu: Sequence[int], mu: Sequence[int]) -> bool:
    """``True`` iff ``mu <= nu`` in dominance order."""
    return dominance_leq(mu, nu) is True

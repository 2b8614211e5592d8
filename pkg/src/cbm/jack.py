"""Jack polynomials J_lambda^(alpha) in the power-sum basis, exactly.

The coefficients theta[lam][rho] satisfy

    J_lam = sum_rho theta[lam][rho] * p_rho

with the J-normalization (coefficient of p_1^k equal to 1).  Tables are
built by Gram-Schmidt on the monomial basis, taken in increasing
dominance order, under the power-sum scalar product
<p_lam, p_mu> = delta * z_lam * alpha**len(lam).  The scalar product is
diagonal in the power-sum basis, so the whole computation runs in
power-sum coordinates.

Completed tables are immutable and kept in a process-wide cache, which is
mirrored on disk as one JSON file per (k, alpha).
"""

from __future__ import annotations

import json
import logging
import os
import tempfile
import threading
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import prod
from pathlib import Path
from typing import NamedTuple, Sequence

from .errors import CacheError, CapacityError, DomainError
from .partitions import (
    Partition,
    conjugate,
    dominance_leq,
    enumerate_partitions,
    format_partition,
    parse_partition,
    z_of,
)
from .rational import format_rational, to_rational

__all__ = [
    "DEFAULT_KMAX",
    "JackTable",
    "Defect",
    "kmax",
    "c_lambda",
    "build_jack_table",
    "theta",
    "big_theta",
    "verify_orthogonality",
    "table_to_json",
    "table_from_json",
    "cache_dir",
    "clear_memory_cache",
]

log = logging.getLogger(__name__)

DEFAULT_KMAX = 12


def kmax() -> int:
    """Configured largest weight; ``CBM_KMAX`` overrides the default of 12."""
    raw = os.environ.get("CBM_KMAX")
    return int(raw) if raw else DEFAULT_KMAX


def _check_alpha(alpha) -> Fraction:
    a = to_rational(alpha)
    if a <= 0:
        raise DomainError(f"alpha must be positive, got {a}")
    return a


def c_lambda(lam: Sequence[int], alpha) -> Fraction:
    """Squared norm <J_lam, J_lam>: a product of two hook factors per cell."""
    a = _check_alpha(alpha)
    lam_c = conjugate(lam)
    out = Fraction(1)
    for i, row in enumerate(lam, start=1):
        for j in range(1, row + 1):
            arm = row - j
            leg = lam_c[j - 1] - i
            out *= (a * arm + leg + 1) * (a * arm + leg + a)
    return out


@dataclass(frozen=True)
class JackTable:
    """Exact power-sum coefficients of every J_lam with |lam| = weight.

    ``theta[i][j]`` is the coefficient of ``p_{order[j]}`` in
    ``J_{order[i]}``; ``c_norm[i]`` is ``C_{order[i]}(alpha)``.
    """

    weight: int
    alpha: Fraction
    order: tuple[Partition, ...]
    theta: tuple[tuple[Fraction, ...], ...]
    c_norm: tuple[Fraction, ...]

    def index(self, lam: Sequence[int]) -> int:
        return self._index_map()[tuple(lam)]

    def _index_map(self) -> dict[Partition, int]:
        cached = self.__dict__.get("_idx")
        if cached is None:
            cached = {p: i for i, p in enumerate(self.order)}
            object.__setattr__(self, "_idx", cached)
        return cached

    def entry(self, lam: Sequence[int], rho: Sequence[int]) -> Fraction:
        return self.theta[self.index(lam)][self.index(rho)]

    def norm(self, lam: Sequence[int]) -> Fraction:
        return self.c_norm[self.index(lam)]


# ---------------------------------------------------------------------------
# construction


@lru_cache(maxsize=None)
def _fill_count(rho: Partition, rem: tuple[int, ...]) -> int:
    # maps from the parts of rho onto rows with capacities rem, filling exactly
    if not rho:
        return 1
    first, rest = rho[0], rho[1:]
    total = 0
    for cap, mult in Counter(rem).items():
        if cap >= first:
            nxt = list(rem)
            nxt.remove(cap)
            nxt.append(cap - first)
            total += mult * _fill_count(rest, tuple(sorted(nxt, reverse=True)))
    return total


@lru_cache(maxsize=None)
def _monomials_in_power_sums(k: int) -> tuple[tuple[Fraction, ...], ...]:
    """Row ``lam`` holds the power-sum coordinates of m_lam (reverse-lex order).

    p_rho = sum_lam L[rho][lam] m_lam where L counts the ways to merge the
    parts of rho into the rows of lam; L is triangular in dominance, so it
    is inverted by forward substitution.
    """
    parts = enumerate_partitions(k)
    size = len(parts)
    trans = [[_fill_count(r, lam) for lam in parts] for r in parts]
    inv = [[Fraction(0)] * size for _ in range(size)]
    for c in range(size):
        x = [Fraction(0)] * size
        for i in range(size):
            s = Fraction(1 if i == c else 0)
            row = trans[i]
            for j in range(i):
                if row[j]:
                    s -= row[j] * x[j]
            x[i] = s / row[i]
        for i in range(size):
            inv[i][c] = x[i]
    return tuple(tuple(r) for r in inv)


def _is_dominance_extension(order: Sequence[Partition]) -> bool:
    # ascending order: no later element may be dominated strictly by an earlier one
    for i, lo in enumerate(order):
        for hi in order[i + 1 :]:
            if dominance_leq(lo, hi) is False:
                return False
    return True


def _gram_schmidt(k: int, alpha: Fraction, ascending: Sequence[Partition]):
    canon = enumerate_partitions(k)
    pos = {p: i for i, p in enumerate(canon)}
    m_in_p = _monomials_in_power_sums(k)
    weights = [z_of(r) * alpha ** len(r) for r in canon]
    size = len(canon)

    basis: list[tuple[list[Fraction], Fraction]] = []
    found: dict[Partition, list[Fraction]] = {}
    for lam in ascending:
        vec = list(m_in_p[pos[lam]])
        for prev, prev_norm in basis:
            ip = sum((vec[r] * prev[r] * weights[r] for r in range(size) if prev[r]), Fraction(0))
            if ip:
                coef = ip / prev_norm
                vec = [v - coef * w for v, w in zip(vec, prev)]
        norm = sum((v * v * w for v, w in zip(vec, weights) if v), Fraction(0))
        basis.append((vec, norm))
        found[lam] = vec

    ones = pos[(1,) * k]
    theta_rows = []
    for lam in canon:
        vec = found[lam]
        scale = vec[ones]
        theta_rows.append(tuple(v / scale for v in vec))
    return tuple(theta_rows)


def _compute_table(k: int, alpha: Fraction, gs_order: Sequence[Partition] | None) -> JackTable:
    canon = tuple(enumerate_partitions(k))
    if gs_order is None:
        ascending = canon[::-1]
    else:
        ascending = tuple(tuple(p) for p in gs_order)
        if sorted(ascending) != sorted(canon) or not _is_dominance_extension(ascending):
            raise ValueError("gs_order must list every partition of k in an order extending dominance")
    theta_rows = _gram_schmidt(k, alpha, ascending)
    c_norm = tuple(c_lambda(lam, alpha) for lam in canon)
    return JackTable(weight=k, alpha=alpha, order=canon, theta=theta_rows, c_norm=c_norm)


_tables: dict[tuple[int, str], JackTable] = {}
_key_locks: dict[tuple[int, str], threading.Lock] = {}
_registry_lock = threading.Lock()


def clear_memory_cache() -> None:
    with _registry_lock:
        _tables.clear()


def cache_dir() -> Path | None:
    """Directory for cached tables, or ``None`` when disk caching is off.

    ``CBM_CACHE_DIR`` selects the directory; setting it to an empty string
    disables the disk cache.
    """
    raw = os.environ.get("CBM_CACHE_DIR")
    if raw is None:
        return Path.home() / ".cache" / "cbm"
    return Path(raw) if raw else None


def _cache_path(directory: Path, k: int, alpha: Fraction) -> Path:
    return directory / f"jack_k{k}_a{alpha.numerator}_{alpha.denominator}.json"


def build_jack_table(
    k: int,
    alpha,
    *,
    gs_order: Sequence[Partition] | None = None,
    limit: int | None = None,
    use_cache: bool = True,
) -> JackTable:
    """Return the exact table of theta coefficients for weight ``k``.

    ``gs_order`` picks the linear extension of dominance (ascending) used by
    Gram-Schmidt; the result does not depend on it.  Tables built with a
    non-default order bypass the cache.
    """
    a = _check_alpha(alpha)
    cap = kmax() if limit is None else limit
    if k > cap:
        raise CapacityError(f"capacity exceeded: k={k} > K_max={cap}")
    if k < 1:
        raise DomainError("k must be a positive integer")
    if gs_order is not None or not use_cache:
        return _compute_table(k, a, gs_order)

    key = (k, format_rational(a))
    table = _tables.get(key)
    if table is not None:
        return table
    with _registry_lock:
        lock = _key_locks.setdefault(key, threading.Lock())
    with lock:
        table = _tables.get(key)
        if table is None:
            table = _load_or_compute(k, a)
            _tables[key] = table
    return table


def _load_or_compute(k: int, alpha: Fraction) -> JackTable:
    directory = cache_dir()
    if directory is not None:
        path = _cache_path(directory, k, alpha)
        if path.exists():
            try:
                table = table_from_json(json.loads(path.read_text()))
                if table.weight == k and table.alpha == alpha:
                    log.debug("loaded Jack table %s", path)
                    return table
                log.warning("cache file %s holds the wrong key; rebuilding", path)
            except (CacheError, ValueError, KeyError, TypeError) as exc:
                log.warning("ignoring invalid cache file %s: %s", path, exc)
    table = _compute_table(k, alpha, None)
    if directory is not None:
        try:
            _atomic_write(_cache_path(directory, k, alpha), json.dumps(table_to_json(table)))
        except OSError as exc:
            log.warning("could not write Jack cache: %s", exc)
    return table


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


# ---------------------------------------------------------------------------
# lookups


def theta(lam: Sequence[int], rho: Sequence[int], alpha) -> Fraction:
    """Coefficient of p_rho in J_lam."""
    lam, rho = tuple(lam), tuple(rho)
    if sum(lam) != sum(rho):
        raise DomainError(f"weight mismatch: |{lam}| != |{rho}|")
    if not lam:
        return Fraction(1)
    return build_jack_table(sum(lam), alpha).entry(lam, rho)


def big_theta(lam: Sequence[int], rho: Sequence[int], alpha) -> Fraction:
    """Coefficient of J_lam in p_rho: alpha^l(rho) z_rho theta / C_lam."""
    a = _check_alpha(alpha)
    th = theta(lam, rho, a)
    return a ** len(rho) * z_of(rho) * th / c_lambda(lam, a)


# ---------------------------------------------------------------------------
# validation


class Defect(NamedTuple):
    relation: str  # "rows" or "columns" of the theta table
    pair: tuple[Partition, Partition]
    lhs: Fraction
    rhs: Fraction


def _orthogonality_defects(table: JackTable) -> list[Defect]:
    parts = table.order
    a = table.alpha
    th = table.theta
    weights = [z_of(r) * a ** len(r) for r in parts]
    size = len(parts)
    out: list[Defect] = []
    for i in range(size):
        ti = th[i]
        for j in range(i, size):
            tj = th[j]
            lhs = sum((w * x * y for w, x, y in zip(weights, ti, tj)), Fraction(0))
            rhs = table.c_norm[i] if i == j else Fraction(0)
            if lhs != rhs:
                out.append(Defect("rows", (parts[i], parts[j]), lhs, rhs))
    inv_c = [1 / c for c in table.c_norm]
    for r in range(size):
        for s in range(r, size):
            lhs = sum((ic * row[r] * row[s] for ic, row in zip(inv_c, th)), Fraction(0))
            rhs = 1 / weights[r] if r == s else Fraction(0)
            if lhs != rhs:
                out.append(Defect("columns", (parts[r], parts[s]), lhs, rhs))
    return out


def verify_orthogonality(k: int, alpha) -> list[Defect]:
    """Evaluate both orthogonality relations exactly; empty list on success."""
    table = build_jack_table(k, alpha)
    return _orthogonality_defects(table)


def table_to_json(table: JackTable) -> dict:
    return {
        "k": table.weight,
        "alpha": format_rational(table.alpha),
        "order": [format_partition(p) for p in table.order],
        "theta": [[format_rational(x) for x in row] for row in table.theta],
        "c": [format_rational(c) for c in table.c_norm],
    }


def table_from_json(doc: dict) -> JackTable:
    """Rebuild a table from its JSON form, checking every invariant first."""
    k = int(doc["k"])
    alpha = _check_alpha(to_rational(doc["alpha"]))
    order = tuple(parse_partition(s) for s in doc["order"])
    if order != tuple(enumerate_partitions(k)):
        raise CacheError("partition order does not match the canonical order")
    theta_rows = tuple(tuple(to_rational(x) for x in row) for row in doc["theta"])
    c_norm = tuple(to_rational(x) for x in doc["c"])
    size = len(order)
    if len(theta_rows) != size or any(len(r) != size for r in theta_rows) or len(c_norm) != size:
        raise CacheError("table has the wrong shape")
    table = JackTable(weight=k, alpha=alpha, order=order, theta=theta_rows, c_norm=c_norm)
    ones = size - 1
    if any(row[ones] != 1 for row in theta_rows):
        raise CacheError("coefficient of p_1^k is not 1")
    for lam, c in zip(order, c_norm):
        if c <= 0 or c != c_lambda(lam, alpha):
            raise CacheError(f"bad norm for {lam}")
    defects = _orthogonality_defects(table)
    if defects:
        raise CacheError(f"{len(defects)} orthogonality defects, first {defects[0]}")
    return table


def power_sum_weight(rho: Sequence[int], alpha) -> Fraction:
    """<p_rho, p_rho>_alpha = z_rho * alpha**l(rho)."""
    return z_of(rho) * _check_alpha(alpha) ** len(rho)


def hook_product(lam: Sequence[int]) -> int:
    lam_c = conjugate(lam)
    return prod(lam[i - 1] - j + lam_c[j - 1] - i + 1 for i in range(1, len(lam) + 1) for j in range(1, lam[i - 1] + 1))

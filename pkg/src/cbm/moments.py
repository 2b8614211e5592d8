"""Exact moments E[p_mu(Z_n) conj(p_nu(Z_n))] for circular beta-ensembles.

Everything here is exact rational arithmetic on top of the Jack tables.
The ensemble is parametrized by ``alpha = 2/beta``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from math import prod
from typing import NamedTuple, Sequence

from .errors import CapacityError, DomainError
from .jack import build_jack_table, kmax
from .partitions import Partition, as_partition, cells, enumerate_partitions, z_of
from .rational import alpha_from_beta, format_rational, to_rational

__all__ = [
    "EnsembleParams",
    "Bounds",
    "MomentReport",
    "CrossBoundReport",
    "ClosedForms",
    "TailReport",
    "LimitReport",
    "CoeSecondMoment",
    "n_factor",
    "exact_moment",
    "ab_bounds",
    "gamma_bounds",
    "corollary_bound",
    "sandwich_check",
    "cross_moment_bound_check",
    "cue_expected",
    "closed_forms",
    "i_of",
    "tail_rate_check",
    "dirichlet_moment",
    "weingarten",
    "coe_trace_second_moment",
    "limit_check",
    "moment_report",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EnsembleParams:
    n: int
    alpha: Fraction

    def __post_init__(self):
        object.__setattr__(self, "alpha", to_rational(self.alpha))
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n}")
        if self.alpha <= 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")

    @classmethod
    def from_beta(cls, n: int, beta) -> "EnsembleParams":
        return cls(n, alpha_from_beta(beta))

    @property
    def beta(self) -> Fraction:
        return 2 / self.alpha

    def with_n(self, n: int) -> "EnsembleParams":
        return EnsembleParams(n, self.alpha)


def n_factor(lam: Sequence[int], p: EnsembleParams) -> Fraction:
    """Finite-n correction prod over cells of (n+(j-1)a-(i-1)) / (n+ja-i)."""
    if len(lam) > p.n:
        raise DomainError(f"l({tuple(lam)}) > n={p.n}")
    n, a = p.n, p.alpha
    out = Fraction(1)
    for i, j in cells(lam):
        out *= (n + (j - 1) * a - (i - 1)) / (n + j * a - i)
    return out


def exact_moment(mu: Sequence[int], nu: Sequence[int], p: EnsembleParams) -> Fraction:
    """E[p_mu(Z_n) conj(p_nu(Z_n))] as an exact rational.

    Zero when the weights differ, one when both partitions are empty,
    otherwise the finite sum over lam |- K with l(lam) <= n of
    theta_mu theta_nu N_lam(n) / C_lam, scaled by a^(l+l') z_mu z_nu.
    """
    mu, nu = as_partition(mu), as_partition(nu)
    k = sum(mu)
    if k != sum(nu):
        return Fraction(0)
    if k == 0:
        return Fraction(1)
    table = build_jack_table(k, p.alpha)
    i_mu, i_nu = table.index(mu), table.index(nu)
    total = Fraction(0)
    for row, lam, c in zip(table.theta, table.order, table.c_norm):
        if len(lam) > p.n:
            continue
        t_mu, t_nu = row[i_mu], row[i_nu]
        if t_mu and t_nu:
            total += t_mu * t_nu / c * n_factor(lam, p)
    a = p.alpha
    return a ** (len(mu) + len(nu)) * z_of(mu) * z_of(nu) * total


class ABBounds(NamedTuple):
    A: Fraction
    B: Fraction


def ab_bounds(K: int, p: EnsembleParams) -> ABBounds:
    """Constants A <= 1 <= B bracketing the normalized second moment."""
    n, a = p.n, p.alpha
    denom = n - K + a
    if denom <= 0:
        raise DomainError(f"n - K + alpha = {denom} must be positive")
    if n < K:
        log.warning("ab_bounds: n=%d < K=%d, the bracketing is not guaranteed", n, K)
    gap = abs(a - 1) / denom
    A = (1 - gap) ** K if a >= 1 else Fraction(1)
    B = (1 + gap) ** K if a < 1 else Fraction(1)
    return ABBounds(A, B)


class GammaBounds(NamedTuple):
    Gamma: Fraction
    gamma: Fraction


def gamma_bounds(K: int, p: EnsembleParams) -> GammaBounds:
    """Max and min of n_factor over lam |- K with l(lam) <= n."""
    if K < 1:
        raise DomainError("K must be positive")
    cap = kmax()
    if K > cap:
        raise CapacityError(f"capacity exceeded: K={K} > K_max={cap}")
    vals = [n_factor(lam, p) for lam in enumerate_partitions(K) if len(lam) <= p.n]
    return GammaBounds(max(vals), min(vals))


def corollary_bound(K: int, p: EnsembleParams) -> Fraction:
    """6|1 - alpha| K / n, valid once n >= 2K."""
    if p.n < 2 * K:
        raise DomainError(f"corollary bound needs n >= 2K (n={p.n}, K={K})")
    return 6 * abs(1 - p.alpha) * K / p.n


@dataclass(frozen=True)
class Bounds:
    A: Fraction
    B: Fraction
    Gamma: Fraction
    gamma: Fraction
    corollary: Fraction | None

    def to_json(self) -> dict:
        return {
            "A": format_rational(self.A),
            "B": format_rational(self.B),
            "Gamma": format_rational(self.Gamma),
            "gamma": format_rational(self.gamma),
            "corollary": None if self.corollary is None else format_rational(self.corollary),
        }


def bounds_for(K: int, p: EnsembleParams) -> Bounds:
    A, B = ab_bounds(K, p)
    Gamma, gamma = gamma_bounds(K, p)
    cor = corollary_bound(K, p) if p.n >= 2 * K else None
    return Bounds(A, B, Gamma, gamma, cor)


@dataclass(frozen=True)
class MomentReport:
    mu: Partition
    nu: Partition
    params: EnsembleParams
    value: Fraction
    normalized: Fraction | None = None
    bounds: Bounds | None = None

    @property
    def holds(self) -> bool:
        """Sandwich A <= gamma <= normalized <= Gamma <= B (and the corollary)."""
        b = self.bounds
        if b is None or self.normalized is None:
            return True
        ok = b.A <= b.gamma <= self.normalized <= b.Gamma <= b.B
        if b.corollary is not None:
            ok = ok and abs(self.normalized - 1) <= b.corollary
        return ok

    def to_json(self) -> dict:
        return {
            "mu": list(self.mu),
            "nu": list(self.nu),
            "n": self.params.n,
            "alpha": format_rational(self.params.alpha),
            "beta": format_rational(self.params.beta),
            "value": format_rational(self.value),
            "value_float": float(self.value),
            "bounds": None if self.bounds is None else self.bounds.to_json(),
        }


def moment_report(mu: Sequence[int], nu: Sequence[int], p: EnsembleParams) -> MomentReport:
    """Moment plus whatever bound diagnostics apply at this (mu, nu, n)."""
    mu, nu = as_partition(mu), as_partition(nu)
    value = exact_moment(mu, nu, p)
    K = max(sum(mu), sum(nu))
    bounds = bounds_for(K, p) if 1 <= K <= p.n else None
    normalized = None
    if mu == nu:
        normalized = value / (p.alpha ** len(mu) * z_of(mu))
    return MomentReport(mu, nu, p, value, normalized, bounds)


def sandwich_check(mu: Sequence[int], p: EnsembleParams) -> MomentReport:
    mu = as_partition(mu)
    K = sum(mu)
    if K < 1 or p.n < K:
        raise DomainError(f"sandwich needs n >= |mu| >= 1 (n={p.n}, |mu|={K})")
    return moment_report(mu, mu, p)


@dataclass(frozen=True)
class CrossBoundReport:
    value: Fraction
    lhs: Fraction  # |E|^2
    rhs: Fraction  # max(|A-1|,|B-1|)^2 a^(l+l') z_mu z_nu
    corollary_rhs: Fraction | None

    @property
    def holds(self) -> bool:
        ok = self.lhs <= self.rhs
        if self.corollary_rhs is not None:
            ok = ok and self.lhs <= self.corollary_rhs
        return ok


def cross_moment_bound_check(mu: Sequence[int], nu: Sequence[int], p: EnsembleParams) -> CrossBoundReport:
    """Squared form of the off-diagonal bound, plus the n >= 2K variant."""
    mu, nu = as_partition(mu), as_partition(nu)
    if mu == nu:
        raise ValueError("cross-moment bound is for mu != nu")
    K = max(sum(mu), sum(nu))
    if p.n < K:
        raise DomainError(f"cross-moment bound needs n >= K (n={p.n}, K={K})")
    value = exact_moment(mu, nu, p)
    scale = p.alpha ** (len(mu) + len(nu)) * z_of(mu) * z_of(nu)
    A, B = ab_bounds(K, p)
    dev = max(abs(A - 1), abs(B - 1))
    cor = corollary_bound(K, p) ** 2 * scale if p.n >= 2 * K else None
    return CrossBoundReport(value, value * value, dev * dev * scale, cor)


def cue_expected(mu: Sequence[int], nu: Sequence[int], n: int) -> Fraction | None:
    """Haar-unitary reference value, or ``None`` outside the covered cases."""
    mu, nu = as_partition(mu), as_partition(nu)
    if len(mu) == 1 and len(nu) == 1:
        return Fraction(min(mu[0], n)) if mu == nu else Fraction(0)
    if n >= max(sum(mu), sum(nu)):
        return Fraction(z_of(mu)) if mu == nu else Fraction(0)
    return None


class ClosedForms(NamedTuple):
    p1_sq: Fraction  # E|p_1|^2
    p1_fourth: Fraction  # E|p_1|^4
    p2_sq: Fraction  # E|p_2|^2
    p2_p1sq: Fraction  # E[p_2 conj(p_1^2)]


def closed_forms(p: EnsembleParams) -> ClosedForms:
    if p.n < 2:
        raise DomainError("closed forms need n >= 2")
    n, a = p.n, p.alpha
    d1, d2, d3 = n + a - 1, n + a - 2, n + 2 * a - 1
    return ClosedForms(
        a * n / d1,
        2 * n * a**2 * (n * n + 2 * (a - 1) * n - a) / (d1 * d2 * d3),
        2 * a * n * (n * n + 2 * (a - 1) * n + a * a - 3 * a + 1) / (d1 * d3 * d2),
        2 * a**2 * (a - 1) * n / (d1 * d3 * d2),
    )


def closed_form_partitions() -> tuple[tuple[Partition, Partition], ...]:
    """(mu, nu) pairs matching the fields of :class:`ClosedForms`."""
    return (((1,), (1,)), ((1, 1), (1, 1)), ((2,), (2,)), ((2,), (1, 1)))


def i_of(m: int, p: EnsembleParams) -> Fraction:
    """E[cos(m(theta_1 - theta_2))] from E|p_m|^2 = n + n(n-1) I."""
    if p.n < 2:
        raise DomainError("I(m, n) needs n >= 2")
    return (exact_moment((m,), (m,), p) - p.n) / (p.n * (p.n - 1))


@dataclass(frozen=True)
class TailReport:
    ms: tuple[int, ...]
    d: tuple[Fraction, ...]
    scaled: tuple  # d_m * m^min(1, beta); Fractions when beta >= 1
    fitted_constant: float
    nonincreasing: bool
    bounded: bool


def tail_rate_check(p: EnsembleParams, m_range: range | Sequence[int]) -> TailReport:
    """Decay of d_m = |E|p_m|^2 - n| over ``m_range``.

    ``bounded`` asks whether every scaled value stays within twice the
    first one; the constant in the decay rate is fitted, not asserted.
    """
    if p.n < 2:
        raise DomainError("tail check needs n >= 2")
    ms = tuple(m_range)
    d = tuple(abs(exact_moment((m,), (m,), p) - p.n) for m in ms)
    beta = p.beta
    if beta >= 1:
        scaled = tuple(dm * m for dm, m in zip(d, ms))
    else:
        scaled = tuple(float(dm) * m ** float(beta) for dm, m in zip(d, ms))
    nonincreasing = all(x >= y for x, y in zip(d, d[1:]))
    bounded = all(s <= 2 * scaled[0] for s in scaled) if scaled else True
    fitted = float(max(scaled)) if scaled else 0.0
    return TailReport(ms, d, scaled, fitted, nonincreasing, bounded)


def _double_factorial_odd(a: int) -> int:
    # (2a-1)!! with (-1)!! = 1
    return prod(range(1, 2 * a, 2))


def dirichlet_moment(a: Sequence[int], n_vars: int) -> Fraction:
    """E[xi_1^a_1 ... xi_n^a_n] for xi_i = X_i^2 / sum X_j^2 with X_j iid N(0,1)."""
    a = [int(x) for x in a]
    if any(x < 0 for x in a):
        raise DomainError("exponents must be nonnegative")
    if len(a) > n_vars:
        raise DomainError("more exponents than variables")
    total = sum(a)
    num = prod(_double_factorial_odd(x) for x in a)
    den = prod(n_vars + 2 * i - 2 for i in range(1, total + 1))
    return Fraction(num, den)


def _cycle_count(perm: Sequence[int]) -> int:
    seen = [False] * len(perm)
    count = 0
    for start in range(len(perm)):
        if not seen[start]:
            count += 1
            j = start
            while not seen[j]:
                seen[j] = True
                j = perm[j]
    return count


def _solve(matrix: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    size = len(matrix)
    aug = [row[:] + [b] for row, b in zip(matrix, rhs)]
    for col in range(size):
        piv = next((r for r in range(col, size) if aug[r][col] != 0), None)
        if piv is None:
            raise DomainError("singular Gram matrix")
        aug[col], aug[piv] = aug[piv], aug[col]
        for r in range(size):
            if r != col and aug[r][col]:
                f = aug[r][col] / aug[col][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [aug[i][size] / aug[i][i] for i in range(size)]


def weingarten(k: int, n: int) -> dict[tuple[int, ...], Fraction]:
    """Unitary Weingarten function on S_k, by inverting the Gram matrix.

    G(s, t) = n^{#cycles(s^-1 t)}; Wg is the class function with
    sum_t G(s, t) Wg(t) = delta(s, id).  Requires n >= k.
    """
    if n < k:
        raise DomainError("Weingarten Gram matrix is singular for n < k")
    perms = list(permutations(range(k)))

    def compose_inv(s, t):
        inv = [0] * k
        for i, si in enumerate(s):
            inv[si] = i
        return tuple(inv[t[i]] for i in range(k))

    gram = [[Fraction(n) ** _cycle_count(compose_inv(s, t)) for t in perms] for s in perms]
    ident = tuple(range(k))
    rhs = [Fraction(1 if s == ident else 0) for s in perms]
    sol = _solve(gram, rhs)
    return dict(zip(perms, sol))


class CoeSecondMoment(NamedTuple):
    via_dirichlet: Fraction
    via_weingarten: Fraction
    via_jack: Fraction

    @property
    def agree(self) -> bool:
        return self.via_dirichlet == self.via_weingarten == self.via_jack


def coe_trace_second_moment(n: int) -> CoeSecondMoment:
    """E|Tr W|^2 for a COE matrix W = U^T U, computed three independent ways."""
    if n < 2:
        raise DomainError("needs n >= 2")
    # |u_11|^2 ~ xi_1 + xi_2 among 2n squared normals
    u11_fourth = 2 * dirichlet_moment([2], 2 * n) + 2 * dirichlet_moment([1, 1], 2 * n)
    wg = weingarten(2, n)
    via_wg = 2 * n * n * (wg[(0, 1)] + wg[(1, 0)])
    via_jack = exact_moment((1,), (1,), EnsembleParams(n, Fraction(2)))
    return CoeSecondMoment(n * n * u11_fourth, via_wg, via_jack)


@dataclass(frozen=True)
class LimitReport:
    ns: tuple[int, ...]
    limit: Fraction
    values: tuple[Fraction, ...]
    deviations: tuple[Fraction, ...]
    rate_limit: Fraction  # 2 a^2 (a - 1), the n^2-scaled limit of E[p_2 conj(p_1^2)]
    rate_scaled: tuple[Fraction, ...] = field(default=())

    @property
    def eventually_decreasing(self) -> bool:
        # nonincreasing over the second half of the schedule
        tail = self.deviations[len(self.deviations) // 2 :]
        return all(x >= y for x, y in zip(tail, tail[1:]))

    def below(self, tol: Fraction) -> bool:
        return bool(self.deviations) and self.deviations[-1] <= tol


def limit_check(mu: Sequence[int], nu: Sequence[int], alpha, n_schedule: Sequence[int]) -> LimitReport:
    mu, nu = as_partition(mu), as_partition(nu)
    a = to_rational(alpha)
    ns = tuple(n_schedule)
    limit = a ** len(mu) * z_of(mu) if mu == nu else Fraction(0)
    values = tuple(exact_moment(mu, nu, EnsembleParams(n, a)) for n in ns)
    devs = tuple(abs(v - limit) for v in values)
    rate = tuple(exact_moment((2,), (1, 1), EnsembleParams(n, a)) * n * n for n in ns if n >= 2)
    return LimitReport(ns, limit, values, devs, 2 * a * a * (a - 1), rate)

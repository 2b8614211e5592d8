"""Invariant suites behind ``cbm verify``.

Each suite returns a :class:`SuiteResult`; failures carry enough of the
offending case to be replayed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator

from .jack import kmax as configured_kmax
from .jack import verify_orthogonality
from .moments import (
    EnsembleParams,
    closed_form_partitions,
    closed_forms,
    coe_trace_second_moment,
    corollary_bound,
    cross_moment_bound_check,
    cue_expected,
    exact_moment,
    sandwich_check,
)
from .partitions import Partition, enumerate_partitions, format_partition
from .rational import format_rational

ORTHOGONALITY_ALPHAS = (Fraction(1, 2), Fraction(1), Fraction(2), Fraction(5, 3), Fraction(7))
SANDWICH_ALPHAS = tuple(Fraction(p, q) for p in range(1, 9) for q in range(1, 5))


@dataclass
class SuiteResult:
    name: str
    passed: int = 0
    failures: list[dict] = field(default_factory=list)

    @property
    def failed(self) -> int:
        return len(self.failures)

    @property
    def ok(self) -> bool:
        return not self.failures

    def record(self, ok: bool, case: Callable[[], dict]) -> None:
        if ok:
            self.passed += 1
        else:
            self.failures.append(case())


def orthogonality_suite(kmax: int = 8, alphas=ORTHOGONALITY_ALPHAS) -> SuiteResult:
    res = SuiteResult("orthogonality")
    for k in range(1, kmax + 1):
        for a in alphas:
            defects = verify_orthogonality(k, a)
            res.record(
                not defects,
                lambda: {
                    "k": k,
                    "alpha": format_rational(a),
                    "defects": [
                        {
                            "relation": d.relation,
                            "pair": [format_partition(p) for p in d.pair],
                            "lhs": format_rational(d.lhs),
                            "rhs": format_rational(d.rhs),
                        }
                        for d in defects[:5]
                    ],
                },
            )
    return res


def _partitions_up_to(k: int) -> list[Partition]:
    return [lam for w in range(k + 1) for lam in enumerate_partitions(w)]


def diaconis_evans_suite(max_weight: int = 6, single_row_max: int | None = None) -> SuiteResult:
    """beta = 2: E = delta z_mu for n >= max weight, and min(m, n) for p_m."""
    res = SuiteResult("diaconis-evans")
    cue = EnsembleParams(1, 1)
    parts = _partitions_up_to(max_weight)
    for mu in parts:
        for nu in parts:
            K = max(sum(mu), sum(nu))
            for n in range(max(K, 1), K + 3):
                p = cue.with_n(n)
                got = exact_moment(mu, nu, p)
                want = cue_expected(mu, nu, n)
                res.record(got == want, lambda: _case(mu, nu, p, got, want))
    top = configured_kmax() if single_row_max is None else single_row_max
    for m in range(1, top + 1):
        for n in range(2, 13):
            p = cue.with_n(n)
            got = exact_moment((m,), (m,), p)
            res.record(got == min(m, n), lambda: _case((m,), (m,), p, got, Fraction(min(m, n))))
    return res


def _case(mu, nu, p: EnsembleParams, got, want=None) -> dict:
    out = {
        "mu": list(mu),
        "nu": list(nu),
        "n": p.n,
        "alpha": format_rational(p.alpha),
        "value": format_rational(got),
    }
    if want is not None:
        out["expected"] = format_rational(want)
    return out


@dataclass(frozen=True)
class RandomCase:
    mu: Partition
    nu: Partition
    params: EnsembleParams

    @property
    def K(self) -> int:
        return max(sum(self.mu), sum(self.nu))


def random_cases(seed: int = 0, count: int = 200, max_weight: int = 6) -> Iterator[RandomCase]:
    """Seeded (mu, nu, n, alpha) cases with 1 <= weights <= max_weight, n >= K.

    Half the cases pair partitions of equal weight so that the off-diagonal
    bound is exercised on nonzero moments.
    """
    rng = random.Random(seed)
    by_weight = {w: enumerate_partitions(w) for w in range(1, max_weight + 1)}
    for i in range(count):
        w1 = rng.randint(1, max_weight)
        w2 = w1 if i % 2 == 0 else rng.randint(1, max_weight)
        mu = rng.choice(by_weight[w1])
        nu = rng.choice(by_weight[w2])
        K = max(w1, w2)
        n = rng.randint(K, 4 * K + 2)
        alpha = rng.choice(SANDWICH_ALPHAS)
        yield RandomCase(mu, nu, EnsembleParams(n, alpha))


def sandwich_suite(seed: int = 0, count: int = 200) -> SuiteResult:
    """A <= gamma <= normalized <= Gamma <= B and the squared cross bound."""
    res = SuiteResult("sandwich")
    for case in random_cases(seed, count):
        p = case.params
        for lam in {case.mu, case.nu}:
            rep = sandwich_check(lam, p)
            b = rep.bounds
            ok = b.A <= b.gamma <= rep.normalized <= b.Gamma <= b.B
            res.record(ok, lambda: {**_case(lam, lam, p, rep.value), **b.to_json()})
        if case.mu != case.nu:
            cr = cross_moment_bound_check(case.mu, case.nu, p)
            res.record(
                cr.lhs <= cr.rhs,
                lambda: {**_case(case.mu, case.nu, p, cr.value), "lhs": format_rational(cr.lhs), "rhs": format_rational(cr.rhs)},
            )
    return res


def corollary_suite(seed: int = 0, count: int = 200) -> SuiteResult:
    """The 6|1-alpha|K/n bounds on the random cases with n >= 2K."""
    res = SuiteResult("corollary")
    for case in random_cases(seed, count):
        p = case.params
        if p.n < 2 * case.K:
            continue
        for lam in {case.mu, case.nu}:
            rep = sandwich_check(lam, p)
            bound = corollary_bound(sum(lam), p)
            res.record(
                abs(rep.normalized - 1) <= bound,
                lambda: {**_case(lam, lam, p, rep.value), "bound": format_rational(bound)},
            )
        if case.mu != case.nu:
            cr = cross_moment_bound_check(case.mu, case.nu, p)
            res.record(
                cr.lhs <= cr.corollary_rhs,
                lambda: {
                    **_case(case.mu, case.nu, p, cr.value),
                    "lhs": format_rational(cr.lhs),
                    "rhs": format_rational(cr.corollary_rhs),
                },
            )
    return res


def appendix_suite(n_range: range = range(2, 51), betas=(1, 2, 4, Fraction(2, 3), 5)) -> SuiteResult:
    """Closed-form moments and the three-way COE trace identity."""
    res = SuiteResult("appendix")
    for beta in betas:
        for n in n_range:
            p = EnsembleParams.from_beta(n, beta)
            forms = closed_forms(p)
            for want, (mu, nu) in zip(forms, closed_form_partitions()):
                got = exact_moment(mu, nu, p)
                res.record(got == want, lambda: _case(mu, nu, p, got, want))
    for n in n_range:
        trio = coe_trace_second_moment(n)
        ok = trio.agree and trio.via_jack == Fraction(2 * n, n + 1)
        res.record(ok, lambda: {"n": n, **{k: format_rational(v) for k, v in trio._asdict().items()}})
    return res


SUITES = ("orthogonality", "diaconis-evans", "sandwich", "corollary", "appendix")


def run_suite(name: str, *, kmax: int | None = None, seed: int = 0) -> list[SuiteResult]:
    if name == "all":
        return [r for s in SUITES for r in run_suite(s, kmax=kmax, seed=seed)]
    if name == "orthogonality":
        return [orthogonality_suite(8 if kmax is None else kmax)]
    if name == "diaconis-evans":
        return [diaconis_evans_suite(single_row_max=kmax)]
    if name == "sandwich":
        return [sandwich_suite(seed)]
    if name == "corollary":
        return [corollary_suite(seed)]
    if name == "appendix":
        return [appendix_suite()]
    raise ValueError(f"unknown suite {name!r}")

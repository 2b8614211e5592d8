"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

import subprocess
import sys
import time
from fractions import Fraction

import pytest

from cbm.moments import (
    EnsembleParams,
    closed_form_partitions,
    closed_forms,
    coe_trace_second_moment,
    exact_moment,
    limit_check,
    tail_rate_check,
)
from cbm.partitions import z_of
from cbm.sampler import default_config, estimate_moment, run_chain
from cbm.verify import corollary_suite, diaconis_evans_suite, orthogonality_suite, sandwich_suite

F = Fraction


class Criterion:
    def __init__(self, log, number, title, budget=None):
        self.log, self.number, self.title, self.budget = log, number, title, budget

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def finish(self, ok, detail=""):
        elapsed = time.perf_counter() - self.start
        in_time = self.budget is None or elapsed < self.budget
        status = "PASS" if ok and in_time else "FAIL"
        budget = "" if self.budget is None else f" / {self.budget:g}s"
        line = f"{status} criterion {self.number}: {self.title} [{detail}] ({elapsed:.1f}s{budget})"
        self.log.append(line)
        print(line)
        assert ok, line
        assert in_time, line

    def __exit__(self, *exc):
        return False


@pytest.fixture
def cold_tables(fresh_cache):
    """Runtime budgets below include building every Jack table from scratch."""
    return fresh_cache


def test_criterion_1_closed_forms(acceptance_log, cold_tables):
    with Criterion(acceptance_log, 1, "closed forms exact, beta in {1,2,4}, n in [2,50]", 5) as c:
        bad = []
        for beta in (1, 2, 4):
            for n in range(2, 51):
                p = EnsembleParams.from_beta(n, beta)
                for want, (mu, nu) in zip(closed_forms(p), closed_form_partitions()):
                    if exact_moment(mu, nu, p) != want:
                        bad.append((beta, n, mu, nu))
        sample = closed_forms(EnsembleParams.from_beta(3, 1)) == (F(3, 2), F(13, 3), F(7, 3), F(1, 3))
        c.finish(not bad and sample, f"{3 * 49 * 4 - len(bad)}/{3 * 49 * 4} equal")


def test_criterion_2_diaconis_evans(acceptance_log, cold_tables):
    with Criterion(acceptance_log, 2, "beta=2 recovers delta z_mu and min(m, n)", 60) as c:
        res = diaconis_evans_suite(max_weight=6, single_row_max=12)
        c.finish(res.ok, f"{res.passed} passed, {res.failed} failed")


def test_criterion_3_orthogonality(acceptance_log, cold_tables):
    with Criterion(acceptance_log, 3, "both orthogonality relations, k <= 8, five alphas", 120) as c:
        res = orthogonality_suite(8)
        c.finish(res.ok, f"{res.passed} (k, alpha) pairs clean, {res.failed} with defects")


def test_criterion_4_sandwich(acceptance_log):
    with Criterion(acceptance_log, 4, "sandwich and squared cross bound, 200 random cases") as c:
        res = sandwich_suite(seed=0, count=200)
        c.finish(res.ok, f"{res.passed} checks, {res.failed} violations")


def test_criterion_5_corollary(acceptance_log):
    with Criterion(acceptance_log, 5, "6|1-alpha|K/n bounds on cases with n >= 2K") as c:
        res = corollary_suite(seed=0, count=200)
        c.finish(res.ok and res.passed > 0, f"{res.passed} checks, {res.failed} violations")


def test_criterion_6_large_n_limit(acceptance_log):
    with Criterion(acceptance_log, 6, "n=1000 limit and n^-2 cross rate within 1%", 10) as c:
        details, ok = [], True
        for beta in (1, 4):
            a = F(2, beta)
            rep = limit_check((2, 1), (2, 1), a, [10, 100, 1000])
            limit = a**2 * z_of((2, 1))
            ok &= rep.limit == limit and rep.deviations[-1] < limit / 100 and rep.eventually_decreasing
            cross = limit_check((2,), (1, 1), a, [1000])
            target = 2 * a * a * (a - 1)
            ok &= abs(cross.rate_scaled[-1] - target) <= abs(target) / 100
            details.append(
                f"beta={beta}: rel dev {float(rep.deviations[-1] / limit):.2e}, "
                f"rate {float(cross.rate_scaled[-1]):.4f} vs {float(target):g}"
            )
        c.finish(ok, "; ".join(details))


def test_criterion_7_tail_rate(acceptance_log):
    with Criterion(acceptance_log, 7, "n=2 tail d_m nonincreasing and m-scaled bounded", 60) as c:
        details, ok = [], True
        for beta in (1, 2, 4):
            rep = tail_rate_check(EnsembleParams.from_beta(2, beta), range(2, 13))
            ok &= rep.nonincreasing and rep.bounded
            details.append(f"beta={beta}: C~{rep.fitted_constant:.3g}")
        c.finish(ok, ", ".join(details))


def test_criterion_8_coe_three_ways(acceptance_log):
    with Criterion(acceptance_log, 8, "COE E|Tr W|^2 = 2n/(n+1) three ways, n in [2,50]") as c:
        bad = [n for n in range(2, 51) if not (t := coe_trace_second_moment(n)).agree or t.via_jack != F(2 * n, n + 1)]
        c.finish(not bad, f"{49 - len(bad)}/49 agree")


OBSERVABLES = {"|p1|^2": ((1,), (1,)), "|p2|^2": ((2,), (2,)), "Re p2 conj(p1^2)": ((2,), (1, 1))}


@pytest.mark.slow
def test_criterion_9_monte_carlo(acceptance_log):
    with Criterion(acceptance_log, 9, "MCMC within 4 SE in >= 95% of cells", 600) as c:
        hits = total = 0
        worst = 0.0
        for beta in (1, 2, 4):
            for n in (2, 3):
                p = EnsembleParams.from_beta(n, beta)
                exact = {k: float(exact_moment(mu, nu, p)) for k, (mu, nu) in OBSERVABLES.items()}
                for seed in range(10):
                    batch = run_chain(default_config(n, float(beta), 200_000, seed=seed))
                    for key, (mu, nu) in OBSERVABLES.items():
                        z = abs(estimate_moment(batch, mu, nu).z_score(exact[key]))
                        worst = max(worst, z)
                        hits += z <= 4
                        total += 1
        c.finish(hits >= 0.95 * total, f"{hits}/{total} cells, max |z| {worst:.2f}")


CLI_RUNS = [
    ["jack", "--k", "4", "--alpha", "5/3"],
    ["moment", "--beta", "1", "--n", "3", "--mu", "2,1"],
    ["bounds", "--beta", "4", "--n", "6", "--k", "3"],
    ["table", "--beta", "1", "--n-from", "2", "--n-to", "6"],
    ["verify", "--suite", "sandwich", "--seed", "3"],
    ["sample", "--beta", "2", "--n", "3", "--mu", "2", "--steps", "30000", "--seed", "42"],
    ["sample", "--beta", "4", "--n", "2", "--m", "3", "--steps", "30000", "--seed", "42"],
    ["appendix", "--n", "7"],
]


def test_criterion_10_determinism(acceptance_log, tmp_path):
    with Criterion(acceptance_log, 10, "byte-identical CLI output on repeat runs") as c:
        same = 0
        for argv in CLI_RUNS:
            outs = [
                subprocess.run([sys.executable, "-m", "cbm", *argv], capture_output=True, check=True).stdout
                for _ in range(2)
            ]
            same += outs[0] == outs[1] and bool(outs[0])
        c.finish(same == len(CLI_RUNS), f"{same}/{len(CLI_RUNS)} commands identical")


"""Command-line interface: ``cbm <subcommand> [flags]``.

JSON goes to stdout (or ``--out``), logs go to stderr.  Exit codes:
0 success, 1 verification failure, 2 usage or capacity error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from fractions import Fraction

from . import __version__
from .errors import CbmError
from .jack import build_jack_table, kmax, table_to_json
from .moments import (
    EnsembleParams,
    bounds_for,
    closed_form_partitions,
    closed_forms,
    coe_trace_second_moment,
    exact_moment,
    i_of,
    moment_report,
)
from .partitions import format_partition, parse_partition
from .rational import alpha_from_beta, format_rational, to_rational
from .sampler import default_config, estimate_I, estimate_moment, run_chain, save_batch
from .verify import SUITES, run_suite

log = logging.getLogger("cbm")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

CLOSED_FORM_NAMES = ("p1_sq", "p1_fourth", "p2_sq", "p2_p1sq")


class UsageError(Exception):
    pass


def _rational_arg(text: str) -> Fraction:
    try:
        return to_rational(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _partition_arg(text: str):
    try:
        return parse_partition(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _alpha(args) -> Fraction:
    if args.alpha is not None:
        if args.alpha <= 0:
            raise UsageError("alpha must be positive")
        return args.alpha
    if args.beta is None or args.beta <= 0:
        raise UsageError("beta must be positive")
    return alpha_from_beta(args.beta)


def _add_ensemble(p: argparse.ArgumentParser, required: bool = True) -> None:
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--beta", type=_rational_arg, help="Dyson index, e.g. 1, 4, 2/3")
    g.add_argument("--alpha", type=_rational_arg, help="alpha = 2/beta")


def _dump(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


# ---------------------------------------------------------------------------
# subcommands


def cmd_jack(args) -> tuple[int, str]:
    table = build_jack_table(args.k, _alpha(args))
    return EXIT_OK, _dump(table_to_json(table))


def cmd_moment(args) -> tuple[int, str]:
    nu = args.mu if args.nu is None else args.nu
    p = EnsembleParams(args.n, _alpha(args))
    return EXIT_OK, _dump(moment_report(args.mu, nu, p).to_json())


def cmd_bounds(args) -> tuple[int, str]:
    p = EnsembleParams(args.n, _alpha(args))
    b = bounds_for(args.k, p)
    doc = {"n": p.n, "K": args.k, "alpha": format_rational(p.alpha), "beta": format_rational(p.beta)}
    doc.update(b.to_json())
    if p.n < args.k:
        doc["warning"] = "n < K: the bracketing is not guaranteed"
    return EXIT_OK, _dump(doc)


def cmd_table(args) -> tuple[int, str]:
    if not 2 <= args.n_from <= args.n_to:
        raise UsageError("need 2 <= --n-from <= --n-to")
    alpha = _alpha(args)
    rows = []
    for n in range(args.n_from, args.n_to + 1):
        p = EnsembleParams(n, alpha)
        closed = closed_forms(p)
        exact = [exact_moment(mu, nu, p) for mu, nu in closed_form_partitions()]
        row = {"n": n, "alpha": format_rational(alpha), "beta": format_rational(p.beta)}
        for name, c in zip(CLOSED_FORM_NAMES, closed):
            row[name] = format_rational(c)
        for name, e in zip(CLOSED_FORM_NAMES, exact):
            row[f"exact_{name}"] = format_rational(e)
        row["match"] = all(c == e for c, e in zip(closed, exact))
        rows.append(row)
    ok = all(r["match"] for r in rows)
    if args.format == "json":
        return (EXIT_OK if ok else EXIT_FAIL), _dump(rows)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({**r, "match": str(r["match"]).lower()})
    return (EXIT_OK if ok else EXIT_FAIL), buf.getvalue()


def cmd_verify(args) -> tuple[int, str]:
    results = run_suite(args.suite, kmax=args.kmax, seed=args.seed)
    lines = []
    for r in results:
        status = "PASS" if r.ok else "FAIL"
        lines.append(f"{status} {r.name}: {r.passed} passed, {r.failed} failed")
        for f in r.failures[:20]:
            lines.append("  " + json.dumps(f, sort_keys=True))
    ok = all(r.ok for r in results)
    return (EXIT_OK if ok else EXIT_FAIL), "\n".join(lines) + "\n"


def cmd_sample(args) -> tuple[int, str]:
    beta = args.beta
    if beta is None or beta <= 0:
        raise UsageError("--beta must be positive")
    if args.m is not None and args.mu is not None:
        raise UsageError("use either --m or --mu/--nu")
    cfg = default_config(
        args.n,
        float(beta),
        args.steps,
        seed=args.seed,
        burn_in=args.burn_in,
        thin=args.thin,
        proposal_scale=args.proposal_scale,
    )
    batch = run_chain(cfg)
    if args.save:
        save_batch(batch, args.save)
    p = EnsembleParams(args.n, alpha_from_beta(beta))
    doc = {
        "n": cfg.n,
        "beta": format_rational(beta),
        "steps": cfg.steps,
        "burn_in": cfg.burn_in,
        "thin": cfg.thin,
        "proposal_scale": cfg.proposal_scale,
        "seed": cfg.seed,
        "n_draws": len(batch),
        "acceptance_rate": batch.acceptance_rate,
    }
    exact = None
    if args.m is not None:
        doc["observable"] = f"I({args.m},{args.n})"
        est = estimate_I(batch, args.m)
        if args.m <= kmax():
            exact = i_of(args.m, p)
    else:
        mu = (1,) if args.mu is None else args.mu
        nu = mu if args.nu is None else args.nu
        doc["observable"] = f"p[{format_partition(mu)}]*conj(p[{format_partition(nu)}])"
        est = estimate_moment(batch, mu, nu)
        doc["imag_mean"] = est.imag_mean
        if max(sum(mu), sum(nu)) <= kmax():
            exact = exact_moment(mu, nu, p)
    doc["estimate"] = est.mean
    doc["stderr"] = est.stderr
    doc["exact"] = None if exact is None else format_rational(exact)
    doc["exact_float"] = None if exact is None else float(exact)
    doc["z_score"] = None if exact is None else est.z_score(float(exact))
    return EXIT_OK, _dump(doc)


def cmd_appendix(args) -> tuple[int, str]:
    if args.n < 2:
        raise UsageError("--n must be >= 2")
    trio = coe_trace_second_moment(args.n)
    doc = {
        "n": args.n,
        "dirichlet": format_rational(trio.via_dirichlet),
        "weingarten": format_rational(trio.via_weingarten),
        "jack": format_rational(trio.via_jack),
        "match": trio.agree,
    }
    return (EXIT_OK if trio.agree else EXIT_FAIL), _dump(doc)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cbm", description="Exact trace moments of circular beta-ensembles.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--out", metavar="FILE", help="write output to FILE instead of stdout")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("jack", help="power-sum coefficients of all J_lam with |lam| = k")
    p.add_argument("--k", type=int, required=True)
    _add_ensemble(p)
    p.set_defaults(func=cmd_jack)

    p = sub.add_parser("moment", help="exact E[p_mu conj(p_nu)] with bound diagnostics")
    _add_ensemble(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mu", type=_partition_arg, required=True, help='e.g. "2,1,1"')
    p.add_argument("--nu", type=_partition_arg, default=None, help="defaults to --mu")
    p.set_defaults(func=cmd_moment)

    p = sub.add_parser("bounds", help="A, B, Gamma, gamma and the corollary bound for weight K")
    _add_ensemble(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("table", help="closed-form moments next to the exact Jack values")
    _add_ensemble(p)
    p.add_argument("--n-from", type=int, required=True)
    p.add_argument("--n-to", type=int, required=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("verify", help="run an exact invariant suite")
    p.add_argument("--suite", choices=SUITES + ("all",), default="all")
    p.add_argument("--kmax", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sample", help="Metropolis estimate of a moment or of I(m, n)")
    p.add_argument("--beta", type=_rational_arg, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--steps", type=int, default=200_000, help="total sweeps")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mu", type=_partition_arg, default=None)
    p.add_argument("--nu", type=_partition_arg, default=None)
    p.add_argument("--m", type=int, default=None, help="estimate I(m, n) instead of a moment")
    p.add_argument("--burn-in", type=int, default=None)
    p.add_argument("--thin", type=int, default=None)
    p.add_argument("--proposal-scale", type=float, default=None)
    p.add_argument("--save", metavar="CSV", help="dump draws as CSV with a JSON sidecar")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("appendix", help="COE E|Tr W|^2 three ways")
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_appendix)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        code, text = args.func(args)
    except (UsageError, CbmError, ValueError) as exc:
        print(f"cbm {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

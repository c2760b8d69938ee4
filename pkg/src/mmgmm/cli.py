"""Command-line entry point: ``mmgmm fit | score | sample | verify``.

Exit codes: 0 success, 1 runtime error (or failed verification),
2 fit stopped at ``--max-iter`` without meeting ``--tol``, 64 usage error.
"""
import argparse
import logging
import sys

import numpy as np

from . import io
from .errors import GMMError
from .fitter import FitConfig, Init, fit
from .mixture import log_weighted_densities, log_sum_exp_rows, responsibilities_from_log
from .sampler import RandomSource, sample_dataset
from .verifier import check_minorization, update_equivalence_gaps, EQUIVALENCE_TOL

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_CONVERGED = 2
EXIT_USAGE = 64

log = logging.getLogger("mmgmm")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _seed(text):
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mmgmm", description="Gaussian mixture maximum-likelihood fitting.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fit", help="fit a mixture to CSV data")
    f.add_argument("--input", required=True)
    f.add_argument("--components", type=int, required=True)
    f.add_argument("--max-iter", type=int, default=500)
    f.add_argument("--tol", type=float, default=1e-8)
    f.add_argument("--cov-floor", type=float, default=1e-6)
    f.add_argument("--seed", type=_seed, default=0)
    f.add_argument("--init", choices=[i.value for i in Init], default=Init.KMEANS_PLUS_PLUS.value)
    f.add_argument("--output", required=True)
    f.add_argument("--trace")
    f.add_argument("--header", action="store_true")

    s = sub.add_parser("score", help="log-likelihood of CSV data under a model")
    s.add_argument("--input", required=True)
    s.add_argument("--model", required=True)
    s.add_argument("--header", action="store_true")
    s.add_argument("--responsibilities")

    g = sub.add_parser("sample", help="draw synthetic data from a model")
    g.add_argument("--model", required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=_seed, required=True)
    g.add_argument("--output", required=True)
    g.add_argument("--labels")

    v = sub.add_parser("verify", help="check the lower bound and update equivalence at a model")
    v.add_argument("--input", required=True)
    v.add_argument("--model", required=True)
    v.add_argument("--trials", type=int, required=True)
    v.add_argument("--seed", type=_seed, required=True)
    v.add_argument("--header", action="store_true")
    return p


def _cmd_fit(args) -> int:
    data = io.load_csv(args.input, has_header=args.header)
    cfg = FitConfig(
        max_iter=args.max_iter,
        rel_tol=args.tol,
        cov_floor=args.cov_floor,
        seed=args.seed,
        init=Init(args.init),
    )
    model, trace = fit(data, args.components, cfg)
    io.save_model(model, args.output)
    if args.trace:
        io.write_trace(trace, args.trace)
    print(f"iterations {trace.iterations}")
    print(f"loglik {io.fmt(trace.loglik[-1])}")
    print(f"termination {trace.termination_reason.value}")
    return EXIT_OK if trace.converged else EXIT_NOT_CONVERGED


def _cmd_score(args) -> int:
    data = io.load_csv(args.input, has_header=args.header)
    model = io.load_model(args.model)
    g = log_weighted_densities(model, data)
    per_sample = log_sum_exp_rows(g)
    lines = [f"total {io.fmt(np.sum(per_sample))}"]
    lines.extend(io.fmt(v) for v in per_sample)
    print("\n".join(lines))
    if args.responsibilities:
        io.write_csv(args.responsibilities, responsibilities_from_log(g))
    return EXIT_OK


def _cmd_sample(args) -> int:
    model = io.load_model(args.model)
    if args.n < 1:
        raise ValueError(f"--n must be >= 1, got {args.n}")
    data, labels = sample_dataset(model, args.n, RandomSource(args.seed))
    io.write_csv(args.output, data.samples)
    if args.labels:
        io.write_labels(args.labels, labels)
    return EXIT_OK


def _cmd_verify(args) -> int:
    data = io.load_csv(args.input, has_header=args.header)
    model = io.load_model(args.model)
    if args.trials < 0:
        raise ValueError("--trials must be >= 0")
    report = check_minorization(model, data, args.trials, seed=args.seed, include_base=args.trials > 0)
    gaps = update_equivalence_gaps(model, data)
    equivalent = all(v < EQUIVALENCE_TOL for v in gaps.values())
    print(report.summary())
    print(f"tangent              {report.tangent}")
    for name, v in gaps.items():
        print(f"equivalence {name:<12}{v:.3e}")
    print(f"equivalent           {equivalent}")
    ok = report.violations == 0 and report.tangent and equivalent
    return EXIT_OK if ok else EXIT_ERROR


COMMANDS = {"fit": _cmd_fit, "score": _cmd_score, "sample": _cmd_sample, "verify": _cmd_verify}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return COMMANDS[args.command](args)
    except (GMMError, OSError, ValueError) as exc:
        print(f"mmgmm {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

Exit codes: 0 success, 1 verification failure, 2 parse or usage error,
3 size cap exceeded, 4 I/O error, 5 dimension mismatch.
"""
import argparse
import csv
import json
import os
import sys
import time

import numpy as np

from . import io as eio
from .engine import edge_posteriors
from .exceptions import CapExceededError, DatasetParseError, DimensionMismatchError
from .lattice import MAX_NODES, ProblemDims
from .model import RHO_FAMILIES, SCORE_FAMILIES, Dataset, PriorSpec, load_dataset
from .oracle import ORACLE_MAX_N
from .study import (
    StudyConfig,
    generate_network,
    report_text,
    roc,
    run_study,
    sample_data,
    write_roc_csv,
)
from .verify import Instance, agreement_suite, compare

EXIT_OK = 0
EXIT_DISAGREE = 1
EXIT_PARSE = 2
EXIT_CAP = 3
EXIT_IO = 4
EXIT_DIM = 5


class _Fail(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _int_list(text):
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _open_out(path):
    try:
        return open(path, "w", encoding="utf-8", newline="")
    except OSError as exc:
        raise _Fail(EXIT_IO, f"cannot write {path}: {exc.strerror}")


def _open_in(path):
    try:
        return open(path, encoding="utf-8")
    except OSError as exc:
        raise _Fail(EXIT_IO, f"cannot read {path}: {exc.strerror}")


def _add_prior_flags(p):
    p.add_argument("--k", type=int, required=True, help="maximum indegree")
    p.add_argument("--rho", choices=RHO_FAMILIES, default="cardinality_uniform")
    p.add_argument("--score", choices=SCORE_FAMILIES, default="dirichlet_all_ones")
    p.add_argument("--ess", type=float, default=None, help="BDeu equivalent sample size")


def _prior_from(args):
    if args.ess is not None and args.score != "bdeu":
        raise _Fail(EXIT_PARSE, "--ess only applies with --score bdeu")
    if args.k < 0:
        raise _Fail(EXIT_PARSE, "--k must be nonnegative")
    return PriorSpec(args.k, rho=args.rho, score=args.score, ess=args.ess or 1.0)


def cmd_posteriors(args):
    spec = _prior_from(args)
    try:
        data = load_dataset(args.data, arities=args.arities)
    except FileNotFoundError:
        raise _Fail(EXIT_IO, f"no such file: {args.data}")
    except OSError as exc:
        raise _Fail(EXIT_IO, f"cannot read {args.data}: {exc.strerror}")
    ProblemDims(data.n, spec.for_nodes(data.n).k, args.allow_large)
    post = edge_posteriors(data, spec, allow_large=args.allow_large)
    fmt = args.format or ("json" if str(args.out).endswith(".json") else "csv")
    if args.out is None:
        _write_post(post, sys.stdout, fmt, not args.no_timings)
    else:
        with _open_out(args.out) as fh:
            _write_post(post, fh, fmt, not args.no_timings)
    print(f"log_marginal={post.log_marginal!r}", file=sys.stderr)
    print(f"elapsed_ms={post.elapsed_ms:.3f}", file=sys.stderr)
    return EXIT_OK


def _write_post(post, fh, fmt, timings):
    if fmt == "json":
        eio.write_posteriors_json(post, fh, timings=timings)
    else:
        eio.write_posteriors_csv(post, fh)


def cmd_simulate(args):
    try:
        net = generate_network(args.n, args.k, args.r, args.seed)
    except ValueError as exc:
        raise _Fail(EXIT_PARSE, str(exc))
    data = sample_data(net, args.m, args.data_seed if args.data_seed is not None else args.seed + 1)
    with _open_out(args.network_out) as fh:
        eio.write_network_json(net, fh)
    with _open_out(args.data_out) as fh:
        eio.write_dataset(data, fh)
    return EXIT_OK


def cmd_roc(args):
    with _open_in(args.network) as fh:
        net = eio.read_network_json(fh)
    with _open_in(args.posteriors) as fh:
        post = eio.read_posteriors_json(fh)
    curve = roc(net, post)
    if args.out:
        with _open_out(args.out) as fh:
            write_roc_csv(curve, fh)
    print(f"auc={curve.auc!r}")
    return EXIT_OK


def cmd_study(args):
    config = StudyConfig(
        ns=args.n,
        ks=args.k,
        rs=args.r,
        ms=args.m,
        replicates=args.replicates,
        seed=args.seed,
        timings=not args.no_timings,
    )
    for n, k, _ in config.points():
        ProblemDims(n, k)
    if args.curves_dir:
        os.makedirs(args.curves_dir, exist_ok=True)
    rows = run_study(config, curve_dir=args.curves_dir, noise_seed=args.noise_seed,
                     threads=args.threads)
    text = report_text(rows)
    if args.out:
        with _open_out(args.out) as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_verify(args):
    if args.replay:
        with _open_in(args.replay) as fh:
            inst = Instance.from_dict(json.load(fh))
        if inst.data.n > ORACLE_MAX_N:
            raise _Fail(EXIT_CAP, f"replay instance has n={inst.data.n} > {ORACLE_MAX_N}")
        cases = [(inst, *compare(inst, args.perturb))]
    else:
        if not 2 <= args.n <= ORACLE_MAX_N:
            raise _Fail(EXIT_CAP, f"--n must lie in [2, {ORACLE_MAX_N}], got {args.n}")
        cases = agreement_suite(args.instances, n_max=args.n, seed=args.seed,
                                perturb=args.perturb)
    worst = (0.0, 0.0)
    failed = None
    count = 0
    for inst, post_err, marg_err in cases:
        count += 1
        worst = (max(worst[0], post_err), max(worst[1], marg_err))
        if failed is None and max(post_err, marg_err) > args.tol:
            failed = inst
    print(f"instances={count} worst_posterior_error={worst[0]:.3e} "
          f"worst_log_marginal_error={worst[1]:.3e} tol={args.tol:g}")
    if failed is None:
        return EXIT_OK
    payload = failed.to_dict()
    if args.replay_out:
        with _open_out(args.replay_out) as fh:
            json.dump(payload, fh)
            fh.write("\n")
        print(f"disagreement; instance written to {args.replay_out}", file=sys.stderr)
    else:
        print("disagreement; failing instance:", file=sys.stderr)
        print(json.dumps(payload), file=sys.stderr)
    return EXIT_DISAGREE


def cmd_bench(args):
    if args.n_max > MAX_NODES and not args.allow_large:
        raise _Fail(EXIT_CAP, f"--n-max {args.n_max} exceeds the cap of {MAX_NODES}")
    sizes = list(range(args.n_min, args.n_max + 1))
    best = {n: float("inf") for n in sizes}
    # rounds sweep every n so slow drift in machine load hits all sizes alike
    for _ in range(args.repeats):
        for n in sizes:
            spec = PriorSpec(min(args.k, n - 1))
            data = Dataset(tuple(f"x{i}" for i in range(n)), [2] * n, np.zeros((0, n), np.int64))
            start = time.perf_counter()
            edge_posteriors(data, spec, allow_large=args.allow_large)
            best[n] = min(best[n], time.perf_counter() - start)
    rows = []
    for n in sizes:
        ratio = best[n] / best[n - 1] if n - 1 in best else float("nan")
        rows.append((n, best[n], ratio))
        print(f"n={n} seconds={best[n]:.4f} ratio={ratio:.3f}")
    if args.out:
        with _open_out(args.out) as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["n", "k", "seconds", "ratio"])
            for n, seconds, ratio in rows:
                writer.writerow([n, args.k, f"{seconds:.6f}", f"{ratio:.6f}"])
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="edgepost", description="Exact edge posterior probabilities for Bayesian networks."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("posteriors", help="edge posteriors for a dataset")
    p.add_argument("--data", required=True)
    _add_prior_flags(p)
    p.add_argument("--arities", type=_int_list, default=None)
    p.add_argument("--out", default=None, help="output path (.json or .csv); stdout if omitted")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--allow-large", action="store_true", help="raise the node cap to 26")
    p.add_argument("--no-timings", action="store_true",
                   help="omit wall-clock fields so output is reproducible byte for byte")
    p.set_defaults(func=cmd_posteriors)

    p = sub.add_parser("simulate", help="random network and forward-sampled data")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--data-seed", type=int, default=None, help="defaults to seed + 1")
    p.add_argument("--network-out", required=True)
    p.add_argument("--data-out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("roc", help="ROC curve of a posterior file against a network")
    p.add_argument("--network", required=True)
    p.add_argument("--posteriors", required=True, help="posterior JSON")
    p.add_argument("--out", default=None, help="curve CSV")
    p.set_defaults(func=cmd_roc)

    p = sub.add_parser("study", help="synthetic power study over a grid")
    p.add_argument("--n", type=_int_list, required=True)
    p.add_argument("--k", type=_int_list, required=True)
    p.add_argument("--r", type=_int_list, required=True)
    p.add_argument("--m", type=_int_list, default=(20, 100, 500, 2000))
    p.add_argument("--replicates", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise-seed", type=int, default=None,
                   help="replace posteriors by seeded uniform noise")
    p.add_argument("--out", default=None)
    p.add_argument("--curves-dir", default=None)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--no-timings", action="store_true")
    p.set_defaults(func=cmd_study)

    p = sub.add_parser("verify", help="fuzz the engine against the brute-force oracle")
    p.add_argument("--instances", type=int, default=50)
    p.add_argument("--n", type=int, default=5, help="largest n drawn")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--perturb", type=float, default=0.0,
                   help="shift one oracle family score (sensitivity check)")
    p.add_argument("--replay", default=None, help="re-run one serialized instance")
    p.add_argument("--replay-out", default=None, help="where to write a failing instance")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="wall time of the engine on empty data")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--n-min", type=int, default=16)
    p.add_argument("--n-max", type=int, default=20)
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--allow-large", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _Fail as exc:
        print(f"edgepost: {exc}", file=sys.stderr)
        return exc.code
    except DatasetParseError as exc:
        print(f"edgepost: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except CapExceededError as exc:
        print(f"edgepost: {exc}", file=sys.stderr)
        return EXIT_CAP
    except DimensionMismatchError as exc:
        print(f"edgepost: {exc}", file=sys.stderr)
        return EXIT_DIM
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"edgepost: invalid input: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"edgepost: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

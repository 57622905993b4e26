"""Batch command-line front end.

Exit codes: 0 success or condition satisfied, 2 input error, 3 condition not
satisfied, 4 numerical degeneracy.  Relative output paths are resolved
against ``$MARKOV_ERGODIC_OUTDIR`` when it is set.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import io
from .conditions import check_doeblin, check_harris, check_qscc_witness, check_uniform_integrability
from .decomposition import class_weights, decompose, limit_of_initial_measure
from .economy import check_theorem2, ergodicity_verdict, induce_kernel, trace_chain
from .errors import (
    AmbiguousLimitError,
    InvalidInputError,
    NonReturningError,
    NumericalDegeneracyError,
)
from .kernel import Observable, SignedMeasure, cesaro_average
from .simulation import (
    convergence_profile,
    empirical_stderr,
    empirical_time_average,
    simulate_path,
)
from .spectral import DEFAULT_PERIPHERAL_TOL, compute_split

OUTDIR_ENV = "MARKOV_ERGODIC_OUTDIR"

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_UNSATISFIED = 3
EXIT_DEGENERATE = 4


def _csv_list(conv):
    def parse(text):
        try:
            return [conv(t) for t in text.split(",") if t.strip()]
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
    return parse


def _labels(text):
    return [t.strip() for t in text.split(",") if t.strip()]


def _emit(args, text: str) -> None:
    if args.output in (None, "-"):
        sys.stdout.write(text)
        return
    path = Path(args.output)
    outdir = os.environ.get(OUTDIR_ENV)
    if outdir and not path.is_absolute():
        path = Path(outdir) / path
    io.write_atomic(path, text)


def _kernel(args):
    return io.kernel_from_dict(io.load_json(args.kernel), renormalize=args.renormalize)


def _observable(args, space):
    if args.observable:
        return io.observable_from_dict(io.load_json(args.observable), space)
    if args.indicator:
        return Observable.indicator(space, _labels(args.indicator))
    raise InvalidInputError("give --observable FILE or --indicator LABELS")


# -- commands ---------------------------------------------------------------------

def cmd_decompose(args):
    _emit(args, io.dumps(io.decomposition_to_dict(decompose(_kernel(args)))))
    return EXIT_OK


def cmd_spectrum(args):
    split = compute_split(_kernel(args), args.peripheral_tol)
    _emit(args, io.dumps(io.split_to_dict(split)))
    return EXIT_OK


def cmd_limit(args):
    k = _kernel(args)
    if args.measure:
        mu = io.measure_from_dict(io.load_json(args.measure), k.space)
    elif args.initial:
        mu = SignedMeasure.point_mass(k.space, args.initial)
    else:
        raise InvalidInputError("give --measure FILE or --initial LABEL")
    dec = decompose(k)
    lim = limit_of_initial_measure(dec, mu)
    brute = mu.weights @ cesaro_average(k, args.n, include_zeroth=True)
    out = {
        "states": list(k.space.labels),
        "weights": lim.weights.tolist(),
        "classes": dec.class_labels(),
        "coefficients": class_weights(dec, mu).tolist(),
        "cesaro_n": args.n,
        "cesaro_distance": float(np.abs(brute - lim.weights).sum()),
    }
    _emit(args, io.dumps(out))
    return EXIT_OK


def cmd_check(args):
    which = args.condition
    if which == "theorem2":
        model = io.model_from_dict(io.load_json(args.input))
        if args.verdict:
            v = ergodicity_verdict(model, args.n_max)
            out = {
                "theorem2": io.report_to_dict(v.theorem2),
                "ergodic": v.ergodic,
                "classes": v.decomposition.class_labels(),
                "transient": v.decomposition.transient_labels(),
                "unreachable": list(v.unreachable),
                "invariant_measure": io.to_jsonable(v.invariant_measure),
                "harris": io.to_jsonable(v.harris),
                "minorization_gap": v.minorization_gap,
            }
            _emit(args, io.dumps(out))
            return EXIT_OK if v.satisfied else EXIT_UNSATISFIED
        report = check_theorem2(model, args.n_max)
    elif which == "ui":
        d = io.load_json(args.input)
        if not isinstance(d, dict) or "density" not in d or "cell_weights" not in d:
            raise InvalidInputError("density file needs 'density' and 'cell_weights'")
        report = check_uniform_integrability(d["density"], d["cell_weights"], args.eps_grid)
    else:
        k = io.kernel_from_dict(io.load_json(args.input), renormalize=args.renormalize)
        if which == "doeblin":
            report = check_doeblin(k)
        elif which == "harris":
            if not args.K:
                raise InvalidInputError("harris needs --K")
            report = check_harris(k, _labels(args.K), args.k_max)
        else:
            if not args.x_star:
                raise InvalidInputError("qscc needs --x-star")
            report = check_qscc_witness(k, args.x_star, args.eps, args.n)
    _emit(args, io.dumps(io.report_to_dict(report)))
    return EXIT_OK if report.satisfied else EXIT_UNSATISFIED


def cmd_induce(args):
    model = io.model_from_dict(io.load_json(args.model))
    _emit(args, io.dumps(io.kernel_to_dict(induce_kernel(model))))
    return EXIT_OK


def cmd_trace(args):
    t = trace_chain(_kernel(args), _labels(args.K))
    _emit(args, io.dumps(io.trace_to_dict(t)))
    return EXIT_OK


def cmd_simulate(args):
    k = _kernel(args)
    g = _observable(args, k.space)
    seeds = args.seeds if args.seeds else [args.seed]
    rows, paths = [], []
    for seed in seeds:
        run = simulate_path(k, args.x0, args.n, seed)
        rows.append((seed, args.n, empirical_time_average(run, g), empirical_stderr(run, g)))
        paths.append(" ".join(map(str, run.path.tolist())))
    if args.dump_path:
        io.write_atomic(args.dump_path, "\n".join(paths) + "\n")
    _emit(args, io.csv_text(["seed", "n", "estimate", "stderr"], rows))
    return EXIT_OK


def cmd_profile(args):
    k = _kernel(args)
    g = _observable(args, k.space)
    prof = convergence_profile(k, g, args.x0, args.grid)
    _emit(args, io.csv_text(["n", "deviation", "n_deviation"], prof.rows))
    return EXIT_OK


# -- parser -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="markov-ergodic", description="Ergodic analysis of finite Markov kernels.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, kernel=True):
        if kernel:
            sp.add_argument("kernel", help="kernel JSON file")
            sp.add_argument("--renormalize", action="store_true",
                            help="renormalize rows within 1e-9 of stochastic")
        sp.add_argument("-o", "--output", help="output file (default stdout)")

    sp = sub.add_parser("decompose", help="ergodic decomposition")
    common(sp)
    sp.set_defaults(func=cmd_decompose)

    sp = sub.add_parser("spectrum", help="peripheral spectral split")
    common(sp)
    sp.add_argument("--peripheral-tol", type=float, default=DEFAULT_PERIPHERAL_TOL)
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("limit", help="long-run limit of an initial measure")
    common(sp)
    sp.add_argument("--measure", help="initial measure JSON file")
    sp.add_argument("--initial", help="start from a point mass at this state")
    sp.add_argument("--n", type=int, default=10_000, help="horizon of the Cesaro cross-check")
    sp.set_defaults(func=cmd_limit)

    sp = sub.add_parser("check", help="check a sufficient condition")
    sp.add_argument("condition", choices=["doeblin", "harris", "qscc", "theorem2", "ui"])
    sp.add_argument("input", help="kernel, model (theorem2) or density (ui) JSON file")
    sp.add_argument("--renormalize", action="store_true")
    sp.add_argument("--K", help="comma-separated state labels (harris)")
    sp.add_argument("--k-max", type=int, default=10)
    sp.add_argument("--x-star", help="target state (qscc)")
    sp.add_argument("--eps", type=float, default=1.0)
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--n-max", type=int, default=None)
    sp.add_argument("--eps-grid", type=_csv_list(float), default=[0.5, 0.25, 0.1, 0.01])
    sp.add_argument("--verdict", action="store_true", help="theorem2: run the full ergodicity pipeline")
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("induce", help="kernel induced by an economy model")
    sp.add_argument("model", help="model JSON file")
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_induce)

    sp = sub.add_parser("trace", help="trace chain on a subset K")
    common(sp)
    sp.add_argument("--K", required=True)
    sp.set_defaults(func=cmd_trace)

    for name, func in (("simulate", cmd_simulate), ("profile", cmd_profile)):
        sp = sub.add_parser(name, help=f"{name} time averages (CSV)")
        common(sp)
        sp.add_argument("--x0", required=True)
        sp.add_argument("--observable")
        sp.add_argument("--indicator")
        sp.set_defaults(func=func)
    simulate, profile = sub.choices["simulate"], sub.choices["profile"]
    simulate.add_argument("--n", type=int, default=10_000)
    simulate.add_argument("--seed", type=int, default=0)
    simulate.add_argument("--seeds", type=_csv_list(int))
    simulate.add_argument("--dump-path")
    profile.add_argument("--grid", type=_csv_list(int), default=[10, 100, 1000, 10000])
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InvalidInputError, NonReturningError, AmbiguousLimitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except IndexError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalDegeneracyError as exc:
        print(f"numerical degeneracy: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE


if __name__ == "__main__":
    sys.exit(main())

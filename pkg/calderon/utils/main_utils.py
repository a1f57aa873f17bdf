import argparse
import logging
import os
import sys
import numpy as np
import pandas as pd
from typing import List, Optional
from calderon.data.rearrangement import mu_seq, mu_step
from calderon.data.sequences import Seq
from calderon.data.step_functions import StepFunction
from calderon.models import verify
from calderon.models.matrix import (
    MatrixOp,
    doi_schur,
    lipschitz_commutator_check,
    parse_lipschitz,
    schatten_norm,
    singular_values,
    svd_residual,
    triangular_truncate,
)
from calderon.models.operators import (
    IntervalStep,
    calderon,
    calderon_discrete,
    cesaro,
    cesaro_dual,
    fourier_truncation_symbol,
    hilbert_discrete,
    hilbert_step,
)
from calderon.models.optimal_range import fnorm_upper, kolmogorov_construct, optimal_range_membership
from calderon.models.spaces import norm, parse_space
from calderon.utils.configs import get_setup, read_key_value_file
from calderon.utils.data import dumps_json, read_json
from calderon.utils.errors import DomainError, NumericalError, UnsupportedNormError
from calderon.utils.evaluation import FLOAT_FORMAT, report_payload, save_reports, summary_frame, trials_frame
from calderon.utils.linalg import BACKENDS
from calderon.utils.simplex import SOLVERS

COMMANDS = ("rearrange", "norm", "apply", "truncate", "svd", "doi", "fnorm", "verify")
OPERATORS = ("C", "C'", "S", "Sd", "H", "Hd", "symbol")
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def load_object(data: dict):
    """JSON object -> StepFunction, Seq, MatrixOp or IntervalStep, by its keys."""
    if not isinstance(data, dict):
        raise DomainError("input must be a JSON object")
    if "breakpoints" in data:
        return StepFunction.from_dict(data)
    if "entries" in data:
        return Seq.from_dict(data)
    if "re" in data:
        return MatrixOp.from_dict(data)
    if "lefts" in data:
        return IntervalStep.from_dict(data)
    raise DomainError(f"cannot tell the input type from keys {sorted(data)}")


def read_input(path: str):
    return load_object(read_json(path))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config",
        type=str,
        default=None,
        help="KEY=VALUE file whose entries override the 'params' section of configs/base_config.yaml.",
    )
    common.add_argument(
        "--override",
        nargs="+",
        default=None,
        help="Override config parameters in key-value pairs, e.g. --override TRIALS 50 SVD_BACKEND lapack.",
    )
    common.add_argument("--out", type=str, default=None, help="Write the result here instead of stdout.")
    common.add_argument("--csv", action="store_true", default=False, help="Flatten the result to CSV.")
    common.add_argument(
        "--log-file",
        action="store_true",
        default=False,
        help="Also log to a timestamped file under LOG_DIR.",
    )

    parser = argparse.ArgumentParser(
        prog="calderon",
        description="Rearrangements, Calderón and Hilbert operators, triangular truncation and their verification suites.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    rearrange = subparsers.add_parser("rearrange", parents=[common], help="Decreasing rearrangement μ of the input.")
    rearrange.add_argument("--in", dest="input", required=True, help="Step function, sequence or matrix JSON.")

    norm_parser = subparsers.add_parser("norm", parents=[common], help="(Quasi-)norm of the input.")
    norm_parser.add_argument("--in", dest="input", required=True)
    norm_parser.add_argument("--space", required=True, help="Space grammar, e.g. weak-l1, lp:2, lorentz:log1p/d.")
    norm_parser.add_argument("--backend", choices=BACKENDS, default=None)

    apply = subparsers.add_parser("apply", parents=[common], help="Apply C, C', S, S^d, H, H_d or the truncation symbol.")
    apply.add_argument("--op", choices=OPERATORS, required=True)
    apply.add_argument("--in", dest="input", required=True)
    apply.add_argument("--at", nargs="+", type=float, default=None, help="Evaluation points for C, C', S and H.")
    apply.add_argument("--window", nargs=2, type=int, default=None, metavar=("START", "STOP"))
    apply.add_argument("--length", type=int, default=None, help="Output length for Sd.")

    truncate = subparsers.add_parser("truncate", parents=[common], help="Triangular truncation T(V).")
    truncate.add_argument("--in", dest="input", required=True)
    truncate.add_argument("--block", type=int, default=1)
    truncate.add_argument("--space", default=None, help="Report ‖T(V)‖ / ‖V‖ in this space.")
    truncate.add_argument("--backend", choices=BACKENDS, default=None)

    svd = subparsers.add_parser("svd", parents=[common], help="Singular values and reconstruction residual.")
    svd.add_argument("--in", dest="input", required=True)
    svd.add_argument("--backend", choices=BACKENDS, default=None)

    doi = subparsers.add_parser("doi", parents=[common], help="Double operator integral T_{f^[1]}(V), or a commutator check.")
    doi.add_argument("--in", dest="input", required=True, help="Hermitian A.")
    doi.add_argument("--f", dest="function", required=True, help="abs, sin, identity, square:R or pwl:knots:values.")
    doi.add_argument("--v", dest="perturbation", default=None, help="Matrix V for T_{f^[1]}^{A,A}(V).")
    doi.add_argument("--commutator", default=None, help="Hermitian B: report ‖[f(A),B]‖ / (Lip(f) ‖[A,B]‖).")
    doi.add_argument("--space-e", default="lp:2")
    doi.add_argument("--space-f", default="lp:2")
    doi.add_argument("--backend", choices=BACKENDS, default=None)

    fnorm = subparsers.add_parser("fnorm", parents=[common], help="Optimal-range norm bound, construction or membership.")
    fnorm.add_argument("--in", dest="input", required=True)
    fnorm.add_argument("--space", default="lp:1")
    fnorm.add_argument("--depth", type=int, default=None, help="Dyadic refinement depth of the LP grid.")
    fnorm.add_argument("--solver", choices=SOLVERS, default=None)
    fnorm.add_argument("--construct", action="store_true", default=False, help="Run the explicit L1 construction.")
    fnorm.add_argument("--membership", choices=("L1", "l1", "l1inf"), default=None)

    verify_parser = subparsers.add_parser("verify", parents=[common], help="Run a verification suite, or 'all'.")
    verify_parser.add_argument("experiment", help="Experiment id or alias, or 'all'.")
    verify_parser.add_argument("--seed", type=int, default=None)
    verify_parser.add_argument("--trials", type=int, default=None)
    verify_parser.add_argument(
        "--compare-mode",
        action="store_true",
        default=False,
        help="Omit the metadata block so identical runs produce identical files.",
    )
    verify_parser.add_argument("--progress", action="store_true", default=False)
    return parser


def validate_arguments(args, parser):
    if args.override is not None and len(args.override) % 2 != 0:
        parser.error("--override expects KEY VALUE pairs.")

    if args.command == "apply":
        if args.op in ("H",) and not args.at:
            parser.error("--op H needs evaluation points (--at).")
        if args.window is not None and args.window[1] <= args.window[0]:
            parser.error("--window START STOP needs START < STOP.")
        if args.length is not None and args.length < 1:
            parser.error("--length must be >= 1.")

    if args.command == "truncate" and args.block < 1:
        parser.error("--block must be >= 1.")

    if args.command == "doi" and (args.perturbation is None) == (args.commutator is None):
        parser.error("doi needs exactly one of --v and --commutator.")

    if args.command == "fnorm":
        if args.depth is not None and args.depth < 0:
            parser.error("--depth must be >= 0.")
        if args.construct and args.membership is not None:
            parser.error("--construct and --membership are mutually exclusive.")

    if args.command == "verify":
        if args.trials is not None and args.trials < 1:
            parser.error("--trials must be >= 1.")
        if args.seed is not None and args.seed < 0:
            parser.error("--seed must be nonnegative.")


def _emit(payload, args, frame: Optional[pd.DataFrame] = None):
    if args.csv and frame is not None:
        text = frame.to_csv(index=False, float_format=FLOAT_FORMAT)
    else:
        text = dumps_json(payload) + "\n"
    if args.out is None:
        sys.stdout.write(text)
        return
    output_dir = os.path.dirname(os.path.abspath(args.out))
    if not os.path.exists(output_dir):
        os.makedirs(output_dir)
    with open(args.out, "w") as handle:
        handle.write(text)


def _values_frame(column: str, values, index_name: str = "n", index=None) -> pd.DataFrame:
    values = np.asarray(values)
    index = np.arange(values.size) if index is None else np.asarray(index)
    if np.iscomplexobj(values):
        return pd.DataFrame({index_name: index, f"{column}_re": values.real, f"{column}_im": values.imag})
    return pd.DataFrame({index_name: index, column: values})


# ---------------------------------------------------------------------------
# subcommands


def run_rearrange(args, setup):
    x = read_input(args.input)
    if isinstance(x, StepFunction):
        mu = mu_step(x)
        frame = pd.DataFrame({"breakpoint": mu.breakpoints, "value": mu.values})
    elif isinstance(x, Seq):
        mu = mu_seq(x)
        frame = _values_frame("mu", mu.entries)
    elif isinstance(x, MatrixOp):
        mu = singular_values(x, args_backend(args, setup, "SVD_BACKEND"))
        frame = _values_frame("mu", mu.entries)
    else:
        raise UnsupportedNormError("rearrange takes a step function, a sequence or a matrix")
    _emit(mu.to_dict(), args, frame)
    return EXIT_OK


def args_backend(args, setup, key: str) -> str:
    backend = getattr(args, "backend", None)
    return backend or setup["params"].get(key, "jacobi")


def run_norm(args, setup):
    x = read_input(args.input)
    spec = parse_space(args.space)
    if isinstance(x, MatrixOp):
        value = schatten_norm(x, spec, args_backend(args, setup, "SVD_BACKEND"))
    else:
        value = norm(x, spec)
    payload = {"space": str(spec), "norm": value}
    _emit(payload, args, pd.DataFrame([payload]))
    return EXIT_OK


def run_apply(args, setup):
    x = read_input(args.input)
    op = args.op
    if op in ("C", "C'", "S"):
        if not isinstance(x, StepFunction):
            raise UnsupportedNormError(f"operator {op} acts on step functions")
        profile = {"C": cesaro, "C'": cesaro_dual, "S": calderon}[op](x)
        payload = {"operator": op, "profile": profile.to_dict()}
        frame = None
        if args.at:
            values = profile.evaluate(np.asarray(args.at, dtype=float))
            payload["at"] = list(args.at)
            payload["values"] = values
            frame = _values_frame("value", values, "t", args.at)
        _emit(payload, args, frame)
        return EXIT_OK
    if op == "H":
        if not isinstance(x, (StepFunction, IntervalStep)):
            raise UnsupportedNormError("H acts on step functions or interval steps")
        values = np.atleast_1d(hilbert_step(x, np.asarray(args.at, dtype=float)))
        _emit({"operator": op, "at": list(args.at), "values": values}, args, _values_frame("value", values, "t", args.at))
        return EXIT_OK

    if not isinstance(x, Seq):
        raise UnsupportedNormError(f"operator {op} acts on sequences")
    if op == "Sd":
        result = calderon_discrete(x, args.length)
    elif op == "Hd":
        result = hilbert_discrete(x, tuple(args.window) if args.window else None)
    else:
        result = fourier_truncation_symbol(x, tuple(args.window) if args.window else None)
    _emit({"operator": op, "result": result.to_dict()}, args, _values_frame("value", result.entries, index=result.indices))
    return EXIT_OK


def run_truncate(args, setup):
    V = read_input(args.input)
    if not isinstance(V, MatrixOp):
        raise UnsupportedNormError("truncate takes a matrix")
    TV = triangular_truncate(V, args.block)
    payload = {"block": args.block, "matrix": TV.to_dict()}
    frame = None
    if args.space is not None:
        backend = args_backend(args, setup, "SVD_BACKEND")
        spec = parse_space(args.space)
        before, after = schatten_norm(V, spec, backend), schatten_norm(TV, spec, backend)
        payload.update({"space": str(spec), "norm_in": before, "norm_out": after, "ratio": after / before if before else 0.0})
        frame = pd.DataFrame([{k: payload[k] for k in ("space", "norm_in", "norm_out", "ratio")}])
    _emit(payload, args, frame)
    return EXIT_OK


def run_svd(args, setup):
    A = read_input(args.input)
    if not isinstance(A, MatrixOp):
        raise UnsupportedNormError("svd takes a matrix")
    backend = args_backend(args, setup, "SVD_BACKEND")
    sigma = A.singular_values(backend)
    payload = {"backend": backend, "singular_values": sigma, "residual": svd_residual(A, backend)}
    _emit(payload, args, _values_frame("sigma", sigma, "k"))
    return EXIT_OK


def run_doi(args, setup):
    A = read_input(args.input)
    if not isinstance(A, MatrixOp):
        raise UnsupportedNormError("doi takes a matrix")
    f = parse_lipschitz(args.function)
    backend = args_backend(args, setup, "EIGH_BACKEND")
    if args.commutator is not None:
        B = read_input(args.commutator)
        report = lipschitz_commutator_check(A, B, f, args.space_e, args.space_f, backend)
        payload = report.to_dict()
        _emit(payload, args, pd.DataFrame([{k: v for k, v in payload.items() if k != "spectrum"}]))
        return EXIT_OK if report.bound_holds is not False else EXIT_FAIL
    V = read_input(args.perturbation)
    result = doi_schur(A, f, V, backend)
    _emit({"function": f.name, "matrix": result.to_dict()}, args)
    return EXIT_OK


def run_fnorm(args, setup):
    x = read_input(args.input)
    params = setup["params"]
    depth = params.get("DYADIC_DEPTH", 20)
    if args.membership is not None:
        result = optimal_range_membership(args.membership, x, depth)
        payload = result.to_dict()
        _emit(payload, args, pd.DataFrame([{k: payload[k] for k in ("kind", "member", "constant", "slope")}]))
        return EXIT_OK
    if not isinstance(x, StepFunction):
        raise UnsupportedNormError("fnorm takes a step function")
    if args.construct:
        result = kolmogorov_construct(x, depth)
        _emit(result.to_dict(), args, pd.DataFrame({"breakpoint": result.y.breakpoints, "value": result.y.values}))
        return EXIT_OK if result.feasible else EXIT_FAIL
    result = fnorm_upper(
        x,
        args.space,
        depth=args.depth if args.depth is not None else params.get("FNORM_GRID_DEPTH", 2),
        solver=args.solver or params.get("LP_SOLVER", "bland"),
    )
    _emit(result.to_dict(), args, pd.DataFrame({"breakpoint": result.witness.breakpoints, "value": result.witness.values}))
    return EXIT_OK if result.certificate.feasible else EXIT_FAIL


def run_verify(args, setup):
    params, aliases = setup["params"], setup["aliases"]
    logger = logging.getLogger(__name__)
    if args.experiment.strip().lower() == "all":
        names = list(verify.EXPERIMENTS)
    else:
        names = [verify.resolve_experiment(args.experiment, aliases)]

    if args.seed is not None:
        seed = args.seed
        logger.info(f"seed {seed} (from --seed)")
    else:
        seed = int(params["SEED"])
        logger.info(f"seed {seed} (config default SEED)")

    reports = []
    for name in names:
        reports.append(verify.run_experiment(name, params, seed=seed, trials=args.trials, progress=args.progress))
    logger.info("summary\n" + summary_frame(reports).to_string(index=False))

    include_metadata = not args.compare_mode
    if args.csv:
        _emit(None, args, trials_frame(reports))
    elif args.out is not None:
        for path in save_reports(reports, args.out, include_metadata, seed=seed):
            logger.info(f"wrote {path}")
    else:
        _emit(report_payload(reports, seed, include_metadata), args)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


HANDLERS = {
    "rearrange": run_rearrange,
    "norm": run_norm,
    "apply": run_apply,
    "truncate": run_truncate,
    "svd": run_svd,
    "doi": run_doi,
    "fnorm": run_fnorm,
    "verify": run_verify,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        validate_arguments(args, parser)
    except SystemExit as exit_:
        return EXIT_OK if exit_.code in (0, None) else EXIT_USAGE

    setup = None
    try:
        overrides = read_key_value_file(args.config) if args.config else []
        overrides += args.override or []
        setup = get_setup(run_name=args.command, overrides=overrides, log_to_file=args.log_file)
        return HANDLERS[args.command](args, setup)
    except (ValueError, KeyError, OSError) as err:
        message = err.args[0] if isinstance(err, KeyError) and err.args else err
        print(f"calderon {args.command}: error: {message}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as err:
        print(f"calderon {args.command}: numerical failure: {err}", file=sys.stderr)
        return EXIT_USAGE
    finally:
        if setup is not None:
            root = logging.getLogger()
            for handler in setup["handlers"]:
                root.removeHandler(handler)
                handler.close()


if __name__ == "__main__":
    sys.exit(main())

"""
bilistab command line.

    python -m src.main catalog list
    python -m src.main experiment cmm --n 64 --trials 10 --output results/cmm.csv
"""

import argparse
import json
import logging
import math
import os
import sys
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src import settings, summarize_results
from src.log import get_logger, setup_logging
from src.Objects.BilinearDecomposition import (
    BilinearDecomposition,
    growth_factor,
    growth_factor_decimal,
    verify_decomposition,
)
from src.Objects.Errors import EXIT_FAILURE, EXIT_OK, BilistabError, ContractViolation, exit_code_for
from src.Objects.ExperimentConfig import ExperimentConfig, ExperimentKind, default_kappas
from src.Objects.ExperimentMetrics import ExperimentMetrics
from src.Objects.ComplexMatrix import ComplexMatrix
from src.Services import Catalog, ErrorBounds, Experiments, MatrixGen

logger = get_logger("CLI")

_EXPERIMENTS = {
    "fmm": ExperimentKind.FMM_ACCURACY,
    "cmm": ExperimentKind.CMM_ACCURACY,
    "horner": ExperimentKind.HORNER,
    "unitary": ExperimentKind.UNITARY,
    "cnn": ExperimentKind.CNN,
    "scalar": ExperimentKind.SCALAR_BOUNDS,
    "asymmetry": ExperimentKind.GAUSS_ASYMMETRY,
}
_BENCH = {"speed": ExperimentKind.CMM_SPEED, "accuracy": ExperimentKind.CMM_ACCURACY}

SCALAR_PAIRS = 100_000


# ---------------------------------------------------------------------------
# Argument parsing helpers
# ---------------------------------------------------------------------------


def parse_kappa(text: str) -> int:
    """'2^40', '1099511627776' or '1e12'"""
    text = text.strip()
    try:
        if "^" in text:
            base, expo = text.split("^", 1)
            return int(base) ** int(expo)
        if "e" in text.lower():
            return int(float(text))
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid kappa '{text}'") from None


def parse_int_list(text: str) -> Tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'") from None


def parse_name_list(text: str) -> Tuple[str, ...]:
    return tuple(x.strip() for x in text.split(",") if x.strip())


def kappa_sweep(kappa_min: Optional[int], kappa_max: Optional[int], step: int = 4) -> Tuple[int, ...]:
    """
    kappa_min, kappa_min*step, ... then kappa_max itself; a point closer than a factor
    of step below kappa_max is dropped, so 2^34..2^53 gives the default sweep.
    """
    if kappa_min is None and kappa_max is None:
        return default_kappas()
    lo = kappa_min if kappa_min is not None else min(default_kappas())
    hi = kappa_max if kappa_max is not None else max(default_kappas())
    if lo < 2:
        raise ContractViolation(f"kappa-min must be >= 2, got {lo}")
    if lo > hi:
        raise ContractViolation(f"kappa-min {lo} exceeds kappa-max {hi}")
    out = []
    k = lo
    while k < hi and k * step <= hi:
        out.append(k)
        k *= step
    out.append(hi)
    return tuple(out)


def _global_options(parser: argparse.ArgumentParser, suppress: bool) -> None:
    # subcommands repeat the global flags; SUPPRESS keeps them from clobbering values given earlier
    default = (lambda value: argparse.SUPPRESS) if suppress else (lambda value: value)
    parser.add_argument("--output", "-o", default=default(None), help="Output file (directory for summarize)")
    parser.add_argument("--format", dest="fmt", choices=["csv", "json"], default=default("csv"))
    parser.add_argument("--verbose", "-v", action="store_true", default=default(False))
    parser.add_argument("--quiet", "-q", action="store_true", default=default(False))


def _source_options(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--builtin", help=f"One of {', '.join(Catalog.BUILTIN_NAMES)} or conventional_mm(m,n,p)")
    group.add_argument("--file", help="Decomposition JSON file")


def _run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--algo", type=parse_name_list, default=None, help="Comma-separated algorithms")
    parser.add_argument("--n", type=parse_int_list, default=None, help="Comma-separated sizes")
    parser.add_argument("--kappa-min", type=parse_kappa, default=None)
    parser.add_argument("--kappa-max", type=parse_kappa, default=None)
    parser.add_argument("--trials", type=int, default=None)
    parser.add_argument("--seed", type=int, default=settings.DEFAULT_SEED)
    parser.add_argument("--cutoff", type=int, default=None)
    parser.add_argument("--backend", choices=["conventional", "strassen", "winograd"], default="conventional")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    _global_options(common, suppress=True)

    parser = argparse.ArgumentParser(prog="bilistab", description="Bilinear algorithm stability toolkit")
    _global_options(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    # catalog
    p = sub.add_parser("catalog", parents=[common], help="Built-in decompositions")
    csub = p.add_subparsers(dest="action", required=True)
    q = csub.add_parser("list", parents=[common])
    q.add_argument("--json", action="store_true")
    q = csub.add_parser("show", parents=[common])
    q.add_argument("name")
    q.add_argument("--json", action="store_true")

    # growth-factor / verify
    p = sub.add_parser("growth-factor", parents=[common], help="Growth factor of a decomposition")
    _source_options(p)
    p.add_argument("--digits", type=int, default=30)
    p = sub.add_parser("verify", parents=[common], help="Exact check against the reference tensor")
    _source_options(p)
    p.add_argument("--tensor", default=None, help="'complex' or 'matmul:m,n,p'; inferred from dims by default")

    # bounds
    p = sub.add_parser("bounds", parents=[common], help="Closed-form forward error bounds")
    p.add_argument("--thm", choices=["main", "corollary", "new", "gauss", "regular"], required=True)
    p.add_argument("--builtin", default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--r", type=int, default=None)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--norm-u", type=float, default=1.0)
    p.add_argument("--norm-v", type=float, default=1.0)
    p.add_argument("--u", type=float, default=settings.UNIT_ROUNDOFF)
    p.add_argument("--x", default=None, help="Left complex matrix (text format)")
    p.add_argument("--y", default=None, help="Right complex matrix (text format)")
    p.add_argument("--theta", type=float, default=1.0, help="Entry magnitude for the asymptotic comparison")

    # bench
    p = sub.add_parser("bench", parents=[common], help="Complex matrix multiplication speed/accuracy")
    p.add_argument("mode", choices=sorted(_BENCH))
    _run_options(p)

    # experiment
    p = sub.add_parser("experiment", parents=[common], help="Seeded accuracy experiments")
    p.add_argument("name", choices=sorted(_EXPERIMENTS))
    _run_options(p)
    p.add_argument("--dist", choices=["uniform", "normal", "complex"], default="uniform")
    p.add_argument("--degree", type=int, default=settings.HORNER_DEGREE)
    p.add_argument("--depth", type=int, default=settings.CNN_DEPTH)
    p.add_argument("--batch", type=int, default=None)
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--timing-only", action="store_true")
    p.add_argument("--identity-transform", action="store_true")

    # gen
    p = sub.add_parser("gen", parents=[common], help="Export a generated matrix")
    p.add_argument("kind", choices=["conditioned", "conditioned-complex", "hadamard", "unitary"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--kappa", type=parse_kappa, default=2 ** 20)
    p.add_argument("--seed", type=int, default=settings.DEFAULT_SEED)
    p.add_argument("--allow-rounding", action="store_true", help="Accept entries rounded to double")

    # summarize
    p = sub.add_parser("summarize", parents=[common], help="Summarise result CSV files")
    p.add_argument("files", nargs="*")

    return parser


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _print_json(payload) -> None:
    print(json.dumps(payload, indent=2))


def _load_source(args) -> Tuple[BilinearDecomposition, Optional[Catalog.CatalogEntry]]:
    if args.builtin:
        entry = Catalog.get_builtin(args.builtin)
        return entry.decomposition, entry
    logger.debug(f"Loading decomposition from {args.file}")
    return BilinearDecomposition.load(args.file), None


def cmd_catalog(args) -> int:
    if args.action == "list":
        rows = Catalog.catalog_constants()
        if args.json:
            _print_json(rows)
            return EXIT_OK
        print(f"{'name':<20}{'r':>4}{'growth factor':>18}  {'closed form':<28}{'nuclear norm':>14}")
        for row in rows:
            print(
                f"{row['name']:<20}{row['r']:>4}{row['growth_factor']:>18.12f}  "
                f"{row['closed_form']:<28}{str(row['nuclear_norm']):>14}"
            )
        return EXIT_OK

    entry = Catalog.get_builtin(args.name)
    D = entry.decomposition
    if args.json:
        print(D.to_json())
        return EXIT_OK
    print(f"{D.name}: dims={D.dims} r={D.rank}")
    print(f"  growth factor  {growth_factor(D):.15g} (closed form {entry.closed_form_growth})")
    nuclear = entry.known_nuclear_norm
    print(f"  nuclear norm   {nuclear if nuclear is not None else 'unknown'}")
    for i, t in enumerate(D.terms, 1):
        print(f"  term {i}: u={[str(c) for c in t.u]} v={[str(c) for c in t.v]} w={[str(c) for c in t.w]}")
    return EXIT_OK


def cmd_growth_factor(args) -> int:
    D, entry = _load_source(args)
    payload = {
        "name": D.name,
        "dims": list(D.dims),
        "r": D.rank,
        "growth_factor": growth_factor(D),
        "growth_factor_decimal": str(growth_factor_decimal(D, args.digits)),
    }
    if entry is not None:
        payload["closed_form"] = entry.closed_form_growth
    _print_json(payload)
    return EXIT_OK


def _matmul_dims(dims: Sequence[int]) -> Optional[Tuple[int, int, int]]:
    # (mn, np, mp) -> (m, n, p)
    a, b, c = dims
    m = math.isqrt(a * c // b) if b else 0
    if m < 1 or a % m or c % m:
        return None
    n, p = a // m, c // m
    return (m, n, p) if (m * n, n * p, m * p) == tuple(dims) else None


def _reference_tensor(D: BilinearDecomposition, spec: Optional[str]):
    if spec == "complex" or (spec is None and D.dims == (2, 2, 2)):
        return Catalog.complex_mult_tensor()
    if spec is not None:
        if not spec.startswith("matmul:"):
            raise ContractViolation(f"unknown tensor '{spec}'; use 'complex' or 'matmul:m,n,p'")
        try:
            m, n, p = parse_int_list(spec.split(":", 1)[1])
        except (argparse.ArgumentTypeError, ValueError):
            raise ContractViolation(f"bad tensor '{spec}'; use 'matmul:m,n,p'") from None
        return Catalog.matmul_tensor(m, n, p)
    shape = _matmul_dims(D.dims)
    if shape is None:
        raise ContractViolation(f"cannot infer a reference tensor for dims {D.dims}; pass --tensor")
    return Catalog.matmul_tensor(*shape)


def cmd_verify(args) -> int:
    D, entry = _load_source(args)
    ok = entry.verify() if entry is not None and args.tensor is None else verify_decomposition(
        D, _reference_tensor(D, args.tensor)
    )
    _print_json({"name": D.name, "dims": list(D.dims), "r": D.rank, "verified": ok})
    return EXIT_OK if ok else EXIT_FAILURE


def _load_complex(path: str) -> ComplexMatrix:
    M = MatrixGen.load_matrix_text(path)
    return M if isinstance(M, ComplexMatrix) else ComplexMatrix.real(M)


def cmd_bounds(args) -> int:
    u = ErrorBounds.UnitRoundoff(args.u)
    if args.thm in ("main", "corollary"):
        if args.thm == "corollary":
            if not args.builtin:
                raise ContractViolation("--thm corollary needs --builtin")
            report = ErrorBounds.corollary_bound(Catalog.get_builtin(args.builtin), args.norm_u, args.norm_v, u)
        elif args.builtin:
            D = Catalog.get_builtin(args.builtin).decomposition
            m, n, _ = D.dims
            gamma = args.gamma if args.gamma is not None else growth_factor(D)
            report = ErrorBounds.thm_main_bound(m, n, D.rank, gamma, args.norm_u, args.norm_v, u)
        else:
            missing = [k for k in ("m", "n", "r", "gamma") if getattr(args, k) is None]
            if missing:
                raise ContractViolation(f"--thm main needs --builtin or all of --m --n --r --gamma (missing {missing})")
            report = ErrorBounds.thm_main_bound(args.m, args.n, args.r, args.gamma, args.norm_u, args.norm_v, u)
        _print_json(report.to_dict())
        return EXIT_OK

    if args.x and args.y:
        X, Y = _load_complex(args.x), _load_complex(args.y)
        real, imag = ErrorBounds.bound_for_product(args.thm, X.re, X.im, Y.re, Y.im, u)
        report = ErrorBounds.BoundReport(
            max(float(real.max()), float(imag.max())),
            inputs={
                "scheme": args.thm,
                "n": X.cols,
                "real_max": float(real.max()),
                "imag_max": float(imag.max()),
                "u": u.u,
            },
        )
        _print_json(report.to_dict())
        return EXIT_OK

    if args.n is None:
        raise ContractViolation(f"--thm {args.thm} needs --x/--y matrix files or --n for the asymptotic comparison")
    terms = ErrorBounds.asymptotic_compare(args.n, args.theta, u)
    picked = {k: v for k, v in terms.items() if k.startswith(args.thm)}
    if not picked:
        raise ContractViolation(f"no asymptotic comparison for --thm {args.thm}; pass --x/--y for its entrywise bound")
    _print_json({"n": args.n, "theta": args.theta, "u": u.u, "asymptotic": picked})
    return EXIT_OK


def _default_sizes(kind: ExperimentKind) -> Tuple[int, ...]:
    if kind is ExperimentKind.FMM_ACCURACY:
        return settings.FMM_SIZES
    if kind is ExperimentKind.CNN:
        return tuple(n for _, n in settings.CNN_SHAPES)
    if kind is ExperimentKind.SCALAR_BOUNDS:
        return (1,)
    return (64,)


def _default_trials(kind: ExperimentKind) -> int:
    return SCALAR_PAIRS if kind is ExperimentKind.SCALAR_BOUNDS else settings.DEFAULT_TRIALS


def build_config(kind: ExperimentKind, args, n: int) -> ExperimentConfig:
    cutoff = args.cutoff
    if cutoff is None:
        cutoff = settings.ACCURACY_CUTOFF if kind is ExperimentKind.FMM_ACCURACY else settings.DEFAULT_CUTOFF
    batch = getattr(args, "batch", None)
    if batch is None:
        batch = dict((size, b) for b, size in settings.CNN_SHAPES).get(n, settings.CNN_SHAPES[0][0])
    return ExperimentConfig(
        experiment=kind,
        n=n,
        trials=args.trials if args.trials is not None else _default_trials(kind),
        kappa_list=kappa_sweep(args.kappa_min, args.kappa_max),
        seed=args.seed,
        algos=args.algo or (),
        cutoff=cutoff,
        backend=args.backend,
        output=args.output,
        fmt=args.fmt,
        dist=getattr(args, "dist", "uniform"),
        degree=getattr(args, "degree", settings.HORNER_DEGREE),
        depth=getattr(args, "depth", settings.CNN_DEPTH),
        batch=batch,
        normalize=getattr(args, "normalize", False),
        timing_only=getattr(args, "timing_only", False),
        identity_transform=getattr(args, "identity_transform", False),
    )


def _default_output(kind: ExperimentKind, fmt: str) -> str:
    return os.path.join(settings.RESULTS_DIR, f"{kind.value}.{fmt}")


def run_and_save(kind: ExperimentKind, args) -> int:
    sizes = args.n or _default_sizes(kind)
    # validate every size before the first (possibly long) run
    configs = [build_config(kind, args, n) for n in sizes]
    metrics = ExperimentMetrics(configs[0].to_dict())
    for cfg in configs:
        metrics.extend(Experiments.run_experiment(cfg))

    output = args.output or _default_output(kind, args.fmt)
    metrics.save(output, args.fmt)
    logger.info(f"Saved {len(metrics.records)} records to {output}")
    if not args.quiet:
        metrics.print_metrics(kind.value)
    if metrics.bound_violations:
        logger.warning(f"{len(metrics.bound_violations)} record(s) exceed their bound")
    return EXIT_OK


def cmd_bench(args) -> int:
    return run_and_save(_BENCH[args.mode], args)


def cmd_experiment(args) -> int:
    return run_and_save(_EXPERIMENTS[args.name], args)


def cmd_gen(args) -> int:
    strict = not args.allow_rounding
    if args.kind == "conditioned":
        M = MatrixGen.gen_conditioned(MatrixGen.ConditionedSpec(args.n, args.kappa, args.seed), strict)
    elif args.kind == "conditioned-complex":
        M = MatrixGen.gen_conditioned_complex(args.n, args.kappa, args.seed, strict)
    elif args.kind == "hadamard":
        M = MatrixGen.gen_hadamard(args.n, args.seed).astype(np.float64)
    else:
        M = MatrixGen.gen_unitary(args.n, args.seed)
    output = args.output or os.path.join(settings.RESULTS_DIR, f"{args.kind}_n{args.n}_seed{args.seed}.txt")
    directory = os.path.dirname(output)
    if directory:
        os.makedirs(directory, exist_ok=True)
    MatrixGen.save_matrix_text(output, M)
    logger.info(f"Wrote {args.kind} matrix n={args.n} to {output}")
    return EXIT_OK


def cmd_summarize(args) -> int:
    return summarize_results.main(args.files, args.output)


_COMMANDS = {
    "catalog": cmd_catalog,
    "growth-factor": cmd_growth_factor,
    "verify": cmd_verify,
    "bounds": cmd_bounds,
    "bench": cmd_bench,
    "experiment": cmd_experiment,
    "gen": cmd_gen,
    "summarize": cmd_summarize,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    # usage errors exit with status 2 from argparse itself
    args = parser.parse_args(argv)

    level = logging.INFO
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    setup_logging(level)

    try:
        return _COMMANDS[args.command](args)
    except BilistabError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return exit_code_for(e)
    except OSError as e:
        logger.error(f"{e}")
        return EXIT_FAILURE
    except KeyboardInterrupt:
        logger.warning("Interrupted by user")
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())

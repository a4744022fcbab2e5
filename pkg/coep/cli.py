import argparse
import json
import logging
import os
import re
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd

from coep.audit_suites import (
    COEFFICIENT_SUITES,
    MAX_DIMENSION,
    Suite,
    build_instance,
    build_population,
    run_suite,
)
from coep.classification import classify
from coep.errors import (
    ContractError,
    InvalidInputError,
    MatrixFileError,
    NumericalError,
    PreconditionError,
    ShapeError,
    SingularityError,
    UnsupportedNormError,
)
from coep.generators import InstanceClass, gen_ep, gen_random_mp, generate
from coep.linalg_core import DEFAULT_TOLERANCES, ToleranceConfig, euclidean_norm
from coep.matrix_io import MatrixParser, dumps_matrix, encode_matrix, write_matrix
from coep.norm_types import NormSpec
from coep.perturbation import perturbation_sweep
from coep.pseudoinverse import (
    mp_inverse_euclidean,
    mp_rank_factorization,
    mp_search_diagonalizable,
    mp_verify,
)
from coep.reports import json_ready

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NEGATIVE = 2
EXIT_USAGE = 64
EXIT_NUMERICAL = 70

OUTPUT_EXTENSIONS = (".csv", ".tsv", ".json", ".xlsx")
DEFAULT_EPS_GRID = "0.1,0.2,0.4,0.49"
_REAL = r"(\d+(\.\d*)?|\.\d+)([eE][-+]?\d+)?"
NEGATIVE_NUMBER = re.compile(rf"^-{_REAL}([-+]{_REAL})?[jJ]?$")


class CoEPArgumentParser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 64.

    Negative complex literals such as ``-3j`` or ``-1+2j`` are read as values,
    not option flags.
    """

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self._negative_number_matcher = NEGATIVE_NUMBER

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_dims(text: str):
    try:
        if ".." in text:
            low, high = (int(part) for part in text.split("..", 1))
        else:
            low = high = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a..b, got '{text}'")
    if not 1 <= low <= high <= MAX_DIMENSION:
        raise argparse.ArgumentTypeError(f"dimension range must lie within 1..{MAX_DIMENSION}")
    return low, high


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got '{text}'")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def parse_norm(text: str) -> NormSpec:
    try:
        return NormSpec.parse(text)
    except InvalidInputError as e:
        raise argparse.ArgumentTypeError(str(e))


def parse_eps_grid(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'")


def tolerances_from_args(args) -> ToleranceConfig:
    return DEFAULT_TOLERANCES.with_overrides(
        rank_tol=args.tol_rank,
        residual_tol=args.tol_residual,
        invertibility_tol=args.tol_invert,
        hermitian_tol=args.tol_hermitian,
        subspace_tol=args.tol_subspace,
    )


def save_rows(rows: List[Dict[str, Any]], output_file: str) -> None:
    output_ext = Path(output_file).suffix.lower()
    if output_ext not in OUTPUT_EXTENSIONS:
        raise InvalidInputError("Output file must have .csv, .tsv, .json, or .xlsx extension")

    df = pd.DataFrame(rows)
    if output_ext == ".csv":
        df.to_csv(output_file, index=False)
    elif output_ext == ".tsv":
        df.to_csv(output_file, sep="\t", index=False)
    elif output_ext == ".json":
        df.to_json(output_file, orient="records")
    elif output_ext == ".xlsx":
        df.to_excel(output_file, index=False)
    logger.info("Results saved to %s", output_file)


def emit(args, payload: Dict[str, Any], rows: List[Dict[str, Any]]) -> None:
    if args.table:
        print(pd.DataFrame(rows).to_string(index=False))
    else:
        print(json.dumps(payload, sort_keys=True, indent=2))
    if args.out:
        save_rows(rows, args.out)


def read_matrix(path: str):
    return MatrixParser().parse_file(path)


def cmd_mp(args) -> int:
    cfg = tolerances_from_args(args)
    a = read_matrix(args.input)
    norm = args.norm
    payload: Dict[str, Any] = {"norm": norm.to_dict(), "tolerances": cfg.to_dict()}

    if args.candidate:
        inverse = read_matrix(args.candidate)
        certificate = mp_verify(a, inverse, norm, cfg)
    elif norm.is_euclidean:
        inverse, certificate = mp_inverse_euclidean(a, cfg)
        payload["uniqueness_distance"] = euclidean_norm(inverse - mp_rank_factorization(a, cfg))
    else:
        search = mp_search_diagonalizable(a, norm, cfg)
        payload["candidates_tried"] = search.candidates_tried
        payload["witness"] = search.witness
        payload["search_family"] = search.family
        inverse, certificate = search.inverse, search.certificate

    payload["found"] = inverse is not None
    payload["inverse"] = encode_matrix(inverse) if inverse is not None else None
    payload["certificate"] = certificate.to_dict() if certificate is not None else None
    valid = certificate is not None and certificate.valid
    row = {"found": inverse is not None, "valid": valid}
    if certificate is not None:
        row.update(residual_axa=certificate.residual_axa, residual_xax=certificate.residual_xax)
    emit(args, json_ready(payload), [row])
    return EXIT_OK if valid else EXIT_NEGATIVE


def cmd_classify(args) -> int:
    cfg = tolerances_from_args(args)
    a = read_matrix(args.input)
    a_dag = read_matrix(args.candidate) if args.candidate else None
    report = classify(a, args.norm, cfg, a_dag=a_dag)
    row = {
        "is_mp_invertible": report.is_mp_invertible,
        "ep": report.ep,
        "co_ep": report.co_ep,
        "bi_ep": report.bi_ep,
        "hermitian_co_ep": report.hermitian_co_ep,
    }
    emit(args, report.to_dict(), [row])
    return EXIT_OK if report.is_mp_invertible else EXIT_NEGATIVE


def cmd_audit(args) -> int:
    cfg = tolerances_from_args(args)
    if not args.norm.is_euclidean:
        raise UnsupportedNormError("Audit populations carry Euclidean Moore-Penrose inverses; use --norm l2")
    suite = Suite(args.suite)
    coefficients = None
    if args.lam is not None or args.mu is not None:
        if suite not in COEFFICIENT_SUITES:
            raise InvalidInputError(f"--lam/--mu do not apply to suite {suite.value}")
        coefficients = [(args.lam if args.lam is not None else 1, args.mu if args.mu is not None else 1)]
        if 0 in coefficients[0]:
            raise InvalidInputError("λ and μ must be nonzero")

    if args.index is not None:
        population = [build_instance(args.index, args.seed, args.dims)]
    else:
        population = build_population(args.count, args.seed, args.dims)
    summary = run_suite(
        suite,
        population,
        cfg,
        coefficients,
        workers=args.workers,
        progress=not args.no_progress,
        seed=args.seed,
        dims=args.dims,
    )
    payload = summary.to_dict(verbose=args.index is not None)
    payload["tolerances"] = cfg.to_dict()
    emit(args, payload, summary.rows())
    return EXIT_OK if summary.all_agree else EXIT_NEGATIVE


def cmd_perturb(args) -> int:
    cfg = tolerances_from_args(args)
    a = read_matrix(args.input)
    norm = args.norm
    if norm.is_euclidean:
        a_dag, _ = mp_inverse_euclidean(a, cfg)
    else:
        search = mp_search_diagonalizable(a, norm, cfg)
        if not search.found:
            emit(args, {"found": False, "witness": search.witness}, [{"found": False}])
            return EXIT_NEGATIVE
        a_dag = search.inverse

    reports = perturbation_sweep(a, a_dag, args.eps, args.seed, norm, cfg)
    rows = [report.to_row() for report in reports]
    payload = {
        "norm": norm.to_dict(),
        "seed": args.seed,
        "tolerances": cfg.to_dict(),
        "all_hold": all(report.all_hold for report in reports),
        "rows": [report.to_dict() if args.verbose else report.to_row() for report in reports],
    }
    emit(args, payload, rows)
    return EXIT_OK if payload["all_hold"] else EXIT_NEGATIVE


def cmd_gen(args) -> int:
    kind = InstanceClass(args.kind)
    if args.rank is not None and kind == InstanceClass.EP:
        a = gen_ep(args.dim, args.seed, args.rank)
    elif args.rank is not None and kind == InstanceClass.RANDOM:
        a = gen_random_mp(args.dim, args.seed, args.rank)
    elif args.rank is not None:
        raise InvalidInputError(f"--rank does not apply to class {kind.value}")
    else:
        a = generate(kind, args.dim, args.seed)
    if args.out:
        write_matrix(a, args.out)
        logger.info("Matrix saved to %s", args.out)
    else:
        print(dumps_matrix(a))
    return EXIT_OK


def add_common_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--norm", type=parse_norm, default=NormSpec.l2(), help="l1, l2, linf or lp:<p>")
    parser.add_argument("--tol-rank", type=float, help="Relative singular-value threshold for rank decisions")
    parser.add_argument("--tol-residual", type=float, help="Residual tolerance")
    parser.add_argument("--tol-invert", type=float, help="Reciprocal-condition threshold for invertibility")
    parser.add_argument("--tol-hermitian", type=float, help="Hermitian defect tolerance")
    parser.add_argument("--tol-subspace", type=float, help="Largest principal-angle sine accepted as inclusion")
    output = parser.add_mutually_exclusive_group()
    output.add_argument("--json", action="store_true", help="JSON output (default)")
    output.add_argument("--table", action="store_true", help="Human-readable table output")
    parser.add_argument("--out", help="Also save rows to a file (CSV/TSV/JSON/XLSX)")


def build_parser() -> argparse.ArgumentParser:
    parser = CoEPArgumentParser(
        prog="coep",
        description="Moore-Penrose inverses, co-EP classification and equivalence audits for complex matrices.",
    )
    parser.add_argument(
        "--log-level",
        default=os.environ.get("COEP_LOG_LEVEL", "WARNING"),
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        type=str.upper,
        help="Logging level (default from COEP_LOG_LEVEL, else WARNING)",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    mp = commands.add_parser("mp", help="Compute or verify a Moore-Penrose inverse")
    mp.add_argument("input", help="Path to a matrix file")
    mp.add_argument("--candidate", help="Matrix file holding a candidate inverse to verify")
    add_common_arguments(mp)
    mp.set_defaults(handler=cmd_mp)

    classify_parser = commands.add_parser("classify", help="Classify an element as EP, co-EP, bi-EP, hermitian co-EP")
    classify_parser.add_argument("input", help="Path to a matrix file")
    classify_parser.add_argument("--candidate", help="Matrix file holding the Moore-Penrose inverse to use")
    add_common_arguments(classify_parser)
    classify_parser.set_defaults(handler=cmd_classify)

    audit = commands.add_parser("audit", help="Audit a characterization over a seeded instance population")
    audit.add_argument("suite", choices=[suite.value for suite in Suite])
    audit.add_argument("--seed", type=int, default=0)
    audit.add_argument("--count", type=positive_int, default=100)
    audit.add_argument("--dims", type=parse_dims, default=(2, 6), help="Dimension range a..b within 1..16")
    audit.add_argument("--index", type=int, help="Replay a single instance of the population")
    audit.add_argument("--lam", type=complex, help="Fixed λ instead of random pairs")
    audit.add_argument("--mu", type=complex, help="Fixed μ instead of random pairs")
    audit.add_argument("--workers", type=positive_int, default=1)
    audit.add_argument("--no-progress", action="store_true", help="Hide the progress bar")
    add_common_arguments(audit)
    audit.set_defaults(handler=cmd_audit)

    perturb = commands.add_parser("perturb", help="Sweep condition-(P) perturbations over an eps grid")
    perturb.add_argument("input", help="Path to a matrix file")
    perturb.add_argument("--eps", type=parse_eps_grid, default=parse_eps_grid(DEFAULT_EPS_GRID))
    perturb.add_argument("--seed", type=int, default=0)
    perturb.add_argument("--verbose", action="store_true", help="Include b and b† in every row")
    add_common_arguments(perturb)
    perturb.set_defaults(handler=cmd_perturb)

    gen = commands.add_parser("gen", help="Print a generated instance in the matrix file format")
    gen.add_argument("kind", choices=[kind.value for kind in InstanceClass])
    gen.add_argument("--dim", type=positive_int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--rank", type=int, help="Rank for the ep and random classes")
    gen.add_argument("--out", help="Write the matrix file here instead of stdout")
    gen.set_defaults(handler=cmd_gen)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level, logging.WARNING),
        stream=sys.stderr,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )

    try:
        return args.handler(args)
    except (MatrixFileError, InvalidInputError, ShapeError, UnsupportedNormError) as e:
        logger.error(str(e))
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ContractError, PreconditionError) as e:
        logger.error(str(e))
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_NEGATIVE
    except (NumericalError, SingularityError) as e:
        logger.error(f"Numerical failure: {str(e)}")
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL

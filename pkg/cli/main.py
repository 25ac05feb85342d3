"""Command-line entry point: `frel constants|sweep|verify|dual|quotient1d`."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections.abc import Callable
from fractions import Fraction
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from cli.config import RunConfig
from cli.errors import ExitCode, exit_code_for, payload_for
from cli.observability import configure_logging
from frel.analysis.constants import compute_constants, default_beta_grid, rellich_constant, sweep_family
from frel.analysis.finsler import build_norm_table, dual_table_columns
from frel.analysis.geometry import AnyDomain
from frel.analysis.rellich1d import quotient_closed_form, quotient_numeric
from frel.analysis.verify import (
    bump,
    remark_bounds_check,
    symbol_duality_check,
    verify_convex,
    verify_halfspace,
)
from frel.errors import AnalysisError, DomainError, ErrorCode, SymbolError
from frel.models.bumps import TestFunction
from frel.models.domains import ConvexPolytope, HalfSpace, domain_preset, load_domain, parse_vector
from frel.models.polynomial import SymbolPolynomial
from frel.models.reports import QuotientPoint, SweepRow
from frel.models.types import FAMILY_COLLAPSE_BETA
from frel.utils.grammar import parse_polynomial
from frel.utils.svg import sweep_svg
from frel.utils.tables import dual_table_csv, models_csv, report_json, sweep_csv, write_text

logger = logging.getLogger(__name__)

FAILURE_DUMP = "frel-verify-failure.json"
BOX_DENOMINATOR_LIMIT = 10**6

SWEEP_LABELS = {
    "example1": ("s(beta)", "c(beta)"),
    "example2": ("s_hat(beta)", "c_hat(beta)"),
    "custom": ("s(b)", "c(b)"),
}


def _key_value(text: str) -> tuple[str, str]:
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    name, value = text.split("=", 1)
    return name.strip(), value.strip()


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _float_list(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
    common.add_argument("--symbol", help='Symbol polynomial, e.g. "x1^4 + 2*x1^2*x2^2 + x2^4"')
    common.add_argument("--family", help="example1, example2 or custom")
    common.add_argument("--param", action="append", type=_key_value, dest="params", help="Parameter binding k=v")
    common.add_argument("--grid", type=int, dest="grid_points", help="Starting number of table directions")
    common.add_argument("--max-grid", type=int, dest="max_grid_points", help="Largest table size")
    common.add_argument("--grid-tol", type=float, help="Moment agreement required between table sizes")
    common.add_argument("--tol", type=float, help="Optimization tolerance (quadrature tolerance for verify)")
    common.add_argument("--seed", type=int)
    common.add_argument("--workers", type=int)
    common.add_argument("--out", help="Output file (stdout when omitted)")
    common.add_argument("--format", choices=["json", "csv"])
    common.add_argument("--log-level")
    common.add_argument("--log-json", action="store_true")
    common.add_argument("--log-file")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="frel",
        description="Finsler-Rellich constants, sweeps and numerical verification for elliptic operator symbols.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    common = _common_parser()

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        return subparsers.add_parser(name, parents=[common], help=help_text, argument_default=argparse.SUPPRESS)

    add("constants", "lambda, Lambda, mu, M, A(m), s and c for one symbol")

    sweep = add("sweep", "s and c over a log-spaced parameter grid")
    sweep.add_argument("--points", type=int, dest="sweep_points")
    sweep.add_argument("--beta-min", type=float)
    sweep.add_argument("--beta-max", type=float)
    sweep.add_argument("--no-collapse", action="store_false", dest="include_collapse")
    sweep.add_argument("--svg", help="Write an SVG plot of s (solid) and c (dashed)")

    verify = add("verify", "Check an inequality numerically")
    verify.add_argument("--domain", help="unit-square, box:x0,x1,y0,y1, halfspace:nx,ny or a JSON file")
    verify.add_argument("--halfspace", help="Inward normal nx,ny of a half-space through the origin")
    verify.add_argument("--box", help="Support box x0,x1,y0,y1 of the test function")
    verify.add_argument("--bump-extra", help="Polynomial factor multiplying the bump")
    verify.add_argument("--duality", action="store_true", help="Sample the pointwise duality inequality")
    verify.add_argument("--remark", action="store_true", help="Check the dual-norm sandwich bounds")
    verify.add_argument("--samples", type=int)
    verify.add_argument("--max-cells", type=int, dest="quad_max_cells")

    add("dual", "Dump F*, F** and F at the table angles")

    quotient = add("quotient1d", "One-dimensional trial quotient against A(m)")
    quotient.add_argument("--m", type=_int_list, help="Comma-separated half-orders")
    quotient.add_argument("--eps", type=_float_list, help="Comma-separated eps values")
    return parser


def _emit(config: RunConfig, text: str) -> None:
    if config.out:
        path = write_text(config.out, text)
        logger.info("Wrote %s", path)
    else:
        sys.stdout.write(text)


def cmd_constants(config: RunConfig) -> int:
    symbol = config.parsed_symbol()
    report = compute_constants(symbol, tol=config.opt_tol, grid=config.grid(), moment_tol=config.moment_tol)
    _emit(config, models_csv([report]) if config.format == "csv" else report_json(report))
    return ExitCode.OK


def _exit_code_for_rows(rows: list[SweepRow]) -> ExitCode:
    code = (rows[0].error or "").split(":", 1)[0]
    if code == ErrorCode.NOT_ELLIPTIC:
        return ExitCode.NOT_ELLIPTIC
    if code == ErrorCode.CONVERGENCE:
        return ExitCode.CONVERGENCE
    return ExitCode.PARSE


def cmd_sweep(config: RunConfig) -> int:
    family = config.family or "custom"
    template = None
    if family == "custom":
        if config.symbol is None:
            raise SymbolError("A custom sweep needs --symbol written in the parameter b", ErrorCode.UNBOUND_PARAMETER)
        template = config.symbol
    include: tuple[float, ...] = ()
    if config.include_collapse and family in FAMILY_COLLAPSE_BETA:
        include = (float(FAMILY_COLLAPSE_BETA[family]),)
    betas = default_beta_grid(config.sweep_points, config.beta_min, config.beta_max, include)
    rows = sweep_family(
        family,
        betas,
        config.grid(),
        config.opt_tol,
        template=template,
        workers=config.workers,
        moment_tol=config.moment_tol,
    )

    _emit(config, report_json(rows) if config.format == "json" else sweep_csv(rows))
    if config.svg:
        s_label, c_label = SWEEP_LABELS[family]
        write_text(config.svg, sweep_svg(rows, title=f"{family} sweep", s_label=s_label, c_label=c_label))

    failed = [row for row in rows if not row.ok]
    if failed:
        logger.warning("Sweep rows failed: %d of %d", len(failed), len(rows))
    if len(failed) == len(rows):
        return _exit_code_for_rows(rows)
    return ExitCode.OK


def _resolve_domain(config: RunConfig) -> AnyDomain:
    if config.halfspace:
        return HalfSpace.from_normal(parse_vector(config.halfspace))
    if config.domain:
        path = Path(config.domain)
        if path.suffix == ".json" or path.is_file():
            return load_domain(path)
        return domain_preset(config.domain)
    raise DomainError("verify needs one of --domain, --halfspace, --duality or --remark")


def _support_box(config: RunConfig, domain: AnyDomain) -> list[tuple[Fraction, Fraction]]:
    if config.box:
        try:
            values = [Fraction(part.strip()) for part in config.box.split(",")]
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"Cannot read support box from {config.box!r}") from exc
        if len(values) != 2 * domain.dimension:
            raise DomainError(f"Support box needs {2 * domain.dimension} numbers, got {len(values)}")
        return list(zip(values[0::2], values[1::2], strict=True))
    if isinstance(domain, HalfSpace):
        return [(Fraction(0), Fraction(1))] * domain.dimension
    vertices = domain.vertices()

    def snap(value: float) -> Fraction:
        return Fraction(value).limit_denominator(BOX_DENOMINATOR_LIMIT)

    return [(snap(lo), snap(hi)) for lo, hi in zip(vertices.min(axis=0), vertices.max(axis=0), strict=True)]


def _test_function(config: RunConfig, symbol: SymbolPolynomial, domain: AnyDomain) -> TestFunction:
    extra = None
    if config.bump_extra:
        extra = parse_polynomial(config.bump_extra, config.bindings(), dimension=symbol.dimension)
    return bump(_support_box(config, domain), symbol.m, extra)


def _failure_path(config: RunConfig) -> Path:
    directory = Path(config.out).parent if config.out else Path.cwd()
    return directory / FAILURE_DUMP


def cmd_verify(config: RunConfig) -> int:
    symbol = config.parsed_symbol()
    report: Any
    if config.duality:
        report = symbol_duality_check(symbol, samples=config.samples, seed=config.seed)
    elif config.remark:
        if config.family not in ("example1", "example2"):
            raise SymbolError("--remark needs --family example1 or example2", ErrorCode.SYNTAX)
        report = remark_bounds_check(config.family, float(config.beta()), points=config.grid_points)
    else:
        domain = _resolve_domain(config)
        test_function = _test_function(config, symbol, domain)
        table = build_norm_table(symbol, config.grid())
        check = verify_halfspace if isinstance(domain, HalfSpace) else verify_convex
        report = check(symbol, table, domain, test_function, config.quad_tol, config.quad_max_cells)
        report = report.model_copy(update={"seed": config.seed})

    text = report_json(report)
    if not report.passed:
        dump = write_text(_failure_path(config), text)
        logger.error("Verification failed; report written to %s", dump)
        sys.stdout.write(text)
        return ExitCode.VERIFY_FAILED
    _emit(config, text)
    return ExitCode.OK


def cmd_dual(config: RunConfig) -> int:
    symbol = config.parsed_symbol()
    table = build_norm_table(symbol, config.grid())
    if config.format == "json":
        _emit(config, table.to_json() + "\n")
    else:
        _emit(config, dual_table_csv(dual_table_columns(symbol, table)))
    return ExitCode.OK


def cmd_quotient1d(config: RunConfig) -> int:
    points = [
        QuotientPoint(
            m=m,
            eps=eps,
            closed_form=float(quotient_closed_form(m, eps)),
            numeric=quotient_numeric(m, eps),
            limit=rellich_constant(m),
        )
        for m in config.m
        for eps in config.eps
    ]
    _emit(config, models_csv(points) if config.format == "csv" else report_json(points))
    return ExitCode.OK


COMMANDS: dict[str, Callable[[RunConfig], int]] = {
    "constants": cmd_constants,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
    "dual": cmd_dual,
    "quotient1d": cmd_quotient1d,
}


def _fail(exc: BaseException) -> int:
    code = exit_code_for(exc)
    sys.stderr.write(json.dumps(payload_for(exc)) + "\n")
    return int(code)


def main(argv: list[str] | None = None) -> int:
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    config_path = args.pop("config", None)
    if "params" in args:
        args["params"] = dict(args["params"])
    if "tol" in args:
        args["quad_tol" if command == "verify" else "opt_tol"] = args.pop("tol")
    try:
        config = RunConfig.resolve(args, config_path)
        configure_logging(config.log_level, config.log_json, config.log_file)
        return int(COMMANDS[command](config))
    except (AnalysisError, ValidationError, ValueError, OSError) as exc:
        return _fail(exc)


if __name__ == "__main__":
    raise SystemExit(main())

"""Command-line entry point: ``fmr analyze|quantify|explain|verify-fmb``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass

from .catalog import BUILTIN_SEMANTICS, PRACTICAL, VARIANTS, Catalog, CatalogError, TableSyntaxError, load_fmb_tables
from .engine import AnalysisError, AnalysisOptions, backward_analyze
from .modes import ModeError, parse_mode
from .oracle import GridError, WitnessGrid, verify_fmb
from .program import ProgramError, load_program
from .quantify import INCLUSION_EXCLUSION, METHODS, FailureData, QuantError, aggregate
from .report import build_report, dumps_report, render_explain, render_text

EXIT_OK, EXIT_ERROR, EXIT_USAGE = 0, 1, 2

log = logging.getLogger("fmr")


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class Target:
    var: str
    mode: str
    label: str | None = None


def parse_target(text: str) -> tuple[str, str]:
    var, eq, mode = text.partition("=")
    if not eq or not var.strip() or not mode.strip():
        raise argparse.ArgumentTypeError(f"expected VAR=MODE, got {text!r}")
    return var.strip(), mode.strip()


def read_manifest(path: str) -> list[Target]:
    """One target per line, ``VAR=MODE [LABEL]``; ``#`` starts a comment."""
    targets = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            words = raw.split("#", 1)[0].split()
            if not words:
                continue
            if len(words) > 2:
                raise ProgramError("expected 'VAR=MODE [LABEL]'", lineno, 1)
            try:
                var, mode = parse_target(words[0])
            except argparse.ArgumentTypeError as exc:
                raise ProgramError(str(exc), lineno, 1) from None
            targets.append(Target(var, mode, words[1] if len(words) == 2 else None))
    if not targets:
        raise ProgramError("manifest lists no targets", 1, 1)
    return targets


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fmr", description="Failure mode reasoning for function block programs.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def analysis_args(sp, quant: bool):
        sp.add_argument("program", help="program file in fmrprog v1 format")
        sp.add_argument("--target", type=parse_target, metavar="VAR=MODE", help="output variable and failure mode")
        sp.add_argument("--manifest", metavar="FILE", help="file of targets, one 'VAR=MODE [LABEL]' per line")
        sp.add_argument("--label", help="free-form label for the target, e.g. DU or ST")
        sp.add_argument("--variant", choices=VARIANTS, default=PRACTICAL, help="FMB table variant (default: %(default)s)")
        sp.add_argument("--no-prune-match", dest="prune_match", action="store_false",
                        help="expand m literals instead of dropping them")
        sp.add_argument("--include-uncertain", action="store_true", help="follow uncertain (t_u/f_u) rows")
        sp.add_argument("--fmb", metavar="FILE", action="append", default=[], help="extra FMB tables (fmbtable v1)")
        sp.add_argument("--format", choices=("text", "json"), default="text")
        sp.add_argument("--data", metavar="FILE", required=quant, help="failure probabilities as JSON")
        sp.add_argument("--method", choices=METHODS, default=INCLUSION_EXCLUSION,
                        help="aggregation method when --data is given (default: %(default)s)")

    analysis_args(sub.add_parser("analyze", help="shortlist input failure scenarios for a target"), quant=False)
    analysis_args(sub.add_parser("quantify", help="analyze and aggregate scenario probabilities"), quant=True)
    analysis_args(sub.add_parser("explain", help="show the substitution chain behind each scenario"), quant=False)

    vp = sub.add_parser("verify-fmb", help="check FMB tables against concrete block semantics")
    vp.add_argument("kinds", nargs="*", help="block kinds to check (default: all with known semantics)")
    vp.add_argument("--fmb", metavar="FILE", action="append", default=[],
                    help="check tables from FILE instead of the built-in ones")
    vp.add_argument("--threshold", type=float, action="append", help="threshold(s) for comparison blocks")
    vp.add_argument("--format", choices=("text", "json"), default="text")
    return p


def _check_path(path: str) -> None:
    if not os.path.isfile(path):
        raise UsageError(f"no such file: {path}")


def _catalog(paths) -> Catalog:
    catalog = Catalog.default()
    for path in paths:
        _check_path(path)
        try:
            catalog = catalog.extend(load_fmb_tables(path))
        except TableSyntaxError as exc:
            raise _Located(path, exc.line, exc.column, exc.message) from None
    return catalog


class _Located(Exception):
    def __init__(self, path, line, column, message):
        super().__init__(f"{path}:{line}:{column}: error: {message}")


def _run_analysis(args, out) -> int:
    if (args.target is None) == (args.manifest is None):
        raise UsageError("give exactly one of --target or --manifest")
    if args.manifest and args.label:
        raise UsageError("--label applies to --target; put labels in the manifest instead")
    _check_path(args.program)
    if args.data:
        _check_path(args.data)
    catalog = _catalog(args.fmb)
    try:
        g = load_program(args.program, catalog)
    except ProgramError as exc:
        raise _Located(args.program, exc.line or 1, exc.column or 1, exc.message) from None
    if args.manifest:
        _check_path(args.manifest)
        try:
            targets = read_manifest(args.manifest)
        except ProgramError as exc:
            raise _Located(args.manifest, exc.line, exc.column, exc.message) from None
    else:
        targets = [Target(*args.target, args.label)]
    data = FailureData.load(args.data) if args.data else None
    opts = AnalysisOptions(args.variant, args.prune_match, args.include_uncertain)

    reports, texts = [], []
    for t in targets:
        try:
            var = g.var(t.var)
        except KeyError:
            raise AnalysisError(f"no variable named {t.var!r}") from None
        formula = backward_analyze(g, t.var, parse_mode(t.mode, var.ty), opts, catalog)
        quant = aggregate(formula, data, args.method) if data is not None else None
        log.info("%s=%s: %d scenario(s)", t.var, t.mode, len(formula))
        if args.format == "json":
            reports.append(build_report(formula, opts, args.program, t.label, quant))
        elif args.command == "explain":
            texts.append(render_explain(formula))
        else:
            texts.append(render_text(formula, quant, t.label))
    if args.format == "json":
        out.write(dumps_report(reports[0] if args.manifest is None else reports))
    else:
        out.write("\n".join(texts))
    return EXIT_OK


def _run_verify(args, out) -> int:
    tables = None
    if args.fmb:
        tables = {}
        for path in args.fmb:
            _check_path(path)
            try:
                tables.update(load_fmb_tables(path, BUILTIN_SEMANTICS, partial=True))
            except TableSyntaxError as exc:
                raise _Located(path, exc.line, exc.column, exc.message) from None
    catalog = Catalog.default()
    names = args.kinds or (list(tables) if tables is not None else catalog.names())
    grid = WitnessGrid.default(tuple(args.threshold) if args.threshold else (-1.0, 0.0, 1.5))
    reports = []
    for name in names:
        fmb = tables.get(name) if tables is not None else None
        if tables is not None and fmb is None:
            raise UsageError(f"kind {name!r} is not defined in the given tables")
        kind = fmb.kind if fmb is not None else catalog.kind(name)
        if kind.semantics is None:
            raise AnalysisError(f"block kind {name!r} has no concrete semantics to check against")
        reports.append(verify_fmb(kind, grid, fmb=fmb, catalog=catalog))
    passed = sum(r.ok for r in reports)
    if args.format == "json":
        out.write(json.dumps({"passed": passed, "total": len(reports), "reports": [r.to_dict() for r in reports]},
                             indent=2, sort_keys=True) + "\n")
    else:
        out.write("\n\n".join(r.render_table() for r in reports) + "\n")
        out.write(f"\n{passed}/{len(reports)} blocks sound and complete\n")
    return EXIT_OK if passed == len(reports) else EXIT_ERROR


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=err,
                        format="fmr: %(message)s")
    try:
        if args.command == "verify-fmb":
            return _run_verify(args, out)
        return _run_analysis(args, out)
    except UsageError as exc:
        parser.print_usage(err)
        err.write(f"fmr: error: {exc}\n")
        return EXIT_USAGE
    except _Located as exc:
        err.write(f"{exc}\n")
        return EXIT_ERROR
    except (AnalysisError, ModeError, QuantError, CatalogError, GridError) as exc:
        err.write(f"fmr: error: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: densities, counts, cut solutions, series, classification, checks.

Every long option can also be set through an environment variable named
TAUTODENSITY_<OPTION>, e.g. TAUTODENSITY_PRECISION=512; explicit flags win.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field
from typing import Any, Sequence

import mpmath

from .errors import NonConvergence, ResourceRefusal
from .numfmt import mpf_to_decimal

EXIT_OK, EXIT_USAGE, EXIT_REFUSAL, EXIT_VERIFY, EXIT_NONCONVERGENCE = 0, 1, 2, 3, 4
ENV_PREFIX = "TAUTODENSITY_"
CSV_COLUMNS = ("m", "class", "n_or_s", "method", "value")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad usage; we reserve 2 for refusals."""

    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


@dataclass
class RunConfig:
    precision_bits: int = 256
    tolerance: str = "1e-30"
    max_iterations: int = 10 ** 6
    cache_path: str | None = None
    output_format: str = "table"

    def __post_init__(self):
        if self.precision_bits < 64:
            raise UsageError("precision must be at least 64 bits")
        if self.output_format not in ("table", "json", "csv"):
            raise UsageError(f"unknown format {self.output_format!r}")
        try:
            tol = mpmath.mpf(self.tolerance)
        except (TypeError, ValueError):
            raise UsageError(f"bad tolerance {self.tolerance!r}") from None
        if not tol > 0:
            raise UsageError("tolerance must be positive")

    @property
    def tol(self) -> mpmath.mpf:
        return mpmath.mpf(self.tolerance)

    @property
    def digits(self) -> int:
        return self.precision_bits // 4


@dataclass
class Report:
    """One command's output: CSV-shaped records, a JSON document, notes for the table view."""
    records: list[tuple] = field(default_factory=list)
    doc: dict[str, Any] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    status: int = EXIT_OK

    def add(self, m, cls, n_or_s, method, value):
        self.records.append((m, cls, n_or_s, method, value))

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return json.dumps(self.doc, indent=2)
        if fmt == "csv":
            buf = io.StringIO()
            writer = csv.writer(buf, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            writer.writerows(self.records)
            return buf.getvalue().rstrip("\n")
        rows = [CSV_COLUMNS] + [tuple(str(v) for v in r) for r in self.records]
        widths = [max(len(r[i]) for r in rows) for i in range(len(CSV_COLUMNS))]
        lines = list(self.notes)
        if not self.records:
            return "\n".join(lines)
        for k, r in enumerate(rows):
            lines.append("  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip())
            if k == 0:
                lines.append("  ".join("-" * w for w in widths))
        return "\n".join(lines)


def _class_label(a: int, m: int) -> str:
    from .quadsys import class_name
    return class_name(a, m)


def _parse_class(text: str, m: int) -> int:
    from .logic import full_mask
    if text == "taut":
        return 0
    if text == "anti":
        return full_mask(m)
    try:
        a = int(text)
    except ValueError:
        raise UsageError(f"class must be taut, anti or an integer mask, not {text!r}") from None
    if not 0 <= a <= full_mask(m):
        raise UsageError(f"class mask {a} out of range for m={m}")
    return a


# ---------------------------------------------------------------------------
# commands


def cmd_density(args, cfg: RunConfig) -> Report:
    from .exact import solve_alpha_beta
    m = args.vars
    if m < 1:
        raise UsageError("--vars must be at least 1")
    table = solve_alpha_beta(m, cfg.precision_bits)
    fixed = table.density_fixed()
    classes = range(table.size) if args.all else (0, table.size - 1)
    rep = Report()
    rep.notes.append(f"limit densities, m={m}, {cfg.precision_bits}-bit fixed point (digits truncated)")
    for a in classes:
        rep.add(m, _class_label(a, m), "", "exact", table.decimal(fixed[a], cfg.digits))
    rep.doc = table.to_json(classes=list(classes), blocks=args.blocks)
    rep.doc["densities"] = {_class_label(a, m): table.decimal(fixed[a], cfg.digits) for a in classes}
    if table.flags:
        rep.notes.extend(f"note: {f}" for f in table.flags)
    return rep


def cmd_count(args, cfg: RunConfig) -> Report:
    from .counting import load_or_build, w_coefficients
    m, n_max = args.vars, args.max_len
    if m < 1 or n_max < 1:
        raise UsageError("--vars and --max-len must be at least 1")
    table = load_or_build(m, n_max, cfg.cache_path)
    w = w_coefficients(m, n_max)
    rep = Report()
    if args.cls is None:
        seq = w[1:n_max + 1]
        label = "all"
    else:
        a = _parse_class(args.cls, m)
        seq = list(table.counts[a][1:n_max + 1])
        label = _class_label(a, m)
    rep.notes.append(f"{label}: " + ",".join(str(c) for c in seq))
    ratios = []
    for n, c in enumerate(seq, start=1):
        rep.add(m, label, n, "count", c)
        if args.cls is not None:
            r = mpmath.mpf(c) / w[n]
            ratios.append(mpf_to_decimal(r, 12))
            rep.add(m, label, n, "ratio", ratios[-1])
    rep.doc = {"m": m, "class": label, "counts": seq, "totals": w[1:n_max + 1]}
    if ratios:
        rep.doc["ratios"] = ratios
    return rep


def cmd_scut(args, cfg: RunConfig) -> Report:
    from .quadsys import CutConfig, build_falsity_system, category_cut, shifted_iterate
    m, s = args.vars, args.s
    if m < 1 or s < 1:
        raise UsageError("--vars and --s must be at least 1")
    shift: str | float
    if args.shift in ("standard", "none"):
        shift = args.shift
    else:
        try:
            shift = float(args.shift)
        except ValueError:
            raise UsageError(f"--shift must be standard, none or a number, not {args.shift!r}") from None
    rep = Report()
    if args.system == "falsity":
        from .counting import load_or_build, ratio_at
        table = load_or_build(m, s, cfg.cache_path)
        sys_ = build_falsity_system(m, table, s, precision=cfg.precision_bits)
        result = shifted_iterate(sys_, CutConfig(s=s, shift=shift, tolerance=cfg.tol,
                                                 max_iterations=cfg.max_iterations))
        classes = range(sys_.size) if args.all else (0, sys_.size - 1)
        for a in classes:
            name = sys_.names[a]
            rep.add(m, name, s, "ratio", mpf_to_decimal(ratio_at(table, a, s, cfg.precision_bits), 20))
            rep.add(m, name, s, "cut-sol", mpf_to_decimal(result.solution[a], 20))
        keep = [sys_.names[a] for a in classes]
    else:
        result = category_cut(m, args.system, s, cfg.precision_bits, tolerance=cfg.tol,
                              max_iterations=cfg.max_iterations)
        keep = [n for n in result.names if n != "W"]
        for name in keep:
            rep.add(m, name, s, "cut-sol", mpf_to_decimal(result.value(name), 20))
    rep.doc = result.to_json(digits=cfg.digits, names=keep)
    rep.notes.append(
        f"{result.system} s={s}: zeta_s={mpmath.nstr(result.zeta_s, 8)} sigma={mpmath.nstr(result.sigma, 8)} "
        f"iterations={result.iterations} residual={mpmath.nstr(result.residual, 3)} "
        f"converged={result.converged} hyperplane={result.hyperplane}"
    )
    if not result.converged:
        rep.status = EXIT_NONCONVERGENCE
    return rep


def cmd_asympt(args, cfg: RunConfig) -> Report:
    from .asymptotics import SYSTEM_ALIASES, series_report, solve_system_series
    if args.order < 1:
        raise UsageError("--order must be at least 1")
    ms = args.at or []
    if args.values:
        if args.target not in SYSTEM_ALIASES:
            raise UsageError(f"--values needs a system target: {sorted(SYSTEM_ALIASES)}")
        vals = solve_system_series(args.target, args.order)
        report = {k: {"text": v.to_m_string(), "series": v.to_json(),
                      "at": {str(m): str(v.at_m(m)) for m in ms}} for k, v in vals.items() if k != "W"}
        method = "value-at-s0"
    else:
        try:
            report = series_report(args.target, args.order, tuple(ms))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        method = "ratio-series"
    rep = Report(doc=report)
    for name, item in report.items():
        rep.notes.append(f"{name}: {item['text']}")
        rep.add("", name, args.order, method, item["text"])
        for m, v in item["at"].items():
            rep.add(m, name, args.order, method + "@m", mpmath.nstr(mpmath.mpf(v), 12))
    return rep


def cmd_classify(args, cfg: RunConfig) -> Report:
    from .logic import (
        BASES, Categorizer, FormulaSyntaxError, classify_simple, falsity_mask, is_antilogy,
        is_tautology, norm_stats, parse_formula, render_formula, type_of,
    )
    try:
        phi = parse_formula(args.formula, args.vars)
    except FormulaSyntaxError as exc:
        raise UsageError(f"cannot parse formula: {exc}") from None
    m = args.vars
    stats = norm_stats(phi)
    kinds = sorted(k.value for k in classify_simple(phi))
    labels = {}
    bases = [args.basis] if args.basis else list(BASES)
    for name in bases:
        seed, strength, structural = BASES[name]
        labels[name] = Categorizer(seed, strength).label(phi).value
    doc = {
        "formula": render_formula(phi),
        "length": stats.length,
        "falsity_mask": falsity_mask(phi, m),
        "tautology": is_tautology(phi, m),
        "antilogy": is_antilogy(phi, m),
        "simple_kinds": kinds,
        "categories": labels,
        "type_formula": render_formula(type_of(phi)),
        "norm": str(stats.norm),
    }
    rep = Report(doc=doc)
    for key, value in doc.items():
        rep.add(m, key, "", "classify", value if not isinstance(value, (list, dict)) else json.dumps(value))
    return rep


def cmd_verify(args, cfg: RunConfig) -> Report:
    from .verify import run_checks
    results = run_checks(args.level)
    rep = Report()
    rep.doc = {"level": args.level, "checks": [
        {"name": r.name, "passed": r.passed, "detail": r.detail, "seconds": round(r.seconds, 3)}
        for r in results]}
    for r in results:
        rep.add("", r.name, "", "verify", "pass" if r.passed else "fail")
        rep.notes.append(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail} ({r.seconds:.1f}s)")
    failed = sum(not r.passed for r in results)
    rep.notes.append(f"{len(results) - failed}/{len(results)} checks passed")
    if cfg.output_format == "table":
        rep.records.clear()
    if failed:
        rep.status = EXIT_VERIFY
    return rep


# ---------------------------------------------------------------------------
# parser


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--precision", type=int, default=256, help="working precision in bits (default 256)")
    p.add_argument("--tolerance", default="1e-30", help="iteration tolerance, infinity norm (default 1e-30)")
    p.add_argument("--max-iterations", type=int, default=10 ** 6, help="iteration cap (default 1e6)")
    p.add_argument("--cache", default=None, help="coefficient table cache file")
    p.add_argument("--format", choices=("table", "json", "csv"), default="table", help="output format")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tautodensity", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("density", help="exact limit densities of falsity classes")
    p.add_argument("--vars", type=int, required=True, help="number of variables (1..4)")
    p.add_argument("--all", action="store_true", help="all classes, not just tautologies/antilogies")
    p.add_argument("--blocks", action="store_true", help="include per-block values in JSON")
    _common(p)
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("count", help="exact counts by length")
    p.add_argument("--vars", type=int, required=True)
    p.add_argument("--max-len", type=int, required=True)
    p.add_argument("--class", dest="cls", default=None, help="taut, anti or a falsity mask")
    _common(p)
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("scut", help="ratio at s and s-cut solution")
    p.add_argument("--vars", type=int, required=True)
    p.add_argument("--s", type=int, required=True, help="cut depth")
    p.add_argument("--system", default="falsity",
                   choices=("falsity", "s1", "sc", "strong-S1", "weak-S1", "combined-S1S2"))
    p.add_argument("--shift", default="standard", help="standard, none or an explicit sigma")
    p.add_argument("--all", action="store_true", help="all classes of the falsity system")
    _common(p)
    p.set_defaults(func=cmd_scut)

    p = sub.add_parser("asympt", help="large-m series (exact fractions)")
    p.add_argument("--target", required=True,
                   help="s1, sc, strong, weak, combined, bounds, or one ratio such as combined-T")
    p.add_argument("--order", type=int, default=4, help="highest power of m^-1/2 kept")
    p.add_argument("--at", type=int, nargs="*", help="evaluate the truncated series at these m")
    p.add_argument("--values", action="store_true", help="values at s0 instead of ratios")
    _common(p)
    p.set_defaults(func=cmd_asympt)

    p = sub.add_parser("classify", help="analyse one formula")
    p.add_argument("--formula", required=True, help='e.g. "x0->[~x0->x1]"')
    p.add_argument("--vars", type=int, required=True)
    p.add_argument("--basis", choices=("strong-S1", "weak-S1", "combined-S1S2"), default=None)
    _common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("verify", help="cross-solver checks")
    p.add_argument("level", nargs="?", choices=("quick", "full"), default="quick")
    _common(p)
    p.set_defaults(func=cmd_verify)
    return parser


def _apply_env(parser: argparse.ArgumentParser, environ) -> None:
    """Environment defaults for every long option of every subcommand."""
    parsers = [parser]
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            parsers.extend(action.choices.values())
    for p in parsers:
        for action in p._actions:
            longs = [o for o in action.option_strings if o.startswith("--")]
            if not longs or action.dest == "help":
                continue
            key = ENV_PREFIX + longs[0][2:].upper().replace("-", "_")
            if key not in environ:
                continue
            raw = environ[key]
            if isinstance(action, argparse._StoreTrueAction):
                value: Any = raw.lower() in ("1", "true", "yes", "on")
            elif action.nargs in ("*", "+"):
                value = [action.type(v) if action.type else v for v in raw.split()]
            else:
                try:
                    value = action.type(raw) if action.type else raw
                except ValueError:
                    raise UsageError(f"{key}={raw!r} is not valid") from None
                if action.choices is not None and value not in action.choices:
                    raise UsageError(f"{key}={raw!r} is not one of {sorted(action.choices)}")
            action.default = value
            action.required = False


def main(argv: Sequence[str] | None = None, environ=None) -> int:
    environ = os.environ if environ is None else environ
    parser = build_parser()
    try:
        _apply_env(parser, environ)
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        cfg = RunConfig(args.precision, args.tolerance, args.max_iterations, args.cache, args.format)
        with mpmath.workprec(cfg.precision_bits + 32):
            report = args.func(args, cfg)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except ResourceRefusal as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_REFUSAL
    except NonConvergence as exc:
        print(f"no convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    print(report.render(cfg.output_format))
    return report.status


if __name__ == "__main__":
    sys.exit(main())

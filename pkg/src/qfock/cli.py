"""Command-line front end: ``qfock run | list | export``.

Config files are INI text.  ``[run]`` lists the checks and run-wide settings,
``[check:NAME]`` overrides parameters of one check, ``[bank:NAME]`` defines a
filter bank from ``(exponent, re, im)`` triples and ``[factor:NAME]`` a CP factor
from row-major matrices.  Values are Python literals; anything that does not
parse as one is kept as a string.  See ``configs/full.ini`` for a commented example.

Exit codes: 0 when every asserted check passes, 2 when an assertion fails,
1 on a configuration error.
"""
from __future__ import annotations

import argparse
import ast
import configparser
import csv
import datetime as _dt
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .checks import REGISTRY, CheckReport, ConfigError, Context, run_check
from .filterbank import bank_from_triples
from .fock import CPFactor

EXIT_OK, EXIT_CONFIG, EXIT_FAIL = 0, 1, 2
REPORT_NAME = "report.json"
DEFAULT_OUT = "qfock-reports"


class LocatedError(Exception):
    def __init__(self, path, line: int | None, msg: str):
        self.path, self.line, self.msg = path, line, msg
        where = f"{path}:{line}" if line else str(path)
        super().__init__(f"{where}: {msg}")


@dataclass
class RunConfig:
    path: Path
    checks: list[str]
    seed: int = 0
    tol_scale: float = 1.0
    out: str | None = None
    params: dict[str, dict] = field(default_factory=dict)
    context: Context = field(default_factory=Context)
    lines: dict = field(default_factory=dict)

    def line_of(self, section: str, key: str | None = None) -> int | None:
        return self.lines.get((section, key)) or self.lines.get((section, None))


def _index_lines(text: str) -> dict:
    """``(section, key) -> line number`` for every header and key in the file."""
    out, section = {}, None
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            out.setdefault((section, None), n)
        elif section is not None and ("=" in line or ":" in line) and not raw[:1].isspace():
            sep = min(i for i in (line.find("="), line.find(":")) if i >= 0)
            out.setdefault((section, line[:sep].strip()), n)
    return out


def _literal(value: str):
    try:
        return ast.literal_eval(value)
    except (ValueError, SyntaxError):
        return value.strip()


def _matrix(value, what: str) -> np.ndarray:
    M = np.asarray(value, dtype=complex)
    if M.ndim != 2:
        raise ValueError(f"{what} must be a 2-D row-major list")
    return M


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise LocatedError(path, None, f"cannot read config: {exc.strerror}") from exc
    lines = _index_lines(text)
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    cp.optionxform = str  # check parameters such as M, K, L are case sensitive
    try:
        cp.read_string(text, source=str(path))
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        if line is None and getattr(exc, "errors", None):
            line = exc.errors[0][0]
        raise LocatedError(path, line, exc.message.splitlines()[0]) from exc
    if not cp.has_section("run"):
        raise LocatedError(path, None, "missing [run] section")
    run = cp["run"]
    allowed = {"checks", "seed", "tol_scale", "out"}
    for key in run:
        if key not in allowed:
            raise LocatedError(path, lines.get(("run", key)), f"unknown [run] key {key!r}")
    names = [c.strip() for c in run.get("checks", "all").replace("\n", ",").split(",") if c.strip()]
    if names == ["all"]:
        names = list(REGISTRY)
    for n in names:
        if n not in REGISTRY:
            raise LocatedError(path, lines.get(("run", "checks")), f"unknown check {n!r}")
    cfg = RunConfig(path, names, lines=lines)
    try:
        cfg.seed = int(run.get("seed", "0"))
        cfg.tol_scale = float(run.get("tol_scale", "1.0"))
    except ValueError as exc:
        raise LocatedError(path, lines.get(("run", "seed")) if "seed" in str(exc) else
                           lines.get(("run", "tol_scale")), str(exc)) from exc
    if cfg.tol_scale <= 0:
        raise LocatedError(path, lines.get(("run", "tol_scale")), "tol_scale must be positive")
    cfg.out = run.get("out")
    for sec in cp.sections():
        kind, _, name = sec.partition(":")
        if sec == "run":
            continue
        try:
            if kind == "check":
                if name not in REGISTRY:
                    raise ValueError(f"unknown check {name!r}")
                spec = REGISTRY[name]
                params = {}
                for k, v in cp[sec].items():
                    if k not in spec.defaults:
                        raise LocatedError(path, lines.get((sec, k)), f"check {name!r} has no parameter {k!r}")
                    params[k] = _literal(v)
                cfg.params[name] = params
            elif kind == "bank":
                sect = {k.lower(): v for k, v in cp[sec].items()}
                N = int(sect.get("n", "0"))
                filters = [_literal(sect[f"filter{i}"]) for i in range(N) if f"filter{i}" in sect]
                if len(filters) != N:
                    raise ValueError(f"bank {name!r} needs filter0..filter{N - 1}")
                filters = [[f] if isinstance(f, tuple) and f and not isinstance(f[0], tuple) else list(f)
                           for f in filters]
                cfg.context.banks[name] = bank_from_triples(N, filters)
            elif kind == "factor":
                sect = {k.lower(): v for k, v in cp[sec].items()}
                N, d = int(sect["n"]), int(sect["d"])
                R = tuple(_matrix(_literal(sect[f"r{i}"]), f"R{i}") for i in range(1, N + 1))
                cfg.context.factors[name] = CPFactor(N, d, R)
            else:
                raise ValueError(f"unknown section kind {kind!r}")
        except LocatedError:
            raise
        except (ValueError, KeyError, TypeError) as exc:
            raise LocatedError(path, lines.get((sec, None)), f"[{sec}]: {exc}") from exc
    return cfg


def resolve_out(cli_out: str | None, cfg: RunConfig) -> Path:
    """``--out`` wins, then the config, then ``QFOCK_OUT_DIR``, then ``./qfock-reports``."""
    return Path(cli_out or cfg.out or os.environ.get("QFOCK_OUT_DIR") or DEFAULT_OUT)


def report_document(reports: list[CheckReport], cfg: RunConfig) -> dict:
    asserted = [r for r in reports if r.verdict != "report-only"]
    return {
        "header": {
            "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
            "wall_times": {r.check: round(r.wall_time, 6) for r in reports},
        },
        "version": __version__,
        "seed": cfg.seed,
        "tol_scale": cfg.tol_scale,
        "config": cfg.path.name,
        "summary": {"asserted": len(asserted), "failed": sum(r.verdict == "fail" for r in reports),
                    "report_only": len(reports) - len(asserted)},
        "reports": [r.to_dict() for r in reports],
    }


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.tol_scale is not None:
            if args.tol_scale <= 0:
                raise LocatedError(cfg.path, None, "--tol-scale must be positive")
            cfg.tol_scale = args.tol_scale
    except LocatedError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    reports = []
    for name in cfg.checks:
        try:
            rep = run_check(name, cfg.params.get(name), cfg.seed, cfg.tol_scale, cfg.context)
        except (ConfigError, ValueError) as exc:
            line = cfg.line_of(f"check:{name}") or cfg.line_of("run", "checks")
            print(f"config error: {LocatedError(cfg.path, line, f'{name}: {exc}')}", file=sys.stderr)
            return EXIT_CONFIG
        reports.append(rep)
        worst = max(rep.residuals.values(), default=0.0) if rep.residuals else 0.0
        print(f"{rep.verdict:12s} {name:26s} max residual {worst:.3e}  ({rep.wall_time:.2f} s)")
    out = resolve_out(args.out, cfg)
    out.mkdir(parents=True, exist_ok=True)
    target = out / REPORT_NAME
    target.write_text(json.dumps(report_document(reports, cfg), indent=2, sort_keys=True) + "\n")
    print(f"report written to {target}")
    return EXIT_FAIL if any(r.verdict == "fail" for r in reports) else EXIT_OK


def list_checks() -> str:
    rows = []
    for spec in REGISTRY.values():
        params = ", ".join(f"{k}={v!r}" for k, v in spec.defaults.items())
        rows.append(f"{spec.name:26s} {spec.mode:12s} {spec.anchor}\n{'':39s} params: {params}")
    return "\n".join(rows)


def cmd_list(args) -> int:
    print(list_checks())
    return EXIT_OK


def export_csv(report: dict, series: str, path, check: str | None = None) -> Path:
    """Write one series from a report document; raises ``KeyError`` if no report carries it."""
    found = None
    for entry in report["reports"]:
        if (check is None or entry["check"] == check) and series in entry.get("series", {}):
            found = entry["series"][series]
            break
    if found is None:
        raise KeyError(f"series {series!r} not found in report")
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        if not found:
            w.writerow(["index", "value"])
        elif isinstance(found[0], dict):
            cols = sorted(found[0])
            w.writerow(["index", *cols])
            for i, row in enumerate(found):
                w.writerow([i, *(row[c] for c in cols)])
        elif isinstance(found[0], list):
            w.writerow(["index", "re", "im"])
            for i, (re, im) in enumerate(found):
                w.writerow([i, repr(float(re)), repr(float(im))])
        else:
            w.writerow(["index", "value"])
            for i, v in enumerate(found):
                w.writerow([i, repr(float(v))])
    return path


def cmd_export(args) -> int:
    try:
        report = json.loads(Path(args.report).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"cannot read report {args.report}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        path = export_csv(report, args.series, args.out, args.check)
    except KeyError as exc:
        print(f"export error: {exc.args[0]}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"series {args.series} written to {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qfock", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run the checks listed in a config file")
    r.add_argument("--config", required=True)
    r.add_argument("--out", help="output directory (default: config, then $QFOCK_OUT_DIR)")
    r.add_argument("--seed", type=int)
    r.add_argument("--tol-scale", type=float, dest="tol_scale")
    r.set_defaults(func=cmd_run)
    ls = sub.add_parser("list", help="list available checks")
    ls.set_defaults(func=cmd_list)
    e = sub.add_parser("export", help="export a series of a report as CSV")
    e.add_argument("--report", required=True)
    e.add_argument("--series", required=True)
    e.add_argument("--check")
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_export)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

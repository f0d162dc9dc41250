"""Command line entry point.

    setguard run <config> [--out DIR] [--seed N] [--no-svg]
    setguard verify <config>
    setguard presets

Exit codes: 0 clean, 2 constraint violation, 3 infeasible certificate,
4 configuration error, 5 numeric abort.  When several apply, the most
fundamental wins: 4, then 5, then 2, then 3.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import simkit as sk
from .config import build_scenario, load_config
from .errors import ConfigError
from .svg import emit_svg

EXIT_OK = 0
EXIT_VIOLATION = 2
EXIT_INFEASIBLE = 3
EXIT_CONFIG = 4
EXIT_ABORT = 5
DEFAULT_OUT = "setguard_out"


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors, which would collide with "violation"
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_CONFIG)


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="setguard", description="Simulate and certify output-constrained control loops.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    r = sub.add_parser("run", help="simulate a scenario and write CSV/SVG/report")
    r.add_argument("config")
    r.add_argument("--out", help="output directory (falls back to config 'out', then $SETGUARD_OUT)")
    r.add_argument("--seed", type=int, help="override the disturbance seed")
    r.add_argument("--no-svg", action="store_true", help="skip the SVG plot")
    v = sub.add_parser("verify", help="run the stability certificate only")
    v.add_argument("config")
    sub.add_parser("presets", help="list built-in scenarios")
    return p


def _out_dir(flag, cfg) -> Path:
    return Path(flag or cfg.out or os.environ.get("SETGUARD_OUT") or DEFAULT_OUT)


def _err(msg: str) -> None:
    print(f"setguard: {msg}", file=sys.stderr)


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(type(o).__name__)


def cmd_presets() -> int:
    from .config import PRESET_VARIANTS
    for name, (_, desc) in sk.PRESETS.items():
        print(f"{name:10s} {desc}  [variants: {', '.join(PRESET_VARIANTS[name])}]")
    return EXIT_OK


def cmd_verify(path) -> int:
    try:
        cfg = load_config(path)
        scenario = build_scenario(cfg)
    except ConfigError as exc:
        _err(f"config error: {exc}")
        return EXIT_CONFIG
    try:
        report = sk.certify(scenario)
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        _err(f"numeric failure during verification: {exc}")
        return EXIT_ABORT
    print(report.to_text())
    return EXIT_OK if report.feasible else EXIT_INFEASIBLE


def cmd_run(path, out=None, seed=None, no_svg=False) -> int:
    try:
        cfg = load_config(path)
        scenario = build_scenario(cfg, seed=seed)
    except ConfigError as exc:
        _err(f"config error: {exc}")
        return EXIT_CONFIG
    outdir = _out_dir(out, cfg)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        _err(f"cannot create output directory {outdir}: {exc}")
        return EXIT_CONFIG

    try:
        traj, margins = sk.run_scenario(scenario)
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        _err(f"numeric abort: {exc}")
        return EXIT_ABORT
    report = None
    if cfg.certify:
        try:
            report = sk.certify(scenario)
        except (ArithmeticError, np.linalg.LinAlgError) as exc:
            _err(f"numeric failure during verification: {exc}")
            return EXIT_ABORT

    name = scenario.name
    written = []
    try:
        if cfg.emit.get("csv", True):
            sk.write_csv(traj, outdir / f"{name}.csv")
            written.append(f"{name}.csv")
        if cfg.emit.get("svg", True) and not no_svg:
            emit_svg(traj, scenario.transform, outdir / f"{name}.svg", title=name)
            written.append(f"{name}.svg")
        if cfg.emit.get("report", True):
            doc = {
                "scenario": name,
                "description": scenario.description,
                "config": cfg.to_dict(),
                "samples": len(traj),
                "substeps": traj.substeps,
                "aborted": traj.aborted,
                "margins": margins.to_dict(),
                "events": [{"t": t, "kind": k, "message": m} for t, k, m in traj.events],
                "certificate": None if report is None else report.to_dict(),
            }
            with open(outdir / f"{name}.json", "w", encoding="utf-8") as fh:
                json.dump(doc, fh, indent=2, sort_keys=True, default=_json_default)
                fh.write("\n")
            written.append(f"{name}.json")
    except OSError as exc:
        _err(f"cannot write outputs: {exc}")
        return EXIT_CONFIG

    mm = ", ".join(f"{m:.6g}" for m in margins.min_margin)
    print(f"{name}: {len(traj)} samples, min margin [{mm}], violations {margins.violation_count}")
    if report is not None:
        print(report.to_text())
    print(f"wrote {', '.join(written) or 'nothing'} to {outdir}")
    for t, kind, msg in traj.events:
        _err(f"t={t:.6g} {kind}: {msg}")

    if traj.aborted:
        return EXIT_ABORT
    if margins.violation_count > 0:
        return EXIT_VIOLATION
    if report is not None and not report.feasible:
        return EXIT_INFEASIBLE
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "presets":
            return cmd_presets()
        if args.command == "verify":
            return cmd_verify(args.config)
        return cmd_run(args.config, args.out, args.seed, args.no_svg)
    except Exception as exc:  # keep the exit-code contract closed
        _err(f"numeric abort ({type(exc).__name__}): {exc}")
        return EXIT_ABORT


if __name__ == "__main__":
    sys.exit(main())

import argparse
import json
import os
from pathlib import Path

from setguard import simkit as sk
from setguard.svg import emit_svg


def parser(desc):
    p = argparse.ArgumentParser(description=desc)
    p.add_argument("--out", default=os.environ.get("SETGUARD_OUT", "setguard_out"))
    p.add_argument("--horizon", type=float, default=None, help="override the preset horizon")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-svg", action="store_true")
    return p


def run_and_save(s, out, svg=True):
    """Run one scenario, write csv/svg next to each other, return (traj, margins)."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    traj, rep = sk.run_scenario(s)
    (out / f"{s.name}.csv").write_text(sk.trajectory_csv(traj))
    if svg:
        emit_svg(traj, None, out / f"{s.name}.svg", title=s.name)
    return traj, rep


def row(name, traj, rep, **extra):
    cols = {"scenario": name, "violations": rep.violation_count,
            "min_margin": " ".join(f"{m:.4g}" for m in rep.min_margin),
            "max|eps|": f"{rep.max_abs_eps:.4g}", "aborted": traj.aborted, **extra}
    return cols


def print_table(rows):
    if not rows:
        return
    keys = list(rows[0])
    widths = {k: max(len(k), *(len(str(r[k])) for r in rows)) for k in keys}
    print("  ".join(k.ljust(widths[k]) for k in keys))
    for r in rows:
        print("  ".join(str(r[k]).ljust(widths[k]) for k in keys))


def dump(rows, out, name):
    Path(out).mkdir(parents=True, exist_ok=True)
    (Path(out) / name).write_text(json.dumps(rows, indent=2, default=str))

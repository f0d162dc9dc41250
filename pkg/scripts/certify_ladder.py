"""Certificate search for the two-output example across gamma, sector gain and Jacobian-inverse cap.

Each call can take 5-30 s. Infeasible rows are reported as such, never forced.
"""
import argparse
import json
import time
from pathlib import Path

from setguard import simkit as sk


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--gammas", type=float, nargs="+", default=[100.0, 1.0])
    p.add_argument("--gphi", type=float, nargs="+", default=[0.0, 0.1])
    p.add_argument("--caps", type=float, nargs="+", default=[1e3])
    p.add_argument("--C", type=float, nargs="+", default=[1.0])
    p.add_argument("--out", default=None, help="optional json file for the results")
    args = p.parse_args()
    results = []
    for gamma in args.gammas:
        for g in args.gphi:
            for cap in args.caps:
                for C in args.C:
                    s = sk.preset_example6("base", gamma=gamma, gphi=(g,) * 3, C=C, jac_inv_cap=cap)
                    t0 = time.perf_counter()
                    rep = sk.certify(s)
                    dt = time.perf_counter() - t0
                    worst = max((e for _, e in rep.max_eig_per_vertex), default=float("nan"))
                    print(f"gamma={gamma:g} gphi={g:g} cap={cap:g} C={C:g}: "
                          f"{'FEASIBLE' if rep.feasible else 'INFEASIBLE'} beta={rep.beta} "
                          f"worst_eig={worst:.3g} ({dt:.1f}s)", flush=True)
                    results.append({"gamma": gamma, "gphi": g, "cap": cap, "C": C, "feasible": rep.feasible,
                                    "beta": rep.beta, "worst_eig": worst, "seconds": dt})
    if args.out:
        Path(args.out).write_text(json.dumps(results, indent=2))


if __name__ == "__main__":
    main()

"""Perturb the last plant row and the sector gains of the two-output example and record margins.

The controller is unchanged; only the plant moves. Runs use gamma=100 by default
because the gamma=1 runs take tens of seconds each. Stiff corners of the row
box take minutes at the full horizon; pass --horizon to shorten.
"""
import itertools
from dataclasses import replace

from _common import dump, parser, print_table, row, run_and_save
from setguard import simkit as sk

# corners of the box a1 in [-5, 0.1], a2 in [-5, -2], a3 in [-5, -3]
ROWS = list(itertools.product((-5.0, 0.1), (-5.0, -2.0), (-5.0, -3.0)))
GPHI = [-3.0, 0.0, 0.1, 3.0]


def main():
    p = parser(__doc__)
    p.add_argument("--gamma", type=float, default=100.0)
    args = p.parse_args()
    rows = []
    for a in ROWS:
        for g in GPHI:
            s = sk.preset_example6("base", gamma=args.gamma, seed=args.seed, a=a, gphi=(g,) * 3)
            s = replace(s, name=f"example6_robust_row{'_'.join(f'{v:g}' for v in a)}_g{g:g}")
            if args.horizon:
                s = replace(s, horizon=args.horizon)
            traj, rep = run_and_save(s, args.out, not args.no_svg)
            rows.append(row(s.name, traj, rep, y_end=" ".join(f"{v:.4g}" for v in traj.y[-1])))
            print(f"done {s.name}", flush=True)
    print_table(rows)
    dump(rows, args.out, "robustness_sweep.json")


if __name__ == "__main__":
    main()

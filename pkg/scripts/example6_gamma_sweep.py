"""Two-output output-feedback example: sweep the eps gain gamma and the initial-state variant."""
from dataclasses import replace

from _common import dump, parser, print_table, row, run_and_save
from setguard import simkit as sk


def main():
    p = parser(__doc__)
    p.add_argument("--gammas", type=float, nargs="+", default=[1.0, 10.0, 100.0])
    p.add_argument("--variants", nargs="+", default=["base", "margin", "fig5"])
    args = p.parse_args()
    rows = []
    for variant in args.variants:
        for gamma in args.gammas:
            s = sk.preset_example6(variant, gamma=gamma, seed=args.seed)
            if args.horizon:
                s = replace(s, horizon=args.horizon)
            traj, rep = run_and_save(s, args.out, not args.no_svg)
            rows.append(row(s.name, traj, rep, substeps=traj.substeps))
            print(f"done {s.name}", flush=True)
    print_table(rows)
    dump(rows, args.out, "example6_sweep.json")


if __name__ == "__main__":
    main()

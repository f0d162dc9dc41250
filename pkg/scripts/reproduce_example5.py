"""State-feedback example: exponential and sinusoidal bands, with and without the disturbance."""
from dataclasses import replace

from _common import dump, parser, print_table, row, run_and_save
from setguard import simkit as sk


def main():
    args = parser(__doc__).parse_args()
    rows = []
    for boundary in ("exp", "sin"):
        for dist in (True, False):
            s = sk.preset_example5(boundary, disturbance=dist, seed=args.seed)
            if args.horizon:
                s = replace(s, horizon=args.horizon)
            traj, rep = run_and_save(s, args.out, not args.no_svg)
            rows.append(row(s.name, traj, rep, inside_tightened=rep.tightened_inside))
    cert = sk.certify(sk.preset_example5())
    print_table(rows)
    print(f"\nLMI: feasible={cert.feasible} beta={cert.beta}")
    dump(rows, args.out, "example5_summary.json")


if __name__ == "__main__":
    main()

"""Relative-degree-three example: filtered law on the non-Hurwitz plant and its Hurwitz twin."""
from dataclasses import replace

from _common import dump, parser, print_table, row, run_and_save
from setguard import simkit as sk


def main():
    p = parser(__doc__)
    p.add_argument("--mu", type=float, nargs="+", default=[0.01])
    args = p.parse_args()
    rows = []
    for nonhurwitz in (True, False):
        for mu in args.mu:
            s = sk.preset_example7(nonhurwitz, seed=args.seed, mu=mu)
            if len(args.mu) > 1:
                s = replace(s, name=f"{s.name}_mu{mu:g}")
            if args.horizon:
                s = replace(s, horizon=args.horizon)
            traj, rep = run_and_save(s, args.out, not args.no_svg)
            cert = sk.certify(s)
            rows.append(row(s.name, traj, rep, lmi=cert.feasible, flags=len(cert.hypothesis_flags)))
    print_table(rows)
    dump(rows, args.out, "example7_summary.json")


if __name__ == "__main__":
    main()

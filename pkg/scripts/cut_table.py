"""Coefficient ratios and cut solutions for tautologies and antilogies at several depths."""
import argparse

from tautodensity.counting import class_coefficients, ratio_at
from tautodensity.exact import solve_alpha_beta
from tautodensity.quadsys import CutConfig, build_falsity_system, shifted_iterate


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--vars", type=int, nargs="+", default=[1, 2, 3])
    parser.add_argument("--depths", type=int, nargs="+", default=[10, 50, 200])
    args = parser.parse_args()
    header = "".join(f"  s={s:<4} ratio  cut-sol" for s in args.depths)
    print(f"m  class  exact   {header}")
    for m in args.vars:
        table = class_coefficients(m, max(args.depths))
        exact = solve_alpha_beta(m).densities()
        cuts = [shifted_iterate(build_falsity_system(m, table, s), CutConfig(s=s)) for s in args.depths]
        for name, mask in (("taut", 0), ("anti", table.num_classes - 1)):
            row = f"{m}  {name}   {float(exact[mask]):.4f}"
            for s, cut in zip(args.depths, cuts):
                ratio = ratio_at(table, mask, s)
                row += f"    {float(ratio):.4f}  {float(cut.value(name)):.4f}"
            print(row)


if __name__ == "__main__":
    main()

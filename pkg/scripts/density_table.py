"""Print exact tautology and antilogy densities for one to four variables."""
import argparse

from tautodensity.exact import solve_alpha_beta


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--max-vars", type=int, default=4)
    parser.add_argument("--precision", type=int, default=256)
    parser.add_argument("--digits", type=int, default=20)
    args = parser.parse_args()
    print(f"{'m':>2}  {'tautologies':<{args.digits + 2}}  antilogies")
    for m in range(1, args.max_vars + 1):
        table = solve_alpha_beta(m, args.precision)
        dens = table.density_fixed()
        taut, anti = table.decimal(dens[0], args.digits), table.decimal(dens[-1], args.digits)
        print(f"{m:>2}  {taut:<{args.digits + 2}}  {anti}")


if __name__ == "__main__":
    main()

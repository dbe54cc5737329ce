"""Large-m expansions of every category ratio, and the density bounds they give."""
import argparse

from tautodensity.asymptotics import RATIO_TARGETS, bounds_report, ratio_series


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--order", type=int, default=4)
    parser.add_argument("--at", type=int, nargs="*", default=[2, 3, 4])
    args = parser.parse_args()
    for target in RATIO_TARGETS:
        print(f"{target:<12} {ratio_series(target, args.order).to_m_string()}")
    bounds = bounds_report(args.order, tuple(args.at))
    print(f"\nlower bound  {bounds.lower.to_m_string()}")
    print(f"upper bound  {bounds.upper.to_m_string()}")
    for m, (lo, hi) in bounds.numeric.items():
        print(f"  m={m}: [{float(lo):.6f}, {float(hi):.6f}]")


if __name__ == "__main__":
    main()

"""Run the acceptance criteria and print one PASS/FAIL line each; exit 1 on any failure."""
import argparse
import pathlib
import sys

import mpmath

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "tests"))
from test_acceptance import CRITERIA  # noqa: E402


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("criteria", type=int, nargs="*", default=sorted(CRITERIA))
    args = parser.parse_args()
    failed = 0
    for k in args.criteria:
        with mpmath.workprec(320):
            ok, detail = CRITERIA[k]()
        failed += not ok
        print(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}", flush=True)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())

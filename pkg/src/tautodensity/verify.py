"""Cross-solver checks behind the ``verify`` command.

Each check returns a CheckResult; none raises on a mismatch.  The quick
level runs in well under two minutes; the full level adds the four-variable
densities, deep cuts and long coefficient ratios.
"""
from __future__ import annotations

import time
from collections import Counter
from dataclasses import dataclass
from typing import Callable

import mpmath

from . import counting


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


PRINTED_DENSITIES = {2: ("0.33213", "0.09710"), 3: ("0.27003", "0.06625"), 4: ("0.22561", "0.04868")}

# (m, s) -> (taut ratio, taut cut, anti ratio, anti cut) as printed
CUT_TABLE = {
    (1, 10): ("0.3102", "0.4243", "0.1868", "0.1642"),
    (1, 50): ("0.4142", "0.4233", "0.1612", "0.1634"),
    (1, 200): ("0.4210", "0.4233", "0.1628", "0.1633"),
    (2, 10): ("0.2374", "0.3345", "0.0996", "0.0982"),
    (2, 50): ("0.3206", "0.3323", "0.0947", "0.0972"),
    (2, 200): ("0.3293", "0.3322", "0.0965", "0.0971"),
    (3, 10): ("0.1913", "0.2732", "0.0637", "0.0673"),
    (3, 50): ("0.2581", "0.2703", "0.0641", "0.0663"),
    (3, 200): ("0.2670", "0.2701", "0.0657", "0.0663"),
}


def _check(name: str, fn: Callable[[], tuple[bool, str]]) -> CheckResult:
    start = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as exc:  # a crash is a failed check, reported not raised
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    return CheckResult(name, ok, detail, time.perf_counter() - start)


def enumeration_agreement(limits=((1, 10), (2, 8))) -> tuple[bool, str]:
    from .logic import falsity_mask, formulas_by_length
    bad = []
    for m, n_max in limits:
        table = counting.class_coefficients(m, n_max)
        for n, level in enumerate(formulas_by_length(m, n_max)):
            hist = Counter(falsity_mask(phi, m) for phi in level)
            got = [table.counts[a][n] for a in range(table.num_classes)]
            if got != [hist[a] for a in range(table.num_classes)]:
                bad.append((m, n))
    return not bad, "exact" if not bad else f"mismatch at (m, n) = {bad[:3]}"


def block_agreement(m: int = 2, n: int = 40) -> tuple[bool, str]:
    table = counting.class_coefficients(m, n)
    ok = counting.class_counts_at(m, n) == [row[n] for row in table.counts]
    return ok, f"m={m} n={n}"


def octic(order: int = 30) -> tuple[bool, str]:
    first = counting.verify_octic_m1(order)
    return first > order, f"first nonzero order {first}" if first <= order else f"zero through {order}"


def densities(ms=(2, 3), precision: int = 256) -> tuple[bool, str]:
    from .exact import solve_alpha_beta
    worst = mpmath.mpf(0)
    for m in ms:
        t = solve_alpha_beta(m, precision)
        dens = t.densities()
        taut, anti = PRINTED_DENSITIES[m]
        worst = max(worst, abs(dens[0] - mpmath.mpf(taut)), abs(dens[-1] - mpmath.mpf(anti)))
    return worst < 5e-6, f"max deviation {mpmath.nstr(worst, 3)}"


def single_variable_digits() -> tuple[bool, str]:
    from .exact import solve_alpha_beta
    t = solve_alpha_beta(1)
    fixed = t.density_fixed()
    taut, anti = t.decimal(fixed[0])[:6], t.decimal(fixed[-1])[:6]
    return (taut, anti) == ("0.4232", "0.1632"), f"printed digits {taut} / {anti}"


def ratio_solve(ms=(1, 2)) -> tuple[bool, str]:
    from .exact import solve_alpha_beta
    from .quadsys import build_falsity_system, ratio_linear_solve
    worst = mpmath.mpf(0)
    for m in ms:
        t = solve_alpha_beta(m)
        sol = ratio_linear_solve(build_falsity_system(m, s=2), t.class_values())
        worst = max(worst, max(abs(a - b) for a, b in zip(sol, t.densities())))
    return worst < mpmath.mpf(10) ** -20, f"max deviation {mpmath.nstr(worst, 3)}"


def cut_table(entries) -> tuple[bool, str]:
    from .quadsys import CutConfig, build_falsity_system, shifted_iterate
    worst, where = mpmath.mpf(0), None
    tables = {}
    for m, s in entries:
        if m not in tables:
            tables[m] = counting.class_coefficients(m, 200)
        table = tables[m]
        full = table.num_classes - 1
        cut = shifted_iterate(build_falsity_system(m, table, s), CutConfig(s=s))
        got = (counting.ratio_at(table, 0, s), cut.value("taut"),
               counting.ratio_at(table, full, s), cut.value("anti"))
        for g, printed in zip(got, CUT_TABLE[(m, s)]):
            dev = abs(g - mpmath.mpf(printed))
            if dev > worst:
                worst, where = dev, (m, s)
    return worst < 5e-5, f"max deviation {mpmath.nstr(worst, 3)} at {where}"


def asymptotic_series() -> tuple[bool, str]:
    from .asymptotics import ratio_series
    expected = {
        "s1": "1/m - 7/2*m^-3/2 + 7*m^-2 + O(m^-5/2)",
        "sc": "1/4*m^-1 - 3/4*m^-3/2 + 19/16*m^-2 + O(m^-5/2)",
        "strong-T": "1/m - 7/2*m^-3/2 + 31/4*m^-2 + O(m^-5/2)",
        "combined-T": "1/m - 7/4*m^-3/2 + 5/4*m^-2 + O(m^-5/2)",
    }
    bad = [k for k, v in expected.items() if ratio_series(k, 4).to_m_string() != v]
    return not bad, "exact" if not bad else f"differs: {bad}"


def sandwich(ms=(2, 3)) -> tuple[bool, str]:
    from .asymptotics import bounds_report
    b = bounds_report(4, ms)
    bad = []
    for m in ms:
        lo, hi = b.numeric[m]
        taut = mpmath.mpf(PRINTED_DENSITIES[m][0])
        if not lo <= taut <= hi:
            bad.append(m)
    return not bad, "holds" if not bad else f"fails at m={bad}"


def long_ratios(ms=(1, 2, 3), n: int = 2000) -> tuple[bool, str]:
    from .exact import solve_alpha_beta
    worst = mpmath.mpf(0)
    for m in ms:
        counts = counting.class_counts_at(m, n)
        total = sum(counts)
        dens = solve_alpha_beta(m).densities()
        for a in (0, len(counts) - 1):
            worst = max(worst, abs(mpmath.mpf(counts[a]) / total - dens[a]))
    return worst < 2e-3, f"max deviation {mpmath.nstr(worst, 3)} at n={n}"


def run_checks(level: str = "quick") -> list[CheckResult]:
    if level not in ("quick", "full"):
        raise ValueError(f"unknown level {level!r}")
    checks: list[tuple[str, Callable[[], tuple[bool, str]]]] = [
        ("class table = enumeration", enumeration_agreement),
        ("block route = class table", block_agreement),
        ("octic residual", octic),
        ("printed densities m=2,3", densities),
        ("m=1 printed digits", single_variable_digits),
        ("ratio solve = exact densities", ratio_solve),
        ("cut table m=1,2 s=10,50", lambda: cut_table([(1, 10), (1, 50), (2, 10), (2, 50)])),
        ("asymptotic ratio series", asymptotic_series),
        ("sandwich m=2,3", sandwich),
    ]
    if level == "full":
        checks += [
            ("printed densities m=4", lambda: densities((4,))),
            ("full cut table", lambda: cut_table(sorted(CUT_TABLE))),
            ("ratio solve m=3", lambda: ratio_solve((3,))),
            ("coefficient ratios at n=2000", long_ratios),
            ("sandwich m=4", lambda: sandwich((2, 3, 4))),
        ]
    return [_check(name, fn) for name, fn in checks]


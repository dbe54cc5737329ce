"""Large-m expansions of category values at s0 and of their limit ratios.

Everything is a truncated Laurent series in y = m^(-1/2) with exact
rational coefficients.  At z = s0 = y/(2+y) we have W(s0) = 1/y, so the
scaled unknowns x = y*X(s0) satisfy a system that is analytic in y.  Its
order-0 solution is the root identified by hand (seeded below); from there
each further order of x solves one linear system with the fixed order-0
Jacobian.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .systems import Coef, SymbolicSystem, get_system
from .yseries import YSeries, fraction_matrix_solve, series_linear_solve

DEFAULT_ORDER = 4
GUARD = 4

# Order-0 values of y*X(s0).  The generating functions other than U and
# the order-2 bases B2, B3 are o(W) at s0; U carries all of W.
SEEDS: dict[str, dict[str, Fraction]] = {
    "s1": {"S1": Fraction(0)},
    "sc": {"Sc": Fraction(0)},
    "strong-S1": {"B": Fraction(0), "T": Fraction(0), "U": Fraction(1), "A": Fraction(0)},
    "weak-S1": {"B": Fraction(0), "T": Fraction(0), "U": Fraction(1), "A": Fraction(0)},
    "combined-S1S2": {
        "B1": Fraction(0), "B2": Fraction(1, 4), "B3": Fraction(1, 4), "B4": Fraction(0),
        "B5": Fraction(0), "B": Fraction(0), "T": Fraction(0), "U": Fraction(1), "A": Fraction(0),
    },
}

RATIO_TARGETS: dict[str, tuple[str, str]] = {
    "s1": ("s1", "S1"),
    "sc": ("sc", "Sc"),
    "strong-T": ("strong-S1", "T"),
    "weak-T": ("weak-S1", "T"),
    "weak-B": ("weak-S1", "B"),
    "combined-B": ("combined-S1S2", "B"),
    "combined-T": ("combined-S1S2", "T"),
    "combined-U": ("combined-S1S2", "U"),
    "combined-A": ("combined-S1S2", "A"),
}

SYSTEM_ALIASES = {"strong": "strong-S1", "weak": "weak-S1", "combined": "combined-S1S2",
                  "s1": "s1", "sc": "sc"}


class SeriesSolveError(ArithmeticError):
    """Raised when an order step is singular or the requested order is unreachable."""

    def __init__(self, message: str, order: int | None = None):
        super().__init__(message)
        self.order = order


# ---------------------------------------------------------------------------
# basic series at s0


def s0_series(prec: int) -> YSeries:
    y = YSeries.y(1, prec + 1)
    return (y / (2 + y)).truncate(prec)


def w_at_s0(prec: int) -> YSeries:
    return YSeries.y(-1, prec)


def sqrt_m(prec: int) -> YSeries:
    return YSeries.y(-1, prec)


def m_series(prec: int) -> YSeries:
    return YSeries.y(-2, prec)


def coef_series(c: Coef, prec: int) -> YSeries:
    """A coefficient polynomial in z and m evaluated at z = s0, m = y^-2."""
    max_m = max((mp for (_, mp), _ in c), default=0)
    z = s0_series(prec + 2 * max_m + 2)
    total = YSeries.zero(prec)
    for (zp, mp), k in c:
        total = total + (z ** zp).shift(-2 * mp) * k
    return total.truncate(prec)


# ---------------------------------------------------------------------------
# order-by-order solving


def _resolve(system: SymbolicSystem | str) -> SymbolicSystem:
    if isinstance(system, SymbolicSystem):
        return system
    return get_system(SYSTEM_ALIASES.get(system, system))


@dataclass(frozen=True)
class _ScaledTerm:
    coef: YSeries  # scaled coefficient c * y^(1 - degree)
    factors: tuple[str, ...]


def _scaled_terms(system: SymbolicSystem, prec: int) -> dict[str, list[_ScaledTerm]]:
    out = {}
    for eq in system.equations:
        if eq.lhs == "W":
            continue
        terms = []
        for t in eq.terms:
            c = coef_series(t.coef, prec + 2).shift(1 - t.degree)
            if not c.is_zero() and c.val < 0:
                raise SeriesSolveError(f"{eq.lhs}: scaled coefficient has a pole of order {-c.val}")
            terms.append(_ScaledTerm(c.truncate(prec), t.factors))
        out[eq.lhs] = terms
    return out


def _residuals(terms: dict[str, list[_ScaledTerm]], x: Mapping[str, YSeries], prec: int) -> dict[str, YSeries]:
    one = YSeries.const(1, prec)
    out = {}
    for name, eq_terms in terms.items():
        acc = x[name]
        for t in eq_terms:
            piece = t.coef
            for f in t.factors:
                piece = piece * (one if f == "W" else x[f])
            acc = acc - piece
        out[name] = acc.truncate(prec)
    return out


def _order0_jacobian(terms, names, seed) -> list[list[Fraction]]:
    idx = {n: i for i, n in enumerate(names)}
    jac = [[Fraction(int(i == j)) for j in range(len(names))] for i in range(len(names))]
    value = lambda f: Fraction(1) if f == "W" else seed[f]
    for i, name in enumerate(names):
        for t in terms[name]:
            c0 = t.coef[0]
            if not c0:
                continue
            if len(t.factors) == 1 and t.factors[0] != "W":
                jac[i][idx[t.factors[0]]] -= c0
            elif len(t.factors) == 2:
                a, b = t.factors
                if a != "W":
                    jac[i][idx[a]] -= c0 * value(b)
                if b != "W":
                    jac[i][idx[b]] -= c0 * value(a)
    return jac


def solve_system_series(system: SymbolicSystem | str, order: int = DEFAULT_ORDER,
                        seed: Mapping[str, Fraction] | None = None) -> dict[str, YSeries]:
    """Values X(s0) of every unknown, known modulo y^(order+1).

    W is fixed to 1/y.  Raises SeriesSolveError if the seed is not an
    order-0 root or the order-0 Jacobian is singular.
    """
    system = _resolve(system)
    names = [n for n in system.unknowns if n != "W"]
    seed = dict(SEEDS[system.name] if seed is None else seed)
    top = order + 1  # highest order of x needed
    prec = top + 1
    terms = _scaled_terms(system, prec + 2)
    coeffs = {n: [Fraction(seed[n])] for n in names}

    def current(p: int) -> dict[str, YSeries]:
        return {n: YSeries.from_terms(dict(enumerate(coeffs[n])), p) for n in names}

    res0 = _residuals(terms, current(1), 1)
    bad = [n for n, r in res0.items() if r[0] != 0]
    if bad:
        raise SeriesSolveError(f"seed is not an order-0 root (equations {bad})", order=0)
    jac = _order0_jacobian(terms, names, seed)
    for k in range(1, top + 1):
        for n in names:
            coeffs[n].append(Fraction(0))
        res = _residuals(terms, current(k + 1), k + 1)
        try:
            step = fraction_matrix_solve(jac, [-res[n][k] for n in names])
        except ArithmeticError as exc:
            raise SeriesSolveError(f"singular linear step at order {k}", order=k) from exc
        for n, v in zip(names, step):
            coeffs[n][k] = v
    x = current(prec)
    final = _residuals(terms, x, prec)
    if any(not r.is_zero() for r in final.values()):
        raise SeriesSolveError("residual does not vanish to the requested order", order=top)
    out = {"W": w_at_s0(order + 1)}
    for n in names:
        out[n] = x[n].shift(-1).truncate(order + 1)
    return {n: out[n] for n in system.unknowns}


def system_residuals(system: SymbolicSystem | str, values: Mapping[str, YSeries]) -> dict[str, YSeries]:
    """Unscaled equation residuals lhs - rhs in series arithmetic."""
    system = _resolve(system)
    prec = min(v.prec for v in values.values())
    z = s0_series(prec + 8)
    m = m_series(prec + 8)
    return system.residuals(dict(values), z, m)


# ---------------------------------------------------------------------------
# closed forms for the strong S1 case


def strong_simple_values(order: int = DEFAULT_ORDER, method: str = "both") -> dict[str, YSeries]:
    """B = Sc, T, A, U of the strong S1 system at s0.

    ``radical`` uses the explicit square-root solution, ``solver`` the
    order-by-order solver, ``both`` computes both and insists they agree.
    """
    if method not in ("radical", "solver", "both"):
        raise ValueError(f"unknown method {method!r}")
    if method == "solver":
        vals = solve_system_series("strong-S1", order)
        return {k: vals[k] for k in ("B", "T", "A", "U")}
    p = order + 8
    z, w, m = s0_series(p), w_at_s0(p), m_series(p)
    sc = m * z ** 3 / (1 + z ** 2 - z * w)
    lin = 1 - z ** 2 + z * sc - z * w
    root = (lin * lin - 4 * z * sc * (1 - z * w)).sqrt()
    t = (lin - root) / (2 * z * (1 - z * w))
    if t.val < 1:
        raise SeriesSolveError("radical branch does not vanish like the generating function")
    a = z * t / (1 - z * t)
    u = (m * z - sc + z * a * (w - t)) / (1 - z - z * w)
    radical = {"B": sc, "T": t, "A": a, "U": u}
    for k, v in radical.items():
        if v.prec < order + 1:
            raise SeriesSolveError(f"{k}: only {v.prec} orders available", order=order)
        radical[k] = v.truncate(order + 1)
    if method == "both":
        solved = solve_system_series("strong-S1", order)
        for k, v in radical.items():
            if not v.agrees_with(solved[k]):
                raise SeriesSolveError(f"radical and solver disagree on {k}", order=order)
    return radical


def s1_ratio_closed(order: int = DEFAULT_ORDER) -> YSeries:
    p = order + 8
    r, m = sqrt_m(p), m_series(p)
    return (m * (4 * m + 6 * r + 3) / ((r + 1) ** 2 * (2 * m + 3 * r + 2) ** 2)).truncate(order + 1)


def sc_ratio_closed(order: int = DEFAULT_ORDER) -> YSeries:
    p = order + 8
    r, m = sqrt_m(p), m_series(p)
    return (m / (2 * m + 3 * r + 2) ** 2).truncate(order + 1)


def strong_t_quotient(order: int = DEFAULT_ORDER) -> YSeries:
    """The strong-T ratio via the explicit quotient in T, A and the Sc ratio."""
    inner = order + GUARD
    vals = strong_simple_values(inner, method="radical")
    gamma = sc_ratio_closed(inner)
    p = inner + 1
    s0, r = s0_series(p + 2), sqrt_m(p)
    t, a = vals["T"], vals["A"]
    num = (t - 1 / s0) * (t + gamma / s0)
    den = t * (r + 1) + a - r * (2 * r + 3)
    return _checked(num / den, order, "strong-T quotient")


# ---------------------------------------------------------------------------
# limit ratios


def _checked(s: YSeries, order: int, what: str) -> YSeries:
    if s.prec < order + 1:
        raise SeriesSolveError(f"{what}: only known to order {s.prec - 1}", order=order)
    return s.truncate(order + 1)


def system_ratio_series(system: SymbolicSystem | str, order: int = DEFAULT_ORDER,
                        guard: int = GUARD) -> dict[str, YSeries]:
    """Limit ratios against W of every unknown, by the linear ratio equations
    solved in series arithmetic with the W ratio fixed to 1."""
    system = _resolve(system)
    names = [n for n in system.unknowns if n != "W"]
    idx = {n: i for i, n in enumerate(names)}
    while True:
        inner = order + guard
        vals = solve_system_series(system, inner)
        p = inner + 1
        n = len(names)
        zero = YSeries.zero(p + 4)
        mat = [[zero for _ in range(n)] for _ in range(n)]
        rhs = [zero for _ in range(n)]

        def add(i: int, j_name: str, amount: YSeries):
            if j_name == "W":
                rhs[i] = rhs[i] + amount
            else:
                j = idx[j_name]
                mat[i][j] = mat[i][j] - amount

        for eq in system.equations:
            if eq.lhs == "W":
                continue
            i = idx[eq.lhs]
            mat[i][i] = mat[i][i] + 1
            for t in eq.terms:
                if t.degree == 0:
                    continue
                c = coef_series(t.coef, p + 4)
                if t.degree == 1:
                    add(i, t.factors[0], c)
                else:
                    a, b = t.factors
                    add(i, a, c * vals[b])
                    add(i, b, c * vals[a])
        sol = series_linear_solve(mat, rhs)
        if all(s.prec >= order + 1 for s in sol):
            out = {"W": YSeries.const(1, order + 1)}
            for name, s in zip(names, sol):
                out[name] = s.truncate(order + 1)
            return {k: out[k] for k in system.unknowns}
        if guard > 4 * (order + 4):
            raise SeriesSolveError("ratio solve loses too many orders", order=order)
        guard *= 2


def ratio_series(target: str, order: int = DEFAULT_ORDER) -> YSeries:
    try:
        system, name = RATIO_TARGETS[target]
    except KeyError:
        raise ValueError(f"unknown target {target!r}; choose from {sorted(RATIO_TARGETS)}") from None
    return system_ratio_series(system, order)[name]


@dataclass(frozen=True)
class Bounds:
    lower: YSeries
    upper: YSeries
    numeric: dict[int, tuple]

    def to_json(self, digits: int = 12) -> dict:
        import mpmath
        return {
            "lower": self.lower.to_m_string(),
            "upper": self.upper.to_m_string(),
            "lower_json": self.lower.to_json(),
            "upper_json": self.upper.to_json(),
            "numeric": {str(m): [mpmath.nstr(lo, digits), mpmath.nstr(hi, digits)]
                        for m, (lo, hi) in self.numeric.items()},
        }


def bounds_report(order: int = DEFAULT_ORDER, ms=(2, 3, 4)) -> Bounds:
    """Lower bound: combined T ratio.  Upper bound: one minus combined A ratio."""
    ratios = system_ratio_series("combined-S1S2", order)
    lower = ratios["T"]
    upper = (1 - ratios["A"]).truncate(order + 1)
    numeric = {m: (lower.at_m(m), upper.at_m(m)) for m in ms}
    return Bounds(lower, upper, numeric)


def series_report(target: str, order: int = DEFAULT_ORDER, ms=()) -> dict:
    """Series (as text and JSON) for a ratio target or a whole system group."""
    if target in RATIO_TARGETS:
        items = {target: ratio_series(target, order)}
    elif target in SYSTEM_ALIASES:
        ratios = system_ratio_series(target, order)
        items = {k: v for k, v in ratios.items() if k != "W"}
    elif target == "bounds":
        b = bounds_report(order, ms or (2, 3, 4))
        items = {"lower": b.lower, "upper": b.upper}
    else:
        raise ValueError(f"unknown target {target!r}")
    return {
        name: {"text": s.to_m_string(), "series": s.to_json(),
               "at": {str(m): str(s.at_m(m)) for m in ms}}
        for name, s in items.items()
    }


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2)

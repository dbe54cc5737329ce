"""At-most-quadratic generating-function systems, stated once symbolically.

Every coefficient is a polynomial in ``z`` and ``m`` with integer
coefficients, stored as ``{(z_power, m_power): k}``.  The same system
object feeds the exact coefficient recursion, the cut solver and the
series solver in ``y = m**-1/2``.

Equations are listed in evaluation order: a term without a ``z`` factor
may only mention unknowns defined by earlier equations.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

Coef = tuple[tuple[tuple[int, int], int], ...]


def coef(*triples: tuple[int, int, int]) -> Coef:
    """Build a coefficient from ``(z_power, m_power, integer)`` triples."""
    acc: dict[tuple[int, int], int] = {}
    for zp, mp, k in triples:
        acc[(zp, mp)] = acc.get((zp, mp), 0) + k
    return tuple(sorted((key, k) for key, k in acc.items() if k))


def coef_in_z(c: Coef, m: int) -> dict[int, int]:
    """Specialize a coefficient to an integer m, leaving a polynomial in z."""
    out: dict[int, int] = {}
    for (zp, mp), k in c:
        out[zp] = out.get(zp, 0) + k * m ** mp
    return {p: v for p, v in out.items() if v}


def evaluate_coef(c: Coef, z: Any, m: Any) -> Any:
    total = 0
    for (zp, mp), k in c:
        total = total + k * z ** zp * m ** mp
    return total


@dataclass(frozen=True)
class Term:
    coef: Coef
    factors: tuple[str, ...] = ()

    @property
    def degree(self) -> int:
        return len(self.factors)


@dataclass(frozen=True)
class Equation:
    lhs: str
    terms: tuple[Term, ...]


@dataclass(frozen=True)
class SymbolicSystem:
    name: str
    equations: tuple[Equation, ...]
    # unknowns whose limit ratios are of interest, in reporting order
    report: tuple[str, ...] = field(default=())

    @property
    def unknowns(self) -> list[str]:
        return [eq.lhs for eq in self.equations]

    def equation(self, name: str) -> Equation:
        for eq in self.equations:
            if eq.lhs == name:
                return eq
        raise KeyError(name)

    def validate(self) -> None:
        seen: set[str] = set()
        names = set(self.unknowns)
        for eq in self.equations:
            for t in eq.terms:
                if t.degree > 2:
                    raise ValueError(f"{self.name}: term of degree {t.degree} in {eq.lhs}")
                for f in t.factors:
                    if f not in names:
                        raise ValueError(f"{self.name}: unknown {f} in {eq.lhs}")
                free_of_z = any(zp == 0 for (zp, _), _k in t.coef)
                if free_of_z and t.degree and any(f not in seen for f in t.factors):
                    raise ValueError(f"{self.name}: {eq.lhs} uses {t.factors} before definition")
            seen.add(eq.lhs)

    def residuals(self, values: dict[str, Any], z: Any, m: Any) -> dict[str, Any]:
        """lhs minus rhs for every equation, in whatever arithmetic ``values`` use."""
        out = {}
        for eq in self.equations:
            out[eq.lhs] = values[eq.lhs] - rhs_value(eq, values, z, m)
        return out


def rhs_value(eq: Equation, values: dict[str, Any], z: Any, m: Any) -> Any:
    total = 0
    for t in eq.terms:
        piece = evaluate_coef(t.coef, z, m)
        for f in t.factors:
            piece = piece * values[f]
        total = total + piece
    return total


# ---------------------------------------------------------------------------
# exact coefficient recursion


def coefficient_dp(system: SymbolicSystem, m: int, n_max: int) -> dict[str, list[int]]:
    """Coefficients [z^n] of every unknown for n = 0..n_max, exact integers.

    All unknowns are assumed to vanish at z = 0.
    """
    system.validate()
    out = {name: [0] * (n_max + 1) for name in system.unknowns}
    specialized = [
        (eq.lhs, [(coef_in_z(t.coef, m), t.factors) for t in eq.terms])
        for eq in system.equations
    ]
    for n in range(1, n_max + 1):
        for lhs, terms in specialized:
            acc = 0
            for poly, factors in terms:
                for p, k in poly.items():
                    rest = n - p
                    if rest < 0:
                        continue
                    if not factors:
                        acc += k if rest == 0 else 0
                    elif len(factors) == 1:
                        acc += k * out[factors[0]][rest]
                    else:
                        a, b = out[factors[0]], out[factors[1]]
                        acc += k * sum(a[i] * b[rest - i] for i in range(1, rest))
            out[lhs][n] = acc
    return out


# ---------------------------------------------------------------------------
# the concrete systems

def _t(triples: Sequence[tuple[int, int, int]], *factors: str) -> Term:
    return Term(coef(*triples), tuple(factors))


def _w_equation() -> Equation:
    return Equation("W", (_t([(1, 1, 1)]), _t([(1, 0, 1)], "W"), _t([(1, 0, 1)], "W", "W")))


def w_system() -> SymbolicSystem:
    return SymbolicSystem("W", (_w_equation(),), report=("W",))


def s1_system() -> SymbolicSystem:
    """Simple first-kind tautologies as a single equation over W."""
    s1 = Equation("S1", (
        _t([(3, 1, 1)]),
        _t([(2, 1, 1), (2, 0, -1)], "S1"),
        _t([(1, 0, 1), (2, 0, 1), (3, 0, 1)], "W", "S1"),
    ))
    return SymbolicSystem("s1", (_w_equation(), s1), report=("S1",))


def _sc_equation(name: str = "Sc") -> Equation:
    return Equation(name, (
        _t([(3, 1, 1)]),
        _t([(2, 0, -1)], name),
        _t([(1, 0, 1)], "W", name),
    ))


def sc_system() -> SymbolicSystem:
    return SymbolicSystem("sc", (_w_equation(), _sc_equation()), report=("Sc",))


def _strong_tua(basis: str) -> tuple[Equation, ...]:
    return (
        Equation("T", (_t([(0, 0, 1)], basis), _t([(1, 0, 1)], "A"), _t([(1, 0, 1)], "T", "W"))),
        Equation("U", (
            _t([(1, 1, 1)]), _t([(0, 0, -1)], basis), _t([(1, 0, 1)], "U"),
            _t([(1, 0, 1)], "U", "W"), _t([(1, 0, 1)], "A", "W"), _t([(1, 0, -1)], "A", "T"),
        )),
        Equation("A", (_t([(1, 0, 1)], "T"), _t([(1, 0, 1)], "A", "T"))),
    )


def _weak_tua(basis: str) -> tuple[Equation, ...]:
    return (
        Equation("T", (
            _t([(0, 0, 1)], basis), _t([(1, 0, 1)], "A"),
            _t([(1, 0, 1)], "T", "W"), _t([(1, 0, 1)], "A", "W"), _t([(1, 0, -1)], "A", "T"),
        )),
        Equation("U", (
            _t([(1, 1, 1)]), _t([(0, 0, -1)], basis), _t([(1, 0, 1)], "U"), _t([(1, 0, 1)], "U", "W"),
        )),
        Equation("A", (_t([(1, 0, 1)], "T"), _t([(1, 0, 1)], "A", "T"))),
    )


def strong_s1_system() -> SymbolicSystem:
    eqs = (_w_equation(), _sc_equation("B")) + _strong_tua("B")
    return SymbolicSystem("strong-S1", eqs, report=("B", "T", "U", "A"))


def _weak_basis_equation(name: str, const: Sequence[tuple[int, int, int]],
                         wa: Sequence[tuple[int, int, int]],
                         self_coef: Sequence[tuple[int, int, int]]) -> Equation:
    """name = const + wa*(W - A) + self_coef*name + z*name*(W - A)."""
    terms = [_t(const)]
    if wa:
        terms += [_t(wa, "W"), _t([(zp, mp, -k) for zp, mp, k in wa], "A")]
    terms += [_t(self_coef, name), _t([(1, 0, 1)], name, "W"), _t([(1, 0, -1)], name, "A")]
    return Equation(name, tuple(terms))


def weak_s1_system() -> SymbolicSystem:
    b = _weak_basis_equation("B", [(3, 1, 1)], [], [(2, 0, -1)])
    # the basis refers to A at lower orders only, so it can be evaluated first
    eqs = (_w_equation(), b) + _weak_tua("B")
    return SymbolicSystem("weak-S1", eqs, report=("B", "T", "U", "A"))


def combined_system() -> SymbolicSystem:
    mm1 = lambda zp: [(zp, 2, 1), (zp, 1, -1)]
    eqs = (
        _w_equation(),
        _weak_basis_equation("B1", [(3, 1, 1)], [], [(2, 0, -1)]),
        _weak_basis_equation("B2", mm1(3), [(3, 1, 1)], [(2, 0, -1)]),
        _weak_basis_equation("B3", mm1(3), [(3, 1, 1)], [(2, 0, -1), (3, 0, -1)]),
        _weak_basis_equation("B4", mm1(4), [(4, 1, 1)], [(3, 0, -1)]),
        _weak_basis_equation("B5", mm1(4), [(4, 1, 1)], [(2, 0, -1), (3, 0, -1)]),
        Equation("B", (
            _t([(0, 0, 1)], "B1"), _t([(0, 0, 1)], "B2"), _t([(0, 0, -1)], "B3"),
            _t([(0, 0, 1)], "B4"), _t([(0, 0, -1)], "B5"),
        )),
    ) + _weak_tua("B")
    return SymbolicSystem("combined-S1S2", eqs, report=("B", "T", "U", "A"))


SYSTEMS: dict[str, Callable[[], SymbolicSystem]] = {
    "W": w_system,
    "s1": s1_system,
    "sc": sc_system,
    "strong-S1": strong_s1_system,
    "weak-S1": weak_s1_system,
    "combined-S1S2": combined_system,
}


def get_system(name: str) -> SymbolicSystem:
    try:
        return SYSTEMS[name]()
    except KeyError:
        raise ValueError(f"unknown system {name!r}; choose from {sorted(SYSTEMS)}") from None

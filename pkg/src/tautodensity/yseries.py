"""Truncated Laurent series in y = m^(-1/2) with exact rational coefficients.

A series is known modulo y^prec: it stores its valuation ``val`` and the
coefficients of y^val .. y^(prec-1).  Arithmetic propagates the absolute
precision, so a result never claims more orders than its inputs justify.
"""
from __future__ import annotations

from fractions import Fraction
from math import isqrt
from typing import Iterable, Sequence

import mpmath

DEFAULT_PREC = 12


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


class YSeries:
    __slots__ = ("val", "coeffs", "prec")

    def __init__(self, val: int, coeffs: Sequence, prec: int):
        coeffs = [_frac(c) for c in coeffs]
        if val + len(coeffs) != prec:
            raise ValueError("coefficient count does not match the precision")
        while coeffs and coeffs[0] == 0:
            coeffs.pop(0)
            val += 1
        self.val = val if coeffs else prec
        self.coeffs = tuple(coeffs)
        self.prec = prec

    # construction
    @classmethod
    def from_terms(cls, terms: dict[int, object], prec: int = DEFAULT_PREC) -> "YSeries":
        if not terms:
            return cls.zero(prec)
        lo = min(min(terms), prec)
        return cls(lo, [terms.get(k, 0) for k in range(lo, prec)], prec)

    @classmethod
    def zero(cls, prec: int = DEFAULT_PREC) -> "YSeries":
        return cls(prec, (), prec)

    @classmethod
    def const(cls, c, prec: int = DEFAULT_PREC) -> "YSeries":
        return cls.from_terms({0: c}, prec)

    @classmethod
    def y(cls, power: int = 1, prec: int = DEFAULT_PREC) -> "YSeries":
        return cls.from_terms({power: 1}, prec)

    # access
    def is_zero(self) -> bool:
        return not self.coeffs

    def __getitem__(self, k: int) -> Fraction:
        if k >= self.prec:
            raise IndexError(f"order {k} is beyond the known precision {self.prec}")
        if k < self.val:
            return Fraction(0)
        return self.coeffs[k - self.val]

    def terms(self) -> dict[int, Fraction]:
        return {self.val + i: c for i, c in enumerate(self.coeffs) if c}

    def truncate(self, prec: int) -> "YSeries":
        if prec >= self.prec:
            return self
        return YSeries.from_terms({k: c for k, c in self.terms().items() if k < prec}, prec)

    def shift(self, k: int) -> "YSeries":
        """Multiply by y^k exactly."""
        return YSeries(self.val + k, self.coeffs, self.prec + k)

    # arithmetic
    def _coerce(self, other) -> "YSeries":
        if isinstance(other, YSeries):
            return other
        return YSeries.const(other, max(self.prec, 0) + 64)

    def __add__(self, other):
        other = self._coerce(other)
        prec = min(self.prec, other.prec)
        lo = min(self.val, other.val, prec)
        return YSeries(lo, [self._get(k) + other._get(k) for k in range(lo, prec)], prec)

    __radd__ = __add__

    def _get(self, k: int) -> Fraction:
        return self[k] if k < self.prec else Fraction(0)

    def __neg__(self):
        return YSeries(self.val, [-c for c in self.coeffs], self.prec)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, YSeries):
            c = _frac(other)
            if c == 0:
                return YSeries.zero(max(self.prec, 0) + 64)
            return YSeries(self.val, [c * x for x in self.coeffs], self.prec)
        val = self.val + other.val
        prec = min(self.prec + other.val, other.prec + self.val)
        n = prec - val
        a, b = self.coeffs, other.coeffs
        out = []
        for k in range(max(n, 0)):
            acc = Fraction(0)
            for i in range(max(0, k - len(b) + 1), min(k, len(a) - 1) + 1):
                acc += a[i] * b[k - i]
            out.append(acc)
        if n <= 0:
            return YSeries.zero(prec)
        return YSeries(val, out, prec)

    __rmul__ = __mul__

    def inverse(self) -> "YSeries":
        if self.is_zero():
            raise ZeroDivisionError("division by a series with no known nonzero term")
        u = self.coeffs
        n = len(u)
        inv = [1 / u[0]]
        for k in range(1, n):
            acc = sum((u[i] * inv[k - i] for i in range(1, min(k, n - 1) + 1)), Fraction(0))
            inv.append(-acc / u[0])
        return YSeries(-self.val, inv, -self.val + n)

    def __truediv__(self, other):
        if not isinstance(other, YSeries):
            c = _frac(other)
            if c == 0:
                raise ZeroDivisionError("division by zero")
            return self * (1 / c)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return (self ** -k).inverse()
        out = YSeries.const(1, self.prec + 64 if not self.is_zero() else self.prec)
        for _ in range(k):
            out = out * self
        return out

    def sqrt(self) -> "YSeries":
        if self.is_zero():
            raise ValueError("square root of a series with no known nonzero term")
        if self.val % 2:
            raise ValueError(f"square root of a series of odd order {self.val}")
        lead = self.coeffs[0]
        rn, rd = isqrt(lead.numerator) if lead > 0 else -1, isqrt(lead.denominator)
        if lead <= 0 or rn * rn != lead.numerator or rd * rd != lead.denominator:
            raise ValueError(f"leading coefficient {lead} is not a rational square")
        u = self.coeffs
        s = [Fraction(rn, rd)]
        for k in range(1, len(u)):
            acc = sum((s[i] * s[k - i] for i in range(1, k)), Fraction(0))
            s.append((u[k] - acc) / (2 * s[0]))
        half = self.val // 2
        return YSeries(half, s, half + len(u))

    # comparison and evaluation
    def agrees_with(self, other: "YSeries", prec: int | None = None) -> bool:
        """Equal as far as both are known (or up to ``prec``)."""
        top = min(self.prec, other.prec) if prec is None else prec
        if top > min(self.prec, other.prec):
            return False
        lo = min(self.val, other.val)
        return all(self._get(k) == other._get(k) for k in range(lo, top))

    def __eq__(self, other):
        if not isinstance(other, YSeries):
            return NotImplemented
        return self.prec == other.prec and self.agrees_with(other)

    def __hash__(self):
        return hash((self.val, self.coeffs, self.prec))

    def evaluate(self, y):
        """Value of the known polynomial part at a numeric y."""
        y = mpmath.mpf(y)
        return mpmath.fsum(mpmath.mpf(c.numerator) / c.denominator * y ** k for k, c in self.terms().items())

    def at_m(self, m):
        return self.evaluate(1 / mpmath.sqrt(m))

    # rendering in powers of m
    def m_coefficients(self) -> list[tuple[Fraction, Fraction]]:
        """(m exponent, coefficient) pairs; y^k is m^(-k/2)."""
        return [(Fraction(-k, 2), c) for k, c in sorted(self.terms().items())]

    def to_m_string(self) -> str:
        parts = []
        for e, c in self.m_coefficients():
            parts.append(_render_term(c, e))
        order = _render_power(Fraction(-self.prec, 2))
        text = ""
        for p in parts:
            if not text:
                text = p
            elif p.startswith("-"):
                text += " - " + p[1:]
            else:
                text += " + " + p
        tail = f"O({order})" if order != "1" else "O(1)"
        return f"{text} + {tail}" if text else tail

    def to_json(self) -> dict:
        e = Fraction(-self.prec, 2)
        return {
            "order_num": e.numerator,
            "order_den": e.denominator,
            "coeffs": [[_fraction_text(exp), c.numerator, c.denominator] for exp, c in self.m_coefficients()],
        }

    def __repr__(self):
        return f"YSeries({self.to_m_string()})"


def _fraction_text(f: Fraction) -> str:
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def _render_power(e: Fraction) -> str:
    if e == 0:
        return "1"
    return "m" if e == 1 else f"m^{_fraction_text(e)}"


def _render_term(c: Fraction, e: Fraction) -> str:
    if e == 0:
        return _fraction_text(c)
    if e == -1 and abs(c) == 1:
        return "-1/m" if c < 0 else "1/m"
    power = _render_power(e)
    if abs(c) == 1:
        return ("-" if c < 0 else "") + power
    return f"{_fraction_text(c)}*{power}"


def series_linear_solve(matrix: list[list[YSeries]], rhs: list[YSeries]) -> list[YSeries]:
    """Gaussian elimination over truncated Laurent series, pivoting on the
    entry of lowest valuation (most precisely invertible)."""
    n = len(matrix)
    a = [list(row) + [b] for row, b in zip(matrix, rhs)]
    for k in range(n):
        piv = min(range(k, n), key=lambda i: (a[i][k].val if not a[i][k].is_zero() else 10 ** 9))
        if a[piv][k].is_zero():
            raise ArithmeticError(f"singular series system at column {k}")
        a[k], a[piv] = a[piv], a[k]
        inv = a[k][k].inverse()
        for i in range(k + 1, n):
            if a[i][k].is_zero():
                continue
            factor = a[i][k] * inv
            a[i] = [a[i][j] - factor * a[k][j] if j >= k else a[i][j] for j in range(n + 1)]
    x: list[YSeries | None] = [None] * n
    for k in range(n - 1, -1, -1):
        acc = a[k][n]
        for j in range(k + 1, n):
            acc = acc - a[k][j] * x[j]
        x[k] = acc / a[k][k]
    return x  # type: ignore[return-value]


def fraction_matrix_solve(matrix: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    """Exact rational Gaussian elimination for a square nonsingular system."""
    n = len(matrix)
    a = [[Fraction(v) for v in row] + [Fraction(b)] for row, b in zip(matrix, rhs)]
    for k in range(n):
        piv = next((i for i in range(k, n) if a[i][k] != 0), None)
        if piv is None:
            raise ArithmeticError(f"singular rational system at column {k}")
        a[k], a[piv] = a[piv], a[k]
        for i in range(n):
            if i != k and a[i][k] != 0:
                f = a[i][k] / a[k][k]
                a[i] = [vi - f * vk for vi, vk in zip(a[i], a[k])]
    return [a[k][n] / a[k][k] for k in range(n)]


def from_m_terms(terms: Iterable[tuple[Fraction | int | str, Fraction | int | str]], prec: int) -> YSeries:
    """Build a series from (m exponent, coefficient) pairs, e.g. (-3/2, 1/4)."""
    out = {}
    for e, c in terms:
        k = -2 * Fraction(e)
        if k.denominator != 1:
            raise ValueError(f"m exponent {e} is not a half-integer")
        out[int(k)] = out.get(int(k), 0) + Fraction(c)
    return YSeries.from_terms(out, prec)

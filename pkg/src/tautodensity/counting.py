"""Exact coefficient counts: all formulae, every falsity class, categories.

Two independent routes produce per-class counts:

* ``class_coefficients`` runs the class recursion directly.  The pairwise
  class convolution ``out[k & ~j] += u[j] * v[k]`` is evaluated through
  subset/superset sums, which turn it into a pointwise product.
* ``class_counts_at`` builds the block series ``I_{-;B}`` from their
  quadratic closed form (one power-series square root each) and recombines
  them by the signed subset sum.  It reaches lengths in the thousands.
"""
from __future__ import annotations

import contextlib
import io
import itertools
import struct
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import flint
import mpmath
import numpy as np

from .errors import ResourceRefusal
from .logic import full_mask, permute_mask, var_mask
from .systems import coefficient_dp, get_system

DEFAULT_PRECISION = 256
MAX_TABLE_VARS = 3


def w_coefficients(m: int, n_max: int) -> list[int]:
    """[z^n]W for n = 0..n_max (index 0 is 0)."""
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    w = [0] * (n_max + 1)
    for n in range(1, n_max + 1):
        w[n] = (m if n == 1 else 0) + w[n - 1] + sum(w[i] * w[n - 1 - i] for i in range(1, n - 1))
    return w


# ---------------------------------------------------------------------------
# subset-lattice transforms on arrays indexed by a bitmask of ``bits`` bits


def subset_sum(a: np.ndarray, bits: int) -> np.ndarray:
    """out[S] = sum of a[T] over T subset of S."""
    out = a.copy()
    for b in range(bits):
        view = out.reshape(-1, 2, 1 << b)
        view[:, 1, :] += view[:, 0, :]
    return out


def superset_sum(a: np.ndarray, bits: int) -> np.ndarray:
    out = a.copy()
    for b in range(bits):
        view = out.reshape(-1, 2, 1 << b)
        view[:, 0, :] += view[:, 1, :]
    return out


def superset_mobius(a: np.ndarray, bits: int) -> np.ndarray:
    out = a.copy()
    for b in range(bits):
        view = out.reshape(-1, 2, 1 << b)
        view[:, 0, :] -= view[:, 1, :]
    return out


def class_convolution(u: Sequence[int], v: Sequence[int], m: int) -> list[int]:
    """Direct form: out[i] = sum of u[j] v[k] over k AND NOT j = i (j premise)."""
    out = [0] * len(u)
    for j, uj in enumerate(u):
        if uj:
            for k, vk in enumerate(v):
                if vk:
                    out[k & ~j] += uj * vk
    return out


def _popcount(x: int) -> int:
    return bin(x).count("1")


# ---------------------------------------------------------------------------
# CoeffTable


@dataclass(frozen=True)
class CoeffTable:
    """counts[A][n] = number of length-n formulae with falsity mask A.

    Rows have length n_max + 1; column 0 is always zero.
    """
    m: int
    n_max: int
    counts: tuple[tuple[int, ...], ...]

    @property
    def num_classes(self) -> int:
        return len(self.counts)

    def row(self, mask: int) -> tuple[int, ...]:
        return self.counts[mask]

    def totals(self) -> list[int]:
        return [sum(row[n] for row in self.counts) for n in range(self.n_max + 1)]

    def tautologies(self) -> tuple[int, ...]:
        return self.counts[0]

    def antilogies(self) -> tuple[int, ...]:
        return self.counts[-1]

    # binary cache: b"TAUT1", u32 m, u32 n_max, then for each class and each
    # n in 1..n_max a u32 byte count followed by little-endian magnitude bytes
    MAGIC = b"TAUT1"

    def save(self, path: str | Path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.MAGIC)
            fh.write(struct.pack("<II", self.m, self.n_max))
            for row in self.counts:
                for value in row[1:]:
                    raw = value.to_bytes((value.bit_length() + 7) // 8, "little")
                    fh.write(struct.pack("<I", len(raw)))
                    fh.write(raw)

    @classmethod
    def load(cls, path: str | Path) -> "CoeffTable":
        data = Path(path).read_bytes()
        stream = io.BytesIO(data)
        if stream.read(5) != cls.MAGIC:
            raise ValueError(f"{path}: not a coefficient cache")
        m, n_max = struct.unpack("<II", stream.read(8))
        rows = []
        for _ in range(1 << (1 << m)):
            row = [0]
            for _ in range(n_max):
                (size,) = struct.unpack("<I", stream.read(4))
                row.append(int.from_bytes(stream.read(size), "little"))
            rows.append(tuple(row))
        if stream.read(1):
            raise ValueError(f"{path}: trailing bytes after table")
        return cls(m, n_max, tuple(rows))


def class_coefficients(m: int, n_max: int) -> CoeffTable:
    """Per-class counts through the class recursion, exact integers."""
    if m > MAX_TABLE_VARS:
        raise ResourceRefusal(
            f"class table for m={m} needs {1 << (1 << m)} classes per length; use the exact-density solver"
        )
    if m < 1 or n_max < 1:
        raise ValueError("need m >= 1 and n_max >= 1")
    bits = 1 << m
    size = 1 << bits
    rows = np.zeros((n_max + 1, size), dtype=object)
    # transformed copies: pre[n][S] = sum over premise classes disjoint from S,
    # post[n][S] = sum over conclusion classes containing S
    pre = np.zeros((n_max + 1, size), dtype=object)
    post = np.zeros((n_max + 1, size), dtype=object)
    for i in range(m):
        rows[1, var_mask(i, m)] += 1
    for n in range(1, n_max + 1):
        if n > 1:
            current = rows[n - 1][::-1].copy()  # negation: complement class
            if n > 2:
                products = (pre[1:n - 1] * post[n - 2:0:-1]).sum(axis=0)
                current += superset_mobius(products, bits)
            rows[n] = current
        pre[n] = subset_sum(rows[n], bits)[::-1]
        post[n] = superset_sum(rows[n], bits)
    counts = tuple(tuple(int(rows[n, a]) for n in range(n_max + 1)) for a in range(size))
    return CoeffTable(m, n_max, counts)


def load_or_build(m: int, n_max: int, cache_path: str | Path | None = None) -> CoeffTable:
    if cache_path is not None and Path(cache_path).exists():
        table = CoeffTable.load(cache_path)
        if table.m == m and table.n_max >= n_max:
            return table
    table = class_coefficients(m, n_max)
    if cache_path is not None:
        table.save(cache_path)
    return table


# ---------------------------------------------------------------------------
# block series route


def subset_orbits(m: int) -> dict[int, int]:
    """Map every subset B of assignments to a canonical member of its orbit
    under permutations of the variables (block series are orbit invariants)."""
    size = 1 << (1 << m)
    perms = list(itertools.permutations(range(m)))
    canon = {}
    for b in range(size):
        if b not in canon:
            orbit = {permute_mask(b, p, m) for p in perms}
            rep = min(orbit)
            for member in orbit:
                canon[member] = rep
    return canon


@contextlib.contextmanager
def _series_cap(cap: int):
    old = flint.ctx.cap
    flint.ctx.cap = cap
    try:
        yield
    finally:
        flint.ctx.cap = old


def block_series_flint(m: int, n_max: int) -> dict[int, "flint.fmpq_series"]:
    """I_{-;B} as flint series for every B (orbit members share one object).

    Each block satisfies I = z(m_B + up) + z(sigma + up) I + z sigma I^2 with
    up the signed sum of strictly larger blocks, solved by the root with
    I(0) = 0.
    """
    if m > MAX_TABLE_VARS:
        raise ResourceRefusal(f"block series for m={m} would need {1 << (1 << m)} blocks")
    full = full_mask(m)
    vmasks = [var_mask(i, m) for i in range(m)]
    canon = subset_orbits(m)
    series: dict[int, flint.fmpq_series] = {}
    with _series_cap(n_max + 2):
        z = flint.fmpq_series([0, 1])
        for b in sorted(range(full + 1), key=lambda x: (-_popcount(x), x)):
            rep = canon[b]
            if rep in series:
                series[b] = series[rep]
                continue
            sigma = -1 if _popcount(b) % 2 else 1
            m_b = sum(1 for v in vmasks if (v | b) == full)
            up = flint.fmpq_series([0])
            free = full & ~b
            sub = free
            while sub:
                bp = b | sub
                up += series[bp] if _popcount(bp) % 2 == 0 else -series[bp]
                sub = (sub - 1) & free
            lin = sigma + up
            disc = (1 - lin * z) ** 2 - 4 * sigma * (m_b + up) * z ** 2
            numer = (1 - lin * z - disc.sqrt()).coeffs()
            # divide by 2 sigma z
            series[b] = flint.fmpq_series([c / (2 * sigma) for c in numer[1:n_max + 2]])
    return series


def _as_int(q) -> int:
    if q.q != 1:
        raise ArithmeticError("block series coefficient is not an integer")
    return int(q.p)


def block_series(m: int, n_max: int) -> dict[int, list[int]]:
    """Integer coefficient lists [z^n]I_{-;B}, n = 0..n_max, for every B."""
    raw = block_series_flint(m, n_max)
    cache: dict[int, list[int]] = {}
    out = {}
    for b, s in raw.items():
        key = id(s)
        if key not in cache:
            coeffs = [_as_int(c) for c in s.coeffs()]
            cache[key] = (coeffs + [0] * (n_max + 1))[:n_max + 1]
        out[b] = cache[key]
    return out


def signed_subset_combination(block_values: Sequence[int], m: int) -> list[int]:
    """Values of I_A from values of I_{-;B}: (-1)^|A| sum over B within A^c of (-1)^|B| I_{-;B}."""
    bits = 1 << m
    size = 1 << bits
    signed = np.array(
        [(-v if _popcount(b) % 2 else v) for b, v in enumerate(block_values)], dtype=object
    )
    sums = subset_sum(signed, bits)[::-1]  # index A holds the sum over subsets of A^c
    return [int(-sums[a] if _popcount(a) % 2 else sums[a]) for a in range(size)]


def class_counts_at(m: int, n: int) -> list[int]:
    """Counts of length-n formulae in every class via block series."""
    raw = block_series_flint(m, n)
    values = []
    for b in range(1 << (1 << m)):
        c = raw[b].coeffs()
        values.append(_as_int(c[n]) if n < len(c) else 0)
    return signed_subset_combination(values, m)


# ---------------------------------------------------------------------------
# ratios and truncations


def ratio_at(table: CoeffTable, mask: int, n: int, precision: int = DEFAULT_PRECISION) -> mpmath.mpf:
    if not 1 <= n <= table.n_max:
        raise ValueError(f"n={n} outside 1..{table.n_max}")
    total = sum(row[n] for row in table.counts)
    if total == 0:
        raise ZeroDivisionError(f"no formulae of length {n}")
    with mpmath.workprec(precision):
        return mpmath.mpf(table.counts[mask][n]) / total


@dataclass(frozen=True)
class SeriesTruncation:
    """Coefficients c_0..c_s of a power series, evaluated as a polynomial."""
    coeffs: tuple

    @classmethod
    def of(cls, coeffs: Sequence) -> "SeriesTruncation":
        return cls(tuple(coeffs))

    @property
    def depth(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, r, s: int | None = None, precision: int = DEFAULT_PRECISION):
        return truncated_eval(self.coeffs, r, self.depth if s is None else s, precision)


def truncated_eval(coeffs: Sequence, r, s: int, precision: int = DEFAULT_PRECISION):
    """sum of c_n r^n for n <= s (Horner), exact when r is a Fraction."""
    if s >= len(coeffs):
        raise ValueError(f"truncation depth {s} exceeds {len(coeffs) - 1} available coefficients")
    if isinstance(r, Fraction):
        acc = Fraction(0)
        for c in reversed(coeffs[:s + 1]):
            acc = acc * r + c
        return acc
    with mpmath.workprec(precision):
        r = mpmath.mpf(r)
        acc = mpmath.mpf(0)
        for c in reversed(coeffs[:s + 1]):
            acc = acc * r + c
        return +acc


# ---------------------------------------------------------------------------
# categories

_CATEGORY_SYSTEMS = {
    ("S1", "strong"): "strong-S1",
    ("S1", "weak"): "weak-S1",
    ("S1S2", "weak"): "combined-S1S2",
}


def category_system_name(basis: str, strength: str) -> str:
    key = (basis.replace("∪", "").replace("+", "").upper(), strength.lower())
    try:
        return _CATEGORY_SYSTEMS[key]
    except KeyError:
        raise ValueError(f"no category system for basis={basis!r}, strength={strength!r}") from None


def category_coefficients(m: int, n_max: int, basis: str = "S1", strength: str = "strong") -> dict[str, list[int]]:
    """Per-length counts of basis (B) and categories T/U/A, plus W."""
    coeffs = coefficient_dp(get_system(category_system_name(basis, strength)), m, n_max)
    return {key: coeffs[key] for key in ("W", "B", "T", "U", "A")}


# ---------------------------------------------------------------------------
# single-variable algebraic check

# coefficient of I^k is P_k(z) + Q_k(z) (1 - z) W(z); lists are ascending in z
_OCTIC = {
    8: ([0, 0, 0, 0, 0, 0, 0, 1], []),
    7: ([0, 0, 0, 0, 0, 0, -8], []),
    6: ([0, 0, 0, 0, 0, 27, 2, -2], [0, 0, 0, 0, 0, 0, 1]),
    5: ([0, 0, 0, 0, -50, -12, 12], [0, 0, 0, 0, 0, -6]),
    4: ([0, 0, 0, 55, 28, -28, -4, 1], [0, 0, 0, 0, 15, 2]),
    3: ([0, 0, -36, -32, 32, 16, -4], [0, 0, 0, -20, -8]),
    2: ([0, 13, 18, -19, -22, 4], [0, 0, 15, 12, 1]),
    1: ([-2, -4, 6, 12], [0, -6, -8, -2]),
    0: ([0, -1, -2], [1, 2, 1]),
}


def octic_residual(taut: Sequence[int], w: Sequence[int], s: int) -> list[int]:
    """Coefficients 0..s of the single-variable octic evaluated on truncated series."""
    trunc = s + 1
    t_poly = flint.fmpz_poly(list(taut[:trunc]))
    w_poly = flint.fmpz_poly(list(w[:trunc]))
    one_minus_z_w = flint.fmpz_poly([1, -1]).mul_low(w_poly, trunc)
    total = flint.fmpz_poly([])
    power = flint.fmpz_poly([1])
    for k in range(9):
        p, q = _OCTIC[k]
        c = flint.fmpz_poly(p) + flint.fmpz_poly(q).mul_low(one_minus_z_w, trunc)
        total += c.mul_low(power, trunc)
        power = power.mul_low(t_poly, trunc)
    coeffs = [int(c) for c in total.coeffs()]
    return (coeffs + [0] * trunc)[:trunc]


def verify_octic_m1(s: int, taut: Sequence[int] | None = None, w: Sequence[int] | None = None) -> int:
    """First order at which the octic residual is nonzero; s + 1 means none up to s."""
    if taut is None or w is None:
        table = class_coefficients(1, max(s, 1))
        taut = table.tautologies() if taut is None else taut
        w = table.totals() if w is None else w
    residual = octic_residual(taut, w, s)
    for order, value in enumerate(residual):
        if value:
            return order
    return s + 1


def w_asymptotic_estimate(m: int, n: int, precision: int = DEFAULT_PRECISION) -> mpmath.mpf:
    with mpmath.workprec(precision):
        root = mpmath.sqrt(m)
        return mpmath.sqrt((2 * m + root) / (4 * mpmath.pi * mpmath.mpf(n) ** 3)) * (2 * root + 1) ** n

"""Limit densities of every falsity class from nested radicals at s0.

For each block B (a set of assignments) the value alpha_B of I_{-;B} at the
dominant singularity s0 = 1/(2 sqrt(m) + 1) and the square-root weight
beta_B are obtained in decreasing order of |B|, since each block only
refers to strictly larger ones.  Densities then follow from a signed sum
over subsets.

Arithmetic is fixed point: a real x is held as the integer round(x 2^F).
The signed superset sums over larger blocks are therefore exact integer
sums and run as vectorized lattice transforms, one popcount level at a
time; rounding only happens in the per-block radical step.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .counting import subset_sum, superset_sum
from .errors import InconsistentState, ResourceRefusal
from .logic import full_mask, var_mask
from .numfmt import fixed_to_decimal

GUARD_BITS = 64
MAX_DENSITY_VARS = 4


def _popcount(x: int) -> int:
    return bin(x).count("1")


def count_m_B(b: int, m: int) -> int:
    """Number of variables whose falsity set lies in the block of B."""
    full = full_mask(m)
    return sum(1 for i in range(m) if (var_mask(i, m) | b) == full)


def lincomb_coeffs(a: int, b: int, m: int) -> dict[int, int]:
    """Signed coefficients of I_{-;B'} in I_{A;B}, for B within B' within A^c."""
    if a & b:
        raise ValueError("A and B must be disjoint")
    full = full_mask(m)
    free = full & ~a & ~b
    sign_a = -1 if _popcount(a) % 2 else 1
    out = {}
    sub = free
    while True:
        bp = b | sub
        out[bp] = sign_a * (-1 if _popcount(bp) % 2 else 1)
        if sub == 0:
            break
        sub = (sub - 1) & free
    return dict(sorted(out.items()))


@dataclass(frozen=True)
class BlockRecord:
    block: int
    m_b: int
    sigma: int
    alpha_up: mpmath.mpf
    beta_up: mpmath.mpf
    d: mpmath.mpf
    alpha: mpmath.mpf
    beta: mpmath.mpf


@dataclass
class AlphaBetaTable:
    """Solved per-block values, stored as fixed-point integers with ``frac_bits``."""
    m: int
    precision: int
    frac_bits: int
    m_b: np.ndarray
    alpha_up: np.ndarray
    beta_up: np.ndarray
    d: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    flags: list[str] = field(default_factory=list)
    clamped: int = 0
    _densities: np.ndarray | None = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return len(self.alpha)

    def real(self, fixed: int) -> mpmath.mpf:
        with mpmath.workprec(self.frac_bits + 64):
            return mpmath.ldexp(mpmath.mpf(int(fixed)), -self.frac_bits)

    @property
    def s0(self) -> mpmath.mpf:
        with mpmath.workprec(self.precision):
            return 1 / (2 * mpmath.sqrt(self.m) + 1)

    def record(self, b: int) -> BlockRecord:
        return BlockRecord(
            block=b,
            m_b=int(self.m_b[b]),
            sigma=-1 if _popcount(b) % 2 else 1,
            alpha_up=self.real(self.alpha_up[b]),
            beta_up=self.real(self.beta_up[b]),
            d=self.real(self.d[b]),
            alpha=self.real(self.alpha[b]),
            beta=self.real(self.beta[b]),
        )

    def density_fixed(self) -> np.ndarray:
        """All class densities as fixed-point integers."""
        if self._densities is None:
            bits = 1 << self.m
            signs = np.array([(-1 if _popcount(b) % 2 else 1) for b in range(self.size)], dtype=object)
            sums = subset_sum(signs * self.beta, bits)[::-1]
            one = 1 << self.frac_bits
            norm = _fixed_sqrt(2 * self.m * one + _fixed_sqrt(self.m * one, self.frac_bits), self.frac_bits)
            dens = np.array([(signs[a] * sums[a] << self.frac_bits) // norm for a in range(self.size)],
                            dtype=object)
            self._densities = dens
        return self._densities

    def class_values(self) -> list[mpmath.mpf]:
        """Value of each class generating function at s0, from the block values."""
        bits = 1 << self.m
        signs = np.array([(-1 if _popcount(b) % 2 else 1) for b in range(self.size)], dtype=object)
        sums = subset_sum(signs * self.alpha, bits)[::-1]
        return [self.real(signs[a] * sums[a]) for a in range(self.size)]

    def densities(self) -> list[mpmath.mpf]:
        return [self.real(v) for v in self.density_fixed()]

    def decimal(self, fixed: int, digits: int | None = None) -> str:
        return fixed_to_decimal(int(fixed), self.frac_bits, digits or self.precision // 4)

    def to_json(self, classes: list[int] | None = None, blocks: bool = True) -> dict:
        dens = self.density_fixed()
        classes = list(range(self.size)) if classes is None else classes
        out = {
            "m": self.m,
            "precision_bits": self.precision,
            "densities": {str(a): self.decimal(dens[a]) for a in classes},
            "alpha": {},
            "beta": {},
            "flags": list(self.flags),
        }
        if blocks:
            out["alpha"] = {str(b): self.decimal(self.alpha[b]) for b in range(self.size)}
            out["beta"] = {str(b): self.decimal(self.beta[b]) for b in range(self.size)}
        return out

    def dumps(self, **kwargs) -> str:
        return json.dumps(self.to_json(**kwargs), indent=2)


def _fixed_sqrt(x: int, frac_bits: int) -> int:
    return math.isqrt(x << frac_bits)


def _signed_superset_direct(values: np.ndarray, b: int, full: int) -> int:
    """sum over strict supersets B' of B of (-1)^|B'| values[B']; the plain oracle."""
    free = full & ~b
    total = 0
    sub = free
    while sub:
        bp = b | sub
        total += -values[bp] if _popcount(bp) % 2 else values[bp]
        sub = (sub - 1) & free
    return total


def solve_alpha_beta(m: int, precision: int = 256, direct_sums: bool = False) -> AlphaBetaTable:
    """Solve every block at s0.

    ``direct_sums`` replaces the level transforms with explicit superset
    enumeration (3^(2^m) work); kept as an independent check for m <= 3.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    if m > MAX_DENSITY_VARS:
        raise ResourceRefusal(f"m={m} needs 2^{1 << m} blocks")
    frac = precision + GUARD_BITS
    one = 1 << frac
    bits = 1 << m
    size = 1 << bits
    full = size - 1
    sqrt_m = _fixed_sqrt(m * one, frac)
    c = 2 * sqrt_m + one
    tiny = one >> min(100, precision // 2)  # about 1e-30 at default precision

    popcounts = np.array([_popcount(b) for b in range(size)])
    signs = np.where(popcounts % 2 == 1, -1, 1).astype(object)
    vmasks = [var_mask(i, m) for i in range(m)]
    m_b = np.array([sum(1 for v in vmasks if (v | b) == full) for b in range(size)], dtype=object)

    zero = lambda: np.zeros(size, dtype=object)
    alpha, beta, alpha_up, beta_up, d = zero(), zero(), zero(), zero(), zero()
    # running superset sums of signed values over all completed (larger) levels
    acc_alpha, acc_beta = zero(), zero()
    flags: list[str] = []
    clamped = 0

    for level in range(bits, -1, -1):
        members = np.nonzero(popcounts == level)[0]
        for b in members:
            b = int(b)
            sigma = int(signs[b])
            if direct_sums:
                aup = _signed_superset_direct(alpha, b, full)
                bup = _signed_superset_direct(beta, b, full)
            else:
                aup, bup = int(acc_alpha[b]), int(acc_beta[b])
            alpha_up[b], beta_up[b] = aup, bup
            if b == full:
                alpha[b] = sqrt_m
                beta[b] = _fixed_sqrt(2 * m * one + sqrt_m, frac)
                d[b] = 0
                continue
            u = c - sigma * one - aup
            disc = ((u * u) >> frac) - 4 * sigma * (int(m_b[b]) * one + aup)
            if disc < 0:
                if disc < -tiny:
                    raise InconsistentState(f"negative discriminant {disc / one:.3e} at block {b}")
                clamped += 1
                disc = 0
            d[b] = disc
            root = _fixed_sqrt(disc, frac)
            alpha[b] = sigma * ((u - root) // 2)
            if disc < tiny:
                if abs(bup) < tiny:
                    beta[b] = 0
                    flags.append(f"block {b}: vanishing discriminant and weight; weight set to 0")
                    continue
                raise InconsistentState(f"vanishing discriminant with nonzero weight at block {b}")
            ratio = ((c + sigma * one - aup) << frac) // root
            beta[b] = sigma * ((bup * (ratio - one)) >> (frac + 1))
        if not direct_sums and level > 0:
            mask = popcounts == level
            layer = zero()
            layer[mask] = signs[mask] * alpha[mask]
            acc_alpha += superset_sum(layer, bits)
            layer = zero()
            layer[mask] = signs[mask] * beta[mask]
            acc_beta += superset_sum(layer, bits)
            # lower levels only read these sums, so every included B' is a strict superset
    if clamped:
        flags.append(f"{clamped} slightly negative discriminants clamped to 0")
    return AlphaBetaTable(m, precision, frac, m_b, alpha_up, beta_up, d, alpha, beta, flags, clamped)


def density_of_class(a: int, table: AlphaBetaTable) -> mpmath.mpf:
    return table.real(table.density_fixed()[a])


def densities(m: int, precision: int = 256) -> tuple[AlphaBetaTable, list[mpmath.mpf]]:
    table = solve_alpha_beta(m, precision)
    return table, table.densities()

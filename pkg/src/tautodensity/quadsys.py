"""Quadratic systems over a base series, s-cut fixed points and ratio solves.

A system has members A_1..A_N with

    A_i = f_i + sum_j g_ij A_j + sum_jk h h_ijk A_j A_k

over a base Z = f + g Z + h Z^2 with radius r.  The s-cut operator replaces
the unknown limit ratios by a quadratic map built from truncations of the
A_j at r; its fixed points approximate the ratios.  When the values A_j(r)
are known exactly, the ratios solve a linear system instead.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import mpmath
import numpy as np

from .counting import (
    SeriesTruncation, class_coefficients, subset_sum, superset_mobius, superset_sum,
    truncated_eval, w_coefficients,
)
from .errors import NonConvergence
from .logic import full_mask, var_mask
from .numfmt import mpf_to_decimal
from .systems import SymbolicSystem, coef_in_z, coefficient_dp, get_system

Poly = tuple  # ascending coefficients in z

DEFAULT_PRECISION = 256


def poly_eval(p: Sequence, x):
    acc = 0
    for c in reversed(p):
        acc = acc * x + c
    return acc


def _poly_from_dict(d: Mapping[int, int]) -> Poly:
    if not d:
        return ()
    out = [0] * (max(d) + 1)
    for k, v in d.items():
        out[k] = v
    return tuple(out)


def _poly_add(a: Sequence, b: Sequence) -> Poly:
    n = max(len(a), len(b))
    return tuple((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n))


def _poly_trim(p: Sequence) -> Poly:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return tuple(p)


# ---------------------------------------------------------------------------
# base equation


@dataclass(frozen=True)
class BaseSpec:
    """Z = f + g Z + h Z^2 with radius r and limit ratio gamma of f against Z.

    ``f_coeffs`` and ``z_coeffs`` are truncations (exact numbers); ``f_at_r``
    and ``z_at_r`` are values at r when a closed form is available.
    """
    r: mpmath.mpf
    g: Poly
    h: Poly
    z_coeffs: tuple
    f_coeffs: tuple
    gamma: mpmath.mpf = mpmath.mpf(0)
    f_at_r: mpmath.mpf | None = None
    z_at_r: mpmath.mpf | None = None

    def g_r(self):
        return poly_eval(self.g, self.r)

    def h_r(self):
        return poly_eval(self.h, self.r)

    def z_trunc(self, s: int):
        return truncated_eval(self.z_coeffs, self.r, s)


def w_base(m: int, depth: int, precision: int = DEFAULT_PRECISION) -> BaseSpec:
    """W = mz + zW + zW^2 at its singularity s0 = 1/(2 sqrt(m) + 1)."""
    with mpmath.workprec(precision):
        root = mpmath.sqrt(m)
        r = 1 / (2 * root + 1)
        return BaseSpec(
            r=r, g=(0, 1), h=(0, 1),
            z_coeffs=tuple(w_coefficients(m, max(depth, 1))),
            f_coeffs=(0, m) + (0,) * max(depth - 1, 0),
            gamma=mpmath.mpf(0), f_at_r=m * r, z_at_r=root,
        )


def zeta_s(base: BaseSpec, s: int):
    """1 - gamma - g(r) - 2 h(r) Z^{<=s}(r)."""
    return 1 - base.gamma - base.g_r() - 2 * base.h_r() * base.z_trunc(s)


def impurity(base: BaseSpec, tolerance=mpmath.mpf(2) ** -200):
    if base.f_at_r is None:
        raise ValueError("impurity needs f(r)")
    disc = (1 - base.g_r()) ** 2 - 4 * base.f_at_r * base.h_r()
    if disc < 0:
        if disc < -tolerance:
            raise ArithmeticError(f"negative discriminant {disc}")
        disc = mpmath.mpf(0)
    return mpmath.sqrt(disc) - base.gamma


def gamma_convert(base: BaseSpec, new_gamma) -> BaseSpec:
    """Rescale the equation so that f has limit ratio ``new_gamma``."""
    if base.gamma == 1:
        raise ValueError("conversion undefined for gamma = 1")
    scale = (1 - new_gamma) / (1 - base.gamma)
    shift = (new_gamma - base.gamma) / (1 - base.gamma)
    n = len(base.z_coeffs)
    f = tuple(scale * (base.f_coeffs[i] if i < len(base.f_coeffs) else 0) + shift * base.z_coeffs[i]
              for i in range(n))
    f_r = None
    if base.f_at_r is not None and base.z_at_r is not None:
        f_r = scale * base.f_at_r + shift * base.z_at_r
    return BaseSpec(
        r=base.r, g=tuple(scale * c for c in base.g), h=tuple(scale * c for c in base.h),
        z_coeffs=base.z_coeffs, f_coeffs=f, gamma=mpmath.mpf(new_gamma),
        f_at_r=f_r, z_at_r=base.z_at_r,
    )


def delta_convert(base: BaseSpec, delta: Sequence) -> BaseSpec:
    """Move delta Z from the linear part into f: f + delta Z, g - delta."""
    n = len(base.z_coeffs)
    dz = [0] * n
    for p, c in enumerate(delta):
        for i in range(n - p):
            dz[i + p] += c * base.z_coeffs[i]
    f = tuple((base.f_coeffs[i] if i < len(base.f_coeffs) else 0) + dz[i] for i in range(n))
    d_r = poly_eval(delta, base.r)
    f_r = None
    if base.f_at_r is not None and base.z_at_r is not None:
        f_r = base.f_at_r + d_r * base.z_at_r
    return BaseSpec(
        r=base.r, g=_poly_add(base.g, tuple(-c for c in delta)), h=base.h,
        z_coeffs=base.z_coeffs, f_coeffs=f, gamma=base.gamma + d_r,
        f_at_r=f_r, z_at_r=base.z_at_r,
    )


# ---------------------------------------------------------------------------
# systems

Bilinear = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass
class QuadSystem:
    """Members A_1..A_N over a base; ``h`` maps (i, j, k) to h_ijk as a polynomial.

    ``kernel`` optionally evaluates v_i = sum_jk h_ijk(r) a_j b_k directly,
    for systems whose h table is too large to sum term by term.
    """
    name: str
    names: list[str]
    base: BaseSpec
    gamma: list
    f: list[Poly]
    g: dict[tuple[int, int], Poly]
    h: dict[tuple[int, int, int], Poly]
    truncations: list[SeriesTruncation]
    kernel: Bilinear | None = None
    precision: int = DEFAULT_PRECISION
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def size(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        return self.names.index(name)

    # evaluated data at r, cached
    def _at_r(self):
        if "at_r" not in self._cache:
            r = self.base.r
            g_r = [(i, j, poly_eval(p, r)) for (i, j), p in self.g.items()]
            h_r = None
            if self.kernel is None:
                h_r = [(i, j, k, poly_eval(p, r)) for (i, j, k), p in self.h.items()]
            self._cache["at_r"] = (g_r, h_r)
        return self._cache["at_r"]

    def bilinear(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if self.kernel is not None:
            return self.kernel(a, b)
        _, h_r = self._at_r()
        out = np.array([mpmath.mpf(0)] * self.size, dtype=object)
        for i, j, k, c in h_r:
            out[i] += c * a[j] * b[k]
        return out

    def linear(self, x: np.ndarray) -> np.ndarray:
        g_r, _ = self._at_r()
        out = np.array([mpmath.mpf(0)] * self.size, dtype=object)
        for i, j, c in g_r:
            out[i] += c * x[j]
        return out

    def truncated_values(self, s: int) -> np.ndarray:
        key = ("trunc", s)
        if key not in self._cache:
            with mpmath.workprec(self.precision):
                vals = [t(self.base.r, s, self.precision) for t in self.truncations]
            self._cache[key] = np.array(vals, dtype=object)
        return self._cache[key]

    def zeta(self, s: int):
        key = ("zeta", s)
        if key not in self._cache:
            with mpmath.workprec(self.precision):
                self._cache[key] = zeta_s(self.base, s)
        return self._cache[key]


def _vec(values) -> np.ndarray:
    return np.array([mpmath.mpf(v) for v in values], dtype=object)


def apply_cut_operator(sys: QuadSystem, s: int, x: Sequence) -> np.ndarray:
    if len(x) != sys.size:
        raise ValueError(f"vector of length {len(x)} for a system of size {sys.size}")
    with mpmath.workprec(sys.precision):
        x = _vec(x)
        a = sys.truncated_values(s)
        hr = sys.base.h_r()
        out = _vec(sys.gamma) + sys.linear(x)
        out += hr * (sys.bilinear(a, x) + sys.bilinear(x, a))
        out += sys.zeta(s) * sys.bilinear(x, x)
        return out


def jacobian_apply(sys: QuadSystem, s: int, x: Sequence, v: Sequence) -> np.ndarray:
    """J(x) v for the cut operator (exact, the map is quadratic)."""
    with mpmath.workprec(sys.precision):
        x, v = _vec(x), _vec(v)
        a = sys.truncated_values(s)
        hr = sys.base.h_r()
        out = sys.linear(v) + hr * (sys.bilinear(a, v) + sys.bilinear(v, a))
        out += sys.zeta(s) * (sys.bilinear(x, v) + sys.bilinear(v, x))
        return out


def jacobian_matrix(sys: QuadSystem, s: int, x: Sequence) -> list[list]:
    cols = []
    for j in range(sys.size):
        e = [0] * sys.size
        e[j] = 1
        cols.append(jacobian_apply(sys, s, x, e))
    return [[cols[j][i] for j in range(sys.size)] for i in range(sys.size)]


def jacobian_one_norm(sys: QuadSystem, s: int, x: Sequence):
    """Closed-form column-sum norm for nonnegative natural partitions."""
    with mpmath.workprec(sys.precision):
        z = sys.zeta(s)
        return 1 - z - sys.base.gamma + 2 * z * sum(_vec(x))


# ---------------------------------------------------------------------------
# iteration


@dataclass(frozen=True)
class CutConfig:
    s: int
    shift: str | float = "standard"  # "standard", "none" or an explicit sigma
    tolerance: float | mpmath.mpf = mpmath.mpf(10) ** -30
    max_iterations: int = 10 ** 6
    start: tuple | None = None
    start_index: int = 0
    pinned: tuple[tuple[int, float], ...] = ()

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")


@dataclass
class CutResult:
    system: str
    names: list[str]
    s: int
    sigma: mpmath.mpf
    zeta_s: mpmath.mpf
    solution: list
    iterations: int
    converged: bool
    residual: mpmath.mpf
    hyperplane: str

    def value(self, name: str):
        return self.solution[self.names.index(name)]

    def to_json(self, digits: int = 30, names: Sequence[str] | None = None) -> dict:
        keep = self.names if names is None else names
        return {
            "system": self.system,
            "s": self.s,
            "sigma": mpf_to_decimal(self.sigma, digits),
            "zeta_s": mpf_to_decimal(self.zeta_s, digits),
            "iterations": self.iterations,
            "converged": self.converged,
            "residual": mpmath.nstr(self.residual, 5),
            "hyperplane": self.hyperplane,
            "solution": {n: mpf_to_decimal(self.value(n), digits) for n in keep},
        }

    def dumps(self, **kwargs) -> str:
        return json.dumps(self.to_json(**kwargs), indent=2)


def standard_sigma(sys: QuadSystem, s: int):
    return (1 - sys.base.gamma + sys.zeta(s)) / sys.size


def shifted_iterate(sys: QuadSystem, cfg: CutConfig, strict: bool = False) -> CutResult:
    """Fixed-point iteration x <- C_s(x) - sigma (sum x - 1) (1,...,1)."""
    with mpmath.workprec(sys.precision):
        n = sys.size
        if cfg.shift == "standard":
            sigma = standard_sigma(sys, cfg.s)
        elif cfg.shift == "none":
            sigma = mpmath.mpf(0)
        else:
            sigma = mpmath.mpf(cfg.shift)
        if cfg.start is not None:
            x = _vec(cfg.start)
        else:
            x = _vec([0] * n)
            x[cfg.start_index] = mpmath.mpf(1)
        pinned = dict(cfg.pinned)
        for i, v in pinned.items():
            x[i] = mpmath.mpf(v)
        tol = mpmath.mpf(cfg.tolerance)
        step = mpmath.inf
        iterations = 0
        while iterations < cfg.max_iterations:
            nxt = apply_cut_operator(sys, cfg.s, x)
            if sigma:
                nxt = nxt - sigma * (sum(x) - 1)
            for i, v in pinned.items():
                nxt[i] = mpmath.mpf(v)
            step = max(abs(a - b) for a, b in zip(nxt, x))
            x = nxt
            iterations += 1
            if step < tol:
                break
            if not mpmath.isfinite(step) or step > 1e30:
                break
        fixed = apply_cut_operator(sys, cfg.s, x)
        residual = max(abs(fixed[i] - x[i]) for i in range(n) if i not in pinned)
        converged = bool(step < tol)
        zeta = sys.zeta(cfg.s)
        total = sum(x)
        if abs(total - 1) < 1e-20:
            plane = "sum=1"
        elif zeta and abs(total - sys.base.gamma / zeta) < 1e-20:
            plane = "sum=gamma/zeta"
        else:
            plane = "neither"
        result = CutResult(sys.name, list(sys.names), cfg.s, sigma, zeta, list(x),
                           iterations, converged, residual, plane)
    if strict and not converged:
        raise NonConvergence(f"{sys.name} s={cfg.s}: no convergence after {iterations} steps",
                             residual=residual, iterations=iterations)
    return result


# ---------------------------------------------------------------------------
# linear ratio extraction


def _to_fixed(x, frac: int) -> int:
    return int(mpmath.nint(mpmath.ldexp(mpmath.mpf(x), frac)))


def solve_overdetermined(rows: list[list], rhs: list, precision: int) -> tuple[list, mpmath.mpf]:
    """Gaussian elimination with partial pivoting on an (N+k) x N system.

    Returns the solution and the largest leftover right-hand side, which is
    zero (to rounding) exactly when the system is consistent.
    """
    frac = precision + 64
    n_rows, n_cols = len(rows), len(rows[0])
    a = np.array([[_to_fixed(v, frac) for v in row] + [_to_fixed(b, frac)]
                  for row, b in zip(rows, rhs)], dtype=object)
    order = list(range(n_rows))
    for k in range(n_cols):
        candidates = order[k:]
        piv = max(candidates, key=lambda i: abs(a[i, k]))
        if a[piv, k] == 0:
            raise ArithmeticError(f"singular linear system at column {k}")
        pos = order.index(piv)
        order[k], order[pos] = order[pos], order[k]
        p = a[order[k]]
        rest = order[k + 1:]
        if rest:
            factors = np.array([(a[i, k] << frac) // p[k] for i in rest], dtype=object)
            a[rest, k:] -= (factors[:, None] * p[None, k:]) >> frac
    x = [0] * n_cols
    for k in range(n_cols - 1, -1, -1):
        row = a[order[k]]
        acc = row[n_cols]
        for j in range(k + 1, n_cols):
            acc -= (row[j] * x[j]) >> frac
        x[k] = (acc << frac) // row[k]
    leftover = max((abs(a[i, n_cols]) for i in order[n_cols:]), default=0)
    with mpmath.workprec(frac + 64):
        sol = [mpmath.ldexp(mpmath.mpf(v), -frac) for v in x]
        return sol, mpmath.ldexp(mpmath.mpf(leftover), -frac)


def ratio_linear_solve(sys: QuadSystem, values_at_r: Sequence,
                       normalization: Mapping[int, float] | str | None = None,
                       target=1, tolerance=None):
    """Solve beta = gamma + G beta + h(r) sum h_ijk (A_j beta_k + A_k beta_j).

    For a homogeneous system a normalization row is appended: "sum" gives
    sum beta = target, a mapping gives sum w_i beta_i = target.
    """
    with mpmath.workprec(sys.precision):
        vals = _vec(values_at_r)
        hr = sys.base.h_r()
        n = sys.size
        cols = []
        for j in range(n):
            e = _vec([0] * n)
            e[j] = mpmath.mpf(1)
            cols.append(sys.linear(e) + hr * (sys.bilinear(vals, e) + sys.bilinear(e, vals)))
        rows = [[(1 if i == j else 0) - cols[j][i] for j in range(n)] for i in range(n)]
        rhs = list(_vec(sys.gamma))
        homogeneous = all(g == 0 for g in rhs)
        if normalization is None and homogeneous:
            normalization = "sum"
        if normalization is not None:
            weights = [1] * n if normalization == "sum" else [normalization.get(i, 0) for i in range(n)]
            rows.append(weights)
            rhs.append(target)
        sol, leftover = solve_overdetermined(rows, rhs, sys.precision)
        tol = tolerance if tolerance is not None else mpmath.mpf(2) ** (-sys.precision // 2)
        if leftover > tol:
            raise ArithmeticError(f"inconsistent ratio system (leftover {mpmath.nstr(leftover, 5)})")
        return sol


# ---------------------------------------------------------------------------
# validation


def natural_partition_report(sys: QuadSystem) -> dict[str, bool]:
    """Check the natural-partition identities; polynomials compared exactly."""
    n = sys.size
    f_sum: Poly = ()
    for p in sys.f:
        f_sum = _poly_add(f_sum, p)
    g_cols: dict[int, Poly] = {j: () for j in range(n)}
    for (i, j), p in sys.g.items():
        g_cols[j] = _poly_add(g_cols[j], p)
    pair_sums: dict[tuple[int, int], Poly] = {}
    for (i, j, k), p in sys.h.items():
        pair_sums[(j, k)] = _poly_add(pair_sums.get((j, k), ()), p)
        pair_sums[(k, j)] = _poly_add(pair_sums.get((k, j), ()), p)
    base_f = _poly_trim(sys.base.f_coeffs)
    return {
        "f": _poly_trim(f_sum) == base_f,
        "g": all(_poly_trim(g_cols[j]) == _poly_trim(sys.base.g) for j in range(n)),
        "h": len(pair_sums) == n * n and all(_poly_trim(p) == (2,) for p in pair_sums.values()),
    }


def is_nonnegative(sys: QuadSystem) -> bool:
    polys = list(sys.g.values()) + list(sys.h.values()) + list(sys.f)
    return all(c >= 0 for p in polys for c in p) and all(g >= 0 for g in sys.gamma)


# ---------------------------------------------------------------------------
# instantiations


def falsity_kernel(m: int) -> Bilinear:
    """v_i = sum over (j, k) with k AND NOT j = i of a_j b_k, via lattice sums."""
    bits = 1 << m

    def kernel(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        pre = subset_sum(np.asarray(a, dtype=object), bits)[::-1]
        post = superset_sum(np.asarray(b, dtype=object), bits)
        return superset_mobius(pre * post, bits)

    return kernel


def class_name(mask: int, m: int) -> str:
    if mask == 0:
        return "taut"
    if mask == full_mask(m):
        return "anti"
    return str(mask)


def build_falsity_system(m: int, table=None, s: int | None = None,
                         precision: int = DEFAULT_PRECISION,
                         materialize: bool | None = None) -> QuadSystem:
    """Class partition of all formulae: g_ij = z iff j is the complement of i,
    h_ijk = 1 iff class k minus class j is class i (j premise, k conclusion)."""
    if s is None:
        s = table.n_max if table is not None else 200
    if table is None or table.n_max < s:
        table = class_coefficients(m, max(s, 1))
    size = 1 << (1 << m)
    full = size - 1
    base = w_base(m, s, precision)
    f = [()] * size
    for i in range(m):
        v = var_mask(i, m)
        f[v] = _poly_add(f[v], (0, 1))
    g = {(i, full ^ i): (0, 1) for i in range(size)}
    if materialize is None:
        materialize = size <= 256
    h = {}
    if materialize:
        for j in range(size):
            for k in range(size):
                h[(k & ~j, j, k)] = (1,)
    truncs = [SeriesTruncation.of(row[:s + 1]) for row in table.counts]
    return QuadSystem(
        name=f"falsity-m{m}", names=[class_name(a, m) for a in range(size)], base=base,
        gamma=[0] * size, f=f, g=g, h=h, truncations=truncs,
        kernel=falsity_kernel(m), precision=precision,
    )


def from_symbolic(symbolic: SymbolicSystem, m: int, s: int,
                  precision: int = DEFAULT_PRECISION) -> QuadSystem:
    """Specialize a symbolic system to integer m over the W base (h = z)."""
    names = symbolic.unknowns
    idx = {n: i for i, n in enumerate(names)}
    f: list[Poly] = [() for _ in names]
    g: dict[tuple[int, int], Poly] = {}
    h: dict[tuple[int, int, int], Poly] = {}
    for i, eq in enumerate(symbolic.equations):
        for t in eq.terms:
            poly = coef_in_z(t.coef, m)
            if not poly:
                continue
            if t.degree == 0:
                f[i] = _poly_add(f[i], _poly_from_dict(poly))
            elif t.degree == 1:
                key = (i, idx[t.factors[0]])
                g[key] = _poly_add(g.get(key, ()), _poly_from_dict(poly))
            else:
                if 0 in poly:
                    raise ValueError(f"quadratic term without a z factor in {eq.lhs}")
                shifted = {p - 1: c for p, c in poly.items()}
                key = (i, idx[t.factors[0]], idx[t.factors[1]])
                h[key] = _poly_add(h.get(key, ()), _poly_from_dict(shifted))
    coeffs = coefficient_dp(symbolic, m, max(s, 1))
    truncs = [SeriesTruncation.of(coeffs[n][:s + 1]) for n in names]
    return QuadSystem(
        name=symbolic.name, names=list(names), base=w_base(m, s, precision),
        gamma=[0] * len(names), f=f, g=g, h=h, truncations=truncs, precision=precision,
    )


def build_category_system(m: int, kind: str, s: int = 200, precision: int = DEFAULT_PRECISION) -> QuadSystem:
    return from_symbolic(get_system(kind), m, s, precision)


def category_cut(m: int, kind: str, s: int, precision: int = DEFAULT_PRECISION,
                 tolerance=mpmath.mpf(10) ** -30, max_iterations: int = 10 ** 5) -> CutResult:
    """Cut solution of a category system with the W coordinate pinned to 1.

    W's own coordinate is a repelling direction of the unshifted map (its
    derivative there is 1 + zeta_s), while its ratio is 1 by definition.
    """
    sys = build_category_system(m, kind, s, precision)
    w = sys.index("W")
    start = [0] * sys.size
    cfg = CutConfig(s=s, shift="none", tolerance=tolerance, max_iterations=max_iterations,
                    start=tuple(start), pinned=((w, 1),))
    return shifted_iterate(sys, cfg)


def category_values_at_s0(m: int, kind: str, s: int = 200,
                          precision: int = DEFAULT_PRECISION) -> dict[str, mpmath.mpf]:
    """Values of every member at s0, by Newton's method on the equations.

    W is fixed to sqrt(m); the remaining members start from s-term
    truncations, which selects the branch of each quadratic that the
    generating functions actually follow.
    """
    symbolic = get_system(kind)
    sys = build_category_system(m, kind, s, precision)
    names = [n for n in sys.names if n != "W"]
    with mpmath.workprec(precision):
        r = sys.base.r
        root = sys.base.z_at_r
        start = [sys.truncated_values(s)[sys.index(n)] for n in names]

        def residual(*xs):
            values = dict(zip(names, xs))
            values["W"] = root
            res = symbolic.residuals(values, r, m)
            return [res[n] for n in names]

        sol = mpmath.findroot(residual, start, tol=mpmath.mpf(2) ** (-precision + 16))
        sol = list(sol) if isinstance(sol, mpmath.matrix) else [sol]
    out = dict(zip(names, sol))
    out["W"] = root
    return {n: out[n] for n in sys.names}


def category_ratios(m: int, kind: str, values_at_r: Mapping[str, float] | None = None,
                    precision: int = DEFAULT_PRECISION) -> dict[str, mpmath.mpf]:
    """Limit ratios (against W) of a category system from its values at s0."""
    sys = build_category_system(m, kind, 2, precision)
    if values_at_r is None:
        values_at_r = category_values_at_s0(m, kind, precision=precision)
    vals = [values_at_r[n] for n in sys.names]
    sol = ratio_linear_solve(sys, vals, normalization={sys.index("W"): 1})
    return dict(zip(sys.names, sol))

import json
import random

import mpmath
import pytest

from tautodensity.counting import class_coefficients, ratio_at
from tautodensity.exact import solve_alpha_beta
from tautodensity.quadsys import (
    BaseSpec, CutConfig, apply_cut_operator, build_category_system, build_falsity_system,
    category_cut, category_ratios, category_values_at_s0, delta_convert, gamma_convert,
    impurity, is_nonnegative, jacobian_matrix, jacobian_one_norm,
    natural_partition_report, ratio_linear_solve, shifted_iterate, w_base, zeta_s,
)


@pytest.fixture(scope="module")
def falsity():
    return {m: build_falsity_system(m, class_coefficients(m, 200)) for m in (1, 2, 3)}


def random_point_of_h(n, rng):
    raw = [mpmath.mpf(rng.random()) for _ in range(n)]
    total = sum(raw)
    return [x / total for x in raw]


def test_zeta_examples():
    base = w_base(1, 200)
    assert abs(zeta_s(base, 0) - mpmath.mpf(2) / 3) < 1e-70
    values = [zeta_s(base, s) for s in (0, 1, 5, 25, 100, 200)]
    assert values == sorted(values, reverse=True)
    assert 0 < values[-1] < 0.05  # decays like s^(-1/2)
    for m in (1, 2, 3):
        b = w_base(m, 5)
        assert abs(1 - b.r - 2 * b.r * b.z_at_r) < 1e-70
        assert abs(impurity(b)) < 1e-30


def test_impurity_variants():
    base = w_base(2, 20)
    lowered = BaseSpec(base.r, base.g, base.h, base.z_coeffs, base.f_coeffs,
                       f_at_r=base.f_at_r * mpmath.mpf("0.9"), z_at_r=base.z_at_r)
    assert impurity(lowered) > 0
    # without a quadratic part the radius satisfies g(r) = 1 - gamma
    no_h = BaseSpec(mpmath.mpf("0.5"), (0, mpmath.mpf("1.5")), (0,), (0, 1), (0, 1),
                    gamma=mpmath.mpf("0.25"), f_at_r=mpmath.mpf("0.5"))
    assert impurity(no_h) == 0


def test_conversions():
    base = w_base(1, 60)
    assert gamma_convert(base, 0).g == base.g
    assert delta_convert(base, (0,)).f_coeffs == base.f_coeffs
    moved = delta_convert(base, (0, 1))
    assert abs(moved.gamma - base.r) < 1e-70
    rng = random.Random(7)
    for _ in range(20):
        target = mpmath.mpf(rng.random()) * mpmath.mpf("0.9")
        delta = (0, rng.randint(0, 2), rng.randint(-1, 1))
        s = rng.choice([3, 10, 40])
        converted = gamma_convert(base, target)
        assert abs(zeta_s(converted, s) / (1 - converted.gamma) - zeta_s(base, s)) < 1e-60
        assert abs(zeta_s(delta_convert(base, delta), s) - zeta_s(base, s)) < 1e-60
    with pytest.raises(ValueError):
        gamma_convert(gamma_convert(base, 1), 0)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_falsity_natural_partition(falsity, m):
    sys = falsity[m]
    assert sys.size == 1 << (1 << m)
    assert natural_partition_report(sys) == {"f": True, "g": True, "h": True}
    assert is_nonnegative(sys)
    rows = {}
    for (i, j) in sys.g:
        rows[i] = rows.get(i, 0) + 1
    assert all(rows[i] == 1 for i in range(sys.size))


def test_kernel_matches_table(falsity):
    sys = falsity[2]
    rng = random.Random(3)
    a = [mpmath.mpf(rng.random()) for _ in range(sys.size)]
    b = [mpmath.mpf(rng.random()) for _ in range(sys.size)]
    import numpy as np
    fast = sys.bilinear(np.array(a, dtype=object), np.array(b, dtype=object))
    slow = [mpmath.mpf(0)] * sys.size
    for (i, j, k), p in sys.h.items():
        slow[i] += p[0] * a[j] * b[k]
    assert max(abs(x - y) for x, y in zip(fast, slow)) < 1e-60


def test_category_systems_are_not_natural():
    for kind in ("strong-S1", "weak-S1", "combined-S1S2"):
        sys = build_category_system(2, kind, 10)
        assert sys.names[0] == "W"
        assert not all(natural_partition_report(sys).values())


@pytest.mark.parametrize("m", [1, 2])
def test_cut_operator_preserves_h(falsity, m):
    sys = falsity[m]
    rng = random.Random(m)
    for _ in range(100):
        x = random_point_of_h(sys.size, rng)
        c = apply_cut_operator(sys, rng.choice([10, 50, 200]), x)
        assert abs(sum(c) - 1) < 1e-60
        assert min(c) >= 0
    zero = apply_cut_operator(sys, 10, [0] * sys.size)
    assert all(v == 0 for v in zero)
    with pytest.raises(ValueError):
        apply_cut_operator(sys, 10, [0] * (sys.size + 1))


@pytest.mark.parametrize("m", [1, 2])
def test_jacobian(falsity, m):
    sys = falsity[m]
    rng = random.Random(11 + m)
    h = mpmath.mpf(10) ** -30
    for _ in range(20):
        s = rng.choice([10, 50])
        x = random_point_of_h(sys.size, rng)
        jac = jacobian_matrix(sys, s, x)
        col_sums = [sum(jac[i][j] for i in range(sys.size)) for j in range(sys.size)]
        expected = 1 + sys.zeta(s)
        assert all(abs(c - expected) < 1e-60 for c in col_sums)
        assert abs(jacobian_one_norm(sys, s, x) - expected) < 1e-60
        j = rng.randrange(sys.size)
        bumped = list(x)
        bumped[j] += h
        diff = (apply_cut_operator(sys, s, bumped) - apply_cut_operator(sys, s, x)) / h
        for i in range(sys.size):
            assert abs(diff[i] - jac[i][j]) <= 1e-6 * max(abs(jac[i][j]), 1e-6)
    assert abs(jacobian_one_norm(sys, 10, [0] * sys.size) - (1 - sys.zeta(10))) < 1e-70


@pytest.mark.parametrize("m,s,taut,anti", [(1, 50, "0.4233", "0.1634"), (2, 10, "0.3345", "0.0982"),
                                           (3, 200, "0.2701", "0.0663")])
def test_cut_solutions(falsity, m, s, taut, anti):
    result = shifted_iterate(falsity[m], CutConfig(s=s))
    assert result.converged and result.hyperplane == "sum=1"
    assert result.residual < 10 * mpmath.mpf(10) ** -30
    assert abs(result.value("taut") - mpmath.mpf(taut)) < 5e-5
    assert abs(result.value("anti") - mpmath.mpf(anti)) < 5e-5


def test_cut_report_json(falsity):
    result = shifted_iterate(falsity[1], CutConfig(s=10))
    doc = json.loads(result.dumps())
    assert {"system", "s", "sigma", "zeta_s", "iterations", "residual", "solution"} <= set(doc)
    assert doc["solution"]["taut"].startswith("0.4242")


def test_non_convergence_is_reported(falsity):
    result = shifted_iterate(falsity[1], CutConfig(s=10, max_iterations=3))
    assert not result.converged and result.iterations == 3
    from tautodensity.errors import NonConvergence
    with pytest.raises(NonConvergence):
        shifted_iterate(falsity[1], CutConfig(s=10, max_iterations=3), strict=True)
    with pytest.raises(ValueError):
        CutConfig(s=10, tolerance=0)


@pytest.mark.parametrize("m", [1, 2])
def test_cut_converges_to_truth(falsity, m):
    """The true ratios are an approximate fixed point, better for deeper cuts."""
    table = solve_alpha_beta(m)
    truth = table.densities()
    gaps = []
    for s in (25, 50, 100, 200):
        c = apply_cut_operator(falsity[m], s, truth)
        gaps.append(max(abs(a - b) for a, b in zip(c, truth)))
    assert gaps == sorted(gaps, reverse=True)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_ratio_solve_matches_exact_density(m):
    table = solve_alpha_beta(m)
    sys = build_falsity_system(m, s=2)
    sol = ratio_linear_solve(sys, table.class_values())
    dens = table.densities()
    assert max(abs(a - b) for a, b in zip(sol, dens)) < mpmath.mpf(2) ** -64


def test_ratio_solve_closed_forms():
    assert abs(category_ratios(1, "s1")["S1"] - mpmath.mpf(13) / 196) < 1e-60
    assert abs(category_ratios(1, "sc")["Sc"] - mpmath.mpf(1) / 49) < 1e-60
    for m in (2, 3, 5):
        root = mpmath.sqrt(m)
        s1 = m * (4 * m + 6 * root + 3) / ((root + 1) ** 2 * (2 * m + 3 * root + 2) ** 2)
        assert abs(category_ratios(m, "s1")["S1"] - s1) < 1e-60
        assert abs(category_ratios(m, "sc")["Sc"] - m / (2 * m + 3 * root + 2) ** 2) < 1e-60


def test_category_values_solve_equations():
    for kind in ("strong-S1", "weak-S1", "combined-S1S2"):
        values = category_values_at_s0(2, kind)
        sys = build_category_system(2, kind, 200)
        trunc = sys.truncated_values(200)
        for i, name in enumerate(sys.names):
            assert trunc[i] <= values[name] + 1e-60


def test_category_cut_tracks_ratios():
    for kind in ("strong-S1", "weak-S1", "combined-S1S2"):
        ratios = category_ratios(2, kind)
        cut = category_cut(2, kind, 200)
        assert cut.converged
        for name in ("T", "U", "A"):
            assert abs(cut.value(name) - ratios[name]) < 2e-3
        assert abs(ratios["T"] + ratios["U"] + ratios["A"] - 1) < 1e-60
    combined = category_ratios(2, "combined-S1S2")
    assert combined["T"] < mpmath.mpf("0.33213")
    strong, weak = category_ratios(2, "strong-S1"), category_ratios(2, "weak-S1")
    assert strong["T"] < weak["T"] < combined["T"]


def test_truncation_ratio_matches_table_entry():
    """Ratio column of the comparison table, from the same truncations the cut uses."""
    assert abs(ratio_at(class_coefficients(3, 200), 0, 200) - mpmath.mpf("0.2670")) < 5e-5

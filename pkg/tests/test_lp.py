from fractions import Fraction as F
import random

import numpy as np
import pytest
from scipy.optimize import linprog

from tsp2ecm import simplex
from tsp2ecm.errors import Infeasible, SupportInsufficient, TooLarge
from tsp2ecm.instance import EdgeVector, all_cuts, cut_edges, edges, new_metric
from tsp2ecm.lp import (
    best_half_integral,
    cut_values,
    decide_half_integral_optimum,
    is_half_integral,
    parsimonious_check,
    separate,
    solve_dual,
    solve_lp,
)
from tsp2ecm.oracle import HamiltonianCycle, solve_2ecm_ip, solve_tsp_ip
from tsp2ecm.search import generate_random_metric

from conftest import load

H = F(1, 2)


def scipy_lp(inst, degree_constrained=True):
    """Float LP over every cut at once; independent of the exact solver."""
    n, es = inst.n, edges(inst.n)
    idx = {e: k for k, e in enumerate(es)}
    a_ub, b_ub = [], []
    for s in all_cuts(n):
        row = np.zeros(len(es))
        for e in cut_edges(n, s):
            row[idx[e]] = -1
        a_ub.append(row)
        b_ub.append(-2)
    a_eq = b_eq = None
    if degree_constrained:
        a_eq = np.zeros((n, len(es)))
        for k, (u, v) in enumerate(es):
            a_eq[u, k] = a_eq[v, k] = 1
        b_eq = np.full(n, 2.0)
    ub = 1 if degree_constrained else None
    res = linprog([float(c) for c in inst.costs], A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq,
                  bounds=[(0, ub)] * len(es), method="highs")
    assert res.status == 0
    return res.fun


# -- simplex ----------------------------------------------------------------


def test_simplex_small():
    # max x + y s.t. x + 2y <= 4, 3x + y <= 6  ->  x = 8/5, y = 6/5
    sol = simplex.solve([-1, -1], [[1, 2], [3, 1]], [simplex.LE] * 2, [4, 6])
    assert sol.value == F(-14, 5)
    assert list(sol.x) == [F(8, 5), F(6, 5)]


def test_simplex_equality_and_bounds():
    sol = simplex.solve([1, 2, 3], [[1, 1, 1]], [simplex.EQ], [2], upper=[1, 1, 1])
    assert sol.value == 3 and list(sol.x) == [1, 1, 0]


def test_simplex_infeasible_and_unbounded():
    with pytest.raises(Infeasible):
        simplex.solve([1], [[1], [1]], [simplex.GE, simplex.LE], [2, 1])
    with pytest.raises(simplex.Unbounded):
        simplex.solve([-1, 0], [[1, -1]], [simplex.LE], [1])


def test_simplex_duals_satisfy_strong_duality():
    rng = random.Random("duals")
    for _ in range(20):
        m, k = 4, 5
        a = [[rng.randint(0, 5) for _ in range(k)] for _ in range(m)]
        b = [rng.randint(1, 10) for _ in range(m)]
        c = [-rng.randint(1, 6) for _ in range(k)]
        sol = simplex.solve(c, a, [simplex.LE] * m, b)
        assert sum(d * bi for d, bi in zip(sol.duals, b)) == sol.value


# -- LP examples -------------------------------------------------------------


def test_lp_k3(k3):
    r = solve_lp(k3)
    assert r.value == 3 and list(r.solution.values) == [1, 1, 1]


def test_lp_k4(k4):
    r = solve_lp(k4)
    assert r.value == 4
    assert r.solution.values == HamiltonianCycle((0, 1, 2, 3)).indicator()


def test_lp_theta(theta5):
    # the half-on-paths vector from the literature description violates degree 2
    paths = {(0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4)}
    x = EdgeVector.from_edges(5, {e: H for e in paths})
    assert x.cut_value({0}) == F(3, 2)
    r = solve_lp(theta5)
    assert r.value == 6 == solve_tsp_ip(theta5).value
    assert solve_lp(theta5, degree_constrained=False).value == 6


def test_separation_examples():
    t = HamiltonianCycle(tuple(range(6)))
    assert separate(6, EdgeVector(6, tuple(F(b) for b in t.indicator()))) is None
    s = separate(6, EdgeVector(6, (F(0),) * 15))
    assert s is not None and EdgeVector(6, (F(0),) * 15).cut_value(s) == 0
    half = EdgeVector(6, tuple(H * b for b in t.indicator()))
    s = separate(6, half)
    assert half.cut_value(s) == 1


def test_min_cut_separation_agrees_for_n_above_enumeration():
    n = 14
    t = HamiltonianCycle(tuple(range(n)))
    half = EdgeVector(n, tuple(H * b for b in t.indicator()))
    s = separate(n, half)
    assert s is not None and half.cut_value(s) < 2
    assert separate(n, EdgeVector(n, tuple(F(b) for b in t.indicator()))) is None


@pytest.mark.parametrize("seed", range(15))
def test_lp_against_scipy(seed):
    inst = generate_random_metric(4 + seed % 4, seed)
    for deg in (True, False):
        r = solve_lp(inst, degree_constrained=deg)
        assert float(r.value) == pytest.approx(scipy_lp(inst, deg), abs=1e-7)
        assert min(cut_values(r.solution).values()) >= 2
        if deg:
            assert all(r.solution[(u, v)] <= 1 for u, v in edges(inst.n))
            assert all(r.solution.cut_value({v}) == 2 for v in range(inst.n))


@pytest.mark.parametrize("seed", range(6))
def test_relaxation_bounds(seed):
    inst = generate_random_metric(6, 50 + seed)
    lp = solve_lp(inst).value
    assert lp <= solve_2ecm_ip(inst).value <= solve_tsp_ip(inst).value
    assert solve_lp(inst, degree_constrained=False).value <= lp


def test_lp_n16_min_cut_path():
    inst = generate_random_metric(16, 0)
    r = solve_lp(inst)
    assert float(r.value) == pytest.approx(scipy_lp_partial(inst, r), abs=1e-7)
    with pytest.raises(TooLarge):
        solve_lp(generate_random_metric(17, 0))


def scipy_lp_partial(inst, r):
    # full enumeration is too big at n=16; compare on the active-cut LP instead
    n, es = inst.n, edges(inst.n)
    idx = {e: k for k, e in enumerate(es)}
    a_ub = []
    for s in r.active_cuts:
        row = np.zeros(len(es))
        for e in cut_edges(n, s):
            row[idx[e]] = -1
        a_ub.append(row)
    a_eq = np.zeros((n, len(es)))
    for k, (u, v) in enumerate(es):
        a_eq[u, k] = a_eq[v, k] = 1
    res = linprog([float(c) for c in inst.costs], A_ub=a_ub or None, b_ub=[-2] * len(a_ub) or None,
                  A_eq=a_eq, b_eq=np.full(n, 2.0), bounds=[(0, 1)] * len(es), method="highs")
    return res.fun


@pytest.mark.parametrize("seed", range(5))
def test_resolve_with_active_cuts(seed):
    inst = generate_random_metric(7, seed)
    r = solve_lp(inst)
    again = solve_lp(inst, initial_cuts=r.active_cuts)
    assert again.value == r.value
    assert solve_lp(inst).solution == r.solution


# -- duals -----------------------------------------------------------------


def test_dual_k3(k3):
    d = solve_dual(k3, support=[{0}, {1}, {2}])
    assert d.value == 3 and d.attains_primal
    assert all(yv >= 0 for yv in d.y.values())
    assert all(load <= c for load, c in zip(d.edge_load(3), k3.costs))
    d = solve_dual(k3, support=[{0}, {1}, {2}], degree_constrained=False)
    assert d.value == 3 and all(v == H for v in d.y.values())


def test_dual_degree_only(k4):
    d = solve_dual(k4, support=[])
    assert d.y == {}
    assert d.value == 2 * sum(d.pi)
    assert d.attains_primal  # degree constraints alone are tight on this instance


def test_dual_support_insufficient():
    inst = generate_random_metric(5, 4)
    d = solve_dual(inst, support=[], degree_constrained=False)
    assert d.value == 0 and not d.attains_primal
    with pytest.raises(SupportInsufficient):
        solve_dual(inst, support=[], degree_constrained=False, strict=True)


@pytest.mark.parametrize("seed", range(10))
def test_strong_duality(seed):
    inst = generate_random_metric(4 + seed % 4, 200 + seed)
    for deg in (True, False):
        d = solve_dual(inst, degree_constrained=deg)
        assert d.value == solve_lp(inst, deg).value
        loads = d.edge_load(inst.n)
        assert all(load <= c for load, c in zip(loads, inst.costs))


# -- parsimonious / half-integral ------------------------------------------


def test_parsimonious_examples(k3, k4):
    p = parsimonious_check(k3)
    assert p.equal and p.degree_constrained == p.degree_free == 3
    p = parsimonious_check(k4)
    assert p.equal and p.degree_constrained == 4


def test_parsimonious_sweep():
    for seed in range(100):
        inst = generate_random_metric(4 + seed % 4, 1000 + seed)
        assert parsimonious_check(inst).equal, seed


def test_is_half_integral():
    assert is_half_integral(EdgeVector(4, (F(1), F(0), F(1), F(1), F(0), F(1))))
    assert not is_half_integral([F(1, 3), F(2, 3)])
    assert is_half_integral([H] * 6)


def test_decide_examples(k3, theta5):
    x = decide_half_integral_optimum(k3)
    assert x is not None and list(x.values) == [1, 1, 1]
    x = decide_half_integral_optimum(theta5)
    assert x is not None and x.dot(theta5) == 6 and is_half_integral(x)


def test_decide_rejects_thirds_vertex():
    inst = load("thirds_n10.inst")
    lp = solve_lp(inst)
    assert not is_half_integral(lp.solution)
    assert F(1, 3) in set(lp.solution.values)
    assert decide_half_integral_optimum(inst, lp.value, bound=10) is None
    with pytest.raises(TooLarge):
        decide_half_integral_optimum(inst, lp.value)


@pytest.mark.parametrize("seed", range(8))
def test_decide_postconditions(seed):
    inst = generate_random_metric(6, 300 + seed)
    lp = solve_lp(inst).value
    x = decide_half_integral_optimum(inst, lp)
    if x is not None:
        assert is_half_integral(x) and x.dot(inst) == lp
        assert min(cut_values(x).values()) >= 2


def test_best_half_integral_cutoff():
    inst = generate_random_metric(6, 7)
    value, x = best_half_integral(inst)
    assert x.dot(inst) == value
    assert best_half_integral(inst, cutoff=value - F(1, 100)) == (None, None)
    v2, _ = best_half_integral(inst, cutoff=value)
    assert v2 == value

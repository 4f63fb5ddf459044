from fractions import Fraction as F
from itertools import permutations, product

import networkx as nx
import pytest

from tsp2ecm.config import bounds
from tsp2ecm.errors import TooLarge
from tsp2ecm.instance import edges, new_metric
from tsp2ecm.oracle import (
    HamiltonianCycle,
    Multisubgraph,
    is_2ec,
    mst_cost,
    solve_2ecm_ip,
    solve_tsp_ip,
    unique_hamiltonian_2ecm,
)
from tsp2ecm.search import generate_random_metric


def brute_tsp(inst):
    """All tours as edge sets, from every permutation (no canonical form)."""
    n = inst.n
    best, sets = None, set()
    for p in permutations(range(n)):
        es = frozenset(tuple(sorted((p[i], p[(i + 1) % n]))) for i in range(n))
        c = inst.edge_cost(es)
        if best is None or c < best:
            best, sets = c, {es}
        elif c == best:
            sets.add(es)
    return best, sets


def nx_2ec(n, mult):
    g = nx.Graph()
    g.add_nodes_from(range(n))
    for (u, v), k in zip(edges(n), mult):
        if k:
            g.add_edge(u, v, weight=k)
    if not nx.is_connected(g):
        return False
    cut, _ = nx.stoer_wagner(g)
    return cut >= 2


def brute_2ecm(inst):
    es = edges(inst.n)
    best, opts = None, []
    for mult in product((0, 1, 2), repeat=len(es)):
        c = sum(k * inst.cost(*e) for e, k in zip(es, mult))
        if best is not None and c > best:
            continue
        if not is_2ec(inst.n, mult):
            continue
        if best is None or c < best:
            best, opts = c, [mult]
        else:
            opts.append(mult)
    return best, sorted(opts)


def test_tour_canonical_form():
    t = HamiltonianCycle((2, 3, 0, 1))
    assert t.order == (0, 1, 2, 3)
    assert HamiltonianCycle((0, 3, 2, 1)).order == (0, 1, 2, 3)
    assert t.edges == {(0, 1), (1, 2), (2, 3), (0, 3)}
    with pytest.raises(ValueError):
        HamiltonianCycle((0, 1, 1))


def test_tsp_examples(k3, k4, k4_unit):
    r = solve_tsp_ip(k3)
    assert r.value == 3 and r.unique
    r = solve_tsp_ip(k4)
    assert r.value == 4 and r.unique and r.optima[0].order == (0, 1, 2, 3)
    r = solve_tsp_ip(k4_unit)
    assert r.value == 4 and len(r.optima) == 3 and not r.unique


def test_2ecm_examples(k3, k4, path3):
    r = solve_2ecm_ip(k3)
    assert r.value == 3 and r.unique and r.optima[0].multiplicity == (1, 1, 1)
    r = solve_2ecm_ip(k4)
    assert r.value == 4 and r.unique
    assert r.optima[0].as_tour().order == (0, 1, 2, 3)
    r = solve_2ecm_ip(path3)
    assert r.value == 4 and not r.unique
    mults = {o.multiplicity for o in r.optima}
    assert (2, 0, 2) in mults and (1, 1, 1) in mults
    assert mults == set(brute_2ecm(path3)[1])


def test_is_2ec_examples():
    cycle = [1 if e in {(0, 1), (1, 2), (2, 3), (0, 3)} else 0 for e in edges(4)]
    tree = [1 if e in {(0, 1), (1, 2), (2, 3)} else 0 for e in edges(4)]
    assert is_2ec(4, cycle)
    assert not is_2ec(4, tree)
    assert is_2ec(4, [2 * k for k in tree])
    assert not is_2ec(4, [0] * 6)


def test_is_2ec_matches_networkx():
    for mult in product((0, 1, 2), repeat=6):
        assert is_2ec(4, mult) == nx_2ec(4, mult), mult


def test_unique_hamiltonian(k3, k4, k4_unit):
    assert unique_hamiltonian_2ecm(k4).order == (0, 1, 2, 3)
    assert unique_hamiltonian_2ecm(k3).order == (0, 1, 2)
    assert unique_hamiltonian_2ecm(k4_unit) is None


@pytest.mark.parametrize("seed", range(12))
def test_tsp_matches_permutation_brute_force(seed):
    inst = generate_random_metric(4 + seed % 4, seed, denominator_bound=2)
    value, sets = brute_tsp(inst)
    r = solve_tsp_ip(inst)
    assert r.value == value
    assert {t.edges for t in r.optima} == sets


@pytest.mark.parametrize("seed", range(10))
def test_2ecm_matches_unpruned_enumeration(seed):
    inst = generate_random_metric(4 if seed < 4 else 5, seed, denominator_bound=1)
    value, opts = brute_2ecm(inst)
    r = solve_2ecm_ip(inst)
    assert r.value == value
    assert sorted(o.multiplicity for o in r.optima) == opts


def test_2ecm_ties_on_unit_k5():
    inst = new_metric(5, {e: 1 for e in edges(5)})
    value, opts = brute_2ecm(inst)
    r = solve_2ecm_ip(inst)
    assert r.value == value == 5
    assert len(r.optima) == len(opts) == 12


@pytest.mark.parametrize("seed", range(8))
def test_oracle_invariants(seed):
    inst = generate_random_metric(6, 100 + seed)
    tsp, ecm = solve_tsp_ip(inst), solve_2ecm_ip(inst)
    assert ecm.value <= tsp.value <= 2 * mst_cost(inst)
    assert ecm.value <= 2 * mst_cost(inst)
    assert all(is_2ec(6, o) for o in ecm.optima)
    assert all(o.cost(inst) == ecm.value for o in ecm.optima)
    assert all(t.cost(inst) == tsp.value for t in tsp.optima)
    t = unique_hamiltonian_2ecm(inst)
    if t is not None:
        assert tsp.unique and tsp.optima[0] == t and tsp.value == ecm.value
    if any(o.as_tour() is not None for o in ecm.optima):
        assert tsp.value == ecm.value


def test_2ecm_n7_runs():
    r = solve_2ecm_ip(generate_random_metric(7, 3))
    assert r.optima


def test_zero_cost_edges_2ecm():
    # zero-cost edges let optimal multigraphs carry extra copies
    inst = new_metric(3, {(0, 1): 0, (1, 2): 1, (0, 2): 1})
    value, opts = brute_2ecm(inst)
    r = solve_2ecm_ip(inst)
    assert r.value == value == 2
    assert sorted(o.multiplicity for o in r.optima) == opts


def test_size_bounds(monkeypatch):
    big = generate_random_metric(bounds().ecm_ip + 1, 0)
    with pytest.raises(TooLarge):
        solve_2ecm_ip(big)
    with pytest.raises(TooLarge):
        solve_tsp_ip(generate_random_metric(11, 0))
    monkeypatch.setenv("TSP2ECM_TSP_MAX_N", "3")
    with pytest.raises(TooLarge):
        solve_tsp_ip(generate_random_metric(4, 0))

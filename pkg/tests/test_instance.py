from fractions import Fraction as F
import random

import pytest
from hypothesis import given, settings, strategies as st

from tsp2ecm.errors import (
    AsymmetricInput,
    BadDimension,
    DimensionMismatch,
    DisconnectedGraph,
    InstanceSyntaxError,
    InvalidCut,
    NegativeCost,
    TriangleViolation,
)
from tsp2ecm.instance import (
    EdgeVector,
    all_cuts,
    canonical_cut,
    cut_edges,
    edge_index,
    edges,
    format_rational,
    instance_from_json,
    instance_to_json,
    linf_distance,
    metric_completion,
    new_metric,
    parse_instance,
    parse_rational,
    serialize_instance,
    serialize_instance_json,
)
from tsp2ecm.search import generate_random_metric

from conftest import DATA, load


def test_edge_order_is_lexicographic():
    es = edges(5)
    assert es == tuple(sorted(es))
    assert len(es) == 10
    assert all(edge_index(5, u, v) == k for k, (u, v) in enumerate(es))
    assert edge_index(5, 3, 1) == edge_index(5, 1, 3)


def test_rational_text():
    assert parse_rational("3/6") == F(1, 2)
    assert parse_rational("-2") == -2
    assert format_rational(F(3)) == "3/1"
    with pytest.raises(ValueError):
        parse_rational("3/0")
    with pytest.raises(ValueError):
        parse_rational("0.5")


def test_new_metric_examples(k3):
    assert k3.n == 3 and set(k3.costs) == {1}
    k4 = new_metric(4, {(0, 1): 1, (1, 2): 1, (2, 3): 1, (0, 3): 1, (0, 2): 2, (1, 3): 2})
    assert k4.cost(2, 0) == 2
    with pytest.raises(TriangleViolation) as exc:
        new_metric(3, {(0, 1): 1, (1, 2): 1, (0, 2): 3})
    assert exc.value.triple == (0, 2, 1)


def test_new_metric_errors():
    with pytest.raises(NegativeCost):
        new_metric(3, {(0, 1): -1, (1, 2): 1, (0, 2): 1})
    with pytest.raises(AsymmetricInput):
        new_metric(3, [[0, 1, 1], [2, 0, 1], [1, 1, 0]])
    with pytest.raises(BadDimension):
        new_metric(2, [[0, 1], [1, 0]])
    with pytest.raises(BadDimension):
        new_metric(3, [1, 1])


def test_zero_costs_allowed():
    inst = new_metric(3, {(0, 1): 0, (1, 2): 0, (0, 2): 0})
    assert inst.costs == (0, 0, 0)


def test_metric_completion_examples():
    assert metric_completion(3, {(0, 1): 1, (1, 2): 1}).cost(0, 2) == 2
    c4 = metric_completion(4, {(0, 1): 1, (1, 2): 1, (2, 3): 1, (0, 3): 1})
    assert c4.cost(0, 2) == 2 and c4.cost(1, 3) == 2
    with pytest.raises(DisconnectedGraph):
        metric_completion(4, {(0, 1): 1, (2, 3): 1})


def _bfs(n, adj, s):
    dist = {s: 0}
    frontier = [s]
    while frontier:
        nxt = []
        for u in frontier:
            for v in adj[u]:
                if v not in dist:
                    dist[v] = dist[u] + 1
                    nxt.append(v)
        frontier = nxt
    return dist


def test_theta_completion_against_bfs(theta5):
    # hubs 0 and 1, midpoints 2, 3, 4
    adj = {0: [2, 3, 4], 1: [2, 3, 4], 2: [0, 1], 3: [0, 1], 4: [0, 1]}
    for u in range(5):
        d = _bfs(5, adj, u)
        for v in range(u + 1, 5):
            assert theta5.cost(u, v) == d[v]
    assert theta5.cost(0, 1) == 2 and theta5.cost(2, 3) == 2


def test_completion_is_metric():
    rng = random.Random("completion")
    for _ in range(30):
        n = rng.randint(3, 7)
        w = {(i, i + 1): F(rng.randint(1, 9), rng.randint(1, 3)) for i in range(n - 1)}
        for _ in range(n):
            u, v = sorted(rng.sample(range(n), 2))
            w[(u, v)] = F(rng.randint(1, 9), rng.randint(1, 3))
        inst = metric_completion(n, w)
        new_metric(n, inst.matrix())  # re-validates


def test_cut_edges_examples(k4):
    assert cut_edges(k4, {0, 1}) == {(0, 2), (0, 3), (1, 2), (1, 3)}
    assert cut_edges(3, {0}) == {(0, 1), (0, 2)}
    assert len(cut_edges(5, {0, 2, 4})) == 6
    with pytest.raises(InvalidCut):
        cut_edges(4, set())
    with pytest.raises(InvalidCut):
        cut_edges(4, {0, 1, 2, 3})


def test_cut_complement_symmetry():
    for s in all_cuts(5):
        comp = set(range(5)) - s
        assert cut_edges(5, s) == cut_edges(5, comp)
        assert canonical_cut(5, comp) == s
    assert len(all_cuts(6)) == 2 ** 5 - 1


def test_linf_distance(k3):
    assert linf_distance(k3, k3) == 0
    other = new_metric(3, {(0, 1): F(3, 2), (1, 2): 1, (0, 2): 1})
    assert linf_distance(k3, other) == F(1, 2)
    a, b = generate_random_metric(6, 1), generate_random_metric(6, 2)
    assert linf_distance(a, b) == max(abs(x - y) for x, y in zip(a.costs, b.costs))
    with pytest.raises(DimensionMismatch):
        linf_distance(k3, a)


def test_edge_vector():
    x = EdgeVector.from_edges(4, {(0, 1): F(1, 2), (1, 2): 1})
    assert x[(1, 0)] == F(1, 2)
    assert x.cut_value({1}) == F(3, 2)
    assert x.support() == {(0, 1): F(1, 2), (1, 2): 1}
    assert x.to_json()["0-1"] == "1/2"


def test_round_trip_golden_files():
    for path in sorted(DATA.glob("*.inst")):
        text = path.read_bytes()
        inst = parse_instance(text)
        assert serialize_instance(inst) == text, path.name
        assert parse_instance(serialize_instance(inst)) == inst


def test_json_format():
    k4 = load("k4_golden.inst")
    blob = (DATA / "k4_golden.json").read_bytes()
    assert parse_instance(blob) == k4
    assert serialize_instance_json(k4) == blob
    assert instance_from_json(instance_to_json(k4)) == k4


def test_parse_errors():
    with pytest.raises(InstanceSyntaxError) as exc:
        parse_instance(b"n 3\n0 1 1\n0 2 3/0\n1 2 1\n")
    assert exc.value.line == 3
    with pytest.raises(InstanceSyntaxError):
        parse_instance(b"n 3\n0 1 1\n0 1 1\n1 2 1\n0 2 1\n")
    with pytest.raises(InstanceSyntaxError):
        parse_instance(b"3\n")
    with pytest.raises(TriangleViolation):
        parse_instance(b"n 3\n0 1 1\n0 2 3\n1 2 1\n")


def test_parse_whitespace_and_comments(k3):
    text = b"# unit triangle\n\nn   3\n0 1 1   # first\n\t0 2 2/2\n# mid\n1 2 1\r\n"
    assert parse_instance(text) == k3


@st.composite
def metric_instances(draw):
    n = draw(st.integers(3, 6))
    w = {}
    for u, v in edges(n):
        num = draw(st.integers(1, 20))
        den = draw(st.integers(1, 6))
        w[(u, v)] = F(num, den)
    return metric_completion(n, w)


@settings(max_examples=60, deadline=None)
@given(metric_instances())
def test_round_trip_property(inst):
    assert parse_instance(serialize_instance(inst)) == inst
    assert parse_instance(serialize_instance_json(inst)) == inst


@settings(max_examples=40, deadline=None)
@given(metric_instances(), st.randoms(use_true_random=False))
def test_formatting_variations_parse_identically(inst, rnd):
    lines = serialize_instance(inst).decode().splitlines()
    out = []
    for line in lines:
        if rnd.random() < 0.3:
            out.append("# noise")
        out.append((" " * rnd.randint(0, 2)) + line.replace(" ", " " * rnd.randint(1, 3)))
        if rnd.random() < 0.2:
            out.append("")
    assert parse_instance("\n".join(out)) == inst

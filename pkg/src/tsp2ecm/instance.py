"""Metric instances on the complete graph K_n with exact rational costs.

Edges are unordered pairs ``(u, v)`` with ``u < v`` and are indexed by their
position in lexicographic order, so that every dense edge vector is a plain
tuple aligned with :func:`edges`.  Cuts are given by one side ``S`` as a
frozenset; ``delta(S) == delta(V - S)`` and :func:`canonical_cut` picks the
side avoiding vertex 0 when a unique key is needed.
"""
from __future__ import annotations

import heapq
import json
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .errors import (
    AsymmetricInput,
    BadDimension,
    DimensionMismatch,
    DisconnectedGraph,
    InstanceSyntaxError,
    InvalidCut,
    NegativeCost,
    TriangleViolation,
)

Edge = tuple[int, int]
Cut = frozenset

_RATIONAL_RE = re.compile(r"^[+-]?\d+(/\d+)?$")


@lru_cache(maxsize=None)
def edges(n: int) -> tuple[Edge, ...]:
    return tuple((u, v) for u in range(n) for v in range(u + 1, n))


@lru_cache(maxsize=None)
def _index_table(n: int) -> dict[Edge, int]:
    return {e: k for k, e in enumerate(edges(n))}


def edge_index(n: int, u: int, v: int) -> int:
    if u > v:
        u, v = v, u
    try:
        return _index_table(n)[(u, v)]
    except KeyError:
        raise BadDimension(f"({u},{v}) is not an edge of K_{n}") from None


def num_edges(n: int) -> int:
    return n * (n - 1) // 2


def parse_rational(text: str) -> Fraction:
    """Parse ``p/q`` or an integer. Decimals are rejected to keep inputs exact."""
    text = text.strip()
    if not _RATIONAL_RE.match(text):
        raise ValueError(f"not a rational: {text!r}")
    if "/" in text:
        p, q = text.split("/")
        if int(q) == 0:
            raise ValueError(f"zero denominator in {text!r}")
        return Fraction(int(p), int(q))
    return Fraction(int(text))


def format_rational(x: Fraction) -> str:
    """Always ``p/q``, integers included (``3/1``)."""
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class MetricInstance:
    """Validated symmetric metric on K_n; ``costs[k]`` is the cost of ``edges(n)[k]``."""

    n: int
    costs: tuple[Fraction, ...]

    @property
    def edges(self) -> tuple[Edge, ...]:
        return edges(self.n)

    def cost(self, u: int, v: int) -> Fraction:
        return self.costs[edge_index(self.n, u, v)]

    def matrix(self) -> list[list[Fraction]]:
        n = self.n
        m = [[Fraction(0)] * n for _ in range(n)]
        for (u, v), c in zip(self.edges, self.costs):
            m[u][v] = m[v][u] = c
        return m

    def edge_cost(self, es: Iterable[Edge]) -> Fraction:
        return sum((self.cost(u, v) for u, v in es), Fraction(0))

    def scaled_costs(self) -> tuple[int, tuple[int, ...]]:
        """Common denominator ``D`` and integer costs ``D * c_e``."""
        d = 1
        for c in self.costs:
            d = d * c.denominator // _gcd(d, c.denominator)
        return d, tuple(int(c * d) for c in self.costs)


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


@dataclass(frozen=True)
class EdgeVector:
    """Dense nonnegative rational vector over the edges of K_n."""

    n: int
    values: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.values) != num_edges(self.n):
            raise BadDimension(f"edge vector of length {len(self.values)} for n={self.n}")
        for e, x in zip(edges(self.n), self.values):
            if x < 0:
                raise ValueError(f"negative entry {x} on edge {e}")

    @classmethod
    def from_edges(cls, n: int, mapping: Mapping[Edge, object]) -> "EdgeVector":
        vals = [Fraction(0)] * num_edges(n)
        for (u, v), x in mapping.items():
            vals[edge_index(n, u, v)] = Fraction(x)
        return cls(n, tuple(vals))

    def __getitem__(self, e: Edge) -> Fraction:
        return self.values[edge_index(self.n, *e)]

    def support(self) -> dict[Edge, Fraction]:
        return {e: x for e, x in zip(edges(self.n), self.values) if x != 0}

    def dot(self, instance: MetricInstance) -> Fraction:
        return sum((c * x for c, x in zip(instance.costs, self.values)), Fraction(0))

    def cut_value(self, cut: Iterable[int]) -> Fraction:
        s = frozenset(cut)
        return sum(
            (x for (u, v), x in zip(edges(self.n), self.values) if (u in s) != (v in s)),
            Fraction(0),
        )

    def to_json(self) -> dict[str, str]:
        return {f"{u}-{v}": format_rational(x) for (u, v), x in zip(edges(self.n), self.values)}


def _costs_from_table(n: int, table) -> list[Fraction]:
    m = num_edges(n)
    if isinstance(table, Mapping):
        vals: list[Fraction | None] = [None] * m
        for key, c in table.items():
            u, v = key
            if u == v or not (0 <= u < n and 0 <= v < n):
                raise BadDimension(f"({u},{v}) is not an edge of K_{n}")
            k = edge_index(n, u, v)
            c = Fraction(c)
            if vals[k] is not None and vals[k] != c:
                raise AsymmetricInput(min(u, v), max(u, v), vals[k], c)
            vals[k] = c
        missing = [edges(n)[k] for k, c in enumerate(vals) if c is None]
        if missing:
            raise BadDimension(f"missing cost for edge {missing[0][0]}-{missing[0][1]}")
        return vals  # type: ignore[return-value]
    rows = list(table)
    if len(rows) == n and all(isinstance(r, Sequence) and not isinstance(r, str) for r in rows):
        for i, r in enumerate(rows):
            if len(r) != n:
                raise BadDimension(f"row {i} has {len(r)} entries, expected {n}")
        for i in range(n):
            for j in range(i + 1, n):
                if Fraction(rows[i][j]) != Fraction(rows[j][i]):
                    raise AsymmetricInput(i, j, Fraction(rows[i][j]), Fraction(rows[j][i]))
        return [Fraction(rows[u][v]) for u, v in edges(n)]
    if len(rows) != m:
        raise BadDimension(f"expected {m} edge costs for n={n}, got {len(rows)}")
    return [Fraction(c) for c in rows]


def new_metric(n: int, costs) -> MetricInstance:
    """Build a validated instance.

    ``costs`` may be a full ``n x n`` matrix, a mapping ``(u, v) -> cost`` or a
    flat sequence in lexicographic edge order.  Nonnegativity and the triangle
    inequality are checked eagerly over all triples.
    """
    if not isinstance(n, int) or n < 3:
        raise BadDimension(f"need n >= 3, got {n!r}")
    vals = _costs_from_table(n, costs)
    for e, c in zip(edges(n), vals):
        if c < 0:
            raise NegativeCost(e, c)
    inst = MetricInstance(n, tuple(vals))
    _check_triangles(inst)
    return inst


def _check_triangles(inst: MetricInstance) -> None:
    n = inst.n
    c = inst.matrix()
    for i in range(n):
        ci = c[i]
        for j in range(i + 1, n):
            cij = ci[j]
            for k in range(n):
                if k == i or k == j:
                    continue
                if cij > ci[k] + c[k][j]:
                    raise TriangleViolation(i, j, k, cij, ci[k] + c[k][j])


def is_metric(n: int, costs: Sequence[Fraction]) -> bool:
    try:
        _check_triangles(MetricInstance(n, tuple(costs)))
    except TriangleViolation:
        return False
    return all(c >= 0 for c in costs)


def shortest_paths(n: int, weights: Mapping[Edge, object]) -> list[list[Fraction | None]]:
    """All-pairs shortest paths (Dijkstra from every source, exact rationals)."""
    adj: list[list[tuple[int, Fraction]]] = [[] for _ in range(n)]
    for (u, v), w in weights.items():
        w = Fraction(w)
        if w < 0:
            raise NegativeCost((min(u, v), max(u, v)), w)
        if u == v:
            continue
        adj[u].append((v, w))
        adj[v].append((u, w))
    dist: list[list[Fraction | None]] = []
    for s in range(n):
        d: list[Fraction | None] = [None] * n
        d[s] = Fraction(0)
        heap = [(Fraction(0), s)]
        while heap:
            du, u = heapq.heappop(heap)
            if du > d[u]:
                continue
            for v, w in adj[u]:
                nd = du + w
                if d[v] is None or nd < d[v]:
                    d[v] = nd
                    heapq.heappush(heap, (nd, v))
        dist.append(d)
    return dist


def metric_completion(n: int, weights: Mapping[Edge, object]) -> MetricInstance:
    """Complete graph whose costs are shortest-path distances in ``weights``."""
    if n < 3:
        raise BadDimension(f"need n >= 3, got {n}")
    for u, v in weights:
        if not (0 <= u < n and 0 <= v < n):
            raise BadDimension(f"({u},{v}) is not an edge of K_{n}")
    dist = shortest_paths(n, weights)
    unreachable = [v for v in range(n) if dist[0][v] is None]
    if unreachable:
        raise DisconnectedGraph(f"vertex {unreachable[0]} is not reachable from vertex 0")
    return new_metric(n, [dist[u][v] for u, v in edges(n)])


def check_cut(n: int, cut: Iterable[int]) -> Cut:
    s = frozenset(cut)
    if any(not (0 <= v < n) for v in s):
        raise InvalidCut(f"cut {sorted(s)} has vertices outside 0..{n - 1}")
    if not s or len(s) == n:
        raise InvalidCut(f"cut {sorted(s)} is empty or the whole vertex set")
    return s


def canonical_cut(n: int, cut: Iterable[int]) -> Cut:
    s = check_cut(n, cut)
    if 0 in s:
        s = frozenset(range(n)) - s
    return s


def cut_edges(instance: MetricInstance | int, cut: Iterable[int]) -> set[Edge]:
    n = instance if isinstance(instance, int) else instance.n
    s = check_cut(n, cut)
    return {(u, v) for u, v in edges(n) if (u in s) != (v in s)}


def all_cuts(n: int) -> list[Cut]:
    """Every cut of K_n once, by its side avoiding vertex 0 (``2^(n-1) - 1`` of them)."""
    rest = range(1, n)
    out = []
    for r in range(1, n):
        for s in combinations(rest, r):
            out.append(frozenset(s))
    return out


def linf_distance(a: MetricInstance, b: MetricInstance) -> Fraction:
    if a.n != b.n:
        raise DimensionMismatch(f"instances on {a.n} and {b.n} vertices")
    return max((abs(x - y) for x, y in zip(a.costs, b.costs)), default=Fraction(0))


# -- file formats -----------------------------------------------------------


def serialize_instance(inst: MetricInstance) -> bytes:
    lines = [f"n {inst.n}"]
    for (u, v), c in zip(inst.edges, inst.costs):
        lines.append(f"{u} {v} {c.numerator}" if c.denominator == 1 else f"{u} {v} {c}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def instance_to_json(inst: MetricInstance) -> dict:
    return {
        "n": inst.n,
        "costs": [[f"{u}-{v}", format_rational(c)] for (u, v), c in zip(inst.edges, inst.costs)],
    }


def serialize_instance_json(inst: MetricInstance) -> bytes:
    return (json.dumps(instance_to_json(inst)) + "\n").encode("utf-8")


def instance_from_json(obj) -> MetricInstance:
    try:
        n = obj["n"]
        entries = obj["costs"]
    except (KeyError, TypeError):
        raise InstanceSyntaxError(1, "JSON instance needs 'n' and 'costs'") from None
    if not isinstance(n, int):
        raise InstanceSyntaxError(1, f"'n' must be an integer, got {n!r}")
    table: dict[Edge, Fraction] = {}
    for pos, item in enumerate(entries):
        try:
            key, val = item
            u, v = (int(t) for t in key.split("-"))
            c = parse_rational(str(val))
        except (ValueError, TypeError, AttributeError) as exc:
            raise InstanceSyntaxError(1, f"bad cost entry #{pos}: {item!r} ({exc})") from None
        _put(table, u, v, c)
    return new_metric(n, table)


def _put(table, u, v, c):
    key = (min(u, v), max(u, v))
    if key in table and table[key] != c:
        raise AsymmetricInput(key[0], key[1], table[key], c)
    table[key] = c


def parse_instance(text: bytes | str) -> MetricInstance:
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise InstanceSyntaxError(1, f"not UTF-8: {exc}") from None
    if text.lstrip().startswith("{"):
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InstanceSyntaxError(exc.lineno, exc.msg) from None
        return instance_from_json(obj)

    n = None
    table: dict[Edge, Fraction] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        if n is None:
            if len(tok) != 2 or tok[0] != "n" or not tok[1].isdigit():
                raise InstanceSyntaxError(lineno, f"expected 'n <count>', got {line!r}")
            n = int(tok[1])
            if n < 3:
                raise BadDimension(f"need n >= 3, got {n}")
            continue
        if len(tok) != 3:
            raise InstanceSyntaxError(lineno, f"expected '<u> <v> <cost>', got {line!r}")
        try:
            u, v = int(tok[0]), int(tok[1])
            c = parse_rational(tok[2])
        except ValueError as exc:
            raise InstanceSyntaxError(lineno, str(exc)) from None
        if u == v or not (0 <= u < n and 0 <= v < n):
            raise InstanceSyntaxError(lineno, f"({u},{v}) is not an edge of K_{n}")
        if (min(u, v), max(u, v)) in table and table[(min(u, v), max(u, v))] == c:
            raise InstanceSyntaxError(lineno, f"duplicate edge {u}-{v}")
        _put(table, u, v, c)
    if n is None:
        raise InstanceSyntaxError(1, "empty instance file")
    return new_metric(n, table)

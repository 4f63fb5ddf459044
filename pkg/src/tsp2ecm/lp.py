"""Exact LP relaxations of TSP and 2ECM by cutting planes.

``solve_lp(inst, degree_constrained=True)`` is the TSP-LP (degree equations,
subtour cuts, ``0 <= x <= 1``).  With ``degree_constrained=False`` it is the
cut-only 2ECM relaxation (``x(delta(S)) >= 2``, ``x >= 0``, no upper bound).
Cut separation enumerates every cut for ``n <= 12`` and falls back to a
Stoer-Wagner global minimum cut of the support graph beyond that.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import networkx as nx

from . import simplex
from .config import bounds
from .errors import Infeasible, SupportInsufficient, TooLarge
from .instance import (
    Cut,
    Edge,
    EdgeVector,
    MetricInstance,
    all_cuts,
    canonical_cut,
    check_cut,
    edges,
    format_rational,
    num_edges,
)

TWO = Fraction(2)
HALF = Fraction(1, 2)


@dataclass
class LpResult:
    value: Fraction
    solution: EdgeVector
    active_cuts: list[Cut]
    degree_constrained: bool
    rounds: int = 0

    def to_json(self) -> dict:
        return {
            "value": format_rational(self.value),
            "solution": self.solution.to_json(),
            "active_cuts": [sorted(s) for s in self.active_cuts],
            "degree_constrained": self.degree_constrained,
        }


@dataclass
class DualVector:
    """Dual of the cut LP: ``y_S >= 0`` per cut plus vertex multipliers ``pi``."""

    y: dict[Cut, Fraction]
    pi: tuple[Fraction, ...] | None
    value: Fraction
    primal_value: Fraction | None = None
    support: list[Cut] = field(default_factory=list)

    @property
    def attains_primal(self) -> bool:
        return self.primal_value is not None and self.value == self.primal_value

    def edge_load(self, n: int) -> list[Fraction]:
        """Left-hand side of each edge's dual constraint."""
        load = [Fraction(0)] * num_edges(n)
        for k, (u, v) in enumerate(edges(n)):
            total = Fraction(0)
            if self.pi is not None:
                total += self.pi[u] + self.pi[v]
            for s, ys in self.y.items():
                if ys and ((u in s) != (v in s)):
                    total += ys
            load[k] = total
        return load

    def tight_edges(self, instance: MetricInstance) -> set[Edge]:
        load = self.edge_load(instance.n)
        return {e for e, c, l in zip(instance.edges, instance.costs, load) if l == c}

    def to_json(self) -> dict:
        return {
            "value": format_rational(self.value),
            "y": [[sorted(s), format_rational(v)] for s, v in self.y.items() if v],
            "pi": None if self.pi is None else [format_rational(p) for p in self.pi],
            "attains_primal": self.attains_primal,
        }


def _check_lp_bound(n, bound):
    limit = bounds().lp if bound is None else bound
    if n > limit:
        raise TooLarge(n, limit, "LP")


def cut_values(x: EdgeVector) -> dict[Cut, Fraction]:
    """``x(delta(S))`` for every canonical cut, by subset DP over bitmasks."""
    n = x.n
    d = 1
    for v in x.values:
        d = d * v.denominator // _gcd(d, v.denominator)
    w = [[0] * n for _ in range(n)]
    for (u, v), val in zip(edges(n), x.values):
        w[u][v] = w[v][u] = int(val * d)
    # masks over vertices 1..n-1 (bit i-1 for vertex i)
    size = 1 << (n - 1)
    inside = [0] * size  # x(E(S))
    degsum = [0] * size
    deg = [sum(w[v]) for v in range(n)]
    out = {}
    for mask in range(1, size):
        low = mask & -mask
        i = low.bit_length()  # vertex index
        rest = mask ^ low
        inner = inside[rest]
        r = rest
        while r:
            b = r & -r
            inner += w[i][b.bit_length()]
            r ^= b
        inside[mask] = inner
        degsum[mask] = degsum[rest] + deg[i]
        val = degsum[mask] - 2 * inner
        s = frozenset(j + 1 for j in range(n - 1) if (mask >> j) & 1)
        out[s] = Fraction(val, d)
    return out


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def violated_cuts(x: EdgeVector, limit: int | None = None) -> list[tuple[Fraction, Cut]]:
    """All cuts with ``x(delta(S)) < 2``, most violated first, ties by size then members."""
    bad = [(val, s) for s, val in cut_values(x).items() if val < TWO]
    bad.sort(key=lambda t: (t[0], len(t[1]), sorted(t[1])))
    return bad if limit is None else bad[:limit]


def _min_cut_separation(x: EdgeVector) -> Cut | None:
    n = x.n
    g = nx.Graph()
    g.add_nodes_from(range(n))
    for e, val in x.support().items():
        g.add_edge(*e, weight=val)
    comps = list(nx.connected_components(g))
    if len(comps) > 1:
        return canonical_cut(n, min(comps, key=min))
    value, (a, b) = nx.stoer_wagner(g)
    if value < TWO:
        return canonical_cut(n, a)
    return None


def separate(instance: MetricInstance | int, x: EdgeVector) -> Cut | None:
    """A cut with ``x(delta(S)) < 2``, or ``None`` when every cut holds."""
    n = x.n
    if n <= bounds().full_cut_enumeration:
        bad = violated_cuts(x, limit=1)
        return bad[0][1] if bad else None
    return _min_cut_separation(x)


def _build_rows(n, cuts, degree_constrained):
    es = edges(n)
    rows, senses, rhs = [], [], []
    if degree_constrained:
        for v in range(n):
            rows.append({k: 1 for k, e in enumerate(es) if v in e})
            senses.append(simplex.EQ)
            rhs.append(2)
    for s in cuts:
        rows.append({k: 1 for k, (u, v) in enumerate(es) if (u in s) != (v in s)})
        senses.append(simplex.GE)
        rhs.append(2)
    return rows, senses, rhs


def solve_lp(
    instance: MetricInstance,
    degree_constrained: bool = True,
    initial_cuts: Iterable[Iterable[int]] = (),
    bound: int | None = None,
    cuts_per_round: int = 8,
) -> LpResult:
    n = instance.n
    _check_lp_bound(n, bound)
    m = num_edges(n)
    cuts: list[Cut] = []
    seen: set[Cut] = set()

    def add(s):
        key = canonical_cut(n, s)
        if key not in seen:
            seen.add(key)
            cuts.append(check_cut(n, s))

    if not degree_constrained:
        for v in range(n):
            add({v})
    for s in initial_cuts:
        add(s)
    upper = [1] * m if degree_constrained else None
    full_enum = n <= bounds().full_cut_enumeration
    rounds = 0
    while True:
        rounds += 1
        rows, senses, rhs = _build_rows(n, cuts, degree_constrained)
        if not rows:
            rows, senses, rhs = [{}], [simplex.GE], [0]
        try:
            sol = simplex.solve(list(instance.costs), rows, senses, rhs, upper)
        except simplex.Unbounded:  # cannot happen: costs are nonnegative
            raise Infeasible("LP reported unbounded") from None
        x = EdgeVector(n, tuple(sol.x))
        if full_enum:
            new = [s for _, s in violated_cuts(x, limit=cuts_per_round)]
        else:
            s = _min_cut_separation(x)
            new = [] if s is None else [s]
        new = [s for s in new if canonical_cut(n, s) not in seen]
        if not new:
            break
        for s in new:
            add(s)
    return LpResult(sol.value, x, cuts, degree_constrained, rounds)


def is_half_integral(x: EdgeVector | Sequence[Fraction]) -> bool:
    vals = x.values if isinstance(x, EdgeVector) else x
    return all(v == 0 or v == HALF or v == 1 for v in vals)


@dataclass
class ParsimoniousResult:
    equal: bool
    degree_constrained: Fraction
    degree_free: Fraction

    def __bool__(self):
        return self.equal


def parsimonious_check(instance: MetricInstance) -> ParsimoniousResult:
    a = solve_lp(instance, True).value
    b = solve_lp(instance, False).value
    return ParsimoniousResult(a == b, a, b)


# -- duals ------------------------------------------------------------------


def _dual_program(n, costs, support, degree_constrained):
    """Columns: pi+ (n), pi- (n) if degree constrained, then y_S; rows per edge."""
    es = edges(n)
    npi = 2 * n if degree_constrained else 0
    rows = []
    for u, v in es:
        row = {}
        if degree_constrained:
            row[u] = 1
            row[v] = 1
            row[n + u] = -1
            row[n + v] = -1
        for t, s in enumerate(support):
            if (u in s) != (v in s):
                row[npi + t] = 1
        rows.append(row)
    obj = [2] * n + [-2] * n if degree_constrained else []
    obj += [2] * len(support)
    return rows, obj, npi


def _unpack_dual(n, x, support, npi, degree_constrained):
    pi = None
    if degree_constrained:
        pi = tuple(x[v] - x[n + v] for v in range(n))
    y = {s: x[npi + t] for t, s in enumerate(support)}
    value = 2 * sum(y.values(), Fraction(0))
    if pi is not None:
        value += 2 * sum(pi, Fraction(0))
    return y, pi, value


def _resolve_support(instance, support):
    n = instance.n
    if support is None:
        if n <= bounds().full_cut_enumeration:
            return all_cuts(n)
        return None
    out, seen = [], set()
    for s in support:
        key = canonical_cut(n, s)
        if key not in seen:
            seen.add(key)
            out.append(check_cut(n, s))
    return out


def solve_dual(
    instance: MetricInstance,
    support: Iterable[Iterable[int]] | None = None,
    degree_constrained: bool = True,
    primal_value: Fraction | None = None,
    strict: bool = False,
) -> DualVector:
    """Maximize the dual objective with ``y`` restricted to ``support``.

    ``support=None`` means every cut (for ``n > 12``: the active cuts of the
    primal solve, which carries the same optimum).  The result records whether
    its value reaches the primal LP value; with ``strict=True`` a shortfall
    raises :class:`SupportInsufficient`.
    """
    n = instance.n
    _check_lp_bound(n, None)
    if primal_value is None or support is None:
        primal = solve_lp(instance, degree_constrained)
        primal_value = primal.value
    sup = _resolve_support(instance, support)
    if sup is None:
        sup = primal.active_cuts
    rows, obj, npi = _dual_program(n, instance.costs, sup, degree_constrained)
    ncols = len(obj)
    if ncols == 0:
        dual = DualVector({}, None, Fraction(0), primal_value, sup)
    else:
        sol = simplex.solve(
            [-c for c in obj], rows, [simplex.LE] * len(rows), list(instance.costs)
        )
        y, pi, value = _unpack_dual(n, sol.x, sup, npi, degree_constrained)
        dual = DualVector(y, pi, value, primal_value, sup)
    if strict and not dual.attains_primal:
        raise SupportInsufficient(dual)
    return dual


def find_patterned_dual(
    instance: MetricInstance,
    support: Sequence[Cut],
    value: Fraction,
    tight: Iterable[Edge] = (),
    slack: Iterable[Edge] = (),
    zero_cuts: Iterable[Cut] = (),
    degree_constrained: bool = True,
) -> DualVector | None:
    """A dual on ``support`` with objective >= ``value``, the ``tight`` edges
    tight, the ``slack`` edges strictly slack and ``y`` vanishing on
    ``zero_cuts``; ``None`` if no such dual exists.

    Strict slackness is decided by maximizing a common slack ``t <= 1``.
    """
    n = instance.n
    sup = list(support)
    rows, obj, npi = _dual_program(n, instance.costs, sup, degree_constrained)
    ncols = len(obj)
    index = {e: k for k, e in enumerate(edges(n))}
    slack = [index[(min(e), max(e))] for e in slack]
    tight = {index[(min(e), max(e))] for e in tight}
    t_col = ncols
    all_rows, senses, rhs = [], [], []
    for k, row in enumerate(rows):
        r = dict(row)
        all_rows.append(r)
        senses.append(simplex.EQ if k in tight else simplex.LE)
        rhs.append(instance.costs[k])
    for k in slack:
        r = dict(rows[k])
        r[t_col] = 1
        all_rows.append(r)
        senses.append(simplex.LE)
        rhs.append(instance.costs[k])
    all_rows.append({j: c for j, c in enumerate(obj) if c})
    senses.append(simplex.GE)
    rhs.append(value)
    zero = {canonical_cut(n, s) for s in zero_cuts}
    upper: list = [None] * ncols + [1]
    for t, s in enumerate(sup):
        if canonical_cut(n, s) in zero:
            upper[npi + t] = 0
    c = [0] * ncols + [-1 if slack else 0]
    try:
        sol = simplex.solve(c, all_rows, senses, rhs, upper)
    except Infeasible:
        return None
    if slack and sol.x[t_col] <= 0:
        return None
    y, pi, val = _unpack_dual(n, sol.x, sup, npi, degree_constrained)
    return DualVector(y, pi, val, value, sup)


# -- half-integral points ---------------------------------------------------


def best_half_integral(
    instance: MetricInstance,
    stop_at: Fraction | None = None,
    bound: int | None = None,
    cutoff: Fraction | None = None,
) -> tuple[Fraction | None, EdgeVector | None]:
    """Cheapest half-integral point of the TSP-LP polytope.

    Searches ``y = 2x`` in ``{0,1,2}^E`` with ``y(delta(v)) = 4`` and
    ``y(delta(S)) >= 4``, depth-first over edges with a cost bound against the
    incumbent (initially the best tour).  Stops early once a point of cost
    ``stop_at`` is found.  With ``cutoff`` only points of cost at most
    ``cutoff`` are searched, no tour is solved, and ``(None, None)`` means
    there is none.
    """
    from .oracle import solve_tsp_ip

    n = instance.n
    limit = bounds().half_integral if bound is None else bound
    if n > limit:
        raise TooLarge(n, limit, "half-integral search")
    scale, w = instance.scaled_costs()
    es = edges(n)
    m = len(es)
    if cutoff is None:
        tour = solve_tsp_ip(instance, bound=max(n, bounds().tsp_ip)).optima[0]
        best_y = [2 * b for b in tour.indicator()]
        best = sum(wk * yk for wk, yk in zip(w, best_y))  # = 2 * scale * c(T)
    else:
        c2 = cutoff * 2 * scale
        best_y, best = None, (c2.numerator // c2.denominator) + 1
    target = None if stop_at is None else int(stop_at * 2 * scale)

    inf = float("inf")
    rem_min = [[inf] * n for _ in range(m + 1)]
    rem_cnt = [[0] * n for _ in range(m + 1)]
    for k in range(m - 1, -1, -1):
        rem_min[k][:] = rem_min[k + 1]
        rem_cnt[k][:] = rem_cnt[k + 1]
        u, v = es[k]
        rem_cnt[k][u] += 1
        rem_cnt[k][v] += 1
        rem_min[k][u] = min(rem_min[k][u], w[k])
        rem_min[k][v] = min(rem_min[k][v], w[k])
    completion: list[list[int]] = [[] for _ in range(m)]
    for u in range(n - 1):
        k = es.index((u, n - 1))
        for sub in range(1 << u):
            completion[k].append(sub | (1 << u))
    bits = [(1 << u, 1 << v) for u, v in es]
    deg = [0] * n
    y = [0] * m
    state = {"best": best, "y": best_y, "done": target is not None and best <= target}

    def cut_ok(mask):
        total = 0
        for k in range(m):
            if y[k]:
                bu, bv = bits[k]
                if ((mask & bu) != 0) != ((mask & bv) != 0):
                    total += y[k]
        return total >= 4

    def dfs(k, cost):
        if state["done"]:
            return
        if k == m:
            if cost < state["best"]:
                state["best"] = cost
                state["y"] = list(y)
                if target is not None and cost <= target:
                    state["done"] = True
            return
        u, v = es[k]
        for val in (0, 1, 2):
            if deg[u] + val > 4 or deg[v] + val > 4:
                break
            c2 = cost + val * w[k]
            deg[u] += val
            deg[v] += val
            y[k] = val
            row_min, row_cnt = rem_min[k + 1], rem_cnt[k + 1]
            lb = 0
            feasible = True
            for t in range(n):
                r = 4 - deg[t]
                if r:
                    if 2 * row_cnt[t] < r:
                        feasible = False
                        break
                    lb += r * row_min[t]
            # sum_e w_e y_e >= half of sum_v rem(v) * cheapest(v)
            if feasible and 2 * c2 + lb < 2 * state["best"]:
                if all(cut_ok(mask) for mask in completion[k]):
                    dfs(k + 1, c2)
            deg[u] -= val
            deg[v] -= val
            y[k] = 0
            if state["done"]:
                return

    dfs(0, 0)
    if state["y"] is None:
        return None, None
    x = EdgeVector(n, tuple(Fraction(v, 2) for v in state["y"]))
    return Fraction(state["best"], 2 * scale), x


def decide_half_integral_optimum(
    instance: MetricInstance, lp_value: Fraction | None = None, bound: int | None = None
) -> EdgeVector | None:
    """A half-integral point attaining the TSP-LP optimum, if one exists.

    Any half-integral point on the optimal face counts, not only vertices.
    """
    if lp_value is None:
        lp_value = solve_lp(instance, True).value
    value, x = best_half_integral(instance, stop_at=lp_value, bound=bound, cutoff=lp_value)
    return x if value == lp_value else None

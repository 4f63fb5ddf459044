"""Exhaustive exact solvers for TSP-IP and 2ECM-IP on small complete graphs.

Both solvers return *every* optimal solution; ties are never broken, since
uniqueness of the optimum is the property under study.

2ECM multiplicities are capped at 2.  This loses no optimum value: lowering a
multiplicity of 3 or more to exactly 2 keeps every cut through that edge at
value >= 2 and leaves all other cuts unchanged.  When every cost is positive
no optimum uses an edge three times either, so the enumeration over
``{0, 1, 2}^E`` lists all optima.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from typing import Generic, Sequence, TypeVar

from .config import bounds
from .errors import TooLarge
from .instance import Edge, MetricInstance, edge_index, edges, num_edges

S = TypeVar("S")


@dataclass(frozen=True)
class HamiltonianCycle:
    """A tour in canonical form: starts at 0 and ``order[1] < order[-1]``."""

    order: tuple[int, ...]

    def __post_init__(self):
        order = tuple(self.order)
        n = len(order)
        if n < 3 or sorted(order) != list(range(n)):
            raise ValueError(f"not a Hamiltonian cycle order: {self.order}")
        i = order.index(0)
        order = order[i:] + order[:i]
        if order[1] > order[-1]:
            order = (0,) + tuple(reversed(order[1:]))
        object.__setattr__(self, "order", order)

    @property
    def n(self) -> int:
        return len(self.order)

    @property
    def edges(self) -> frozenset[Edge]:
        o = self.order
        return frozenset((min(a, b), max(a, b)) for a, b in zip(o, o[1:] + o[:1]))

    def cost(self, instance: MetricInstance) -> Fraction:
        return instance.edge_cost(self.edges)

    def indicator(self) -> tuple[int, ...]:
        es = self.edges
        return tuple(1 if e in es else 0 for e in edges(self.n))

    def position(self, v: int) -> int:
        return self.order.index(v)


@dataclass(frozen=True)
class Multisubgraph:
    n: int
    multiplicity: tuple[int, ...]

    def cost(self, instance: MetricInstance) -> Fraction:
        return sum((c * k for c, k in zip(instance.costs, self.multiplicity)), Fraction(0))

    def support(self) -> dict[Edge, int]:
        return {e: k for e, k in zip(edges(self.n), self.multiplicity) if k}

    def as_tour(self) -> HamiltonianCycle | None:
        """The Hamiltonian cycle this multigraph is, if it is one."""
        if any(k > 1 for k in self.multiplicity) or sum(self.multiplicity) != self.n:
            return None
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for (u, v), k in zip(edges(self.n), self.multiplicity):
            if k:
                adj[u].append(v)
                adj[v].append(u)
        if any(len(a) != 2 for a in adj):
            return None
        order = [0]
        prev, cur = -1, 0
        while True:
            nxt = adj[cur][0] if adj[cur][0] != prev else adj[cur][1]
            if nxt == 0:
                break
            order.append(nxt)
            prev, cur = cur, nxt
        if len(order) != self.n:
            return None
        return HamiltonianCycle(tuple(order))


@dataclass
class IpResult(Generic[S]):
    value: Fraction
    optima: list[S] = field(default_factory=list)

    @property
    def unique(self) -> bool:
        return len(self.optima) == 1


def _check_bound(n, bound, what):
    if n > bound:
        raise TooLarge(n, bound, what)


def solve_tsp_ip(instance: MetricInstance, bound: int | None = None) -> IpResult[HamiltonianCycle]:
    n = instance.n
    _check_bound(n, bounds().tsp_ip if bound is None else bound, "TSP-IP enumeration")
    scale, w = instance.scaled_costs()
    c = [[0] * n for _ in range(n)]
    for (u, v), x in zip(edges(n), w):
        c[u][v] = c[v][u] = x
    c0 = c[0]
    best = None
    optima: list[tuple[int, ...]] = []
    for perm in permutations(range(1, n)):
        if perm[0] > perm[-1]:
            continue
        total = c0[perm[0]] + c0[perm[-1]]
        prev = perm[0]
        for v in perm[1:]:
            total += c[prev][v]
            prev = v
        if best is None or total < best:
            best = total
            optima = [perm]
        elif total == best:
            optima.append(perm)
    return IpResult(Fraction(best, scale), [HamiltonianCycle((0,) + p) for p in optima])


def is_2ec(n: int, multiplicity: Sequence[int] | Multisubgraph) -> bool:
    """Spanning, connected and bridgeless as a multigraph on ``n`` vertices."""
    if isinstance(multiplicity, Multisubgraph):
        multiplicity = multiplicity.multiplicity
    if len(multiplicity) != num_edges(n):
        raise ValueError(f"multiplicity vector of length {len(multiplicity)} for n={n}")
    return _min_cut_is_at_least_two(n, multiplicity)


def _min_cut_is_at_least_two(n, mult) -> bool:
    es = edges(n)
    for mask in range(1, 1 << (n - 1)):
        total = 0
        for (u, v), k in zip(es, mult):
            if k and ((mask >> u) & 1) != ((mask >> v) & 1):
                total += k
                if total >= 2:
                    break
        if total < 2:
            return False
    return True


def solve_2ecm_ip(
    instance: MetricInstance, bound: int | None = None, upper_bound: Fraction | None = None
) -> IpResult[Multisubgraph]:
    """All minimum-cost 2EC spanning multisubgraphs with multiplicities in {0,1,2}.

    Depth-first over edges in lexicographic order.  A branch is cut when its
    cost plus the degree-completion bound exceeds the incumbent; ties with the
    incumbent are kept.  After the last edge at vertex ``u`` is fixed, every
    cut whose side lies in ``{0..u}`` is fully determined and is checked.
    The initial incumbent is the optimal tour cost (tours are feasible).
    """
    n = instance.n
    _check_bound(n, bounds().ecm_ip if bound is None else bound, "2ECM-IP enumeration")
    scale, w = instance.scaled_costs()
    es = edges(n)
    m = len(es)
    if upper_bound is None:
        upper_bound = solve_tsp_ip(instance, bound=max(n, 3)).value
    best = int(upper_bound * scale)

    inf = float("inf")
    # rem_min[k][v]: cheapest edge at v among positions >= k
    rem_min = [[inf] * n for _ in range(m + 1)]
    for k in range(m - 1, -1, -1):
        row = rem_min[k]
        row[:] = rem_min[k + 1]
        u, v = es[k]
        if w[k] < row[u]:
            row[u] = w[k]
        if w[k] < row[v]:
            row[v] = w[k]

    # completion[k]: vertex groups finishing at position k -> cut masks to check
    completion: list[list[int]] = [[] for _ in range(m)]
    for u in range(n - 1):
        k = edge_index(n, u, n - 1)
        # sides S with u in S and S within {0..u}
        for sub in range(1 << u):
            completion[k].append(sub | (1 << u))
    incident_bits = []
    for u, v in es:
        incident_bits.append((1 << u, 1 << v))

    positive = all(x > 0 for x in w)
    max_copies = 2 * (n - 1) if positive else 2 * m

    deg = [0] * n
    mult = [0] * m
    optima: list[tuple[int, ...]] = []
    best_box = [best]

    def cut_value(mask):
        total = 0
        for k in range(m):
            k_mult = mult[k]
            if k_mult:
                bu, bv = incident_bits[k]
                if ((mask & bu) != 0) != ((mask & bv) != 0):
                    total += k_mult
        return total

    def lower2(k):
        # twice the degree-completion lower bound for positions >= k
        row = rem_min[k]
        total = 0
        for v in range(n):
            d = 2 - deg[v]
            if d > 0:
                r = row[v]
                if r == inf:
                    return inf
                total += d * r
        return total

    def dfs(k, cost, copies):
        if k == m:
            b = best_box[0]
            if cost < b:
                best_box[0] = cost
                optima.clear()
            optima.append(tuple(mult))
            return
        u, v = es[k]
        wk = w[k]
        for x in (0, 1, 2):
            if copies + x > max_copies:
                break
            c2 = cost + x * wk
            if c2 > best_box[0]:
                break
            deg[u] += x
            deg[v] += x
            mult[k] = x
            lb = lower2(k + 1)
            if 2 * c2 + lb <= 2 * best_box[0]:
                ok = True
                for mask in completion[k]:
                    if cut_value(mask) < 2:
                        ok = False
                        break
                if ok:
                    dfs(k + 1, c2, copies + x)
            deg[u] -= x
            deg[v] -= x
            mult[k] = 0

    dfs(0, 0, 0)
    value = Fraction(best_box[0], scale)
    return IpResult(value, [Multisubgraph(n, mu) for mu in optima])


def unique_hamiltonian_2ecm(instance: MetricInstance, bound: int | None = None) -> HamiltonianCycle | None:
    res = solve_2ecm_ip(instance, bound=bound)
    if not res.unique:
        return None
    return res.optima[0].as_tour()


def mst_cost(instance: MetricInstance) -> Fraction:
    n = instance.n
    c = instance.matrix()
    in_tree = [False] * n
    best = [None] * n
    best[0] = Fraction(0)
    total = Fraction(0)
    for _ in range(n):
        u = min((v for v in range(n) if not in_tree[v] and best[v] is not None), key=lambda v: best[v])
        in_tree[u] = True
        total += best[u]
        for v in range(n):
            if not in_tree[v] and (best[v] is None or c[u][v] < best[v]):
                best[v] = c[u][v]
    return total

"""Bypass advantages, the chain LP-value formula, integrality gaps and transfer reports."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterable, Sequence

from .certificate import CutFamily, MarginCertificate, verify_certificate
from .config import bounds
from .errors import NotIntervalCut, TooFewNonTourEdges, ZeroLpValue
from .instance import (
    Cut,
    Edge,
    EdgeVector,
    MetricInstance,
    cut_edges,
    edge_index,
    format_rational,
)
from .lp import (
    HALF,
    DualVector,
    LpResult,
    cut_values,
    decide_half_integral_optimum,
    find_patterned_dual,
    solve_dual,
    solve_lp,
)
from .oracle import HamiltonianCycle, solve_2ecm_ip, solve_tsp_ip

FOUR_THIRDS = Fraction(4, 3)


def _fmt(x):
    return None if x is None else format_rational(x)


def _edge_str(e):
    return f"{e[0]}-{e[1]}"


@dataclass(frozen=True)
class BypassData:
    cut: Cut
    a: Edge
    b: Edge
    p: Edge
    q: Edge
    delta: Fraction

    def to_json(self) -> dict:
        return {
            "cut": sorted(self.cut),
            "a": _edge_str(self.a),
            "b": _edge_str(self.b),
            "p": _edge_str(self.p),
            "q": _edge_str(self.q),
            "delta": format_rational(self.delta),
        }


def bypass_advantage(instance: MetricInstance, tour: HamiltonianCycle, cut: Iterable[int]) -> BypassData:
    """``(c(a) + c(b)) - (c(p) + c(q))`` for the two tour crossings ``a, b`` and
    the two cheapest non-tour crossings ``p, q`` (ties by edge order)."""
    s = frozenset(cut)
    crossing = sorted(cut_edges(instance, s))
    t = tour.edges
    tour_x = [e for e in crossing if e in t]
    if len(tour_x) != 2:
        raise NotIntervalCut(f"{len(tour_x)} tour edges cross delta({sorted(s)})")
    others = sorted((e for e in crossing if e not in t), key=lambda e: (instance.cost(*e), e))
    if len(others) < 2:
        raise TooFewNonTourEdges(f"delta({sorted(s)}) has {len(others)} non-tour edge(s)")
    a, b = tour_x
    p, q = others[0], others[1]
    c = instance.cost
    delta = (c(*a) + c(*b)) - (c(*p) + c(*q))
    return BypassData(s, a, b, p, q, delta)


def _chain_bypasses(instance, tour, chain) -> list[BypassData | None]:
    """``None`` marks a cut every crossing of which is a tour edge (no bypass exists)."""
    out = []
    t = tour.edges
    for s in chain.cuts:
        crossing = cut_edges(instance, s)
        if all(e in t for e in crossing):
            tour_x = [e for e in crossing if e in t]
            if len(tour_x) != 2:
                raise NotIntervalCut(f"{len(tour_x)} tour edges cross delta({sorted(s)})")
            out.append(None)
        else:
            out.append(bypass_advantage(instance, tour, s))
    return out


def lemma_lp_value(
    instance: MetricInstance, tour: HamiltonianCycle, chain: CutFamily | Iterable[Iterable[int]]
) -> Fraction:
    """``c(T) - 1/2 * sum_j max(0, Delta_j)`` over the chain cuts."""
    if not isinstance(chain, CutFamily):
        chain = CutFamily.of(chain)
    gain = sum((max(Fraction(0), b.delta) for b in _chain_bypasses(instance, tour, chain) if b), Fraction(0))
    return tour.cost(instance) - gain / 2


def _is_chain(cuts: Sequence[frozenset]) -> bool:
    return all(cuts[i] < cuts[i + 1] for i in range(len(cuts) - 1))


@dataclass
class LemmaReport:
    chain: CutFamily
    lp: LpResult
    bypasses: list[BypassData | None] = field(default_factory=list)
    bypass_error: str | None = None
    formula_value: Fraction | None = None
    nested_chain: bool = False
    certified_chain: bool = False
    restricted_dual: DualVector | None = None
    dual_attains: bool = False
    complementary_slackness: bool = False
    tightness_pattern: bool = False
    pattern_dual: DualVector | None = None
    constructed_primal: EdgeVector | None = None
    constructed_feasible: bool = False
    constructed_value: Fraction | None = None

    @property
    def lp_value(self) -> Fraction:
        return self.lp.value

    @property
    def all_hypotheses(self) -> bool:
        return self.dual_attains and self.complementary_slackness and self.tightness_pattern

    @property
    def values_equal(self) -> bool:
        return self.formula_value is not None and self.formula_value == self.lp.value

    def to_json(self) -> dict:
        return {
            "chain": self.chain.to_json(),
            "nested_chain": self.nested_chain,
            "certified_chain": self.certified_chain,
            "bypasses": [None if b is None else b.to_json() for b in self.bypasses],
            "bypass_error": self.bypass_error,
            "formula_value": _fmt(self.formula_value),
            "lp_value": format_rational(self.lp.value),
            "values_equal": self.values_equal,
            "hypotheses": {
                "restricted_dual_attains_lp": self.dual_attains,
                "complementary_slackness": self.complementary_slackness,
                "tightness_pattern": self.tightness_pattern,
                "all": self.all_hypotheses,
            },
            "restricted_dual": None if self.restricted_dual is None else self.restricted_dual.to_json(),
            "pattern_dual": None if self.pattern_dual is None else self.pattern_dual.to_json(),
            "constructed_primal": {
                "feasible": self.constructed_feasible,
                "value": _fmt(self.constructed_value),
            },
        }


def _constructed_primal(instance, tour, bypasses) -> tuple[EdgeVector | None, bool]:
    n = instance.n
    x = [Fraction(v) for v in tour.indicator()]
    for b in bypasses:
        if b is None or b.delta <= 0:
            continue
        for e in (b.p, b.q):
            x[edge_index(n, *e)] += HALF
        for e in (b.a, b.b):
            x[edge_index(n, *e)] -= HALF
    if any(v < 0 for v in x):
        return None, False
    vec = EdgeVector(n, tuple(x))
    ok = all(vec.cut_value({v}) == 2 for v in range(n))
    ok = ok and all(val >= 2 for val in cut_values(vec).values())
    return vec, ok


def verify_lemma_conditions(
    instance: MetricInstance, tour: HamiltonianCycle, chain: CutFamily | Iterable[Iterable[int]]
) -> LemmaReport:
    """Check the dual hypotheses of the chain formula instead of assuming them.

    (a) the dual restricted to the chain cuts plus vertex multipliers reaches
    the LP value; (b) ``y_j > 0`` only on chain cuts tight at the LP vertex;
    (c) some such optimal dual has the per-cut tightness pattern: for
    ``Delta_j <= 0`` exactly ``a_j, b_j`` tight among the crossings, for
    ``Delta_j > 0`` both ``p_j, q_j`` tight and at least one of ``a_j, b_j``
    slack.  (c) is an existence question and is decided by an auxiliary LP.
    Because every optimal dual is complementary to every optimal primal, (b)
    does not depend on which optimal vertex the primal solve returned.
    """
    if not isinstance(chain, CutFamily):
        chain = CutFamily.of(chain)
    lp = solve_lp(instance, True)
    rep = LemmaReport(chain=chain, lp=lp)
    rep.nested_chain = chain.laminar and _is_chain(list(chain.cuts))
    rep.certified_chain = isinstance(verify_certificate(instance, tour, chain), MarginCertificate)
    try:
        rep.bypasses = _chain_bypasses(instance, tour, chain)
        rep.formula_value = lemma_lp_value(instance, tour, chain)
    except (NotIntervalCut, TooFewNonTourEdges) as exc:
        rep.bypass_error = str(exc)
        return rep

    support = list(chain.cuts)
    rep.restricted_dual = solve_dual(instance, support, True, primal_value=lp.value)
    rep.dual_attains = rep.restricted_dual.attains_primal

    loose = [s for s in support if lp.solution.cut_value(s) != 2]
    tight: set[Edge] = set()
    slack: set[Edge] = set()
    choices: list[tuple[Edge, Edge]] = []
    for s, b in zip(support, rep.bypasses):
        crossing = cut_edges(instance, s)
        if b is None or b.delta <= 0:
            ab = {e for e in crossing if e in tour.edges}
            tight |= ab
            slack |= crossing - ab
        else:
            tight |= {b.p, b.q}
            choices.append((b.a, b.b))
    found = None
    if not tight & slack:
        for pick in product(*choices) if choices else [()]:
            extra = set(pick)
            if extra & tight:
                continue
            found = find_patterned_dual(
                instance, support, lp.value, tight=tight, slack=slack | extra, zero_cuts=loose
            )
            if found is not None:
                break
    rep.pattern_dual = found
    rep.tightness_pattern = found is not None
    dual_for_cs = found if found is not None else rep.restricted_dual
    rep.complementary_slackness = rep.dual_attains and all(
        not dual_for_cs.y.get(s) or lp.solution.cut_value(s) == 2 for s in support
    )
    x, ok = _constructed_primal(instance, tour, rep.bypasses)
    rep.constructed_primal = x
    rep.constructed_feasible = ok
    rep.constructed_value = None if x is None else x.dot(instance)
    return rep


@dataclass
class GapResult:
    tsp_ip: Fraction
    tsp_lp: Fraction
    ecm_ip: Fraction
    ecm_lp: Fraction

    @property
    def tsp_gap(self) -> Fraction:
        return self.tsp_ip / self.tsp_lp

    @property
    def ecm_gap(self) -> Fraction:
        return self.ecm_ip / self.ecm_lp


def integrality_gap(instance: MetricInstance) -> GapResult:
    tsp = solve_tsp_ip(instance)
    ecm = solve_2ecm_ip(instance, upper_bound=tsp.value)
    lp_deg = solve_lp(instance, True).value
    lp_free = solve_lp(instance, False).value
    if lp_deg == 0 or lp_free == 0:
        raise ZeroLpValue("LP optimum is 0; the ratio is undefined")
    return GapResult(tsp.value, lp_deg, ecm.value, lp_free)


@dataclass
class TransferReport:
    ip_tsp: Fraction
    ip_2ecm: Fraction
    lp_value: Fraction
    lp_2ecm: Fraction
    unique_hamiltonian: bool
    tour: HamiltonianCycle | None
    hamiltonian_optimum_exists: bool
    tsp_unique: bool
    ecm_optima: int
    half_integral_checked: bool = False
    half_integral_witness: EdgeVector | None = None

    @property
    def values_coincide(self) -> bool:
        return self.ip_tsp == self.ip_2ecm

    @property
    def parsimonious(self) -> bool:
        return self.lp_value == self.lp_2ecm

    @property
    def gap(self) -> Fraction | None:
        return None if self.lp_value == 0 else self.ip_tsp / self.lp_value

    @property
    def gap_2ecm(self) -> Fraction | None:
        return None if self.lp_2ecm == 0 else self.ip_2ecm / self.lp_2ecm

    @property
    def four_thirds_applicable(self) -> bool:
        return self.unique_hamiltonian and self.half_integral_witness is not None

    @property
    def lp_strictly_below_ip(self) -> bool:
        return self.lp_value < self.ip_tsp

    @property
    def open_problem_candidate(self) -> bool:
        return self.four_thirds_applicable and self.lp_strictly_below_ip

    @property
    def contradiction(self) -> bool:
        """Preconditions of the 4/3 bound hold yet the exact gap exceeds 4/3."""
        return self.four_thirds_applicable and self.gap is not None and self.gap > FOUR_THIRDS

    def to_json(self) -> dict:
        return {
            "ip_tsp": format_rational(self.ip_tsp),
            "ip_2ecm": format_rational(self.ip_2ecm),
            "lp_value": format_rational(self.lp_value),
            "lp_2ecm_degree_free": format_rational(self.lp_2ecm),
            "unique_hamiltonian": self.unique_hamiltonian,
            "tour": None if self.tour is None else list(self.tour.order),
            "tsp_optimum_unique": self.tsp_unique,
            "ecm_optima": self.ecm_optima,
            "values_coincide": self.values_coincide,
            "hamiltonian_2ecm_optimum_exists": self.hamiltonian_optimum_exists,
            "remark_gap_bound_via_hamiltonian_optimum": self.hamiltonian_optimum_exists and self.values_coincide,
            "remark_lp_values_equal": self.parsimonious,
            "parsimonious": self.parsimonious,
            "gap": _fmt(self.gap),
            "gap_2ecm": _fmt(self.gap_2ecm),
            "half_integral_checked": self.half_integral_checked,
            "half_integral_reading": "any half-integral point on the optimal face",
            "half_integral_witness": None
            if self.half_integral_witness is None
            else self.half_integral_witness.to_json(),
            "four_thirds_applicable": self.four_thirds_applicable,
            "open_problem_candidate": self.open_problem_candidate,
            "contradiction": self.contradiction,
        }


def transfer_check(instance: MetricInstance, half_integral: bool = True) -> TransferReport:
    tsp = solve_tsp_ip(instance)
    ecm = solve_2ecm_ip(instance, upper_bound=tsp.value)
    lp_deg = solve_lp(instance, True).value
    lp_free = solve_lp(instance, False).value
    tours = [o.as_tour() for o in ecm.optima]
    tour = tours[0] if ecm.unique else None
    report = TransferReport(
        ip_tsp=tsp.value,
        ip_2ecm=ecm.value,
        lp_value=lp_deg,
        lp_2ecm=lp_free,
        unique_hamiltonian=tour is not None,
        tour=tour,
        hamiltonian_optimum_exists=any(t is not None for t in tours),
        tsp_unique=tsp.unique,
        ecm_optima=len(ecm.optima),
    )
    if half_integral and instance.n <= bounds().half_integral:
        report.half_integral_checked = True
        report.half_integral_witness = decide_half_integral_optimum(instance, lp_value=lp_deg)
    return report

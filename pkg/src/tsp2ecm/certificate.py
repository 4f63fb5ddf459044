"""Cut-margin certificates attached to a tour.

A certificate is a tour ``T`` and a laminar family of cuts such that every
non-tour edge crosses some family cut, and on each family cut every tour
crossing is strictly cheaper than every non-tour crossing.  The smallest such
gap ``eps`` is computed, never supplied; the certificate itself then survives
any metric perturbation of sup-norm strictly below ``eps / 2``.

A verified certificate does not by itself imply that ``T`` is optimal: tour
edges crossing no family cut are unconstrained.  ``tests/data`` holds frozen
counterexamples; uniqueness claims should go through :mod:`tsp2ecm.oracle`.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import NoNonTourCrossing, SegmentNotContiguous, SegmentsOverlap
from .instance import (
    Cut,
    Edge,
    MetricInstance,
    check_cut,
    cut_edges,
    edges,
    format_rational,
    linf_distance,
    parse_rational,
)
from .oracle import HamiltonianCycle


@dataclass(frozen=True)
class CutFamily:
    cuts: tuple[Cut, ...]
    laminar: bool

    @classmethod
    def of(cls, cuts: Iterable[Iterable[int]]) -> "CutFamily":
        cs = tuple(frozenset(c) for c in cuts)
        return cls(cs, not crossing_pairs(cs))

    def to_json(self) -> list[list[int]]:
        return [sorted(c) for c in self.cuts]


@dataclass
class Failure:
    condition: str  # "crossing_pair" | "uncovered_edge" | "nonpositive_margin" | ...
    witness: object
    detail: str = ""

    def to_json(self) -> dict:
        w = self.witness
        if isinstance(w, (frozenset, set)):
            w = sorted(w)
        elif isinstance(w, tuple) and w and isinstance(w[0], (frozenset, set)):
            w = [sorted(s) for s in w]
        elif isinstance(w, tuple):
            w = list(w)
        return {"condition": self.condition, "witness": w, "detail": self.detail}

    def __str__(self):
        return self.detail or f"{self.condition}: {self.witness}"


@dataclass
class CertificateReport:
    failures: list[Failure] = field(default_factory=list)
    epsilon: Fraction | None = None
    margins: dict[Cut, Fraction | None] = field(default_factory=dict)

    @property
    def status(self) -> str:
        return "Verified" if not self.failures else "Failed"

    @property
    def verified(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "epsilon": None if self.epsilon is None else format_rational(self.epsilon),
            "failures": [f.to_json() for f in self.failures],
            "margins": [
                [sorted(s), "inf" if m is None else format_rational(m)] for s, m in self.margins.items()
            ],
        }


@dataclass(frozen=True)
class MarginCertificate:
    """``epsilon=None`` stands for an infinite margin (every family cut vacuous)."""

    instance: MetricInstance
    tour: HamiltonianCycle
    family: CutFamily
    epsilon: Fraction | None

    @property
    def stability_radius(self) -> Fraction | None:
        return None if self.epsilon is None else self.epsilon / 2

    def to_json(self) -> dict:
        return {
            "tour": list(self.tour.order),
            "family": self.family.to_json(),
            "epsilon": "inf" if self.epsilon is None else format_rational(self.epsilon),
        }


def _cross(a: frozenset, b: frozenset) -> bool:
    return bool(a & b) and not (a <= b or b <= a)


def crossing_pairs(cuts: Sequence[frozenset]) -> list[tuple[frozenset, frozenset]]:
    out = []
    for i in range(len(cuts)):
        for j in range(i + 1, len(cuts)):
            if _cross(cuts[i], cuts[j]):
                out.append((cuts[i], cuts[j]))
    return out


def check_laminar(family: CutFamily | Iterable[Iterable[int]]) -> CertificateReport:
    cuts = family.cuts if isinstance(family, CutFamily) else tuple(frozenset(c) for c in family)
    rep = CertificateReport()
    for a, b in crossing_pairs(cuts):
        rep.failures.append(
            Failure("crossing_pair", (a, b), f"cuts {sorted(a)} and {sorted(b)} cross")
        )
    return rep


def uncovered_edges(n: int, tour: HamiltonianCycle, cuts: Iterable[frozenset]) -> list[Edge]:
    cuts = list(cuts)
    tour_edges = tour.edges
    out = []
    for u, v in edges(n):
        if (u, v) in tour_edges:
            continue
        if not any((u in s) != (v in s) for s in cuts):
            out.append((u, v))
    return out


def check_coverage(instance: MetricInstance, tour: HamiltonianCycle, family: CutFamily) -> CertificateReport:
    rep = CertificateReport()
    for e in uncovered_edges(instance.n, tour, family.cuts):
        rep.failures.append(
            Failure("uncovered_edge", e, f"non-tour edge {e[0]}-{e[1]} crosses no family cut")
        )
    return rep


def compute_margin(instance: MetricInstance, tour: HamiltonianCycle, cut: Iterable[int]) -> Fraction:
    """Cheapest non-tour crossing minus costliest tour crossing of ``delta(cut)``."""
    crossing = cut_edges(instance, cut)
    t = tour.edges
    tour_side = [instance.cost(*e) for e in crossing if e in t]
    other = [instance.cost(*e) for e in crossing if e not in t]
    if not other:
        raise NoNonTourCrossing(f"every edge of delta({sorted(cut)}) is a tour edge")
    return min(other) - max(tour_side)


def verify_certificate(
    instance: MetricInstance, tour: HamiltonianCycle, family: CutFamily | Iterable[Iterable[int]]
) -> MarginCertificate | CertificateReport:
    """Return a certificate on success, else the report listing every failure."""
    if not isinstance(family, CutFamily):
        family = CutFamily.of(family)
    if tour.n != instance.n:
        rep = CertificateReport()
        rep.failures.append(Failure("dimension", tour.n, f"tour on {tour.n} vertices, instance on {instance.n}"))
        return rep
    rep = check_laminar(family)
    for s in family.cuts:
        try:
            check_cut(instance.n, s)
        except ValueError as exc:
            rep.failures.append(Failure("invalid_cut", s, str(exc)))
    if rep.failures:
        return rep
    rep.failures += check_coverage(instance, tour, family).failures
    eps = None
    for s in family.cuts:
        try:
            margin = compute_margin(instance, tour, s)
        except NoNonTourCrossing:
            rep.margins[s] = None
            continue
        rep.margins[s] = margin
        if margin <= 0:
            rep.failures.append(
                Failure("nonpositive_margin", s, f"margin {margin} at cut {sorted(s)}")
            )
        if eps is None or margin < eps:
            eps = margin
    rep.epsilon = eps
    if rep.failures:
        return rep
    return MarginCertificate(instance, tour, CutFamily(family.cuts, True), eps)


def repair_coverage(n: int, tour: HamiltonianCycle, family: CutFamily) -> CutFamily:
    """Add singleton cuts until every non-tour edge is covered.

    A singleton is nested in or disjoint from every set, so laminarity is kept.
    """
    cuts = list(family.cuts)
    present = set(cuts)
    for u, v in uncovered_edges(n, tour, cuts):
        if any((u in s) != (v in s) for s in cuts):
            continue
        s = frozenset({u})
        if s not in present:
            cuts.append(s)
            present.add(s)
    return CutFamily(tuple(cuts), family.laminar)


def find_certificate(instance: MetricInstance, tour: HamiltonianCycle) -> MarginCertificate | None:
    """Some verified certificate for ``tour``, or None if no laminar family works.

    Only cuts with positive margin can appear.  Margins and coverage do not
    depend on which side of a cut is listed, so sides avoiding vertex 0 are
    used; two such sides are cross-free exactly when they are laminar.  The
    search assigns each non-tour edge a covering cut compatible with the
    cuts already chosen.
    """
    from .instance import all_cuts

    n = instance.n
    good = []
    for s in all_cuts(n):
        try:
            if compute_margin(instance, tour, s) > 0:
                good.append(s)
        except NoNonTourCrossing:
            good.append(s)
    todo = uncovered_edges(n, tour, [])
    covers = {e: [s for s in good if (e[0] in s) != (e[1] in s)] for e in todo}
    if any(not c for c in covers.values()):
        return None
    todo.sort(key=lambda e: len(covers[e]))
    chosen: list[frozenset] = []

    def ok(s):
        return all(not _cross(s, t) for t in chosen)

    def search(i):
        while i < len(todo) and any((todo[i][0] in t) != (todo[i][1] in t) for t in chosen):
            i += 1
        if i == len(todo):
            return True
        for s in covers[todo[i]]:
            if ok(s):
                chosen.append(s)
                if search(i + 1):
                    return True
                chosen.pop()
        return False

    if not search(0):
        return None
    result = verify_certificate(instance, tour, chosen)
    return result if isinstance(result, MarginCertificate) else None


def _is_tour_interval(tour: HamiltonianCycle, seg: frozenset) -> bool:
    o = tour.order
    n = len(o)
    if not seg or len(seg) >= n:
        return False
    changes = sum(1 for i in range(n) if (o[i] in seg) != (o[(i + 1) % n] in seg))
    return changes == 2


def interval_chain(
    tour: HamiltonianCycle, segments: Sequence[Iterable[int]], root: int | None = None
) -> CutFamily:
    """Prefix chain ``P_j = S_1 u ... u S_j`` of disjoint tour segments.

    Segments are ordered along the tour starting from ``root`` (default: the
    tour's first vertex), by the position of each segment's first vertex.
    """
    segs = [frozenset(s) for s in segments]
    used: set[int] = set()
    for i, s in enumerate(segs):
        if used & s:
            raise SegmentsOverlap(f"segment {i} {sorted(s)} overlaps an earlier segment")
        used |= s
        if not _is_tour_interval(tour, s):
            raise SegmentNotContiguous(i)
    o = tour.order
    if root is None:
        root = o[0]
    start = o.index(root)
    rotated = o[start:] + o[:start]
    pos = {v: i for i, v in enumerate(rotated)}
    n = len(o)

    def first_position(s):
        # the member whose tour predecessor lies outside the segment
        for v in s:
            if rotated[(pos[v] - 1) % n] not in s:
                return pos[v]
        return 0

    segs.sort(key=first_position)
    chain = []
    acc: frozenset = frozenset()
    for s in segs:
        acc = acc | s
        chain.append(check_cut(n, acc))
    return CutFamily(tuple(chain), True)


def stability_check(certificate: MarginCertificate, perturbed: MetricInstance) -> bool:
    """True iff the perturbation is strictly inside the stability radius.

    In that case the certificate is re-verified on ``perturbed`` and its margin
    must be at least ``eps - 2 * distance``.
    """
    dist = linf_distance(certificate.instance, perturbed)
    radius = certificate.stability_radius
    if radius is not None and not dist < radius:
        return False
    again = verify_certificate(perturbed, certificate.tour, certificate.family)
    if not isinstance(again, MarginCertificate):
        raise RuntimeError(f"certificate lost inside its stability radius: {again.failures}")
    if certificate.epsilon is not None and again.epsilon < certificate.epsilon - 2 * dist:
        raise RuntimeError("perturbed margin below eps - 2 * distance")
    return True


# -- certificate files ------------------------------------------------------


def certificate_to_bytes(cert: MarginCertificate) -> bytes:
    return (json.dumps(cert.to_json()) + "\n").encode("utf-8")


def load_certificate(instance: MetricInstance, data: bytes | str | dict) -> MarginCertificate | CertificateReport:
    """Parse a certificate file and re-verify it against ``instance``."""
    obj = data if isinstance(data, dict) else json.loads(data)
    try:
        tour = HamiltonianCycle(tuple(int(v) for v in obj["tour"]))
        family = CutFamily.of(obj["family"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed certificate: {exc}") from None
    result = verify_certificate(instance, tour, family)
    claimed = obj.get("epsilon")
    if claimed is not None and isinstance(result, MarginCertificate):
        eps = None if claimed == "inf" else parse_rational(claimed)
        if eps != result.epsilon:
            rep = CertificateReport(epsilon=result.epsilon)
            rep.failures.append(
                Failure("epsilon_mismatch", claimed, f"file claims eps={claimed}, recomputed {result.epsilon}")
            )
            return rep
    return result

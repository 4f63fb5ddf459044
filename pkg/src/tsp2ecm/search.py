"""Instance generators and the witness-search pipeline.

A witness is a metric instance whose 2ECM-IP optimum is a unique Hamiltonian
cycle and whose TSP-LP optimum is attained by a half-integral point strictly
below the integer optimum.  Each candidate runs through the cheap checks
first and stops at the first failing stage.
"""
from __future__ import annotations

import hashlib
import json
import logging
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterator

from .certificate import (
    find_certificate,
    MarginCertificate,
    interval_chain,
    repair_coverage,
    verify_certificate,
)
from .config import bounds
from .errors import BadDimension, ExhaustedResampling, Tsp2ecmError
from .instance import (
    MetricInstance,
    edges,
    is_metric,
    linf_distance,
    metric_completion,
    new_metric,
    serialize_instance,
)
from .gap import FOUR_THIRDS, TransferReport
from .lp import decide_half_integral_optimum, solve_lp
from .oracle import HamiltonianCycle, solve_2ecm_ip, solve_tsp_ip

log = logging.getLogger(__name__)

NOT_UNIQUE_HAMILTONIAN = "NotUniqueHamiltonian"
LP_TIGHT_AT_IP = "LpTightAtIp"
NOT_HALF_INTEGRAL = "NotHalfIntegral"
WITNESS = "WITNESS"
ERROR = "Error"
STAGES = (NOT_UNIQUE_HAMILTONIAN, LP_TIGHT_AT_IP, NOT_HALF_INTEGRAL, WITNESS)

GENERATORS = ("RandomMetric", "GraphCompletion", "CertifiedPerturbation")


def derive_seed(seed: int, index: int) -> int:
    """Per-instance seed: a fixed hash of ``(seed, index)``, 64 bits."""
    digest = hashlib.sha256(f"{seed}:{index}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def _rng(tag: str, *parts) -> random.Random:
    return random.Random(":".join([tag, *map(str, parts)]))


def _rand_rational(rng: random.Random, lo: int, hi: int, den: int) -> Fraction:
    return Fraction(rng.randint(lo * den, hi * den), den)


# -- generators -------------------------------------------------------------


def generate_random_metric(n: int, seed: int, denominator_bound: int = 4) -> MetricInstance:
    """Random costs in ``[1, 10]`` with denominator ``denominator_bound``, then
    shortest-path completion."""
    if n < 3:
        raise BadDimension(f"need n >= 3, got {n}")
    rng = _rng("random-metric", n, seed, denominator_bound)
    weights = {e: _rand_rational(rng, 1, 10, denominator_bound) for e in edges(n)}
    return metric_completion(n, weights)


def _theta_edges(path_lengths):
    ws, nxt = [], 2
    for k in path_lengths:
        prev = 0
        for _ in range(k - 1):
            ws.append((prev, nxt))
            prev, nxt = nxt, nxt + 1
        ws.append((prev, 1))
    return nxt, ws


def graph_edges(spec: dict) -> tuple[int, list[tuple[int, int]]]:
    """Vertex count and edge list of a named sparse graph.

    ``{"family": "cycle", "n": 6}``; ``{"family": "theta", "path_lengths": [2, 2, 2]}``
    (two hubs joined by internally disjoint paths with that many edges);
    ``{"family": "prism", "k": 3}`` (two k-cycles joined by a perfect matching);
    ``{"family": "cycle_chords", "n": 7, "chords": 2}`` (random chords).
    """
    fam = spec.get("family")
    if fam == "cycle":
        n = int(spec["n"])
        return n, [(i, (i + 1) % n) for i in range(n)]
    if fam == "theta":
        return _theta_edges([int(k) for k in spec.get("path_lengths", [2, 2, 2])])
    if fam == "prism":
        k = int(spec.get("k", 3))
        es = [(i, (i + 1) % k) for i in range(k)]
        es += [(k + i, k + (i + 1) % k) for i in range(k)]
        es += [(i, k + i) for i in range(k)]
        return 2 * k, es
    if fam == "cycle_chords":
        n = int(spec["n"])
        es = [(i, (i + 1) % n) for i in range(n)]
        rng = _rng("chords", n, spec.get("chords", 1), spec.get("seed", 0))
        pool = [e for e in edges(n) if e not in {tuple(sorted(x)) for x in es}]
        rng.shuffle(pool)
        es += pool[: int(spec.get("chords", 1))]
        return n, es
    raise ValueError(f"unknown graph family {fam!r}")


def generate_graph_completion(graph_spec: dict, seed: int = 0) -> MetricInstance:
    """Metric completion of a named sparse graph.

    ``graph_spec["weights"]`` is ``"unit"`` (default) or ``"random"``, the latter
    drawing weights in ``[1, 3]`` with denominator ``graph_spec["denominator"]``.
    """
    spec = dict(graph_spec)
    spec.setdefault("seed", seed)
    n, es = graph_edges(spec)
    if spec.get("weights", "unit") == "unit":
        weights = {e: 1 for e in es}
    else:
        rng = _rng("graph-weights", json.dumps(spec, sort_keys=True), seed)
        den = int(spec.get("denominator", 4))
        weights = {e: _rand_rational(rng, 1, 3, den) for e in es}
    return metric_completion(n, weights)


def _random_segments(rng, tour: HamiltonianCycle) -> list[list[int]]:
    # runs over tour positions 1..n-1 so the union never contains the root
    order = tour.order
    segs, run = [], []
    for v in order[1:]:
        if rng.random() < 0.6:
            run.append(v)
            if rng.random() < 0.35:
                segs.append(run)
                run = []
        elif run:
            segs.append(run)
            run = []
    if run:
        segs.append(run)
    if not segs:
        segs = [[order[1]]]
    return segs


def generate_certified(
    n: int, seed: int, denominator_bound: int = 4, max_attempts: int = 200
) -> tuple[MetricInstance, MarginCertificate]:
    """An instance carrying a verified cut-margin certificate.

    Draws a random tour and prefix chain of random tour segments, adds singleton
    cuts until every non-tour edge is covered, prices tour edges in ``[1, 2]``
    and each non-tour edge above the costliest tour edge on the family cuts it
    crosses, repairs the triangle inequality by shortest paths and keeps the
    draw if the certificate verifies.
    """
    rng = _rng("certified", n, seed, denominator_bound)
    den = denominator_bound
    for _ in range(max_attempts):
        perm = list(range(n))
        rng.shuffle(perm)
        tour = HamiltonianCycle(tuple(perm))
        chain = interval_chain(tour, _random_segments(rng, tour))
        family = repair_coverage(n, tour, chain)
        cost = {e: _rand_rational(rng, 1, 2, den) for e in tour.edges}
        for e in edges(n):
            if e in cost:
                continue
            floor = Fraction(0)
            for s in family.cuts:
                if (e[0] in s) != (e[1] in s):
                    top = max(cost[t] for t in tour.edges if (t[0] in s) != (t[1] in s))
                    floor = max(floor, top)
            cost[e] = floor + Fraction(rng.randint(1, den), den)
        inst = metric_completion(n, cost)
        cert = verify_certificate(inst, tour, family)
        if isinstance(cert, MarginCertificate):
            return inst, cert
    raise ExhaustedResampling(f"no certified instance after {max_attempts} draws (n={n}, seed={seed})")


def admissible_perturbation(certificate: MarginCertificate, candidate: MetricInstance) -> bool:
    radius = certificate.stability_radius
    if radius is None:
        return True
    return linf_distance(certificate.instance, candidate) < radius


def perturb_certified(
    instance: MetricInstance,
    certificate: MarginCertificate,
    seed: int,
    magnitude: Fraction | None = None,
    levels: int = 8,
    max_attempts: int = 200,
) -> MetricInstance:
    """A metric ``c'`` with ``|c - c'|_inf < eps / 2``.

    Each attempt adds independent per-edge noise ``magnitude * j / levels`` with
    ``|j| < levels``; non-metric or out-of-radius draws are resampled.  After
    half the attempts, draws switch to blending ``c`` with a random metric,
    which always stays metric.
    """
    radius = certificate.stability_radius
    if magnitude is None:
        magnitude = radius if radius is not None else Fraction(1)
    if magnitude == 0:
        return instance
    rng = _rng("perturb", seed, magnitude)
    n = instance.n
    for attempt in range(max_attempts):
        if attempt < max_attempts // 2:
            vals = [
                c + magnitude * Fraction(rng.randint(-(levels - 1), levels - 1), levels)
                for c in instance.costs
            ]
        else:
            other = generate_random_metric(n, rng.getrandbits(32), 4)
            spread = max(abs(a - b) for a, b in zip(other.costs, instance.costs))
            if spread == 0:
                continue
            s = magnitude * Fraction(rng.randint(1, levels - 1), levels) / spread
            vals = [(1 - s) * a + s * b for a, b in zip(instance.costs, other.costs)]
        if not is_metric(n, vals):
            continue
        cand = new_metric(n, vals)
        if admissible_perturbation(certificate, cand):
            return cand
    raise ExhaustedResampling(f"no admissible metric perturbation after {max_attempts} attempts")


# -- filter pipeline --------------------------------------------------------


def instance_digest(instance: MetricInstance) -> str:
    return hashlib.sha256(serialize_instance(instance)).hexdigest()[:16]


@dataclass
class FilterOutcome:
    instance_digest: str
    stage_reached: str
    transfer: TransferReport | None
    instance: MetricInstance | None = None
    index: int | None = None
    error: str | None = None
    certificate: MarginCertificate | None = None

    @property
    def contradiction(self) -> bool:
        return self.transfer is not None and self.stage_reached == WITNESS and self.transfer.contradiction

    def to_json(self) -> dict:
        out = {
            "index": self.index,
            "digest": self.instance_digest,
            "stage": self.stage_reached,
            "transfer": None if self.transfer is None else self.transfer.to_json(),
        }
        if self.error is not None:
            out["error"] = self.error
        if self.stage_reached == WITNESS and self.instance is not None:
            out["instance"] = serialize_instance(self.instance).decode()
            out["contradiction"] = self.contradiction
            out["certifiable"] = self.certificate is not None
            out["certificate"] = None if self.certificate is None else self.certificate.to_json()
        return out


def open_problem_filter(instance: MetricInstance) -> FilterOutcome:
    tsp = solve_tsp_ip(instance)
    ecm = solve_2ecm_ip(instance, upper_bound=tsp.value)
    tours = [o.as_tour() for o in ecm.optima]
    tour = tours[0] if ecm.unique else None
    lp = solve_lp(instance, True).value
    report = TransferReport(
        ip_tsp=tsp.value,
        ip_2ecm=ecm.value,
        lp_value=lp,
        lp_2ecm=solve_lp(instance, False).value,
        unique_hamiltonian=tour is not None,
        tour=tour,
        hamiltonian_optimum_exists=any(t is not None for t in tours),
        tsp_unique=tsp.unique,
        ecm_optima=len(ecm.optima),
    )
    digest = instance_digest(instance)
    if tour is None:
        stage = NOT_UNIQUE_HAMILTONIAN
    elif not lp < tsp.value:
        stage = LP_TIGHT_AT_IP
    else:
        report.half_integral_checked = True
        report.half_integral_witness = decide_half_integral_optimum(instance, lp_value=lp)
        stage = WITNESS if report.half_integral_witness is not None else NOT_HALF_INTEGRAL
    out = FilterOutcome(digest, stage, report, instance)
    if stage == WITNESS:
        # the stage ignores certifiability; record it for the cut-margin reading
        out.certificate = find_certificate(instance, tour)
    return out


# -- search harness ---------------------------------------------------------


@dataclass
class SearchConfig:
    seed: int = 0
    n_range: tuple[int, int] = (6, 6)
    generator: str = "RandomMetric"
    count: int = 100
    cost_denominator_bound: int = 4

    def __post_init__(self):
        self.n_range = tuple(int(v) for v in self.n_range)
        lo, hi = self.n_range
        b = bounds()
        limit = min(b.ecm_ip, b.tsp_ip, b.lp)
        if not (4 <= lo <= hi <= limit):
            raise ValueError(f"n_range {self.n_range} must satisfy 4 <= lo <= hi <= {limit}")
        if self.generator not in GENERATORS:
            raise ValueError(f"generator must be one of {GENERATORS}, got {self.generator!r}")
        if self.count < 0:
            raise ValueError("count must be >= 0")
        if self.cost_denominator_bound < 1:
            raise ValueError("cost_denominator_bound must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @classmethod
    def from_dict(cls, obj: dict) -> "SearchConfig":
        known = {k: obj[k] for k in ("seed", "n_range", "generator", "count", "cost_denominator_bound") if k in obj}
        return cls(**known)

    def to_json(self) -> dict:
        d = asdict(self)
        d["n_range"] = list(self.n_range)
        return d


def make_instance(config: SearchConfig, index: int) -> MetricInstance:
    s = derive_seed(config.seed, index)
    rng = _rng("pick", s)
    lo, hi = config.n_range
    n = rng.randint(lo, hi)
    den = config.cost_denominator_bound
    if config.generator == "RandomMetric":
        return generate_random_metric(n, s, den)
    if config.generator == "GraphCompletion":
        chords = rng.randint(1, max(1, n - 2))
        return generate_graph_completion(
            {"family": "cycle_chords", "n": n, "chords": chords, "weights": "random", "denominator": den}, s
        )
    inst, cert = generate_certified(n, s, den)
    return perturb_certified(inst, cert, s)


def _evaluate(args) -> FilterOutcome:
    config, index = args
    digest = None
    try:
        inst = make_instance(config, index)
        digest = instance_digest(inst)
        out = open_problem_filter(inst)
    except (Tsp2ecmError, ValueError) as exc:
        out = FilterOutcome(digest or "", ERROR, None, error=f"{type(exc).__name__}: {exc}")
    out.index = index
    return out


@dataclass
class SearchSummary:
    config: SearchConfig
    stages: dict[str, int] = field(default_factory=lambda: {s: 0 for s in STAGES})
    errors: int = 0
    witnesses: list[str] = field(default_factory=list)
    certified_witnesses: list[str] = field(default_factory=list)
    contradictions: list[str] = field(default_factory=list)

    def add(self, out: FilterOutcome) -> None:
        if out.stage_reached == ERROR:
            self.errors += 1
            return
        self.stages[out.stage_reached] += 1
        if out.stage_reached == WITNESS:
            self.witnesses.append(out.instance_digest)
            if out.certificate is not None:
                self.certified_witnesses.append(out.instance_digest)
            if out.contradiction:
                self.contradictions.append(out.instance_digest)

    def merge(self, other: "SearchSummary") -> "SearchSummary":
        merged = SearchSummary(self.config)
        for s in STAGES:
            merged.stages[s] = self.stages[s] + other.stages[s]
        merged.errors = self.errors + other.errors
        merged.witnesses = self.witnesses + other.witnesses
        merged.certified_witnesses = self.certified_witnesses + other.certified_witnesses
        merged.contradictions = self.contradictions + other.contradictions
        return merged

    def to_json(self) -> dict:
        return {
            "config": self.config.to_json(),
            "count": sum(self.stages.values()) + self.errors,
            "stages": dict(self.stages),
            "errors": self.errors,
            "witnesses": list(self.witnesses),
            "certified_witnesses": list(self.certified_witnesses),
            "contradictions": list(self.contradictions),
        }

    def to_bytes(self) -> bytes:
        return (json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n").encode()


def witness_record(out: FilterOutcome) -> dict:
    """Everything needed to re-check a witness from scratch."""
    inst = out.instance
    tour = out.transfer.tour
    return {
        "digest": out.instance_digest,
        "instance": serialize_instance(inst).decode(),
        "tour": list(tour.order),
        "certificate": None if out.certificate is None else out.certificate.to_json(),
        "outcome": out.to_json(),
    }


def reverify_witness(record: dict) -> FilterOutcome:
    from .instance import parse_instance

    return open_problem_filter(parse_instance(record["instance"]))


def iter_outcomes(config: SearchConfig, workers: int = 1) -> Iterator[FilterOutcome]:
    """Outcomes in index order regardless of worker count."""
    jobs = ((config, i) for i in range(config.count))
    if workers <= 1:
        for job in jobs:
            yield _evaluate(job)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(_evaluate, jobs, chunksize=4)


def search_run(
    config: SearchConfig,
    outcomes_path: str | Path | None = None,
    summary_path: str | Path | None = None,
    witness_dir: str | Path | None = None,
    workers: int = 1,
) -> SearchSummary:
    """Run the pipeline; write JSON lines, witnesses as found, and the summary."""
    summary = SearchSummary(config)
    sink = open(outcomes_path, "w", encoding="utf-8") if outcomes_path else None
    try:
        for out in iter_outcomes(config, workers):
            summary.add(out)
            if sink:
                sink.write(json.dumps(out.to_json(), sort_keys=True) + "\n")
                sink.flush()
            if out.stage_reached == WITNESS:
                log.warning("WITNESS found: %s (index %s)", out.instance_digest, out.index)
                if witness_dir is not None:
                    wdir = Path(witness_dir)
                    wdir.mkdir(parents=True, exist_ok=True)
                    path = wdir / f"witness-{out.instance_digest}.json"
                    path.write_text(json.dumps(witness_record(out), indent=2, sort_keys=True) + "\n")
                again = reverify_witness({"instance": serialize_instance(out.instance).decode()})
                if again.stage_reached != WITNESS:
                    raise RuntimeError(f"witness {out.instance_digest} did not reproduce")
                if out.contradiction:
                    log.error("CONTRADICTION: witness %s has gap %s > %s", out.instance_digest, out.transfer.gap, FOUR_THIRDS)
    finally:
        if sink:
            sink.close()
    if summary_path:
        Path(summary_path).write_bytes(summary.to_bytes())
    return summary

"""Command-line front end: ``tsp2ecm {solve,certify,gap,search}``.

Exit codes: 0 success / verified, 1 verification failed, 2 input error,
3 instance exceeds a solver size bound.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from decimal import Decimal, localcontext
from fractions import Fraction
from pathlib import Path

from .certificate import (
    CutFamily,
    MarginCertificate,
    interval_chain,
    load_certificate,
    repair_coverage,
    verify_certificate,
)
from .errors import InstanceError, SegmentNotContiguous, SegmentsOverlap, TooLarge, Tsp2ecmError
from .gap import transfer_check, verify_lemma_conditions
from .instance import MetricInstance, format_rational, parse_instance
from .lp import solve_lp
from .oracle import HamiltonianCycle, solve_2ecm_ip, solve_tsp_ip
from .search import SearchConfig, WITNESS, search_run

EXIT_OK, EXIT_FAILED, EXIT_INPUT, EXIT_TOO_LARGE = 0, 1, 2, 3


class InputError(Exception):
    pass


def approx(x: Fraction | None) -> str:
    """``p/q (≈ d)`` for display; the decimal is rendered exactly from p/q."""
    if x is None:
        return "inf"
    with localcontext() as ctx:
        ctx.prec = 12
        d = Decimal(x.numerator) / Decimal(x.denominator)
    return f"{format_rational(x)} (≈ {d:.6g})"


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def _load_instance(path: str) -> MetricInstance:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read instance {path}: {exc.strerror}") from None
    return parse_instance(data)


def parse_segments(spec: str) -> list[list[int]]:
    """``"1,2;4"`` -> ``[[1, 2], [4]]``."""
    try:
        segs = [[int(v) for v in part.split(",") if v.strip()] for part in spec.split(";") if part.strip()]
    except ValueError:
        raise InputError(f"bad segment list {spec!r}; expected e.g. '1,2;4'") from None
    if not segs or any(not s for s in segs):
        raise InputError(f"bad segment list {spec!r}; expected e.g. '1,2;4'")
    return segs


def _tour(arg: str | None, inst: MetricInstance) -> HamiltonianCycle:
    if arg is None:
        return solve_tsp_ip(inst).optima[0]
    try:
        order = tuple(int(v) for v in arg.split(","))
        tour = HamiltonianCycle(order)
    except ValueError as exc:
        raise InputError(f"bad tour {arg!r}: {exc}") from None
    if tour.n != inst.n:
        raise InputError(f"tour has {tour.n} vertices, instance has {inst.n}")
    return tour


# -- solve ------------------------------------------------------------------


def cmd_solve(args) -> int:
    inst = _load_instance(args.instance)
    if args.problem in ("tsp-ip", "2ecm-ip"):
        res = solve_tsp_ip(inst) if args.problem == "tsp-ip" else solve_2ecm_ip(inst)
        if args.problem == "tsp-ip":
            sols = [list(t.order) for t in res.optima]
        else:
            sols = [{f"{u}-{v}": k for (u, v), k in o.support().items()} for o in res.optima]
        if args.json:
            print(_dump({"problem": args.problem, "value": format_rational(res.value), "unique": res.unique, "optima": sols}))
        else:
            print(f"problem: {args.problem}")
            print(f"value:   {approx(res.value)}")
            print(f"unique:  {res.unique} ({len(res.optima)} optimal solution(s))")
            for s in sols:
                print(f"  {s}")
        return EXIT_OK
    res = solve_lp(inst, degree_constrained=args.problem == "lp")
    if args.json:
        out = res.to_json()
        out["problem"] = args.problem
        print(_dump(out))
    else:
        print(f"problem: {args.problem}")
        print(f"value:   {approx(res.value)}")
        for (u, v), x in res.solution.support().items():
            print(f"  x[{u}-{v}] = {format_rational(x)}")
        print(f"active cuts: {[sorted(s) for s in res.active_cuts]}")
    return EXIT_OK


# -- certify ----------------------------------------------------------------


def _render_certificate(result, as_json: bool) -> int:
    if isinstance(result, MarginCertificate):
        if as_json:
            out = result.to_json()
            out["status"] = "Verified"
            out["stability_radius"] = "inf" if result.stability_radius is None else format_rational(result.stability_radius)
            print(_dump(out))
        else:
            print("status: Verified")
            print(f"tour: {list(result.tour.order)}")
            print(f"family: {result.family.to_json()}")
            print(f"epsilon: {approx(result.epsilon)}")
            print(f"stability radius: {approx(result.stability_radius)}")
        return EXIT_OK
    if as_json:
        print(_dump(result.to_json()))
    else:
        print("status: Failed")
        for f in result.failures:
            print(f"  {f}")
    return EXIT_FAILED


def cmd_certify(args) -> int:
    inst = _load_instance(args.instance)
    if args.certificate:
        if args.interval_chain or args.family:
            raise InputError("give either a certificate file or --interval-chain/--family, not both")
        try:
            data = Path(args.certificate).read_text(encoding="utf-8")
            result = load_certificate(inst, data)
        except OSError as exc:
            raise InputError(f"cannot read certificate {args.certificate}: {exc.strerror}") from None
        except (ValueError, json.JSONDecodeError) as exc:
            raise InputError(f"malformed certificate: {exc}") from None
        return _render_certificate(result, args.json)
    if not args.interval_chain and not args.family:
        raise InputError("give a certificate file, --family or --interval-chain")
    tour = _tour(args.tour, inst)
    if args.family:
        family = CutFamily.of(parse_segments(args.family))
    else:
        try:
            family = interval_chain(tour, parse_segments(args.interval_chain), args.root)
        except (SegmentsOverlap, SegmentNotContiguous) as exc:
            raise InputError(str(exc)) from None
    if args.repair_coverage:
        family = repair_coverage(inst.n, tour, family)
    return _render_certificate(verify_certificate(inst, tour, family), args.json)


# -- gap --------------------------------------------------------------------


def cmd_gap(args) -> int:
    inst = _load_instance(args.instance)
    report = transfer_check(inst)
    out = {"transfer": report.to_json()}
    lemma = None
    if args.chain:
        tour = _tour(args.tour, inst) if args.tour else (report.tour or solve_tsp_ip(inst).optima[0])
        try:
            chain = interval_chain(tour, parse_segments(args.chain), args.root)
        except (SegmentsOverlap, SegmentNotContiguous) as exc:
            raise InputError(str(exc)) from None
        lemma = verify_lemma_conditions(inst, tour, chain)
        out["lemma"] = lemma.to_json()
        out["lemma"]["tour"] = list(tour.order)
    if args.json:
        print(_dump(out))
        return EXIT_OK
    rows = [
        ("OPT TSP-IP", approx(report.ip_tsp)),
        ("OPT 2ECM-IP", approx(report.ip_2ecm)),
        ("OPT TSP-LP", approx(report.lp_value)),
        ("OPT 2ECM-LP (no degree eqs)", approx(report.lp_2ecm)),
        ("integrality gap", approx(report.gap)),
        ("unique Hamiltonian 2ECM optimum", str(report.unique_hamiltonian)),
        ("IP values coincide", str(report.values_coincide)),
        ("parsimonious (LP values equal)", str(report.parsimonious)),
        ("half-integral LP optimum", str(report.half_integral_witness is not None) if report.half_integral_checked else "not checked"),
        ("4/3 preconditions hold", str(report.four_thirds_applicable)),
        ("open-problem candidate", str(report.open_problem_candidate)),
    ]
    width = max(len(k) for k, _ in rows)
    for k, v in rows:
        print(f"{k:<{width}}  {v}")
    if lemma is not None:
        print()
        print(f"chain {lemma.chain.to_json()} on tour {list(tour.order)}")
        if lemma.bypass_error:
            print(f"  bypass undefined: {lemma.bypass_error}")
        for j, b in enumerate(lemma.bypasses, start=1):
            if b is None:
                print(f"  Delta_{j}: no non-tour crossing")
            else:
                print(f"  Delta_{j} = {format_rational(b.delta)}  (a={b.a}, b={b.b}, p={b.p}, q={b.q})")
        print(f"  formula value: {approx(lemma.formula_value)}")
        print(f"  LP value:      {approx(lemma.lp_value)}")
        print(f"  hypotheses: dual on chain reaches LP={lemma.dual_attains}, "
              f"complementary slackness={lemma.complementary_slackness}, "
              f"tightness pattern={lemma.tightness_pattern}")
        if lemma.values_equal and lemma.formula_value == report.ip_tsp:
            print("  LP tight")
        elif lemma.all_hypotheses:
            print(f"  formula matches LP: {lemma.values_equal}")
        else:
            print("  hypotheses not all met; formula value not asserted")
    return EXIT_OK


# -- search -----------------------------------------------------------------


def cmd_search(args) -> int:
    if args.config:
        try:
            obj = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config {args.config}: {exc}") from None
    else:
        obj = {}
    for key, val in (
        ("seed", args.seed),
        ("count", args.count),
        ("generator", args.generator),
        ("cost_denominator_bound", args.denominator),
    ):
        if val is not None:
            obj[key] = val
    if args.n is not None:
        obj["n_range"] = [args.n, args.n]
    if args.n_range is not None:
        obj["n_range"] = args.n_range
    try:
        config = SearchConfig.from_dict(obj)
    except (ValueError, TypeError) as exc:
        raise InputError(f"invalid search config: {exc}") from None
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outcomes = Path(args.outcomes) if args.outcomes else out_dir / "outcomes.jsonl"
    summary_path = Path(args.summary) if args.summary else out_dir / "summary.json"
    summary = search_run(config, outcomes, summary_path, out_dir / "witnesses", workers=args.workers)
    if summary.stages[WITNESS]:
        print("=" * 60)
        print(f"WITNESS FOUND: {summary.witnesses}")
        print(f"with a cut-margin certificate: {summary.certified_witnesses}")
        print("=" * 60)
    print(summary.to_bytes().decode(), end="")
    print(f"outcomes: {outcomes}")
    print(f"summary:  {summary_path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tsp2ecm", description="Exact TSP / 2ECM integer and LP laboratory.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve an IP or LP exactly")
    s.add_argument("instance")
    s.add_argument("--problem", choices=["tsp-ip", "2ecm-ip", "lp", "2ecm-lp-nodeg"], default="tsp-ip")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("certify", help="verify a cut-margin certificate")
    c.add_argument("instance")
    c.add_argument("certificate", nargs="?", help="certificate JSON file")
    g = c.add_mutually_exclusive_group()
    g.add_argument("--interval-chain", help="tour segments, e.g. '1,2;4'")
    g.add_argument("--family", help="explicit cut family, e.g. '0;1,2'")
    c.add_argument("--tour", help="tour as comma-separated order (default: an optimal tour)")
    c.add_argument("--root", type=int, default=None)
    c.add_argument("--repair-coverage", action="store_true", help="add singleton cuts for uncovered edges")
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_certify)

    q = sub.add_parser("gap", help="integrality gap and transfer report")
    q.add_argument("instance")
    q.add_argument("--chain", help="tour segments for the chain formula, e.g. '0,1'")
    q.add_argument("--tour")
    q.add_argument("--root", type=int, default=None)
    q.add_argument("--json", action="store_true")
    q.set_defaults(func=cmd_gap)

    r = sub.add_parser("search", help="search for open-problem witnesses")
    r.add_argument("--config", help="JSON file with SearchConfig fields")
    r.add_argument("--seed", type=int)
    r.add_argument("--count", type=int)
    r.add_argument("--n", type=int)
    r.add_argument("--n-range", type=int, nargs=2, metavar=("LO", "HI"))
    r.add_argument("--generator", choices=["RandomMetric", "GraphCompletion", "CertifiedPerturbation"])
    r.add_argument("--denominator", type=int)
    r.add_argument("--workers", type=int, default=1)
    r.add_argument("--out-dir", default="search-out")
    r.add_argument("--outcomes")
    r.add_argument("--summary")
    r.set_defaults(func=cmd_search)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except TooLarge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TOO_LARGE
    except (InputError, InstanceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Tsp2ecmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

"""Exact laboratory for metric TSP versus 2-edge-connected multigraphs.

Exact rational IP oracles, a cutting-plane subtour LP, cut-margin
certificates, closed-form LP values on nested chains, and a seeded search
for instances with a unique Hamiltonian 2ECM optimum and a loose LP.
"""
from .certificate import (
    CertificateReport,
    CutFamily,
    MarginCertificate,
    check_coverage,
    check_laminar,
    compute_margin,
    find_certificate,
    interval_chain,
    repair_coverage,
    stability_check,
    verify_certificate,
)
from .gap import (
    bypass_advantage,
    integrality_gap,
    lemma_lp_value,
    transfer_check,
    verify_lemma_conditions,
)
from .instance import EdgeVector, MetricInstance, metric_completion, new_metric, parse_instance, serialize_instance
from .lp import solve_dual, solve_lp
from .oracle import HamiltonianCycle, Multisubgraph, solve_2ecm_ip, solve_tsp_ip
from .search import SearchConfig, open_problem_filter, search_run

__all__ = [
    "CertificateReport", "CutFamily", "EdgeVector", "HamiltonianCycle", "MarginCertificate",
    "MetricInstance", "Multisubgraph", "SearchConfig", "bypass_advantage", "check_coverage",
    "check_laminar", "compute_margin", "find_certificate", "integrality_gap", "interval_chain", "lemma_lp_value",
    "metric_completion", "new_metric", "open_problem_filter", "parse_instance", "repair_coverage",
    "search_run", "serialize_instance", "solve_2ecm_ip", "solve_dual", "solve_lp", "solve_tsp_ip",
    "stability_check", "transfer_check", "verify_certificate", "verify_lemma_conditions",
]

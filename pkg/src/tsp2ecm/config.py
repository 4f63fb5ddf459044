"""Size bounds for the exhaustive solvers, overridable through the environment."""
import os
from dataclasses import dataclass


def _env_int(name, default):
    raw = os.environ.get(name)
    if raw is None or raw.strip() == "":
        return default
    return int(raw)


@dataclass(frozen=True)
class Bounds:
    tsp_ip: int = 10
    ecm_ip: int = 7
    lp: int = 16
    half_integral: int = 7
    full_cut_enumeration: int = 12

    @classmethod
    def from_env(cls):
        return cls(
            tsp_ip=_env_int("TSP2ECM_TSP_MAX_N", cls.tsp_ip),
            ecm_ip=_env_int("TSP2ECM_2ECM_MAX_N", cls.ecm_ip),
            lp=_env_int("TSP2ECM_LP_MAX_N", cls.lp),
            half_integral=_env_int("TSP2ECM_HALF_MAX_N", cls.half_integral),
        )


def bounds():
    return Bounds.from_env()

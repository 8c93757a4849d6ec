"""Security-aware LTL planning and trajectory synthesis for multi-agent
systems: polytopic workspace abstraction, opacity-style security filters,
Buchi-based prefix-suffix planning, and QP trajectory realization."""

__version__ = "0.1.0"

from .abstraction import (
    AgentModel,
    SecurityInfeasibleError,
    TransitionSystem,
    build_secure_system,
    build_wts,
    product_gwts,
)
from .geometry import HPolytope, Partition
from .oracle import check_security, check_security_lasso
from .planner import assemble_trajectory, build_pba, search_prefix_suffix
from .scenario import Scenario, load_scenario

__all__ = [
    "AgentModel", "HPolytope", "Partition", "Scenario",
    "SecurityInfeasibleError", "TransitionSystem", "assemble_trajectory",
    "build_pba", "build_secure_system", "build_wts", "check_security",
    "check_security_lasso", "load_scenario", "product_gwts",
    "search_prefix_suffix", "__version__",
]

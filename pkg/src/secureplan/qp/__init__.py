"""Dense convex QP solver (operator splitting with infeasibility certificates).

The hot inner loop has two interchangeable backends: a compiled Cython kernel
(``secureplan.qp._admm_cy``) and a pure-numpy fallback, selected at import
time.  Set ``SECUREPLAN_NO_EXT=1`` to force the fallback.
"""

from .solver import (
    QpProblem,
    QpSettings,
    QpSolution,
    QpStructuralError,
    active_backend,
    dump_problem,
    solve,
)

__all__ = [
    "QpProblem",
    "QpSettings",
    "QpSolution",
    "QpStructuralError",
    "active_backend",
    "dump_problem",
    "solve",
]

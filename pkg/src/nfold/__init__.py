"""Exact solvers for combinatorial n-fold integer programs.

The core engine (`nfold.driver.solve`) decides and optimizes programs
whose bricks are coupled only through shared counting rows; the
`scheduling`, `closest_string`, and `imbalance` modules compile three
classic problems down to it.  `nfold.oracle` is an independent
brute-force reference used by the test suite.
"""

from .core import (
    MODE_FEASIBILITY,
    MODE_OPTIMIZE,
    STATUS_FEASIBLE,
    STATUS_INFEASIBLE,
    STATUS_OPTIMAL,
    InstanceFormatError,
    NFoldInstance,
    Solution,
    SolveOutcome,
    read_instance,
    validate,
    verify_solution,
    write_result,
)
from .driver import solve, solve_with_trace

__version__ = "0.1.0"

__all__ = [
    "MODE_FEASIBILITY",
    "MODE_OPTIMIZE",
    "STATUS_FEASIBLE",
    "STATUS_INFEASIBLE",
    "STATUS_OPTIMAL",
    "InstanceFormatError",
    "NFoldInstance",
    "Solution",
    "SolveOutcome",
    "read_instance",
    "solve",
    "solve_with_trace",
    "validate",
    "verify_solution",
    "write_result",
    "__version__",
]

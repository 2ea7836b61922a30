"""Joint transmit-power, CPU-frequency and local-accuracy allocation for on-device federated learning.

The solver minimizes the worst device's round-scaled weighted sum of latency
and energy under latency, upload-energy and CPU-frequency budgets.
"""

from ._core import BACKEND
from .channel import ChannelParams, ChannelState
from .config import ScenarioConfig, from_mapping, load_config
from .cost import AccuracyConfig, Allocation, CostReport, DeviceProfile, cost_report, is_feasible
from .dual import BlockSolution, DualState, Multipliers, solve_block, solve_f, solve_p
from .errors import (ChannelNotWarmedError, ConfigError, DegenerateObjectiveError, FedAllocError,
                     InfeasibleBaselineError, InfeasibleBlockError, InfeasibleScenarioError,
                     InvalidParameterError, NumericalBracketError, ObjectiveEvaluationError,
                     OracleTooLargeError)
from .harmony import HarmonyParams, harmony_search, theta_search
from .optimizer import (METHODS, OptimizationResult, SolverConfig, baseline_random_all,
                        baseline_random_pf, baseline_random_theta, optimize)
from .scenario import generate_scenario
from .suite import run_suite

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "ChannelParams", "ChannelState", "ScenarioConfig", "from_mapping", "load_config",
    "AccuracyConfig", "Allocation", "CostReport", "DeviceProfile", "cost_report", "is_feasible",
    "BlockSolution", "DualState", "Multipliers", "solve_block", "solve_f", "solve_p",
    "ChannelNotWarmedError", "ConfigError", "DegenerateObjectiveError", "FedAllocError",
    "InfeasibleBaselineError", "InfeasibleBlockError", "InfeasibleScenarioError",
    "InvalidParameterError", "NumericalBracketError", "ObjectiveEvaluationError",
    "OracleTooLargeError", "HarmonyParams", "harmony_search", "theta_search", "METHODS",
    "OptimizationResult", "SolverConfig", "baseline_random_all", "baseline_random_pf",
    "baseline_random_theta", "optimize", "generate_scenario", "run_suite",
]

"""Exception hierarchy shared by every solver stage."""


class FedAllocError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(FedAllocError, ValueError):
    pass


class ChannelNotWarmedError(FedAllocError):
    """The connection coefficient was requested before any RTT step (RTT(0) = 0)."""


class DegenerateObjectiveError(FedAllocError):
    """All cost coefficients of a Lagrangian sub-problem vanish; every point is a minimizer."""


class NumericalBracketError(FedAllocError):
    pass


class InfeasibleBlockError(FedAllocError):
    """No latency-feasible point was met by the dual loop for some device.

    ``p`` and ``f`` hold the least-violating point seen for each device and
    ``violation`` the matching latency excess in seconds.
    """

    def __init__(self, message, p=None, f=None, violation=None):
        super().__init__(message)
        self.p = p
        self.f = f
        self.violation = violation


class ObjectiveEvaluationError(FedAllocError):
    def __init__(self, theta, value):
        super().__init__(f"objective is not finite at theta={theta!r} (got {value!r})")
        self.theta = theta
        self.value = value


class InfeasibleScenarioError(FedAllocError):
    pass


class InfeasibleBaselineError(FedAllocError):
    pass


class OracleTooLargeError(FedAllocError):
    pass


class ConfigError(FedAllocError, ValueError):
    pass

"""Exception hierarchy shared by every module."""


class BctrackError(Exception):
    """Base class for all errors raised by the package."""


class NotStructurallyBalanced(BctrackError):
    pass


class SingularMatrix(BctrackError):
    pass


class BoundaryViolation(BctrackError):
    def __init__(self, message, t=None, agent=None):
        super().__init__(message)
        self.t = t
        self.agent = agent


class InitialConditionViolation(BctrackError):
    pass


class DegenerateBasis(BctrackError):
    pass


class RankDeficient(BctrackError):
    pass


class AssumptionViolation(BctrackError):
    pass


class UnactuatedAgent(BctrackError):
    pass


class NonFiniteState(BctrackError):
    def __init__(self, message, t=None, component=None):
        super().__init__(message)
        self.t = t
        self.component = component


class ParseError(BctrackError):
    pass


class ValidationError(BctrackError):
    def __init__(self, failures):
        self.failures = list(failures)
        super().__init__("; ".join(self.failures))

"""Exception hierarchy.

Validation errors (bad input, violated preconditions) map to CLI exit code 1,
numerical failures to exit code 2.
"""


class JunctionLabError(Exception):
    exit_code = 2


class ValidationError(JunctionLabError):
    exit_code = 1


class NumericalError(JunctionLabError):
    exit_code = 2


# geometry
class InvalidNetwork(ValidationError):
    pass


class NotATree(InvalidNetwork):
    pass


class BadValence(InvalidNetwork):
    pass


class SelfIntersection(InvalidNetwork):
    pass


class ExteriorOffBoundary(InvalidNetwork):
    pass


class EmptyInput(ValidationError):
    pass


# coloring
class UnknownRegionId(ValidationError):
    pass


class TooLarge(ValidationError):
    pass


class ClassMismatch(ValidationError):
    pass


# potential
class GridTooCoarse(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class BadWindow(ValidationError):
    pass


class NoSolution(ValidationError):
    pass


class NotConverged(NumericalError):
    pass


# flow
class ArcCollapse(NumericalError):
    pass


class JunctionDiverged(NumericalError):
    pass


class StepUnderflow(NumericalError):
    pass


class ClassInfeasible(ValidationError):
    pass


class NoAlternateClass(ValidationError):
    pass


# allen-cahn
class UnresolvedEpsilon(ValidationError):
    pass


class NodeTooCloseToBoundary(ValidationError):
    pass


class Instability(NumericalError):
    pass


class BadCFL(ValidationError):
    pass


class GridMismatch(ValidationError):
    pass

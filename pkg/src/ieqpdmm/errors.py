"""Exception types raised across the package."""


class ProblemError(ValueError):
    """Base class for malformed problem descriptions."""


class DimensionMismatch(ProblemError):
    pass


class DisconnectedGraph(ProblemError):
    pass


class NonSymmetricQ(ProblemError):
    pass


class DuplicateEdge(ProblemError):
    pass


class SingularSystem(ArithmeticError):
    """The local x-update system of a node is not positive definite."""

    def __init__(self, node, message=None):
        self.node = node
        super().__init__(message or f"node {node}: x-update system is not positive definite")


class ConfigError(ValueError):
    pass


class OracleError(RuntimeError):
    pass


class Infeasible(OracleError):
    pass


class Unbounded(OracleError):
    pass


class TooManyRows(OracleError):
    pass


class EmptyIntersection(Infeasible):
    pass

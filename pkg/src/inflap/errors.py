"""Exception hierarchy shared by every module of the package."""


class InflapError(Exception):
    """Base class for all errors raised by :mod:`inflap`."""


class InvalidGraph(InflapError):
    """A graph description violates the model conventions.

    ``violations`` collects every problem found during validation; the
    exception itself is an instance of the class of the first one.
    """

    def __init__(self, message, violations=None):
        super().__init__(message)
        self.violations = list(violations) if violations else [self]


class DuplicateNodeId(InvalidGraph):
    pass


class NonpositiveWeight(InvalidGraph):
    pass


class DisconnectedInterior(InvalidGraph):
    pass


class DanglingEdgeEndpoint(InvalidGraph):
    pass


class SelfLoop(InvalidGraph):
    pass


class DuplicateEdge(InvalidGraph):
    pass


class ParseError(InflapError):
    """Malformed JSON input (graph, function or report files)."""


class DomainMismatch(InflapError):
    """A node or edge function is not defined on the expected domain."""


class InvalidExponent(InflapError):
    pass


class Unreachable(InflapError):
    pass


class ZeroFunction(InflapError):
    pass


class ConstantFunction(InflapError):
    pass


class ZeroInit(ZeroFunction):
    pass


class KTooLarge(InflapError):
    pass


class CenterOnBoundary(InflapError):
    pass


class NotApplicable(InflapError):
    """A property check whose precondition does not hold."""


class NotAnEigenpair(InflapError):
    """No certificate exists for the given pair.

    ``frontier`` lists the monotone maximal-gradient paths that were explored
    (as node-id lists) before the search was exhausted.
    """

    def __init__(self, message, frontier=()):
        super().__init__(message)
        self.frontier = [list(path) for path in frontier]


class MalformedCertificate(InflapError):
    pass


class UnverifiedCertificate(InflapError):
    pass


class UnknownFixture(InflapError):
    pass


class SolverNonConverged(InflapError):
    """Raised by callers that need a converged solve; carries partial results."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial

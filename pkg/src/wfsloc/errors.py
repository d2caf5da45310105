"""Exception hierarchy shared by every module of the package."""


class WfslocError(Exception):
    """Base class for all engine errors."""


class PosetError(WfslocError, ValueError):
    """A relation that is not a partial order, or a malformed poset."""


class NotMonotone(WfslocError, ValueError):
    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class SourceTargetMismatch(WfslocError, ValueError):
    pass


class EmptyChain(WfslocError, ValueError):
    pass


class LoopDetected(WfslocError):
    """A cycle in a flow's generator graph; path sets would be infinite."""

    def __init__(self, message, cycle=()):
        super().__init__(message)
        self.cycle = tuple(cycle)


class FlowError(WfslocError, ValueError):
    pass


class CommutativityError(WfslocError, ValueError):
    pass


class LiftNotFound(WfslocError):
    def __init__(self, message, square=None):
        super().__init__(message)
        self.square = square


class NotConverged(WfslocError):
    """A truncated small object argument; ``partial`` holds what was built."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class PathObjectNotConverged(NotConverged):
    pass


class ObjectNotFibrant(WfslocError):
    def __init__(self, message, square=None):
        super().__init__(message)
        self.square = square


class ObjectNotInCategory(WfslocError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class CertificateError(WfslocError):
    pass


class ParseError(WfslocError):
    def __init__(self, message, line=0, column=0):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class UnknownCommand(WfslocError):
    pass

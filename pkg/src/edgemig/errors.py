class EdgeMigError(Exception):
    """Base class for library errors."""


class DegenerateInput(EdgeMigError, ValueError):
    pass


class NonMonotone(EdgeMigError, ValueError):
    pass


class InvalidSpec(EdgeMigError, ValueError):
    pass


class DegenerateSpec(InvalidSpec):
    pass


class InvalidAction(EdgeMigError, ValueError):
    pass


class SingularSegment(EdgeMigError, ArithmeticError):
    pass


class NonConvergence(EdgeMigError, RuntimeError):
    pass


class ParseError(EdgeMigError, ValueError):
    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = f"{path}:{line}: " if path is not None else ""
        super().__init__(where + message)


class EmptyTrace(EdgeMigError, ValueError):
    pass


class InsufficientData(EdgeMigError, ValueError):
    pass


class DivergentLoad(EdgeMigError, ValueError):
    pass


class ZeroBaseline(EdgeMigError, ZeroDivisionError):
    pass

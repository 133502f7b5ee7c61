from typing import Optional


class GraphFilterError(ValueError):
    """Base class for every domain error raised by the lab"""


class EdgeListParseError(GraphFilterError):
    def __init__(self, line_number: int, message: str):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")


class DuplicateEdgeError(EdgeListParseError):
    pass


class SelfLoopError(EdgeListParseError):
    pass


class DegenerateInputError(GraphFilterError):
    def __init__(self, message: str, node: Optional[int] = None):
        self.node = node
        super().__init__(message)


class DimensionMismatchError(GraphFilterError):
    pass


class UnsupportedKindError(GraphFilterError):
    pass


class KindMismatchError(GraphFilterError):
    pass


class ResourceLimitError(GraphFilterError):
    pass


class NumericError(GraphFilterError):
    def __init__(self, message: str, at: Optional[float] = None):
        self.at = at
        super().__init__(message)


class ParameterError(GraphFilterError):
    pass


class SingularOperatorError(GraphFilterError):
    pass


class SolverError(GraphFilterError):
    def __init__(self, message: str, condition: Optional[float] = None):
        self.condition = condition
        if condition is not None:
            message = f"{message} (condition estimate {condition:.3e})"
        super().__init__(message)


class FitError(GraphFilterError):
    pass

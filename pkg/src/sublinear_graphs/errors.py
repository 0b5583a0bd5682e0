"""Exception types shared across the package."""


class GraphError(Exception):
    """Base class for every error raised by this package."""


class ParseError(GraphError):
    def __init__(self, line_no: int, message: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


class ValidationError(GraphError):
    pass


class CapabilityError(GraphError):
    def __init__(self, model: str, kind: str):
        self.model = model
        self.kind = kind
        super().__init__(f"access model {model!r} does not permit {kind!r} queries")


class RangeError(GraphError, IndexError):
    pass


class EmptyGraphError(GraphError):
    pass


class AttemptCapError(GraphError):
    pass


class DomainError(GraphError, ValueError):
    pass


class ContractError(GraphError):
    pass


class UnsatisfiableError(GraphError):
    pass


class ParameterError(GraphError, ValueError):
    pass


class ConfigError(GraphError, ValueError):
    pass

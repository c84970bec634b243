"""Exception hierarchy shared by every stage of the engine."""


class CausumxError(Exception):
    """Base class; the CLI maps subclasses to exit codes."""


class DataError(CausumxError):
    """Problems with the input table or DAG (exit code 2)."""


class ParseError(DataError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SchemaError(DataError):
    pass


class CycleError(DataError):
    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("cycle in causal DAG: " + " -> ".join(self.cycle))


class EmptyViewError(DataError):
    pass


class ContractError(CausumxError):
    """A caller violated an operation's precondition."""


class ConfigError(CausumxError):
    """Invalid run configuration (exit code 1)."""


class EstimationError(CausumxError):
    """Regression produced non-finite numbers."""


class SizeError(CausumxError):
    """Instance exceeds the bounds of an exhaustive routine."""


class Infeasible(CausumxError):
    """The selection problem (or its LP relaxation) has no feasible solution."""

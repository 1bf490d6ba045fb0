from typing import Optional, Sequence


class HalkError(Exception):
    """Base class for every error raised by the simulator."""


class ArgumentError(HalkError, ValueError):
    pass


class ContractError(HalkError, ValueError):
    pass


class NumericError(HalkError, ArithmeticError):
    def __init__(self, message: str, condition: Optional[float] = None):
        super().__init__(message)
        self.condition = condition


class ProtocolError(HalkError, RuntimeError):
    pass


class TopologyError(HalkError, ValueError):
    def __init__(self, message: str, component: Sequence[int] = ()):
        super().__init__(message)
        self.component = list(component)


class DataError(HalkError, ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class ConfigError(HalkError, ValueError):
    pass

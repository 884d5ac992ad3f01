"""Exception hierarchy shared across the package."""


class PedsimError(Exception):
    """Base class for all package errors."""


class ContractViolation(PedsimError, ValueError):
    """An argument broke a documented precondition."""


class DegenerateGeometryError(PedsimError, ValueError):
    """Coincident points or an ill-defined direction."""


class ConfigurationError(PedsimError, ValueError):
    pass


class DensityInfeasibleError(PedsimError, RuntimeError):
    pass


class IntegrationDivergedError(PedsimError, FloatingPointError):
    def __init__(self, ped_id: int, step: int):
        super().__init__(f"non-finite acceleration for pedestrian {ped_id} at step {step}")
        self.ped_id = ped_id
        self.step = step


class IncompleteRunError(PedsimError, ValueError):
    pass


class UndefinedFluxError(PedsimError, ValueError):
    pass


class DegenerateFitError(PedsimError, ValueError):
    pass


class InputError(PedsimError, ValueError):
    pass


class ParseError(PedsimError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line

"""Exception hierarchy."""
from __future__ import annotations


class EtstirError(Exception):
    """Base class for all errors raised by the package."""


class GeometryError(EtstirError, ValueError):
    pass


class ResolutionError(EtstirError, ValueError):
    """A geometric feature is thinner than two grid cells."""


class SolverError(EtstirError, RuntimeError):
    """A linear or nonlinear iteration failed to converge.

    ``residual`` holds the last residual, ``history`` the residual history
    when the iteration keeps one.
    """

    def __init__(self, message, residual=None, history=None):
        super().__init__(message)
        self.residual = residual
        self.history = list(history) if history is not None else []


class CouplingError(SolverError):
    """The electro-thermal-flow fixed point did not converge."""


class MonotonicityError(EtstirError, RuntimeError):
    pass


class ConfigError(EtstirError, ValueError):
    pass

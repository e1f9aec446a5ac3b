"""Exception types shared across the toolkit."""

from __future__ import annotations


class TeeterkitError(Exception):
    """Base class for all toolkit errors."""


class StructureError(TeeterkitError, ValueError):
    """Operator or state has the wrong shape/dimension for the operation."""


class StateValidationError(TeeterkitError, ValueError):
    """A matrix fails the invariants of the state/measurement type it claims to be."""


class ModelDomainError(TeeterkitError, KeyError):
    """Unknown knob or outcome label, or an invalid knob subset."""


class UnsupportedCaseError(TeeterkitError, ValueError):
    """The requested closed form does not cover this parameter regime."""


class NullEventError(TeeterkitError, ValueError):
    """Conditioning on an event of (numerically) zero probability."""


class DegenerateStateError(TeeterkitError, ValueError):
    """A superposition collapsed to the zero vector and cannot be normalized."""


class SymmetryPreconditionError(TeeterkitError, ValueError):
    """Station pair does not satisfy the exchange-symmetry precondition."""


class QuadratureError(TeeterkitError, RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance.

    The achieved absolute-error estimate is attached as ``achieved_tolerance``.
    """

    def __init__(self, message: str, achieved_tolerance: float):
        super().__init__(f"{message} (achieved abs. error estimate {achieved_tolerance:.3e})")
        self.achieved_tolerance = achieved_tolerance


class DomainExhaustedError(TeeterkitError, RuntimeError):
    """The wavepacket reached the grid boundary; integration stopped.

    ``last_valid_time`` is the latest simulation time at which the
    in-window mass / norm checks still passed.
    """

    def __init__(self, message: str, last_valid_time: float):
        super().__init__(f"{message} (last valid time t={last_valid_time:.6g})")
        self.last_valid_time = last_valid_time


class NoDataError(TeeterkitError, KeyError):
    """A frequency-table bin has no trials."""


class CalibrationError(TeeterkitError, RuntimeError):
    """Source calibration failed; the bisection trace is attached."""

    def __init__(self, message: str, trace: list):
        super().__init__(message)
        self.trace = trace


class ConfigError(TeeterkitError, ValueError):
    """A configuration file failed validation; message carries field-precise context."""

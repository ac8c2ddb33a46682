"""Simulator and schedule compiler for velocity-zone neutral-atom processors."""

from ._core import BACKEND
from .errors import (CompileError, ConvergenceError, EmptyResultError, FitError,
                     InvalidArgumentError, NumericError, ProtocolError, VeloqError)

__version__ = "0.1.0"

__all__ = ["BACKEND", "CompileError", "ConvergenceError", "EmptyResultError", "FitError",
           "InvalidArgumentError", "NumericError", "ProtocolError", "VeloqError", "__version__"]

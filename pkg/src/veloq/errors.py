"""Exception hierarchy shared by all veloq modules."""


class VeloqError(Exception):
    """Base class for every error raised by veloq."""


class InvalidArgumentError(VeloqError, ValueError):
    pass


class NumericError(VeloqError, ArithmeticError):
    pass


class FitError(VeloqError, RuntimeError):
    pass


class ProtocolError(VeloqError, RuntimeError):
    """A gate or measurement was requested on an atom that cannot take it."""


class EmptyResultError(VeloqError, RuntimeError):
    pass


class CompileError(VeloqError):
    """Raised by the schedule compiler; ``event`` names the offending IR op."""

    def __init__(self, message, event=None):
        super().__init__(message if event is None else f"{event}: {message}")
        self.event = event


class ConvergenceError(VeloqError, RuntimeError):
    """Pulse synthesis missed its target; the best profile found is attached."""

    def __init__(self, message, best=None, infidelity=None):
        super().__init__(message)
        self.best = best
        self.infidelity = infidelity

class SoficError(Exception):
    """Base class for every error raised by the core library."""


class InvalidAutomatonError(SoficError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors) or "invalid automaton")


class AlphabetError(SoficError):
    """Unknown symbol, or two objects over different alphabets."""


class NotDeterministicError(SoficError):
    pass


class HypothesisError(SoficError):
    """A checkable precondition of a decision procedure does not hold."""


class InvalidMeasureError(SoficError):
    """The triple (pi, nu, 1) is not a stochastic representation."""


class ConvergenceError(SoficError):
    def __init__(self, message, last_estimate=None, iterations=0):
        self.last_estimate = last_estimate
        self.iterations = iterations
        super().__init__(f"{message} (last estimate {last_estimate}, {iterations} iterations)")


class VerificationError(SoficError):
    """A constructed witness failed its independent check. Always a bug."""


class FileFormatError(SoficError):
    def __init__(self, message, line=None, column=None, path=None):
        self.message = message
        self.line = line
        self.column = column
        self.path = path
        super().__init__(str(self))

    def __str__(self):
        location = self.path or "<input>"
        if self.line is not None:
            location += f":{self.line}"
            if self.column is not None:
                location += f":{self.column}"
        return f"{location}: {self.message}"

"""Exception types shared by the solvers and mapped to CLI exit codes."""


class ResourceRefusal(RuntimeError):
    """The request is well-formed but would exceed the supported work bound."""


class NonConvergence(RuntimeError):
    def __init__(self, message: str, residual=None, iterations: int | None = None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class InconsistentState(ArithmeticError):
    """A quantity that is analytically constrained came out on the wrong side."""


class VerificationFailure(AssertionError):
    pass

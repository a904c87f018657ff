"""Exception hierarchy shared by all modules.

ValidationError covers bad arguments and contract violations; NumericsError
covers failures of otherwise-valid computations (size caps, divergence).
The CLI maps the former to exit code 1 and the latter to exit code 2.
"""


class TnpolyError(Exception):
    """Base class for all library errors."""


class ValidationError(TnpolyError):
    """Invalid input: wrong shape, wrong representation, out-of-range argument."""


class NumericsError(TnpolyError):
    """A numerically infeasible computation (caps, divergence, non-finite data)."""


class SizeCapError(NumericsError):
    """Dense work would exceed the configured size cap."""


class DivergenceError(NumericsError):
    """A generated or forecast trajectory left the admissible range."""

    def __init__(self, step: int, value: float):
        self.step = step
        self.value = value
        super().__init__(f"trajectory diverged at step {step} (|x| = {abs(value):.3e})")

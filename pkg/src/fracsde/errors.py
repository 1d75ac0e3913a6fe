"""Exception hierarchy shared by all modules.

``DomainError`` covers parameter and constraint violations (CLI exit code 3),
``NumericalError`` covers failures of an otherwise valid computation
(CLI exit code 4).
"""


class FracSDEError(Exception):
    """Base class for all package errors."""


class DomainError(FracSDEError, ValueError):
    """Invalid parameters or a violated admissibility constraint."""


class ClassicalSolutionError(DomainError):
    """``beta - gamma <= -1/2``: no classical (square-integrable) solution."""

    def __init__(self, beta: float, gamma: float, what: str = "classical solution"):
        self.beta = beta
        self.gamma = gamma
        super().__init__(
            f"{what} requires beta - gamma > -1/2, got beta={beta:g}, gamma={gamma:g} "
            f"(beta - gamma = {beta - gamma:g}); only a generalized (weighted chaos) "
            "solution exists"
        )


class NumericalError(FracSDEError, ArithmeticError):
    """A numerical procedure failed (non-convergence, factorization, overflow)."""


class ConvergenceError(NumericalError):
    """An iterative or series procedure hit its cap before reaching tolerance."""


class FactorizationError(NumericalError):
    """A covariance matrix could not be factorized."""

    def __init__(self, message: str, min_eigenvalue: float):
        self.min_eigenvalue = min_eigenvalue
        super().__init__(f"{message} (minimum eigenvalue {min_eigenvalue:.3e})")


def check_classical(beta: float, gamma: float, what: str = "classical solution") -> None:
    if not beta - gamma > -0.5:
        raise ClassicalSolutionError(beta, gamma, what)

"""Exception types raised across the package."""


class MarketError(ValueError):
    """Invalid market data or mismatched dimensions."""


class InfeasibleError(ValueError):
    """A constraint set or a portfolio admits no valid solution."""


class ConvergenceError(RuntimeError):
    """An iterative method hit its iteration cap."""


class EmbeddingError(ValueError):
    """No exact embedding into ideal gambling assets exists."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (least-squares residual {residual:.3e})")
        self.residual = residual


class IndeterminateError(ArithmeticError):
    """Both sides of a difference are infinite."""

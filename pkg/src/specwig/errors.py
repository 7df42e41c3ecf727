"""Exception types raised by specwig."""


class SpecwigError(Exception):
    """Base class for all specwig errors."""


class QuadratureError(SpecwigError):
    """A quadrature did not converge; ``residual`` is the refinement gap."""

    def __init__(self, message, residual=float("nan")):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


class EvennessError(SpecwigError):
    """A density is not even, so its Fourier data is not real."""

    def __init__(self, message, residue=float("nan")):
        super().__init__(f"{message} (residue={residue:.3e})")
        self.residue = residue


class EigenConvergenceError(SpecwigError):
    def __init__(self, size, residual):
        super().__init__(
            f"QL iteration did not converge for a {size}x{size} matrix "
            f"(off-diagonal residual {residual:.3e})"
        )
        self.size = size
        self.residual = residual


class DivergentMomentError(SpecwigError):
    """Moment of order ``order`` is infinite (or numerically unresolvable)."""

    def __init__(self, order, value=float("inf")):
        super().__init__(f"moment of order {order} diverges (estimate {value:.3e})")
        self.order = order
        self.value = value


class NotPSDError(SpecwigError):
    def __init__(self, min_eig):
        super().__init__(f"matrix is not positive semidefinite (min eigenvalue {min_eig:.3e})")
        self.min_eig = min_eig


class ConfigError(SpecwigError):
    """Invalid experiment configuration."""

"""Shared exception types."""


class ResourceCapError(RuntimeError):
    """A requested computation exceeds a configured size cap.

    Raised instead of silently truncating; the message names the cap so the
    caller can raise it deliberately (see the OPENTRIANGLE_* environment
    variables in the README).
    """


class NotPositiveSemidefiniteError(ValueError):
    """A matrix expected to be PSD has an eigenvalue below tolerance."""

    def __init__(self, lambda_min: float, tolerance: float):
        self.lambda_min = lambda_min
        self.tolerance = tolerance
        super().__init__(
            f"matrix is not positive semidefinite: lambda_min={lambda_min:.6e} "
            f"is below -{tolerance:.1e}"
        )


class EigenConvergenceError(RuntimeError):
    """The Jacobi sweep cap was reached before the off-diagonal mass target."""

    def __init__(self, residual: float, target: float, sweeps: int):
        self.residual = residual
        self.target = target
        self.sweeps = sweeps
        super().__init__(
            f"eigensolver did not converge in {sweeps} sweeps: "
            f"off-diagonal residual {residual:.3e} > target {target:.3e}"
        )

"""Exception taxonomy shared by the library and the CLI.

The CLI maps ConfigurationError -> exit 2 and NumericalFault -> exit 3.
Every error carries a short machine-parsable tag (dotted lowercase).
"""


class StefanError(Exception):
    """Base class; carries a machine-parsable dotted tag."""

    def __init__(self, tag: str, message: str):
        self.tag = tag
        super().__init__(message)


class ConfigurationError(StefanError):
    """Bad user input: unknown fixture, invalid parameter, malformed file."""


class ValidationError(ConfigurationError):
    """Input data violates a structural precondition."""


class DomainError(StefanError):
    """Mathematical operation evaluated outside its domain."""


class NumericalFault(StefanError):
    """Runtime numerical failure (stability violation, failed factorization)."""


class StabilityError(NumericalFault):
    """Explicit-scheme step-size bound violated during the time march."""

    def __init__(self, step: int, z: float, k: float, bound: float):
        self.step = step
        self.z = z
        super().__init__(
            "direct.cfl.violated",
            f"time step k={k:.3e} exceeds stability bound {bound:.3e} "
            f"at step {step} (Z={z:.6e})",
        )

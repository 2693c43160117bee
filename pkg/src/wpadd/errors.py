"""Exception hierarchy shared by all modules.

Each class carries the CLI exit code it maps to, so the command-line layer
never needs to know which module raised.
"""


class WpError(Exception):
    exit_code = 2


class DomainError(WpError, ValueError):
    """Argument outside the mathematical domain of an operation."""

    exit_code = 3


class ConditioningError(DomainError):
    """Input so close to degenerate that double precision is meaningless."""


class PoleError(DomainError):
    def __init__(self, z, lattice_point):
        self.z = complex(z)
        self.lattice_point = complex(lattice_point)
        super().__init__(f"{self.z!r} is a pole (lattice point {self.lattice_point!r})")


class ConsistencyError(WpError):
    """Two independent computations that must agree did not."""

    exit_code = 1


class NumericError(WpError, ArithmeticError):
    exit_code = 3


class UnsupportedModeError(WpError):
    """Operation needs periods but the lattice was built from invariants only."""


class ConfigError(WpError):
    """Invalid addition configuration."""


class DegenerateError(WpError):
    """Determinant condition or denominator guard failed."""

    exit_code = 4


class DegenerateSystemError(DegenerateError):
    pass


class PhiDegenerateError(DegenerateError):
    pass


class NoUsableRError(DegenerateError):
    pass


class GuardedInputError(DegenerateError):
    def __init__(self, denominator, value=None):
        self.denominator = denominator
        self.value = value
        super().__init__(f"denominator {denominator!r} vanishes (value {value!r})")

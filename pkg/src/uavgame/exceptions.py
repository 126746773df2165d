"""Exception and warning types raised across the package."""


class UavGameError(Exception):
    """Base class for all package errors."""


class ConfigError(UavGameError, ValueError):
    """A configuration document failed validation.

    ``violations`` holds every problem found, not just the first one.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "\n".join(f"  - {v}" for v in self.violations)
        super().__init__(f"{len(self.violations)} config violation(s):\n{lines}")


class Violation:
    """One problem found while validating a config document."""

    kind = "Violation"

    def __init__(self, path, message=""):
        self.path = path
        self.message = message

    @property
    def field(self):
        """Leaf field name, e.g. ``temperature`` for ``market.temperature``."""
        return self.path.rsplit(".", 1)[-1].split("[", 1)[0]

    def __str__(self):
        return f"{self.kind}({self.path!r}){': ' + self.message if self.message else ''}"

    __repr__ = __str__

    def __eq__(self, other):
        return type(self) is type(other) and str(self) == str(other)


class MissingField(Violation):
    kind = "MissingField"


class OutOfRange(Violation):
    kind = "OutOfRange"

    def __init__(self, path, value, bound):
        self.value = value
        self.bound = bound
        super().__init__(path, f"value {value!r} violates {bound}")

    def __str__(self):
        return f"OutOfRange({self.path!r}, {self.value!r}, {self.bound!r})"


class InconsistentTiming(Violation):
    kind = "InconsistentTiming"


class InvalidType(Violation):
    kind = "InvalidType"


class DomainError(UavGameError, ValueError):
    """An argument lies outside the domain of a formula."""


class QuadratureNonConvergence(UavGameError, ArithmeticError):
    """Adaptive quadrature hit its subdivision cap before meeting tolerance."""


class BoundaryPoint(UavGameError, ValueError):
    """A finite-difference stencil would leave the strategy box."""


class FactorNearZero(UavGameError, ArithmeticError):
    """The availability-game revenue factor is too close to zero to divide by."""


class NonConvergenceWarning(UserWarning):
    """Best-response dynamics stopped at ``max_iterations`` without converging."""

"""Exception types shared across the package."""


class PereError(Exception):
    """Base class for package-specific failures."""


class InfeasibleRegionError(PereError):
    """No point satisfies every preference cut inside the unit box.

    Carries the index of the most violated cut so callers can report or
    relax it.
    """

    def __init__(self, message: str, most_violated: int | None = None):
        super().__init__(message)
        self.most_violated = most_violated


class UnboundedError(PereError):
    """The linear program has unbounded objective value."""


class NumericDomainError(PereError):
    """A log or division left its valid domain; names the offending term."""

    def __init__(self, message: str, indices: tuple[int, int] | None = None):
        super().__init__(message)
        self.indices = indices


class ExhaustedPoolError(PereError):
    """No unasked candidates remain in the popular pool."""


class CatalogFormatError(PereError):
    """Catalog file violates the expected schema; carries the line number."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.line = line


class ConfigError(PereError):
    """Run configuration is malformed or out of range."""

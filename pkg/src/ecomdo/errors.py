"""Exception hierarchy shared across the package.

Exit-code mapping lives in the CLI: ConfigError -> 2, infeasible optimum -> 3,
AnalysisError (and subclasses) -> 4.
"""


class EcomdoError(Exception):
    """Base class for all package errors."""


class ConfigError(EcomdoError):
    """Invalid or inconsistent run configuration (bad key, unit, range)."""


class AnalysisError(EcomdoError):
    """A physics analysis could not be completed (singular system, bad state)."""


class SectionGeometryError(AnalysisError):
    """Wingbox walls overlap; carries the violated margin in metres."""

    def __init__(self, message: str, margin: float):
        super().__init__(message)
        self.margin = margin


class MdaDivergedError(AnalysisError):
    """Gauss-Seidel MDA failed to converge; carries the residual trace."""

    def __init__(self, message: str, residuals: list[float]):
        super().__init__(message)
        self.residuals = residuals


class CatalogueRangeError(ValueError, EcomdoError):
    """Density query outside the catalogue's density hull."""

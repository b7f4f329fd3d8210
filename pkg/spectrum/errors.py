"""
Exception types raised by the spectrum library.

The CLI turns these into exit codes: configuration and domain problems exit 2,
failed verification exits 1.
"""


class SpectrumError(Exception):
    """Base class for all library errors."""


class SpectralDomainError(SpectrumError, ValueError):
    """Spectral parameter or coupling input outside the domain of a formula."""


class SectorIndexError(SpectrumError, IndexError):
    """Basis or kernel index that does not exist for the requested sector."""


class ScanConfigurationError(SpectrumError):
    """A determinant scan could not terminate under the given ScanConfig."""


class RankBoundError(SpectrumError):
    """More eigenvalues found than the rank of the sector potential allows."""


class GridCapacityError(SpectrumError):
    """Dense diagonalisation requested above the configured dimension cap."""


class CalibrationError(SpectrumError):
    """Determinant counts are not constant on a region component."""

    def __init__(self, component: str, counts: dict[int, list[tuple[float, float, float]]]):
        self.component = component
        self.counts = counts
        summary = ", ".join(f"{k}: {len(v)} pts" for k, v in sorted(counts.items()))
        super().__init__(f"non-constant counts on {component} ({summary})")

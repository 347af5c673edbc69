"""Binary masks that null the DFT bins of a periodic pixel grid.

A period-P grid leaves energy on the Cartesian product of its harmonic bins
along each axis. The mask zeroes that product set, dilates every zero into a
Euclidean disk measured with wrap-around distance, mirrors the zero set so it
commutes with conjugate symmetry, and finally restores a guard disk around
the zero frequency so the image mean survives.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

REFERENCE_SIDE = 1024
DEFAULT_DILATION_RADIUS = 3.0
DEFAULT_DC_GUARD_RADIUS = 3.0


@dataclass(frozen=True)
class GridSpec:
    """Which grid to null and how far to reach around each harmonic.

    Radii are in DFT bins. ``None`` selects the size-scaled default of 3 bins
    per 1024 pixels of the shorter side, floored at 1; an explicit number is
    used literally.
    """

    period: int
    dilation_radius: float | None = None
    dc_guard_radius: float | None = None

    def __post_init__(self) -> None:
        if int(self.period) != self.period or self.period < 2:
            raise ValueError(f"period must be an integer >= 2, got {self.period}")
        for name in ("dilation_radius", "dc_guard_radius"):
            value = getattr(self, name)
            if value is not None and not value >= 0:
                raise ValueError(f"{name} must be >= 0, got {value}")


def grid_bins(extent: int, period: int) -> np.ndarray:
    """Harmonic bin indices of a period-``period`` grid along one axis.

    These are round-half-up(n * extent / period) mod extent for n in
    [0, period), computed in exact integer arithmetic, de-duplicated, sorted.
    The set is generally not symmetric under negation when period does not
    divide extent, which is why mask construction mirrors the zero set
    explicitly.
    """
    if extent < 1:
        raise ValueError(f"extent must be >= 1, got {extent}")
    if period < 2:
        raise ValueError(f"period must be >= 2, got {period}")
    n = np.arange(period, dtype=np.int64)
    bins = ((2 * n * extent + period) // (2 * period)) % extent
    return np.unique(bins)


def resolve_radius(nominal: float | None, height: int, width: int, default: float) -> float:
    """Literal radius when given, else the size-scaled default floored at 1."""
    if nominal is not None:
        return float(nominal)
    return max(1.0, default * min(height, width) / REFERENCE_SIDE)


def _min_wrap_distance(extent: int, bins: np.ndarray) -> np.ndarray:
    """Per index, the torus distance to the nearest bin in ``bins``."""
    k = np.arange(extent, dtype=np.int64)[:, None]
    diff = np.abs(k - bins[None, :])
    return np.minimum(diff, extent - diff).min(axis=1).astype(np.float64)


def build_grid_mask(height: int, width: int, spec: GridSpec) -> np.ndarray:
    """Binary keep/remove mask for an H x W spectrum, 1 = keep.

    Build order: product-grid zeros, disk dilation on the torus (inclusive
    radius), union with the conjugate-mirrored zero set, then restoration of
    every bin within the DC guard disk of (0, 0). The DC bin itself is always
    kept.
    """
    if height < 1 or width < 1:
        raise ValueError(f"mask shape must be positive, got {height}x{width}")
    if spec.period > min(height, width) // 2:
        raise ValueError(
            f"period {spec.period} too large for {height}x{width};"
            f" need period <= min(H, W) / 2"
        )
    dilation = resolve_radius(spec.dilation_radius, height, width, DEFAULT_DILATION_RADIUS)
    dc_guard = resolve_radius(spec.dc_guard_radius, height, width, DEFAULT_DC_GUARD_RADIUS)
    max_dilation = min(height, width) / (2 * spec.period)
    if dilation > max_dilation:
        raise ValueError(
            f"dilation radius {dilation} exceeds min(H, W) / (2 * period)"
            f" = {max_dilation}; neighboring harmonics would merge"
        )

    row_dist = _min_wrap_distance(height, grid_bins(height, spec.period))
    col_dist = _min_wrap_distance(width, grid_bins(width, spec.period))
    # A bin is within the dilated zero set iff its nearest product-grid point,
    # which combines the per-axis nearest bins, lies within the disk.
    zeros = row_dist[:, None] ** 2 + col_dist[None, :] ** 2 <= dilation**2

    mirrored = np.roll(zeros[::-1, ::-1], shift=(1, 1), axis=(0, 1))
    zeros |= mirrored

    row_dc = np.minimum(np.arange(height), height - np.arange(height)).astype(np.float64)
    col_dc = np.minimum(np.arange(width), width - np.arange(width)).astype(np.float64)
    guard = row_dc[:, None] ** 2 + col_dc[None, :] ** 2 <= dc_guard**2
    zeros &= ~guard
    zeros[0, 0] = False

    return (~zeros).astype(np.uint8)


def apply_mask(spectrum: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Zero the spectrum wherever the mask is 0."""
    spectrum = np.asarray(spectrum)
    if spectrum.shape != mask.shape:
        raise ValueError(
            f"spectrum shape {spectrum.shape} does not match mask shape {mask.shape}"
        )
    return spectrum * mask

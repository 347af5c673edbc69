"""Interpretable periodic-peak detector.

The score of an image is the mean DFT magnitude of its Laplacian-of-Gaussian
residual over the harmonic bins of one grid period. Every stage is a fixed
linear map followed by an average, so a score can always be traced back to
the individual bins that produced it. The decision threshold is calibrated
on scores of real images to a target false-positive rate.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from scipy import ndimage

from . import images, masking

DEFAULT_SIGMA = 0.7
DEFAULT_HALF_SIZE = 5
DEFAULT_TARGET_FPR = 0.05
MIN_CALIBRATION_SCORES = 20
SUPPORTED_PERIODS = (8, 16)

REAL_LABEL = "real"
SYNTHETIC_LABEL = "synthetic"


@dataclass(frozen=True)
class LoGKernel:
    """Sampled Laplacian-of-Gaussian weights on a square support."""

    sigma: float
    half_size: int
    weights: np.ndarray = field(repr=False)


def make_log_kernel(sigma: float = DEFAULT_SIGMA, half_size: int = DEFAULT_HALF_SIZE) -> LoGKernel:
    """Sample the LoG at integer offsets n1, n2 in [-half_size, half_size].

    The weight at offset (n1, n2) with r2 = n1**2 + n2**2 is

        -(1 / (pi * sigma**4)) * (1 - r2 / (2 * sigma**2)) * exp(-r2 / (2 * sigma**2))

    No normalization is applied afterwards; the weights are used exactly as
    sampled.
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if half_size < 1:
        raise ValueError(f"half_size must be >= 1, got {half_size}")
    offsets = np.arange(-half_size, half_size + 1, dtype=np.float64)
    r2 = offsets[:, None] ** 2 + offsets[None, :] ** 2
    scaled = r2 / (2.0 * sigma**2)
    weights = -(1.0 / (np.pi * sigma**4)) * (1.0 - scaled) * np.exp(-scaled)
    return LoGKernel(sigma=float(sigma), half_size=int(half_size), weights=weights)


def residual_matrix(matrix: np.ndarray, kernel: LoGKernel) -> np.ndarray:
    """Cross-correlate one float matrix with the kernel, reflecting at borders."""
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got {matrix.ndim} dimensions")
    return ndimage.correlate(matrix, kernel.weights, mode="reflect")


def residual(image: np.ndarray, kernel: LoGKernel) -> np.ndarray:
    """High-pass residual of an image: channel average, then LoG correlation."""
    images.validate_raster(image)
    return residual_matrix(images.channel_mean(image), kernel)


@dataclass(frozen=True)
class DetectorModel:
    """Scoring parameters plus, once calibrated, the decision threshold."""

    period: int
    sigma: float = DEFAULT_SIGMA
    half_size: int = DEFAULT_HALF_SIZE
    target_fpr: float = DEFAULT_TARGET_FPR
    threshold: float | None = None
    n_calibration: int = 0
    created_at: str | None = None

    def __post_init__(self) -> None:
        if self.period not in SUPPORTED_PERIODS:
            raise ValueError(
                f"period must be one of {SUPPORTED_PERIODS}, got {self.period}"
            )
        if not 0 < self.target_fpr < 1:
            raise ValueError(f"target_fpr must be in (0, 1), got {self.target_fpr}")

    def to_dict(self) -> dict:
        return {
            "period": self.period,
            "sigma": self.sigma,
            "half_size": self.half_size,
            "target_fpr": self.target_fpr,
            "threshold": self.threshold,
            "n_calibration": self.n_calibration,
            "created_at": self.created_at,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "DetectorModel":
        try:
            return cls(
                period=payload["period"],
                sigma=payload["sigma"],
                half_size=payload["half_size"],
                target_fpr=payload["target_fpr"],
                threshold=payload["threshold"],
                n_calibration=payload["n_calibration"],
                created_at=payload.get("created_at"),
            )
        except KeyError as missing:
            raise ValueError(f"detector model is missing field {missing}") from None


def save_model(model: DetectorModel, path: str | os.PathLike) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(model.to_dict(), indent=2, sort_keys=True) + "\n")


def load_model(path: str | os.PathLike) -> DetectorModel:
    payload = json.loads(Path(path).read_text())
    return DetectorModel.from_dict(payload)


def grid_score(image: np.ndarray, model: DetectorModel) -> float:
    """Mean |DFT| of the LoG residual over the period's harmonic bins.

    The bin set is the Cartesian product of the per-axis harmonics minus the
    DC bin (0, 0); bins are averaged exactly as enumerated, so a coefficient
    and its conjugate mirror each contribute once.
    """
    images.validate_raster(image)
    height, width = image.shape[:2]
    if min(height, width) < 2 * model.period:
        raise ValueError(
            f"image is {height}x{width}; scoring at period {model.period}"
            f" needs both sides >= {2 * model.period}"
        )
    kernel = make_log_kernel(sigma=model.sigma, half_size=model.half_size)
    spectrum = np.fft.fft2(residual(image, kernel))
    rows = masking.grid_bins(height, model.period)
    cols = masking.grid_bins(width, model.period)
    magnitudes = np.abs(spectrum[np.ix_(rows, cols)]).ravel()
    # Both bin lists start at 0, so the first product entry is the DC bin.
    return float(magnitudes[1:].mean())


def calibrate(real_scores: list[float] | np.ndarray, target_fpr: float = DEFAULT_TARGET_FPR) -> float:
    """Smallest observed score whose exceedance rate is within the target.

    The threshold is the order statistic t minimizing t subject to
    count(score > t) / n <= target_fpr, so classification at s > t flags at
    most the target fraction of the calibration corpus itself.
    """
    scores = np.asarray(real_scores, dtype=np.float64)
    if scores.ndim != 1 or scores.size < MIN_CALIBRATION_SCORES:
        raise ValueError(
            f"need at least {MIN_CALIBRATION_SCORES} calibration scores,"
            f" got {scores.size}"
        )
    if not np.isfinite(scores).all():
        raise ValueError("calibration scores must be finite")
    if not 0 < target_fpr < 1:
        raise ValueError(f"target_fpr must be in (0, 1), got {target_fpr}")
    ordered = np.sort(scores)
    n = ordered.size
    # count(score > ordered[i]) == n - searchsorted(ordered, ordered[i], 'right')
    exceed = n - np.searchsorted(ordered, ordered, side="right")
    admissible = ordered[exceed / n <= target_fpr]
    return float(admissible.min())


def calibrate_model(model: DetectorModel, real_scores: list[float] | np.ndarray) -> DetectorModel:
    """Return a copy of the model carrying the calibrated threshold."""
    threshold = calibrate(real_scores, target_fpr=model.target_fpr)
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return replace(
        model,
        threshold=threshold,
        n_calibration=int(np.asarray(real_scores).size),
        created_at=stamp,
    )


def classify(score: float, model: DetectorModel) -> str:
    """Label a score: strictly above the threshold means synthetic."""
    if model.threshold is None:
        raise ValueError("model has no threshold; calibrate it first")
    return SYNTHETIC_LABEL if score > model.threshold else REAL_LABEL


def write_scores_csv(records: list[tuple[str, float, str]], path: str | os.PathLike) -> None:
    """Write (path, score, label) rows as CSV with a fixed header."""
    import csv

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["path", "score", "label"])
        for name, score, label in records:
            writer.writerow([name, repr(float(score)), label])

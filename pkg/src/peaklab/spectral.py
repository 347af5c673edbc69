"""2-D DFT conventions, log-magnitude rendering, and corpus-average spectra.

The forward transform is unnormalized and the inverse carries the 1/(H*W)
factor, so the DC coefficient equals the plain sum of the samples and
Parseval reads sum(x**2) == sum(|X|**2) / (H*W).
"""

from __future__ import annotations

import numpy as np

from . import images

DEFAULT_LOG_FLOOR = 1e-12


def _require_matrix(matrix: np.ndarray, name: str) -> np.ndarray:
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] < 1 or matrix.shape[1] < 1:
        raise ValueError(f"{name} must be a non-empty 2-D matrix, got shape {matrix.shape}")
    return matrix


def dft_forward(matrix: np.ndarray) -> np.ndarray:
    """Unnormalized 2-D DFT of a real or complex matrix."""
    matrix = _require_matrix(matrix, "matrix")
    return np.fft.fft2(matrix)


def dft_inverse(spectrum: np.ndarray) -> tuple[np.ndarray, float]:
    """Inverse 2-D DFT with the 1/(H*W) factor.

    Returns the real part together with the largest absolute imaginary
    residue, which callers use to confirm a spectrum was Hermitian.
    """
    spectrum = _require_matrix(spectrum, "spectrum")
    full = np.fft.ifft2(spectrum)
    return np.ascontiguousarray(full.real), float(np.abs(full.imag).max())


def log_magnitude(spectrum: np.ndarray, floor: float = DEFAULT_LOG_FLOOR) -> np.ndarray:
    """log10 of |spectrum| with the zero frequency shifted to the center.

    Magnitudes below ``floor`` are clamped so the logarithm stays finite.
    """
    spectrum = _require_matrix(spectrum, "spectrum")
    if not floor > 0:
        raise ValueError(f"floor must be positive, got {floor}")
    magnitude = np.maximum(np.abs(spectrum), floor)
    return np.fft.fftshift(np.log10(magnitude))


def average_power_spectrum(
    image_list: list[np.ndarray],
    use_residual: bool = False,
    sigma: float = 0.7,
    half_size: int = 5,
    floor: float = DEFAULT_LOG_FLOOR,
    magnitude: bool = False,
) -> np.ndarray:
    """Centered log10 of the mean spectral power over a corpus.

    Channels are averaged before the transform. With ``use_residual`` each
    image is high-pass filtered by the detector's filter first, which is how
    faint periodic peaks are made visible over natural image content. Power
    (|X|**2) is averaged by default; ``magnitude`` switches to plain |X|.

    All images must share one height and width; the offending index is named
    otherwise.
    """
    if len(image_list) == 0:
        raise ValueError("image_list must contain at least one image")
    if not floor > 0:
        raise ValueError(f"floor must be positive, got {floor}")
    from . import detector

    kernel = detector.make_log_kernel(sigma=sigma, half_size=half_size) if use_residual else None
    shape = None
    total = None
    for index, image in enumerate(image_list):
        images.validate_raster(image)
        if shape is None:
            shape = image.shape[:2]
            total = np.zeros(shape, dtype=np.float64)
        elif image.shape[:2] != shape:
            raise ValueError(
                f"image {index} has shape {image.shape[:2]}, expected {shape}"
            )
        plane = images.channel_mean(image)
        if kernel is not None:
            plane = detector.residual_matrix(plane, kernel)
        coeff = np.abs(np.fft.fft2(plane))
        total += coeff if magnitude else coeff**2
    mean = total / len(image_list)
    return np.fft.fftshift(np.log10(np.maximum(mean, floor)))

"""Removal of periodic spectral peaks from 8-bit images.

Each channel is transformed, multiplied by the binary grid mask, inverted,
then mapped back onto the channel's original [min, max] range and quantized.
The affine remap uses exact endpoints: the reconstruction's minimum lands on
the input minimum and its maximum on the input maximum, so the output
occupies the same dynamic range as the input despite the removed energy.
"""

from __future__ import annotations

import csv
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path, PurePosixPath

import numpy as np
from PIL import UnidentifiedImageError

from . import images, masking


@dataclass(frozen=True)
class RemovalResult:
    """Cleaned image plus the diagnostics the invariants are stated over."""

    image: np.ndarray
    max_imag_residue: float
    masked_energy_fraction: tuple[float, ...]
    masked_spectra: tuple[np.ndarray, ...] | None = None


@dataclass(frozen=True)
class BatchRecord:
    """Per-file outcome of a batch run; one row of the summary CSV."""

    path: str
    channels: int | None = None
    masked_energy_fraction_mean: float | None = None
    max_imag_residue: float | None = None
    skipped_reason: str | None = None
    io_failure: bool = field(default=False, compare=False)


def round_half_up(values: np.ndarray) -> np.ndarray:
    """Round with ties going up, matching integer-grid quantization."""
    return np.floor(np.asarray(values, dtype=np.float64) + 0.5)


def _remove_channel(
    channel: np.ndarray, mask: np.ndarray
) -> tuple[np.ndarray, float, float, np.ndarray]:
    spectrum = np.fft.fft2(channel)
    power = np.abs(spectrum) ** 2
    total = float(power.sum())
    non_dc = total - float(power[0, 0])
    removed = float(power[mask == 0].sum())
    fraction = removed / non_dc if non_dc > 0 else 0.0

    masked = masking.apply_mask(spectrum, mask)
    inverse = np.fft.ifft2(masked)
    coeff_scale = float(np.abs(masked).max())
    imag_rel = float(np.abs(inverse.imag).max() / coeff_scale) if coeff_scale > 0 else 0.0
    recon = inverse.real

    x_min, x_max = float(channel.min()), float(channel.max())
    y_min, y_max = float(recon.min()), float(recon.max())
    if y_max > y_min:
        rescaled = x_min + (recon - y_min) / (y_max - y_min) * (x_max - x_min)
    else:
        rescaled = np.full_like(recon, round_half_up(channel.mean()))
    quantized = np.clip(round_half_up(rescaled), 0, 255).astype(np.uint8)
    return quantized, fraction, imag_rel, masked


def remove_peaks(
    image: np.ndarray, spec: masking.GridSpec, keep_spectra: bool = False
) -> RemovalResult:
    """Null the grid's spectral peaks in every channel of one image.

    With ``keep_spectra`` the post-mask spectra are retained so callers can
    inspect the coefficients that were zeroed; they are dropped by default to
    keep batch memory flat.
    """
    images.validate_raster(image)
    height, width = image.shape[:2]
    mask = masking.build_grid_mask(height, width, spec)

    planes: list[np.ndarray] = []
    fractions: list[float] = []
    residues: list[float] = []
    spectra: list[np.ndarray] = []
    for channel in images.iter_channels(image):
        quantized, fraction, imag_rel, masked = _remove_channel(channel, mask)
        planes.append(quantized)
        fractions.append(fraction)
        residues.append(imag_rel)
        if keep_spectra:
            spectra.append(masked)
    return RemovalResult(
        image=images.stack_channels(planes, image.ndim),
        max_imag_residue=max(residues),
        masked_energy_fraction=tuple(fractions),
        masked_spectra=tuple(spectra) if keep_spectra else None,
    )


def _process_one(job: tuple[str, str, str, masking.GridSpec, bool]) -> BatchRecord:
    in_root, out_root, rel, spec, allow_lossy = job
    source = Path(in_root) / rel
    rel_posix = PurePosixPath(Path(rel)).as_posix()
    try:
        image = images.load_image(source, allow_lossy=allow_lossy)
    except (ValueError, UnidentifiedImageError) as err:
        return BatchRecord(path=rel_posix, skipped_reason=str(err))
    except OSError as err:
        return BatchRecord(
            path=rel_posix, skipped_reason=f"read failed: {err}", io_failure=True
        )
    try:
        result = remove_peaks(image, spec)
    except ValueError as err:
        return BatchRecord(path=rel_posix, skipped_reason=str(err))
    target = (Path(out_root) / rel).with_suffix(".png")
    try:
        images.save_image_atomic(result.image, target)
    except OSError as err:
        return BatchRecord(
            path=rel_posix, skipped_reason=f"write failed: {err}", io_failure=True
        )
    return BatchRecord(
        path=rel_posix,
        channels=images.channel_count(result.image),
        masked_energy_fraction_mean=float(np.mean(result.masked_energy_fraction)),
        max_imag_residue=result.max_imag_residue,
    )


def remove_peaks_batch(
    input_dir: str | os.PathLike,
    output_dir: str | os.PathLike,
    spec: masking.GridSpec,
    workers: int = 1,
    allow_lossy: bool = False,
) -> list[BatchRecord]:
    """Clean every image under ``input_dir``, mirroring paths as PNG.

    Undecodable or undersized inputs become skip records; OS-level read or
    write failures are recorded with ``io_failure`` set so callers can fail
    the run while still processing the rest. Record order follows the sorted
    input listing regardless of worker count.
    """
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    input_dir = Path(input_dir)
    paths = images.list_images(input_dir, allow_lossy=allow_lossy)
    jobs = [
        (str(input_dir), str(output_dir), str(p.relative_to(input_dir)), spec, allow_lossy)
        for p in paths
    ]
    if workers == 1:
        return [_process_one(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_process_one, jobs))


def write_summary_csv(
    records: list[BatchRecord], path: str | os.PathLike, allow_lossy: bool = False
) -> None:
    """Write one row per batch record; lossy runs are watermarked up front."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as handle:
        if allow_lossy:
            handle.write("# allow_lossy: JPEG inputs were decoded before processing\n")
        writer = csv.writer(handle)
        writer.writerow(
            ["path", "channels", "masked_energy_fraction_mean", "max_imag_residue", "skipped_reason"]
        )
        for record in records:
            writer.writerow(
                [
                    record.path,
                    "" if record.channels is None else record.channels,
                    ""
                    if record.masked_energy_fraction_mean is None
                    else repr(record.masked_energy_fraction_mean),
                    "" if record.max_imag_residue is None else repr(record.max_imag_residue),
                    record.skipped_reason or "",
                ]
            )

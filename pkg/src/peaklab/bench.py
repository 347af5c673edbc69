"""Synthetic periodic-artifact injection and before/after-removal evaluation.

The injector plants controlled peaks on the harmonic grid of a chosen period,
giving a corpus where ground truth is known by construction. The experiment
runner then measures how the detector's true-positive rate moves when the
peaks are removed, which is the effect the whole pipeline exists to quantify.
"""

from __future__ import annotations

import configparser
import json
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import detector as detector_mod
from . import images, masking, removal

MAX_COMB_PAIRS = 64
RESAMPLE_BLEND = 0.5
RESAMPLE_OVERLAP_GAIN = 0.25

INJECTION_MODES = ("cosine_comb", "resample_grid")


@dataclass(frozen=True)
class InjectionSpec:
    """How to plant periodic peaks.

    ``cosine_comb`` adds a deterministic sum of cosines at harmonic frequency
    pairs of ``period`` with phases drawn from ``phase_seed``; ``amplitude``
    is the peak absolute pixel change. ``resample_grid`` emulates an upscaler
    instead: box-average downsample by ``period``, nearest-neighbor upsample
    with a small gain on block-boundary rows and columns (the overlap
    signature real upsamplers leave), then a 50/50 blend with the original;
    it uses neither ``amplitude`` nor the phases. ``exclude_period`` drops
    comb pairs whose row or column falls on that period's harmonics, leaving
    only frequencies a mask for the excluded period would not touch.
    """

    period: int
    amplitude: float
    phase_seed: int = 0
    mode: str = "cosine_comb"
    exclude_period: int | None = None

    def __post_init__(self) -> None:
        if int(self.period) != self.period or self.period < 2:
            raise ValueError(f"period must be an integer >= 2, got {self.period}")
        if not self.amplitude > 0:
            raise ValueError(f"amplitude must be positive, got {self.amplitude}")
        if self.mode not in INJECTION_MODES:
            raise ValueError(f"mode must be one of {INJECTION_MODES}, got {self.mode!r}")
        if self.exclude_period is not None and self.exclude_period < 2:
            raise ValueError(f"exclude_period must be >= 2, got {self.exclude_period}")


def comb_frequency_pairs(height: int, width: int, spec: InjectionSpec) -> list[tuple[int, int]]:
    """Frequency pairs the cosine comb will occupy, one per conjugate pair.

    Pairs come from the product of the per-axis harmonic bins with DC and
    Nyquist rows/columns excluded, de-duplicated so that of (k1, k2) and its
    conjugate mirror only the lexicographically smaller one is kept. More
    than MAX_COMB_PAIRS candidates are subsampled with the seeded generator.
    """
    rows = masking.grid_bins(height, spec.period)
    cols = masking.grid_bins(width, spec.period)
    excluded_rows: set[int] = set()
    excluded_cols: set[int] = set()
    if spec.exclude_period is not None:
        excluded_rows = set(masking.grid_bins(height, spec.exclude_period).tolist())
        excluded_cols = set(masking.grid_bins(width, spec.exclude_period).tolist())

    pairs: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for k1 in rows.tolist():
        if k1 == 0 or 2 * k1 == height:
            continue
        for k2 in cols.tolist():
            if k2 == 0 or 2 * k2 == width:
                continue
            if k1 in excluded_rows or k2 in excluded_cols:
                continue
            mirror = ((height - k1) % height, (width - k2) % width)
            canonical = min((k1, k2), mirror)
            if canonical in seen:
                continue
            seen.add(canonical)
            pairs.append((k1, k2))
    if len(pairs) > MAX_COMB_PAIRS:
        rng = np.random.default_rng(spec.phase_seed)
        keep = np.sort(rng.choice(len(pairs), size=MAX_COMB_PAIRS, replace=False))
        pairs = [pairs[i] for i in keep]
    return pairs


def _cosine_comb_field(height: int, width: int, spec: InjectionSpec) -> np.ndarray:
    pairs = comb_frequency_pairs(height, width, spec)
    if not pairs:
        raise ValueError(
            f"no usable frequency pairs for period {spec.period} at {height}x{width}"
        )
    rng = np.random.default_rng(spec.phase_seed)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=len(pairs))
    n1 = np.arange(height, dtype=np.float64)[:, None]
    n2 = np.arange(width, dtype=np.float64)[None, :]
    field = np.zeros((height, width), dtype=np.float64)
    for (k1, k2), phase in zip(pairs, phases):
        field += np.cos(2.0 * np.pi * (k1 * n1 / height + k2 * n2 / width) + phase)
    peak = float(np.abs(field).max())
    return spec.amplitude * field / peak


def _resample_field(channel: np.ndarray, period: int) -> np.ndarray:
    height, width = channel.shape
    if height % period or width % period:
        raise ValueError(
            f"resample_grid needs the period to divide both sides;"
            f" got {height}x{width} at period {period}"
        )
    blocks = channel.reshape(height // period, period, width // period, period)
    down = blocks.mean(axis=(1, 3))
    up = np.repeat(np.repeat(down, period, axis=0), period, axis=1)
    row_gain = np.ones(height)
    col_gain = np.ones(width)
    row_gain[::period] += RESAMPLE_OVERLAP_GAIN
    col_gain[::period] += RESAMPLE_OVERLAP_GAIN
    up = up * row_gain[:, None] * col_gain[None, :]
    return RESAMPLE_BLEND * channel + (1.0 - RESAMPLE_BLEND) * up


def inject_periodic_peaks(image: np.ndarray, spec: InjectionSpec) -> np.ndarray:
    """Plant the spec's periodic pattern into every channel of an image."""
    images.validate_raster(image)
    height, width = image.shape[:2]
    if min(height, width) < 2 * spec.period:
        raise ValueError(
            f"image is {height}x{width}; injecting at period {spec.period}"
            f" needs both sides >= {2 * spec.period}"
        )
    planes: list[np.ndarray] = []
    if spec.mode == "cosine_comb":
        field = _cosine_comb_field(height, width, spec)
        for channel in images.iter_channels(image):
            planes.append(channel + field)
    else:
        for channel in images.iter_channels(image):
            planes.append(_resample_field(channel, spec.period))
    quantized = [
        np.clip(removal.round_half_up(plane), 0, 255).astype(np.uint8) for plane in planes
    ]
    return images.stack_channels(quantized, image.ndim)


def tpr_at_threshold(scores: list[float] | np.ndarray, threshold: float) -> float:
    """Fraction of scores strictly above the threshold."""
    values = np.asarray(scores, dtype=np.float64)
    if values.size == 0:
        raise ValueError("need at least one score")
    return float((values > threshold).sum() / values.size)


def relative_difference(tpr_after: float, tpr_before: float) -> float:
    """(after - before) / before; undefined at a zero baseline."""
    if tpr_before == 0:
        raise ValueError("baseline TPR is zero; relative difference is undefined")
    return (tpr_after - tpr_before) / tpr_before


@dataclass(frozen=True)
class EvalReport:
    """Everything a before/after-removal run measured, JSON-serializable."""

    threshold: float
    target_fpr: float
    n_calibration: int
    n_positive: int
    tpr_before: float
    tpr_after: float
    relative_difference: float | None
    detector: dict
    removal: dict
    injection: dict | None
    config: dict

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "target_fpr": self.target_fpr,
            "n_calibration": self.n_calibration,
            "n_positive": self.n_positive,
            "tpr_before": self.tpr_before,
            "tpr_after": self.tpr_after,
            "relative_difference": self.relative_difference,
            "detector": self.detector,
            "removal": self.removal,
            "injection": self.injection,
            "config": self.config,
        }


def write_report(report: EvalReport, path: str | os.PathLike) -> None:
    """Serialize with sorted keys and no timestamps: same run, same bytes."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")


def load_experiment_config(path: str | os.PathLike) -> configparser.ConfigParser:
    """Parse an INI experiment description; missing files are an error."""
    path = Path(path)
    if not path.is_file():
        raise ValueError(f"{path}: config file not found")
    parser = configparser.ConfigParser()
    parser.read(path)
    return parser


def _optional_number(section, key: str, cast):
    raw = section.get(key, "").strip()
    return cast(raw) if raw else None


def _synthesize_noise(count: int, height: int, width: int, mean: float, sigma: float, rng) -> list[np.ndarray]:
    corpus = []
    for _ in range(count):
        noise = rng.normal(mean, sigma, size=(height, width))
        corpus.append(np.clip(removal.round_half_up(noise), 0, 255).astype(np.uint8))
    return corpus


def _load_corpus(directory: str) -> list[tuple[str, np.ndarray]]:
    paths = images.list_images(directory)
    if not paths:
        raise ValueError(f"{directory}: no images found")
    return [(p.relative_to(directory).as_posix(), images.load_image(p)) for p in paths]


def run_experiment(config: configparser.ConfigParser, output_dir: str | os.PathLike) -> EvalReport:
    """Calibrate, score, remove, rescore; write report.json and scores.csv.

    Corpora either come from directories named in the config or are
    synthesized Gaussian-noise images (with peaks injected into the positive
    half), so the demo experiment runs from an empty checkout. Every random
    draw descends from the seeds in the config; reports carry no timestamps.
    """
    corpora = config["corpora"] if config.has_section("corpora") else {}
    det_cfg = config["detector"] if config.has_section("detector") else {}
    rem_cfg = config["removal"] if config.has_section("removal") else {}
    inj_cfg = config["injection"] if config.has_section("injection") else {}

    seed = int(corpora.get("seed", "0"))
    height = int(corpora.get("height", "256"))
    width = int(corpora.get("width", "256"))
    count_real = int(corpora.get("count_real", "32"))
    count_synthetic = int(corpora.get("count_synthetic", "32"))
    noise_mean = float(corpora.get("noise_mean", "128"))
    noise_sigma = float(corpora.get("noise_sigma", "26"))
    calibration_dir = corpora.get("calibration_dir", "").strip()
    positives_dir = corpora.get("positives_dir", "").strip()

    model = detector_mod.DetectorModel(
        period=int(det_cfg.get("period", "8")),
        sigma=float(det_cfg.get("sigma", str(detector_mod.DEFAULT_SIGMA))),
        half_size=int(det_cfg.get("half_size", str(detector_mod.DEFAULT_HALF_SIZE))),
        target_fpr=float(det_cfg.get("target_fpr", str(detector_mod.DEFAULT_TARGET_FPR))),
    )
    grid_spec = masking.GridSpec(
        period=int(rem_cfg.get("period", "8")),
        dilation_radius=_optional_number(rem_cfg, "dilation_radius", float),
        dc_guard_radius=_optional_number(rem_cfg, "dc_guard_radius", float),
    )
    injection: InjectionSpec | None = None
    if not positives_dir:
        injection = InjectionSpec(
            period=int(inj_cfg.get("period", "8")),
            amplitude=float(inj_cfg.get("amplitude", "30")),
            phase_seed=int(inj_cfg.get("phase_seed", "0")),
            mode=inj_cfg.get("mode", "cosine_comb"),
            exclude_period=_optional_number(inj_cfg, "exclude_period", int),
        )

    rng = np.random.default_rng(seed)
    if calibration_dir:
        calibration = _load_corpus(calibration_dir)
    else:
        calibration = [
            (f"calibration_{i:04d}", img)
            for i, img in enumerate(
                _synthesize_noise(count_real, height, width, noise_mean, noise_sigma, rng)
            )
        ]
    if positives_dir:
        positives = _load_corpus(positives_dir)
    else:
        bases = _synthesize_noise(count_synthetic, height, width, noise_mean, noise_sigma, rng)
        positives = [
            (f"positive_{i:04d}", inject_periodic_peaks(img, injection))
            for i, img in enumerate(bases)
        ]

    def scored(stage: str, corpus: list[tuple[str, np.ndarray]]) -> list[float]:
        values = []
        for name, img in corpus:
            try:
                values.append(detector_mod.grid_score(img, model))
            except Exception as err:
                raise RuntimeError(f"experiment step {stage!r} failed for {name}: {err}") from err
        return values

    calibration_scores = scored("score_calibration", calibration)
    threshold = detector_mod.calibrate(calibration_scores, target_fpr=model.target_fpr)
    calibrated = detector_mod.calibrate_model(model, calibration_scores)

    before_scores = scored("score_before_removal", positives)
    cleaned = []
    for name, img in positives:
        try:
            cleaned.append((name, removal.remove_peaks(img, grid_spec).image))
        except Exception as err:
            raise RuntimeError(f"experiment step 'remove_peaks' failed for {name}: {err}") from err
    after_scores = scored("score_after_removal", cleaned)

    tpr_before = tpr_at_threshold(before_scores, threshold)
    tpr_after = tpr_at_threshold(after_scores, threshold)
    rel = relative_difference(tpr_after, tpr_before) if tpr_before > 0 else None

    report = EvalReport(
        threshold=threshold,
        target_fpr=model.target_fpr,
        n_calibration=len(calibration_scores),
        n_positive=len(positives),
        tpr_before=tpr_before,
        tpr_after=tpr_after,
        relative_difference=rel,
        detector={
            "period": model.period,
            "sigma": model.sigma,
            "half_size": model.half_size,
        },
        removal={
            "period": grid_spec.period,
            "dilation_radius": grid_spec.dilation_radius,
            "dc_guard_radius": grid_spec.dc_guard_radius,
        },
        injection=None
        if injection is None
        else {
            "mode": injection.mode,
            "period": injection.period,
            "amplitude": injection.amplitude,
            "phase_seed": injection.phase_seed,
            "exclude_period": injection.exclude_period,
        },
        config={name: dict(config.items(name)) for name in config.sections()},
    )

    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    write_report(report, output_dir / "report.json")
    rows = []
    for (name, _), score in zip(calibration, calibration_scores):
        rows.append((f"calibration/{name}", score, detector_mod.classify(score, calibrated)))
    for (name, _), score in zip(positives, before_scores):
        rows.append((f"before_removal/{name}", score, detector_mod.classify(score, calibrated)))
    for (name, _), score in zip(cleaned, after_scores):
        rows.append((f"after_removal/{name}", score, detector_mod.classify(score, calibrated)))
    detector_mod.write_scores_csv(rows, output_dir / "scores.csv")
    return report

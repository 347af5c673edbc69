"""Command-line front end: removal, masks, spectra, injection, detection, evaluation."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import bench, detector, images, masking, removal, spectral


def _period(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"period must be >= 2, got {text!r}") from None
    if value < 2:
        raise argparse.ArgumentTypeError("period must be >= 2")
    return value


def _nonnegative(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError("radius must be >= 0")
    return value


def _stretch_to_u8(matrix: np.ndarray) -> np.ndarray:
    low, high = float(matrix.min()), float(matrix.max())
    if high > low:
        scaled = (matrix - low) / (high - low) * 255.0
    else:
        scaled = np.zeros_like(matrix)
    return np.clip(np.floor(scaled + 0.5), 0, 255).astype(np.uint8)


def _grid_spec(args) -> masking.GridSpec:
    return masking.GridSpec(
        period=args.period,
        dilation_radius=args.dilate_radius,
        dc_guard_radius=args.dc_radius,
    )


def _cmd_remove_peaks(args) -> int:
    records = removal.remove_peaks_batch(
        args.input_dir,
        args.output_dir,
        _grid_spec(args),
        workers=args.workers,
        allow_lossy=args.allow_lossy,
    )
    removal.write_summary_csv(
        records, Path(args.output_dir) / "summary.csv", allow_lossy=args.allow_lossy
    )
    failures = [r for r in records if r.io_failure]
    skips = [r for r in records if r.skipped_reason and not r.io_failure]
    for record in skips:
        print(f"skipped {record.path}: {record.skipped_reason}", file=sys.stderr)
    for record in failures:
        print(f"failed {record.path}: {record.skipped_reason}", file=sys.stderr)
    processed = len(records) - len(failures) - len(skips)
    print(f"processed {processed}, skipped {len(skips)}, failed {len(failures)}")
    return 1 if failures else 0


def _cmd_mask(args) -> int:
    mask = masking.build_grid_mask(args.height, args.width, _grid_spec(args))
    images.save_image_atomic((mask * 255).astype(np.uint8), args.out)
    print(f"wrote {args.out} ({int((mask == 0).sum())} removed bins)")
    return 0


def _collect_inputs(path: str, allow_lossy: bool = False) -> list[Path]:
    source = Path(path)
    if source.is_dir():
        found = images.list_images(source, allow_lossy=allow_lossy)
        if not found:
            raise ValueError(f"{source}: no images found")
        return found
    return [source]


def _cmd_spectrum(args) -> int:
    paths = _collect_inputs(args.input)
    if args.average:
        corpus = [images.load_image(p) for p in paths]
        rendered = spectral.average_power_spectrum(
            corpus,
            use_residual=args.residual,
            sigma=args.sigma,
            half_size=args.half_size,
            floor=args.floor,
            magnitude=args.magnitude,
        )
        images.save_image_atomic(_stretch_to_u8(rendered), args.out)
        print(f"wrote {args.out} (average of {len(corpus)} spectra)")
        return 0
    out = Path(args.out)
    single = len(paths) == 1 and not out.is_dir() and out.suffix.lower() == ".png"
    for path in paths:
        image = images.load_image(path)
        plane = images.channel_mean(image)
        if args.residual:
            kernel = detector.make_log_kernel(sigma=args.sigma, half_size=args.half_size)
            plane = detector.residual_matrix(plane, kernel)
        rendered = spectral.log_magnitude(spectral.dft_forward(plane), floor=args.floor)
        target = out if single else out / f"{path.stem}_spectrum.png"
        images.save_image_atomic(_stretch_to_u8(rendered), target)
        print(f"wrote {target}")
    return 0


def _cmd_inject(args) -> int:
    spec = bench.InjectionSpec(
        period=args.period,
        amplitude=args.amplitude,
        phase_seed=args.seed,
        mode=args.mode,
        exclude_period=args.exclude_period,
    )
    paths = images.list_images(args.input_dir)
    if not paths:
        raise ValueError(f"{args.input_dir}: no images found")
    out_root = Path(args.output_dir)
    for path in paths:
        rel = path.relative_to(args.input_dir).with_suffix(".png")
        injected = bench.inject_periodic_peaks(images.load_image(path), spec)
        images.save_image_atomic(injected, out_root / rel)
    print(f"injected {len(paths)} images into {out_root}")
    return 0


def _scores_for_dir(directory: str, model: detector.DetectorModel) -> list[tuple[str, float]]:
    paths = images.list_images(directory)
    if not paths:
        raise ValueError(f"{directory}: no images found")
    root = Path(directory)
    return [
        (p.relative_to(root).as_posix(), detector.grid_score(images.load_image(p), model))
        for p in paths
    ]


def _cmd_calibrate(args) -> int:
    model = detector.DetectorModel(
        period=args.period,
        sigma=args.sigma,
        half_size=args.half_size,
        target_fpr=args.fpr,
    )
    scores = [score for _, score in _scores_for_dir(args.input_dir, model)]
    calibrated = detector.calibrate_model(model, scores)
    detector.save_model(calibrated, args.out)
    print(
        f"calibrated on {calibrated.n_calibration} images:"
        f" threshold {calibrated.threshold!r} at target FPR {calibrated.target_fpr}"
    )
    return 0


def _cmd_score(args) -> int:
    model = detector.load_model(args.model)
    records = []
    for name, score in _scores_for_dir(args.input_dir, model):
        label = detector.classify(score, model) if model.threshold is not None else ""
        records.append((name, score, label))
    detector.write_scores_csv(records, args.out)
    print(f"scored {len(records)} images into {args.out}")
    return 0


def _cmd_classify(args) -> int:
    model = detector.load_model(args.model)
    for path in args.paths:
        score = detector.grid_score(images.load_image(path), model)
        print(f"{path}\t{detector.classify(score, model)}\t{score!r}")
    return 0


def _cmd_evaluate(args) -> int:
    config = bench.load_experiment_config(args.config)
    report = bench.run_experiment(config, args.out)
    rel = "--" if report.relative_difference is None else f"{report.relative_difference:+.4f}"
    print(f"threshold {report.threshold!r} (target FPR {report.target_fpr})")
    print(f"TPR before removal {report.tpr_before:.4f}")
    print(f"TPR after removal  {report.tpr_after:.4f}")
    print(f"relative difference {rel}")
    print(f"report written to {Path(args.out) / 'report.json'}")
    return 0


def _add_grid_flags(sub) -> None:
    sub.add_argument("--period", type=_period, default=8, help="grid period in pixels")
    sub.add_argument(
        "--dilate-radius",
        type=_nonnegative,
        default=None,
        help="peak dilation radius in bins (default: 3 per 1024 px, min 1)",
    )
    sub.add_argument(
        "--dc-radius",
        type=_nonnegative,
        default=None,
        help="radius around DC to keep (default: 3 per 1024 px, min 1)",
    )


def _add_detector_flags(sub) -> None:
    sub.add_argument("--period", type=_period, default=8, choices=detector.SUPPORTED_PERIODS)
    sub.add_argument("--sigma", type=float, default=detector.DEFAULT_SIGMA)
    sub.add_argument("--half-size", type=int, default=detector.DEFAULT_HALF_SIZE)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="peaklab",
        description="Remove, render, plant, and detect periodic spectral peaks in images.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    remove = commands.add_parser("remove-peaks", help="null grid peaks in a directory of images")
    remove.add_argument("input_dir")
    remove.add_argument("output_dir")
    _add_grid_flags(remove)
    remove.add_argument("--workers", type=int, default=1)
    remove.add_argument("--allow-lossy", action="store_true", help="also decode JPEG inputs")
    remove.set_defaults(func=_cmd_remove_peaks)

    mask = commands.add_parser("mask", help="render a grid mask as a PNG (white = keep)")
    mask.add_argument("--height", type=int, required=True)
    mask.add_argument("--width", type=int, required=True)
    _add_grid_flags(mask)
    mask.add_argument("--out", required=True)
    mask.set_defaults(func=_cmd_mask)

    spectrum = commands.add_parser("spectrum", help="render log-magnitude spectra")
    spectrum.add_argument("input", help="an image file or a directory of images")
    spectrum.add_argument("--out", required=True, help="output PNG, or a directory without --average")
    spectrum.add_argument("--average", action="store_true", help="average the corpus spectra")
    spectrum.add_argument("--residual", action="store_true", help="high-pass filter first")
    spectrum.add_argument("--magnitude", action="store_true", help="average |X| instead of |X|^2")
    spectrum.add_argument("--sigma", type=float, default=detector.DEFAULT_SIGMA)
    spectrum.add_argument("--half-size", type=int, default=detector.DEFAULT_HALF_SIZE)
    spectrum.add_argument("--floor", type=float, default=spectral.DEFAULT_LOG_FLOOR)
    spectrum.set_defaults(func=_cmd_spectrum)

    inject = commands.add_parser("inject", help="plant synthetic periodic peaks")
    inject.add_argument("input_dir")
    inject.add_argument("output_dir")
    inject.add_argument("--period", type=_period, default=8)
    inject.add_argument("--amplitude", type=float, default=30.0)
    inject.add_argument("--seed", type=int, default=0, help="drives phases and pair subsampling")
    inject.add_argument("--mode", choices=bench.INJECTION_MODES, default="cosine_comb")
    inject.add_argument("--exclude-period", type=_period, default=None)
    inject.set_defaults(func=_cmd_inject)

    calibrate = commands.add_parser("calibrate", help="fit a decision threshold on real images")
    calibrate.add_argument("input_dir")
    _add_detector_flags(calibrate)
    calibrate.add_argument("--fpr", type=float, default=detector.DEFAULT_TARGET_FPR)
    calibrate.add_argument("--out", required=True, help="where to write the model JSON")
    calibrate.set_defaults(func=_cmd_calibrate)

    score = commands.add_parser("score", help="score a directory with a saved model")
    score.add_argument("input_dir")
    score.add_argument("--model", required=True)
    score.add_argument("--out", required=True, help="where to write the scores CSV")
    score.set_defaults(func=_cmd_score)

    classify = commands.add_parser("classify", help="label individual images")
    classify.add_argument("paths", nargs="+")
    classify.add_argument("--model", required=True)
    classify.set_defaults(func=_cmd_classify)

    evaluate = commands.add_parser("evaluate", help="run a before/after-removal experiment")
    evaluate.add_argument("--config", required=True)
    evaluate.add_argument("--out", required=True, help="directory for report.json and scores.csv")
    evaluate.set_defaults(func=_cmd_evaluate)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, RuntimeError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

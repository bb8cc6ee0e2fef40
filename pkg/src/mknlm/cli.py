"""Command line entry point: ``mknlm {denoise,bench,calibrate,metrics}``.

Errors print one line to stderr, ``error=<ExceptionType> message=<text>``,
and exit with status 1 (2 for usage errors from argparse).
"""

import argparse
import dataclasses
import json
import logging
import pathlib
import sys

from . import bench
from .image import residual, residual_display
from .io import load_image, save_image
from .metrics import rmse, ssim
from .nlm import FULL_IMAGE, CenterWeight
from .noise import NoiseSpec, add_gaussian_noise

CENTER_WEIGHT_CHOICES = {"literal": CenterWeight.LITERAL, "max": CenterWeight.MAX_OF_OTHERS}


def _add_filter_flags(p, with_filter=True):
    if with_filter:
        p.add_argument("--filter", choices=sorted(bench.FILTERS), default="mknlm")
    p.add_argument("--h", type=float, help="smoothing parameter in gray levels")
    p.add_argument("--patch-side", type=int, default=3)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--search-radius", type=int, default=bench.DEFAULT_SEARCH_RADIUS)
    g.add_argument("--full-search", action="store_true", help="compare against every pixel")
    p.add_argument("--center-weight", choices=sorted(CENTER_WEIGHT_CHOICES), default="literal")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mknlm", description="NLM / MK-NLM denoising benchmark")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("denoise", help="denoise one image with one filter")
    p.add_argument("--image", required=True)
    p.add_argument("--out", required=True, help="output PGM/PNG path")
    p.add_argument("--noise-level", type=float,
                   help="add Gaussian noise of this fraction of 255 first (image is then the clean reference)")
    p.add_argument("--seed", type=int, default=bench.DEFAULT_SEED)
    p.add_argument("--emit-residuals", action="store_true",
                   help="with --noise-level, also write <out>_residual and <out>_noisy")
    _add_filter_flags(p)

    p = sub.add_parser("bench", help="run a full experiment from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--image", action="append", metavar="ID=PATH",
                   help="replace the configured images (repeatable)")
    p.add_argument("--filter", action="append", metavar="ID",
                   help="only run these configured filter ids (repeatable)")
    p.add_argument("--noise-level", type=float, action="append", help="replace noise levels (repeatable)")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("--emit-residuals", action="store_true")
    p.add_argument("--format", choices=("csv", "md"), default="csv", help="table printed to stdout")
    p.add_argument("--h", type=float, help="fixed h for every filter")
    p.add_argument("--patch-side", type=int)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--search-radius", type=int)
    g.add_argument("--full-search", action="store_true")
    p.add_argument("--center-weight", choices=sorted(CENTER_WEIGHT_CHOICES))

    p = sub.add_parser("calibrate", help="grid-search h/sigma against a clean image")
    p.add_argument("--image", required=True)
    p.add_argument("--noise-level", type=float, action="append", required=True)
    p.add_argument("--seed", type=int, default=bench.DEFAULT_SEED)
    p.add_argument("--grid", help="comma separated h/sigma ratios (default: per-filter grid)")
    p.add_argument("--image-size", type=int, default=bench.DEFAULT_IMAGE_SIZE)
    _add_filter_flags(p)

    p = sub.add_parser("metrics", help="RMSE and SSIM of an image against a reference")
    p.add_argument("--image", required=True)
    p.add_argument("--reference", required=True)
    return parser


def _params_from_args(args, h):
    setup = bench.FilterSetup(
        filter_id=args.filter, kind=args.filter, patch_side=args.patch_side,
        search_radius=FULL_IMAGE if args.full_search else args.search_radius,
        center_weight=CENTER_WEIGHT_CHOICES[args.center_weight],
    )
    return setup.params(h)


def cmd_denoise(args):
    img = load_image(args.image)
    clean = None
    if args.noise_level is not None:
        clean = img
        img = add_gaussian_noise(clean, NoiseSpec(args.noise_level, args.seed))
    if args.h is not None:
        h = args.h
    elif args.noise_level is not None:
        h = bench.default_h_factor(args.filter, args.noise_level) * args.noise_level * 255.0
    else:
        raise bench.InvalidParameter("--h is required when --noise-level is not given")
    out = bench.run_filter(args.filter, img, _params_from_args(args, h))
    save_image(out, args.out)
    result = {"out": args.out, "filter": args.filter, "h": h}
    if clean is not None:
        result.update(rmse=rmse(out, clean), ssim=ssim(out, clean), noisy_rmse=rmse(img, clean))
        if args.emit_residuals:
            stem = pathlib.Path(args.out)
            save_image(residual_display(residual(out, clean)), stem.with_name(stem.stem + "_residual" + stem.suffix))
            save_image(img, stem.with_name(stem.stem + "_noisy" + stem.suffix))
    print(json.dumps(result))


def cmd_bench(args):
    cfg = bench.load_config(args.config)
    if args.image:
        cfg.images = [tuple(spec.split("=", 1)) if "=" in spec else (pathlib.Path(spec).stem, spec)
                      for spec in args.image]
    if args.filter:
        known = {f.filter_id: f for f in cfg.filters}
        missing = [f for f in args.filter if f not in known]
        if missing:
            raise bench.InvalidParameter(f"filters {missing} not in config {sorted(known)}")
        cfg.filters = [known[f] for f in args.filter]
    overrides = {}
    if args.h is not None:
        overrides["h"] = args.h
    if args.patch_side is not None:
        overrides["patch_side"] = args.patch_side
    if args.full_search:
        overrides["search_radius"] = FULL_IMAGE
    elif args.search_radius is not None:
        overrides["search_radius"] = args.search_radius
    if args.center_weight:
        overrides["center_weight"] = CENTER_WEIGHT_CHOICES[args.center_weight]
    if overrides:
        cfg.filters = [dataclasses.replace(f, **overrides) for f in cfg.filters]
    if args.noise_level:
        cfg.noise_levels = tuple(args.noise_level)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out:
        cfg.output_dir = args.out
    if args.emit_residuals:
        cfg.emit_residuals = True
    cfg.__post_init__()
    table = bench.run_experiment(cfg)
    sys.stdout.write(table.to_csv() if args.format == "csv" else table.to_markdown())


def cmd_calibrate(args):
    clean = bench.load_clean(args.image, args.image_size)
    grid = bench._floats(args.grid) if args.grid else bench.CALIBRATION_GRIDS[args.filter]
    base = _params_from_args(args, 1.0)
    for level in args.noise_level:
        noisy = add_gaussian_noise(clean, NoiseSpec(level, args.seed))
        scores = bench.calibration_scores(clean, noisy, level, args.filter, grid, base)
        best = bench.best_factor(grid, scores)
        print(json.dumps({
            "filter": args.filter, "noise_level": level, "seed": args.seed,
            "best_h_factor": best, "best_h": best * level * 255.0,
            "grid": list(grid), "rmse": [round(s, 6) for s in scores],
        }))


def cmd_metrics(args):
    a, b = load_image(args.image), load_image(args.reference)
    print(json.dumps({"rmse": rmse(a, b), "ssim": ssim(a, b)}))


COMMANDS = {"denoise": cmd_denoise, "bench": cmd_bench, "calibrate": cmd_calibrate, "metrics": cmd_metrics}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except Exception as exc:  # noqa: BLE001 - single-line error contract
        message = str(exc).replace("\n", " ")
        print(f"error={type(exc).__name__} message={json.dumps(message)}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

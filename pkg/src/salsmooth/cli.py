"""Command-line entry point: ``salsmooth {run,summarize,mask,smooth}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .bench.config import load_config
from .bench.records import read_records
from .bench.runner import run_matrix
from .bench.summary import summarize, write_figure_datasets
from .composite import composite_smooth
from .imagery import load_image, save_image
from .kernels import KernelBank, KernelSpec, convolve_uniform
from .masks import (
    BoxAnnotation,
    effective_kernel_width,
    load_mask,
    make_box_mask,
    make_grid_mask,
    make_half_mask,
    make_perlin_mask,
    resample_mask,
    save_mask,
)

log = logging.getLogger("salsmooth")


def _cmd_run(args) -> int:
    cfg = load_config(args.config, seed=args.seed, workers=args.workers)
    records = run_matrix(cfg)
    print(f"{len(records)} records written to {Path(cfg.output_dir) / 'records.csv'}")
    return 0


def _cmd_summarize(args) -> int:
    records = read_records(args.records)
    fields = [f.strip() for f in args.group_by.split(",") if f.strip()]
    table = summarize(records, fields)
    if args.out:
        table.to_csv(args.out, index=False)
    else:
        print(table.to_csv(index=False), end="")
    if args.figures:
        for path in write_figure_datasets(records, args.figures):
            log.info("wrote %s", path)
    return 0


def _mask_dims(args):
    if args.like:
        img = load_image(args.like)
        return img.width, img.height
    if args.width is None or args.height is None:
        raise SystemExit("mask: give --width and --height, or --like IMAGE")
    return args.width, args.height


def _cmd_mask(args) -> int:
    w, h = _mask_dims(args)
    if args.type == "half":
        mask = make_half_mask(w, h)
    elif args.type == "grid":
        mask = make_grid_mask(w, h)
    elif args.type == "perlin":
        mask = make_perlin_mask(w, h, seed=args.seed, octaves=args.octaves)
    else:
        boxes = json.loads(Path(args.boxes).read_text()) if args.boxes else []
        mask = make_box_mask(w, h, BoxAnnotation(tuple(map(tuple, boxes)), args.dilation),
                             inside=args.inside)
    save_mask(mask, args.out)
    print(f"{args.type} mask {w}x{h} levels={list(mask.level_set)} "
          f"K_e={effective_kernel_width(mask):.4f} -> {args.out}")
    return 0


def _cmd_smooth(args) -> int:
    img = load_image(args.image)
    if args.width is not None:
        out = convolve_uniform(img, KernelSpec.for_width(args.width, args.sigma_rule))
    else:
        if not args.mask:
            raise SystemExit("smooth: give --mask PATH or --width K")
        mask = resample_mask(load_mask(args.mask), img.width, img.height)
        out = composite_smooth(img, mask, KernelBank(), args.sigma_rule, workers=args.workers)
    size = save_image(out, args.out)
    print(f"wrote {args.out} ({size} bytes, {8 * size / (img.width * img.height):.4f} bpp)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="salsmooth", description=__doc__)
    parser.add_argument("--workers", type=int, default=None, help="worker threads")
    parser.add_argument("--seed", type=int, default=None, help="override the run seed")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute a benchmark config")
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("summarize", help="group records and emit plot-ready tables")
    p.add_argument("--records", required=True)
    p.add_argument("--group-by", required=True, help="comma-separated fields")
    p.add_argument("--out", help="summary CSV (default: stdout)")
    p.add_argument("--figures", help="directory for per-figure CSV datasets")
    p.set_defaults(func=_cmd_summarize)

    p = sub.add_parser("mask", help="generate a saliency mask")
    p.add_argument("--type", required=True, choices=["half", "grid", "perlin", "box"])
    p.add_argument("--out", required=True)
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--like", help="take dimensions from this image")
    p.add_argument("--octaves", type=int, default=3)
    p.add_argument("--boxes", help="JSON file with a list of [x, y, w, h]")
    p.add_argument("--dilation", type=float, default=0.5)
    p.add_argument("--inside", type=float, default=0.8)
    p.set_defaults(func=_cmd_mask)

    p = sub.add_parser("smooth", help="smooth one image with a mask or a uniform width")
    p.add_argument("--image", required=True)
    p.add_argument("--mask")
    p.add_argument("--width", type=int, help="uniform kernel width instead of a mask")
    p.add_argument("--sigma-rule", default="default")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_smooth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "mask" and args.seed is None:
        args.seed = 0
    if args.command == "smooth" and args.workers is None:
        args.workers = 1
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

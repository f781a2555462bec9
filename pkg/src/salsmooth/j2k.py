"""Minimal JPEG2000 command-line tool backed by Pillow/OpenJPEG.

Usage::

    python -m salsmooth.j2k encode INPUT OUTPUT RATE
    python -m salsmooth.j2k decode INPUT OUTPUT

``RATE`` is the target compression ratio; 1 means lossless.
"""

from __future__ import annotations

import argparse
import sys

from PIL import Image, features


def available() -> bool:
    return bool(features.check("jpg_2000"))


def encode(src: str, dst: str, rate: float) -> None:
    with Image.open(src) as im:
        im.load()
        im.save(
            dst,
            format="JPEG2000",
            quality_mode="rates",
            quality_layers=[float(rate)],
            irreversible=False,
        )


def decode(src: str, dst: str) -> None:
    with Image.open(src) as im:
        im.load()
        im.save(dst, format="PNG")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="python -m salsmooth.j2k")
    sub = parser.add_subparsers(dest="cmd", required=True)
    enc = sub.add_parser("encode")
    enc.add_argument("input")
    enc.add_argument("output")
    enc.add_argument("rate", type=float)
    dec = sub.add_parser("decode")
    dec.add_argument("input")
    dec.add_argument("output")
    args = parser.parse_args(argv)
    if not available():
        print("Pillow was built without JPEG2000 (OpenJPEG) support", file=sys.stderr)
        return 2
    if args.cmd == "encode":
        if args.rate < 1:
            print("rate must be >= 1", file=sys.stderr)
            return 2
        encode(args.input, args.output, args.rate)
    else:
        decode(args.input, args.output)
    return 0


if __name__ == "__main__":
    sys.exit(main())

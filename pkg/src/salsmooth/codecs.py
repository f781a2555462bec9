"""Encoder adapters: built-in lossless PNG plus external command templates."""

from __future__ import annotations

import enum
import hashlib
import logging
import os
import shlex
import shutil
import subprocess
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path
from string import Formatter

from .imagery import ImageBuffer, load_image, save_image

logger = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 300.0  # seconds per image


class EncoderError(RuntimeError):
    """One encode/decode call failed; the caller records it and moves on."""


class EncoderUnavailable(EncoderError):
    """The adapter's executable cannot be found."""


class DimensionMismatch(EncoderError):
    pass


class ParamKind(str, enum.Enum):
    QUALITY = "quality"
    RATE = "rate"


_ENCODE_FIELDS = {"input", "output", "param"}
_DECODE_FIELDS = {"input", "output"}
_OPTIONAL_FIELDS = {"python"}


def _fields(template: str) -> set[str]:
    return {name for _, name, _, _ in Formatter().parse(template) if name}


@dataclass(frozen=True)
class EncoderAdapter:
    """How to run one codec.

    Templates are command lines with ``{input}``, ``{output}`` and (encode only)
    ``{param}`` placeholders; ``{python}`` expands to the running interpreter.
    The built-in lossless adapter has no templates.
    """

    name: str
    encode_template: str | None = None
    decode_template: str | None = None
    param_kind: ParamKind = ParamKind.QUALITY
    param_range: tuple[float, float] = (0.0, 100.0)
    suffix: str = ".bin"
    timeout: float = DEFAULT_TIMEOUT
    deterministic: bool = True

    def __post_init__(self):
        object.__setattr__(self, "param_kind", ParamKind(self.param_kind))
        lo, hi = (float(v) for v in self.param_range)
        if lo > hi:
            raise ValueError(f"{self.name}: empty param_range {self.param_range}")
        if self.param_kind is ParamKind.QUALITY and (lo < 0 or hi > 100):
            raise ValueError(f"{self.name}: quality range must lie within [0, 100]")
        if self.param_kind is ParamKind.RATE and lo < 1:
            raise ValueError(f"{self.name}: rate range must start at >= 1")
        object.__setattr__(self, "param_range", (lo, hi))
        if self.builtin:
            return
        if self.encode_template is None or self.decode_template is None:
            raise ValueError(f"{self.name}: external adapters need encode and decode templates")
        for template, required in (
            (self.encode_template, _ENCODE_FIELDS),
            (self.decode_template, _DECODE_FIELDS),
        ):
            found = _fields(template)
            missing = required - found
            unknown = found - required - _OPTIONAL_FIELDS
            if missing:
                raise ValueError(f"{self.name}: template {template!r} lacks {sorted(missing)}")
            if unknown:
                raise ValueError(f"{self.name}: template {template!r} has unknown {sorted(unknown)}")

    @property
    def builtin(self) -> bool:
        return self.encode_template is None and self.decode_template is None

    def executable(self) -> str | None:
        if self.builtin:
            return None
        first = shlex.split(self.encode_template)[0]
        return sys.executable if first == "{python}" else first

    def available(self) -> bool:
        exe = self.executable()
        return exe is None or shutil.which(exe) is not None


LOSSLESS = EncoderAdapter(
    name="png", param_kind=ParamKind.QUALITY, param_range=(100.0, 100.0), suffix=".png"
)

PRESETS: dict[str, EncoderAdapter] = {
    "png": LOSSLESS,
    "pillow-jp2": EncoderAdapter(
        name="pillow-jp2",
        encode_template="{python} -m salsmooth.j2k encode {input} {output} {param}",
        decode_template="{python} -m salsmooth.j2k decode {input} {output}",
        param_kind=ParamKind.RATE,
        param_range=(1.0, 100.0),
        suffix=".jp2",
    ),
    "imagemagick-jp2": EncoderAdapter(
        name="imagemagick-jp2",
        encode_template="magick {input} -define jp2:rate={param} {output}",
        decode_template="magick {input} {output}",
        param_kind=ParamKind.RATE,
        param_range=(1.0, 100.0),
        suffix=".jp2",
    ),
    "imagemagick-bpg": EncoderAdapter(
        name="imagemagick-bpg",
        encode_template="magick {input} -quality {param} {output}",
        decode_template="magick {input} {output}",
        param_kind=ParamKind.QUALITY,
        param_range=(1.0, 100.0),
        suffix=".bpg",
    ),
}


@dataclass(frozen=True)
class EncodedArtifact:
    path: Path
    bytes: int
    encoder: str
    param_raw: float
    param_scaled: float


def rescale_param(param_raw: float, kind, param_range=(1.0, 100.0)) -> float:
    """Put encoder parameters on a common 0-100 "more quality" axis.

    Quality passes through. Rate is inverted linearly so rate 1 maps to 100
    and the top of ``param_range`` maps to 0.
    """
    kind = ParamKind(kind)
    lo, hi = param_range
    value = float(param_raw)
    if not lo <= value <= hi:
        raise ValueError(f"parameter {value} outside range [{lo}, {hi}]")
    if kind is ParamKind.QUALITY:
        return value
    if hi == 1.0:
        return 100.0
    return 100.0 * (hi - value) / (hi - 1.0)


def _format_param(value: float) -> str:
    return str(int(value)) if float(value).is_integer() else repr(float(value))


def _run(adapter: EncoderAdapter, template: str, **values) -> None:
    exe = adapter.executable()
    if exe is not None and shutil.which(exe) is None:
        raise EncoderUnavailable(
            f"{adapter.name}: executable {exe!r} not found on PATH; install it or "
            "remove the encoder from the run config"
        )
    quoted = {k: shlex.quote(str(v)) for k, v in values.items()}
    quoted["python"] = shlex.quote(sys.executable)
    argv = shlex.split(template.format(**quoted))
    try:
        proc = subprocess.run(
            argv, capture_output=True, text=True, timeout=adapter.timeout, check=False
        )
    except subprocess.TimeoutExpired as exc:
        raise EncoderError(f"{adapter.name}: timed out after {adapter.timeout}s") from exc
    except OSError as exc:
        raise EncoderUnavailable(f"{adapter.name}: cannot run {argv[0]!r}: {exc}") from exc
    if proc.returncode != 0:
        raise EncoderError(
            f"{adapter.name}: exit status {proc.returncode}: {proc.stderr.strip()[-500:]}"
        )


def encode(img_path, adapter: EncoderAdapter, param_raw: float, out_path=None) -> EncodedArtifact:
    """Encode the lossless raster at ``img_path`` with ``adapter``.

    ``out_path`` defaults to ``img_path`` with the adapter suffix.
    """
    img_path = Path(img_path)
    param_scaled = rescale_param(param_raw, adapter.param_kind, adapter.param_range)
    out_path = Path(out_path) if out_path is not None else img_path.with_suffix(adapter.suffix)
    if adapter.builtin:
        size = save_image(load_image(img_path), out_path)
    else:
        _run(
            adapter,
            adapter.encode_template,
            input=img_path,
            output=out_path,
            param=_format_param(param_raw),
        )
        if not out_path.exists():
            raise EncoderError(f"{adapter.name}: no output written to {out_path}")
        size = os.path.getsize(out_path)
    if size == 0:
        raise EncoderError(f"{adapter.name}: zero-byte output {out_path}")
    return EncodedArtifact(out_path, size, adapter.name, float(param_raw), param_scaled)


def decode(artifact: EncodedArtifact, adapter: EncoderAdapter, expected=None) -> ImageBuffer:
    """Decode back to pixels; ``expected`` is an optional ``(width, height)``."""
    path = Path(artifact.path)
    if not path.exists():
        raise EncoderError(f"{path}: artifact missing")
    if adapter.builtin:
        try:
            img = load_image(path)
        except (OSError, ValueError) as exc:
            raise EncoderError(f"{adapter.name}: cannot decode {path}: {exc}") from exc
    else:
        with tempfile.TemporaryDirectory() as tmp:
            out = Path(tmp) / "decoded.png"
            _run(adapter, adapter.decode_template, input=path, output=out)
            try:
                img = load_image(out)
            except (OSError, ValueError) as exc:
                raise EncoderError(f"{adapter.name}: decoded output unreadable: {exc}") from exc
    if expected is not None and (img.width, img.height) != tuple(expected):
        raise DimensionMismatch(
            f"{adapter.name}: decoded {img.width}x{img.height}, expected {expected[0]}x{expected[1]}"
        )
    return img


def encode_digest(img_path, adapter: EncoderAdapter, param_raw: float) -> str:
    """SHA-256 of the encoded bytes, written to a scratch file."""
    with tempfile.TemporaryDirectory() as tmp:
        art = encode(img_path, adapter, param_raw, Path(tmp) / f"probe{adapter.suffix}")
        return hashlib.sha256(art.path.read_bytes()).hexdigest()


def adapter_from_config(raw: dict) -> EncoderAdapter:
    """Build an adapter from a config mapping (``preset`` or explicit templates)."""
    raw = dict(raw)
    raw.pop("params", None)
    preset = raw.pop("preset", None)
    if preset is not None:
        try:
            base = PRESETS[preset]
        except KeyError:
            raise ValueError(f"unknown encoder preset {preset!r}; choose from {sorted(PRESETS)}") from None
        if not raw:
            return base
        fields = {**base.__dict__, **_rename(raw)}
        return EncoderAdapter(**fields)
    return EncoderAdapter(**_rename(raw))


def _rename(raw: dict) -> dict:
    aliases = {"encode": "encode_template", "decode": "decode_template",
               "kind": "param_kind", "range": "param_range"}
    out = {aliases.get(k, k): v for k, v in raw.items()}
    if "param_range" in out:
        out["param_range"] = tuple(out["param_range"])
    return out

"""Run configuration: the benchmark matrix read from a YAML (or JSON) file."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from ..codecs import LOSSLESS, EncoderAdapter, adapter_from_config
from ..kernels import DEFAULT_ADMISSIBLE_K, KernelBank, resolve_sigma_rule
from ..masks import (
    BoxAnnotation,
    SaliencyMask,
    load_mask,
    make_box_mask,
    make_grid_mask,
    make_half_mask,
    make_perlin_mask,
    resample_mask,
)

MASK_TYPES = ("half", "grid", "perlin", "box", "file")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class MaskSpec:
    type: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.type not in MASK_TYPES:
            raise ConfigError(f"unknown mask type {self.type!r}; choose from {MASK_TYPES}")

    @property
    def label(self) -> str:
        if self.type == "perlin":
            return f"perlin:{self.params.get('seed')}"
        if self.type == "file":
            return f"file:{Path(self.params['path']).name}"
        return self.type

    def build(self, width: int, height: int) -> SaliencyMask:
        """Generate (or load and resample) the mask at ``width`` x ``height``."""
        p = self.params
        if self.type == "half":
            return make_half_mask(width, height)
        if self.type == "grid":
            return make_grid_mask(width, height)
        if self.type == "perlin":
            return make_perlin_mask(
                width,
                height,
                seed=int(p["seed"]),
                octaves=int(p.get("octaves", 3)),
                persistence=float(p.get("persistence", 0.5)),
                lacunarity=float(p.get("lacunarity", 2.0)),
                base_cells=int(p.get("base_cells", 8)),
            )
        if self.type == "box":
            ann = BoxAnnotation(
                boxes=tuple(tuple(b) for b in p.get("boxes", ())),
                dilation=float(p.get("dilation", 0.5)),
            )
            return make_box_mask(
                width, height, ann,
                inside=float(p.get("inside", 0.8)),
                outside=float(p.get("outside", 0.0)),
            )
        return resample_mask(load_mask(p["path"]), width, height)


@dataclass(frozen=True)
class Policy:
    """``uniform`` with a list of widths, or ``saliency`` (one variant per mask)."""

    kind: str
    widths: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in ("uniform", "saliency"):
            raise ConfigError(f"unknown smoothing policy {self.kind!r}")
        if self.kind == "uniform":
            if not self.widths:
                raise ConfigError("uniform policy needs at least one width")
            if any(int(k) < 1 or int(k) % 2 == 0 for k in self.widths):
                raise ConfigError(f"uniform widths must be odd and >= 1, got {self.widths}")


@dataclass(frozen=True)
class EncoderRun:
    adapter: EncoderAdapter
    params: tuple[float, ...]


@dataclass
class RunConfig:
    input_root: Path
    output_dir: Path
    masks: list[MaskSpec]
    smoothing: list[Policy]
    encoders: list[EncoderRun]
    tile: int | None = None
    sigma_rule: str = "default"
    admissible_k: tuple[int, ...] = DEFAULT_ADMISSIBLE_K
    workers: int = 1
    seed: int = 0
    keep_images: bool = False
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def bank(self) -> KernelBank:
        return KernelBank(self.admissible_k)

    def config_hash(self) -> str:
        canon = json.dumps(self.raw, sort_keys=True, default=str)
        return hashlib.sha256(canon.encode()).hexdigest()

    def validate(self) -> None:
        if not self.input_root.is_dir():
            raise ConfigError(f"input_root {self.input_root} is not a directory")
        if not self.smoothing:
            raise ConfigError("at least one smoothing policy is required")
        if any(p.kind == "saliency" for p in self.smoothing) and not self.masks:
            raise ConfigError("saliency policy requires at least one mask")
        for m in self.masks:
            if m.type == "file" and not Path(m.params["path"]).exists():
                raise ConfigError(f"mask file {m.params['path']} does not exist")
        for enc in self.encoders:
            lo, hi = enc.adapter.param_range
            bad = [p for p in enc.params if not lo <= p <= hi]
            if bad:
                raise ConfigError(f"{enc.adapter.name}: params {bad} outside [{lo}, {hi}]")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        resolve_sigma_rule(self.sigma_rule)
        self.bank


def parse_config(raw: dict, base_dir=".", seed: int | None = None, workers: int | None = None) -> RunConfig:
    """Build a :class:`RunConfig` from a mapping; relative paths resolve against ``base_dir``."""
    base = Path(base_dir)
    raw = dict(raw)
    if seed is not None:
        raw["seed"] = seed
    if workers is not None:
        raw["workers"] = workers
    run_seed = int(raw.get("seed", 0))

    def path(value) -> Path:
        p = Path(value)
        return p if p.is_absolute() else base / p

    try:
        input_root = path(raw["input_root"])
        output_dir = path(raw.get("output_dir", "runs/latest"))
    except KeyError as exc:
        raise ConfigError(f"missing required key {exc}") from None

    masks = []
    for m in raw.get("masks", []):
        m = dict(m)
        kind = m.pop("type", None)
        if kind == "perlin":
            m.setdefault("seed", run_seed)
        if kind == "file":
            m["path"] = str(path(m["path"]))
        masks.append(MaskSpec(kind, m))

    policies = []
    for p in raw.get("smoothing", []):
        kind = p.get("policy")
        widths = tuple(int(k) for k in p.get("widths", ()))
        policies.append(Policy(kind, widths))

    encoders = [EncoderRun(LOSSLESS, (100.0,))]
    for e in raw.get("encoders", []):
        if e.get("preset") == "png" or e.get("name") == "png":
            continue
        try:
            adapter = adapter_from_config(e)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad encoder entry {e}: {exc}") from None
        params = tuple(float(v) for v in e.get("params", ()))
        if not params:
            raise ConfigError(f"encoder {adapter.name} has no params to sweep")
        encoders.append(EncoderRun(adapter, params))

    cfg = RunConfig(
        input_root=input_root,
        output_dir=output_dir,
        masks=masks,
        smoothing=policies,
        encoders=encoders,
        tile=raw.get("tile"),
        sigma_rule=raw.get("sigma_rule", "default"),
        admissible_k=tuple(raw.get("admissible_k", DEFAULT_ADMISSIBLE_K)),
        workers=int(raw.get("workers", 1)),
        seed=run_seed,
        keep_images=bool(raw.get("keep_images", False)),
        raw=raw,
    )
    cfg.validate()
    return cfg


def load_config(path, seed: int | None = None, workers: int | None = None) -> RunConfig:
    path = Path(path)
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: expected a mapping at top level")
    return parse_config(raw, base_dir=path.parent, seed=seed, workers=workers)

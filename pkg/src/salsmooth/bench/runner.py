"""Execute the benchmark matrix and persist records."""

from __future__ import annotations

import json
import logging
import platform
import shutil
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path

from ..codecs import EncoderError, decode, encode
from ..composite import composite_smooth
from ..imagery import ImageBuffer, WorkUnit, encode_png, ingest_directory, load_image
from ..kernels import KernelSpec, convolve_uniform, kernel_width_for_saliency
from ..masks import crop_mask, effective_kernel_width
from .config import ConfigError, MaskSpec, RunConfig
from .metrics import compute_bpp, compute_mse, level_fractions, mse_per_level, rate_reduction_pct
from .records import MeasurementRecord, RecordWriter, read_records

logger = logging.getLogger(__name__)

RECORDS_FILE = "records.csv"
MANIFEST_FILE = "run.json"
DATASET_FILE = "dataset.json"


@dataclass(frozen=True)
class Variant:
    """One processing of an image: a uniform width or a saliency mask."""

    policy: str
    width: int | None = None
    mask: MaskSpec | None = None

    @property
    def mask_type(self) -> str:
        return self.mask.label if self.mask is not None else "none"


def expand_variants(cfg: RunConfig) -> list[Variant]:
    out = []
    for policy in cfg.smoothing:
        if policy.kind == "uniform":
            out.extend(Variant("uniform", width=int(k)) for k in policy.widths)
        else:
            out.extend(Variant("saliency", mask=m) for m in cfg.masks)
    return out


@dataclass
class _UnitResult:
    records: list[MeasurementRecord] = field(default_factory=list)
    failures: list[dict] = field(default_factory=list)


class _UnitRunner:
    """All cells for one work unit. Holds per-unit caches only."""

    def __init__(self, cfg: RunConfig, encoders, unit: WorkUnit, workdir: Path):
        self.cfg = cfg
        self.encoders = encoders
        self.unit = unit
        self.workdir = workdir
        self.bank = cfg.bank
        self._blurs: dict[int, ImageBuffer] = {}
        self._lossless_bpp: dict[int, float] = {}
        self.result = _UnitResult()

    def fail(self, stage: str, exc: Exception, **extra) -> None:
        logger.warning("%s [%s]: %s", self.unit.unit_id, stage, exc)
        self.result.failures.append(
            {"image_id": self.unit.unit_id, "stage": stage, "error": str(exc), **extra}
        )

    def blur(self, width: int) -> ImageBuffer:
        if width not in self._blurs:
            self._blurs[width] = convolve_uniform(
                self.original, KernelSpec.for_width(width, self.cfg.sigma_rule)
            )
        return self._blurs[width]

    def lossless_bpp_at(self, width: int) -> float:
        if width not in self._lossless_bpp:
            self._lossless_bpp[width] = self.bpp(len(encode_png(self.blur(width))))
        return self._lossless_bpp[width]

    def bpp(self, nbytes: int) -> float:
        return compute_bpp(nbytes, self.original.width, self.original.height)

    def run(self) -> _UnitResult:
        u = self.unit
        try:
            parent = load_image(Path(self.cfg.input_root) / u.path)
            self.original = parent.crop(u.x, u.y, u.width, u.height)
        except (OSError, ValueError) as exc:
            self.fail("load", exc)
            return self.result
        self._blurs[1] = self.original
        bpp_orig = self.lossless_bpp_at(1)
        orig_path = self.workdir / "original.png"
        orig_path.write_bytes(encode_png(self.original))

        external = {}
        for enc in self.encoders[1:]:
            for param in enc.params:
                try:
                    art = encode(orig_path, enc.adapter, param,
                                 self.workdir / f"original_{enc.adapter.name}_{param:g}{enc.adapter.suffix}")
                    external[enc.adapter.name, param] = self.bpp(art.bytes)
                except EncoderError as exc:
                    self.fail("encode-original", exc, encoder=enc.adapter.name, param=param)

        for index, variant in enumerate(expand_variants(self.cfg)):
            try:
                self._run_variant(index, variant, bpp_orig, external)
            except (EncoderError, OSError, ValueError) as exc:
                self.fail("variant", exc, policy=variant.policy, mask_type=variant.mask_type)
        return self.result

    def _run_variant(self, index: int, variant: Variant, bpp_orig: float, external: dict) -> None:
        u = self.unit
        mask = None
        if variant.policy == "uniform":
            processed = self.blur(variant.width)
            k_eff = float(variant.width)
        else:
            full = variant.mask.build(u.parent_width, u.parent_height)
            mask = crop_mask(full, u.x, u.y, u.width, u.height)
            processed = composite_smooth(self.original, mask, self.bank, self.cfg.sigma_rule)
            k_eff = effective_kernel_width(mask, self.bank)

        png = encode_png(processed)
        if self.cfg.keep_images:
            keep = Path(self.cfg.output_dir) / "images" / _safe(u.unit_id.replace(".", "_"))
            keep.mkdir(parents=True, exist_ok=True)
            (keep / f"{index:03d}_{variant.policy}_{_safe(variant.mask_type)}_{variant.width or 0}.png").write_bytes(png)

        base = dict(image_id=u.unit_id, mask_type=variant.mask_type, policy=variant.policy,
                    kernel_width=k_eff)
        bpp_proc = self.bpp(len(png))
        per_level, fractions, bpp_levels = {}, {}, {}
        if mask is not None:
            per_level = mse_per_level(processed, self.original, mask)
            fractions = level_fractions(mask)
            bpp_levels = {
                s: self.lossless_bpp_at(kernel_width_for_saliency(s, self.bank))
                for s in mask.level_set
            }
        self.result.records.append(MeasurementRecord(
            **base, encoder="png", param_raw=None, param_scaled=None, param_anchor=None,
            bpp_original=bpp_orig, bpp_processed=bpp_proc,
            rate_reduction_pct=rate_reduction_pct(bpp_orig, bpp_proc),
            mse_global=compute_mse(processed, self.original),
            mse_per_level=per_level, bpp_per_level=bpp_levels, level_fractions=fractions,
        ))

        if not external:
            return
        proc_path = self.workdir / f"variant_{index:03d}.png"
        proc_path.write_bytes(png)
        for enc in self.encoders[1:]:
            adapter = enc.adapter
            for param in enc.params:
                if (adapter.name, param) not in external:
                    continue
                try:
                    art = encode(proc_path, adapter, param,
                                 self.workdir / f"variant_{index:03d}_{adapter.name}_{param:g}{adapter.suffix}")
                    decoded = decode(art, adapter, expected=(u.width, u.height))
                    if decoded.channels != self.original.channels:
                        raise EncoderError(
                            f"{adapter.name}: decoded {decoded.channels} channels, "
                            f"expected {self.original.channels}"
                        )
                except EncoderError as exc:
                    self.fail("encode", exc, encoder=adapter.name, param=param,
                              policy=variant.policy, mask_type=variant.mask_type)
                    continue
                b_orig = external[adapter.name, param]
                b_proc = self.bpp(art.bytes)
                self.result.records.append(MeasurementRecord(
                    **base, encoder=adapter.name, param_raw=art.param_raw,
                    param_scaled=art.param_scaled, param_anchor=adapter.param_range[1],
                    bpp_original=b_orig, bpp_processed=b_proc,
                    rate_reduction_pct=rate_reduction_pct(b_orig, b_proc),
                    mse_global=compute_mse(decoded, self.original),
                    mse_per_level=mse_per_level(decoded, self.original, mask) if mask is not None else {},
                    bpp_per_level={},
                    level_fractions=fractions,
                ))


def _safe(text: str) -> str:
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in text)


def _versions() -> dict:
    out = {"python": platform.python_version()}
    for dist in ("numpy", "pillow", "artifact"):
        try:
            out[dist] = metadata.version(dist)
        except metadata.PackageNotFoundError:
            pass
    return out


def run_matrix(cfg: RunConfig) -> list[MeasurementRecord]:
    """Run every (image, variant, encoder, param) cell and append records to CSV.

    Writes ``records.csv``, ``run.json`` and ``dataset.json`` under
    ``cfg.output_dir``. Failing cells are logged in ``run.json`` and skipped.
    """
    cfg.validate()
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    dataset = ingest_directory(cfg.input_root, cfg.tile)
    (out_dir / DATASET_FILE).write_text(dataset.to_json())
    if not dataset.units:
        raise ConfigError(f"no readable images under {cfg.input_root}")

    encoders, dropped = [], []
    for enc in cfg.encoders:
        if enc.adapter.available():
            encoders.append(enc)
        else:
            logger.warning("encoder %s unavailable (%s not found); skipping it",
                           enc.adapter.name, enc.adapter.executable())
            dropped.append(enc.adapter.name)

    records: list[MeasurementRecord] = []
    failures: list[dict] = []
    loaded = 0
    with tempfile.TemporaryDirectory(prefix="salsmooth-") as scratch, \
            RecordWriter(out_dir / RECORDS_FILE) as sink:

        def work(item):
            i, unit = item
            workdir = Path(scratch) / f"unit{i:05d}"
            workdir.mkdir()
            try:
                return _UnitRunner(cfg, encoders, unit, workdir).run()
            finally:
                shutil.rmtree(workdir, ignore_errors=True)

        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            for result in pool.map(work, enumerate(dataset.units)):
                if not any(f["stage"] == "load" for f in result.failures):
                    loaded += 1
                for rec in result.records:
                    sink.write(rec)
                records.extend(result.records)
                failures.extend(result.failures)

    manifest = {
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "config_hash": cfg.config_hash(),
        "seed": cfg.seed,
        "sigma_rule": cfg.sigma_rule,
        "admissible_k": list(cfg.admissible_k),
        "versions": _versions(),
        "encoders": [
            {"name": e.adapter.name, "encode": e.adapter.encode_template,
             "decode": e.adapter.decode_template, "kind": e.adapter.param_kind.value,
             "range": list(e.adapter.param_range), "params": list(e.params)}
            for e in encoders
        ],
        "dropped_encoders": dropped,
        "skipped_inputs": [list(s) for s in dataset.skipped],
        "failures": failures,
        "n_records": len(records),
        "records": RECORDS_FILE,
    }
    (out_dir / MANIFEST_FILE).write_text(json.dumps(manifest, indent=2, default=str))
    if loaded == 0:
        raise RuntimeError("all inputs failed; see run.json for details")
    return records


def smallest_admissible_at_least(k_eff: float, widths) -> int:
    """Smallest width in ``widths`` that is >= ``k_eff`` (largest if none)."""
    widths = sorted(widths)
    for k in widths:
        if k >= k_eff - 1e-12:
            return k
    return widths[-1]


def load_run(output_dir) -> tuple[list[MeasurementRecord], dict]:
    out = Path(output_dir)
    return read_records(out / RECORDS_FILE), json.loads((out / MANIFEST_FILE).read_text())


__all__ = ["run_matrix", "expand_variants", "Variant", "load_run", "smallest_admissible_at_least"]

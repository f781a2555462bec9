"""Grouped summaries and plot-ready datasets from measurement records."""

from __future__ import annotations

from dataclasses import asdict
from pathlib import Path

import pandas as pd

from .records import COLUMNS, MeasurementRecord

METRICS = ("bpp_original", "bpp_processed", "rate_reduction_pct", "mse_global")
EXTRA_FIELDS = ("dataset",)


def records_frame(records) -> pd.DataFrame:
    """Records (or an existing frame) as a DataFrame with a derived ``dataset`` column.

    ``dataset`` is the first path component of the image id, or ``"."`` for
    images at the input root.
    """
    if isinstance(records, pd.DataFrame):
        df = records.copy()
    else:
        df = pd.DataFrame([asdict(r) if isinstance(r, MeasurementRecord) else dict(r) for r in records],
                          columns=COLUMNS)
    path = df["image_id"].astype(str).str.split("@").str[0]
    df["dataset"] = path.map(lambda p: p.split("/")[0] if "/" in p else ".")
    return df


def summarize(records, group_by, metrics=METRICS) -> pd.DataFrame:
    """Mean, median and count of each metric per group."""
    df = records_frame(records)
    if df.empty:
        raise ValueError("no records to summarize")
    group_by = [group_by] if isinstance(group_by, str) else list(group_by)
    unknown = [g for g in group_by if g not in df.columns or g in ("mse_per_level", "bpp_per_level", "level_fractions")]
    if unknown:
        raise KeyError(f"unknown group field(s) {unknown}; choose from {COLUMNS[:8] + list(EXTRA_FIELDS)}")
    metrics = list(metrics)
    grouped = df.groupby(group_by, dropna=False, sort=True)
    out = grouped[metrics].agg(["mean", "median"])
    out.columns = [f"{m}_{stat}" for m, stat in out.columns]
    out.insert(0, "count", grouped.size())
    return out.reset_index()


def _explode_levels(df: pd.DataFrame, column: str, value_name: str) -> pd.DataFrame:
    rows = []
    for rec in df.itertuples(index=False):
        for level, value in getattr(rec, column).items():
            rows.append({
                "dataset": rec.dataset, "image_id": rec.image_id, "mask_type": rec.mask_type,
                "encoder": rec.encoder, "bpp_original": rec.bpp_original,
                "saliency": float(level), value_name: float(value),
            })
    return pd.DataFrame(rows, columns=["dataset", "image_id", "mask_type", "encoder",
                                       "bpp_original", "saliency", value_name])


def _mean(df: pd.DataFrame, keys, value) -> pd.DataFrame:
    if df.empty:
        return pd.DataFrame(columns=[*keys, "count", f"{value}_mean"])
    g = df.groupby(keys, dropna=False, sort=True)[value]
    out = g.agg(["size", "mean"]).rename(columns={"size": "count", "mean": f"{value}_mean"})
    return out.reset_index()


def figure_datasets(records) -> dict[str, pd.DataFrame]:
    """Plot-ready tables, one per results figure.

    - ``rate_vs_kernel`` / ``mse_vs_kernel``: lossless rate reduction and MSE
      against kernel width (effective width for composites).
    - ``mse_vs_saliency``: per-level MSE of composites by mask.
    - ``rate_vs_saliency``: rate reduction at each level's kernel width.
    - ``rate_by_dataset`` / ``rate_by_mask``: lossless rate reduction by group.
    - ``rate_vs_param``: rate reduction against the common 0-100 encoder axis.
    - ``rate_vs_kernel_compressed``: uniform smoothing under external encoders.
    """
    df = records_frame(records)
    lossless = df[df["encoder"] == "png"]
    external = df[df["encoder"] != "png"]
    salient = lossless[lossless["policy"] == "saliency"]

    mse_levels = _explode_levels(salient, "mse_per_level", "mse")
    bpp_levels = _explode_levels(salient, "bpp_per_level", "bpp")
    if not bpp_levels.empty:
        bpp_levels["rate_reduction_pct"] = 100.0 * (1.0 - bpp_levels["bpp"] / bpp_levels["bpp_original"])
    else:
        bpp_levels["rate_reduction_pct"] = pd.Series(dtype=float)

    uniform_ext = external[external["policy"] == "uniform"]
    return {
        "rate_vs_kernel": _mean(lossless, ["policy", "mask_type", "kernel_width"], "rate_reduction_pct"),
        "mse_vs_kernel": _mean(lossless, ["policy", "mask_type", "kernel_width"], "mse_global"),
        "mse_vs_saliency": _mean(mse_levels, ["dataset", "mask_type", "saliency"], "mse"),
        "rate_vs_saliency": _mean(bpp_levels, ["saliency"], "rate_reduction_pct"),
        "rate_by_dataset": _mean(lossless, ["dataset", "policy"], "rate_reduction_pct"),
        "rate_by_mask": _mean(lossless, ["mask_type"], "rate_reduction_pct"),
        "rate_vs_param": _mean(external, ["encoder", "policy", "param_scaled"], "rate_reduction_pct"),
        "rate_vs_kernel_compressed": _mean(
            uniform_ext, ["encoder", "param_scaled", "kernel_width"], "rate_reduction_pct"
        ),
    }


def write_figure_datasets(records, out_dir) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, table in figure_datasets(records).items():
        path = out_dir / f"{name}.csv"
        table.to_csv(path, index=False)
        written.append(path)
    return written

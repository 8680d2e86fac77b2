"""CSV and SVG writers and readers for series, snapshots and sweep results."""

from __future__ import annotations

import base64
import csv
import io
import math
import os
from contextlib import contextmanager
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np
from PIL import Image

from .circle import PI, TWO_PI
from .harness import Cell, SweepResult, TimeSeries

SERIES_HEADER = ["t", "R", "psi", "Y", "tau1", "W"]
SWEEP_HEADER = ["topology", "epsilon", "k_mid", "k_noise", "mean_R", "se_R", "mean_absY",
                "se_absY", "mean_absTau1", "se_absTau1", "replicates"]
METRICS = {"R": ("mean_r", "mean_R"), "absY": ("mean_abs_y", "mean_absY"),
           "absTau1": ("mean_abs_tau1", "mean_absTau1")}


def fmt(x: float | None, digits: int = 12) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return format(float(x), f".{digits}g")


@contextmanager
def atomic_outputs():
    """Yield a function mapping a final path to a temporary one.

    Temporaries are renamed into place only if the block finishes; otherwise
    they are deleted, so a failed command leaves no partial files.
    """
    pending: list[tuple[Path, Path]] = []

    def target(path) -> Path:
        path = Path(path)
        tmp = path.with_name(path.name + ".part")
        pending.append((tmp, path))
        return tmp

    try:
        yield target
    except BaseException:
        for tmp, _ in pending:
            tmp.unlink(missing_ok=True)
        raise
    for tmp, path in pending:
        os.replace(tmp, path)


def series_rows(ts: TimeSeries):
    for k in range(len(ts)):
        w = "" if ts.w is None else str(int(ts.w[k]))
        yield [str(int(ts.t[k])), fmt(ts.r[k]), fmt(ts.psi[k]), fmt(ts.y[k]), fmt(ts.tau1[k]), w]


def write_series(ts: TimeSeries, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SERIES_HEADER)
        writer.writerows(series_rows(ts))


def read_series(path) -> dict[str, np.ndarray]:
    """Columns of a series.csv; empty fields read as nan."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != SERIES_HEADER:
        raise ValueError(f"{path} is not a series file")
    cols = list(zip(*rows[1:])) if len(rows) > 1 else [()] * len(SERIES_HEADER)
    return {name: np.array([float(v) if v else math.nan for v in col])
            for name, col in zip(SERIES_HEADER, cols)}


def write_configs(times, configs, path) -> None:
    """One row per time: ``t, theta_1, ..., theta_n`` with round-trip precision."""
    configs = list(configs)
    n = len(configs[0]) if configs else 0
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t"] + [f"theta_{i}" for i in range(1, n + 1)])
        for t, theta in zip(times, configs):
            writer.writerow([str(int(t))] + [repr(float(x)) for x in theta])


def read_configs(path) -> tuple[np.ndarray, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][:1] != ["t"] or not all(h.startswith("theta_") for h in rows[0][1:]):
        raise ValueError(f"{path} is not a configuration file")
    t = np.array([int(r[0]) for r in rows[1:]], dtype=np.int64)
    theta = np.array([[float(v) for v in r[1:]] for r in rows[1:]]).reshape(len(t), len(rows[0]) - 1)
    return t, theta


def angle_hue(theta) -> np.ndarray:
    """Position on the hue wheel, (theta + pi) / (2 pi), in [0, 1)."""
    return (np.asarray(theta, dtype=np.float64) + PI) / TWO_PI


def hue_to_rgb(h) -> np.ndarray:
    """Fully saturated, full-value RGB in [0, 1] for hue ``h`` (last axis = channel)."""
    h = np.mod(np.asarray(h, dtype=np.float64), 1.0)[..., None]
    offsets = np.array([3.0, 2.0, 4.0])
    signs = np.array([1.0, -1.0, -1.0])
    base = np.array([-1.0, 2.0, 2.0])
    return np.clip(base + signs * np.abs(6.0 * h - offsets), 0.0, 1.0)


def _png_data_uri(rgb: np.ndarray) -> str:
    img = Image.fromarray(np.round(rgb * 255).astype(np.uint8), mode="RGB")
    buf = io.BytesIO()
    img.save(buf, format="PNG", optimize=False)
    return "data:image/png;base64," + base64.b64encode(buf.getvalue()).decode("ascii")


def heatmap_svg(frames: np.ndarray, scale: int = 4) -> str:
    """Space-time raster: one column per site, one row per recorded time (time runs down)."""
    frames = np.asarray(frames, dtype=np.float64)
    rows, cols = frames.shape
    uri = _png_data_uri(hue_to_rgb(angle_hue(frames)))
    w, h = cols * scale, rows * scale
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
        f'viewBox="0 0 {cols} {rows}" preserveAspectRatio="none" data-sites="{cols}" data-records="{rows}">\n'
        f'<image x="0" y="0" width="{cols}" height="{rows}" preserveAspectRatio="none" '
        f'style="image-rendering:pixelated" href="{uri}"/>\n</svg>\n'
    )


def write_heatmap(frames, path) -> None:
    Path(path).write_text(heatmap_svg(frames))


def sweep_rows(result: SweepResult):
    for cell, res in result.cells.items():
        if res.error is not None:
            continue
        yield [cell.topology.value, fmt(cell.epsilon), str(cell.k_mid), str(cell.k_noise),
               fmt(res.mean_r), fmt(res.se_r), fmt(res.mean_abs_y), fmt(res.se_abs_y),
               fmt(res.mean_abs_tau1), fmt(res.se_abs_tau1), str(res.replicates)]


def write_sweep(result: SweepResult, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SWEEP_HEADER)
        writer.writerows(sweep_rows(result))


def write_sweep_errors(result: SweepResult, path) -> None:
    with open(path, "w") as fh:
        for res in result.failed:
            c = res.cell
            fh.write(f"{c.topology.value} epsilon={fmt(c.epsilon)} k_mid={c.k_mid} "
                     f"k_noise={c.k_noise}: {res.error}\n")


def read_sweep(path) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != SWEEP_HEADER:
            raise ValueError(f"{path} is not a sweep file")
        return list(reader)


def _shade(v: float) -> str:
    # white (0) to dark blue (1)
    v = min(max(v, 0.0), 1.0)
    r, g, b = (round(255 + (t - 255) * v) for t in (8, 48, 107))
    return f"#{r:02x}{g:02x}{b:02x}"


def grid_svg(values: dict[tuple[int, int], float], k_mid: list[int], k_noise: list[int], title: str) -> str:
    """Cell chart with k_mid increasing to the right and k_noise increasing upward."""
    cw, ch, left, top = 70, 40, 70, 30
    width, height = left + cw * len(k_mid) + 10, top + ch * len(k_noise) + 40
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="12">',
           f'<text x="{left}" y="18">{escape(title)}</text>']
    for a, km in enumerate(k_mid):
        for b, kn in enumerate(k_noise):
            x, y = left + a * cw, top + (len(k_noise) - 1 - b) * ch
            v = values.get((km, kn))
            fill = "#cccccc" if v is None or math.isnan(v) else _shade(v)
            label = "" if v is None or math.isnan(v) else f"{v:.3f}"
            colour = "white" if v is not None and not math.isnan(v) and v > 0.55 else "black"
            out.append(f'<rect x="{x}" y="{y}" width="{cw}" height="{ch}" fill="{fill}" stroke="white"/>')
            out.append(f'<text x="{x + cw / 2}" y="{y + ch / 2 + 4}" text-anchor="middle" fill="{colour}">{label}</text>')
    base = top + ch * len(k_noise)
    for a, km in enumerate(k_mid):
        out.append(f'<text x="{left + a * cw + cw / 2}" y="{base + 16}" text-anchor="middle">{km}</text>')
    out.append(f'<text x="{left + cw * len(k_mid) / 2}" y="{base + 34}" text-anchor="middle">k_mid</text>')
    for b, kn in enumerate(k_noise):
        out.append(f'<text x="{left - 8}" y="{top + (len(k_noise) - 1 - b) * ch + ch / 2 + 4}" text-anchor="end">{kn}</text>')
    out.append(f'<text x="12" y="{top + ch * len(k_noise) / 2}" transform="rotate(-90 12 {top + ch * len(k_noise) / 2})" text-anchor="middle">k_noise</text>')
    out.append("</svg>\n")
    return "\n".join(out)


def sweep_svgs(rows: list[dict[str, str]]) -> dict[str, str]:
    """One chart per (metric, topology, epsilon) found in parsed sweep rows, keyed by file name."""
    charts = {}
    groups = sorted({(r["topology"], r["epsilon"]) for r in rows})
    for topo, eps in groups:
        sub = [r for r in rows if r["topology"] == topo and r["epsilon"] == eps]
        k_mid = sorted({int(r["k_mid"]) for r in sub})
        k_noise = sorted({int(r["k_noise"]) for r in sub})
        for metric, (_, column) in METRICS.items():
            values = {(int(r["k_mid"]), int(r["k_noise"])): float(r[column]) for r in sub}
            name = f"sweep_{metric}_{topo}_eps{eps}.svg"
            charts[name] = grid_svg(values, k_mid, k_noise, f"{column}  {topo}  epsilon={eps}")
    return charts


def cell_label(cell: Cell) -> str:
    return f"{cell.topology.value}/eps={fmt(cell.epsilon)}/k_mid={cell.k_mid}/k_noise={cell.k_noise}"


"""Report emission: the method-comparison table, confusion matrices
(CSV + SVG heatmaps), and the fitted spatial-filter export.

Everything is written with fixed float formatting so identical runs
produce byte-identical files.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np

from .csp import SpatialFilterSet
from .evaluate import CLASS_NAMES, ComparisonReport

__all__ = [
    "report_csv_text",
    "confusion_csv_text",
    "confusion_svg",
    "filters_csv_text",
    "write_reports",
]


def _class_names(classes: Sequence[int]) -> list[str]:
    if all(1 <= c <= len(CLASS_NAMES) for c in classes):
        return [CLASS_NAMES[c - 1] for c in classes]
    return [f"class{c}" for c in classes]


def report_csv_text(reports: Sequence[ComparisonReport]) -> str:
    lines = ["method,paradigm,mean_acc,std_acc,p_vs_nonDA"]
    for rep in reports:
        for method, res in rep.results.items():
            p = rep.p_values.get(method)
            p_txt = f"{p:.6f}" if p is not None else ""
            lines.append(
                f"{method},{rep.paradigm},{res.mean_accuracy:.6f},"
                f"{res.std_accuracy:.6f},{p_txt}"
            )
    return "\n".join(lines) + "\n"


def confusion_csv_text(counts: np.ndarray, classes: Sequence[int]) -> str:
    names = _class_names(classes)
    lines = ["true_class," + ",".join(names)]
    for name, row in zip(names, np.asarray(counts)):
        lines.append(name + "," + ",".join(str(int(v)) for v in row))
    return "\n".join(lines) + "\n"


def _cell_color(value: float, vmax: float) -> str:
    """White-to-blue ramp; value and vmax in percent."""
    frac = 0.0 if vmax <= 0 else min(1.0, value / vmax)
    r = int(round(255 - frac * (255 - 31)))
    g = int(round(255 - frac * (255 - 119)))
    b = int(round(255 - frac * (255 - 180)))
    return f"#{r:02x}{g:02x}{b:02x}"


def confusion_svg(percent: np.ndarray, classes: Sequence[int], title: str) -> str:
    """Row-normalized confusion heatmap as standalone SVG markup."""
    percent = np.asarray(percent, dtype=np.float64)
    names = _class_names(classes)
    n = len(names)
    cell, margin, header = 64, 70, 40
    width = margin + n * cell + 20
    height = header + margin + n * cell - 40
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="monospace" font-size="12">',
        f'<text x="{margin}" y="20" font-size="14">{title}</text>',
    ]
    vmax = float(percent.max()) if percent.size else 1.0
    for i in range(n):
        y = header + i * cell
        out.append(
            f'<text x="{margin - 8}" y="{y + cell / 2 + 4}" text-anchor="end">{names[i]}</text>'
        )
        for j in range(n):
            x = margin + j * cell
            v = percent[i, j]
            fill = _cell_color(v, vmax)
            text_fill = "#ffffff" if vmax > 0 and v / vmax > 0.6 else "#000000"
            out.append(
                f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" '
                f'fill="{fill}" stroke="#444444"/>'
            )
            out.append(
                f'<text x="{x + cell / 2}" y="{y + cell / 2 + 4}" text-anchor="middle" '
                f'fill="{text_fill}">{v:.1f}</text>'
            )
    for j in range(n):
        x = margin + j * cell
        out.append(
            f'<text x="{x + cell / 2}" y="{header - 8}" text-anchor="middle">{names[j]}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def filters_csv_text(sets: Sequence[SpatialFilterSet]) -> str:
    if not sets:
        return "band_low,band_high,target_class,filter_index,eigenvalue\n"
    n_ch = sets[0].filters.shape[1]
    header = "band_low,band_high,target_class,filter_index,eigenvalue," + ",".join(
        f"w_{i + 1}" for i in range(n_ch)
    )
    lines = [header]
    for fs in sets:
        for idx in range(fs.filters.shape[0]):
            row = [
                f"{fs.band[0]:.6f}",
                f"{fs.band[1]:.6f}",
                str(fs.target_class),
                str(idx),
                f"{fs.eigenvalues[idx]:.9f}",
            ] + [f"{w:.9g}" for w in fs.filters[idx]]
            lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def write_reports(
    out_dir,
    reports: Sequence[ComparisonReport],
    filter_sets: Sequence[SpatialFilterSet] = (),
) -> list[Path]:
    """Write report.csv, per-method confusion CSV/SVG, and filters.csv."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    path = out / "report.csv"
    path.write_text(report_csv_text(reports), encoding="utf-8")
    written.append(path)

    for rep in reports:
        for method, res in rep.results.items():
            stem = f"confusion_{method}_{rep.paradigm}"
            p_csv = out / f"{stem}.csv"
            p_csv.write_text(
                confusion_csv_text(res.confusion.counts, rep.classes), encoding="utf-8"
            )
            written.append(p_csv)
            p_svg = out / f"{stem}.svg"
            p_svg.write_text(
                confusion_svg(
                    res.confusion_percent,
                    rep.classes,
                    f"{method} {rep.paradigm} mean acc {res.mean_accuracy:.2f}%",
                ),
                encoding="utf-8",
            )
            written.append(p_svg)

    if filter_sets:
        p_filt = out / "filters.csv"
        p_filt.write_text(filters_csv_text(filter_sets), encoding="utf-8")
        written.append(p_filt)
    return written

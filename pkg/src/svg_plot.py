"""
Pruning Curve Plots
===================

Writes test NRMSE versus pruned node count as a static SVG: one panel per
reservoir size, one polyline per centrality measure and a dashed horizontal
line at the unpruned error. Curves of several seeds for the same
(size, measure) are averaged point by point.
"""

import html
import logging
from pathlib import Path
from typing import Dict, Iterable, List, Tuple

import pandas as pd

logger = logging.getLogger(__name__)

REQUIRED_COLUMNS = ("step", "n_remaining", "test_nrmse", "measure")

PANEL_WIDTH = 420
PANEL_HEIGHT = 300
PANEL_COLUMNS = 2
MARGIN = {"left": 64, "right": 16, "top": 32, "bottom": 44}
LEGEND_HEIGHT = 28

MEASURE_COLORS = {
    "C_in": "#1f77b4",
    "C_out": "#ff7f0e",
    "C1": "#2ca02c",
    "C2": "#d62728",
    "C3": "#9467bd",
}


class SvgBuilder:
    """Accumulates SVG elements as text"""

    def __init__(self, width: int, height: int):
        self.width = width
        self.height = height
        self.parts: List[str] = []

    def group_start(self, attrs: Dict[str, str]):
        rendered = " ".join(f'{k}="{html.escape(str(v))}"' for k, v in attrs.items())
        self.parts.append(f"<g {rendered}>")

    def group_end(self):
        self.parts.append("</g>")

    def rect(self, x, y, width, height, stroke="#000000", fill="none"):
        self.parts.append(
            f'<rect x="{x:.2f}" y="{y:.2f}" width="{width:.2f}" height="{height:.2f}" '
            f'stroke="{stroke}" fill="{fill}"/>'
        )

    def line(self, x1, y1, x2, y2, stroke="#000000", extra=""):
        self.parts.append(
            f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" stroke="{stroke}" {extra}/>'
        )

    def polyline(self, points: Iterable[Tuple[float, float]], stroke: str, extra=""):
        coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in points)
        self.parts.append(f'<polyline points="{coords}" fill="none" stroke="{stroke}" stroke-width="1.5" {extra}/>')

    def text(self, x, y, string, anchor="start", size=11):
        self.parts.append(
            f'<text x="{x:.2f}" y="{y:.2f}" font-size="{size}" text-anchor="{anchor}" '
            f'font-family="sans-serif">{html.escape(str(string))}</text>'
        )

    def get_svg(self) -> str:
        header = (
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{self.width}" '
            f'height="{self.height}" viewBox="0 0 {self.width} {self.height}">'
        )
        return "\n".join([header, *self.parts, "</svg>"]) + "\n"


def read_curves(paths: Iterable) -> pd.DataFrame:
    """
    Load curve CSVs and tag each with its reservoir size

    The size is the n_remaining of the step-0 (unpruned) row; `pruned` is
    the cumulative number of removed nodes.

    Raises:
        FileNotFoundError: A file is missing
        ValueError: A file is empty or lacks curve columns
    """
    frames = []
    for path in paths:
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"Curve file not found: {path}")
        try:
            frame = pd.read_csv(path)
        except pd.errors.EmptyDataError as e:
            raise ValueError(f"Curve file {path} is empty") from e
        missing = [c for c in REQUIRED_COLUMNS if c not in frame.columns]
        if missing:
            raise ValueError(f"Curve file {path} is missing columns: {', '.join(missing)}")
        if frame.empty:
            raise ValueError(f"Curve file {path} has no rows")
        baseline = frame.loc[frame["step"] == 0]
        if baseline.empty:
            raise ValueError(f"Curve file {path} has no baseline (step 0) row")
        size = int(baseline["n_remaining"].iloc[0])
        frame = frame.assign(size=size, pruned=size - frame["n_remaining"], source=path.name)
        frames.append(frame)

    if not frames:
        raise ValueError("No curve files given")
    return pd.concat(frames, ignore_index=True)


def average_curves(curves: pd.DataFrame) -> pd.DataFrame:
    """Mean test NRMSE per (size, measure, pruned); failed steps are skipped"""
    averaged = (
        curves.groupby(["size", "measure", "pruned"], sort=True)["test_nrmse"]
        .mean()
        .reset_index()
    )
    return averaged.dropna(subset=["test_nrmse"])


def _scale(lo: float, hi: float, pad: float = 0.05) -> Tuple[float, float]:
    if hi == lo:
        delta = abs(lo) * 0.1 or 1.0
        return lo - delta, hi + delta
    span = hi - lo
    return lo - pad * span, hi + pad * span


def render_curves(curves: pd.DataFrame) -> str:
    """Render already-loaded curves to an SVG document string"""
    averaged = average_curves(curves)
    if averaged.empty:
        raise ValueError("Curve files contain no finite test NRMSE values")

    sizes = sorted(averaged["size"].unique())
    measures = sorted(averaged["measure"].unique(), key=lambda m: (m not in MEASURE_COLORS, m))
    n_rows = (len(sizes) + PANEL_COLUMNS - 1) // PANEL_COLUMNS
    n_cols = min(len(sizes), PANEL_COLUMNS)
    svg = SvgBuilder(width=n_cols * PANEL_WIDTH, height=n_rows * PANEL_HEIGHT + LEGEND_HEIGHT)

    plot_w = PANEL_WIDTH - MARGIN["left"] - MARGIN["right"]
    plot_h = PANEL_HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    for index, size in enumerate(sizes):
        panel = averaged.loc[averaged["size"] == size]
        ox = (index % PANEL_COLUMNS) * PANEL_WIDTH + MARGIN["left"]
        oy = (index // PANEL_COLUMNS) * PANEL_HEIGHT + MARGIN["top"]

        first_measure = [m for m in measures if m in set(panel["measure"])][0]
        base_rows = panel.loc[(panel["measure"] == first_measure) & (panel["pruned"] == 0)]
        baseline = float(base_rows["test_nrmse"].iloc[0]) if not base_rows.empty else None

        x_hi = max(float(panel["pruned"].max()), 1.0)
        y_values = panel["test_nrmse"].tolist() + ([baseline] if baseline is not None else [])
        y_lo, y_hi = _scale(min(y_values), max(y_values))

        def to_px(removed: float, value: float) -> Tuple[float, float]:
            return ox + plot_w * removed / x_hi, oy + plot_h * (1.0 - (value - y_lo) / (y_hi - y_lo))

        svg.group_start({"class": "panel", "data-size": str(size)})
        svg.rect(ox, oy, plot_w, plot_h)
        svg.text(ox + plot_w / 2, oy - 10, f"N = {size}", anchor="middle", size=13)
        svg.text(ox + plot_w / 2, oy + plot_h + 32, "Pruned nodes", anchor="middle")
        svg.text(ox - 8, oy + plot_h, f"{y_lo:.4g}", anchor="end", size=9)
        svg.text(ox - 8, oy + 8, f"{y_hi:.4g}", anchor="end", size=9)
        svg.text(ox, oy + plot_h + 14, "0", anchor="middle", size=9)
        svg.text(ox + plot_w, oy + plot_h + 14, f"{x_hi:g}", anchor="middle", size=9)

        if baseline is not None:
            _, by = to_px(0.0, baseline)
            svg.line(
                ox, by, ox + plot_w, by, stroke="#555555",
                extra=f'class="baseline" stroke-dasharray="6,4" data-baseline="{baseline!r}"',
            )

        for measure in measures:
            rows = panel.loc[panel["measure"] == measure].sort_values("pruned")
            if rows.empty:
                continue
            points = [to_px(float(r), float(v)) for r, v in zip(rows["pruned"], rows["test_nrmse"])]
            svg.polyline(
                points,
                stroke=MEASURE_COLORS.get(measure, "#333333"),
                extra=f'class="curve" data-measure="{html.escape(measure)}"',
            )
        svg.group_end()

    legend_y = n_rows * PANEL_HEIGHT + LEGEND_HEIGHT / 2
    svg.group_start({"class": "legend"})
    for i, measure in enumerate(measures):
        lx = MARGIN["left"] + i * 80
        svg.line(lx, legend_y, lx + 20, legend_y, stroke=MEASURE_COLORS.get(measure, "#333333"))
        svg.text(lx + 24, legend_y + 4, measure)
    svg.group_end()

    return svg.get_svg()


def plot_curves(paths: Iterable, output_path) -> Path:
    """
    Plot curve CSVs to an SVG file

    Args:
        paths: Curve CSV files (per-seed or seed-averaged)
        output_path: Target .svg path

    Returns:
        Path of the written file
    """
    curves = read_curves(paths)
    content = render_curves(curves)
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    with open(output_path, "w", encoding="utf-8") as f:
        f.write(content)
    logger.info(f"Plot with {curves['size'].nunique()} panel(s) saved to: {output_path}")
    return output_path

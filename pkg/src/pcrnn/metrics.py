"""Analysis metrics and exports: edit distance, rank correlation, loss surfaces."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

DEFAULT_PERMUTATIONS = 10_000
DEFAULT_PERMUTATION_SEED = 987654321
DEFAULT_LEVELS = 51  # history levels 0..50, as plotted


def levenshtein(a: str, b: str) -> int:
    """Minimum number of single-character edits transforming a into b."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1,          # deletion
                           cur[j - 1] + 1,       # insertion
                           prev[j - 1] + (ca != cb)))  # substitution
        prev = cur
    return prev[-1]


@dataclass(frozen=True)
class CorrelationResult:
    rho: float
    p_value: float
    n: int


def spearman(x, y, permutations: int = DEFAULT_PERMUTATIONS,
             seed: int = DEFAULT_PERMUTATION_SEED) -> CorrelationResult:
    """Spearman rank correlation with a seeded two-sided permutation test.

    Ties get average ranks.  The p-value resolution floor is
    1/(permutations+1), i.e. about 1e-4 at the default setting.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or len(x) < 3:
        raise ValueError("spearman needs two equal-length vectors, n >= 3")
    rx = rankdata(x)
    ry = rankdata(y)
    if np.ptp(rx) == 0 or np.ptp(ry) == 0:
        raise ValueError("undefined correlation: constant input")
    rho = _pearson(rx, ry)
    rng = np.random.default_rng(seed)
    hits = 0
    for _ in range(permutations):
        if abs(_pearson(rx, rng.permutation(ry))) >= abs(rho):
            hits += 1
    p = (hits + 1) / (permutations + 1)
    return CorrelationResult(rho=float(rho), p_value=float(p), n=len(x))


def _pearson(u: np.ndarray, v: np.ndarray) -> float:
    du = u - u.mean()
    dv = v - v.mean()
    return float((du @ dv) / np.sqrt((du @ du) * (dv @ dv)))


def sum_over_history(surface: np.ndarray) -> np.ndarray:
    """Row sums: total loss over all history levels, one value per iteration."""
    surface = np.asarray(surface)
    if surface.size == 0:
        raise ValueError("empty loss surface")
    return surface.sum(axis=1)


def final_loss_vs_history(surface: np.ndarray, levels: int = DEFAULT_LEVELS,
                          **spearman_kwargs) -> CorrelationResult:
    """Correlate history level against final-iteration loss at that level."""
    surface = np.asarray(surface)
    if surface.ndim != 2 or surface.shape[1] < levels:
        raise ValueError(f"surface needs at least {levels} history levels")
    return spearman(np.arange(levels, dtype=np.float64),
                    surface[-1, :levels], **spearman_kwargs)


def export_surface_csv(surface: np.ndarray, path) -> None:
    """CSV rows (iteration, history_level, mean_loss), full precision."""
    surface = np.asarray(surface)
    if surface.ndim != 2:
        raise ValueError("loss surface must be 2-D")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("iteration,history_level,mean_loss\n")
        for i, row in enumerate(surface, start=1):
            for h, v in enumerate(row):
                fh.write(f"{i},{h},{v:.17g}\n")


def read_surface_csv(path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "iteration,history_level,mean_loss":
            raise ValueError(f"{path}: unexpected CSV header {header!r}")
        triples = [line.split(",") for line in fh if line.strip()]
    if not triples:
        raise ValueError(f"{path}: no data rows")
    iterations = max(int(t[0]) for t in triples)
    levels = max(int(t[1]) for t in triples) + 1
    surface = np.full((iterations, levels), np.nan)
    for it, h, v in triples:
        surface[int(it) - 1, int(h)] = float(v)
    if np.isnan(surface).any():
        raise ValueError(f"{path}: incomplete loss surface")
    return surface


def _level_color(h: int, levels: int) -> str:
    """Blue (zero history) to red (max plotted level)."""
    t = 0.0 if levels <= 1 else h / (levels - 1)
    return f"rgb({round(255 * t)},0,{round(255 * (1 - t))})"


_SVG_W, _SVG_H, _MARGIN = 640, 420, 50


def _polyline(xs, ys, color: str, width: str = "1") -> str:
    pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))
    return (f'<polyline fill="none" stroke="{color}" '
            f'stroke-width="{width}" points="{pts}" />')


def _svg_frame(body: list[str], title: str) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" '
            f'width="{_SVG_W}" height="{_SVG_H}">\n'
            f'<rect width="100%" height="100%" fill="white" />\n'
            f'<text x="{_SVG_W // 2}" y="20" text-anchor="middle" '
            f'font-family="sans-serif" font-size="14">{title}</text>\n')
    return head + "\n".join(body) + "\n</svg>\n"


def _log_axes(values: np.ndarray, n_points: int):
    """Map (iteration index, log10 loss) into pixel coordinates."""
    floor = 1e-12
    logs = np.log10(np.maximum(values, floor))
    lo, hi = logs.min(), logs.max()
    if hi - lo < 1e-9:
        hi = lo + 1.0
    xspan = _SVG_W - 2 * _MARGIN
    yspan = _SVG_H - 2 * _MARGIN

    def to_xy(series_logs):
        xs = _MARGIN + np.arange(n_points) / max(n_points - 1, 1) * xspan
        ys = _SVG_H - _MARGIN - (series_logs - lo) / (hi - lo) * yspan
        return xs, ys

    return to_xy, logs


def render_loss_svg(surface: np.ndarray, levels: int, path,
                    title: str = "Mean loss by history level") -> None:
    """Fig-3a/3b style plot: one polyline per history level, log loss axis."""
    surface = np.asarray(surface)
    if surface.size == 0:
        raise ValueError("cannot render an empty loss surface")
    if surface.ndim != 2 or levels < 1 or levels > surface.shape[1]:
        raise ValueError("levels out of range for surface")
    to_xy, logs = _log_axes(surface[:, :levels], surface.shape[0])
    body = [_polyline(*to_xy(logs[:, h]), _level_color(h, levels))
            for h in range(levels)]
    body.append(_polyline([_MARGIN, _MARGIN, _SVG_W - _MARGIN],
                          [_MARGIN, _SVG_H - _MARGIN, _SVG_H - _MARGIN],
                          "black"))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_svg_frame(body, title))


def render_sum_loss_svg(curves: dict[str, np.ndarray], path,
                        title: str = "Sum loss over history") -> None:
    """Overlay of sum-loss curves (Fig-3c style), log vertical axis."""
    if not curves:
        raise ValueError("no curves to render")
    names = sorted(curves)
    stacked = np.vstack([np.asarray(curves[k], dtype=np.float64) for k in names])
    to_xy, logs = _log_axes(stacked, stacked.shape[1])
    palette = ["rgb(200,40,40)", "rgb(40,40,200)", "rgb(40,160,40)",
               "rgb(160,40,160)"]
    body = []
    for i, name in enumerate(names):
        color = palette[i % len(palette)]
        body.append(_polyline(*to_xy(logs[i]), color, width="2"))
        body.append(f'<text x="{_SVG_W - _MARGIN}" y="{_MARGIN + 16 * (i + 1)}" '
                    f'text-anchor="end" font-family="sans-serif" '
                    f'font-size="12" fill="{color}">{name}</text>')
    body.append(_polyline([_MARGIN, _MARGIN, _SVG_W - _MARGIN],
                          [_MARGIN, _SVG_H - _MARGIN, _SVG_H - _MARGIN],
                          "black"))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_svg_frame(body, title))

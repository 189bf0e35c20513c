"""CSV and SVG emitters for traces, trajectories, and sample chains.

CSV files are written atomically (temp file in the target directory, then
rename). Floats are serialized with 17 significant digits so values round-trip
exactly; missing metrics become empty cells, never NaN.
"""

from __future__ import annotations

import math
import os
import tempfile
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import RunTrace
from .ode import Trajectory
from .sample import SampleTrace


def format_float(value) -> str:
    if value is None:
        return ""
    return format(float(value), ".17g")


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    """Atomic CSV write: the file appears complete or not at all."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp_path = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            handle.write(",".join(header) + "\n")
            for row in rows:
                handle.write(",".join(cell if isinstance(cell, str) else format_float(cell) for cell in row) + "\n")
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def trace_csv(path: str, trace: RunTrace) -> None:
    """Schema: k,t,dist_err,f_err,grad_norm,x_0,...,x_{d-1}."""
    d = trace.dim
    header = ["k", "t", "dist_err", "f_err", "grad_norm"] + [f"x_{i}" for i in range(d)]

    def rows():
        for i in range(len(trace)):
            yield [
                str(int(trace.ks[i])),
                trace.ts[i],
                None if trace.dist_err is None else trace.dist_err[i],
                None if trace.f_err is None else trace.f_err[i],
                None if trace.grad_norm is None else trace.grad_norm[i],
                *trace.xs[i],
            ]

    write_csv(path, header, rows())


def trajectory_csv(path: str, traj: Trajectory, lyapunov: Optional[Sequence[float]] = None) -> None:
    """Schema: t,x_0..,v_0..[,lyapunov]."""
    d = traj.xs.shape[1]
    header = ["t"] + [f"x_{i}" for i in range(d)]
    if traj.vs is not None:
        header += [f"v_{i}" for i in range(d)]
    if lyapunov is not None:
        header += ["lyapunov"]

    def rows():
        for i in range(len(traj)):
            row = [traj.ts[i], *traj.xs[i]]
            if traj.vs is not None:
                row.extend(traj.vs[i])
            if lyapunov is not None:
                row.append(lyapunov[i])
            yield row

    write_csv(path, header, rows())


def samples_csv(path: str, strace: SampleTrace, thin: int = 1) -> None:
    """Schema: k,x_0..[,v_0..], keeping every ``thin``-th sample."""
    if thin < 1:
        raise ValueError("thinning factor must be at least 1")
    d = strace.dim
    header = ["k"] + [f"x_{i}" for i in range(d)]
    if strace.vs is not None:
        header += [f"v_{i}" for i in range(d)]

    def rows():
        for i in range(0, len(strace), thin):
            row = [str(i), *strace.xs[i]]
            if strace.vs is not None:
                row.extend(strace.vs[i])
            yield row

    write_csv(path, header, rows())


# ---------------------------------------------------------------------------
# SVG line plots (no plotting dependency; log-scale polylines)
# ---------------------------------------------------------------------------

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")
_WIDTH, _HEIGHT = 720, 480
_MARGIN = {"left": 70, "right": 20, "top": 40, "bottom": 50}


def _log_ticks(lo: float, hi: float) -> list[float]:
    lo_e = math.floor(math.log10(lo))
    hi_e = math.ceil(math.log10(hi))
    step = max(1, (hi_e - lo_e) // 8)
    return [10.0**e for e in range(lo_e, hi_e + 1, step)]


def write_svg_plot(
    path: str,
    series: dict,
    title: str = "",
    xlabel: str = "k",
    ylabel: str = "error",
    log_x: bool = False,
) -> None:
    """Log-y line chart of named series {label: (xs, ys)}; nonpositive ys are skipped."""
    cleaned = {}
    for label, (xs, ys) in series.items():
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        mask = np.isfinite(ys) & (ys > 0) & np.isfinite(xs)
        if log_x:
            mask &= xs > 0
        if mask.sum() >= 2:
            cleaned[label] = (xs[mask], ys[mask])

    x0, x1 = _MARGIN["left"], _WIDTH - _MARGIN["right"]
    y0, y1 = _HEIGHT - _MARGIN["bottom"], _MARGIN["top"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}" font-family="monospace" font-size="12">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<text x="{_WIDTH // 2}" y="20" text-anchor="middle" font-size="14">{title}</text>',
    ]

    if not cleaned:
        parts.append(
            f'<text x="{_WIDTH // 2}" y="{_HEIGHT // 2}" text-anchor="middle">'
            "no positive data to plot</text></svg>"
        )
        _atomic_write_text(path, "\n".join(parts))
        return

    all_x = np.concatenate([v[0] for v in cleaned.values()])
    all_y = np.concatenate([v[1] for v in cleaned.values()])
    xmin, xmax = float(all_x.min()), float(all_x.max())
    ymin, ymax = float(all_y.min()), float(all_y.max())
    if xmax == xmin:
        xmax = xmin + 1.0
    if ymax == ymin:
        ymax = ymin * 10.0

    def map_x(x):
        if log_x:
            frac = (math.log10(x) - math.log10(xmin)) / (math.log10(xmax) - math.log10(xmin))
        else:
            frac = (x - xmin) / (xmax - xmin)
        return x0 + frac * (x1 - x0)

    def map_y(y):
        frac = (math.log10(y) - math.log10(ymin)) / (math.log10(ymax) - math.log10(ymin))
        return y0 + frac * (y1 - y0)

    # axes
    parts.append(f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>')
    parts.append(f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>')
    for tick in _log_ticks(ymin, ymax):
        if tick < ymin or tick > ymax:
            continue
        py = map_y(tick)
        parts.append(f'<line x1="{x0 - 4}" y1="{py:.1f}" x2="{x0}" y2="{py:.1f}" stroke="black"/>')
        parts.append(
            f'<text x="{x0 - 8}" y="{py + 4:.1f}" text-anchor="end">{tick:.0e}</text>'
        )
    xticks = (
        _log_ticks(max(xmin, 1e-12), xmax)
        if log_x
        else np.linspace(xmin, xmax, 5)
    )
    for tick in xticks:
        if tick < xmin or tick > xmax:
            continue
        px = map_x(tick)
        parts.append(f'<line x1="{px:.1f}" y1="{y0}" x2="{px:.1f}" y2="{y0 + 4}" stroke="black"/>')
        parts.append(
            f'<text x="{px:.1f}" y="{y0 + 18}" text-anchor="middle">{tick:g}</text>'
        )
    parts.append(f'<text x="{(x0 + x1) // 2}" y="{_HEIGHT - 10}" text-anchor="middle">{xlabel}</text>')
    parts.append(
        f'<text x="16" y="{(y0 + y1) // 2}" text-anchor="middle" '
        f'transform="rotate(-90 16 {(y0 + y1) // 2})">{ylabel}</text>'
    )

    for idx, (label, (xs, ys)) in enumerate(cleaned.items()):
        color = _COLORS[idx % len(_COLORS)]
        pts = " ".join(f"{map_x(x):.2f},{map_y(y):.2f}" for x, y in zip(xs, ys))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        parts.append(
            f'<text x="{x1 - 8}" y="{y1 + 16 * (idx + 1)}" text-anchor="end" '
            f'fill="{color}">{label}</text>'
        )
    parts.append("</svg>")
    _atomic_write_text(path, "\n".join(parts))


def _atomic_write_text(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp_path = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise

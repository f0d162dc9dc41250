"""Deterministic SVG line plots of a trajectory: one panel per output plus the input."""

from __future__ import annotations

import math

import numpy as np

WIDTH = 820
PANEL_H = 210
MARGIN_L = 70
MARGIN_R = 20
GAP = 40
MAX_POINTS = 2000
COLORS = {"y": "#1f4e9c", "glo": "#b03030", "ghi": "#b03030", "u": "#2a7a2a"}


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _num(x: float) -> str:
    return f"{x:.4g}"


def _decimate(n: int) -> np.ndarray:
    if n <= MAX_POINTS:
        return np.arange(n)
    idx = np.linspace(0, n - 1, MAX_POINTS).round().astype(int)
    return np.unique(idx)


def _panel(out, top, title, t, series):
    """series: list of (values, color, dash)."""
    x0, x1 = MARGIN_L, WIDTH - MARGIN_R
    y0, y1 = top + 20, top + PANEL_H - 25
    out.append(f'<rect x="{x0}" y="{y0}" width="{x1 - x0}" height="{y1 - y0}" '
               'fill="none" stroke="#444" stroke-width="1"/>')
    out.append(f'<text x="{x0}" y="{top + 14}" font-size="13">{title}</text>')
    finite = [v[np.isfinite(v)] for v, _, _ in series]
    finite = [v for v in finite if v.size]
    if t.size == 0 or not finite:
        out.append(f'<text x="{x0 + 4}" y="{y1 - 4}" font-size="11" fill="#888">no data</text>')
        return
    lo = min(float(v.min()) for v in finite)
    hi = max(float(v.max()) for v in finite)
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad
    tmin, tmax = float(t[0]), float(t[-1])
    if tmax <= tmin:
        tmax = tmin + 1.0

    def px(tv):
        return x0 + (tv - tmin) / (tmax - tmin) * (x1 - x0)

    def py(v):
        return y1 - (v - lo) / (hi - lo) * (y1 - y0)

    for frac in (0.0, 0.5, 1.0):
        val = lo + frac * (hi - lo)
        yy = py(val)
        out.append(f'<text x="{x0 - 6}" y="{_fmt(yy + 4)}" font-size="10" text-anchor="end">{_num(val)}</text>')
    for frac in (0.0, 0.5, 1.0):
        tv = tmin + frac * (tmax - tmin)
        out.append(f'<text x="{_fmt(px(tv))}" y="{y1 + 14}" font-size="10" text-anchor="middle">{_num(tv)}</text>')
    idx = _decimate(t.size)
    for values, color, dash in series:
        pts = []
        for i in idx:
            v = values[i]
            if math.isfinite(v):
                pts.append(f"{_fmt(px(t[i]))},{_fmt(py(v))}")
        if not pts:
            continue
        style = f' stroke-dasharray="{dash}"' if dash else ""
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.2"{style} '
                   f'points="{" ".join(pts)}"/>')


def render_svg(traj, title: str = "") -> str:
    v = traj.y.shape[1] if traj.y.ndim == 2 else 1
    m = traj.u.shape[1] if traj.u.ndim == 2 else 1
    panels = v + 1
    height = panels * PANEL_H + GAP
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" '
           f'viewBox="0 0 {WIDTH} {height}" font-family="sans-serif">',
           f'<rect x="0" y="0" width="{WIDTH}" height="{height}" fill="white"/>']
    if title:
        out.append(f'<text x="{MARGIN_L}" y="20" font-size="15" font-weight="bold">{title}</text>')
    t = np.asarray(traj.t, dtype=float)
    for i in range(v):
        series = []
        if traj.y.size:
            series = [(traj.g_lower[:, i], COLORS["glo"], "5,3"),
                      (traj.g_upper[:, i], COLORS["ghi"], "5,3"),
                      (traj.y[:, i], COLORS["y"], "")]
        _panel(out, GAP + i * PANEL_H, f"y{i + 1} with lower/upper boundary", t, series)
    useries = [(traj.u[:, j], COLORS["u"], "") for j in range(m)] if traj.u.size else []
    _panel(out, GAP + v * PANEL_H, "control input u", t, useries)
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg(traj, boundaries=None, path=None, title: str = "") -> str:
    """Write the plot to ``path`` (if given) and return the SVG text.

    The boundary pair is read from the trajectory's own g_lower/g_upper
    columns; ``boundaries`` is accepted for interface symmetry and unused.
    """
    text = render_svg(traj, title)
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return text

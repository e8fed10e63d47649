"""Plain SVG 1.1 output: heatmap cells, a zero contour and S-member stipple."""

from __future__ import annotations

from typing import Iterable

import numpy as np
from numpy.typing import NDArray

# corner order: (i, j), (i+1, j), (i+1, j+1), (i, j+1); edges 0..3 follow the same ring
_EDGE_CORNERS = ((0, 1), (1, 2), (2, 3), (3, 0))
_CASES = {
    0: (), 15: (),
    1: ((3, 0),), 14: ((3, 0),),
    2: ((0, 1),), 13: ((0, 1),),
    3: ((3, 1),), 12: ((3, 1),),
    4: ((1, 2),), 11: ((1, 2),),
    6: ((0, 2),), 9: ((0, 2),),
    7: ((3, 2),), 8: ((3, 2),),
}


def marching_squares(x: NDArray, y: NDArray, values: NDArray, level: float = 0.0) -> list[tuple[tuple[float, float], tuple[float, float]]]:
    """Line segments of the ``level`` contour of ``values[i, j]`` sampled at ``(x[i], y[j])``.

    Corners strictly above ``level`` count as inside. Saddle cells (5, 10) are
    resolved by the cell-centre average.
    """
    v = np.asarray(values, dtype=float)
    segments = []
    nx, ny = v.shape
    for i in range(nx - 1):
        for j in range(ny - 1):
            cx = (x[i], x[i + 1], x[i + 1], x[i])
            cy = (y[j], y[j], y[j + 1], y[j + 1])
            cv = (v[i, j], v[i + 1, j], v[i + 1, j + 1], v[i, j + 1])
            if not all(np.isfinite(cv)):
                continue
            idx = sum(1 << k for k in range(4) if cv[k] > level)
            if idx in (5, 10):
                centre_in = (sum(cv) / 4.0) > level
                # cut off corners 0 and 2, or corners 1 and 3
                cut_02 = (idx == 5) != centre_in
                pairs = ((3, 0), (1, 2)) if cut_02 else ((0, 1), (3, 2))
            else:
                pairs = _CASES[idx]
            for ea, eb in pairs:
                segments.append((_edge_point(ea, cx, cy, cv, level), _edge_point(eb, cx, cy, cv, level)))
    return segments


def _edge_point(edge, cx, cy, cv, level):
    a, b = _EDGE_CORNERS[edge]
    va, vb = cv[a], cv[b]
    f = 0.5 if va == vb else (level - va) / (vb - va)
    f = min(max(f, 0.0), 1.0)
    return (cx[a] + f * (cx[b] - cx[a]), cy[a] + f * (cy[b] - cy[a]))


def _color(u: float) -> str:
    """Diverging blue-white-red for ``u`` in [-1, 1]."""
    u = max(-1.0, min(1.0, u))
    if u >= 0:
        r, g, b = 255, int(round(255 * (1 - 0.8 * u))), int(round(255 * (1 - 0.85 * u)))
    else:
        r, g, b = int(round(255 * (1 + 0.85 * u))), int(round(255 * (1 + 0.6 * u))), 255
    return f"#{r:02x}{g:02x}{b:02x}"


def _fmt(v: float) -> str:
    return f"{v:.3f}".rstrip("0").rstrip(".")


def heatmap_svg(
    x: NDArray,
    y: NDArray,
    values: NDArray,
    members: NDArray,
    title: str = "",
    size: int = 520,
    max_stipple_per_axis: int = 60,
) -> str:
    """Heatmap of ``values[i, j]`` (``x`` horizontal, ``y`` vertical) with contour and stipple.

    The colour scale is symmetric about zero and saturates at the 99th
    percentile of ``|values|`` so the exponential growth at the window edge
    does not wash out the centre.
    """
    v = np.asarray(values, dtype=float)
    finite = np.abs(v[np.isfinite(v)])
    vmax = float(np.percentile(finite, 99)) if finite.size else 1.0
    if vmax <= 0:
        vmax = 1.0
    margin, bar = 50, 20
    W, H = size + 2 * margin + 3 * bar, size + 2 * margin
    nx, ny = v.shape
    x0, x1, y0, y1 = float(x[0]), float(x[-1]), float(y[0]), float(y[-1])

    def px(xv):
        return margin + (xv - x0) / (x1 - x0) * size

    def py(yv):
        return margin + (y1 - yv) / (y1 - y0) * size

    # cell edges halfway between samples
    xe = np.concatenate([[x0], 0.5 * (x[1:] + x[:-1]), [x1]])
    ye = np.concatenate([[y0], 0.5 * (y[1:] + y[:-1]), [y1]])
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<title>{_escape(title)}</title>',
        '<g id="heatmap" shape-rendering="crispEdges">',
    ]
    for i in range(nx):
        for j in range(ny):
            val = v[i, j]
            col = "#808080" if not np.isfinite(val) else _color(val / vmax)
            xa, xb = px(xe[i]), px(xe[i + 1])
            ya, yb = py(ye[j + 1]), py(ye[j])
            out.append(
                f'<rect x="{_fmt(xa)}" y="{_fmt(ya)}" width="{_fmt(xb - xa)}" height="{_fmt(yb - ya)}" fill="{col}"/>'
            )
    out.append("</g>")
    segs = marching_squares(x, y, v, 0.0)
    if segs:
        d = " ".join(f"M{_fmt(px(a[0]))} {_fmt(py(a[1]))}L{_fmt(px(b[0]))} {_fmt(py(b[1]))}" for a, b in segs)
        out.append(f'<path id="zero-contour" d="{d}" fill="none" stroke="#000000" stroke-width="1.2"/>')
    m = np.asarray(members, dtype=bool)
    si = max(1, int(np.ceil(nx / max_stipple_per_axis)))
    sj = max(1, int(np.ceil(ny / max_stipple_per_axis)))
    dots = []
    for i in range(0, nx, si):
        for j in range(0, ny, sj):
            if m[i, j]:
                dots.append(f'<circle cx="{_fmt(px(x[i]))}" cy="{_fmt(py(y[j]))}" r="1.3"/>')
    out.append('<g id="s-members" fill="#404040" fill-opacity="0.7">')
    out.extend(dots)
    out.append("</g>")
    out.extend(_frame(margin, size, x0, x1, y0, y1))
    out.extend(_colorbar(margin + size + bar, margin, bar, size, vmax))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def profile_svg(t: NDArray, values: NDArray, members: NDArray, title: str = "", size: int = 520) -> str:
    """Line plot of a one-dimensional profile with S-members marked on the axis."""
    t = np.asarray(t, dtype=float)
    v = np.asarray(values, dtype=float)
    ok = np.isfinite(v)
    lo, hi = (float(v[ok].min()), float(v[ok].max())) if ok.any() else (-1.0, 1.0)
    if hi - lo <= 0:
        lo, hi = lo - 1.0, hi + 1.0
    margin = 50
    W, H = size + 2 * margin, size // 2 + 2 * margin
    h = size // 2

    def px(tv):
        return margin + (tv - t[0]) / (t[-1] - t[0]) * size

    def py(vv):
        return margin + (hi - vv) / (hi - lo) * h

    pts = " ".join(f"{_fmt(px(a))},{_fmt(py(b))}" for a, b in zip(t[ok], v[ok]))
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<title>{_escape(title)}</title>',
        f'<rect x="{margin}" y="{margin}" width="{size}" height="{h}" fill="none" stroke="#000000"/>',
    ]
    if lo < 0 < hi:
        out.append(f'<line x1="{margin}" y1="{_fmt(py(0.0))}" x2="{margin + size}" y2="{_fmt(py(0.0))}" stroke="#999999"/>')
    out.append(f'<polyline id="profile" points="{pts}" fill="none" stroke="#b2182b" stroke-width="1.5"/>')
    out.append('<g id="s-members" fill="#404040">')
    for a, m in zip(t, np.asarray(members, dtype=bool)):
        if m:
            out.append(f'<circle cx="{_fmt(px(a))}" cy="{margin + h + 8}" r="1.5"/>')
    out.append("</g>")
    out.append(f'<text x="{margin}" y="{H - 10}" font-size="11">t from {_fmt(t[0])} to {_fmt(t[-1])}; value range [{lo:.4g}, {hi:.4g}]</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _frame(margin, size, x0, x1, y0, y1) -> Iterable[str]:
    yield f'<rect x="{margin}" y="{margin}" width="{size}" height="{size}" fill="none" stroke="#000000"/>'
    fs = 'font-family="sans-serif" font-size="11"'
    yield f'<text x="{margin}" y="{margin + size + 16}" {fs}>{_fmt(x0)}</text>'
    yield f'<text x="{margin + size}" y="{margin + size + 16}" {fs} text-anchor="end">{_fmt(x1)}</text>'
    yield f'<text x="{margin + size / 2}" y="{margin + size + 32}" {fs} text-anchor="middle">t1</text>'
    yield f'<text x="{margin - 6}" y="{margin + size}" {fs} text-anchor="end">{_fmt(y0)}</text>'
    yield f'<text x="{margin - 6}" y="{margin + 10}" {fs} text-anchor="end">{_fmt(y1)}</text>'
    yield f'<text x="{margin - 30}" y="{margin + size / 2}" {fs}>t2</text>'


def _colorbar(x, y, w, h, vmax) -> Iterable[str]:
    n = 50
    for k in range(n):
        u = 1.0 - 2.0 * (k + 0.5) / n
        yield f'<rect x="{x}" y="{_fmt(y + k * h / n)}" width="{w}" height="{_fmt(h / n + 0.5)}" fill="{_color(u)}"/>'
    fs = 'font-family="sans-serif" font-size="10"'
    yield f'<text x="{x + w + 4}" y="{y + 8}" {fs}>{vmax:.3g}</text>'
    yield f'<text x="{x + w + 4}" y="{y + h / 2 + 4}" {fs}>0</text>'
    yield f'<text x="{x + w + 4}" y="{y + h}" {fs}>{-vmax:.3g}</text>'


def _escape(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")

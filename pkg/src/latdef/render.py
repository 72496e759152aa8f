"""SVG and CSV emission for charged patches, scans and reports.

Figure conventions: positive charges are filled disks, negative charges open
circles, vacancies are simply absent, and the origin carries a cross. Disk
radius scales with |charge|. All floats serialize with 17 significant digits.
"""
import json
import math

import numpy as np

_SHAPE_COLORS = {
    "Triangular": "#4c72b0",
    "Rhombic": "#dd8452",
    "Square": "#55a868",
    "Rectangular": "#c44e52",
    "Generic": "#8172b3",
}


def fmt17(x):
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return f"{x:.17g}"


def dumps17(obj, indent=2):
    """json.dumps with every float rendered at 17 significant digits."""
    marker = chr(0)

    def conv(o):
        if isinstance(o, (bool, np.bool_)):
            return bool(o)
        if isinstance(o, (float, np.floating)):
            return marker + fmt17(o) + marker
        if isinstance(o, (int, np.integer)):
            return int(o)
        if isinstance(o, dict):
            return {k: conv(v) for k, v in o.items()}
        if isinstance(o, (list, tuple, np.ndarray)):
            return [conv(v) for v in o]
        return o

    s = json.dumps(conv(obj), indent=indent, ensure_ascii=True)
    return s.replace('"\\u0000', "").replace('\\u0000"', "")


def pointset_svg(ps, size=640, title=None):
    """SVG of a charged point patch (matplotlib-free)."""
    pts = np.asarray(ps.points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] < 2:
        raise ValueError("pointset_svg needs 2d points")
    q = np.asarray(ps.charges, dtype=float)
    lim = float(np.max(np.abs(pts))) * 1.08 + 1e-9
    scale = size / (2 * lim)
    if len(pts) > 1:
        d2 = np.sum((pts[None, 0] - pts[1:]) ** 2, axis=1)
        spacing = math.sqrt(float(np.min(d2)))
    else:
        spacing = lim
    qmax = float(np.max(np.abs(q))) if len(q) else 1.0
    base_r = 0.30 * spacing * scale

    def sx(v):
        return (v + lim) * scale

    def sy(v):
        return (lim - v) * scale

    rows = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" '
            f'height="{size}" viewBox="0 0 {size} {size}">',
            f'<rect width="{size}" height="{size}" fill="white"/>']
    if title:
        rows.append(f'<text x="8" y="16" font-size="13" '
                    f'font-family="sans-serif">{title}</text>')
    for p, c in zip(pts, q):
        r = max(base_r * abs(c) / qmax, 1.5)
        cx, cy = sx(p[0]), sy(p[1])
        if c > 0:
            rows.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="{r:.2f}" '
                        f'fill="#2060c0"/>')
        else:
            rows.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="{r:.2f}" '
                        f'fill="none" stroke="#c03030" stroke-width="1.6"/>')
    # origin cross
    cx, cy, a = sx(0.0), sy(0.0), max(base_r * 0.9, 4.0)
    rows.append(f'<path d="M {cx - a:.2f} {cy - a:.2f} L {cx + a:.2f} {cy + a:.2f} '
                f'M {cx - a:.2f} {cy + a:.2f} L {cx + a:.2f} {cy - a:.2f}" '
                f'stroke="#104090" stroke-width="2" fill="none"/>')
    rows.append("</svg>")
    return "\n".join(rows) + "\n"


def scan_csv(rows):
    out = ["control,x,y,volume,value,shape,unbounded,error"]
    for r in rows:
        if r.best_param is None:
            out.append(f"{fmt17(r.control)},,,,,{r.shape.value},,{r.error}")
        else:
            p = r.best_param
            out.append(",".join([
                fmt17(r.control), fmt17(p.x), fmt17(p.y), fmt17(p.volume),
                fmt17(r.value), r.shape.value, str(r.unbounded).lower(), ""]))
    return "\n".join(out) + "\n"


def scan_svg(rows, width=720, height=120):
    """Strip chart: control axis with one color band per scan row."""
    rows = [r for r in rows if r.error is None]
    if not rows:
        return '<svg xmlns="http://www.w3.org/2000/svg"/>'
    controls = [r.control for r in rows]
    lo, hi = min(controls), max(controls)
    logx = lo > 0 and hi / lo > 20
    def pos(c):
        if logx:
            return (math.log(c) - math.log(lo)) / (math.log(hi) - math.log(lo))
        return (c - lo) / (hi - lo) if hi > lo else 0.5
    xs = [pos(c) for c in controls]
    edges = [0.0] + [(a + b) / 2 for a, b in zip(xs[:-1], xs[1:])] + [1.0]
    band_h = height - 40
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
           f'height="{height}" viewBox="0 0 {width} {height}">',
           f'<rect width="{width}" height="{height}" fill="white"/>']
    for i, r in enumerate(rows):
        x0 = 10 + edges[i] * (width - 20)
        x1 = 10 + edges[i + 1] * (width - 20)
        color = _SHAPE_COLORS.get(r.shape.value, "#999999")
        out.append(f'<rect x="{x0:.2f}" y="10" width="{x1 - x0:.2f}" '
                   f'height="{band_h}" fill="{color}"/>')
    seen = []
    for r in rows:
        if r.shape.value not in seen:
            seen.append(r.shape.value)
    for i, name in enumerate(seen):
        cx = 14 + i * 110
        out.append(f'<rect x="{cx}" y="{height - 24}" width="10" height="10" '
                   f'fill="{_SHAPE_COLORS.get(name, "#999999")}"/>')
        out.append(f'<text x="{cx + 14}" y="{height - 15}" font-size="11" '
                   f'font-family="sans-serif">{name}</text>')
    out.append(f'<text x="{width - 120}" y="{height - 15}" font-size="11" '
               f'font-family="sans-serif">control {fmt17(lo)}..{fmt17(hi)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"

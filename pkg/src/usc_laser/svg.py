"""Static SVG figures: sweep line plots and parameter-map heatmaps.

Output is plain text assembled with fixed number formatting, so identical
inputs give identical bytes.
"""
from __future__ import annotations

import math

import numpy as np

from .sweeps import RATIO_AXIS, TaskKind

# a few stops of a perceptually ordered palette, interpolated linearly
_PALETTE = ((0.267, 0.005, 0.329), (0.229, 0.322, 0.546), (0.128, 0.567, 0.551),
            (0.369, 0.789, 0.383), (0.993, 0.906, 0.144))
_MISSING = "#dddddd"
_UP, _DOWN = "#1f4e9c", "#c0392b"

_LABELS = {"wc": "cavity frequency wc/wa", "z_pump": "pump Z_inf",
           "g_tilde": "coupling g~", "kappa": "cavity loss kappa/wa",
           "gamma_down": "gamma_down/wa", "gamma_phi": "gamma_phi/wa",
           RATIO_AXIS: "dephasing ratio gamma_phi/gamma_tot"}


def _f(x):
    return f"{x:.2f}"


def _color(t):
    if t is None or not math.isfinite(t):
        return _MISSING
    t = min(max(t, 0.0), 1.0) * (len(_PALETTE) - 1)
    k = min(int(t), len(_PALETTE) - 2)
    u = t - k
    rgb = [a + (b - a) * u for a, b in zip(_PALETTE[k], _PALETTE[k + 1])]
    return "#" + "".join(f"{int(round(255 * c)):02x}" for c in rgb)


def _ticks(lo, hi, n=5):
    return [lo + (hi - lo) * k / (n - 1) for k in range(n)]


class _Frame:
    """Maps data coordinates into one rectangular plot area."""

    def __init__(self, x0, y0, w, h, xlim, ylim):
        self.x0, self.y0, self.w, self.h = x0, y0, w, h
        self.xlim = xlim if xlim[1] > xlim[0] else (xlim[0] - 0.5, xlim[0] + 0.5)
        self.ylim = ylim if ylim[1] > ylim[0] else (ylim[0] - 0.5, ylim[0] + 0.5)

    def x(self, v):
        lo, hi = self.xlim
        return self.x0 + (v - lo) / (hi - lo) * self.w

    def y(self, v):
        lo, hi = self.ylim
        return self.y0 + self.h - (v - lo) / (hi - lo) * self.h

    def axes(self, xlabel, ylabel):
        out = [f'<rect x="{_f(self.x0)}" y="{_f(self.y0)}" width="{_f(self.w)}" '
               f'height="{_f(self.h)}" fill="none" stroke="#000"/>']
        for v in _ticks(*self.xlim):
            x = self.x(v)
            out.append(f'<line x1="{_f(x)}" y1="{_f(self.y0 + self.h)}" x2="{_f(x)}" '
                       f'y2="{_f(self.y0 + self.h + 4)}" stroke="#000"/>')
            out.append(f'<text x="{_f(x)}" y="{_f(self.y0 + self.h + 16)}" '
                       f'text-anchor="middle">{v:.3g}</text>')
        for v in _ticks(*self.ylim):
            y = self.y(v)
            out.append(f'<line x1="{_f(self.x0 - 4)}" y1="{_f(y)}" x2="{_f(self.x0)}" '
                       f'y2="{_f(y)}" stroke="#000"/>')
            out.append(f'<text x="{_f(self.x0 - 6)}" y="{_f(y + 4)}" '
                       f'text-anchor="end">{v:.3g}</text>')
        out.append(f'<text x="{_f(self.x0 + self.w / 2)}" y="{_f(self.y0 + self.h + 32)}" '
                   f'text-anchor="middle">{xlabel}</text>')
        out.append(f'<text x="{_f(self.x0 - 48)}" y="{_f(self.y0 + self.h / 2)}" '
                   f'text-anchor="middle" transform="rotate(-90 {_f(self.x0 - 48)} '
                   f'{_f(self.y0 + self.h / 2)})">{ylabel}</text>')
        return out

    def polyline(self, xs, ys, cls, color, dashed=False):
        pts = " ".join(f"{_f(self.x(a))},{_f(self.y(b))}" for a, b in zip(xs, ys)
                       if math.isfinite(a) and math.isfinite(b))
        if not pts:
            return []
        dash = ' stroke-dasharray="5,3"' if dashed else ""
        marker = "arrow-up" if cls == "up" else "arrow-down"
        return [f'<polyline class="{cls}" points="{pts}" fill="none" stroke="{color}" '
                f'stroke-width="1.5"{dash} marker-mid="url(#{marker})"/>']


def _document(width, height, body):
    head = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
            "<defs>",
            f'<marker id="arrow-up" markerWidth="6" markerHeight="6" refX="3" refY="3" '
            f'orient="auto"><path d="M0,0 L6,3 L0,6 z" fill="{_UP}"/></marker>',
            f'<marker id="arrow-down" markerWidth="6" markerHeight="6" refX="3" refY="3" '
            f'orient="auto"><path d="M0,0 L6,3 L0,6 z" fill="{_DOWN}"/></marker>',
            "</defs>",
            f'<rect width="{width}" height="{height}" fill="#fff"/>']
    return "\n".join(head + body + ["</svg>"]) + "\n"


def _sorted(branch):
    pts = sorted(branch.points, key=lambda q: q.z_pump)
    return pts


def sweep_svg(up, down=None, bistable=False, title=""):
    """Three stacked panels against the pump: |a1|^2, Z0 with |z2|, and the
    relative frequency shift (Omega - wc)/wc on lasing points.  The down
    branch is drawn only when it differs from the up branch."""
    wc = up.params.wc
    series = [("up", _sorted(up), _UP, False)]
    if bistable and down is not None:
        # drawn in visiting order so arrows point down the pump axis
        series.append(("down", sorted(down.points, key=lambda q: -q.z_pump), _DOWN, True))
    z = [pt.z_pump for pt in series[0][1]]
    xlim = (min(z), max(z))

    def panel_values(pts, which):
        zs = [pt.z_pump for pt in pts]
        if which == "intensity":
            return zs, [pt.state.intensity for pt in pts]
        if which == "z0":
            return zs, [pt.state.z0 for pt in pts]
        if which == "z2":
            return zs, [abs(pt.state.z2) for pt in pts]
        keep = [pt for pt in pts if pt.state.is_lasing]
        return [pt.z_pump for pt in keep], [(pt.state.omega - wc) / wc for pt in keep]

    panels = [("intensity", ["intensity"], "|a1|^2"),
              ("population", ["z0", "z2"], "Z0, |z2|"),
              ("frequency", ["shift"], "(Omega - wc)/wc")]
    width, height = 520, 3 * 200 + 40
    body = [f'<text x="{width // 2}" y="16" text-anchor="middle">{title}</text>']
    for k, (pid, kinds, ylabel) in enumerate(panels):
        vals = [v for _, pts, _, _ in series for kind in kinds
                for v in panel_values(pts, kind)[1] if math.isfinite(v)]
        ylim = (min(vals + [0.0]), max(vals + [0.0])) if vals else (0.0, 1.0)
        fr = _Frame(80, 30 + 200 * k, 400, 150, xlim, ylim)
        body.append(f'<g id="{pid}">')
        body += fr.axes("pump Z_inf" if k == 2 else "", ylabel)
        for cls, pts, color, dashed in series:
            for kind in kinds:
                xs, ys = panel_values(pts, kind)
                body += fr.polyline(xs, ys, cls, color if kind != "z2" else "#7f8c8d",
                                    dashed)
        body.append("</g>")
    return _document(width, height, body)


def heatmap_svg(result, title=""):
    """Cell colours on a log intensity scale (pump-cavity maps), Z0 of the
    bistable ceiling (coupling-loss maps), maximal intensity (dephasing
    maps) or the threshold itself (threshold maps).  The pump-cavity map
    carries the threshold curve; bistable cells are outlined elsewhere."""
    spec = result.spec
    a1, a2 = np.asarray(result.axis1_values), np.asarray(result.axis2_values)
    n1, n2 = len(a1), len(a2)
    task = spec.task
    if task is TaskKind.UP_DOWN_SWEEP:
        raw = result.field("a1_sq_up")
        vals = np.where(raw > 0, np.log10(np.where(raw > 0, raw, 1.0)), np.nan)
        cbar = "log10 |a1|^2"
    elif task is TaskKind.BISTABLE_CEILING:
        vals = result.field("z0")
        cbar = "Z0 at the bistable ceiling"
    elif task is TaskKind.MAX_INTENSITY_OVER_CAVITY:
        raw = np.fmax(result.field("a1_sq_up"), result.field("a1_sq_down"))
        vals = np.where(raw > 0, raw, np.nan)
        cbar = "max |a1|^2 over wc"
    else:
        vals = result.field("z_th")
        cbar = "Z_th"
    finite = vals[np.isfinite(vals)]
    vlo, vhi = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
    span = vhi - vlo if vhi > vlo else 1.0

    # columns along x, rows along y
    fr = _Frame(90, 30, 420, 360, (float(a2[0]), float(a2[-1])), (float(a1[0]), float(a1[-1])))
    dx = fr.w / n2
    dy = fr.h / n1
    width, height = 620, 450
    body = [f'<text x="{width // 2}" y="16" text-anchor="middle">{title}</text>',
            '<g id="cells">']
    for i in range(n1):
        for j in range(n2):
            v = vals[i, j]
            color = _color((v - vlo) / span if math.isfinite(v) else None)
            x = fr.x0 + j * dx
            y = fr.y0 + fr.h - (i + 1) * dy
            stroke = ""
            if task is not TaskKind.UP_DOWN_SWEEP and result.cells[i][j].bistable:
                stroke = ' stroke="#000" stroke-width="0.8" class="bistable"'
            body.append(f'<rect x="{_f(x)}" y="{_f(y)}" width="{_f(dx + 0.05)}" '
                        f'height="{_f(dy + 0.05)}" fill="{color}"{stroke}/>')
    body.append("</g>")
    if task is TaskKind.UP_DOWN_SWEEP:
        zth = result.field("z_th")[:, 0]
        pts = []
        for i in range(n1):
            if math.isfinite(zth[i]) and a2[0] <= zth[i] <= a2[-1]:
                # x of the cell boundary where the pump crosses threshold
                x = fr.x0 + (zth[i] - a2[0]) / (a2[-1] - a2[0]) * fr.w
                y = fr.y0 + fr.h - (i + 0.5) * dy
                pts.append(f"{_f(x)},{_f(y)}")
        if pts:
            body.append(f'<polyline id="threshold" points="{" ".join(pts)}" fill="none" '
                        f'stroke="#fff" stroke-width="2.5"/>')
        for i in range(n1):
            if any(c.bistable for c in result.cells[i]):
                y = fr.y0 + fr.h - (i + 0.5) * dy
                body.append(f'<circle class="bistable-row" cx="{_f(fr.x0 + fr.w + 6)}" '
                            f'cy="{_f(y)}" r="2.5" fill="#000"/>')
    body += fr.axes(_LABELS.get(spec.axis2.name, spec.axis2.name),
                    _LABELS.get(spec.axis1.name, spec.axis1.name))
    # colour bar
    for k in range(50):
        y = fr.y0 + fr.h - (k + 1) * fr.h / 50
        body.append(f'<rect x="545" y="{_f(y)}" width="14" height="{_f(fr.h / 50 + 0.05)}" '
                    f'fill="{_color(k / 49)}"/>')
    body.append(f'<text x="565" y="{_f(fr.y0 + 8)}">{vhi:.3g}</text>')
    body.append(f'<text x="565" y="{_f(fr.y0 + fr.h)}">{vlo:.3g}</text>')
    body.append(f'<text x="552" y="{_f(fr.y0 + fr.h + 32)}" text-anchor="middle">{cbar}</text>')
    return _document(width, height, body)


def trajectory_svg(traj, title=""):
    """|a1| and |a3| against time."""
    t = np.asarray(traj.times)
    a1 = np.abs(traj.component("a1"))
    a3 = np.abs(traj.component("a3"))
    top = float(max(a1.max(), a3.max(), 1e-300))
    fr = _Frame(80, 30, 420, 260, (float(t[0]), float(t[-1])), (0.0, top))
    body = [f'<text x="290" y="16" text-anchor="middle">{title}</text>']
    body += fr.axes("time (1/wa)", "|a1|, |a3|")
    body += fr.polyline(t, a1, "up", _UP)
    body += fr.polyline(t, a3, "down", _DOWN, dashed=True)
    return _document(580, 340, body)


def render_svg(text, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return path

"""Deterministic SVG overlays and a small marching-squares contour routine."""
from __future__ import annotations

import numpy as np


def zero_contour(F, xs, ys):
    """Line segments of ``F = 0`` from values ``F[iy, ix]`` on a rectangular grid.

    Cells with an ambiguous saddle are split by the sign of the centre value
    (mean of the corners).  Returns a list of ``((x0, y0), (x1, y1))``.
    """
    F = np.asarray(F, dtype=float)
    segs = []
    ny, nx = F.shape

    def cross(p, q, fp, fq):
        t = fp / (fp - fq)
        return (p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]))

    for j in range(ny - 1):
        for i in range(nx - 1):
            c = [(xs[i], ys[j]), (xs[i + 1], ys[j]), (xs[i + 1], ys[j + 1]), (xs[i], ys[j + 1])]
            f = [F[j, i], F[j, i + 1], F[j + 1, i + 1], F[j + 1, i]]
            if not np.all(np.isfinite(f)):
                continue
            pts = []
            for k in range(4):
                a, b = k, (k + 1) % 4
                if (f[a] < 0) != (f[b] < 0):
                    pts.append(cross(c[a], c[b], f[a], f[b]))
            if len(pts) == 2:
                segs.append((pts[0], pts[1]))
            elif len(pts) == 4:
                centre = sum(f) / 4
                if (centre < 0) == (f[0] < 0):
                    segs += [(pts[0], pts[1]), (pts[2], pts[3])]
                else:
                    segs += [(pts[3], pts[0]), (pts[1], pts[2])]
    return segs


def _fmt(v):
    return f"{v:.6g}"


def overlay_svg(eigenvalues=(), witnesses=(), segments=(), size=600, margin=20, title=""):
    """SVG scatter of eigenvalues (grey) and Omega witnesses (red) plus contour segments (blue).

    The output is a pure function of the inputs: fixed number formatting and
    element order.
    """
    ev = np.asarray(eigenvalues, dtype=complex).ravel()
    wz = np.asarray(witnesses, dtype=complex).ravel()
    seg_pts = np.array([complex(*p) for s in segments for p in s], dtype=complex)
    allz = np.concatenate([ev, wz, seg_pts])
    if len(allz) == 0:
        allz = np.array([-1 - 1j, 1 + 1j])
    x0, x1 = allz.real.min(), allz.real.max()
    y0, y1 = allz.imag.min(), allz.imag.max()
    span = max(x1 - x0, y1 - y0, 1e-9) * 1.05
    cx, cy = (x0 + x1) / 2, (y0 + y1) / 2
    scale = (size - 2 * margin) / span

    def tx(z):
        return margin + (z.real - cx + span / 2) * scale, margin + (cy + span / 2 - z.imag) * scale

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
           f'viewBox="0 0 {size} {size}">',
           f'<rect width="{size}" height="{size}" fill="white"/>']
    if title:
        out.append(f'<title>{title}</title>')
    if segments:
        d = []
        for a, b in segments:
            pa, pb = tx(complex(*a)), tx(complex(*b))
            d.append(f"M{_fmt(pa[0])} {_fmt(pa[1])}L{_fmt(pb[0])} {_fmt(pb[1])}")
        out.append(f'<path d="{"".join(d)}" stroke="#1f4e9c" stroke-width="1" fill="none"/>')
    out.append('<g fill="#888888">')
    for z in ev:
        px, py = tx(z)
        out.append(f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" r="1"/>')
    out.append('</g>')
    out.append('<g fill="#c0392b">')
    for z in wz:
        px, py = tx(z)
        out.append(f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" r="1.2"/>')
    out.append('</g>')
    out.append('</svg>')
    return "\n".join(out) + "\n"

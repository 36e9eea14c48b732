"""Static SVG plots of a map, its conjugacy and its constant slope model."""
from __future__ import annotations

from fractions import Fraction

from .intervalmap import PwAffineMap

PANEL = 260
PAD = 30


def map_polyline(cmap: PwAffineMap, depth: int = 16) -> list:
    pts = set(cmap.skeleton)
    for fam in cmap.tails:
        for n in range(fam.n0, fam.n0 + depth):
            L = fam.lap_count(n)
            if L > 256:
                break
            pts.update(fam.sub_x(n, k, L) for k in range(L + 1))
    xs = sorted(pts)
    return [(float(x), float(cmap(x))) for x in xs]


def _panel(points: list, ox: int, title: str) -> list:
    def sx(x):
        return ox + PAD + x * PANEL

    def sy(y):
        return PAD + (1 - y) * PANEL

    path = " ".join(f"{sx(x):.3f},{sy(y):.3f}" for x, y in points)
    return [
        f'<rect x="{ox + PAD}" y="{PAD}" width="{PANEL}" height="{PANEL}" fill="none" stroke="#999"/>',
        f'<line x1="{sx(0)}" y1="{sy(0)}" x2="{sx(1)}" y2="{sy(1)}" stroke="#ddd"/>',
        f'<polyline points="{path}" fill="none" stroke="#1f4e9c" stroke-width="1"/>',
        f'<text x="{ox + PAD}" y="{PAD - 10}" font-size="13" font-family="sans-serif">{title}</text>',
    ]


def analysis_svg(cmap: PwAffineMap, psi_points: list | None, model: PwAffineMap | None, depth: int = 16) -> str:
    panels = [("map", map_polyline(cmap, depth))]
    if psi_points:
        panels.append(("conjugacy psi", [(float(x), float(y)) for x, y in psi_points]))
    if model is not None:
        panels.append(("constant slope model", map_polyline(model, depth)))
    width = len(panels) * (PANEL + 2 * PAD)
    height = PANEL + 2 * PAD + 20
    body = []
    for i, (title, pts) in enumerate(panels):
        body += _panel(pts, i * (PANEL + 2 * PAD), title)
    body.append(f'<text x="{PAD}" y="{height - 8}" font-size="11" font-family="sans-serif">'
                f'tail families drawn to depth {depth}</text>')
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">\n' + "\n".join(body) + "\n</svg>\n")


def psi_polyline(model, grid: int = 256) -> list:
    pts = {Fraction(i, grid) for i in range(grid + 1)}
    pts.update(x for x, _ in model.conjugacy.samples(6))
    return [(x, model.psi(x)) for x in sorted(pts)]

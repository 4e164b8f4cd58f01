"""Deterministic SVG phase portraits of the reduced (x, n) plane.

Hand-rolled SVG keeps the output free of library version strings and
timestamps, so identical inputs produce byte-identical files.  A portrait
shows sampled orbits from a lattice of starts, the seven fixed points
(filled when stable, open otherwise), and the linear separatrix when the
regime is bistable.
"""

from __future__ import annotations

from .basins import separatrix_linear
from .dynamics import ModelParams
from .equilibria import STABLE, enumerate_fixed_points
from .errors import VaxgameError
from .integrate import IntegrationConfig, simulate_reduced

__all__ = ["phase_portrait_svg"]

_SIZE = 520
_MARGIN = 50
_PLOT = _SIZE - 2 * _MARGIN


def _sx(x: float) -> float:
    return _MARGIN + x * _PLOT


def _sy(n: float) -> float:
    return _MARGIN + (1.0 - n) * _PLOT


def phase_portrait_svg(p: ModelParams, cfg: IntegrationConfig | None = None,
                       starts: list[tuple[float, float]] | None = None) -> str:
    """Render orbits, fixed points, and (if bistable) the separatrix line."""
    cfg = cfg or IntegrationConfig(dt=1e-3, t_max=400.0, record_every=200)
    if starts is None:
        lattice = [(i + 0.5) / 6.0 for i in range(6)]
        starts = [(x0, n0) for x0 in lattice for n0 in lattice]

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SIZE}" height="{_SIZE}" '
        f'viewBox="0 0 {_SIZE} {_SIZE}">',
        f'<rect x="0" y="0" width="{_SIZE}" height="{_SIZE}" fill="white"/>',
        f'<rect x="{_MARGIN}" y="{_MARGIN}" width="{_PLOT}" height="{_PLOT}" '
        f'fill="none" stroke="black" stroke-width="1"/>',
        f'<text x="{_SIZE // 2}" y="{_SIZE - 12}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="16">vaccination level x</text>',
        f'<text x="16" y="{_SIZE // 2}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="16" '
        f'transform="rotate(-90 16 {_SIZE // 2})">perceived risk n</text>',
    ]

    for x0, n0 in starts:
        traj = simulate_reduced(p, x0, n0, cfg)
        pts = " ".join(
            f"{_sx(float(x)):.2f},{_sy(float(n)):.2f}" for x, n in traj.states
        )
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="#9a9a9a" '
            f'stroke-width="1"/>'
        )

    try:
        sep = separatrix_linear(p)
        pts = []
        for x_edge in (0.0, 1.0):
            n_edge = sep.n_at(x_edge)
            if 0.0 <= n_edge <= 1.0:
                pts.append((x_edge, n_edge))
        for n_edge in (0.0, 1.0):
            if sep.slope != 0.0:
                x_edge = (n_edge - sep.intercept) / sep.slope
                if 0.0 < x_edge < 1.0:
                    pts.append((x_edge, n_edge))
        if len(pts) >= 2:
            (xa, na), (xb, nb) = pts[0], pts[-1]
            parts.append(
                f'<line x1="{_sx(xa):.2f}" y1="{_sy(na):.2f}" '
                f'x2="{_sx(xb):.2f}" y2="{_sy(nb):.2f}" stroke="#e6882d" '
                f'stroke-width="2" stroke-dasharray="7,5"/>'
            )
    except VaxgameError:
        pass  # no saddle / not bistable: portrait without a separatrix

    for fp in enumerate_fixed_points(p):
        if not fp.exists:
            continue
        if fp.classification == STABLE:
            style = 'fill="#1f6fb4" stroke="black"'
        else:
            style = 'fill="white" stroke="black"'
        parts.append(
            f'<circle cx="{_sx(fp.x):.2f}" cy="{_sy(fp.n):.2f}" r="6" {style} '
            f'stroke-width="1.5"/>'
        )

    parts.append("</svg>")
    return "\n".join(parts) + "\n"

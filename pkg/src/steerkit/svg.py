"""Minimal static SVG: scatter points plus a polyline, no plotting dependency."""
from __future__ import annotations

import numpy as np

from .criteria import Ensemble, bound_curve


def ensemble_svg(ens: Ensemble, width: int = 480, height: int = 360, pad: int = 48) -> str:
    """Ensemble in the (||Tx||, v.x) plane with the POVM boundary curve.

    Points left of the curve satisfy the nonsteerability condition.
    """
    p_ext = max(0.05, float(np.max(np.abs(ens.b_dot_x))) * 1.2)
    ps = np.linspace(-p_ext, p_ext, 201)
    qs = bound_curve(ens.epsilon, ps)
    q_lo = min(float(ens.t_norm.min()), float(qs.min())) - 0.02
    q_hi = max(float(ens.t_norm.max()), float(qs.max())) + 0.02

    def sx(q):
        return pad + (q - q_lo) / (q_hi - q_lo) * (width - 2 * pad)

    def sy(p):
        return height - pad - (p + p_ext) / (2 * p_ext) * (height - 2 * pad)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="{pad}" y="{pad}" width="{width - 2 * pad}" height="{height - 2 * pad}" fill="none" stroke="#444"/>',
        f'<text x="{width / 2}" y="{height - 12}" text-anchor="middle" font-size="12">||T x||</text>',
        f'<text x="14" y="{height / 2}" text-anchor="middle" font-size="12" transform="rotate(-90 14 {height / 2})">b . x</text>',
        f'<text x="{pad}" y="{pad - 8}" font-size="11">{q_lo:.4f}</text>',
        f'<text x="{width - pad}" y="{pad - 8}" text-anchor="end" font-size="11">{q_hi:.4f}</text>',
    ]
    line = " ".join(f"{sx(q):.2f},{sy(p):.2f}" for p, q in zip(ps, qs))
    out.append(f'<polyline points="{line}" fill="none" stroke="#7b2cbf" stroke-width="1.5"/>')
    for p, q, flag in zip(ens.b_dot_x, ens.t_norm, ens.is_argmax):
        if flag:
            continue
        out.append(f'<circle cx="{sx(q):.2f}" cy="{sy(p):.2f}" r="1.6" fill="#029e73" fill-opacity="0.6"/>')
    k = ens.argmax_index
    out.append(
        f'<circle cx="{sx(ens.t_norm[k]):.2f}" cy="{sy(ens.b_dot_x[k]):.2f}" r="5" fill="none" stroke="#d55e00" stroke-width="2"/>'
    )
    out.append("</svg>")
    return "\n".join(out) + "\n"

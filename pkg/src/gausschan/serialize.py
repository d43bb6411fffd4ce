"""Deterministic text serialization: CSV tables and JSON mirrors.

All reals are written with 17 significant digits, enough to round-trip a
double exactly, so a file regenerated from identical inputs is byte-identical.
Kernel dumps use the ``k,l,p`` layout with one ``<k>,tail,<value>`` row per
input level; single distributions use ``l,p`` with a final ``tail,<value>``
row.  Sweep tables use the fixed header ``n,R,bound,exponent,delta2,delta4,
delta5``; the JSON mirror carries a ``components`` object per row.
"""

from __future__ import annotations

import json
from typing import Iterable, Sequence

from .converse import SweepRow
from .fock import PhotonDistribution, PhotonKernel

SWEEP_HEADER = "n,R,bound,exponent,delta2,delta4,delta5"


def fmt(value) -> str:
    """Render one cell: 17 significant digits for reals, plain text otherwise."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    if value is None:
        return ""
    return str(value)


def rows_to_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(fmt(cell) for cell in row) for row in rows)
    return "\n".join(lines) + "\n"


def distribution_csv(dist: PhotonDistribution) -> str:
    lines = ["l,p"]
    lines.extend(f"{l},{fmt(float(p))}" for l, p in enumerate(dist.mass))
    lines.append(f"tail,{fmt(dist.tail_mass)}")
    return "\n".join(lines) + "\n"


def kernel_csv(kern: PhotonKernel) -> str:
    lines = ["k,l,p"]
    for k in range(kern.k_max + 1):
        lines.extend(f"{k},{l},{fmt(float(p))}" for l, p in enumerate(kern.probs[k]))
        lines.append(f"{k},tail,{fmt(float(kern.row_tails[k]))}")
    return "\n".join(lines) + "\n"


def sweep_csv(rows: Sequence[SweepRow]) -> str:
    lines = [SWEEP_HEADER]
    lines.extend(
        ",".join(
            (str(r.n), fmt(r.rate), fmt(r.bound), fmt(r.exponent),
             fmt(r.delta2), fmt(r.delta4), fmt(r.delta5))
        )
        for r in rows
    )
    return "\n".join(lines) + "\n"


def sweep_json(rows: Sequence[SweepRow]) -> str:
    payload = {
        "rows": [
            {
                "n": r.n,
                "R": r.rate,
                "bound": r.bound,
                "exponent": r.exponent,
                "delta2": r.delta2,
                "delta4": r.delta4,
                "delta5": r.delta5,
                "form": r.form,
                "components": r.components,
            }
            for r in rows
        ]
    }
    return json.dumps(payload, indent=2) + "\n"

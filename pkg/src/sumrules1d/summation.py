"""Deterministic summation and series-acceleration helpers.

All spectral sums in the toolkit go through these routines so that results
are bit-identical regardless of evaluation order: terms are generated in
ascending index and accumulated with exact (Shewchuk-style compensated)
summation, which is also independent of term order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "compensated_sum",
    "running_partials",
    "doubling_milestones",
    "extrapolate_power_tail",
    "partials_diverge",
    "richardson_table",
]


def compensated_sum(terms) -> float:
    """Exactly rounded sum of a float iterable (order independent)."""
    return math.fsum(terms)


def doubling_milestones(j_max: int, levels: int = 6) -> list[int]:
    """Milestones j_max/2^k .. j_max for tail extrapolation, smallest first.

    Milestones keep a factor of two between entries so power-law tails give
    geometric increments; they are rounded to multiples of four so that
    parity-masked term patterns see a consistent phase.  Entries below 8
    terms are dropped.
    """
    ms = []
    for k in range(levels - 1, 0, -1):
        m = 4 * round(j_max / 2**k / 4)
        if m >= 8:
            ms.append(m)
    ms.append(j_max)
    return sorted(set(ms))


def running_partials(terms: np.ndarray, milestones: list[int]) -> list[tuple[int, float]]:
    """Exact partial sums of terms[:m] at each milestone m.

    terms[k] is the k-th generated term (ascending index order); milestones
    count generated terms, not state indices.
    """
    out = []
    for m in milestones:
        m = min(m, len(terms))
        out.append((m, math.fsum(terms[:m])))
    return out


@dataclass
class TailExtrapolation:
    value: float
    raw_partial: float
    tail_estimate: float
    used_aitken: bool
    increment_ratio: float | None = None


def _aitken_once(seq: list[float]) -> list[float]:
    out = []
    for i in range(len(seq) - 2):
        d2 = seq[i + 2] - 2 * seq[i + 1] + seq[i]
        if d2 == 0.0:
            out.append(seq[i + 2])
        else:
            out.append(seq[i + 2] - (seq[i + 2] - seq[i + 1]) ** 2 / d2)
    return out


def extrapolate_power_tail(partials: list[tuple[int, float]]) -> TailExtrapolation:
    """Iterated Aitken extrapolation of partial sums with a power-law tail.

    For P(J) = S - c J^(-p) with doubled milestones the increments decay
    geometrically and each Aitken pass removes the leading power; iterating
    handles slow half-integer tails.  Falls back to the last partial when the
    increments are not contracting (oscillatory or non-decaying tails).
    """
    values = [v for _, v in partials]
    if len(values) < 3:
        return TailExtrapolation(values[-1], values[-1], 0.0, False)
    d1 = values[-2] - values[-3]
    d2 = values[-1] - values[-2]
    if d1 == 0.0 or d2 == 0.0:
        return TailExtrapolation(values[-1], values[-1], 0.0, False)
    rho = d2 / d1
    if not (0.0 < rho < 0.97):
        return TailExtrapolation(values[-1], values[-1], 0.0, False, rho)
    seq = values
    best = values[-1]
    while len(seq) >= 3:
        nxt = _aitken_once(seq)
        if not nxt or not all(math.isfinite(v) for v in nxt):
            break
        best = nxt[-1]
        seq = nxt
    return TailExtrapolation(best, values[-1], best - values[-1], True, rho)


def partials_diverge(partials: list[tuple[int, float]], window: int = 5) -> bool:
    """Detect divergence: |partial sums| growing monotonically over the
    last `window` milestones with non-contracting increments.

    Catches both power-law and logarithmic (harmonic-tail) divergence, the
    latter having constant increments between doubled milestones.
    """
    vals = [abs(v) for _, v in partials]
    if len(vals) < 3:
        return False
    tail = vals[-window:] if len(vals) >= window else vals
    growing = all(b > a for a, b in zip(tail, tail[1:]))
    if not growing:
        return False
    incs = [b - a for a, b in zip(tail, tail[1:])]
    if len(incs) < 2:
        return False
    # Convergent power tails contract increments by ~2^p per doubling; a
    # ratio stuck near or above 1 means the sum is running away.
    ratios = [b / a for a, b in zip(incs, incs[1:]) if a > 0]
    return bool(ratios) and min(ratios) > 0.8


@dataclass
class RichardsonResult:
    value: float
    levels: list[float] = field(default_factory=list)
    last_delta: float = math.nan


def richardson_table(samples: list[float], step_ratio: float,
                     max_order: int | None = None) -> RichardsonResult:
    """Richardson extrapolation of samples S(h_k) with h_k = h_0 / step_ratio^k.

    Eliminates successive powers h, h^2, ... of the step variable; used with
    h = sqrt(epsilon) for regularized spectral sums whose error expands in
    half powers of the damping parameter.
    """
    rows = [list(samples)]
    order = 1
    while len(rows[-1]) > 1 and (max_order is None or order <= max_order):
        prev = rows[-1]
        rho = step_ratio**order
        rows.append([(rho * prev[i + 1] - prev[i]) / (rho - 1.0)
                     for i in range(len(prev) - 1)])
        order += 1
    tops = [row[-1] for row in rows]
    delta = abs(tops[-1] - tops[-2]) if len(tops) > 1 else math.nan
    return RichardsonResult(tops[-1], tops, delta)

"""At-eigenenergy kernel G(r, r~) and its first-order differential relations.

G is the spectral sum over all states except the reference one, evaluated at
that state's own energy:

    G(r, r~) = sum_{j != n} psi_j(r) psi_j(r~) / (E_n - E_j),

kept as an on-demand evaluation (memory stays linear in the grid); a dense
grid-squared table is available behind an explicit call for heatmap dumps.
The r-derivative of a truncated kernel is always accumulated term-wise from
the states' derivative samples, never by differencing the truncated sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .eigensolver import Grid, Spectrum
from .errors import InsufficientStates, NodeInPath, OutOfDomain
from .ladders import StateLadder, ladder_for
from .summation import compensated_sum
from .waveanalysis import (
    CumulativeDensity,
    find_nodes,
    integrate_fn,
    interpolate_state,
)

__all__ = [
    "g_kernel",
    "g_kernel_dense",
    "box_g_closed",
    "g_ode_residual",
    "s_relation",
    "integrated_relation",
    "export_kernel_csv",
]


def _step(z: float) -> float:
    """Unit step with the symmetric convention theta(0) = 1/2."""
    if z > 0.0:
        return 1.0
    if z < 0.0:
        return 0.0
    return 0.5


@dataclass
class _KernelContext:
    spectrum: Spectrum
    n: int
    ladder: StateLadder
    e_n: float
    density: CumulativeDensity

    @property
    def grid(self) -> Grid:
        return self.spectrum.grid


def _context(spectrum: Spectrum, n: int) -> _KernelContext:
    if not 1 <= n <= spectrum.count:
        raise InsufficientStates(
            f"reference state {n} not stored (spectrum holds {spectrum.count})"
        )
    state = spectrum.state(n)
    density = CumulativeDensity(
        spectrum.grid,
        state.values**2,
        2.0 * state.values * state.derivative_values,
    )
    return _KernelContext(spectrum, n, ladder_for(spectrum), state.energy, density)


def _kernel_terms(ctx: _KernelContext, r: float, rt: float, J: int) -> np.ndarray:
    ctx.ladder.require(J)
    vr = ctx.ladder.values_at(r, J)
    vt = vr if rt == r else ctx.ladder.values_at(rt, J)
    denom = ctx.e_n - ctx.ladder.energies(J)
    denom[ctx.n - 1] = 1.0   # excluded term, zeroed below
    terms = vr * vt / denom
    terms[ctx.n - 1] = 0.0
    return terms


def g_kernel(spectrum: Spectrum, n: int, r: float, rt: float, J: int) -> float:
    """Truncated kernel value; terms accumulate in ascending state index."""
    ctx = _context(spectrum, n)
    if not (ctx.grid.contains(r) and ctx.grid.contains(rt)):
        raise OutOfDomain("kernel arguments outside the grid")
    return compensated_sum(_kernel_terms(ctx, r, rt, J))


def g_kernel_dense(spectrum: Spectrum, n: int, r_values, rt_values,
                   J: int) -> np.ndarray:
    """Dense kernel table over r_values x rt_values (explicit opt-in)."""
    ctx = _context(spectrum, n)
    ctx.ladder.require(J)
    denom = ctx.e_n - ctx.ladder.energies(J)
    denom[ctx.n - 1] = 1.0
    vr = np.stack([ctx.ladder.values_at(float(r), J) for r in r_values])
    vt = np.stack([ctx.ladder.values_at(float(t), J) for t in rt_values])
    vr[:, ctx.n - 1] = 0.0
    return (vr / denom) @ vt.T


def box_g_closed(n: int, r: float, rt: float) -> float:
    """Closed form of the box kernel (independent oracle).

    Written with the cotangents multiplied through so it stays finite at the
    zeros of sin(n r).
    """
    lo, hi = (r, rt) if r <= rt else (rt, r)
    s_r, c_r = math.sin(n * r), math.cos(n * r)
    s_t, c_t = math.sin(n * rt), math.cos(n * rt)
    s_lo = math.sin(n * lo)
    c_hi = math.cos(n * hi)
    inner = (-s_r * s_t / (2.0 * n) + r * c_r * s_t + rt * s_r * c_t
             - math.pi * s_lo * c_hi)
    return inner / (math.pi * n)


def g_ode_residual(spectrum: Spectrum, n: int, r: float, rt: float,
                   J: int) -> float:
    """Residual of the kernel's defining first-order relation at truncation J.

    (psi_n d/dr - dpsi_n) G(r, r~) must balance
    -psi_n(r~) [theta(r - r~) int_{x1}^{r} + theta(r~ - r) int_{x0}^{r}] psi_n^2,
    with theta(0) = 1/2 at coincidence.  The r-derivative of G is taken
    term-wise from derivative samples.
    """
    ctx = _context(spectrum, n)
    ctx.ladder.require(J)
    denom = ctx.e_n - ctx.ladder.energies(J)
    denom[ctx.n - 1] = 1.0
    vr = ctx.ladder.values_at(r, J)
    dr = ctx.ladder.derivatives_at(r, J)
    vt = ctx.ladder.values_at(rt, J)
    mask = np.ones(J)
    mask[ctx.n - 1] = 0.0
    g_val = compensated_sum(mask * vr * vt / denom)
    dg_val = compensated_sum(mask * dr * vt / denom)

    state = spectrum.state(n)
    psin_r, dpsin_r = interpolate_state(state, ctx.grid, r)
    psin_t, _ = interpolate_state(state, ctx.grid, rt)
    total = ctx.density.total
    from_x1 = ctx.density(r) - total
    from_x0 = ctx.density(r)
    rhs = psin_t * (_step(r - rt) * from_x1 + _step(rt - r) * from_x0)
    return psin_r * dg_val - dpsin_r * g_val + rhs


def _require_after_last_node(ctx: _KernelContext, points) -> float:
    state = ctx.spectrum.state(ctx.n)
    nodes = find_nodes(state, ctx.grid)
    rtilde0 = nodes[-1].location if nodes else ctx.grid.x0
    for p in points:
        if not rtilde0 < p < ctx.grid.x1:
            raise NodeInPath(
                f"point {p:.12g} not inside ({rtilde0:.12g}, {ctx.grid.x1:.12g}), "
                f"the nodeless tail of state {ctx.n}"
            )
    return rtilde0


def _inv_density_fn(ctx: _KernelContext):
    psi = ctx.ladder.state_fn(ctx.n)

    def inv(y: np.ndarray) -> np.ndarray:
        vals = psi(y)
        return 1.0 / (vals * vals)

    return inv


def s_relation(spectrum: Spectrum, n: int, r: float, r2: float, J: int):
    """Diagonal kernel S(r) = G(r, r) against its integrated form from r2.

    lhs is the truncated diagonal sum at r; rhs transports S(r2) to r through
    psi_n^2 (d/dr)(S / psi_n^2) = int_r^{x1} psi_n^2 - int_{x0}^{r} psi_n^2.
    Both points must sit beyond the outermost node of state n.
    """
    ctx = _context(spectrum, n)
    _require_after_last_node(ctx, (r, r2))
    lhs = compensated_sum(_kernel_terms(ctx, r, r, J))
    s_r2 = compensated_sum(_kernel_terms(ctx, r2, r2, J))

    state = spectrum.state(n)
    psin_r, _ = interpolate_state(state, ctx.grid, r)
    psin_r2, _ = interpolate_state(state, ctx.grid, r2)
    density = ctx.density
    total = density.total
    inv = _inv_density_fn(ctx)

    def balance(y: np.ndarray) -> np.ndarray:
        c = density(y)
        return (total - 2.0 * c) * inv(y)

    transport = integrate_fn(balance, r2, r) if r != r2 else 0.0
    rhs = psin_r**2 * (s_r2 / psin_r2**2 + transport)
    return lhs, rhs


def integrated_relation(spectrum: Spectrum, n: int, r: float, rt: float,
                        r2: float, J: int):
    """Kernel ratio transported from r2 to r for a fixed second argument.

    lhs = G(r, r~)/psi_n(r) - G(r2, r~)/psi_n(r2); rhs integrates the step
    split of the completeness balance along y, splitting the quadrature at
    the kink y = r~ when the path crosses it.
    """
    ctx = _context(spectrum, n)
    _require_after_last_node(ctx, (r, r2))
    if not ctx.grid.x0 < rt < ctx.grid.x1:
        raise OutOfDomain("second argument must lie inside the domain")
    state = spectrum.state(n)
    psin_r, _ = interpolate_state(state, ctx.grid, r)
    psin_r2, _ = interpolate_state(state, ctx.grid, r2)
    psin_t, _ = interpolate_state(state, ctx.grid, rt)
    g_r = compensated_sum(_kernel_terms(ctx, r, rt, J))
    g_r2 = compensated_sum(_kernel_terms(ctx, r2, rt, J))
    lhs = g_r / psin_r - g_r2 / psin_r2

    density = ctx.density
    total = density.total
    inv = _inv_density_fn(ctx)

    def upper(y):  # y > rt branch
        return (total - density(y)) * inv(y)

    def lower(y):  # y < rt branch
        return -density(y) * inv(y)

    lo, hi = min(r2, r), max(r2, r)
    if rt <= lo:
        q = integrate_fn(upper, r2, r)
    elif rt >= hi:
        q = integrate_fn(lower, r2, r)
    else:
        sign = 1.0 if r >= r2 else -1.0
        q = sign * (integrate_fn(lower, lo, rt) + integrate_fn(upper, rt, hi))
    rhs = psin_t * q
    return lhs, rhs


def export_kernel_csv(spectrum: Spectrum, n: int, r_values, rt_values, J: int,
                      path) -> None:
    """CSV dump of kernel triples (r, r~, G)."""
    table = g_kernel_dense(spectrum, n, r_values, rt_values, J)
    with open(path, "w") as fh:
        fh.write("r,r_tilde,G\n")
        for i, r in enumerate(r_values):
            for k, t in enumerate(rt_values):
                fh.write(f"{r!r},{t!r},{table[i, k]!r}\n")

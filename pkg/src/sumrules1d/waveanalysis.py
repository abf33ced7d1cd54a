"""Critical points, off-grid evaluation, quadrature, and companion solutions.

Off-grid evaluation is 4-point cubic throughout: values interpolate the value
samples, derivatives interpolate the stored derivative samples (exact for
analytic states), matching the second-order solver accuracy without Runge
artifacts near walls.

Closed quadrature is composite trapezoid with cubic partial end cells plus
the first Euler-Maclaurin endpoint-slope correction, which keeps smooth-array
integrals at fourth order.  Open-midpoint quadrature never touches interval
endpoints and refines by cell halving until two successive refinements agree.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .eigensolver import BoundState, Grid, Spectrum
from .errors import (
    CoincidentPoints,
    DegenerateEnergies,
    InvalidDomain,
    NodeCountMismatch,
    NodeInPath,
    NonFinite,
    OutOfDomain,
)

__all__ = [
    "CriticalKind",
    "CriticalPoint",
    "IntegrationScheme",
    "find_nodes",
    "find_extrema",
    "last_node",
    "interpolate_state",
    "interpolate_array",
    "integrate",
    "integrate_fn",
    "CumulativeDensity",
    "second_solution",
    "second_solution_with_derivative",
    "wronskian",
    "wronskian_at",
    "overlap_partial",
    "export_critical_points",
]

NODE_TOL = 1e-10          # relative to max amplitude
BISECT_WIDTH = 1e-12      # refinement stops when the bracket is this narrow
_SIGN_FLOOR = 1e-8        # census floor relative to max amplitude


class CriticalKind(Enum):
    NODE = "node"
    EXTREMUM = "extremum"


class IntegrationScheme(Enum):
    CLOSED = "closed"
    OPEN_MIDPOINT = "open_midpoint"


@dataclass(frozen=True)
class CriticalPoint:
    kind: CriticalKind
    location: float
    owner_index: int
    bracketing_cells: tuple[int, int]
    refined_derivative: float | None = None
    refined_value: float | None = None
    is_outermost: bool = False


# Local cubic through samples at stencil offsets (-1, 0, 1, 2); rows map
# samples to polynomial coefficients in the cell coordinate t.
_CUBIC_COEFF = np.array([
    [0.0, 1.0, 0.0, 0.0],
    [-1.0 / 3.0, -0.5, 1.0, -1.0 / 6.0],
    [0.5, -1.0, 0.5, 0.0],
    [-1.0 / 6.0, 0.5, -0.5, 1.0 / 6.0],
])


def _stencil_start(grid: Grid, r: float) -> int:
    k = grid.index_below(r)
    return min(max(k - 1, 0), grid.n_points - 4)


def _local_t(grid: Grid, i0: int, r: float) -> float:
    return (r - (grid.x0 + (i0 + 1) * grid.h)) / grid.h


def interpolate_array(grid: Grid, arr: np.ndarray, r: float) -> float:
    """Cubic interpolation of a grid-sampled array at one point."""
    if not grid.contains(r):
        raise OutOfDomain(f"{r} outside [{grid.x0}, {grid.x1}]")
    k = round((r - grid.x0) / grid.h)
    if 0 <= k < grid.n_points and abs(r - (grid.x0 + k * grid.h)) <= 1e-13 * max(
        1.0, abs(grid.x1), abs(grid.x0)
    ):
        return float(arr[k])
    i0 = _stencil_start(grid, r)
    t = _local_t(grid, i0, r)
    c = _CUBIC_COEFF @ arr[i0:i0 + 4]
    return float(c[0] + t * (c[1] + t * (c[2] + t * c[3])))


def interpolate_array_many(grid: Grid, arr: np.ndarray, r: np.ndarray) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    k = np.clip(((r - grid.x0) / grid.h).astype(int), 0, grid.n_points - 2)
    i0 = np.clip(k - 1, 0, grid.n_points - 4)
    t = (r - (grid.x0 + (i0 + 1) * grid.h)) / grid.h
    window = arr[i0[:, None] + np.arange(4)]
    c = window @ _CUBIC_COEFF.T
    return c[:, 0] + t * (c[:, 1] + t * (c[:, 2] + t * c[:, 3]))


def interpolate_state(state: BoundState, grid: Grid, r: float):
    """(value, derivative) at r; derivatives come from the stored derivative
    samples rather than differentiating the value interpolant."""
    value = interpolate_array(grid, state.values, r)
    deriv = interpolate_array(grid, state.derivative_values, r)
    return value, deriv


def _refine_zero(grid: Grid, arr: np.ndarray, i_lo: int, i_hi: int) -> float:
    """Bisection of the cubic interpolant between two opposite-sign samples."""
    x = grid.points
    a, b = float(x[i_lo]), float(x[i_hi])
    fa = float(arr[i_lo])
    interp = lambda r: interpolate_array(grid, arr, r)
    while b - a > BISECT_WIDTH:
        m = 0.5 * (a + b)
        fm = interp(m)
        if fm == 0.0:
            return m
        if (fa < 0) != (fm < 0):
            b = m
        else:
            a, fa = m, fm
    return 0.5 * (a + b)


def _sign_change_brackets(arr: np.ndarray) -> list[tuple[int, int]]:
    """Bracketing sample pairs for interior zeros, skipping samples whose
    amplitude sits below the census floor (eigenvector tail noise)."""
    amax = float(np.abs(arr[1:-1]).max())
    if amax == 0.0:
        return []
    cut = _SIGN_FLOOR * amax
    brackets = []
    prev_idx = None
    prev_sign = 0.0
    for k in range(1, len(arr) - 1):
        v = arr[k]
        if abs(v) <= cut:
            continue
        s = 1.0 if v > 0 else -1.0
        if prev_idx is not None and s != prev_sign:
            brackets.append((prev_idx, k))
        prev_idx, prev_sign = k, s
    return brackets


def find_nodes(state: BoundState, grid: Grid) -> list[CriticalPoint]:
    """Interior zeros of the state, refined to the interpolant's root.

    A state of index j must show exactly j - 1 of them; anything else means
    the grid cannot resolve the state and raises NodeCountMismatch.  The
    largest location is flagged as the outermost node.
    """
    brackets = _sign_change_brackets(state.values)
    expected = state.index_j - 1
    if len(brackets) != expected:
        raise NodeCountMismatch(
            f"state {state.index_j}: found {len(brackets)} interior zeros, "
            f"expected {expected}"
        )
    points = []
    for i_lo, i_hi in brackets:
        loc = _refine_zero(grid, state.values, i_lo, i_hi)
        deriv = interpolate_array(grid, state.derivative_values, loc)
        points.append(CriticalPoint(CriticalKind.NODE, loc, state.index_j,
                                    (i_lo, i_hi), refined_derivative=deriv))
    if points:
        outer = max(range(len(points)), key=lambda i: points[i].location)
        points[outer] = CriticalPoint(
            CriticalKind.NODE, points[outer].location, state.index_j,
            points[outer].bracketing_cells,
            refined_derivative=points[outer].refined_derivative,
            is_outermost=True,
        )
    return points


def find_extrema(state: BoundState, grid: Grid) -> list[CriticalPoint]:
    """Interior zeros of the derivative; a state of index j has exactly j."""
    brackets = _sign_change_brackets(state.derivative_values)
    if len(brackets) != state.index_j:
        raise NodeCountMismatch(
            f"state {state.index_j}: found {len(brackets)} extrema, "
            f"expected {state.index_j}"
        )
    points = []
    for i_lo, i_hi in brackets:
        loc = _refine_zero(grid, state.derivative_values, i_lo, i_hi)
        value = interpolate_array(grid, state.values, loc)
        points.append(CriticalPoint(CriticalKind.EXTREMUM, loc, state.index_j,
                                    (i_lo, i_hi), refined_value=value))
    return points


def last_node(state: BoundState, grid: Grid) -> float | None:
    """Location of the outermost node, or None for a nodeless ground state."""
    nodes = find_nodes(state, grid)
    return nodes[-1].location if nodes else None


def _cell_cubic_integral(grid: Grid, arr: np.ndarray, a: float, b: float) -> float:
    """Exact integral of the local cubic interpolant over [a, b] (one cell)."""
    if a == b:
        return 0.0
    i0 = _stencil_start(grid, 0.5 * (a + b))
    c = _CUBIC_COEFF @ arr[i0:i0 + 4]
    ta, tb = _local_t(grid, i0, a), _local_t(grid, i0, b)

    def anti(t):
        return t * (c[0] + t * (c[1] / 2 + t * (c[2] / 3 + t * c[3] / 4)))

    return grid.h * (anti(tb) - anti(ta))


def _slope_at(grid: Grid, arr: np.ndarray, k: int) -> float:
    """4-point finite-difference slope at sample k (for the trapezoid
    endpoint correction)."""
    n = len(arr)
    h = grid.h
    if 2 <= k <= n - 3:
        return (arr[k - 2] - 8 * arr[k - 1] + 8 * arr[k + 1] - arr[k + 2]) / (12 * h)
    if k < 2:
        i = 0
        sign = 1.0
    else:
        i = n - 1
        sign = -1.0
        arr = arr[::-1]
        k = n - 1 - k
    f = arr[k:k + 4] if k + 4 <= len(arr) else arr[-4:]
    return sign * (-11 * f[0] + 18 * f[1] - 9 * f[2] + 2 * f[3]) / (6 * h)


def integrate(f: np.ndarray, grid: Grid, a: float, b: float,
              scheme: IntegrationScheme = IntegrationScheme.CLOSED) -> float:
    """Integral of a grid-sampled function over [a, b] inside the domain.

    CLOSED: corrected composite trapezoid with cubic partial cells at the
    endpoints.  OPEN_MIDPOINT: composite midpoint on the interpolated array,
    halving panels until two refinements agree to 1e-8 relative (20-halving
    cap); endpoint samples are never evaluated, for integrands singular at
    interval ends.
    """
    if not (grid.contains(a) and grid.contains(b)) or a > b + 1e-15:
        raise OutOfDomain(f"integration range [{a}, {b}] invalid for grid")
    if b <= a:
        return 0.0
    if scheme is IntegrationScheme.OPEN_MIDPOINT:
        return integrate_fn(lambda r: interpolate_array_many(grid, f, r), a, b)

    x = grid.points
    snap = 1e-9 * grid.h
    ia = int(math.ceil((a - grid.x0) / grid.h - 1e-9))
    ib = int(math.floor((b - grid.x0) / grid.h + 1e-9))
    ia = min(max(ia, 0), grid.n_points - 1)
    ib = min(max(ib, 0), grid.n_points - 1)
    if ia > ib:
        val = _cell_cubic_integral(grid, f, a, b)
        if not math.isfinite(val):
            raise NonFinite("non-finite sample in integration range")
        return val
    used = f[max(ia - 2, 0):min(ib + 3, grid.n_points)]
    if not np.all(np.isfinite(used)):
        raise NonFinite("non-finite sample in integration range")
    total = 0.0
    if ib > ia:
        seg = f[ia:ib + 1]
        total += grid.h * (seg.sum() - 0.5 * (seg[0] + seg[-1]))
        # first Euler-Maclaurin correction: lifts smooth arrays to O(h^4)
        total += (grid.h**2 / 12.0) * (_slope_at(grid, f, ia) - _slope_at(grid, f, ib))
    if x[ia] - a > snap:
        total += _cell_cubic_integral(grid, f, a, float(x[ia]))
    if b - x[ib] > snap:
        total += _cell_cubic_integral(grid, f, float(x[ib]), b)
    if not math.isfinite(total):
        raise NonFinite("non-finite integral")
    return float(total)


def integrate_fn(fn, a: float, b: float, rel_tol: float = 1e-8,
                 max_halvings: int = 20, initial_panels: int = 16) -> float:
    """Adaptive composite midpoint rule for a callable on [a, b].

    fn must accept a numpy array of sample points.  Endpoints are never
    evaluated.  One Richardson level is applied to the last two refinements.
    """
    if b == a:
        return 0.0
    sign = 1.0
    if b < a:
        a, b = b, a
        sign = -1.0
    m = initial_panels
    prev = None
    for _ in range(max_halvings + 1):
        width = (b - a) / m
        mids = a + (np.arange(m) + 0.5) * width
        vals = np.asarray(fn(mids), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise NonFinite("non-finite integrand sample in open quadrature")
        cur = float(math.fsum(vals) * width)
        if prev is not None:
            if abs(cur - prev) <= rel_tol * max(abs(cur), 1e-300):
                return sign * (cur + (cur - prev) / 3.0)
            best = cur
        prev = cur
        m *= 2
    return sign * best


class CumulativeDensity:
    """Running integral C(y) = int_{x0}^{y} f for a grid-sampled f.

    Grid-point values use corrected cumulative trapezoids (fourth order when
    slope samples are supplied); off-grid queries add an exact local-cubic
    partial cell.  Queries accept scalars or arrays and are vectorized; this
    sits inside every composed-integrand quadrature, so it has to be fast.
    """

    def __init__(self, grid: Grid, f: np.ndarray, slopes: np.ndarray | None = None):
        self.grid = grid
        self.f = np.asarray(f, dtype=float)
        h = grid.h
        cum = np.concatenate(([0.0], np.cumsum(0.5 * h * (self.f[1:] + self.f[:-1]))))
        if slopes is None:
            slopes = np.gradient(self.f, h, edge_order=2)
        cum += (h * h / 12.0) * (slopes[0] - slopes)
        cum[0] = 0.0
        self.cum = cum

    def __call__(self, y):
        scalar = np.isscalar(y)
        ys = np.atleast_1d(np.asarray(y, dtype=float))
        grid = self.grid
        if ys.size and (ys.min() < grid.x0 - 1e-12 or ys.max() > grid.x1 + 1e-12):
            raise OutOfDomain("cumulative query outside grid")
        h = grid.h
        k = np.clip(((ys - grid.x0) / h).astype(int), 0, grid.n_points - 2)
        i0 = np.clip(k - 1, 0, grid.n_points - 4)
        window = self.f[i0[:, None] + np.arange(4)]
        c = window @ _CUBIC_COEFF.T
        ta = (grid.x0 + k * h - (grid.x0 + (i0 + 1) * h)) / h
        tb = (ys - (grid.x0 + (i0 + 1) * h)) / h

        def anti(t):
            return t * (c[:, 0] + t * (c[:, 1] / 2 + t * (c[:, 2] / 3 + t * c[:, 3] / 4)))

        out = self.cum[k] + h * (anti(tb) - anti(ta))
        return float(out[0]) if scalar else out

    @property
    def total(self) -> float:
        return float(self.cum[-1])


def _check_no_nodes_between(state: BoundState, grid: Grid, lo: float, hi: float):
    nodes = find_nodes(state, grid)
    for p in nodes:
        if lo - 1e-12 <= p.location <= hi + 1e-12:
            raise NodeInPath(
                f"node of state {state.index_j} at {p.location:.12g} lies in "
                f"[{lo:.12g}, {hi:.12g}]"
            )


def second_solution_with_derivative(state: BoundState, grid: Grid, R: float,
                                    r_eval: np.ndarray):
    """Companion solution at the same energy and its derivative.

    psi~(r) = psi(r) * int_R^r dy / psi(y)^2, valid after the outermost node;
    the derivative follows from the same running integral, so the canonical
    pair has unit Wronskian by construction and the quadrature accuracy is
    checked through the differential equation instead.
    """
    r_eval = np.asarray(r_eval, dtype=float)
    rtilde0 = last_node(state, grid)
    lo_limit = rtilde0 if rtilde0 is not None else grid.x0
    pts = np.concatenate((r_eval, [R]))
    if pts.min() <= lo_limit + 1e-12:
        raise NodeInPath(
            f"second solution needs R and evaluation points above the "
            f"outermost node at {lo_limit:.12g}"
        )
    if r_eval.max() >= grid.x1 - 1e-12:
        raise OutOfDomain("evaluation points must stay inside the wall")

    def inv_sq(y):
        vals = interpolate_array_many(grid, state.values, y)
        return 1.0 / (vals * vals)

    order = np.argsort(r_eval)
    integrals = np.empty_like(r_eval)
    anchor, acc = R, 0.0
    for idx in order:
        r = r_eval[idx]
        acc += integrate_fn(inv_sq, anchor, r, rel_tol=1e-10)
        integrals[idx] = acc
        anchor = r
    values = np.empty_like(r_eval)
    derivs = np.empty_like(r_eval)
    for i, r in enumerate(r_eval):
        v, d = interpolate_state(state, grid, r)
        values[i] = v * integrals[i]
        derivs[i] = d * integrals[i] + 1.0 / v
    return values, derivs


def second_solution(state: BoundState, grid: Grid, R: float,
                    r_eval: np.ndarray) -> np.ndarray:
    values, _ = second_solution_with_derivative(state, grid, R, r_eval)
    return values


def wronskian(value_a: float, deriv_a: float, value_b: float,
              deriv_b: float) -> float:
    return value_a * deriv_b - deriv_a * value_b


def wronskian_at(state_a: BoundState, state_b: BoundState, grid: Grid,
                 r: float) -> float:
    va, da = interpolate_state(state_a, grid, r)
    vb, db = interpolate_state(state_b, grid, r)
    return wronskian(va, da, vb, db)


def overlap_partial(spectrum: Spectrum, j: int, k: int, r: float):
    """Partial overlap against its Wronskian form.

    lhs = int_{x0}^{r} psi_k psi_j dy,
    rhs = (psi_k dpsi_j - dpsi_k psi_j)(r) / (E_k - E_j);
    |lhs - rhs| is the residual diagnostic.
    """
    if j == k:
        raise InvalidDomain("overlap relation needs two distinct states")
    sj, sk = spectrum.state(j), spectrum.state(k)
    if abs(sk.energy - sj.energy) < 1e-12:
        raise DegenerateEnergies(f"E_{k} - E_{j} below 1e-12")
    product = sk.values * sj.values
    lhs = integrate(product, spectrum.grid, spectrum.grid.x0, r,
                    IntegrationScheme.CLOSED)
    vj, dj = interpolate_state(sj, spectrum.grid, r)
    vk, dk = interpolate_state(sk, spectrum.grid, r)
    rhs = (vk * dj - dk * vj) / (sk.energy - sj.energy)
    return lhs, rhs


def export_critical_points(points: list[CriticalPoint], path) -> None:
    rows = [
        {"kind": p.kind.value, "location": p.location,
         "owner_index": p.owner_index}
        for p in points
    ]
    with open(path, "w") as fh:
        json.dump(rows, fh, indent=2)
        fh.write("\n")

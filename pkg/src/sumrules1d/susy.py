"""Walled problems and their partner potentials.

Restricting the potential to the domain after the outermost node of a chosen
state, with an infinite wall at that node, makes the chosen state the
nodeless ground state of the restricted problem.  Deleting that ground state
with the standard partner construction,

    V_partner = V - (ln psi_n)'',

leaves a problem whose spectrum is the walled one minus its ground level,
and whose resolvent trace at E_n reduces to integrals over psi_n alone.
The log-derivative curvature is evaluated through the ratio identity
(ln psi)'' = (V - E_n) - (psi'/psi)^2, which avoids differencing the log
near the wall.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .eigensolver import (
    BoundState,
    Grid,
    PotentialKind,
    Spectrum,
    StateSource,
    build_grid,
    solve_numeric,
)
from .errors import InsufficientStates, OutOfDomain, SingularAtWall
from .ladders import ladder_for
from .summation import (
    compensated_sum,
    doubling_milestones,
    extrapolate_power_tail,
    partials_diverge,
)
from .sumrules import SumRuleReport, _finish_report
from .waveanalysis import (
    CumulativeDensity,
    IntegrationScheme,
    find_nodes,
    integrate,
    integrate_fn,
    interpolate_array,
    interpolate_state,
)

__all__ = [
    "PartnerProblem",
    "PartnerTrace",
    "walled_spectrum",
    "walled_energies",
    "partner_potential",
    "partner_solutions",
    "partner_green_trace",
    "trace_identity",
    "build_partner_problem",
    "export_partner",
]

_WALL_SNAP = 1e-9


@dataclass
class PartnerProblem:
    """Walled problem data for one reference state.

    wronskian_W is the norm of the un-renormalized reference state over the
    walled domain and equals the constant Wronskian of the two partner
    solutions.
    """

    base_n: int
    wall: float
    walled_spectrum: Spectrum
    renormalized_psi_n: BoundState
    partner_potential_values: np.ndarray
    wronskian_W: float


@dataclass
class PartnerTrace:
    trace_integral: float
    spectral_sum: float | None
    divergent: bool
    partials: tuple[tuple[float, float], ...]


def _wall_location(spectrum: Spectrum, n: int) -> float | None:
    nodes = find_nodes(spectrum.state(n), spectrum.grid)
    return nodes[-1].location if nodes else None


def _norm_after_wall(spectrum: Spectrum, n: int, wall: float) -> float:
    state = spectrum.state(n)
    return integrate(state.values**2, spectrum.grid, wall, spectrum.grid.x1,
                     IntegrationScheme.CLOSED)


def _analytic_walled_box(spectrum: Spectrum, n: int, wall: float,
                         num_states: int) -> Spectrum:
    width = spectrum.grid.x1 - wall
    m = max(int(round(width / spectrum.grid.h)), 2)
    grid = build_grid(wall, spectrum.grid.x1, m + 1)
    amp = math.sqrt(2.0 / width)
    kappa = math.pi / width          # equals n for the unit box
    x = grid.points
    states = []
    for k in range(1, num_states + 1):
        values = amp * np.sin(k * kappa * (x - wall))
        derivs = amp * k * kappa * np.cos(k * kappa * (x - wall))
        states.append(BoundState(k, float((k * kappa) ** 2), values, derivs,
                                 StateSource.ANALYTIC))
    energies = tuple(s.energy for s in states)
    return Spectrum(grid, spectrum.potential, tuple(states), num_states,
                    StateSource.ANALYTIC, energies)


def _analytic_walled_oscillator(spectrum: Spectrum, num_states: int) -> Spectrum:
    """Half-line well with a wall at the origin: odd-parity levels survive."""
    from .eigensolver import hermite_function_ladder

    half = (spectrum.grid.n_points + 1) // 2
    grid = build_grid(0.0, spectrum.grid.x1, half)
    x = grid.points
    vals, ders = hermite_function_ladder(x, 2 * num_states)
    states = []
    root2 = math.sqrt(2.0)
    for k in range(1, num_states + 1):
        m = 2 * k - 1                # odd Hermite index, energy 4k - 1
        states.append(BoundState(k, float(4 * k - 1), root2 * vals[m],
                                 root2 * ders[m], StateSource.ANALYTIC))
    energies = tuple(s.energy for s in states)
    return Spectrum(grid, spectrum.potential, tuple(states), num_states,
                    StateSource.ANALYTIC, energies)


def walled_spectrum(spectrum: Spectrum, n: int, num_states: int) -> Spectrum:
    """Bound states of the potential restricted to [R~0, x1], Dirichlet ends.

    A nodeless reference state returns the original spectrum unchanged (the
    wall sits at x0).  Analytic oracle problems use closed forms where they
    exist; the numeric path re-solves on the sub-grid starting at the grid
    point nearest above the wall, interpolating the refined energies between
    the two neighboring wall placements to cancel the wall-offset error.
    """
    wall = _wall_location(spectrum, n)
    if wall is None:
        return spectrum

    if spectrum.source is StateSource.ANALYTIC:
        if spectrum.potential.kind is PotentialKind.BOX:
            return _analytic_walled_box(spectrum, n, wall, num_states)
        if (spectrum.potential.kind is PotentialKind.OSCILLATOR
                and n == 2 and abs(wall) < 1e-9):
            return _analytic_walled_oscillator(spectrum, num_states)

    grid = spectrum.grid
    k_hi = int(math.ceil((wall - grid.x0) / grid.h - _WALL_SNAP))
    k_hi = min(max(k_hi, 1), grid.n_points - 3)
    x_hi = grid.x0 + k_hi * grid.h
    sub_hi = build_grid(x_hi, grid.x1, grid.n_points - k_hi)
    num_states = min(num_states, sub_hi.n_points - 2)
    spec_hi = solve_numeric(spectrum.potential, sub_hi, num_states)
    offset = x_hi - wall
    if offset <= _WALL_SNAP * grid.h:
        return spec_hi
    # wall falls between grid points: linear interpolation of the refined
    # energies between the two neighboring wall placements
    x_lo = x_hi - grid.h
    sub_lo = build_grid(x_lo, grid.x1, grid.n_points - k_hi + 1)
    spec_lo = solve_numeric(spectrum.potential, sub_lo, num_states)
    frac = (wall - x_lo) / grid.h
    e_lo = np.array(spec_lo.energies_refined[:num_states])
    e_hi = np.array(spec_hi.energies_refined[:num_states])
    blended = tuple(e_lo + frac * (e_hi - e_lo))
    return replace(spec_hi, energies_refined=blended)


def walled_energies(spectrum: Spectrum, n: int, count: int) -> np.ndarray:
    """Walled eigenvalues only, using closed forms when available."""
    wall = _wall_location(spectrum, n)
    if wall is None:
        ladder = ladder_for(spectrum)
        ladder.require(count)
        return ladder.energies(count)
    if spectrum.source is StateSource.ANALYTIC:
        if spectrum.potential.kind is PotentialKind.BOX:
            kappa = math.pi / (spectrum.grid.x1 - wall)
            k = np.arange(1, count + 1, dtype=float)
            return (k * kappa) ** 2
        if (spectrum.potential.kind is PotentialKind.OSCILLATOR
                and n == 2 and abs(wall) < 1e-9):
            return 4.0 * np.arange(1, count + 1, dtype=float) - 1.0
    walled = walled_spectrum(spectrum, n, count)
    if walled.count < count:
        raise InsufficientStates(
            f"walled solve provides {walled.count} states, need {count}"
        )
    return np.array(walled.energies_refined[:count])


def _reference_energy(spectrum: Spectrum, n: int) -> float:
    """Best continuum estimate of E_n, to pair with walled refined energies."""
    if spectrum.energies_refined:
        return spectrum.energies_refined[n - 1]
    return spectrum.state(n).energy


def partner_potential(spectrum: Spectrum, n: int,
                      r_points: np.ndarray | None = None) -> np.ndarray:
    """Partner potential V - (ln psi_n)'' sampled strictly beyond the wall.

    Uses the ratio identity (ln psi)'' = (V - E_n) - (psi'/psi)^2, so the
    result is E_n + (psi'/psi)^2 with the derivative ratio from the stored
    samples; no log is ever differenced.
    """
    state = spectrum.state(n)
    wall = _wall_location(spectrum, n)
    grid = spectrum.grid
    if wall is None:
        wall = grid.x0
    if r_points is None:
        walled = walled_spectrum(spectrum, n, 1)
        r_points = walled.grid.points[1:-1] if walled is not spectrum \
            else grid.points[1:-1]
    r_points = np.asarray(r_points, dtype=float)
    out = np.empty_like(r_points)
    for i, r in enumerate(r_points):
        if abs(r - wall) <= _WALL_SNAP:
            raise SingularAtWall(f"partner potential diverges at the wall {wall}")
        if not wall < r < grid.x1:
            raise OutOfDomain(f"{r} outside the walled domain ({wall}, {grid.x1})")
        v, d = interpolate_state(state, grid, r)
        out[i] = state.energy + (d / v) ** 2
    return out


def partner_solutions(spectrum: Spectrum, n: int, r_eval: np.ndarray):
    """The two partner solutions at energy E_n satisfying one wall condition
    each:

        phi_1 = (1/psi_n) int_wall^r psi_n^2   -> 0 at the wall,
        phi_2 = (1/psi_n) int_{x1}^r psi_n^2   -> 0 at x1 (negative inside).

    Their Wronskian is the constant W = int_wall^{x1} psi_n^2.
    """
    state = spectrum.state(n)
    grid = spectrum.grid
    wall = _wall_location(spectrum, n)
    if wall is None:
        wall = grid.x0
    r_eval = np.asarray(r_eval, dtype=float)
    if np.any(r_eval <= wall + _WALL_SNAP) or np.any(r_eval >= grid.x1 - _WALL_SNAP):
        raise OutOfDomain("evaluation points must lie strictly inside the wall domain")
    density = CumulativeDensity(grid, state.values**2,
                                2.0 * state.values * state.derivative_values)
    c_wall = density(wall)
    w_norm = density(grid.x1) - c_wall
    phi1 = np.empty_like(r_eval)
    phi2 = np.empty_like(r_eval)
    for i, r in enumerate(r_eval):
        psi = interpolate_array(grid, state.values, r)
        cw = density(r) - c_wall
        phi1[i] = cw / psi
        phi2[i] = (cw - w_norm) / psi
    return phi1, phi2


def partner_green_trace(spectrum: Spectrum, n: int, J: int = 400) -> PartnerTrace:
    """Diagonal trace of the walled partner resolvent at E_n, both ways.

    trace_integral composes the three density integrals pointwise before the
    open quadrature (the integrand vanishes linearly at both ends); the
    spectral sum over walled levels carries divergence detection and is left
    unsummed when it fails.
    """
    state = spectrum.state(n)
    grid = spectrum.grid
    wall = _wall_location(spectrum, n)
    if wall is None:
        wall = grid.x0
    density = CumulativeDensity(grid, state.values**2,
                                2.0 * state.values * state.derivative_values)
    c_wall = density(wall)
    w_norm = density(grid.x1) - c_wall
    psi = ladder_for(spectrum).state_fn(n)

    def composed(y: np.ndarray) -> np.ndarray:
        c = density(y) - c_wall
        vals = psi(y)
        return c * (c - w_norm) / (vals * vals)

    trace_integral = integrate_fn(composed, wall, grid.x1) / w_norm

    if spectrum.source is StateSource.NUMERIC:
        cap = int(0.6 * (grid.n_points - 2))
        J = min(J, cap)
    e_ref = _reference_energy(spectrum, n)
    e_walled = walled_energies(spectrum, n, J)
    terms = np.zeros(J)
    terms[1:] = 1.0 / (e_ref - e_walled[1:])
    partials = [(m, compensated_sum(terms[:m])) for m in doubling_milestones(J)]
    if partials_diverge(partials):
        return PartnerTrace(trace_integral, None, True, tuple(partials))
    value = extrapolate_power_tail(partials).value
    return PartnerTrace(trace_integral, value, False, tuple(partials))


def trace_identity(spectrum: Spectrum, n: int, J: int = 400,
                   tolerance: float | None = None) -> SumRuleReport:
    """Two-particle trace rule tying the original spectrum to walled levels.

    lhs sums the antisymmetric-pair double integrals over the walled square,
    reduced to overlap integrals: (A_nn A_jj - A_nj^2)/(E_n - E_j).
    rhs = W * sum_{j>=2} 1/(E_n - E~_j).  Divergence on either side flags
    the report and no pass is claimed.
    """
    state, ladder = spectrum.state(n), ladder_for(spectrum)
    J = min(J, ladder.max_index)
    grid = spectrum.grid
    wall = _wall_location(spectrum, n)
    if wall is None:
        wall = grid.x0
    psi_n_row = ladder.sample_values(n, grid)
    a_nn = integrate(psi_n_row * psi_n_row, grid, wall, grid.x1,
                     IntegrationScheme.CLOSED)
    energies = ladder.energies(J)
    denom = state.energy - energies
    denom[n - 1] = 1.0       # excluded reference entry, term stays zero
    terms = np.zeros(J)
    for j in range(1, J + 1):
        if j == n:
            continue
        row = ladder.sample_values(j, grid)
        a_jj = integrate(row * row, grid, wall, grid.x1, IntegrationScheme.CLOSED)
        a_nj = integrate(row * psi_n_row, grid, wall, grid.x1,
                         IntegrationScheme.CLOSED)
        terms[j - 1] = (a_nn * a_jj - a_nj * a_nj) / denom[j - 1]
    partials = [(m, compensated_sum(terms[:m])) for m in doubling_milestones(J)]
    lhs_divergent = partials_diverge(partials)

    trace = partner_green_trace(spectrum, n, J)
    w_norm = _norm_after_wall(spectrum, n, wall)
    diagnostics = {"W": w_norm, "trace_integral": trace.trace_integral,
                   "trace_partials": trace.partials}
    if lhs_divergent or trace.divergent:
        return _finish_report("TwoParticle", spectrum, n, wall, partials,
                              None, None, "divergent", 1.0, tolerance,
                              diagnostics=diagnostics)
    lhs = extrapolate_power_tail(partials).value
    rhs = w_norm * trace.spectral_sum
    diagnostics["rhs_from_integral"] = w_norm * trace.trace_integral
    return _finish_report("TwoParticle", spectrum, n, wall, partials, lhs,
                          rhs, "absolute", abs(rhs), tolerance,
                          diagnostics=diagnostics)


def build_partner_problem(spectrum: Spectrum, n: int,
                          num_states: int = 8) -> PartnerProblem:
    """Assemble the full walled-problem bundle for one reference state."""
    wall = _wall_location(spectrum, n)
    effective_wall = wall if wall is not None else spectrum.grid.x0
    walled = walled_spectrum(spectrum, n, num_states)
    w_norm = _norm_after_wall(spectrum, n, effective_wall)
    state = spectrum.state(n)

    sub = walled.grid if walled is not spectrum else spectrum.grid
    values = np.empty(sub.n_points)
    derivs = np.empty(sub.n_points)
    for i, x in enumerate(sub.points):
        v, d = interpolate_state(state, spectrum.grid, x)
        values[i] = v / math.sqrt(w_norm)
        derivs[i] = d / math.sqrt(w_norm)
    renorm = BoundState(1, state.energy, values, derivs, state.source)
    vpartner = partner_potential(spectrum, n, sub.points[1:-1])
    return PartnerProblem(n, effective_wall, walled, renorm, vpartner, w_norm)


def export_partner(problem: PartnerProblem, spectrum: Spectrum, path) -> None:
    """Columnar dump (r, V, V_partner, phi_1, phi_2) on walled interior points."""
    sub = problem.walled_spectrum.grid if problem.walled_spectrum is not spectrum \
        else spectrum.grid
    r = sub.points[1:-1]
    v = spectrum.potential.values(r)
    phi1, phi2 = partner_solutions(spectrum, problem.base_n, r)
    with open(path, "w") as fh:
        fh.write("# r  V(r)  V_partner(r)  phi_1  phi_2\n")
        for row in zip(r, v, problem.partner_potential_values, phi1, phi2):
            fh.write(" ".join(f"{val:.17g}" for val in row) + "\n")

"""Sum-rule evaluation: truncation control, tail extrapolation, Abel
regularization for conditionally convergent series, and structured reports.

Every rule produces a SumRuleReport holding both sides, the partial-sum (or
damping) trace, and a convergence classification.  Divergent instances are
detected and reported, never summed to a number.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .eigensolver import Spectrum, StateSource
from .errors import (
    CoincidentPoints,
    ConfigError,
    InsufficientStates,
    NodeInPath,
    NotANode,
    NotAnExtremum,
)
from .ladders import StateLadder, ladder_for
from .summation import (
    compensated_sum,
    doubling_milestones,
    extrapolate_power_tail,
    partials_diverge,
)
from .waveanalysis import (
    CumulativeDensity,
    IntegrationScheme,
    find_extrema,
    find_nodes,
    integrate,
    integrate_fn,
    interpolate_state,
)

__all__ = [
    "AbelSchedule",
    "AbelResult",
    "abel_sum",
    "SumRuleReport",
    "node_rule_linear",
    "node_rule_quadratic",
    "extremum_rule_linear",
    "extremum_rule_quadratic",
    "pair_integral_rule",
    "overlap_matrix",
    "combined_rule",
    "groundstate_rule",
    "default_tolerance",
    "report_json_dict",
    "write_report_json",
    "write_trace_csv",
]

NODE_CHECK_TOL = 1e-8     # relative amplitude for accepting a supplied location
_DAMPING_FLOOR = 1e-12    # required damping of the last retained Abel term


@dataclass(frozen=True)
class AbelSchedule:
    """Decreasing damping parameters plus the extrapolation depth."""

    epsilons: tuple[float, ...]
    extrapolation_order: int | None = None

    def __post_init__(self):
        eps = self.epsilons
        if len(eps) < 3:
            raise ConfigError("Abel schedule needs at least 3 epsilons")
        if any(e <= 0 for e in eps) or any(a <= b for a, b in zip(eps, eps[1:])):
            raise ConfigError("Abel epsilons must be positive and decreasing")
        if eps[-1] > 0.02:
            raise ConfigError("final Abel epsilon must be <= 0.02")

    @staticmethod
    def default() -> "AbelSchedule":
        return AbelSchedule((0.1, 0.05, 0.025, 0.0125))


@dataclass
class AbelResult:
    value: float | None
    table: list[tuple[float, float]]
    divergent: bool
    extrapolants: list[float] = field(default_factory=list)
    last_delta: float = math.nan


def _neville_at_zero(h: np.ndarray, s: np.ndarray) -> list[float]:
    """Diagonal of the Neville tableau at 0: entry k uses the k+1 finest
    points.  h must be decreasing."""
    h = h[::-1].astype(float)
    p = list(s[::-1].astype(float))
    diag = [p[0]]
    for level in range(1, len(p)):
        for i in range(len(p) - level):
            p[i] = (h[i + level] * p[i] - h[i] * p[i + 1]) / (h[i + level] - h[i])
        diag.append(p[0])
    return diag


def _abel_diverges(svals: list[float]) -> bool:
    mags = [abs(s) for s in svals]
    if any(b > 2.0 * a for a, b in zip(mags, mags[1:]) if a > 0):
        if all(b > a for a, b in zip(mags, mags[1:])):
            return True
    growing = all(b > a for a, b in zip(mags, mags[1:]))
    if not growing:
        return False
    incs = [b - a for a, b in zip(mags, mags[1:])]
    ratios = [b / a for a, b in zip(incs, incs[1:]) if a > 0]
    # Convergent S(eps) contracts its increments along a halving schedule;
    # logarithmic blowups keep them level, power blowups grow them.
    return bool(ratios) and min(ratios) > 0.8


def abel_sum(terms: np.ndarray, gaps: np.ndarray,
             schedule: AbelSchedule) -> AbelResult:
    """Regularized sum S = lim_{eps->0} sum_j t_j exp(-eps (E_j - E_n)).

    terms and gaps cover every retained state in ascending index (the
    reference state enters with a zero term).  The caller must supply terms
    deep enough that the last one is damped below 1e-12 at the smallest
    epsilon.  Extrapolation to eps = 0 is polynomial in sqrt(eps), matching
    the half-power expansion these damped spectral sums develop.
    """
    terms = np.asarray(terms, dtype=float)
    gaps = np.asarray(gaps, dtype=float)
    eps_min = schedule.epsilons[-1]
    if math.exp(-eps_min * gaps[-1]) >= _DAMPING_FLOOR:
        raise InsufficientStates(
            "series not deep enough: last Abel term damped by only "
            f"{math.exp(-eps_min * gaps[-1]):.2e}"
        )
    svals = [compensated_sum(terms * np.exp(-eps * gaps))
             for eps in schedule.epsilons]
    table = list(zip(schedule.epsilons, svals))
    if _abel_diverges(svals):
        return AbelResult(None, table, True)
    h = np.sqrt(np.asarray(schedule.epsilons))
    diag = _neville_at_zero(h, np.asarray(svals))
    order = schedule.extrapolation_order
    if order is not None:
        diag = diag[: order + 1]
    delta = abs(diag[-1] - diag[-2]) if len(diag) > 1 else math.nan
    return AbelResult(diag[-1], table, False, diag, delta)


@dataclass
class SumRuleReport:
    """One rule's verdict: both sides, the partial trace, and classification.

    lhs_partials holds (J, partial) pairs for truncated rules and
    (epsilon, damped sum) pairs for Abel-regularized ones.  Divergent
    reports carry no lhs and never claim a pass.
    """

    rule_id: str
    n: int
    location: float | None
    lhs_partials: tuple[tuple[float, float], ...]
    lhs_value: float | None
    rhs_value: float | None
    abs_err: float | None
    rel_err: float | None
    convergence_class: str
    regularization: AbelSchedule | None = None
    tolerance: float | None = None
    passed: bool | None = None
    diagnostics: dict = field(default_factory=dict)


def default_tolerance(convergence_class: str, source: StateSource,
                      rule_id: str = "") -> float:
    """Pass thresholds: 1e-2 for regularized rules, 1e-3 for absolutely
    convergent rules on numeric spectra, 1e-6 on analytic ones.  The
    two-point and overlap-weighted rules keep 1e-2 regardless: their tails
    decay like 1/J with an oscillatory coefficient, which truncation at a
    few hundred states cannot beat."""
    if convergence_class == "conditional_abel":
        return 1e-2
    if rule_id in ("PairIntegral", "Combined", "TwoParticle"):
        return 1e-2
    return 1e-6 if source is StateSource.ANALYTIC else 1e-3


def _finish_report(rule_id: str, spectrum: Spectrum, n: int,
                   location: float | None, partials, lhs, rhs,
                   convergence_class: str, zero_scale: float,
                   tolerance: float | None, regularization=None,
                   diagnostics=None) -> SumRuleReport:
    tol = tolerance if tolerance is not None else default_tolerance(
        convergence_class, spectrum.source, rule_id
    )
    if lhs is None or convergence_class == "divergent":
        return SumRuleReport(rule_id, n, location, tuple(partials), None, rhs,
                             None, None, "divergent", regularization, tol,
                             None, diagnostics or {})
    abs_err = abs(lhs - rhs)
    rel_err = abs_err / max(abs(rhs), 1e-14)
    if abs(rhs) > 1e-12 * max(1.0, zero_scale):
        passed = rel_err <= tol
    else:
        passed = abs_err <= tol * max(zero_scale, 1e-14)
    return SumRuleReport(rule_id, n, location, tuple(partials), lhs, rhs,
                         abs_err, rel_err, convergence_class, regularization,
                         tol, passed, diagnostics or {})


def _state_and_ladder(spectrum: Spectrum, n: int):
    if not 1 <= n <= spectrum.count:
        raise InsufficientStates(
            f"reference state {n} not stored (spectrum holds {spectrum.count})"
        )
    return spectrum.state(n), ladder_for(spectrum)


def _density(spectrum: Spectrum, n: int) -> CumulativeDensity:
    state = spectrum.state(n)
    return CumulativeDensity(spectrum.grid, state.values**2,
                             2.0 * state.values * state.derivative_values)


def _clamp_truncation(ladder: StateLadder, J: int) -> int:
    return min(J, ladder.max_index)


def _check_node(spectrum: Spectrum, n: int, r0: float | None) -> float:
    state = spectrum.state(n)
    nodes = find_nodes(state, spectrum.grid)
    if r0 is None:
        if not nodes:
            raise NotANode(f"state {n} has no nodes")
        return nodes[-1].location
    amax = float(np.abs(state.values).max())
    val, _ = interpolate_state(state, spectrum.grid, r0)
    if abs(val) > NODE_CHECK_TOL * amax:
        raise NotANode(f"{r0} is not a node of state {n}: |psi| = {abs(val):.3e}")
    return r0


def _check_extremum(spectrum: Spectrum, n: int, r1: float | None) -> float:
    state = spectrum.state(n)
    if r1 is None:
        extrema = find_extrema(state, spectrum.grid)
        return extrema[-1].location
    dmax = float(np.abs(state.derivative_values).max())
    _, der = interpolate_state(state, spectrum.grid, r1)
    if abs(der) > NODE_CHECK_TOL * dmax:
        raise NotAnExtremum(
            f"{r1} is not an extremum of state {n}: |dpsi| = {abs(der):.3e}"
        )
    return r1


def _gaps_excluding(e_n: float, energies: np.ndarray, n: int) -> np.ndarray:
    """Energy gaps E_n - E_j with the excluded reference entry patched to 1
    (its term is zeroed by the caller)."""
    gaps = e_n - energies
    gaps[n - 1] = 1.0
    return gaps


def _truncated_rule(terms: np.ndarray, J: int):
    """Partial sums at doubling milestones plus the tail-extrapolated value.

    terms is indexed by state (entry j-1 for state j) with the excluded
    reference entry set to zero.
    """
    milestones = doubling_milestones(J)
    partials = [(m, compensated_sum(terms[:m])) for m in milestones]
    if partials_diverge(partials):
        return partials, None, None
    tail = extrapolate_power_tail(partials)
    return partials, tail.value, tail


def node_rule_linear(spectrum: Spectrum, n: int, R0: float | None = None,
                     J: int = 2000, tolerance: float | None = None) -> SumRuleReport:
    """Linear node rule: sum_j psi_j^2(R0) / (E_n - E_j) vanishes at a node."""
    R0 = _check_node(spectrum, n, R0)
    state, ladder = _state_and_ladder(spectrum, n)
    J = _clamp_truncation(ladder, J)
    vals = ladder.values_at(R0, J)
    terms = vals * vals / _gaps_excluding(state.energy, ladder.energies(J), n)
    terms[n - 1] = 0.0
    partials, lhs, _ = _truncated_rule(terms, J)
    scale = float(np.abs(terms[: min(8, J)]).max())
    cls = "absolute" if lhs is not None else "divergent"
    return _finish_report("Node1", spectrum, n, R0, partials, lhs, 0.0, cls,
                          scale, tolerance)


def node_rule_quadratic(spectrum: Spectrum, n: int, R0: float | None = None,
                        J: int = 2000, tolerance: float | None = None) -> SumRuleReport:
    """Quadratic node rule: the squared sum balances the split norm product
    through the slope at the node."""
    R0 = _check_node(spectrum, n, R0)
    state, ladder = _state_and_ladder(spectrum, n)
    J = _clamp_truncation(ladder, J)
    vals = ladder.values_at(R0, J)
    terms = vals * vals / _gaps_excluding(state.energy, ladder.energies(J), n) ** 2
    terms[n - 1] = 0.0
    partials, lhs, _ = _truncated_rule(terms, J)

    grid = spectrum.grid
    _, slope = interpolate_state(state, grid, R0)
    left = integrate(state.values**2, grid, grid.x0, R0, IntegrationScheme.CLOSED)
    right = integrate(state.values**2, grid, R0, grid.x1, IntegrationScheme.CLOSED)
    rhs = left * right / slope**2
    cls = "absolute" if lhs is not None else "divergent"
    return _finish_report("Node2", spectrum, n, R0, partials, lhs, rhs, cls,
                          abs(rhs), tolerance)


def _abel_truncation(ladder: StateLadder, e_n: float, eps_min: float) -> int:
    """Smallest J whose last term is damped below the floor at eps_min."""
    need = -math.log(_DAMPING_FLOOR)
    J = 64
    while True:
        if J >= ladder.max_index:
            J = ladder.max_index
            gaps = ladder.energies(J) - e_n
            if eps_min * gaps[-1] < need:
                raise InsufficientStates(
                    f"Abel sum needs states beyond index {J} at eps="
                    f"{eps_min}: gap reaches only {gaps[-1]:.3g}"
                )
            break
        gaps = ladder.energies(J) - e_n
        if eps_min * gaps[-1] >= need:
            break
        J *= 2
    k = int(np.searchsorted(eps_min * gaps, need)) + 1
    return min(max(k, 3), J)


def extremum_rule_linear(spectrum: Spectrum, n: int, R1: float | None = None,
                         schedule: AbelSchedule | None = None,
                         tolerance: float | None = None) -> SumRuleReport:
    """Linear extremum rule via Abel regularization.

    The slope-squared series and the completeness series diverge separately,
    so each state's two contributions are combined into a single term before
    damping:  t_j = dpsi_j^2(R1)/(E_n - E_j) + psi_j^2(R1);  the regularized
    sum must equal -psi_n^2(R1).
    """
    R1 = _check_extremum(spectrum, n, R1)
    state, ladder = _state_and_ladder(spectrum, n)
    schedule = schedule or AbelSchedule.default()
    J = _abel_truncation(ladder, state.energy, schedule.epsilons[-1])
    energies = ladder.energies(J)
    vals = ladder.values_at(R1, J)
    ders = ladder.derivatives_at(R1, J)
    terms = ders * ders / _gaps_excluding(state.energy, energies, n) + vals * vals
    terms[n - 1] = 0.0
    gaps = energies - state.energy
    result = abel_sum(terms, gaps, schedule)

    psin, _ = interpolate_state(state, spectrum.grid, R1)
    rhs = -psin * psin
    cls = "divergent" if result.divergent else "conditional_abel"
    diagnostics = {"J": J, "extrapolants": result.extrapolants,
                   "extrapolation_delta": result.last_delta}
    return _finish_report("Ext1", spectrum, n, R1, result.table, result.value,
                          rhs, cls, abs(rhs), tolerance, schedule, diagnostics)


def extremum_rule_quadratic(spectrum: Spectrum, n: int, R1: float | None = None,
                            J: int = 2000,
                            tolerance: float | None = None) -> SumRuleReport:
    """Quadratic extremum rule: absolutely convergent slope-squared series
    against the split norm product through the amplitude at the extremum."""
    R1 = _check_extremum(spectrum, n, R1)
    state, ladder = _state_and_ladder(spectrum, n)
    J = _clamp_truncation(ladder, J)
    ders = ladder.derivatives_at(R1, J)
    terms = ders * ders / _gaps_excluding(state.energy, ladder.energies(J), n) ** 2
    terms[n - 1] = 0.0
    partials, lhs, _ = _truncated_rule(terms, J)

    grid = spectrum.grid
    psin, _ = interpolate_state(state, grid, R1)
    left = integrate(state.values**2, grid, grid.x0, R1, IntegrationScheme.CLOSED)
    right = integrate(state.values**2, grid, R1, grid.x1, IntegrationScheme.CLOSED)
    rhs = left * right / psin**2
    cls = "absolute" if lhs is not None else "divergent"
    return _finish_report("Ext2", spectrum, n, R1, partials, lhs, rhs, cls,
                          abs(rhs), tolerance)


def _state_fn(spectrum: Spectrum, n: int):
    return ladder_for(spectrum).state_fn(n)


def pair_integral_rule(spectrum: Spectrum, n: int, r: float, r2: float,
                       J: int = 400,
                       tolerance: float | None = None) -> SumRuleReport:
    """Two-point rule after the outermost node.

    lhs sums the squared normalized differences over the other states; rhs is
    minus the inverse-density integral between the points, open quadrature.
    """
    if abs(r - r2) < 1e-12:
        raise CoincidentPoints("pair rule needs two distinct points")
    state, ladder = _state_and_ladder(spectrum, n)
    nodes = find_nodes(state, spectrum.grid)
    rtilde0 = nodes[-1].location if nodes else spectrum.grid.x0
    for p in (r, r2):
        if not rtilde0 < p < spectrum.grid.x1:
            raise NodeInPath(
                f"point {p:.12g} outside the nodeless tail "
                f"({rtilde0:.12g}, {spectrum.grid.x1:.12g}) of state {n}"
            )
    J = _clamp_truncation(ladder, J)
    energies = ladder.energies(J)
    va = ladder.values_at(r, J)
    vb = ladder.values_at(r2, J)
    psin_a = va[n - 1]
    psin_b = vb[n - 1]
    diff = va / psin_a - vb / psin_b
    terms = diff * diff / _gaps_excluding(state.energy, energies, n)
    terms[n - 1] = 0.0
    partials, lhs, _ = _truncated_rule(terms, J)

    psi_fn = _state_fn(spectrum, n)
    lo, hi = min(r, r2), max(r, r2)
    rhs = -integrate_fn(lambda y: 1.0 / psi_fn(y) ** 2, lo, hi)
    cls = "absolute" if lhs is not None else "divergent"
    diagnostics = {"r": r, "r2": r2}
    return _finish_report("PairIntegral", spectrum, n, None, partials, lhs,
                          rhs, cls, abs(rhs), tolerance,
                          diagnostics=diagnostics)


def overlap_matrix(spectrum: Spectrum, n: int, J: int) -> np.ndarray:
    """Pairwise overlaps restricted to the domain after the outermost node of
    state n:  A_jk = int_{R~0}^{x1} psi_j psi_k."""
    state, ladder = _state_and_ladder(spectrum, n)
    ladder.require(J)
    nodes = find_nodes(state, spectrum.grid)
    wall = nodes[-1].location if nodes else spectrum.grid.x0
    grid = spectrum.grid
    rows = [ladder.sample_values(j, grid) for j in range(1, J + 1)]
    a = np.empty((J, J))
    for j in range(J):
        for k in range(j, J):
            val = integrate(rows[j] * rows[k], grid, wall, grid.x1,
                            IntegrationScheme.CLOSED)
            a[j, k] = a[k, j] = val
    return a


def _triple_integral_forms(spectrum: Spectrum, n: int, wall: float):
    """Both orderings of the triple integral over the nodeless tail.

    form2 (primary): -int_wall^{x1} dr/psi^2 * C_w(r) * D_w(r), a single
    composed integral, bounded at both ends even though 1/psi^2 diverges.
    form1 re-derives it with the inverse density in the middle as a nested
    suffix integral on a doubling midpoint mesh; agreement of the two is an
    internal consistency diagnostic.
    """
    density = _density(spectrum, n)
    total = density.total
    c_wall = density(wall)
    psi_fn = _state_fn(spectrum, n)
    x1 = spectrum.grid.x1

    def composed(y: np.ndarray) -> np.ndarray:
        c = density(y)
        return (c - c_wall) * (total - c) / psi_fn(y) ** 2

    form2 = -integrate_fn(composed, wall, x1)

    # form1: -int psi^2(r) T(r) dr with T(r) the suffix integral of
    # g(y) = D_w(y)/psi^2(y), both on a shared midpoint mesh.
    def form1_at(panels: int) -> float:
        width = (x1 - wall) / panels
        mids = wall + (np.arange(panels) + 0.5) * width
        c = density(mids)
        psi2 = psi_fn(mids) ** 2
        g = (total - c) / psi2
        suffix = np.concatenate((np.cumsum(g[::-1])[::-1][1:], [0.0]))
        t_mid = width * suffix + 0.5 * width * g
        return -float(width * np.dot(psi2, t_mid))

    prev = form1_at(256)
    cur = prev
    for panels in (512, 1024, 2048, 4096, 8192):
        cur = form1_at(panels)
        if abs(cur - prev) <= 1e-8 * max(abs(cur), 1e-300):
            break
        prev = cur
    form1 = cur + (cur - prev) / 3.0
    return form1, form2


def combined_rule(spectrum: Spectrum, n: int, J: int = 400,
                  tolerance: float | None = None) -> SumRuleReport:
    """Overlap-weighted rule on the domain after the outermost node.

    lhs = A_nn sum_j A_jj/(E_n - E_j) - dpsi_n^2(R~0) sum_j psi_j^2(R~0)/(E_n - E_j)^3;
    rhs is the triple integral over the nodeless tail, computed in both
    orderings and cross-checked.  Spectra with linearly growing gaps make the
    first series diverge; that is detected and flagged.
    """
    state, ladder = _state_and_ladder(spectrum, n)
    nodes = find_nodes(state, spectrum.grid)
    wall = nodes[-1].location if nodes else spectrum.grid.x0
    J = _clamp_truncation(ladder, J)
    grid = spectrum.grid
    energies = ladder.energies(J)
    denom = _gaps_excluding(state.energy, energies, n)

    a_diag = np.empty(J)
    for j in range(1, J + 1):
        row = ladder.sample_values(j, grid)
        a_diag[j - 1] = integrate(row * row, grid, wall, grid.x1,
                                  IntegrationScheme.CLOSED)
    terms1 = a_diag / denom
    terms1[n - 1] = 0.0
    partials1 = [(m, compensated_sum(terms1[:m])) for m in doubling_milestones(J)]
    if partials_diverge(partials1):
        form1, form2 = _triple_integral_forms(spectrum, n, wall)
        return _finish_report("Combined", spectrum, n, wall, partials1, None,
                              form2, "divergent", abs(form2), tolerance,
                              diagnostics={"rhs_forms": (form1, form2)})
    sum1 = extrapolate_power_tail(partials1).value

    vals = ladder.values_at(wall, J)
    terms3 = vals * vals / denom**3
    terms3[n - 1] = 0.0
    sum3 = extrapolate_power_tail(
        [(m, compensated_sum(terms3[:m])) for m in doubling_milestones(J)]
    ).value

    a_nn = a_diag[n - 1]
    _, slope_wall = interpolate_state(state, grid, wall)
    lhs = a_nn * sum1 - slope_wall**2 * sum3

    form1, form2 = _triple_integral_forms(spectrum, n, wall)
    diagnostics = {"rhs_forms": (form1, form2),
                   "rhs_form_gap": abs(form1 - form2)}
    return _finish_report("Combined", spectrum, n, wall, partials1, lhs,
                          form2, "absolute", abs(form2), tolerance,
                          diagnostics=diagnostics)


def groundstate_rule(spectrum: Spectrum, J: int = 2000,
                     tolerance: float | None = None) -> SumRuleReport:
    """Ground-state trace rule.

    lhs = sum_{j >= 2} 1/(E_1 - E_j); rhs is minus the triple integral over
    the nodeless ground state.  Linear-gap spectra diverge and are flagged;
    the vacuous single-state case reports as incomparable.
    """
    state, ladder = _state_and_ladder(spectrum, 1)
    J = _clamp_truncation(ladder, J)
    if J < 2:
        return SumRuleReport("GroundTrace", 1, None, (), 0.0, None, None,
                             None, "incomparable", None, tolerance, None,
                             {"reason": "single-state spectrum"})
    energies = ladder.energies(J)
    terms = 1.0 / _gaps_excluding(state.energy, energies, 1)
    terms[0] = 0.0
    partials = [(m, compensated_sum(terms[:m])) for m in doubling_milestones(J)]
    form1, form2 = _triple_integral_forms(spectrum, 1, spectrum.grid.x0)
    if partials_diverge(partials):
        return _finish_report("GroundTrace", spectrum, 1, None, partials,
                              None, form2, "divergent", abs(form2), tolerance,
                              diagnostics={"rhs_forms": (form1, form2)})
    lhs = extrapolate_power_tail(partials).value
    diagnostics = {"rhs_forms": (form1, form2),
                   "rhs_form_gap": abs(form1 - form2)}
    return _finish_report("GroundTrace", spectrum, 1, None, partials, lhs,
                          form2, "absolute", abs(form2), tolerance,
                          diagnostics=diagnostics)


def report_json_dict(report: SumRuleReport) -> dict:
    """The pinned per-rule JSON object (stable key order)."""
    if report.regularization is not None:
        j_schedule = list(report.regularization.epsilons)
    else:
        j_schedule = [j for j, _ in report.lhs_partials]
    return {
        "rule_id": report.rule_id,
        "n": report.n,
        "location": report.location,
        "J_schedule": j_schedule,
        "lhs": report.lhs_value,
        "rhs": report.rhs_value,
        "abs_err": report.abs_err,
        "rel_err": report.rel_err,
        "convergence_class": report.convergence_class,
        "pass": report.passed,
    }


def write_report_json(reports: list[SumRuleReport], path) -> None:
    payload = {"rules": [report_json_dict(r) for r in reports]}
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def write_trace_csv(reports: list[SumRuleReport], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rule_id", "J_or_epsilon", "partial_value"])
        for rep in reports:
            for key, val in rep.lhs_partials:
                writer.writerow([rep.rule_id, repr(float(key)), repr(float(val))])

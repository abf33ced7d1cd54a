"""Grids, 1D bound-state eigensolvers, and exact oracle spectra.

The numeric path discretizes -d^2/dr^2 + V with the three-point Laplacian on
a uniform grid, Dirichlet ends, and solves the symmetric tridiagonal
eigenproblem.  State vectors and the operator eigenvalues they pair with are
kept as the states' data (they satisfy the discrete problem exactly and
converge at second order); a two-grid Richardson refinement of the energies
is attached separately as the solver's best continuum estimates.

Exact spectra for the two oracle problems: the unit box on [0, pi]
(E_j = j^2, sine states) and the quadratic well V = x^2 on a truncated line
(E_j = 2j - 1, normalized Hermite functions via a stable two-term recurrence).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import (
    ConvergenceFailure,
    DomainMismatch,
    InvalidDomain,
    NodeCountMismatch,
)

__all__ = [
    "PotentialKind",
    "DomainKind",
    "StateSource",
    "PotentialSpec",
    "Grid",
    "BoundState",
    "Spectrum",
    "build_grid",
    "default_grid",
    "solve_numeric",
    "analytic_box_spectrum",
    "analytic_sho_spectrum",
    "orthonormality_matrix",
    "export_spectrum",
]

# Relative amplitude below which numeric samples count as zero when censusing
# sign changes; keeps eigenvector noise in exponential tails from miscounting.
SIGN_FLOOR = 1e-8


class PotentialKind(Enum):
    BOX = "box"
    OSCILLATOR = "oscillator"
    POLYNOMIAL = "polynomial"


class DomainKind(Enum):
    FINITE = "finite"
    TRUNCATED_LINE = "truncated_line"


class StateSource(Enum):
    NUMERIC = "numeric"
    ANALYTIC = "analytic"


@dataclass(frozen=True)
class PotentialSpec:
    """Confining potential description.

    coefficients are ascending powers and apply to POLYNOMIAL only; a
    confining polynomial must have even degree and positive leading
    coefficient.  Units throughout: hbar = 1 and 2*mass = 1, so the operator
    is exactly -d^2/dr^2 + V.
    """

    kind: PotentialKind
    coefficients: tuple[float, ...] = ()
    domain_kind: DomainKind = DomainKind.FINITE
    truncation_halfwidth: float | None = None

    def __post_init__(self):
        if self.kind is PotentialKind.BOX:
            if self.coefficients:
                raise InvalidDomain("box potential takes no coefficients")
        if self.kind is PotentialKind.POLYNOMIAL:
            coeffs = self.coefficients
            if len(coeffs) < 3 or coeffs[-1] <= 0 or (len(coeffs) - 1) % 2 != 0:
                raise InvalidDomain(
                    "polynomial potential must be confining: even degree with "
                    "positive leading coefficient"
                )
        if self.domain_kind is DomainKind.TRUNCATED_LINE:
            if self.truncation_halfwidth is None or self.truncation_halfwidth <= 0:
                raise InvalidDomain("truncated line needs a positive halfwidth")

    @staticmethod
    def box() -> "PotentialSpec":
        return PotentialSpec(PotentialKind.BOX)

    @staticmethod
    def oscillator(halfwidth: float = 8.0) -> "PotentialSpec":
        return PotentialSpec(
            PotentialKind.OSCILLATOR,
            domain_kind=DomainKind.TRUNCATED_LINE,
            truncation_halfwidth=halfwidth,
        )

    @staticmethod
    def polynomial(coefficients, halfwidth: float = 8.0) -> "PotentialSpec":
        return PotentialSpec(
            PotentialKind.POLYNOMIAL,
            coefficients=tuple(float(c) for c in coefficients),
            domain_kind=DomainKind.TRUNCATED_LINE,
            truncation_halfwidth=halfwidth,
        )

    def values(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind is PotentialKind.BOX:
            return np.zeros_like(x)
        if self.kind is PotentialKind.OSCILLATOR:
            return x * x
        return np.polynomial.polynomial.polyval(x, np.asarray(self.coefficients))


@dataclass(frozen=True)
class Grid:
    """Uniform grid on [x0, x1]; point k sits at x0 + k*h with exact endpoints."""

    x0: float
    x1: float
    n_points: int
    h: float

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.x0, self.x1, self.n_points)

    def index_below(self, r: float) -> int:
        """Largest k with points[k] <= r (clamped to [0, n_points-2])."""
        k = int(math.floor((r - self.x0) / self.h))
        return min(max(k, 0), self.n_points - 2)

    def contains(self, r: float) -> bool:
        return self.x0 - 1e-12 <= r <= self.x1 + 1e-12


def build_grid(x0: float, x1: float, n_points: int) -> Grid:
    if not (x1 > x0) or n_points < 3:
        raise InvalidDomain(
            f"need x1 > x0 and n_points >= 3, got ({x0}, {x1}, {n_points})"
        )
    h = (x1 - x0) / (n_points - 1)
    return Grid(float(x0), float(x1), int(n_points), h)


def default_grid(potential: PotentialSpec, n_points: int) -> Grid:
    """Natural working interval: [0, pi] for the box, [-L, L] otherwise."""
    if potential.kind is PotentialKind.BOX:
        return build_grid(0.0, math.pi, n_points)
    hw = potential.truncation_halfwidth or 8.0
    return build_grid(-hw, hw, n_points)


@dataclass(frozen=True)
class BoundState:
    """Normalized bound state sampled on a grid (1-based index; ground = 1)."""

    index_j: int
    energy: float
    values: np.ndarray
    derivative_values: np.ndarray
    source: StateSource

    def __post_init__(self):
        self.values.flags.writeable = False
        self.derivative_values.flags.writeable = False


@dataclass
class Spectrum:
    """Ordered bound states of one problem; immutable after construction.

    energies_refined holds, for numeric spectra, the two-grid Richardson
    estimates of the continuum eigenvalues (the solver's reported values);
    state.energy stays the operator eigenvalue consistent with the stored
    vector.  For analytic spectra both coincide.
    """

    grid: Grid
    potential: PotentialSpec
    states: tuple[BoundState, ...]
    count: int
    source: StateSource
    energies_refined: tuple[float, ...] = ()

    _value_matrix: np.ndarray | None = field(default=None, repr=False)
    _derivative_matrix: np.ndarray | None = field(default=None, repr=False)

    @property
    def energies(self) -> tuple[float, ...]:
        return tuple(s.energy for s in self.states)

    @property
    def value_matrix(self) -> np.ndarray:
        if self._value_matrix is None:
            self._value_matrix = np.vstack([s.values for s in self.states])
        return self._value_matrix

    @property
    def derivative_matrix(self) -> np.ndarray:
        if self._derivative_matrix is None:
            self._derivative_matrix = np.vstack(
                [s.derivative_values for s in self.states]
            )
        return self._derivative_matrix

    @property
    def wall_amplitude(self) -> float:
        """Largest |psi| at either endpoint: truncation quality diagnostic."""
        v = self.value_matrix
        return float(max(np.abs(v[:, 0]).max(), np.abs(v[:, -1]).max()))

    def state(self, j: int) -> BoundState:
        if not 1 <= j <= self.count:
            raise IndexError(f"state index {j} outside 1..{self.count}")
        return self.states[j - 1]


def _trapezoid_weights(grid: Grid) -> np.ndarray:
    w = np.full(grid.n_points, grid.h)
    w[0] = w[-1] = grid.h / 2.0
    return w


def _differentiate(values: np.ndarray, h: float) -> np.ndarray:
    """Grid derivative: 4th-order stencils inside, 2nd-order one-sided ends."""
    n = len(values)
    d = np.empty_like(values)
    f = values
    # interior 4th-order central
    d[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * h)
    # next-to-edge points: 4th-order biased stencils keep the interior error
    # small enough for the analytic-vs-numeric consistency check
    d[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / (12 * h)
    d[-2] = (3 * f[-1] + 10 * f[-2] - 18 * f[-3] + 6 * f[-4] - f[-5]) / (12 * h)
    d[0] = (-3 * f[0] + 4 * f[1] - f[2]) / (2 * h)
    d[-1] = (3 * f[-1] - 4 * f[-2] + f[-3]) / (2 * h)
    return d


def count_sign_changes(values: np.ndarray, floor: float | None = None) -> int:
    """Interior sign changes, ignoring samples below an amplitude floor."""
    v = values[1:-1]
    amax = np.abs(v).max()
    if amax == 0.0:
        return 0
    cut = (SIGN_FLOOR if floor is None else floor) * amax
    sig = v[np.abs(v) > cut]
    if len(sig) < 2:
        return 0
    return int(np.sum(sig[:-1] * sig[1:] < 0))


def _fix_sign(v: np.ndarray) -> np.ndarray:
    nz = np.nonzero(np.abs(v) > SIGN_FLOOR * np.abs(v).max())[0]
    if len(nz) and v[nz[0]] < 0:
        return -v
    return v


def _tridiagonal_eigen(grid: Grid, potential: PotentialSpec, k: int,
                       vectors: bool):
    x = grid.points
    h = grid.h
    v_int = potential.values(x[1:-1])
    if not np.all(np.isfinite(v_int)):
        raise ConvergenceFailure("potential is not finite on interior grid points")
    diag = 2.0 / h**2 + v_int
    off = np.full(len(v_int) - 1, -1.0 / h**2)
    try:
        if vectors:
            w, vecs = eigh_tridiagonal(diag, off, select="i",
                                       select_range=(0, k - 1))
            return w, vecs
        w = eigh_tridiagonal(diag, off, select="i", select_range=(0, k - 1),
                             eigvals_only=True)
        return w, None
    except np.linalg.LinAlgError as exc:  # pragma: no cover - rare
        raise ConvergenceFailure(f"tridiagonal eigensolve failed: {exc}") from exc


def _refined_energies(grid: Grid, potential: PotentialSpec,
                      energies_raw: np.ndarray) -> tuple[float, ...]:
    """Two-grid Richardson step: removes the O(h^2) eigenvalue bias of the
    three-point operator using one coarse companion solve."""
    m = (grid.n_points + 1) // 2
    if m < 3:
        return tuple(energies_raw)
    coarse = build_grid(grid.x0, grid.x1, m)
    k = min(len(energies_raw), m - 2)
    w_c, _ = _tridiagonal_eigen(coarse, potential, k, vectors=False)
    q2 = (coarse.h / grid.h) ** 2
    refined = list(energies_raw)
    for i in range(k):
        refined[i] = (q2 * energies_raw[i] - w_c[i]) / (q2 - 1.0)
    return tuple(refined)


def solve_numeric(potential: PotentialSpec, grid: Grid,
                  num_states: int) -> Spectrum:
    """Lowest num_states eigenpairs of -d^2/dr^2 + V with Dirichlet ends.

    States are trapezoid-normalized on the grid; node counts are checked
    against the index law (state j has j-1 interior sign changes) and a
    mismatch raises NodeCountMismatch as a grid-too-coarse signal.
    """
    if num_states < 1 or num_states > grid.n_points - 2:
        raise ConvergenceFailure(
            f"num_states must lie in 1..{grid.n_points - 2}, got {num_states}"
        )
    w, vecs = _tridiagonal_eigen(grid, potential, num_states, vectors=True)
    order = np.argsort(w)
    w = w[order]
    vecs = vecs[:, order]
    if np.any(np.diff(w) <= 1e-12 * np.maximum(1.0, np.abs(w[:-1]))):
        raise ConvergenceFailure("degenerate energies in a 1D confining solve")

    h = grid.h
    states = []
    for i in range(num_states):
        full = np.zeros(grid.n_points)
        full[1:-1] = vecs[:, i]
        # interior 2-norm is 1, so trapezoid normalization is exactly 1/sqrt(h)
        full = _fix_sign(full / math.sqrt(h))
        changes = count_sign_changes(full)
        if changes != i:
            raise NodeCountMismatch(
                f"state {i + 1} shows {changes} interior sign changes, "
                f"expected {i} (grid too coarse?)"
            )
        states.append(
            BoundState(i + 1, float(w[i]), full, _differentiate(full, h),
                       StateSource.NUMERIC)
        )
    refined = _refined_energies(grid, potential, w)
    return Spectrum(grid, potential, tuple(states), num_states,
                    StateSource.NUMERIC, refined)


def analytic_box_spectrum(grid: Grid, num_states: int) -> Spectrum:
    """Exact box states psi_j = sqrt(2/pi) sin(j r) on [0, pi], E_j = j^2."""
    if abs(grid.x0) > 1e-12 or abs(grid.x1 - math.pi) > 1e-12:
        raise DomainMismatch(
            f"box oracle needs the grid to span [0, pi], got "
            f"[{grid.x0}, {grid.x1}]"
        )
    x = grid.points
    amp = math.sqrt(2.0 / math.pi)
    states = []
    for j in range(1, num_states + 1):
        values = amp * np.sin(j * x)
        derivs = amp * j * np.cos(j * x)
        states.append(
            BoundState(j, float(j * j), values, derivs, StateSource.ANALYTIC)
        )
    potential = PotentialSpec.box()
    energies = tuple(float(j * j) for j in range(1, num_states + 1))
    return Spectrum(grid, potential, tuple(states), num_states,
                    StateSource.ANALYTIC, energies)


def hermite_function_ladder(x: np.ndarray, count: int):
    """Normalized oscillator eigenfunctions and derivatives at points x.

    Returns (values, derivatives) with shape (count, len(x)); row m-1 is the
    state of index m (1-based), energy 2m - 1.  Uses the stable two-term
    recurrence on the orthonormal Hermite functions,
        psi_0 = pi^(-1/4) exp(-x^2/2),
        psi_m = x sqrt(2/m) psi_{m-1} - sqrt((m-1)/m) psi_{m-2},
    never raw polynomial coefficients, so it is safe to large m.
    """
    x = np.asarray(x, dtype=float)
    vals = np.empty((count, len(x)))
    gauss = np.pi**-0.25 * np.exp(-0.5 * x * x)
    vals[0] = gauss
    if count > 1:
        vals[1] = math.sqrt(2.0) * x * gauss
    for m in range(2, count):
        vals[m] = (x * math.sqrt(2.0 / m) * vals[m - 1]
                   - math.sqrt((m - 1.0) / m) * vals[m - 2])
    ders = np.empty_like(vals)
    ders[0] = -x * vals[0]
    for m in range(1, count):
        ders[m] = math.sqrt(2.0 * m) * vals[m - 1] - x * vals[m]
    return vals, ders


def analytic_sho_spectrum(grid: Grid, num_states: int) -> Spectrum:
    """Exact oscillator states for V = x^2 on a symmetric truncated line.

    E_j = 2j - 1; parity alternates even/odd.  Requires halfwidth >= 6 so
    the stored low states vanish at the walls to below 1e-15.
    """
    if abs(grid.x0 + grid.x1) > 1e-12 * max(1.0, abs(grid.x1)):
        raise DomainMismatch("oscillator oracle needs a grid symmetric about 0")
    if grid.x1 < 6.0:
        raise DomainMismatch(
            f"truncation halfwidth {grid.x1} < 6: wall amplitude too large"
        )
    x = grid.points
    vals, ders = hermite_function_ladder(x, num_states)
    states = []
    for j in range(1, num_states + 1):
        states.append(
            BoundState(j, float(2 * j - 1), vals[j - 1].copy(),
                       ders[j - 1].copy(), StateSource.ANALYTIC)
        )
    potential = PotentialSpec.oscillator(halfwidth=grid.x1)
    energies = tuple(float(2 * j - 1) for j in range(1, num_states + 1))
    return Spectrum(grid, potential, tuple(states), num_states,
                    StateSource.ANALYTIC, energies)


def orthonormality_matrix(spectrum: Spectrum):
    """Pairwise trapezoid overlaps; returns (matrix, max |entry - delta_jk|)."""
    if spectrum.count < 1:
        raise InvalidDomain("orthonormality check needs a non-empty spectrum")
    v = spectrum.value_matrix
    w = _trapezoid_weights(spectrum.grid)
    m = (v * w) @ v.T
    dev = float(np.abs(m - np.eye(spectrum.count)).max())
    return m, dev


def export_spectrum(spectrum: Spectrum, table_path, energies_path) -> None:
    """Columnar text dump plus the energy list as a JSON array.

    Table columns: x, V(x), then one column per state, 17 significant digits.
    The JSON array carries the solver's reported energies (refined estimates
    for numeric spectra, exact values for analytic ones).
    """
    x = spectrum.grid.points
    v = spectrum.potential.values(x)
    cols = [x, v] + [s.values for s in spectrum.states]
    header = "# x  V(x)  " + " ".join(f"psi_{s.index_j}" for s in spectrum.states)
    with open(table_path, "w") as fh:
        fh.write(header + "\n")
        for row in zip(*cols):
            fh.write(" ".join(f"{val:.17g}" for val in row) + "\n")
    energies = list(spectrum.energies_refined or spectrum.energies)
    with open(energies_path, "w") as fh:
        json.dump(energies, fh)
        fh.write("\n")

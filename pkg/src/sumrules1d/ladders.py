"""State ladders: uniform access to (E_j, psi_j(x), psi_j'(x)) for sums.

Spectral sums routinely need far more states than a grid can faithfully hold.
For the two oracle problems the ladder evaluates closed forms at any index;
for everything else it interpolates the stored grid states, with numeric
spectra capped at 60% of the interior dimension because higher
finite-difference states are inaccurate and polluting.
"""

from __future__ import annotations

import math

import numpy as np

from .eigensolver import (
    Grid,
    PotentialKind,
    Spectrum,
    StateSource,
)
from .errors import InsufficientStates
from .waveanalysis import interpolate_array

__all__ = ["StateLadder", "BoxLadder", "OscillatorLadder", "GridLadder",
           "ladder_for"]

_UNBOUNDED = 10**7


class StateLadder:
    """Interface: 1-based state index j, vectorized over j where useful."""

    max_index: int

    def energies(self, j_max: int) -> np.ndarray:
        raise NotImplementedError

    def values_at(self, x: float, j_max: int) -> np.ndarray:
        raise NotImplementedError

    def derivatives_at(self, x: float, j_max: int) -> np.ndarray:
        raise NotImplementedError

    def sample_values(self, j: int, grid: Grid) -> np.ndarray:
        """State j sampled on a grid (for quadrature ladders)."""
        raise NotImplementedError

    def state_fn(self, j: int):
        """Vectorized psi_j over point arrays (for composed quadratures)."""
        raise NotImplementedError

    def require(self, j_max: int) -> None:
        if j_max > self.max_index:
            raise InsufficientStates(
                f"need {j_max} states but only {self.max_index} available"
            )


class BoxLadder(StateLadder):
    """psi_j = sqrt(2/pi) sin(j r), E_j = j^2 on [0, pi]."""

    max_index = _UNBOUNDED
    _amp = math.sqrt(2.0 / math.pi)

    def energies(self, j_max: int) -> np.ndarray:
        j = np.arange(1, j_max + 1, dtype=float)
        return j * j

    def values_at(self, x: float, j_max: int) -> np.ndarray:
        j = np.arange(1, j_max + 1, dtype=float)
        return self._amp * np.sin(j * x)

    def derivatives_at(self, x: float, j_max: int) -> np.ndarray:
        j = np.arange(1, j_max + 1, dtype=float)
        return self._amp * j * np.cos(j * x)

    def sample_values(self, j: int, grid: Grid) -> np.ndarray:
        return self._amp * np.sin(j * grid.points)

    def state_fn(self, j: int):
        amp = self._amp
        return lambda y: amp * np.sin(j * np.asarray(y, dtype=float))


class OscillatorLadder(StateLadder):
    """Normalized Hermite functions, E_j = 2j - 1, via the stable recurrence."""

    max_index = _UNBOUNDED

    def energies(self, j_max: int) -> np.ndarray:
        return 2.0 * np.arange(1, j_max + 1, dtype=float) - 1.0

    def _ladder(self, x: float, j_max: int):
        vals = np.empty(j_max)
        vals[0] = math.pi**-0.25 * math.exp(-0.5 * x * x)
        if j_max > 1:
            vals[1] = math.sqrt(2.0) * x * vals[0]
        for m in range(2, j_max):
            vals[m] = (x * math.sqrt(2.0 / m) * vals[m - 1]
                       - math.sqrt((m - 1.0) / m) * vals[m - 2])
        return vals

    def values_at(self, x: float, j_max: int) -> np.ndarray:
        return self._ladder(x, j_max)

    def derivatives_at(self, x: float, j_max: int) -> np.ndarray:
        vals = self._ladder(x, j_max)
        ders = np.empty_like(vals)
        ders[0] = -x * vals[0]
        m = np.arange(1, j_max)
        ders[1:] = np.sqrt(2.0 * m) * vals[:-1] - x * vals[1:]
        return ders

    def sample_values(self, j: int, grid: Grid) -> np.ndarray:
        from .eigensolver import hermite_function_ladder

        vals, _ = hermite_function_ladder(grid.points, j)
        return vals[j - 1]

    def state_fn(self, j: int):
        from .eigensolver import hermite_function_ladder

        def fn(y):
            vals, _ = hermite_function_ladder(np.atleast_1d(np.asarray(y, dtype=float)), j)
            return vals[j - 1]

        return fn


class GridLadder(StateLadder):
    """Interpolating ladder over the stored states of a spectrum."""

    def __init__(self, spectrum: Spectrum):
        self.spectrum = spectrum
        if spectrum.source is StateSource.NUMERIC:
            interior = spectrum.grid.n_points - 2
            self.max_index = min(spectrum.count, int(0.6 * interior))
        else:
            self.max_index = spectrum.count

    def energies(self, j_max: int) -> np.ndarray:
        self.require(j_max)
        return np.array([s.energy for s in self.spectrum.states[:j_max]])

    def _interp_rows(self, matrix: np.ndarray, x: float, j_max: int) -> np.ndarray:
        grid = self.spectrum.grid
        k = round((x - grid.x0) / grid.h)
        if 0 <= k < grid.n_points and abs(
            x - (grid.x0 + k * grid.h)
        ) <= 1e-13 * max(1.0, abs(grid.x0), abs(grid.x1)):
            return matrix[:j_max, k].copy()
        out = np.empty(j_max)
        for i in range(j_max):
            out[i] = interpolate_array(grid, matrix[i], x)
        return out

    def values_at(self, x: float, j_max: int) -> np.ndarray:
        self.require(j_max)
        return self._interp_rows(self.spectrum.value_matrix, x, j_max)

    def derivatives_at(self, x: float, j_max: int) -> np.ndarray:
        self.require(j_max)
        return self._interp_rows(self.spectrum.derivative_matrix, x, j_max)

    def sample_values(self, j: int, grid: Grid) -> np.ndarray:
        self.require(j)
        state = self.spectrum.state(j)
        if grid is self.spectrum.grid:
            return state.values
        from .waveanalysis import interpolate_array_many

        return interpolate_array_many(self.spectrum.grid, state.values,
                                      grid.points)

    def state_fn(self, j: int):
        self.require(j)
        from .waveanalysis import interpolate_array_many

        values = self.spectrum.state(j).values
        grid = self.spectrum.grid
        return lambda y: interpolate_array_many(
            grid, values, np.atleast_1d(np.asarray(y, dtype=float)))


def ladder_for(spectrum: Spectrum) -> StateLadder:
    """Closed forms for analytic oracle spectra, interpolation otherwise.

    The closed forms apply only on their canonical domains ([0, pi] box,
    symmetric truncated line); walled sub-domain spectra fall back to the
    grid ladder even when their states are analytic.
    """
    if spectrum.source is StateSource.ANALYTIC:
        grid = spectrum.grid
        if spectrum.potential.kind is PotentialKind.BOX:
            if abs(grid.x0) < 1e-12 and abs(grid.x1 - math.pi) < 1e-12:
                return BoxLadder()
        if spectrum.potential.kind is PotentialKind.OSCILLATOR:
            if abs(grid.x0 + grid.x1) < 1e-12 * max(1.0, abs(grid.x1)):
                return OscillatorLadder()
    return GridLadder(spectrum)

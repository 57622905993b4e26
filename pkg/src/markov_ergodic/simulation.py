"""Seeded path simulation and time-average diagnostics.

Randomness comes from numpy's ``Philox`` bit generator (Philox4x64-10, a
counter-based generator) keyed by the 64-bit seed.  Uniform doubles are
drawn with ``Generator.random`` and each step samples the next state by
inverse CDF over the current row in state-label order.  Paths are therefore
identical across platforms for a given (kernel, start, seed, length).
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass

import numpy as np

from .decomposition import decompose
from .errors import AmbiguousLimitError, InvalidInputError
from .kernel import MarkovKernel, Observable, apply_observable


def make_rng(seed: int) -> np.random.Generator:
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise InvalidInputError("seed must be an unsigned 64-bit integer")
    return np.random.Generator(np.random.Philox(seed))


@dataclass(frozen=True, eq=False)
class SimulationRun:
    kernel: MarkovKernel
    initial_state: str
    seed: int
    length: int
    path: np.ndarray

    def state_labels(self):
        labels = self.kernel.space.labels
        return [labels[i] for i in self.path]


def _cdf_tables(P: np.ndarray):
    tables = []
    for row in P:
        support = np.flatnonzero(row > 0)
        cum = np.cumsum(row[support]).tolist()
        tables.append((support.tolist(), cum))
    return tables


def simulate_path(kernel: MarkovKernel, x0, n: int, seed: int = 0) -> SimulationRun:
    """Simulate ``n`` states ``x_0 .. x_{n-1}`` starting from ``x0``."""
    if n < 1:
        raise InvalidInputError("path length must be positive")
    start = kernel.space.index(x0)
    rng = make_rng(seed)
    u = rng.random(n - 1).tolist()
    tables = _cdf_tables(kernel.rows)
    path = np.empty(n, dtype=np.int64)
    x = start
    path[0] = x
    for i in range(1, n):
        support, cum = tables[x]
        k = bisect.bisect_right(cum, u[i - 1])
        # rounding can leave cum[-1] a hair below 1
        x = support[min(k, len(support) - 1)]
        path[i] = x
    path.setflags(write=False)
    return SimulationRun(kernel, kernel.space.labels[start], int(seed), n, path)


def empirical_time_average(run: SimulationRun, g: Observable) -> float:
    if g.space != run.kernel.space:
        raise InvalidInputError("observable lives on a different state space")
    return float(g.values[run.path].mean())


def empirical_stderr(run: SimulationRun, g: Observable) -> float:
    """``sqrt(var / n)`` with the empirical variance of ``g`` along the path."""
    vals = g.values[run.path]
    return float(math.sqrt(vals.var() / vals.size))


def deterministic_time_average(kernel: MarkovKernel, g: Observable, x, n: int) -> float:
    """Exact ``(1/n) sum_{i=0}^{n-1} ((T*)^i g)(x)`` by repeated application of ``T*``."""
    if n < 1:
        raise InvalidInputError("n must be positive")
    i = kernel.space.index(x)
    acc = 0.0
    h = g
    for _ in range(n):
        acc += h.values[i]
        h = apply_observable(kernel, h)
    return float(acc / n)


def _time_averages_on_grid(kernel: MarkovKernel, g: Observable, x: int, grid) -> dict:
    """Deterministic averages for every ``n`` in ``grid`` in one sweep."""
    grid = sorted(set(int(n) for n in grid))
    out = {}
    acc = 0.0
    v = g.values.astype(float)
    P = kernel.rows
    for i in range(grid[-1]):
        acc += v[x]
        v = P @ v
        if i + 1 in grid:
            out[i + 1] = acc / (i + 1)
    return out


@dataclass(frozen=True)
class ConvergenceProfile:
    space_average: float
    rows: tuple              # (n, deviation, n * deviation)
    fitted_constant: float


def convergence_profile(kernel: MarkovKernel, g: Observable, x, n_grid) -> ConvergenceProfile:
    """Deviation of time averages from ``<mu*, g>`` over a grid of horizons.

    Raises
    ------
    AmbiguousLimitError
        If the kernel has more than one ergodic class.
    """
    grid = [int(n) for n in n_grid]
    if not grid or min(grid) < 1:
        raise InvalidInputError("grid must hold positive integers")
    dec = decompose(kernel)
    if dec.n_classes != 1:
        raise AmbiguousLimitError(
            f"kernel has {dec.n_classes} ergodic classes: {dec.class_labels()}",
            classes=dec.class_labels(),
        )
    target = float(dec.invariant_measures[0].weights @ g.values)
    avgs = _time_averages_on_grid(kernel, g, kernel.space.index(x), grid)
    rows = tuple((n, abs(avgs[n] - target), n * abs(avgs[n] - target)) for n in grid)
    return ConvergenceProfile(target, rows, max(r[2] for r in rows))

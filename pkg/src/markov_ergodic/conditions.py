"""Checks for the minorization and compactness conditions behind ergodicity.

Each checker returns a :class:`ConditionReport` carrying the witnesses that
make the condition hold (or the quantity showing it fails).  :func:`replay`
re-evaluates a satisfied report's inequalities from scratch.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .decomposition import closed_classes
from .errors import InvalidInputError
from .kernel import MarkovKernel, SignedMeasure, n_step

REPLAY_TOL = 1e-12
STRICT_SHRINK = 1.0 - 1e-12


class Condition(str, enum.Enum):
    DOEBLIN = "Doeblin"
    HARRIS = "Harris"
    QSCC = "QSCC-witness"
    UNIFORM_INTEGRABILITY = "UniformIntegrability"
    THEOREM2 = "Theorem2"


@dataclass(frozen=True)
class ConditionReport:
    condition: Condition
    satisfied: bool
    witnesses: dict = field(default_factory=dict)
    diagnostics: tuple = ()

    def __bool__(self):
        return self.satisfied


def minorization(rows: np.ndarray) -> tuple[float, np.ndarray | None]:
    """Largest ``eps`` and matching ``mu`` with ``rows[x] >= eps * mu`` for every row.

    ``eps`` is the total mass of the column minima; ``mu`` is the normalized
    minima (``None`` when ``eps`` is zero).
    """
    mins = rows.min(axis=0)
    eps = float(mins.sum())
    if eps <= 0:
        return 0.0, None
    return eps, mins / eps


def check_doeblin(kernel: MarkovKernel) -> ConditionReport:
    """One-step uniform minorization ``p(x, .) >= eps mu(.)`` with the maximal ``eps``."""
    eps, mu = minorization(kernel.rows)
    if mu is None:
        return ConditionReport(
            Condition.DOEBLIN, False, {"eps": 0.0},
            ("column minima are all zero: no common mass across rows",),
        )
    return ConditionReport(
        Condition.DOEBLIN, True,
        {"eps": eps, "mu": SignedMeasure(kernel.space, mu)},
        (f"eps = sum of column minima = {eps:.17g}",),
    )


def _as_subset(kernel: MarkovKernel, K: Sequence) -> list[int]:
    if not K:
        raise InvalidInputError("K must be nonempty")
    idx = sorted(set(kernel.space.indices(K)))
    return idx


def expected_hitting_times(P: np.ndarray, K: Sequence[int]) -> np.ndarray:
    """``E_x tau_K`` with ``tau_K = inf{n >= 1 : x_n in K}``; ``inf`` where not finite."""
    n = P.shape[0]
    inK = np.zeros(n, dtype=bool)
    inK[list(K)] = True
    out = np.full(n, np.inf)
    classes, _ = closed_classes(P)
    if any(not inK[c].any() for c in classes):
        # states that can reach an avoiding class have infinite expectation;
        # restrict the solve to the complement states that cannot
        reach_bad = _can_reach(P, [i for c in classes if not inK[c].any() for i in c])
    else:
        reach_bad = np.zeros(n, dtype=bool)
    good = ~reach_bad
    comp = np.flatnonzero(~inK & good)
    h = np.zeros(n)
    if comp.size:
        D = P[np.ix_(comp, comp)]
        h[comp] = np.linalg.solve(np.eye(comp.size) - D, np.ones(comp.size))
    # one step, then the remaining time from wherever the chain landed outside K
    for x in range(n):
        if not good[x]:
            continue
        out[x] = 1.0 + P[x, comp] @ h[comp] if comp.size else 1.0
    return out


def _can_reach(P: np.ndarray, targets) -> np.ndarray:
    """Boolean mask of states from which some state in ``targets`` is reachable."""
    adjT = (P > 0).T
    seen = np.zeros(P.shape[0], dtype=bool)
    stack = list(targets)
    seen[stack] = True
    while stack:
        y = stack.pop()
        for x in np.flatnonzero(adjT[y]):
            if not seen[x]:
                seen[x] = True
                stack.append(x)
    return seen


def check_harris(kernel: MarkovKernel, K: Sequence, k_max: int = 1) -> ConditionReport:
    """Bounded expected return time to ``K`` plus a ``k``-step minorization on ``K``.

    The smallest ``k <= k_max`` with positive minorization mass is reported.
    ``eps`` is the maximal mass (the non-strict form); ``eps_strict`` is
    shrunk by a relative 1e-12 so that the strict inequality holds wherever
    ``mu`` is positive.
    """
    if k_max < 1:
        raise InvalidInputError("k_max must be at least 1")
    idx = _as_subset(kernel, K)
    P = kernel.rows
    h = expected_hitting_times(P, idx)
    labels = kernel.space.labels
    witnesses: dict[str, Any] = {
        "K": [labels[i] for i in idx],
        "hitting_times": {labels[i]: float(h[i]) for i in range(kernel.size)},
    }
    notes = []
    finite = bool(np.all(np.isfinite(h)))
    if not finite:
        bad = [labels[i] for i in np.flatnonzero(~np.isfinite(h))]
        notes.append(f"expected hitting time of K is infinite from {bad}")
    else:
        witnesses["sup_hitting_time"] = float(h.max())

    power = np.eye(kernel.size)
    found = None
    for k in range(1, k_max + 1):
        power = power @ P
        eps, mu = minorization(power[idx])
        if mu is not None:
            found = (k, eps, mu)
            break
    if found is None:
        notes.append(f"no k <= {k_max} gives a positive minorization on K")
    else:
        k, eps, mu = found
        witnesses.update({
            "k": k,
            "eps": eps,
            "eps_strict": eps * STRICT_SHRINK,
            "mu": SignedMeasure(kernel.space, mu),
        })
    return ConditionReport(Condition.HARRIS, finite and found is not None, witnesses, tuple(notes))


def check_qscc_witness(kernel: MarkovKernel, x_star, eps: float, n: int = 1) -> ConditionReport:
    """Distance from ``p^(n)`` to the rank-one kernel ``eps^n delta_{x*}``.

    ``norm_gap < 1`` exhibits ``p^(n)`` within operator distance one of a
    compact (here finite-rank) operator.
    """
    if not 0 < eps <= 1:
        raise InvalidInputError("eps must lie in (0, 1]")
    if n < 1:
        raise InvalidInputError("n must be positive")
    j = kernel.space.index(x_star)
    Pn = n_step(kernel, n).rows if n > 1 else kernel.rows
    V = np.zeros(kernel.size)
    V[j] = eps**n
    gap = float(np.abs(Pn - V).sum(axis=1).max())
    return ConditionReport(
        Condition.QSCC, gap < 1.0,
        {"x_star": kernel.space.labels[j], "eps": eps, "n": n, "norm_gap": gap},
        (f"||p^({n}) - eps^n delta_x*|| = {gap:.17g}",),
    )


def uniform_integrability_sigma(density: np.ndarray, cell_weights: np.ndarray, eps: float) -> float:
    """Largest ``sigma`` such that every set of weight below ``sigma`` carries mass below ``eps`` in every row.

    Each cell is treated as a piece of constant density, so the heaviest set
    of a given weight is filled greedily from the densest cells, taking a
    fraction of the last cell.
    """
    total_w = float(cell_weights.sum())
    sigma = total_w
    for row in density:
        order = np.argsort(-row, kind="stable")
        w = cell_weights[order]
        m = row[order] * w
        cum_m = np.concatenate([[0.0], np.cumsum(m)])
        cum_w = np.concatenate([[0.0], np.cumsum(w)])
        if cum_m[-1] < eps:
            continue
        j = int(np.searchsorted(cum_m, eps, side="left"))
        # eps is reached inside cell order[j-1]
        d = row[order[j - 1]]
        s = cum_w[j - 1] + (eps - cum_m[j - 1]) / d
        sigma = min(sigma, float(s))
    return sigma


def check_uniform_integrability(density, cell_weights, eps_grid) -> ConditionReport:
    """Uniform integrability of a family of discretized densities over an ``eps`` grid."""
    density = np.asarray(density, dtype=float)
    cell_weights = np.asarray(cell_weights, dtype=float)
    if density.ndim != 2 or cell_weights.shape != (density.shape[1],):
        raise InvalidInputError("density must be rows x cells with one weight per cell")
    if not (np.all(np.isfinite(density)) and np.all(np.isfinite(cell_weights))):
        raise InvalidInputError("density and weights must be finite")
    if density.min() < 0:
        raise InvalidInputError("density entries must be nonnegative")
    if cell_weights.min() <= 0:
        raise InvalidInputError("cell weights must be positive")
    mass = density @ cell_weights
    if np.abs(mass - 1).max() > 1e-9:
        raise InvalidInputError("each density row must integrate to 1")
    eps_grid = [float(e) for e in eps_grid]
    if not eps_grid or min(eps_grid) <= 0:
        raise InvalidInputError("eps grid must hold positive values")
    sigmas = {e: uniform_integrability_sigma(density, cell_weights, e) for e in eps_grid}
    ok = all(s > 0 for s in sigmas.values())
    return ConditionReport(
        Condition.UNIFORM_INTEGRABILITY, ok,
        {"sigma": sigmas},
        tuple(f"eps={e:g}: sigma={s:.17g}" for e, s in sigmas.items()),
    )


def replay(report: ConditionReport, kernel: MarkovKernel | None = None, tol: float = REPLAY_TOL) -> bool:
    """Re-check a satisfied report's witness inequalities against ``kernel``."""
    if not report.satisfied:
        return False
    w = report.witnesses
    if report.condition is Condition.DOEBLIN:
        return bool(np.all(kernel.rows - w["eps"] * w["mu"].weights >= -tol))
    if report.condition is Condition.HARRIS:
        idx = kernel.space.indices(w["K"])
        Pk = np.linalg.matrix_power(kernel.rows, w["k"])[idx]
        mu = w["mu"].weights
        minorized = np.all(Pk - w["eps"] * mu >= -tol)
        strict = np.all(Pk[:, mu > 0] > w["eps_strict"] * mu[mu > 0])
        h = expected_hitting_times(kernel.rows, idx)
        return bool(minorized and strict and np.all(np.isfinite(h)))
    if report.condition is Condition.QSCC:
        j = kernel.space.index(w["x_star"])
        Pn = np.linalg.matrix_power(kernel.rows, w["n"]).copy()
        Pn[:, j] -= w["eps"] ** w["n"]
        gap = np.abs(Pn).sum(axis=1).max()
        return bool(abs(gap - w["norm_gap"]) <= 1e-9 and gap < 1)
    if report.condition is Condition.UNIFORM_INTEGRABILITY:
        return all(s > 0 for s in w["sigma"].values())
    raise InvalidInputError(f"cannot replay {report.condition.value} without its model")

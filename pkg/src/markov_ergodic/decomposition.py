"""Ergodic decomposition: closed classes, transient set, invariant measures.

The closed (recurrent) classes are the strongly connected components of the
support digraph that have no outgoing edge.  Each class carries the unique
stationary distribution of the kernel restricted to it, and the matching
harmonic function ``y_alpha`` is the probability of absorption into that
class.  The Cesaro limit kernel is ``p1 = sum_alpha y_alpha nu_alpha^T``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import InvalidInputError, NumericalDegeneracyError
from .kernel import (
    MarkovKernel,
    Observable,
    SignedMeasure,
    cesaro_average,
    row_variation_distance,
)


@dataclass(frozen=True, eq=False)
class ErgodicDecomposition:
    kernel: MarkovKernel
    classes: tuple          # tuple of tuples of state indices, sorted
    transient: tuple
    invariant_measures: tuple
    eigenfunctions: tuple
    limit_kernel: MarkovKernel

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    def class_labels(self):
        labels = self.kernel.space.labels
        return [[labels[i] for i in c] for c in self.classes]

    def transient_labels(self):
        labels = self.kernel.space.labels
        return [labels[i] for i in self.transient]

    def class_of(self, state: int):
        for a, c in enumerate(self.classes):
            if state in c:
                return a
        return None


def closed_classes(P: np.ndarray) -> tuple[list[list[int]], list[int]]:
    """Closed communicating classes and the remaining (transient) states.

    An edge ``x -> y`` exists iff ``P[x, y] > 0``; no thresholding.
    """
    adj = P > 0
    n_comp, labels = connected_components(adj, directed=True, connection="strong")
    members = [np.flatnonzero(labels == c) for c in range(n_comp)]
    closed, transient = [], []
    for m in members:
        outside = np.ones(P.shape[0], dtype=bool)
        outside[m] = False
        if adj[np.ix_(m, outside)].any():
            transient.extend(m.tolist())
        else:
            closed.append(sorted(m.tolist()))
    closed.sort(key=lambda c: c[0])
    return closed, sorted(transient)


def stationary_distribution(P: np.ndarray) -> np.ndarray:
    """Solve ``nu (P - I) = 0`` with ``sum(nu) = 1`` for an irreducible block."""
    n = P.shape[0]
    A = np.vstack([P.T - np.eye(n), np.ones((1, n))])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    nu, *_ = np.linalg.lstsq(A, b, rcond=None)
    nu = np.clip(nu, 0.0, None)
    return nu / nu.sum()


def _reaching(adj: np.ndarray, targets) -> np.ndarray:
    """Mask of states with a path into ``targets``."""
    seen = np.zeros(adj.shape[0], dtype=bool)
    seen[list(targets)] = True
    stack = list(targets)
    while stack:
        y = stack.pop()
        for x in np.flatnonzero(adj[:, y] & ~seen):
            seen[x] = True
            stack.append(x)
    return seen


def absorption_probabilities(P: np.ndarray, classes, transient) -> np.ndarray:
    """Matrix ``Y`` with ``Y[x, a]`` = probability of ending in class ``a`` from ``x``.

    Transient states that can reach only one class are assigned 1 exactly;
    the linear system is solved only for states that can reach several.
    """
    n = P.shape[0]
    Y = np.zeros((n, len(classes)))
    if not transient:
        for a, c in enumerate(classes):
            Y[c, a] = 1.0
        return Y
    adj = P > 0
    reach = np.column_stack([_reaching(adj, c) for c in classes])
    t = np.asarray(transient)
    single = reach[t].sum(axis=1) == 1
    for a, c in enumerate(classes):
        Y[c, a] = 1.0
    Y[t[single]] = reach[t[single]]
    mixed = t[~single]
    if mixed.size:
        known = np.setdiff1d(np.arange(n), mixed)
        Q = P[np.ix_(mixed, mixed)]
        rhs = P[np.ix_(mixed, known)] @ Y[known]
        try:
            H = np.linalg.solve(np.eye(mixed.size) - Q, rhs)
        except np.linalg.LinAlgError:
            raise NumericalDegeneracyError("absorption system is numerically singular") from None
        H = np.clip(H, 0.0, 1.0)
        Y[mixed] = H / H.sum(axis=1, keepdims=True)
    return Y


def decompose(kernel: MarkovKernel) -> ErgodicDecomposition:
    """Ergodic decomposition of a finite kernel (classes ordered by smallest state)."""
    P = kernel.rows
    n = kernel.size
    classes, transient = closed_classes(P)

    nus = []
    for c in classes:
        nu = np.zeros(n)
        nu[c] = stationary_distribution(P[np.ix_(c, c)])
        nus.append(nu)
    Y = absorption_probabilities(P, classes, transient)

    limit = sum(np.outer(Y[:, a], nus[a]) for a in range(len(classes)))
    limit = np.clip(limit, 0.0, 1.0)
    limit = limit / limit.sum(axis=1, keepdims=True)

    space = kernel.space
    return ErgodicDecomposition(
        kernel=kernel,
        classes=tuple(tuple(c) for c in classes),
        transient=tuple(transient),
        invariant_measures=tuple(SignedMeasure(space, nu) for nu in nus),
        eigenfunctions=tuple(Observable(space, Y[:, a].copy()) for a in range(len(classes))),
        limit_kernel=MarkovKernel(space, limit),
    )


def limit_kernel_error(decomp: ErgodicDecomposition, n: int) -> float:
    """Distance between the ``n``-term Cesaro average (powers 1..n) and ``p1``."""
    return row_variation_distance(cesaro_average(decomp.kernel, n), decomp.limit_kernel.rows)


def class_weights(decomp: ErgodicDecomposition, mu: SignedMeasure) -> np.ndarray:
    """Long-run mass ``<mu, y_alpha>`` that ``mu`` sends to each class."""
    return np.array([mu.weights @ y.values for y in decomp.eigenfunctions])


def limit_of_initial_measure(decomp: ErgodicDecomposition, mu: SignedMeasure) -> SignedMeasure:
    """Long-run Cesaro limit of ``T^i mu``: ``sum_alpha <mu, y_alpha> nu_alpha``.

    When ``mu`` puts no mass on transient states the weights reduce to
    ``mu(E_alpha)``.
    """
    if mu.space != decomp.kernel.space:
        raise InvalidInputError("measure lives on a different state space")
    if not mu.is_probability(1e-9):
        raise InvalidInputError("initial measure must be a probability measure")
    w = class_weights(decomp, mu).real
    out = sum(wa * nu.weights for wa, nu in zip(w, decomp.invariant_measures))
    return SignedMeasure(mu.space, out)


def restricted_time_average(decomp: ErgodicDecomposition, alpha: int, g: Observable, n: int) -> Observable:
    """``(1/n) sum_{i=0}^{n-1} (T*)^i (g 1_{E_alpha})``.

    Tends to ``<nu_alpha, g>`` on ``E_alpha`` and to ``y_alpha(x) <nu_alpha, g>``
    elsewhere.
    """
    if not 0 <= alpha < decomp.n_classes:
        raise IndexError(f"class index {alpha} out of range for {decomp.n_classes} classes")
    if g.space != decomp.kernel.space:
        raise InvalidInputError("observable lives on a different state space")
    mask = np.zeros(decomp.kernel.size)
    mask[list(decomp.classes[alpha])] = 1.0
    avg = cesaro_average(decomp.kernel, n, include_zeroth=True)
    return Observable(g.space, avg @ (g.values * mask))

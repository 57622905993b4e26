"""Finite state spaces, Markov kernels, measures and observables.

A kernel ``p`` on a finite space is stored as a row-stochastic matrix whose
row ``i`` is the distribution ``p(x_i, .)``.  Measures act on the left
(``mu @ P``), observables on the right (``P @ l``), so the forward operator
and its dual are plain matrix products.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidInputError

STOCHASTIC_TOL = 1e-12
RENORMALIZE_TOL = 1e-9


def _frozen(a):
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class StateSpace:
    """Ordered, labelled finite state space."""

    labels: tuple

    def __post_init__(self):
        labels = tuple(str(s) for s in self.labels)
        if not labels:
            raise InvalidInputError("state space must contain at least one state")
        if len(set(labels)) != len(labels):
            raise InvalidInputError("state labels must be unique")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def of_size(cls, n: int, prefix: str = "s") -> "StateSpace":
        return cls(tuple(f"{prefix}{i}" for i in range(n)))

    @property
    def size(self) -> int:
        return len(self.labels)

    def __len__(self):
        return len(self.labels)

    def index(self, label) -> int:
        try:
            return self.labels.index(str(label))
        except ValueError:
            raise InvalidInputError(f"unknown state label {label!r}") from None

    def indices(self, labels: Sequence) -> list[int]:
        return [self.index(s) for s in labels]


@dataclass(frozen=True, eq=False)
class MarkovKernel:
    """Row-stochastic transition matrix over a :class:`StateSpace`."""

    space: StateSpace
    rows: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        n = self.space.size
        if rows.shape != (n, n):
            raise InvalidInputError(f"kernel must be {n}x{n}, got shape {rows.shape}")
        if not np.all(np.isfinite(rows)):
            raise InvalidInputError("kernel entries must be finite")
        if rows.min() < 0 or rows.max() > 1:
            raise InvalidInputError("kernel entries must lie in [0, 1]")
        dev = np.abs(rows.sum(axis=1) - 1.0)
        if dev.max() > STOCHASTIC_TOL:
            bad = int(dev.argmax())
            raise InvalidInputError(
                f"row {self.space.labels[bad]!r} sums to {rows[bad].sum()!r}, not 1"
            )
        object.__setattr__(self, "rows", _frozen(rows))

    @classmethod
    def from_rows(cls, rows, labels=None, renormalize: bool = False) -> "MarkovKernel":
        """Build a kernel, optionally renormalizing rows that are within 1e-9 of stochastic."""
        rows = np.asarray(rows, dtype=float)
        if rows.ndim != 2:
            raise InvalidInputError("kernel rows must form a 2-d array")
        space = StateSpace.of_size(rows.shape[0]) if labels is None else StateSpace(tuple(labels))
        if renormalize:
            if not np.all(np.isfinite(rows)):
                raise InvalidInputError("kernel entries must be finite")
            sums = rows.sum(axis=1)
            if np.abs(sums - 1.0).max() > RENORMALIZE_TOL:
                raise InvalidInputError("rows too far from stochastic to renormalize")
            rows = np.clip(rows, 0.0, None) / sums[:, None]
        return cls(space, rows)

    @classmethod
    def identity(cls, space: StateSpace) -> "MarkovKernel":
        return cls(space, np.eye(space.size))

    @property
    def size(self) -> int:
        return self.space.size

    def __eq__(self, other):
        if not isinstance(other, MarkovKernel):
            return NotImplemented
        return self.space == other.space and np.array_equal(self.rows, other.rows)

    __hash__ = None

    def __repr__(self):
        return f"MarkovKernel(labels={list(self.space.labels)}, rows={self.rows.tolist()})"


@dataclass(frozen=True, eq=False)
class SignedMeasure:
    """Finite signed (possibly complex) measure given by its point masses."""

    space: StateSpace
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights)
        if not np.iscomplexobj(w):
            w = w.astype(float)
        if w.shape != (self.space.size,):
            raise InvalidInputError(f"measure needs {self.space.size} weights, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise InvalidInputError("measure weights must be finite")
        object.__setattr__(self, "weights", _frozen(w))

    @classmethod
    def point_mass(cls, space: StateSpace, label) -> "SignedMeasure":
        w = np.zeros(space.size)
        w[space.index(label)] = 1.0
        return cls(space, w)

    @property
    def variation_norm(self) -> float:
        return float(np.abs(self.weights).sum())

    @property
    def total_mass(self):
        return self.weights.sum()

    def is_probability(self, tol: float = STOCHASTIC_TOL) -> bool:
        w = self.weights
        if np.iscomplexobj(w):
            if np.abs(w.imag).max() > tol:
                return False
            w = w.real
        return bool(w.min() >= -tol and abs(w.sum() - 1.0) <= tol)

    def mass(self, indices) -> float:
        return self.weights[list(indices)].sum()

    def __repr__(self):
        return f"SignedMeasure({dict(zip(self.space.labels, self.weights.tolist()))})"


@dataclass(frozen=True, eq=False)
class Observable:
    """Bounded function on the state space, stored as a vector of values."""

    space: StateSpace
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if not np.iscomplexobj(v):
            v = v.astype(float)
        if v.shape != (self.space.size,):
            raise InvalidInputError(f"observable needs {self.space.size} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise InvalidInputError("observable values must be finite")
        object.__setattr__(self, "values", _frozen(v))

    @classmethod
    def constant(cls, space: StateSpace, c: float = 1.0) -> "Observable":
        return cls(space, np.full(space.size, float(c)))

    @classmethod
    def indicator(cls, space: StateSpace, labels) -> "Observable":
        v = np.zeros(space.size)
        v[space.indices(labels)] = 1.0
        return cls(space, v)

    @property
    def sup_norm(self) -> float:
        return float(np.abs(self.values).max())

    def __repr__(self):
        return f"Observable({dict(zip(self.space.labels, self.values.tolist()))})"


def _check_space(kernel: MarkovKernel, obj):
    if obj.space != kernel.space:
        raise InvalidInputError("operands live on different state spaces")


def apply_measure(kernel: MarkovKernel, mu: SignedMeasure) -> SignedMeasure:
    """Push a measure forward one step: ``(T mu)(y) = sum_x mu(x) p(x, y)``."""
    _check_space(kernel, mu)
    return SignedMeasure(kernel.space, mu.weights @ kernel.rows)


def apply_observable(kernel: MarkovKernel, l: Observable) -> Observable:
    """Conditional expectation one step ahead: ``(T* l)(x) = sum_t p(x, t) l(t)``."""
    _check_space(kernel, l)
    return Observable(kernel.space, kernel.rows @ l.values)


def n_step(kernel: MarkovKernel, n: int) -> MarkovKernel:
    """The ``n``-step kernel; ``n = 0`` gives the identity."""
    if n < 0:
        raise InvalidInputError("step count must be nonnegative")
    rows = np.linalg.matrix_power(kernel.rows, n)
    # repeated products drift off the simplex by a few ulps
    rows = np.clip(rows, 0.0, 1.0)
    rows = rows / rows.sum(axis=1, keepdims=True)
    return MarkovKernel(kernel.space, rows)


def power_sum(P: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(P + P^2 + ... + P^n, P^n)`` using O(log n) products.

    Works for any square array, real or complex.
    """
    P = np.asarray(P)
    eye = np.eye(P.shape[0], dtype=P.dtype)
    total = np.zeros_like(P)
    power = eye
    for bit in bin(n)[2:]:
        # (S_m, P^m) -> (S_2m, P^2m)
        total = total + power @ total
        power = power @ power
        if bit == "1":
            power = power @ P
            total = total + power
    return total, power


def cesaro_average(kernel: MarkovKernel, n: int, include_zeroth: bool = False) -> np.ndarray:
    """Average of the first ``n`` kernel powers.

    With ``include_zeroth`` the powers ``0..n-1`` are averaged, otherwise ``1..n``.
    """
    if n < 1:
        raise InvalidInputError("Cesaro average needs n >= 1")
    P = kernel.rows
    if include_zeroth:
        total, _ = power_sum(P, n - 1)
        total = total + np.eye(kernel.size)
    else:
        total, _ = power_sum(P, n)
    return total / n


def duality_gap(kernel: MarkovKernel, mu: SignedMeasure, l: Observable) -> float:
    """``|<mu, T* l> - <T mu, l>|``; zero up to rounding for every kernel."""
    _check_space(kernel, mu)
    _check_space(kernel, l)
    lhs = mu.weights @ apply_observable(kernel, l).values
    rhs = apply_measure(kernel, mu).weights @ l.values
    return float(abs(lhs - rhs))


def row_variation_distance(a, b) -> float:
    """Largest row-wise l1 distance between two square arrays."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise InvalidInputError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.abs(a - b).sum(axis=1).max())


def kernel_distance(a: MarkovKernel, b: MarkovKernel) -> float:
    """Operator-norm distance on measures: ``max_x sum_y |a(x,y) - b(x,y)|``."""
    if a.space != b.space:
        raise InvalidInputError("kernels live on different state spaces")
    return row_variation_distance(a.rows, b.rows)


def inner(mu: SignedMeasure, l: Observable):
    """Integral of an observable against a measure."""
    if mu.space != l.space:
        raise InvalidInputError("operands live on different state spaces")
    return mu.weights @ l.values

"""Economies driven by exogenous shocks, and the chains they induce.

The state of the economy is a pair ``x = (e, d)`` of an exogenous shock and
an endogenous component.  Given a shock kernel ``q`` on the shocks and an
evolution law ``f(x, e')`` giving the next state after shock ``e'``, the
induced kernel on states is

    p(x, x') = sum of q(e, e') over the shocks e' with f(x, e') = x'

where ``e`` is the exogenous component of ``x``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .conditions import Condition, ConditionReport, check_harris
from .decomposition import ErgodicDecomposition, closed_classes, decompose
from .errors import InvalidInputError, NonReturningError
from .kernel import MarkovKernel, SignedMeasure, StateSpace

SEP = "|"


def state_label(e: str, d: str) -> str:
    return f"{e}{SEP}{d}"


@dataclass(frozen=True, eq=False)
class EconomyModel:
    """Shock kernel ``q`` plus an evolution law tabulated over (state, shock) pairs.

    ``law`` maps ``(state_label, shock_label)`` to the next state label.
    States are labelled ``"e|d"`` in exo-major order.
    """

    exo_space: StateSpace
    endo_space: StateSpace
    q: MarkovKernel
    law: Mapping

    state_space: StateSpace = field(init=False)

    def __post_init__(self):
        if self.q.space != self.exo_space:
            raise InvalidInputError("q must be a kernel on the exogenous space")
        for lab in self.exo_space.labels + self.endo_space.labels:
            if SEP in lab:
                raise InvalidInputError(f"labels may not contain {SEP!r}: {lab!r}")
        X = StateSpace(tuple(state_label(e, d) for e in self.exo_space.labels for d in self.endo_space.labels))
        object.__setattr__(self, "state_space", X)
        table = {}
        for x in X.labels:
            for e in self.exo_space.labels:
                try:
                    nxt = self.law[(x, e)]
                except KeyError:
                    raise InvalidInputError(f"law undefined at state {x!r}, shock {e!r}") from None
                if nxt not in X.labels:
                    raise InvalidInputError(f"law maps ({x!r}, {e!r}) to unknown state {nxt!r}")
                table[(x, e)] = nxt
        object.__setattr__(self, "law", table)

    @classmethod
    def from_function(cls, exo, endo, q, f) -> "EconomyModel":
        """Tabulate a law given as ``f(e, d, shock) -> (e', d')``."""
        exo_space = StateSpace(tuple(exo))
        endo_space = StateSpace(tuple(endo))
        law = {}
        for e in exo_space.labels:
            for d in endo_space.labels:
                for s in exo_space.labels:
                    law[(state_label(e, d), s)] = state_label(*f(e, d, s))
        qk = q if isinstance(q, MarkovKernel) else MarkovKernel(exo_space, np.asarray(q, dtype=float))
        return cls(exo_space, endo_space, qk, law)

    def exo_of(self, x: str) -> str:
        return x.split(SEP, 1)[0]

    def law_range(self) -> list[str]:
        """States hit by the law, in state-space order."""
        hit = set(self.law.values())
        return [x for x in self.state_space.labels if x in hit]


def induce_kernel(model: EconomyModel) -> MarkovKernel:
    X = model.state_space
    E = model.exo_space
    P = np.zeros((X.size, X.size))
    for i, x in enumerate(X.labels):
        qrow = model.q.rows[E.index(model.exo_of(x))]
        for j, e in enumerate(E.labels):
            P[i, X.index(model.law[(x, e)])] += qrow[j]
    return MarkovKernel(X, P)


def iterate_law(model: EconomyModel, x: str, e: str, n: int) -> str:
    """Apply the law ``n`` times with the shock held fixed at ``e``."""
    if n < 1:
        raise InvalidInputError("n must be positive")
    model.state_space.index(x)
    model.exo_space.index(e)
    for _ in range(n):
        x = model.law[(x, e)]
    return x


def find_collapse(model: EconomyModel, K, n_max: int):
    """First ``(e*, x*, n)`` such that ``f^(n)(x, e*) = x*`` for all ``x`` in ``K``.

    Searches increasing ``n``, then shocks in order; returns ``None`` if none.
    """
    for n in range(1, n_max + 1):
        for e in model.exo_space.labels:
            images = {iterate_law(model, x, e, n) for x in K}
            if len(images) == 1:
                return e, images.pop(), n
    return None


def check_theorem2(model: EconomyModel, n_max: int | None = None) -> ConditionReport:
    """Check the three sufficient hypotheses for ergodicity of the induced chain.

    1. the law maps everything into a set ``K`` (taken as its range);
    2. some shock ``e*`` repeated ``n`` times collapses ``K`` to one state ``x*``;
    3. every shock leads to ``e*`` with probability at least ``eps > 0``.
    """
    if n_max is None:
        n_max = model.state_space.size
    if n_max < 1:
        raise InvalidInputError("n_max must be positive")
    K = model.law_range()
    witnesses = {"K": K}
    notes = [f"hypothesis 1: law range K has {len(K)} of {model.state_space.size} states"]
    hit = find_collapse(model, K, n_max)
    ok = True
    if hit is None:
        ok = False
        notes.append(f"hypothesis 2 fails: no shock collapses K within n <= {n_max}")
        # report hypothesis 3 for the best shock anyway
        col = model.q.rows.min(axis=0)
        witnesses["eps_by_shock"] = dict(zip(model.exo_space.labels, col.tolist()))
    else:
        e_star, x_star, n = hit
        eps = float(model.q.rows[:, model.exo_space.index(e_star)].min())
        witnesses.update({"e_star": e_star, "x_star": x_star, "n": n, "eps": eps})
        notes.append(f"hypothesis 2: f^({n})(., {e_star}) = {x_star} on K")
        if eps > 0:
            notes.append(f"hypothesis 3: min_e q(e, {e_star}) = {eps:.17g}")
        else:
            ok = False
            notes.append(f"hypothesis 3 fails: some shock never leads to {e_star}")
    return ConditionReport(Condition.THEOREM2, ok, witnesses, tuple(notes))


@dataclass(frozen=True, eq=False)
class TraceChain:
    base: MarkovKernel
    K: tuple
    kernel_K: MarkovKernel


def trace_chain(kernel: MarkovKernel, K) -> TraceChain:
    """The chain watched only on ``K``: ``A + B (I - D)^{-1} C`` in block form.

    Raises
    ------
    NonReturningError
        If a state of ``K`` can escape to a closed class disjoint from ``K``.
    """
    if not K:
        raise InvalidInputError("K must be nonempty")
    idx = sorted(set(kernel.space.indices(K)))
    n = kernel.size
    P = kernel.rows
    inK = np.zeros(n, dtype=bool)
    inK[idx] = True
    comp = np.flatnonzero(~inK)

    # complement states reachable from K before returning
    reach = np.zeros(n, dtype=bool)
    stack = [y for x in idx for y in np.flatnonzero(P[x] > 0) if not inK[y]]
    for y in stack:
        reach[y] = True
    while stack:
        y = stack.pop()
        for z in np.flatnonzero(P[y] > 0):
            if not inK[z] and not reach[z]:
                reach[z] = True
                stack.append(z)
    classes, _ = closed_classes(P)
    for c in classes:
        if not inK[c].any() and reach[c].any():
            labels = [kernel.space.labels[i] for i in c]
            raise NonReturningError(f"chain started in K can be trapped in closed class {labels}")

    R = comp[reach[comp]]
    A = P[np.ix_(idx, idx)]
    if R.size:
        B = P[np.ix_(idx, R)]
        C = P[np.ix_(R, idx)]
        D = P[np.ix_(R, R)]
        A = A + B @ np.linalg.solve(np.eye(R.size) - D, C)
    A = np.clip(A, 0.0, 1.0)
    A = A / A.sum(axis=1, keepdims=True)
    sub = StateSpace(tuple(kernel.space.labels[i] for i in idx))
    return TraceChain(kernel, tuple(sub.labels), MarkovKernel(sub, A))


@dataclass(frozen=True, eq=False)
class ErgodicityVerdict:
    """Outcome of the full pipeline for one economy model."""

    model: EconomyModel
    kernel: MarkovKernel
    theorem2: ConditionReport
    decomposition: ErgodicDecomposition
    harris: ConditionReport | None
    invariant_measure: SignedMeasure | None
    unreachable: tuple
    minorization_gap: float | None = None

    @property
    def ergodic(self) -> bool:
        return self.decomposition.n_classes == 1

    @property
    def satisfied(self) -> bool:
        return self.theorem2.satisfied and self.ergodic


def ergodicity_verdict(model: EconomyModel, n_max: int | None = None) -> ErgodicityVerdict:
    """Induce the kernel, check the hypotheses, decompose and cross-check with Harris.

    When the hypotheses hold the decomposition must have exactly one class;
    the Harris check uses the collapse set ``K`` and ``k = n`` from the
    witnesses, and ``p^(n)(x, x*) >= eps^n`` is verified on ``K``.
    """
    P = induce_kernel(model)
    report = check_theorem2(model, n_max)
    dec = decompose(P)

    reachable = set(model.law_range())
    unreachable = tuple(x for x in P.space.labels if x not in reachable)

    harris = None
    gap = None
    mu_star = None
    if report.satisfied:
        if dec.n_classes != 1:
            raise AssertionError(
                f"hypotheses hold but the induced chain has {dec.n_classes} ergodic classes"
            )
        w = report.witnesses
        harris = check_harris(P, w["K"], k_max=w["n"])
        Pn = np.linalg.matrix_power(P.rows, w["n"])
        K_idx = P.space.indices(w["K"])
        j = P.space.index(w["x_star"])
        # slack of the minorization p^(n)(x, x*) >= eps^n over K
        gap = float(Pn[K_idx, j].min() - w["eps"] ** w["n"])
    if dec.n_classes == 1:
        mu_star = dec.invariant_measures[0]
    return ErgodicityVerdict(
        model=model,
        kernel=P,
        theorem2=report,
        decomposition=dec,
        harris=harris,
        invariant_measure=mu_star,
        unreachable=unreachable,
        minorization_gap=gap,
    )

"""Random kernel generators and brute-force oracles shared by the tests.

The oracles here deliberately avoid the library's own algorithms: Cesaro
sums are accumulated power by power, reachability is computed by
transitive closure, stationary vectors come from long power iteration.
"""

import numpy as np

from markov_ergodic import EconomyModel, MarkovKernel


def _irreducible_block(rng, size, period=1, sparsity=0.3):
    """Row-stochastic irreducible block; cyclic with the given period."""
    if period > 1:
        groups = np.array_split(rng.permutation(size), period)
        B = np.zeros((size, size))
        for g in range(period):
            src, dst = groups[g], groups[(g + 1) % period]
            for i in src:
                w = rng.random(len(dst)) + 0.05
                B[i, dst] = w / w.sum()
        return B
    B = rng.random((size, size))
    B[rng.random((size, size)) < sparsity] = 0.0
    # a Hamiltonian cycle guarantees irreducibility
    perm = rng.permutation(size)
    for a, b in zip(perm, np.roll(perm, -1)):
        B[a, b] += 0.1
    if size == 1:
        B[:] = 1.0
    return B / B.sum(axis=1, keepdims=True)


def planted_kernel(rng, n_classes=None, n_transient=None, max_states=12, periodic=False,
                   max_class=4, shuffle=True):
    """Kernel with a known number of closed classes and transient states.

    Returns ``(rows, classes, transient)`` with index sets in the shuffled order.
    """
    n_classes = rng.integers(1, 4) if n_classes is None else n_classes
    n_transient = rng.integers(0, 6) if n_transient is None else n_transient
    budget = max_states - n_transient
    sizes = []
    for _ in range(n_classes):
        room = budget - sum(sizes) - (n_classes - len(sizes) - 1)
        sizes.append(int(rng.integers(1, max(1, min(max_class, room)) + 1)))
    n = sum(sizes) + n_transient
    P = np.zeros((n, n))
    classes = []
    start = 0
    for s in sizes:
        idx = list(range(start, start + s))
        period = 1
        if periodic and s >= 2 and rng.random() < 0.6:
            period = int(rng.integers(2, min(5, s) + 1))
        P[np.ix_(idx, idx)] = _irreducible_block(rng, s, period)
        classes.append(idx)
        start += s
    transient = list(range(start, n))
    for k, t in enumerate(transient):
        w = rng.random(n)
        w[rng.random(n) < 0.4] = 0.0
        # only earlier transient states, so every transient state drains
        w[transient[k + 1:]] = 0.0
        target = classes[rng.integers(len(classes))] if k == 0 else None
        w[rng.choice(target if target else list(range(t)))] += 0.2
        P[t] = w / w.sum()
    if shuffle:
        perm = rng.permutation(n)
        inv = np.argsort(perm)
        P = P[np.ix_(perm, perm)]
        classes = [sorted(inv[c].tolist()) for c in classes]
        transient = sorted(inv[transient].tolist())
    return P, classes, transient


def periodic_cycle_kernel(rng, cycle_lengths, n_transient=0):
    """Disjoint deterministic-ish cycles (exact period) plus draining transients."""
    n = sum(cycle_lengths) + n_transient
    P = np.zeros((n, n))
    start = 0
    for L in cycle_lengths:
        for i in range(L):
            P[start + i, start + (i + 1) % L] = 1.0
        start += L
    for t in range(start, n):
        w = rng.random(t) + 0.01
        P[t, :t] = w / w.sum()
    return P


def kernel(rows, labels=None):
    return MarkovKernel.from_rows(np.asarray(rows, dtype=float), labels=labels)


def brute_cesaro(P, n, include_zeroth=False):
    """Average of matrix powers accumulated one product at a time."""
    P = np.asarray(P, dtype=float)
    acc = np.zeros_like(P)
    power = np.eye(P.shape[0])
    lo, hi = (0, n) if include_zeroth else (1, n + 1)
    for i in range(hi):
        if i >= lo:
            acc += power
        power = power @ P
    return acc / n


def transitive_closure(P):
    """reach[x, y] is True iff y is reachable from x in zero or more steps."""
    n = P.shape[0]
    R = (np.asarray(P) > 0) | np.eye(n, dtype=bool)
    for k in range(n):
        R = R | (R[:, [k]] & R[[k], :])
    return R


def brute_closed_classes(P):
    """Closed classes by definition: x recurrent iff everything reachable from x reaches x."""
    R = transitive_closure(P)
    n = P.shape[0]
    recurrent = [x for x in range(n) if all(R[y, x] for y in range(n) if R[x, y])]
    classes = []
    seen = set()
    for x in recurrent:
        if x in seen:
            continue
        c = sorted(y for y in recurrent if R[x, y] and R[y, x])
        seen.update(c)
        classes.append(c)
    transient = sorted(set(range(n)) - seen)
    return classes, transient


def toy_economy(q=None):
    """Two shocks, two endogenous levels; shock e0 resets to (e0, d0)."""
    q = [[0.5, 0.5], [0.5, 0.5]] if q is None else q

    def law(e, d, s):
        if s == "e0":
            return ("e0", "d0")
        return ("e1", "d1" if d == "d0" else "d0")

    return EconomyModel.from_function(["e0", "e1"], ["d0", "d1"], q, law)


A, B, C = "e0|d0", "e1|d0", "e1|d1"


def random_collapsing_model(rng, n_exo=None, n_endo=None):
    """Random model whose first shock collapses everything and is always reachable."""
    n_exo = rng.integers(2, 4) if n_exo is None else n_exo
    n_endo = rng.integers(1, 4) if n_endo is None else n_endo
    exo = [f"e{i}" for i in range(n_exo)]
    endo = [f"d{i}" for i in range(n_endo)]
    q = rng.random((n_exo, n_exo)) + 0.01
    q = q / q.sum(axis=1, keepdims=True)
    table = {(e, d, s): (s, endo[rng.integers(n_endo)]) for e in exo for d in endo for s in exo}
    # collapse shock: random iteration toward a fixed point, then fixed
    order = rng.permutation(n_endo)
    for e in exo:
        for d in endo:
            pos = int(np.flatnonzero(order == endo.index(d))[0])
            nxt = endo[order[pos - 1]] if pos > 0 else endo[order[0]]
            table[(e, d, exo[0])] = (exo[0], nxt)
    return EconomyModel.from_function(exo, endo, q, lambda e, d, s: table[(e, d, s)])


def split_economy_model(rng, n_exo=None):
    """Model where shock e0 collapses the state but is unreachable from a closed shock block.

    Hypothesis 3 fails and the induced chain has at least two ergodic classes.
    """
    n_exo = rng.integers(2, 5) if n_exo is None else n_exo
    exo = [f"e{i}" for i in range(n_exo)]
    endo = ["d0", "d1"]
    cut = rng.integers(1, n_exo)
    q = np.zeros((n_exo, n_exo))
    for lo, hi in ((0, cut), (cut, n_exo)):
        w = rng.random((hi - lo, hi - lo)) + 0.05
        q[lo:hi, lo:hi] = w / w.sum(axis=1, keepdims=True)
    moves = {(e, d, s): endo[rng.integers(2)] for e in exo for d in endo for s in exo}

    def law(e, d, s):
        return (s, "d0") if s == exo[0] else (s, moves[(e, d, s)])

    return EconomyModel.from_function(exo, endo, q, law)


def brute_stationary(P, iters=20000):
    """Stationary vector of an irreducible block by power iteration of the lazy chain."""
    P = np.asarray(P, dtype=float)
    lazy = 0.5 * (np.eye(P.shape[0]) + P)
    v = np.full(P.shape[0], 1.0 / P.shape[0])
    for _ in range(iters):
        v = v @ lazy
    return v / v.sum()


SWAP = [[0.0, 1.0], [1.0, 0.0]]
TWO = [[0.6, 0.4], [0.3, 0.7]]
HALF = [[0.5, 0.5], [0.5, 0.5]]
ABSORB3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.3, 0.3, 0.4]]
TRACE3 = [[0.5, 0.5, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]

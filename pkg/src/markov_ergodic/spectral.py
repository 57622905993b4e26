"""Peripheral spectrum of a finite kernel and the matching power decomposition.

Every finite stochastic matrix splits as

    P^n = S^n + sum_i lam_i^n T_i

where the ``lam_i`` are the eigenvalues on the unit circle (roots of unity),
``T_i`` is the spectral projection onto the ``lam_i`` eigenspace and the
residual ``S`` has spectral radius strictly below one.  Projections are built
from biorthogonal left/right eigenbases; :func:`cesaro_projection` recovers
the same projections from averaged powers alone and serves as a cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InvalidInputError, NumericalDegeneracyError
from .kernel import MarkovKernel, power_sum, row_variation_distance

DEFAULT_PERIPHERAL_TOL = 1e-8
INVARIANT_TOL = 1e-10
IMAG_TOL = 1e-10
_EIGENSPACE_TOL = 1e-9
_ROUNDING_FLOOR = 1e-13


@dataclass(frozen=True, eq=False)
class SpectralSplit:
    kernel: MarkovKernel
    peripheral_eigenvalues: tuple
    projections: tuple
    residual: np.ndarray
    decay_rate: float
    decay_constant: float
    multiplicities: tuple = ()

    @property
    def k(self) -> int:
        return len(self.peripheral_eigenvalues)

    @property
    def epsilon(self) -> float:
        """Geometric decay margin with ``||S^n|| <= M / (1 + epsilon)^n``; inf if ``S`` is nilpotent."""
        return math.inf if self.decay_rate == 0 else 1.0 / self.decay_rate - 1.0

    def projection(self, lam) -> np.ndarray:
        i = _match_eigenvalue(self.peripheral_eigenvalues, lam)
        return self.projections[i]

    def real_projection(self, lam=1.0) -> np.ndarray:
        """Real part of a projection, asserting the imaginary residue is negligible."""
        T = self.projection(lam)
        if np.abs(T.imag).max() > IMAG_TOL:
            raise NumericalDegeneracyError(f"projection for {lam} is not real")
        return np.ascontiguousarray(T.real)

    def invariant_errors(self) -> dict:
        """Largest violation of each algebraic identity the split must satisfy."""
        P = self.kernel.rows
        S = self.residual
        errs = {"idempotent": 0.0, "orthogonal": 0.0, "commute": 0.0, "annihilate": 0.0}
        for i, (lam, T) in enumerate(zip(self.peripheral_eigenvalues, self.projections)):
            errs["idempotent"] = max(errs["idempotent"], _maxabs(T @ T - T))
            errs["commute"] = max(errs["commute"], _maxabs(P @ T - lam * T), _maxabs(T @ P - lam * T))
            errs["annihilate"] = max(errs["annihilate"], _maxabs(S @ T), _maxabs(T @ S))
            for j, U in enumerate(self.projections):
                if i != j:
                    errs["orthogonal"] = max(errs["orthogonal"], _maxabs(T @ U))
        if self.residual.size:
            rho = max(np.abs(np.linalg.eigvals(S)).max(), 0.0)
            errs["residual_radius"] = abs(rho - self.decay_rate)
        return errs


def _maxabs(a) -> float:
    return float(np.abs(a).max()) if a.size else 0.0


def _match_eigenvalue(eigs, lam) -> int:
    d = [abs(complex(e) - complex(lam)) for e in eigs]
    i = int(np.argmin(d))
    if d[i] > 1e-9:
        raise InvalidInputError(f"{lam} is not a peripheral eigenvalue")
    return i


def _snap_to_root_of_unity(z: complex, max_order: int) -> Fraction:
    """Nearest ``exp(2 pi i p/q)`` with ``q <= max_order``, returned as the angle fraction ``p/q``."""
    turn = (math.atan2(z.imag, z.real) / (2 * math.pi)) % 1.0
    frac = Fraction(turn).limit_denominator(max_order)
    return frac % 1


def _root(frac: Fraction) -> complex:
    if frac == 0:
        return 1.0 + 0j
    if frac == Fraction(1, 2):
        return -1.0 + 0j
    ang = 2 * math.pi * frac.numerator / frac.denominator
    return complex(math.cos(ang), math.sin(ang))


def _eigenbasis(A: np.ndarray, m: int) -> np.ndarray:
    """Orthonormal basis of the ``m`` smallest right singular directions of ``A``."""
    _, s, vh = np.linalg.svd(A)
    basis = vh[-m:].conj().T
    resid = np.abs(A @ basis).max()
    if resid > _EIGENSPACE_TOL:
        raise NumericalDegeneracyError(
            f"eigenspace has dimension below its multiplicity {m} (residual {resid:.2e}); "
            "peripheral eigenvalue is defective"
        )
    return basis


def residual_series_bound(S: np.ndarray) -> float:
    """Upper bound on ``sum_{i>=1} ||S^i||`` in the row-l1 norm.

    Sums exactly until some power ``N`` has ``||S^N|| <= 1/2``, then uses
    submultiplicativity to close the tail.
    """
    n = S.shape[0]
    if n == 0 or not np.any(S):
        return 0.0
    norm = lambda a: float(np.abs(a).sum(axis=1).max())
    total = 0.0
    power = np.eye(n, dtype=S.dtype)
    for _ in range(1_000_000):
        power = power @ S
        pn = norm(power)
        total += pn
        if pn <= 0.5:
            return total / (1.0 - pn)
    raise NumericalDegeneracyError("residual powers fail to contract")


def compute_split(kernel: MarkovKernel, peripheral_tol: float = DEFAULT_PERIPHERAL_TOL) -> SpectralSplit:
    """Split ``kernel`` into peripheral projections and a decaying residual.

    Parameters
    ----------
    kernel : MarkovKernel
    peripheral_tol : float
        Eigenvalues with ``|lam| >= 1 - peripheral_tol`` are treated as
        peripheral and snapped to the nearest root of unity of order at most
        the number of states.

    Raises
    ------
    NumericalDegeneracyError
        If a peripheral eigenvalue does not have a full eigenspace, or the
        resulting projections violate the split identities.
    """
    if not 0 < peripheral_tol < 0.5:
        raise InvalidInputError("peripheral_tol must lie in (0, 0.5)")
    P = kernel.rows
    n = kernel.size
    eigs = np.linalg.eigvals(P)
    mods = np.abs(eigs)
    is_peri = mods >= 1.0 - peripheral_tol

    groups: dict[Fraction, int] = {}
    for z in eigs[is_peri]:
        frac = _snap_to_root_of_unity(complex(z), n)
        groups[frac] = groups.get(frac, 0) + 1
    if Fraction(0) not in groups:
        raise NumericalDegeneracyError("eigenvalue 1 not found for a stochastic kernel")

    fracs = sorted(groups)
    lams, projs, mults = [], [], []
    Pc = P.astype(complex)
    eye = np.eye(n)
    for frac in fracs:
        lam = _root(frac)
        m = groups[frac]
        R = _eigenbasis(Pc - lam * eye, m)
        L = _eigenbasis(Pc.T - lam * eye, m)
        G = L.T @ R
        if np.linalg.cond(G) > 1e10:
            raise NumericalDegeneracyError(f"left/right eigenbases for {lam} are not biorthogonalizable")
        T = R @ np.linalg.solve(G, L.T)
        lams.append(lam)
        projs.append(T)
        mults.append(m)

    S = Pc - sum(lam * T for lam, T in zip(lams, projs))
    rest = mods[~is_peri]
    decay_rate = float(rest.max()) if rest.size else 0.0
    if decay_rate < _ROUNDING_FLOOR:
        decay_rate = 0.0
    if rest.size == 0:
        S = np.zeros_like(S)

    split = SpectralSplit(
        kernel=kernel,
        peripheral_eigenvalues=tuple(lams),
        projections=tuple(projs),
        residual=S,
        decay_rate=decay_rate,
        decay_constant=_decay_constant(S, decay_rate),
        multiplicities=tuple(mults),
    )
    errs = split.invariant_errors()
    errs.pop("residual_radius", None)
    worst = max(errs, key=errs.get)
    if errs[worst] > INVARIANT_TOL:
        raise NumericalDegeneracyError(f"split identity {worst!r} violated by {errs[worst]:.2e}")
    return split


def _fit_constant(ns, norms, rate: float) -> float:
    """Smallest ``M`` with ``norms <= M rate^n`` on powers above the rounding floor."""
    keep = norms > _ROUNDING_FLOOR
    if not keep.any():
        return 0.0
    if rate == 0:
        return float(norms[keep].max())
    return float(np.exp(np.log(norms[keep]) - ns[keep] * np.log(rate)).max())


def _decay_constant(S: np.ndarray, rate: float, n_sample: int = 64) -> float:
    ns = np.arange(1, n_sample + 1)
    return max(_fit_constant(ns, _power_norms(S, n_sample), rate), 1.0)


def _power_norms(S: np.ndarray, n_max: int) -> np.ndarray:
    out = np.empty(n_max)
    power = np.eye(S.shape[0], dtype=S.dtype)
    for i in range(n_max):
        power = power @ S
        out[i] = np.abs(power).sum(axis=1).max()
    return out


def reconstruct_power(split: SpectralSplit, n: int) -> np.ndarray:
    """``S^n + sum_i lam_i^n T_i``; equals ``P^n`` up to rounding."""
    if n < 1:
        raise InvalidInputError("n must be positive")
    out = np.linalg.matrix_power(split.residual, n)
    for lam, T in zip(split.peripheral_eigenvalues, split.projections):
        out = out + lam**n * T
    return out


def cesaro_projection(kernel: MarkovKernel, lam, n: int) -> np.ndarray:
    """``(1/n) sum_{i=1}^n lam^{-i} P^i``, converging to the ``lam`` projection at rate 1/n."""
    lam = complex(lam)
    if abs(abs(lam) - 1.0) > 1e-9:
        raise InvalidInputError("lam must lie on the unit circle")
    if n < 1:
        raise InvalidInputError("n must be positive")
    total, _ = power_sum(kernel.rows.astype(complex) / lam, n)
    return total / n


def cesaro_error_bound(split: SpectralSplit, lam=1.0) -> float:
    """Constant ``C`` with ``||cesaro_projection(P, lam, n) - T_lam|| <= C / n`` for all ``n``.

    The other peripheral terms contribute geometric sums bounded by
    ``2 / |1 - mu/lam|`` and the residual contributes ``sum ||S^i||``.
    """
    lam = complex(lam)
    j = _match_eigenvalue(split.peripheral_eigenvalues, lam)
    c = residual_series_bound(split.residual)
    for i, (mu, T) in enumerate(zip(split.peripheral_eigenvalues, split.projections)):
        if i == j:
            continue
        ratio = mu / lam
        c += 2.0 / abs(1.0 - ratio) * float(np.abs(T).sum(axis=1).max())
    return c


@dataclass(frozen=True)
class DecayProfile:
    ns: np.ndarray
    norms: np.ndarray
    decay_rate: float
    fitted_constant: float

    def rows(self):
        return list(zip(self.ns.tolist(), self.norms.tolist()))

    def log_slope(self, n_min: int = 5, n_max: int = 40) -> float:
        """Least-squares slope of ``log ||S^n||`` over ``n_min..n_max``."""
        sel = (self.ns >= n_min) & (self.ns <= n_max) & (self.norms > 0)
        if sel.sum() < 2:
            raise InvalidInputError("not enough nonzero residual norms to fit a slope")
        return float(np.polyfit(self.ns[sel], np.log(self.norms[sel]), 1)[0])


def residual_decay_profile(split: SpectralSplit, n_max: int) -> DecayProfile:
    """Sup norms of ``S^n`` for ``n = 1..n_max`` with the fitted ``M`` of ``||S^n|| <= M r^n``."""
    if n_max < 2:
        raise InvalidInputError("n_max must be at least 2")
    norms = _power_norms(split.residual, n_max)
    ns = np.arange(1, n_max + 1)
    r = split.decay_rate
    M = _fit_constant(ns, norms, r)
    bound = M * float(r) ** ns if r > 0 else np.full(ns.shape, M)
    assert np.all(norms <= bound * (1 + 1e-12) + _ROUNDING_FLOOR)
    return DecayProfile(ns=ns, norms=norms, decay_rate=r, fitted_constant=M)


def peripheral_row_sums(split: SpectralSplit) -> np.ndarray:
    """Row sums of ``sum_i T_i``; equal to one on recurrent states."""
    return sum(split.projections).sum(axis=1)


def split_distance_to_cesaro(split: SpectralSplit, lam, n: int) -> float:
    return row_variation_distance(split.projection(lam), cesaro_projection(split.kernel, lam, n))

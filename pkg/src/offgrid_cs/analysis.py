"""Diagnostics: exact interpolation error, error metrics, RIC estimates, bounds."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Dict, NamedTuple, Optional, Union

import numpy as np

from .model import FourierSignal, alias_fold, check_odd, half_width, tail_wiener_norm
from .operators import DirichletKernelOp, LinearOperator
from .rng import SeedLike, make_rng
from .sampling import NonuniformGrid

SUPPORT_LIMIT = 200_000  # supports enumerated by the RIC estimators
SVD_LIMIT = 512


class BoundNotApplicable(ValueError):
    """The parameters violate a precondition of the requested error bound."""


@dataclass(frozen=True, eq=False)
class ErrorBreakdown:
    """Exact interpolation error ``f~ - S f`` and its a-priori bounds.

    ``p_norm_bounds`` maps ``p`` (1, 2 or ``inf``) to ``2 m^(1/p) tail``.
    """

    per_sample: np.ndarray
    p_norm_bounds: Dict[float, float]
    sup_bound: float
    tail: float

    def norm(self, p) -> float:
        return float(np.linalg.norm(self.per_sample, ord=p))

    def bounds_hold(self, rtol: float = 1e-12) -> bool:
        return all(self.norm(p) <= b * (1 + rtol) + 1e-300 for p, b in self.p_norm_bounds.items())


def on_grid_mask(points, N: int, atol: float = 1e-14) -> np.ndarray:
    """True where a point coincides with some ``t_p`` (mod 1) to ``atol``."""
    pos = (np.asarray(points, dtype=float) + 0.5) * N
    return np.abs(pos - np.round(pos)) <= atol * N


def interp_error_exact(sig: FourierSignal, grid: Union[NonuniformGrid, np.ndarray], N: int) -> ErrorBreakdown:
    """Per-sample error of Dirichlet interpolation from the aliasing series.

    ``err_k = sum_{|l| > Nh} c_l (e(l t~_k) - sign(l) e(r(l) t~_k))`` with
    ``(r, sign) = alias_fold(l, N)``; samples on the uniform grid are exactly 0.
    """
    N = check_odd(N)
    pts = np.asarray(grid.points if isinstance(grid, NonuniformGrid) else grid, dtype=float).ravel()
    Nh = half_width(N)
    out = np.zeros(pts.size, dtype=np.complex128)
    mask = np.abs(sig.freqs) > Nh
    if np.any(mask):
        ell = sig.freqs[mask]
        c = sig.coeffs[mask]
        r, sign = alias_fold(ell, N)
        step = max(1, (1 << 20) // ell.size)
        for lo in range(0, pts.size, step):
            p = pts[lo:lo + step]
            ph1 = np.outer(p, ell.astype(float))
            ph2 = np.outer(p, r.astype(float))
            term = np.exp(2j * np.pi * (ph1 - np.round(ph1))) - sign * np.exp(2j * np.pi * (ph2 - np.round(ph2)))
            out[lo:lo + step] = term @ c
        out[on_grid_mask(pts, N)] = 0.0
    tail = tail_wiener_norm(sig, N)
    m = pts.size
    bounds = {1: 2 * m * tail, 2: 2 * math.sqrt(m) * tail, math.inf: 2 * tail}
    out.setflags(write=False)
    return ErrorBreakdown(out, bounds, 2 * tail, tail)


def relative_error(f_hat, f) -> float:
    """``|f_hat - f|_2 / |f|_2``."""
    f_hat = np.asarray(f_hat)
    f = np.asarray(f)
    if f_hat.shape != f.shape:
        raise ValueError("shape mismatch")
    nf = np.linalg.norm(f)
    if nf == 0:
        raise ValueError("reference vector is zero")
    return float(np.linalg.norm(f_hat - f) / nf)


def _dense(A) -> np.ndarray:
    if isinstance(A, LinearOperator):
        return getattr(A, "matrix", None) if getattr(A, "matrix", None) is not None else A.to_dense()
    return np.asarray(A, dtype=np.complex128)


def _supports(n: int, s: int):
    if s < 1 or s > n:
        raise ValueError(f"s must lie in [1, {n}]")
    count = math.comb(n, s)
    if count > SUPPORT_LIMIT:
        raise ValueError(f"{count} supports of size {s} out of {n} exceed the limit {SUPPORT_LIMIT}")
    return np.array(list(itertools.combinations(range(n), s)), dtype=np.intp)


def _max_block_norm(D: np.ndarray, s: int) -> float:
    # max over |T| = s of the spectral norm of the Hermitian block D[T, T];
    # by eigenvalue interlacing this also covers every smaller support
    T = _supports(D.shape[0], s)
    best = 0.0
    for lo in range(0, T.shape[0], 20000):
        idx = T[lo:lo + 20000]
        blocks = D[idx[:, :, None], idx[:, None, :]]
        blocks = 0.5 * (blocks + np.conj(np.swapaxes(blocks, 1, 2)))
        w = np.linalg.eigvalsh(blocks)
        best = max(best, float(np.max(np.abs(w))))
    return best


def empirical_ric(A, s: int) -> float:
    """``delta_s = max_{|T| <= s} |A_T* A_T - I|`` by exhaustive enumeration."""
    M = _dense(A)
    G = M.conj().T @ M
    return _max_block_norm(G - np.eye(G.shape[0]), int(s))


class XmEstimate(NamedTuple):
    value: float
    path: str  # "exact" or "monte-carlo"
    draws: int


def empirical_xm(A, s: int, expected_gram: Optional[np.ndarray] = None,
                 sampler: Optional[Callable[[np.random.Generator], np.ndarray]] = None,
                 draws: int = 500, seed: SeedLike = 0) -> XmEstimate:
    """``X_m = max_{|T| <= s} |A_T* A_T - E A_T* A_T|``.

    The expectation is ``expected_gram`` when supplied (e.g. the identity for
    an unbiased orthonormal design) and otherwise the Monte-Carlo mean of
    ``B* B`` over ``draws`` matrices ``B = sampler(rng)``.
    """
    M = _dense(A)
    G = M.conj().T @ M
    if expected_gram is not None:
        E = np.asarray(expected_gram, dtype=np.complex128)
        path, R = "exact", 0
    else:
        if sampler is None:
            raise ValueError("need expected_gram or a sampler")
        rng = make_rng(seed)
        E = np.zeros_like(G)
        for _ in range(int(draws)):
            B = np.asarray(sampler(rng), dtype=np.complex128)
            E += B.conj().T @ B
        E /= int(draws)
        path, R = "monte-carlo", int(draws)
    return XmEstimate(_max_block_norm(G - E, int(s)), path, R)


def normalized_sensing_matrix(S: LinearOperator, psi_op: Optional[LinearOperator] = None) -> np.ndarray:
    """Dense ``sqrt(N/m) S Psi``, the scaling whose Gram matrix has mean near I."""
    Sd = _dense(S)
    m, N = Sd.shape
    A = Sd if psi_op is None else Sd @ _dense(psi_op)
    return math.sqrt(N / m) * A


def singular_values(S: LinearOperator, limit: int = SVD_LIMIT) -> np.ndarray:
    if min(S.rows, S.cols) > limit:
        raise ValueError(f"dense decomposition limited to {limit} columns")
    return np.linalg.svd(_dense(S), compute_uv=False)


def min_singular_check(S: LinearOperator, limit: int = SVD_LIMIT) -> float:
    """Smallest singular value of ``S`` from a dense SVD (``N <= limit``)."""
    if S.cols > limit:
        raise ValueError(f"N = {S.cols} exceeds the dense limit {limit}")
    sv = singular_values(S, limit=max(limit, min(S.rows, S.cols)))
    k = min(S.rows, S.cols)
    return float(sv[k - 1]) if S.rows >= S.cols else 0.0


def spectral_floor(tau: float, N: int, m: int) -> float:
    """``sqrt((1 - 2 tau) m / N)``, the lower bound on ``sigma_min(S)``."""
    if not 0 <= tau < 0.5:
        raise ValueError("tau must lie in [0, 1/2)")
    return math.sqrt((1 - 2 * tau) * m / N)


def theorem4_min_m(tau: float, N: int) -> float:
    """Smallest ``m`` for the least-squares bound: ``36 N log(2N) (1 + tau) / tau^2``."""
    return 36 * N * math.log(2 * N) * (1 + tau) / tau ** 2


def theorem4_bound(tau: float, N: int, m: int, d_norm: float, tail: float) -> float:
    """Least-squares error bound for the oversampled regime.

    ``tau |d| / (3 sqrt((1 - tau - 2 tau^2) log 2N)) + 2 sqrt(N) tail / sqrt(1 - 2 tau)``.
    Raises :class:`BoundNotApplicable` unless ``0 < tau < 1/2`` and
    ``m >= 36 N log(2N) (1 + tau) / tau^2``.
    """
    if not 0 < tau < 0.5:
        raise BoundNotApplicable(f"tau = {tau} outside (0, 1/2)")
    need = theorem4_min_m(tau, N)
    if m < need:
        raise BoundNotApplicable(f"m = {m} below the required {need:.1f} for tau = {tau}")
    if d_norm < 0 or tail < 0:
        raise ValueError("d_norm and tail must be nonnegative")
    noise = tau * d_norm / (3 * math.sqrt((1 - tau - 2 * tau ** 2) * math.log(2 * N)))
    return noise + 2 * math.sqrt(N) * tail / math.sqrt(1 - 2 * tau)

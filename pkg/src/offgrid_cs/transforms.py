"""Sparsifying transforms, DFT-incoherence and singular-value bounds.

A transform ``Psi`` maps coefficients ``g`` (length ``n``) to a discrete
signal ``f = Psi g`` (length ``N``).  Wavelet transforms work on the padded
length ``M = 2**ceil(log2 N)``: synthesis runs the inverse periodized DWT on
``M`` samples and keeps the first ``N``; analysis zero-pads ``f`` to ``M``
and runs the forward DWT.  The synthesis operator then has orthonormal rows,
so ``Psi Psi* = I`` on the signal side and every ``f`` has the exact
coefficient vector ``Psi* f``.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .operators import LinearOperator, dense_operator, dft_operator, identity
from .rng import SeedLike, make_rng

SQ3 = math.sqrt(3.0)
HAAR_FILTER = np.array([1.0, 1.0]) / math.sqrt(2.0)
DB2_FILTER = np.array([1 + SQ3, 3 + SQ3, 3 - SQ3, 1 - SQ3]) / (4 * math.sqrt(2.0))
WAVELET_FILTERS = {"haar": HAAR_FILTER, "db2": DB2_FILTER}
KINDS = ("dft", "dft-adjoint", "identity", "haar", "db2")

GAMMA_DENSE_LIMIT = 4096
_DENSE_SVD_LIMIT = 1024


class ConvergenceWarning(UserWarning):
    pass


def highpass(h: np.ndarray) -> np.ndarray:
    """Quadrature-mirror partner ``g_k = (-1)^k h_{L-1-k}``."""
    L = h.size
    return np.array([(-1) ** k * h[L - 1 - k] for k in range(L)])


def _taps(length, L):
    # idx[n, k] = (2n + k) mod length
    return (2 * np.arange(length // 2)[:, None] + np.arange(L)[None, :]) % length


def dwt(x: np.ndarray, h: np.ndarray, depth: int) -> np.ndarray:
    """Periodized orthonormal DWT along axis 0.

    Output layout is ``[a_J, d_J, d_{J-1}, ..., d_1]`` (coarsest first).
    """
    x = np.asarray(x)
    M = x.shape[0]
    g = highpass(h)
    out = np.array(x, dtype=np.result_type(x, float), copy=True)
    length = M
    for _ in range(depth):
        a = out[:length]
        idx = _taps(length, h.size)
        lo = np.tensordot(h, a[idx.T], axes=(0, 0))
        hi = np.tensordot(g, a[idx.T], axes=(0, 0))
        out[:length // 2] = lo
        out[length // 2:length] = hi
        length //= 2
    return out


def idwt(c: np.ndarray, h: np.ndarray, depth: int) -> np.ndarray:
    """Inverse of :func:`dwt` (its adjoint, the transform being orthogonal)."""
    c = np.asarray(c)
    M = c.shape[0]
    g = highpass(h)
    out = np.array(c, dtype=np.result_type(c, float), copy=True)
    length = M >> depth
    for _ in range(depth):
        length *= 2
        lo = out[:length // 2].copy()
        hi = out[length // 2:length].copy()
        idx = _taps(length, h.size)
        rec = np.zeros((length,) + out.shape[1:], dtype=out.dtype)
        for k in range(h.size):
            rec[idx[:, k]] += h[k] * lo + g[k] * hi  # idx[:, k] has no repeats
        out[:length] = rec
    return out


def max_depth(M: int) -> int:
    return int(round(math.log2(M)))


def default_depth(kind: str, M: int) -> int:
    """Full depth for Haar; Db2 stops at a coarse length of 4 samples."""
    J = max_depth(M)
    if kind == "haar":
        return J
    if kind == "db2":
        return max(0, J - 2)
    raise ValueError(kind)


@dataclass(frozen=True, eq=False)
class SparsifyingTransform:
    """Synthesis operator ``Psi`` (N x n) with an analysis map ``g = analysis(f)``.

    ``analysis`` satisfies ``Psi analysis(f) = f`` for every ``f``; for the
    built-in kinds it equals ``Psi*``.
    """

    kind: str
    op: LinearOperator
    analysis: LinearOperator
    depth: Optional[int] = None
    padded_length: Optional[int] = None
    orthonormal: bool = True
    cached_gamma: Optional[float] = None
    cached_alpha_beta: Optional[tuple] = None

    @property
    def N(self) -> int:
        return self.op.rows

    @property
    def n(self) -> int:
        return self.op.cols

    def synthesize(self, g) -> np.ndarray:
        return self.op.forward(g)

    def analyze(self, f) -> np.ndarray:
        return self.analysis.forward(f)

    def with_cache(self, **kw) -> "SparsifyingTransform":
        return dataclasses.replace(self, **kw)

    def describe(self) -> dict:
        return {"kind": self.kind, "N": self.N, "n": self.n, "depth": self.depth,
                "padded_length": self.padded_length}


def dft_transform(N: int, method: str = "dense") -> SparsifyingTransform:
    F = dft_operator(N, method, validate=False)
    return SparsifyingTransform("dft", F, F.H)


def dft_adjoint_transform(N: int, method: str = "dense") -> SparsifyingTransform:
    F = dft_operator(N, method, validate=False)
    return SparsifyingTransform("dft-adjoint", F.H, F)


def identity_transform(N: int) -> SparsifyingTransform:
    I = identity(N)
    return SparsifyingTransform("identity", I, I)


def wavelet_transform(kind: str, N: int, depth: Optional[int] = None) -> SparsifyingTransform:
    """Periodized orthonormal wavelet synthesis on ``M = 2**ceil(log2 N)``."""
    if kind not in WAVELET_FILTERS:
        raise ValueError(f"unknown wavelet {kind!r}")
    N = int(N)
    if N < 1:
        raise ValueError("invalid length N")
    M = 1 << max(0, math.ceil(math.log2(N)))
    h = WAVELET_FILTERS[kind]
    J = default_depth(kind, M) if depth is None else int(depth)
    if not 0 <= J <= max_depth(M):
        raise ValueError(f"depth {J} outside [0, {max_depth(M)}] for padded length {M}")
    if M >> J < 1:
        raise ValueError("depth too large")

    def synth(g):
        return idwt(g, h, J)[:N]

    def analyze(f):
        pad = np.zeros((M,) + f.shape[1:], dtype=np.complex128)
        pad[:N] = f
        return dwt(pad, h, J)

    op = LinearOperator(N, M, synth, analyze, name=f"{kind}^-1", validate=False)
    return SparsifyingTransform(kind, op, op.H, depth=J, padded_length=M)


def haar_inverse(N: int, depth: Optional[int] = None) -> SparsifyingTransform:
    return wavelet_transform("haar", N, depth)


def db2_inverse(N: int, depth: Optional[int] = None) -> SparsifyingTransform:
    return wavelet_transform("db2", N, depth)


def from_matrix(M, kind: str = "custom") -> SparsifyingTransform:
    """Wrap an explicit full-column-rank matrix; analysis is the pseudo-inverse."""
    M = np.asarray(M, dtype=np.complex128)
    op = dense_operator(M, name=kind, validate=False)
    pinv = dense_operator(np.linalg.pinv(M), name=f"{kind}^+", validate=False)
    ortho = bool(np.allclose(M.conj().T @ M, np.eye(M.shape[1]), atol=1e-12))
    return SparsifyingTransform(kind, op, pinv, orthonormal=ortho)


def make_transform(kind: str, N: int, depth: Optional[int] = None) -> SparsifyingTransform:
    if kind == "dft":
        return dft_transform(N)
    if kind == "dft-adjoint":
        return dft_adjoint_transform(N)
    if kind == "identity":
        return identity_transform(N)
    if kind in WAVELET_FILTERS:
        return wavelet_transform(kind, N, depth)
    raise ValueError(f"unknown transform kind {kind!r}; expected one of {KINDS}")


def gamma(psi: SparsifyingTransform, dense_limit: int = GAMMA_DENSE_LIMIT, override: bool = False,
          chunk: int = 64) -> float:
    """DFT-incoherence ``max_l sum_k |<F_k, Psi_l>|``.

    Columns of ``Psi`` are generated a block at a time and their unitary DFT
    taken with an FFT.  The moduli of DFT coefficients do not depend on the
    centering of the grid or of the frequency band, so the value agrees with
    the centered DFT for odd ``N`` and stays meaningful for even ``N``.
    """
    if psi.cached_gamma is not None:
        return psi.cached_gamma
    N, n = psi.N, psi.n
    if max(N, n) > dense_limit and not override:
        raise ValueError(f"N = {N} exceeds the gamma limit {dense_limit}; pass override=True")
    best = 0.0
    for lo in range(0, n, chunk):
        hi = min(n, lo + chunk)
        eye = np.zeros((n, hi - lo), dtype=np.complex128)
        eye[np.arange(lo, hi), np.arange(hi - lo)] = 1.0
        cols = psi.op.forward(eye)
        coef = np.fft.fft(cols, axis=0) / math.sqrt(N)
        best = max(best, float(np.max(np.sum(np.abs(coef), axis=0))))
    return best


class SingularBounds(NamedTuple):
    alpha: float
    beta: float
    alpha_residual: float
    beta_residual: float
    converged: bool
    method: str


def _gram(psi):
    op = psi.op
    if op.cols <= op.rows:
        return op.cols, lambda v: op.adjoint(op.forward(v))
    return op.rows, lambda v: op.forward(op.adjoint(v))


def _power(apply, dim, iters, rng, tol=1e-15):
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    lam = 0.0
    converged = False
    for _ in range(iters):
        w = apply(v)
        new = float(np.real(np.vdot(v, w)))
        nw = np.linalg.norm(w)
        if nw == 0:
            return 0.0, 0.0, True
        v = w / nw
        if abs(new - lam) <= tol * max(abs(new), 1e-300):
            lam = new
            converged = True
            break
        lam = new
    w = apply(v)
    lam = float(np.real(np.vdot(v, w)))
    res = float(np.linalg.norm(w - lam * v))
    return lam, res, converged


def singular_bounds(psi: SparsifyingTransform, iters: int = 500, seed: SeedLike = 0,
                    dense_limit: int = _DENSE_SVD_LIMIT) -> SingularBounds:
    """Extreme singular values ``(alpha, beta)`` of ``Psi``.

    ``beta`` comes from power iteration on the smaller Gram matrix.  ``alpha``
    (the smallest of the ``min(N, n)`` singular values) comes from a dense
    eigen-decomposition of that Gram matrix when it has at most
    ``dense_limit`` rows and from shifted power iteration otherwise.  The
    residuals ``|G v - lambda v|`` of the returned eigenpairs are reported.
    """
    if iters < 50:
        raise ValueError("iters must be at least 50")
    if psi.cached_alpha_beta is not None:
        a, b = psi.cached_alpha_beta
        return SingularBounds(a, b, 0.0, 0.0, True, "cached")
    rng = make_rng(seed)
    dim, G = _gram(psi)
    lam_max, res_b, conv_b = _power(G, dim, iters, rng)
    if dim <= dense_limit:
        eye = np.eye(dim, dtype=np.complex128)
        Gd = G(eye)
        Gd = 0.5 * (Gd + Gd.conj().T)
        w, V = np.linalg.eigh(Gd)
        lam_min = max(float(w[0]), 0.0)
        res_a = float(np.linalg.norm(Gd @ V[:, 0] - w[0] * V[:, 0]))
        conv_a, method = True, "power+dense"
    else:
        shift = lam_max
        mu, res_a, conv_a = _power(lambda v: shift * v - G(v), dim, iters, rng)
        lam_min = max(shift - mu, 0.0)
        method = "power+shifted"
    converged = conv_b and conv_a
    if not converged:
        warnings.warn("singular value iteration did not reach tolerance", ConvergenceWarning, stacklevel=2)
    return SingularBounds(math.sqrt(lam_min), math.sqrt(max(lam_max, 0.0)), res_a, res_b, converged, method)


def best_sparse_error(g, s: int) -> float:
    """l1 distance from ``g`` to its best ``s``-term approximation."""
    g = np.asarray(g).ravel()
    s = int(s)
    if s < 0 or s > g.size:
        raise ValueError(f"s must lie in [0, {g.size}]")
    mag = np.abs(g)
    order = np.argsort(-mag, kind="stable")  # ties keep the lower index
    return float(np.sum(mag[order[s:]]))


def best_sparse_approx(g, s: int) -> np.ndarray:
    g = np.asarray(g).ravel()
    order = np.argsort(-np.abs(g), kind="stable")
    out = np.zeros_like(g)
    out[order[:s]] = g[order[:s]]
    return out

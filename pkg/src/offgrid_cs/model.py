"""Continuous signals as finite Fourier series, uniform sampling and aliasing.

A signal on the torus [-1/2, 1/2) is stored by its Fourier coefficients,
``f(x) = sum_l c_l e(l x)`` with ``e(x) = exp(2 pi i x)``.  Only nonzero
coefficients are kept, so very wide bandwidths with few active frequencies
stay cheap.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Tuple, Union

import numpy as np

from .rng import SeedLike, make_rng

# Gaussian test model: three bumps exp(-WIDTH (x - center)^2) with +-1 weights.
GAUSSIAN_WIDTH = 100.0
GAUSSIAN_CENTERS = (0.0, 0.104, -0.217)
GAUSSIAN_WEIGHTS = (-1.0, 1.0, -1.0)

_EVAL_CHUNK = 1 << 20


def e(x):
    """The unimodular exponential ``exp(2 pi i x)``."""
    return np.exp(2j * np.pi * np.asarray(x, dtype=float))


def _e_reduced(phase: np.ndarray) -> np.ndarray:
    # exp(2 pi i phase) after removing the integer part, which keeps large
    # frequency-time products accurate
    return np.exp(2j * np.pi * (phase - np.round(phase)))


def check_odd(N: int, name: str = "N") -> int:
    """Validate an odd grid size ``N >= 1`` and return it as ``int``."""
    if isinstance(N, (bool, np.bool_)) or int(N) != N:
        raise ValueError(f"{name} must be an integer, got {N!r}")
    N = int(N)
    if N < 1 or N % 2 == 0:
        raise ValueError(f"{name} must be a positive odd integer, got {N}")
    return N


def half_width(N: int) -> int:
    """``(N - 1) / 2`` for odd ``N``."""
    return (check_odd(N) - 1) // 2


@dataclass(frozen=True, eq=False)
class FourierSignal:
    """Finitely supported Fourier series.

    Attributes
    ----------
    freqs : ndarray of int64
        Strictly increasing frequencies with nonzero storage.
    coeffs : ndarray of complex128
        Amplitude ``c_l`` for each entry of ``freqs``.
    truncation : int
        Truncation level ``L``: every frequency satisfies ``|l| <= L``.
    quadrature_error : float, optional
        Estimated coefficient error when the amplitudes were computed
        numerically, ``None`` for exact coefficients.
    """

    freqs: np.ndarray
    coeffs: np.ndarray
    truncation: int = -1
    quadrature_error: Optional[float] = field(default=None)

    def __post_init__(self):
        freqs = np.asarray(self.freqs, dtype=np.int64).ravel()
        coeffs = np.asarray(self.coeffs, dtype=np.complex128).ravel()
        if freqs.shape != coeffs.shape:
            raise ValueError("freqs and coeffs must have the same length")
        order = np.argsort(freqs, kind="stable")
        freqs, coeffs = freqs[order], coeffs[order]
        if freqs.size > 1 and np.any(np.diff(freqs) == 0):
            raise ValueError("duplicate frequencies")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("coefficients must be finite")
        L = int(np.max(np.abs(freqs))) if freqs.size else 0
        trunc = L if self.truncation is None or self.truncation < 0 else int(self.truncation)
        if trunc < L:
            raise ValueError(f"truncation {trunc} below largest frequency {L}")
        freqs.setflags(write=False)
        coeffs.setflags(write=False)
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "truncation", trunc)

    @classmethod
    def from_mapping(cls, coeffs: Mapping[int, complex], truncation: int = -1) -> "FourierSignal":
        items = sorted((int(k), complex(v)) for k, v in coeffs.items())
        return cls(np.array([k for k, _ in items], dtype=np.int64),
                   np.array([v for _, v in items], dtype=np.complex128), truncation)

    @property
    def coeff_map(self) -> dict:
        return {int(k): complex(v) for k, v in zip(self.freqs, self.coeffs)}

    @property
    def sparsity(self) -> int:
        return int(np.count_nonzero(self.coeffs))

    def wiener_norm(self) -> float:
        """``sum_l |c_l|``."""
        return float(np.sum(np.abs(self.coeffs)))

    def __call__(self, x):
        return eval_signal(self, x)

    def to_text(self) -> str:
        """One line per coefficient: ``freq re,im``."""
        lines = [f"{int(k)} {float(c.real)!r},{float(c.imag)!r}" for k, c in zip(self.freqs, self.coeffs)]
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_text(cls, text: str) -> "FourierSignal":
        coeffs = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                freq, value = line.split()
                re, im = value.split(",")
                k = int(freq)
                if k in coeffs:
                    raise ValueError("duplicate frequency")
                coeffs[k] = complex(float(re), float(im))
            except ValueError as exc:
                raise ValueError(f"line {lineno}: cannot parse {raw!r} ({exc})") from None
        return cls.from_mapping(coeffs)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_text())

    @classmethod
    def load(cls, path) -> "FourierSignal":
        with open(path) as fh:
            return cls.from_text(fh.read())


def eval_signal(sig: FourierSignal, x) -> Union[complex, np.ndarray]:
    """Evaluate ``sum_l c_l e(l x)`` at a scalar or array of points."""
    xs = np.asarray(x, dtype=float)
    flat = xs.ravel()
    out = np.zeros(flat.shape, dtype=np.complex128)
    if sig.freqs.size:
        step = max(1, _EVAL_CHUNK // sig.freqs.size)
        f = sig.freqs.astype(float)
        for lo in range(0, flat.size, step):
            blk = flat[lo:lo + step]
            out[lo:lo + step] = _e_reduced(np.outer(blk, f)) @ sig.coeffs
    if xs.ndim == 0:
        return complex(out[0])
    return out.reshape(xs.shape)


def grid_points(N: int) -> np.ndarray:
    """Uniform grid ``t_k = (k-1)/N - 1/2``, k = 1..N."""
    N = check_odd(N)
    return np.arange(N) / N - 0.5


@dataclass(frozen=True, eq=False)
class UniformDiscretization:
    """Samples of a signal on the uniform grid of odd size ``N``."""

    N: int
    samples: np.ndarray

    def __post_init__(self):
        N = check_odd(self.N)
        samples = np.array(self.samples, dtype=np.complex128).ravel()
        if samples.size != N:
            raise ValueError(f"expected {N} samples, got {samples.size}")
        samples.setflags(write=False)
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "samples", samples)

    @property
    def grid_points(self) -> np.ndarray:
        return grid_points(self.N)

    @property
    def half_width(self) -> int:
        return (self.N - 1) // 2


def discretize(sig: FourierSignal, N: int) -> UniformDiscretization:
    """Sample ``sig`` on the uniform grid of size ``N``."""
    N = check_odd(N)
    if N < 3:
        raise ValueError("N must be at least 3")
    return UniformDiscretization(N, eval_signal(sig, grid_points(N)))


def alias_fold(ell, N: int) -> Tuple:
    """Fold frequency ``ell`` into ``[-Nh, Nh]`` under ``N``-point sampling.

    Returns ``(r, sign)`` with ``r = rem(ell + Nh, N) - Nh`` and
    ``sign = (-1)**floor((ell + Nh) / N)``, ``Nh = (N - 1) / 2``.  Works
    elementwise on integer arrays.
    """
    Nh = half_width(N)
    shifted = np.asarray(ell, dtype=np.int64) + Nh
    q, rem = np.divmod(shifted, N)
    r = rem - Nh
    sign = 1 - 2 * (q % 2)
    if np.ndim(ell) == 0:
        return int(r), int(sign)
    return r, sign


def tail_wiener_norm(sig: FourierSignal, N: int) -> float:
    """``sum_{|l| > (N-1)/2} |c_l|``: Wiener norm of the out-of-band part."""
    Nh = half_width(N)
    mask = np.abs(sig.freqs) > Nh
    return float(np.sum(np.abs(sig.coeffs[mask])))


def bandlimit(sig: FourierSignal, N: int) -> FourierSignal:
    """Keep only frequencies ``|l| <= (N-1)/2``."""
    Nh = half_width(N)
    mask = np.abs(sig.freqs) <= Nh
    return FourierSignal(sig.freqs[mask], sig.coeffs[mask], min(sig.truncation, Nh))


def random_exponential_signal(s: int, omega: int, seed: SeedLike = 0) -> FourierSignal:
    """``s`` distinct frequencies uniform in ``{-omega..omega}``, unit amplitude."""
    s, omega = int(s), int(omega)
    if omega < 0 or s < 0:
        raise ValueError("s and omega must be nonnegative")
    if s > 2 * omega + 1:
        raise ValueError(f"cannot draw {s} distinct frequencies from {2 * omega + 1}")
    rng = make_rng(seed)
    freqs = np.sort(rng.choice(2 * omega + 1, size=s, replace=False)) - omega
    return FourierSignal(freqs, np.ones(s, dtype=np.complex128), omega)


def random_signal_with_tail(N: int, L: int, seed: SeedLike = 0, decay: float = 1.0) -> FourierSignal:
    """Random complex coefficients on ``|l| <= L`` with ``(1 + |l|)^-decay`` envelope.

    Useful test input whose out-of-band tail is nonzero whenever ``L > (N-1)/2``.
    """
    check_odd(N)
    rng = make_rng(seed)
    freqs = np.arange(-L, L + 1)
    amp = (1.0 + np.abs(freqs)) ** (-decay)
    c = (rng.standard_normal(freqs.size) + 1j * rng.standard_normal(freqs.size)) * amp
    return FourierSignal(freqs, c, L)


def gaussian_model(x, periodic: bool = True):
    """The three-bump Gaussian test signal evaluated in closed form.

    With ``periodic=True`` (default) each bump is summed over its integer
    translates, which is the function whose Fourier series the package
    works with.  ``periodic=False`` gives the plain sum of three Gaussians;
    the two agree to ~1e-26 away from ``|x| > 0.45`` and differ by up to
    3.4e-4 at the edge of the torus, where the plain form is discontinuous.
    """
    xs = np.asarray(x, dtype=float)
    shifts = (-2, -1, 0, 1, 2) if periodic else (0,)
    out = np.zeros(xs.shape)
    for a, mu in zip(GAUSSIAN_WEIGHTS, GAUSSIAN_CENTERS):
        for n in shifts:
            out = out + a * np.exp(-GAUSSIAN_WIDTH * (xs - mu + n) ** 2)
    return out if xs.ndim else float(out)


def gaussian_model_exact_coeffs(freqs) -> np.ndarray:
    """Analytic Fourier coefficients of the periodic Gaussian model."""
    k = np.asarray(freqs, dtype=float)
    env = np.sqrt(np.pi / GAUSSIAN_WIDTH) * np.exp(-np.pi ** 2 * k ** 2 / GAUSSIAN_WIDTH)
    out = np.zeros(k.shape, dtype=np.complex128)
    for a, mu in zip(GAUSSIAN_WEIGHTS, GAUSSIAN_CENTERS):
        out = out + a * env * _e_reduced(-k * mu)
    return out


def _trapezoid_coeffs(L: int, M: int) -> np.ndarray:
    # c_l ~ (1/M) sum_j f(x_j) e(-l x_j) with x_j = j/M - 1/2, for l = -L..L
    xj = np.arange(M) / M - 0.5
    fx = gaussian_model(xj)
    spec = np.fft.fft(fx) / M  # sum_j f_j e(-l j / M)
    ell = np.arange(-L, L + 1)
    return spec[ell % M] * np.exp(1j * np.pi * ell)  # e(-l * (-1/2))


def gaussian_model_coeffs(L: int = 1200, M: Optional[int] = None) -> FourierSignal:
    """Fourier coefficients of the Gaussian model for ``|l| <= L``.

    Coefficients come from the ``M``-point trapezoidal rule on [-1/2, 1/2),
    which for a smooth periodic integrand is limited only by aliasing.  The
    attached ``quadrature_error`` is ``max_l |c_l(M) - c_l(2M)|``.
    """
    L = int(L)
    M = 4 * L if M is None else int(M)
    if L < 0:
        raise ValueError("L must be nonnegative")
    if M < 4 * L or M < 1:
        raise ValueError(f"resolution M = {M} must be at least 4L = {4 * L}")
    c = _trapezoid_coeffs(L, M)
    err = float(np.max(np.abs(c - _trapezoid_coeffs(L, 2 * M)))) if L >= 0 else 0.0
    return FourierSignal(np.arange(-L, L + 1), c, L, quadrature_error=err)


def signal_from_vector(f: np.ndarray) -> FourierSignal:
    """Trigonometric polynomial of degree ``(N-1)/2`` interpolating ``f`` on the grid."""
    f = np.asarray(f, dtype=np.complex128).ravel()
    N = check_odd(f.size)
    Nh = (N - 1) // 2
    t = grid_points(N)
    ell = np.arange(-Nh, Nh + 1)
    c = _e_reduced(-np.outer(ell, t)) @ f / N
    return FourierSignal(ell, c, Nh)


def as_signal(coeffs: Union[FourierSignal, Mapping[int, complex], Iterable]) -> FourierSignal:
    if isinstance(coeffs, FourierSignal):
        return coeffs
    if isinstance(coeffs, Mapping):
        return FourierSignal.from_mapping(coeffs)
    raise TypeError(f"cannot interpret {type(coeffs).__name__} as a FourierSignal")

"""Deviation laws, torus-wrapped sampling grids and the bias parameter theta.

Sample ``k`` of ``m`` sits at ``(k-1)/m - 1/2 + Delta_k`` reduced to
[-1/2, 1/2).  Deviation laws whose scale is tied to the base step ``1/m``
(uniform jitter and its generalisations) take ``m`` as an argument wherever
they are sampled or their characteristic function is evaluated.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, fields
from typing import ClassVar, NamedTuple, Optional, Union

import numpy as np

from .model import check_odd
from .rng import SeedLike, make_rng


class DeviationModelInapplicable(ValueError):
    """Raised when theta is requested outside the undersampled regime (m > N)."""


class ThetaPreconditionWarning(UserWarning):
    """A discrete-uniform law is too coarse for its theta = 0 guarantee."""


def _e(x):
    return np.exp(2j * np.pi * np.asarray(x, dtype=float))


def _sin_pi(x):
    # sin(pi x), exactly zero at integers
    x = np.asarray(x, dtype=float)
    r = x - 2.0 * np.round(x / 2.0)
    out = np.sin(np.pi * r)
    return np.where(r == np.round(r), 0.0, out)


def _sinc_pi(x):
    # sin(pi x) / (pi x) with the removable point filled in
    x = np.asarray(x, dtype=float)
    nz = x != 0
    return np.where(nz, _sin_pi(x) / (np.pi * np.where(nz, x, 1.0)), 1.0)


class _Distribution:
    kind: ClassVar[str] = ""
    relative: ClassVar[bool] = False  # scale depends on the base step 1/m

    def to_record(self) -> dict:
        rec = {"kind": self.kind}
        rec.update(asdict(self))
        return rec

    def _need_m(self, m):
        if self.relative and m is None:
            raise ValueError(f"{self.kind} deviations are scaled by 1/m; pass m")
        return None if m is None else int(m)

    def sample(self, rng: np.random.Generator, size: int, m: Optional[int] = None) -> np.ndarray:
        raise NotImplementedError

    def char_function(self, t, m: Optional[int] = None):
        raise NotImplementedError


@dataclass(frozen=True)
class UniformJitter(_Distribution):
    """``U[-rho/m, rho/m]``."""

    rho: float
    kind: ClassVar[str] = "uniform_jitter"
    relative: ClassVar[bool] = True

    def __post_init__(self):
        if not (self.rho >= 0 and math.isfinite(self.rho)):
            raise ValueError("rho must be finite and nonnegative")

    def sample(self, rng, size, m=None):
        m = self._need_m(m)
        return rng.uniform(-self.rho / m, self.rho / m, size)

    def char_function(self, t, m=None):
        m = self._need_m(m)
        return _sinc_pi(np.asarray(t, dtype=float) * (2 * self.rho) / m).astype(np.complex128)


@dataclass(frozen=True)
class UniformGeneral(_Distribution):
    """``U[mu - p/(2m), mu + p/(2m)]`` with integer ``p >= 1``."""

    mu: float
    p: int
    kind: ClassVar[str] = "uniform_general"
    relative: ClassVar[bool] = True

    def __post_init__(self):
        if int(self.p) != self.p or self.p < 1:
            raise ValueError("p must be a positive integer")

    def sample(self, rng, size, m=None):
        m = self._need_m(m)
        h = self.p / (2 * m)
        return rng.uniform(self.mu - h, self.mu + h, size)

    def char_function(self, t, m=None):
        m = self._need_m(m)
        t = np.asarray(t, dtype=float)
        return _e(t * self.mu) * _sinc_pi(t * self.p / m)


@dataclass(frozen=True)
class DiscreteUniform(_Distribution):
    """Uniform on ``mu - p/(2m) + p k / (m nbar)``, ``k = 0..nbar-1``."""

    mu: float
    p: int
    nbar: int
    kind: ClassVar[str] = "discrete_uniform"
    relative: ClassVar[bool] = True

    def __post_init__(self):
        if int(self.p) != self.p or self.p < 1:
            raise ValueError("p must be a positive integer")
        if int(self.nbar) != self.nbar or self.nbar < 1:
            raise ValueError("nbar must be a positive integer")

    def support(self, m: int) -> np.ndarray:
        return self.mu - self.p / (2 * m) + self.p * np.arange(self.nbar) / (m * self.nbar)

    def sample(self, rng, size, m=None):
        m = self._need_m(m)
        return self.support(m)[rng.integers(0, self.nbar, size)]

    def char_function(self, t, m=None):
        m = self._need_m(m)
        t = np.asarray(t, dtype=float)
        # geometric sum (1/nbar) sum_k z^k with z = e(t p / (m nbar)); the
        # ratio form is exact away from z = 1 and we fall back to the
        # direct sum near it
        x = t * self.p / (m * self.nbar)
        frac = x - np.round(x)
        direct = np.abs(frac) < 1e-8
        num = _sin_pi(t * self.p / m)
        den = self.nbar * np.sin(np.pi * np.where(direct, 0.5, x))
        ratio = num / den * _e(x * (self.nbar - 1) / 2)
        if np.any(direct):
            k = np.arange(self.nbar)
            dsum = _e(np.multiply.outer(np.atleast_1d(x), k)).mean(axis=-1).reshape(np.shape(x))
            ratio = np.where(direct, dsum, ratio)
        return _e(t * (self.mu - self.p / (2 * m))) * ratio


@dataclass(frozen=True)
class Normal(_Distribution):
    mu: float
    sigma: float
    kind: ClassVar[str] = "normal"

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")

    def sample(self, rng, size, m=None):
        return rng.normal(self.mu, self.sigma, size)

    def char_function(self, t, m=None):
        t = np.asarray(t, dtype=float)
        return _e(t * self.mu) * np.exp(-2 * np.pi ** 2 * t ** 2 * self.sigma ** 2)


@dataclass(frozen=True)
class Laplace(_Distribution):
    mu: float
    b: float
    kind: ClassVar[str] = "laplace"

    def __post_init__(self):
        if not self.b > 0:
            raise ValueError("b must be positive")

    def sample(self, rng, size, m=None):
        return rng.laplace(self.mu, self.b, size)

    def char_function(self, t, m=None):
        t = np.asarray(t, dtype=float)
        return _e(t * self.mu) / (1 + (2 * np.pi * self.b * t) ** 2)


@dataclass(frozen=True)
class Exponential(_Distribution):
    """Rate-``lam`` exponential law (mean ``1/lam``)."""

    lam: float
    kind: ClassVar[str] = "exponential"

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lam must be positive")

    def sample(self, rng, size, m=None):
        return rng.exponential(1.0 / self.lam, size)

    def char_function(self, t, m=None):
        t = np.asarray(t, dtype=float)
        return self.lam / (self.lam - 2j * np.pi * t)


@dataclass(frozen=True)
class Degenerate(_Distribution):
    """Point mass at ``value``."""

    value: float = 0.0
    kind: ClassVar[str] = "degenerate"

    def sample(self, rng, size, m=None):
        return np.full(size, float(self.value))

    def char_function(self, t, m=None):
        return _e(np.asarray(t, dtype=float) * self.value)


DeviationDistribution = Union[UniformJitter, UniformGeneral, DiscreteUniform, Normal,
                              Laplace, Exponential, Degenerate]

DISTRIBUTIONS = {cls.kind: cls for cls in
                 (UniformJitter, UniformGeneral, DiscreteUniform, Normal, Laplace, Exponential, Degenerate)}

# accepted spellings in config records
_ALIASES = {"sigma_bar": "sigma", "lambda": "lam", "n_bar": "nbar"}


def distribution_from_record(record: dict) -> DeviationDistribution:
    """Build a distribution from a tagged record such as ``{"kind": "normal", ...}``."""
    if not isinstance(record, dict) or "kind" not in record:
        raise ValueError(f"distribution record needs a 'kind' field: {record!r}")
    kind = record["kind"]
    if kind not in DISTRIBUTIONS:
        raise ValueError(f"unknown distribution kind {kind!r}; expected one of {sorted(DISTRIBUTIONS)}")
    cls = DISTRIBUTIONS[kind]
    allowed = {f.name for f in fields(cls)}
    kwargs = {}
    for key, val in record.items():
        if key == "kind":
            continue
        name = _ALIASES.get(key, key)
        if name not in allowed:
            raise ValueError(f"unknown field {key!r} for {kind}; expected {sorted(allowed)}")
        kwargs[name] = val
    if "mu" in allowed:
        kwargs.setdefault("mu", 0.0)
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ValueError(f"bad parameters for {kind}: {exc}") from None


def char_function(dist: DeviationDistribution, t, m: Optional[int] = None):
    """``E[e(t delta)]`` in closed form."""
    out = dist.char_function(t, m)
    return complex(out) if np.ndim(out) == 0 else out


def draw_deviations(dist: DeviationDistribution, m: int, seed: SeedLike = 0) -> np.ndarray:
    """``m`` i.i.d. deviations from ``dist``."""
    m = int(m)
    if m < 1:
        raise ValueError("m must be at least 1")
    return np.asarray(dist.sample(make_rng(seed), m, m), dtype=float)


def wrap(x):
    """Reduce to the torus representative in [-1/2, 1/2)."""
    x = np.asarray(x, dtype=float)
    w = x - np.floor(x + 0.5)
    # x + 1/2 can round up to an integer for x just below 1/2 + n
    w = np.where(w >= 0.5, w - 1.0, w)
    w = np.where(w < -0.5, w + 1.0, w)
    return w


@dataclass(frozen=True, eq=False)
class NonuniformGrid:
    """``m`` jittered sample locations on the torus."""

    m: int
    deviations: np.ndarray
    points: np.ndarray

    @property
    def base_step(self) -> float:
        return 1.0 / self.m

    def to_text(self) -> str:
        return "".join(f"{k + 1} {float(p)!r}\n" for k, p in enumerate(self.points))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_text())


def build_grid(deviations, m: Optional[int] = None) -> NonuniformGrid:
    """Perturbed grid ``wrap((k-1)/m - 1/2 + Delta_k)``."""
    dev = np.array(deviations, dtype=float).ravel()
    m = dev.size if m is None else int(m)
    if dev.size != m:
        raise ValueError(f"{dev.size} deviations supplied for m = {m}")
    if m < 1:
        raise ValueError("m must be at least 1")
    if not np.all(np.isfinite(dev)):
        raise ValueError("deviations must be finite")
    pts = wrap(np.arange(m) / m - 0.5 + dev)
    dev.setflags(write=False)
    pts.setflags(write=False)
    return NonuniformGrid(m, dev, pts)


def random_grid(dist: DeviationDistribution, m: int, seed: SeedLike = 0) -> NonuniformGrid:
    return build_grid(draw_deviations(dist, m, seed), m)


def uniform_grid(m: int) -> NonuniformGrid:
    return build_grid(np.zeros(int(m)), m)


def theta_j_max(N: int, m: int) -> int:
    """Largest ``|j|`` entering theta: ``floor(2(N-1)/m)``."""
    return (2 * (int(N) - 1)) // int(m)


def _theta_args(dist, N, m):
    N = check_odd(N)
    m = int(m)
    if m < 1:
        raise ValueError("m must be at least 1")
    if m > N:
        raise DeviationModelInapplicable(
            f"theta is defined for m <= N (got m = {m}, N = {N}); the oversampled "
            "regime does not use the deviation model")
    if isinstance(dist, DiscreteUniform) and not dist.nbar > 2 * (N - 1) * dist.p / m:
        warnings.warn(f"nbar = {dist.nbar} does not exceed 2(N-1)p/m = {2 * (N - 1) * dist.p / m:g}; "
                      "theta need not vanish", ThetaPreconditionWarning, stacklevel=3)
    return N, m


def theta(dist: DeviationDistribution, N: int, m: int) -> float:
    """``(2N/m) max_{0<|j|<=floor(2(N-1)/m)} |E e(j m delta)|``.

    Negative ``j`` contribute the conjugate of positive ``j`` and so the
    maximum runs over ``j = 1..floor(2(N-1)/m)``.
    """
    N, m = _theta_args(dist, N, m)
    J = theta_j_max(N, m)
    if J < 1:
        return 0.0
    j = np.arange(1, J + 1)
    return float(2 * N / m * np.max(np.abs(dist.char_function(j * m, m))))


class ThetaEstimate(NamedTuple):
    value: float
    stderr: float
    j_star: int


def theta_monte_carlo(dist: DeviationDistribution, N: int, m: int, trials: int = 100_000,
                      seed: SeedLike = 0) -> ThetaEstimate:
    """Monte-Carlo theta with sample means in place of ``E e(j m delta)``.

    The standard error is the CLT scale of the maximising term,
    ``(2N/m) sqrt((1 - |phi_hat|^2) / trials)``.
    """
    N, m = _theta_args(dist, N, m)
    trials = int(trials)
    if trials < 2:
        raise ValueError("trials must be at least 2")
    J = theta_j_max(N, m)
    if J < 1:
        return ThetaEstimate(0.0, 0.0, 0)
    delta = np.asarray(dist.sample(make_rng(seed), trials, m), dtype=float)
    mods = np.empty(J)
    for idx, j in enumerate(range(1, J + 1)):
        ph = j * m * delta
        mods[idx] = abs(np.mean(np.exp(2j * np.pi * (ph - np.round(ph)))))
    k = int(np.argmax(mods))
    scale = 2 * N / m
    var = max(0.0, 1.0 - mods[k] ** 2)
    return ThetaEstimate(float(scale * mods[k]), float(scale * math.sqrt(var / trials)), k + 1)


def default_nbar(N: int, m: int, p: int = 1) -> int:
    """Smallest ``nbar`` with ``nbar > 2(N-1)p/m``."""
    return (2 * (int(N) - 1) * int(p)) // int(m) + 1

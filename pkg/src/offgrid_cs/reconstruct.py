"""End-to-end acquisition and reconstruction pipelines.

Each acquisition owns two Philox streams derived from its seed: stream 0
draws the sampling grid and stream 1 the measurement noise.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .analysis import BoundNotApplicable, relative_error, theorem4_bound
from .model import FourierSignal, check_odd, discretize, eval_signal, grid_points, tail_wiener_norm
from .operators import (DirichletKernelOp, centered_dft_adjoint, compose, concat_acquisitions,
                        continuous_eval, materialize)
from .rng import SeedLike, make_rng
from .sampling import DeviationDistribution, NonuniformGrid, build_grid, draw_deviations
from .solve import BpdnOptions, SolveReport, bpdn, bpdn_sigma_from_model, least_squares
from .transforms import SparsifyingTransform


class TheoremRegimeWarning(UserWarning):
    """A pipeline was run outside the regime its guarantee covers."""


@dataclass(frozen=True)
class UniformScaledNoise:
    """i.i.d. real noise ``U[-chi/divisor, chi/divisor]`` with ``chi = |f|_1 / sqrt(m)``.

    The ``1/sqrt(m)`` factor keeps ``|d|_2`` roughly constant as ``m`` varies.
    """

    divisor: float = 1000.0

    def __post_init__(self):
        if not self.divisor > 0:
            raise ValueError("noise divisor must be positive")

    def draw(self, f: np.ndarray, m: int, rng: np.random.Generator) -> np.ndarray:
        chi = float(np.sum(np.abs(f))) / math.sqrt(m)
        half = chi / self.divisor
        return rng.uniform(-half, half, m).astype(np.complex128)


@dataclass(frozen=True, eq=False)
class AcquisitionSpec:
    """One nonuniform acquisition of ``signal``.

    ``on_grid=True`` draws ``m`` distinct uniform-grid locations uniformly at
    random instead of perturbing the base grid (the subsampled-grid regime,
    in which interpolation is exact and the constraint level is just ``eta``).
    """

    signal: FourierSignal
    N: int
    m: int
    distribution: Optional[DeviationDistribution] = None
    noise: Optional[UniformScaledNoise] = None
    seed: SeedLike = 0
    on_grid: bool = False

    def __post_init__(self):
        check_odd(self.N)
        if int(self.m) < 1:
            raise ValueError("m must be at least 1")
        if self.on_grid and self.m > self.N:
            raise ValueError("on-grid sampling needs m <= N")
        if not self.on_grid and self.distribution is None:
            raise ValueError("a deviation distribution is required unless on_grid is set")


@dataclass(frozen=True, eq=False)
class Acquisition:
    b: np.ndarray
    grid: NonuniformGrid
    d: np.ndarray
    f: np.ndarray
    f_tilde: np.ndarray
    g_truth: Optional[np.ndarray] = None

    @property
    def eta(self) -> float:
        return float(np.linalg.norm(self.d))


def _grid_for(spec: AcquisitionSpec) -> NonuniformGrid:
    rng = make_rng(spec.seed, 0) if not isinstance(spec.seed, np.random.Generator) else spec.seed
    if spec.on_grid:
        idx = np.sort(rng.choice(spec.N, size=spec.m, replace=False))
        pts = grid_points(spec.N)[idx]
        return build_grid(pts - (np.arange(spec.m) / spec.m - 0.5), spec.m)
    return build_grid(draw_deviations(spec.distribution, spec.m, rng), spec.m)


def acquire(spec: AcquisitionSpec, psi: Optional[SparsifyingTransform] = None) -> Acquisition:
    """Sample the signal off the grid and add noise.

    Returns ``b = f~ + d`` together with the grid, the noise ``d``, the
    uniform discretization ``f`` and, when ``psi`` is given, the exact
    coefficients ``g_truth`` with ``psi g_truth = f``.
    """
    grid = _grid_for(spec)
    f = discretize(spec.signal, spec.N).samples
    f_tilde = eval_signal(spec.signal, grid.points)
    if spec.noise is None:
        d = np.zeros(spec.m, dtype=np.complex128)
    else:
        nrng = make_rng(spec.seed, 1) if not isinstance(spec.seed, np.random.Generator) else spec.seed
        d = spec.noise.draw(f, spec.m, nrng)
    b = f_tilde + d
    g = None if psi is None else psi.analyze(f)
    return Acquisition(b, grid, d, f, f_tilde, g)


@dataclass(eq=False)
class ReconstructionReport:
    f_hat: np.ndarray
    f: np.ndarray
    relative_error: float
    input_noise_level: float
    sigma_used: float
    solver: SolveReport
    theoretical_bound: Optional[float] = None
    g_hat: Optional[np.ndarray] = None
    per_acquisition_residuals: List[float] = field(default_factory=list)

    def absolute_error(self) -> float:
        return float(np.linalg.norm(self.f_hat - self.f))

    def csv_fields(self) -> dict:
        return {"rel_err": repr(float(self.relative_error)), "noise_level": repr(float(self.input_noise_level)),
                "sigma": repr(float(self.sigma_used)),
                "bound": "" if self.theoretical_bound is None else repr(float(self.theoretical_bound)),
                **self.solver.csv_fields()}


def _noise_level(d, f) -> float:
    nf = np.linalg.norm(f)
    return float(np.linalg.norm(d) / nf) if nf > 0 else 0.0


def _rel(f_hat, f) -> float:
    if np.linalg.norm(f) == 0:
        return float(np.linalg.norm(f_hat))
    return relative_error(f_hat, f)


def cs_reconstruct(spec: AcquisitionSpec, psi: SparsifyingTransform, eta: Optional[float] = None,
                   tail: Optional[float] = None, opts: Optional[BpdnOptions] = None,
                   acquisition: Optional[Acquisition] = None, materialize_limit: int = 1 << 22
                   ) -> ReconstructionReport:
    """Compressive reconstruction ``f^ = Psi g#`` with ``g#`` the BPDN solution.

    The constraint level is ``eta + 2 sqrt(m) tail``; ``eta`` defaults to the
    realised noise norm and ``tail`` to the signal's out-of-band Wiener norm.
    In the on-grid regime the tail term is dropped.
    """
    if spec.m > spec.N:
        warnings.warn(f"m = {spec.m} > N = {spec.N}: outside the undersampled regime",
                      TheoremRegimeWarning, stacklevel=2)
    if psi.N != spec.N:
        raise ValueError("transform size does not match N")
    acq = acquisition if acquisition is not None else acquire(spec)
    eta = acq.eta if eta is None else float(eta)
    tail = tail_wiener_norm(spec.signal, spec.N) if tail is None else float(tail)
    sigma = eta if spec.on_grid else bpdn_sigma_from_model(eta, spec.m, tail)
    S = DirichletKernelOp(acq.grid, spec.N)
    A = materialize(compose(S, psi.op, validate=False), limit=materialize_limit)
    base = opts or BpdnOptions()
    rep = bpdn(A, acq.b, BpdnOptions(**{**base.__dict__, "sigma": sigma}))
    f_hat = psi.synthesize(rep.solution)
    return ReconstructionReport(f_hat, acq.f, _rel(f_hat, acq.f), _noise_level(acq.d, acq.f), sigma, rep,
                                g_hat=rep.solution)


def ls_denoise(spec: AcquisitionSpec, tol: float = 1e-10, tau: Optional[float] = None,
               max_iter: int = 1000, acquisition: Optional[Acquisition] = None) -> ReconstructionReport:
    """Least squares ``argmin |S g - b|`` in the oversampled regime ``m >= N``.

    With ``tau`` given, the least-squares error bound is attached whenever
    ``m`` meets its sample-size precondition.
    """
    if spec.m < spec.N:
        raise ValueError(f"least squares needs m >= N (got m = {spec.m}, N = {spec.N})")
    acq = acquisition if acquisition is not None else acquire(spec)
    S = DirichletKernelOp(acq.grid, spec.N)
    rep = least_squares(S, acq.b, tol=tol, max_iter=max_iter)
    bound = None
    if tau is not None:
        try:
            bound = theorem4_bound(tau, spec.N, spec.m, acq.eta, tail_wiener_norm(spec.signal, spec.N))
        except BoundNotApplicable:
            bound = None
    f_hat = rep.solution
    return ReconstructionReport(f_hat, acq.f, _rel(f_hat, acq.f), _noise_level(acq.d, acq.f), 0.0, rep,
                                theoretical_bound=bound, per_acquisition_residuals=[rep.residual_norm])


def repeated_acquisition_denoise(specs: Sequence[AcquisitionSpec], tol: float = 1e-10,
                                 max_iter: int = 1000) -> ReconstructionReport:
    """Least squares on the stacked kernels of ``P`` acquisitions of one signal."""
    specs = list(specs)
    if not specs:
        raise ValueError("need at least one acquisition")
    N = specs[0].N
    ref = specs[0].signal
    for sp in specs[1:]:
        if sp.N != N:
            raise ValueError("acquisitions disagree on N")
        if sp.signal is not ref and sp.signal.coeff_map != ref.coeff_map:
            raise ValueError("acquisitions disagree on the signal")
    if sum(sp.m for sp in specs) < N:
        raise ValueError("stacked system is underdetermined")
    acqs = [acquire(sp) for sp in specs]
    ops = [DirichletKernelOp(a.grid, N) for a in acqs]
    A = concat_acquisitions(ops, validate=False)
    b = np.concatenate([a.b for a in acqs])
    rep = least_squares(A, b, tol=tol, max_iter=max_iter)
    f_hat = rep.solution
    res = [float(np.linalg.norm(op.forward(f_hat) - a.b)) for op, a in zip(ops, acqs)]
    f = acqs[0].f
    noise = float(np.mean([_noise_level(a.d, f) for a in acqs]))
    return ReconstructionReport(f_hat, f, _rel(f_hat, f), noise, 0.0, rep, per_acquisition_residuals=res)


def continuous_reconstruct(report: ReconstructionReport, xs) -> np.ndarray:
    """Evaluate the trigonometric interpolant of ``report.f_hat`` at ``xs``."""
    v = centered_dft_adjoint(report.f_hat)
    return continuous_eval(v, np.asarray(xs, dtype=float))

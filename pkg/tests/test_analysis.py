import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from offgrid_cs.analysis import (BoundNotApplicable, empirical_ric, empirical_xm, interp_error_exact,
                                 min_singular_check, normalized_sensing_matrix, relative_error,
                                 spectral_floor, theorem4_bound, theorem4_min_m)
from offgrid_cs.model import FourierSignal, bandlimit, discretize, eval_signal, random_signal_with_tail
from offgrid_cs.operators import DirichletKernelOp, dense_operator
from offgrid_cs.sampling import UniformJitter, random_grid, uniform_grid
from offgrid_cs.transforms import make_transform

from conftest import crandn


def test_interp_error_bandlimited_zero(rng):
    N = 31
    sig = bandlimit(random_signal_with_tail(N, 50, rng), N)
    eb = interp_error_exact(sig, random_grid(UniformJitter(0.5), 20, rng), N)
    assert np.all(eb.per_sample == 0) and eb.tail == 0


def test_interp_error_single_term(rng):
    N = 7
    sig = FourierSignal.from_mapping({4: 1.0})
    grid = random_grid(UniformJitter(0.5), 9, rng)
    t = grid.points
    eb = interp_error_exact(sig, grid, N)
    assert np.allclose(eb.per_sample, np.exp(2j * np.pi * 4 * t) + np.exp(-2j * np.pi * 3 * t), atol=1e-14)


@given(st.integers(0, 2**31), st.integers(5, 80))
@settings(max_examples=30, deadline=None)
def test_interp_error_identity_and_bounds(seed, m):
    rng = np.random.default_rng(seed)
    N = 63
    sig = random_signal_with_tail(N, 90, rng)
    grid = random_grid(UniformJitter(0.5), m, rng)
    eb = interp_error_exact(sig, grid, N)
    direct = eval_signal(sig, grid.points) - DirichletKernelOp(grid, N, validate=False).forward(discretize(sig, N).samples)
    assert np.max(np.abs(eb.per_sample - direct)) <= 1e-10
    assert eb.bounds_hold()
    assert np.all(np.abs(eb.per_sample) <= eb.sup_bound * (1 + 1e-12))


def test_interp_error_on_grid_samples_zero(rng):
    N = 31
    sig = random_signal_with_tail(N, 60, rng)
    eb = interp_error_exact(sig, uniform_grid(N), N)
    assert np.all(eb.per_sample == 0)


def test_relative_error_examples(rng):
    f = crandn(rng, 10)
    assert relative_error(f, f) == 0
    assert relative_error(2 * f, f) == pytest.approx(1)
    f = f / np.linalg.norm(f) * 10
    p = crandn(rng, 10)
    assert relative_error(f + p / np.linalg.norm(p), f) == pytest.approx(0.1)
    with pytest.raises(ValueError):
        relative_error(f, np.zeros(10))


def test_ric_examples(rng):
    Q, _ = np.linalg.qr(crandn(rng, 12, 6))
    assert empirical_ric(dense_operator(Q), 2) < 1e-10
    e1 = np.zeros((4, 2))
    e1[0] = 1
    assert empirical_ric(dense_operator(e1), 2) == pytest.approx(1)


def test_ric_nondecreasing_in_s(rng):
    A = dense_operator(crandn(rng, 10, 12) / np.sqrt(10))
    vals = [empirical_ric(A, s) for s in (1, 2, 3)]
    assert vals[0] <= vals[1] <= vals[2]


def test_ric_limit():
    with pytest.raises(ValueError):
        empirical_ric(np.eye(200), 3)


def _sensing(N, m, rng, rho=0.5):
    S = DirichletKernelOp(random_grid(UniformJitter(rho), m, rng), N, validate=False)
    return normalized_sensing_matrix(S, make_transform("dft", N).op)


def test_xm_isometry_case(rng):
    N = 15
    A = normalized_sensing_matrix(DirichletKernelOp(uniform_grid(N), N), make_transform("dft", N).op)
    exact = empirical_xm(A, 2, expected_gram=np.eye(N))
    assert exact.value < 1e-12 and exact.path == "exact"
    mc = empirical_xm(A, 2, sampler=lambda r: _sensing(N, N, r), draws=500, seed=1)
    assert 0 <= mc.value <= 0.05 and mc.draws == 500


def test_xm_s1_closed_form(rng):
    A = crandn(rng, 8, 6)
    est = empirical_xm(A, 1, expected_gram=np.eye(6))
    assert est.value == pytest.approx(np.max(np.abs(np.sum(np.abs(A) ** 2, axis=0) - 1)))


def test_ric_vs_xm_theta_zero():
    # for an unbiased orthonormal design the Gram mean is I, so the two coincide
    rng = np.random.default_rng(4)
    N = 15
    A = _sensing(N, 10, rng)
    ric = empirical_ric(A, 2)
    xm = empirical_xm(A, 2, sampler=lambda r: _sensing(N, 10, r), draws=2000, seed=2)
    assert abs(ric - xm.value) < 0.1


def test_min_singular(rng):
    N = 31
    assert min_singular_check(DirichletKernelOp(uniform_grid(N), N)) == pytest.approx(1)
    for k in range(5):
        S = DirichletKernelOp(random_grid(UniformJitter(0.5), 4 * N, rng), N)
        sv = np.linalg.svd(S.to_dense(), compute_uv=False)
        assert min_singular_check(S) == pytest.approx(sv[-1])
        assert sv[-1] <= sv[0]
        assert sv[-1] >= spectral_floor(0.25, N, 4 * N)
    with pytest.raises(ValueError):
        min_singular_check(DirichletKernelOp(random_grid(UniformJitter(0.5), 700, rng), 601, validate=False))


def test_least_squares_bound_examples():
    N, tau = 63, 0.25
    m = 220_000
    assert theorem4_min_m(tau, N) < m
    assert theorem4_bound(tau, N, m, 0.0, 0.0) == 0
    assert theorem4_bound(tau, N, m, 1.0, 0.0) == pytest.approx(0.25 / (3 * math.sqrt(0.625 * math.log(126))), rel=1e-14)
    vals = [theorem4_bound(t, N, 10**9, 1.0, 0.0) for t in (0.4, 0.25, 0.1, 0.01)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    with pytest.raises(BoundNotApplicable):
        theorem4_bound(tau, N, 2 * N, 1.0, 0.0)
    with pytest.raises(BoundNotApplicable):
        theorem4_bound(0.5, N, m, 1.0, 0.0)

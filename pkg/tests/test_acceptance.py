"""Acceptance criteria 1-13.

Each test records a one-line verdict that is printed in the pytest terminal
summary; running this file directly prints the same lines.
"""

import itertools
import math
import sys
import time

import numpy as np
import pytest

from offgrid_cs import cli
from offgrid_cs.analysis import empirical_ric, interp_error_exact, min_singular_check, normalized_sensing_matrix
from offgrid_cs.model import (bandlimit, discretize, eval_signal, gaussian_model_coeffs, random_exponential_signal,
                              random_signal_with_tail)
from offgrid_cs.operators import (DirichletKernelOp, compose, concat_acquisitions, dense_operator, dft_operator,
                                  dot_test, identity, ndft_matrix, scale)
from offgrid_cs.reconstruct import AcquisitionSpec, UniformScaledNoise, acquire, ls_denoise
from offgrid_cs.rng import derive_seed, make_rng
from offgrid_cs.sampling import (Degenerate, Exponential, Laplace, Normal, UniformJitter, random_grid, theta,
                                 theta_j_max, theta_monte_carlo, uniform_grid)
from offgrid_cs.solve import BpdnOptions, bpdn
from offgrid_cs.transforms import KINDS, best_sparse_error, gamma, make_transform

try:
    from conftest import record_criterion
except ImportError:  # run as a script
    def record_criterion(number, ok, detail):
        return ok

MASTER_SEED = 2015
_START = time.perf_counter()


def _verdict(number, ok, detail):
    record_criterion(number, ok, detail)
    if __name__ == "__main__":
        print(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    return ok


def _crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


# 1 ---------------------------------------------------------------------------------


def criterion_1():
    t0 = time.perf_counter()
    N, m = 127, 64
    rng = make_rng(MASTER_SEED, 1)
    sig = bandlimit(random_signal_with_tail(N, N, rng), N)
    grid = random_grid(UniformJitter(0.5), m, rng)
    err = np.max(np.abs(DirichletKernelOp(grid, N).forward(discretize(sig, N).samples) - eval_signal(sig, grid.points)))
    dt = time.perf_counter() - t0
    return err <= 1e-10 and dt < 1.0, f"max interpolation error {err:.2e} (tol 1e-10), {dt:.2f} s (limit 1 s)"


# 2 ---------------------------------------------------------------------------------


def criterion_2():
    t0 = time.perf_counter()
    N = 63
    worst, bounds_ok = 0.0, True
    for k in range(50):
        rng = make_rng(MASTER_SEED, 2, k)
        m = int(rng.integers(8, 2 * N))
        sig = random_signal_with_tail(N, int(rng.integers(N, 3 * N)), rng)
        grid = random_grid(UniformJitter(float(rng.uniform(0, 0.5))), m, rng)
        eb = interp_error_exact(sig, grid, N)
        direct = eval_signal(sig, grid.points) - DirichletKernelOp(grid, N, validate=False).forward(
            discretize(sig, N).samples)
        worst = max(worst, float(np.max(np.abs(eb.per_sample - direct))))
        bounds_ok &= eb.bounds_hold() and eb.tail > 0
    dt = time.perf_counter() - t0
    return (worst <= 1e-10 and bounds_ok and dt < 10,
            f"identity defect {worst:.2e} (tol 1e-10), p in {{1,2,inf}} bounds hold: {bounds_ok}, {dt:.1f} s")


# 3 ---------------------------------------------------------------------------------


def criterion_3():
    N, m = 255, 100
    worst = 0.0
    for k in range(20):
        rng = make_rng(MASTER_SEED, 3, k)
        grid = random_grid(UniformJitter(0.5), m, rng)
        a = DirichletKernelOp(grid, N, "fourier", validate=False)
        b = DirichletKernelOp(grid, N, "direct", validate=False)
        f = _crandn(rng, N)
        y = _crandn(rng, m)
        worst = max(worst, np.linalg.norm(a.forward(f) - b.forward(f)) / np.linalg.norm(b.forward(f)),
                    np.linalg.norm(a.adjoint(y) - b.adjoint(y)) / np.linalg.norm(b.adjoint(y)))
    rng = make_rng(MASTER_SEED, 3, 99)
    grid = random_grid(UniformJitter(0.5), m, rng)
    S = DirichletKernelOp(grid, N, validate=False)
    Sd = DirichletKernelOp(grid, N, "direct", validate=False)
    ops = {"dft": dft_operator(N, validate=False), "dft-fft": dft_operator(N, "fft", validate=False),
           "ndft": dense_operator(ndft_matrix(grid, N), validate=False), "S-fourier": S, "S-direct": Sd,
           "S*": S.H, "2S": scale(S, 2.0), "I": identity(N),
           "concat": concat_acquisitions([S, DirichletKernelOp(random_grid(UniformJitter(0.5), 60, rng), N)],
                                         validate=False)}
    for kind in KINDS:
        psi = make_transform(kind, N)
        ops[f"psi-{kind}"] = psi.op
        ops[f"S.psi-{kind}"] = compose(S, psi.op, validate=False)
        ops[f"Sdirect.psi-{kind}"] = compose(Sd, psi.op, validate=False)
    ratios = {name: dot_test(op, probes=20, tol=1e-10, seed=derive_seed(MASTER_SEED, 3)) for name, op in ops.items()}
    failed = [n for n, r in ratios.items() if not r.passed]
    max_ratio = max(r.max_ratio for r in ratios.values())
    return (worst <= 1e-9 and not failed,
            f"representation gap {worst:.2e} (tol 1e-9); dot tests on {len(ops)} operators, worst ratio "
            f"{max_ratio:.1e} (tol 1e-10), failures: {failed or 'none'}")


# 4 ---------------------------------------------------------------------------------


def criterion_4():
    N, m = 255, 36
    dists = [UniformJitter(0.06), UniformJitter(0.25), UniformJitter(0.5), Normal(0.0, 0.002), Laplace(0.0, 0.002),
             Exponential(200.0)]
    worst_z, parts = 0.0, []
    for k, dist in enumerate(dists):
        exact = theta(dist, N, m)
        est = theta_monte_carlo(dist, N, m, 100_000, derive_seed(MASTER_SEED, 4, k))
        z = abs(est.value - exact) / est.stderr
        worst_z = max(worst_z, z)
        parts.append(f"{dist.kind}:{z:.2f}")
    zero = theta(UniformJitter(0.5), N, m) == 0.0
    deg = theta(Degenerate(0.0), N, m)
    deg_ok = abs(deg - 2 * N / m) <= 1e-12 * (2 * N / m)
    return (worst_z <= 3 and zero and deg_ok,
            f"max |MC - closed|/stderr = {worst_z:.2f} (limit 3) [{', '.join(parts)}]; "
            f"theta(jitter 1/2) == 0: {zero}; degenerate {deg:.6f} vs 2N/m {2 * N / m:.6f}")


# 5 ---------------------------------------------------------------------------------


def criterion_5():
    N = 255
    g_dft = gamma(make_transform("dft", N))
    g_id = gamma(make_transform("identity", N))
    sizes = (256, 512, 1024, 2048)
    haar = [gamma(make_transform("haar", n)) for n in sizes]
    diffs = np.diff(haar)
    # log growth means gamma(2N) - gamma(N) stays at a constant c; c is fitted on the first pair
    c = diffs[0]
    haar_ok = bool(np.all(diffs <= 1.1 * c))
    db2 = make_transform("db2", 2015)
    g_db2 = gamma(db2)
    ok = abs(g_dft - 1) <= 1e-9 and abs(g_id - math.sqrt(N)) <= 1e-9 and haar_ok and abs(g_db2 - 40.78) <= 1.0
    return ok, (f"gamma(dft)-1 = {g_dft - 1:.1e}; gamma(identity)-sqrt(N) = {g_id - math.sqrt(N):.1e}; "
                f"gamma(haar) at {sizes} = {', '.join(f'{v:.2f}' for v in haar)}, successive differences "
                f"{', '.join(f'{d:.2f}' for d in diffs)} (need <= 1.1 x {c:.2f}; observed growth ~ sqrt(N)): "
                f"{'ok' if haar_ok else 'not logarithmic'}; gamma(db2, 2015) = {g_db2:.2f} "
                f"[padded to {db2.padded_length}, depth {db2.depth}] (soft target 40.78 +- 1.0)")


# 6 ---------------------------------------------------------------------------------


def criterion_6():
    N = 2015
    psi = make_transform("db2", N)
    f = discretize(gaussian_model_coeffs(1200), N).samples
    g = psi.analyze(f)
    eps = best_sparse_error(g, 50)
    fnorm = float(np.linalg.norm(f))
    return eps < 0.09, (f"eps_50 = {eps:.4f} (target < 0.09; |f|_2 = {fnorm:.2f}, eps_50/|f|_2 = {eps / fnorm:.4f}) "
                        f"[db2, padded to {psi.padded_length}, depth {psi.depth}, Gaussian coefficients |l| <= 1200]")


# 7 ---------------------------------------------------------------------------------


def _support_oracle(M, b, s):
    # exhaustive enumeration: residual of least squares on every support of size s
    G = M.conj().T @ M
    c = M.conj().T @ b
    T = np.array(list(itertools.combinations(range(M.shape[1]), s)))
    GT = G[T[:, :, None], T[:, None, :]]
    cT = c[T]
    x = np.linalg.solve(GT, cT[..., None])[..., 0]
    res2 = np.vdot(b, b).real - np.einsum("ij,ij->i", cT.conj(), x).real
    return tuple(T[int(np.argmin(res2))])


def criterion_7():
    t0 = time.perf_counter()
    N, s, m = 257, 8, 120
    psi = make_transform("dft", N)
    good, errs = 0, []
    for k in range(10):
        rng = make_rng(MASTER_SEED, 7, k)
        g = np.zeros(N, complex)
        g[rng.choice(N, s, replace=False)] = _crandn(rng, s)
        S = DirichletKernelOp(random_grid(UniformJitter(0.5), m, rng), N, validate=False)
        A = dense_operator(compose(S, psi.op, validate=False).to_dense(), validate=False)
        rep = bpdn(A, A.forward(g), BpdnOptions(sigma=0.0))
        err = np.linalg.norm(rep.solution - g) / np.linalg.norm(g)
        errs.append(err)
        good += err <= 1e-3
    N2, s2, m2 = 63, 3, 32
    psi2 = make_transform("dft", N2)
    matches = 0
    for k in range(10):
        rng = make_rng(MASTER_SEED, 70, k)
        g = np.zeros(N2, complex)
        g[rng.choice(N2, s2, replace=False)] = _crandn(rng, s2)
        S = DirichletKernelOp(random_grid(UniformJitter(0.5), m2, rng), N2, validate=False)
        M = compose(S, psi2.op, validate=False).to_dense()
        b = M @ g
        rep = bpdn(dense_operator(M, validate=False), b, BpdnOptions(sigma=0.0))
        found = tuple(sorted(np.argsort(-np.abs(rep.solution), kind="stable")[:s2]))
        matches += found == _support_oracle(M, b, s2)
    dt = time.perf_counter() - t0
    return (good >= 9 and matches == 10 and dt < 120,
            f"{good}/10 trials with relative error <= 1e-3 (max {max(errs):.1e}); support oracle agreement "
            f"{matches}/10; {dt:.1f} s (limit 120 s)")


# 8 ---------------------------------------------------------------------------------


def _persist_m(rows, tol):
    """Smallest m from which every larger m in the sweep keeps error <= tol."""
    best = math.inf
    for r in sorted(rows, key=lambda r: -r["m"]):
        if float(r["mean_err"]) > tol:
            break
        best = r["m"]
    return best


def criterion_8():
    t0 = time.perf_counter()
    cfg = cli.build_config({"master_seed": MASTER_SEED}, "fig1_step_sweep")
    rows = cli.run_fig1(cfg)
    dt = time.perf_counter() - t0
    m6 = cfg.N // 6
    by = {(r["model"], r["m"]): r for r in rows}
    e_dft = float(by[("complex_exponential", m6)]["mean_err"])
    e_wav = float(by[("gaussian", m6)]["mean_err"])
    p_dft = _persist_m([r for r in rows if r["model"] == "complex_exponential"], 1e-2)
    p_wav = _persist_m([r for r in rows if r["model"] == "gaussian"], 1e-2)
    flagged = sum(r["nonconverged"] for r in rows)
    return (e_dft < e_wav and p_dft < p_wav and dt < 300,
            f"at m = {m6}: dft {e_dft:.2e} vs db2/gaussian {e_wav:.2e}; error <= 1e-2 down to m = {p_dft} (dft) vs "
            f"{p_wav} (db2); {flagged} trials hit the iteration cap; {dt:.0f} s (limit 300 s)")


# 9 ---------------------------------------------------------------------------------


def criterion_9():
    cfg = cli.build_config({"master_seed": MASTER_SEED}, "fig2_theta_sweep")
    rows = cli.run_fig2(cfg)
    N, m = cfg.N, cfg.m
    worst = 0.0
    for r in rows:
        rho = float(r["rho"])
        ref = 2 * N / m * max(abs(math.sin(2 * math.pi * j * rho) / (2 * math.pi * j * rho))
                              for j in range(1, theta_j_max(N, m) + 1))
        if rho == 0.5:
            ref = 0.0
        worst = max(worst, abs(float(r["theta"]) - ref))
    by = {float(r["rho"]): float(r["mean_err"]) for r in rows}
    return (by[0.5] <= by[0.06] and worst <= 1e-12,
            f"mean error rho=0.5: {by[0.5]:.2e}, rho=0.06: {by[0.06]:.2e}; theta column max deviation {worst:.1e} "
            f"(tol 1e-12); m = {m}, {cfg.trials} trials")


# 10 --------------------------------------------------------------------------------


def criterion_10():
    t0 = time.perf_counter()
    cfg = cli.build_config({"master_seed": MASTER_SEED, "m_list": [510, 36]}, "fig3_noise_sweep")
    rows = cli.run_fig3(cfg)
    over, under = rows
    # the least-squares bound needs m >= 36 N log(2N)(1+tau)/tau^2, far above 2N at N = 255;
    # it is exercised on a small N with enough samples
    tau, N, m = 0.25, 63, 220_000
    checked, violations, margin = 0, 0, 0.0
    for k in range(3):
        sig = random_exponential_signal(2, (N - 1) // 2, make_rng(MASTER_SEED, 10, k))
        rep = ls_denoise(AcquisitionSpec(sig, N, m, UniformJitter(0.5), UniformScaledNoise(),
                                         seed=derive_seed(MASTER_SEED, 10, k)), tau=tau)
        checked += rep.theoretical_bound is not None
        violations += rep.theoretical_bound is not None and rep.absolute_error() > rep.theoretical_bound
        margin = max(margin, rep.absolute_error() / rep.theoretical_bound)
    dt = time.perf_counter() - t0
    ok = (float(over["mean_err"]) < float(over["mean_noise_level"])
          and float(under["mean_err"]) >= float(under["mean_noise_level"])
          and checked == 3 and violations == 0 and dt < 300)
    return ok, (f"m = 2N: error {float(over['mean_err']):.2e} < noise {float(over['mean_noise_level']):.2e}; "
                f"m = N/7: error {float(under['mean_err']):.2e} >= noise {float(under['mean_noise_level']):.2e}; "
                f"least-squares bound at N = 63, m = {m}, tau = 1/4: {checked} trials checked, {violations} "
                f"violations, max error/bound {margin:.2f}; {dt:.0f} s (limit 300 s)")


# 11 --------------------------------------------------------------------------------


def criterion_11():
    N, s = 31, 2
    F = make_transform("dft", N).op
    means = []
    for m in (8, 16, 31):
        vals = []
        for k in range(20):
            grid = random_grid(UniformJitter(0.5), m, make_rng(MASTER_SEED, 11, m, k))
            vals.append(empirical_ric(normalized_sensing_matrix(DirichletKernelOp(grid, N, validate=False), F), s))
        means.append(float(np.mean(vals)))
    on_grid = empirical_ric(normalized_sensing_matrix(DirichletKernelOp(uniform_grid(N), N), F), s)
    return (means[0] > means[1] > means[2] and on_grid <= 1e-9,
            f"mean delta_2 at m = 8, 16, 31: {', '.join(f'{v:.3f}' for v in means)}; on-grid m = 31: {on_grid:.1e}")


# 12 --------------------------------------------------------------------------------


def criterion_12():
    N = 63
    m = 4 * N
    floor = math.sqrt(m / (2 * N))
    mins = [min_singular_check(DirichletKernelOp(random_grid(UniformJitter(0.5), m, make_rng(MASTER_SEED, 12, k)), N,
                                                 validate=False)) for k in range(20)]
    return min(mins) >= floor, f"min sigma_min(S) over 20 trials {min(mins):.3f} >= sqrt(m/2N) = {floor:.3f}"


# 13 --------------------------------------------------------------------------------


def _fingerprint():
    small = {"N": 63, "m_list": [30, 20], "trials": 2, "master_seed": MASTER_SEED,
             "model": [{"kind": "complex_exponential", "s": 3}, {"kind": "gaussian", "psi": "db2"}]}
    rows = cli.run_fig1(cli.build_config(small, "fig1_step_sweep"), threads=2)
    spec = AcquisitionSpec(random_exponential_signal(3, 31, 1), 63, 126, UniformJitter(0.5), UniformScaledNoise(),
                           seed=MASTER_SEED)
    rep = ls_denoise(spec)
    return rows, acquire(spec).b.tobytes(), rep.f_hat.tobytes(), criterion_4()[1]


def criterion_13():
    same = _fingerprint() == _fingerprint()
    elapsed = time.perf_counter() - _START
    return (same and elapsed <= 900,
            f"repeat with master seed {MASTER_SEED} bit-identical: {same}; acceptance suite elapsed {elapsed:.0f} s "
            f"(limit 900 s for the full suite)")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7,
            criterion_8, criterion_9, criterion_10, criterion_11, criterion_12, criterion_13]


@pytest.mark.parametrize("number", range(1, 14))
def test_criterion(number):
    ok, detail = CRITERIA[number - 1]()
    _verdict(number, ok, detail)
    assert ok, detail


if __name__ == "__main__":
    results = [_verdict(k, *fn()) for k, fn in enumerate(CRITERIA, 1)]
    sys.exit(0 if all(results) else 1)

"""Basis pursuit denoise and least squares against any LinearOperator.

``bpdn`` solves ``min |h|_1 s.t. |A h - b|_2 <= sigma`` by root-finding on
the Pareto curve ``phi(tau) = min{|A x - b|_2 : |x|_1 <= tau}``: Newton
steps on ``tau`` with each ``phi(tau)`` evaluated by a warm-started spectral
projected-gradient LASSO solve.  ``least_squares`` runs conjugate gradients on
the normal equations (CGLS).  Complex vectors use ``|x|_1 = sum |x_i|``.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .operators import LinearOperator


@dataclass(frozen=True)
class BpdnOptions:
    """Options for :func:`bpdn` and :func:`lasso_subproblem`.

    Attributes
    ----------
    sigma : float
        Residual bound.
    max_outer : int
        Newton updates of the l1 radius.
    max_inner : int
        Projected-gradient steps per LASSO subproblem.
    opt_tol : float
        Relative tolerance on feasibility and duality gap.
    step_min, step_max : float
        Clipping range of the Barzilai-Borwein step.
    memory : int
        Window of the nonmonotone line search.
    ls_gamma : float
        Sufficient-decrease parameter.
    max_ls : int
        Backtracking steps per iteration.
    """

    sigma: float = 0.0
    max_outer: int = 40
    max_inner: int = 200
    opt_tol: float = 1e-6
    step_min: float = 1e-16
    step_max: float = 1e5
    memory: int = 10
    ls_gamma: float = 1e-4
    max_ls: int = 10

    def __post_init__(self):
        if not (self.sigma >= 0 and math.isfinite(self.sigma)):
            raise ValueError("sigma must be finite and nonnegative")
        if not 0 < self.opt_tol < 1:
            raise ValueError("opt_tol must lie in (0, 1)")
        if self.max_outer < 1 or self.max_inner < 1:
            raise ValueError("iteration caps must be positive")


@dataclass
class SolveReport:
    solution: np.ndarray
    residual_norm: float
    one_norm: float
    iterations: int
    converged: bool
    history: List[Tuple[float, float]] = field(default_factory=list)
    status: str = ""
    gap: float = float("nan")
    tau: float = float("nan")
    outer_iterations: int = 0

    CSV_FIELDS = ("iterations", "residual", "one_norm", "converged", "status")

    def csv_fields(self) -> dict:
        return {"iterations": self.iterations, "residual": repr(float(self.residual_norm)),
                "one_norm": repr(float(self.one_norm)), "converged": int(self.converged),
                "status": self.status}

    def to_csv_row(self, **context) -> str:
        """One CSV line: caller context (seed, m, N, sigma, ...) then solver fields."""
        vals = {**context, **self.csv_fields()}
        return ",".join(str(v) for v in vals.values())


def l1_norm(x) -> float:
    return float(np.sum(np.abs(x)))


def project_l1_ball(x, radius: float) -> np.ndarray:
    """Euclidean projection onto ``{z : |z|_1 <= radius}``.

    Magnitudes are projected onto the real l1 ball by the sort-and-threshold
    rule and the phases of ``x`` are kept.
    """
    x = np.asarray(x)
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    mag = np.abs(x)
    if mag.sum() <= radius:
        return x.copy()
    if radius == 0:
        return np.zeros_like(x)
    u = np.sort(mag.ravel())[::-1]
    css = np.cumsum(u)
    j = np.arange(1, u.size + 1)
    active = np.nonzero(u - (css - radius) / j > 0)[0]
    # index 0 always qualifies in exact arithmetic; a tiny radius can round it away
    k = active[-1] if active.size else 0
    thresh = (css[k] - radius) / (k + 1)
    shrunk = np.maximum(mag - thresh, 0.0)
    scale = np.divide(shrunk, mag, out=np.zeros_like(mag), where=mag > 0)
    return x * scale


class _Problem:
    # counts products and keeps cached residual / gradient of the iterate
    def __init__(self, A, b):
        self.A, self.b = A, b
        self.nprod = 0

    def residual(self, x):
        self.nprod += 1
        return self.b - self.A.forward(x)

    def grad(self, r):
        self.nprod += 1
        return -self.A.adjoint(r)


def _spg(prob: _Problem, x, tau, opts: BpdnOptions, iters: int, gap_tol, step=None):
    """Spectral projected gradient on ``1/2 |Ax - b|^2`` over the tau-ball.

    ``gap_tol(f, rnorm, gnorm)`` gives the absolute LASSO duality gap at which to
    stop.  ``step`` warm-starts the spectral step length.  Returns
    ``(x, r, g, its, gap, step)``.
    """
    x = project_l1_ball(x, tau)
    r = prob.residual(x)
    g = prob.grad(r)
    f = 0.5 * float(np.vdot(r, r).real)
    hist = deque([f], maxlen=opts.memory)
    gnorm = float(np.max(np.abs(g))) if g.size else 0.0
    if step is None:
        step = min(opts.step_max, max(opts.step_min, 1.0 / gnorm)) if gnorm > 0 else 1.0
    its = 0
    gap = float("inf")
    while True:
        gnorm = float(np.max(np.abs(g))) if g.size else 0.0
        gap = float(np.vdot(r, r - prob.b).real) + tau * gnorm
        rnorm = math.sqrt(2 * f)
        if gap <= gap_tol(f, rnorm, gnorm):
            break
        if its >= iters:
            break
        its += 1
        fmax = max(hist)
        lam = step
        accepted = False
        for _ in range(opts.max_ls):
            xn = project_l1_ball(x - lam * g, tau)
            dx = xn - x
            rn = prob.residual(xn)
            fn = 0.5 * float(np.vdot(rn, rn).real)
            if fn <= fmax + opts.ls_gamma * float(np.vdot(g, dx).real):
                accepted = True
                break
            lam *= 0.5
        if not accepted and fn >= f:
            # no decrease even at the shortest trial step: retry shorter
            # next time, or give up once the step is negligible
            step = lam * 0.5
            if step < opts.step_min:
                break
            continue
        gn = prob.grad(rn)
        s = xn - x
        y = gn - g
        sts = float(np.vdot(s, s).real)
        sty = float(np.vdot(s, y).real)
        step = opts.step_max if sty <= 0 else min(opts.step_max, max(opts.step_min, sts / sty))
        x, r, g, f = xn, rn, gn, fn
        hist.append(f)
    return x, r, g, its, gap, step


def lasso_subproblem(A: LinearOperator, b, tau_ball: float, x0=None,
                     opts: Optional[BpdnOptions] = None) -> SolveReport:
    """Minimise ``|A x - b|_2`` over ``|x|_1 <= tau_ball`` by spectral projected gradient."""
    opts = opts or BpdnOptions()
    if tau_ball < 0:
        raise ValueError("tau_ball must be nonnegative")
    b = np.asarray(b, dtype=np.complex128)
    if b.shape != (A.rows,):
        raise ValueError(f"b must have length {A.rows}")
    x0 = np.zeros(A.cols, dtype=np.complex128) if x0 is None else np.asarray(x0, dtype=np.complex128)
    prob = _Problem(A, b)
    x, r, g, its, gap, _ = _spg(prob, x0, tau_ball, opts, opts.max_inner,
                             lambda f, rn, gn: opts.opt_tol * max(1.0, f))
    f = 0.5 * float(np.vdot(r, r).real)
    conv = gap / max(1.0, f) <= opts.opt_tol
    rn = float(np.linalg.norm(r))
    return SolveReport(x, rn, l1_norm(x), its, conv, [(rn, l1_norm(x))],
                       status="optimal" if conv else "iteration limit", gap=gap, tau=tau_ball)


def bpdn_dual_gap(A: LinearOperator, b, h, sigma: float) -> float:
    """``|h|_1`` minus the dual value of the feasible point ``r / |A* r|_inf``."""
    r = b - A.forward(h)
    z = A.adjoint(r)
    zn = float(np.max(np.abs(z))) if z.size else 0.0
    if zn == 0:
        return l1_norm(h)
    dual = (float(np.vdot(b, r).real) - sigma * float(np.linalg.norm(r))) / zn
    return l1_norm(h) - dual


def bpdn(A: LinearOperator, b, opts: Optional[BpdnOptions] = None, x0=None) -> SolveReport:
    """Basis pursuit denoise by Pareto-curve root finding.

    Converged runs satisfy ``| |A h - b| - sigma | <= opt_tol sigma`` (or
    ``|A h - b| <= opt_tol |b|`` when ``sigma = 0``) and the duality gap of
    the LASSO subproblem at radius ``|h|_1`` is at most ``opt_tol |h|_1``.
    Non-converged runs return the most nearly feasible iterate with
    ``converged = False``.  ``bpdn_dual_gap`` gives the (stricter) gap of
    the constrained form for diagnostics.
    """
    opts = opts or BpdnOptions()
    b = np.asarray(b, dtype=np.complex128)
    if b.shape != (A.rows,):
        raise ValueError(f"b must have length {A.rows}")
    sigma = float(opts.sigma)
    bnorm = float(np.linalg.norm(b))
    zero = np.zeros(A.cols, dtype=np.complex128)
    if bnorm <= sigma:
        return SolveReport(zero, bnorm, 0.0, 0, True, [(bnorm, 0.0)], status="zero feasible",
                           gap=0.0, tau=0.0)

    prob = _Problem(A, b)
    x = zero if x0 is None else np.asarray(x0, dtype=np.complex128)
    tau = 0.0 if x0 is None else l1_norm(x)
    history = []
    total = 0
    status = "outer iteration limit"
    converged = False
    gap = float("nan")
    best = None
    step = None
    feas_tol = opts.opt_tol * (sigma if sigma > 0 else bnorm)

    def is_feasible(rnorm):
        return abs(rnorm - sigma) <= feas_tol if sigma > 0 else rnorm <= feas_tol

    def inner_tol(f, rnorm, gnorm):
        # Away from the root the LASSO must be solved accurately relative to
        # the coming Newton step r (r - sigma) / |A* r|_inf, otherwise tau can
        # be pushed past the root.  Once feasible, only the certificate matters.
        newton = 0.01 * rnorm * abs(rnorm - sigma)
        if is_feasible(rnorm):
            return max(newton, 0.5 * opts.opt_tol * tau)
        return max(newton, 1e-14 * bnorm ** 2)

    for outer in range(1, opts.max_outer + 1):
        x, r, g, its, lgap, step = _spg(prob, x, tau, opts, opts.max_inner, inner_tol, step)
        total += its
        rnorm = float(np.linalg.norm(r))
        one = l1_norm(x)
        history.append((rnorm, one))
        gnorm = float(np.max(np.abs(g)))
        gap = lgap
        feasible = is_feasible(rnorm)
        if best is None or (feasible, -abs(rnorm - sigma)) > best[0]:
            best = ((feasible, -abs(rnorm - sigma)), x, rnorm, gap, tau)
        if feasible and gap <= opts.opt_tol * one:
            converged, status = True, "root found"
            break
        if gnorm == 0:
            status = "zero gradient"
            break
        tau_new = tau + rnorm * (rnorm - sigma) / gnorm
        tau = max(0.0, tau_new)
    if not converged and best is not None:
        _, x, rnorm, gap, tau = best
    h = x
    res = float(np.linalg.norm(b - A.forward(h)))
    return SolveReport(h, res, l1_norm(h), total, converged, history, status=status, gap=gap,
                       tau=tau, outer_iterations=len(history))


def bpdn_sigma_from_model(eta: float, m: int, tail: float) -> float:
    """Constraint level ``eta + 2 sqrt(m) tail``."""
    if eta < 0 or tail < 0:
        raise ValueError("eta and tail must be nonnegative")
    return float(eta) + 2.0 * math.sqrt(int(m)) * float(tail)


def least_squares(A: LinearOperator, b, tol: float = 1e-10, max_iter: int = 1000, x0=None) -> SolveReport:
    """``argmin |A g - b|_2`` by CGLS.

    Stops once ``|A*(A g - b)| <= tol * a * |b|`` where ``a`` is the
    running lower estimate ``max |A p| / |p|`` of ``|A|``, which makes the
    test at least as strict as one using the true norm.
    """
    b = np.asarray(b, dtype=np.complex128)
    if b.shape != (A.rows,):
        raise ValueError(f"b must have length {A.rows}")
    bnorm = float(np.linalg.norm(b))
    x = np.zeros(A.cols, dtype=np.complex128) if x0 is None else np.array(x0, dtype=np.complex128)
    r = b - A.forward(x) if x0 is not None else b.copy()
    s = A.adjoint(r)
    p = s.copy()
    gam = float(np.vdot(s, s).real)
    a_est = 0.0
    history = []
    converged = bnorm == 0 or gam == 0
    status = "exact" if converged else "iteration limit"
    its = 0
    best_gam = gam
    stall = 0
    while not converged and its < max_iter:
        its += 1
        q = A.forward(p)
        qq = float(np.vdot(q, q).real)
        if qq == 0:
            status = "breakdown"
            break
        a_est = max(a_est, math.sqrt(qq / float(np.vdot(p, p).real)))
        alpha = gam / qq
        x += alpha * p
        r -= alpha * q
        s = A.adjoint(r)
        gam_new = float(np.vdot(s, s).real)
        history.append((float(np.linalg.norm(r)), l1_norm(x)))
        if math.sqrt(gam_new) <= tol * a_est * bnorm:
            converged, status = True, "converged"
            break
        if gam_new < best_gam * (1 - 1e-12):
            best_gam, stall = gam_new, 0
        else:
            stall += 1
            if stall >= 20:
                status = "stagnation"
                break
        p = s + (gam_new / gam) * p
        gam = gam_new
    res = float(np.linalg.norm(b - A.forward(x)))
    return SolveReport(x, res, l1_norm(x), its, converged, history, status=status)

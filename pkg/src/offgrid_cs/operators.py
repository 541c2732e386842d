"""Matrix-free linear operators.

Every map in the package (centered DFT, type-2 NDFT, Dirichlet interpolation
kernel, sparsifying transforms and their compositions) is a
:class:`LinearOperator`: a shape plus ``forward`` and ``adjoint`` callables.
Callables accept either a vector or a 2-D array of column vectors stacked
along axis 0.

Conventions, for odd ``N`` and ``Nh = (N-1)/2``:

* uniform grid ``t_p = (p-1)/N - 1/2``;
* centered inverse DFT ``(F* f)_u = N^-1/2 sum_p f_p e(t_p (u - Nh - 1))``;
* NDFT ``(N v)_k = N^-1/2 sum_u v_u e(-t~_k (u - Nh - 1))``;
* Dirichlet kernel ``S = N F*``, a real m x N matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .model import check_odd, grid_points
from .rng import SeedLike, make_rng
from .sampling import NonuniformGrid, wrap

# Operators are dot-tested on construction unless told otherwise.
VALIDATE_ON_CONSTRUCTION = True
DOT_TOL = 1e-10
DUMP_LIMIT = 512
_PRECOMPUTE_LIMIT = 1 << 22  # matrix entries kept resident
_BLOCK_ENTRIES = 1 << 20


class OperatorValidationError(RuntimeError):
    """An operator failed its adjoint consistency check."""


class DotTestResult(NamedTuple):
    passed: bool
    max_ratio: float
    probes: int


def _as_columns(x, n, what):
    x = np.asarray(x)
    if x.shape[:1] != (n,) or x.ndim > 2:
        raise ValueError(f"{what}: expected leading dimension {n}, got shape {x.shape}")
    return x.astype(np.complex128, copy=False)


class LinearOperator:
    """A linear map ``C^cols -> C^rows`` given by forward and adjoint callables."""

    def __init__(self, rows: int, cols: int, forward: Callable, adjoint: Callable,
                 name: str = "operator", validate: Optional[bool] = None, batched: bool = True):
        self.rows = int(rows)
        self.cols = int(cols)
        self._forward = forward
        self._adjoint = adjoint
        self.name = name
        self.batched = batched
        if VALIDATE_ON_CONSTRUCTION if validate is None else validate:
            res = dot_test(self, probes=3, seed=0xD07)
            if not res.passed:
                raise OperatorValidationError(
                    f"{name}: adjoint mismatch, relative defect {res.max_ratio:.3g}")

    @property
    def shape(self):
        return (self.rows, self.cols)

    def _run(self, fn, x, n_in, n_out, what):
        x = _as_columns(x, n_in, what)
        if x.ndim == 2 and not self.batched:
            out = np.stack([fn(x[:, j]) for j in range(x.shape[1])], axis=1) if x.shape[1] \
                else np.zeros((n_out, 0), dtype=np.complex128)
        else:
            out = fn(x)
        out = np.asarray(out, dtype=np.complex128)
        if out.shape[:1] != (n_out,):
            raise RuntimeError(f"{self.name}: produced shape {out.shape}, expected ({n_out}, ...)")
        return out

    def forward(self, x) -> np.ndarray:
        return self._run(self._forward, x, self.cols, self.rows, f"{self.name}.forward")

    def adjoint(self, y) -> np.ndarray:
        return self._run(self._adjoint, y, self.rows, self.cols, f"{self.name}.adjoint")

    def __matmul__(self, x):
        if isinstance(x, LinearOperator):
            return compose(self, x)
        return self.forward(x)

    @property
    def H(self) -> "LinearOperator":
        return LinearOperator(self.cols, self.rows, self._adjoint, self._forward,
                              name=f"{self.name}^H", validate=False, batched=self.batched)

    def to_dense(self, limit: int = 1 << 24) -> np.ndarray:
        """Materialise the matrix by applying the operator to identity columns."""
        if self.rows * self.cols > limit:
            raise ValueError(f"{self.name}: {self.rows}x{self.cols} exceeds dense limit")
        out = np.empty((self.rows, self.cols), dtype=np.complex128)
        step = max(1, _BLOCK_ENTRIES // max(self.rows, self.cols, 1))
        for lo in range(0, self.cols, step):
            hi = min(self.cols, lo + step)
            eye = np.zeros((self.cols, hi - lo), dtype=np.complex128)
            eye[np.arange(lo, hi), np.arange(hi - lo)] = 1.0
            out[:, lo:hi] = self.forward(eye)
        return out

    def dump(self, path, limit: int = DUMP_LIMIT) -> None:
        """Write the dense matrix, one row per line of ``re,im`` entries."""
        if max(self.rows, self.cols) > limit:
            raise ValueError(f"{self.name}: dump limited to {limit} rows/cols")
        M = self.to_dense()
        with open(path, "w") as fh:
            for row in M:
                fh.write(" ".join(f"{float(z.real)!r},{float(z.imag)!r}" for z in row) + "\n")

    def __repr__(self):
        return f"<{type(self).__name__} {self.name} {self.rows}x{self.cols}>"


def load_dump(path) -> np.ndarray:
    rows = []
    with open(path) as fh:
        for line in fh:
            if line.strip():
                rows.append([complex(*map(float, tok.split(","))) for tok in line.split()])
    return np.array(rows, dtype=np.complex128)


def dot_test(op: LinearOperator, probes: int = 20, tol: float = DOT_TOL, seed: SeedLike = 0) -> DotTestResult:
    """Check ``<A u, v> = <u, A* v>`` on random complex probes.

    The defect is measured relative to ``|Au||v| + |u||A*v|``.
    """
    rng = make_rng(seed)
    worst = 0.0
    for _ in range(int(probes)):
        u = rng.standard_normal(op.cols) + 1j * rng.standard_normal(op.cols)
        v = rng.standard_normal(op.rows) + 1j * rng.standard_normal(op.rows)
        Au = op.forward(u)
        Av = op.adjoint(v)
        lhs = np.vdot(v, Au)  # <Au, v> = v^H A u
        rhs = np.vdot(Av, u)  # <u, A*v> = (A*v)^H u
        scale = np.linalg.norm(Au) * np.linalg.norm(v) + np.linalg.norm(u) * np.linalg.norm(Av)
        defect = abs(lhs - rhs)
        ratio = defect / scale if scale > 0 else defect
        worst = max(worst, float(ratio))
    return DotTestResult(worst <= tol, worst, int(probes))


# generic constructions ----------------------------------------------------


def dense_operator(M, name: str = "dense", validate: Optional[bool] = None) -> LinearOperator:
    M = np.asarray(M)
    if M.ndim != 2:
        raise ValueError("matrix must be 2-D")
    M = M.copy()
    M.setflags(write=False)
    MH = M.conj().T
    op = LinearOperator(M.shape[0], M.shape[1], lambda x: M @ x, lambda y: MH @ y,
                        name=name, validate=validate)
    op.matrix = M
    return op


def identity(n: int, name: str = "I") -> LinearOperator:
    return LinearOperator(n, n, lambda x: x.copy(), lambda y: y.copy(), name=name, validate=False)


def scale(op: LinearOperator, c: complex) -> LinearOperator:
    cc = np.conj(c)
    return LinearOperator(op.rows, op.cols, lambda x: c * op.forward(x), lambda y: cc * op.adjoint(y),
                          name=f"{c}*{op.name}", validate=False)


def compose(A: LinearOperator, B: LinearOperator, validate: Optional[bool] = None) -> LinearOperator:
    """``A B`` with adjoint ``B* A*``."""
    if A.cols != B.rows:
        raise ValueError(f"cannot compose {A.shape} with {B.shape}")
    return LinearOperator(A.rows, B.cols, lambda x: A.forward(B.forward(x)),
                          lambda y: B.adjoint(A.adjoint(y)), name=f"{A.name}.{B.name}",
                          validate=validate)


def vstack(ops: Sequence[LinearOperator], validate: Optional[bool] = None) -> LinearOperator:
    """Stack operators sharing a column space; adjoint sums block adjoints."""
    ops = list(ops)
    if not ops:
        raise ValueError("need at least one operator")
    cols = ops[0].cols
    if any(o.cols != cols for o in ops):
        raise ValueError("stacked operators must share the column dimension")
    bounds = np.cumsum([0] + [o.rows for o in ops])

    def fwd(x):
        return np.concatenate([o.forward(x) for o in ops], axis=0)

    def adj(y):
        acc = ops[0].adjoint(y[bounds[0]:bounds[1]])
        for i, o in enumerate(ops[1:], 1):
            acc = acc + o.adjoint(y[bounds[i]:bounds[i + 1]])
        return acc

    op = LinearOperator(int(bounds[-1]), cols, fwd, adj, name="stack", validate=validate)
    op.blocks = tuple(ops)
    op.block_bounds = tuple(int(b) for b in bounds)
    return op


def materialize(op: LinearOperator, limit: int = _PRECOMPUTE_LIMIT) -> LinearOperator:
    """Dense copy of ``op`` when it is small enough, otherwise ``op`` itself."""
    if op.rows * op.cols > limit:
        return op
    return dense_operator(op.to_dense(), name=op.name, validate=False)


# centered DFT ---------------------------------------------------------------


def _freq_offsets(N):
    # u - Nh - 1 for u = 1..N
    return np.arange(N) - (N - 1) // 2


def _phase(ph):
    return np.exp(2j * np.pi * (ph - np.round(ph)))


def centered_dft_matrix(N: int) -> np.ndarray:
    """Dense ``F``: ``F[p, u] = e(-t_p (u - Nh - 1)) / sqrt(N)``."""
    N = check_odd(N)
    return _phase(-np.outer(grid_points(N), _freq_offsets(N))) / np.sqrt(N)


def _fft_adjoint(f, N):
    # (F* f)_u = sqrt(N) e(-k/2) ifft(f)[k mod N], k = u - Nh - 1
    k = _freq_offsets(N)
    ramp = _phase(-k / 2.0)
    spec = np.fft.ifft(f, axis=0)[k % N]
    return np.sqrt(N) * (ramp[:, None] * spec if f.ndim == 2 else ramp * spec)


def _fft_forward(v, N):
    k = _freq_offsets(N)
    ramp = _phase(k / 2.0)
    w = np.empty_like(v)
    w[k % N] = ramp[:, None] * v if v.ndim == 2 else ramp * v
    return np.fft.fft(w, axis=0) / np.sqrt(N)


def centered_dft_adjoint(f, method: str = "dense") -> np.ndarray:
    """Centered inverse DFT ``F* f`` of a length-N vector (N odd)."""
    f = np.asarray(f, dtype=np.complex128)
    N = check_odd(f.shape[0], "len(f)")
    if method == "fft":
        return _fft_adjoint(f, N)
    if method != "dense":
        raise ValueError(f"unknown method {method!r}")
    return centered_dft_matrix(N).conj().T @ f


def centered_dft(v, method: str = "dense") -> np.ndarray:
    """Centered DFT ``F v``; inverse of :func:`centered_dft_adjoint`."""
    v = np.asarray(v, dtype=np.complex128)
    N = check_odd(v.shape[0], "len(v)")
    if method == "fft":
        return _fft_forward(v, N)
    if method != "dense":
        raise ValueError(f"unknown method {method!r}")
    return centered_dft_matrix(N) @ v


def dft_operator(N: int, method: str = "dense", validate: Optional[bool] = None) -> LinearOperator:
    """``F`` as an operator (its adjoint is the centered inverse DFT)."""
    N = check_odd(N)
    if method == "dense":
        F = centered_dft_matrix(N)
        F.setflags(write=False)
        FH = F.conj().T
        return LinearOperator(N, N, lambda v: F @ v, lambda f: FH @ f, name="F", validate=validate)
    if method == "fft":
        return LinearOperator(N, N, lambda v: _fft_forward(v, N), lambda f: _fft_adjoint(f, N),
                              name="F", validate=validate)
    raise ValueError(f"unknown method {method!r}")


# NDFT and Dirichlet kernel ------------------------------------------------------


def _points(grid) -> np.ndarray:
    return np.asarray(grid.points if isinstance(grid, NonuniformGrid) else grid, dtype=float).ravel()


def ndft_matrix(grid, N: int) -> np.ndarray:
    """Dense type-2 NDFT ``E[k, u] = e(-t~_k (u - Nh - 1)) / sqrt(N)``."""
    N = check_odd(N)
    return _phase(-np.outer(_points(grid), _freq_offsets(N))) / np.sqrt(N)


def _blockwise(points, n_cols, build, x, transpose):
    # apply (or apply the adjoint of) a matrix assembled row block by row block
    m = points.size
    step = max(1, _BLOCK_ENTRIES // max(n_cols, 1))
    if not transpose:
        out = np.empty((m,) + x.shape[1:], dtype=np.complex128)
        for lo in range(0, m, step):
            out[lo:lo + step] = build(points[lo:lo + step]) @ x
        return out
    out = np.zeros((n_cols,) + x.shape[1:], dtype=np.complex128)
    for lo in range(0, m, step):
        out += build(points[lo:lo + step]).conj().T @ x[lo:lo + step]
    return out


def ndft_apply(grid, v, N: Optional[int] = None) -> np.ndarray:
    """Type-2 NDFT of ``v`` at the grid points (exact direct summation)."""
    v = np.asarray(v, dtype=np.complex128)
    N = check_odd(v.shape[0] if N is None else N)
    if v.shape[0] != N:
        raise ValueError(f"expected length {N}, got {v.shape[0]}")
    k = _freq_offsets(N)
    return _blockwise(_points(grid), N, lambda p: _phase(-np.outer(p, k)) / np.sqrt(N), v, False)


def ndft_adjoint(grid, y, N: int) -> np.ndarray:
    y = np.asarray(y, dtype=np.complex128)
    N = check_odd(N)
    pts = _points(grid)
    if y.shape[0] != pts.size:
        raise ValueError(f"expected length {pts.size}, got {y.shape[0]}")
    k = _freq_offsets(N)
    return _blockwise(pts, N, lambda p: _phase(-np.outer(p, k)) / np.sqrt(N), y, True)


def dirichlet_kernel(theta, N: int) -> np.ndarray:
    """``K(theta) = sin(N pi theta) / sin(pi theta)`` with its limit filled in.

    Where ``|sin(pi theta)| < 1e-12`` the value is the limit
    ``N cos(N pi theta) / cos(pi theta)``, i.e. ``N`` for odd ``N``.
    """
    N = check_odd(N)
    th = wrap(theta)  # K has period 1 for odd N
    den = np.sin(np.pi * th)
    num = np.sin(np.pi * np.mod(N * th + 1.0, 2.0) - np.pi)
    near = np.abs(den) < 1e-12
    safe = np.where(near, 1.0, den)
    limit = N * np.cos(N * np.pi * th) / np.cos(np.pi * th)
    return np.where(near, limit, num / safe)


def dirichlet_matrix(grid, N: int) -> np.ndarray:
    """Dense real ``S[k, p] = K(t~_k - t_p) / N``."""
    N = check_odd(N)
    return dirichlet_kernel(np.subtract.outer(_points(grid), grid_points(N)), N) / N


class DirichletKernelOp(LinearOperator):
    """Trigonometric interpolation ``S = N F*`` from the uniform grid to ``grid``.

    Parameters
    ----------
    grid : NonuniformGrid
        Sample locations.
    N : int
        Odd uniform grid size.
    representation : {"fourier", "direct"}
        ``"fourier"`` applies the centered inverse DFT followed by the NDFT;
        ``"direct"`` sums the Dirichlet kernel.  Both give the same matrix.
    dft_method : {"dense", "fft"}
        Backend of the centered DFT inside the Fourier path.
    precompute : bool, optional
        Keep the dense factor(s) in memory.  Defaults to on when the matrix
        has fewer than ~4M entries.
    validate : bool, optional
        Run a dot test at construction (default from ``VALIDATE_ON_CONSTRUCTION``).
    """

    def __init__(self, grid: NonuniformGrid, N: int, representation: str = "fourier",
                 dft_method: str = "dense", precompute: Optional[bool] = None,
                 validate: Optional[bool] = None):
        N = check_odd(N)
        pts = _points(grid)
        m = pts.size
        if precompute is None:
            precompute = m * N <= _PRECOMPUTE_LIMIT
        self.grid = grid
        self.N = N
        self.representation = representation
        if representation == "fourier":
            dft = dft_operator(N, dft_method, validate=False)
            if precompute:
                E = ndft_matrix(pts, N)
                E.setflags(write=False)
                EH = E.conj().T
                fwd = lambda f: E @ dft.adjoint(f)  # noqa: E731
                adj = lambda y: dft.forward(EH @ y)  # noqa: E731
            else:
                fwd = lambda f: ndft_apply(pts, dft.adjoint(f), N)  # noqa: E731
                adj = lambda y: dft.forward(ndft_adjoint(pts, y, N))  # noqa: E731
        elif representation == "direct":
            tp = grid_points(N)
            build = lambda p: dirichlet_kernel(np.subtract.outer(p, tp), N) / N  # noqa: E731
            if precompute:
                K = build(pts)
                K.setflags(write=False)
                KT = K.T
                fwd = lambda f: K @ f  # noqa: E731
                adj = lambda y: KT @ y  # noqa: E731
            else:
                fwd = lambda f: _blockwise(pts, N, build, f, False)  # noqa: E731
                adj = lambda y: _blockwise(pts, N, build, y, True)  # noqa: E731
        else:
            raise ValueError(f"unknown representation {representation!r}")
        super().__init__(m, N, fwd, adj, name=f"S[{representation}]", validate=validate)

    @property
    def m(self) -> int:
        return self.rows


def dirichlet_apply(op: DirichletKernelOp, f) -> np.ndarray:
    return op.forward(f)


def concat_acquisitions(ops: Sequence[DirichletKernelOp], validate: Optional[bool] = None) -> LinearOperator:
    """Stack Dirichlet kernels of repeated acquisitions of one signal."""
    ops = list(ops)
    if not ops:
        raise ValueError("need at least one acquisition")
    Ns = {o.N if isinstance(o, DirichletKernelOp) else o.cols for o in ops}
    if len(Ns) != 1:
        raise ValueError(f"acquisitions disagree on N: {sorted(Ns)}")
    return vstack(ops, validate=validate)


def continuous_eval(coeff_vec, x):
    """``<h(x), v>`` with ``h(x)_l = e(-x (l - Nh - 1)) / sqrt(N)``.

    For ``v = F* f`` this is the degree-``Nh`` trigonometric polynomial that
    interpolates ``f`` on the uniform grid.  The pairing is bilinear.
    """
    v = np.asarray(coeff_vec, dtype=np.complex128).ravel()
    N = check_odd(v.size, "len(coeff_vec)")
    xs = np.asarray(x, dtype=float)
    out = ndft_apply(xs.ravel(), v, N)
    return complex(out[0]) if xs.ndim == 0 else out.reshape(xs.shape)


def h_vector(x: float, N: int) -> np.ndarray:
    return ndft_matrix(np.array([float(x)]), N)[0]

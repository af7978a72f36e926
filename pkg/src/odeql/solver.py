"""Structure-aware solution of the encoded system.

The primary path, :func:`forward_substitute`, never assembles the big matrix:
it walks the blocks in flat order and replays the defining recurrences

    x_{0,0} = x_in
    x_{i,1} = Ah x_{i,0} + h b
    x_{i,j} = (Ah/j) x_{i,j-1}              2 <= j <= k
    x_{i+1,0} = sum_{j=0}^{k} x_{i,j}
    x_{m,j} = x_{m,j-1}                     1 <= j <= p

at a cost of m*k sparse matrix-vector products plus vector additions. The
assembled matrix is solved only for cross-validation (:func:`generic_solve`)
and for norm estimation through :func:`adjoint_solve`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve_triangular

from .encoder import EncodedSystem, TaylorParams, _as_csr, _require_step_bound
from .errors import DimensionError, IntegrityError
from .numerics import as_state


@dataclass(frozen=True)
class BlockSolution:
    """All d+1 solution blocks, addressable by (step, within-step) index.

    ``data`` has shape (d+1, N); row l holds the block with flat index l.
    The array is frozen read-only after construction.
    """

    params: TaylorParams
    N: int
    data: np.ndarray

    def block(self, i: int, j: int) -> np.ndarray:
        return self.data[self.params.flat(i, j)]

    def vector(self) -> np.ndarray:
        """The solution as one flat (d+1)N vector."""
        return self.data.ravel()

    def step_states(self) -> np.ndarray:
        """The history blocks x_{i,0} for i = 0..m, shape (m+1, N)."""
        k = self.params.k
        rows = np.arange(self.params.m + 1) * (k + 1)
        return self.data[rows]

    def final_state(self) -> np.ndarray:
        return self.block(self.params.m, 0)


def forward_substitute(A, params: TaylorParams, x_in, b) -> BlockSolution:
    """Solve the encoded system block-by-block without assembling it.

    Requires |A| h <= 1 like the matrix builder. The returned blocks satisfy
    the recurrences exactly (padding blocks are bitwise copies and block
    (0,0) is exactly x_in).
    """
    A = _as_csr(A)
    _require_step_bound(A, params.h)
    x_in = as_state(x_in, "x_in")
    b = as_state(b, "b")
    N = A.shape[0]
    if x_in.size != N or b.size != N:
        raise DimensionError("x_in and b must match the dimension of A")

    m, k, p, h = params.m, params.k, params.p, params.h
    data = np.zeros((params.d + 1, N), dtype=complex)
    hb = h * b

    data[0] = x_in
    for i in range(m):
        base = i * (k + 1)
        data[base + 1] = h * (A @ data[base]) + hb
        for j in range(2, k + 1):
            data[base + j] = (h / j) * (A @ data[base + j - 1])
        data[base + k + 1] = data[base:base + k + 1].sum(axis=0)
    top = m * (k + 1)
    for j in range(1, p + 1):
        data[top + j] = data[top]

    data.flags.writeable = False
    return BlockSolution(params=params, N=N, data=data)


def propagate_steps(A, params: TaylorParams, x_in, b) -> np.ndarray:
    """Streaming variant recording only the step states x_{i,0}, i = 0..m.

    Keeps O(N) working memory instead of all d+1 blocks; useful for long
    sweeps where only the history is wanted.
    """
    A = _as_csr(A)
    _require_step_bound(A, params.h)
    x_in = as_state(x_in, "x_in")
    b = as_state(b, "b")
    m, k, h = params.m, params.k, params.h
    hb = h * b

    history = np.zeros((m + 1, x_in.size), dtype=complex)
    history[0] = x_in
    for i in range(m):
        current = h * (A @ history[i]) + hb
        acc = history[i] + current
        for j in range(2, k + 1):
            current = (h / j) * (A @ current)
            acc += current
        history[i + 1] = acc
    return history


def _check_triangular(C: sp.csr_matrix) -> None:
    """Verify unit lower triangularity structurally: cols <= row, diagonal 1."""
    n = C.shape[0]
    rows = np.repeat(np.arange(n), np.diff(C.indptr))
    if np.any(C.indices > rows):
        raise IntegrityError("matrix has entries above the diagonal")
    last = C.indptr[1:] - 1
    if np.any(C.indptr[1:] == C.indptr[:-1]):
        raise IntegrityError("matrix has an empty row (missing diagonal)")
    if np.any(C.indices[last] != np.arange(n)) or np.any(C.data[last] != 1.0):
        raise IntegrityError("diagonal entries must all be stored and equal 1")


def generic_solve(system: EncodedSystem) -> np.ndarray:
    """Cross-validation path: solve the assembled matrix by generic sparse
    forward substitution after checking its triangular structure."""
    C = system.matrix
    _check_triangular(C)
    return spsolve_triangular(C, system.rhs, lower=True)


def adjoint_solve(system: EncodedSystem, y) -> np.ndarray:
    """Solve C^dagger z = y by back substitution on the conjugate transpose."""
    y = as_state(y, "y")
    if y.size != system.dim:
        raise DimensionError(f"y has length {y.size}, expected {system.dim}")
    CH = system.matrix.conj().T.tocsr()
    return spsolve_triangular(CH, y, lower=False)


def residual(system: EncodedSystem, x) -> float:
    """Relative residual |C x - rhs| / |rhs|."""
    x = as_state(x, "x")
    if x.size != system.dim:
        raise DimensionError(f"x has length {x.size}, expected {system.dim}")
    return float(np.linalg.norm(system.matrix @ x - system.rhs)
                 / np.linalg.norm(system.rhs))

"""Sparse LU factorization, triangular solves and a 2-norm condition estimator.

The factorization is delegated to SuperLU (scipy.sparse.linalg.splu) with
threshold partial pivoting; the factors satisfy Pr A Pc = L U with the two
permutations exposed for verification.  A direct method is required here:
the systems are ill-conditioned by construction and a factor-once /
solve-per-step loop beats an unpreconditioned iterative method.

The condition estimator runs power iteration on A^T A for sigma_max and on
(A^T A)^{-1}, through the factors, for sigma_min.  With ``equilibrate=True``
the estimate applies to the Ruiz row/column-scaled matrix B = Dr A Dc,
i.e. to the system as a scaled solver sees it, while still reusing the
factors of A for the inverse applications.
"""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np
import scipy.sparse as sps
import scipy.sparse.linalg as spla

from .errors import DimensionMismatchError, SingularPivotError

_PIVOT_RTOL = 1e-14
_DEFAULT_SEED = 1234


@dataclass
class LUFactors:
    """Immutable after construction; concurrent solves are read-only."""

    n: int
    _lu: spla.SuperLU

    @property
    def L(self) -> sps.csr_matrix:
        return self._lu.L.tocsr()

    @property
    def U(self) -> sps.csr_matrix:
        return self._lu.U.tocsr()

    @property
    def perm_r(self) -> np.ndarray:
        return self._lu.perm_r

    @property
    def perm_c(self) -> np.ndarray:
        return self._lu.perm_c


def lu_factorize(matrix: sps.spmatrix) -> LUFactors:
    """Factorize a square sparse matrix; raises SingularPivotError."""
    n, m = matrix.shape
    if n != m:
        raise DimensionMismatchError(f"matrix is {n}x{m}, not square")
    a_max = abs(matrix).max() if matrix.nnz else 0.0
    try:
        lu = spla.splu(matrix.tocsc())
    except RuntimeError as exc:  # SuperLU reports exact singularity this way
        raise SingularPivotError(f"SingularPivot: {exc}") from exc
    u_diag = np.abs(lu.U.diagonal())
    if u_diag.size < n or not (u_diag > _PIVOT_RTOL * a_max).all():
        worst = float(u_diag.min()) if u_diag.size else 0.0
        raise SingularPivotError(
            f"SingularPivot: pivot {worst:.3e} below threshold {_PIVOT_RTOL * a_max:.3e}"
        )
    return LUFactors(n=n, _lu=lu)


def lu_solve(factors: LUFactors, rhs: np.ndarray, trans: str = "N") -> np.ndarray:
    """Solve A x = b (or A^T x = b with trans='T') through the factors."""
    rhs = np.asarray(rhs, dtype=np.float64)
    if rhs.shape != (factors.n,):
        raise DimensionMismatchError(
            f"rhs has shape {rhs.shape}, expected ({factors.n},)"
        )
    return factors._lu.solve(rhs, trans=trans)


def lu_refine(
    factors: LUFactors, matrix: sps.spmatrix, rhs: np.ndarray, passes: int = 1
) -> np.ndarray:
    """Solve with `passes` rounds of iterative refinement in working precision."""
    x = lu_solve(factors, rhs)
    for _ in range(passes):
        x = x + lu_solve(factors, rhs - matrix @ x)
    return x


def ruiz_scalings(
    matrix: sps.spmatrix, iters: int = 20
) -> tuple[np.ndarray, np.ndarray, sps.csr_matrix]:
    """Iterative 2-norm equilibration: returns (dr, dc, Dr A Dc)."""
    b = matrix.tocsr(copy=True).astype(np.float64)
    n, m = b.shape
    dr = np.ones(n)
    dc = np.ones(m)
    for _ in range(iters):
        rn = np.sqrt(np.asarray(b.multiply(b).sum(axis=1)).ravel()) ** 0.5
        rn[rn == 0] = 1.0
        dr /= rn
        b = sps.diags(1.0 / rn) @ b
        cn = np.sqrt(np.asarray(b.multiply(b).sum(axis=0)).ravel()) ** 0.5
        cn[cn == 0] = 1.0
        dc /= cn
        b = b @ sps.diags(1.0 / cn)
    return dr, dc, b.tocsr()


@dataclass(frozen=True)
class CondEstimate:
    value: float
    converged: bool
    iterations_sigma_max: int
    iterations_sigma_min: int

    def __float__(self):
        return self.value


def _power_iteration(apply_op, n, rng, tol, max_iter):
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    lam_old = 0.0
    for k in range(1, max_iter + 1):
        w = apply_op(v)
        lam = float(np.linalg.norm(w))
        if lam == 0.0:
            return 0.0, k, True
        v = w / lam
        if abs(lam - lam_old) <= tol * lam:
            return np.sqrt(lam), k, True
        lam_old = lam
    return np.sqrt(lam), max_iter, False


def estimate_cond2(
    matrix: sps.spmatrix,
    factors: LUFactors,
    tol: float = 1e-4,
    max_iter: int = 10_000,
    seed: int = _DEFAULT_SEED,
    equilibrate: bool = False,
) -> CondEstimate:
    """Euclidean condition number sigma_max / sigma_min of the matrix.

    Deterministic for a fixed seed.  If the iteration cap is hit the value
    is still returned, flagged with ``converged=False``.
    """
    n = matrix.shape[0]
    a = matrix.tocsr()
    if equilibrate:
        dr, dc, b = ruiz_scalings(a)
        bt = b.T.tocsr()

        def fwd(v):
            return bt @ (b @ v)

        def inv(v):
            y = (1.0 / dr) * lu_solve(factors, v / dc, trans="T")
            return (1.0 / dc) * lu_solve(factors, y / dr)

    else:
        at = a.T.tocsr()

        def fwd(v):
            return at @ (a @ v)

        def inv(v):
            return lu_solve(factors, lu_solve(factors, v, trans="T"))

    rng = np.random.default_rng(seed)
    smax, k1, ok1 = _power_iteration(fwd, n, rng, tol, max_iter)
    sinv, k2, ok2 = _power_iteration(inv, n, rng, tol, max_iter)
    return CondEstimate(
        value=float(smax * sinv),
        converged=ok1 and ok2,
        iterations_sigma_max=k1,
        iterations_sigma_min=k2,
    )

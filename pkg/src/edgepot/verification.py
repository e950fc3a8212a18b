"""Discrete norms, study drivers and the initial-data compatibility check.

Three studies back the verification claims:

* mesh convergence of the coupled scheme against the manufactured solution
  (second order in space once dt is small enough);
* decay of ||phi_eta - phi_0|| as eta -> 0 for the separable ramp source,
  whose x-odd structure makes phi_0 = 0 the exact limit (the discrete
  solver reproduces phi = 0 identically at eta = 0);
* condition number of the constant matrix versus eta, coupled against
  single-field.

The condition study reports the Euclidean condition number of the Ruiz
row/column-equilibrated matrix, i.e. the conditioning of the system as a
scaled direct solver sees it.  The raw assembled matrix mixes row scales of
order 1 (gauge anchor), 1/dx (face rows) and 1/(dt dy^2) (evolution rows),
and its raw sigma_min is dominated by that bookkeeping disparity rather
than by the eta-coupling; after equilibration the eta-dependence is the
meaningful one: bounded for the coupled scheme, divergent for the
single-field one.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .assembly import Forcing, build_ap_system, build_naive_system
from .errors import SingularPivotError
from .geometry import DiscConfig, Grid, PhysConfig, build_grid
from .linsolve import CondEstimate, estimate_cond2, lu_factorize
from .manufactured import (
    ManufacturedSolution,
    corrected_mms,
    eq4_source,
    smooth_mms,
)
from .timeloop import State, run


# ---- norms -----------------------------------------------------------


def l2_norm(grid: Grid, values: np.ndarray) -> float:
    """L2(Omega) norm by the trapezoidal rule over the plasma nodes.

    ``values`` is aligned with the grid's node enumeration (ghosts allowed,
    they carry weight zero) or with the plasma nodes only.
    """
    w = grid.quad_weights
    v = np.asarray(values, dtype=float)
    if v.shape != w.shape:
        full = np.zeros_like(w)
        full[grid.plasma_ordinals] = v
        v = full
    return float(np.sqrt(np.sum(w * v * v) * grid.dx * grid.dy))


def time_norms(values: Sequence[float], dt: float) -> tuple[float, float]:
    """Rectangle-rule L1 and L2 norms in time of per-step values."""
    v = np.asarray(values, dtype=float)
    return float(np.sum(v) * dt), float(np.sqrt(np.sum(v * v) * dt))


class TimeNormObserver:
    """Per-step L2(Omega) distance to a reference, for norms in time.

    The initial state (n = 0) is skipped: the accumulators feed the
    rectangle rule with right endpoints, matching the first-order stepper.
    """

    def __init__(self, grid: Grid, reference: Optional[Callable] = None):
        self.grid = grid
        self.reference = reference
        self.values: list[float] = []
        self._x, self._y = grid.node_coords()

    def __call__(self, state: State) -> None:
        if state.n == 0:
            return
        phi = state.phi
        if self.reference is not None:
            phi = phi - self.reference(state.t, self._x, self._y)
        self.values.append(l2_norm(self.grid, phi))

    def norms(self, dt: float) -> tuple[float, float]:
        return time_norms(self.values, dt)


def fit_loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of log(y) against log(x)."""
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    return float(np.polyfit(lx, ly, 1)[0])


# ---- study records ---------------------------------------------------


@dataclass(frozen=True)
class ConvergenceRow:
    h: float
    dt: float
    err_l2: float


@dataclass(frozen=True)
class EtaRow:
    eta: float
    err_l1_time: float
    err_l2_time: float


@dataclass(frozen=True)
class CondRow:
    eta: float
    kappa_ap: float
    kappa_ap_converged: bool
    kappa_naive: Optional[float]
    kappa_naive_converged: Optional[bool]


@dataclass(frozen=True)
class ConvergenceStudy:
    rows: tuple[ConvergenceRow, ...]
    order: float


@dataclass(frozen=True)
class EtaStudy:
    rows: tuple[EtaRow, ...]
    slope_l1: float
    slope_l2: float


@dataclass(frozen=True)
class CondStudy:
    rows: tuple[CondRow, ...]


# ---- study drivers ---------------------------------------------------


def _mms_bundle(variant: str, eta: float, nu: float, lambda_ref: float) -> ManufacturedSolution:
    if variant == "eq3_corrected":
        return corrected_mms(eta, nu, lambda_ref)
    if variant == "smooth":
        return smooth_mms(eta, nu, lambda_ref)
    raise ValueError(f"no runnable manufactured solution named {variant!r}")


def run_mms_convergence(
    deltas: Sequence[float],
    dt: float = 1e-4,
    eta: float = 1e-3,
    nu: float = 1.0,
    lambda_ref: float = 0.0,
    L: float = 0.4,
    t_end: float = 1.0,
    variant: str = "eq3_corrected",
) -> ConvergenceStudy:
    """L2 error at t = T against the manufactured solution, per mesh step."""
    ms0 = _mms_bundle(variant, eta, nu, lambda_ref)
    rows = []
    for d in sorted(deltas, reverse=True):
        phys = PhysConfig(eta=eta, nu=nu, lambda_ref=lambda_ref, L=L, t_end=t_end)
        disc = DiscConfig(dx=d, dy=d, dt=dt, mode="strip")
        grid = build_grid(phys, disc)
        final = run(grid, phys, disc, ms0.forcing, ms0.phi_ini, scheme="ap")
        x, y = grid.node_coords()
        err = l2_norm(grid, final.phi - ms0.phi(final.t, x, y))
        rows.append(ConvergenceRow(h=d, dt=dt, err_l2=err))
    order = fit_loglog_slope([r.h for r in rows], [r.err_l2 for r in rows])
    return ConvergenceStudy(rows=tuple(rows), order=order)


def run_eta_sweep(
    etas: Sequence[float],
    delta: float = 0.0125,
    dt: float = 1e-3,
    nu: float = 0.01,
    L: float = 0.4,
    t_end: float = 1.0,
) -> EtaStudy:
    """Distance to the eta = 0 limit for the separable ramp source.

    Configuration: lambda = 0, phi_ini = 0, full-height limiter, for which
    the limit solution is identically zero, so the error norms are plain
    norms of phi_eta.  The default viscosity is small: the parallel term
    (pi/2L)^2/eta must dominate the perpendicular one nu (2 pi)^4 over the
    sweep for the O(eta) regime to be visible; with nu = 0.01 the crossover
    sits near eta = 1, clear of the default sweep.
    """
    rows = []
    for eta in sorted(etas, reverse=True):
        phys = PhysConfig(eta=eta, nu=nu, lambda_ref=0.0, L=L, t_end=t_end)
        disc = DiscConfig(dx=delta, dy=delta, dt=dt, mode="strip")
        grid = build_grid(phys, disc)
        obs = TimeNormObserver(grid)
        forcing = Forcing(volume=lambda t, x, y: eq4_source(t, x, y, L))
        run(grid, phys, disc, forcing, lambda x, y: np.zeros_like(x), observers=[obs])
        l1, l2 = obs.norms(dt)
        rows.append(EtaRow(eta=eta, err_l1_time=l1, err_l2_time=l2))
    slope_l1 = fit_loglog_slope([r.eta for r in rows], [r.err_l1_time for r in rows])
    slope_l2 = fit_loglog_slope([r.eta for r in rows], [r.err_l2_time for r in rows])
    return EtaStudy(rows=tuple(rows), slope_l1=slope_l1, slope_l2=slope_l2)


def run_condition_study(
    etas: Sequence[float],
    delta: float = 0.025,
    dt: float = 1e-3,
    nu: float = 1.0,
    lambda_ref: float = 0.0,
    L: float = 0.4,
    tol: float = 1e-4,
    max_iter: int = 10_000,
) -> CondStudy:
    """Equilibrated condition number per eta, coupled and single-field.

    The single-field entry is absent at eta = 0 (that scheme divides by
    eta) and whenever its factorization hits a sub-threshold pivot, which
    happens once eta is small enough to make the matrix numerically
    singular.  The matrix does not depend on the source or the state, only
    on the grid, eta, nu and dt.
    """
    rows = []
    for eta in sorted(etas, reverse=True):
        phys = PhysConfig(eta=eta, nu=nu, lambda_ref=lambda_ref, L=L)
        disc = DiscConfig(dx=delta, dy=delta, dt=dt, mode="strip")
        grid = build_grid(phys, disc)
        ap = build_ap_system(grid, phys, disc)
        est = estimate_cond2(
            ap.matrix, lu_factorize(ap.matrix), tol=tol, max_iter=max_iter,
            equilibrate=True,
        )
        kn: Optional[CondEstimate] = None
        if eta > 0:
            nv = build_naive_system(grid, phys, disc)
            try:
                kn = estimate_cond2(
                    nv.matrix, lu_factorize(nv.matrix), tol=tol, max_iter=max_iter,
                    equilibrate=True,
                )
            except SingularPivotError:
                kn = None
        rows.append(
            CondRow(
                eta=eta,
                kappa_ap=est.value,
                kappa_ap_converged=est.converged,
                kappa_naive=None if kn is None else kn.value,
                kappa_naive_converged=None if kn is None else kn.converged,
            )
        )
    return CondStudy(rows=tuple(rows))


# ---- compatibility of the initial data --------------------------------


@dataclass(frozen=True)
class CompatibilityReport:
    lhs: float  # integral of S at t = 0 over Omega
    rhs: float  # nu * integral of d_y^4 phi_ini + 2 * face integral of the sheath term
    mismatch: float
    ok: bool


def validate_compatibility(
    phys: PhysConfig,
    phi_ini: Callable,
    source: Optional[Callable],
    n_quad: int = 401,
    rtol: float = 1e-6,
) -> CompatibilityReport:
    """Check the initial compatibility between source, data and sheath.

    Evaluates, by trapezoidal quadrature over the full-height strip,

        int_Omega S|_{t=0}  ==  nu int_Omega d_y^4 phi_ini
                                + 2 int_0^l (1 - e^{lambda - phi_ini|x=L}) dy

    and warns (advisory only) when the mismatch exceeds rtol * max(1, |lhs|).
    The fourth y-derivative of the callable is formed by centred second-order
    differences on the quadrature grid.
    """
    L, l, lam, nu = phys.L, phys.limiter_height, phys.lambda_ref, phys.nu
    xs = np.linspace(-L, L, n_quad)
    ys = np.linspace(0.0, 1.0, n_quad)
    X, Y = np.meshgrid(xs, ys, indexing="ij")

    if source is None:
        lhs = 0.0
    else:
        s0 = np.broadcast_to(np.asarray(source(0.0, X, Y), dtype=float), X.shape)
        lhs = float(np.trapezoid(np.trapezoid(s0, ys, axis=1), xs))

    h = ys[1] - ys[0]
    f = np.broadcast_to(np.asarray(phi_ini(X, Y), dtype=float), X.shape).copy()
    f -= f.mean()  # offsets are annihilated analytically; avoid 1/h^4 cancellation
    d4 = np.zeros_like(f)
    d4[:, 2:-2] = (
        f[:, :-4] - 4 * f[:, 1:-3] + 6 * f[:, 2:-2] - 4 * f[:, 3:-1] + f[:, 4:]
    ) / h**4
    # mirror closure at the walls, matching the solver's ghost elimination
    d4[:, 0] = (6 * f[:, 0] - 8 * f[:, 1] + 2 * f[:, 2]) / h**4
    d4[:, 1] = (-4 * f[:, 0] + 7 * f[:, 1] - 4 * f[:, 2] + f[:, 3]) / h**4
    d4[:, -1] = (6 * f[:, -1] - 8 * f[:, -2] + 2 * f[:, -3]) / h**4
    d4[:, -2] = (-4 * f[:, -1] + 7 * f[:, -2] - 4 * f[:, -3] + f[:, -4]) / h**4
    rhs = nu * float(np.trapezoid(np.trapezoid(d4, ys, axis=1), xs))

    ys_face = ys[ys <= l + 1e-12]
    phi_face = np.broadcast_to(
        np.asarray(phi_ini(np.full_like(ys_face, L), ys_face), dtype=float),
        ys_face.shape,
    )
    rhs += 2.0 * float(np.trapezoid(1.0 - np.exp(lam - phi_face), ys_face))

    mismatch = abs(lhs - rhs)
    ok = mismatch <= rtol * max(1.0, abs(lhs))
    if not ok:
        warnings.warn(
            f"initial data incompatible with the source: |lhs - rhs| = {mismatch:.3e}",
            stacklevel=2,
        )
    return CompatibilityReport(lhs=lhs, rhs=rhs, mismatch=mismatch, ok=ok)

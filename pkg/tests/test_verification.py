import numpy as np
import pytest

from edgepot.assembly import Forcing
from edgepot.geometry import DiscConfig, PhysConfig, build_grid
from edgepot.manufactured import eq4_source, mms_source
from edgepot.verification import (
    TimeNormObserver,
    fit_loglog_slope,
    l2_norm,
    run_condition_study,
    run_eta_sweep,
    run_mms_convergence,
    time_norms,
    validate_compatibility,
)


def strip_grid(dx=0.05, dy=0.05):
    return build_grid(
        PhysConfig(eta=1e-3), DiscConfig(dx=dx, dy=dy, dt=1e-3, mode="strip")
    )


# ---- space norm -------------------------------------------------------------


def test_l2_norm_of_one_is_sqrt_area():
    grid = strip_grid()
    ones = np.ones(len(grid.phi_nodes))
    assert l2_norm(grid, ones) == pytest.approx(0.8944271909999159)


def test_l2_norm_of_zero():
    grid = strip_grid()
    assert l2_norm(grid, np.zeros(len(grid.phi_nodes))) == 0.0


def test_l2_norm_of_periodic_mode_is_exact():
    # ||cos(2 pi y)||^2 = 0.8 * 0.5; the trapezoidal rule is exact for
    # trigonometric modes sampled on period-aligned uniform grids
    for d in (0.05, 0.025):
        grid = strip_grid(dy=d, dx=0.05)
        _, y = grid.node_coords()
        assert l2_norm(grid, np.cos(2 * np.pi * y)) == pytest.approx(
            0.6324555320336759, abs=1e-12
        )


def test_l2_norm_second_order_on_generic_smooth_field():
    # ||exp(y)||^2 = 0.8 * (e^2 - 1)/2 over the strip
    exact = np.sqrt(0.8 * (np.e**2 - 1) / 2)
    errs = []
    for d in (0.05, 0.025):
        grid = strip_grid(dy=d, dx=0.05)
        _, y = grid.node_coords()
        errs.append(abs(l2_norm(grid, np.exp(y)) - exact))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.2)


def test_l2_norm_accepts_plasma_only_vector():
    grid = strip_grid()
    full = np.ones(len(grid.phi_nodes))
    plasma = np.ones(len(grid.plasma_ordinals))
    assert l2_norm(grid, plasma) == l2_norm(grid, full)


def test_l2_norm_scales_linearly():
    grid = strip_grid()
    rng = np.random.default_rng(0)
    f = rng.standard_normal(len(grid.phi_nodes))
    assert l2_norm(grid, 3.0 * f) == pytest.approx(3.0 * l2_norm(grid, f))


# ---- time norms --------------------------------------------------------------


def test_time_norms_of_constant():
    values = np.ones(1000)
    assert time_norms(values, 1e-3) == pytest.approx((1.0, 1.0))


def test_time_norms_of_zero():
    assert time_norms(np.zeros(10), 0.1) == (0.0, 0.0)


def test_time_norms_of_ramp():
    dt = 1e-3
    values = np.arange(1, 1001) * dt  # v_n = t_n on (0, 1]
    l1, l2 = time_norms(values, dt)
    assert l1 == pytest.approx(0.5, abs=1e-3)
    assert l2 == pytest.approx(1 / np.sqrt(3.0), abs=1e-3)


def test_fit_loglog_slope_recovers_power():
    xs = [0.1, 0.05, 0.025]
    ys = [7 * x**2 for x in xs]
    assert fit_loglog_slope(xs, ys) == pytest.approx(2.0)


# ---- study drivers ------------------------------------------------------------


def test_mms_convergence_small_study_second_order():
    study = run_mms_convergence([0.1, 0.05], dt=1e-4, t_end=0.25)
    assert [r.h for r in study.rows] == [0.1, 0.05]
    assert study.order == pytest.approx(2.0, abs=0.4)


def test_mms_convergence_smooth_variant():
    study = run_mms_convergence([0.1, 0.05], dt=1e-4, t_end=0.25, variant="smooth")
    assert study.order == pytest.approx(2.0, abs=0.4)


def test_mms_convergence_exposes_dt_floor():
    # coarse dt: halving dx leaves the error nearly unchanged
    study = run_mms_convergence([0.1, 0.05], dt=0.05, t_end=0.25)
    e = [r.err_l2 for r in study.rows]
    assert e[0] / e[1] < 1.5


def test_eta_sweep_exact_zero_limit():
    # at eta = 0 the x-odd ramp source leaves phi identically zero
    phys = PhysConfig(eta=0.0, nu=0.01, t_end=0.05)
    disc = DiscConfig(dx=0.05, dy=0.05, dt=1e-2, mode="strip")
    grid = build_grid(phys, disc)
    obs = TimeNormObserver(grid)
    from edgepot.timeloop import run

    run(
        grid, phys, disc,
        Forcing(volume=lambda t, x, y: eq4_source(t, x, y, 0.4)),
        lambda x, y: np.zeros_like(x),
        observers=[obs],
    )
    assert max(obs.values) <= 1e-8


def test_eta_sweep_slope_near_one():
    study = run_eta_sweep([1e-2, 1e-3, 1e-4], delta=0.05, dt=1e-2, nu=0.01)
    assert study.slope_l1 == pytest.approx(1.0, abs=0.15)
    assert study.slope_l2 == pytest.approx(1.0, abs=0.15)
    etas = [r.eta for r in study.rows]
    assert etas == sorted(etas, reverse=True)


def test_condition_study_rows_and_determinism():
    etas = [1e-2, 0.0]
    a = run_condition_study(etas, delta=0.1, dt=1e-3)
    b = run_condition_study(etas, delta=0.1, dt=1e-3)
    assert [r.eta for r in a.rows] == [1e-2, 0.0]
    assert a.rows[0].kappa_naive is not None
    assert a.rows[1].kappa_naive is None  # single-field absent at eta = 0
    assert np.isfinite(a.rows[1].kappa_ap)
    for ra, rb in zip(a.rows, b.rows):
        assert ra == rb  # bit-identical across repeated runs


# ---- compatibility -------------------------------------------------------------


def test_compatibility_ramp_source_config():
    phys = PhysConfig(eta=1e-3, lambda_ref=0.0)
    report = validate_compatibility(
        phys,
        lambda x, y: np.zeros_like(np.asarray(x, dtype=float)),
        lambda t, x, y: eq4_source(t, x, y, phys.L),
    )
    assert report.ok
    assert report.lhs == pytest.approx(0.0, abs=1e-12)
    assert report.rhs == pytest.approx(0.0, abs=1e-12)


def test_compatibility_reference_mms_config():
    phys = PhysConfig(eta=1e-3, lambda_ref=0.3)
    report = validate_compatibility(
        phys,
        lambda x, y: np.full_like(np.asarray(x, dtype=float), 0.3),
        lambda t, x, y: mms_source(t, x, y, phys.eta, phys.nu, 0.3),
    )
    assert report.ok


def test_compatibility_warns_on_mismatch():
    phys = PhysConfig(eta=1e-3, lambda_ref=0.0)
    with pytest.warns(UserWarning, match="incompatible"):
        report = validate_compatibility(
            phys,
            lambda x, y: np.zeros_like(np.asarray(x, dtype=float)),
            lambda t, x, y: np.ones_like(np.asarray(x, dtype=float)),
        )
    assert not report.ok
    assert report.lhs == pytest.approx(0.8)  # |Omega| for L = 0.4
    assert report.rhs == pytest.approx(0.0, abs=1e-12)

"""Manufactured solutions and their closed-form sources.

The reference solution used for the mesh-convergence study is

    phi(t, x, y) = eta (t/pi)^2 cos(pi y) cos(1.25 pi x)
                   - ln(1 - 1.25 t^2 cos(pi y) / pi) + lambda

on the strip with L = 0.4.  Its x-dependent part carries the factor eta, so
the 1/eta term of the single-field operator applied to it stays finite as
eta -> 0, and it satisfies every boundary condition of the model exactly:
the d_y and d_y^3 conditions on y = 0, 1 (all terms carry sin(pi y)), and
the sheath law on x = -+0.4 where cos(1.25 pi x) vanishes while its slope
is -+1.25 pi.

A historical variant with cos(pi y) dividing the log argument instead of
multiplying it ("literal") is kept for regression purposes only: its log
argument changes sign inside the domain and it violates the sheath law by
O(1); it has no usable source term.

A second, fully smooth solution ("smooth") provides an independent
convergence check.  It does not satisfy the sheath law, so it carries
additive manufactured sheath data g(t, y) through the Forcing bundle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .assembly import Forcing
from .errors import LogDomainError

_C = 1.25 / np.pi  # coefficient of t^2 cos(pi y) inside the log
_KX = 1.25 * np.pi  # x wavenumber of the micro part


def _log_arg_corrected(t, y):
    return 1.0 - _C * t * t * np.cos(np.pi * y)


def mms_phi(t, x, y, eta: float, lambda_ref: float):
    """Reference manufactured solution (boundary-consistent form)."""
    arg = _log_arg_corrected(t, y)
    if np.any(arg <= 0):
        raise LogDomainError(f"log argument non-positive at t = {t}")
    w = np.cos(np.pi * y)
    return eta * (t / np.pi) ** 2 * w * np.cos(_KX * x) - np.log(arg) + lambda_ref


def mms_phi_x(t, x, y, eta: float):
    """d/dx of mms_phi (the log part is x-independent)."""
    return -eta * (t / np.pi) ** 2 * np.cos(np.pi * y) * _KX * np.sin(_KX * x)


def mms_q(t, x, y):
    """Micro field of the splitting: q = (phi - p)/eta, independent of eta."""
    return (t / np.pi) ** 2 * np.cos(np.pi * y) * np.cos(_KX * x)


def mms_q_x(t, x, y):
    return -((t / np.pi) ** 2) * np.cos(np.pi * y) * _KX * np.sin(_KX * x)


def mms_source(t, x, y, eta: float, nu: float, lambda_ref: float):
    """Model operator applied to mms_phi, in closed form.

    With phi = eta*A + B + lambda, A = (t/pi)^2 cos(pi y) cos(1.25 pi x) and
    B = -ln(1 - a w), a = 1.25 t^2 / pi, w = cos(pi y):

        S = eta (-d_t d_y^2 A + nu d_y^4 A) - d_x^2 A - d_t d_y^2 B + nu d_y^4 B

    The 1/eta term reduces to -d_x^2 A because the x-part carries eta, so S
    is affine in eta and finite at eta = 0.  lambda_ref only shifts phi and
    drops out of S; it is accepted to mirror mms_phi's signature.
    """
    arg = _log_arg_corrected(t, y)
    if np.any(arg <= 0):
        raise LogDomainError(f"log argument non-positive at t = {t}")
    w = np.cos(np.pi * y)
    cx = np.cos(_KX * x)
    a = _C * t * t
    u = arg
    pi2 = np.pi**2
    micro = eta * (2.0 * t * w * cx + nu * pi2 * t * t * w * cx)
    xterm = 1.5625 * t * t * w * cx
    t_yy_log = 2.0 * pi2 * _C * t * (w + a * w * w - 2.0 * a) / u**3
    y4_log = (
        nu
        * a
        * pi2
        * pi2
        * (
            6.0 * a**3
            - 4.0 * a
            + (1.0 - 4.0 * a * a) * w
            + (4.0 * a - 4.0 * a**3) * w * w
            + a * a * w**3
        )
        / u**4
    )
    return micro + xterm + t_yy_log + y4_log


def mms_phi_literal(t, x, y, eta: float, lambda_ref: float):
    """Historical variant: cos(pi y) divides the log argument.

    Undefined where cos(pi y) = 0 and where the argument is non-positive;
    kept only to document that it fails the sheath boundary conditions.
    """
    w = np.cos(np.pi * y)
    if np.any(w == 0):
        raise LogDomainError("cos(pi y) = 0: literal variant undefined at y = 0.5")
    arg = 1.0 - 1.25 * t * t / (np.pi * w)
    if np.any(arg <= 0):
        raise LogDomainError(f"log argument non-positive at t = {t}")
    return eta * (t / np.pi) ** 2 * w * np.cos(_KX * x) - np.log(arg) + lambda_ref


def eq4_source(t, x, y, L: float):
    """Separable ramp source used for the eta -> 0 convergence study."""
    return 40.0 * t * np.cos(2.0 * np.pi * y) * np.sin(np.pi * x / (2.0 * L))


def smooth_phi(t, x, y, eta: float, lambda_ref: float):
    """Fully smooth fallback: eta t^2 cos(pi y) cos(1.25 pi x) + t^2 cos(2 pi y) + lambda."""
    return (
        eta * t * t * np.cos(np.pi * y) * np.cos(_KX * x)
        + t * t * np.cos(2.0 * np.pi * y)
        + lambda_ref
    )


def smooth_source(t, x, y, eta: float, nu: float):
    w = np.cos(np.pi * y)
    cx = np.cos(_KX * x)
    c2 = np.cos(2.0 * np.pi * y)
    pi2 = np.pi**2
    pi4 = pi2 * pi2
    return (
        eta * (2.0 * pi2 * t * w * cx + nu * pi4 * t * t * w * cx)
        + 1.5625 * pi2 * t * t * w * cx
        + 8.0 * pi2 * t * c2
        + 16.0 * nu * pi4 * t * t * c2
    )


@dataclass(frozen=True)
class ManufacturedSolution:
    """Exact solution bundle: closures plus the forcing that reproduces it."""

    variant: str
    phi: Callable  # (t, x, y) -> field
    phi_x: Optional[Callable]  # d phi / dx
    q: Optional[Callable]  # micro field of the splitting
    q_x: Optional[Callable]
    forcing: Forcing
    phi_ini: Callable  # (x, y) -> field at t = 0

    def has_source(self) -> bool:
        return self.forcing.volume is not None


def corrected_mms(eta: float, nu: float, lambda_ref: float) -> ManufacturedSolution:
    """The boundary-consistent reference solution (default study target)."""
    return ManufacturedSolution(
        variant="eq3_corrected",
        phi=lambda t, x, y: mms_phi(t, x, y, eta, lambda_ref),
        phi_x=lambda t, x, y: mms_phi_x(t, x, y, eta),
        q=mms_q,
        q_x=mms_q_x,
        forcing=Forcing(volume=lambda t, x, y: mms_source(t, x, y, eta, nu, lambda_ref)),
        phi_ini=lambda x, y: np.full_like(np.asarray(x, dtype=float), lambda_ref),
    )


def literal_mms(eta: float, lambda_ref: float) -> ManufacturedSolution:
    """The historical variant; documentation only, no source term."""
    return ManufacturedSolution(
        variant="eq3_literal",
        phi=lambda t, x, y: mms_phi_literal(t, x, y, eta, lambda_ref),
        phi_x=lambda t, x, y: mms_phi_x(t, x, y, eta),
        q=mms_q,
        q_x=mms_q_x,
        forcing=Forcing(),
        phi_ini=lambda x, y: np.full_like(np.asarray(x, dtype=float), lambda_ref),
    )


def smooth_mms(eta: float, nu: float, lambda_ref: float, L: float = 0.4) -> ManufacturedSolution:
    """Smooth fallback with manufactured sheath data on the faces.

    The sheath conditions become d_x q = (1 - e^{lambda - phi}) + g_w on the
    west face and d_x q = -(1 - e^{lambda - phi}) + g_e on the east face,
    with g chosen so the smooth field is the exact solution.
    """
    kx = _KX

    def q(t, x, y):
        return t * t * np.cos(np.pi * y) * np.cos(kx * x)

    def q_x(t, x, y):
        return -t * t * np.cos(np.pi * y) * kx * np.sin(kx * x)

    def g_west(t, y):
        phi_w = smooth_phi(t, -L, y, eta, lambda_ref)
        return q_x(t, -L, y) - (1.0 - np.exp(lambda_ref - phi_w))

    def g_east(t, y):
        phi_e = smooth_phi(t, L, y, eta, lambda_ref)
        return q_x(t, L, y) + (1.0 - np.exp(lambda_ref - phi_e))

    return ManufacturedSolution(
        variant="smooth",
        phi=lambda t, x, y: smooth_phi(t, x, y, eta, lambda_ref),
        phi_x=lambda t, x, y: -eta * t * t * np.cos(np.pi * y) * kx * np.sin(kx * x),
        q=q,
        q_x=q_x,
        forcing=Forcing(
            volume=lambda t, x, y: smooth_source(t, x, y, eta, nu),
            sheath_west=g_west,
            sheath_east=g_east,
        ),
        phi_ini=lambda x, y: np.full_like(np.asarray(x, dtype=float), lambda_ref),
    )


def sheath_residuals(
    ms: ManufacturedSolution,
    lambda_ref: float,
    L: float,
    times,
    ys,
) -> tuple[float, float]:
    """Max sheath-law residual of an exact solution on the two faces.

    Measured in the micro form d_x q -+ (1 - e^{lambda - phi}) = 0, which is
    eta-free; manufactured sheath data of the bundle is honoured, so a
    solution with corrections reports zero as well.
    """
    t = np.asarray(times, dtype=float)[:, None]
    y = np.asarray(ys, dtype=float)[None, :]
    phi_w = ms.phi(t, -L, y)
    phi_e = ms.phi(t, L, y)
    sheath_w = 1.0 - np.exp(lambda_ref - phi_w)
    sheath_e = -(1.0 - np.exp(lambda_ref - phi_e))
    if ms.forcing.sheath_west is not None:
        sheath_w = sheath_w + ms.forcing.sheath_west(t, y)
    if ms.forcing.sheath_east is not None:
        sheath_e = sheath_e + ms.forcing.sheath_east(t, y)
    res_w = np.abs(ms.q_x(t, -L, y) - sheath_w).max()
    res_e = np.abs(ms.q_x(t, L, y) - sheath_e).max()
    return float(res_w), float(res_e)

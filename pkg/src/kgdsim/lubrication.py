"""Fluid side of the coupled problem: continuity solve for the mean
velocity, pressure reconstruction from the Poiseuille-type gradient, wall
shear traction and the influx schedule.

The continuity equation is integrated in space on the normalized coordinate.
Writing the opening as ``w(xt, t)`` with ``xt = x/a(t)`` and integrating by
parts moves the front-motion term out of the integrand, so every term is
bounded through the tip:

    q(xt) = a * int_xt^1 dw/dt dxt' + dadt * (xt*w + int_xt^1 w dxt')
            + a * int_xt^1 qL dxt'.

The front speed is closed by the global balance q(0) = q0(t), after which
``v = q/w`` tends exactly to the front speed at the tip (the Stefan
condition) while any mass imbalance of the current iterate shows up as a
velocity excess near the front, which is what drives the front tracing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, NumericalError
from .grids import FluidGrid, fit_tip_coefficients
from .rheology import RheologyModel, flow_factor
from .state import FractureState, PressureField, ShearField

__all__ = [
    "LeakoffModel",
    "ramp_influx",
    "solve_velocity",
    "pressure_from_velocity",
    "shear_traction",
]


@dataclass(frozen=True)
class LeakoffModel:
    """Leak-off: either none or a prescribed function of (xt, t) in m/s,
    bounded at the crack tip."""

    kind: str = "none"  # "none" | "prescribed"
    fn: object = None

    def __post_init__(self):
        if self.kind not in ("none", "prescribed"):
            raise InputError(f"unknown leak-off kind {self.kind!r}")
        if self.kind == "prescribed" and not callable(self.fn):
            raise InputError("prescribed leak-off requires a callable fn(xt, t)")

    def values(self, xt, t):
        if self.kind == "none":
            return np.zeros_like(np.asarray(xt, dtype=float))
        return np.asarray(self.fn(xt, t), dtype=float)


def ramp_influx(t, q_max, t_ramp):
    """Inlet flux with a smooth cubic ramp from zero to ``q_max`` over
    ``[0, t_ramp]``, constant afterwards."""
    if t_ramp <= 0:
        raise InputError("ramp duration must be positive")
    t = np.asarray(t, dtype=float)
    ramp = (3.0 * t**2 / t_ramp**2 - 2.0 * t**3 / t_ramp**3) * q_max
    out = np.where(t < t_ramp, ramp, q_max)
    return out if out.ndim else float(out)


def opening_rate(w_new, w_prev, dt, dwdt_prev):
    """Second-order backward estimate of dw/dt at the new time level:
    2*(w_new - w_prev)/dt - dwdt_prev.  With ``dwdt_prev=None`` (cold start)
    the plain first-order difference is used."""
    if dt <= 0:
        raise InputError("time step must be positive")
    if dwdt_prev is None:
        return (w_new - w_prev) / dt
    return 2.0 * (w_new - w_prev) / dt - dwdt_prev


def solve_velocity(grid: FluidGrid, state_prev: FractureState, w_new, a_new,
                   dt, q0_new, leakoff: LeakoffModel, rheology: RheologyModel = None):
    """Mean fluid velocity on the grid at the new time level.

    Returns ``(v, dadt, dwdt)`` where ``dadt`` is the front speed implied by
    global mass balance (the finite tip limit of ``v``) and ``dwdt`` the
    stored opening rate for the next step.

    Raises a diagnostics error when the imposed inlet flux is negative or
    the opening vanishes away from the tip.
    """
    w_new = np.asarray(w_new, dtype=float)
    if dt <= 0:
        raise InputError("time step must be positive")
    if np.any(w_new[:-1] <= 0.0):
        raise NumericalError("opening vanished away from the tip; cannot form v = q/w")
    if q0_new < 0:
        raise NumericalError(f"negative inlet flux {q0_new}")

    t_new = state_prev.t + dt
    wdot = opening_rate(w_new, state_prev.w, dt, state_prev.dwdt)

    # the leak-off is a callable, so its integrals are taken on a dense
    # auxiliary grid: dadt below is a small residual of the global balance
    # and amplifies quadrature error of the totals
    if leakoff.kind == "none":
        tail_ql = np.zeros_like(w_new)
        int_ql = 0.0
    else:
        tail_ql, int_ql = grid.dense_integral_from_tip(leakoff.fn, t_new)

    int_w = grid.integral(w_new)
    int_wdot = grid.integral(wdot)
    dadt = (q0_new - a_new * (int_wdot + int_ql)) / int_w

    tail_wdot = grid.integral_from_tip(wdot)
    tail_w = grid.integral_from_tip(w_new)
    q = a_new * tail_wdot + dadt * (grid.xt * w_new + tail_w) + a_new * tail_ql

    v = np.empty_like(w_new)
    v[:-1] = q[:-1] / w_new[:-1]
    v[-1] = dadt
    return v, float(dadt), wdot


def _flow_factors(grid, w, rheology, dpdx_prev):
    """Per-node flux correction, using the previous iterate's pressure
    gradient for the generalized Newtonian case (unity at the tip)."""
    F = np.ones_like(w)
    if rheology is None or rheology.is_newtonian or dpdx_prev is None:
        return F
    inner = slice(0, len(w) - 1)
    F[inner] = flow_factor(np.maximum(w[inner], 1e-300), dpdx_prev[inner], rheology)
    return F


def pressure_from_velocity(grid: FluidGrid, w, v, a, rheology: RheologyModel,
                           sif_target, dpdx_prev=None):
    """Net pressure from the flux-gradient relation
    ``dp/dx = -12*eta_inf*v/(w^2*F)``.

    The gradient's simple pole at the tip is integrated analytically into a
    ``log(1-xt)`` term; the additive constant is fixed so that the mode-I
    stress intensity factor of the pressure equals ``sif_target``.  Gradients
    are formed per unit of the normalized coordinate, i.e. the physical
    gradient times the crack length ``a``.

    Returns ``(PressureField, dpdx)`` with ``dpdx`` the nodal gradient array
    reused to evaluate the flux correction in the next iterate.
    """
    w = np.asarray(w, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any(w[:-1] <= 0.0):
        raise NumericalError("opening vanished away from the tip; pressure gradient singular")
    eta = rheology.eta_inf
    F = _flow_factors(grid, w, rheology, dpdx_prev)

    xt = grid.xt
    dpdx = np.empty_like(w)
    dpdx[:-1] = -12.0 * eta * a * v[:-1] / (w[:-1] ** 2 * F[:-1])

    c1, _ = fit_tip_coefficients(grid, w)
    v_tip = v[-1]
    log_coef = 12.0 * eta * a * v_tip / c1**2

    # regular part of the gradient: remove the -log_coef/(1-xt) pole
    r = np.empty_like(w)
    r[:-1] = dpdx[:-1] + log_coef / (1.0 - xt[:-1])
    r[-1] = r[-2] + (r[-2] - r[-3]) / (xt[-2] - xt[-3]) * (xt[-1] - xt[-2])
    dpdx[-1] = -log_coef / (1.0 - xt[-2]) + r[-1]

    regular = grid.integral_from_inlet(r)
    field0 = PressureField(grid, regular, log_coef)
    shift = (sif_target - field0.sif(a)) / np.sqrt(np.pi * a)
    field = PressureField(grid, regular + shift, log_coef)
    return field, dpdx


def shear_traction(grid: FluidGrid, w, v, rheology: RheologyModel, dpdx_prev=None):
    """Wall shear traction ``tau = 6*eta_inf*v/(w*F)``.

    Near the front the traction grows like ``1/sqrt(1-xt)``; the returned
    field object carries that coefficient split out, and the nodal tip value
    follows the one-sided extrapolation of the regular part.
    """
    w = np.asarray(w, dtype=float)
    v = np.asarray(v, dtype=float)
    eta = rheology.eta_inf
    F = _flow_factors(grid, w, rheology, dpdx_prev)
    xt = grid.xt

    tau = np.empty_like(w)
    tau[:-1] = 6.0 * eta * v[:-1] / (w[:-1] * F[:-1])

    c1, _ = fit_tip_coefficients(grid, w)
    tip_coef = 6.0 * eta * v[-1] / c1
    regular = np.empty_like(w)
    regular[:-1] = tau[:-1] - tip_coef / np.sqrt(1.0 - xt[:-1])
    regular[-1] = regular[-2] + (regular[-2] - regular[-3]) / (xt[-2] - xt[-3]) * (
        xt[-1] - xt[-2]
    )
    return ShearField(grid, regular, tip_coef)

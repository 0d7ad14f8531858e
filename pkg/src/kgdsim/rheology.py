"""Generalized Newtonian rheology: apparent viscosity, channel velocity
profile and the dimensionless flow factor of the Poiseuille-type flux law.

The flux through a flat channel of width ``w`` under pressure gradient
``dpdx`` is written as ``q = -w**3/(12*eta_inf) * dpdx * F`` where ``F`` is a
dimensionless correction relative to a Newtonian fluid of viscosity
``eta_inf``.  For a Newtonian fluid ``F`` is identically one; for a
shear-thinning fluid ``F <= 1`` and approaches one as the wall shear stress
moves the whole channel into the high-shear-rate plateau.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError

__all__ = [
    "RheologyModel",
    "newtonian",
    "truncated_power_law",
    "hpam_model",
    "apparent_viscosity",
    "velocity_profile",
    "flow_factor",
]


@dataclass(frozen=True)
class RheologyModel:
    """Viscosity law, either Newtonian or a truncated power law.

    The truncated power law has two Newtonian plateaus ``eta0`` (below shear
    rate ``gamma1``) and ``eta_inf`` (above ``gamma2``) connected by a
    power-law core ``consistency * |rate|**(exponent-1)``.
    """

    kind: str  # "newtonian" | "truncated_power_law"
    eta0: float = 0.0
    eta_inf: float = 0.0
    consistency: float = 0.0
    exponent: float = 1.0
    gamma1: float = 0.0
    gamma2: float = np.inf

    # relative mismatch allowed between the power-law core and the plateaus
    # at the junction shear rates
    PLATEAU_TOL = 1e-2

    def __post_init__(self):
        if self.kind == "newtonian":
            if not (self.eta_inf > 0 and np.isfinite(self.eta_inf)):
                raise InputError("newtonian model requires viscosity > 0")
            return
        if self.kind != "truncated_power_law":
            raise InputError(f"unknown rheology kind {self.kind!r}")
        if not (self.eta0 > 0 and self.eta_inf > 0):
            raise InputError("plateau viscosities must be positive")
        if not (0 < self.exponent <= 1):
            raise InputError("power-law exponent must lie in (0, 1]")
        if not (0 < self.gamma1 < self.gamma2):
            raise InputError("plateau shear rates must satisfy 0 < gamma1 < gamma2")
        for g, eta in ((self.gamma1, self.eta0), (self.gamma2, self.eta_inf)):
            core = self.consistency * g ** (self.exponent - 1.0)
            if abs(core - eta) / eta > self.PLATEAU_TOL:
                raise InputError(
                    f"power-law core does not meet the plateau at rate {g}: "
                    f"{core} vs {eta}"
                )

    @property
    def is_newtonian(self) -> bool:
        return self.kind == "newtonian"

    @property
    def eta(self) -> float:
        """Viscosity used in the Newtonian reference flux (high-shear plateau)."""
        return self.eta_inf


def newtonian(eta: float) -> RheologyModel:
    return RheologyModel(kind="newtonian", eta_inf=eta)


def truncated_power_law(eta0, eta_inf, consistency, exponent, gamma1, gamma2):
    return RheologyModel(
        kind="truncated_power_law",
        eta0=eta0,
        eta_inf=eta_inf,
        consistency=consistency,
        exponent=exponent,
        gamma1=gamma1,
        gamma2=gamma2,
    )


def hpam_model() -> RheologyModel:
    """Truncated power-law fit for a 150 wppm partially hydrolyzed
    polyacrylamide solution."""
    return truncated_power_law(
        eta0=0.2668,
        eta_inf=4.1e-3,
        consistency=7.27e-2,
        exponent=0.476,
        gamma1=8.37e-2,
        gamma2=241.0,
    )


def apparent_viscosity(rate, model: RheologyModel):
    """Apparent viscosity at shear rate ``rate`` (scalar or array), Pa*s."""
    rate = np.asarray(rate, dtype=float)
    if not np.all(np.isfinite(rate)):
        raise InputError("shear rate must be finite")
    g = np.abs(rate)
    if model.is_newtonian:
        out = np.full_like(g, model.eta_inf)
        return out if out.ndim else float(out)
    out = np.where(
        g < model.gamma1,
        model.eta0,
        np.where(
            g > model.gamma2,
            model.eta_inf,
            model.consistency * np.maximum(g, 1e-300) ** (model.exponent - 1.0),
        ),
    )
    return out if out.ndim else float(out)


def _rate_from_stress(T, model: RheologyModel):
    """Invert the monotone wall-shear balance eta_a(rate)*rate = T.

    ``T`` is the local shear stress magnitude.  Piecewise closed form; the
    branch boundaries are taken on the power-law core so that the inversion
    is single valued (plateau continuity holds to the model tolerance).
    """
    T = np.asarray(T, dtype=float)
    if model.is_newtonian:
        return T / model.eta_inf
    t_lo = model.consistency * model.gamma1**model.exponent
    t_hi = model.consistency * model.gamma2**model.exponent
    return np.where(
        T <= t_lo,
        T / model.eta0,
        np.where(
            T >= t_hi,
            T / model.eta_inf,
            (np.maximum(T, 1e-300) / model.consistency) ** (1.0 / model.exponent),
        ),
    )


def velocity_profile(w, dpdx, model: RheologyModel, y):
    """Cross-channel velocity at distance ``y`` from the channel centerline.

    The channel occupies ``|y| <= w/2`` with no slip at the wall ``y = w/2``.
    The local shear stress is ``|dpdx|*y``; the shear rate follows from the
    viscosity law and is integrated from the wall toward the center.  The
    returned velocity is signed so that a negative pressure gradient drives
    flow in the positive direction.
    """
    if not (w > 0) or not np.isfinite(dpdx):
        raise InputError("velocity_profile requires w > 0 and finite dpdx")
    y = np.asarray(y, dtype=float)
    if np.any(y < 0) or np.any(y > w / 2 * (1 + 1e-12)):
        raise InputError("y must lie in [0, w/2]")
    G = abs(dpdx)
    if G == 0.0:
        out = np.zeros_like(y)
        return out if out.ndim else float(out)
    # V(y) = int_y^{w/2} rate(G*s) ds = (1/G) int_{Gy}^{Gw/2} rate(T) dT
    speed = (_stress_integral(G * w / 2, model) - _stress_integral(G * y, model)) / G
    out = -np.sign(dpdx) * speed
    return out if out.ndim else float(out)


def _stress_integral(T, model: RheologyModel):
    """Antiderivative I(T) = int_0^T rate(T') dT' of the inverse stress law."""
    T = np.asarray(T, dtype=float)
    if model.is_newtonian:
        return T**2 / (2 * model.eta_inf)
    n = model.exponent
    C = model.consistency
    t_lo = C * model.gamma1**n
    t_hi = C * model.gamma2**n

    def seg_lo(t):
        return t**2 / (2 * model.eta0)

    def seg_mid(t):
        # int (T/C)^{1/n} dT = C^{-1/n} T^{1+1/n} / (1 + 1/n)
        return (np.maximum(t, 0.0) / C) ** (1.0 / n) * t / (1.0 + 1.0 / n)

    def seg_hi(t):
        return t**2 / (2 * model.eta_inf)

    out = np.where(
        T <= t_lo,
        seg_lo(T),
        np.where(
            T <= t_hi,
            seg_lo(t_lo) + seg_mid(T) - seg_mid(t_lo),
            seg_lo(t_lo) + seg_mid(t_hi) - seg_mid(t_lo) + seg_hi(T) - seg_hi(t_hi),
        ),
    )
    return out


def _stress_moment(T, model: RheologyModel):
    """J(T) = int_0^T rate(T') T' dT', used by the closed-form flux."""
    T = np.asarray(T, dtype=float)
    if model.is_newtonian:
        return T**3 / (3 * model.eta_inf)
    n = model.exponent
    C = model.consistency
    t_lo = C * model.gamma1**n
    t_hi = C * model.gamma2**n

    def seg_lo(t):
        return t**3 / (3 * model.eta0)

    def seg_mid(t):
        # int T (T/C)^{1/n} dT = C^{-1/n} T^{2+1/n} / (2 + 1/n)
        return (np.maximum(t, 0.0) / C) ** (1.0 / n) * t**2 / (2.0 + 1.0 / n)

    def seg_hi(t):
        return t**3 / (3 * model.eta_inf)

    return np.where(
        T <= t_lo,
        seg_lo(T),
        np.where(
            T <= t_hi,
            seg_lo(t_lo) + seg_mid(T) - seg_mid(t_lo),
            seg_lo(t_lo) + seg_mid(t_hi) - seg_mid(t_lo) + seg_hi(T) - seg_hi(t_hi),
        ),
    )


def flow_factor(w, dpdx, model: RheologyModel):
    """Dimensionless flux correction F relative to the eta_inf Newtonian flux.

    Uses the exact identity int_0^{w/2} V dy = (1/G^2) int_0^{Tw} rate(T) T dT
    with Tw = G*w/2 (Fubini on the wall-integrated shear-rate profile), so the
    evaluation is closed form for the truncated power law.  ``dpdx == 0``
    returns 1 by continuity (the flux vanishes regardless).  Vectorized over
    ``w`` and ``dpdx``.
    """
    w_arr = np.asarray(w, dtype=float)
    g_arr = np.asarray(dpdx, dtype=float)
    if np.any(w_arr <= 0):
        raise InputError("flow_factor requires w > 0")
    if model.is_newtonian:
        out = np.ones(np.broadcast(w_arr, g_arr).shape)
        return out if out.ndim else 1.0
    G = np.abs(g_arr)
    Tw = G * w_arr / 2
    with np.errstate(divide="ignore", invalid="ignore"):
        F = 24 * model.eta_inf * _stress_moment(Tw, model) / (w_arr**3 * G**3)
    F = np.where(G > 0, F, 1.0)
    return F if F.ndim else float(F)

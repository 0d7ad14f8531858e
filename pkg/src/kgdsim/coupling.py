"""Outer algorithm: fixed-point iteration per time step over the sequence
velocity -> front position -> pressure/shear -> opening, with
Stefan-condition front tracing, volume-controlled time stepping and the
crack propagation criterion.

Per step the loop is seeded by an explicit predictor from the previous
state; each iteration solves the continuity equation for the velocity,
advances the front by the trapezoid rule on the tip speed, reconstructs the
pressure with its stress-intensity closure, and hands the loads to the
solid backend (boundary-integral elasticity or FEM) for the next opening.
Convergence is declared on the relative sup-norm change of the opening.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .elasticity import ElasticityParams, opening_from_pressure
from .errors import ConfigError, InputError, NonConvergenceError, PhysicalStateError
from .fem import CrackSolver, build_mesh, extract_opening, extract_sif
from .grids import FluidGrid
from .lubrication import (LeakoffModel, pressure_from_velocity, shear_traction,
                          solve_velocity)
from .materials import ConfiningStress, MaterialField
from .rheology import RheologyModel
from .state import FractureState, state_volume

logger = logging.getLogger(__name__)

__all__ = [
    "CouplingConfig",
    "trace_front",
    "next_time",
    "propagation_sif_target",
    "interpolate_between_grids",
    "run_time_step",
    "Stepper",
]


@dataclass
class CouplingConfig:
    """Parameters of the fixed-point loop and the solid backend selection."""

    tolerance: float = 1e-5          # relative sup-norm change of the opening
    volume_ratio: float = 1.05       # target crack-volume ratio per step
    max_iterations: int = 50
    backend: str = "bie"             # "bie" | "fem"
    mesh_variant: str = "finite"
    mesh_density: str = "coarse"
    shear_mode: str = "zero"         # "zero" | "coupled"
    alpha: float = 1.0               # toughness magnification divisor (<= 1)
    seed_length: float = 1e-3        # zero-crack bootstrap length (m)
    first_step: float = 1e-3         # zero-crack bootstrap time step (s)

    def __post_init__(self):
        if not (0 < self.tolerance < 1):
            raise ConfigError("coupling.tolerance: must lie in (0, 1)")
        if not (self.volume_ratio > 1):
            raise ConfigError("coupling.volume_ratio: must be > 1")
        if self.max_iterations < 1:
            raise ConfigError("coupling.max_iterations: must be >= 1")
        if self.backend not in ("bie", "fem"):
            raise ConfigError("coupling.backend: must be 'bie' or 'fem'")
        if self.shear_mode not in ("zero", "coupled"):
            raise ConfigError("coupling.shear_mode: must be 'zero' or 'coupled'")
        if not (0 < self.alpha <= 1):
            raise ConfigError("coupling.alpha: must lie in (0, 1]")


def trace_front(state_prev: FractureState, v_tip_new: float, dt: float) -> float:
    """Front position by the trapezoid rule on the Stefan condition
    da/dt = v(a, t)."""
    if v_tip_new < 0:
        raise PhysicalStateError(
            f"front recession (tip velocity {v_tip_new:.3e} m/s) is not supported"
        )
    return state_prev.a + 0.5 * dt * (state_prev.dadt + v_tip_new)


def tip_velocity(grid: FluidGrid, v, n_nodes=4) -> float:
    """One-sided polynomial extrapolation of the velocity over the nodes
    nearest the tip (the tip node itself excluded)."""
    idx = np.arange(len(v) - 1 - n_nodes, len(v) - 1)
    coeffs = np.polyfit(grid.xt[idx], v[idx], n_nodes - 1)
    return float(np.polyval(coeffs, 1.0))


def next_time(omega, config: CouplingConfig, influx_fn, leak_rate_fn, t, a):
    """Time instant at which the crack volume reaches ``volume_ratio * omega``.

    Solves ``(ratio-1)*omega = int_t^T q0 dt - int int qL`` for ``T``; with
    zero leak-off and influx constant over the interval the closed form is
    returned exactly.  ``leak_rate_fn(t)`` is the leak-off rate integrated
    over the current crack, or None.
    """
    if omega <= 0:
        raise InputError("next_time requires a positive crack volume; "
                         "zero-crack starts use the bootstrap step instead")
    target = (config.volume_ratio - 1.0) * omega
    q_now = float(influx_fn(t))
    if leak_rate_fn is None and q_now > 0:
        dt_guess = target / q_now
        if abs(float(influx_fn(t + dt_guess)) - q_now) <= 1e-14 * max(q_now, 1e-300):
            return t + dt_guess  # constant influx: closed form

    def deficit(T):
        balance = _integrate_rate(influx_fn, t, T)
        if leak_rate_fn is not None:
            balance -= _integrate_rate(leak_rate_fn, t, T)
        return balance - target

    hi = t + max(1e-9, 2.0 * target / max(q_now, 1e-12))
    while deficit(hi) < 0:
        hi = t + 2.0 * (hi - t)
        if hi - t > 1e12:
            raise NumericalErrorFromBalance()
    return brentq(deficit, t + 1e-15, hi, xtol=1e-14, rtol=1e-15)


class NumericalErrorFromBalance(InputError):
    def __init__(self):
        super().__init__("volume balance has no root: influx never catches the target")


def _integrate_rate(fn, t0, t1, n=64):
    pts, wts = np.polynomial.legendre.leggauss(n)
    tq = 0.5 * (t0 + t1) + 0.5 * (t1 - t0) * pts
    return float(0.5 * (t1 - t0) * np.sum(wts * np.asarray(fn(tq), dtype=float)))


def propagation_sif_target(toughness, shear_sif, poissons_ratio, alpha=1.0):
    """Positive root of the propagation condition
    ``K^2 + zeta*K*Kf = (Kc/alpha)^2`` with ``zeta = 4*(1 - nu)``.

    With the shear contribution off and ``alpha = 1`` this reduces to the
    standard toughness criterion ``K = Kc``.
    """
    if not (toughness > 0):
        raise InputError("toughness must be positive")
    if not (0 < alpha <= 1):
        raise InputError("alpha must lie in (0, 1]")
    zeta = 4.0 * (1.0 - poissons_ratio)
    rhs = (toughness / alpha) ** 2
    disc = (zeta * shear_sif) ** 2 + 4.0 * rhs
    root = 0.5 * (-zeta * shear_sif + np.sqrt(disc))
    if root <= 0:
        raise InputError("propagation condition has no positive root")
    return float(root)


def shear_sif(shear_field, a: float) -> float:
    """Shear stress intensity factor from the inverse-square-root tip
    coefficient of the wall traction: Kf = S*sqrt(2*pi*a)."""
    return float(shear_field.tip_coef) * np.sqrt(2.0 * np.pi * a)


def interpolate_between_grids(fem_xt, w_fem, grid: FluidGrid, n_fit=8,
                              fit_skip=2, tip_zone=3):
    """Opening mapped from the solid-solver crack-face nodes to the fluid grid.

    The square-root family ``c1*s + c2*s^2 + c3*s^3`` (s = sqrt(1-xt)) is
    fitted on near-tip nodes outside the singular element; inside the
    ``tip_zone`` nodes nearest the tip the profile is reconstructed from the
    fitted asymptote alone, elsewhere the fit remainder is added back via a
    spline in s.  Returns ``(values on the fluid grid, c1)``.
    """
    fem_xt = np.asarray(fem_xt, dtype=float)
    w_fem = np.asarray(w_fem, dtype=float)
    if abs(w_fem[-1]) > 1e-12 * max(np.max(np.abs(w_fem)), 1e-300):
        raise InputError("opening must vanish at the tip")
    s = np.sqrt(np.maximum(1.0 - fem_xt, 0.0))
    hi = len(fem_xt) - 1 - fit_skip
    lo = hi - n_fit
    if lo < 0:
        raise InputError("tip fit requires more crack-face nodes")
    A = np.column_stack([s[lo:hi], s[lo:hi] ** 2, s[lo:hi] ** 3])
    coef, *_ = np.linalg.lstsq(A, w_fem[lo:hi], rcond=None)

    def asym(ss):
        return coef[0] * ss + coef[1] * ss**2 + coef[2] * ss**3

    cut = len(fem_xt) - 1 - tip_zone
    rem = w_fem[: cut + 1] - asym(s[: cut + 1])
    spline = CubicSpline(s[: cut + 1][::-1], rem[: cut + 1][::-1])
    sf = np.sqrt(np.maximum(1.0 - grid.xt, 0.0))
    out = asym(sf)
    mask = grid.xt <= fem_xt[cut]
    out[mask] += spline(sf[mask])
    out[-1] = 0.0
    return out, float(coef[0])


class Stepper:
    """Advances the coupled state one volume-controlled step at a time."""

    def __init__(self, grid: FluidGrid, rheology: RheologyModel,
                 material: MaterialField, config: CouplingConfig,
                 influx_fn, leakoff: LeakoffModel,
                 confine: ConfiningStress = None, sif_target_fn=None):
        self.grid = grid
        self.rheology = rheology
        self.material = material
        self.config = config
        self.influx_fn = influx_fn
        self.leakoff = leakoff
        self.sif_target_fn = sif_target_fn
        if config.backend == "fem":
            mesh = build_mesh(config.mesh_variant, config.mesh_density)
            self.solver = CrackSolver(mesh, material, confine)
        else:
            if not material.is_homogeneous:
                raise ConfigError(
                    "coupling.backend: layered materials require the FEM backend"
                )
            layer = material.layers[0]
            self.params = ElasticityParams(layer.youngs_modulus, layer.poissons_ratio)

    # -- propagation target ---------------------------------------------------

    def _sif_target(self, t, a, shear_field):
        if self.sif_target_fn is not None:
            return float(self.sif_target_fn(t))
        layer = self.material.layer_at(a)
        kf = 0.0
        if self.config.shear_mode == "coupled" and shear_field is not None:
            kf = shear_sif(shear_field, a)
        return propagation_sif_target(layer.toughness, kf, layer.poissons_ratio,
                                      self.config.alpha)

    # -- opening backends -------------------------------------------------------

    def _opening_from_backend(self, a, pressure_field, shear_field):
        use_shear = self.config.shear_mode == "coupled"
        if self.config.backend == "bie":
            w = opening_from_pressure(
                pressure_field, self.params, a, self.grid.xt,
                log_coef=pressure_field.log_coef, deep_tip_samples=False)
            return np.maximum(w, 0.0), None
        sol = self.solver.solve(a, pressure_field,
                                shear_field if use_shear else None)
        w_face = extract_opening(sol)
        w, _ = interpolate_between_grids(sol.mesh.crack_xt, w_face, self.grid)
        return np.maximum(w, 0.0), sol

    # -- one time step ----------------------------------------------------------

    def leak_rate_fn(self, a):
        if self.leakoff.kind == "none":
            return None

        def rate(t):
            t_arr = np.atleast_1d(np.asarray(t, dtype=float))
            out = [a * self.grid.dense_integral_from_tip(self.leakoff.fn, tv)[1]
                   for tv in t_arr]
            return out[0] if np.ndim(t) == 0 else np.asarray(out)

        return rate

    def advance(self, state: FractureState, dt=None) -> FractureState:
        cfg = self.config
        if dt is None:
            t_new = next_time(state.omega, cfg, self.influx_fn,
                              self.leak_rate_fn(state.a), state.t, state.a)
            dt = t_new - state.t
        else:
            t_new = state.t + dt
        q0_new = float(self.influx_fn(t_new))

        # predictor seed from the previous state
        w_seed = state.w + (dt * state.dwdt if state.dwdt is not None else 0.0)
        w_seed = np.maximum(w_seed, 0.0)
        w_seed[-1] = 0.0
        a_seed = state.a + dt * state.dadt

        # one pass of the fixed-point map over the combined unknown
        # z = [opening; front position * weight]; the weight puts the front
        # coordinate on the opening scale so the mixing treats them evenly
        scale_a = max(np.max(state.w), 1e-300) / state.a
        ctx = {"dpdx": state.dpdx, "fields": None}

        def sweep(z):
            w_j = np.maximum(z[:-1], 0.0)
            w_j[-1] = 0.0
            a_j = float(np.clip(z[-1] / scale_a, 0.3 * state.a, 5.0 * state.a))
            v, dadt_new, wdot = solve_velocity(
                self.grid, state, w_j, a_j, dt, q0_new, self.leakoff)
            # the analytic tip limit of v (global mass balance) anchors the
            # front tracing; transient iterates may undershoot, and only a
            # converged recession is a physical-state error (checked below)
            a_new = trace_front(state, max(dadt_new, 0.0), dt)
            v_for_p = v.copy()
            v_for_p[-1] = max(dadt_new, 0.0)
            shear = shear_traction(self.grid, w_j, v_for_p, self.rheology, ctx["dpdx"])
            k_target = self._sif_target(t_new, a_j, shear)
            pressure, dpdx = pressure_from_velocity(
                self.grid, w_j, v_for_p, a_j, self.rheology, k_target, ctx["dpdx"])
            w_new, _ = self._opening_from_backend(a_j, pressure, shear)
            ctx["dpdx"] = dpdx
            ctx["fields"] = (v, dadt_new, wdot, pressure, shear, a_new)
            return np.concatenate([w_new, [a_new * scale_a]])

        z = np.concatenate([w_seed, [a_seed * scale_a]])
        history_z, history_r = [], []
        residual = np.inf
        it = 0
        for it in range(1, cfg.max_iterations + 1):
            z_new = sweep(z)
            r = z_new - z
            residual = float(np.max(np.abs(r[:-1])) / max(np.max(z_new[:-1]), 1e-300))
            if residual <= cfg.tolerance:
                z = z_new
                break
            # Anderson mixing (depth 3) over the sweep history; the first
            # pass is damped
            history_z.append(z.copy())
            history_r.append(r.copy())
            if len(history_z) > 3:
                history_z.pop(0)
                history_r.pop(0)
            if len(history_z) == 1:
                z = z + 0.3 * r
            else:
                dR = np.array([history_r[i + 1] - history_r[i]
                               for i in range(len(history_r) - 1)]).T
                dZ = np.array([history_z[i + 1] - history_z[i]
                               for i in range(len(history_z) - 1)]).T
                gamma, *_ = np.linalg.lstsq(dR, history_r[-1], rcond=None)
                z = z + r - (dZ + dR) @ gamma
            z[:-1] = np.maximum(z[:-1], 0.0)
            z[len(z) - 2] = 0.0
        else:
            raise NonConvergenceError(
                f"coupling loop did not converge (residual {residual:.3e})",
                residual=residual, iterations=cfg.max_iterations)

        v, dadt_new, wdot, pressure, shear, a_j = ctx["fields"]
        w_j = np.maximum(z[:-1], 0.0)
        w_j[-1] = 0.0
        if dadt_new < 0:
            trace_front(state, dadt_new, dt)  # raises the recession error
        omega = state_volume(self.grid, a_j, w_j)
        new = FractureState(
            t=t_new, a=a_j, w=w_j,
            p=pressure.nodal(), v=v, tau=shear.nodal(),
            dwdt=wdot, dadt=2.0 * (a_j - state.a) / dt - state.dadt,
            omega=omega, q0=q0_new,
            pressure=pressure, shear=shear, dpdx=ctx["dpdx"],
            iterations=it, residual=residual,
        )
        logger.info(
            "step t=%.6g a=%.6g w0=%.4g p0=%.4g vtip=%.4g iters=%d res=%.2e",
            new.t, new.a, new.w[0], new.p[0], new.dadt, it, residual)
        return new


def run_time_step(state: FractureState, stepper: Stepper, dt=None) -> FractureState:
    """One converged time step (see :class:`Stepper`)."""
    return stepper.advance(state, dt=dt)

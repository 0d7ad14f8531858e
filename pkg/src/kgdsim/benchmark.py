"""Closed-form self-similar benchmark for the plane-strain fracture problem.

The benchmark prescribes a crack opening built from four basis profiles with
square-root tip behavior (toughness-regime asymptotics).  The corresponding
fluid pressure follows from the plane-strain elasticity operator in closed
form, the flux and velocity from the Newtonian Poiseuille law, and the
leak-off is defined as the residual that closes the self-similar continuity
equation, so the set of fields is an exact solution by construction.

All fields scale exponentially in time:

    a(t) = L0**1.5 * exp(beta*t)         crack half-length
    w    = sqrt(L0) * exp(beta*t) * w^(xt)
    p    = p^(xt)                         (time invariant)
    q    = exp(2*beta*t) * q^(xt)
    v    = exp(beta*t) / sqrt(L0) * v^(xt)
    qL   = beta*exp(beta*t)*sqrt(L0) * qL^(xt)
    K    = L0**0.25 * exp(beta*t/2) * K^

with the dimensionless length scale ``L0`` fixed by the front condition
``v^(1) = beta * L0**2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError

__all__ = ["SelfSimilarBenchmark", "BenchmarkFields", "error_metrics"]

# coefficients of the published verification case
DEFAULT_W_COEFFS = (5.67e-4, 2.05e-4, 2.0e-5, 7.31e-4)
DEFAULT_BETA = 1.0 / 3.0


def _s(xt):
    return np.sqrt(np.maximum(1.0 - np.asarray(xt, dtype=float) ** 2, 0.0))


def _atanh_s(s):
    """arctanh(s) guarded against s == 1 rounding."""
    return np.arctanh(np.minimum(s, 1.0 - 1e-16))


def opening_basis(xt):
    """The four opening basis profiles, stacked as rows.

    Rows: sqrt(1-xt^2), 1-xt^2, (1-xt^2)^1.5*log(1-xt^2) and the profile
    2*sqrt(1-xt^2) + xt^2*log|(1-sqrt(1-xt^2))/(1+sqrt(1-xt^2))|, all
    evaluated in forms stable near the tip.
    """
    xt = np.asarray(xt, dtype=float)
    s = _s(xt)
    s2 = s * s
    with np.errstate(divide="ignore", invalid="ignore"):
        b2 = np.where(s > 0, 2.0 * s2 * s * np.log(np.maximum(s, 1e-300)), 0.0)
    # 2s - 2(1-s^2) atanh(s), series for small s to avoid cancellation
    small = s < 1e-3
    b3_exact = 2.0 * s - 2.0 * (1.0 - s2) * _atanh_s(s)
    b3_series = (4.0 / 3.0) * s**3 + (4.0 / 15.0) * s**5 + (4.0 / 35.0) * s**7
    b3 = np.where(small, b3_series, b3_exact)
    return np.stack([s, s2, b2, b3])


def opening_basis_deriv(xt):
    """d/dxt of the opening basis profiles (stable forms; singular ~1/s)."""
    xt = np.asarray(xt, dtype=float)
    s = _s(xt)
    s_safe = np.maximum(s, 1e-300)
    d0 = -xt / s_safe
    d1 = -2.0 * xt
    d2 = -xt * s * (6.0 * np.log(s_safe) + 2.0)
    d3 = -4.0 * xt * _atanh_s(s)
    return np.stack([d0, d1, d2, d3])


def pressure_basis(xt, gain):
    """Pressure images of the opening basis under the elasticity operator,
    scaled by ``gain = k2 / L0``."""
    xt = np.asarray(xt, dtype=float)
    s = _s(xt)
    p0 = (np.pi / 2.0) * np.ones_like(xt)
    p1 = 2.0 * (1.0 - xt * np.arctanh(np.minimum(xt, 1.0 - 1e-16)))
    p2 = (np.pi / 2.0) * (
        1.0
        - 2.0 * xt**2
        + 1.5 * (1.0 - 4.0 * xt * s * np.arcsin(xt) + 4.0 * np.log(2.0) * xt**2 - np.log(4.0))
    )
    p3 = 2.0 * np.pi - np.pi**2 * xt
    return gain * np.stack([p0, p1, p2, p3])


def pressure_basis_deriv(xt, gain):
    xt = np.asarray(xt, dtype=float)
    s = _s(xt)
    s_safe = np.maximum(s, 1e-300)
    d0 = np.zeros_like(xt)
    d1 = 2.0 * (-np.arctanh(np.minimum(xt, 1.0 - 1e-16)) - xt / np.maximum(1.0 - xt**2, 1e-300))
    d2 = (np.pi / 2.0) * (
        -10.0 * xt + 12.0 * np.log(2.0) * xt - 6.0 * (1.0 - 2.0 * xt**2) * np.arcsin(xt) / s_safe
    )
    d3 = -np.pi**2 * np.ones_like(xt)
    return gain * np.stack([d0, d1, d2, d3])


def pressure_basis_deriv2(xt, gain):
    xt = np.asarray(xt, dtype=float)
    s = _s(xt)
    s_safe = np.maximum(s, 1e-300)
    dd0 = np.zeros_like(xt)
    dd1 = -4.0 / np.maximum((1.0 - xt**2) ** 2, 1e-300)
    dd2 = (np.pi / 2.0) * (
        -10.0
        + 12.0 * np.log(2.0)
        - 6.0
        * (
            -4.0 * xt * np.arcsin(xt) / s_safe
            + (1.0 - 2.0 * xt**2) * xt * np.arcsin(xt) / s_safe**3
            + (1.0 - 2.0 * xt**2) / s_safe**2
        )
    )
    dd3 = np.zeros_like(xt)
    return gain * np.stack([dd0, dd1, dd2, dd3])


@dataclass(frozen=True)
class BenchmarkFields:
    """Physical fields of the benchmark at one time instant."""

    t: float
    length: float
    tip_speed: float
    sif: float
    inlet_flux: float

    def __post_init__(self):
        pass


class SelfSimilarBenchmark:
    """Evaluator of the self-similar benchmark and its time-dependent form.

    Parameters
    ----------
    youngs_modulus, poissons_ratio : elastic constants of the solid.
    viscosity : constant (Newtonian) fluid viscosity.
    w_coeffs : the four opening-profile multipliers.
    growth_rate : exponential time coefficient ``beta`` [1/s].
    """

    def __init__(
        self,
        youngs_modulus=16.2e9,
        poissons_ratio=0.3,
        viscosity=1e-3,
        w_coeffs=DEFAULT_W_COEFFS,
        growth_rate=DEFAULT_BETA,
    ):
        if growth_rate <= 0:
            raise InputError("growth rate must be positive")
        self.E = float(youngs_modulus)
        self.nu = float(poissons_ratio)
        self.eta = float(viscosity)
        self.w_coeffs = np.asarray(w_coeffs, dtype=float)
        if self.w_coeffs.shape != (4,):
            raise InputError("w_coeffs must have four entries")
        self.beta = float(growth_rate)
        self.k2 = self.E / (2.0 * np.pi * (1.0 - self.nu**2))
        self.mobility = 12.0 * self.eta
        # front condition v^(1) = beta*L0^2 with v^(1) = 2 k2 w0^2 w1/(L0 M)
        c0, c1 = self.w_coeffs[0], self.w_coeffs[1]
        self.length_scale = (2.0 * self.k2 * c0**2 * c1 / (self.beta * self.mobility)) ** (1.0 / 3.0)
        self.tip_velocity = self.beta * self.length_scale**2
        self.inlet_flux_coeff = float(self.flux_velocity(0.0)[0])
        # sqrt(1-xt) tip coefficient of the opening is sqrt(2)*w_coeffs[0]
        eprime = self.E / (1.0 - self.nu**2)
        self.sif_coeff = (eprime / 4.0) * np.sqrt(np.pi) * c0 / self.length_scale**0.25

    # -- self-similar profiles ------------------------------------------------

    def _check_range(self, xt, open_end=False):
        xt = np.asarray(xt, dtype=float)
        hi_ok = np.all(xt < 1.0) if open_end else np.all(xt <= 1.0)
        if np.any(xt < 0.0) or not hi_ok:
            raise InputError("xt must lie in [0, 1]" + (")" if open_end else "]"))
        return xt

    def opening(self, xt):
        """Dimensionless opening profile."""
        xt = self._check_range(xt)
        return np.tensordot(self.w_coeffs, opening_basis(xt), axes=1)

    def opening_deriv(self, xt):
        xt = np.asarray(xt, dtype=float)
        return np.tensordot(self.w_coeffs, opening_basis_deriv(xt), axes=1)

    def pressure(self, xt):
        """Dimensionless net pressure profile (log-singular at the tip)."""
        xt = self._check_range(xt, open_end=True)
        return np.tensordot(self.w_coeffs, pressure_basis(xt, self.k2 / self.length_scale), axes=1)

    def pressure_deriv(self, xt):
        xt = np.asarray(xt, dtype=float)
        return np.tensordot(self.w_coeffs, pressure_basis_deriv(xt, self.k2 / self.length_scale), axes=1)

    def pressure_deriv2(self, xt):
        xt = np.asarray(xt, dtype=float)
        return np.tensordot(self.w_coeffs, pressure_basis_deriv2(xt, self.k2 / self.length_scale), axes=1)

    def flux_velocity(self, xt):
        """Dimensionless flux and mean velocity ``(q^, v^)``.

        The velocity is evaluated in a form stable through the tip, where it
        tends to the finite front speed ``beta * L0**2``.
        """
        xt = np.atleast_1d(np.asarray(xt, dtype=float))
        w = self.opening(xt)
        # v = -w^2 p'/M: the 1/(1-xt^2) part of the pressure slope is written
        # against (w/s)^2 so the product stays finite through the tip
        s = _s(xt)
        w_over_s = self._opening_over_s(xt, s)
        gain = self.k2 / self.length_scale
        c = self.w_coeffs
        regular = (
            c[1] * 2.0 * (-np.arctanh(np.minimum(xt, 1 - 1e-16))) * w**2
            + c[2] * (np.pi / 2.0) * (-10.0 * xt + 12.0 * np.log(2.0) * xt) * w**2
            + c[3] * (-np.pi**2) * w**2
        )
        singular = (
            -c[1] * 2.0 * xt * w_over_s**2
            - c[2] * 3.0 * np.pi * (1.0 - 2.0 * xt**2) * np.arcsin(xt) * s * w_over_s**2
        )
        v = -(gain / self.mobility) * (regular + singular)
        q = w * v
        return np.stack([q, v])

    def _opening_over_s(self, xt, s):
        """w^(xt)/sqrt(1-xt^2), finite at the tip."""
        s_safe = np.maximum(s, 1e-300)
        basis = opening_basis(xt)
        over = np.stack(
            [
                np.ones_like(s),
                s,
                basis[2] / s_safe,
                basis[3] / s_safe,
            ]
        )
        # series limits of the last two rows at the tip
        over[2] = np.where(s > 0, over[2], 0.0)
        over[3] = np.where(s > 0, over[3], 0.0)
        return np.tensordot(self.w_coeffs, over, axes=1)

    def leakoff(self, xt):
        """Dimensionless leak-off closing the self-similar continuity equation.

        Evaluated from the identity qL = -w + w'*(xt - 3 v/v0) + w^3 p''/(M v0)
        whose singular parts cancel; the exact tip node is returned as the
        one-sided limit value.
        """
        xt = np.asarray(xt, dtype=float)
        scalar = xt.ndim == 0
        xt = np.atleast_1d(xt)
        at_tip = xt >= 1.0 - 1e-12
        x_in = np.where(at_tip, 1.0 - 1e-7, xt)
        w = self.opening(x_in)
        dw = self.opening_deriv(x_in)
        qv = self.flux_velocity(x_in)
        v = qv[1]
        v0 = self.tip_velocity
        ddp = self.pressure_deriv2(x_in)
        out = -w + dw * (x_in - 3.0 * v / v0) + w**3 * ddp / (self.mobility * v0)
        out = np.asarray(out)
        return float(out[0]) if scalar else out

    def continuity_residual(self, xt):
        """Residual of the self-similar continuity equation with the derived
        leak-off; identically zero up to rounding."""
        xt = np.asarray(xt, dtype=float)
        w = self.opening(xt)
        dw = self.opening_deriv(xt)
        dq = self._flux_deriv(xt)
        return w - xt * dw + dq / (self.beta * self.length_scale**2) + self.leakoff(xt)

    def _flux_deriv(self, xt):
        w = self.opening(xt)
        dw = self.opening_deriv(xt)
        dp = self.pressure_deriv(xt)
        ddp = self.pressure_deriv2(xt)
        return -(3.0 * w**2 * dw * dp + w**3 * ddp) / self.mobility

    # -- time-dependent form ---------------------------------------------------

    def length(self, t):
        return self.length_scale**1.5 * np.exp(self.beta * np.asarray(t, dtype=float))

    def tip_speed(self, t):
        return self.beta * self.length(t)

    def sif(self, t):
        return self.sif_coeff * np.exp(self.beta * np.asarray(t, dtype=float) / 2.0)

    def inlet_flux(self, t):
        return self.inlet_flux_coeff * np.exp(2.0 * self.beta * np.asarray(t, dtype=float))

    def opening_at(self, xt, t):
        return np.sqrt(self.length_scale) * np.exp(self.beta * t) * self.opening(xt)

    def opening_rate_at(self, xt, t):
        """Time derivative of the opening at fixed normalized coordinate."""
        return self.beta * self.opening_at(xt, t)

    def pressure_at(self, xt, t):
        return self.pressure(xt)

    def velocity_at(self, xt, t):
        return np.exp(self.beta * t) / np.sqrt(self.length_scale) * self.flux_velocity(xt)[1]

    def flux_at(self, xt, t):
        return np.exp(2.0 * self.beta * t) * self.flux_velocity(xt)[0]

    def leakoff_at(self, xt, t):
        return self.beta * np.exp(self.beta * t) * np.sqrt(self.length_scale) * self.leakoff(xt)

    def shear_at(self, xt, t):
        """Wall shear traction -w/2 * dp/dx (diverges like 1/sqrt at the tip)."""
        a = self.length(t)
        w = self.opening_at(xt, t)
        dpdx = self.pressure_deriv(xt) / a
        return -0.5 * w * dpdx

    @property
    def pressure_log_coef(self):
        """Coefficient of the log(1-xt) tip term of the pressure profile."""
        return self.w_coeffs[1] * self.k2 / self.length_scale

    def pressure_split(self):
        """The pressure as a tip-split load object (regular part callable
        plus the logarithmic coefficient), directly usable as a crack-face
        load of the solid solvers."""
        coef = self.pressure_log_coef

        class _Split:
            log_coef = coef
            regular_at = staticmethod(
                lambda xt, b=self: b.pressure(np.minimum(xt, 1.0 - 1e-12))
                - coef * np.log1p(-np.minimum(np.asarray(xt, dtype=float), 1.0 - 1e-12))
            )

        return _Split()

    def fields_at(self, t):
        return BenchmarkFields(
            t=float(t),
            length=float(self.length(t)),
            tip_speed=float(self.tip_speed(t)),
            sif=float(self.sif(t)),
            inlet_flux=float(self.inlet_flux(t)),
        )


def error_metrics(times, lengths, tip_speeds, xt, openings, velocities, bench):
    """Relative errors of a simulated history against the benchmark.

    Parameters
    ----------
    times, lengths, tip_speeds : per-step scalars of the simulation.
    xt : shared normalized grid of the profiles.
    openings, velocities : arrays of shape (n_steps, n_nodes).
    bench : SelfSimilarBenchmark.

    Returns a dict with pointwise surfaces ``delta_w``/``delta_v`` (the tip
    node, where the opening vanishes, is excluded), the per-step maxima and
    crack-length averages, and the scalar series ``delta_length`` and
    ``delta_tip_speed``.
    """
    times = np.asarray(times, dtype=float)
    if times.size == 0:
        raise InputError("empty time range")
    lengths = np.asarray(lengths, dtype=float)
    tip_speeds = np.asarray(tip_speeds, dtype=float)
    xt = np.asarray(xt, dtype=float)
    openings = np.asarray(openings, dtype=float)
    velocities = np.asarray(velocities, dtype=float)

    a_b = bench.length(times)
    v0_b = bench.tip_speed(times)
    delta_length = np.abs(lengths - a_b) / a_b
    delta_tip_speed = np.abs(tip_speeds - v0_b) / v0_b

    w_hat = bench.opening(xt[:-1])
    v_hat = bench.flux_velocity(xt)[1]
    scale_w = np.sqrt(bench.length_scale) * np.exp(bench.beta * times)[:, None]
    scale_v = np.exp(bench.beta * times)[:, None] / np.sqrt(bench.length_scale)
    delta_w = np.abs(openings[:, :-1] - scale_w * w_hat) / (scale_w * w_hat)
    delta_v = np.abs(velocities - scale_v * v_hat) / np.abs(scale_v * v_hat)

    # crack-length average: a^-1 int delta dx = int delta dxt
    avg_w = np.trapezoid(delta_w, xt[:-1], axis=1)
    return {
        "delta_w": delta_w,
        "delta_v": delta_v,
        "delta_w_max": delta_w.max(axis=1),
        "delta_w_avg": avg_w,
        "delta_v_max": delta_v.max(axis=1),
        "delta_length": delta_length,
        "delta_tip_speed": delta_tip_speed,
    }

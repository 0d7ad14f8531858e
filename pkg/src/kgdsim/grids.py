"""Fluid-solver grid on the normalized crack coordinate and numerical
utilities that treat the square-root tip behavior analytically.

All fields of the moving-boundary problem live on a fixed grid of the scaled
coordinate ``xt = x / a(t)`` in [0, 1].  Near the tip the opening behaves like
``sqrt(1 - xt)``; quadrature and interpolation below split that factor out so
the grid resolution is not wasted on resolving the singularity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import InputError

__all__ = [
    "FluidGrid",
    "fit_tip_coefficients",
    "TipSplitProfile",
]


@dataclass(frozen=True)
class FluidGrid:
    """Nodes of the normalized coordinate, densified at inlet and tip.

    The default distribution ``xt_k = (1 - cos(pi k/(N-1)))/2`` clusters
    nodes quadratically at both ends, which maps the tip neighborhood to a
    uniform grid in the auxiliary variable ``u = sqrt(1 - xt)``.
    """

    n: int = 100
    xt: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.n < 50:
            raise InputError("fluid grid requires at least 50 nodes")
        if self.xt is None:
            k = np.arange(self.n)
            nodes = 0.5 * (1.0 - np.cos(np.pi * k / (self.n - 1)))
            nodes[0], nodes[-1] = 0.0, 1.0
            object.__setattr__(self, "xt", nodes)
        else:
            xt = np.asarray(self.xt, dtype=float)
            if xt.ndim != 1 or len(xt) != self.n:
                raise InputError("xt must be a 1-d array of length n")
            if xt[0] != 0.0 or xt[-1] != 1.0 or np.any(np.diff(xt) <= 0):
                raise InputError("xt must increase strictly from 0 to 1")
            object.__setattr__(self, "xt", xt)
        # u = sqrt(1 - xt), ascending from the tip
        object.__setattr__(self, "_u", np.sqrt(np.maximum(1.0 - self.xt[::-1], 0.0)))

    @property
    def u(self) -> np.ndarray:
        """sqrt(1 - xt) in ascending order (tip first)."""
        return self._u

    # -- quadrature ---------------------------------------------------------

    def _u_spline(self, f):
        f = np.asarray(f, dtype=float)
        if f.shape != self.xt.shape:
            raise InputError("nodal array does not match the grid")
        # integrand of int f dxt rewritten as int 2 u f du from the tip
        return CubicSpline(self._u, 2.0 * self._u * f[::-1])

    def integral_from_tip(self, f) -> np.ndarray:
        """Cumulative integral I_k = int_{xt_k}^{1} f dxt for every node.

        Exact for integrands with a sqrt(1-xt) endpoint factor: the change of
        variable u = sqrt(1-xt) makes the transformed integrand smooth.
        """
        sp = self._u_spline(f)
        anti = sp.antiderivative()
        vals = anti(self._u) - anti(0.0)
        return vals[::-1]

    def integral(self, f) -> float:
        """int_0^1 f dxt with the tip handled analytically."""
        return float(self.integral_from_tip(f)[0])

    def integral_from_inlet(self, f) -> np.ndarray:
        """Cumulative integral int_0^{xt_k} f dxt for every node."""
        from_tip = self.integral_from_tip(f)
        return from_tip[0] - from_tip

    def dense_integral_from_tip(self, fn, t=None, n_gauss=8):
        """Like :meth:`integral_from_tip` but for a callable, for integrands
        known in closed form (leak-off): composite Gauss over the grid's own
        u-intervals, which cluster at both weakly singular ends.
        Returns (tail integrals at the nodes, total integral)."""
        pts, wts = np.polynomial.legendre.leggauss(n_gauss)
        u = self._u
        lo, hi = u[:-1], u[1:]
        mid = 0.5 * (lo + hi)[:, None]
        half = 0.5 * (hi - lo)[:, None]
        uq = mid + half * pts[None, :]
        xq = 1.0 - uq**2
        vals = fn(xq, t) if t is not None else fn(xq)
        pieces = np.sum(wts[None, :] * 2.0 * uq * np.asarray(vals, dtype=float), axis=1)
        pieces *= half[:, 0]
        anti = np.concatenate([[0.0], np.cumsum(pieces)])
        return anti[::-1], float(anti[-1])


def fit_tip_coefficients(grid: FluidGrid, f, n_nodes=10, n_terms=3):
    """Least-squares fit of the tip behavior sum_k c_k*(1-xt)^(k/2), k=1..n_terms.

    Uses the ``n_nodes`` nodes nearest the tip, excluding the tip node itself
    (where the profile vanishes identically).  Returns ``(c1, c2)``, the
    square-root and linear coefficients; the half-integer tail terms are
    fitted only to reduce the truncation bias on ``c1``.
    """
    f = np.asarray(f, dtype=float)
    idx = slice(len(f) - 1 - n_nodes, len(f) - 1)
    s = np.sqrt(1.0 - grid.xt[idx])
    y = f[idx]
    if len(y) < max(3, n_terms):
        raise InputError("tip fit requires at least 3 usable nodes")
    A = np.column_stack([s**k for k in range(1, n_terms + 1)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    c2 = float(coef[1]) if n_terms >= 2 else 0.0
    return float(coef[0]), c2


class TipSplitProfile:
    """Interpolant of a nodal profile whose tip behavior is split analytically.

    The profile is represented as ``c1*sqrt(1-xt) + c2*(1-xt) + r(xt)`` where
    the remainder ``r`` is interpolated with a cubic spline in the variable
    ``u = sqrt(1-xt)`` (smooth through the tip).  Evaluations outside [0, 1]
    return zero, corresponding to material ahead of the front.
    """

    def __init__(self, grid: FluidGrid, values, n_fit=8):
        values = np.asarray(values, dtype=float)
        if values.shape != grid.xt.shape:
            raise InputError("nodal array does not match the grid")
        self.grid = grid
        self.c1, self.c2 = fit_tip_coefficients(grid, values, n_nodes=n_fit)
        s = np.sqrt(1.0 - grid.xt)
        rem = values - self.c1 * s - self.c2 * s**2
        self._rem_spline = CubicSpline(grid.u, rem[::-1])

    def __call__(self, xt):
        xt = np.asarray(xt, dtype=float)
        inside = (xt >= 0.0) & (xt <= 1.0)
        u = np.sqrt(np.maximum(1.0 - np.clip(xt, 0.0, 1.0), 0.0))
        vals = self.c1 * u + self.c2 * u**2 + self._rem_spline(u)
        out = np.where(inside, vals, 0.0)
        return out if out.ndim else float(out)

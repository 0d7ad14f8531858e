"""Value objects describing the coupled fracture state on the fluid grid."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import CubicSpline

from .elasticity import sif_from_pressure
from .grids import FluidGrid

__all__ = ["PressureField", "ShearField", "FractureState"]


class PressureField:
    """Net pressure with its logarithmic tip term split out analytically:

        p(xt) = regular(xt) + log_coef * log(1 - xt).

    The nodal array convention stores the regular part alone at the tip node
    (the full field diverges to -inf there).
    """

    def __init__(self, grid: FluidGrid, regular, log_coef=0.0):
        self.grid = grid
        self.regular = np.asarray(regular, dtype=float)
        self.log_coef = float(log_coef)
        self._spline = CubicSpline(grid.xt, self.regular)

    def regular_at(self, xt):
        return self._spline(np.clip(xt, 0.0, 1.0))

    def __call__(self, xt):
        xt = np.asarray(xt, dtype=float)
        log_part = self.log_coef * np.log1p(-np.minimum(xt, 1.0 - 1e-300))
        return self.regular_at(xt) + log_part

    def nodal(self) -> np.ndarray:
        out = self(self.grid.xt[:-1])
        return np.concatenate([out, [self.regular[-1]]])

    def sif(self, a: float) -> float:
        return sif_from_pressure(self, a, log_coef=self.log_coef)


class ShearField:
    """Wall shear traction with its inverse-square-root tip term split out:

        tau(xt) = regular(xt) + tip_coef / sqrt(1 - xt).

    Nodal values store the regular part alone at the tip node.
    """

    def __init__(self, grid: FluidGrid, regular, tip_coef=0.0):
        self.grid = grid
        self.regular = np.asarray(regular, dtype=float)
        self.tip_coef = float(tip_coef)
        self._spline = CubicSpline(grid.xt, self.regular)

    def regular_at(self, xt):
        return self._spline(np.clip(xt, 0.0, 1.0))

    def __call__(self, xt):
        xt = np.asarray(xt, dtype=float)
        sing = self.tip_coef / np.sqrt(np.maximum(1.0 - xt, 1e-300))
        return self.regular_at(xt) + sing

    def nodal(self) -> np.ndarray:
        out = self(self.grid.xt[:-1])
        return np.concatenate([out, [self.regular[-1]]])


@dataclass
class FractureState:
    """Coupled solution at one time instant on the fluid grid.

    ``w``, ``p``, ``v``, ``tau`` are nodal arrays on the normalized
    coordinate; ``dwdt`` is the stored opening rate at fixed normalized
    coordinate and ``dadt`` the front speed, both used by the second-order
    time scheme.  ``pressure``/``shear`` carry the tip-split field objects
    behind the plain nodal arrays.
    """

    t: float
    a: float
    w: np.ndarray
    p: np.ndarray
    v: np.ndarray
    tau: np.ndarray
    dwdt: np.ndarray | None
    dadt: float
    omega: float
    q0: float
    pressure: PressureField | None = None
    shear: ShearField | None = None
    dpdx: np.ndarray | None = None
    iterations: int = 0
    residual: float = 0.0

    def evolved(self, **changes) -> "FractureState":
        return replace(self, **changes)


def state_volume(grid: FluidGrid, a: float, w) -> float:
    """Crack volume (per unit height) with the tip root handled analytically."""
    return a * grid.integral(w)

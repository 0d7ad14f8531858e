"""Solid material description: piecewise-in-x elastic layers and the
predefined confining stress."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError

__all__ = ["MaterialLayer", "MaterialField", "ConfiningStress"]


@dataclass(frozen=True)
class MaterialLayer:
    """Elastic constants and toughness of one layer, valid on [x_from, x_to)."""

    x_from: float
    x_to: float  # np.inf for the last layer
    youngs_modulus: float
    poissons_ratio: float
    toughness: float

    def __post_init__(self):
        if not (self.youngs_modulus > 0):
            raise InputError("Young's modulus must be positive")
        if not (0 <= self.poissons_ratio < 0.5):
            raise InputError("Poisson's ratio must lie in [0, 0.5)")
        if not (self.toughness > 0):
            raise InputError("toughness must be positive")

    @property
    def plane_strain_modulus(self) -> float:
        return self.youngs_modulus / (1.0 - self.poissons_ratio**2)


class MaterialField:
    """Ordered layers partitioning [0, inf) along the crack direction."""

    def __init__(self, layers):
        layers = list(layers)
        if not layers:
            raise InputError("material requires at least one layer")
        if layers[0].x_from != 0.0:
            raise InputError("layers must start at x = 0")
        for prev, cur in zip(layers, layers[1:]):
            if cur.x_from != prev.x_to:
                raise InputError("layer ranges must partition [0, inf)")
        if not np.isinf(layers[-1].x_to):
            raise InputError("last layer must extend to infinity")
        self.layers = layers
        self._breaks = np.array([lay.x_to for lay in layers[:-1]])

    @classmethod
    def homogeneous(cls, youngs_modulus, poissons_ratio, toughness=1e6):
        return cls([MaterialLayer(0.0, np.inf, youngs_modulus, poissons_ratio, toughness)])

    @property
    def is_homogeneous(self) -> bool:
        return len(self.layers) == 1

    def layer_index(self, x):
        """Layer index per position (vectorized)."""
        x = np.abs(np.asarray(x, dtype=float))
        return np.searchsorted(self._breaks, x, side="right")

    def layer_at(self, x) -> MaterialLayer:
        return self.layers[int(self.layer_index(float(x)))]


@dataclass(frozen=True)
class ConfiningStress:
    """Predefined in-situ compression magnitudes (no initial deformation);
    superposed on the perturbation stresses in outputs."""

    sigma_h: float = 0.0
    sigma_v: float = 0.0
    sigma_out: float = 0.0

    def __post_init__(self):
        for v in (self.sigma_h, self.sigma_v, self.sigma_out):
            if not np.isfinite(v):
                raise InputError("confining stress components must be finite")

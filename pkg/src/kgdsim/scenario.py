"""Scenario configuration: a JSON file in SI units describing one run.

Schema (all blocks required unless noted):

    {
      "rheology":  {"type": "newtonian", "viscosity": 1e-3}
                 | {"type": "truncated_power_law", "eta0": ..., "eta_inf": ...,
                    "consistency": ..., "exponent": ..., "gamma1": ..., "gamma2": ...},
      "material":  {"layers": [{"x_to": 1.0, "youngs_modulus": 10e9,
                                "poissons_ratio": 0.24, "toughness": 1e6},
                               {"youngs_modulus": 20e9, ...}]},
      "confining_stress": {"sigma_h": 0, "sigma_v": 0, "sigma_out": 0},   # optional
      "influx":    {"type": "ramp", "q_max": 5e-4, "t_ramp": 0.1}
                 | {"type": "benchmark"},
      "leakoff":   {"type": "none"} | {"type": "benchmark"},              # optional
      "initial_state": {"type": "zero_crack"}
                 | {"type": "benchmark"}
                 | {"type": "explicit", "length": ..., "opening": [...]},
      "coupling":  {"backend": "fem", "mesh_variant": "infinite_layer",
                    "mesh_density": "dense", "volume_ratio": 1.05,
                    "tolerance": 1e-5, "max_iterations": 50,
                    "shear_mode": "zero", "alpha": 1.0},
      "t_end": 10.0,
      "fluid_grid_nodes": 100,                                            # optional
      "benchmark": {"w_coeffs": [...], "growth_rate": 0.333...},          # optional
      "output": {"profile_every": 1, "fem_fields": false}                 # optional
    }

Benchmark-flavored blocks (influx/leakoff/initial state) evaluate the
built-in self-similar solution for the scenario's elastic constants and
viscosity; they require a Newtonian fluid and a homogeneous material.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .benchmark import DEFAULT_BETA, DEFAULT_W_COEFFS, SelfSimilarBenchmark
from .coupling import CouplingConfig
from .errors import ConfigError
from .lubrication import LeakoffModel, ramp_influx
from .materials import ConfiningStress, MaterialField, MaterialLayer
from .rheology import RheologyModel, newtonian, truncated_power_law

__all__ = ["Scenario", "parse_scenario", "scenario_from_dict"]


@dataclass
class Scenario:
    rheology: RheologyModel
    material: MaterialField
    confine: ConfiningStress
    coupling: CouplingConfig
    t_end: float
    influx_kind: str
    influx_params: dict
    leakoff_kind: str
    initial_kind: str
    initial_params: dict
    fluid_grid_nodes: int = 100
    benchmark: SelfSimilarBenchmark | None = None
    profile_every: int = 1
    fem_fields: bool = False
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def uses_benchmark(self) -> bool:
        return "benchmark" in (self.influx_kind, self.leakoff_kind, self.initial_kind)

    def influx_fn(self):
        if self.influx_kind == "ramp":
            q_max = self.influx_params["q_max"]
            t_ramp = self.influx_params["t_ramp"]
            return lambda t: ramp_influx(t, q_max, t_ramp)
        return lambda t: self.benchmark.inlet_flux(t)

    def leakoff_model(self):
        if self.leakoff_kind == "none":
            return LeakoffModel("none")
        bench = self.benchmark
        return LeakoffModel("prescribed", fn=lambda xt, t: bench.leakoff_at(xt, t))

    def sif_target_fn(self):
        if self.initial_kind == "benchmark":
            bench = self.benchmark
            return lambda t: float(bench.sif(t))
        return None


def _require(block: dict, key, path):
    if key not in block:
        raise ConfigError(f"{path}: missing field {key!r}")
    return block[key]


def _no_unknown(block: dict, allowed, path):
    unknown = sorted(set(block) - set(allowed))
    if unknown:
        raise ConfigError(f"{path}: unknown keys {unknown}")


def _positive(value, path):
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{path}: must be a number") from None
    if not np.isfinite(value) or value <= 0:
        raise ConfigError(f"{path}: must be positive and finite")
    return value


def _parse_rheology(block) -> RheologyModel:
    kind = _require(block, "type", "rheology")
    try:
        if kind == "newtonian":
            _no_unknown(block, ("type", "viscosity"), "rheology")
            return newtonian(_positive(_require(block, "viscosity", "rheology"),
                                       "rheology.viscosity"))
        if kind == "truncated_power_law":
            keys = ("eta0", "eta_inf", "consistency", "exponent", "gamma1", "gamma2")
            _no_unknown(block, ("type",) + keys, "rheology")
            vals = {k: _positive(_require(block, k, "rheology"), f"rheology.{k}")
                    for k in keys}
            return truncated_power_law(**vals)
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"rheology: {exc}") from exc
    raise ConfigError(f"rheology.type: unknown kind {kind!r}")


def _parse_material(block) -> MaterialField:
    layers_in = _require(block, "layers", "material")
    if not isinstance(layers_in, list) or not layers_in:
        raise ConfigError("material.layers: must be a non-empty list")
    layers = []
    x_from = 0.0
    for i, lay in enumerate(layers_in):
        path = f"material.layers[{i}]"
        _no_unknown(lay, ("x_to", "youngs_modulus", "poissons_ratio", "toughness"), path)
        last = i == len(layers_in) - 1
        x_to = np.inf if last else _positive(_require(lay, "x_to", path), f"{path}.x_to")
        if not last and "x_to" not in lay:
            raise ConfigError(f"{path}: interior layers require x_to")
        nu = float(_require(lay, "poissons_ratio", path))
        if not (0 <= nu < 0.5):
            raise ConfigError(f"{path}.poissons_ratio: must lie in [0, 0.5)")
        try:
            layers.append(MaterialLayer(
                x_from, x_to,
                _positive(_require(lay, "youngs_modulus", path), f"{path}.youngs_modulus"),
                nu,
                _positive(_require(lay, "toughness", path), f"{path}.toughness"),
            ))
        except Exception as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        x_from = x_to
    try:
        return MaterialField(layers)
    except Exception as exc:
        raise ConfigError(f"material: {exc}") from exc


def scenario_from_dict(data: dict) -> Scenario:
    """Validated Scenario from parsed JSON."""
    if not isinstance(data, dict):
        raise ConfigError("scenario: top level must be an object")
    allowed = ("rheology", "material", "confining_stress", "influx", "leakoff",
               "initial_state", "coupling", "t_end", "fluid_grid_nodes",
               "benchmark", "output")
    _no_unknown(data, allowed, "scenario")
    for key in ("rheology", "material", "influx", "initial_state", "coupling", "t_end"):
        _require(data, key, "scenario")

    rheology = _parse_rheology(data["rheology"])
    material = _parse_material(data["material"])

    conf_block = data.get("confining_stress", {})
    _no_unknown(conf_block, ("sigma_h", "sigma_v", "sigma_out"), "confining_stress")
    confine = ConfiningStress(
        float(conf_block.get("sigma_h", 0.0)),
        float(conf_block.get("sigma_v", 0.0)),
        float(conf_block.get("sigma_out", 0.0)),
    )

    cpl_block = dict(data["coupling"])
    _no_unknown(cpl_block, ("backend", "mesh_variant", "mesh_density", "volume_ratio",
                            "tolerance", "max_iterations", "shear_mode", "alpha",
                            "seed_length", "first_step"), "coupling")
    cpl_kwargs = {}
    for src, dst in (("backend", "backend"), ("mesh_variant", "mesh_variant"),
                     ("mesh_density", "mesh_density"), ("volume_ratio", "volume_ratio"),
                     ("tolerance", "tolerance"), ("max_iterations", "max_iterations"),
                     ("shear_mode", "shear_mode"), ("alpha", "alpha"),
                     ("seed_length", "seed_length"), ("first_step", "first_step")):
        if src in cpl_block:
            cpl_kwargs[dst] = cpl_block[src]
    coupling = CouplingConfig(**cpl_kwargs)

    if not material.is_homogeneous and coupling.backend != "fem":
        raise ConfigError("coupling.backend: layered materials require the FEM backend")

    t_end = float(data["t_end"])
    if t_end < 0:
        raise ConfigError("t_end: must be non-negative")

    influx_block = data["influx"]
    influx_kind = _require(influx_block, "type", "influx")
    influx_params = {}
    if influx_kind == "ramp":
        _no_unknown(influx_block, ("type", "q_max", "t_ramp"), "influx")
        influx_params = {
            "q_max": _positive(_require(influx_block, "q_max", "influx"), "influx.q_max"),
            "t_ramp": _positive(_require(influx_block, "t_ramp", "influx"), "influx.t_ramp"),
        }
    elif influx_kind != "benchmark":
        raise ConfigError(f"influx.type: unknown kind {influx_kind!r}")

    leak_block = data.get("leakoff", {"type": "none"})
    leak_kind = _require(leak_block, "type", "leakoff")
    if leak_kind not in ("none", "benchmark"):
        raise ConfigError(f"leakoff.type: unknown kind {leak_kind!r}")

    init_block = data["initial_state"]
    init_kind = _require(init_block, "type", "initial_state")
    init_params = {}
    if init_kind == "explicit":
        init_params = {
            "length": _positive(_require(init_block, "length", "initial_state"),
                                "initial_state.length"),
            "opening": [float(v) for v in _require(init_block, "opening", "initial_state")],
        }
    elif init_kind not in ("zero_crack", "benchmark"):
        raise ConfigError(f"initial_state.type: unknown kind {init_kind!r}")

    benchmark = None
    if "benchmark" in (influx_kind, leak_kind, init_kind):
        if not rheology.is_newtonian:
            raise ConfigError("benchmark blocks require a Newtonian rheology")
        if not material.is_homogeneous:
            raise ConfigError("benchmark blocks require a homogeneous material")
        bench_block = data.get("benchmark", {})
        _no_unknown(bench_block, ("w_coeffs", "growth_rate"), "benchmark")
        layer = material.layers[0]
        benchmark = SelfSimilarBenchmark(
            youngs_modulus=layer.youngs_modulus,
            poissons_ratio=layer.poissons_ratio,
            viscosity=rheology.eta_inf,
            w_coeffs=bench_block.get("w_coeffs", DEFAULT_W_COEFFS),
            growth_rate=bench_block.get("growth_rate", DEFAULT_BETA),
        )

    out_block = data.get("output", {})
    _no_unknown(out_block, ("profile_every", "fem_fields"), "output")
    profile_every = int(out_block.get("profile_every", 1))
    if profile_every < 1:
        raise ConfigError("output.profile_every: must be >= 1")

    n_nodes = int(data.get("fluid_grid_nodes", 100))

    return Scenario(
        rheology=rheology, material=material, confine=confine, coupling=coupling,
        t_end=t_end, influx_kind=influx_kind, influx_params=influx_params,
        leakoff_kind=leak_kind, initial_kind=init_kind, initial_params=init_params,
        fluid_grid_nodes=n_nodes, benchmark=benchmark,
        profile_every=profile_every, fem_fields=bool(out_block.get("fem_fields", False)),
        raw=data,
    )


def parse_scenario(path) -> Scenario:
    """Load and validate a scenario file."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read scenario file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"scenario file is not valid JSON: {exc}") from exc
    return scenario_from_dict(data)

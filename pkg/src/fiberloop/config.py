"""Declarative run configuration: YAML file + dotted-path overrides.

The schema is strict: unknown keys are rejected with their full path so a
typo cannot silently fall back to a default.  Every experiment the CLI can
run is described by one RunConfig; `resolved()` returns the fully expanded
dictionary that gets embedded in the output manifest.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field as dc_field

import numpy as np
import yaml

from .fiber import FiberSpec
from .pulses import make_grid
from .propagator import PropagationOptions
from .sagnac import SignalSpec

__all__ = ["RunConfig", "ConfigError", "load_config", "apply_overrides"]

EXPERIMENTS = ("propagate", "sweep", "span", "span-grid", "map", "compare")


class ConfigError(ValueError):
    pass


# section -> {key: (default, caster)}
_SCHEMA = {
    "fiber": {
        "core_radius_um": (4.1, float),
        "cladding_index": (1.444, float),
        "index_step": (0.0036, float),
        "n2_m2_w": (2.2e-20, float),
        "loss_a_db_km": (5e11, float),
        "loss_b_um": (49.0, float),
        "loss_c_um4_db_km": (0.8, float),
        "disp_s0_ps_nm2_km": (0.08, float),
        "disp_lambda0_nm": (1313.0, float),
        "f_r": (0.18, float),
        "tau1_fs": (12.2, float),
        "tau2_fs": (32.0, float),
        "length_m": (100.0, float),
    },
    "grid": {
        "n": (16384, int),
        "window_ps": (None, float),          # None -> derived from length
        "carrier_nm": (1550.0, float),
    },
    "pump": {
        "fwhm_ps": (5.0, float),
        "energy_nj": (None, float),
        "energies_nj": (None, list),
        "energy_range": (None, dict),        # {start, stop, step}
    },
    "signal": {
        "wavelength_nm": (1310.0, float),
        "fwhm_ps": (1.0, float),
        "delay_ps": (0.0, float),
        "delay_mode": ("exit", str),
        "walk_off": (True, bool),
    },
    "solver": {
        "scheme": ("rk4ip", str),
        "step_mode": ("adaptive", str),
        "dz_m": (None, float),
        "tolerance": (1e-5, float),
        "shock": (True, bool),
        "raman": (True, bool),
        "max_dispersion_order": (4, int),
        "snapshots": (200, int),
        "wavelength_dependent_loss": (True, bool),
    },
    "sweep": {
        "f_r_values": (None, list),          # sweep/span: run once per value
        "theta": (0.95, float),
        "resolution_nj": (0.01, float),
    },
    "span_grid": {
        "lengths_m": ([100.0, 500.0], list),
        "fwhms_ps": ([4.0, 5.0, 6.0], list),
        "f_r_values": ([0.0, 0.18], list),
        "points_per_lobe": (40, int),
    },
    "output": {
        "directory": ("out", str),
    },
}

_RANGE_KEYS = {"start", "stop", "step"}


@dataclass
class RunConfig:
    experiment: str
    sections: dict = dc_field(default_factory=dict)

    def __getitem__(self, path):
        section, key = path.split(".")
        return self.sections[section][key]

    # -- domain-object builders ---------------------------------------------

    def fiber_spec(self) -> FiberSpec:
        f = self.sections["fiber"]
        return FiberSpec(
            core_radius=f["core_radius_um"], cladding_index=f["cladding_index"],
            index_step=f["index_step"], n2=f["n2_m2_w"],
            loss_A=f["loss_a_db_km"], loss_B=f["loss_b_um"],
            loss_C=f["loss_c_um4_db_km"], disp_S0=f["disp_s0_ps_nm2_km"],
            disp_lambda0=f["disp_lambda0_nm"], f_R=f["f_r"],
            tau1=f["tau1_fs"], tau2=f["tau2_fs"], length=f["length_m"])

    def grid(self, length_m=None):
        g = self.sections["grid"]
        window = g["window_ps"]
        if window is None:
            length = length_m if length_m is not None else self.sections["fiber"]["length_m"]
            window = 192.0 if length <= 150.0 else 512.0
        return make_grid(g["n"], window, g["carrier_nm"])

    def signal_spec(self) -> SignalSpec:
        s = self.sections["signal"]
        return SignalSpec(wavelength=s["wavelength_nm"], fwhm=s["fwhm_ps"],
                          delay=s["delay_ps"], walk_off_enabled=s["walk_off"],
                          delay_mode=s["delay_mode"])

    def solver_options(self, snapshots=None) -> PropagationOptions:
        s = self.sections["solver"]
        return PropagationOptions(
            scheme=s["scheme"], step_mode=s["step_mode"], dz=s["dz_m"],
            local_error_target=s["tolerance"], include_shock=s["shock"],
            include_raman=s["raman"],
            max_dispersion_order=s["max_dispersion_order"],
            snapshot_count=snapshots if snapshots is not None else s["snapshots"],
            wavelength_dependent_loss=s["wavelength_dependent_loss"])

    def pump_energies(self):
        """Energy list in nJ from whichever pump energy form was given."""
        p = self.sections["pump"]
        given = [k for k in ("energy_nj", "energies_nj", "energy_range")
                 if p[k] is not None]
        if len(given) != 1:
            raise ConfigError(
                "pump must set exactly one of energy_nj / energies_nj / energy_range")
        if p["energy_nj"] is not None:
            return [float(p["energy_nj"])]
        if p["energies_nj"] is not None:
            energies = [float(e) for e in p["energies_nj"]]
        else:
            r = p["energy_range"]
            bad = set(r) - _RANGE_KEYS
            if bad or set(r) != _RANGE_KEYS:
                raise ConfigError(f"energy_range needs exactly {sorted(_RANGE_KEYS)}")
            energies = list(np.arange(r["start"], r["stop"] + r["step"] / 2, r["step"]))
        if not energies:
            raise ConfigError("energy list must not be empty")
        if any(b - a <= 0 for a, b in zip(energies, energies[1:])):
            raise ConfigError("energies must be strictly increasing")
        return energies

    def sweep_f_r_values(self):
        values = self.sections["sweep"]["f_r_values"]
        if values is None:
            return [self.sections["fiber"]["f_r"]]
        return [float(v) for v in values]

    def resolved(self) -> dict:
        out = {"experiment": self.experiment}
        out.update(copy.deepcopy(self.sections))
        return out


def _validate_section(name, data):
    schema = _SCHEMA[name]
    merged = {k: copy.deepcopy(v[0]) for k, v in schema.items()}
    if data is None:
        return merged
    if not isinstance(data, dict):
        raise ConfigError(f"section {name!r} must be a mapping")
    for key, value in data.items():
        if key not in schema:
            raise ConfigError(f"unknown key {name}.{key}")
        caster = schema[key][1]
        if value is None:
            merged[key] = None
            continue
        try:
            if caster is bool:
                if not isinstance(value, bool):
                    raise TypeError("expected true/false")
                merged[key] = value
            elif caster is list:
                if not isinstance(value, (list, tuple)):
                    raise TypeError("expected a list")
                merged[key] = list(value)
            elif caster is dict:
                if not isinstance(value, dict):
                    raise TypeError("expected a mapping")
                merged[key] = dict(value)
            else:
                merged[key] = caster(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {name}.{key}: {exc}") from exc
    return merged


def parse_config(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    experiment = data.get("experiment")
    if experiment not in EXPERIMENTS:
        raise ConfigError(
            f"experiment must be one of {', '.join(EXPERIMENTS)}; got {experiment!r}")
    unknown = set(data) - set(_SCHEMA) - {"experiment"}
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(unknown))}")
    sections = {name: _validate_section(name, data.get(name)) for name in _SCHEMA}
    return RunConfig(experiment=experiment, sections=sections)


def load_config(path, overrides=()) -> RunConfig:
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    data = apply_overrides(data or {}, overrides)
    return parse_config(data)


def apply_overrides(data: dict, overrides):
    """Apply --set section.key=value pairs; values parse as YAML scalars."""
    data = copy.deepcopy(data)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override must look like section.key=value: {item!r}")
        path, raw = item.split("=", 1)
        parts = path.split(".")
        if len(parts) == 1 and parts[0] == "experiment":
            data["experiment"] = raw
            continue
        if len(parts) != 2:
            raise ConfigError(f"override path must be section.key: {path!r}")
        section, key = parts
        try:
            value = yaml.safe_load(raw)
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse override value {raw!r}: {exc}") from exc
        data.setdefault(section, {})
        if not isinstance(data[section], dict):
            raise ConfigError(f"section {section!r} must be a mapping")
        data[section][key] = value
    return data

"""Experiment configuration: TOML schema, validation, overrides, fingerprint.

The file is structured key-value text with sections [network], [hawkes],
[limit], [risk], [calibration] and [output] plus a top-level seed.  Unknown
keys are rejected; referenced files must exist at parse time.  Flag
overrides use dotted paths (``--set network.M=300``) applied after the file
parse; precedence is flags > file > preset.
"""

from __future__ import annotations

import copy
import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .limits import SCHEMES, LimitParams
from .network import (
    FactorSpec,
    JumpRegime,
    NetworkSpec,
    SCENARIO_NAMES,
    SizeDistribution,
    mean_field_hawkes_spec,
    scenario_preset,
    uniform_network_spec,
)

__all__ = ["ConfigError", "ExperimentConfig", "parse_overrides"]


class ConfigError(ValueError):
    """Invalid configuration; message carries the offending key or file."""


_DEFAULTS = {
    "seed": 12345,
    "network": {
        "preset": "",
        "M": 10,
        "T": 1.0,
        "steps": 100,
        "rho": 0.0,
        "D": 0.0,
        "x0": 0.0,
        "a": 0.0,
        "sigma": 1.0,
        "c_hat": 0.0,
        "factor_loading": 0.0,
        "jump_kind": "none",
        "poisson_rate": 0.0,
    },
    "hawkes": {
        "mu": 0.0,
        "alpha": 0.0,
        "beta": 1.0,
        "scale_by_m": True,
        "size_kind": "point",
        "size_value": 1.0,
        "size_lo": 0.0,
        "size_hi": 1.0,
        "size_m": 0.0,
        "size_s": 1.0,
        "size_negate": False,
    },
    "factor": {
        "enabled": False,
        "y0": 0.0,
        "drift": "zero",
        "drift_value": 0.0,
        "kappa": 0.0,
        "theta": 0.0,
        "vol": "constant",
        "vol_value": 0.0,
    },
    "limit": {
        "mu": 0.0,
        "alpha": 0.0,
        "beta": 1.0,
        "a": 0.0,
        "sigma": 0.0,
        "c": 0.0,
        "x": 0.0,
        "mean_jump_size": 1.0,
        "factor_loading": 0.0,
        "T": 1.0,
        "steps": 100,
        "scheme": "exact",
    },
    "risk": {
        "runs": 1,
        "lln_paths": 100_000,
        "x0_values": [],
        "add_time": -1.0,  # -1 means the horizon
        "regime": "hawkes",
        "q_grid": [0.5, 0.6, 0.7, 0.8, 0.9, 0.95],
        "tail": "upper",
        "node_i": 0,
        "node_j": 1,
        "sample_mode": "increments",
        "m_values": [50, 100, 200, 400],
    },
    "calibration": {
        "series": "",
        "initial": [0.1, 1.0, 0.1, 0.2, -0.1],
        "lower": [],
        "upper": [],
        "max_evals": 10_000,
    },
    "output": {
        "dir": "out",
        "plots": True,
        "write_paths": False,
    },
}


def _merge_checked(defaults: dict, given: dict, where: str) -> dict:
    out = {}
    for key, val in given.items():
        if key not in defaults:
            raise ConfigError(
                f"unknown key {where}{key!r}; valid keys: "
                + ", ".join(sorted(defaults))
            )
        if isinstance(defaults[key], dict):
            if not isinstance(val, dict):
                raise ConfigError(f"{where}{key} must be a table")
            continue  # handled by caller below
        out[key] = val
    merged = {}
    for key, default in defaults.items():
        if isinstance(default, dict):
            merged[key] = _merge_checked(default, given.get(key, {}),
                                         f"{where}{key}.")
        elif key in out:
            merged[key] = _coerce(out[key], default, f"{where}{key}")
        else:
            merged[key] = default
    return merged


def _coerce(value, default, where: str):
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{where} must be a boolean")
        return value
    if isinstance(default, int) and not isinstance(default, bool):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where} must be a number")
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(f"{where} must be an integer")
        return int(value)
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where} must be a number")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{where} must be a string")
        return value
    if isinstance(default, list):
        if not isinstance(value, list):
            raise ConfigError(f"{where} must be a list")
        return list(value)
    raise ConfigError(f"{where}: unsupported value type")


@dataclass
class ExperimentConfig:
    """Validated, fully defaulted configuration document."""

    data: dict
    base_dir: Path = field(default_factory=Path.cwd)

    @classmethod
    def from_file(cls, path, overrides=()) -> "ExperimentConfig":
        path = Path(path)
        try:
            raw = tomllib.loads(path.read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        return cls.from_dict(raw, base_dir=path.parent, overrides=overrides)

    @classmethod
    def from_dict(cls, raw: dict, base_dir=None, overrides=()) -> "ExperimentConfig":
        raw = _apply_overrides(copy.deepcopy(raw), overrides)
        known_sections = {k for k in _DEFAULTS if isinstance(_DEFAULTS[k], dict)}
        for key in raw:
            if key != "seed" and key not in known_sections:
                raise ConfigError(
                    f"unknown section or key {key!r}; valid: seed, "
                    + ", ".join(sorted(known_sections))
                )
        data = {"seed": _coerce(raw.get("seed", _DEFAULTS["seed"]), 0, "seed")}
        for section in known_sections:
            data[section] = _merge_checked(
                _DEFAULTS[section], raw.get(section, {}), f"{section}."
            )
        cfg = cls(data=data, base_dir=Path(base_dir) if base_dir else Path.cwd())
        cfg._validate()
        return cfg

    def _validate(self):
        net = self.data["network"]
        if net["preset"] and net["preset"] not in SCENARIO_NAMES:
            raise ConfigError(
                f"network.preset {net['preset']!r} unknown; valid: "
                + ", ".join(SCENARIO_NAMES)
            )
        if net["jump_kind"] not in ("none", "poisson", "hawkes",
                                    "compound_hawkes"):
            raise ConfigError("network.jump_kind must be none, poisson, "
                              "hawkes or compound_hawkes")
        if self.data["limit"]["scheme"] not in SCHEMES:
            raise ConfigError(f"limit.scheme must be one of {SCHEMES}")
        series = self.data["calibration"]["series"]
        if series and not (self.base_dir / series).exists():
            raise ConfigError(
                f"calibration.series file does not exist: "
                f"{self.base_dir / series}"
            )

    @property
    def seed(self) -> int:
        return self.data["seed"]

    def section(self, name: str) -> dict:
        return self.data[name]

    def fingerprint(self) -> str:
        """Hash of the normalized config (seed included)."""
        canon = json.dumps(self.data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:16]

    # -- builders -------------------------------------------------------

    def network_spec(self, x0=None) -> NetworkSpec:
        net = self.data["network"]
        if net["preset"]:
            spec = scenario_preset(net["preset"])
            if x0 is not None:
                spec.x0 = np.broadcast_to(float(x0), (spec.M,)).copy()
            return spec
        jump = self._jump_regime(net)
        factor = self._factor_spec()
        x0_val = net["x0"] if x0 is None else x0
        return uniform_network_spec(
            M=net["M"], a=net["a"], sigma=net["sigma"], c_hat=net["c_hat"],
            rho=net["rho"], jump=jump, x0=x0_val, D=net["D"], T=net["T"],
            steps=net["steps"], factor=factor,
            factor_loading=net["factor_loading"],
        )

    def _jump_regime(self, net: dict) -> JumpRegime:
        kind = net["jump_kind"]
        if kind == "none":
            return JumpRegime(kind="none")
        if kind == "poisson":
            return JumpRegime(kind="poisson", rate=net["poisson_rate"])
        hk = self.data["hawkes"]
        spec = mean_field_hawkes_spec(
            net["M"], hk["mu"], hk["alpha"], hk["beta"],
            kernel_scaled_by_m=hk["scale_by_m"],
        )
        size = None
        if kind == "compound_hawkes":
            size = SizeDistribution(
                kind=hk["size_kind"], value=hk["size_value"], lo=hk["size_lo"],
                hi=hk["size_hi"], m=hk["size_m"], s=hk["size_s"],
                negate=hk["size_negate"],
            )
        return JumpRegime(kind=kind, hawkes=spec, size=size)

    def _factor_spec(self) -> FactorSpec | None:
        fac = self.data["factor"]
        if not fac["enabled"]:
            return None
        return FactorSpec(
            y0=fac["y0"], drift=fac["drift"], drift_value=fac["drift_value"],
            kappa=fac["kappa"], theta=fac["theta"], vol=fac["vol"],
            vol_value=fac["vol_value"],
        )

    def limit_params(self, x=None) -> LimitParams:
        lim = self.data["limit"]
        return LimitParams(
            mu=lim["mu"], alpha=lim["alpha"], beta=lim["beta"], a=lim["a"],
            sigma=lim["sigma"], c=lim["c"], x=lim["x"] if x is None else x,
            mean_jump_size=lim["mean_jump_size"],
            factor_loading=lim["factor_loading"],
        )

    def to_toml(self) -> str:
        """Serialize the normalized document back to TOML text."""
        lines = [f"seed = {_toml_value(self.data['seed'])}"]
        for section in sorted(k for k in self.data if k != "seed"):
            lines.append("")
            lines.append(f"[{section}]")
            for key, val in self.data[section].items():
                lines.append(f"{key} = {_toml_value(val)}")
        return "\n".join(lines) + "\n"


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        out = f"{v:.17g}"
        return out if any(ch in out for ch in ".eE") else out + ".0"
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, list):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise ConfigError(f"cannot serialize value {v!r}")


def parse_overrides(pairs) -> list:
    """Parse ``section.key=value`` strings; values use TOML literal syntax."""
    parsed = []
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"override {pair!r} is not of the form key=value")
        key, raw = pair.split("=", 1)
        key = key.strip()
        try:
            value = tomllib.loads(f"v = {raw.strip()}")["v"]
        except tomllib.TOMLDecodeError:
            value = raw.strip()
        parsed.append((key, value))
    return parsed


def _apply_overrides(raw: dict, overrides) -> dict:
    for key, value in overrides:
        parts = key.split(".")
        node = raw
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override {key!r} descends into a scalar")
        node[parts[-1]] = value
    return raw

"""Run configuration: a small TOML file plus command-line overrides.

Example::

    seed = 7
    output_format = "csv"

    [model]
    ell = 1.0
    t = 2.0
    r = 8
    r_prime = 1
    N = 2

    [gauge]
    s_plus = [0.31, 0.17]     # real and imaginary part
    s_minus = [-0.23, 0.11]

    [tolerances]
    rll = 1e-10

Unknown keys anywhere are rejected.  The model is re-validated through
:class:`ModelParams`, so an invalid (r, r') pair fails on load.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import tomli

from .errors import ConfigError
from .sklyanin import ModelParams
from .sos import DEFAULT_GAUGE, GaugeParams
from .suites import DEFAULT_TOLERANCES, SuiteSettings

TOP_KEYS = {"seed", "output_format", "output_path", "model", "gauge", "tolerances"}
MODEL_KEYS = {"ell", "two_ell", "t", "r", "r_prime", "N"}
GAUGE_KEYS = {"s_plus", "s_minus"}
FORMATS = ("json", "csv")
DEFAULT_SEED = 20240601


@dataclass(frozen=True)
class RunConfig:
    model: ModelParams
    model_explicit: bool = False
    gauge: GaugeParams = DEFAULT_GAUGE
    seed: int = DEFAULT_SEED
    tolerances: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    output_format: str = "json"
    output_path: str | None = None

    def suite_settings(self) -> SuiteSettings:
        return SuiteSettings(
            model=self.model if self.model_explicit else None,
            t=self.model.t,
            seed=self.seed,
            gauge=self.gauge,
            tolerances=dict(self.tolerances),
        )


def _reject_unknown(section: str, got: Mapping[str, Any], allowed: set[str]) -> None:
    extra = sorted(set(got) - allowed)
    if extra:
        where = f"[{section}]" if section else "top level"
        raise ConfigError(f"unknown config key(s) at {where}: {', '.join(extra)}")


def _complex(name: str, value: Any) -> complex:
    if isinstance(value, (int, float, complex)) and not isinstance(value, bool):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(isinstance(v, (int, float)) for v in value):
        return complex(value[0], value[1])
    raise ConfigError(f"gauge.{name} must be a number or a [re, im] pair, got {value!r}")


def _two_ell(model: Mapping[str, Any]) -> int | None:
    if "ell" in model and "two_ell" in model:
        raise ConfigError("give either ell or two_ell, not both")
    if "two_ell" in model:
        val = model["two_ell"]
        if not isinstance(val, int) or isinstance(val, bool):
            raise ConfigError(f"two_ell must be an integer, got {val!r}")
        return val
    if "ell" in model:
        doubled = 2 * float(model["ell"])
        if abs(doubled - round(doubled)) > 1e-12:
            raise ConfigError(f"ell must be a multiple of 1/2, got {model['ell']!r}")
        return int(round(doubled))
    return None


def build_model(model: Mapping[str, Any]) -> ModelParams:
    """ModelParams from a partial mapping; missing entries follow ModelParams.default."""
    _reject_unknown("model", model, MODEL_KEYS)
    two_ell = _two_ell(model)
    base = ModelParams.default(two_ell if two_ell is not None else 1)
    try:
        t = float(model.get("t", base.t))
        r = model.get("r", base.r)
        rp = model.get("r_prime", base.r_prime)
        N = model.get("N", base.N)
        for name, v in (("r", r), ("r_prime", rp), ("N", N)):
            if not isinstance(v, int) or isinstance(v, bool):
                raise ConfigError(f"{name} must be an integer, got {v!r}")
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid model entry: {exc}") from exc
    return ModelParams(base.two_ell, t, r, rp, N)


def load_mapping(path: str | Path) -> dict[str, Any]:
    try:
        with open(path, "rb") as fh:
            return tomli.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc


def resolve(data: Mapping[str, Any] | None = None, overrides: Mapping[str, Any] | None = None) -> RunConfig:
    """Merge file contents with command-line overrides (overrides win)."""
    data = dict(data or {})
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    _reject_unknown("", data, TOP_KEYS)

    model = dict(data.get("model", {}))
    if not isinstance(model, dict):
        raise ConfigError("[model] must be a table")
    for key in MODEL_KEYS:
        if key in overrides:
            if key == "ell":
                model.pop("two_ell", None)
            model[key] = overrides[key]
    params = build_model(model)

    gauge_raw = data.get("gauge", {})
    if not isinstance(gauge_raw, dict):
        raise ConfigError("[gauge] must be a table")
    _reject_unknown("gauge", gauge_raw, GAUGE_KEYS)
    gauge = GaugeParams(
        s_plus=_complex("s_plus", gauge_raw.get("s_plus", DEFAULT_GAUGE.s_plus)),
        s_minus=_complex("s_minus", gauge_raw.get("s_minus", DEFAULT_GAUGE.s_minus)),
    )
    gauge.validate(params)

    tol_raw = data.get("tolerances", {})
    if not isinstance(tol_raw, dict):
        raise ConfigError("[tolerances] must be a table")
    _reject_unknown("tolerances", tol_raw, set(DEFAULT_TOLERANCES))
    tolerances = dict(DEFAULT_TOLERANCES)
    for k, v in tol_raw.items():
        if not isinstance(v, (int, float)) or isinstance(v, bool) or v < 0:
            raise ConfigError(f"tolerance {k} must be a non-negative number, got {v!r}")
        tolerances[k] = float(v)

    seed = overrides.get("seed", data.get("seed", DEFAULT_SEED))
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ConfigError(f"seed must be a non-negative integer, got {seed!r}")
    fmt = overrides.get("output_format", data.get("output_format", "json"))
    if fmt not in FORMATS:
        raise ConfigError(f"output_format must be one of {FORMATS}, got {fmt!r}")
    out_path = overrides.get("output_path", data.get("output_path"))
    if out_path is not None and not isinstance(out_path, str):
        raise ConfigError("output_path must be a string")

    return RunConfig(
        model=params,
        model_explicit=bool(model),
        gauge=gauge,
        seed=seed,
        tolerances=tolerances,
        output_format=fmt,
        output_path=out_path,
    )


def load_config(path: str | Path | None = None, overrides: Mapping[str, Any] | None = None) -> RunConfig:
    return resolve(load_mapping(path) if path is not None else {}, overrides)

"""Strict TOML scenario configs for the command-line front end.

A scenario file is a flat key-value TOML document with sections; every
key is checked against the schema below and unknown keys are rejected
outright so that typos cannot silently fall back to defaults.

Sections (presence depends on the requested analysis):

* ``[scenario]`` -- ``analysis`` (simulate | equilibria | basin | sweep
  | control-compare) and ``model`` (reduced | full).
* ``[params]`` -- model parameters; the reduced model takes ``r0``
  directly, the full model takes ``mu``/``beta_t``/``gamma`` and derives
  it.
* ``[initial]`` -- ``x0``, ``n0`` and, for the full model, ``i0``
  (defaults to 0.1; susceptibles start at 1 - i0 - x0, recovered at 0).
* ``[integration]`` -- step, horizon, sampling, convergence settings.
* ``[policy]`` -- bias-control policy (full model only).
* ``[basin]`` / ``[sweep]`` / ``[control]`` -- analysis options.
* ``[output]`` -- output directory and SVG switch.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .basins import SWEEPABLE, basin_cfg_default
from .control import ControlPolicy
from .dynamics import ModelParams
from .errors import ConfigError, VaxgameError
from .integrate import IntegrationConfig

__all__ = ["ScenarioConfig", "load_scenario"]

ANALYSES = ("simulate", "equilibria", "basin", "sweep", "control-compare")
MODELS = ("reduced", "full")

_SCHEMA = {
    "scenario": {"analysis", "model"},
    "params": {
        "r0", "mu", "beta_t", "gamma", "cost_infection", "cost_vacc_high",
        "cost_vacc_low", "theta", "eps1", "eps2", "sel_strength",
    },
    "initial": {"x0", "n0", "i0"},
    "integration": {
        "dt", "t_max", "record_every", "clamp_eps",
        "convergence_tol", "convergence_window",
    },
    "policy": {
        "kind", "i_threshold", "theta_controlled", "t_start", "t_end", "latching",
    },
    "basin": {"grid_n", "endpoint_tol"},
    "sweep": {"parameter", "values", "grid_n", "endpoint_tol"},
    "control": {"tail_fraction"},
    "output": {"dir", "svg"},
}


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated scenario: everything an analysis run needs."""

    name: str
    analysis: str
    model: str
    params: ModelParams
    x0: float | None
    n0: float | None
    i0: float
    integration: IntegrationConfig
    policy: ControlPolicy | None
    grid_n: int
    endpoint_tol: float
    sweep_parameter: str | None
    sweep_values: tuple[float, ...]
    tail_fraction: float
    out_dir: str
    svg: bool


def _check_schema(doc: dict) -> None:
    for section, content in doc.items():
        if section not in _SCHEMA:
            raise ConfigError("unknown section", key=section)
        if not isinstance(content, dict):
            raise ConfigError("top-level keys must live in a section", key=section)
        for key in content:
            if key not in _SCHEMA[section]:
                raise ConfigError("unknown key", key=f"{section}.{key}")


def _need(doc: dict, section: str, key: str):
    try:
        return doc[section][key]
    except KeyError:
        raise ConfigError("missing required key", key=f"{section}.{key}") from None


def _params_from(doc: dict, model: str) -> ModelParams:
    sect = dict(doc.get("params") or {})
    for key in ("cost_infection", "cost_vacc_high", "cost_vacc_low", "theta"):
        if key not in sect:
            raise ConfigError("missing required key", key=f"params.{key}")
    try:
        if model == "full":
            for key in ("mu", "beta_t", "gamma", "eps1", "eps2"):
                if key not in sect:
                    raise ConfigError("missing required key", key=f"params.{key}")
            explicit_r0 = sect.pop("r0", None)
            p = ModelParams(
                r0=explicit_r0 if explicit_r0 is not None
                else sect["beta_t"] / (sect["gamma"] + sect["mu"]),
                **sect,
            )
        else:
            if "r0" not in sect:
                raise ConfigError("missing required key", key="params.r0")
            for forbidden in ("mu", "beta_t", "gamma"):
                if forbidden in sect:
                    raise ConfigError(
                        "reduced model takes r0 directly; SIR rates not allowed",
                        key=f"params.{forbidden}",
                    )
            p = ModelParams(**sect)
    except ConfigError:
        raise
    except (TypeError, ZeroDivisionError, VaxgameError) as err:
        raise ConfigError(f"invalid [params]: {err}") from err
    return p


def load_scenario(path: str | Path) -> ScenarioConfig:
    """Parse and validate one scenario file (strict: unknown keys rejected)."""
    path = Path(path)
    try:
        doc = tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as err:
        raise ConfigError(f"not valid TOML: {err}") from err
    _check_schema(doc)

    analysis = _need(doc, "scenario", "analysis")
    if analysis not in ANALYSES:
        raise ConfigError(f"analysis must be one of {ANALYSES}", key="scenario.analysis")
    model = _need(doc, "scenario", "model")
    if model not in MODELS:
        raise ConfigError(f"model must be one of {MODELS}", key="scenario.model")
    if analysis in ("basin", "sweep") and model != "reduced":
        raise ConfigError(f"{analysis} analysis runs on the reduced model",
                          key="scenario.model")
    if analysis == "control-compare" and model != "full":
        raise ConfigError("control-compare needs the full model", key="scenario.model")

    params = _params_from(doc, model)

    init = doc.get("initial") or {}
    x0 = init.get("x0")
    n0 = init.get("n0")
    i0 = init.get("i0", 0.1)
    if analysis in ("simulate", "control-compare"):
        if x0 is None:
            raise ConfigError("missing required key", key="initial.x0")
        if n0 is None:
            raise ConfigError("missing required key", key="initial.n0")

    integ = doc.get("integration")
    try:
        if integ is None:
            integration = (
                basin_cfg_default() if analysis in ("basin", "sweep")
                else IntegrationConfig()
            )
        else:
            integration = IntegrationConfig(**integ)
    except VaxgameError as err:
        raise ConfigError(f"invalid [integration]: {err}") from err

    pol = doc.get("policy")
    policy = None
    if pol is not None:
        if model != "full":
            raise ConfigError("policies apply to the full model only", key="policy")
        try:
            policy = ControlPolicy(**pol)
        except VaxgameError as err:
            raise ConfigError(f"invalid [policy]: {err}") from err
    if analysis == "control-compare":
        if policy is None or policy.kind == "none":
            raise ConfigError("control-compare needs an active [policy]", key="policy")

    basin = doc.get("basin") or {}
    sweep = doc.get("sweep") or {}
    if analysis == "basin" and "grid_n" not in basin:
        raise ConfigError("missing required key", key="basin.grid_n")
    if analysis == "sweep":
        for key in ("parameter", "values", "grid_n"):
            if key not in sweep:
                raise ConfigError("missing required key", key=f"sweep.{key}")
        if sweep["parameter"] not in SWEEPABLE:
            raise ConfigError(f"sweep parameter must be one of {SWEEPABLE}",
                              key="sweep.parameter")
    grid_n = int(basin.get("grid_n", sweep.get("grid_n", 201)))
    endpoint_tol = float(basin.get("endpoint_tol", sweep.get("endpoint_tol", 1e-3)))

    control = doc.get("control") or {}
    output = doc.get("output") or {}

    return ScenarioConfig(
        name=path.stem,
        analysis=analysis,
        model=model,
        params=params,
        x0=None if x0 is None else float(x0),
        n0=None if n0 is None else float(n0),
        i0=float(i0),
        integration=integration,
        policy=policy,
        grid_n=grid_n,
        endpoint_tol=endpoint_tol,
        sweep_parameter=sweep.get("parameter"),
        sweep_values=tuple(float(v) for v in sweep.get("values", ())),
        tail_fraction=float(control.get("tail_fraction", 0.25)),
        out_dir=str(output.get("dir", "out")),
        svg=bool(output.get("svg", False)),
    )

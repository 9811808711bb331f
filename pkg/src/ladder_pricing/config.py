"""Run configuration: parsing, validation and serialisation.

Config files are YAML (JSON is accepted too). Example::

    option_kind: call
    market: {spot: 100, equity_vol: 0.2, maturity: 1}
    strategy: {alpha: 0.1, beta: 1.0, n_trades: 4, strike: 100}
    rate_model:
      type: hull_white
      a: 0.5
      rate_vol: 0.01
      r0: 0.04
      theta: {type: affine, intercept: 0.02, slope: 0.005}
    mc: {n_paths: 1000000, n_steps: 128, seed: 42, antithetic: false}
    sweep: {param: beta, values: [0.0, 0.5, 1.0]}

``theta`` is one of ``{type: constant, value}``, ``{type: affine, intercept,
slope}`` or ``{type: piecewise, times: [...], values: [...]}`` (one more
value than breakpoint).
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Literal

import yaml

from .mc_oracle import MIN_STOCHASTIC_STEPS, McConfig
from .numerics import QuadratureSpec
from .rates import (
    AffineTheta,
    ConstantTheta,
    FixedRate,
    HullWhite,
    MarketParams,
    PiecewiseConstantTheta,
    RateModel,
    Vasicek,
)
from .strategy import CallStrategy, PutStrategy, put_ladder

SWEEP_PARAMS = ("alpha", "beta", "n_trades", "strike", "maturity")


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


@dataclass(frozen=True)
class Sweep:
    param: str
    values: tuple[float, ...]


@dataclass(frozen=True)
class RunConfig:
    market: MarketParams
    option_kind: Literal["call", "put"]
    strategy: CallStrategy | PutStrategy
    rate_model: RateModel
    mc: McConfig | None = None
    sweep: Sweep | None = None
    quadrature: QuadratureSpec = QuadratureSpec()

    def with_param(self, name: str, value) -> "RunConfig":
        """Copy with one sweepable parameter replaced."""
        if name == "maturity":
            return dataclasses.replace(self, market=dataclasses.replace(self.market, maturity=value))
        return dataclasses.replace(self, strategy=dataclasses.replace(self.strategy, **{name: value}))


# ---------------------------------------------------------------------------
# parsing helpers
# ---------------------------------------------------------------------------


def _section(data: Any, path: str) -> dict:
    if not isinstance(data, dict):
        raise ConfigError(path, "expected a mapping")
    return data


def _check_keys(data: dict, path: str, required: tuple, optional: tuple = ()) -> None:
    for key in required:
        if key not in data:
            raise ConfigError(f"{path}.{key}" if path else key, "missing required field")
    unknown = set(data) - set(required) - set(optional)
    if unknown:
        key = sorted(unknown)[0]
        raise ConfigError(f"{path}.{key}" if path else key, "unknown field")


def _number(data: dict, key: str, path: str) -> float:
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}.{key}", f"expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"{path}.{key}", "must be finite")
    return value


def _integer(data: dict, key: str, path: str) -> int:
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}.{key}", f"expected an integer, got {value!r}")
    return value


def _build(path: str, factory, **kwargs):
    """Call a validating constructor, turning its ValueError into a ConfigError.

    The field path is refined when the message names one of the arguments.
    """
    try:
        return factory(**kwargs)
    except (ValueError, TypeError) as exc:
        msg = str(exc)
        for name in kwargs:
            if msg.startswith(name) or f" {name}" in msg or f"{name}=" in msg:
                raise ConfigError(f"{path}.{name}", msg) from None
        raise ConfigError(path, msg) from None


def _parse_market(data: Any) -> MarketParams:
    d = _section(data, "market")
    _check_keys(d, "market", ("spot", "equity_vol", "maturity"))
    return _build(
        "market",
        MarketParams,
        **{k: _number(d, k, "market") for k in ("spot", "equity_vol", "maturity")},
    )


def _parse_strategy(data: Any, kind: str):
    path = "strategy"
    d = _section(data, path)
    if kind == "call":
        _check_keys(d, path, ("alpha", "beta", "n_trades", "strike"))
    else:
        _check_keys(d, path, ("alpha", "beta", "n_trades", "strike"), ("trigger_offset",))
    kwargs = {
        "alpha": _number(d, "alpha", path),
        "beta": _number(d, "beta", path),
        "n_trades": _integer(d, "n_trades", path),
        "strike": _number(d, "strike", path),
    }
    if kind == "call":
        return _build(path, CallStrategy, **kwargs)
    kwargs["trigger_offset"] = _number(d, "trigger_offset", path) if "trigger_offset" in d else 0.0
    strat = _build(path, PutStrategy, **kwargs)
    _check_put_priceable(strat, path)
    return strat


def _check_put_priceable(strat: PutStrategy, path: str) -> None:
    if strat.trigger_offset != 0.0:
        raise ConfigError(f"{path}.trigger_offset", "must be 0; only the K - n*spacing ladder is priced")
    try:
        put_ladder(strat)
    except ValueError as exc:
        raise ConfigError(f"{path}.alpha", str(exc)) from None


def _parse_theta(data: Any, path: str):
    d = _section(data, path)
    kind = d.get("type")
    if kind == "constant":
        _check_keys(d, path, ("type", "value"))
        return ConstantTheta(_number(d, "value", path))
    if kind == "affine":
        _check_keys(d, path, ("type", "intercept", "slope"))
        return AffineTheta(_number(d, "intercept", path), _number(d, "slope", path))
    if kind == "piecewise":
        _check_keys(d, path, ("type", "times", "values"))
        times, values = d["times"], d["values"]
        for key, seq in (("times", times), ("values", values)):
            if not isinstance(seq, list):
                raise ConfigError(f"{path}.{key}", "expected a list")
            for i, x in enumerate(seq):
                if isinstance(x, bool) or not isinstance(x, (int, float)):
                    raise ConfigError(f"{path}.{key}[{i}]", f"expected a number, got {x!r}")
        return _build(path, PiecewiseConstantTheta, times=tuple(times), values=tuple(values))
    raise ConfigError(f"{path}.type", f"expected constant, affine or piecewise, got {kind!r}")


def _parse_rate_model(data: Any) -> RateModel:
    path = "rate_model"
    d = _section(data, path)
    kind = d.get("type")
    if kind == "fixed":
        _check_keys(d, path, ("type", "r"))
        return _build(path, FixedRate, r=_number(d, "r", path))
    if kind == "vasicek":
        _check_keys(d, path, ("type", "a", "theta", "rate_vol", "r0"))
        kwargs = {k: _number(d, k, path) for k in ("a", "theta", "rate_vol", "r0")}
        return _build(path, Vasicek, **kwargs)
    if kind == "hull_white":
        _check_keys(d, path, ("type", "a", "theta", "rate_vol", "r0"))
        theta = _parse_theta(d["theta"], f"{path}.theta")
        kwargs = {k: _number(d, k, path) for k in ("a", "rate_vol", "r0")}
        return _build(path, HullWhite, theta_fn=theta, **kwargs)
    raise ConfigError(f"{path}.type", f"expected fixed, vasicek or hull_white, got {kind!r}")


def _parse_mc(data: Any, model: RateModel) -> McConfig:
    path = "mc"
    d = _section(data, path)
    _check_keys(d, path, ("n_paths",), ("n_steps", "seed", "antithetic"))
    kwargs = {"n_paths": _integer(d, "n_paths", path)}
    if "n_steps" in d:
        kwargs["n_steps"] = _integer(d, "n_steps", path)
    if "seed" in d:
        kwargs["seed"] = _integer(d, "seed", path)
    if "antithetic" in d:
        if not isinstance(d["antithetic"], bool):
            raise ConfigError(f"{path}.antithetic", "expected true or false")
        kwargs["antithetic"] = d["antithetic"]
    cfg = _build(path, McConfig, **kwargs)
    check_mc_steps(cfg, model)
    return cfg


def check_mc_steps(cfg: McConfig, model: RateModel) -> None:
    if not isinstance(model, FixedRate) and cfg.n_steps < MIN_STOCHASTIC_STEPS:
        raise ConfigError(
            "mc.n_steps", f"stochastic rates need at least {MIN_STOCHASTIC_STEPS} steps, got {cfg.n_steps}"
        )


def _parse_sweep(data: Any, base: RunConfig) -> Sweep:
    path = "sweep"
    d = _section(data, path)
    _check_keys(d, path, ("param", "values"))
    param = d["param"]
    if param not in SWEEP_PARAMS:
        raise ConfigError(f"{path}.param", f"expected one of {', '.join(SWEEP_PARAMS)}, got {param!r}")
    values = d["values"]
    if not isinstance(values, list) or not values:
        raise ConfigError(f"{path}.values", "expected a non-empty list")
    parsed = []
    for i, v in enumerate(values):
        item_path = f"{path}.values[{i}]"
        if param == "n_trades":
            if isinstance(v, bool) or not isinstance(v, int):
                raise ConfigError(item_path, f"expected an integer, got {v!r}")
        elif isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(item_path, f"expected a number, got {v!r}")
        else:
            v = float(v)
        try:
            trial = base.with_param(param, v)
            if isinstance(trial.strategy, PutStrategy):
                put_ladder(trial.strategy)
        except ValueError as exc:
            raise ConfigError(item_path, str(exc)) from None
        parsed.append(v)
    return Sweep(param, tuple(parsed))


def _parse_quadrature(data: Any) -> QuadratureSpec:
    path = "quadrature"
    d = _section(data, path)
    _check_keys(d, path, (), ("abs_tolerance", "max_subdivisions"))
    kwargs = {}
    if "abs_tolerance" in d:
        kwargs["abs_tolerance"] = _number(d, "abs_tolerance", path)
    if "max_subdivisions" in d:
        kwargs["max_subdivisions"] = _integer(d, "max_subdivisions", path)
    return _build(path, QuadratureSpec, **kwargs)


def parse_config(data: Any) -> RunConfig:
    d = _section(data, "")
    _check_keys(
        d, "", ("market", "option_kind", "strategy", "rate_model"), ("mc", "sweep", "quadrature")
    )
    kind = d["option_kind"]
    if kind not in ("call", "put"):
        raise ConfigError("option_kind", f"expected call or put, got {kind!r}")
    market = _parse_market(d["market"])
    strategy = _parse_strategy(d["strategy"], kind)
    model = _parse_rate_model(d["rate_model"])
    cfg = RunConfig(market=market, option_kind=kind, strategy=strategy, rate_model=model)
    if "quadrature" in d:
        cfg = dataclasses.replace(cfg, quadrature=_parse_quadrature(d["quadrature"]))
    if d.get("mc") is not None:
        cfg = dataclasses.replace(cfg, mc=_parse_mc(d["mc"], model))
    if d.get("sweep") is not None:
        cfg = dataclasses.replace(cfg, sweep=_parse_sweep(d["sweep"], cfg))
    return cfg


def load_config(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("", f"cannot read config {path}: {exc.strerror}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("", f"cannot parse config {path}: {exc}") from None
    return parse_config(data)


# ---------------------------------------------------------------------------
# serialisation
# ---------------------------------------------------------------------------


def _rate_model_dict(model: RateModel) -> dict:
    if isinstance(model, FixedRate):
        return {"type": "fixed", "r": model.r}
    if isinstance(model, Vasicek):
        return {"type": "vasicek", "a": model.a, "theta": model.theta, "rate_vol": model.rate_vol, "r0": model.r0}
    to_dict = getattr(model.theta_fn, "to_dict", None)
    if to_dict is None:
        raise TypeError("only preset theta functions can be serialised")
    return {"type": "hull_white", "a": model.a, "theta": to_dict(), "rate_vol": model.rate_vol, "r0": model.r0}


def config_to_dict(cfg: RunConfig) -> dict:
    out: dict[str, Any] = {
        "option_kind": cfg.option_kind,
        "market": dataclasses.asdict(cfg.market),
        "strategy": dataclasses.asdict(cfg.strategy),
        "rate_model": _rate_model_dict(cfg.rate_model),
        "quadrature": dataclasses.asdict(cfg.quadrature),
    }
    if cfg.mc is not None:
        out["mc"] = dataclasses.asdict(cfg.mc)
    if cfg.sweep is not None:
        out["sweep"] = {"param": cfg.sweep.param, "values": list(cfg.sweep.values)}
    return out


def dump_config(cfg: RunConfig) -> str:
    return yaml.safe_dump(config_to_dict(cfg), sort_keys=False)

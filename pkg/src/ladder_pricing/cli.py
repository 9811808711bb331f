"""Command line front end: ``price``, ``sweep`` and ``mc-check``.

Exit codes: 0 success/PASS, 2 config error, 3 numeric error, 4 MC mismatch.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import sys
from functools import partial

from . import mc_oracle, pricer, rates, strategy
from .config import ConfigError, RunConfig, check_mc_steps, load_config
from .numerics import QuadratureError
from .strategy import BandKind

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_MISMATCH = 4

SWEEP_COLUMNS = (
    "param",
    "value",
    "strategy_price",
    "vanilla_price",
    "discount_pct",
    "deep_band_mass",
    "vanilla_band_mass",
    "saturated_band_mass",
)


def fmt(x: float) -> str:
    """12 significant digits, locale independent."""
    return format(x, ".12g")


def discount_pct(price: float, vanilla: float) -> float:
    return 100.0 * (1.0 - price / vanilla) if vanilla > 0 else 0.0


def _describe_strategy(s) -> str:
    return f"alpha={fmt(s.alpha)} beta={fmt(s.beta)} n_trades={s.n_trades} strike={fmt(s.strike)}"


def _describe_model(model) -> str:
    if isinstance(model, rates.FixedRate):
        return f"fixed r={fmt(model.r)}"
    if isinstance(model, rates.Vasicek):
        return (
            f"vasicek a={fmt(model.a)} theta={fmt(model.theta)} "
            f"rate_vol={fmt(model.rate_vol)} r0={fmt(model.r0)}"
        )
    theta = model.theta_fn.to_dict() if hasattr(model.theta_fn, "to_dict") else "callable"
    return f"hull_white a={fmt(model.a)} theta={theta} rate_vol={fmt(model.rate_vol)} r0={fmt(model.r0)}"


def _law(cfg: RunConfig, log_mean_shift: float = 0.0) -> rates.TerminalLaw:
    law = rates.terminal_law(cfg.market, cfg.rate_model, cfg.quadrature)
    return law.shifted(log_mean_shift) if log_mean_shift else law


def _evaluate(cfg: RunConfig):
    law = _law(cfg)
    breakdown = pricer.price(cfg.strategy, law)
    vanilla = pricer.vanilla_price(cfg.option_kind, cfg.strategy.strike, law)
    return law, breakdown, vanilla


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_price(cfg: RunConfig, out) -> int:
    law, bd, vanilla = _evaluate(cfg)
    print(f"option          {cfg.option_kind}", file=out)
    print(f"strategy        {_describe_strategy(cfg.strategy)}", file=out)
    print(f"rate model      {_describe_model(cfg.rate_model)}", file=out)
    print(f"price           {fmt(bd.price)}", file=out)
    print(f"discount        {fmt(bd.discount)}", file=out)
    print(f"vanilla price   {fmt(vanilla)}", file=out)
    print(f"discount pct    {fmt(discount_pct(bd.price, vanilla))}", file=out)
    print("", file=out)
    header = f"{'band':<14}{'lower':>16}{'upper':>16}{'mass':>20}{'stock_leg':>20}{'cash_leg':>20}"
    print(header, file=out)
    for t in bd.band_terms:
        print(
            f"{str(t.band):<14}{fmt(t.lower):>16}{fmt(t.upper):>16}"
            f"{fmt(t.prob_mass):>20}{fmt(t.stock_leg):>20}{fmt(t.cash_leg):>20}",
            file=out,
        )
    return EXIT_OK


def sweep_rows(cfg: RunConfig):
    """One row (as a list of strings) per sweep value, in :data:`SWEEP_COLUMNS` order."""
    rows = []
    for value in cfg.sweep.values:
        point = cfg.with_param(cfg.sweep.param, value)
        _, bd, vanilla = _evaluate(point)
        rows.append(
            [
                cfg.sweep.param,
                str(value) if isinstance(value, int) else fmt(value),
                fmt(bd.price),
                fmt(vanilla),
                fmt(discount_pct(bd.price, vanilla)),
                fmt(bd.mass_of(BandKind.BAND)),
                fmt(bd.mass_of(BandKind.VANILLA)),
                fmt(bd.mass_of(BandKind.SATURATED)),
            ]
        )
    return rows


def cmd_sweep(cfg: RunConfig, out) -> int:
    if cfg.sweep is None:
        raise ConfigError("sweep", "section required for the sweep command")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    writer.writerows(sweep_rows(cfg))
    return EXIT_OK


def cmd_mc_check(cfg: RunConfig, out, workers: int = 1, log_mean_shift: float = 0.0) -> int:
    if cfg.mc is None:
        raise ConfigError("mc", "section required for the mc-check command")
    law = _law(cfg, log_mean_shift)
    closed = pricer.price(cfg.strategy, law).price
    pay = partial(strategy.payoff, s=cfg.strategy)
    terminal = mc_oracle.sample_terminal(law, pay, cfg.mc, workers=workers)
    path = mc_oracle.simulate_paths(
        cfg.market, cfg.rate_model, pay, cfg.mc, workers=workers, spec=cfg.quadrature
    )
    ok_terminal = terminal.within(closed)
    ok_path = path.within(closed)
    mc = cfg.mc
    print(f"option            {cfg.option_kind}", file=out)
    print(f"strategy          {_describe_strategy(cfg.strategy)}", file=out)
    print(f"rate model        {_describe_model(cfg.rate_model)}", file=out)
    print(f"mc                paths={mc.n_paths} steps={mc.n_steps} seed={mc.seed} antithetic={mc.antithetic}", file=out)
    print(f"closed form       {fmt(closed)}", file=out)
    print(f"terminal draws    {fmt(terminal.mean)} +- {fmt(terminal.std_error)}  {'ok' if ok_terminal else 'MISMATCH'}", file=out)
    print(f"path simulation   {fmt(path.mean)} +- {fmt(path.std_error)}  {'ok' if ok_path else 'MISMATCH'}", file=out)
    passed = ok_terminal and ok_path
    print(f"result            {'PASS' if passed else 'FAIL'} (3 standard errors)", file=out)
    return EXIT_OK if passed else EXIT_MISMATCH


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ladder-pricing",
        description="Price options held with a discrete linear investment strategy.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("price", "closed-form price with band breakdown"),
        ("sweep", "CSV of prices over one parameter"),
        ("mc-check", "verify the closed form against both Monte Carlo oracles"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="YAML or JSON run configuration")
        p.add_argument("--out", help="write output here instead of stdout")
        p.add_argument("--seed", type=int, help="override mc.seed")
        p.add_argument("--paths", type=int, help="override mc.n_paths")
        p.add_argument("--steps", type=int, help="override mc.n_steps")
        p.add_argument("--workers", type=int, default=1, help="threads for Monte Carlo blocks")
        if name == "mc-check":
            # sensitivity hook for harness tests
            p.add_argument("--log-mean-shift", type=float, default=0.0, help=argparse.SUPPRESS)
    return parser


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    overrides = {
        field: value
        for field, value in (("seed", args.seed), ("n_paths", args.paths), ("n_steps", args.steps))
        if value is not None
    }
    if not overrides:
        return cfg
    if cfg.mc is None:
        raise ConfigError("mc", "--seed/--paths/--steps need an mc section")
    try:
        mc = dataclasses.replace(cfg.mc, **overrides)
    except ValueError as exc:
        raise ConfigError("mc", str(exc)) from None
    check_mc_steps(mc, cfg.rate_model)
    return dataclasses.replace(cfg, mc=mc)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    buffer = io.StringIO()
    try:
        cfg = _apply_overrides(load_config(args.config), args)
        if args.workers < 1:
            raise ConfigError("--workers", "must be at least 1")
        if args.command == "price":
            code = cmd_price(cfg, buffer)
        elif args.command == "sweep":
            code = cmd_sweep(cfg, buffer)
        else:
            code = cmd_mc_check(cfg, buffer, workers=args.workers, log_mean_shift=args.log_mean_shift)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except QuadratureError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(buffer.getvalue())
    else:
        sys.stdout.write(buffer.getvalue())
    return code


if __name__ == "__main__":
    sys.exit(main())

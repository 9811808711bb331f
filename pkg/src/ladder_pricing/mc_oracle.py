"""Monte Carlo oracles for the closed-form pricer.

Two independent estimators:

* ``sample_terminal`` draws ``ln S_T`` straight from a :class:`TerminalLaw`,
  checking the band integration of the pricer.
* ``simulate_paths`` simulates the short rate on a time grid under the
  risk-neutral measure (exact Gaussian transitions), discounts each path with
  the trapezoidal integral of the rate, and so checks the laws and bond
  prices of :mod:`ladder_pricing.rates` end to end.

Paths are generated in fixed-size blocks, each with its own generator keyed
by ``(seed, block index)``; block statistics are merged in block order. The
result is therefore identical for any number of worker threads.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .numerics import DEFAULT_QUADRATURE, QuadratureSpec, integrate
from .rates import FixedRate, HullWhite, MarketParams, RateModel, TerminalLaw, Vasicek

BLOCK_SIZE = 1 << 16
MIN_STOCHASTIC_STEPS = 64

Payoff = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class McConfig:
    n_paths: int
    n_steps: int = 1
    seed: int = 0
    antithetic: bool = False

    def __post_init__(self):
        if int(self.n_paths) != self.n_paths or self.n_paths < 2:
            raise ValueError(f"n_paths must be an integer >= 2, got {self.n_paths}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ValueError(f"n_steps must be a positive integer, got {self.n_steps}")
        if not (0 <= self.seed < 2**64):
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.antithetic and (self.n_paths % 2 or self.n_paths < 4):
            raise ValueError("antithetic sampling needs an even n_paths >= 4")


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    n_paths: int
    seed: int

    def within(self, target: float, n_se: float = 3.0) -> bool:
        return abs(self.mean - target) <= n_se * self.std_error


def unit_payoff(s_T):
    return np.ones_like(s_T)


@dataclass
class _Stats:
    """Running count/mean/sum of squared deviations (Chan et al. merge)."""

    n: int = 0
    mean: float = 0.0
    m2: float = 0.0

    @classmethod
    def of(cls, x: np.ndarray) -> "_Stats":
        mean = float(np.mean(x))
        return cls(x.size, mean, float(np.sum((x - mean) ** 2)))

    def merge(self, other: "_Stats") -> None:
        if other.n == 0:
            return
        n = self.n + other.n
        delta = other.mean - self.mean
        self.mean += delta * other.n / n
        self.m2 += other.m2 + delta * delta * self.n * other.n / n
        self.n = n


def _block_sizes(n_paths: int) -> list[int]:
    full, rest = divmod(n_paths, BLOCK_SIZE)
    return [BLOCK_SIZE] * full + ([rest] if rest else [])


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, block])))


def _normals(rng: np.random.Generator, size: int, antithetic: bool) -> np.ndarray:
    if antithetic:
        z = rng.standard_normal(size // 2)
        return np.concatenate((z, -z))
    return rng.standard_normal(size)


def _effective(x: np.ndarray, antithetic: bool) -> np.ndarray:
    if antithetic:
        half = x.size // 2
        return 0.5 * (x[:half] + x[half:])
    return x


def _apply(payoff: Payoff, s_T: np.ndarray) -> np.ndarray:
    return np.broadcast_to(np.asarray(payoff(s_T), dtype=float), s_T.shape)


def _run(cfg: McConfig, block_fn, n_outputs: int, workers: int) -> list[McEstimate]:
    sizes = _block_sizes(cfg.n_paths)

    def one(b):
        outputs = block_fn(_block_rng(cfg.seed, b), sizes[b])
        return [_Stats.of(_effective(x, cfg.antithetic)) for x in outputs]

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_block = list(pool.map(one, range(len(sizes))))
    else:
        per_block = [one(b) for b in range(len(sizes))]

    totals = [_Stats() for _ in range(n_outputs)]
    for block_stats in per_block:
        for total, st in zip(totals, block_stats):
            total.merge(st)
    out = []
    for st in totals:
        var = st.m2 / (st.n - 1) if st.n > 1 else 0.0
        out.append(McEstimate(st.mean, math.sqrt(var / st.n), cfg.n_paths, cfg.seed))
    return out


# ---------------------------------------------------------------------------
# terminal draws
# ---------------------------------------------------------------------------


def sample_terminal_batch(
    law: TerminalLaw, payoffs: Sequence[Payoff], cfg: McConfig, workers: int = 1
) -> list[McEstimate]:
    """Discounted payoff estimates for several payoffs on the same draws of S_T."""
    sd = law.log_sd

    def block(rng, size):
        s_T = np.exp(law.log_mean + sd * _normals(rng, size, cfg.antithetic))
        return [_apply(p, s_T) for p in payoffs]

    estimates = _run(cfg, block, len(payoffs), workers)
    # discounting after averaging keeps a constant payoff exact
    return [
        McEstimate(e.mean * law.discount, e.std_error * law.discount, e.n_paths, e.seed)
        for e in estimates
    ]


def sample_terminal(
    law: TerminalLaw, payoff: Payoff, cfg: McConfig, workers: int = 1
) -> McEstimate:
    """Estimate ``discount * E[payoff(S_T)]`` with ``ln S_T ~ N(log_mean, log_var)``.

    ``payoff`` must accept and return numpy arrays.
    """
    return sample_terminal_batch(law, [payoff], cfg, workers)[0]


# ---------------------------------------------------------------------------
# path simulation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _RatePlan:
    r0: float
    decay: float
    drift: np.ndarray  # deterministic part of each exact transition
    noise_sd: float
    dt: float


def _rate_plan(model: RateModel, T: float, n_steps: int, spec: QuadratureSpec) -> _RatePlan:
    dt = T / n_steps
    a = model.a
    decay = math.exp(-a * dt)
    b_dt = -math.expm1(-a * dt) / a
    noise_sd = model.rate_vol * math.sqrt(-math.expm1(-2.0 * a * dt) / (2.0 * a))
    if isinstance(model, Vasicek):
        drift = np.full(n_steps, model.theta * b_dt)
    else:
        theta = model.theta_fn
        kinks = getattr(theta, "breakpoints", ())
        drift = np.empty(n_steps)
        for k in range(n_steps):
            t0, t1 = k * dt, (k + 1) * dt
            drift[k] = integrate(
                lambda s, t1=t1: theta(s) * math.exp(-a * (t1 - s)), t0, t1, spec, kinks
            )
    return _RatePlan(model.r0, decay, drift, noise_sd, dt)


def _check_steps(model: RateModel, n_steps: int) -> None:
    if not isinstance(model, FixedRate) and n_steps < MIN_STOCHASTIC_STEPS:
        raise ValueError(
            f"stochastic rates need at least {MIN_STOCHASTIC_STEPS} steps "
            f"(step <= T/{MIN_STOCHASTIC_STEPS}), got {n_steps}"
        )


def _path_block(m: MarketParams, model: RateModel, plan, rng, size, antithetic, coarsen):
    """(discount, S_T) arrays on the fine grid and, if ``coarsen``, on every other node."""
    t = m.maturity
    if isinstance(model, FixedRate):
        integrals = [np.full(size, model.r * t)]
    else:
        r = np.full(size, plan.r0)
        fine = np.zeros(size)
        coarse = np.zeros(size)
        r_even = r
        for k, drift in enumerate(plan.drift):
            r_next = r * plan.decay + drift + plan.noise_sd * _normals(rng, size, antithetic)
            fine += 0.5 * plan.dt * (r + r_next)
            if coarsen and k % 2 == 1:
                coarse += plan.dt * (r_even + r_next)
                r_even = r_next
            r = r_next
        integrals = [fine, coarse] if coarsen else [fine]
    # equity driver is independent of the rate; only W1(T) enters ln S_T
    z1 = _normals(rng, size, antithetic)
    diffusion = math.log(m.spot) - 0.5 * m.equity_vol**2 * t + m.equity_vol * math.sqrt(t) * z1
    return [(np.exp(-I), np.exp(diffusion + I)) for I in integrals]


def _simulate(m, model, payoffs, cfg, workers, spec, coarsen):
    if coarsen and cfg.n_steps % 2:
        raise ValueError("step halving needs an even number of fine steps")
    plan = None if isinstance(model, FixedRate) else _rate_plan(model, m.maturity, cfg.n_steps, spec)

    def block(rng, size):
        states = _path_block(m, model, plan, rng, size, cfg.antithetic, coarsen)
        return [disc * _apply(p, s_T) for disc, s_T in states for p in payoffs]

    n_res = 2 if coarsen and plan is not None else 1
    return _run(cfg, block, n_res * len(payoffs), workers)


def simulate_paths_batch(
    m: MarketParams,
    model: RateModel,
    payoffs: Sequence[Payoff],
    cfg: McConfig,
    workers: int = 1,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
) -> list[McEstimate]:
    _check_steps(model, cfg.n_steps)
    return _simulate(m, model, payoffs, cfg, workers, spec, coarsen=False)


def simulate_paths(
    m: MarketParams,
    model: RateModel,
    payoff: Payoff,
    cfg: McConfig,
    workers: int = 1,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
) -> McEstimate:
    """Estimate ``E[exp(-int_0^T r dt) payoff(S_T)]`` by joint simulation of (r, S).

    Raises ``ValueError`` for stochastic rates with fewer than 64 steps.
    """
    return simulate_paths_batch(m, model, [payoff], cfg, workers, spec)[0]


@dataclass(frozen=True)
class HalvingCheck:
    coarse: McEstimate
    fine: McEstimate

    @property
    def shift(self) -> float:
        return self.fine.mean - self.coarse.mean


def step_halving(
    m: MarketParams,
    model: RateModel,
    payoffs: Sequence[Payoff],
    cfg: McConfig,
    workers: int = 1,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
) -> list[HalvingCheck]:
    """Compare ``cfg.n_steps`` against ``2 * cfg.n_steps`` on common random numbers.

    The coarse path is the fine path observed at every other node, so the
    difference isolates discretisation bias from sampling noise.
    """
    _check_steps(model, cfg.n_steps)
    fine_cfg = McConfig(cfg.n_paths, 2 * cfg.n_steps, cfg.seed, cfg.antithetic)
    out = _simulate(m, model, payoffs, fine_cfg, workers, spec, coarsen=True)
    k = len(payoffs)
    if len(out) == k:  # fixed rate: no discretisation at all
        return [HalvingCheck(e, e) for e in out]
    fine, coarse = out[:k], out[k:]
    return [HalvingCheck(c, f) for c, f in zip(coarse, fine)]

"""Monte Carlo outage and sum-rate sweeps.

Trials are partitioned into fixed-size chunks; every chunk owns an RNG
stream spawned from the master seed by (domain, grid-point, chunk) key,
so results are identical for any worker count and workers only decide
which chunks run where. Within a trial the far user's envelopes are
drawn before the near user's. All schemes replay the same streams, so
scheme comparisons are paired (common random numbers).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import allocation
from .allocation import PaRequest, allocate
from .channel import (FadingModel, combine_channels, direct_channel_matrix,
                      ris_channel_matrix, sample_nakagami)
from .config import FAR, NEAR, ScenarioConfig
from .noma import LinkBudget, capacity, channel_gain, sinr_cross, sinr_own

CHUNK = 1024  # trials per RNG stream; fixed, never derived from worker count

_DOMAIN_OUTAGE = 1
_DOMAIN_SUMRATE = 2

OUTAGE_SCHEMES = (allocation.FIXED, allocation.FAIR)
SUMRATE_SCHEMES = (allocation.FIXED, allocation.FAIR, allocation.IMPROVED, "baseline")


@dataclass(frozen=True)
class SweepSpec:
    variable: str        # "target_rate" or "tx_power_dbm"
    grid: tuple
    trials: int
    schemes: tuple
    master_seed: int

    def __post_init__(self):
        if self.variable not in ("target_rate", "tx_power_dbm"):
            raise ValueError(f"unknown sweep variable {self.variable!r}")
        if len(self.grid) == 0:
            raise ValueError("sweep grid is empty")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ValueError("sweep grid must be strictly increasing")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if len(self.schemes) == 0:
            raise ValueError("no schemes selected")
        for s in self.schemes:
            if s not in allocation.SCHEMES and s != "baseline":
                raise ValueError(f"unknown scheme {s!r}")


@dataclass(frozen=True)
class SweepResult:
    variable: str
    grid: tuple
    schemes: tuple
    # per scheme: {"near_outage", "far_outage", "sum_rate", and "*_stderr"}
    series: dict
    scenario: dict
    seed: int


def non_ris_non_thz_baseline(cfg: ScenarioConfig) -> ScenarioConfig:
    """Reference link without the surface and without THz propagation.

    Free-space loss at the sub-6GHz reference carrier, Rayleigh fading,
    no molecular absorption, no misalignment, single ray. Geometry, array
    sizes and the power/noise budget carry over.
    """
    return cfg.replace(
        freespace_baseline=True,
        ris_elements=0,
        shape_m=1.0,
        absorption_coeff=0.0,
        ray_count=1,
        nlos_gains=(),
        nlos_delays=(),
    )


@lru_cache(maxsize=16)
def _deterministic_parts(cfg: ScenarioConfig):
    """Fading-free channel matrices, cached per scenario."""
    direct = tuple(direct_channel_matrix(cfg, u) for u in (FAR, NEAR))
    ris = tuple(ris_channel_matrix(cfg, u) for u in (FAR, NEAR))
    return direct, ris, FadingModel(cfg.shape_m)


def run_trial(cfg: ScenarioConfig, scheme: str, targets: tuple,
              rng: np.random.Generator) -> tuple:
    """One fading realization: (near_outage, far_outage, sum_rate).

    Draws the two users' envelopes (far first), assembles the channels,
    assigns SIC roles by ascending squared Frobenius gain, allocates power
    per the scheme using the far user's instantaneous gain, and evaluates
    capacities and outage.

    On the feasible fair branch the far capacity is R_m identically (the
    coefficient is the exact solution of the rate equation), so that value
    is used directly rather than re-rounded through the SINR chain; the
    far outage event is then exactly the infeasibility event.

    The near user's SIC clause applies only when the far message carries
    power: with alpha_m = 0 there is nothing to decode and the clause is
    vacuous.
    """
    target_far, target_near = targets
    direct, ris, fading = _deterministic_parts(cfg)
    gains = []
    for user in (FAR, NEAR):
        h = direct[user]
        if cfg.fading_enabled:
            env = sample_nakagami(fading, rng, h.shape)
            h = env * h
        gains.append(channel_gain(combine_channels(h, ris[user])))
    far_role = 0 if gains[0] <= gains[1] else 1
    g_far, g_near = gains[far_role], gains[1 - far_role]

    lb = LinkBudget(cfg.tx_power_w, cfg.noise_power_w)
    pa = allocate(scheme if scheme != "baseline" else allocation.FAIR,
                  PaRequest(g_far, lb, target_far), cfg.fixed_alpha_far)
    alpha_far = pa.allocation.coefficients[0]

    exact_fair_branch = (pa.scheme != allocation.FIXED and pa.feasible_far)
    c_far = target_far if exact_fair_branch else capacity(sinr_own(g_far, pa.allocation, 0, lb))
    c_cross = capacity(sinr_cross(g_near, pa.allocation, 0, lb))
    c_near = capacity(sinr_own(g_near, pa.allocation, 1, lb))

    sic_fail = alpha_far > 0.0 and c_cross < target_far
    near_out = sic_fail or (c_near < target_near)
    far_out = c_far < target_far
    return near_out, far_out, c_far + c_near


def _chunk_sizes(trials: int):
    full, rest = divmod(trials, CHUNK)
    sizes = [CHUNK] * full
    if rest:
        sizes.append(rest)
    return sizes


def _chunk_rng(master_seed: int, domain: int, point: int, chunk: int):
    ss = np.random.SeedSequence(entropy=master_seed,
                                spawn_key=(domain, point, chunk))
    return np.random.default_rng(ss)


def _run_chunk(cfg: ScenarioConfig, scheme: str, targets: tuple,
               master_seed: int, domain: int, point: int, chunk: int,
               n: int) -> tuple:
    """(near_count, far_count, rate_sum, rate_sumsq) over one chunk."""
    rng = _chunk_rng(master_seed, domain, point, chunk)
    near = far = 0
    rsum = rsumsq = 0.0
    for _ in range(n):
        n_out, f_out, rate = run_trial(cfg, scheme, targets, rng)
        near += n_out
        far += f_out
        rsum += rate
        rsumsq += rate * rate
    return near, far, rsum, rsumsq


def _accumulate_point(cfg: ScenarioConfig, scheme: str, targets: tuple,
                      spec: SweepSpec, domain: int, point: int,
                      executor=None) -> dict:
    sizes = _chunk_sizes(spec.trials)
    args = [(cfg, scheme, targets, spec.master_seed, domain, point, ci, n)
            for ci, n in enumerate(sizes)]
    if executor is None:
        parts = [_run_chunk(*a) for a in args]
    else:
        parts = list(executor.map(_run_chunk, *zip(*args), chunksize=4))
    # reduce in chunk order so float sums never depend on scheduling
    near = far = 0
    rsum = rsumsq = 0.0
    for pn, pf, ps, pq in parts:
        near += pn
        far += pf
        rsum += ps
        rsumsq += pq
    t = spec.trials
    p_near, p_far = near / t, far / t
    mean = rsum / t
    var = max(rsumsq / t - mean * mean, 0.0)
    return {
        "near_outage": p_near,
        "near_outage_stderr": math.sqrt(p_near * (1.0 - p_near) / t),
        "far_outage": p_far,
        "far_outage_stderr": math.sqrt(p_far * (1.0 - p_far) / t),
        "sum_rate": mean,
        "sum_rate_stderr": math.sqrt(var / t),
    }


def _run_sweep(spec: SweepSpec, cfg: ScenarioConfig, domain: int) -> SweepResult:
    executor = None
    series = {s: {k: [] for k in ("near_outage", "near_outage_stderr",
                                  "far_outage", "far_outage_stderr",
                                  "sum_rate", "sum_rate_stderr")}
              for s in spec.schemes}
    try:
        if cfg.workers > 1:
            executor = ProcessPoolExecutor(max_workers=cfg.workers)
        for point, value in enumerate(spec.grid):
            if spec.variable == "target_rate":
                point_cfg = cfg
                targets = (float(value), float(value))
            else:
                point_cfg = cfg.replace(tx_power_dbm=float(value))
                targets = (cfg.target_rate, cfg.target_rate)
            for scheme in spec.schemes:
                scheme_cfg = (non_ris_non_thz_baseline(point_cfg)
                              if scheme == "baseline" else point_cfg)
                stats = _accumulate_point(scheme_cfg, scheme, targets, spec,
                                          domain, point, executor)
                for key, val in stats.items():
                    series[scheme][key].append(val)
    finally:
        if executor is not None:
            executor.shutdown()
    series = {s: {k: np.asarray(v) for k, v in d.items()} for s, d in series.items()}
    return SweepResult(variable=spec.variable, grid=tuple(spec.grid),
                       schemes=tuple(spec.schemes), series=series,
                       scenario=cfg.as_dict(), seed=spec.master_seed)


def run_outage_sweep(spec: SweepSpec, cfg: ScenarioConfig) -> SweepResult:
    """Near/far outage vs far-user target rate R_m, with R_n = R_m."""
    if spec.variable != "target_rate":
        raise ValueError("outage sweeps vary target_rate")
    return _run_sweep(spec, cfg, _DOMAIN_OUTAGE)


def run_sumrate_sweep(spec: SweepSpec, cfg: ScenarioConfig) -> SweepResult:
    """Mean achieved sum rate vs transmit power (dBm)."""
    if spec.variable != "tx_power_dbm":
        raise ValueError("sum-rate sweeps vary tx_power_dbm")
    return _run_sweep(spec, cfg, _DOMAIN_SUMRATE)

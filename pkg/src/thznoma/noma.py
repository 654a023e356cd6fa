"""Two-user power-domain NOMA: SIC-ordered SINRs, capacities, outage tests.

Users are indexed in SIC order: index 0 is the far (weakest-gain) user,
the last index the near (strongest) user. MIMO structure is collapsed to
squared Frobenius-norm channel gains; noise enters as the scalar variance
per receive dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PowerAllocation:
    coefficients: tuple  # alpha_k, SIC order far..near

    def __post_init__(self):
        for a in self.coefficients:
            if not (math.isfinite(a) and -1e-12 <= a <= 1.0 + 1e-12):
                raise ValueError(f"allocation coefficient out of [0,1]: {a!r}")
        s = sum(self.coefficients)
        if abs(s - 1.0) > 1e-12:
            raise ValueError(f"allocation coefficients sum to {s!r}, expected 1")


@dataclass(frozen=True)
class LinkBudget:
    tx_power_w: float     # p_o
    noise_power_w: float  # sigma^2_o

    def __post_init__(self):
        if not (math.isfinite(self.tx_power_w) and self.tx_power_w >= 0):
            raise ValueError(f"tx_power_w must be >= 0, got {self.tx_power_w!r}")
        if not (math.isfinite(self.noise_power_w) and self.noise_power_w > 0):
            raise ValueError(f"noise_power_w must be > 0, got {self.noise_power_w!r}")


@dataclass(frozen=True)
class SinrReport:
    """SINRs of one fading realization: own-message per user plus the
    cross-decoding values hit during SIC (user k decoding message j < k)."""
    own: tuple            # zeta_k, SIC order
    cross: tuple          # ((k, j), zeta_{k->j}) pairs, j < k


def channel_gain(h: np.ndarray) -> float:
    """Squared Frobenius norm ||H||^2 = trace(H H^H)."""
    h = np.asarray(h)
    return float(np.sum(h.real ** 2) + np.sum(h.imag ** 2))


def _interference(gain: float, pa: PowerAllocation, upto: int, lb: LinkBudget) -> float:
    # power of messages decoded after index `upto` plus noise
    tail = sum(pa.coefficients[upto + 1:])
    return lb.tx_power_w * gain * tail + lb.noise_power_w


def sinr_cross(gain_n: float, pa: PowerAllocation, m: int, lb: LinkBudget) -> float:
    """SINR at a stronger user decoding the weaker user's message m.

    zeta_{n->m} = p alpha_m g_n / (p g_n sum_{l>m} alpha_l + sigma^2).
    """
    k = len(pa.coefficients)
    if not 0 <= m < k - 1:
        raise IndexError(f"cross-decoding index {m} out of range for {k} users")
    return lb.tx_power_w * pa.coefficients[m] * gain_n / _interference(gain_n, pa, m, lb)


def sinr_own(gain_k: float, pa: PowerAllocation, k: int, lb: LinkBudget) -> float:
    """Own-message SINR after SIC removed all weaker-user messages.

    zeta_k = p alpha_k g_k / (p g_k sum_{l>k} alpha_l + sigma^2); the
    interference sum is empty for the last (nearest) user.
    """
    n = len(pa.coefficients)
    if not 0 <= k < n:
        raise IndexError(f"user index {k} out of range for {n} users")
    return lb.tx_power_w * pa.coefficients[k] * gain_k / _interference(gain_k, pa, k, lb)


def build_sinr_report(gains, pa: PowerAllocation, lb: LinkBudget) -> SinrReport:
    """All SIC-stage SINRs for gains listed in SIC order."""
    n = len(pa.coefficients)
    if len(gains) != n:
        raise ValueError(f"{len(gains)} gains for {n} allocation coefficients")
    own = tuple(sinr_own(gains[k], pa, k, lb) for k in range(n))
    cross = tuple(((k, j), sinr_cross(gains[k], pa, j, lb))
                  for k in range(n) for j in range(k))
    return SinrReport(own=own, cross=cross)


def capacity(sinr: float) -> float:
    """Shannon spectral efficiency log2(1 + sinr), bits/s/Hz."""
    if sinr < 0:
        raise ValueError(f"sinr must be >= 0, got {sinr!r}")
    return math.log2(1.0 + sinr)


def outage_indicators(c_cross: float, c_near: float, c_far: float,
                      target_far: float, target_near: float) -> tuple:
    """(near_outage, far_outage) for one realization.

    Near user fails if it cannot decode the far message at the far target
    (SIC stage) or its own message at its own target:
        near = (C_{n->m} < R_m) or (C_n < R_n)
    Far user fails on its own message alone:
        far = C_m < R_m
    """
    if target_far < 0 or target_near < 0:
        raise ValueError("target rates must be >= 0")
    near = (c_cross < target_far) or (c_near < target_near)
    far = c_far < target_far
    return near, far

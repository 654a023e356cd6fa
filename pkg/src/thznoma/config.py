"""Scenario configuration: defaults, validation, INI parsing, array geometry.

The default scenario is a two-user downlink NOMA pair served by a 16x16
MIMO link at 0.3 THz with a 200-element reflecting surface. The far user
(index 0) sits 500 m from the BS and 150 m from the surface; the near
user (index 1) at 250 m / 250 m. The surface is 100 m from the BS.
"""

from __future__ import annotations

import configparser
import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

SPEED_OF_LIGHT = 3.0e8  # m/s

FAR, NEAR = 0, 1


class ConfigError(ValueError):
    """Raised when a scenario field violates its constraint."""

    def __init__(self, field_name, constraint, value):
        self.field_name = field_name
        self.constraint = constraint
        self.value = value
        super().__init__(f"config field '{field_name}': expected {constraint}, got {value!r}")


@dataclass(frozen=True)
class ScenarioConfig:
    # carrier and medium
    frequency_hz: float = 0.3e12          # f
    absorption_coeff: float = 0.0033      # kappa(f), 1/m
    # beam misalignment
    aperture_radius_m: float = 0.1        # a
    beamwidth_m: float = 0.2              # effective beam waist at receiver
    pointing_error_m: float = 0.05        # l_e, deterministic per run
    # arrays
    bs_antennas: int = 16                 # N
    user_antennas: int = 16               # M_k, same for both users
    # reflecting surface
    ris_elements: int = 200               # R
    ris_reflection: float = 1.0           # eta_r, shared by all elements
    ris_phase_mode: str = "random"        # "random" | "zero"
    ris_phase_seed: int = 146             # seed for the random phase profile
    # geometry (m); far user = NOMA index 0, near user = index 1
    bs_user_distance_far: float = 500.0
    bs_user_distance_near: float = 250.0
    ris_user_distance_far: float = 150.0
    ris_user_distance_near: float = 250.0
    bs_ris_distance: float = 100.0
    # multi-ray direct channel: 1 LoS ray plus ray_count-1 NLoS rays
    ray_count: int = 4                    # Q
    nlos_gains: tuple = (0.25, 0.18, 0.12)
    nlos_delays: tuple = (1.3e-11, 2.9e-11, 4.7e-11)  # s, excess delays
    # fading
    shape_m: float = 1.0                  # Nakagami shape, m=1 is Rayleigh
    fading_enabled: bool = True
    # power and noise
    tx_power_dbm: float = 30.0            # p_o
    bandwidth_hz: float = 1.0e7           # BW for thermal noise
    noise_figure_db: float = 1.8          # NF
    noise_power_dbm: float | None = None  # overrides the thermal formula when set
    # NOMA
    fixed_alpha_far: float = 0.8          # fixed-PA far-user coefficient
    target_rate: float = 0.5              # R_m for sum-rate sweeps, bits/s/Hz
    # Monte Carlo
    trials: int = 100000
    workers: int = 1
    # sub-6GHz free-space reference link (no surface, no absorption)
    freespace_baseline: bool = False
    baseline_frequency_hz: float = 3.5e9

    def __post_init__(self):
        _validate(self)

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / self.frequency_hz

    @property
    def tx_power_w(self) -> float:
        return 10.0 ** (self.tx_power_dbm / 10.0) * 1e-3

    @property
    def noise_power_w(self) -> float:
        """Thermal noise -174 dBm/Hz + 10log10(BW) + NF unless overridden."""
        if self.noise_power_dbm is not None:
            dbm = self.noise_power_dbm
        else:
            dbm = -174.0 + 10.0 * math.log10(self.bandwidth_hz) + self.noise_figure_db
        return 10.0 ** (dbm / 10.0) * 1e-3

    def ris_phases(self) -> np.ndarray:
        """Phase profile phi_r of the surface, radians, shape (R,)."""
        if self.ris_phase_mode == "zero":
            return np.zeros(self.ris_elements)
        rng = np.random.default_rng(self.ris_phase_seed)
        return rng.uniform(0.0, 2.0 * np.pi, self.ris_elements)

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


_POSITIVE = (
    "frequency_hz", "aperture_radius_m", "beamwidth_m", "bandwidth_hz",
    "bs_user_distance_far", "bs_user_distance_near", "ris_user_distance_far",
    "ris_user_distance_near", "bs_ris_distance", "baseline_frequency_hz",
)
_NONNEGATIVE = ("absorption_coeff", "pointing_error_m", "target_rate")


def _validate(cfg: ScenarioConfig):
    for name in _POSITIVE:
        v = getattr(cfg, name)
        if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
            raise ConfigError(name, "a finite value > 0", v)
    for name in _NONNEGATIVE:
        v = getattr(cfg, name)
        if not (isinstance(v, (int, float)) and math.isfinite(v) and v >= 0):
            raise ConfigError(name, "a finite value >= 0", v)
    if not (isinstance(cfg.bs_antennas, int) and cfg.bs_antennas >= 1):
        raise ConfigError("bs_antennas", "an integer >= 1", cfg.bs_antennas)
    if not (isinstance(cfg.user_antennas, int) and cfg.user_antennas >= 1):
        raise ConfigError("user_antennas", "an integer >= 1", cfg.user_antennas)
    if not (isinstance(cfg.ris_elements, int) and cfg.ris_elements >= 0):
        raise ConfigError("ris_elements", "an integer >= 0", cfg.ris_elements)
    if not (0.0 <= cfg.ris_reflection <= 1.0):
        raise ConfigError("ris_reflection", "a value in [0, 1]", cfg.ris_reflection)
    if cfg.ris_phase_mode not in ("random", "zero"):
        raise ConfigError("ris_phase_mode", "'random' or 'zero'", cfg.ris_phase_mode)
    if not (isinstance(cfg.ray_count, int) and cfg.ray_count >= 1):
        raise ConfigError("ray_count", "an integer >= 1", cfg.ray_count)
    if len(cfg.nlos_gains) != cfg.ray_count - 1:
        raise ConfigError("nlos_gains", f"length ray_count-1 = {cfg.ray_count - 1}",
                          list(cfg.nlos_gains))
    if len(cfg.nlos_delays) != cfg.ray_count - 1:
        raise ConfigError("nlos_delays", f"length ray_count-1 = {cfg.ray_count - 1}",
                          list(cfg.nlos_delays))
    if any(d < 0 for d in cfg.nlos_delays):
        raise ConfigError("nlos_delays", "all delays >= 0", list(cfg.nlos_delays))
    if not cfg.shape_m >= 0.5:
        raise ConfigError("shape_m", "a value >= 0.5", cfg.shape_m)
    if not math.isfinite(cfg.tx_power_dbm):
        raise ConfigError("tx_power_dbm", "a finite value", cfg.tx_power_dbm)
    if cfg.noise_power_dbm is not None and not math.isfinite(cfg.noise_power_dbm):
        raise ConfigError("noise_power_dbm", "a finite value or unset", cfg.noise_power_dbm)
    if not (0.0 <= cfg.fixed_alpha_far <= 1.0):
        raise ConfigError("fixed_alpha_far", "a value in [0, 1]", cfg.fixed_alpha_far)
    if not (isinstance(cfg.trials, int) and cfg.trials >= 1):
        raise ConfigError("trials", "an integer >= 1", cfg.trials)
    if not (isinstance(cfg.workers, int) and cfg.workers >= 1):
        raise ConfigError("workers", "an integer >= 1", cfg.workers)


# ---------------------------------------------------------------------------
# geometry

def ula_offsets(count: int, spacing_m: float) -> np.ndarray:
    """Element offsets of a centered uniform linear array along one axis."""
    return (np.arange(count) - (count - 1) / 2.0) * spacing_m


def pairwise_distances(axial_m: float, offsets_a: np.ndarray,
                       offsets_b: np.ndarray) -> np.ndarray:
    """Exact distances between two broadside ULAs separated axially.

    Arrays sit in parallel planes a distance axial_m apart; element i of
    array A and element j of array B are offset transversally. Returns
    shape (len(a), len(b)).
    """
    if axial_m <= 0:
        raise ConfigError("distance", "a link distance > 0", axial_m)
    return np.sqrt(axial_m ** 2 + (offsets_a[:, None] - offsets_b[None, :]) ** 2)


@dataclass(frozen=True)
class UserGeometry:
    """Per-user antenna-pair and surface-path distances (m)."""
    bs_user_m: np.ndarray        # (N, M) BS antenna i to user antenna j
    bs_element_m: np.ndarray     # (N, R)
    element_user_m: np.ndarray   # (R, M)


def user_geometry(cfg: ScenarioConfig, user: int) -> UserGeometry:
    """Distance matrices for one user.

    The stated link distances cannot be embedded in a single plane (the
    BS-RIS, RIS-user, BS-user triple violates the triangle inequality for
    the far user), so each link is laid out independently: two parallel
    broadside ULAs at the stated axial separation, half-wavelength spacing.
    """
    if user not in (FAR, NEAR):
        raise ConfigError("user", "0 (far) or 1 (near)", user)
    lam = SPEED_OF_LIGHT / (
        cfg.baseline_frequency_hz if cfg.freespace_baseline else cfg.frequency_hz)
    d_bs = cfg.bs_user_distance_far if user == FAR else cfg.bs_user_distance_near
    d_ris = cfg.ris_user_distance_far if user == FAR else cfg.ris_user_distance_near
    ys_bs = ula_offsets(cfg.bs_antennas, lam / 2.0)
    ys_user = ula_offsets(cfg.user_antennas, lam / 2.0)
    ys_ris = ula_offsets(max(cfg.ris_elements, 1), lam / 2.0)[:cfg.ris_elements]
    geo = UserGeometry(
        bs_user_m=pairwise_distances(d_bs, ys_bs, ys_user),
        bs_element_m=pairwise_distances(cfg.bs_ris_distance, ys_bs, ys_ris)
        if cfg.ris_elements else np.zeros((cfg.bs_antennas, 0)),
        element_user_m=pairwise_distances(d_ris, ys_ris, ys_user)
        if cfg.ris_elements else np.zeros((0, cfg.user_antennas)),
    )
    for arr in (geo.bs_user_m, geo.bs_element_m, geo.element_user_m):
        arr.setflags(write=False)
    return geo


# ---------------------------------------------------------------------------
# INI parsing
#
# Flat key = value pairs under sections named for the consuming module:
#
#   [channel]      frequency_hz, absorption_coeff, aperture_radius_m,
#                  beamwidth_m, pointing_error_m, bs_antennas, user_antennas,
#                  ris_elements, ris_reflection, ris_phase_mode, ris_phase_seed,
#                  bs_user_distance_far/near, ris_user_distance_far/near,
#                  bs_ris_distance, ray_count, nlos_gains, nlos_delays,
#                  shape_m, fading_enabled
#   [noma]         fixed_alpha_far, target_rate
#   [montecarlo]   tx_power_dbm, bandwidth_hz, noise_figure_db, noise_power_dbm,
#                  trials, workers, freespace_baseline, baseline_frequency_hz
#
# Sequences are comma-separated; booleans are true/false. Unknown sections
# or keys are rejected.

_SECTION_FIELDS = {
    "channel": (
        "frequency_hz", "absorption_coeff", "aperture_radius_m", "beamwidth_m",
        "pointing_error_m", "bs_antennas", "user_antennas", "ris_elements",
        "ris_reflection", "ris_phase_mode", "ris_phase_seed",
        "bs_user_distance_far", "bs_user_distance_near", "ris_user_distance_far",
        "ris_user_distance_near", "bs_ris_distance", "ray_count", "nlos_gains",
        "nlos_delays", "shape_m", "fading_enabled",
    ),
    "noma": ("fixed_alpha_far", "target_rate"),
    "montecarlo": (
        "tx_power_dbm", "bandwidth_hz", "noise_figure_db", "noise_power_dbm",
        "trials", "workers", "freespace_baseline", "baseline_frequency_hz",
    ),
}

_INT_FIELDS = {"bs_antennas", "user_antennas", "ris_elements", "ris_phase_seed",
               "ray_count", "trials", "workers"}
_BOOL_FIELDS = {"fading_enabled", "freespace_baseline"}
_STR_FIELDS = {"ris_phase_mode"}
_SEQ_FIELDS = {"nlos_gains", "nlos_delays"}


def _coerce(name: str, raw: str):
    raw = raw.strip()
    try:
        if name in _STR_FIELDS:
            return raw
        if name in _BOOL_FIELDS:
            low = raw.lower()
            if low in ("true", "1", "yes", "on"):
                return True
            if low in ("false", "0", "no", "off"):
                return False
            raise ValueError("not a boolean")
        if name in _SEQ_FIELDS:
            if not raw:
                return ()
            return tuple(float(part) for part in raw.split(","))
        if name in _INT_FIELDS:
            return int(raw)
        if name == "noise_power_dbm" and raw.lower() in ("", "none"):
            return None
        return float(raw)
    except ValueError as exc:
        raise ConfigError(name, f"a parseable {name} value", raw) from exc


def parse_config(path: str | None = None, overrides: dict | None = None) -> ScenarioConfig:
    """Build a validated ScenarioConfig from an INI file plus overrides.

    Missing file sections and keys fall back to defaults. Unknown keys are
    rejected with the offending name. An empty or absent path yields the
    default scenario.
    """
    values: dict = {}
    if path is not None:
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        try:
            with open(path, "r", encoding="utf-8") as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError("config", "a readable file path", path) from exc
        except configparser.Error as exc:
            raise ConfigError("config", "well-formed INI syntax", str(exc)) from exc
        for section in parser.sections():
            if section not in _SECTION_FIELDS:
                raise ConfigError(section, f"a section in {sorted(_SECTION_FIELDS)}", section)
            allowed = _SECTION_FIELDS[section]
            for key, raw in parser.items(section):
                if key not in allowed:
                    raise ConfigError(key, f"a key of section [{section}]", key)
                values[key] = _coerce(key, raw)
    if overrides:
        values.update(overrides)
    return ScenarioConfig(**values)


def render_config(cfg: ScenarioConfig) -> str:
    """Render a config as the INI grammar parse_config accepts."""
    lines = []
    for section, names in _SECTION_FIELDS.items():
        lines.append(f"[{section}]")
        for name in names:
            v = getattr(cfg, name)
            if isinstance(v, tuple):
                v = ",".join(repr(x) for x in v)
            lines.append(f"{name} = {v}")
        lines.append("")
    return "\n".join(lines)

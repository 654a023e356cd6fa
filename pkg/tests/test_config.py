"""Scenario validation, INI round trips, array geometry."""

import math
import os

import numpy as np
import pytest
from numpy.testing import assert_allclose

from thznoma.config import (FAR, NEAR, SPEED_OF_LIGHT, ConfigError,
                            ScenarioConfig, parse_config, pairwise_distances,
                            render_config, ula_offsets, user_geometry)


def test_default_scenario_is_valid():
    cfg = ScenarioConfig()
    assert cfg.frequency_hz == 0.3e12
    assert cfg.ris_elements == 200
    assert cfg.bs_antennas == cfg.user_antennas == 16
    assert cfg.tx_power_dbm == 30.0


def test_derived_link_budget_quantities():
    cfg = ScenarioConfig()
    assert_allclose(cfg.wavelength_m, 1e-3, rtol=1e-15)
    assert_allclose(cfg.tx_power_w, 1.0, rtol=1e-15)  # 30 dBm
    # thermal floor: -174 dBm/Hz + 10 log10(BW) + NF
    dbm = -174.0 + 10.0 * math.log10(cfg.bandwidth_hz) + cfg.noise_figure_db
    assert_allclose(cfg.noise_power_w, 10.0 ** (dbm / 10.0) * 1e-3, rtol=1e-15)


def test_noise_override_wins():
    cfg = ScenarioConfig(noise_power_dbm=-90.0)
    assert_allclose(cfg.noise_power_w, 1e-12, rtol=1e-15)


@pytest.mark.parametrize("field,value", [
    ("frequency_hz", -1.0),
    ("frequency_hz", 0.0),
    ("absorption_coeff", -0.1),
    ("bs_user_distance_far", -500.0),
    ("bs_antennas", 0),
    ("ris_elements", -1),
    ("ris_reflection", 1.5),
    ("ris_phase_mode", "fancy"),
    ("ray_count", 0),
    ("shape_m", 0.3),
    ("fixed_alpha_far", 1.2),
    ("trials", 0),
    ("workers", 0),
])
def test_rejected_fields_are_named(field, value):
    with pytest.raises(ConfigError) as err:
        ScenarioConfig(**{field: value})
    assert err.value.field_name == field
    assert field in str(err.value)
    assert err.value.value == value


def test_nlos_lengths_must_match_ray_count():
    with pytest.raises(ConfigError) as err:
        ScenarioConfig(ray_count=4, nlos_gains=(0.2, 0.1), nlos_delays=(1e-11, 2e-11))
    assert err.value.field_name == "nlos_gains"


def test_ris_free_scenario_is_accepted():
    cfg = ScenarioConfig(ris_elements=0)
    assert cfg.ris_elements == 0
    assert cfg.ris_phases().shape == (0,)


def test_replace_returns_new_validated_instance():
    cfg = ScenarioConfig()
    other = cfg.replace(tx_power_dbm=10.0)
    assert other.tx_power_dbm == 10.0
    assert cfg.tx_power_dbm == 30.0
    with pytest.raises(ConfigError):
        cfg.replace(trials=-5)


def test_ris_phases_reproducible_and_in_range():
    cfg = ScenarioConfig()
    p1, p2 = cfg.ris_phases(), cfg.ris_phases()
    assert np.array_equal(p1, p2)
    assert p1.shape == (cfg.ris_elements,)
    assert np.all((p1 >= 0) & (p1 < 2 * np.pi))
    assert np.array_equal(cfg.replace(ris_phase_mode="zero").ris_phases(),
                          np.zeros(cfg.ris_elements))
    assert not np.array_equal(p1, cfg.replace(ris_phase_seed=7).ris_phases())


def test_ula_offsets_centered():
    offs = ula_offsets(16, 0.5e-3)
    assert offs.shape == (16,)
    assert_allclose(offs.sum(), 0.0, atol=1e-18)
    assert_allclose(np.diff(offs), 0.5e-3, rtol=1e-15)


def test_pairwise_distances_exact():
    a = ula_offsets(3, 0.25)
    b = ula_offsets(2, 0.25)
    d = pairwise_distances(10.0, a, b)
    assert d.shape == (3, 2)
    for i in range(3):
        for j in range(2):
            assert_allclose(d[i, j], math.hypot(10.0, a[i] - b[j]), rtol=1e-15)
    with pytest.raises(ConfigError):
        pairwise_distances(0.0, a, b)


def test_user_geometry_shapes_and_axial_distances():
    cfg = ScenarioConfig()
    geo = user_geometry(cfg, FAR)
    assert geo.bs_user_m.shape == (16, 16)
    assert geo.bs_element_m.shape == (16, 200)
    assert geo.element_user_m.shape == (200, 16)
    # aligned center elements sit exactly at the axial separations
    assert geo.bs_user_m[7, 7] == 500.0
    assert np.all(geo.bs_user_m >= 500.0)
    assert np.all(geo.bs_element_m >= 100.0)
    assert np.all(geo.element_user_m >= 150.0)
    near = user_geometry(cfg, NEAR)
    assert near.bs_user_m[7, 7] == 250.0
    assert near.element_user_m.min() >= 250.0
    with pytest.raises(ConfigError):
        user_geometry(cfg, 2)


def test_user_geometry_is_read_only():
    geo = user_geometry(ScenarioConfig(), FAR)
    with pytest.raises(ValueError):
        geo.bs_user_m[0, 0] = 1.0


def test_baseline_geometry_uses_reference_wavelength():
    cfg = ScenarioConfig(freespace_baseline=True, ris_elements=0)
    geo = user_geometry(cfg, FAR)
    lam = SPEED_OF_LIGHT / cfg.baseline_frequency_hz
    # corner pair: transverse offset 15 half-wavelengths at 3.5 GHz
    assert_allclose(geo.bs_user_m[0, 15], math.hypot(500.0, 15 * lam / 2),
                    rtol=1e-15)
    assert geo.bs_element_m.shape == (16, 0)


def test_ini_round_trip(tmp_path):
    cfg = ScenarioConfig(frequency_hz=0.2e12, ris_elements=32, trials=777,
                         nlos_gains=(0.3, 0.1), nlos_delays=(1e-11, 2e-11),
                         ray_count=3, fading_enabled=False,
                         noise_power_dbm=-95.0, ris_phase_mode="zero")
    path = tmp_path / "scenario.ini"
    path.write_text(render_config(cfg), encoding="utf-8")
    assert parse_config(str(path)) == cfg


def test_default_round_trip_preserves_unset_noise(tmp_path):
    cfg = ScenarioConfig()
    path = tmp_path / "scenario.ini"
    path.write_text(render_config(cfg), encoding="utf-8")
    again = parse_config(str(path))
    assert again == cfg
    assert again.noise_power_dbm is None


def test_empty_config_is_default_scenario():
    assert parse_config(None) == ScenarioConfig()


def test_unknown_section_and_key_rejected(tmp_path):
    bad_section = tmp_path / "a.ini"
    bad_section.write_text("[plotting]\ncolor = red\n", encoding="utf-8")
    with pytest.raises(ConfigError) as err:
        parse_config(str(bad_section))
    assert "plotting" in str(err.value)

    bad_key = tmp_path / "b.ini"
    bad_key.write_text("[channel]\nfrequenzy_hz = 1e12\n", encoding="utf-8")
    with pytest.raises(ConfigError) as err:
        parse_config(str(bad_key))
    assert "frequenzy_hz" in str(err.value)


def test_bad_value_names_field(tmp_path):
    path = tmp_path / "c.ini"
    path.write_text("[channel]\nfrequency_hz = not-a-number\n", encoding="utf-8")
    with pytest.raises(ConfigError) as err:
        parse_config(str(path))
    assert err.value.field_name == "frequency_hz"


def test_missing_file_rejected(tmp_path):
    with pytest.raises(ConfigError):
        parse_config(os.path.join(str(tmp_path), "nope.ini"))


def test_overrides_beat_file_values(tmp_path):
    path = tmp_path / "d.ini"
    path.write_text("[montecarlo]\ntrials = 123\n", encoding="utf-8")
    cfg = parse_config(str(path), overrides={"trials": 456})
    assert cfg.trials == 456

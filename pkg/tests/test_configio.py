import numpy as np
import pytest
import yaml

from morphflight.configio import (
    ConfigError,
    config_from_dict,
    config_to_dict,
    default_config,
    load_config,
    load_maneuver,
    load_table,
    save_config,
)


def test_default_config_contents(config):
    assert config.total_mass == pytest.approx(8.0)
    assert {b.id for b in config.bodies} >= {"fuselage", "wing_left", "wing_right", "hstab", "vstab"}
    assert config.wing("left").side == "left"
    assert config.limits_for("incidence_l") == config.control_limits["incidence"]
    assert default_config() is config  # cached singleton


def test_roundtrip_through_dict(config, tmp_path):
    path = tmp_path / "cfg.yaml"
    save_config(config, path)
    again = load_config(path)
    assert again.total_mass == pytest.approx(config.total_mass)
    assert len(again.bodies) == len(config.bodies)
    for a, b in zip(again.bodies, config.bodies):
        assert a.id == b.id
        assert np.allclose(a.inertia, b.inertia)
        assert np.allclose(a.com_offset, b.com_offset)
        if b.surface:
            assert a.surface.station_count == b.surface.station_count
            assert [c.control for c in a.surface.bindings] == [
                c.control for c in b.surface.bindings
            ]


def test_missing_key_raises(config):
    doc = config_to_dict(config)
    del doc["wing_root"]
    with pytest.raises(ConfigError, match="wing_root"):
        config_from_dict(doc)


def test_bad_yaml_structure(tmp_path):
    p = tmp_path / "bad.yaml"
    p.write_text("- just\n- a\n- list\n")
    with pytest.raises(ConfigError, match="mapping"):
        load_config(p)


def test_diag_inertia_accepted(config):
    doc = config_to_dict(config)
    doc["bodies"][0]["inertia"] = [0.1, 0.2, 0.3]
    cfg = config_from_dict(doc)
    assert np.allclose(cfg.bodies[0].inertia, np.diag([0.1, 0.2, 0.3]))


def _write_table(path, two_d=False):
    lines = ["phi_rad,delta_rad,CL,CD,CM"]
    phis = np.linspace(-np.pi, np.pi, 19)
    deltas = [-0.2, 0.0, 0.2] if two_d else [0.0]
    for d in deltas:
        for p in phis:
            cl = np.sin(p) + 0.5 * d
            if abs(p) == np.pi:
                cl = 0.5 * d  # periodic endpoints must match
            lines.append(f"{p},{d},{cl},{0.02 + np.sin(p)**2},0.0")
    path.write_text("\n".join(lines) + "\n")


def test_load_table_1d(tmp_path):
    p = tmp_path / "t.csv"
    _write_table(p)
    tab = load_table(p)
    assert tab.delta is None
    cl, cd, cm = tab.lookup(0.5)
    assert cd >= 0.02


def test_load_table_2d(tmp_path):
    p = tmp_path / "t.csv"
    _write_table(p, two_d=True)
    tab = load_table(p)
    assert tab.delta is not None
    cl0 = tab.lookup(0.0, 0.0)[0]
    cl1 = tab.lookup(0.0, 0.2)[0]
    assert cl1 - cl0 == pytest.approx(0.1, abs=1e-9)


def test_load_table_bad_header(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(ConfigError, match="header"):
        load_table(p)


def test_load_table_incomplete_grid(tmp_path):
    p = tmp_path / "t.csv"
    _write_table(p, two_d=True)
    lines = p.read_text().splitlines()
    p.write_text("\n".join(lines[:-1]) + "\n")  # drop one row
    with pytest.raises(ConfigError, match="complete"):
        load_table(p)


def test_load_maneuver_scroll(tmp_path):
    p = tmp_path / "m.yaml"
    p.write_text(
        yaml.safe_dump(
            {
                "type": "scroll",
                "period": 10.0,
                "alpha_amp": 0.15,
                "beta_amp": 0.15,
                "alpha_center": 0.1,
                "beta_center": 0.1,
                "gamma": 0.3,
            }
        )
    )
    spec = load_maneuver(p)
    assert spec.kind == "scroll"
    assert spec.period == 10.0
    assert spec.gamma == 0.3
    assert spec.knots_per_period == 200


def test_load_maneuver_rect_and_errors(tmp_path):
    p = tmp_path / "m.yaml"
    p.write_text(
        yaml.safe_dump(
            {
                "type": "rect",
                "period": 20.0,
                "bounds": {"left": -0.1, "right": 0.1, "lower": 0.0, "upper": 0.2},
            }
        )
    )
    spec = load_maneuver(p)
    assert spec.bounds == (-0.1, 0.1, 0.0, 0.2)
    p.write_text(yaml.safe_dump({"type": "zigzag", "period": 1.0}))
    with pytest.raises(ConfigError, match="unknown maneuver"):
        load_maneuver(p)


def test_shipped_maneuver_specs_load():
    import importlib.resources

    data = importlib.resources.files("morphflight") / "data"
    scroll = load_maneuver(str(data / "scroll_demo.yaml"))
    assert scroll.kind == "scroll" and scroll.period == 10.0 and scroll.gamma == 0.3
    rect = load_maneuver(str(data / "rect_demo.yaml"))
    assert rect.kind == "rect" and rect.bounds is not None

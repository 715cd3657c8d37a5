import numpy as np
import pytest

from morphflight.aero import (
    CoefficientTable,
    builtin_coefficients,
    build_stations,
    eval_coefficients,
    fuselage_drag,
    get_aero_model,
    gravity_loads,
    propulsion_loads,
    scale_station_counts,
    station_flow,
    station_loads,
    total_external_loads,
    wrap_angle,
)
from morphflight.airframe import (
    AircraftState,
    BuiltinAirfoil,
    ControlVector,
    WingPose,
)
from morphflight.frames import Convention, EulerAngles

from oracles import gravity_force_oracle

WINGS0 = (WingPose("left", np.zeros(3)), WingPose("right", np.zeros(3)))


def level_state(u=25.0, **kw):
    return AircraftState(
        np.array([u, 0.0, 0.0]), np.zeros(3), np.zeros(3), EulerAngles(0, 0, 0), **kw
    )


# --- coefficient models ------------------------------------------------------


def test_builtin_small_angle_slope():
    foil = BuiltinAirfoil()
    phi = 0.02
    cl, cd, cm = builtin_coefficients(foil, phi)
    # thin-airfoil 2*pi slope via pi*sin(2 phi)
    assert cl == pytest.approx(np.pi * np.sin(2 * phi), rel=1e-12)
    assert cd == pytest.approx(0.02 + 1.1 * np.sin(phi) ** 2, rel=1e-12)
    assert cm == pytest.approx(-0.25 * cl, rel=1e-12)


def test_builtin_post_stall_and_periodicity():
    foil = BuiltinAirfoil()
    cl, cd, cm = builtin_coefficients(foil, np.pi / 4)
    assert cl == pytest.approx(1.1 * np.sin(np.pi / 2), rel=1e-12)
    assert cm == pytest.approx(-0.55 * np.sin(np.pi / 4), rel=1e-12)
    for f in builtin_coefficients(foil, np.pi):
        g = builtin_coefficients(foil, -np.pi)
    a = np.array(builtin_coefficients(foil, np.pi))
    b = np.array(builtin_coefficients(foil, -np.pi))
    assert np.allclose(a, b, atol=1e-12)


def test_builtin_blend_is_continuous():
    foil = BuiltinAirfoil()
    phis = np.linspace(0.1, 0.35, 2000)
    cl = builtin_coefficients(foil, phis)[0]
    assert np.max(np.abs(np.diff(cl))) < 5e-3  # no jumps across the stall blend


def test_control_shift_moves_effective_angle():
    foil = BuiltinAirfoil()
    base = eval_coefficients(foil, 0.05)
    shifted = eval_coefficients(foil, 0.05, delta_eff=0.03)
    direct = eval_coefficients(foil, 0.08)
    assert shifted[0] == pytest.approx(direct[0], rel=1e-12)
    assert shifted != base


def test_wrap_angle():
    assert wrap_angle(np.pi + 0.1) == pytest.approx(-np.pi + 0.1)
    assert wrap_angle(-np.pi) == pytest.approx(np.pi)
    assert wrap_angle(0.3) == pytest.approx(0.3)


def test_coefficient_table_1d_lookup():
    phi = np.linspace(-np.pi, np.pi, 181)
    tab = CoefficientTable(phi=phi, cl=np.sin(phi), cd=np.abs(np.cos(phi)), cm=0.1 * np.cos(phi))
    cl, cd, cm = tab.lookup(0.5)
    assert cl == pytest.approx(np.sin(0.5), abs=1e-3)
    assert cd >= 0


def test_coefficient_table_validation():
    phi = np.linspace(-np.pi, np.pi, 37)
    with pytest.raises(ValueError, match="must match"):
        CoefficientTable(phi=phi, cl=phi, cd=np.abs(phi), cm=phi * 0)
    with pytest.raises(ValueError, match="C_D"):
        CoefficientTable(phi=phi, cl=np.sin(phi), cd=np.cos(phi), cm=phi * 0)
    with pytest.raises(ValueError, match="cover"):
        CoefficientTable(phi=np.linspace(-1, 1, 21), cl=np.zeros(21), cd=np.zeros(21), cm=np.zeros(21))


def test_coefficient_table_2d_interpolates_delta():
    phi = np.linspace(-np.pi, np.pi, 181)
    delta = np.array([-0.5, 0.0, 0.5])
    cl = np.stack([np.sin(phi) + d for d in delta])
    cd = np.ones((3, 181)) * 0.1
    cm = np.zeros((3, 181))
    tab = CoefficientTable(phi=phi, cl=cl, cd=cd, cm=cm, delta=delta)
    v = tab.lookup(0.0, 0.25)
    assert v[0] == pytest.approx(0.25, abs=1e-6)


# --- stations ----------------------------------------------------------------


def test_build_stations_midpoints_and_bindings(config):
    stations = build_stations(config)
    right = [s for s in stations if s.parent_id == "wing_right"]
    assert len(right) == 16
    assert right[0].coord == pytest.approx(0.025)
    assert right[-1].coord == pytest.approx(0.775)
    # aileron binds the outer half only
    inner = [s for s in right if s.coord < 0.4]
    outer = [s for s in right if s.coord > 0.4]
    assert all(s.control is None for s in inner)
    assert all(s.control == "aileron" for s in outer)
    assert right[0].id == "wing_right[0]"


def test_scale_station_counts(config):
    doubled = scale_station_counts(config, 2)
    assert len(build_stations(doubled)) == 2 * len(build_stations(config))


# --- flow and loads ----------------------------------------------------------


def test_station_flow_level_flight(config):
    st = level_state()
    model = get_aero_model(config)
    station = next(s for s in model.stations if s.parent_id == "wing_right")
    flow = station_flow(config, station, st, WINGS0)
    assert flow.phi_eff == pytest.approx(0.0, abs=1e-12)
    assert flow.airspeed == pytest.approx(25.0, rel=1e-12)
    # drag points backward (earth -x), lift up (earth -z)
    assert flow.drag_dir @ [1, 0, 0] == pytest.approx(-1.0, abs=1e-12)
    assert flow.lift_dir @ [0, 0, 1] == pytest.approx(-1.0, abs=1e-12)


def test_station_flow_incidence_changes_phi(config):
    st = level_state()
    model = get_aero_model(config)
    station = next(s for s in model.stations if s.parent_id == "wing_right")
    wings = (WingPose("left", np.zeros(3)), WingPose("right", [0.0, 0.1, 0.0]))
    flow = station_flow(config, station, st, wings)
    assert flow.phi_eff == pytest.approx(0.1, abs=1e-9)


def test_lift_drag_moment_triad_invariant(config):
    # documented invariant: lift_dir = moment_dir x drag_dir
    st = AircraftState(
        np.array([23.0, 2.0, -1.5]), np.array([0.1, -0.2, 0.3]), np.zeros(3),
        EulerAngles(0.15, -0.1, 0.2),
    )
    model = get_aero_model(config)
    wings = (WingPose("left", [0.1, 0.05, 0.3]), WingPose("right", [-0.2, 0.1, 0.25]))
    for station in model.stations[::7]:
        flow = station_flow(config, station, st, wings)
        assert np.allclose(flow.lift_dir, np.cross(flow.moment_dir, flow.drag_dir), atol=1e-12)
        assert np.allclose(np.linalg.norm(flow.lift_dir), 1.0, atol=1e-12)
        assert abs(flow.lift_dir @ flow.drag_dir) < 1e-12


def test_station_loads_printed_form():
    # L = rho V^2 b C_L ds exactly, no half factor
    from morphflight.aero import FlowSample

    flow = FlowSample(
        phi_eff=0.1,
        airspeed=20.0,
        lift_dir=np.array([0.0, 0.0, -1.0]),
        drag_dir=np.array([-1.0, 0.0, 0.0]),
        moment_dir=np.array([0.0, -1.0, 0.0]),
    )
    out = station_loads(flow, (0.5, 0.02, -0.1), rho=1.225, semichord=0.075, width=0.05)
    assert np.linalg.norm(out["lift"]) == pytest.approx(1.225 * 400 * 0.075 * 0.5 * 0.05, rel=1e-12)
    assert np.linalg.norm(out["drag"]) == pytest.approx(1.225 * 400 * 0.075 * 0.02 * 0.05, rel=1e-12)
    # positive C_M raises the leading edge: moment along +span for cm > 0
    out2 = station_loads(flow, (0.5, 0.02, 0.1), rho=1.225, semichord=0.075, width=0.05)
    span = -flow.moment_dir
    assert out2["moment"] @ span > 0
    assert out["moment"] @ span < 0


def test_model_loads_match_station_sum(config):
    # vectorized aggregate equals the per-station scalar path
    st = AircraftState(
        np.array([24.0, 1.0, -2.0]), np.array([0.05, -0.1, 0.2]), np.zeros(3),
        EulerAngles(0.1, 0.05, -0.1),
    )
    cv = ControlVector.zero().with_values(elevator=0.1, aileron=-0.05)
    wings = (WingPose("left", [0.05, 0.1, 0.3]), WingPose("right", [0.0, 0.12, 0.28]))
    model = get_aero_model(config)
    agg = model.loads(st, cv, wings)
    from morphflight.aero import eval_coefficients as evalc
    from morphflight.frames import rate_map, rotation_from_euler

    r_eb = rotation_from_euler(st.euler)
    omega_map = rate_map(st.euler)
    f_tot = np.zeros(3)
    t_tot = np.zeros(3)
    for station in model.stations:
        flow = station_flow(config, station, st, wings)
        delta = station.gain * cv.get(station.control) if station.control else 0.0
        coeffs = evalc(config.airfoil, flow.phi_eff, delta)
        out = station_loads(flow, coeffs, config.air_density, station.semichord, station.width)
        force_e = out["lift"] + out["drag"]
        f_tot += force_e
        # station position in body frame -> earth torque about S
        from morphflight.airframe import wing_rotation

        if station.parent_kind == "body":
            pos_b = station.quarter_chord_offset
        else:
            pose = wings[0] if station.parent_kind == "left" else wings[1]
            pos_b = config.wing_root + wing_rotation(pose) @ station.quarter_chord_offset
        t_tot += np.cross(r_eb @ pos_b, force_e) + out["moment"]
    assert np.allclose(agg.q_x, f_tot, atol=1e-9)
    assert np.allclose(agg.q_theta, omega_map.T @ (r_eb.T @ t_tot), atol=1e-9)


def test_fuselage_drag_level_flight(config):
    st = level_state()
    loads = fuselage_drag(config, st, WINGS0)
    d = next(b.drag for b in config.bodies if b.drag is not None)
    expected = config.air_density * 25.0**2 * d.radius * d.length * d.cd0
    assert loads.q_x[0] == pytest.approx(-expected, rel=1e-12)
    assert abs(loads.q_x[1]) < 1e-12 and abs(loads.q_x[2]) < 1e-12


def test_fuselage_drag_crossflow_exceeds_axial(config):
    axial = fuselage_drag(config, level_state(), WINGS0)
    side = fuselage_drag(
        config,
        AircraftState(np.array([0.0, 25.0, 0.0]), np.zeros(3), np.zeros(3), EulerAngles(0, 0, 0)),
        WINGS0,
    )
    assert abs(side.q_x[1]) > 10 * abs(axial.q_x[0])


def test_gravity_matches_potential_gradient(config, rng):
    st = AircraftState(
        rng.normal(size=3) * 5,
        rng.normal(size=3) * 0.2,
        rng.normal(size=3),
        EulerAngles(*(rng.normal(size=3) * 0.4)),
    )
    wings = (WingPose("left", [0.1, -0.05, 0.3]), WingPose("right", [0.2, 0.1, 0.25]))
    loads = gravity_loads(config, st, wings).as_vector()
    oracle = gravity_force_oracle(config, st, wings)
    assert np.allclose(loads, oracle, atol=1e-6)


def test_propulsion_loads(config):
    st = level_state()
    loads = propulsion_loads(10.0, config, st)
    assert np.allclose(loads.q_x, [10.0, 0.0, 0.0], atol=1e-12)
    with pytest.raises(ValueError):
        propulsion_loads(-1.0, config, st)


def test_total_loads_aggregate(config):
    st = level_state()
    cv = ControlVector.zero().with_values(thrust=9.0)
    total = total_external_loads(config, st, cv)
    model = get_aero_model(config)
    parts = (
        model.loads(st, cv, WINGS0)
        + fuselage_drag(config, st, WINGS0)
        + gravity_loads(config, st, WINGS0)
        + propulsion_loads(9.0, config, st)
    )
    assert np.allclose(total, parts.as_vector(), atol=1e-12)

"""YAML/CSV ingestion: airframe configs, coefficient tables, maneuver specs."""

from __future__ import annotations

import csv
import functools
import importlib.resources
from dataclasses import dataclass
from typing import Optional

import numpy as np
import yaml

from .aero import CoefficientTable
from .airframe import (
    AeroSurfaceDescriptor,
    AirframeConfig,
    BuiltinAirfoil,
    ControlBinding,
    CONTROL_NAMES,
    FuselageDragDescriptor,
    RigidBodyElement,
)


class ConfigError(ValueError):
    pass


def _vec(node, name, size=3):
    a = np.asarray(node, dtype=float)
    if a.shape != (size,):
        raise ConfigError(f"{name}: expected {size}-vector, got shape {a.shape}")
    return a


def _inertia(node, name):
    a = np.asarray(node, dtype=float)
    if a.shape == (3,):
        return np.diag(a)
    if a.shape == (3, 3):
        return a
    raise ConfigError(f"{name}: inertia must be a 3-vector (diagonal) or 3x3 matrix")


def _surface(node, name) -> AeroSurfaceDescriptor:
    bindings = []
    for b in node.get("bindings", []):
        if b["control"] not in CONTROL_NAMES:
            raise ConfigError(f"{name}: unknown control {b['control']!r}")
        bindings.append(
            ControlBinding(
                control=b["control"],
                gain=float(b["gain"]),
                span_fraction=tuple(b.get("span_fraction", (0.0, 1.0))),
            )
        )
    return AeroSurfaceDescriptor(
        span_start=float(node["span_start"]),
        span_end=float(node["span_end"]),
        chord=float(node["chord"]),
        station_count=int(node["stations"]),
        span_axis=_vec(node["span_axis"], f"{name}.span_axis"),
        chord_axis=_vec(node["chord_axis"], f"{name}.chord_axis"),
        root_offset=_vec(node["root_offset"], f"{name}.root_offset"),
        table=node.get("table", "builtin"),
        bindings=tuple(bindings),
    )


def config_from_dict(doc: dict) -> AirframeConfig:
    try:
        bodies = []
        for node in doc["bodies"]:
            name = f"body {node.get('id', '?')}"
            drag = None
            if "drag" in node:
                d = node["drag"]
                drag = FuselageDragDescriptor(
                    cd0=float(d.get("cd0", 0.05)),
                    cd_cross=float(d.get("cd_cross", 1.1)),
                    radius=float(d["radius"]),
                    length=float(d["length"]),
                    strips=int(d.get("strips", 8)),
                    start=_vec(d.get("start", [0, 0, 0]), f"{name}.drag.start"),
                    axis=_vec(d.get("axis", [1, 0, 0]), f"{name}.drag.axis"),
                )
            surface = _surface(node["surface"], name) if "surface" in node else None
            bodies.append(
                RigidBodyElement(
                    id=node["id"],
                    group=node["group"],
                    mass=float(node["mass"]),
                    inertia=_inertia(node["inertia"], name),
                    com_offset=_vec(node["com_offset"], f"{name}.com_offset"),
                    side=node.get("side"),
                    point=bool(node.get("point", False)),
                    surface=surface,
                    drag=drag,
                )
            )
        limits = {k: tuple(map(float, v)) for k, v in doc["control_limits"].items()}
        airfoil = BuiltinAirfoil(**doc.get("airfoil", {}))
        return AirframeConfig(
            bodies=tuple(bodies),
            wing_root=_vec(doc["wing_root"], "wing_root"),
            control_limits=limits,
            gravity=float(doc.get("gravity", 9.81)),
            air_density=float(doc.get("air_density", 1.225)),
            thrust_dir=_vec(doc.get("thrust_dir", [1, 0, 0]), "thrust_dir"),
            thrust_point=_vec(doc.get("thrust_point", [0, 0, 0]), "thrust_point"),
            airfoil=airfoil,
            name=doc.get("name", "airframe"),
        )
    except KeyError as e:
        raise ConfigError(f"missing config key: {e}") from e


def load_config(path) -> AirframeConfig:
    with open(path) as fh:
        doc = yaml.safe_load(fh)
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: config must be a mapping")
    cfg = config_from_dict(doc)
    tables = {}
    for tid, tpath in doc.get("tables", {}).items():
        tables[tid] = load_table(tpath)
    if tables:
        cfg = cfg.replace(tables=tables)
    return cfg


def config_to_dict(config: AirframeConfig) -> dict:
    def listify(a):
        return [float(x) for x in np.asarray(a).ravel()]

    bodies = []
    for b in config.bodies:
        node = {
            "id": b.id,
            "group": b.group,
            "mass": b.mass,
            "inertia": [[float(x) for x in row] for row in b.inertia],
            "com_offset": listify(b.com_offset),
        }
        if b.side:
            node["side"] = b.side
        if b.point:
            node["point"] = True
        if b.drag:
            node["drag"] = {
                "cd0": b.drag.cd0,
                "cd_cross": b.drag.cd_cross,
                "radius": b.drag.radius,
                "length": b.drag.length,
                "strips": b.drag.strips,
                "start": listify(b.drag.start),
                "axis": listify(b.drag.axis),
            }
        if b.surface:
            s = b.surface
            node["surface"] = {
                "span_start": s.span_start,
                "span_end": s.span_end,
                "chord": s.chord,
                "stations": s.station_count,
                "span_axis": listify(s.span_axis),
                "chord_axis": listify(s.chord_axis),
                "root_offset": listify(s.root_offset),
                "table": s.table,
                "bindings": [
                    {
                        "control": c.control,
                        "gain": c.gain,
                        "span_fraction": list(c.span_fraction),
                    }
                    for c in s.bindings
                ],
            }
        bodies.append(node)
    return {
        "name": config.name,
        "gravity": config.gravity,
        "air_density": config.air_density,
        "wing_root": listify(config.wing_root),
        "thrust_dir": listify(config.thrust_dir),
        "thrust_point": listify(config.thrust_point),
        "control_limits": {k: list(v) for k, v in config.control_limits.items()},
        "bodies": bodies,
    }


def save_config(config: AirframeConfig, path):
    with open(path, "w") as fh:
        yaml.safe_dump(config_to_dict(config), fh, sort_keys=False)


@functools.lru_cache(maxsize=1)
def default_config() -> AirframeConfig:
    """The shipped 8 kg case-study aircraft (cached: one object per process)."""
    ref = importlib.resources.files("morphflight") / "data" / "default_uav.yaml"
    doc = yaml.safe_load(ref.read_text())
    return config_from_dict(doc)


def load_table(path) -> CoefficientTable:
    """CSV coefficient table: header phi_rad,delta_rad,CL,CD,CM, sorted (delta, phi)."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        expected = ["phi_rad", "delta_rad", "CL", "CD", "CM"]
        if reader.fieldnames != expected:
            raise ConfigError(f"{path}: header must be {','.join(expected)}")
        for i, row in enumerate(reader, start=2):
            try:
                rows.append([float(row[k]) for k in expected])
            except (TypeError, ValueError) as e:
                raise ConfigError(f"{path}:{i}: bad row: {e}") from e
    data = np.array(rows)
    if data.size == 0:
        raise ConfigError(f"{path}: empty table")
    deltas = np.unique(data[:, 1])
    phis = np.unique(data[:, 0])
    if len(deltas) == 1:
        order = np.argsort(data[:, 0])
        d = data[order]
        return CoefficientTable(phi=d[:, 0], cl=d[:, 2], cd=d[:, 3], cm=d[:, 4])
    if len(data) != len(deltas) * len(phis):
        raise ConfigError(f"{path}: table must be a complete (delta, phi) grid")
    cl = np.empty((len(deltas), len(phis)))
    cd = np.empty_like(cl)
    cm = np.empty_like(cl)
    for i, dv in enumerate(deltas):
        block = data[data[:, 1] == dv]
        order = np.argsort(block[:, 0])
        block = block[order]
        if not np.allclose(block[:, 0], phis):
            raise ConfigError(f"{path}: phi grid differs between delta blocks")
        cl[i], cd[i], cm[i] = block[:, 2], block[:, 3], block[:, 4]
    return CoefficientTable(phi=phis, cl=cl, cd=cd, cm=cm, delta=deltas)


@dataclass(frozen=True)
class ManeuverSpec:
    kind: str  # "scroll" | "rect"
    period: float
    gamma: float = 0.0
    policy: str = "InboardFrozen"
    channel: str = "Dihedral"
    airspeed: float = 25.0
    knots_per_period: int = 200
    alpha_amp: float = 0.0
    beta_amp: float = 0.0
    alpha_center: float = 0.0
    beta_center: float = 0.0
    bounds: Optional[tuple] = None  # rect: (left, right, lower, upper)


def load_maneuver(path) -> ManeuverSpec:
    with open(path) as fh:
        doc = yaml.safe_load(fh)
    try:
        kind = doc["type"]
        if kind not in ("scroll", "rect"):
            raise ConfigError(f"{path}: unknown maneuver type {kind!r}")
        common = dict(
            kind=kind,
            period=float(doc["period"]),
            gamma=float(doc.get("gamma", 0.0)),
            policy=doc.get("policy", "InboardFrozen"),
            channel=doc.get("channel", "Dihedral"),
            airspeed=float(doc.get("airspeed", 25.0)),
            knots_per_period=int(doc.get("knots_per_period", 200)),
        )
        if kind == "scroll":
            return ManeuverSpec(
                alpha_amp=float(doc["alpha_amp"]),
                beta_amp=float(doc["beta_amp"]),
                alpha_center=float(doc.get("alpha_center", 0.0)),
                beta_center=float(doc.get("beta_center", 0.0)),
                **common,
            )
        b = doc["bounds"]
        return ManeuverSpec(
            bounds=(
                float(b["left"]),
                float(b["right"]),
                float(b["lower"]),
                float(b["upper"]),
            ),
            **common,
        )
    except KeyError as e:
        raise ConfigError(f"{path}: missing maneuver key {e}") from e

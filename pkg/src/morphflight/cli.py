"""Command-line entry point: simulate, trim, trimspace, stability, qnpas, spectra.

Every subcommand writes its outputs (CSV, SVG line plots, and a JSON run
manifest with content hashes of the inputs) into an output directory chosen
by --out or the MORPHFLIGHT_OUT environment variable.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys

import numpy as np

import matplotlib

matplotlib.use("svg")
import matplotlib.pyplot as plt

from . import __version__
from .airframe import AircraftState, ControlVector, CONTROL_NAMES
from .configio import ConfigError, default_config, load_config, load_maneuver
from .frames import Convention, EulerAngles
from .guidance import (
    RectPath,
    ScrollPath,
    build_schedule,
    evaluate_tracking,
    rect_target,
    scroll_target,
)
from .sim import IntegratorOptions, simulate
from .spectral import probe_spectrum, unsteadiness_report
from .stability import linearize, modal_analysis, perturbation_metrics, static_gradients
from .trim import (
    ConstraintPolicy,
    MorphChannel,
    TrimTarget,
    continue_path,
    solve_trim,
    sweep_trim_space,
    trim_state,
)


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _out_dir(args) -> str:
    out = args.out or os.environ.get("MORPHFLIGHT_OUT", ".")
    os.makedirs(out, exist_ok=True)
    return out


def _write_manifest(args, out, inputs, extra=None):
    manifest = {
        "subcommand": args.command,
        "version": __version__,
        "inputs": {str(p): _sha256(p) for p in inputs if p and os.path.exists(str(p))},
        "output_dir": os.path.abspath(out),
        "options": {
            k: v for k, v in vars(args).items() if k not in ("command", "func") and v is not None
        },
    }
    if extra:
        manifest.update(extra)
    with open(os.path.join(out, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=str)


def _load_cfg(args):
    if args.config:
        return load_config(args.config)
    return default_config()


def _line_plot(path, xs, ys_labels, xlabel, ylabel, title):
    fig, ax = plt.subplots(figsize=(6, 4))
    for y, label in ys_labels:
        ax.plot(xs, y, label=label, linewidth=1.0)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    if len(ys_labels) > 1:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def _parse_controls(spec: str) -> ControlVector:
    cv = ControlVector.zero()
    if not spec:
        return cv
    kw = {}
    for item in spec.split(","):
        name, _, val = item.partition("=")
        if name not in CONTROL_NAMES:
            raise SystemExit(f"unknown control {name!r}; known: {', '.join(CONTROL_NAMES)}")
        kw[name] = float(val)
    return cv.with_values(**kw)


def cmd_simulate(args):
    config = _load_cfg(args)
    out = _out_dir(args)
    controls = _parse_controls(args.controls)
    z0 = np.array([float(v) for v in args.state.split(",")]) if args.state else None
    if z0 is not None and z0.size != 12:
        raise SystemExit("initial state must have 12 comma-separated components")
    if z0 is None:
        state0 = AircraftState(
            np.array([args.airspeed, 0.0, 0.0]), np.zeros(3), np.zeros(3), EulerAngles(0, 0, 0)
        )
    else:
        state0 = AircraftState.from_vector(z0, Convention.ZYX_321)
    options = IntegratorOptions(
        rel_tol=args.rel_tol,
        abs_tol=args.abs_tol,
        probe_ids=tuple(args.probe) if args.probe else (),
    )
    traj = simulate(config, controls, state0, (0.0, args.duration), options)
    traj.write_csv(os.path.join(out, "trajectory.csv"), probe_dir=out)
    with open(os.path.join(out, "events.json"), "w") as fh:
        json.dump(traj.events, fh, indent=2)
    angles = np.stack([s.euler.as_array() for s in traj.states])
    _line_plot(
        os.path.join(out, "attitude.svg"),
        traj.t,
        [(angles[:, 0], "pitch"), (angles[:, 1], "yaw"), (angles[:, 2], "roll")],
        "t [s]",
        "angle [rad]",
        "attitude history",
    )
    _write_manifest(args, out, [args.config], {"steps": len(traj.t), "events": len(traj.events)})
    print(f"simulate: {len(traj.t)} accepted steps, {len(traj.events)} events -> {out}")
    return 0


def cmd_trim(args):
    config = _load_cfg(args)
    out = _out_dir(args)
    target = TrimTarget(
        alpha=args.alpha,
        beta=args.beta,
        airspeed=args.airspeed,
        gamma=args.gamma,
        policy=ConstraintPolicy(args.policy),
        channel=MorphChannel(args.channel),
    )
    tp = solve_trim(config, target, mode=args.mode)
    result = {
        "converged": bool(tp.converged),
        "residual_norm": float(tp.residual_norm),
        "iterations": int(tp.iterations),
        "active_limits": list(tp.active_limits),
        "controls": {n: float(tp.controls.get(n)) for n in CONTROL_NAMES},
    }
    with open(os.path.join(out, "trim.json"), "w") as fh:
        json.dump(result, fh, indent=2)
    _write_manifest(args, out, [args.config])
    status = "converged" if tp.converged else "NOT CONVERGED"
    print(f"trim {status}: residual {tp.residual_norm:.3e}, thrust {tp.controls.thrust:.3f} N")
    for n in CONTROL_NAMES[1:]:
        v = tp.controls.get(n)
        print(f"  {n:12s} {v:+.5f} rad ({np.degrees(v):+.2f} deg)")
    return 0 if tp.converged else 1


def cmd_trimspace(args):
    config = _load_cfg(args)
    out = _out_dir(args)
    if args.pitch_only:
        targets = [
            TrimTarget(a, 0.0, args.airspeed, gamma=args.gamma)
            for a in np.arange(0.0, args.alpha_max + 1e-12, np.deg2rad(args.grid_step))
        ]
        points = continue_path(config, targets, mode="pitch")
        with open(os.path.join(out, "pitch_sweep.csv"), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["alpha", "converged", "thrust", "incidence", "elevator", "active_limits"])
            for p in points:
                w.writerow(
                    [
                        f"{p.target.alpha:.10g}",
                        int(p.converged),
                        f"{p.controls.thrust:.10g}",
                        f"{p.controls.incidence_r:.10g}",
                        f"{p.controls.elevator:.10g}",
                        ";".join(p.active_limits),
                    ]
                )
        conv = [p for p in points if p.converged]
        alphas = [p.target.alpha for p in conv]
        _line_plot(
            os.path.join(out, "pitch_sweep.svg"),
            alphas,
            [
                ([p.controls.thrust / 10.0 for p in conv], "thrust/10 [N]"),
                ([p.controls.incidence_r for p in conv], "incidence [rad]"),
                ([p.controls.elevator for p in conv], "elevator [rad]"),
            ],
            "alpha [rad]",
            "control",
            "pitch trim sweep",
        )
        _write_manifest(args, out, [args.config], {"points": len(points)})
        print(f"trimspace (pitch-only): {len(conv)}/{len(points)} converged -> {out}")
        return 0
    grid = sweep_trim_space(
        config,
        (-args.alpha_max, args.alpha_max),
        (-args.beta_max, args.beta_max),
        gamma=args.gamma,
        policy=ConstraintPolicy(args.policy),
        channel=MorphChannel(args.channel),
        airspeed=args.airspeed,
        step=np.deg2rad(args.grid_step),
    )
    grid.write_csv(os.path.join(out, "trimspace.csv"))
    mask = grid.converged_mask()
    fig, ax = plt.subplots(figsize=(5, 5))
    for i, a in enumerate(grid.alphas):
        for j, b in enumerate(grid.betas):
            if mask[i, j]:
                ax.plot(b, a, "k.", markersize=3)
    ax.set_xlabel("beta [rad]")
    ax.set_ylabel("alpha [rad]")
    ax.set_title(f"trim space ({grid.channel.value}, Gamma={grid.gamma:g})")
    fig.tight_layout()
    fig.savefig(os.path.join(out, "trimspace.svg"))
    plt.close(fig)
    n_conv = int(mask.sum())
    _write_manifest(args, out, [args.config], {"converged_cells": n_conv})
    if n_conv == 0:
        print("warning: no converged trim cells in the requested ranges")
    print(f"trimspace: {n_conv} converged cells, area {grid.area():.5f} rad^2 -> {out}")
    return 0


def cmd_stability(args):
    config = _load_cfg(args)
    out = _out_dir(args)
    rows = []
    if args.grid:
        pairs = []
        for a in np.arange(-args.alpha_max, args.alpha_max + 1e-12, np.deg2rad(args.grid_step)):
            for b in np.arange(-args.beta_max, args.beta_max + 1e-12, np.deg2rad(args.grid_step)):
                pairs.append((a, b))
    else:
        pairs = [(args.alpha, args.beta)]
    guess = None
    eigs_out = []
    for a, b in pairs:
        target = TrimTarget(
            alpha=float(a),
            beta=float(b),
            airspeed=args.airspeed,
            gamma=args.gamma,
            policy=ConstraintPolicy(args.policy),
            channel=MorphChannel(args.channel),
        )
        tp = solve_trim(config, target, guess=guess, mode="general")
        if not tp.converged:
            continue
        guess = tp.controls
        jac = linearize(config, tp)
        ms = modal_analysis(jac, airspeed=args.airspeed)
        grads = static_gradients(config, tp)
        dm = perturbation_metrics(config, tp) if args.metrics else None
        dr = [m for m in ms.modes if m.label.value == "DutchRoll"]
        rows.append(
            {
                "alpha": a,
                "beta": b,
                "Gamma": args.gamma,
                "policy": args.policy,
                "max_real_eig": ms.max_real,
                "dutch_roll_damping": dr[0].damping_ratio if dr else "",
                "delta_psi": dm.delta_psi if dm else "",
                "delta_phi": dm.delta_phi if dm else "",
                "static_alpha": grads["dalpha"],
                "static_beta": grads["dbeta"],
            }
        )
        eigs_out.append(ms.eigenvalues())
        if not args.grid:
            print(f"trim point (alpha={a:g}, beta={b:g}): 12 eigenvalues")
            for m in sorted(ms.modes, key=lambda m: -abs(m.eigenvalue)):
                print(f"  {m.eigenvalue.real:+.5f} {m.eigenvalue.imag:+.5f}j  {m.label.value}")
    if not rows:
        print("no converged trim points; nothing to analyze", file=sys.stderr)
        return 1
    with open(os.path.join(out, "stability_map.csv"), "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        w.writeheader()
        w.writerows(rows)
    fig, ax = plt.subplots(figsize=(5, 5))
    for ev in eigs_out:
        ax.plot(ev.real, ev.imag, "k.", markersize=4)
    ax.axvline(0.0, color="r", linewidth=0.5)
    ax.set_xlabel("Re [1/s]")
    ax.set_ylabel("Im [rad/s]")
    ax.set_title("eigenvalue map")
    fig.tight_layout()
    fig.savefig(os.path.join(out, "eigenvalues.svg"))
    plt.close(fig)
    _write_manifest(args, out, [args.config], {"points": len(rows)})
    print(f"stability: {len(rows)} point(s) -> {out}")
    return 0


def _maneuver_path(spec):
    if spec.kind == "scroll":
        path = ScrollPath(
            period=spec.period,
            alpha_amp=spec.alpha_amp,
            beta_amp=spec.beta_amp,
            alpha_center=spec.alpha_center,
            beta_center=spec.beta_center,
            airspeed=spec.airspeed,
        )
        return path, lambda t: scroll_target(path, t)
    left, right, lower, upper = spec.bounds
    path = RectPath(
        left=left, right=right, lower=lower, upper=upper, period=spec.period, airspeed=spec.airspeed
    )
    return path, lambda t: rect_target(path, t)


def _tip_probes(config):
    """Outermost right-wing station and outermost horizontal-stabilizer station."""
    probes = []
    for body in config.bodies:
        if body.surface is None or body.id == "vstab":
            continue
        if body.group == "wing" and body.side == "left":
            continue
        n = body.surface.station_count
        probes.append((f"{body.id}[{n - 1}]", body.surface.chord / 2.0))
    return probes


def cmd_qnpas(args):
    config = _load_cfg(args)
    out = _out_dir(args)
    spec = load_maneuver(args.maneuver)
    path, target_fn = _maneuver_path(spec)
    duration = spec.period if spec.kind == "scroll" else spec.period + path.init_duration
    # target locus
    ts = np.linspace(0.0, duration, 400)
    with open(os.path.join(out, "target_locus.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "alpha_tg", "beta_tg"])
        for t in ts:
            tg = target_fn(float(t))
            w.writerow([f"{t:.9g}", f"{tg.alpha:.10g}", f"{tg.beta:.10g}"])
    schedule = build_schedule(
        config,
        target_fn,
        duration,
        spec.period / spec.knots_per_period,
        gamma=spec.gamma,
        policy=ConstraintPolicy(spec.policy),
        channel=MorphChannel(spec.channel),
    )
    schedule.write_csv(os.path.join(out, "schedule.csv"))
    probes = _tip_probes(config)
    options = IntegratorOptions(
        rel_tol=args.rel_tol, abs_tol=args.abs_tol, probe_ids=tuple(p for p, _ in probes)
    )
    z0 = trim_state(
        TrimTarget(
            alpha=target_fn(0.0).alpha, beta=target_fn(0.0).beta, airspeed=spec.airspeed, gamma=spec.gamma
        )
    )
    traj = simulate(config, schedule, z0, (0.0, duration), options)
    traj.write_csv(os.path.join(out, "trajectory.csv"), probe_dir=out)
    tracking = evaluate_tracking(traj, target_fn)
    reports = {}
    for pid, semichord in probes:
        sp = probe_spectrum(traj, pid, semichord)
        sp.write_csv(os.path.join(out, f"spectrum_{pid.replace('[', '_').replace(']', '')}.csv"))
        rep = unsteadiness_report(sp, spec.period)
        reports[pid] = rep
        _line_plot(
            os.path.join(out, f"spectrum_{pid.replace('[', '_').replace(']', '')}.svg"),
            sp.omega[1:],
            [(sp.amplitude[1:], pid)],
            "omega [rad/s]",
            "amplitude [rad]",
            f"probe spectrum {pid}",
        )
    with open(os.path.join(out, "tracking.json"), "w") as fh:
        json.dump(
            {
                "tracking": tracking,
                "peak_thrust_N": schedule.peak_thrust(),
                "thrust_to_weight": schedule.peak_thrust()
                / (config.total_mass * config.gravity),
                "unsteadiness": {
                    pid: {
                        "power_ratio": rep.power_ratio,
                        "critical_timescale_s": rep.critical_timescale,
                        "exceeds_quasisteady": rep.exceeds_quasisteady,
                    }
                    for pid, rep in reports.items()
                },
            },
            fh,
            indent=2,
        )
    angles = np.stack([s.euler.as_array() for s in traj.states])
    tgt = np.array([[target_fn(float(t)).alpha, target_fn(float(t)).beta] for t in traj.t])
    _line_plot(
        os.path.join(out, "tracking.svg"),
        traj.t,
        [
            (angles[:, 0], "pitch"),
            (tgt[:, 0], "alpha target"),
            (angles[:, 1], "yaw"),
            (tgt[:, 1], "beta target"),
        ],
        "t [s]",
        "angle [rad]",
        "orientation tracking",
    )
    _write_manifest(args, out, [args.config, args.maneuver], {"tracking": tracking})
    print(f"qnpas: RMS alpha {tracking['rms_alpha']:.4f} rad, beta {tracking['rms_beta']:.4f} rad")
    for pid, rep in reports.items():
        flag = " [EXCEEDS QUASISTEADY VALIDITY]" if rep.exceeds_quasisteady else ""
        print(
            f"  {pid}: above-threshold power ratio {rep.power_ratio:.3e}, "
            f"t* = {rep.critical_timescale:.2f} s{flag}"
        )
    return 0


def cmd_spectra(args):
    out = _out_dir(args)
    data = np.genfromtxt(args.trajectory, delimiter=",", names=True)
    t = data["t"]
    phi = data[args.column]
    v = data["airspeed"] if "airspeed" in (data.dtype.names or ()) else np.full_like(t, args.airspeed)
    from .spectral import amplitude_spectrum, kappa_band, resample_uniform

    tu, xu = resample_uniform(t, phi)
    omega, amp = amplitude_spectrum(xu, tu[1] - tu[0])
    sp = kappa_band(omega, amp, args.semichord, v, probe_id=args.column)
    sp.write_csv(os.path.join(out, "spectrum.csv"))
    rep = unsteadiness_report(sp, args.period)
    print(rep.summary())
    _line_plot(
        os.path.join(out, "spectrum.svg"),
        omega[1:],
        [(amp[1:], args.column)],
        "omega [rad/s]",
        "amplitude [rad]",
        "spectrum",
    )
    _write_manifest(args, out, [args.trajectory])
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="morphflight",
        description="Morphing-wing flight dynamics workbench",
    )
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="airframe YAML (default: shipped case-study UAV)")
        sp.add_argument("--out", help="output directory (or MORPHFLIGHT_OUT)")

    sp = sub.add_parser("simulate", help="integrate a trajectory under fixed controls")
    common(sp)
    sp.add_argument("--duration", type=float, default=10.0)
    sp.add_argument("--airspeed", type=float, default=25.0)
    sp.add_argument("--controls", default="", help="name=value,... control settings")
    sp.add_argument("--state", help="12 comma-separated initial state components")
    sp.add_argument("--rel-tol", type=float, default=1e-9)
    sp.add_argument("--abs-tol", type=float, default=1e-11)
    sp.add_argument("--probe", action="append", help="station id to record, repeatable")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("trim", help="solve a single trim point")
    common(sp)
    sp.add_argument("--alpha", type=float, default=0.0)
    sp.add_argument("--beta", type=float, default=0.0)
    sp.add_argument("--airspeed", type=float, default=25.0)
    sp.add_argument("--gamma", type=float, default=0.0)
    sp.add_argument("--policy", default="InboardFrozen", choices=[p.value for p in ConstraintPolicy])
    sp.add_argument("--channel", default="Dihedral", choices=[c.value for c in MorphChannel])
    sp.add_argument("--mode", choices=["pitch", "general"])
    sp.set_defaults(func=cmd_trim)

    sp = sub.add_parser("trimspace", help="sweep the (alpha, beta) trim space")
    common(sp)
    sp.add_argument("--alpha-max", type=float, default=0.6)
    sp.add_argument("--beta-max", type=float, default=0.45)
    sp.add_argument("--airspeed", type=float, default=25.0)
    sp.add_argument("--gamma", type=float, default=0.0)
    sp.add_argument("--policy", default="InboardFrozen", choices=[p.value for p in ConstraintPolicy])
    sp.add_argument("--channel", default="Dihedral", choices=[c.value for c in MorphChannel])
    sp.add_argument("--grid-step", type=float, default=2.0, help="degrees")
    sp.add_argument("--pitch-only", action="store_true", help="1-D alpha sweep (thrust/incidence/elevator curves)")
    sp.set_defaults(func=cmd_trimspace)

    sp = sub.add_parser("stability", help="modal and static stability of trim points")
    common(sp)
    sp.add_argument("--alpha", type=float, default=0.0)
    sp.add_argument("--beta", type=float, default=0.0)
    sp.add_argument("--airspeed", type=float, default=25.0)
    sp.add_argument("--gamma", type=float, default=0.0)
    sp.add_argument("--policy", default="InboardFrozen", choices=[p.value for p in ConstraintPolicy])
    sp.add_argument("--channel", default="Dihedral", choices=[c.value for c in MorphChannel])
    sp.add_argument("--grid", action="store_true")
    sp.add_argument("--alpha-max", type=float, default=0.2)
    sp.add_argument("--beta-max", type=float, default=0.2)
    sp.add_argument("--grid-step", type=float, default=5.0, help="degrees")
    sp.add_argument("--metrics", action="store_true", help="also simulate yaw-perturbation metrics")
    sp.set_defaults(func=cmd_stability)

    sp = sub.add_parser("qnpas", help="build, fly, and certify a nose-pointing schedule")
    common(sp)
    sp.add_argument("maneuver", help="maneuver spec YAML")
    sp.add_argument("--rel-tol", type=float, default=1e-7)
    sp.add_argument("--abs-tol", type=float, default=1e-9)
    sp.set_defaults(func=cmd_qnpas)

    sp = sub.add_parser("spectra", help="spectral analysis of a probe CSV")
    common(sp)
    sp.add_argument("trajectory", help="probe CSV with t and angle columns")
    sp.add_argument("--column", default="phi_eff")
    sp.add_argument("--semichord", type=float, default=0.075)
    sp.add_argument("--airspeed", type=float, default=25.0)
    sp.add_argument("--period", type=float, default=10.0)
    sp.set_defaults(func=cmd_spectra)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

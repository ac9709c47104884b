"""Experiment runner: reproducible pipelines over the library modules.

Subcommands: scatter, soliton, evolve, asymptote, compare.  Each takes a
strict JSON config (--config), writes delimited outputs plus a manifest and
rendered figures into --out, and prints a JSON summary on stdout.  Exit
codes: 0 success, 1 numerical failure, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys

import numpy as np

from . import __version__, plots
from .asymptotics import ReflectionFunctional, leading_order_u
from .errors import ConfigError, CspLabError
from .pde import EvolutionConfig, conservation_report, evolve, load_trajectory, save_trajectory, sector_scan
from .profile import build_profile, geometry, save_profile
from .scatter import default_k_grid, load_table, reflection_table, save_table, small_k_slope
from .soliton import DiscreteSpectrum, classify, field_parametric, nsoliton_eval, soliton_field


# ---------------------------------------------------------------- config ---

def _check_keys(obj: dict, allowed: dict, where: str) -> None:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected an object", field=where)
    for key in obj:
        if key not in allowed:
            raise ConfigError(f"{where}: unknown key {key!r}", field=f"{where}.{key}")
    for key, required in allowed.items():
        if required and key not in obj:
            raise ConfigError(f"{where}: missing required key {key!r}",
                              field=f"{where}.{key}")


def _grid_tuple(obj: dict, where: str) -> tuple[float, float, int]:
    _check_keys(obj, {"x0": True, "dx": True, "n": True}, where)
    return float(obj["x0"]), float(obj["dx"]), int(obj["n"])


def _profile_from_config(cfg: dict, grid) -> "object":
    prof = build_profile(cfg, grid)
    return prof


def _load_config(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc


def _config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def _write_manifest(outdir, command, cfg) -> None:
    manifest = {
        "command": command,
        "config_hash": _config_hash(cfg),
        "version": __version__,
    }
    with open(os.path.join(outdir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2)


def _emit(summary: dict) -> None:
    print(json.dumps(summary, indent=2, default=str))


# -------------------------------------------------------------- commands ---

def cmd_scatter(cfg: dict, outdir: str, args) -> dict:
    _check_keys(cfg, {"profile": True, "grid": True, "k_grid": True,
                      "oversample": False}, "scatter")
    grid = _grid_tuple(cfg["grid"], "scatter.grid")
    prof = _profile_from_config(cfg["profile"], grid)
    geom = geometry(prof)
    kg = cfg["k_grid"]
    if "values" in kg:
        _check_keys(kg, {"values": True}, "scatter.k_grid")
        ks = np.asarray(kg["values"], float)
    else:
        _check_keys(kg, {"k_max": False, "n_linear": False, "n_log": False,
                         "k_split": False, "k_min": False}, "scatter.k_grid")
        ks = default_k_grid(**{k: kg[k] for k in kg})
    table = reflection_table(prof, geom, ks,
                             oversample=int(cfg.get("oversample", 8)))
    csv_path = os.path.join(outdir, "table.csv")
    side_path = os.path.join(outdir, "table.json")
    save_table(table, csv_path, side_path)
    if not args.no_figures:
        plots.plot_scatter_table(table, os.path.join(outdir, "table.png"))
    summary = {
        "table_csv": csv_path,
        "sidecar": side_path,
        "c": table.c,
        "d_imag": table.d.imag,
        "unitarity_defect": table.worst_unitarity_defect(),
    }
    try:
        summary["small_k_slope"] = small_k_slope(table)
    except CspLabError:
        summary["small_k_slope"] = None
    return summary


def _spectrum_from_config(obj: dict) -> DiscreteSpectrum:
    _check_keys(obj, {"points": True, "d_imag": False}, "soliton.spectrum")
    pts = []
    for i, p in enumerate(obj["points"]):
        _check_keys(p, {"re_k": True, "im_k": True, "re_C": True, "im_C": True},
                    f"soliton.spectrum.points[{i}]")
        pts.append((p["re_k"] + 1j * p["im_k"], p["re_C"] + 1j * p["im_C"]))
    return DiscreteSpectrum(points=tuple(pts), d=1j * float(obj.get("d_imag", 0.0)))


def cmd_soliton(cfg: dict, outdir: str, args) -> dict:
    _check_keys(cfg, {"spectrum": True, "t": False, "x_grid": False,
                      "y_grid": False}, "soliton")
    spec = _spectrum_from_config(cfg["spectrum"])
    t = float(cfg.get("t", 0.0))
    summary: dict = {"n_poles": spec.n}
    if spec.n == 1:
        summary["classification"] = classify(spec.points[0][0])
    else:
        _, _, cond = nsoliton_eval(spec, 0.0, t, want_cond=True)
        summary["condition_estimate"] = cond
        summary["classification"] = "multi"

    ygrid = cfg.get("y_grid", {"y0": -20.0, "dy": 0.01, "n": 4000})
    _check_keys(ygrid, {"y0": True, "dy": True, "n": True}, "soliton.y_grid")
    ys = float(ygrid["y0"]) + float(ygrid["dy"]) * np.arange(int(ygrid["n"]))
    u_y, x_y, _ = field_parametric(spec, ys, t)
    para_path = os.path.join(outdir, "parametric.csv")
    with open(para_path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["y", "x", "re_u", "im_u"])
        for row in zip(ys, x_y, u_y.real, u_y.imag):
            wr.writerow([repr(float(v)) for v in row])
    summary["parametric_csv"] = para_path

    gridded = False
    if summary["classification"] in ("smooth", "multi") and "x_grid" in cfg:
        xg = _grid_tuple(cfg["x_grid"], "soliton.x_grid")
        x = xg[0] + xg[1] * np.arange(xg[2])
        field = soliton_field(spec, t, x)
        field_path = os.path.join(outdir, "field.json")
        save_profile(field, field_path)
        summary["field_json"] = field_path
        gridded = True
        if not args.no_figures:
            plots.plot_profile(field, os.path.join(outdir, "field.png"),
                               title=f"t = {t:g}")
    if not gridded and not args.no_figures:
        plots.plot_parametric_soliton(ys, x_y, u_y,
                                      os.path.join(outdir, "parametric.png"))
    meta_path = os.path.join(outdir, "classification.json")
    with open(meta_path, "w") as fh:
        json.dump(summary, fh, indent=2)
    summary["classification_json"] = meta_path
    return summary


def cmd_evolve(cfg: dict, outdir: str, args) -> dict:
    _check_keys(cfg, {"profile": True, "evolution": True}, "evolve")
    ev = cfg["evolution"]
    _check_keys(ev, {"L": True, "n": True, "dt": True, "T": True,
                     "dealias_fraction": False, "snapshot_stride": False,
                     "integrating_factor": False}, "evolve.evolution")
    econf = EvolutionConfig(
        L=float(ev["L"]), n=int(ev["n"]), dt=float(ev["dt"]), T=float(ev["T"]),
        dealias_fraction=float(ev.get("dealias_fraction", 2.0 / 3.0)),
        snapshot_stride=int(ev.get("snapshot_stride", 1)),
        integrating_factor=bool(ev.get("integrating_factor", False)),
    )
    grid = (-econf.L, econf.dx, econf.n)
    prof = _profile_from_config(cfg["profile"], grid)
    traj = evolve(prof, econf)
    traj_dir = os.path.join(outdir, "trajectory")
    save_trajectory(traj, traj_dir)
    c_drift, d_drift = conservation_report(traj)
    if not args.no_figures:
        plots.plot_trajectory(traj, os.path.join(outdir, "trajectory.png"))
        plots.plot_drift(traj.drift_log, os.path.join(outdir, "drift.png"))
    return {
        "trajectory_dir": traj_dir,
        "snapshots": len(traj.times),
        "c_drift": c_drift,
        "d_drift": d_drift,
        "zero_mode_max": traj.meta["zero_mode_max"],
        "cfl_advisory": traj.meta["cfl_advisory"],
    }


def _load_table_cfg(cfg: dict, where: str):
    if "table_csv" not in cfg or "table_sidecar" not in cfg:
        raise ConfigError(f"{where}: needs table_csv and table_sidecar", field=where)
    try:
        return load_table(cfg["table_csv"], cfg["table_sidecar"])
    except FileNotFoundError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def cmd_asymptote(cfg: dict, outdir: str, args) -> dict:
    _check_keys(cfg, {"table_csv": True, "table_sidecar": True, "t": True,
                      "x": True}, "asymptote")
    table = _load_table_cfg(cfg, "asymptote")
    rf = ReflectionFunctional.from_table(table)
    times = [float(v) for v in np.atleast_1d(cfg["t"])]
    xspec = cfg["x"]
    if isinstance(xspec, dict):
        _check_keys(xspec, {"min": True, "max": True, "n": True}, "asymptote.x")
        xs = np.linspace(float(xspec["min"]), float(xspec["max"]), int(xspec["n"]))
    else:
        xs = np.asarray(xspec, float)
    rows = []
    for t in times:
        for x in xs:
            lo = leading_order_u(rf, None, float(x), t, convention=args.convention)
            rows.append((x, t, lo.kappa0, lo.A1, lo.A2,
                         lo.phi1.real, lo.phi2.real, lo.u.real, lo.u.imag))
    pred_path = os.path.join(outdir, "prediction.csv")
    with open(pred_path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["x", "t", "kappa0", "A1", "A2", "phi1", "phi2", "re_u", "im_u"])
        for row in rows:
            wr.writerow([repr(float(v)) for v in row])
    meta = {
        "convention": args.convention,
        "table_csv": cfg["table_csv"],
        "table_sidecar": cfg["table_sidecar"],
    }
    with open(os.path.join(outdir, "prediction_meta.json"), "w") as fh:
        json.dump(meta, fh, indent=2)
    if not args.no_figures:
        plots.plot_prediction(rows, os.path.join(outdir, "prediction.png"))
    return {"prediction_csv": pred_path, "rows": len(rows), **meta}


def cmd_compare(cfg: dict, outdir: str, args) -> dict:
    _check_keys(cfg, {"trajectory_dir": True, "table_csv": True,
                      "table_sidecar": True, "right_window": False,
                      "left_eps": False, "t_min": False,
                      "sample_points": False}, "compare")
    try:
        traj = load_trajectory(cfg["trajectory_dir"])
    except FileNotFoundError as exc:
        raise ConfigError(f"compare: {exc}") from exc
    table = _load_table_cfg(cfg, "compare")
    rf = ReflectionFunctional.from_table(table)

    rw = cfg.get("right_window", {})
    _check_keys(rw, {"eps": False, "upper": False, "min_level": False},
                "compare.right_window")
    eps = float(rw.get("eps", 0.2))
    upper = float(rw.get("upper", 1.0))
    min_level = float(rw.get("min_level", 0.01))
    t_min = float(cfg.get("t_min", 0.0))

    def amplitude(kappa0):
        return (np.sqrt(max(-rf.nu(-kappa0), 0.0) / kappa0)
                + np.sqrt(max(-rf.nu(kappa0), 0.0) / kappa0))

    right = sector_scan(traj, "right", eps, amplitude_fn=amplitude,
                        upper=upper, min_level=min_level, t_min=t_min)
    left_eps = float(cfg.get("left_eps", eps))
    try:
        left = sector_scan(traj, "left", left_eps, t_min=t_min)
        left_part = {
            "times": left.times.tolist(),
            "sups": left.sups.tolist(),
            "decay_exponent": left.decay_exponent,
        }
    except CspLabError as exc:
        left = None
        left_part = {"error": str(exc)}

    per_time = {}
    arr = right.rows
    for t in np.unique(arr[:, 0]) if len(arr) else []:
        sel = arr[:, 0] == t
        ratios = arr[sel, 4]
        ratios = ratios[np.isfinite(ratios)]
        stats = {"n_maxima": int(sel.sum())}
        if len(ratios):
            stats.update(ratio_min=float(ratios.min()),
                         ratio_max=float(ratios.max()),
                         ratio_median=float(np.median(ratios)))
        per_time[f"{t:g}"] = stats

    # A few pointwise evaluations in both phase conventions, side by side.
    samples = []
    if len(arr):
        n_samp = int(cfg.get("sample_points", 5))
        t_last = float(arr[:, 0].max())
        sel = arr[:, 0] == t_last
        xs = arr[sel, 1]
        for x in xs[:: max(1, len(xs) // n_samp)][:n_samp]:
            row = {"x": float(x), "t": t_last}
            for conv in ("as_printed", "real_phase"):
                lo = leading_order_u(rf, None, float(x), t_last, convention=conv)
                row[conv] = {
                    "re_u": lo.u.real, "im_u": lo.u.imag,
                    "phi1": [lo.phi1.real, lo.phi1.imag],
                    "phi2": [lo.phi2.real, lo.phi2.imag],
                    "amp1": lo.amp1, "amp2": lo.amp2,
                }
            samples.append(row)

    report = {
        "right_sector": per_time,
        "left_sector": left_part,
        "phase_conventions": samples,
        "table_csv": cfg["table_csv"],
        "trajectory_dir": cfg["trajectory_dir"],
    }
    report_path = os.path.join(outdir, "compare.json")
    with open(report_path, "w") as fh:
        json.dump(report, fh, indent=2)
    rows_path = os.path.join(outdir, "envelope_rows.csv")
    with open(rows_path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["t", "x", "sqrt_t_max_u", "pred_A1_plus_A2", "ratio"])
        for row in right.rows:
            wr.writerow([repr(float(v)) for v in row])
    if not args.no_figures and len(right.rows):
        plots.plot_compare(right.rows, left, os.path.join(outdir, "compare.png"))
    return {"report_json": report_path, "envelope_rows_csv": rows_path,
            **{"right_sector": per_time, "left_sector": left_part}}


COMMANDS = {
    "scatter": cmd_scatter,
    "soliton": cmd_soliton,
    "evolve": cmd_evolve,
    "asymptote": cmd_asymptote,
    "compare": cmd_compare,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="csplab",
        description="Inverse-scattering experiments for the complex short pulse equation",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="JSON config path")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--convention", choices=["as_printed", "real_phase"],
                        default="real_phase")
    parser.add_argument("--no-figures", action="store_true",
                        help="skip PNG rendering")
    args = parser.parse_args(argv)

    try:
        cfg = _load_config(args.config)
        os.makedirs(args.out, exist_ok=True)
        _write_manifest(args.out, args.command, cfg)
        summary = COMMANDS[args.command](cfg, args.out, args)
        _emit({"status": "ok", "command": args.command, **summary})
        return 0
    except ConfigError as exc:
        _emit({"status": "error", "error": type(exc).__name__,
               "message": str(exc), "field": exc.field})
        return 2
    except CspLabError as exc:
        _emit({"status": "error", "error": type(exc).__name__,
               "message": str(exc)})
        return 1


if __name__ == "__main__":
    sys.exit(main())

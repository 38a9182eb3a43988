"""Experiment runner.

Usage:
    fiberloop <propagate|sweep|span|span-grid|map|compare>
              [--config run.yaml] [--out dir] [--set section.key=value ...]

Every run writes its artifacts plus manifest.json, which lists each file
with a sha256 checksum alongside the fully resolved configuration.  Exit
codes: 0 success, 2 config error, 3 solver error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .config import ConfigError, RunConfig, apply_overrides, parse_config
from .pulses import energy_nj, envelope_to_csv, fwhm_ps, gaussian_pulse
from .propagator import SolverError, evolution_map, photon_number, propagate
from .sagnac import (SpanTableRow, energy_sweep, make_span_evaluator,
                     span_for_threshold)

__all__ = ["main"]

_FMT = "%.9g"


# ---------------------------------------------------------------------------
# artifact writers
# ---------------------------------------------------------------------------

class ArtifactSink:
    """Collects written files so the manifest can be emitted last."""

    def __init__(self, directory):
        self.directory = directory
        self.files = []
        os.makedirs(directory, exist_ok=True)

    def path(self, name):
        return os.path.join(self.directory, name)

    def record(self, name):
        self.files.append(name)

    def write_text(self, name, text):
        with open(self.path(name), "w", newline="") as fh:
            fh.write(text)
        self.record(name)

    def write_envelope(self, name, env):
        envelope_to_csv(env, self.path(name))
        self.record(name)

    def write_manifest(self, config: RunConfig, status="complete", note=None):
        entries = []
        for name in self.files:
            with open(self.path(name), "rb") as fh:
                digest = hashlib.sha256(fh.read()).hexdigest()
            entries.append({"path": name, "sha256": digest,
                            "bytes": os.path.getsize(self.path(name))})
        manifest = {"status": status, "artifacts": entries,
                    "config": config.resolved()}
        if note:
            manifest["note"] = note
        with open(self.path("manifest.json"), "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _csv_text(header_lines, column_names, columns):
    cols = [np.asarray(c, dtype=float) for c in columns]
    lines = [f"# {h}" for h in header_lines]
    lines.append(",".join(column_names))
    for row in zip(*cols):
        lines.append(",".join(_FMT % v for v in row))
    return "\n".join(lines) + "\n"


def write_switch_curve(sink, name, curve):
    meta = ", ".join(f"{k}={v}" for k, v in sorted(curve.metadata.items()))
    text = _csv_text(
        ["switching curve: " + meta,
         "columns: pump energy [nJ], transmission, reflection, phase [rad]"],
        ["energy_nJ", "T", "R", "phase_rad"],
        [curve.energies, curve.transmissions,
         [p.R for p in curve.points],
         [p.phase_at_signal_center for p in curve.points]])
    sink.write_text(name, text)


def write_span_summary(sink, name, rows, theta):
    lines = ["# threshold spans: energy interval with T >= theta",
             "# columns: length [m], pump fwhm [ps], Raman fraction, theta, "
             "edges/width [nJ], found flag (0/1), error",
             "length_m,fwhm_ps,f_R,theta,e_lo_nJ,e_hi_nJ,width_nJ,found,error"]
    for row in rows:
        if row.span is not None:
            s = row.span
            vals = [_FMT % v for v in
                    (row.length_m, row.pump_fwhm_ps, row.f_R, theta,
                     s.e_lo, s.e_hi, s.width)]
            lines.append(",".join(vals + ["1" if s.found else "0", ""]))
        else:
            vals = [_FMT % v for v in
                    (row.length_m, row.pump_fwhm_ps, row.f_R, theta)]
            err = (row.error or "").replace(",", ";").replace("\n", " ")
            lines.append(",".join(vals + ["", "", "", "0", err]))
    sink.write_text(name, "\n".join(lines) + "\n")


def write_map(sink, base_name, record, domain, floor_db=-40.0):
    z, axis, db = evolution_map(record, domain=domain, floor_db=floor_db)
    axis_unit = "ps" if domain == "time" else "nm"
    lines = [f"# evolution map, {domain} domain; rows follow z, columns "
             f"follow {domain} axis; values dB re global peak",
             "# first column: z [m]; remaining columns: axis samples",
             "z_m," + ",".join(_FMT % a for a in axis)]
    for zi, row in zip(z, db):
        lines.append((_FMT % zi) + "," + ",".join(_FMT % v for v in row))
    sink.write_text(base_name + ".csv", "\n".join(lines) + "\n")
    sidecar = {"domain": domain, "axis_unit": axis_unit, "z_unit": "m",
               "value_unit": "dB", "clip_db": floor_db,
               "rows": int(db.shape[0]), "cols": int(db.shape[1]),
               "axis_min": float(axis.min()), "axis_max": float(axis.max())}
    sink.write_text(base_name + ".json",
                    json.dumps(sidecar, indent=2, sort_keys=True) + "\n")


def _fr_tag(f_r):
    return ("%g" % f_r).replace(".", "p")


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------

def _single_energy(cfg):
    energies = cfg.pump_energies()
    if len(energies) != 1:
        raise ConfigError(f"{cfg.experiment} needs a single pump.energy_nj")
    return energies[0]


def run_propagate(cfg: RunConfig, sink: ArtifactSink):
    fiber = cfg.fiber_spec()
    grid = cfg.grid()
    pump = gaussian_pulse(cfg["pump.fwhm_ps"], _single_energy(cfg), grid)
    out, record = propagate(pump, fiber, cfg.solver_options())
    sink.write_envelope("input.csv", pump)
    sink.write_envelope("output.csv", out)
    summary = {
        "length_m": fiber.length,
        "steps": len(record.dz_history),
        "rejected_steps": record.rejected_steps,
        "energy_in_nJ": energy_nj(pump),
        "energy_out_nJ": energy_nj(out),
        "fwhm_in_ps": fwhm_ps(pump),
        "fwhm_out_ps": fwhm_ps(out),
        "photon_number_in": photon_number(pump),
        "photon_number_out": photon_number(out),
    }
    sink.write_text("summary.json",
                    json.dumps(summary, indent=2, sort_keys=True) + "\n")


def run_sweep(cfg: RunConfig, sink: ArtifactSink, with_span=False):
    fiber = cfg.fiber_spec()
    length = fiber.length
    grid = cfg.grid(length)
    signal = cfg.signal_spec()
    opts = cfg.solver_options(snapshots=2)
    energies = cfg.pump_energies()
    theta = cfg["sweep.theta"]
    rows = []
    for f_r in cfg.sweep_f_r_values():
        curve = energy_sweep(fiber, length, cfg["pump.fwhm_ps"], energies,
                             f_r, signal=signal, grid=grid, opts=opts)
        write_switch_curve(sink, f"sweep_fR{_fr_tag(f_r)}.csv", curve)
        if with_span:
            evaluator = make_span_evaluator(fiber, length, cfg["pump.fwhm_ps"],
                                            f_r, signal, grid=grid, opts=opts)
            span = span_for_threshold(curve, theta=theta, evaluator=evaluator,
                                      resolution_nj=cfg["sweep.resolution_nj"])
            rows.append(SpanTableRow(length, cfg["pump.fwhm_ps"], f_r, span))
    if with_span:
        write_span_summary(sink, "span_summary.csv", rows, theta)


def _grid_cell(args):
    """One (length, fwhm, f_R) span cell; module-level for process pools."""
    cfg_dict, length, fwhm, f_r = args
    cfg = parse_config(cfg_dict)
    fiber = cfg.fiber_spec().with_(length=float(length))
    grid = cfg.grid(length)
    signal = cfg.signal_spec()
    opts = cfg.solver_options(snapshots=2)
    energies = cfg.pump_energies()
    theta = cfg["sweep.theta"]
    try:
        curve = energy_sweep(fiber, length, fwhm, energies, f_r,
                             signal=signal, grid=grid, opts=opts)
        evaluator = make_span_evaluator(fiber, length, fwhm, f_r, signal,
                                        grid=grid, opts=opts)
        span = span_for_threshold(curve, theta=theta, evaluator=evaluator,
                                  resolution_nj=cfg["sweep.resolution_nj"])
        return SpanTableRow(length, fwhm, f_r, span)
    except SolverError as exc:
        return SpanTableRow(length, fwhm, f_r, None, str(exc))


def run_span_grid(cfg: RunConfig, sink: ArtifactSink):
    g = cfg.sections["span_grid"]
    cells = [(cfg.resolved(), float(length), float(fwhm), float(f_r))
             for length in g["lengths_m"]
             for fwhm in g["fwhms_ps"]
             for f_r in g["f_r_values"]]
    workers = int(os.environ.get("FIBERLOOP_WORKERS", "1"))
    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_grid_cell, cells))
    else:
        rows = [_grid_cell(c) for c in cells]
    write_span_summary(sink, "span_grid.csv", rows, cfg["sweep.theta"])


def run_map(cfg: RunConfig, sink: ArtifactSink):
    fiber = cfg.fiber_spec()
    grid = cfg.grid()
    pump = gaussian_pulse(cfg["pump.fwhm_ps"], _single_energy(cfg), grid)
    out, record = propagate(pump, fiber, cfg.solver_options())
    write_map(sink, "map_time", record, "time")
    write_map(sink, "map_wavelength", record, "wavelength")
    sink.write_envelope("output.csv", out)


def run_compare(cfg: RunConfig, sink: ArtifactSink):
    fiber = cfg.fiber_spec()
    grid = cfg.grid()
    opts = cfg.solver_options(snapshots=2)
    pump = gaussian_pulse(cfg["pump.fwhm_ps"], _single_energy(cfg), grid)
    out_raman, _ = propagate(pump, fiber, opts)
    out_kerr, _ = propagate(pump, fiber.with_(f_R=0.0), opts)
    peak = float(np.max(np.abs(pump.a) ** 2))
    text = _csv_text(
        [f"time-domain overlay after {fiber.length} m, pump "
         f"{cfg['pump.fwhm_ps']} ps / {_single_energy(cfg)} nJ; "
         "powers normalized to the input peak",
         "columns: t [ps], |A|^2/P0 with Raman, without Raman, input"],
        ["t_ps", "P_raman_norm", "P_kerr_norm", "P_input_norm"],
        [grid.t, np.abs(out_raman.a) ** 2 / peak,
         np.abs(out_kerr.a) ** 2 / peak, np.abs(pump.a) ** 2 / peak])
    sink.write_text("time_overlay.csv", text)


_RUNNERS = {
    "propagate": run_propagate,
    "sweep": lambda cfg, sink: run_sweep(cfg, sink, with_span=False),
    "span": lambda cfg, sink: run_sweep(cfg, sink, with_span=True),
    "span-grid": run_span_grid,
    "map": run_map,
    "compare": run_compare,
}


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _build_parser():
    parser = argparse.ArgumentParser(
        prog="fiberloop",
        description="Fiber-loop switch experiments: GNLS propagation, "
                    "switching-curve sweeps, threshold spans, evolution maps.")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in _RUNNERS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="YAML run configuration")
        p.add_argument("--out", help="output directory (overrides config)")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="SECTION.KEY=VALUE",
                       help="override a config field; repeatable")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.config is not None:
            import yaml
            try:
                with open(args.config) as fh:
                    data = yaml.safe_load(fh) or {}
            except FileNotFoundError:
                raise ConfigError(f"config file not found: {args.config}")
            except yaml.YAMLError as exc:
                raise ConfigError(f"{args.config}: invalid YAML: {exc}")
        else:
            data = {}
        data = apply_overrides(data, args.overrides)
        data["experiment"] = args.experiment
        cfg = parse_config(data)
        if args.out:
            cfg.sections["output"]["directory"] = args.out
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    try:
        sink = ArtifactSink(cfg["output.directory"])
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 4

    try:
        _RUNNERS[cfg.experiment](cfg, sink)
        sink.write_manifest(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        sink.write_manifest(cfg, status="failed",
                            note="solver failure; artifacts are partial")
        return 3
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())

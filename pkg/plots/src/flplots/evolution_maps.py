"""Temporal and spectral evolution heatmaps from map CSVs + JSON sidecars."""

import json
import os
import sys

import matplotlib.pyplot as plt
import numpy as np

from .common import PlotDataError, base_parser, save

CLIP_DB = -40.0


def load_map(csv_path):
    sidecar_path = os.path.splitext(csv_path)[0] + ".json"
    with open(sidecar_path) as fh:
        sidecar = json.load(fh)
    header = None
    data_lines = []
    with open(csv_path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if header is None:
                header = line
            else:
                data_lines.append(line)
    if header is None or len(data_lines) < 2:
        raise PlotDataError(f"{csv_path}: need at least two snapshot rows")
    axis = np.array([float(v) for v in header.split(",")[1:]])
    data = np.array([[float(v) for v in line.split(",")] for line in data_lines])
    return sidecar, data[:, 0], axis, data[:, 1:]


def render(paths, args):
    fig, axes = plt.subplots(1, len(paths), figsize=(4.6 * len(paths), 3.6))
    if len(paths) == 1:
        axes = [axes]
    for ax, path in zip(axes, paths):
        sidecar, z, axis, values = load_map(path)
        clip = float(sidecar.get("clip_db", CLIP_DB))
        mesh = ax.pcolormesh(axis, z, values, cmap="magma", vmin=clip, vmax=0.0,
                             shading="auto")
        unit = sidecar.get("axis_unit", "")
        domain = sidecar.get("domain", "")
        ax.set_xlabel(f"{domain} ({unit})")
        ax.set_ylabel("z (m)")
        if domain == "wavelength" and args.wavelength_range:
            ax.set_xlim(args.wavelength_range)
        elif domain == "time" and args.time_range:
            ax.set_xlim(args.time_range)
        fig.colorbar(mesh, ax=ax, label="dB")
    if args.title:
        fig.suptitle(args.title)
    save(fig, args)


def main(argv=None):
    p = base_parser("Plot evolution map CSVs (time and/or wavelength domain).")
    p.add_argument("csv", nargs="+", help="map CSV(s); sidecar JSON inferred")
    p.add_argument("--time-range", nargs=2, type=float, default=None)
    p.add_argument("--wavelength-range", nargs=2, type=float, default=None)
    args = p.parse_args(argv)
    render(args.csv, args)
    return 0


if __name__ == "__main__":
    sys.exit(main())

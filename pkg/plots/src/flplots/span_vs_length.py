"""Threshold-span width vs fiber length: one line per pulse width,
solid for f_R = 0, dashed for Raman on."""

import sys
from collections import defaultdict

import matplotlib.pyplot as plt
import numpy as np

from .common import PlotDataError, base_parser, columns, save


def render(path, args):
    _, cols = columns(path, ["length_m", "fwhm_ps", "f_R", "width_nJ", "found"])
    groups = defaultdict(list)   # (fwhm, f_R) -> [(length, width)]
    for i in range(len(cols["length_m"])):
        if cols["found"][i] != 1.0 or np.isnan(cols["width_nJ"][i]):
            continue
        key = (cols["fwhm_ps"][i], cols["f_R"][i])
        groups[key].append((cols["length_m"][i], cols["width_nJ"][i]))
    if not groups:
        raise PlotDataError(f"{path}: no resolved spans to plot")

    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    widths = sorted({k[0] for k in groups})
    colors = plt.cm.viridis(np.linspace(0.1, 0.8, len(widths)))
    for (fwhm, f_r), pts in sorted(groups.items()):
        pts.sort()
        ls = "-" if f_r == 0.0 else "--"
        color = colors[widths.index(fwhm)]
        suffix = "no Raman" if f_r == 0.0 else "Raman"
        ax.plot([p[0] for p in pts], [p[1] for p in pts], ls, color=color,
                marker="o", ms=4, label=f"{fwhm:g} ps, {suffix}")
    ax.set_xlabel("fiber length (m)")
    ax.set_ylabel("energy span (nJ)")
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    if args.title:
        ax.set_title(args.title)
    save(fig, args)


def main(argv=None):
    p = base_parser("Plot threshold spans vs length from a span-grid CSV.")
    p.add_argument("csv", help="span summary CSV")
    args = p.parse_args(argv)
    render(args.csv, args)
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Normalized time-domain pump overlay: Raman vs Kerr-only vs input."""

import sys

import matplotlib.pyplot as plt

from .common import base_parser, columns, save


def render(path, args):
    _, cols = columns(path, ["t_ps", "P_raman_norm", "P_kerr_norm",
                             "P_input_norm"])
    fig, ax = plt.subplots(figsize=(5.6, 3.6))
    ax.plot(cols["t_ps"], cols["P_input_norm"], color="0.6", lw=1,
            label="input")
    ax.plot(cols["t_ps"], cols["P_kerr_norm"], "--", lw=1.2,
            label="output, no Raman")
    ax.plot(cols["t_ps"], cols["P_raman_norm"], lw=1.2,
            label="output, with Raman")
    ax.set_xlabel("time (ps)")
    ax.set_ylabel("normalized power")
    if args.logy:
        ax.set_yscale("log")
        ax.set_ylim(1e-6, 2)
    if args.xlim:
        ax.set_xlim(args.xlim[0], args.xlim[1])
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    if args.title:
        ax.set_title(args.title)
    save(fig, args)


def main(argv=None):
    p = base_parser("Plot the time-domain overlay CSV from `fiberloop compare`.")
    p.add_argument("csv", help="time overlay CSV")
    p.add_argument("--logy", action="store_true")
    p.add_argument("--xlim", nargs=2, type=float, default=None,
                   metavar=("T0", "T1"))
    args = p.parse_args(argv)
    render(args.csv, args)
    return 0


if __name__ == "__main__":
    sys.exit(main())

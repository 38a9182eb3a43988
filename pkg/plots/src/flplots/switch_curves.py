"""Switching probability vs pump energy, one line per curve CSV."""

import sys

import matplotlib.pyplot as plt

from .common import base_parser, columns, metadata_from_comments, save


def label_for(meta, path):
    f_r = meta.get("f_R")
    if f_r is not None:
        return "no Raman" if float(f_r) == 0.0 else f"Raman (f_R = {f_r})"
    return path


def render(paths, args):
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    styles = ["-", "--", "-.", ":"]
    for i, path in enumerate(paths):
        comments, cols = columns(path, ["energy_nJ", "T"])
        meta = metadata_from_comments(comments)
        ax.plot(cols["energy_nJ"], cols["T"], styles[i % len(styles)],
                label=label_for(meta, path))
        if args.markers:
            ax.plot(cols["energy_nJ"], cols["T"], "o", ms=3,
                    color=ax.lines[-1].get_color(), alpha=0.5)
    ax.set_xlabel("pump energy (nJ)")
    ax.set_ylabel("switching probability T")
    ax.set_ylim(-0.02, 1.05)
    ax.grid(alpha=0.3)
    ax.legend(loc="lower right", fontsize=8)
    if args.title:
        ax.set_title(args.title)
    save(fig, args)


def main(argv=None):
    p = base_parser("Plot switching curves T(E) from SwitchCurve CSVs.")
    p.add_argument("csv", nargs="+", help="one or more switch-curve CSVs")
    p.add_argument("--markers", action="store_true",
                   help="overlay sample markers (experimental-marker slot)")
    args = p.parse_args(argv)
    render(args.csv, args)
    return 0


if __name__ == "__main__":
    sys.exit(main())

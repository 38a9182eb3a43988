"""Shared CSV ingestion and figure plumbing."""

import argparse
import csv
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


class PlotDataError(ValueError):
    pass


def read_csv(path):
    """(comment_lines, header_fields, rows as list of string lists)."""
    comments, header, rows = [], None, []
    with open(path, newline="") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                comments.append(line[1:].strip())
            elif header is None:
                header = line.split(",")
            else:
                rows.append(next(csv.reader([line])))
    if header is None or not rows:
        raise PlotDataError(f"{path}: no data rows")
    return comments, header, rows


def columns(path, names):
    """Numeric columns by name; raises on missing columns or empty data."""
    comments, header, rows = read_csv(path)
    idx = {}
    for name in names:
        if name not in header:
            raise PlotDataError(f"{path}: missing column {name!r}")
        idx[name] = header.index(name)
    out = {}
    for name in names:
        col = []
        for row in rows:
            cell = row[idx[name]]
            col.append(float(cell) if cell != "" else float("nan"))
        out[name] = col
    return comments, out


def metadata_from_comments(comments):
    """key=value pairs scattered through '#' comment lines."""
    meta = {}
    for line in comments:
        for token in line.replace(";", " ").split(","):
            token = token.strip()
            if "=" in token:
                key, _, value = token.partition("=")
                # tolerate prose prefixes like "switching curve: f_R=0.18"
                key = key.split()[-1].lstrip(":") if key.split() else key
                meta[key] = value.strip()
    return meta


def base_parser(description):
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--out", required=True, help="output image path")
    p.add_argument("--title", default=None)
    p.add_argument("--dpi", type=int, default=150)
    return p


def save(fig, args):
    out_dir = os.path.dirname(os.path.abspath(args.out))
    os.makedirs(out_dir, exist_ok=True)
    fig.savefig(args.out, dpi=args.dpi, bbox_inches="tight")
    plt.close(fig)

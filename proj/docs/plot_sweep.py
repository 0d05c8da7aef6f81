#!/usr/bin/env python3
"""Plot one column of a v2i CSV against another.

    v2i sweep --scenario scenarios/speed_collision.ini --out speed.csv
    python3 docs/plot_sweep.py speed.csv v_kmh p_c --out speed.png

Rows of `v2i optimize` output can be filtered with --row m_star.
"""

import argparse
import csv

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def read_table(path):
    with open(path, newline="") as f:
        lines = [line for line in f if not line.startswith("#")]
    return list(csv.DictReader(lines))


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("csv")
    ap.add_argument("x")
    ap.add_argument("y", nargs="+")
    ap.add_argument("--row", help="keep only rows whose `row` column equals this")
    ap.add_argument("--out", default="plot.png")
    args = ap.parse_args()

    rows = read_table(args.csv)
    if args.row:
        rows = [r for r in rows if r.get("row") == args.row]
    xs = [float(r[args.x]) for r in rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    for col in args.y:
        ax.plot(xs, [float(r[col]) for r in rows], marker="o", ms=3, label=col)
    ax.set_xlabel(args.x)
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)


if __name__ == "__main__":
    main()

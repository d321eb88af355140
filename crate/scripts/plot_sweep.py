#!/usr/bin/env python3
"""Plot `skc sweep` or `skc nonasym` CSV output.

    skc sweep --channel loss --min 0.05 --max 0.95 --steps 19 --nbar 1 --out loss.csv
    python3 scripts/plot_sweep.py loss.csv -o loss.png
"""

import argparse
import csv
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def plot_sweep(rows, ax):
    axis = "v" if len({r["tau"] for r in rows}) == 1 else "tau"
    floor = {}
    curves = defaultdict(list)
    for r in rows:
        x = float(r[axis])
        floor[x] = float(r["b0_bits"])
        curves[float(r["mu"])].append((x, float(r["bmu_bits"])))
    xs = sorted(floor)
    ax.plot(xs, [floor[x] for x in xs], "k-", label="B0")
    for mu in sorted(curves, reverse=True):
        pts = sorted(curves[mu])
        ax.plot([p[0] for p in pts], [p[1] for p in pts], "--", label=f"B_mu, mu={mu:g}")
    ax.set_xlabel(axis)
    ax.set_ylabel("bits per channel use")
    ax.set_yscale("log")


def plot_nonasym(rows, ax):
    n = [float(r["n"]) for r in rows]
    ax.plot(n, [float(r["phi_n_bits"]) for r in rows], "b-", label="Phi_n")
    ax.plot(n, [float(r["b_mu_bits"]) for r in rows], "r--", label="B_mu")
    ax.plot(n, [float(r["b0_bits"]) for r in rows], "k:", label="B0")
    ax.set_xscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("bits per channel use")


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("csv", nargs="?", default="-")
    p.add_argument("-o", "--output", default="sweep.png")
    args = p.parse_args()
    stream = sys.stdin if args.csv == "-" else open(args.csv, newline="")
    rows = list(csv.DictReader(stream))
    if not rows:
        sys.exit("no rows")
    fig, ax = plt.subplots(figsize=(6, 4))
    (plot_nonasym if "phi_n_bits" in rows[0] else plot_sweep)(rows, ax)
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)


if __name__ == "__main__":
    main()

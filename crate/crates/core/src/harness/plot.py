#!/usr/bin/env python3
"""Charts for one sweep: RMSE vs N, RMSE_k vs k, and time vs N.

Reads summary.csv and rmse_by_k.csv from the directory holding this script
(or the directory given as the first argument) and writes PNG files there.
"""
import csv
import os
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def label(row):
    name = row["filter"]
    if row["sigma_w"]:
        name += " (sigma_w=%s)" % row["sigma_w"]
    return name


def read(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def main():
    here = sys.argv[1] if len(sys.argv) > 1 else os.path.dirname(os.path.abspath(__file__))
    summary = read(os.path.join(here, "summary.csv"))
    by_k = read(os.path.join(here, "rmse_by_k.csv"))

    rmse = defaultdict(list)
    wall = defaultdict(list)
    flat = {}
    for row in summary:
        if row["N"]:
            n = int(row["N"])
            rmse[label(row)].append((n, float(row["global_rmse"])))
            if row["mean_wall_ms"]:
                wall[label(row)].append((n, float(row["mean_wall_ms"])))
        else:
            flat[label(row)] = float(row["global_rmse"])

    fig, ax = plt.subplots()
    for name, pts in sorted(rmse.items()):
        pts.sort()
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=name)
    for name, value in sorted(flat.items()):
        ax.axhline(value, linestyle="--", label=name)
    ax.set_xscale("log")
    ax.set_xlabel("N")
    ax.set_ylabel("global RMSE")
    ax.legend()
    fig.savefig(os.path.join(here, "rmse_vs_n.png"), dpi=120)

    if wall:
        fig, ax = plt.subplots()
        for name, pts in sorted(wall.items()):
            pts.sort()
            ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=name)
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("N")
        ax.set_ylabel("wall time per trajectory (ms)")
        ax.legend()
        fig.savefig(os.path.join(here, "time_vs_n.png"), dpi=120)

    largest = {}
    for row in by_k:
        n = int(row["N"]) if row["N"] else 0
        largest[label(row)] = max(largest.get(label(row), 0), n)
    curves = defaultdict(list)
    for row in by_k:
        n = int(row["N"]) if row["N"] else 0
        if n == largest[label(row)]:
            curves[label(row) + (" N=%d" % n if n else "")].append((int(row["k"]), float(row["rmse_k"])))
    fig, ax = plt.subplots()
    for name, pts in sorted(curves.items()):
        ax.plot([p[0] for p in pts], [p[1] for p in pts], label=name)
    ax.set_xlabel("k")
    ax.set_ylabel("RMSE_k")
    ax.legend()
    fig.savefig(os.path.join(here, "rmse_by_k.png"), dpi=120)


if __name__ == "__main__":
    main()

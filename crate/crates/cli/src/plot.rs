//! The plot script written next to spectra outputs. It only reads the CSVs
//! in its own directory and is never run by the pipeline.

pub const SCRIPT_NAME: &str = "plot_spectra.py";

const SCRIPT: &str = r#"#!/usr/bin/env python3
"""Plots the CSVs written by `wgqed spectra` in this directory.

Usage: python3 plot_spectra.py [--out figures.png]
Needs numpy and matplotlib; the simulation itself does not.
"""
import argparse
import csv
import glob
import os

HERE = os.path.dirname(os.path.abspath(__file__))


def read(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    cols = {name: [float(r[i]) for r in body] for i, name in enumerate(header)}
    return cols


def grid(cols, value):
    import numpy as np

    t = np.unique(cols["gamma_t"])
    w = np.unique(cols["omega_minus_wp_over_gamma"])
    z = np.asarray(cols[value]).reshape(len(t), len(w))
    return t, w, z


def main():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default=os.path.join(HERE, "spectra.png"))
    args = parser.parse_args()

    maps = []
    for kind, value in (("spectrum", "s"), ("intensity", "i")):
        for path in sorted(glob.glob(os.path.join(HERE, kind + "_*.csv"))):
            label = os.path.basename(path)[len(kind) + 1 : -4]
            maps.append((kind, label, value, path))
    lines = sorted(glob.glob(os.path.join(HERE, "stationary_*.csv")))

    n = len(maps) + (1 if lines else 0)
    if n == 0:
        raise SystemExit("no spectra CSVs found next to this script")
    fig, axes = plt.subplots(1, n, figsize=(4.5 * n, 4), squeeze=False)
    for ax, (kind, label, value, path) in zip(axes[0], maps):
        t, w, z = grid(read(path), value)
        mesh = ax.pcolormesh(w, t, z, shading="auto")
        fig.colorbar(mesh, ax=ax)
        ax.set_xlabel("(omega - omega_p) / gamma")
        ax.set_ylabel("gamma t")
        ax.set_title("%s (%s)" % (kind, label))
    if lines:
        ax = axes[0][-1]
        for path in lines:
            cols = read(path)
            label = os.path.basename(path)[len("stationary_") : -4]
            ax.plot(cols["omega_minus_wp_over_gamma"], cols["s"], label="S, " + label)
        ax.plot(cols["omega_minus_wp_over_gamma"], cols["input_spectrum"], "k--", label="|f|^2")
        ax.set_xlabel("(omega - omega_p) / gamma")
        ax.set_title("long-time spectrum")
        ax.legend()
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)


if __name__ == "__main__":
    main()
"#;

pub fn script() -> &'static str {
    SCRIPT
}

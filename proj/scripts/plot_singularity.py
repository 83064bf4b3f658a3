#!/usr/bin/env python3
"""Plot i*Phi eigenvalues against 1/r for each ray of a singularity.json."""
import argparse
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("report", type=Path)
    ap.add_argument("-o", "--output", type=Path, default=Path("singularity.png"))
    args = ap.parse_args()
    rep = json.loads(args.report.read_text())
    fig, ax = plt.subplots(figsize=(6, 4))
    for ray in rep["rays"]:
        d = ray["direction"]
        label = f"({d[0]:.2f}, {d[1]:.2f}, {d[2]:.2f})"
        xs, ys = [], []
        for s in ray["samples"]:
            for mu in s["eigenvalues"]:
                xs.append(1 / s["r"])
                ys.append(mu)
        if xs:
            ax.plot(xs, ys, "o", label=label)
        if ray["coefficient"] is not None:
            rmax = max(1 / s["r"] for s in ray["samples"])
            ax.plot([0, rmax], [0, ray["coefficient"] * rmax], "--", lw=0.8)
    ax.set_xlabel("1/r")
    ax.set_ylabel("eigenvalues of i Phi")
    if ax.get_legend_handles_labels()[0]:
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)


if __name__ == "__main__":
    main()

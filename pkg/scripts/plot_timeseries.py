#!/usr/bin/env python3
"""Plot columns of one or more timeseries.csv files produced by the run command.

Plotting stays out of the package on purpose; this script only consumes the
CSV artifacts.  Requires matplotlib, which is not a package dependency.
"""

import argparse
import csv
import sys
from pathlib import Path


def read_csv(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(c) for c in row] for row in reader]
    cols = {name: [r[i] for r in rows] for i, name in enumerate(header)}
    return cols


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csv", nargs="+", help="timeseries.csv files")
    ap.add_argument("--columns", default="sup_norm,l2_norm",
                    help="comma separated column names to plot against time")
    ap.add_argument("--logy", action="store_true")
    ap.add_argument("--out", default=None, help="output image; default shows a window")
    args = ap.parse_args(argv)

    try:
        import matplotlib
        if args.out:
            matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib is required for plotting: pip install matplotlib",
              file=sys.stderr)
        return 1

    wanted = [c.strip() for c in args.columns.split(",") if c.strip()]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for path in args.csv:
        cols = read_csv(path)
        label_base = Path(path).parent.name or Path(path).stem
        for name in wanted:
            if name not in cols:
                print(f"{path}: no column {name!r} (has {sorted(cols)})", file=sys.stderr)
                return 1
            ax.plot(cols["time"], cols[name], label=f"{label_base}:{name}")
    ax.set_xlabel("t")
    if args.logy:
        ax.set_yscale("log")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    if args.out:
        fig.savefig(args.out, dpi=150)
        print(f"wrote {args.out}")
    else:
        plt.show()
    return 0


if __name__ == "__main__":
    sys.exit(main())

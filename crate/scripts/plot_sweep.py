#!/usr/bin/env python3
"""Plot a sweep or regime CSV written by `multisteer sweep` / `multisteer regimes`."""

import argparse
import csv
import math
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def load(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        sys.exit(f"{path}: no rows")
    return rows


def column(rows, name):
    out = []
    for r in rows:
        v = r.get(name, "")
        out.append(float(v) if v not in ("", None) else math.nan)
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csv")
    ap.add_argument("-o", "--output", default="sweep.png")
    ap.add_argument("--xlabel", default=None)
    args = ap.parse_args()

    rows = load(args.csv)
    x = column(rows, "parameter")
    modes = [c for c in rows[0] if c.startswith("s2_m")]
    modes = [c for c in modes if any(not math.isnan(v) for v in column(rows, c))]
    has_triple = any(not math.isnan(v) for v in column(rows, "mono_product"))

    n_panels = 3 if has_triple else 2
    fig, axes = plt.subplots(n_panels, 1, sharex=True, figsize=(7, 3 * n_panels))

    ax = axes[0]
    for c in modes:
        ax.plot(x, column(rows, c), label=f"mode {c[4:]}")
    ax.axhline(1.0, color="k", lw=0.8, ls="--")
    ax.set_ylabel("steering number S²")
    ax.legend(fontsize="small", ncol=2)

    if has_triple:
        ax = axes[1]
        for c, label in [
            ("mono_s_a_b", "S_A|B"),
            ("mono_s_a_c", "S_A|C"),
            ("s_a_bc", "S_A|BC"),
            ("s_b_a", "S_B|A"),
            ("s_c_a", "S_C|A"),
            ("mono_product", "S_A|B · S_A|C"),
        ]:
            ax.plot(x, column(rows, c), label=label)
        ax.axhline(1.0, color="k", lw=0.8, ls="--")
        ax.set_ylabel("S")
        ax.legend(fontsize="small", ncol=2)

    ax = axes[-1]
    ax.step(x, column(rows, "regime_count"), where="mid")
    ax.set_ylabel("steerable modes")
    ax.set_xlabel(args.xlabel or "parameter")

    fig.tight_layout()
    fig.savefig(args.output, dpi=150)
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main()

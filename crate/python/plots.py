"""Render a sweep CSV as a dual-axis figure.

Usage: plots.py <csv> --experiment {1,2,3} --out <path.svg|path.png>
"""

import argparse
import csv
import sys

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "drlab"
import matplotlib.pyplot as plt  # noqa: E402

REQUIRED = ["sweep_value", "eps", "eps_prime", "cl", "discard_rate", "contributive_rate", "wall_time"]
LABELS = {1: "n", 2: "exact-code length", 3: "amplification word size"}
FIXED = {
    1: ["k", "w", "repetitions"],
    2: ["n", "w", "repetitions", "l_major"],
    3: ["n", "w", "repetitions", "l_major", "l_exact"],
}


def load(path):
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        header = reader.fieldnames or []
        missing = [c for c in REQUIRED if c not in header]
        if missing:
            raise ValueError(f"CSV lacks columns: {', '.join(missing)}")
        rows = list(reader)
    if not rows:
        raise ValueError("CSV has no data rows")
    return rows


def render(rows, experiment, out):
    x = [float(r["sweep_value"]) for r in rows]
    fig, left = plt.subplots(figsize=(7, 4.5))
    left.plot(x, [float(r["eps"]) for r in rows], marker="o", label="error rate")
    left.plot(x, [float(r["eps_prime"]) for r in rows], marker="s", label="knowledge rate")
    left.set_xlabel(LABELS[experiment])
    left.set_ylabel("rate")
    right = left.twinx()
    right.plot(x, [float(r["cl"]) for r in rows], color="tab:red", marker="^", label="CL")
    right.set_ylabel("cryptologic limit")
    fixed = ", ".join(f"{k}={rows[0][k]}" for k in FIXED[experiment] if k in rows[0])
    left.set_title(f"experiment {experiment}: {fixed}")
    handles = left.get_legend_handles_labels()
    extra = right.get_legend_handles_labels()
    left.legend(handles[0] + extra[0], handles[1] + extra[1], loc="best")
    fig.tight_layout()
    meta = {"Date": None} if out.endswith(".svg") else {"Software": None}
    fig.savefig(out, metadata=meta)
    plt.close(fig)


def main(argv=None):
    p = argparse.ArgumentParser(prog="plots", description=__doc__.splitlines()[0])
    p.add_argument("csv")
    p.add_argument("--experiment", type=int, choices=[1, 2, 3], required=True)
    p.add_argument("--out", required=True)
    args = p.parse_args(argv)
    if not args.out.endswith((".svg", ".png")):
        p.error("--out must end in .svg or .png")
    try:
        rows = load(args.csv)
    except (OSError, ValueError) as e:
        print(f"plots: {e}", file=sys.stderr)
        return 1
    render(rows, args.experiment, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())

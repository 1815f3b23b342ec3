"""Write figure1.csv, figure2.csv and figure3.csv into an output directory.

    python3 scripts/make_figures.py --out results --jobs 4
"""
import argparse
from pathlib import Path

from mpesplit.harness import figure1_data, figure2_data, figure3_data
from mpesplit.numerics import get_precision


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--points", type=int, default=200)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--fig2-orders", default="4,8,16,24,32,48")
    ap.add_argument("--fig3-orders", default="24,32,40,48,56,60,64,68,72,80")
    ap.add_argument("--dps", type=int, default=40)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    ext = get_precision("extended", args.dps)
    orders2 = [int(x) for x in args.fig2_orders.split(",")]
    orders3 = [int(x) for x in args.fig3_orders.split(",")]
    outputs = {
        "figure1.csv": lambda: figure1_data(points=args.points),
        "figure2.csv": lambda: figure2_data(orders2, ext, args.points, jobs=args.jobs),
        "figure3.csv": lambda: figure3_data(orders3, args.points, extended=ext, jobs=args.jobs),
    }
    for name, make in outputs.items():
        lines = make()
        (args.out / name).write_text("\n".join(lines) + "\n")
        print(f"wrote {args.out / name} ({len(lines) - 2} rows)")


if __name__ == "__main__":
    main()

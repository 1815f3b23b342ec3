"""Double versus extended precision on the hydrogen problem, by order."""
import argparse

from mpesplit.harness import roundoff_study, uniform_grid
from mpesplit.numerics import EXTENDED


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--orders", default="24,32,40,48,56,60,64,68,72,80")
    ap.add_argument("--points", type=int, default=200)
    ap.add_argument("--jobs", type=int, default=4)
    args = ap.parse_args()
    orders = [int(x) for x in args.orders.split(",")]
    grid = [str(t) for t in uniform_grid("0.1", 5, args.points, EXTENDED)]
    table = roundoff_study("hydrogen", orders, grid, jobs=args.jobs)
    print("order,double_max_error,extended_max_error")
    for o, d, e in table.max_errors():
        print(f"{o},{float(d):.6e},{float(e):.6e}")
    print(f"# degradation onset: order {table.onset}")


if __name__ == "__main__":
    main()

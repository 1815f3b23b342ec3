"""Fitted local and global orders for every scheme on the smooth test problems."""
import argparse

from mpesplit.harness import global_order, local_order, scheme_for_order
from mpesplit.kernels import KernelKind
from mpesplit.mpe import build_final_correction
from mpesplit.problems import get_problem


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-order", type=int, default=10)
    args = ap.parse_args()
    print("problem,scheme,mode,nominal,fitted,residual")
    for name in ("matrix2x2", "oscillator"):
        prob = get_problem(name)
        for order in range(2, args.max_order + 1):
            scheme = scheme_for_order(order, None if order % 2 else prob.default_kernel)
            hs = [0.8, 0.6, 0.5, 0.4] if order >= 8 else [0.4, 0.2, 0.1]
            rep = local_order(prob, scheme, hs)
            print(f"{name},{scheme.describe()},local,{order + 1},"
                  f"{rep.fitted_order:.3f},{rep.fit_residual:.2e}")
        for order in (2, 4, 6):
            scheme = scheme_for_order(order, prob.default_kernel)
            rep = global_order(prob, scheme, 1, [4, 8, 16])
            print(f"{name},{scheme.describe()},global,{order},{rep.fitted_order:.3f},{rep.fit_residual:.2e}")
    prob = get_problem("oscillator")
    fc = build_final_correction(8, 2, KernelKind.STRANG_BA)
    for observe in ("end", "substate"):
        rep = global_order(prob, fc, 1, [2, 4, 8], observe=observe)
        print(f"oscillator,{fc.describe()},global-{observe},-,{rep.fitted_order:.3f},{rep.fit_residual:.2e}")


if __name__ == "__main__":
    main()

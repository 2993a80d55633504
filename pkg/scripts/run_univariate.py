"""Univariate error sweeps for |sin x| and |sin x|^2.5.

Writes one CSV per target to ``--out`` and prints the log-log slope per K.
"""

import argparse
from pathlib import Path

from jqnn.io import write_atomic
from jqnn.pipeline import fit_loglog_slope, run_experiment
from jqnn.trig_core import r_of_K


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--Nmax", type=int, default=20)
    ap.add_argument("--Kmax", type=int, default=5)
    ap.add_argument("--out", type=Path, default=Path("results"))
    args = ap.parse_args()

    for name in ("fig1", "fig2"):
        curve = run_experiment(name, range(1, args.Nmax + 1), range(args.Kmax + 1))
        write_atomic(args.out / f"{name}_errors.csv", curve.to_csv())
        print(f"{name}:")
        for K in range(args.Kmax + 1):
            n_min = max(4, 2 * r_of_K(K))
            try:
                slope = fit_loglog_slope(curve, K, N_min=n_min)
            except ValueError:
                continue
            last = curve.for_K(K)[-1]
            print(f"  K={K}  slope(N>={n_min})={slope:+.3f}  error(N={last.N})={last.qnn_sup_error:.3e}")


if __name__ == "__main__":
    main()

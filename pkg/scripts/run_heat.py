"""Two-dimensional heat-equation experiment.

Approximates u(t, x) = u1(t, x1) u1(t, x2) with the LCU circuit for a grid of
(N, K) and writes the error curve plus the quadrature cross-check of u1.
"""

import argparse
import math
from pathlib import Path

from jqnn.io import write_atomic
from jqnn.pipeline import heat_convolution, heat_reference, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--t", type=float, default=0.5)
    ap.add_argument("--Nmax", type=int, default=7)
    ap.add_argument("--Kmax", type=int, default=2)
    ap.add_argument("--out", type=Path, default=Path("results"))
    args = ap.parse_args()

    s = math.pi / 2
    series = float(heat_reference(args.t, 1)(s))
    print(f"u1({args.t}, pi/2): series {series:.12f}  quadrature {heat_convolution(args.t, s):.12f}")

    curve = run_experiment("heat", range(2, args.Nmax + 1), range(args.Kmax + 1), t=args.t)
    write_atomic(args.out / f"heat_t{args.t:g}_errors.csv", curve.to_csv())
    for r in curve.rows:
        print(f"N={r.N} K={r.K} L={r.L}  poly {r.poly_sup_error:.3e}  qnn {r.qnn_sup_error:.3e}")


if __name__ == "__main__":
    main()

"""Class counts against the Davenport constants, for SL2(Z)- and GL2(Z)-classes.

Also fits N(X) = C X + K X^(5/6) to expose the secondary term.
"""

import argparse
import math

import numpy as np

from cubic_shapes import enumeration as en
from cubic_shapes import lseries

CONSTANTS = {"+": math.pi**2 / 72, "-": math.pi**2 / 24}


def counts(recs, grid, sign):
    ok = (lambda d: d > 0) if sign == "+" else (lambda d: d < 0)
    return [sum(1 for r in recs if ok(r.disc) and abs(r.disc) <= X) for X in grid]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max", type=int, default=100_000)
    a = ap.parse_args()
    grid = [X for X in (1000, 3000, 10_000, 30_000, 100_000, 300_000) if X <= a.max]
    recs = en.enumerate_classes(max(grid))
    irr = [r for r in recs if r.irreducible]
    fused = en.gl2_classes(irr)
    for sign in "+-":
        c = CONSTANTS[sign]
        n_all, n_sl2, n_gl2 = counts(recs, grid, sign), counts(irr, grid, sign), counts(fused, grid, sign)
        print(f"\nsign {sign}: constant {c:.5f}")
        print(f"{'X':>8} {'all':>8} {'SL2 irr':>8} {'GL2 irr':>8} {'SL2/(cX)':>9} {'GL2/(cX)':>9}")
        for X, p, q, r in zip(grid, n_all, n_sl2, n_gl2):
            print(f"{X:>8} {p:>8} {q:>8} {r:>8} {q / (c * X):>9.3f} {r / (c * X):>9.3f}")
        e, se = lseries.fit_exponent(grid, n_all)
        print(f"exponent of all-class count: {e:.3f} +- {se:.3f}")
        A = np.column_stack([grid, np.power(grid, 5 / 6)])
        (C, K), *_ = np.linalg.lstsq(A, np.asarray(n_gl2, float), rcond=None)
        print(f"GL2 fit N = C X + K X^(5/6): C = {C:.4f} (vs {c:.4f}), K = {K:.3f}")


if __name__ == "__main__":
    main()

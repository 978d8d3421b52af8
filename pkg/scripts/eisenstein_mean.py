"""Invariant mean of E(z, .) with the constant term removed over the fundamental domain.

Equidistribution of shapes sends S(X)/N(X) to this mean, so a nonzero value
means the ratio tends to a constant rather than to zero.
"""

import argparse
import math

import numpy as np

from cubic_shapes import automorphic as aut


def mean_over_domain(z: complex, nx: int = 64, ny: int = 64, ymax: float = 12.0) -> complex:
    gx, wx = np.polynomial.legendre.leggauss(nx)
    xs, wxs = 0.5 * gx, 0.5 * wx  # x in [-1/2, 1/2]
    total = 0j
    for x, w in zip(xs, wxs):
        y0 = math.sqrt(1 - x * x)
        # substitute y = y0 / s so the measure dy / y^2 becomes ds / y0 on (0, 1]
        gs, ws = np.polynomial.legendre.leggauss(ny)
        s = 0.5 * (gs + 1) * (1 - y0 / ymax) + y0 / ymax
        ws = 0.5 * ws * (1 - y0 / ymax)
        ys = y0 / s
        vals = aut.eval_eisenstein_many(z, np.full(ny, x), ys, include_constant=False)
        total += w * np.sum(ws * vals) / y0
    return total * 3 / math.pi  # the domain has hyperbolic area pi / 3


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--z", default="2j")
    a = ap.parse_args()
    z = complex(a.z)
    for n in (32, 64, 96):
        m = mean_over_domain(z, n, n)
        print(f"nodes {n:>3}: mean = {m.real:+.6e} {m.imag:+.6e}i   |mean| = {abs(m):.4e}")


if __name__ == "__main__":
    main()

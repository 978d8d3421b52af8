"""Upper half-plane points and SL2(Z) reduction to the standard fundamental domain."""

from __future__ import annotations

import math
from dataclasses import dataclass

MAX_STEPS = 10_000
BOUNDARY_TOL = 1e-12


class ReductionLimitError(RuntimeError):
    """Fundamental-domain reduction did not terminate within the step guard."""


@dataclass(frozen=True)
class HalfPlanePoint:
    x: float
    y: float

    def __post_init__(self):
        if not self.y > 0:
            raise ValueError(f"y must be positive, got {self.y}")

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    def is_reduced(self, tol: float = BOUNDARY_TOL) -> bool:
        return abs(self.x) <= 0.5 + tol and self.x**2 + self.y**2 >= 1 - tol


def mobius(g, z: complex) -> complex:
    (p, q), (r, s) = g
    return (p * z + q) / (r * z + s)


def reduce_fundamental(z: HalfPlanePoint | complex, tol: float = BOUNDARY_TOL):
    """Return (reduced point, gamma) with mobius(gamma, z) the reduced point.

    The reduced point satisfies |x| <= 1/2 and |z| >= 1; boundary points are
    moved to the closed half with x <= 0 on the vertical sides and on the arc.
    """
    if isinstance(z, HalfPlanePoint):
        z = z.z
    if not z.imag > 0:
        raise ValueError("point must lie in the upper half-plane")
    p, q, r, s = 1, 0, 0, 1
    for _ in range(MAX_STEPS):
        n = math.floor(z.real + 0.5)
        if n:
            z -= n
            p, q = p - n * r, q - n * s
        if abs(z) ** 2 < 1 - tol:
            z = -1 / z
            p, q, r, s = -r, -s, p, q
            continue
        break
    else:
        raise ReductionLimitError(f"no convergence after {MAX_STEPS} steps")
    # boundary normalisation: right edge -> left edge, right half of arc -> left half
    if z.real > 0.5 - tol:
        z -= 1
        p, q = p - r, q - s
    if abs(abs(z) ** 2 - 1) <= tol and z.real > tol:
        z = -1 / z
        p, q, r, s = -r, -s, p, q
        if z.real > 0.5 - tol:
            z -= 1
            p, q = p - r, q - s
    if r < 0 or (r == 0 and s < 0):
        p, q, r, s = -p, -q, -r, -s
    return HalfPlanePoint(z.real, z.imag), ((p, q), (r, s))

"""Exact algebra of binary cubic forms a x^3 + b x^2 y + c x y^2 + d y^3.

Forms are plain 4-tuples. Integer forms stay integer under integer matrices;
anything containing a float is treated as a real form.

The group action is the left action

    act(g, f)(x, y) = f((x, y) g),

i.e. x -> g11 x + g21 y, y -> g12 x + g22 y.  With this convention the
listed order-3 stabilizer of (0, 1, -1, 0) fixes it and
act(g, act(h, f)) == act(g @ h, f).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Sequence, Union

Number = Union[int, float]
Form = tuple
Matrix = tuple  # ((p, q), (r, s))

INT64_MAX = 2**63 - 1
INT128_MAX = 2**127 - 1

IDENTITY = ((1, 0), (0, 1))
MINUS_IDENTITY = ((-1, 0), (0, -1))
S = ((0, -1), (1, 0))
T = ((1, 1), (0, 1))
T_INV = ((1, -1), (0, 1))

X_PLUS = (0, 1, -1, 0)
X_MINUS = (0, 1, 0, 1)
# stabilizer of X_PLUS inside SL2(Z)
X_PLUS_STABILIZER = (IDENTITY, ((0, 1), (-1, -1)), ((-1, -1), (1, 0)))


class FormOverflowError(OverflowError):
    """An integer result left the supported fixed-width range."""


class SingularMatrixError(ValueError):
    pass


class SingularFormError(ValueError):
    """Raised when an operation needs a nonzero discriminant."""


class NonSingularFormError(ValueError):
    """Raised when singular_classify receives a form with D != 0."""


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def is_integral(f: Sequence) -> bool:
    return all(_is_int(v) for v in f)


def _check64(values, what="coefficient"):
    for v in values:
        if _is_int(v) and not -INT64_MAX - 1 <= v <= INT64_MAX:
            raise FormOverflowError(f"{what} {v} does not fit in 64 bits")


def as_matrix(g) -> Matrix:
    """Accept ((p,q),(r,s)), a flat row-major 4-sequence or a numpy array."""
    if hasattr(g, "tolist"):
        g = g.tolist()
    if len(g) == 4:
        return ((g[0], g[1]), (g[2], g[3]))
    (p, q), (r, s) = g
    return ((p, q), (r, s))


def det(g) -> Number:
    (p, q), (r, s) = as_matrix(g)
    return p * s - q * r


def matmul(g, h) -> Matrix:
    (a, b), (c, d) = as_matrix(g)
    (e, f), (k, l) = as_matrix(h)
    return ((a * e + b * k, a * f + b * l), (c * e + d * k, c * f + d * l))


def inverse(g) -> Matrix:
    """Inverse; exact for integer matrices of determinant +-1."""
    (p, q), (r, s) = as_matrix(g)
    dt = p * s - q * r
    if dt == 0:
        raise SingularMatrixError("matrix is singular")
    if all(_is_int(v) for v in (p, q, r, s)) and dt in (1, -1):
        return ((s * dt, -q * dt), (-r * dt, p * dt))
    return ((s / dt, -q / dt), (-r / dt, p / dt))


def transpose(g) -> Matrix:
    (p, q), (r, s) = as_matrix(g)
    return ((p, r), (q, s))


def act(g, f: Sequence) -> Form:
    """Return act(g, f)(x, y) = f(p x + r y, q x + s y) for g = ((p,q),(r,s))."""
    (p, q), (r, s) = as_matrix(g)
    a, b, c, d = f
    # f(X, Y) with X = p x + r y, Y = q x + s y, expanded
    na = a * p**3 + b * p**2 * q + c * p * q**2 + d * q**3
    nb = (3 * a * p**2 * r + b * (p**2 * s + 2 * p * q * r)
          + c * (q**2 * r + 2 * p * q * s) + 3 * d * q**2 * s)
    nc = (3 * a * p * r**2 + b * (r**2 * q + 2 * p * r * s)
          + c * (p * s**2 + 2 * q * r * s) + 3 * d * q * s**2)
    nd = a * r**3 + b * r**2 * s + c * r * s**2 + d * s**3
    out = (na, nb, nc, nd)
    _check64(out)
    return out


def evaluate(f: Sequence, x, y):
    a, b, c, d = f
    return a * x**3 + b * x**2 * y + c * x * y**2 + d * y**3


def disc(f: Sequence) -> Number:
    """D = 18abcd - 4b^3 d + b^2 c^2 - 4ac^3 - 27a^2 d^2."""
    a, b, c, d = f
    D = 18 * a * b * c * d - 4 * b**3 * d + b * b * c * c - 4 * a * c**3 - 27 * a * a * d * d
    if _is_int(D) and abs(D) > INT128_MAX:
        raise FormOverflowError(f"discriminant of {tuple(f)} exceeds 128 bits")
    return D


def hessian(f: Sequence) -> tuple:
    """Quadratic covariant (P, Q, R) = (b^2-3ac, bc-9ad, c^2-3bd); Q^2-4PR = -3D."""
    a, b, c, d = f
    return (b * b - 3 * a * c, b * c - 9 * a * d, c * c - 3 * b * d)


def pairing(x: Sequence, y: Sequence) -> Fraction | float:
    """Alternating pairing x4 y1 - x3 y2 / 3 + x2 y3 / 3 - x1 y4.

    Exact Fraction for integer (or Fraction) input, float otherwise.
    """
    if all(isinstance(v, (int, Fraction)) for v in (*x, *y)):
        third = Fraction(1, 3)
    else:
        third = 1.0 / 3.0
    return x[3] * y[0] - third * x[2] * y[1] + third * x[1] * y[2] - x[0] * y[3]


_J = ((0, -1), (1, 0))
_J_INV = ((0, 1), (-1, 0))


def involution(g) -> Matrix:
    """g -> [[0,-1],[1,0]] (g^-1)^T [[0,1],[-1,0]], which equals g / det(g)."""
    if det(g) == 0:
        raise SingularMatrixError("involution needs an invertible matrix")
    return matmul(matmul(_J, transpose(inverse(g))), _J_INV)


def chi(g) -> Number:
    return det(g) ** 6


def in_dual_lattice(f: Sequence) -> bool:
    return f[1] % 3 == 0 and f[2] % 3 == 0


def is_irreducible(f: Sequence) -> bool:
    """True iff the integral form has no linear factor over Q."""
    if disc(f) == 0:
        raise SingularFormError("irreducibility is only decided for D != 0")
    a, b, c, d = f
    if a == 0 or d == 0:
        return False
    # rational root p/q of a t^3 + b t^2 + c t + d has p | d, q | a
    for q in _divisors(abs(a)):
        for p in _divisors(abs(d)):
            for sp in (p, -p):
                if gcd(sp, q) == 1 and a * sp**3 + b * sp**2 * q + c * sp * q * q + d * q**3 == 0:
                    return False
    return True


def _divisors(n: int) -> list:
    small, large = [], []
    k = 1
    while k * k <= n:
        if n % k == 0:
            small.append(k)
            if k * k != n:
                large.append(n // k)
        k += 1
    return small + large[::-1]


# --- singular forms -------------------------------------------------------


@dataclass(frozen=True)
class SingularClass:
    kind: str  # "zero" | "I" | "II" | "II_dual"
    m: int = 0
    n: int = 0

    def __post_init__(self):
        if self.kind == "zero":
            return
        if self.m < 1:
            raise ValueError("m must be positive")
        if self.kind == "II" and not 0 <= self.n < self.m:
            raise ValueError("TypeII needs 0 <= n < m")
        if self.kind == "II_dual" and not 0 <= self.n < 3 * self.m:
            raise ValueError("TypeIIDual needs 0 <= n < 3m")

    def representative(self) -> Form:
        if self.kind == "zero":
            return (0, 0, 0, 0)
        if self.kind == "I":
            return (0, 0, 0, self.m)
        if self.kind == "II":
            return (0, 0, self.m, self.n)
        return (0, 0, 3 * self.m, self.n)


def _poly_gcd(p: list, q: list) -> list:
    """Monic gcd of two polynomials (coefficients highest degree first) over Q."""
    def trim(u):
        i = 0
        while i < len(u) and u[i] == 0:
            i += 1
        return u[i:]

    p, q = trim([Fraction(v) for v in p]), trim([Fraction(v) for v in q])
    while q:
        r = p[:]
        while len(r) >= len(q) and r:
            k = r[0] / q[0]
            for i in range(len(q)):
                r[i] -= k * q[i]
            r = trim(r)
        p, q = q, r
    return [v / p[0] for v in p] if p else []


def repeated_root(f: Sequence) -> tuple:
    """Primitive integer vector (r, s) with f(r, s) = 0 at a multiple root."""
    a, b, c, d = f
    if a == 0 and b == 0:
        return (1, 0)
    if a == 0:
        # f = y (b x^2 + c x y + d y^2); double root of the quadratic
        g = _poly_gcd([b, c, d], [2 * b, c])
    else:
        g = _poly_gcd([a, b, c, d], [3 * a, 2 * b, c])
    if len(g) < 2:
        raise NonSingularFormError(f"{tuple(f)} has no repeated root")
    # gcd is (t - r) for a double root, (t - r)^2 for a triple root
    root = -g[1] if len(g) == 2 else -g[1] / 2
    r, s = root.numerator, root.denominator
    return (r, s)


def _complete(r: int, s: int) -> Matrix:
    """Unimodular matrix with first row (r, s), gcd(r, s) = 1."""
    g, u, w = _egcd(r, s)
    assert g == 1
    return ((r, s), (-w, u))


def _egcd(a: int, b: int) -> tuple:
    """(g, u, w) with a*u + b*w = g = gcd(a, b) >= 0."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        k = old_r // r
        old_r, r = r, old_r - k * r
        old_s, s = s, old_s - k * s
        old_t, t = t, old_t - k * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def singular_classify(f: Sequence, dual: bool = False) -> SingularClass:
    """Gamma-orbit invariants of an integral form of discriminant zero."""
    f = tuple(f)
    if not is_integral(f):
        raise TypeError("singular_classify needs an integral form")
    if disc(f) != 0:
        raise NonSingularFormError(f"{f} has nonzero discriminant")
    if dual and not in_dual_lattice(f):
        raise ValueError(f"{f} is not in the dual lattice")
    if f == (0, 0, 0, 0):
        return SingularClass("zero")
    r, s = repeated_root(f)
    gamma = _complete(r, s)
    g0 = act(gamma, f)
    assert g0[0] == 0 and g0[1] == 0, (f, gamma, g0)
    _, _, m, n = g0
    if m == 0:
        return SingularClass("I", abs(n))
    if m < 0:
        m, n = -m, -n
    if dual:
        assert m % 3 == 0
        return SingularClass("II_dual", m // 3, n % m)
    return SingularClass("II", m, n % m)


def singular_reduce(f: Sequence) -> tuple:
    """(representative, gamma) with act(gamma, f) equal to the class representative."""
    cls = singular_classify(f, dual=False)
    f = tuple(f)
    if cls.kind == "zero":
        return (0, 0, 0, 0), IDENTITY
    r, s = repeated_root(f)
    gamma = _complete(r, s)
    g0 = act(gamma, f)
    if g0[2] < 0 or (g0[2] == 0 and g0[3] < 0):
        gamma = matmul(MINUS_IDENTITY, gamma)
        g0 = act(gamma, f)
    m, n = g0[2], g0[3]
    if m:
        k = -(n // m)
        shift = ((1, 0), (k, 1))  # x -> x + k y adds k*m to the y^3 coefficient
        gamma = matmul(shift, gamma)
        g0 = act(gamma, f)
    return g0, gamma

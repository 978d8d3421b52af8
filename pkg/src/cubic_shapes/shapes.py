"""Shapes: the matrix g with act(g, x0) = f and the half-plane point of g^-1.

Base points x0+ = (0, 1, -1, 0) (roots 0, 1, oo) and x0- = 4^(-1/4) (0, 1, 0, 1)
(roots oo and +-i) both have |D| = 1.  Roots of act(g, x0) are the roots of
x0 moved by the Moebius map of (g^-1)^T, so g is read off from an
orientation-preserving Moebius map M carrying base roots to the roots of f:

* D > 0, roots t1 > t2 > t3 (oo counts as largest): M(oo, 1, 0) = (t1, t2, t3);
* D < 0, real root t and upper complex root w: M(oo, i) = (t, w).

Then g = c (M^-1)^T with the real scalar c fixed by the coefficients.  To make
the point independent of the representative, roots are always taken from the
canonical representative of the orbit; g for f itself is gamma^-1 g0.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

import numpy as np

from . import reduction
from .forms import (X_MINUS, X_PLUS, X_PLUS_STABILIZER, SingularFormError, act, as_matrix,
                    disc, inverse, matmul, transpose)
from .halfplane import HalfPlanePoint, reduce_fundamental

LAMBDA_PLUS = 1.0
LAMBDA_MINUS = 4 ** -0.25
BASE_PLUS = tuple(LAMBDA_PLUS * v for v in X_PLUS)
BASE_MINUS = tuple(LAMBDA_MINUS * v for v in X_MINUS)
RAW, AVERAGED = "raw", "stabilizer-averaged"


class ConventionError(RuntimeError):
    """The right-Gamma / Moebius correspondence self-test failed."""


@dataclass(frozen=True)
class IwasawaCoords:
    theta: float
    t: float
    u: float

    def matrix(self) -> np.ndarray:
        c, s = math.cos(2 * math.pi * self.theta), math.sin(2 * math.pi * self.theta)
        k = np.array([[c, s], [-s, c]])
        a = np.diag([self.t, 1 / self.t])
        n = np.array([[1.0, 0.0], [self.u, 1.0]])
        return k @ a @ n


@dataclass
class ShapeResult:
    form: tuple
    g: tuple
    point: HalfPlanePoint
    averaging_mode: str = RAW
    # reduced points of (g s)^-1 for s in the stabilizer of the base point
    orbit_points: list = field(default_factory=list)

    def points(self) -> list:
        return [self.point] if self.averaging_mode == RAW else self.orbit_points


def iwasawa(g, tol: float = 1e-10) -> IwasawaCoords:
    """g = k_theta a_t n_u with n_u lower triangular, for det g = 1."""
    (p, q), (r, s) = as_matrix(g)
    if abs(p * s - q * r - 1) > tol:
        raise ValueError("iwasawa needs a determinant-one matrix")
    w = q * q + s * s
    t = 1 / math.sqrt(w)
    u = (p * q + r * s) / w
    # k = g (a n)^-1, (a n)^-1 = [[1/t, 0], [-u/t, t]]
    k11 = (p - q * u) / t
    k12 = q * t
    theta = (math.atan2(k12, k11) / (2 * math.pi)) % 1.0
    return IwasawaCoords(theta, t, u)


def to_halfplane(g) -> HalfPlanePoint:
    """(x, y) = (u, t^2) of the determinant-one projection of g."""
    (p, q), (r, s) = as_matrix(g)
    dt = p * s - q * r
    if dt == 0:
        raise ValueError("singular matrix")
    if dt < 0:
        raise ValueError("only matrices with positive determinant are supported")
    sc = 1 / math.sqrt(dt)
    w = (q * q + s * s) * sc * sc
    return HalfPlanePoint((p * q + r * s) * sc * sc / w, 1 / w)


def _real_roots_desc(f, D) -> list:
    """The three roots x/y of f when D > 0, descending, with oo first when a = 0."""
    a, b, c, d = f
    if a == 0:
        r = np.roots([b, c, d]).real
        return [math.inf, *sorted(_polish((0, b, c, d), r), reverse=True)]
    r = np.roots([a, b, c, d]).real
    return sorted(_polish(f, r), reverse=True)


def _polish(f, roots):
    a, b, c, d = f
    out = []
    for z in roots:
        z = float(z)
        for _ in range(3):
            fz = ((a * z + b) * z + c) * z + d
            dz = (3 * a * z + 2 * b) * z + c
            if dz == 0:
                break
            z -= fz / dz
        out.append(z)
    return out


def _real_root(f) -> float:
    a, b, c, d = f
    if a == 0:
        return math.inf
    r = np.roots([a, b, c, d])
    return _polish(f, [r[np.argmin(np.abs(r.imag))].real])[0]


def moebius_from_roots(f, D) -> tuple:
    """Orientation-preserving real Moebius matrix carrying the base roots to the roots of f."""
    if D > 0:
        t1, t2, t3 = _real_roots_desc(f, D)
        if math.isinf(t1):
            return ((t2 - t3, t3), (0.0, 1.0))
        return ((t1 * (t2 - t3), t3 * (t1 - t2)), (t2 - t3, t1 - t2))
    w = reduction.complex_root(f)
    t = _real_root(f)
    if math.isinf(t):
        return ((w.imag, w.real), (0.0, 1.0))
    v = -1 / (w - t)
    pp, qq = v.imag, v.real
    return ((t * pp, t * qq - 1), (pp, qq))


def base_form(D) -> tuple:
    return BASE_PLUS if D > 0 else BASE_MINUS


def matrix_for(f) -> tuple:
    """g in G+ with act(g, x0_sgn) = f, built from the roots of f itself."""
    f = tuple(f)
    D = disc(f)
    if D == 0:
        raise SingularFormError(f"{f} has zero discriminant")
    M = moebius_from_roots(f, D)
    h = transpose(inverse(M))
    fh = act(h, base_form(D))
    i = max(range(4), key=lambda k: abs(f[k]))
    c = np.cbrt(f[i] / fh[i])
    g = tuple(tuple(float(c * v) for v in row) for row in h)
    return g


def _reduced_point(g) -> HalfPlanePoint:
    return reduce_fundamental(to_halfplane(inverse(g)))[0]


def shape(f, averaging_mode: str = RAW) -> ShapeResult:
    """Shape of f: g with act(g, x0) = f and the reduced point of g^-1."""
    f = tuple(int(v) for v in f)
    D = disc(f)
    if D == 0:
        raise SingularFormError(f"{f} has zero discriminant")
    canon, gamma = reduction.reduce(f)
    g0 = matrix_for(canon)
    g = matmul(inverse(gamma), g0)
    point = _reduced_point(g0)
    stab = X_PLUS_STABILIZER if D > 0 else X_PLUS_STABILIZER[:1]
    orbit = [point] + [_reduced_point(matmul(g0, s)) for s in stab[1:]]
    return ShapeResult(f, g, point, averaging_mode, orbit)


def reconstruction_error(res: ShapeResult) -> float:
    f = res.form
    got = act(res.g, base_form(disc(f)))
    scale = max(abs(v) for v in f)
    return max(abs(x - y) for x, y in zip(got, f)) / scale


# --- convention self-test ------------------------------------------------------


def check_convention(samples: int = 200, seed: int = 0, tol: float = 1e-8) -> int:
    """Verify that right multiplication by gamma in SL2(Z) does not move the reduced point.

    Raises ConventionError on the first mismatch; returns the number of samples checked.
    """
    rng = random.Random(seed)
    gens = [((0, -1), (1, 0)), ((1, 1), (0, 1)), ((1, -1), (0, 1))]
    for _ in range(samples):
        th, t, u = rng.random(), math.exp(rng.uniform(-1.5, 1.5)), rng.uniform(-2, 2)
        g = IwasawaCoords(th, t, u).matrix() * math.exp(rng.uniform(-1, 1))
        gm = tuple(tuple(float(v) for v in row) for row in g)
        gamma = ((1, 0), (0, 1))
        for _ in range(rng.randint(1, 6)):
            gamma = matmul(gamma, rng.choice(gens))
        z1 = reduce_fundamental(to_halfplane(gm))[0]
        z2 = reduce_fundamental(to_halfplane(matmul(gm, gamma)))[0]
        if abs(z1.x - z2.x) > tol or abs(z1.y - z2.y) > tol * max(1.0, z1.y):
            raise ConventionError(f"right multiplication by {gamma} moved {z1} to {z2}")
    return samples


def shapes_csv(results, digits: int = 12) -> str:
    lines = ["disc,a,b,c,d,x,y"]
    for r in results:
        a, b, c, d = r.form
        lines.append(f"{disc(r.form)},{a},{b},{c},{d},{r.point.x:.{digits}g},{r.point.y:.{digits}g}")
    return "\n".join(lines) + "\n"


# --- batch evaluation ------------------------------------------------------------


def reduce_points(xs: np.ndarray, ys: np.ndarray, tol: float = 1e-12) -> tuple:
    """Vectorised fundamental-domain reduction, same normalisation as reduce_fundamental."""
    x, y = np.array(xs, dtype=float), np.array(ys, dtype=float)
    for _ in range(1000):
        x = x - np.floor(x + 0.5)
        r2 = x * x + y * y
        inv = r2 < 1 - tol
        if not inv.any():
            break
        x = np.where(inv, -x / r2, x)
        y = np.where(inv, y / r2, y)
    else:
        raise RuntimeError("vectorised reduction did not settle")
    x = np.where(x > 0.5 - tol, x - 1, x)
    r2 = x * x + y * y
    arc = (np.abs(r2 - 1) <= tol) & (x > tol)
    x = np.where(arc, -x / r2, x)
    y = np.where(arc, y / r2, y)
    x = np.where(arc & (x > 0.5 - tol), x - 1, x)
    return x, y


def _batch_moebius(F: np.ndarray) -> np.ndarray:
    """Moebius matrices (n, 2, 2) as in moebius_from_roots, vectorised over forms."""
    from .enumeration import _companion_roots, disc_array

    a, b, c, d = (F[:, i] for i in range(4))
    D = disc_array(a, b, c, d)
    n = len(F)
    M = np.zeros((n, 2, 2))
    M[:, 1, 1] = 1.0
    pos, neg = D > 0, D < 0
    cub = a != 0
    # cubic part: roots from the companion matrix with Newton polishing
    roots = np.zeros((n, 3), dtype=complex)
    if cub.any():
        roots[cub] = _companion_roots(F[cub])
    # D > 0, a != 0
    sel = pos & cub
    if sel.any():
        r = np.sort(roots[sel].real, axis=1)[:, ::-1]
        t1, t2, t3 = r[:, 0], r[:, 1], r[:, 2]
        M[sel] = np.stack([np.stack([t1 * (t2 - t3), t3 * (t1 - t2)], -1),
                           np.stack([t2 - t3, t1 - t2], -1)], 1)
    # D > 0, a = 0: roots oo and those of b x^2 + c x y + d y^2
    sel = pos & ~cub
    if sel.any():
        bb, cc, dd = b[sel].astype(float), c[sel].astype(float), d[sel].astype(float)
        sq = np.sqrt(cc * cc - 4 * bb * dd)
        q1, q2 = (-cc + sq) / (2 * bb), (-cc - sq) / (2 * bb)
        t2, t3 = np.maximum(q1, q2), np.minimum(q1, q2)
        M[sel, 0, 0], M[sel, 0, 1] = t2 - t3, t3
    # D < 0, a != 0
    sel = neg & cub
    if sel.any():
        r = roots[sel]
        k = np.argmax(r.imag, axis=1)
        w = r[np.arange(len(r)), k]
        w = w.real + 1j * np.abs(w.imag)
        t = r[np.arange(len(r)), np.argmin(np.abs(r.imag), axis=1)].real
        v = -1 / (w - t)
        pp, qq = v.imag, v.real
        M[sel] = np.stack([np.stack([t * pp, t * qq - 1], -1), np.stack([pp, qq], -1)], 1)
    sel = neg & ~cub
    if sel.any():
        bb, cc, dd = b[sel].astype(float), c[sel].astype(float), d[sel].astype(float)
        M[sel, 0, 0] = np.sqrt(4 * bb * dd - cc * cc) / (2 * np.abs(bb))
        M[sel, 0, 1] = -cc / (2 * bb)
    return M


def _points_of(H: np.ndarray) -> tuple:
    """Half-plane point (u, t^2) of each matrix in H (n, 2, 2), det > 0."""
    p, q, r, s = H[:, 0, 0], H[:, 0, 1], H[:, 1, 0], H[:, 1, 1]
    dt = p * s - q * r
    w = q * q + s * s
    return (p * q + r * s) / w, dt / w


def batch_points(reps) -> dict:
    """Reduced points for canonical representatives.

    Returns {"raw": (x, y), "orbit": [(x, y)] * 3, "positive": mask}; for D < 0
    the orbit entries repeat the raw point.
    """
    F = np.asarray(reps, dtype=np.int64).reshape(-1, 4)
    M = _batch_moebius(F)
    H = np.transpose(M, (0, 2, 1))  # g^-1 is proportional to M^T
    from .enumeration import disc_array
    pos = disc_array(*(F[:, i] for i in range(4))) > 0
    raw = reduce_points(*_points_of(H))
    orbit = [raw]
    for s in X_PLUS_STABILIZER[1:]:
        si = np.array(inverse(s), dtype=float)
        Hs = np.einsum("ij,njk->nik", si, H)
        xs, ys = reduce_points(*_points_of(Hs))
        orbit.append((np.where(pos, xs, raw[0]), np.where(pos, ys, raw[1])))
    return {"raw": raw, "orbit": orbit, "positive": pos}

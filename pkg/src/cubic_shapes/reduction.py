"""Reduction theory for nonsingular integral binary cubic forms under SL2(Z).

Every form f with D(f) != 0 carries a covariant point z(f) in the upper
half-plane, the root (as x/y) of a positive definite quadratic:

* D > 0: the Hessian (b^2 - 3ac) x^2 + (bc - 9ad) xy + (c^2 - 3bd) y^2;
  membership of its root in the fundamental domain is decided exactly;
* D < 0: the complex root of f itself (the real root is split off, as in
  the Mathews/Belabas treatment), decided in floating point with a small
  fattening of the domain.

Roots of act(g, f) are the roots of f moved by the Moebius map of
(g^-1)^T, so z(act(g, f)) = (g^-1)^T . z(f).  A form is reduced when its
point lies in the closed fundamental domain; the canonical representative of
an orbit is the lexicographically least among the finitely many reduced forms
(and their negatives, since -I is in SL2(Z)).
"""

from __future__ import annotations

import cmath
import itertools
import math

import numpy as np

from .forms import (IDENTITY, MINUS_IDENTITY, S, T, T_INV, SingularFormError, act,
                    disc, hessian, inverse, matmul, transpose)
from .halfplane import mobius, reduce_fundamental

# fattening of the closed fundamental domain used for D < 0
FAT_EPS = 1e-8


def complex_root(f) -> complex:
    """Root with positive imaginary part of a form with D < 0 (as x/y)."""
    a, b, c, d = f
    if a == 0:
        # f = y (b x^2 + c x y + d y^2)
        sq = cmath.sqrt(c * c - 4 * b * d)
        z = (-c + sq) / (2 * b)
        return z if z.imag > 0 else z.conjugate()
    roots = np.roots([a, b, c, d])
    z = complex(roots[np.argmax(roots.imag)])
    # two Newton steps on the exact integer polynomial
    for _ in range(2):
        fz = ((a * z + b) * z + c) * z + d
        dz = (3 * a * z + 2 * b) * z + c
        if dz == 0:
            break
        z -= fz / dz
    return complex(z.real, abs(z.imag))


def hessian_root(f) -> complex:
    P, Q, R = hessian(f)
    return complex(-Q / (2 * P), math.sqrt(4 * P * R - Q * Q) / (2 * P))


def covariant_point(f) -> complex:
    D = disc(f)
    if D == 0:
        raise SingularFormError(f"{tuple(f)} has zero discriminant")
    return hessian_root(f) if D > 0 else complex_root(f)


def in_domain(f, D=None, fat: float = FAT_EPS) -> bool:
    """Is z(f) in the closed fundamental domain (fattened by ``fat`` when D < 0)?"""
    if D is None:
        D = disc(f)
    if D > 0:
        P, Q, R = hessian(f)
        return abs(Q) <= P <= R
    z = complex_root(f)
    return abs(z.real) <= 0.5 + fat and abs(z) ** 2 >= 1 - fat


def form_matrix(moebius) -> tuple:
    """Matrix gamma with z(act(gamma, f)) = moebius . z(f)."""
    return transpose(inverse(moebius))


def _words(max_len: int = 3) -> list:
    gens = (S, T, T_INV)
    out = {IDENTITY}
    for n in range(1, max_len + 1):
        for w in itertools.product(gens, repeat=n):
            m = IDENTITY
            for g in w:
                m = matmul(m, g)
            out.add(m)
    pairs = {}
    for m in out:
        fm = form_matrix(m)
        pairs[fm] = m
        pairs[matmul(MINUS_IDENTITY, fm)] = m
    return sorted(pairs.items())


# every gamma moving one point of the closed domain to another lies in here,
# stored with the Moebius map it induces on covariant points
CANDIDATES = _words(3)
CANDIDATE_MATRICES = [g for g, _ in CANDIDATES]
_INTERIOR_MARGIN = 1e-6


def _strictly_inside(z: complex) -> bool:
    return abs(z.real) < 0.5 - _INTERIOR_MARGIN and abs(z) ** 2 > 1 + _INTERIOR_MARGIN


def to_domain(f) -> tuple:
    """(f1, gamma) with act(gamma, f) = f1 and z(f1) in the (fat) domain."""
    f = tuple(f)
    D = disc(f)
    if D == 0:
        raise SingularFormError(f"{f} has zero discriminant")
    gamma = IDENTITY
    for _ in range(50):
        if in_domain(f, D):
            return f, gamma
        _, moeb = reduce_fundamental(covariant_point(f))
        step = form_matrix(moeb)
        f = act(step, f)
        gamma = matmul(step, gamma)
    raise RuntimeError(f"reduction of {f} did not settle")


def reduced_candidates(f1, D=None) -> dict:
    """All reduced forms in the orbit of the reduced form f1, mapped to a gamma from f1."""
    if D is None:
        D = disc(f1)
    z = covariant_point(f1)
    if _strictly_inside(z):
        return {f1: IDENTITY, act(MINUS_IDENTITY, f1): MINUS_IDENTITY}
    out = {}
    for g, moeb in CANDIDATES:
        w = mobius(moeb, z)
        if abs(w.real) > 0.5 + 1e-6 or abs(w) ** 2 < 1 - 1e-6:
            continue
        h = act(g, f1)
        if h not in out and in_domain(h, D):
            out[h] = g
    return out


def reduce(f) -> tuple:
    """Canonical representative of the SL2(Z)-orbit of f and gamma with act(gamma, f) = it."""
    f1, gamma = to_domain(f)
    cands = reduced_candidates(f1)
    canon = min(cands)
    return canon, matmul(cands[canon], gamma)


def canonical(f) -> tuple:
    return reduce(f)[0]


def stabilizer_order(f) -> int:
    """|{gamma in SL2(Z): act(gamma, f) = f}|, which is 1 or 3."""
    f1, _ = to_domain(f)
    if _strictly_inside(covariant_point(f1)):
        return 1
    # stabilizer elements fix z(f1), so they are among the candidate matrices
    return sum(1 for g in CANDIDATE_MATRICES if act(g, f1) == f1)


def stabilizer_bruteforce(f, bound: int = 6) -> int:
    """Count gamma with entries in [-bound, bound] fixing f (test oracle)."""
    f = tuple(f)
    n = 0
    rng = range(-bound, bound + 1)
    for p, q, r in itertools.product(rng, rng, rng):
        for s in rng:
            if p * s - q * r == 1 and act(((p, q), (r, s)), f) == f:
                n += 1
    return n


def gl2_canonical(f) -> tuple:
    """Canonical representative of the GL2(Z)-orbit (fusion of f with (a,-b,c,-d))."""
    a, b, c, d = f
    return min(canonical(f), canonical((a, -b, c, -d)))


def is_reduced(f) -> bool:
    return in_domain(tuple(f))

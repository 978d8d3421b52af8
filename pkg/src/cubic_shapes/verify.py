"""Desk-scale invariant suites, each returning a one-line verdict."""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass


from . import automorphic as aut
from . import enumeration as en
from . import forms, lseries, shapes, spectral
from .halfplane import HalfPlanePoint, mobius


@dataclass
class SuiteResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail} ({self.seconds:.1f}s)"


def random_form(rng, bound=50) -> tuple:
    return tuple(rng.randint(-bound, bound) for _ in range(4))


def random_gl2z(rng, bound=6) -> tuple:
    while True:
        g = ((rng.randint(-bound, bound), rng.randint(-bound, bound)),
             (rng.randint(-bound, bound), rng.randint(-bound, bound)))
        if forms.det(g) != 0:
            return g


def random_sl2z(rng, length=6) -> tuple:
    gens = [forms.S, forms.T, forms.T_INV]
    g = forms.IDENTITY
    for _ in range(rng.randint(1, length)):
        g = forms.matmul(g, rng.choice(gens))
    return g


def random_real_matrix(rng) -> tuple:
    while True:
        g = tuple(tuple(rng.uniform(-2, 2) for _ in range(2)) for _ in range(2))
        if abs(forms.det(g)) > 0.1:
            return g


def suite_disc_invariance(n: int, seed: int = 1, disc_fn=None) -> SuiteResult:
    """disc(act(g, f)) = det(g)^6 disc(f), exact over the integers."""
    disc_fn = disc_fn or forms.disc
    rng = random.Random(seed)
    bad = 0
    for _ in range(n):
        f, g = random_form(rng), random_gl2z(rng)
        if disc_fn(forms.act(g, f)) != forms.det(g) ** 6 * disc_fn(f):
            bad += 1
    return SuiteResult("discriminant relative invariance", bad == 0, f"{bad}/{n} violations")


def suite_pairing(n: int, seed: int = 2, tol: float = 1e-10) -> SuiteResult:
    rng = random.Random(seed)
    worst = 0.0
    for _ in range(n):
        x = tuple(rng.uniform(-3, 3) for _ in range(4))
        y = tuple(rng.uniform(-3, 3) for _ in range(4))
        g = random_real_matrix(rng)
        gx, gy = forms.act(g, x), forms.act(forms.involution(g), y)
        lhs, rhs = forms.pairing(gx, gy), forms.pairing(x, y)
        # floating-point scale of the left side: the pairing of absolute values
        scale = forms.pairing([abs(v) for v in gx], [abs(v) * (-1) ** k for k, v in enumerate(gy)])
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(scale)))
    return SuiteResult("pairing/involution identity", worst <= tol, f"max residual {worst:.2e}")


def suite_homomorphism(n: int, seed: int = 3) -> SuiteResult:
    rng = random.Random(seed)
    bad = 0
    for _ in range(n):
        f, g, h = random_form(rng), random_gl2z(rng, 4), random_gl2z(rng, 4)
        if forms.act(forms.matmul(g, h), f) != forms.act(g, forms.act(h, f)):
            bad += 1
    return SuiteResult("action homomorphism", bad == 0, f"{bad}/{n} violations")


def suite_oracle(X: int = 300) -> SuiteResult:
    ok = True
    sizes = []
    for dual in (False, True):
        a = en.enumerate_classes(X, dual=dual)
        b = en.brute_force_classes(X, dual=dual)
        ok &= sorted(a) == sorted(b)
        sizes.append(len(a))
    return SuiteResult("oracle equivalence", ok, f"X={X}, classes L={sizes[0]} Lhat={sizes[1]}")


def suite_determinism(X: int = 3000) -> SuiteResult:
    outs = [en.records_to_csv(en.enumerate_classes(X, shards=k)) for k in (1, 2, 8)]
    same = outs[0] == outs[1] == outs[2]
    table = lseries.ShapeTable(en.records_from_csv(outs[0]), X, assume_canonical=True)
    psi = lseries.SmoothCutoff()
    phi = aut.Eisenstein(2j, False)
    vals = []
    for k in (1, 2, 8):
        t = lseries.ShapeTable(en.enumerate_classes(X, shards=k), X, assume_canonical=True)
        vals.append(lseries.weyl_sum(X / psi.beta, phi, psi, -1, t))
    same_w = vals[0] == vals[1] == vals[2]
    del table
    return SuiteResult("sharding determinism", same and same_w, f"X={X}, CSV identical={same}, Weyl identical={same_w}")


def suite_bessel() -> SuiteResult:
    worst = 0.0
    for x in (0.1, 1.0, 10.0, 50.0):
        exact = math.sqrt(math.pi / (2 * x)) * math.exp(-x)
        worst = max(worst, abs(aut.bessel_k(0.5, x) / exact - 1))
    return SuiteResult("K_1/2 closed form", worst <= 1e-12, f"max rel error {worst:.2e}")


def suite_xi(tol: float = 1e-10) -> SuiteResult:
    worst = 0.0
    for k in range(20):
        z = complex(-1.5 + 0.2 * k, -8 + 0.85 * k)
        if z in (0, 1):
            continue
        a, b = aut.xi(z), aut.xi(1 - z)
        worst = max(worst, abs(a - b) / abs(a))
    return SuiteResult("xi functional equation", worst <= tol, f"max rel residual {worst:.2e} on 20 points")


def suite_eisenstein(points: int = 10, seed: int = 4) -> SuiteResult:
    rng = random.Random(seed)
    worst_ls = 0.0
    for _ in range(points):
        x = rng.uniform(-0.5, 0.5)
        y = rng.uniform(math.sqrt(max(0.0, 1 - x * x)), 3.0)
        z = complex(2, rng.uniform(-5, 5))
        p = HalfPlanePoint(x, y)
        a, b = aut.eisenstein_lattice_sum(z, p), aut.eval_eisenstein(z, p)
        worst_ls = max(worst_ls, abs(a - b) / abs(b))
    worst_fe = 0.0
    for z, (x, y) in [(1.7, (0.2, 1.5)), (0.5j + 2, (0.0, 1.0)), (3j, (-0.3, 1.2)), (1.3 + 1j, (0.45, 0.95)), (2.5, (0.1, 2.0))]:
        p = HalfPlanePoint(x, y)
        z = complex(z)
        lhs = aut.xi(z + 1) * aut.eval_eisenstein(z, p)
        rhs = aut.xi(1 - z) * aut.eval_eisenstein(-z, p)
        worst_fe = max(worst_fe, abs(lhs - rhs) / abs(lhs))
    ok = worst_ls <= 1e-6 and worst_fe <= 1e-8
    return SuiteResult("Eisenstein dual definition + functional equation", ok,
                       f"lattice vs Fourier {worst_ls:.2e}, functional equation {worst_fe:.2e}")


def suite_gamma_invariance(n: int, seed: int = 5, maass=None, tol: float = 1e-8) -> SuiteResult:
    """Test functions at g and g*gamma, and Eisenstein automorphy at unreduced points."""
    rng = random.Random(seed)
    maass = maass or spectral.synthetic_maass(60, seed)
    phis = [aut.Constant(), aut.Eisenstein(2j, False), aut.Eisenstein(2 + 1j, True), aut.Maass(maass)]
    worst = 0.0
    for _ in range(n):
        g = random_real_matrix(rng)
        if forms.det(g) < 0:
            g = ((-g[0][0], -g[0][1]), g[1])
        gg = forms.matmul(g, random_sl2z(rng))
        for phi in phis:
            a, b = aut.eval_testfunction(phi, g), aut.eval_testfunction(phi, gg)
            worst = max(worst, abs(a - b) / max(1.0, abs(a)))
    # genuine automorphy of the Eisenstein series, without reduction
    worst_auto = 0.0
    for _ in range(max(10, n // 20)):
        x, y = rng.uniform(-0.5, 0.5), rng.uniform(0.9, 2.0)
        w = mobius(random_sl2z(rng, 3), complex(x, y))
        if w.imag < 0.25:
            continue
        a = aut.eval_eisenstein(2 + 1j, HalfPlanePoint(x, y))
        b = aut.eval_eisenstein(2 + 1j, HalfPlanePoint(w.real, w.imag))
        worst_auto = max(worst_auto, abs(a - b) / abs(a))
    ok = worst <= tol and worst_auto <= tol
    return SuiteResult("Gamma-invariance of test functions", ok,
                       f"reduction route {worst:.2e}, Eisenstein automorphy {worst_auto:.2e}")


def suite_shape_invariance(n: int, seed: int = 6, X: int = 2000, tol: float = 1e-8) -> SuiteResult:
    rng = random.Random(seed)
    recs = en.enumerate_classes(X)
    worst = 0.0
    for _ in range(n):
        f = rng.choice(recs).rep
        p1 = shapes.shape(f).point
        p2 = shapes.shape(forms.act(random_sl2z(rng, 10), f)).point
        worst = max(worst, abs(p1.x - p2.x), abs(p1.y - p2.y))
    return SuiteResult("shape-point Gamma-invariance", worst <= tol, f"max deviation {worst:.2e} over {n} samples")


def suite_singular(n: int, seed: int = 7) -> SuiteResult:
    rng = random.Random(seed)
    bad = 0
    kinds = {"I": 0, "II": 0, "II_dual": 0}
    for _ in range(n):
        kind = rng.choice(list(kinds))
        m = rng.randint(1, 30)
        if kind == "I":
            base = forms.SingularClass("I", m)
        elif kind == "II":
            base = forms.SingularClass("II", m, rng.randrange(m))
        else:
            base = forms.SingularClass("II_dual", m, rng.randrange(3 * m))
        f = forms.act(random_sl2z(rng, 8), base.representative())
        got = forms.singular_classify(f, dual=(kind == "II_dual"))
        kinds[kind] += 1
        bad += got != base
    return SuiteResult("singular classifier round trip", bad == 0, f"{bad}/{n} mismatches, coverage {kinds}")


def suite_hecke(N: int = 500) -> SuiteResult:
    data = spectral.synthetic_maass(N, 11)
    v = aut.hecke_check(data)
    parsed = spectral.parse_coefficient_file(spectral.serialize(data))
    v2 = aut.hecke_check(parsed)
    return SuiteResult("Hecke relations (synthetic)", v == 0 and v2 == 0, f"violation {v} / after round trip {v2}")


def suite_weyl_two_route(X: int = 4000) -> SuiteResult:
    psi = lseries.SmoothCutoff()
    recs = en.enumerate_classes(int(psi.beta * X))
    table = lseries.ShapeTable(recs, int(psi.beta * X), assume_canonical=True)
    cn = en.class_numbers(recs)
    worst = 0.0
    for sign in (1, -1):
        a = lseries.weyl_sum(X, aut.Constant(), psi, sign, table)
        b = lseries.smoothed_count(X, psi, sign, cn)
        worst = max(worst, abs(a - b) / abs(b))
    return SuiteResult("Weyl sum two-route identity", worst <= 1e-10, f"max rel difference {worst:.2e}")


def suite_convention(samples: int = 500) -> SuiteResult:
    try:
        n = shapes.check_convention(samples)
        return SuiteResult("half-plane convention self-test", True, f"{n} samples, right-Gamma = Moebius")
    except shapes.ConventionError as e:
        return SuiteResult("half-plane convention self-test", False, str(e))


def run_suites(quick: bool = True, convention_only: bool = False, echo=print) -> list:
    n = 10_000 if quick else 100_000
    plan = [lambda: suite_convention()]
    if not convention_only:
        plan += [
            lambda: suite_disc_invariance(n),
            lambda: suite_pairing(n),
            lambda: suite_homomorphism(n),
            lambda: suite_oracle(300),
            lambda: suite_determinism(3000 if quick else 20000),
            suite_bessel,
            suite_xi,
            lambda: suite_eisenstein(),
            lambda: suite_gamma_invariance(200 if quick else 1000),
            lambda: suite_shape_invariance(200 if quick else 1000),
            lambda: suite_singular(2000 if quick else 10_000),
            suite_hecke,
            suite_weyl_two_route,
        ]
    out = []
    for job in plan:
        t0 = time.perf_counter()
        try:
            res = job()
        except Exception as e:  # a crashing suite is a failing suite
            res = SuiteResult(getattr(job, "__name__", "suite"), False, f"error: {e!r}")
        res.seconds = time.perf_counter() - t0
        if echo:
            echo(res.line())
        out.append(res)
    return out

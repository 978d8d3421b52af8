"""Automorphic weights on G+ = GL2(R)^+: Maass cusp forms and Eisenstein series.

Functions on K\\G/Gamma are evaluated through the half-plane point
(x, y) = (u, t^2) of the Iwasawa decomposition g = k_theta a_t n_u.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Union

import mpmath
import numpy as np

from .halfplane import HalfPlanePoint, reduce_fundamental

BESSEL_X_MAX = 700.0
BESSEL_MU_MAX = 100.0
SQRT3_2 = math.sqrt(3) / 2


class TruncationError(ValueError):
    """The coefficient table is too short for the requested accuracy."""

    def __init__(self, msg, required: int):
        super().__init__(msg)
        self.required = required


# --- K-Bessel ---------------------------------------------------------------


def _kernel_sum(nu, x: np.ndarray, h: float, W: float, cells: int = 1 << 22) -> tuple:
    """Trapezoid sum and the matching sum of |integrand| (the attainable error scale)."""
    w = np.arange(0.0, W + h / 2, h)
    wt = np.full(len(w), h)
    wt[0] = h / 2
    weights = wt * np.cosh(nu * w)
    shifted = np.cosh(w) - 1.0
    out = np.empty(len(x), dtype=weights.dtype)
    mag = np.empty(len(x))
    chunk = max(1, cells // len(w))
    # e^{-x (cosh w - 1)}: the e^{-x} factor is restored by the caller
    for i in range(0, len(x), chunk):
        E = np.exp(-np.outer(x[i:i + chunk], shifted))
        out[i:i + chunk] = E @ weights
        mag[i:i + chunk] = E @ np.abs(weights)
    return out, mag


def _shifted_sum(mu: float, x: np.ndarray, h: float, W: float, alpha: float,
                 cells: int = 1 << 22) -> tuple:
    """K_{i mu}(x) = 1/2 int_R exp(-x cosh w + i mu w) dw along w = t + i alpha.

    With alpha near pi/2 the integrand is about as small as K itself, which
    avoids the catastrophic cancellation of the real-axis integral for x < mu.
    """
    t = np.arange(-W, W + h / 2, h)
    w = t + 1j * alpha
    ch = np.cosh(w)
    phase = np.exp(1j * mu * w) * (h / 2)
    out = np.empty(len(x), dtype=complex)
    mag = np.empty(len(x))
    chunk = max(1, cells // len(t))
    for i in range(0, len(x), chunk):
        E = np.exp(-np.outer(x[i:i + chunk], ch))
        out[i:i + chunk] = E @ phase
        mag[i:i + chunk] = np.abs(E) @ np.abs(phase)
    return out, mag


def _refine(kernel, h: float, tol: float):
    prev, _ = kernel(h)
    for _ in range(12):
        h /= 2
        cur, mag = kernel(h)
        err = np.abs(cur - prev)
        # relative accuracy is capped by cancellation inside the integrand
        if np.all(err <= tol * np.maximum(np.abs(cur), mag) + 1e-300):
            break
        prev = cur
    return cur


def _k_imaginary_small_x(mu: float, xs: np.ndarray, tol: float) -> np.ndarray:
    mu = abs(mu)
    delta = min(math.pi / 2, 4.0 / mu)
    alpha = math.pi / 2 - delta
    # Re(x cosh w) = x cosh t sin(delta) must reach ~ 40 + mu alpha beyond the peak
    lo = float(xs.min())
    W = math.acosh(max(1.0, (40.0 + lo) / (lo * math.sin(delta))))
    h = min(0.25, 1.0 / (1.0 + mu + float(xs.max()) * math.cosh(W)))
    h = max(h, 1e-4)
    return np.real(_refine(lambda hh: _shifted_sum(mu, xs, hh, W, alpha), h, tol))


def bessel_k(nu, x, tol: float = 1e-14):
    """K_nu(x) = int_0^oo exp(-x cosh w) cosh(nu w) dw for complex order nu, x > 0.

    Trapezoid rule on a truncated range with step halving until successive
    refinements agree.  Purely imaginary orders with x < |nu| go along a
    shifted contour instead.  Accepts scalar or array x; returns complex
    values when nu is complex.  Values with x > 700 underflow to exact 0.
    """
    scalar = np.ndim(x) == 0
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xs <= 0):
        raise ValueError("bessel_k needs x > 0")
    nu = complex(nu)
    if nu.imag == 0:
        nu = nu.real
    out = np.zeros(len(xs), dtype=complex if isinstance(nu, complex) else float)
    live = xs <= BESSEL_X_MAX
    contour = np.zeros(len(xs), dtype=bool)
    if isinstance(nu, complex) and nu.real == 0 and abs(nu.imag) > 4:
        contour = live & (xs < abs(nu.imag))
        if contour.any():
            out[contour] = _k_imaginary_small_x(nu.imag, xs[contour], tol)
    live &= ~contour
    if live.any():
        xl = xs[live]
        # truncate where x (cosh w - 1) - |Re nu| w exceeds ~ 60
        lo = float(xl.min())
        rn = abs(nu.real) if isinstance(nu, complex) else abs(nu)
        W = 1.0
        while lo * (math.cosh(W) - 1.0) - rn * W < 60.0:
            W += 0.25
        h = min(0.25, 1.0 / (1.0 + abs(nu)))
        out[live] = _refine(lambda hh: _kernel_sum(nu, xl, hh, W), h, tol) * np.exp(-xl)
    return out[0] if scalar else out


def bessel_k_imag(mu: float, x: float, with_flag: bool = False):
    """K_{i mu}(x) for real mu, |mu| <= 100 and 0 < x; x > 700 gives 0 and sets the flag."""
    if not (isinstance(mu, (int, float)) and abs(mu) <= BESSEL_MU_MAX):
        raise ValueError(f"|mu| must be <= {BESSEL_MU_MAX}")
    if not x > 0:
        raise ValueError("x must be positive")
    underflow = x > BESSEL_X_MAX
    v = 0.0 if underflow else float(np.real(bessel_k(complex(0, abs(mu)), x)))
    return (v, underflow) if with_flag else v


# --- completed zeta -----------------------------------------------------------


def xi(z) -> complex:
    """xi(z) = pi^(-z/2) Gamma(z/2) zeta(z)."""
    z = complex(z)
    if z in (0, 1):
        raise ValueError("xi has poles at 0 and 1")
    if abs(z.imag) > 200:
        raise ValueError("|Im z| must be <= 200")
    if z.imag == 0 and z.real < 0 and z.real % 2 == 0:
        # Gamma pole against a trivial zeta zero: removable, use the symmetric value
        return xi(1 - z)
    with mpmath.workdps(30):
        zz = mpmath.mpc(z.real, z.imag)
        v = mpmath.power(mpmath.pi, -zz / 2) * mpmath.gamma(zz / 2) * mpmath.zeta(zz)
    return complex(v)


@lru_cache(maxsize=256)
def _xi_cached(z: complex) -> complex:
    return xi(z)


# --- data types ---------------------------------------------------------------


@dataclass
class MaassFormData:
    t_phi: float
    parity: str
    coeffs: dict
    stated_precision: float = 1e-12
    label: str = ""

    def __post_init__(self):
        if not self.t_phi > 0:
            raise ValueError("t_phi must be positive")
        if self.parity not in ("even", "odd"):
            raise ValueError("parity must be 'even' or 'odd'")
        if abs(self.coeffs.get(1, 0.0) - 1.0) > 1e-12:
            raise ValueError("coefficients must be Hecke-normalised with rho(1) = 1")
        self._arr = np.array([self.coeffs.get(n, 0.0) for n in range(1, self.N + 1)], dtype=float)

    @property
    def N(self) -> int:
        return max(self.coeffs) if self.coeffs else 0

    @property
    def eigenvalue(self) -> float:
        return 0.25 + self.t_phi**2

    def screen(self) -> list:
        """Indices violating |rho(n)| <= 2 n^(7/64 + 0.01)."""
        e = 7 / 64 + 0.01
        return [n for n, v in self.coeffs.items() if abs(v) > 2 * n**e]


@dataclass(frozen=True)
class Constant:
    pass


@dataclass(frozen=True)
class Maass:
    data: MaassFormData = field(compare=False)


@dataclass(frozen=True)
class Eisenstein:
    z: complex
    constant_term_included: bool = True

    def __post_init__(self):
        z = complex(self.z)
        if z == 0:
            raise ValueError("Eisenstein parameter must be nonzero")
        if not (z.real == 0 or z.real > 1):
            raise ValueError("Eisenstein parameter must satisfy Re z = 0 or Re z > 1")


TestFunction = Union[Constant, Maass, Eisenstein]


# --- Maass forms ----------------------------------------------------------------


def _k0_bound_tail(n0: int, y: float, growth: float = 0.12) -> float:
    """Bound on sum_{n > n0} 2 n^growth K_0(2 pi n y) using K_0(x) <= sqrt(pi/2x) e^-x."""
    total, n = 0.0, n0 + 1
    while True:
        x = 2 * math.pi * n * y
        term = 2 * n**growth * math.sqrt(math.pi / (2 * x)) * math.exp(-x)
        total += term
        if term < 1e-18 * max(total, 1e-300) or x > 745:
            break
        n += 1
    return total


def maass_terms_needed(y: float, target: float = 1e-10) -> int:
    n = 1
    while 2 * math.sqrt(y) * _k0_bound_tail(n, y) > target:
        n += 1
    return n


def eval_maass(data: MaassFormData, point: HalfPlanePoint, target: float = 1e-10,
               n_terms: int | None = None) -> tuple:
    """(value, tail_bound) of 2 sqrt(y) sum rho(n) K_{i t}(2 pi n y) cs(2 pi n x)."""
    x, y = point.x, point.y
    need = maass_terms_needed(y, target)
    n = need if n_terms is None else n_terms
    if n > data.N:
        raise TruncationError(f"need {n} coefficients at y={y:.4g}, have {data.N}", n)
    ns = np.arange(1, n + 1)
    k = np.real(bessel_k(complex(0, data.t_phi), 2 * math.pi * ns * y))
    trig = np.cos(2 * math.pi * ns * x) if data.parity == "even" else np.sin(2 * math.pi * ns * x)
    val = 2 * math.sqrt(y) * math.fsum(data._arr[:n] * k * trig)
    return val, 2 * math.sqrt(y) * _k0_bound_tail(n, y)


def eval_maass_many(data: MaassFormData, xs: np.ndarray, ys: np.ndarray, target: float = 1e-10) -> np.ndarray:
    """Vectorised eval_maass over reduced points."""
    xs, ys = np.asarray(xs, float), np.asarray(ys, float)
    n = maass_terms_needed(float(ys.min()), target)
    if n > data.N:
        raise TruncationError(f"need {n} coefficients, have {data.N}", n)
    out = np.zeros(len(xs))
    for m in range(1, n + 1):
        k = np.real(bessel_k(complex(0, data.t_phi), 2 * math.pi * m * ys))
        trig = np.cos(2 * math.pi * m * xs) if data.parity == "even" else np.sin(2 * math.pi * m * xs)
        out += data._arr[m - 1] * k * trig
    return 2 * np.sqrt(ys) * out


# --- Eisenstein series ----------------------------------------------------------


def eta(nu: complex, m: int) -> complex:
    """sum over ab = m of (a/b)^nu, by divisor enumeration."""
    total = 0j
    a = 1
    while a * a <= m:
        if m % a == 0:
            b = m // a
            total += (a / b) ** nu
            if a != b:
                total += (b / a) ** nu
        a += 1
    return total


def eisenstein_terms_needed(z: complex, y: float, target: float = 1e-13) -> int:
    """Number of Fourier terms so that the crude tail bound is below target."""
    r = abs(complex(z).real) / 2
    m = 1
    while True:
        x = 2 * math.pi * m * y
        # |eta| <= d(m) m^r <= 2 sqrt(m) m^r; |K_nu(x)| <= K_r(x) <= sqrt(pi/2x) e^-x (1 + r^2/x) for r small
        bound = 2 * math.sqrt(m) * m**r * math.sqrt(math.pi / (2 * x)) * math.exp(-x) * (1 + (r * r + 1) / x) * 4
        if bound < target and x > 1 + r * r:
            return m
        m += 1


def eval_eisenstein_many(z, xs, ys, include_constant: bool = True, target: float = 1e-13) -> np.ndarray:
    """Fourier evaluation of E(z, .) at many points (any y > 0; cost grows like 1/y)."""
    z = complex(z)
    if z == 0:
        raise ValueError("z = 0 is not allowed")
    xs, ys = np.asarray(xs, float), np.asarray(ys, float)
    t = np.sqrt(ys)
    xi1 = _xi_cached(z + 1)
    nu = z / 2
    M = eisenstein_terms_needed(z, float(ys.min()), target)
    acc = np.zeros(len(xs), dtype=complex)
    for m in range(1, M + 1):
        acc += eta(nu, m) * bessel_k(nu, 2 * math.pi * m * ys) * np.cos(2 * math.pi * m * xs)
    val = 4 * t / xi1 * acc
    if include_constant:
        val = val + t ** (z + 1) + t ** (1 - z) * _xi_cached(z) / xi1
    return val


def eval_eisenstein(z, point: HalfPlanePoint, include_constant: bool = True) -> complex:
    return complex(eval_eisenstein_many(z, [point.x], [point.y], include_constant)[0])


def eisenstein_constant_term(z, y: float) -> complex:
    z = complex(z)
    t = math.sqrt(y)
    return t ** (z + 1) + t ** (1 - z) * _xi_cached(z) / _xi_cached(z + 1)


def eisenstein_lattice_sum(z, point: HalfPlanePoint, d_direct: int = 200, terms: int = 8) -> complex:
    """E(z, .) from its definition as a sum over Gamma_oo \\ Gamma, for Re z > 1.

    With s = (z + 1)/2,  2 zeta(2s) E = sum_{(c,d) != 0} y^s / |c tau + d|^{2s}.
    Rows 1 <= c <= C0 are summed directly in d with the tails expanded
    binomially into Hurwitz zeta values; rows c > C0 are replaced by their
    mean value (the neglected oscillation is O(exp(-2 pi C0 y))).  The direct
    range is kept long so that only a few binomial terms are needed; mpmath's
    Hurwitz zeta loses relative accuracy once its value drops far below the
    working precision.
    """
    z = complex(z)
    if not z.real > 1:
        raise ValueError("lattice sum needs Re z > 1")
    x, y = point.x, point.y
    with mpmath.workdps(30):
        s = mpmath.mpc(z.real + 1, z.imag) / 2
        ys = mpmath.mpf(y)
        C0 = max(4, math.ceil(40 / (2 * math.pi * y)))
        total = 2 * mpmath.zeta(2 * s) * ys**s  # c = 0
        row_sum = mpmath.mpf(0)
        for c in range(1, C0 + 1):
            A2 = (c * ys) ** 2
            alpha = mpmath.mpf(c * x)
            D = max(d_direct, int(20 * c * y) + 10)
            acc = mpmath.mpf(0)
            for d in range(-D, D + 1):
                acc += ((d + alpha) ** 2 + A2) ** (-s)
            # tails d > D and d < -D: sum_k binom(-s, k) A^2k zeta(2s + 2k, D + 1 +- alpha)
            for sign in (1, -1):
                a0 = D + 1 + sign * alpha
                for k in range(terms):
                    acc += mpmath.binomial(-s, k) * A2**k * mpmath.zeta(2 * s + 2 * k, a0)
            row_sum += acc
        main = mpmath.sqrt(mpmath.pi) * mpmath.gamma(s - 0.5) / mpmath.gamma(s)
        tail = main * ys ** (1 - 2 * s) * (mpmath.zeta(2 * s - 1) - sum(mpmath.mpf(c) ** (1 - 2 * s) for c in range(1, C0 + 1)))
        total += 2 * ys**s * (row_sum + tail)
        val = total / (2 * mpmath.zeta(2 * s))
    return complex(val)


# --- Hecke relations ------------------------------------------------------------


def hecke_check(data: MaassFormData) -> float:
    """max over mn <= N of |rho(m) rho(n) - sum_{d | gcd(m,n)} rho(mn/d^2)|."""
    rho = data.coeffs
    N = data.N
    worst = 0.0
    for m in range(1, N + 1):
        for n in range(m, N // m + 1):
            g = math.gcd(m, n)
            rhs = math.fsum(rho.get(m * n // (d * d), 0.0) for d in range(1, g + 1) if g % d == 0)
            worst = max(worst, abs(rho.get(m, 0.0) * rho.get(n, 0.0) - rhs))
    return worst


# --- dispatch -------------------------------------------------------------------


def reduced_point_of(g) -> HalfPlanePoint:
    from .shapes import to_halfplane
    return reduce_fundamental(to_halfplane(g))[0]


def eval_at_point(phi, point: HalfPlanePoint):
    if isinstance(phi, Constant):
        return 1.0
    if isinstance(phi, Maass):
        return eval_maass(phi.data, point)[0]
    if isinstance(phi, Eisenstein):
        return eval_eisenstein(phi.z, point, phi.constant_term_included)
    raise TypeError(f"unknown test function {phi!r}")


def eval_many(phi, xs, ys) -> np.ndarray:
    xs = np.asarray(xs, float)
    if isinstance(phi, Constant):
        return np.ones(len(xs))
    if isinstance(phi, Maass):
        return eval_maass_many(phi.data, xs, ys)
    if isinstance(phi, Eisenstein):
        return eval_eisenstein_many(phi.z, xs, ys, phi.constant_term_included)
    raise TypeError(f"unknown test function {phi!r}")


def eval_testfunction(phi, g):
    """phi(g) for det g > 0: scalars are projected away and the point reduced first."""
    (p, q), (r, s) = g
    if not p * s - q * r > 0:
        raise ValueError("test functions are evaluated on matrices with positive determinant")
    if isinstance(phi, Constant):
        return 1.0
    return eval_at_point(phi, reduced_point_of(g))

"""Twisted class numbers a_phi(m), smoothed Weyl sums and truncated Dirichlet series.

All sums go through math.fsum, which is correctly rounded and therefore
independent of summation order, shard layout and thread count.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import automorphic as aut
from . import reduction
from .enumeration import _band, records_to_csv
from .shapes import AVERAGED, RAW, batch_points

SIGNS = {"+": 1, "-": -1}


class EnumerationShortfall(ValueError):
    """The class table does not reach the discriminant range a sum needs."""

    def __init__(self, msg, required: int):
        super().__init__(msg)
        self.required = required


def _ramp(t):
    """Smooth monotone step: 0 for t <= 0, 1 for t >= 1."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(t > 0, np.exp(-1 / np.where(t > 0, t, 1)), 0.0)
        b = np.where(t < 1, np.exp(-1 / np.where(t < 1, 1 - t, 1)), 0.0)
    return a / (a + b)


@dataclass(frozen=True)
class SmoothCutoff:
    alpha: float = 0.5
    alpha_p: float = 0.75
    beta_p: float = 1.0
    beta: float = 1.25

    def __post_init__(self):
        if not 0 < self.alpha < self.alpha_p < self.beta_p < self.beta:
            raise ValueError("need 0 < alpha < alpha' < beta' < beta")

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        left = _ramp((u - self.alpha) / (self.alpha_p - self.alpha))
        right = _ramp((self.beta - u) / (self.beta - self.beta_p))
        return np.where(u <= self.beta_p, left, right) * ((u > self.alpha) & (u < self.beta))


def fsum_complex(values) -> complex:
    v = np.asarray(values)
    if np.iscomplexobj(v):
        return complex(math.fsum(v.real.tolist()), math.fsum(v.imag.tolist()))
    return math.fsum(v.tolist())


def describe_phi(phi) -> str:
    if isinstance(phi, aut.Constant):
        return "const"
    if isinstance(phi, aut.Eisenstein):
        z = complex(phi.z)
        tag = "" if phi.constant_term_included else ",no-constant"
        return f"eisenstein:{z.real:g}{z.imag:+g}j{tag}"
    if isinstance(phi, aut.Maass):
        return f"maass:{phi.data.label or 't=%r' % phi.data.t_phi}"
    return repr(phi)


class ShapeTable:
    """Class records with their shape points, ready for repeated phi evaluation."""

    def __init__(self, records, max_disc: int, lattice: str = "L", assume_canonical: bool = False):
        records = list(records)
        if not assume_canonical:
            # raw-mode points for D > 0 depend on the representative, so pin it down
            records = [replace(r, rep=reduction.canonical(r.rep)) for r in records]
        self.records = records
        self.max_disc = max_disc
        self.lattice = lattice
        self.disc = np.array([r.disc for r in self.records], dtype=np.int64)
        self.weight = np.array([1.0 / r.stabilizer_order for r in self.records])
        if self.records:
            bp = batch_points([r.rep for r in self.records])
        else:
            e = np.empty(0)
            bp = {"raw": (e, e), "orbit": [(e, e)] * 3}
        self.raw = bp["raw"]
        self.orbit = bp["orbit"]
        self._cache = {}

    def data_hash(self) -> str:
        """Git-style blob hash of the enumeration CSV the table was built from."""
        body = records_to_csv(self.records).encode()
        return hashlib.sha1(b"blob %d\0" % len(body) + body).hexdigest()

    def values(self, phi, mode: str = AVERAGED) -> np.ndarray:
        """phi at each class (averaged over the stabilizer orbit in averaged mode)."""
        key = (describe_phi(phi), id(phi) if isinstance(phi, aut.Maass) else 0, mode)
        if key in self._cache:
            return self._cache[key]
        if mode == RAW:
            v = aut.eval_many(phi, *self.raw)
        elif mode == AVERAGED:
            parts = [aut.eval_many(phi, *pt) for pt in self.orbit]
            v = (parts[0] + parts[1] + parts[2]) / 3
        else:
            raise ValueError(f"unknown mode {mode!r}")
        self._cache[key] = v
        return v


def a_phi(m: int, phi, table: ShapeTable, mode: str = AVERAGED):
    """sum over classes of discriminant m of phi(g^-1) / |stabilizer|."""
    if m == 0:
        raise ValueError("m must be nonzero")
    if abs(m) > table.max_disc:
        raise EnumerationShortfall(f"table reaches |m| <= {table.max_disc}, need {abs(m)}", abs(m))
    sel = table.disc == m
    return fsum_complex(table.weight[sel] * table.values(phi, mode)[sel])


def weyl_sum(X: float, phi, psi: SmoothCutoff, sign: int, table: ShapeTable, mode: str = AVERAGED):
    """sum over sign*m >= 1 of psi(|m|/X) a_phi(m)."""
    need = math.floor(psi.beta * X)
    if need > table.max_disc:
        raise EnumerationShortfall(f"weyl sum at X={X:g} needs |m| <= {need}, table has {table.max_disc}", need)
    sel = (table.disc > 0) if sign > 0 else (table.disc < 0)
    w = psi(np.abs(table.disc[sel]) / X) * table.weight[sel]
    return fsum_complex(w * table.values(phi, mode)[sel])


def smoothed_count(X: float, psi: SmoothCutoff, sign: int, class_numbers: dict) -> float:
    """Second route for phi = 1: sum of psi(|m|/X) times the weighted class number."""
    return math.fsum(float(psi(abs(m) / X)) * w for m, (_, w) in class_numbers.items() if (m > 0) == (sign > 0))


@dataclass
class PartialL:
    value: complex
    value_half: complex
    certified: bool
    M: int

    @property
    def tail_note(self) -> str:
        state = "certified (Re s > 4)" if self.certified else "uncertified"
        return f"{state}; |L(M) - L(M/2)| = {abs(self.value - self.value_half):.3e}"


def partial_L(s: complex, M: int, phi, table: ShapeTable, sign: int, mode: str = AVERAGED) -> PartialL:
    """sum over 1 <= sign*m <= M of a_phi(m) / |m|^s, with the M/2 truncation alongside."""
    if M > table.max_disc:
        raise EnumerationShortfall(f"need |m| <= {M}", M)
    s = complex(s)
    sel = ((table.disc > 0) if sign > 0 else (table.disc < 0)) & (np.abs(table.disc) <= M)
    absm = np.abs(table.disc[sel]).astype(float)
    terms = table.weight[sel] * table.values(phi, mode)[sel] * np.exp(-s * np.log(absm))
    half = absm <= M // 2
    return PartialL(fsum_complex(terms), fsum_complex(terms[half]), s.real > 4, M)


def partial_L_streaming(s: complex, M: int, phi, sign: int, lattice: str = "L",
                        mode: str = AVERAGED, band: int = 2000) -> complex:
    """Same sum as partial_L, enumerating band by band and discarding each band after use."""
    s = complex(s)
    parts = []
    lo = 0
    while lo < M:
        hi = min(M, lo + band)
        recs = [r for r in _band(lo, hi, 1, 1) if (r.disc > 0) == (sign > 0)]
        if lattice == "Lhat":
            recs = [r for r in recs if r.in_dual]
        if recs:
            t = ShapeTable(recs, hi, lattice, assume_canonical=True)
            absm = np.abs(t.disc).astype(float)
            parts.extend((t.weight * t.values(phi, mode) * np.exp(-s * np.log(absm))).tolist())
        lo = hi
    return fsum_complex(np.array(parts)) if parts else 0.0


# --- G_phi ----------------------------------------------------------------------


def _gphi_tail_bound(sigma: float, T: int, growth: float = 0.12) -> float:
    """Bound on the terms with l m > T from |rho(n)| <= 2 n^growth and d(n) <= 1 + log n partial sums."""
    eff = sigma if sigma >= 0 else 3 * sigma
    delta = eff - growth
    if delta <= 0:
        return math.inf
    # sum_{n > T} d(n) n^(-1-delta) <= int_T^oo (log t + 2) t^(-1-delta) dt
    return 2 * T**-delta * ((math.log(T) + 2) / delta + 1 / delta**2)


def g_phi(x: complex, data: aut.MaassFormData, T: int, dual_reading: str | None = None) -> dict:
    """Truncated sum over l m <= T of rho(l m) / (l^(1+x) m^(1+3x)).

    dual_reading "A" uses (3m)^(1+3x) in the denominator, "B" additionally
    rho(3 l m).  Returns a dict with the requested value(s) and the tail bound.
    """
    x = complex(x)
    if not x.real > -0.25 + 0.05:
        raise ValueError("need Re x > -1/5")
    readings = [dual_reading] if dual_reading else [None, "A", "B"]
    need = 3 * T if "B" in readings else T
    if need > data.N:
        raise aut.TruncationError(f"g_phi needs {need} coefficients, have {data.N}", need)
    rho = data.coeffs
    out = {}
    for rd in readings:
        terms = []
        for l in range(1, T + 1):
            for m in range(1, T // l + 1):
                n = l * m
                coef = rho.get(3 * n, 0.0) if rd == "B" else rho.get(n, 0.0)
                if coef == 0.0:
                    continue
                mm = 3 * m if rd in ("A", "B") else m
                terms.append(coef * l ** (-1 - x) * mm ** (-1 - 3 * x))
        out[rd or "plain"] = fsum_complex(np.array(terms)) if terms else 0j
    out["tail_bound"] = _gphi_tail_bound(x.real, T)
    return out


# --- tables and the decay experiment ---------------------------------------------


@dataclass
class WeylSumTable:
    rows: list
    phi: str
    cutoff: SmoothCutoff
    averaging_mode: str
    lattice: str
    data_hash: str = ""
    extra: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        for k, v in self.metadata().items():
            buf.write(f"# {k}={v}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["X", "S_plus", "S_minus", "N_plus", "N_minus"])
        for X, sp, sm, np_, nm in self.rows:
            w.writerow([repr(X), _fmt(sp), _fmt(sm), repr(np_), repr(nm)])
        return buf.getvalue()

    def metadata(self) -> dict:
        return {"phi": self.phi, "cutoff": json.dumps(asdict(self.cutoff)), "mode": self.averaging_mode,
                "lattice": self.lattice, "data_hash": self.data_hash}

    def to_json(self) -> str:
        rows = [{"X": X, "S_plus": _jsonable(sp), "S_minus": _jsonable(sm), "N_plus": np_, "N_minus": nm}
                for X, sp, sm, np_, nm in self.rows]
        meta = self.metadata()
        meta["cutoff"] = asdict(self.cutoff)
        return json.dumps({"metadata": meta, "rows": rows, **self.extra}, indent=2, sort_keys=True)


def _fmt(v) -> str:
    if isinstance(v, complex):
        return repr(v.real) if v.imag == 0 else f"{v.real!r}{v.imag:+}j"
    return repr(v)


def _jsonable(v):
    if isinstance(v, complex):
        return {"re": v.real, "im": v.imag}
    return v


def weyl_table(X_grid, phi, psi: SmoothCutoff, table: ShapeTable, mode: str = AVERAGED) -> WeylSumTable:
    const = aut.Constant()
    rows = []
    for X in X_grid:
        rows.append((float(X),
                     weyl_sum(X, phi, psi, 1, table, mode), weyl_sum(X, phi, psi, -1, table, mode),
                     weyl_sum(X, const, psi, 1, table, mode), weyl_sum(X, const, psi, -1, table, mode)))
    return WeylSumTable(rows, describe_phi(phi), psi, mode, table.lattice, table.data_hash())


def fit_exponent(xs, ys) -> tuple:
    """Least-squares slope of log|y| on log x with its standard error (nan for 2 points)."""
    lx, ly = np.log(np.asarray(xs, float)), np.log(np.abs(np.asarray(ys, dtype=complex)))
    if len(lx) < 2:
        raise ValueError("need at least two grid points")
    if len(lx) == 2:
        return float((ly[1] - ly[0]) / (lx[1] - lx[0])), float("nan")
    coef, cov = np.polyfit(lx, ly, 1, cov=True)
    return float(coef[0]), float(math.sqrt(cov[0, 0]))


def decay_experiment(X_grid, phi, psi: SmoothCutoff, table: ShapeTable) -> dict:
    """Weyl-sum tables in both modes with fitted growth exponents of S and N."""
    out = {}
    for mode in (RAW, AVERAGED):
        tab = weyl_table(X_grid, phi, psi, table, mode)
        fits = {}
        for label, col in (("S_plus", 1), ("S_minus", 2), ("N_plus", 3), ("N_minus", 4)):
            slope, err = fit_exponent([r[0] for r in tab.rows], [r[col] for r in tab.rows])
            fits[label] = {"exponent": slope, "stderr": err}
        ratios = {sgn: [abs(r[1 if sgn == "+" else 2]) / r[3 if sgn == "+" else 4] for r in tab.rows] for sgn in "+-"}
        tab.extra = {"fits": fits, "ratios": ratios}
        out[mode] = tab
    return out

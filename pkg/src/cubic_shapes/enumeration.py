"""Enumeration of SL2(Z)-classes of integral binary cubic forms with 0 < |D| <= X.

Coefficient bounds
------------------
Let z = x0 + i y0 be the covariant point of f (see ``reduction``) and
N(X, Y) = |X - z Y|^2 / y0 the determinant-one quadratic with root z.  By
compactness of the set of forms of discriminant +-1 with covariant point i,

    |f(X, Y)| <= M N(X, Y)^(3/2),   M = (D/108)^(1/4) (D > 0), |D|^(1/4)/sqrt(2) (D < 0).

In the centred, rescaled coordinates the form is a cubic bounded by M on the
unit circle, so its outer coefficients are at most M and its middle ones at
most 16M/pi.  For a reduced form (|x0| <= 1/2, y0 >= sqrt(3)/2) this gives

    1 <= a <= M y0^(-3/2),  |b| <= K M (2/sqrt 3)^(1/2) + 3a/2,
    |c| <= K M y0^(1/2) + |b~| + 3a/4,        K = 16/pi,

and d is then confined by the exact quadratic |D(a, b, c, d)| <= X.  Forms
with a = 0 are y (b x^2 + c xy + d y^2); a reduced one has |c| <= b.
"""

from __future__ import annotations

import csv
import io
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import reduction
from .forms import disc, in_dual_lattice, is_irreducible

K_MID = 16 / math.pi
CSV_HEADER = ["disc", "a", "b", "c", "d", "stab", "dual", "irreducible"]
CHECKPOINT_BAND = 10_000
ORACLE_MAX = 10_000


class EnumerationCeilingError(RuntimeError):
    """The record ceiling was hit; ``completed`` is the last finished |D|."""

    def __init__(self, msg, completed: int, checkpoint: str | None = None):
        super().__init__(msg)
        self.completed = completed
        self.checkpoint = checkpoint


@dataclass(frozen=True, order=True)
class ClassRecord:
    disc: int
    rep: tuple
    stabilizer_order: int = 1
    in_dual: bool = False
    irreducible: bool = True

    def row(self) -> list:
        return [self.disc, *self.rep, self.stabilizer_order, int(self.in_dual), int(self.irreducible)]


@dataclass
class EnumerationReport:
    max_disc: int
    records: list
    seconds: float = 0.0
    shards: int = 1
    dual: bool = False
    counts: dict = field(default_factory=dict)

    def by_sign(self, sign: int) -> list:
        return [r for r in self.records if (r.disc > 0) == (sign > 0)]


def _bound_constant(hi: int) -> float:
    return max(hi ** 0.25 / math.sqrt(2), (hi / 108) ** 0.25) * (1 + 1e-9)


def _d_ranges(a: int, b: np.ndarray, c: np.ndarray, hi: int):
    """Integer d-ranges (left, right) pairs, possibly two per (b, c), covering |D| <= hi."""
    af = float(a)
    bf, cf = b.astype(float), c.astype(float)
    A1 = 18 * af * bf * cf - 4 * bf**3
    A0 = bf * bf * cf * cf - 4 * af * cf**3
    den = 54 * af * af
    d1 = A1 * A1 + 108 * af * af * (A0 + hi)
    ok = d1 >= 0
    sq1 = np.sqrt(np.where(ok, d1, 0))
    lo_d = np.floor((A1 - sq1) / den) - 1
    hi_d = np.ceil((A1 + sq1) / den) + 1
    d2 = A1 * A1 + 108 * af * af * (A0 - hi)
    inner = d2 > 0
    sq2 = np.sqrt(np.where(inner, d2, 0))
    p1 = np.ceil((A1 - sq2) / den) + 1
    p2 = np.floor((A1 + sq2) / den) - 1
    excl = inner & (p2 >= p1)
    left_end = np.where(excl, p1 - 1, hi_d)
    right_start = np.where(excl, p2 + 1, hi_d + 1)
    segs = [(lo_d, left_end), (right_start, hi_d)]
    return ok, segs


def _expand(b, c, starts, ends):
    n = np.maximum(ends - starts + 1, 0).astype(np.int64)
    total = int(n.sum())
    if total == 0:
        e = np.empty(0, dtype=np.int64)
        return e, e, e
    idx = np.repeat(np.arange(len(n)), n)
    offs = np.arange(total) - np.repeat(np.cumsum(n) - n, n)
    d = starts.astype(np.int64)[idx] + offs
    return b[idx], c[idx], d


def disc_array(a, b, c, d):
    return 18 * a * b * c * d - 4 * b**3 * d + b * b * c * c - 4 * a * c**3 - 27 * a * a * d * d


def _candidates(lo: int, hi: int) -> np.ndarray:
    """All forms with a > 0, or a = 0 < b, having lo < |D| <= hi; superset of reduced ones."""
    M = _bound_constant(hi)
    out = []
    sqrt3_2 = math.sqrt(3) / 2
    a = 1
    while True:
        y0max = (M / a) ** (2 / 3)
        if y0max < sqrt3_2 * (1 - 1e-6):
            break
        bt = K_MID * M * (2 / math.sqrt(3)) ** 0.5
        bmax = math.floor(bt + 1.5 * a) + 1
        cmax = math.floor(K_MID * M * math.sqrt(y0max) + bt + 0.75 * a) + 1
        bs = np.arange(-bmax, bmax + 1, dtype=np.int64)
        cs = np.arange(-cmax, cmax + 1, dtype=np.int64)
        B, C = np.meshgrid(bs, cs, indexing="ij")
        B, C = B.ravel(), C.ravel()
        ok, segs = _d_ranges(a, B, C, hi)
        B, C = B[ok], C[ok]
        for s, e in segs:
            bb, cc, dd = _expand(B, C, s[ok], e[ok])
            if len(dd) == 0:
                continue
            aa = np.full_like(dd, a)
            D = disc_array(aa, bb, cc, dd)
            keep = (np.abs(D) > lo) & (np.abs(D) <= hi)
            out.append(np.stack([aa[keep], bb[keep], cc[keep], dd[keep]], axis=1))
        a += 1
    # a = 0: f = y (b x^2 + c x y + d y^2), D = b^2 (c^2 - 4 b d)
    bmax = math.isqrt(hi)
    for b in range(1, bmax + 1):
        cs = np.arange(-b, b + 1, dtype=np.int64)
        span = hi / (b * b)
        starts = np.floor((cs * cs - span) / (4 * b)) - 1
        ends = np.ceil((cs * cs + span) / (4 * b)) + 1
        bb = np.full_like(cs, b)
        bb, cc, dd = _expand(bb, cs, starts, ends)
        aa = np.zeros_like(dd)
        D = disc_array(aa, bb, cc, dd)
        keep = (np.abs(D) > lo) & (np.abs(D) <= hi)
        out.append(np.stack([aa[keep], bb[keep], cc[keep], dd[keep]], axis=1))
    if not out:
        return np.empty((0, 4), dtype=np.int64)
    return np.concatenate(out)


def _companion_roots(F: np.ndarray) -> np.ndarray:
    """Roots of a t^3 + b t^2 + c t + d (a != 0) for each row, shape (n, 3)."""
    a, b, c, d = (F[:, i].astype(float) for i in range(4))
    n = len(a)
    comp = np.zeros((n, 3, 3))
    comp[:, 0, 0] = -b / a
    comp[:, 0, 1] = -c / a
    comp[:, 0, 2] = -d / a
    comp[:, 1, 0] = 1
    comp[:, 2, 1] = 1
    roots = np.linalg.eigvals(comp) if n else np.empty((0, 3), complex)
    for _ in range(2):
        fz = ((a[:, None] * roots + b[:, None]) * roots + c[:, None]) * roots + d[:, None]
        dz = (3 * a[:, None] * roots + 2 * b[:, None]) * roots + c[:, None]
        safe = dz != 0
        roots = np.where(safe, roots - fz / np.where(safe, dz, 1), roots)
    return roots


def _complex_points(F: np.ndarray) -> np.ndarray:
    """Covariant point (upper complex root) for rows with D < 0."""
    z = np.empty(len(F), dtype=complex)
    quad = F[:, 0] == 0
    if quad.any():
        b, c, d = (F[quad, i].astype(float) for i in (1, 2, 3))
        z[quad] = (-c + 1j * np.sqrt(4 * b * d - c * c)) / (2 * b)
    cub = ~quad
    if cub.any():
        r = _companion_roots(F[cub])
        z[cub] = r[np.arange(len(r)), np.argmax(r.imag, axis=1)]
    return z.real + 1j * np.abs(z.imag)


def _reducible_mask(F: np.ndarray) -> np.ndarray:
    """True where the form has a rational linear factor (exact check of float candidates)."""
    red = F[:, 0] == 0
    idx = np.nonzero(~red)[0]
    if len(idx):
        G = F[idx]
        roots = _companion_roots(G)
        a = G[:, 0]
        found = np.zeros(len(G), dtype=bool)
        amax = int(np.abs(a).max())
        for q in range(1, amax + 1):
            sel = (a % q == 0) & ~found
            if not sel.any():
                continue
            for k in range(3):
                r = roots[sel, k]
                real = np.abs(r.imag) < 1e-6 * (1 + np.abs(r.real))
                p = np.round(q * r.real).astype(np.int64)
                Gs = G[sel]
                val = (Gs[:, 0] * p**3 + Gs[:, 1] * p * p * q + Gs[:, 2] * p * q * q + Gs[:, 3] * q**3)
                hit = real & (val == 0)
                # int64 arithmetic wraps, so confirm each hit with exact integers
                for j in np.nonzero(hit)[0]:
                    ca, cb, cc, cd = (int(v) for v in Gs[j])
                    pj = int(p[j])
                    if ca * pj**3 + cb * pj * pj * q + cc * pj * q * q + cd * q**3 == 0:
                        found[np.nonzero(sel)[0][j]] = True
        red[idx] = found
    return red


def _reduced_records(lo: int, hi: int) -> list:
    F = _candidates(lo, hi)
    if len(F) == 0:
        return []
    a, b, c, d = (F[:, i] for i in range(4))
    D = disc_array(a, b, c, d)
    pos = D > 0
    reduced = np.zeros(len(F), dtype=bool)
    interior = np.zeros(len(F), dtype=bool)
    P, Q, R = b * b - 3 * a * c, b * c - 9 * a * d, c * c - 3 * b * d
    reduced[pos] = (np.abs(Q) <= P)[pos] & (P <= R)[pos]
    interior[pos] = (np.abs(Q) < P)[pos] & (P < R)[pos] & (P > 0)[pos]
    neg = ~pos
    if neg.any():
        z = _complex_points(F[neg])
        eps = reduction.FAT_EPS
        margin = 1e-6
        reduced[neg] = (np.abs(z.real) <= 0.5 + eps) & (np.abs(z) ** 2 >= 1 - eps)
        interior[neg] = (np.abs(z.real) < 0.5 - margin) & (np.abs(z) ** 2 > 1 + margin)
    # interior forms are alone in their orbit up to sign: canonical is -f
    inner = F[reduced & interior]
    canon = [tuple(int(v) for v in -row) for row in inner]
    stabs = [1] * len(canon)
    seen = set()
    for row in F[reduced & ~interior]:
        f = tuple(int(v) for v in row)
        cf = reduction.canonical(f)
        if cf in seen:
            continue
        seen.add(cf)
        canon.append(cf)
        stabs.append(reduction.stabilizer_order(cf))
    if not canon:
        return []
    C = np.array(canon, dtype=np.int64)
    red = _reducible_mask(C)
    Dc = disc_array(C[:, 0], C[:, 1], C[:, 2], C[:, 3])
    dual = (C[:, 1] % 3 == 0) & (C[:, 2] % 3 == 0)
    recs = [ClassRecord(int(Dc[i]), canon[i], stabs[i], bool(dual[i]), not bool(red[i]))
            for i in range(len(canon))]
    return recs


def _shard_bounds(lo: int, hi: int, shards: int) -> list:
    edges = [lo + (hi - lo) * k // shards for k in range(shards + 1)]
    return [(edges[k], edges[k + 1]) for k in range(shards) if edges[k + 1] > edges[k]]


def _run_shard(bounds):
    return _reduced_records(*bounds)


def _band(lo: int, hi: int, shards: int, threads: int) -> list:
    parts = _shard_bounds(lo, hi, shards)
    if threads > 1 and len(parts) > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(_run_shard, parts))
    else:
        results = [_run_shard(p) for p in parts]
    recs = [r for part in results for r in part]
    recs.sort()
    return recs


def enumerate_classes(X: int, dual: bool = False, shards: int = 1, threads: int = 1,
                      checkpoint: str | None = None, max_records: int | None = None) -> list:
    """One ClassRecord per SL2(Z)-orbit of forms in L (or the dual lattice) with 0 < |D| <= X.

    Records are sorted by discriminant, then by representative.  With a
    checkpoint path, completed discriminant bands are appended to that file and
    a later call resumes after the last completed band.
    """
    if X < 1:
        raise ValueError("X must be >= 1")
    done, recs = 0, []
    if checkpoint and os.path.exists(checkpoint):
        done, recs = truncate_checkpoint(checkpoint)
        recs = [r for r in recs if abs(r.disc) <= X]
    while done < X:
        hi = min(X, (done // CHECKPOINT_BAND + 1) * CHECKPOINT_BAND)
        band = _band(done, hi, shards, threads)
        recs.extend(band)
        if checkpoint:
            append_checkpoint(checkpoint, band, hi)
        done = hi
        if max_records is not None and len(recs) > max_records:
            raise EnumerationCeilingError(
                f"record ceiling {max_records} exceeded after |D| <= {done}", done, checkpoint)
    recs.sort()
    if dual:
        recs = [r for r in recs if r.in_dual]
    return recs


def enumerate_report(X: int, dual: bool = False, shards: int = 1, threads: int = 1, **kw) -> EnumerationReport:
    t0 = time.perf_counter()
    recs = enumerate_classes(X, dual, shards, threads, **kw)
    rep = EnumerationReport(X, recs, time.perf_counter() - t0, shards, dual)
    rep.counts = {"+": sum(r.disc > 0 for r in recs), "-": sum(r.disc < 0 for r in recs)}
    return rep


# --- brute-force oracle ------------------------------------------------------


def oracle_box(X: int) -> dict:
    """Explicit coefficient box containing a representative of every class with |D| <= X.

    Part "A" covers classes whose reduced forms have a != 0 (derived from the
    value bound in the module docstring, evaluated at (1,0), (0,1), (1,+-1)),
    part "B" the forms y (b x^2 + c x y + d y^2) with |c| <= b.
    """
    M = _bound_constant(X)
    ymin = math.sqrt(3) / 2
    # a = f(1, 0) is a nonzero integer, so 1 <= M / y0^(3/2)
    y0 = max(M ** (2 / 3), ymin)
    amax = M * ymin ** -1.5
    dmax = M * ((0.25 + y0 * y0) / y0) ** 1.5
    side = max((2.25 + ymin**2) / ymin, (2.25 + y0 * y0) / y0)
    fmax = M * side**1.5
    bmax = fmax + dmax
    cmax = fmax + amax
    return {"a": math.floor(amax) + 1, "b": math.floor(bmax) + 1,
            "c": math.floor(cmax) + 1, "d": math.floor(dmax) + 1, "slab_b": math.isqrt(X)}


def brute_force_classes(X: int, dual: bool = False) -> list:
    """Independent oracle: canonicalise every form of the explicit box and deduplicate."""
    if X > ORACLE_MAX:
        raise ValueError(f"brute force is limited to X <= {ORACLE_MAX}")
    box = oracle_box(X)
    found = set()
    bs = np.arange(-box["b"], box["b"] + 1)
    cs = np.arange(-box["c"], box["c"] + 1)
    ds = np.arange(-box["d"], box["d"] + 1)
    B, C, Dd = np.meshgrid(bs, cs, ds, indexing="ij")
    B, C, Dd = B.ravel(), C.ravel(), Dd.ravel()
    for a in range(1, box["a"] + 1):
        D = disc_array(a, B, C, Dd)
        keep = (D != 0) & (np.abs(D) <= X)
        for b, c, d in zip(B[keep].tolist(), C[keep].tolist(), Dd[keep].tolist()):
            found.add(reduction.canonical((a, b, c, d)))
    for b in range(1, box["slab_b"] + 1):
        for c in range(-b, b + 1):
            span = X / (b * b)
            for d in range(math.floor((c * c - span) / (4 * b)) - 1, math.ceil((c * c + span) / (4 * b)) + 2):
                f = (0, b, c, d)
                D = disc(f)
                if D != 0 and abs(D) <= X:
                    found.add(reduction.canonical(f))
    recs = []
    for f in sorted(found):
        if dual and not in_dual_lattice(f):
            continue
        recs.append(ClassRecord(disc(f), f, reduction.stabilizer_order(f), in_dual_lattice(f), is_irreducible(f)))
    recs.sort()
    return recs


# --- class numbers -----------------------------------------------------------


def class_numbers(records, irreducible_only: bool = False) -> dict:
    """m -> (h(m), sum over classes of 1/|stabilizer|)."""
    out = {}
    for r in records:
        if irreducible_only and not r.irreducible:
            continue
        h, w = out.get(r.disc, (0, 0.0))
        out[r.disc] = (h + 1, w + 1.0 / r.stabilizer_order)
    return out


def gl2_classes(records) -> list:
    """Fuse SL2(Z)-classes into GL2(Z)-classes (comparison only)."""
    seen = {}
    for r in records:
        key = reduction.gl2_canonical(r.rep)
        seen.setdefault(key, r)
    return sorted(seen.values())


# --- CSV / checkpoint I/O ----------------------------------------------------


def records_to_csv(records, header_lines=()) -> str:
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow(r.row())
    return buf.getvalue()


def _parse_row(row) -> ClassRecord:
    D, a, b, c, d, stab, dual, irr = (int(v) for v in row)
    return ClassRecord(D, (a, b, c, d), stab, bool(dual), bool(irr))


def records_from_csv(text: str) -> list:
    recs = []
    for row in csv.reader(io.StringIO(text)):
        if not row or row[0].startswith("#") or row[0] == "disc":
            continue
        recs.append(_parse_row(row))
    return recs


def append_checkpoint(path: str, records, completed: int) -> None:
    new = not os.path.exists(path)
    with open(path, "a", newline="") as fh:
        if new:
            fh.write(",".join(CSV_HEADER) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        for r in records:
            w.writerow(r.row())
        fh.write(f"# max_disc_completed={completed}\n")
        fh.flush()
        os.fsync(fh.fileno())


def _scan_checkpoint(path: str) -> tuple:
    done, confirmed, pending, end = 0, [], [], 0
    with open(path, "rb") as fh:
        offset = 0
        for raw in fh:
            offset += len(raw)
            line = raw.decode("utf-8", errors="replace").strip()
            if line.startswith("# max_disc_completed="):
                done = int(line.split("=", 1)[1])
                confirmed.extend(_parse_row(row.split(",")) for row in pending)
                pending, end = [], offset
            elif line and not line.startswith(("#", "disc")):
                pending.append(line)
    return done, confirmed, end


def read_checkpoint(path: str) -> tuple:
    """(max_disc_completed, records); rows after the last marker are discarded."""
    done, recs, _ = _scan_checkpoint(path)
    return done, recs


def truncate_checkpoint(path: str) -> tuple:
    """Drop everything after the last completed band, so appends start clean."""
    done, recs, end = _scan_checkpoint(path)
    with open(path, "r+b") as fh:
        fh.truncate(end)
    if end == 0:
        os.unlink(path)
    return done, recs

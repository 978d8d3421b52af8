"""Maass-form coefficient data: a plain-text file format, synthetic tables and a cached HTTP fetcher.

File format::

    #maass v1
    t_phi=<decimal>
    parity=even|odd
    precision=<decimal>
    1 1.0
    2 <rho_2>
    ...
"""

from __future__ import annotations

import json
import logging
import math
import os
import random
import tempfile
import urllib.error
import urllib.request
from dataclasses import dataclass
from pathlib import Path

from .automorphic import MaassFormData, hecke_check

log = logging.getLogger(__name__)

MAGIC = "#maass v1"
CACHE_ENV = "CUBIC_SHAPES_CACHE"
DEFAULT_CACHE = "./.cache"
DEFAULT_BASE_URL = "https://www.lmfdb.org/api/maass_newforms/?label={label}&_format=json"
# first even level-one eigenvalue, used only as a plausible parameter for synthetic tables
SYNTHETIC_T = 9.533695261353557


class SpectralDataError(ValueError):
    """Base class for coefficient-file problems."""


class HeaderError(SpectralDataError):
    pass


class IndexOrderError(SpectralDataError):
    pass


class NormalizationError(SpectralDataError):
    pass


class HeckeViolationError(SpectralDataError):
    def __init__(self, msg, violation: float):
        super().__init__(msg)
        self.violation = violation


class FetchError(RuntimeError):
    """Network failure, unknown label or unusable response."""


class OfflineCacheMiss(FetchError):
    pass


@dataclass(frozen=True)
class LocalFile:
    path: str


@dataclass(frozen=True)
class WebFetch:
    label: str
    cache_dir: str | None = None
    base_url: str = DEFAULT_BASE_URL


@dataclass(frozen=True)
class Synthetic:
    N: int = 200
    seed: int = 0
    t_phi: float = SYNTHETIC_T
    parity: str = "even"


def hecke_tolerance(precision: float) -> float:
    return max(10 * precision, 1e-6)


def _read_header(lines, key):
    if not lines:
        raise HeaderError(f"missing '{key}=' line")
    line = lines.pop(0)
    k, sep, v = line.partition("=")
    if not sep or k.strip() != key:
        raise HeaderError(f"expected '{key}=', got {line!r}")
    return v.strip()


def parse_coefficient_file(data: bytes | str, check_hecke: bool = True, label: str = "") -> MaassFormData:
    text = data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else data
    lines = [ln.strip() for ln in text.splitlines()]
    while lines and not lines[-1]:
        lines.pop()
    if not lines or lines[0] != MAGIC:
        raise HeaderError(f"first line must be {MAGIC!r}")
    lines.pop(0)
    try:
        t_phi = float(_read_header(lines, "t_phi"))
        parity = _read_header(lines, "parity")
        precision = float(_read_header(lines, "precision"))
    except ValueError as e:
        if isinstance(e, HeaderError):
            raise
        raise HeaderError(f"bad header value: {e}") from e
    if parity not in ("even", "odd"):
        raise HeaderError(f"parity must be even or odd, got {parity!r}")
    if not (t_phi > 0 and math.isfinite(t_phi)):
        raise HeaderError("t_phi must be a positive number")
    if not (precision >= 0 and math.isfinite(precision)):
        raise HeaderError("precision must be a nonnegative number")
    coeffs = {}
    expected = 1
    for ln in lines:
        parts = ln.split()
        if len(parts) != 2:
            if "=" in ln:
                raise HeaderError(f"unknown key line {ln!r}")
            raise SpectralDataError(f"malformed coefficient line {ln!r}")
        try:
            n, v = int(parts[0]), float(parts[1])
        except ValueError as e:
            raise SpectralDataError(f"malformed coefficient line {ln!r}") from e
        if n != expected:
            raise IndexOrderError(f"expected index {expected}, got {n}")
        coeffs[n] = v
        expected += 1
    if not coeffs:
        raise SpectralDataError("no coefficients")
    if coeffs[1] != 1.0:
        raise NormalizationError(f"rho(1) = {coeffs[1]}, expected 1")
    out = MaassFormData(t_phi, parity, coeffs, precision, label)
    if check_hecke:
        v = hecke_check(out)
        if v > hecke_tolerance(precision):
            raise HeckeViolationError(f"Hecke relations violated by {v:.3g}", v)
    return out


def serialize(data: MaassFormData) -> str:
    out = [MAGIC, f"t_phi={data.t_phi!r}", f"parity={data.parity}", f"precision={data.stated_precision!r}"]
    out += [f"{n} {data.coeffs[n]!r}" for n in sorted(data.coeffs)]
    return "\n".join(out) + "\n"


def _primes(n: int) -> list:
    sieve = bytearray([1]) * (n + 1)
    sieve[:2] = b"\x00\x00"
    for p in range(2, int(n**0.5) + 1):
        if sieve[p]:
            sieve[p * p::p] = bytearray(len(sieve[p * p::p]))
    return [i for i in range(n + 1) if sieve[i]]


def synthetic_coefficients(N: int, seed: int = 0, prime_values: dict | None = None) -> dict:
    """Hecke-multiplicative table: dyadic seeds k/8 in [-1, 1] at primes, p-power recursion.

    Dyadic seeds keep every product exact in binary floating point, so the
    relations hold with zero rounding error.
    """
    rng = random.Random(seed)
    prime_values = dict(prime_values or {})
    rho = {1: 1.0}
    for p in _primes(N):
        a = prime_values.get(p, rng.randint(-8, 8) / 8)
        prev, cur, q = 1.0, a, p
        while q <= N:
            rho[q] = cur
            prev, cur = cur, a * cur - prev
            q *= p
    # extend multiplicatively via the smallest prime power factor
    spf = list(range(N + 1))
    for p in _primes(int(N**0.5) + 1):
        for m in range(p * p, N + 1, p):
            if spf[m] == m:
                spf[m] = p
    for n in range(2, N + 1):
        if n in rho:
            continue
        p, q = spf[n], spf[n]
        while (n // q) % p == 0:
            q *= p
        rho[n] = rho[q] * rho[n // q]
    return {n: rho[n] for n in range(1, N + 1)}


def synthetic_maass(N: int = 200, seed: int = 0, t_phi: float = SYNTHETIC_T, parity: str = "even") -> MaassFormData:
    return MaassFormData(t_phi, parity, synthetic_coefficients(N, seed), 0.0, f"synthetic-{seed}")


# --- cache and fetch ------------------------------------------------------------


def cache_dir(explicit: str | None = None) -> Path:
    return Path(explicit or os.environ.get(CACHE_ENV) or DEFAULT_CACHE)


def _cache_path(label: str, directory: Path) -> Path:
    safe = "".join(ch if ch.isalnum() or ch in "._-" else "_" for ch in label)
    return directory / f"{safe}.maass"


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=".maass")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _first(d: dict, *keys):
    for k in keys:
        if k in d:
            return d[k]
    raise KeyError(keys[0])


def response_to_text(body: bytes, label: str) -> str:
    """Convert a remote response into the local file format.

    Accepts either the local format verbatim or JSON with a record holding a
    spectral parameter, a symmetry/parity and a coefficient list starting at n = 1.
    """
    text = body.decode("utf-8", errors="replace")
    if text.lstrip().startswith(MAGIC):
        return text
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise FetchError(f"unrecognised response for {label!r}") from e
    if isinstance(obj, dict) and "data" in obj:
        obj = obj["data"]
    if isinstance(obj, list):
        if not obj:
            raise FetchError(f"unknown label {label!r}")
        obj = obj[0]
    try:
        t_phi = float(_first(obj, "t_phi", "spectral_parameter", "R"))
        sym = _first(obj, "parity", "symmetry")
        coeffs = _first(obj, "coefficients", "coeffs")
    except (KeyError, TypeError, ValueError) as e:
        raise FetchError(f"response for {label!r} lacks a required field: {e}") from e
    parity = sym if sym in ("even", "odd") else ("even" if int(sym) == 0 else "odd")
    precision = float(obj.get("precision", obj.get("error", 1e-12)) or 1e-12)
    if isinstance(coeffs, dict):
        coeffs = [coeffs[k] for k in sorted(coeffs, key=int)]
    data = MaassFormData(t_phi, parity, {n: float(v) for n, v in enumerate(coeffs, 1)}, precision, label)
    return serialize(data)


def fetch_remote(label: str, cache: str | None = None, base_url: str = DEFAULT_BASE_URL,
                 offline: bool = False, timeout: float = 20.0, opener=None) -> MaassFormData:
    """Load a Maass form by label, from the cache if possible, else over HTTP."""
    directory = cache_dir(cache)
    path = _cache_path(label, directory)
    if path.exists():
        try:
            return parse_coefficient_file(path.read_bytes(), label=label)
        except SpectralDataError as e:
            log.warning("cached %s is invalid (%s); refetching", path, e)
            if offline:
                raise OfflineCacheMiss(
                    f"cache entry for {label!r} is invalid and offline mode is set; "
                    "run with an Eisenstein test function instead") from e
    if offline:
        raise OfflineCacheMiss(
            f"no cached data for {label!r} in {directory} and offline mode is set; "
            "use an Eisenstein test function (--phi eisenstein:<z>) or provide a local file")
    url = base_url.format(label=urllib.request.quote(label, safe=""))
    open_url = opener or urllib.request.urlopen
    try:
        with open_url(url, timeout=timeout) as resp:
            body = resp.read()
    except urllib.error.HTTPError as e:
        if e.code == 404:
            raise FetchError(f"unknown label {label!r}") from e
        raise FetchError(f"HTTP {e.code} fetching {label!r}") from e
    except (urllib.error.URLError, OSError, TimeoutError) as e:
        raise FetchError(f"network failure fetching {label!r}: {e}") from e
    text = response_to_text(body, label)
    data = parse_coefficient_file(text, label=label)
    try:
        _atomic_write(path, text)
    except OSError as e:
        raise FetchError(f"cannot write cache file {path}: {e}") from e
    return data


def load(source, offline: bool = False) -> MaassFormData:
    if isinstance(source, LocalFile):
        return parse_coefficient_file(Path(source.path).read_bytes(), label=source.path)
    if isinstance(source, WebFetch):
        return fetch_remote(source.label, source.cache_dir, source.base_url, offline=offline)
    if isinstance(source, Synthetic):
        return synthetic_maass(source.N, source.seed, source.t_phi, source.parity)
    raise TypeError(f"unknown source {source!r}")

"""Command-line entry point: enumerate, shapes, fetch, weyl, verify.

Exit codes: 0 success, 2 configuration error, 3 data shortfall,
4 verification failure, 5 network failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import automorphic as aut
from . import enumeration as en
from . import lseries, shapes, spectral, verify

EXIT_OK, EXIT_CONFIG, EXIT_SHORTFALL, EXIT_VERIFY, EXIT_NETWORK = 0, 2, 3, 4, 5
log = logging.getLogger("cubic_shapes")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    max_disc: int = 0
    lattice: str = "L"
    sign: str = "both"
    phi: str = "const"
    constant_term: bool = True
    cutoff: tuple = (0.5, 0.75, 1.0, 1.25)
    mode: str = "both"
    shards: int = 1
    threads: int = 1
    offline: bool = False
    output: str | None = None
    fmt: str = "csv"
    grid: list = field(default_factory=list)
    checkpoint: str | None = None
    max_records: int | None = None
    base_url: str = spectral.DEFAULT_BASE_URL
    cache_dir: str | None = None
    label: str = ""
    quick: bool = False
    convention: bool = False

    def validate(self) -> "RunConfig":
        if self.command in ("enumerate", "shapes") and self.max_disc < 1:
            raise ConfigError("--max-disc must be a positive integer")
        if self.shards < 1 or self.threads < 1:
            raise ConfigError("--shards and --threads must be >= 1")
        if self.fmt not in ("csv", "json"):
            raise ConfigError("--format must be csv or json")
        if self.mode not in ("raw", "averaged", "both"):
            raise ConfigError("--mode must be raw, averaged or both")
        try:
            lseries.SmoothCutoff(*self.cutoff)
        except ValueError as e:
            raise ConfigError(f"bad cutoff: {e}") from e
        if self.command == "weyl":
            if not self.grid:
                raise ConfigError("weyl needs --max or --grid")
            if any(x <= 0 for x in self.grid):
                raise ConfigError("grid values must be positive")
            parse_phi_spec(self.phi, self.constant_term, validate_only=True)
        if self.command == "fetch" and not self.label:
            raise ConfigError("fetch needs a label")
        return self

    def header(self) -> list:
        return [f"command={self.command}", f"max_disc={self.max_disc}", f"lattice={self.lattice}",
                f"phi={self.phi}", f"cutoff={','.join(map(repr, self.cutoff))}", f"mode={self.mode}"]


def _number(text: str) -> float:
    try:
        return float(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from e


def _int_like(text: str) -> int:
    v = _number(text)
    if v != int(v):
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(v)


def parse_phi_spec(spec: str, constant_term: bool = True, offline: bool = False,
                   cache_dir: str | None = None, base_url: str = spectral.DEFAULT_BASE_URL,
                   validate_only: bool = False):
    """const | eisenstein:<z> | maass:<file or label>."""
    kind, _, arg = spec.partition(":")
    if kind == "const" and not arg:
        return aut.Constant()
    if kind == "eisenstein":
        try:
            z = complex(arg.replace(" ", "").replace("i", "j"))
        except ValueError as e:
            raise ConfigError(f"bad Eisenstein parameter {arg!r}") from e
        try:
            return aut.Eisenstein(z, constant_term)
        except ValueError as e:
            raise ConfigError(str(e)) from e
    if kind == "maass" and arg:
        if validate_only:
            return None
        if os.path.exists(arg):
            return aut.Maass(spectral.load(spectral.LocalFile(arg)))
        return aut.Maass(spectral.fetch_remote(arg, cache_dir, base_url, offline=offline))
    raise ConfigError(f"unknown --phi {spec!r}; use const, eisenstein:<z> or maass:<file|label>")


def _write(text: str, output: str | None) -> None:
    if output in (None, "-"):
        sys.stdout.write(text)
        return
    path = Path(output)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _records(cfg: RunConfig, X: int) -> list:
    ckpt = cfg.checkpoint
    recs = en.enumerate_classes(X, dual=False, shards=cfg.shards, threads=cfg.threads,
                                checkpoint=ckpt, max_records=cfg.max_records)
    if cfg.lattice == "Lhat":
        recs = [r for r in recs if r.in_dual]
    return recs


def cmd_enumerate(cfg: RunConfig) -> int:
    out = cfg.output or f"classes_{cfg.lattice}_{cfg.max_disc}.csv"
    if cfg.checkpoint is None and out != "-":
        cfg.checkpoint = out + ".ckpt"
    if cfg.checkpoint and out != "-" and os.path.exists(out) and os.path.exists(cfg.checkpoint):
        done, _ = en.read_checkpoint(cfg.checkpoint)
        if done >= cfg.max_disc:
            print(f"up to date: {out} (checkpoint covers |D| <= {done})")
            return EXIT_OK
    recs = _records(cfg, cfg.max_disc)
    _write(en.records_to_csv(recs, cfg.header()), out)
    pos = sum(r.disc > 0 for r in recs)
    print(f"classes with 0 < D <= {cfg.max_disc}: {pos}; with 0 < -D <= {cfg.max_disc}: {len(recs) - pos}"
          f" (lattice {cfg.lattice})", file=sys.stderr if out == "-" else sys.stdout)
    return EXIT_OK


def cmd_shapes(cfg: RunConfig) -> int:
    recs = _records(cfg, cfg.max_disc)
    results = [shapes.shape(r.rep) for r in recs]
    text = "".join(f"# {h}\n" for h in cfg.header()) + shapes.shapes_csv(results)
    _write(text, cfg.output or "-")
    return EXIT_OK


def cmd_fetch(cfg: RunConfig) -> int:
    data = spectral.fetch_remote(cfg.label, cfg.cache_dir, cfg.base_url, offline=cfg.offline)
    print(f"{cfg.label}: t_phi={data.t_phi} parity={data.parity} N={data.N}")
    return EXIT_OK


def cmd_weyl(cfg: RunConfig) -> int:
    phi = parse_phi_spec(cfg.phi, cfg.constant_term, cfg.offline, cfg.cache_dir, cfg.base_url)
    psi = lseries.SmoothCutoff(*cfg.cutoff)
    X = math.floor(psi.beta * max(cfg.grid))
    table = lseries.ShapeTable(_records(cfg, X), X, cfg.lattice, assume_canonical=True)
    modes = {"raw": [shapes.RAW], "averaged": [shapes.AVERAGED], "both": [shapes.RAW, shapes.AVERAGED]}[cfg.mode]
    tables = [lseries.weyl_table(cfg.grid, phi, psi, table, m) for m in modes]
    if cfg.fmt == "json":
        blob = {t.averaging_mode: json.loads(t.to_json()) for t in tables}
        for t in tables:
            for col, idx in (("S_plus", 1), ("S_minus", 2), ("N_plus", 3), ("N_minus", 4)):
                if len(cfg.grid) >= 2:
                    e, se = lseries.fit_exponent(cfg.grid, [r[idx] for r in t.rows])
                    blob[t.averaging_mode].setdefault("fits", {})[col] = {
                        "exponent": e, "stderr": se if math.isfinite(se) else None}
        text = json.dumps(blob, indent=2, sort_keys=True, allow_nan=False) + "\n"
    else:
        text = "".join(t.to_csv() for t in tables)
    _write(text, cfg.output or "-")
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    results = verify.run_suites(quick=cfg.quick, convention_only=cfg.convention)
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} suites passed")
    return EXIT_VERIFY if failed else EXIT_OK


COMMANDS = {"enumerate": cmd_enumerate, "shapes": cmd_shapes, "fetch": cmd_fetch,
            "weyl": cmd_weyl, "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cubic-shapes", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, enum=True):
        if enum:
            sp.add_argument("--dual", action="store_true", help="restrict to forms with 3 | b, c")
            sp.add_argument("--shards", type=int, default=1)
            sp.add_argument("--threads", type=int, default=1)
            sp.add_argument("--checkpoint")
            sp.add_argument("--max-records", type=int)
        sp.add_argument("--output", "-o")
        sp.add_argument("--offline", action="store_true")
        sp.add_argument("--cache-dir")
        sp.add_argument("--base-url", default=spectral.DEFAULT_BASE_URL)

    e = sub.add_parser("enumerate", help="enumerate SL2(Z)-classes with |D| <= max")
    e.add_argument("--max-disc", type=_int_like, required=True)
    common(e)
    s = sub.add_parser("shapes", help="write reduced shape points")
    s.add_argument("--max-disc", type=_int_like, required=True)
    common(s)
    f = sub.add_parser("fetch", help="download Maass-form coefficients into the cache")
    f.add_argument("label")
    common(f, enum=False)
    w = sub.add_parser("weyl", help="smoothed Weyl sums over a grid of X")
    w.add_argument("--phi", default="const")
    w.add_argument("--no-constant-term", action="store_true", help="Eisenstein: drop the constant term")
    w.add_argument("--max", type=_number, help="largest X; grid is the decades 10^3 .. max")
    w.add_argument("--grid", help="comma-separated X values")
    w.add_argument("--cutoff", default="0.5,0.75,1,1.25", help="alpha,alpha',beta',beta")
    w.add_argument("--mode", default="both", choices=["raw", "averaged", "both"])
    w.add_argument("--format", default="csv", choices=["csv", "json"])
    common(w)
    v = sub.add_parser("verify", help="run the invariant suites")
    v.add_argument("--quick", action="store_true")
    v.add_argument("--convention", action="store_true", help="only the half-plane convention self-test")
    return p


def _grid(args) -> list:
    if args.grid:
        return [float(x) for x in args.grid.split(",") if x.strip()]
    if args.max:
        out, X = [], 1000.0
        while X < args.max:
            out.append(X)
            X *= 10
        return out + [float(args.max)]
    return []


def config_from_args(args) -> RunConfig:
    cfg = RunConfig(command=args.command)
    for name in ("shards", "threads", "offline", "output", "checkpoint", "max_records", "base_url", "cache_dir"):
        if hasattr(args, name):
            setattr(cfg, name, getattr(args, name))
    if getattr(args, "dual", False):
        cfg.lattice = "Lhat"
    if hasattr(args, "max_disc"):
        cfg.max_disc = args.max_disc
    if args.command == "weyl":
        cfg.phi = args.phi
        cfg.constant_term = not args.no_constant_term
        cfg.mode = args.mode
        cfg.fmt = args.format
        try:
            cfg.grid = _grid(args)
            cfg.cutoff = tuple(float(v) for v in args.cutoff.split(","))
        except ValueError as e:
            raise ConfigError(f"bad number: {e}") from e
        if len(cfg.cutoff) != 4:
            raise ConfigError("--cutoff takes four numbers")
        cfg.max_disc = math.floor(cfg.cutoff[3] * max(cfg.grid)) if cfg.grid else 0
    if args.command == "fetch":
        cfg.label = args.label
    if args.command == "verify":
        cfg.quick, cfg.convention = args.quick, args.convention
    return cfg.validate()


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = config_from_args(args)
        if cfg.command != "verify":
            shapes.check_convention(50)
        return COMMANDS[cfg.command](cfg)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except spectral.OfflineCacheMiss as e:
        print(f"data shortfall: {e}", file=sys.stderr)
        return EXIT_SHORTFALL
    except spectral.FetchError as e:
        print(f"network failure: {e}", file=sys.stderr)
        return EXIT_NETWORK
    except (lseries.EnumerationShortfall, aut.TruncationError, en.EnumerationCeilingError,
            spectral.SpectralDataError) as e:
        print(f"data shortfall: {e}", file=sys.stderr)
        return EXIT_SHORTFALL
    except shapes.ConventionError as e:
        print(f"verification failure: {e}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())

"""Weyl-sum decay experiment: |S(X)|/N(X) and fitted exponents in raw and averaged modes."""

import argparse
import json
import time
from dataclasses import dataclass

from cubic_shapes import automorphic as aut
from cubic_shapes import enumeration as en
from cubic_shapes import lseries


@dataclass
class DecayConfig:
    grid: tuple = (1e3, 3e3, 1e4, 3e4, 1e5)
    z: complex = 2j
    constant_term: bool = False
    shards: int = 1
    out: str = "decay_experiment.json"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grid", default="1000,3000,10000,30000,100000")
    ap.add_argument("--z", default="2j")
    ap.add_argument("--with-constant-term", action="store_true")
    ap.add_argument("--shards", type=int, default=1)
    ap.add_argument("-o", "--out", default="decay_experiment.json")
    a = ap.parse_args()
    cfg = DecayConfig(tuple(float(x) for x in a.grid.split(",")), complex(a.z), a.with_constant_term, a.shards, a.out)

    psi = lseries.SmoothCutoff()
    X = int(psi.beta * max(cfg.grid))
    t0 = time.perf_counter()
    table = lseries.ShapeTable(en.enumerate_classes(X, shards=cfg.shards), X, assume_canonical=True)
    print(f"enumerated {len(table.records)} classes with |D| <= {X} in {time.perf_counter() - t0:.1f}s")
    phi = aut.Eisenstein(cfg.z, cfg.constant_term)
    res = lseries.decay_experiment(cfg.grid, phi, psi, table)
    blob = {}
    for mode, tab in res.items():
        print(f"\n[{mode}]  phi={tab.phi}")
        print(f"{'X':>10} {'|S+|/N+':>12} {'|S-|/N-':>12}")
        for row, rp, rm in zip(tab.rows, tab.extra["ratios"]["+"], tab.extra["ratios"]["-"]):
            print(f"{row[0]:>10.0f} {rp:>12.3e} {rm:>12.3e}")
        for k, f in tab.extra["fits"].items():
            print(f"  exponent of |{k}|: {f['exponent']:.3f} +- {f['stderr']:.3f}")
        blob[mode] = json.loads(tab.to_json())
    with open(cfg.out, "w") as fh:
        json.dump(blob, fh, indent=2, sort_keys=True)
    print(f"\nwrote {cfg.out}")


if __name__ == "__main__":
    main()

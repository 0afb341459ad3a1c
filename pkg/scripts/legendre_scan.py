"""Nilpotency of the Legendre p-curvature across a prime range."""

from __future__ import annotations

import argparse
import time
from dataclasses import dataclass

from isocurve.algebra import primes_in_range
from isocurve.connection import build_legendre, katz_scan


@dataclass
class Config:
    lo: int = 2
    hi: int = 31


def main(cfg: Config) -> None:
    conn = build_legendre()
    t0 = time.perf_counter()
    scan = katz_scan(conn, primes_in_range(cfg.lo, cfg.hi))
    for o in scan.outcomes:
        order = o.nilpotency_order if o.status == "nonzero" else "-"
        print(f"p={o.p:<4d} {o.status:<14s} nilpotency order {order}")
    print(scan.verdict())
    print(f"{time.perf_counter() - t0:.2f}s")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lo", type=int, default=Config.lo)
    ap.add_argument("--hi", type=int, default=Config.hi)
    a = ap.parse_args()
    main(Config(a.lo, a.hi))

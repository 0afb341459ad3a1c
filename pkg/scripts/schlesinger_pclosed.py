"""p-closedness of the Schlesinger foliation for small primes and ranks."""

from __future__ import annotations

import argparse
import time
from dataclasses import dataclass, field

from isocurve.algebra import PrimeField
from isocurve.foliation import build_schlesinger, p_closed_test


@dataclass
class Config:
    n: int = 3
    r: int = 2
    primes: list[int] = field(default_factory=lambda: [3, 5])


def main(cfg: Config) -> None:
    for p in cfg.primes:
        t0 = time.perf_counter()
        F = build_schlesinger(cfg.n, cfg.r, PrimeField(p))
        res = p_closed_test(F, p)
        if res.closed:
            line = "p-closed"
        else:
            j, y, val = res.certificate
            line = f"certificate D_{j}^{p}({y}) with {len(val.num.terms)} numerator terms"
        print(f"n={cfg.n} r={cfg.r} p={p}: {line} ({time.perf_counter() - t0:.2f}s)")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=Config.n)
    ap.add_argument("--r", type=int, default=Config.r)
    ap.add_argument("--primes", type=int, nargs="+", default=Config().primes)
    a = ap.parse_args()
    main(Config(a.n, a.r, a.primes))

"""Random trials of the chart-level inverse Cartier identities."""

from __future__ import annotations

import argparse
import random
import time
from dataclasses import dataclass, field

from isocurve.algebra import PolyRing, PrimeField, parse_in_ring
from isocurve.cartier import FrobeniusLift, nonabelian_katz_check, ov_check
from isocurve.sampling import random_nilpotent


@dataclass
class Config:
    primes: list[int] = field(default_factory=lambda: [5, 7, 11])
    lifts: list[str] = field(default_factory=lambda: ["0", "x", "x^2"])
    trials: int = 5
    rank: int = 3
    seed: int = 0


def main(cfg: Config) -> None:
    rng = random.Random(cfg.seed)
    for p in cfg.primes:
        ring = PolyRing(PrimeField(p), ["x"])
        t0 = time.perf_counter()
        ok = total = 0
        for _ in range(cfg.trials):
            order = rng.randint(1, min(cfg.rank, p - 1))
            theta = random_nilpotent(rng, ring, "x", cfg.rank, order, 2)
            lift = FrobeniusLift("x", parse_in_ring(rng.choice(cfg.lifts), ring), p)
            ok += ov_check(theta, lift, p).passed and nonabelian_katz_check(theta, lift, p).passed
            total += 1
        print(f"p={p}: {ok}/{total} pass ({time.perf_counter() - t0:.2f}s)")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--primes", type=int, nargs="+", default=Config().primes)
    ap.add_argument("--trials", type=int, default=Config.trials)
    ap.add_argument("--rank", type=int, default=Config.rank)
    ap.add_argument("--seed", type=int, default=Config.seed)
    a = ap.parse_args()
    main(Config(primes=a.primes, trials=a.trials, rank=a.rank, seed=a.seed))

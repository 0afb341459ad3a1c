"""Classify integer points of a box by the fate of their mapping-class-group orbit.

Each point is tagged finite (with orbit size) or exceeded; the script prints
the finite orbits grouped by the level ``kappa``.
"""

from __future__ import annotations

import argparse
from collections import defaultdict
from dataclasses import dataclass

from isocurve.betti import NumberRingPoint, kappa, orbit_search


@dataclass
class Config:
    radius: int = 3
    height_bound: int = 50
    node_cap: int = 20000


def main(cfg: Config) -> None:
    seen: set = set()
    finite = defaultdict(list)
    exceeded = capped = 0
    rng = range(-cfg.radius, cfg.radius + 1)
    for x in rng:
        for y in rng:
            for z in rng:
                pt = NumberRingPoint.integers(x, y, z)
                if pt.key in seen:
                    continue
                res = orbit_search(pt, cfg.height_bound, cfg.node_cap)
                if res.status == "finite":
                    seen.update(q.key for q in res.orbit)
                    finite[kappa(pt)[0]].append((res.size, str(min(res.orbit, key=lambda q: q.key))))
                elif res.status == "exceeded":
                    exceeded += 1
                else:
                    capped += 1
    for k in sorted(finite):
        orbits = ", ".join(f"{rep} [{n}]" for n, rep in sorted(finite[k], key=lambda t: t[1]))
        print(f"kappa = {k:>4d}: {orbits}")
    print(f"exceeded: {exceeded}  capped: {capped}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--radius", type=int, default=Config.radius)
    ap.add_argument("--height-bound", type=int, default=Config.height_bound)
    ap.add_argument("--node-cap", type=int, default=Config.node_cap)
    a = ap.parse_args()
    main(Config(a.radius, a.height_bound, a.node_cap))

"""Distribution of the 2x2 Bessel margin at p = 2/3 over random (C, t)."""

import argparse
import json

import numpy as np

from wrenyi import distributions as dist
from wrenyi import inequalities as iq


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=20160921)
    args = ap.parse_args()
    rng = dist.as_generator(args.seed, 7)
    margins, gaps = [], []
    for _ in range(args.count):
        rep = iq.bessel_2x2_inequality(dist.random_spd(rng, 2), rng.normal(size=2))
        margins.append(rep.margin)
        gaps.append(abs(rep.details["assembly_gap"]))
    m = np.asarray(margins)
    print(json.dumps({
        "count": args.count,
        "rhs_constant": iq.BESSEL_2X2_CONSTANT,
        "violated": int(np.sum(m < 0)),
        "margin_quantiles": np.quantile(m, [0.0, 0.1, 0.5, 0.9, 1.0]).tolist(),
        "max_assembly_gap": max(gaps),
    }, indent=2))


if __name__ == "__main__":
    main()

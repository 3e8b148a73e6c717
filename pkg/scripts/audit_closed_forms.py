"""Closed-form weighted Renyi entropy of g_{p,C} against Monte Carlo, over several seeds."""

import argparse
import json

import numpy as np

from wrenyi import closedforms as cf
from wrenyi import distributions as dist
from wrenyi import weightfn
from wrenyi.entropy import EstimatorConfig, weighted_renyi_entropy


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--samples", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=20160921)
    args = ap.parse_args()
    rng = dist.as_generator(args.seed, 2)
    rows = []
    for n in (1, 2, 3):
        C = dist.random_spd(rng, n, 0.5, 2.0)
        for p in (0.6, 0.8, 1.5, 3.0):
            if p < 1 and not p > dist.min_exponent(n):
                continue
            for name, w in (("one", weightfn.constant(1.0, n)), ("quad", weightfn.quadratic(n))):
                if not cf.wre_is_finite(w, p, p, n):
                    continue
                closed = cf.wre_closed(w, p, p, C).value
                z = []
                for s in range(args.seeds):
                    cfg = EstimatorConfig(samples=args.samples, seed=args.seed + s, method="monte_carlo")
                    est = weighted_renyi_entropy(dist.MaximizerDensity(p, C), w, p, cfg)
                    z.append((est.value - closed) / est.error)
                rows.append({"n": n, "p": p, "weight": name, "closed": closed,
                             "z_mean": float(np.mean(z)), "z_sd": float(np.std(z, ddof=1)), "z_max": float(np.max(np.abs(z)))})
                print(json.dumps(rows[-1]))


if __name__ == "__main__":
    main()

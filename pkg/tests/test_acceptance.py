"""Acceptance criteria, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line (run with ``-s`` to see
them inline; they are also collected into the terminal summary).  Tolerances
and runtime budgets are the criteria's own.
"""

import json
import math
import re
import time

import numpy as np
import pytest
from scipy import stats

from conftest import ACCEPTANCE_LINES
from wrenyi import cli
from wrenyi import closedforms as cf
from wrenyi import distributions as dist
from wrenyi import inequalities as iq
from wrenyi import maximality as mx
from wrenyi import projection as pj
from wrenyi import specfun, weightfn
from wrenyi.entropy import EstimatorConfig, weighted_renyi_entropy

SEED = 20160921
KS_ALPHA = 1e-3


def record(number, ok, detail, elapsed, budget):
    within = elapsed < budget
    status = "PASS" if ok and within else "FAIL"
    line = f"{status} criterion {number}: {detail} ({elapsed:.1f}s of {budget:g}s)"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line
    assert within, line


def mc(n_samples, *keys):
    return EstimatorConfig(samples=n_samples, seed=SEED, method="monte_carlo", keys=tuple(keys))


def test_criterion_01_normalization():
    t0 = time.perf_counter()
    heavy, light = [], []
    for n in (1, 2, 3, 4, 5):
        lo = dist.min_exponent(n)
        for u in (0.1, 0.35, 0.6, 0.9):
            heavy.append((lo + u * (1 - lo), n))
        for p in (1.05, 1.5, 3.0, 20.0):
            light.append((p, n))
    err_h = max(abs(cf.varpi_star(p, 1.0, n) - 1) for p, n in heavy)
    err_l = max(abs(cf.varpi(p, 1.0, n) - 1) for p, n in light)
    ok = len(heavy) == len(light) == 20 and max(err_h, err_l) <= 1e-12
    record(1, ok, f"max |varpi*-1|={err_h:.1e}, max |varpi-1|={err_l:.1e} on 20+20 pairs", time.perf_counter() - t0, 1)


def test_criterion_02_closed_form_wre_vs_mc():
    t0 = time.perf_counter()
    rng = dist.as_generator(SEED, 2)
    rows, skipped, bad = 0, [], []
    for n in (1, 2, 3):
        C = dist.random_spd(rng, n, 0.5, 2.0)
        for p in (0.6, 0.8, 1.5, 3.0):
            if p < 1 and not p > dist.min_exponent(n):
                continue
            for name, w in (("one", weightfn.constant(1.0, n)), ("quad", weightfn.quadratic(n))):
                if not cf.wre_is_finite(w, p, p, n):
                    skipped.append((n, p, name))
                    continue
                closed = cf.wre_closed(w, p, p, C)
                est = weighted_renyi_entropy(dist.MaximizerDensity(p, C), w, p, mc(1_000_000, n, int(p * 10), len(name)))
                rows += 1
                if abs(closed.value - est.value) > 3 * math.hypot(est.error, closed.error):
                    bad.append((n, p, name, closed.value, est.value, est.error))
    ok = rows > 0 and not bad
    detail = f"{rows - len(bad)}/{rows} within 3 SE at 1e6 samples, skipped infinite {skipped}"
    if bad:
        detail += f", outside: {bad}"
    record(2, ok, detail, time.perf_counter() - t0, 120)


def test_criterion_03_eta_closed_forms_vs_mc():
    t0 = time.perf_counter()
    n = 2
    cases = []
    for mu in (4.0, 5.0, 6.0, 8.0, 12.0, 20.0):
        law = dist.PearsonDistribution("VII", mu, n)
        cases.append(("VII quad", mu, law, weightfn.quadratic(n), cf.eta_star_quadratic(mu, n)))
        cases.append(("VII const", mu, law, weightfn.constant(1.0, n), cf.eta_star_constant(mu, n)))
    for mu in (-0.5, 0.0, 0.5, 1.0, 2.0, 4.0):
        law = dist.PearsonDistribution("II", mu, n)
        cases.append(("II quad", mu, law, weightfn.quadratic(n), cf.eta_quadratic(mu, n)))
        cases.append(("II log", mu, law, weightfn.log_quadratic(n), cf.eta_log(mu, n)))
        cases.append(("II const", mu, law, weightfn.constant(1.0, n), cf.eta_constant(mu, n)))
    bad = []
    for i, (name, mu, law, w, exact) in enumerate(cases):
        est = cf.eta_mc(w, law, mc(400_000, 3, i))
        if abs(est.value - exact) > 3 * est.error:
            bad.append((name, mu, exact, est.value, est.error))
    ok = not bad
    detail = f"{len(cases) - len(bad)}/{len(cases)} eta values within 3 SE (6 mu per family)"
    if bad:
        detail += f", outside: {bad}"
    record(3, ok, detail, time.perf_counter() - t0, 60)


def test_criterion_04_bessel_identities():
    t0 = time.perf_counter()
    sym = max(
        abs(specfun.bessel_k(lam, z) - specfun.bessel_k(-lam, z)) / specfun.bessel_k(lam, z)
        for lam in (0.3, 1.5, 2.7, 6.0)
        for z in (0.1, 1.0, 5.0, 20.0)
    )
    half = max(
        abs(specfun.bessel_k_quad(0.5, z).value - math.sqrt(math.pi / (2 * z)) * math.exp(-z))
        / (math.sqrt(math.pi / (2 * z)) * math.exp(-z))
        for z in (0.05, 0.5, 2.0, 10.0)
    )
    rng = dist.as_generator(SEED, 4)
    bad = []
    for i in range(5):
        n = int(rng.integers(1, 4))
        lo = dist.min_exponent(n)
        p = float(rng.uniform(lo + 0.1 * (1 - lo), 1 - 0.05))
        C = dist.random_spd(rng, n, 0.3, 3.0)
        t = rng.normal(size=n)
        exact = cf.alpha_star_bessel(t, p, C)
        cos_w = weightfn.custom(lambda x, t=t: np.cos(x @ t), n, degree=0)
        est = cf.alpha_star(cos_w, p, C, mc(400_000, 4, i))
        if abs(est.value - exact) > 3 * est.error:
            bad.append((n, p, exact, est.value, est.error))
    ok = sym <= 1e-10 and half <= 1e-9 and not bad
    detail = f"symmetry rel err {sym:.1e}, K_1/2 quadrature rel err {half:.1e}, alpha* Bessel vs MC {5 - len(bad)}/5"
    if bad:
        detail += f", outside: {bad}"
    record(4, ok, detail, time.perf_counter() - t0, 30)


def test_criterion_05_projection():
    t0 = time.perf_counter()
    ps = np.geomspace(0.01, 500.0, 50)
    d2 = max(abs(pj.delta_n(p, 2) - 2 / p) / (2 / p) for p in ps)
    inv = 0.0
    for n in (1, 2, 3, 5):
        for p in ps:
            inv = max(inv, abs(pj.solve_p_star(pj.delta_n(p, n), n).p_star - p) / p)
    bad = []
    for i, (deg, n) in enumerate(((3, 1), (5, 1), (3, 2), (7, 2), (5, 3))):
        res = pj.closest_degree(pj.MixtureSpec.single(deg, n), weightfn.constant(1.0, n), mc(200_000, 5, i))
        if abs(res.p_star - deg) > 3 * res.p_star_error:
            bad.append((deg, n, res.p_star, res.p_star_error))
    ok = d2 <= 1e-10 and inv <= 1e-9 and not bad
    detail = f"Delta_2 rel err {d2:.1e} (50 pts), inverse rel err {inv:.1e}, single-component recovery {5 - len(bad)}/5"
    if bad:
        detail += f", outside: {bad}"
    record(5, ok, detail, time.perf_counter() - t0, 30)


def test_criterion_06_extended_hadamard():
    t0 = time.perf_counter()
    rng = dist.as_generator(SEED, 6)
    one, quad = weightfn.constant(1.0), weightfn.quadratic(1)
    p_grid = (0.85, 0.9, 1.5, 3.0)
    random_bad, random_count = [], 0
    for i in range(100):
        n = 2 + i % 2
        p = p_grid[(i // 2) % 4]
        factors = [one] * n if (i // 8) % 2 == 0 else [quad] * n
        C = dist.random_spd(rng, n)
        rep = iq.check_hadamard(C, factors, p, mc(100_000, 6, i))
        random_count += 1
        if rep.margin < -3 * rep.uncertainty:
            random_bad.append((i, n, p, round(rep.margin, 4)))
    diag_bad = []
    for i in range(20):
        n = 2 + i % 2
        p = p_grid[i % 4]
        factors = [one] * n if (i // 4) % 2 == 0 else [quad] * n
        C = np.diag(np.exp(rng.uniform(math.log(0.1), math.log(10.0), size=n)))
        rep = iq.check_hadamard(C, factors, p, mc(100_000, 60, i))
        if abs(rep.margin) > 3 * rep.uncertainty:
            diag_bad.append((n, p, round(rep.margin, 5)))
    ok = not random_bad and not diag_bad
    detail = (
        f"random SPD margin >= -3u on {random_count - len(random_bad)}/{random_count}; "
        f"diagonal |margin| <= 3u on {20 - len(diag_bad)}/20"
    )
    if random_bad:
        detail += f"; random failures {random_bad[:5]}"
    if diag_bad:
        detail += f"; diagonal margins {sorted(set(diag_bad))[:8]}"
    record(6, ok, detail, time.perf_counter() - t0, 300)


def test_criterion_07_bessel_2x2():
    t0 = time.perf_counter()
    rng = dist.as_generator(SEED, 7)
    margins = []
    for _ in range(20):
        C = dist.random_spd(rng, 2)
        t = rng.normal(size=2)
        rep = iq.bessel_2x2_inequality(C, t)
        margins.append(rep.margin)
    bad = [m for m in margins if m < -3 * 0.0]
    ok = not bad
    detail = f"holds on {20 - len(bad)}/20 with RHS log(3 pi^(2/3)/4) = {iq.BESSEL_2X2_CONSTANT:.5f}; min margin {min(margins):.4f}"
    record(7, ok, detail, time.perf_counter() - t0, 30)


def test_criterion_08_equality_chain():
    t0 = time.perf_counter()
    C = np.array([[1.2, 0.3], [0.3, 0.7]])
    bad, count = [], 0
    for i, p in enumerate((0.7, 0.9, 1.0, 1.5, 3.0)):
        g = dist.MaximizerDensity(p, C)
        for j, w in enumerate((weightfn.constant(1.0, 2), weightfn.quadratic(2))):
            cfg = mc(200_000, 8, i, j)
            reps = [mx.check_max_wre(g, w, p, C, cfg)]
            if p == 1.0:
                reps.append(mx.check_condition_2(g, w, C, cfg))
            else:
                reps.append(mx.check_condition_1(g, w, p, C, cfg))
                reps.append(mx.check_theorem_2_2(g, w, p, C, cfg))
            for rep in reps:
                for r in [rep] + rep.clauses:
                    count += 1
                    if abs(r.margin) > 3 * r.uncertainty + 1e-12 * max(1.0, abs(r.margin)):
                        bad.append((p, w.kind, r.name, r.margin, r.uncertainty))
    ok = not bad
    detail = f"|margin| <= 3u on {count - len(bad)}/{count} reports and clauses with f = g"
    if bad:
        detail += f", outside: {bad}"
    record(8, ok, detail, time.perf_counter() - t0, 120)


def test_criterion_09_mixture_bound():
    t0 = time.perf_counter()
    rng = dist.as_generator(SEED, 9)
    one = weightfn.constant(1.0, 2)
    bad = []
    for i in range(50):
        comps = [dist.gaussian(dist.random_spd(rng, 2)), dist.gaussian(dist.random_spd(rng, 2))]
        s = float(rng.uniform(0.05, 0.95))
        p = 0.5 if i % 2 == 0 else 2.0
        rep = mx.mixture_lower_bound(comps, [s, 1 - s], one, p, mc(100_000, 9, i))
        if rep.margin < -3 * rep.uncertainty:
            bad.append((i, p, rep.margin, rep.uncertainty))
    ok = not bad
    detail = f"margin >= -3 SE on {50 - len(bad)}/50 mixtures"
    if bad:
        detail += f", outside: {bad}"
    record(9, ok, detail, time.perf_counter() - t0, 120)


def test_criterion_10_sampler_validity():
    t0 = time.perf_counter()
    pvals = {}
    for i, (fam, mu, n) in enumerate((("VII", 1.2, 1), ("VII", 3.0, 2), ("VII", 5.0, 3), ("II", -0.5, 1), ("II", 0.0, 2), ("II", 2.0, 3))):
        d = dist.PearsonDistribution(fam, mu, n)
        t = d.radial_statistic(d.sample(dist.as_generator(SEED, 10, i), 100_000))
        pvals[f"{fam}({mu},{n})"] = stats.kstest(t, d.radial_law().cdf).pvalue
    C = np.array([[1.0, 0.4], [0.4, 2.0]])
    for i, p in enumerate((0.8, 0.95, 1.0, 1.5, 3.0)):
        g = dist.MaximizerDensity(p, C)
        t = g.radial_statistic(g.sample(dist.as_generator(SEED, 11, i), 100_000))
        pvals[f"g({p})"] = stats.kstest(t, g.radial_law().cdf).pvalue
    p = 2.0
    CX, CY = np.array([[1.0]]), np.array([[0.6]])
    x = dist.MaximizerDensity(p, CX).sample(dist.as_generator(SEED, 12, 0), 100_000)
    y = dist.MaximizerDensity(p, CY).sample(dist.as_generator(SEED, 12, 1), 100_000)
    z = dist.convolve_p(x, y, CX, CY, p, dist.as_generator(SEED, 12, 2))
    g = dist.MaximizerDensity(p, CX + CY)
    pvals["convolve_p(n=1,p=2)"] = stats.kstest(g.radial_statistic(z), g.radial_law().cdf).pvalue
    low = {k: v for k, v in pvals.items() if v <= KS_ALPHA}
    ok = not low
    detail = f"{len(pvals) - len(low)}/{len(pvals)} KS tests pass at alpha=0.001 (min p-value {min(pvals.values()):.3g})"
    if low:
        detail += f", rejected: {low}"
    record(10, ok, detail, time.perf_counter() - t0, 120)


def test_criterion_11_sherman_morrison():
    t0 = time.perf_counter()
    rng = dist.as_generator(SEED, 13)
    gaps = []
    for i in range(20):
        n = 2 + i % 2
        A = dist.random_spd(rng, n)
        v = rng.normal(size=n)
        p = 0.9 if i % 2 == 0 else 2.0
        w = weightfn.quadratic(n) if i % 4 < 2 else weightfn.constant(1.0, n)
        rep = iq.sherman_morrison_condition(A, np.outer(v, v), w, p, mc(50_000, 13, i))
        gaps.append(rep.details["equivalence_gap"])
    ok = max(gaps) <= 1e-8
    record(11, ok, f"max relative gap rewrite vs direct {max(gaps):.1e} on 20 rank-one perturbations", time.perf_counter() - t0, 30)


_STAMP = re.compile(r'^\s*"' + cli.TIMESTAMP_KEY + r'": .*\n', re.M)


def test_criterion_12_determinism(tmp_path):
    from pathlib import Path

    t0 = time.perf_counter()
    scen = Path(__file__).resolve().parent.parent / "scenarios"
    runs = [
        ["verify-max", scen / "verify_max.json", "--samples", "20000"],
        ["verify-hadamard", scen / "hadamard_sweep.json", "--sweep", "5"],
        ["verify-matrix-sum", scen / "matrix_sum.json", "--samples", "20000"],
        ["sample", scen / "sample.json"],
        ["entropy", scen / "entropy_gaussian.json"],
    ]
    mismatched = []
    for k, argv in enumerate(runs):
        texts = []
        for rep in range(2):
            out = tmp_path / f"r{k}_{rep}.txt"
            code = cli.main([str(a) for a in argv] + ["--seed", "12345", "--out", str(out)])
            assert code in (0, 2, 3)
            texts.append(_STAMP.sub("", out.read_text()))
        if texts[0] != texts[1]:
            mismatched.append(argv[0])
    ok = not mismatched
    record(12, ok, f"{len(runs) - len(mismatched)}/{len(runs)} subcommands byte-identical modulo {cli.TIMESTAMP_KEY}", time.perf_counter() - t0, 10)

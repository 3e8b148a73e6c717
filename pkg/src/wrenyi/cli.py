"""Command line entry point: ``wrenyi <subcommand> SCENARIO.json [flags]``.

Every subcommand reads a JSON scenario, validates it against the schema
shipped in ``wrenyi/schemas`` and writes a JSON (or CSV) report.  All
randomness derives from ``--seed``: sweep item ``i`` and each estimator
role draw from their own SeedSequence sub-streams, so results do not
depend on evaluation order.

Exit codes: 0 holds / success, 1 usage or configuration error,
2 violated, 3 inconclusive.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from importlib import resources
from typing import Optional

import numpy as np

from . import closedforms as cf
from . import distributions as dist
from . import entropy as ent
from . import inequalities as ineq
from . import maximality, projection, specfun, weightfn
from .errors import ConfigError, WrenyiError
from .reports import HOLDS, INCONCLUSIVE, VIOLATED, InequalityReport

DEFAULT_SEED = 20160921
DEFAULT_SAMPLES = 100_000
SCHEMA_VERSION = 1
TIMESTAMP_KEY = "generated_at"

SUBCOMMANDS = (
    "specfun",
    "sample",
    "entropy",
    "closedform",
    "verify-max",
    "solve-pstar",
    "verify-hadamard",
    "verify-block",
    "verify-matrix-sum",
)

EXIT_OK, EXIT_CONFIG, EXIT_VIOLATED, EXIT_INCONCLUSIVE = 0, 1, 2, 3

# sub-stream key for sweep instance generation
_SWEEP_KEY = 101


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    scenario_path: str
    seed: int = DEFAULT_SEED
    samples: int = DEFAULT_SAMPLES
    tolerance: float = 3.0
    output: str = "json"
    output_path: Optional[str] = None
    dry_run: bool = False
    sweep: int = 0

    def estimator(self, *keys) -> ent.EstimatorConfig:
        return ent.EstimatorConfig(samples=self.samples, seed=self.seed, keys=tuple(keys))


# ---------------------------------------------------------------- scenario loading


def _schema_text(name):
    return resources.files("wrenyi").joinpath("schemas", name).read_text(encoding="utf-8")


def _validator(subcommand):
    import jsonschema
    from referencing import Registry, Resource

    common = json.loads(_schema_text("common.schema.json"))
    schema = json.loads(_schema_text(f"{subcommand}.schema.json"))
    registry = Registry().with_resource(common["$id"], Resource.from_contents(common))
    return jsonschema.Draft202012Validator(schema, registry=registry)


def _pointer(path):
    parts = [str(p).replace("~", "~0").replace("/", "~1") for p in path]
    return "/" + "/".join(parts) if parts else "/"


def load_scenario(subcommand, path):
    """Parse and validate a scenario file; schema violations raise ConfigError with a JSON pointer."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg} (line {exc.lineno})") from None
    return validate_scenario(subcommand, doc)


def _matrix(doc, key):
    if key not in doc:
        raise ConfigError("required field missing", f"/{key}")
    m = np.asarray(doc[key], dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ConfigError("matrix must be square", f"/{key}")
    return m


def _spd(doc, key):
    m = _matrix(doc, key)
    try:
        return dist.check_spd(m, key)
    except WrenyiError as exc:
        raise ConfigError(str(exc), f"/{key}") from None


def _weight(doc, key, dimension):
    spec = doc.get(key)
    if spec is None:
        return weightfn.constant(1.0, dimension)
    try:
        return weightfn.from_dict(spec, dimension)
    except (WrenyiError, KeyError) as exc:
        raise ConfigError(str(exc), f"/{key}") from None


def _density(doc, key):
    try:
        return dist.from_dict(doc[key])
    except (WrenyiError, KeyError, ValueError) as exc:
        raise ConfigError(str(exc), f"/{key}") from None


# ---------------------------------------------------------------- subcommands


def _aggregate(reports):
    verdicts = [r.verdict for r in reports]
    if VIOLATED in verdicts:
        return VIOLATED
    if INCONCLUSIVE in verdicts:
        return INCONCLUSIVE
    return HOLDS


def _estimate_dict(e: ent.EntropyEstimate):
    out = {"value": e.value, "error": e.error, "method": e.method, "count": int(e.count)}
    return out


def cmd_specfun(doc, cfg: RunConfig):
    plan = [(ev["function"], list(ev["args"])) for ev in doc["evaluations"]]
    if cfg.dry_run:
        return {"evaluations": len(plan)}, []
    results = []
    for name, args in plan:
        try:
            value = specfun.FUNCTIONS[name](*args)
            results.append({"function": name, "args": args, "value": float(value)})
        except WrenyiError as exc:
            results.append({"function": name, "args": args, "error": f"{type(exc).__name__}: {exc}"})
    return {"results": results}, []


def cmd_sample(doc, cfg: RunConfig):
    f = _density(doc, "density")
    count = int(doc.get("count", cfg.samples))
    if cfg.dry_run:
        return {"dimension": f.dimension, "count": count}, []
    x = f.sample(dist.as_generator(cfg.seed), count)
    return {"samples": x}, []


_FUNCTIONALS = {
    "weighted_entropy": lambda f, g, w, p, c: ent.weighted_entropy(f, w, c),
    "weighted_renyi_entropy": lambda f, g, w, p, c: ent.weighted_renyi_entropy(f, w, p, c),
    "relative_weighted_entropy": lambda f, g, w, p, c: ent.relative_weighted_entropy(f, g, w, c),
    "relative_weighted_renyi": lambda f, g, w, p, c: ent.relative_weighted_renyi(f, g, w, p, c),
    "weighted_renyi_power": lambda f, g, w, p, c: ent.weighted_renyi_power(f, g, w, p, c),
    "csiszar_weighted_divergence": lambda f, g, w, p, c: ent.csiszar_weighted_divergence(f, g, w, p, c),
    "weighted_mean": lambda f, g, w, p, c: ent.weighted_mean(f, w, c),
}

_NEEDS_P = {"weighted_renyi_entropy", "relative_weighted_renyi", "weighted_renyi_power", "csiszar_weighted_divergence"}
_NEEDS_REF = {"relative_weighted_entropy", "relative_weighted_renyi", "weighted_renyi_power", "csiszar_weighted_divergence"}


def cmd_entropy(doc, cfg: RunConfig):
    name = doc.get("functional", "weighted_entropy")
    f = _density(doc, "density")
    g = _density(doc, "reference") if "reference" in doc else None
    if name in _NEEDS_REF and g is None:
        raise ConfigError("this functional needs a reference density", "/reference")
    if name in _NEEDS_P and "p" not in doc:
        raise ConfigError("this functional needs p", "/p")
    w = _weight(doc, "weight", f.dimension)
    if cfg.dry_run:
        return {"functional": name}, []
    ec = ent.EstimatorConfig(samples=cfg.samples, seed=cfg.seed, method=doc.get("method", "auto"))
    est = _FUNCTIONALS[name](f, g, w, doc.get("p"), ec)
    return {"functional": name, "result": _estimate_dict(est)}, []


def cmd_closedform(doc, cfg: RunConfig):
    C = _spd(doc, "C")
    n = C.shape[0]
    p = float(doc["p"])
    q = float(doc.get("q", p))
    w = _weight(doc, "weight", n)
    if cfg.dry_run:
        return {"n": n}, []
    ec = cfg.estimator()
    res = cf.wre_closed(w, p, q, C, ec)
    out = {"wre": _estimate_dict(res), "p": p, "q": q, "n": n}
    if not dist.is_gaussian_exponent(p) and abs(q - 1) >= ent.P_LIMIT_BAND:
        out["log_varpi"] = cf.log_varpi_any(p, q, n)
        a = cf.escort_expectation(w, p, C, q, ec)
        out["alpha"] = _estimate_dict(a)
    return out, []


def cmd_verify_max(doc, cfg: RunConfig):
    f = _density(doc, "density")
    C = _spd(doc, "C")
    p = float(doc["p"])
    if C.shape[0] != f.dimension:
        raise ConfigError("C does not match the density dimension", "/C")
    w = _weight(doc, "weight", f.dimension)
    mix = None
    if "mixture_bound" in doc:
        mb = doc["mixture_bound"]
        try:
            comps = [dist.from_dict(c) for c in mb["components"]]
            weights = dist.validate_simplex(mb["weights"], tol=1e-10)
        except (WrenyiError, KeyError) as exc:
            raise ConfigError(str(exc), "/mixture_bound") from None
        mix = (comps, weights)
    if cfg.dry_run:
        return {"checks": "valid"}, []
    ec = cfg.estimator()
    k = cfg.tolerance
    reports = []
    if dist.is_gaussian_exponent(p):
        reports.append(maximality.check_condition_2(f, w, C, ec.child(1), k=k))
    else:
        reports.append(maximality.check_condition_1(f, w, p, C, ec.child(1), k=k))
    reports.append(maximality.check_max_wre(f, w, p, C, ec.child(2), k=k))
    if not dist.is_gaussian_exponent(p):
        reports.append(maximality.check_theorem_2_2(f, w, p, C, ec.child(3), k=k))
    if mix is not None:
        reports.append(maximality.mixture_lower_bound(mix[0], mix[1], w, p, ec.child(4), k=k))
    return {}, reports


def cmd_solve_pstar(doc, cfg: RunConfig):
    if "mixture" in doc:
        try:
            mix = projection.MixtureSpec.from_dict(doc["mixture"])
        except WrenyiError as exc:
            raise ConfigError(str(exc), "/mixture") from None
        w = _weight(doc, "weight", mix.dimension)
        if cfg.dry_run:
            return {"mixture": mix.to_dict()}, []
        est = projection.mixture_target(mix, w, cfg.estimator())
        res = projection.solve_p_star(est.value, mix.dimension, est.error)
    else:
        if cfg.dry_run:
            return {"target": doc["target"]}, []
        res = projection.solve_p_star(doc["target"], doc["dimension"])
    return res.to_dict(), []


def _sweep_items(doc, cfg: RunConfig, key, build):
    """Scenario instance(s): the literal one, or ``--sweep`` random ones from per-item streams."""
    if cfg.sweep:
        n = int(doc.get("n", np.shape(doc[key])[0] if key in doc else 0))
        if n < 1:
            raise ConfigError("a sweep needs the dimension n", "/n")
        return [build(dist.as_generator(cfg.seed, _SWEEP_KEY, i), n) for i in range(cfg.sweep)]
    if key not in doc:
        raise ConfigError("required field missing (or pass --sweep)", f"/{key}")
    return [None]


def cmd_verify_hadamard(doc, cfg: RunConfig):
    p = float(doc["p"])
    mats = _sweep_items(doc, cfg, "C", lambda rng, n: dist.random_spd(rng, n))
    if mats == [None]:
        mats = [_spd(doc, "C")]
    n = mats[0].shape[0]
    if "t" in doc and "weights" in doc:
        raise ConfigError("give either weights or t, not both", "/t")
    t = np.asarray(doc["t"], dtype=float) if "t" in doc else None
    if t is not None and t.shape != (n,):
        raise ConfigError("t needs one entry per dimension", "/t")
    if "weights" in doc:
        if len(doc["weights"]) != n:
            raise ConfigError("one weight factor per dimension is required", "/weights")
        factors = [_weight({"w": spec}, "w", 1) for spec in doc["weights"]]
    else:
        factors = [weightfn.constant(1.0, 1)] * n
    if cfg.dry_run:
        return {"instances": len(mats)}, []
    reports = []
    for i, C in enumerate(mats):
        if t is not None:
            r = ineq.check_hadamard_bessel(C, t, p, k=cfg.tolerance)
        else:
            r = ineq.check_hadamard(C, factors, p, cfg.estimator(i), k=cfg.tolerance)
        r.details["C"] = C.tolist()
        reports.append(r)
    return {}, reports


def cmd_verify_block(doc, cfg: RunConfig):
    p = float(doc["p"])
    n1, n2 = doc["partition"]
    part = ineq.BlockPartition(n1, n2)
    mode = doc.get("mode") or ("corollary_abs" if "lambdas" in doc else "matrix_bound" if "B" in doc else "subadditivity")
    if mode == "corollary_abs":
        if "lambdas" not in doc:
            raise ConfigError("corollary_abs needs lambdas", "/lambdas")
        if cfg.dry_run:
            return {"mode": mode}, []
        return {"mode": mode}, [ineq.check_corollary_abs(doc["lambdas"], part, p, cfg.estimator(), k=cfg.tolerance)]
    specs = doc.get("weights")
    ws = [_weight({"w": s}, "w", d) for s, d in zip(specs, (n1, n2))] if specs else [
        weightfn.constant(1.0, n1),
        weightfn.constant(1.0, n2),
    ]
    if mode == "matrix_bound":
        if cfg.sweep:
            def build(rng, n):
                return dist.random_spd(rng, n), rng.standard_normal((part.n, n))

            items = [build(dist.as_generator(cfg.seed, _SWEEP_KEY, i), int(doc.get("n", part.n))) for i in range(cfg.sweep)]
        else:
            items = [(_spd(doc, "C"), _matrix_any(doc, "B"))]
        if cfg.dry_run:
            return {"mode": mode, "instances": len(items)}, []
        reports = []
        for i, (C, B) in enumerate(items):
            r = ineq.check_block_matrix_bound(B, C, part, ws[0], ws[1], p, cfg.estimator(i), k=cfg.tolerance)
            r.details.update({"C": C.tolist(), "B": B.tolist()})
            reports.append(r)
        return {"mode": mode}, reports
    mats = _sweep_items(dict(doc, n=doc.get("n", part.n)), cfg, "C", lambda rng, n: dist.random_spd(rng, n))
    if mats == [None]:
        mats = [_spd(doc, "C")]
    if cfg.dry_run:
        return {"mode": mode, "instances": len(mats)}, []
    reports = []
    for i, C in enumerate(mats):
        r = ineq.check_block_subadditivity(C, part, ws[0], ws[1], p, cfg.estimator(i), k=cfg.tolerance)
        r.details["C"] = C.tolist()
        reports.append(r)
    return {"mode": mode}, reports


def _matrix_any(doc, key):
    if key not in doc:
        raise ConfigError("required field missing", f"/{key}")
    m = np.asarray(doc[key], dtype=float)
    if m.ndim != 2:
        raise ConfigError("expected a matrix", f"/{key}")
    return m


def cmd_verify_matrix_sum(doc, cfg: RunConfig):
    p = float(doc["p"])
    rank_one = bool(doc.get("rank_one", False))
    if cfg.sweep:
        n = int(doc.get("n", np.shape(doc["A"])[0] if "A" in doc else 0))
        if n < 1:
            raise ConfigError("a sweep needs the dimension n", "/n")

        def build(rng):
            A = dist.random_spd(rng, n)
            if rank_one:
                v = rng.standard_normal(n)
                return A, np.outer(v, v)
            return A, dist.random_spd(rng, n)

        items = [build(dist.as_generator(cfg.seed, _SWEEP_KEY, i)) for i in range(cfg.sweep)]
    else:
        items = [(_spd(doc, "A"), _matrix(doc, "B"))]
    n = items[0][0].shape[0]
    w = _weight(doc, "weight", n)
    if cfg.dry_run:
        return {"instances": len(items)}, []
    reports = []
    for i, (A, B) in enumerate(items):
        ec = cfg.estimator(i)
        r = ineq.check_matrix_sum(A, B, w, p, ec, k=cfg.tolerance)
        r.details.update({"A": A.tolist(), "B": B.tolist(), "instance": i})
        reports.append(r)
        if rank_one:
            sm = ineq.sherman_morrison_condition(A, B, w, p, ec, k=cfg.tolerance)
            sm.details["instance"] = i
            reports.append(sm)
    return {}, reports


COMMANDS = {
    "specfun": cmd_specfun,
    "sample": cmd_sample,
    "entropy": cmd_entropy,
    "closedform": cmd_closedform,
    "verify-max": cmd_verify_max,
    "solve-pstar": cmd_solve_pstar,
    "verify-hadamard": cmd_verify_hadamard,
    "verify-block": cmd_verify_block,
    "verify-matrix-sum": cmd_verify_matrix_sum,
}


# ---------------------------------------------------------------- output


def _plain(v):
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, np.ndarray):
        return _plain(v.tolist())
    if isinstance(v, (np.floating, float)):
        x = float(v)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def build_document(cfg: RunConfig, scenario, payload, reports, timestamp=None):
    doc = {
        "command": cfg.subcommand,
        "schema_version": SCHEMA_VERSION,
        "seed": cfg.seed,
        "samples": cfg.samples,
        "tolerance": cfg.tolerance,
        "scenario": scenario,
        "dry_run": cfg.dry_run,
    }
    doc.update({k: v for k, v in payload.items() if k != "samples"})
    if reports:
        doc["reports"] = [r.to_dict() for r in reports]
        doc["verdict"] = _aggregate(reports)
    doc[TIMESTAMP_KEY] = timestamp or datetime.now(timezone.utc).isoformat(timespec="seconds")
    return _plain(doc)


def render_json(document, payload):
    if "samples" in payload:
        document = dict(document, samples=_plain(payload["samples"]))
    return json.dumps(document, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _report_rows(reports):
    for r in reports:
        yield r.name, r
        for c in r.clauses:
            yield f"{r.name}/{c.name}", c


def render_csv(payload, reports):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if "samples" in payload:
        x = np.asarray(payload["samples"])
        writer.writerow([f"x{j}" for j in range(x.shape[1])])
        for row in x:
            writer.writerow([repr(float(v)) for v in row])
    elif reports:
        writer.writerow(["index", "name", "lhs", "rhs", "margin", "uncertainty", "verdict", "equality"])
        for i, r in enumerate(reports):
            index = r.details.get("instance", i)
            for name, rep in _report_rows([r]):
                writer.writerow([index, name, repr(rep.lhs), repr(rep.rhs), repr(rep.margin), repr(rep.uncertainty), rep.verdict, rep.equality])
    else:
        writer.writerow(["key", "value"])
        for key, value in sorted(_flatten(_plain(payload)).items()):
            writer.writerow([key, value])
    return buf.getvalue()


def _flatten(d, prefix=""):
    out = {}
    if isinstance(d, dict):
        for k, v in d.items():
            out.update(_flatten(v, f"{prefix}{k}."))
    elif isinstance(d, list):
        for i, v in enumerate(d):
            out.update(_flatten(v, f"{prefix}{i}."))
    else:
        out[prefix[:-1]] = d
    return out


# ---------------------------------------------------------------- entry points


def validate_scenario(subcommand, doc):
    errors = list(_validator(subcommand).iter_errors(doc))
    if errors:
        # the deepest error is the most specific one
        err = max(errors, key=lambda e: len(e.absolute_path))
        raise ConfigError(err.message, _pointer(err.absolute_path))
    return doc


def run(cfg: RunConfig, stdout=None, scenario=None) -> int:
    """Execute one configured run; returns the process exit code.

    ``scenario`` may be passed in directly (already parsed); it is still
    validated against the subcommand schema.
    """
    stdout = stdout or sys.stdout
    if scenario is None:
        scenario = load_scenario(cfg.subcommand, cfg.scenario_path)
    else:
        validate_scenario(cfg.subcommand, scenario)
    payload, reports = COMMANDS[cfg.subcommand](scenario, cfg)
    if cfg.output == "csv":
        text = render_csv(payload, reports)
    else:
        text = render_json(build_document(cfg, scenario, payload, reports), payload)
    if cfg.output_path:
        with open(cfg.output_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    if not reports:
        return EXIT_OK
    return {HOLDS: EXIT_OK, VIOLATED: EXIT_VIOLATED, INCONCLUSIVE: EXIT_INCONCLUSIVE}[_aggregate(reports)]


def _seed(text):
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _nonneg_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be a nonnegative integer")
    return v


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=DEFAULT_SEED, help=f"run seed (default {DEFAULT_SEED})")
    common.add_argument("--samples", type=_positive_int, default=DEFAULT_SAMPLES, help="Monte Carlo sample count")
    common.add_argument("--tol", type=_positive_float, default=3.0, help="verdict multiplier k on the uncertainty")
    common.add_argument("--out", default=None, help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default=None, help="report format (csv default for sample)")
    common.add_argument("--dry-run", action="store_true", help="validate the scenario without computing")
    common.add_argument("--sweep", type=_nonneg_int, default=0, help="number of random instances for verify-* sweeps")
    parser = argparse.ArgumentParser(prog="wrenyi", description="Weighted Renyi entropy toolkit")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name, parents=[common], help=f"{name} scenario")
        if name == "specfun":
            sp.add_argument("scenario", nargs="?", default=None, help="scenario JSON file, or 'eval' with --fn/--args")
            sp.add_argument("--fn", choices=sorted(specfun.FUNCTIONS), help="function for a one-off evaluation")
            sp.add_argument("--args", help="comma separated arguments for --fn")
        else:
            sp.add_argument("scenario", help="scenario JSON file")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    fmt = args.format or ("csv" if args.subcommand == "sample" else "json")
    cfg = RunConfig(
        subcommand=args.subcommand,
        scenario_path=args.scenario or "eval",
        seed=args.seed,
        samples=args.samples,
        tolerance=args.tol,
        output=fmt,
        output_path=args.out,
        dry_run=args.dry_run,
        sweep=args.sweep,
    )
    try:
        return run(cfg, scenario=_inline_scenario(args))
    except ConfigError as exc:
        _error("config error", exc, pointer=exc.pointer)
        return EXIT_CONFIG
    except OSError as exc:
        _error("io error", exc)
        return EXIT_CONFIG
    except WrenyiError as exc:
        _error(type(exc).__name__, exc)
        return EXIT_CONFIG


def _inline_scenario(args):
    """``specfun eval --fn NAME --args a,b`` builds a one-entry scenario in memory."""
    if args.subcommand != "specfun" or args.scenario not in (None, "eval"):
        return None
    if not args.fn:
        raise ConfigError("specfun needs a scenario file or --fn", "/evaluations")
    try:
        values = [float(v) for v in (args.args or "").split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"could not parse --args {args.args!r}", "/evaluations/0/args") from None
    return {"evaluations": [{"function": args.fn, "args": values}]}


def _error(kind, exc, pointer=None):
    msg = {"error": kind, "message": str(exc)}
    if pointer is not None:
        msg["pointer"] = pointer
    sys.stderr.write(json.dumps(msg, sort_keys=True) + "\n")


if __name__ == "__main__":
    sys.exit(main())

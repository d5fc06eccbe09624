"""Command-line experiment runner.

Subcommands: ``bench`` (PCS curves for the synthetic examples), ``oracle``
(exhaustive static-allocation search), ``facloc`` (facility-location
benchmark) and ``check`` (invariant battery).  The first three read a JSON
config file; see README for the schema.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time

import numpy as np

from . import adaptive, ocba
from .apcs import numerical_hessian
from .core import AllocationVector, ProblemInstance
from .engine import estimate_pcs, estimate_pcs_from_source
from .facloc import facloc_source, paper_designs
from .instances import EXAMPLES
from .oracle import optimal_static_allocation, static_pcs
from .policies import POLICIES

CSV_HEADER = ["example", "policy", "budget", "reps", "seed", "pcs", "stderr",
              "wall_seconds"]


class ConfigError(Exception):
    pass


def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def _instance_from_config(cfg: dict) -> tuple[str, ProblemInstance]:
    if "example" in cfg and cfg["example"] is not None:
        name = cfg["example"]
        if name not in EXAMPLES:
            raise ConfigError(f"unknown example {name!r}; choose from {sorted(EXAMPLES)}")
        return name, EXAMPLES[name]()
    if "means" in cfg and "variances" in cfg:
        try:
            inst = ProblemInstance(means=np.asarray(cfg["means"], dtype=float),
                                   variances=np.asarray(cfg["variances"], dtype=float))
        except ValueError as exc:
            raise ConfigError(f"bad instance: {exc}") from exc
        return "custom", inst
    raise ConfigError("config needs either an 'example' id or explicit "
                      "'means' and 'variances'")


def _common_fields(cfg: dict, args) -> dict:
    out = {
        "policies": cfg.get("policies", ["ea", "ocba", "faa", "daa"]),
        "budgets": cfg.get("budgets"),
        "n0": int(cfg.get("n0", 3)),
        "reps": int(args.reps if args.reps is not None else cfg.get("reps", 10_000)),
        "seed": int(args.seed if args.seed is not None else cfg.get("seed", 1234)),
        "threads": int(args.threads if args.threads is not None
                       else cfg.get("threads", 1)),
        "output": args.output if args.output is not None else cfg.get("output"),
        "json_output": cfg.get("json_output"),
        "record_timings": bool(cfg.get("record_timings", False)),
    }
    if not out["budgets"]:
        raise ConfigError("config needs a non-empty 'budgets' list")
    if not out["output"]:
        raise ConfigError("config needs an 'output' path")
    for p in out["policies"]:
        if p not in POLICIES:
            raise ConfigError(f"unknown policy {p!r}; choose from {sorted(POLICIES)}")
    return out


def _write_rows(path: str, rows: list[dict], json_path=None):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_HEADER, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    if json_path:
        with open(json_path, "w") as fh:
            json.dump(rows, fh, indent=2)
            fh.write("\n")


def _format_row(example, policy, budget, reps, seed, pcs, stderr, wall,
                record_timings):
    return {
        "example": example,
        "policy": policy,
        "budget": budget,
        "reps": reps,
        "seed": seed,
        "pcs": "nan" if pcs is None else f"{pcs:.6f}",
        "stderr": "nan" if stderr is None else f"{stderr:.6f}",
        "wall_seconds": f"{wall:.3f}" if record_timings else "0.000",
    }


def _run_cells(example_name, cells, fields):
    rows = []
    for policy, budget, runner in cells:
        start = time.perf_counter()
        try:
            est = runner()
        except (ValueError, RuntimeError) as exc:
            print(f"warning: {example_name}/{policy}/T={budget}: {exc}",
                  file=sys.stderr)
            rows.append(_format_row(example_name, policy, budget,
                                    fields["reps"], fields["seed"], None, None,
                                    0.0, fields["record_timings"]))
            continue
        wall = time.perf_counter() - start
        rows.append(_format_row(example_name, policy, budget, fields["reps"],
                                fields["seed"], est.pcs, est.stderr, wall,
                                fields["record_timings"]))
    return rows


def cmd_bench(args) -> int:
    cfg = _load_config(args.config)
    fields = _common_fields(cfg, args)
    example_name, instance = _instance_from_config(cfg)
    cells = [(policy, budget,
              (lambda p=policy, t=budget: estimate_pcs(
                  instance, p, fields["n0"], t, fields["reps"], fields["seed"],
                  workers=fields["threads"])))
             for policy in fields["policies"] for budget in fields["budgets"]]
    rows = _run_cells(example_name, cells, fields)
    _write_rows(fields["output"], rows, fields["json_output"])
    return 0


def cmd_facloc(args) -> int:
    cfg = _load_config(args.config)
    fields = _common_fields(cfg, args)
    days = int(cfg.get("days", 30))
    trucks = int(cfg.get("trucks_per_warehouse", 10))
    source = facloc_source(paper_designs(trucks), days=days)
    best = 0  # design (0.5, 0.6, 0.6, 0.8)
    cells = [(policy, budget,
              (lambda p=policy, t=budget: estimate_pcs_from_source(
                  source, best, p, fields["n0"], t, fields["reps"],
                  fields["seed"], workers=fields["threads"])))
             for policy in fields["policies"] for budget in fields["budgets"]]
    rows = _run_cells("facloc", cells, fields)
    _write_rows(fields["output"], rows, fields["json_output"])
    return 0


def cmd_oracle(args) -> int:
    cfg = _load_config(args.config)
    example_name, instance = _instance_from_config(cfg)
    budgets = cfg.get("budgets")
    if not budgets:
        raise ConfigError("config needs a non-empty 'budgets' list")
    step = float(cfg.get("step", 0.05))
    reps = int(args.reps if args.reps is not None else cfg.get("reps", 100_000))
    seed = int(args.seed if args.seed is not None else cfg.get("seed", 1234))
    output = args.output if args.output is not None else cfg.get("output")
    if not output:
        raise ConfigError("config needs an 'output' path")
    header = ["example", "budget", "step", "reps", "seed", "pcs", "stderr",
              "weights"]
    rows = []
    for budget in budgets:
        alloc = optimal_static_allocation(instance, budget, step, reps, seed)
        est = static_pcs(instance, alloc, budget, reps, seed=(seed, 2**32))
        weights = "|".join(f"{w:.4f}" for w in alloc.weights)
        rows.append({"example": example_name, "budget": budget, "step": step,
                     "reps": reps, "seed": seed, "pcs": f"{est.pcs:.6f}",
                     "stderr": f"{est.stderr:.6f}", "weights": weights})
        print(f"{example_name} T={budget}: best grid allocation {weights} "
              f"(pcs {est.pcs:.4f})")
    with open(output, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=header, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return 0


def _random_instance(rng, k_lo=3, k_hi=10):
    k = int(rng.integers(k_lo, k_hi + 1))
    means = np.sort(rng.uniform(0.0, 8.0, k))
    means[1:] += 0.3
    variances = rng.uniform(0.5, 30.0, k)
    return ProblemInstance(means=means, variances=variances)


def cmd_check(args) -> int:
    rng = np.random.default_rng(args.seed)
    failures = 0

    def report(name, ok, detail=""):
        nonlocal failures
        status = "PASS" if ok else "FAIL"
        if not ok:
            failures += 1
        print(f"[{status}] {name}{(': ' + detail) if detail else ''}")

    # budget identity: adaptive weights sum to one above the threshold
    worst = 0.0
    for _ in range(args.instances):
        inst = _random_instance(rng)
        ratios = ocba.information_ratios(inst.means, inst.variances, inst.best)
        t0, _, _ = adaptive.feasibility_threshold(ratios, inst.variances, inst.best)
        budget = max(t0, 0.0) + float(rng.uniform(1.0, 5.0)) * ratios.total
        sol = adaptive.adaptive_ratios(ratios, inst.variances, inst.best, budget)
        worst = max(worst, abs(sol.weights.weights.sum() - 1.0))
    report("budget identity |sum W - 1|", worst <= 1e-8, f"worst {worst:.2e}")

    # alpha ordering and the straddle around 1
    ok = True
    for _ in range(args.instances):
        inst = _random_instance(rng)
        ratios = ocba.information_ratios(inst.means, inst.variances, inst.best)
        t0, _, _ = adaptive.feasibility_threshold(ratios, inst.variances, inst.best)
        budget = max(t0, 0.0) + float(rng.uniform(0.5, 4.0)) * ratios.total
        sol = adaptive.clamped_ratios(ratios, inst.variances, inst.best, budget)
        nb = ratios.nonbest()
        order = np.argsort(ratios.ivec[nb], kind="stable")
        sorted_alphas = sol.alphas[order]
        ok &= bool(np.all(np.diff(sorted_alphas) <= 1e-9))
        ok &= sol.alphas.max() >= 1.0 - 1e-9 and sol.alphas.min() <= 1.0 + 1e-9
    report("alpha ordering and 1-straddle", ok)

    # Hessian of the selection risk is positive semi-definite
    min_eig = np.inf
    for _ in range(max(args.instances // 5, 3)):
        inst = _random_instance(rng, k_lo=3, k_hi=6)
        w = rng.uniform(0.5, 1.5, inst.k)
        w /= w.sum()
        alloc = AllocationVector(weights=w)
        hess = numerical_hessian(inst, alloc, budget=80.0, step=1e-4)
        min_eig = min(min_eig, float(np.linalg.eigvalsh(hess).min()))
    report("selection-risk Hessian PSD", min_eig >= -1e-6, f"min eig {min_eig:.2e}")

    # clamped allocation is feasible at any budget
    ok = True
    for _ in range(args.instances):
        inst = _random_instance(rng)
        ratios = ocba.information_ratios(inst.means, inst.variances, inst.best)
        for budget in (1, 5, 50, 500, 5000):
            sol = adaptive.clamped_ratios(ratios, inst.variances, inst.best, budget)
            ok &= bool(sol.weights.weights.min() >= 0.0)
            ok &= abs(sol.weights.weights.sum() - 1.0) <= 1e-8
    report("clamped allocation feasible at all budgets", ok)

    # lower bound on the best design's asymptotic share
    ok = True
    for _ in range(args.instances):
        inst = _random_instance(rng, k_lo=3, k_hi=40)
        ratios = ocba.information_ratios(inst.means, inst.variances, inst.best)
        w = ocba.ocba_ratios(ratios).weights
        nb = ratios.nonbest()
        bound = (math.sqrt(inst.variances[inst.best]) * math.sqrt(inst.k - 1)
                 * w[nb].min() / math.sqrt(inst.variances.max()))
        ok &= w[inst.best] >= bound - 1e-12
    report("best-design share lower bound", ok)

    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rsalloc",
        description="Ranking-and-selection budget allocation experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn, doc in [
            ("bench", cmd_bench, "PCS curves for a synthetic instance"),
            ("facloc", cmd_facloc, "facility-location benchmark"),
            ("oracle", cmd_oracle, "exhaustive static-allocation search")]:
        p = sub.add_parser(name, help=doc)
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--reps", type=int, default=None,
                       help="override replication count")
        p.add_argument("--seed", type=int, default=None, help="override seed")
        p.add_argument("--threads", type=int, default=None,
                       help="override worker count")
        p.add_argument("--output", default=None, help="override output path")
        p.set_defaults(fn=fn)

    p = sub.add_parser("check", help="run the invariant battery")
    p.add_argument("--instances", type=int, default=40,
                   help="random instances per property")
    p.add_argument("--seed", type=int, default=20250901)
    p.set_defaults(fn=cmd_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

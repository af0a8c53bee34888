"""Command-line experiment harness: ``lab lyapunov|shadowing|gap|types|all``.

Every subcommand reads one YAML config and writes CSV/JSON into ``--out``.
All outputs except ``manifest_<command>.json`` (which records wall-clock time) are
byte-identical for a given config and version at any worker count.

Exit codes: 0 success, 2 config error, 3 infeasible parameters, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .config import load_config
from .entropy import (GapParams, count_types, katok_entropy_estimate, k_term, main_report,
                      topological_entropy_estimate)
from .errors import ConfigError, EmptyCriticalSet, InfeasibleParameters, ShadowlabError
from .maps import analyze
from .orbits import MeasureSequence, defect_alpha, iterate, lyapunov_exponent
from .outputs import write_csv, write_json, write_orbit_csv
from .shadowing import (ShadowContext, ShadowParams, build_decomposition, choose_delta,
                        coverage_report, delta_bounds, lemma_delta_suite,
                        lemma_disjoint_suite, lemma_psi_suite)

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_NUMERIC = 0, 2, 3, 4
WORKERS_ENV = "LAB_WORKERS"


def orbit_seeds(seed, count):
    """Independent 64-bit seeds for ``count`` orbits, fixed by the config seed."""
    children = np.random.SeedSequence(seed).spawn(count)
    return [int(c.generate_state(1, np.uint64)[0]) for c in children]


def _precision(cfg, fmap):
    p = cfg.orbit.precision
    if p is None and fmap.family == "doubling":
        return "auto"
    return p


def _pmap(fn, items, workers):
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))


def _make_orbit(args):
    fmap, N, x0, seed, precision, on_escape = args
    return iterate(fmap, x0, N, seed=seed, precision=precision, on_escape=on_escape,
                   tag=f"seed-{seed}")


def _orbits(cfg, fmap, workers, N=None):
    seeds = orbit_seeds(cfg.seed, cfg.orbit.count)
    N = cfg.orbit.N if N is None else N
    prec = _precision(cfg, fmap)
    jobs = [(fmap, N, cfg.orbit.x0, s, prec, cfg.orbit.on_escape) for s in seeds]
    return seeds, _pmap(_make_orbit, jobs, workers)


def _constants(fmap):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EmptyCriticalSet)
        return analyze(fmap)


# -- subcommands ------------------------------------------------------------------

def run_lyapunov(cfg, out, workers=1):
    """Per-window Lyapunov estimates, the defect table and a JSON summary."""
    fmap = cfg.build_map()
    seeds, orbits = _orbits(cfg, fmap, workers)
    w = min(cfg.lyapunov.window, cfg.orbit.N)
    rows, measures, per_orbit = [], [], []
    for i, (s, orb) in enumerate(zip(seeds, orbits)):
        for j in range(orb.N // w):
            mu = orb.measure(j * w, w)
            measures.append(mu)
            rows.append((i, s, j, mu.start, mu.length, lyapunov_exponent(mu)))
        per_orbit.append({"orbit": i, "seed": s,
                          "lyapunov": lyapunov_exponent(orb.measure(0, orb.N))})
    table = defect_alpha(MeasureSequence(measures, "orbit windows"), cfg.lyapunov.delta_grid,
                         cfg.lyapunov.tail_fraction)
    files = [write_csv(os.path.join(out, "lyapunov.csv"),
                       ["orbit", "seed", "window", "start", "length", "lyapunov"], rows)]
    drows = [(d, k, float(v)) for d, row in zip(table.delta_grid, table.entries)
             for k, v in enumerate(row)]
    files.append(write_csv(os.path.join(out, "defect.csv"), ["delta", "k", "defect"], drows))
    if cfg.lyapunov.write_orbits:
        for i, orb in enumerate(orbits):
            files.append(write_orbit_csv(os.path.join(out, f"orbit_{i}.csv"), orb))
    lams = [p["lyapunov"] for p in per_orbit]
    summary = {
        "map": fmap.to_spec(), "N": cfg.orbit.N, "window": w, "orbits": per_orbit,
        "mean_lyapunov": math.fsum(lams) / len(lams),
        "defect_table": table.to_dict(),
    }
    files.append(write_json(os.path.join(out, "lyapunov_summary.json"), summary))
    return files


def _shadow_job(args):
    orbit, params, constants, window, budget, check_ipsi = args
    ctx = ShadowContext(orbit, params, constants)
    dec = build_decomposition(orbit, params, constants, ctx=ctx, check_ipsi=check_ipsi,
                              step_budget=budget)
    cov = coverage_report(orbit, dec)
    suites = {
        "lemma_delta": lemma_delta_suite(ctx),
        "psi": lemma_psi_suite(dec),
        "lemma_disjoint": lemma_disjoint_suite(ctx, window, budget),
    }
    return dec.to_dict(), cov.rows, suites


def _sum_suites(results):
    total = {}

    def add(dst, src):
        for k, v in src.items():
            if isinstance(v, dict):
                add(dst.setdefault(k, {}), v)
            elif isinstance(v, bool) or not isinstance(v, int):
                continue
            else:
                dst[k] = dst.get(k, 0) + v

    for s in results:
        add(total, s)
    return total


def resolve_delta(cfg, fmap, constants):
    sh = cfg.shadowing
    delta_bounds(fmap, constants, sh.epsilon, sh.L)
    if sh.delta == "auto":
        return choose_delta(fmap, constants, sh.epsilon, sh.L)
    return float(sh.delta)


def run_shadowing(cfg, out, workers=1):
    """Decomposition JSON, coverage CSV and per-lemma pass counts."""
    fmap = cfg.build_map()
    constants = _constants(fmap)
    delta = resolve_delta(cfg, fmap, constants)
    params = ShadowParams(cfg.shadowing.epsilon, delta, cfg.shadowing.L)
    seeds, orbits = _orbits(cfg, fmap, workers)
    sh = cfg.shadowing
    jobs = [(o, params, constants, sh.disjoint_window, sh.step_budget, sh.check_ipsi)
            for o in orbits]
    results = _pmap(_shadow_job, jobs, workers)
    files = []
    decs = [{"orbit": i, "seed": s, **r[0]} for i, (s, r) in enumerate(zip(seeds, results))]
    files.append(write_json(os.path.join(out, "decomposition.json"),
                            {"map": fmap.to_spec(), "constants": constants.to_dict(),
                             "orbits": decs}))
    cols = ["n", "covered", "target", "deficit", "deficit_rate", "overhang_right",
            "overhang_left", "visit_mass", "psi_sum", "Psi_mean"]
    crow = [(i,) + tuple(getattr(row, c) for c in cols)
            for i, r in enumerate(results) for row in r[1]]
    files.append(write_csv(os.path.join(out, "coverage.csv"), ["orbit"] + cols, crow))
    summary = {
        "params": {"epsilon": params.epsilon, "delta": params.delta, "L": params.L},
        "psi_count": [len(d["psi_list"]) for d in decs],
        "status": [d["status"] for d in decs],
        "per_orbit": [r[2] for r in results],
        "totals": _sum_suites([r[2] for r in results]),
    }
    summary["all_passed"] = _all_passed(summary["totals"])
    files.append(write_json(os.path.join(out, "lemma_summary.json"), summary))
    return files


def _all_passed(totals):
    ok = True
    for key, v in totals.items():
        if isinstance(v, dict):
            if "passed" in v and ("checked" in v or "pairs" in v):
                ok &= v["passed"] == v.get("checked", v.get("pairs"))
            else:
                ok &= _all_passed(v)
        elif key == "ipsi_violations":
            ok &= v == 0
    return bool(ok)


def _katok_job(args):
    fmap, mu, eps, ns = args
    return katok_entropy_estimate(fmap, mu, eps, ns)


def _types_rows(ns, Ls):
    rows = []
    for n in ns:
        for L in Ls:
            tc = count_types(n, L)
            rows.append((n, L, tc.count, tc.log_rate))
    return rows


def run_gap(cfg, out, workers=1):
    """GapReport JSON, (n, log r) CSV and the type-count CSV."""
    en = cfg.entropy
    k_term(en.epsilon_schedule[-1], en.gamma, en.L, 1.0, 1.0)
    fmap = cfg.build_map()
    constants = _constants(fmap)
    seeds = orbit_seeds(cfg.seed, 1)
    orbit = _make_orbit((fmap, max(en.sequence_lengths), cfg.orbit.x0, seeds[0],
                         _precision(cfg, fmap), cfg.orbit.on_escape))
    seq = MeasureSequence([orbit.measure(0, n) for n in en.sequence_lengths],
                          "growing windows of one orbit")
    params = GapParams(epsilon=en.katok_epsilon, gamma=en.gamma, L=en.L, delta0=en.delta0,
                       delta_grid=en.delta_grid, htop_epsilons=en.epsilon_schedule,
                       htop_n=en.n_schedule, katok_n=en.katok_n,
                       tail_fraction=en.tail_fraction)
    htop = topological_entropy_estimate(fmap, en.epsilon_schedule, en.n_schedule)
    katok = _pmap(_katok_job, [(fmap, mu, en.katok_epsilon, en.katok_n) for mu in seq],
                  workers)
    report = main_report(fmap, seq, params, constants, htop=htop, katok=katok)
    files = [write_json(os.path.join(out, "gap_report.json"),
                        {"map": fmap.to_spec(), "seed": seeds[0], **report.to_dict()})]
    files.append(write_csv(os.path.join(out, "entropy_fit.csv"),
                           ["epsilon", "n", "r", "log_r"], htop.rows()))
    files.append(write_csv(os.path.join(out, "types.csv"), ["n", "L", "count", "log_rate"],
                           _types_rows(cfg.types.n, cfg.types.L)))
    return files


def run_types(cfg, out, workers=1):
    """Exact type counts over the configured (n, L) grid."""
    return [write_csv(os.path.join(out, "types.csv"), ["n", "L", "count", "log_rate"],
                      _types_rows(cfg.types.n, cfg.types.L))]


def run_all(cfg, out, workers=1):
    files = []
    for fn in (run_lyapunov, run_shadowing, run_gap):
        files += fn(cfg, out, workers)
    return sorted(set(files))


COMMANDS = {
    "lyapunov": run_lyapunov,
    "shadowing": run_shadowing,
    "gap": run_gap,
    "types": run_types,
    "all": run_all,
}


def default_workers():
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}", WORKERS_ENV)


def build_parser():
    p = argparse.ArgumentParser(prog="lab", description="Shadowing and entropy experiments.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, help="YAML experiment config")
    p.add_argument("--workers", type=int, default=None,
                   help=f"worker processes (default: ${WORKERS_ENV} or 1)")
    p.add_argument("--out", default=None, help="output directory (default: config output_dir)")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        workers = args.workers if args.workers is not None else default_workers()
        if workers < 1:
            raise ConfigError("must be >= 1", "--workers")
        out = args.out or cfg.output_dir
        os.makedirs(out, exist_ok=True)
        t0 = time.perf_counter()
        files = COMMANDS[args.command](cfg, out, workers)
        manifest = {
            "command": args.command,
            "config_hash": cfg.digest(),
            "version": __version__,
            "wall_clock_seconds": round(time.perf_counter() - t0, 3),
            "workers": workers,
            "outputs": sorted(files),
        }
        write_json(os.path.join(out, f"manifest_{args.command}.json"), manifest)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleParameters as exc:
        print(f"infeasible parameters: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ShadowlabError as exc:
        print(f"numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for f in sorted(files):
        print(os.path.join(out, f))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

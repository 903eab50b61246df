"""Command-line front end.

Subcommands:
    sample         draw one posterior sample with the localization sampler
    se             state-evolution trace and fixed points for one setting
    phase-diagram  fixed-point counts over (alpha, delta, t) grids, as CSV
    oracle-check   AMP vs exact-posterior cross checks, as a JSON report
    bench          multi-trial experiment from a JSON config (optionally
                   with the DPS baseline), CSV + JSON outputs

Every subcommand takes --config <json> for shared fields (prior, N, alpha,
delta, seed); explicit flags override the config file.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import harness, oracle, sampler, state_evolution
from .amp import amp_run
from .model import (generate_instance, load_model_config, prior_from_dict,
                    rademacher_prior, gaussian_prior)

__all__ = ["main"]


def _parse_prior(args, cfg_prior=None):
    if getattr(args, "prior_json", None):
        return prior_from_dict(json.loads(args.prior_json))
    name = getattr(args, "prior", None)
    if name is None and cfg_prior is not None:
        return cfg_prior
    if name in (None, "gaussian"):
        return gaussian_prior(0.0, 1.0)
    if name == "rademacher":
        return rademacher_prior()
    raise SystemExit(f"unknown prior {name!r}")


def _parse_grid(text):
    """Either 'lo:hi:n' (inclusive linspace) or a comma list of values."""
    if ":" in text:
        lo, hi, n = text.split(":")
        return list(np.linspace(float(lo), float(hi), int(n)))
    return [float(v) for v in text.split(",")]


def _load_config(args):
    if getattr(args, "config", None):
        prior, N, alpha, delta, seed = load_model_config(args.config)
        return {"prior": prior, "N": N, "alpha": alpha, "delta": delta, "seed": seed}
    return {}


def _common_model_args(p, with_n=True):
    p.add_argument("--config", help="JSON config with prior/N/alpha/delta/seed")
    p.add_argument("--prior", choices=["rademacher", "gaussian"])
    p.add_argument("--prior-json", help="full prior spec as a JSON string")
    if with_n:
        p.add_argument("--N", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--out-dir", default=".")


def _resolved(args, cfg, name, default=None):
    v = getattr(args, name.replace("-", "_"), None)
    if v is not None:
        return v
    if name in cfg and cfg[name] is not None:
        return cfg[name]
    return default


def cmd_sample(args):
    cfg = _load_config(args)
    prior = _parse_prior(args, cfg.get("prior"))
    N = int(_resolved(args, cfg, "N", 200))
    alpha = float(_resolved(args, cfg, "alpha", 2.0))
    delta = float(_resolved(args, cfg, "delta", 0.01))
    seed = int(_resolved(args, cfg, "seed", 0))
    rng = np.random.default_rng(seed)
    inst = generate_instance(prior, N, alpha, delta, rng)
    sconf = sampler.SamplerConfig(args.T, args.step, args.K, seed=seed)
    run = sampler.localize_sample(inst, sconf, rng,
                                  store_trajectory=args.trajectory_out is not None)
    mse = harness.algorithm_mse(inst.theta_true, run.theta_alg)
    print(f"N={N} M={inst.M} alpha={alpha} delta={delta} "
          f"T={sconf.T} step={sconf.delta_step} K={sconf.K}")
    print(f"algorithm_mse={mse:.6g}  wall={run.wall_clock:.2f}s")
    if args.trajectory_out:
        coords = [int(c) for c in args.coords.split(",")]
        os.makedirs(os.path.dirname(args.trajectory_out) or ".", exist_ok=True)
        sampler.trajectory_to_csv(run, args.trajectory_out, coordinates=coords)
        print(f"trajectory -> {args.trajectory_out}")
    return 0


def cmd_se(args):
    cfg = _load_config(args)
    prior = _parse_prior(args, cfg.get("prior"))
    alpha = float(_resolved(args, cfg, "alpha", 2.0))
    delta = float(_resolved(args, cfg, "delta", 0.01))
    trace = state_evolution.se_iterate(prior, alpha, delta, args.t, args.K)
    rep = state_evolution.find_fixed_points(prior, alpha, delta, args.t,
                                            grid_size=args.grid_size)
    print(f"alpha={alpha} delta={delta} t={args.t}")
    for k, e in enumerate(trace.E_seq):
        print(f"  E[{k + 1}] = {e:.10g}")
    print(f"converged={trace.converged}  E_inf={trace.E_inf:.10g}")
    pts = ", ".join(f"{e:.10g}" for e in rep.fixed_points)
    print(f"fixed points: [{pts}]  unique={rep.unique}")
    return 0


def cmd_phase_diagram(args):
    cfg = _load_config(args)
    prior = _parse_prior(args, cfg.get("prior"))
    cells = state_evolution.phase_diagram(
        prior, _parse_grid(args.alpha_grid), _parse_grid(args.delta_grid),
        _parse_grid(args.t_grid), grid_size=args.grid_size)
    os.makedirs(args.out_dir, exist_ok=True)
    out = os.path.join(args.out_dir, args.out)
    state_evolution.phase_diagram_to_csv(cells, out)
    n_multi = sum(1 for c in cells if not c.unique)
    print(f"{len(cells)} cells, {n_multi} with multiple fixed points -> {out}")
    return 0


def cmd_oracle_check(args):
    cfg = _load_config(args)
    prior = _parse_prior(args, cfg.get("prior"))
    N = int(_resolved(args, cfg, "N", 10))
    alpha = float(_resolved(args, cfg, "alpha", 0.8))
    delta = float(_resolved(args, cfg, "delta", 0.05))
    seed = int(_resolved(args, cfg, "seed", 0))
    rng = np.random.default_rng(seed)
    inst = generate_instance(prior, N, alpha, delta, rng)
    t = args.t
    z = t * inst.theta_true + np.sqrt(t) * rng.standard_normal(N) if t > 0 \
        else np.zeros(N)
    if prior.kind == "gaussian":
        post = oracle.exact_posterior_gaussian(inst, z, t)
    else:
        post = oracle.exact_posterior_enumeration(inst, z, t)
    m_amp = amp_run(inst, z, t, args.K).m_hat
    denom = max(np.linalg.norm(post.mean), 1e-300)
    stats = oracle.overlap_stats(post)
    nish = oracle.nishimori_check(prior, min(N, 10), alpha, delta, t,
                                  args.nishimori_instances, rng) \
        if prior.kind != "gaussian" else None
    report = {
        "amp_vs_oracle_l2": float(np.linalg.norm(m_amp - post.mean) / denom),
        "sandwich_lhs": stats.sandwich_lhs,
        "lambda_m": stats.lambda_m,
        "sandwich_rhs": stats.sandwich_rhs,
        "nishimori_gap": None if nish is None else nish["gap"],
    }
    print(json.dumps(report, indent=2))
    if args.out:
        os.makedirs(args.out_dir, exist_ok=True)
        with open(os.path.join(args.out_dir, args.out), "w") as f:
            json.dump(report, f, indent=2)
    return 0


def cmd_bench(args):
    config = harness.ExperimentConfig.from_json(args.config)
    if args.seed is not None:
        config.seed = args.seed
    if args.out_dir != ".":
        config.out_dir = args.out_dir
    if args.baseline:
        config.baselines = sorted(set(config.baselines) | {args.baseline})
    if args.workers:
        config.n_workers = args.workers
    report = harness.run_experiment(config)
    for N, mean in report.mean_mse_by_N.items():
        ref = report.mmse_by_N[N]
        dps = report.dps_mean_by_N.get(N)
        line = f"N={N}: mean algorithm_mse={mean:.6g} mmse_ref={ref.value} ({ref.label})"
        if dps is not None:
            line += f" dps_mse={dps:.6g}"
        print(line)
    print(f"outputs in {config.out_dir}/ (results.csv, summary.json)")
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="amploc",
        description="Posterior sampling in Gaussian random linear models via "
                    "AMP-driven stochastic localization")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw one localization posterior sample")
    _common_model_args(p)
    p.add_argument("--T", type=float, default=100.0)
    p.add_argument("--step", type=float, default=0.1)
    p.add_argument("--K", type=int, default=20)
    p.add_argument("--trajectory-out", help="CSV path for z(t_l)/t_l coordinates")
    p.add_argument("--coords", default="0,1", help="coordinates for the trajectory CSV")
    p.set_defaults(fn=cmd_sample)

    p = sub.add_parser("se", help="state evolution and fixed points")
    _common_model_args(p, with_n=False)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--K", type=int, default=200)
    p.add_argument("--grid-size", type=int, default=400)
    p.set_defaults(fn=cmd_se)

    p = sub.add_parser("phase-diagram", help="fixed-point scan over grids")
    _common_model_args(p, with_n=False)
    p.add_argument("--alpha-grid", required=True, help="'lo:hi:n' or comma list")
    p.add_argument("--delta-grid", required=True)
    p.add_argument("--t-grid", default="0")
    p.add_argument("--grid-size", type=int, default=400)
    p.add_argument("--out", default="phase_diagram.csv")
    p.set_defaults(fn=cmd_phase_diagram)

    p = sub.add_parser("oracle-check", help="AMP vs exact posterior report")
    _common_model_args(p)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--K", type=int, default=200)
    p.add_argument("--nishimori-instances", type=int, default=200)
    p.add_argument("--out", help="also write the JSON report to out-dir/<out>")
    p.set_defaults(fn=cmd_oracle_check)

    p = sub.add_parser("bench", help="multi-trial benchmark from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--baseline", choices=["dps"])
    p.add_argument("--seed", type=int)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--workers", type=int)
    p.set_defaults(fn=cmd_bench)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())

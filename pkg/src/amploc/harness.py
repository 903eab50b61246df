"""Experiment orchestration: configs, seeded multi-trial runs, metrics, CSV.

The MSE convention for sampler output is ||theta - theta_alg||^2 / (2N);
the factor 2 makes a perfect posterior sampler's expected MSE equal the
per-coordinate minimum mean squared error, because the truth and an exact
posterior sample are i.i.d. conditionally on the data. The MMSE reference
itself comes from the t = 0 state-evolution fixed point, which equals the
true MMSE whenever the noise sits below the uniqueness threshold.
"""

import csv
import json
import os
import subprocess
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .baseline import NoiseSchedule, dps_sample
from .model import generate_instance, prior_from_dict, prior_to_dict
from .oracle import exact_posterior_gaussian
from .sampler import SamplerConfig, localize_ensemble, localize_sample
from .state_evolution import find_fixed_points

__all__ = ["ExperimentConfig", "MetricsReport", "MmseReference",
           "algorithm_mse", "mmse_reference", "gaussian_case_diagnostics",
           "run_experiment", "version_string", "CSV_COLUMNS"]

CSV_COLUMNS = [
    "trial", "N", "M", "alpha", "delta", "T", "step", "K", "seed",
    "algorithm_mse", "log_mse", "log10_mse",
    "mmse_reference", "mmse_label",
    "dps_mse", "dps_log10_mse",
    "amp_seconds", "dps_seconds",
]


def algorithm_mse(theta_true, theta_alg):
    """||theta - theta_alg||^2 / (2N)."""
    theta_true = np.asarray(theta_true, dtype=float)
    theta_alg = np.asarray(theta_alg, dtype=float)
    if theta_true.shape != theta_alg.shape:
        raise ValueError("length mismatch")
    d = theta_true - theta_alg
    return float(d @ d) / (2.0 * theta_true.size)


class MmseReference:
    """MMSE reference from the t = 0 fixed point, with an honesty label.

    When several fixed points coexist the report declines to call any of
    them the MMSE: value is then the state-evolution limit (what AMP
    reaches) and the label says so. Otherwise label records whether
    uniqueness was also verified on a grid of smaller noise levels, which
    is what licenses reading the fixed point as the true MMSE.
    """

    def __init__(self, value, fixed_points, unique, label):
        self.value = value
        self.fixed_points = fixed_points
        self.unique = unique
        self.label = label

    def __repr__(self):
        return f"MmseReference({self.value}, label={self.label!r})"


def mmse_reference(prior, alpha, delta, check_points=33, grid_size=400):
    """Scalar MMSE reference for mean estimation at noise level delta.

    When the fixed point is not unique the ambiguity is flagged, never
    silently resolved: the returned value is then the state-evolution limit
    from the uninformative start (the error AMP actually reaches), labeled
    as such rather than as the MMSE.
    """
    from .state_evolution import se_iterate
    rep = find_fixed_points(prior, alpha, delta, 0.0, grid_size=grid_size)
    if not rep.unique:
        e_inf = se_iterate(prior, alpha, delta, 0.0, 10000).E_inf
        return MmseReference(e_inf, rep.fixed_points, False,
                             "ambiguous: multiple fixed points; "
                             "reporting the state-evolution limit (amp-mse)")
    if delta > 0:
        below = np.linspace(delta / check_points, delta, check_points)
        all_unique = all(
            find_fixed_points(prior, alpha, d, 0.0, grid_size=grid_size).unique
            for d in below)
    else:
        all_unique = True
    label = "mmse" if all_unique else "amp-mse (possibly != mmse)"
    return MmseReference(rep.fixed_points[0], rep.fixed_points, True, label)


def _fit_gaussian(samples, n_dim):
    n = samples.shape[0]
    mu = samples.mean(axis=0)
    cov = np.cov(samples.T, ddof=1) if n > 1 else np.eye(n_dim)
    cov = np.atleast_2d(cov)
    shrunk = n < 10 * n_dim
    gamma = 0.0
    if shrunk:
        gamma = min(0.5, n_dim / max(n, 1))
        cov = (1 - gamma) * cov + gamma * np.diag(np.diag(cov))
    cov = cov + 1e-12 * np.trace(cov) / n_dim * np.eye(n_dim)
    return mu, cov, shrunk, gamma


def _gaussian_kl(mu_t, cov_t, mu_f, cov_f):
    """KL( N(mu_t, cov_t) || N(mu_f, cov_f) ), target first."""
    n = mu_t.size
    chol = np.linalg.cholesky(cov_f)
    sol = np.linalg.solve(cov_f, cov_t)
    dmu = mu_f - mu_t
    quad = float(dmu @ np.linalg.solve(cov_f, dmu))
    logdet_f = 2.0 * float(np.sum(np.log(np.diag(chol))))
    sign, logdet_t = np.linalg.slogdet(cov_t)
    return 0.5 * (float(np.trace(sol)) + quad - n + logdet_f - logdet_t)


def _gaussian_w2(mu_a, cov_a, mu_b, cov_b):
    """2-Wasserstein distance between two Gaussians."""
    lam, Q = np.linalg.eigh(cov_a)
    root_a = (Q * np.sqrt(np.maximum(lam, 0.0))) @ Q.T
    inner = root_a @ cov_b @ root_a
    cross = np.sum(np.sqrt(np.maximum(np.linalg.eigvalsh(inner), 0.0)))
    dmu = mu_a - mu_b
    w2sq = float(dmu @ dmu) + float(np.trace(cov_a) + np.trace(cov_b)) - 2.0 * cross
    return np.sqrt(max(w2sq, 0.0))


class GaussianDiagnostics:
    def __init__(self, kl_per_dim, w2_per_sqrt_dim, n_samples, shrunk, gamma):
        self.kl_per_dim = kl_per_dim
        self.w2_per_sqrt_dim = w2_per_sqrt_dim
        self.n_samples = n_samples
        self.shrunk = shrunk
        self.gamma = gamma


def gaussian_case_diagnostics(instance, samples, T):
    """Closed-form KL/N and W2/sqrt(N) of a Gaussian fit to the samples
    against the exact smoothed target N(m_post, Sigma_post + I/T).

    The target's (m_post, Sigma_post) is the Gaussian-prior posterior given
    y alone; the I/T term is the smoothing the normalized localization
    endpoint carries by construction. KL is reported target-first. Sample
    covariances fitted from fewer than 10 N draws are shrunk toward their
    diagonal and flagged.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2 or samples.shape[1] != instance.N:
        raise ValueError("samples must be (n_trials, N)")
    post = exact_posterior_gaussian(instance, np.zeros(instance.N), 0.0)
    cov_t = post.covariance + np.eye(instance.N) / T
    mu_f, cov_f, shrunk, gamma = _fit_gaussian(samples, instance.N)
    kl = _gaussian_kl(post.mean, cov_t, mu_f, cov_f)
    w2 = _gaussian_w2(post.mean, cov_t, mu_f, cov_f)
    return GaussianDiagnostics(kl / instance.N, w2 / np.sqrt(instance.N),
                               samples.shape[0], shrunk, gamma)


class ExperimentConfig:
    """Everything one experiment needs, JSON round-trippable."""

    def __init__(self, prior, N, alpha, delta, T, step, K, n_trials=1,
                 seed=0, metrics=("mse",), baselines=(), out_dir="out",
                 n_workers=1, diagnostics_trials=0, dps_steps=1000):
        self.prior = prior if isinstance(prior, dict) else prior_to_dict(prior)
        self.N_list = [int(N)] if np.isscalar(N) else [int(n) for n in N]
        self.alpha = float(alpha)
        self.delta = float(delta)
        self.T = float(T)
        self.step = float(step)
        self.K = int(K)
        self.n_trials = int(n_trials)
        self.seed = int(seed)
        self.metrics = list(metrics)
        self.baselines = list(baselines)
        self.out_dir = out_dir
        self.n_workers = int(n_workers)
        self.diagnostics_trials = int(diagnostics_trials)
        self.dps_steps = int(dps_steps)
        if self.n_trials < 1:
            raise ValueError("n_trials must be >= 1")

    @classmethod
    def from_json(cls, path_or_dict):
        cfg = path_or_dict
        if not isinstance(cfg, dict):
            with open(cfg) as f:
                cfg = json.load(f)
        sampler = cfg.get("sampler", {})
        return cls(
            prior=cfg["prior"], N=cfg["N"], alpha=cfg["alpha"], delta=cfg["delta"],
            T=sampler.get("T", cfg.get("T", 100.0)),
            step=sampler.get("step", cfg.get("step", 0.1)),
            K=sampler.get("K", cfg.get("K", 20)),
            n_trials=cfg.get("n_trials", 1), seed=cfg.get("seed", 0),
            metrics=cfg.get("metrics", ["mse"]), baselines=cfg.get("baselines", []),
            out_dir=cfg.get("out_dir", "out"), n_workers=cfg.get("n_workers", 1),
            diagnostics_trials=cfg.get("diagnostics_trials", 0),
            dps_steps=cfg.get("dps_steps", 1000),
        )

    def to_dict(self):
        return {
            "prior": self.prior, "N": self.N_list, "alpha": self.alpha,
            "delta": self.delta,
            "sampler": {"T": self.T, "step": self.step, "K": self.K},
            "n_trials": self.n_trials, "seed": self.seed,
            "metrics": self.metrics, "baselines": self.baselines,
            "out_dir": self.out_dir, "n_workers": self.n_workers,
            "diagnostics_trials": self.diagnostics_trials,
            "dps_steps": self.dps_steps,
        }


class MetricsReport:
    """Aggregated experiment results."""

    def __init__(self, per_trial, mean_mse_by_N, mmse_by_N, dps_mean_by_N,
                 diagnostics, wall_clock):
        self.per_trial = per_trial
        self.mean_mse_by_N = mean_mse_by_N
        self.mmse_by_N = mmse_by_N
        self.dps_mean_by_N = dps_mean_by_N
        self.diagnostics = diagnostics
        self.wall_clock = wall_clock


def _trial_streams(seed, n_index, trial, kind=0):
    """Four independent substreams: prior draw, instance noise, localization
    Brownian increments, baseline noise. Fixed spawn keys pair ablations;
    kind separates trial streams (0) from diagnostics streams (1)."""
    root = np.random.SeedSequence(entropy=seed, spawn_key=(kind, n_index, trial))
    kids = root.spawn(4)
    return [np.random.default_rng(k) for k in kids]


def _run_trial(payload):
    try:
        return _run_trial_inner(payload)
    except Exception as exc:
        raise RuntimeError(
            f"trial {payload['trial']} (N={payload['N']}) failed: {exc}") from exc


def _run_trial_inner(payload):
    prior = prior_from_dict(payload["prior"])
    rng_prior, rng_noise, rng_loc, rng_dps = _trial_streams(
        payload["seed"], payload["n_index"], payload["trial"])
    inst = generate_instance(prior, payload["N"], payload["alpha"],
                             payload["delta"], rng_prior, noise_rng=rng_noise)
    cfg = SamplerConfig(payload["T"], payload["step"], payload["K"])
    t0 = time.perf_counter()
    run = localize_sample(inst, cfg, rng_loc)
    amp_seconds = time.perf_counter() - t0
    mse = algorithm_mse(inst.theta_true, run.theta_alg)
    row = {
        "trial": payload["trial"], "N": inst.N, "M": inst.M,
        "alpha": inst.alpha, "delta": inst.delta,
        "T": cfg.T, "step": cfg.delta_step, "K": cfg.K, "seed": payload["seed"],
        "algorithm_mse": mse, "log_mse": np.log(mse) if mse > 0 else "",
        "log10_mse": np.log10(mse) if mse > 0 else "",
        "mmse_reference": payload["mmse_value"],
        "mmse_label": payload["mmse_label"],
        "dps_mse": "", "dps_log10_mse": "",
        "amp_seconds": amp_seconds, "dps_seconds": "",
    }
    if "dps" in payload["baselines"]:
        sched = NoiseSchedule(n_steps=payload["dps_steps"])
        t0 = time.perf_counter()
        theta_dps = dps_sample(inst, sched, rng_dps)
        row["dps_seconds"] = time.perf_counter() - t0
        dmse = algorithm_mse(inst.theta_true, theta_dps)
        row["dps_mse"] = dmse
        row["dps_log10_mse"] = np.log10(dmse) if dmse > 0 else ""
    return row


def version_string():
    try:
        from importlib.metadata import version
        base = "amploc-" + version("amploc")
    except Exception:
        base = "amploc-unknown"
    try:
        desc = subprocess.run(["git", "describe", "--always", "--dirty"],
                              capture_output=True, text=True, timeout=5)
        if desc.returncode == 0:
            return f"{base}+g{desc.stdout.strip()}"
    except Exception:
        pass
    return base


def run_experiment(config):
    """Run the configured trials, write results.csv and summary.json.

    One localization sample (and optionally one DPS sample) per trial, fresh
    instance per trial from paired substreams. Rows are written sorted by
    (N, trial) whatever the completion order. Returns a MetricsReport.
    """
    os.makedirs(config.out_dir, exist_ok=True)
    prior = prior_from_dict(config.prior)
    wall_start = time.perf_counter()

    payloads = []
    mmse_by_N = {}
    for n_index, N in enumerate(config.N_list):
        ref = mmse_reference(prior, config.alpha, config.delta)
        mmse_by_N[N] = ref
        for trial in range(config.n_trials):
            payloads.append({
                "prior": config.prior, "N": N, "n_index": n_index,
                "alpha": config.alpha, "delta": config.delta,
                "T": config.T, "step": config.step, "K": config.K,
                "trial": trial, "seed": config.seed,
                "baselines": config.baselines, "dps_steps": config.dps_steps,
                "mmse_value": "" if ref.value is None else ref.value,
                "mmse_label": ref.label,
            })

    if config.n_workers > 1:
        import multiprocessing as mp
        with ProcessPoolExecutor(max_workers=config.n_workers,
                                 mp_context=mp.get_context("fork")) as pool:
            rows = list(pool.map(_run_trial, payloads))
    else:
        rows = [_run_trial(p) for p in payloads]
    rows.sort(key=lambda r: (r["N"], r["trial"]))

    csv_path = os.path.join(config.out_dir, "results.csv")
    with open(csv_path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)

    diagnostics = None
    if config.diagnostics_trials > 0 and prior.kind == "gaussian":
        rng_p, rng_n, rng_loc, _ = _trial_streams(config.seed, 0, 0, kind=1)
        inst = generate_instance(prior, config.N_list[0], config.alpha,
                                 config.delta, rng_p, noise_rng=rng_n)
        cfg = SamplerConfig(config.T, config.step, config.K)
        samples, _ = localize_ensemble(inst, cfg, rng_loc,
                                       config.diagnostics_trials)
        diagnostics = gaussian_case_diagnostics(inst, samples, cfg.T)

    mean_by_N = {}
    dps_by_N = {}
    for N in config.N_list:
        sub = [r for r in rows if r["N"] == N]
        mean_by_N[N] = float(np.mean([r["algorithm_mse"] for r in sub]))
        dvals = [r["dps_mse"] for r in sub if r["dps_mse"] != ""]
        dps_by_N[N] = float(np.mean(dvals)) if dvals else None

    wall = time.perf_counter() - wall_start
    summary = {
        "config": config.to_dict(),
        "version": version_string(),
        "mean_algorithm_mse_by_N": {str(k): v for k, v in mean_by_N.items()},
        "mmse_reference_by_N": {
            str(k): {"value": v.value, "label": v.label,
                     "fixed_points": list(v.fixed_points)}
            for k, v in mmse_by_N.items()},
        "dps_mean_mse_by_N": {str(k): v for k, v in dps_by_N.items()},
        "wall_clock_seconds": wall,
    }
    if diagnostics is not None:
        summary["kl_per_dim"] = diagnostics.kl_per_dim
        summary["w2_per_sqrt_dim"] = diagnostics.w2_per_sqrt_dim
        summary["diagnostics_shrunk_covariance"] = diagnostics.shrunk
    json_path = os.path.join(config.out_dir, "summary.json")
    with open(json_path, "w") as f:
        json.dump(summary, f, indent=2)

    return MetricsReport(rows, mean_by_N, mmse_by_N, dps_by_N, diagnostics, wall)

"""Euler-Maruyama simulation of the localization SDE dz = m(z, t) dt + dB.

Starting from z = 0, each step adds the drift (the posterior mean of the
signal given y and the current localization observation) times the step
size plus a fresh Brownian increment; after time T the normalized endpoint
z_T / T is returned as the posterior sample. The production drift is the
Bayes-AMP approximation of the posterior mean; reference_localization runs
the identical stepping scheme with an exact drift callable, so paired runs
on the same rng share the noise sequence for coupling experiments.
"""

import time

import numpy as np

from .amp import amp_run

__all__ = ["SamplerConfig", "SampleRun", "localize_sample",
           "localize_ensemble", "reference_localization"]


class SamplerConfig:
    """Sampler parameters (K, T, delta_step).

    The step count L = round(T / delta_step) is forced to an integer and the
    effective step is T / L, so the time grid t_l = l * step hits T exactly.
    """

    def __init__(self, T, delta_step, K, seed=None):
        if T <= 0:
            raise ValueError("T must be > 0")
        if delta_step <= 0:
            raise ValueError("delta_step must be > 0")
        if K < 1:
            raise ValueError("K must be >= 1")
        self.T = float(T)
        self.K = int(K)
        self.seed = seed
        self.n_steps = max(int(round(T / delta_step)), 1)
        self.delta_step = self.T / self.n_steps

    def __repr__(self):
        return (f"SamplerConfig(T={self.T}, delta_step={self.delta_step}, "
                f"K={self.K}, L={self.n_steps})")


class SampleRun:
    """Output of one localization run."""

    def __init__(self, theta_alg, z_final, T, drift_norms, drift_maxabs,
                 z_trajectory, wall_clock, drift_seconds):
        self.theta_alg = theta_alg
        self.z_final = z_final
        self.T = T
        self.drift_norms = drift_norms        # ||m||_2 per step
        self.drift_maxabs = drift_maxabs      # ||m||_inf per step
        self.z_trajectory = z_trajectory      # (L+1, N) when stored
        self.wall_clock = wall_clock
        self.drift_seconds = drift_seconds


def _simulate(instance, config, rng, drift_fn, shape, store_trajectory):
    L = config.n_steps
    dt = config.delta_step
    sq = np.sqrt(dt)
    z = np.zeros(shape)
    drift_norms = np.empty(L)
    drift_maxabs = np.empty(L)
    traj = np.empty((L + 1,) + shape) if store_trajectory else None
    if store_trajectory:
        traj[0] = z
    t_start = time.perf_counter()
    drift_seconds = 0.0
    for l in range(L):
        t_l = l * dt
        d0 = time.perf_counter()
        m = drift_fn(z, t_l)
        drift_seconds += time.perf_counter() - d0
        drift_norms[l] = float(np.mean(np.linalg.norm(np.atleast_2d(m), axis=-1)))
        drift_maxabs[l] = float(np.max(np.abs(m)))
        z = z + m * dt + sq * rng.standard_normal(shape)
        if store_trajectory:
            traj[l + 1] = z
    wall = time.perf_counter() - t_start
    return z, drift_norms, drift_maxabs, traj, wall, drift_seconds


def localize_sample(instance, config, rng, store_trajectory=False,
                    warm_start=False):
    """Draw one posterior sample via the AMP-drift localization process.

    Inputs
        instance         : ModelInstance
        config           : SamplerConfig
        rng              : numpy Generator; one (N,) normal draw per step
        store_trajectory : keep all L+1 localization states (memory L*N)
        warm_start       : seed each step's AMP at the previous step's
                           output instead of zero. Off by default: the
                           cold-start iteration is the analyzed algorithm,
                           and the deterministic tau schedule assumes it.

    Output: SampleRun with theta_alg = z_T / T.
    """
    prev = {"m": None}

    def drift(z, t):
        res = amp_run(instance, z, t, config.K, m0=prev["m"])
        if warm_start:
            prev["m"] = res.m_hat
        return res.m_hat

    z, norms, maxabs, traj, wall, dsec = _simulate(
        instance, config, rng, drift, (instance.N,), store_trajectory)
    return SampleRun(z / config.T, z, config.T, norms, maxabs, traj, wall, dsec)


def localize_ensemble(instance, config, rng, n_samples, warm_start=False):
    """Run n_samples independent localization chains on one shared instance.

    The chains differ only in their Brownian paths and advance in lockstep,
    so each AMP drift evaluation is one batched matrix product. Returns an
    (n_samples, N) array of posterior samples plus the mean per-step drift
    norm (diagnostic).
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    prev = {"m": None}

    def drift(z, t):
        res = amp_run(instance, z, t, config.K, m0=prev["m"])
        if warm_start:
            prev["m"] = res.m_hat
        return res.m_hat

    z, norms, _, _, wall, dsec = _simulate(
        instance, config, rng, drift, (n_samples, instance.N), False)
    return z / config.T, norms


def reference_localization(instance, config, rng, drift_oracle,
                           store_trajectory=False):
    """Same stepping scheme with an exact posterior-mean drift callable.

    drift_oracle(z, t) must return the posterior mean; see
    oracle.gaussian_drift and oracle.enumeration_drift. Seeding rng the same
    way as a paired localize_sample call reproduces the identical Brownian
    increments, which enables coupling-based distance estimates.
    """
    z, norms, maxabs, traj, wall, dsec = _simulate(
        instance, config, rng, drift_oracle, (instance.N,), store_trajectory)
    return SampleRun(z / config.T, z, config.T, norms, maxabs, traj, wall, dsec)


def trajectory_to_csv(run, path, coordinates=(0, 1)):
    """Write l, t_l and z(t_l)/t_l for selected coordinates as CSV.

    The l = 0 row divides by t = 0 and is reported as empty fields.
    """
    if run.z_trajectory is None:
        raise ValueError("run was made without store_trajectory")
    L = run.z_trajectory.shape[0] - 1
    dt = run.T / L
    cols = ["l", "t"] + [f"coord_{c}" for c in coordinates]
    with open(path, "w") as f:
        f.write(",".join(cols) + "\n")
        for l in range(L + 1):
            t_l = l * dt
            if l == 0:
                vals = [""] * len(coordinates)
            else:
                vals = [repr(float(run.z_trajectory[l, c] / t_l)) for c in coordinates]
            f.write(",".join([str(l), f"{t_l!r}"] + vals) + "\n")

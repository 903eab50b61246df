"""Walkthrough: draw posterior samples for the linear model by simulating the
localization diffusion with a Bayes-AMP drift.

The model is y = phi theta + sqrt(Delta/alpha) w with a Rademacher (+-1)
signal. The sampler integrates dz = m(z, t) dt + dB where m is the AMP
estimate of E[theta | y, z]; z_T / T is the posterior sample. We track two
coordinates of z(t)/t, the running sample, at three noise levels: at low
noise they commit to the true signs almost immediately, at high noise the
measurements say little and the commitment happens late, driven by the
localization observation itself.

Writes trajectories to out/trajectory_delta_*.csv (columns l, t, coord_0,
coord_1) and prints a per-noise summary.
"""

import os

import numpy as np

from amploc import SamplerConfig, generate_instance, localize_sample, rademacher_prior
from amploc.sampler import trajectory_to_csv

OUT = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(OUT, exist_ok=True)

prior = rademacher_prior()
N, alpha = 1250, 0.8           # M = 1000 measurements
config = SamplerConfig(T=200.0, delta_step=0.1, K=20)

for delta in (0.01, 1.0, 10.0):
    rng = np.random.default_rng(1)
    inst = generate_instance(prior, N, alpha, delta, rng)
    run = localize_sample(inst, config, np.random.default_rng(2),
                          store_trajectory=True)

    # when does each tracked coordinate commit to a corner?
    samp = run.theta_alg
    agree = np.mean(np.sign(samp) == inst.theta_true)
    near = np.mean(np.abs(np.abs(samp) - 1.0) <= 3 / np.sqrt(config.T))
    path = os.path.join(OUT, f"trajectory_delta_{delta}.csv")
    trajectory_to_csv(run, path, coordinates=(0, 1))
    print(f"delta={delta:5}: sign agreement with truth {agree:.3f}, "
          f"fraction near +-1 {near:.3f}, wall {run.wall_clock:.0f}s -> {path}")

print("\nThe sample z_T/T equals a posterior draw plus N(0, 1/T) smoothing")
print("noise, so 'near +-1' is judged at the 3/sqrt(T) scale above.")

"""State evolution, fixed points, and the uniqueness threshold.

The scalar map E -> mmse*(alpha/(Delta+E) + t) predicts the AMP error per
iteration. Its fixed points decide whether AMP reaches the Bayes error:
a unique fixed point means yes; three fixed points mean the iteration can
stall on the worst one. For the +-1 prior at alpha = 0.5 a middle band of
noise levels has three fixed points, and delta_amp brackets the edge of
that band. The Gaussian prior never develops extra fixed points.

Writes out/phase_diagram.csv and prints the threshold bracket.
"""

import os

import numpy as np

from amploc import (delta_amp, find_fixed_points, gaussian_prior,
                    phase_diagram, rademacher_prior, se_iterate)
from amploc.state_evolution import phase_diagram_to_csv

OUT = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(OUT, exist_ok=True)

rad = rademacher_prior()

# SE trajectory at an easy noise level: fast collapse to ~zero error
trace = se_iterate(rad, 0.8, 0.01, 0.0, 12)
print("SE errors at alpha=0.8, delta=0.01:",
      " ".join(f"{e:.4f}" for e in trace.E_seq[:6]), "...")

# fixed-point structure across the band at alpha = 0.5
for d in (0.005, 0.02, 0.04, 0.06, 0.08):
    rep = find_fixed_points(rad, 0.5, d, 0.0)
    pts = ", ".join(f"{e:.4g}" for e in rep.fixed_points)
    print(f"delta={d:5}: {len(rep.fixed_points)} fixed point(s): [{pts}]")

est = delta_amp(rad, 0.5, 0.1, resolution=5e-4)
print(f"\nuniqueness threshold bracket at alpha=0.5: "
      f"[{est.lower:.4f}, {est.upper:.4f}]")

est_g = delta_amp(gaussian_prior(), 2.0, 2.0, resolution=0.01)
print(f"gaussian prior, alpha=2: no non-uniqueness up to {est_g.scanned_max}")

cells = phase_diagram(rad, [0.4, 0.5, 0.6, 0.8],
                      list(np.round(np.linspace(0.005, 0.1, 20), 4)),
                      [0.0, 0.5, 2.0])
path = os.path.join(OUT, "phase_diagram.csv")
phase_diagram_to_csv(cells, path)
multi = sum(1 for c in cells if not c.unique)
print(f"phase diagram: {len(cells)} cells, {multi} with multiple fixed points "
      f"-> {path}")

"""Scalar state-evolution analysis of the AMP error.

The asymptotic per-coordinate MSE of the AMP iterates obeys the scalar map

    E_{k+1} = mmse_star( alpha / (delta + E_k) + t ),

whose fixed points E = mmse_star(alpha/(delta+E)+t) describe the possible
asymptotic errors. Multiplicity of fixed points signals a computationally
hard phase; delta_amp estimates the largest noise level below which the
t = 0 equation is unique for every smaller noise level.

Indexing: se_iterate starts from the uninformative initialization (error
equal to the prior second moment v), so E_seq[j] predicts the error of AMP
iterate j+1. Equivalently E_seq[j] = alpha * tau_{j+1}^2 - delta.
"""

import numpy as np

from .denoiser import mmse_star

__all__ = ["SeTrace", "FixedPointReport", "DeltaAmpReport", "PhaseCell",
           "se_iterate", "find_fixed_points", "delta_amp", "phase_diagram",
           "phase_diagram_to_csv"]

_E_FLOOR = 1e-300   # keeps alpha/(delta+E) finite at delta = E = 0


class SeTrace:
    """State-evolution trajectory at fixed (alpha, delta, t)."""

    def __init__(self, t, delta, alpha, E_seq, converged, E_inf):
        self.t = t
        self.delta = delta
        self.alpha = alpha
        self.E_seq = E_seq
        self.converged = converged
        self.E_inf = E_inf


class FixedPointReport:
    """All fixed points of the scalar map found on [0, v], with uniqueness."""

    def __init__(self, fixed_points, unique, scan_resolution, residual_tolerance):
        self.fixed_points = fixed_points
        self.unique = unique
        self.scan_resolution = scan_resolution
        self.residual_tolerance = residual_tolerance

    def __repr__(self):
        pts = ", ".join(f"{e:.6g}" for e in self.fixed_points)
        return f"FixedPointReport([{pts}], unique={self.unique})"


class DeltaAmpReport:
    """Bracketing interval for the uniqueness threshold delta_amp.

    finite=False means no non-uniqueness was found up to scanned_max, i.e.
    the estimate is ">= scanned_max". The threshold is reported as an
    interval [lower, upper] at the bisection resolution, never a point.
    """

    def __init__(self, lower, upper, finite, scanned_max):
        self.lower = lower
        self.upper = upper
        self.finite = finite
        self.scanned_max = scanned_max

    def __repr__(self):
        if not self.finite:
            return f"DeltaAmpReport(>= {self.scanned_max})"
        return f"DeltaAmpReport([{self.lower:.6g}, {self.upper:.6g}])"


def _se_map(E, prior, alpha, delta, t):
    E = np.maximum(np.asarray(E, dtype=float), _E_FLOOR)
    return mmse_star(alpha / (delta + E) + t, prior)


def se_iterate(prior, alpha, delta, t, K, E0=None, residual_tol=1e-12):
    """Iterate the state-evolution map for up to K steps.

    E0 defaults to the prior second moment v (the uninformative start, which
    matches AMP initialized at zero); E_seq[0] is then the predicted error of
    the first denoised iterate. Stops early once successive values differ by
    less than residual_tol.
    """
    if alpha <= 0 or delta < 0 or t < 0 or K < 1:
        raise ValueError("need alpha > 0, delta >= 0, t >= 0, K >= 1")
    E_prev = prior.second_moment if E0 is None else float(E0)
    seq = []
    converged = False
    for _ in range(K):
        E_next = float(_se_map(E_prev, prior, alpha, delta, t))
        seq.append(E_next)
        if abs(E_next - E_prev) < residual_tol:
            converged = True
            break
        E_prev = E_next
    return SeTrace(t, delta, alpha, np.asarray(seq), converged, seq[-1])


def find_fixed_points(prior, alpha, delta, t=0.0, grid_size=400,
                      residual_tolerance=1e-9, xtol=1e-12):
    """All solutions of E = mmse_star(alpha/(delta+E)+t) on [0, v].

    Brackets every sign change of g(E) = map(E) - E on a uniform grid and
    refines each bracket by bisection to xtol. g(0) >= 0 and g(v) <= 0, so at
    least one fixed point always exists; when the map value at 0 is already
    below residual_tolerance the fixed point sits at the floating-point floor
    and is reported as that map value directly. At delta = 0, E = 0 is an
    exact fixed point for every supported prior (perfect recovery at infinite
    SNR) and is included analytically.
    """
    if grid_size < 100:
        raise ValueError("grid_size must be >= 100")
    v = prior.second_moment

    def g(E):
        return _se_map(E, prior, alpha, delta, t) - np.asarray(E, dtype=float)

    roots = []
    if delta == 0.0:
        roots.append(0.0)

    grid = np.linspace(0.0, v, grid_size + 1)
    gv = g(grid)

    g0 = float(gv[0])
    if delta > 0.0 and 0.0 <= g0 <= residual_tolerance:
        # map(0) is itself (numerically) the fixed point near the origin
        roots.append(g0)

    for i in range(grid_size):
        a, b = grid[i], grid[i + 1]
        ga, gb = float(gv[i]), float(gv[i + 1])
        if ga == 0.0:
            if a > 0.0:
                roots.append(a)
            continue
        if ga * gb >= 0.0:
            continue
        if i == 0 and roots and roots[-1] <= residual_tolerance:
            continue    # the near-origin root was already recorded
        lo, hi, glo = a, b, ga
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            gm = float(g(mid))
            if gm == 0.0:
                lo = hi = mid
                break
            if np.sign(gm) == np.sign(glo):
                lo, glo = mid, gm
            else:
                hi = mid
            if hi - lo <= xtol:
                break
        roots.append(0.5 * (lo + hi))
    if float(gv[-1]) == 0.0:
        roots.append(float(grid[-1]))

    roots = sorted(float(rt) for rt in roots)
    dedup = []
    for rt in roots:
        if not dedup or rt - dedup[-1] > max(10 * xtol, 1e-11):
            dedup.append(rt)
    dedup = [rt for rt in dedup
             if abs(float(g(rt))) <= max(residual_tolerance, 1e-9)]
    return FixedPointReport(dedup, len(dedup) == 1, grid_size, residual_tolerance)


def delta_amp(prior, alpha, delta_max, resolution=1e-3, grid_size=400,
              scan_points=200):
    """Estimate the uniqueness threshold for the t = 0 fixed-point equation.

    Scans delta upward on a coarse grid; the threshold is the first noise
    level at which uniqueness fails, refined by bisection to `resolution`
    and returned as a DeltaAmpReport interval. If uniqueness holds all the
    way to delta_max the report says ">= delta_max".
    """
    if delta_max <= 0:
        raise ValueError("delta_max must be > 0")
    deltas = np.linspace(delta_max / scan_points, delta_max, scan_points)

    def unique_at(d):
        return find_fixed_points(prior, alpha, d, 0.0, grid_size=grid_size).unique

    first_bad = None
    for i, d in enumerate(deltas):
        if not unique_at(d):
            first_bad = i
            break
    if first_bad is None:
        return DeltaAmpReport(float(delta_max), np.inf, False, float(delta_max))
    lo = deltas[first_bad - 1] if first_bad > 0 else 0.0
    hi = deltas[first_bad]
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if unique_at(mid):
            lo = mid
        else:
            hi = mid
    return DeltaAmpReport(float(lo), float(hi), True, float(delta_max))


class PhaseCell:
    """One (alpha, delta, t) cell of a fixed-point phase diagram."""

    __slots__ = ("alpha", "delta", "t", "fixed_points", "unique")

    def __init__(self, alpha, delta, t, fixed_points, unique):
        self.alpha = alpha
        self.delta = delta
        self.t = t
        self.fixed_points = fixed_points
        self.unique = unique


def phase_diagram(prior, alpha_grid, delta_grid, t_grid, grid_size=400):
    """Fixed-point counts over a parameter grid; cells are independent."""
    alpha_grid = list(alpha_grid)
    delta_grid = list(delta_grid)
    t_grid = list(t_grid)
    if not alpha_grid or not delta_grid or not t_grid:
        raise ValueError("grids must be nonempty")
    cells = []
    for a in alpha_grid:
        for d in delta_grid:
            for t in t_grid:
                rep = find_fixed_points(prior, a, d, t, grid_size=grid_size)
                cells.append(PhaseCell(a, d, t, rep.fixed_points, rep.unique))
    return cells


def phase_diagram_to_csv(cells, path):
    """CSV with columns alpha, delta, t, n_fixed_points, E_1..E_n, unique."""
    n_max = max(len(c.fixed_points) for c in cells)
    cols = ["alpha", "delta", "t", "n_fixed_points"]
    cols += [f"E_{i + 1}" for i in range(n_max)]
    cols += ["unique"]
    with open(path, "w") as f:
        f.write(",".join(cols) + "\n")
        for c in cells:
            es = [repr(float(e)) for e in c.fixed_points]
            es += [""] * (n_max - len(c.fixed_points))
            row = [repr(float(c.alpha)), repr(float(c.delta)), repr(float(c.t)),
                   str(len(c.fixed_points))] + es + [str(c.unique).lower()]
            f.write(",".join(row) + "\n")

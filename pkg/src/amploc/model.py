"""Product priors and the Gaussian random linear observation model.

The observation model is

    y = phi @ theta + sqrt(delta/alpha) * w,

with phi an M-by-N matrix of i.i.d. N(0, 1/M) entries, theta drawn
coordinate-wise from a scalar prior, w standard normal, alpha = M/N the
measurement rate and delta the noise variance.
"""

import json

import numpy as np

__all__ = [
    "Prior",
    "ModelInstance",
    "discrete_prior",
    "rademacher_prior",
    "gaussian_prior",
    "bounded_density_prior",
    "prior_from_dict",
    "prior_to_dict",
    "sample_prior",
    "prior_second_moment",
    "generate_instance",
    "load_model_config",
    "save_instance",
    "load_instance",
    "save_instance_csv",
]

_ATOM_PROB_TOL = 1e-12


class Prior:
    """Scalar product prior: discrete atoms, Gaussian, or a bounded density.

    A bounded density is represented by a fixed quadrature table (nodes and
    normalized weights over [-support_bound, support_bound]) so the object is
    serializable; the table nodes then carry the whole measure. An optional
    in-memory `pdf` callable is kept when the prior was built from one, for
    independent dense-integration cross checks.
    """

    def __init__(self, kind, values=None, probs=None, gauss_mean=None,
                 gauss_var=None, support_bound=None, pdf=None):
        if kind not in ("discrete", "gaussian", "bounded_density"):
            raise ValueError(f"unknown prior kind {kind!r}")
        self.kind = kind
        self.pdf = pdf
        if kind == "gaussian":
            if gauss_var is None or gauss_var <= 0:
                raise ValueError("gaussian prior needs variance > 0")
            self.gauss_mean = float(gauss_mean)
            self.gauss_var = float(gauss_var)
            self.values = None
            self.probs = None
            self.support_bound = np.inf
            self.mean = self.gauss_mean
            self.second_moment = self.gauss_var + self.gauss_mean ** 2
        else:
            values = np.asarray(values, dtype=float)
            probs = np.asarray(probs, dtype=float)
            if values.ndim != 1 or values.shape != probs.shape or values.size == 0:
                raise ValueError("atom values/probabilities must be matching 1-d arrays")
            if np.any(probs < 0):
                raise ValueError("atom probabilities must be nonnegative")
            total = probs.sum()
            if kind == "discrete":
                if abs(total - 1.0) > _ATOM_PROB_TOL:
                    raise ValueError(f"atom probabilities sum to {total}, not 1")
                probs = probs / total  # remove the residual rounding
            else:
                if total <= 0:
                    raise ValueError("density table has zero mass")
                probs = probs / total
            L = float(np.max(np.abs(values))) if support_bound is None else float(support_bound)
            if np.any(np.abs(values) > L * (1 + 1e-12) + 1e-300):
                raise ValueError("atom values exceed the stated support bound")
            order = np.argsort(values)
            self.values = values[order]
            self.probs = probs[order]
            self.gauss_mean = None
            self.gauss_var = None
            self.support_bound = L
            self.mean = float(np.dot(self.probs, self.values))
            self.second_moment = float(np.dot(self.probs, self.values ** 2))

    @property
    def variance(self):
        return self.second_moment - self.mean ** 2

    def __repr__(self):
        if self.kind == "gaussian":
            return f"Prior(gaussian, mean={self.gauss_mean}, var={self.gauss_var})"
        return f"Prior({self.kind}, {len(self.values)} atoms, L={self.support_bound})"


def discrete_prior(atoms):
    """Prior from a list of (value, probability) pairs."""
    atoms = list(atoms)
    vals = [a[0] for a in atoms]
    ps = [a[1] for a in atoms]
    return Prior("discrete", values=vals, probs=ps)


def rademacher_prior():
    """Uniform prior on {-1, +1}."""
    return discrete_prior([(-1.0, 0.5), (1.0, 0.5)])


def gaussian_prior(mean=0.0, var=1.0):
    return Prior("gaussian", gauss_mean=mean, gauss_var=var)


def bounded_density_prior(pdf, support_bound, n_nodes=201):
    """Prior from a density on [-support_bound, support_bound].

    The density is reduced to a Gauss-Legendre table of `n_nodes` atoms whose
    weights are (GL weight) * pdf(node), normalized to total mass one. The
    table then IS the prior for all downstream computation.
    """
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    L = float(support_bound)
    nodes = x * L
    dens = np.asarray([pdf(v) for v in nodes], dtype=float)
    if np.any(dens < 0):
        raise ValueError("density must be nonnegative on the support")
    weights = w * L * dens
    return Prior("bounded_density", values=nodes, probs=weights,
                 support_bound=L, pdf=pdf)


def prior_from_dict(spec):
    """Build a Prior from a JSON-style dict.

    Accepted forms:
      {"kind": "discrete", "atoms": [[v, p], ...]}
      {"kind": "gaussian", "mean": m, "var": s2}
      {"kind": "bounded_density", "table": [[x, w], ...], "support_bound": L}
    """
    kind = spec["kind"]
    if kind == "discrete":
        return discrete_prior([(float(v), float(p)) for v, p in spec["atoms"]])
    if kind == "gaussian":
        return gaussian_prior(float(spec.get("mean", 0.0)), float(spec.get("var", 1.0)))
    if kind == "bounded_density":
        table = np.asarray(spec["table"], dtype=float)
        return Prior("bounded_density", values=table[:, 0], probs=table[:, 1],
                     support_bound=float(spec["support_bound"]))
    raise ValueError(f"unknown prior kind {kind!r}")


def prior_to_dict(prior):
    if prior.kind == "gaussian":
        return {"kind": "gaussian", "mean": prior.gauss_mean, "var": prior.gauss_var}
    if prior.kind == "discrete":
        return {"kind": "discrete", "atoms": [[v, p] for v, p in zip(prior.values, prior.probs)]}
    return {"kind": "bounded_density",
            "table": [[v, p] for v, p in zip(prior.values, prior.probs)],
            "support_bound": prior.support_bound}


def sample_prior(prior, n, rng):
    """Draw n i.i.d. coordinates from the prior. Deterministic given rng state."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if prior.kind == "gaussian":
        return prior.gauss_mean + np.sqrt(prior.gauss_var) * rng.standard_normal(n)
    return rng.choice(prior.values, size=n, p=prior.probs)


def prior_second_moment(prior):
    """Per-coordinate second moment v = E[theta^2]."""
    return prior.second_moment


class ModelInstance:
    """One realization (phi, theta, w, y) of the linear observation model."""

    def __init__(self, prior, N, M, alpha, delta, phi, theta_true, w, y):
        self.prior = prior
        self.N = int(N)
        self.M = int(M)
        self.alpha = float(alpha)
        self.delta = float(delta)
        self.phi = phi
        self.theta_true = theta_true
        self.w = w
        self.y = y

    def reconstruction_residual(self):
        """Relative norm of y - phi theta - sqrt(delta/alpha) w (should be ~0)."""
        resid = self.y - self.phi @ self.theta_true - np.sqrt(self.delta / self.alpha) * self.w
        scale = max(np.linalg.norm(self.y), 1e-300)
        return np.linalg.norm(resid) / scale

    def __repr__(self):
        return (f"ModelInstance(N={self.N}, M={self.M}, alpha={self.alpha}, "
                f"delta={self.delta}, prior={self.prior.kind})")


def generate_instance(prior, N, alpha, delta, rng, noise_rng=None):
    """Generate a ModelInstance with M = round(alpha N).

    Inputs
        prior     : Prior for the signal coordinates
        N         : signal dimension (>= 1)
        alpha     : measurement rate (> 0)
        delta     : noise variance (>= 0)
        rng       : stream for the signal draw
        noise_rng : optional separate stream for phi and w; defaults to rng.
                    Keeping it separate pairs ablations that vary the prior.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    if delta < 0:
        raise ValueError("delta must be >= 0")
    if noise_rng is None:
        noise_rng = rng
    M = int(round(alpha * N))
    if M < 1:
        raise ValueError(f"alpha*N rounds to M={M} < 1")
    theta = sample_prior(prior, N, rng)
    phi = noise_rng.standard_normal((M, N)) / np.sqrt(M)
    w = noise_rng.standard_normal(M)
    y = phi @ theta + np.sqrt(delta / alpha) * w
    return ModelInstance(prior, N, M, alpha, delta, phi, theta, w, y)


def load_model_config(path_or_dict):
    """Read (prior, N, alpha, delta, seed) from a JSON config file or dict."""
    if isinstance(path_or_dict, dict):
        cfg = path_or_dict
    else:
        with open(path_or_dict) as f:
            cfg = json.load(f)
    prior = prior_from_dict(cfg["prior"])
    return prior, cfg["N"], float(cfg["alpha"]), float(cfg["delta"]), cfg.get("seed", 0)


def save_instance(instance, path):
    """Dump an instance to a .npz archive (binary, exact)."""
    np.savez_compressed(
        path,
        phi=instance.phi, theta_true=instance.theta_true, w=instance.w, y=instance.y,
        alpha=instance.alpha, delta=instance.delta,
        prior_json=json.dumps(prior_to_dict(instance.prior)),
    )


def load_instance(path):
    d = np.load(path, allow_pickle=False)
    prior = prior_from_dict(json.loads(str(d["prior_json"])))
    phi = d["phi"]
    M, N = phi.shape
    return ModelInstance(prior, N, M, float(d["alpha"]), float(d["delta"]),
                         phi, d["theta_true"], d["w"], d["y"])


def save_instance_csv(instance, prefix):
    """Dump phi/theta/w/y as plain CSV matrices with the given path prefix."""
    np.savetxt(f"{prefix}_phi.csv", instance.phi, delimiter=",")
    np.savetxt(f"{prefix}_theta.csv", instance.theta_true, delimiter=",")
    np.savetxt(f"{prefix}_w.csv", instance.w, delimiter=",")
    np.savetxt(f"{prefix}_y.csv", instance.y, delimiter=",")

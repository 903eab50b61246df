"""Scalar MMSE denoiser for the two-Gaussian-channel observation structure.

A coordinate x with prior P0 is observed through two independent channels:

    u = x + Sigma * v,      v ~ N(0, 1)          (pseudo-data channel)
    z = t * x + g_t,        g_t ~ N(0, t)        (localization channel)

Completing the square shows the posterior of x depends on (u, z) only through
a single effective Gaussian channel with

    precision  s_eff = 1/Sigma^2 + t
    location   u_eff = (u/Sigma^2 + z) / s_eff

so every quantity here is computed through that sufficient statistic. At
t = 0 the localization channel carries no information and is dropped.

eta is the posterior mean, eta' its derivative in u (equal to the posterior
variance divided by Sigma^2), and mmse_star(s) is the scalar minimum mean
squared error at signal-to-noise ratio s.
"""

import numpy as np

__all__ = [
    "EffectiveChannel",
    "QuadratureTable",
    "effective_channel",
    "eta_scalar",
    "eta_prime_scalar",
    "eta_vector",
    "eta_and_prime",
    "mmse_star",
    "mmse_two_channel",
]

DEFAULT_NORMAL_NODES = 61


class EffectiveChannel:
    """Sufficient statistic (location, precision) of the combined channel."""

    __slots__ = ("location", "precision")

    def __init__(self, location, precision):
        self.location = location
        self.precision = precision


def effective_channel(u, sigma2, z, t):
    """Reduce the two channels to one. t = 0 means the z-channel is absent."""
    if sigma2 <= 0:
        raise ValueError("sigma2 must be > 0")
    if t < 0:
        raise ValueError("t must be >= 0")
    u = np.asarray(u, dtype=float)
    if t == 0:
        return EffectiveChannel(u, 1.0 / sigma2)
    prec = 1.0 / sigma2 + t
    loc = (u / sigma2 + np.asarray(z, dtype=float)) / prec
    return EffectiveChannel(loc, prec)


class QuadratureTable:
    """Nodes and weights for the expectations used by the denoiser.

    normal_nodes/normal_weights integrate against a standard normal
    (Gauss-Hermite, probabilists' convention, weights normalized to sum 1).
    prior_nodes/prior_weights are only populated for bounded-density priors
    and mirror the prior's own table.
    """

    def __init__(self, normal_nodes=DEFAULT_NORMAL_NODES, prior=None):
        x, w = np.polynomial.hermite_e.hermegauss(normal_nodes)
        self.normal_nodes = x
        self.normal_weights = w / w.sum()
        if prior is not None and prior.kind == "bounded_density":
            self.prior_nodes = prior.values
            self.prior_weights = prior.probs
        else:
            self.prior_nodes = None
            self.prior_weights = None


_DEFAULT_TABLE = QuadratureTable()


def _posterior_mean_var(prior, loc, prec):
    """Posterior mean and variance of x given one Gaussian channel.

    loc is an array of channel locations; prec is a scalar precision or an
    array broadcastable against loc. prec = 0 returns the prior mean and
    variance. Discrete and table priors use exact log-sum-exp sums over
    their atoms; the Gaussian prior is conjugate.
    """
    loc = np.asarray(loc, dtype=float)
    prec = np.asarray(prec, dtype=float)
    if prior.kind == "gaussian":
        s0 = 1.0 / prior.gauss_var
        post_prec = s0 + prec
        mean = (prior.gauss_mean * s0 + prec * loc) / post_prec
        var = np.broadcast_to(1.0 / post_prec, mean.shape).copy()
        return mean, var
    a = prior.values            # (J,)
    logp = np.log(prior.probs + 1e-300)
    # exp(prec*(a*loc - a^2/2)) * p_j; the common factor exp(-prec*loc^2/2)
    # cancels in the normalization, which keeps the logits bounded
    logits = logp + prec[..., None] * (loc[..., None] * a - 0.5 * a * a)
    logits -= logits.max(axis=-1, keepdims=True)
    wgt = np.exp(logits)
    wgt /= wgt.sum(axis=-1, keepdims=True)
    mean = wgt @ a
    second = wgt @ (a * a)
    var = np.maximum(second - mean * mean, 0.0)
    return mean, var


def _check_inputs(u, sigma2, z, t, prior):
    if not np.all(np.isfinite(u)) or not np.all(np.isfinite(z)):
        raise ValueError("non-finite denoiser input")
    if prior.kind != "gaussian" and prior.values.size == 0:
        raise ValueError("prior has empty support")
    if sigma2 <= 0 or not np.isfinite(sigma2):
        raise ValueError("sigma2 must be positive and finite")
    if t < 0:
        raise ValueError("t must be >= 0")


def eta_scalar(u, sigma2, z, t, prior):
    """Posterior mean of x given u at noise variance sigma2 and z at time t."""
    _check_inputs(u, sigma2, z, t, prior)
    ch = effective_channel(u, sigma2, z, t)
    mean, _ = _posterior_mean_var(prior, np.atleast_1d(ch.location), ch.precision)
    return float(mean.ravel()[0])


def eta_prime_scalar(u, sigma2, z, t, prior):
    """d eta / d u, which equals the posterior variance divided by sigma2."""
    _check_inputs(u, sigma2, z, t, prior)
    ch = effective_channel(u, sigma2, z, t)
    _, var = _posterior_mean_var(prior, np.atleast_1d(ch.location), ch.precision)
    return float(var.ravel()[0] / sigma2)


def eta_vector(u, sigma2, z, t, prior):
    """Coordinate-wise eta on arrays u and z of equal shape."""
    u = np.asarray(u, dtype=float)
    z = np.asarray(z, dtype=float)
    if u.shape != z.shape:
        raise ValueError(f"shape mismatch: u {u.shape} vs z {z.shape}")
    _check_inputs(u, sigma2, z, t, prior)
    ch = effective_channel(u, sigma2, z, t)
    mean, _ = _posterior_mean_var(prior, ch.location, ch.precision)
    return mean


def eta_and_prime(u, sigma2, z, t, prior):
    """eta and eta' together from one posterior evaluation (used by AMP)."""
    u = np.asarray(u, dtype=float)
    z = np.asarray(z, dtype=float)
    if u.shape != z.shape:
        raise ValueError(f"shape mismatch: u {u.shape} vs z {z.shape}")
    _check_inputs(u, sigma2, z, t, prior)
    ch = effective_channel(u, sigma2, z, t)
    mean, var = _posterior_mean_var(prior, ch.location, ch.precision)
    return mean, var / sigma2


def mmse_star(s, prior, table=None):
    """Scalar mmse at SNR s: E[(x - E[x | x + G/sqrt(s)])^2].

    Accepts a scalar or an array of SNRs; nonincreasing in s, valued in
    [0, Var(x)]. Computed in the direct error-moment form, which stays
    nonnegative under roundoff even when the error is at the 1e-16 level
    (large s). The Gaussian prior uses the conjugate closed form
    var / (1 + var * s).
    """
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 0):
        raise ValueError("s must be >= 0")
    scalar_in = s_arr.ndim == 0
    s_flat = np.atleast_1d(s_arr).ravel()

    if prior.kind == "gaussian":
        out = prior.gauss_var / (1.0 + prior.gauss_var * s_flat)
    else:
        if table is None:
            table = _DEFAULT_TABLE
        g = table.normal_nodes          # (Q,)
        wq = table.normal_weights
        a = prior.values                # (J,)
        pa = prior.probs
        J, Q = a.size, g.size
        out = np.empty_like(s_flat)
        zero = s_flat == 0.0
        out[zero] = prior.variance
        pos_idx = np.nonzero(~zero)[0]
        # keep (chunk, J, Q, J) logits under ~8e6 elements
        s_chunk = max(1, int(8e6 // max(J * J * Q, 1)))
        for c0 in range(0, pos_idx.size, s_chunk):
            idx = pos_idx[c0:c0 + s_chunk]
            sp = s_flat[idx]                                      # (C,)
            y = a[None, :, None] + g[None, None, :] / np.sqrt(sp)[:, None, None]
            mean, _ = _posterior_mean_var(prior, y, sp[:, None, None])
            err2 = (a[None, :, None] - mean) ** 2                 # (C, J, Q)
            vals = np.einsum("j,q,cjq->c", pa, wq, err2)
            out[idx] = np.minimum(vals, prior.variance)
    if scalar_in:
        return float(out[0])
    return out.reshape(np.atleast_1d(s_arr).shape)


def mmse_two_channel(s, t, prior, table=None):
    """mmse for the two-channel observation; exactly mmse_star(s + t)."""
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 0) or t < 0:
        raise ValueError("s and t must be >= 0")
    return mmse_star(s_arr + t, prior, table=table)

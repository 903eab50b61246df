"""Bayes-AMP iteration for the posterior mean, with Onsager correction.

Iterates, starting from m0 = 0, r0 = y, b0 = 0:

    b_{k+1} = mean( eta'(phi^T r_k + m_k; tau_k^2, z, t) ) / alpha
    m_{k+1} = eta(phi^T r_k + m_k; tau_k^2, z, t)
    r_{k+1} = y - phi m_{k+1} + b_{k+1} r_k

where the Onsager memory term b r decorrelates successive residuals so that
the denoiser input m_k + phi^T r_k behaves like the signal plus Gaussian
noise of variance tau_k^2. tau^2 follows the deterministic recursion

    tau_0^2     = (delta + v) / alpha
    tau_{k+1}^2 = (delta + mmse_star(1/tau_k^2 + t)) / alpha.

z may be a single length-N vector or a (B, N) batch sharing one instance,
in which case every state field picks up a leading batch axis.
"""

import numpy as np

from .denoiser import eta_and_prime, mmse_star

__all__ = ["AmpState", "AmpRunResult", "AmpDivergenceError",
           "amp_init", "amp_step", "amp_run", "tau_sequence", "trace_to_csv"]


class AmpDivergenceError(RuntimeError):
    """Non-finite value encountered; names the iteration and the quantity."""

    def __init__(self, iteration, quantity):
        self.iteration = iteration
        self.quantity = quantity
        super().__init__(f"AMP diverged at iteration {iteration}: non-finite {quantity}")


class AmpState:
    """AMP iterate: estimate m_hat, residual r, variance tau2, Onsager b."""

    __slots__ = ("k", "m_hat", "r", "tau2", "b", "t", "z")

    def __init__(self, k, m_hat, r, tau2, b, t, z):
        self.k = k
        self.m_hat = m_hat
        self.r = r
        self.tau2 = tau2
        self.b = b
        self.t = t
        self.z = z


class AmpRunResult:
    """Final estimate plus per-iteration diagnostics rows."""

    def __init__(self, m_hat, trace, state):
        self.m_hat = m_hat
        self.trace = trace    # list of (k, tau2, residual_norm, empirical_mse)
        self.state = state


def amp_init(instance, z, t, m0=None):
    """Initial state: m_hat = 0, r = y, b = 0, tau0^2 = (delta + v)/alpha.

    m0, when given, warm-starts the estimate (r becomes y - phi m0); the
    deterministic tau schedule still assumes a cold start, so warm starting
    is an optimization knob, not part of the analyzed algorithm.
    """
    z = np.asarray(z, dtype=float)
    if z.shape[-1] != instance.N:
        raise ValueError(f"z has trailing dim {z.shape[-1]}, expected N={instance.N}")
    if t < 0:
        raise ValueError("t must be >= 0")
    batch = z.shape[:-1]
    if m0 is None:
        m_hat = np.zeros(batch + (instance.N,))
        r = np.broadcast_to(instance.y, batch + (instance.M,)).copy()
    else:
        m_hat = np.broadcast_to(np.asarray(m0, dtype=float),
                                batch + (instance.N,)).copy()
        r = instance.y - m_hat @ instance.phi.T
    tau2 = (instance.delta + instance.prior.second_moment) / instance.alpha
    b = np.zeros(batch) if batch else 0.0
    return AmpState(0, m_hat, r, tau2, b, float(t), z)


def amp_step(state, instance, tau2_mode="deterministic"):
    """One AMP iteration; returns a new state, inputs untouched.

    tau2_mode "deterministic" advances tau2 by the scalar recursion (the
    contract); "empirical" estimates it as ||r||^2 / M, for diagnostics only.
    """
    phi, y = instance.phi, instance.y
    prior, alpha = instance.prior, instance.alpha
    u = state.r @ phi + state.m_hat
    if not np.all(np.isfinite(u)):
        raise AmpDivergenceError(state.k + 1, "denoiser input")
    eta, eta_p = eta_and_prime(u, state.tau2, state.z, state.t, prior)
    b_new = eta_p.mean(axis=-1) / alpha
    if eta.ndim > 1:
        r_new = y - eta @ phi.T + b_new[..., None] * state.r
    else:
        r_new = y - phi @ eta + b_new * state.r
    if tau2_mode == "deterministic":
        tau2_new = (instance.delta
                    + mmse_star(1.0 / state.tau2 + state.t, prior)) / alpha
    elif tau2_mode == "empirical":
        tau2_new = float(np.mean(r_new ** 2))
    else:
        raise ValueError(f"unknown tau2_mode {tau2_mode!r}")
    k_new = state.k + 1
    for name, arr in (("m_hat", eta), ("r", r_new)):
        if not np.all(np.isfinite(arr)):
            raise AmpDivergenceError(k_new, name)
    if not np.isfinite(tau2_new):
        raise AmpDivergenceError(k_new, "tau2")
    return AmpState(k_new, eta, r_new, tau2_new, b_new, state.t, state.z)


def amp_run(instance, z, t, K, tau2_mode="deterministic", early_stop_tol=None,
            theta_ref=None, m0=None):
    """Run K AMP iterations and return the estimate with diagnostics.

    Inputs
        instance       : ModelInstance
        z              : localization observation, (N,) or (B, N)
        t              : localization time, >= 0
        K              : iteration count, >= 1
        tau2_mode      : see amp_step
        early_stop_tol : if set, halt once |tau2_{k+1}-tau2_k| < tol
        theta_ref      : optional true signal; adds empirical MSE to trace
        m0             : optional warm-start estimate (see amp_init)

    Output: AmpRunResult with m_hat = m^(K) and trace rows
    (k, tau2, residual_norm, empirical_mse) per completed iteration.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    state = amp_init(instance, z, t, m0=m0)
    trace = []
    for _ in range(K):
        tau2_prev = state.tau2
        state = amp_step(state, instance, tau2_mode=tau2_mode)
        res_norm = float(np.mean(np.linalg.norm(state.r, axis=-1))) \
            if state.r.ndim > 1 else float(np.linalg.norm(state.r))
        if theta_ref is not None:
            diff = state.m_hat - theta_ref
            mse = float(np.mean(np.sum(diff * diff, axis=-1)) / instance.N)
        else:
            mse = float("nan")
        trace.append((state.k, float(np.atleast_1d(state.tau2)[0]), res_norm, mse))
        if early_stop_tol is not None and abs(state.tau2 - tau2_prev) < early_stop_tol:
            break
    return AmpRunResult(state.m_hat, trace, state)


def tau_sequence(prior, alpha, delta, t, K):
    """Deterministic tau^2 sequence [tau_0^2, ..., tau_K^2].

    Nonincreasing and bounded below by delta/alpha.
    """
    if K < 0:
        raise ValueError("K must be >= 0")
    taus = np.empty(K + 1)
    taus[0] = (delta + prior.second_moment) / alpha
    for k in range(K):
        taus[k + 1] = (delta + mmse_star(1.0 / taus[k] + t, prior)) / alpha
    return taus


def trace_to_csv(trace, path):
    """Write amp_run diagnostics as CSV rows."""
    with open(path, "w") as f:
        f.write("k,tau2,residual_norm,empirical_mse\n")
        for k, tau2, res, mse in trace:
            f.write(f"{k},{tau2!r},{res!r},{mse!r}\n")

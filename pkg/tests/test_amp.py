import numpy as np
import pytest

from amploc.amp import (AmpDivergenceError, amp_init, amp_run, amp_step,
                        tau_sequence, trace_to_csv)
from amploc.denoiser import mmse_star
from amploc.model import (ModelInstance, gaussian_prior, generate_instance,
                          rademacher_prior)

RAD = rademacher_prior()
GAUSS = gaussian_prior(0.0, 1.0)


def test_amp_init_values():
    inst = generate_instance(GAUSS, 30, 2.0, 0.01, np.random.default_rng(0))
    st = amp_init(inst, np.zeros(30), 0.0)
    assert st.tau2 == pytest.approx(0.505)
    assert np.array_equal(st.r, inst.y)
    assert np.all(st.m_hat == 0.0) and st.b == 0.0 and st.k == 0
    inst2 = generate_instance(GAUSS, 30, 0.8, 1.0, np.random.default_rng(0))
    assert amp_init(inst2, np.zeros(30), 0.0).tau2 == pytest.approx(2.5)
    with pytest.raises(ValueError):
        amp_init(inst, np.zeros(29), 0.0)


def test_amp_step_counter_and_tau_floor():
    inst = generate_instance(RAD, 60, 0.8, 0.05, np.random.default_rng(1))
    st = amp_init(inst, np.zeros(60), 0.0)
    for k in range(6):
        st = amp_step(st, inst)
        assert st.k == k + 1
        assert st.tau2 >= inst.delta / inst.alpha - 1e-15
        assert np.max(np.abs(st.m_hat)) <= 1.0 + 1e-12


def test_gaussian_prior_linear_recursion_oracle():
    # for the gaussian prior eta is affine, so the whole iteration has an
    # explicit linear form; re-derive it without the denoiser module
    inst = generate_instance(GAUSS, 80, 2.0, 0.1, np.random.default_rng(2))
    t = 0.8
    z = np.random.default_rng(3).standard_normal(80)
    taus = tau_sequence(GAUSS, inst.alpha, inst.delta, t, 12)
    m = np.zeros(80)
    r = inst.y.copy()
    for k in range(12):
        tau2 = taus[k]
        denom = 1.0 + 1.0 / tau2 + t
        c = (1.0 / tau2) / denom
        u = inst.phi.T @ r + m
        m_next = c * u + z / denom
        b = c / inst.alpha
        r = inst.y - inst.phi @ m_next + b * r
        m = m_next
    got = amp_run(inst, z, t, 12).m_hat
    assert np.max(np.abs(got - m)) < 1e-10


def test_rademacher_low_noise_sign_recovery():
    inst = generate_instance(RAD, 1250, 0.8, 0.01, np.random.default_rng(4))
    res = amp_run(inst, np.zeros(1250), 0.0, 20)
    frac = np.mean(np.abs(res.m_hat) >= 0.99)
    assert frac >= 0.95


def test_symmetric_zero_fixed_point():
    inst = generate_instance(RAD, 40, 1.0, 0.5, np.random.default_rng(5))
    zero = ModelInstance(RAD, inst.N, inst.M, inst.alpha, inst.delta,
                         inst.phi, inst.theta_true, inst.w, np.zeros(inst.M))
    res = amp_run(zero, np.zeros(40), 0.0, 10)
    assert np.allclose(res.m_hat, 0.0, atol=1e-14)


def test_amp_run_one_step_unrolled():
    from amploc.denoiser import eta_vector
    inst = generate_instance(RAD, 50, 0.8, 0.1, np.random.default_rng(6))
    z = np.random.default_rng(7).standard_normal(50)
    t = 0.4
    res = amp_run(inst, z, t, 1)
    tau0 = (inst.delta + 1.0) / inst.alpha
    want = eta_vector(inst.phi.T @ inst.y, tau0, z, t, RAD)
    assert np.allclose(res.m_hat, want, atol=1e-14)
    assert len(res.trace) == 1


def test_mse_nonincreasing_in_k():
    # Monte Carlo over 20 seeds at N=2000: mean MSE per iterate never rises
    # by more than the stated tolerance
    N, K = 2000, 8
    mses = np.zeros((20, K))
    for s in range(20):
        inst = generate_instance(RAD, N, 0.8, 0.01, np.random.default_rng(100 + s))
        res = amp_run(inst, np.zeros(N), 0.0, K, theta_ref=inst.theta_true)
        mses[s] = [row[3] for row in res.trace]
    mean = mses.mean(axis=0)
    assert np.all(np.diff(mean) <= 0.01)


def test_se_tracking_invariant():
    # empirical MSE matches the tau-derived prediction within 5/sqrt(N)+0.01
    N = 2000
    taus = tau_sequence(RAD, 0.8, 0.01, 0.0, 11)
    pred = 0.8 * taus[1:] - 0.01
    mses = np.zeros((20, 10))
    for s in range(20):
        inst = generate_instance(RAD, N, 0.8, 0.01, np.random.default_rng(200 + s))
        res = amp_run(inst, np.zeros(N), 0.0, 10, theta_ref=inst.theta_true)
        mses[s] = [row[3] for row in res.trace]
    dev = np.abs(mses.mean(axis=0) - pred[:10])
    assert np.max(dev) <= 5.0 / np.sqrt(N) + 0.01


def test_onsager_bound():
    from amploc.denoiser import eta_and_prime
    inst = generate_instance(RAD, 100, 0.8, 0.1, np.random.default_rng(8))
    st = amp_init(inst, np.zeros(100), 0.0)
    for _ in range(5):
        u = inst.phi.T @ st.r + st.m_hat
        _, etap = eta_and_prime(u, st.tau2, st.z, st.t, RAD)
        st_next = amp_step(st, inst)
        assert abs(st_next.b) <= etap.max() / inst.alpha + 1e-15
        st = st_next


def test_tau_sequence_values_and_limits():
    taus = tau_sequence(GAUSS, 2.0, 0.01, 0.0, 5)
    assert taus[0] == pytest.approx(0.505)
    # one exact hand substitution: (0.01 + 1/(1 + 1/0.505)) / 2
    assert taus[1] == pytest.approx((0.01 + 1 / (1 + 1 / 0.505)) / 2, abs=1e-15)
    assert taus[1] == pytest.approx(0.1727741, abs=1e-7)
    # monotone, floored by delta/alpha
    long = tau_sequence(RAD, 0.8, 0.01, 0.0, 40)
    assert np.all(np.diff(long) <= 1e-15)
    assert np.all(long >= 0.01 / 0.8 - 1e-15)
    # fixed-point residual at the tail
    tail = long[-1]
    lhs = 0.8 * tail - 0.01
    assert abs(lhs - mmse_star(1.0 / tail + 0.0, RAD)) <= 1e-9
    # large t drives tau straight to delta/alpha
    big_t = tau_sequence(RAD, 0.8, 0.01, 1e8, 1)
    assert big_t[1] == pytest.approx(0.01 / 0.8, abs=1e-9)


def test_divergence_error():
    inst = generate_instance(GAUSS, 10, 1.0, 0.1, np.random.default_rng(9))
    bad = ModelInstance(GAUSS, inst.N, inst.M, inst.alpha, inst.delta,
                        inst.phi * np.inf, inst.theta_true, inst.w, inst.y)
    with np.errstate(invalid="ignore"):
        with pytest.raises(AmpDivergenceError) as exc:
            amp_run(bad, np.zeros(10), 0.0, 3)
    assert exc.value.iteration == 1
    assert "iteration 1" in str(exc.value)


def test_batched_z_matches_per_row():
    inst = generate_instance(RAD, 25, 1.2, 0.05, np.random.default_rng(10))
    Z = np.random.default_rng(11).standard_normal((4, 25)) * 1.5
    t = 0.9
    batch = amp_run(inst, Z, t, 15).m_hat
    rows = np.stack([amp_run(inst, Z[i], t, 15).m_hat for i in range(4)])
    assert np.max(np.abs(batch - rows)) < 1e-13


def test_early_stop_and_empirical_mode():
    inst = generate_instance(GAUSS, 60, 2.0, 0.01, np.random.default_rng(12))
    res = amp_run(inst, np.zeros(60), 0.0, 500, early_stop_tol=1e-10)
    assert len(res.trace) < 500
    res2 = amp_run(inst, np.zeros(60), 0.0, 30, tau2_mode="empirical")
    assert np.all(np.isfinite(res2.m_hat))
    with pytest.raises(ValueError):
        amp_step(amp_init(inst, np.zeros(60), 0.0), inst, tau2_mode="nope")


def test_warm_start_runs():
    inst = generate_instance(GAUSS, 40, 2.0, 0.01, np.random.default_rng(13))
    cold = amp_run(inst, np.zeros(40), 0.0, 50).m_hat
    warm = amp_run(inst, np.zeros(40), 0.0, 50, m0=cold).m_hat
    assert np.allclose(cold, warm, atol=1e-8)


def test_trace_csv(tmp_path):
    inst = generate_instance(RAD, 20, 1.0, 0.1, np.random.default_rng(14))
    res = amp_run(inst, np.zeros(20), 0.0, 5, theta_ref=inst.theta_true)
    path = tmp_path / "trace.csv"
    trace_to_csv(res.trace, str(path))
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "k,tau2,residual_norm,empirical_mse"
    assert len(lines) == 6

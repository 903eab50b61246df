import json

import numpy as np
import pytest

from amploc.model import (Prior, discrete_prior, rademacher_prior,
                          gaussian_prior, bounded_density_prior,
                          prior_from_dict, prior_to_dict, sample_prior,
                          prior_second_moment, generate_instance,
                          load_model_config, save_instance, load_instance,
                          save_instance_csv)


def test_prior_validation():
    with pytest.raises(ValueError):
        discrete_prior([(-1, 0.5), (1, 0.6)])          # probs sum to 1.1
    with pytest.raises(ValueError):
        discrete_prior([(-1, -0.5), (1, 1.5)])         # negative prob
    with pytest.raises(ValueError):
        gaussian_prior(0.0, 0.0)                       # zero variance
    with pytest.raises(ValueError):
        Prior("discrete", values=[2.0], probs=[1.0], support_bound=1.0)
    with pytest.raises(ValueError):
        Prior("nonsense")
    # sum within 1e-12 is accepted
    discrete_prior([(-1, 0.5 + 1e-13), (1, 0.5)])


def test_second_moments():
    assert prior_second_moment(rademacher_prior()) == 1.0
    assert prior_second_moment(gaussian_prior(0, 1)) == 1.0
    assert prior_second_moment(discrete_prior([(0, 0.5), (2, 0.5)])) == 2.0
    p = gaussian_prior(3.0, 2.0)
    assert p.second_moment == pytest.approx(11.0)
    assert p.variance == pytest.approx(2.0)


def test_second_moment_matches_numerical():
    # table prior for a quadratic density on [-1, 1]: p(x) = 3 x^2 / 2
    p = bounded_density_prior(lambda x: 1.5 * x * x, 1.0)
    # E[x^2] = int 1.5 x^4 = 3/5
    assert p.second_moment == pytest.approx(0.6, abs=1e-10)
    assert abs(p.probs.sum() - 1.0) < 1e-10


def test_sample_prior_statistics():
    rng = np.random.default_rng(0)
    x = sample_prior(rademacher_prior(), 10**6, rng)
    assert set(np.unique(x)) == {-1.0, 1.0}
    assert abs(x.mean()) < 0.005
    g = sample_prior(gaussian_prior(0, 1), 10**6, np.random.default_rng(1))
    assert abs(np.mean(g * g) - 1.0) < 0.01


def test_sample_prior_deterministic():
    a = sample_prior(rademacher_prior(), 100, np.random.default_rng(7))
    b = sample_prior(rademacher_prior(), 100, np.random.default_rng(7))
    assert np.array_equal(a, b)
    with pytest.raises(ValueError):
        sample_prior(rademacher_prior(), 0, np.random.default_rng(0))


def test_generate_instance_shapes_and_rounding():
    rng = np.random.default_rng(0)
    inst = generate_instance(rademacher_prior(), 1250, 0.8, 0.01, rng)
    assert inst.M == 1000
    inst2 = generate_instance(gaussian_prior(), 192, 2.0, 0.01, rng)
    assert inst2.M == 384
    assert abs(inst.M / inst.N - inst.alpha) <= 1.0 / inst.N


def test_reconstruction_identity():
    for seed in range(5):
        inst = generate_instance(gaussian_prior(), 300, 1.3, 0.7,
                                 np.random.default_rng(seed))
        assert inst.reconstruction_residual() < 1e-12


def test_noiseless_limit():
    inst = generate_instance(rademacher_prior(), 100, 2.0, 0.0,
                             np.random.default_rng(2))
    assert np.allclose(inst.y, inst.phi @ inst.theta_true, atol=0, rtol=0)


def test_phi_entry_variance():
    inst = generate_instance(gaussian_prior(), 400, 1.0, 0.1,
                             np.random.default_rng(3))
    emp = inst.phi.var()
    assert abs(emp - 1.0 / inst.M) <= 5.0 / np.sqrt(inst.M * inst.N)


def test_same_seed_bit_identical():
    a = generate_instance(rademacher_prior(), 50, 0.8, 0.2, np.random.default_rng(9))
    b = generate_instance(rademacher_prior(), 50, 0.8, 0.2, np.random.default_rng(9))
    for f in ("phi", "theta_true", "w", "y"):
        assert np.array_equal(getattr(a, f), getattr(b, f))


def test_generate_instance_errors():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        generate_instance(rademacher_prior(), 10, -1.0, 0.1, rng)
    with pytest.raises(ValueError):
        generate_instance(rademacher_prior(), 10, 1.0, -0.1, rng)
    with pytest.raises(ValueError):
        generate_instance(rademacher_prior(), 0, 1.0, 0.1, rng)


def test_prior_dict_round_trip():
    for p in (rademacher_prior(), gaussian_prior(0.5, 2.0),
              bounded_density_prior(lambda x: 0.5, 1.0)):
        q = prior_from_dict(prior_to_dict(p))
        assert q.kind == p.kind
        assert q.second_moment == pytest.approx(p.second_moment, abs=1e-12)
        assert q.mean == pytest.approx(p.mean, abs=1e-12)


def test_load_model_config(tmp_path):
    cfg = {"prior": {"kind": "discrete", "atoms": [[-1, 0.5], [1, 0.5]]},
           "N": 20, "alpha": 0.8, "delta": 0.05, "seed": 4}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    prior, N, alpha, delta, seed = load_model_config(str(path))
    assert prior.kind == "discrete" and N == 20 and seed == 4
    assert alpha == 0.8 and delta == 0.05


def test_instance_save_load(tmp_path):
    inst = generate_instance(rademacher_prior(), 12, 1.5, 0.3,
                             np.random.default_rng(5))
    path = tmp_path / "inst.npz"
    save_instance(inst, str(path))
    back = load_instance(str(path))
    assert np.array_equal(back.phi, inst.phi)
    assert np.array_equal(back.y, inst.y)
    assert back.prior.kind == "discrete"
    save_instance_csv(inst, str(tmp_path / "inst"))
    phi = np.loadtxt(tmp_path / "inst_phi.csv", delimiter=",")
    assert np.allclose(phi, inst.phi)

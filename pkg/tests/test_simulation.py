import json
from pathlib import Path

import numpy as np
import pytest
from scipy import stats

from cgfactorial import SCENARIOS, generate_scenario, get_scenario, misspecification_sweep, run_replications
from cgfactorial.simulation import pairwise_truth, rng_for, sample_clayton_pair, true_effects_oracle

FIXTURES = Path(__file__).with_name("fixtures")


def test_registry():
    assert sorted(SCENARIOS) == list(range(1, 10))
    assert all(not SCENARIOS[i].layout.is_two_way for i in range(1, 7))
    assert all(SCENARIOS[i].layout.is_two_way for i in range(7, 10))
    assert get_scenario(9).lam == (1, 1.25, 1.5, 1, 1, 1)
    with pytest.raises(ValueError, match="scenario"):
        get_scenario(10)


def test_oracle_examples():
    np.testing.assert_allclose(true_effects_oracle(get_scenario(1)), 0.5)
    assert true_effects_oracle(get_scenario(3))[0] == pytest.approx(0.5472, abs=5e-5)
    np.testing.assert_allclose(
        np.round(true_effects_oracle(get_scenario(9)), 2), [0.52, 0.47, 0.43, 0.52, 0.52, 0.52]
    )


def test_pairwise_truth_against_quadrature():
    lam_i, lam_l, tau = 1.25, 0.75, 1.0
    # P(min(T_i, tau) > min(T_l, tau)) + P(both reach tau) / 2
    density = lambda t: lam_l * np.exp(-lam_l * t) * np.exp(-lam_i * t)
    from scipy import integrate

    ref = integrate.quad(density, 0, tau)[0] + 0.5 * np.exp(-(lam_i + lam_l) * tau)
    assert pairwise_truth(lam_i, lam_l, tau) == pytest.approx(ref, abs=1e-12)


@pytest.mark.parametrize("theta", [1.0, 2.0, 4.0, 8.0])
def test_sampler_kendall_tau(theta):
    rng = np.random.default_rng(int(theta * 1000))
    taus = []
    for _ in range(30):
        u, v = sample_clayton_pair(theta, rng, 1000)
        taus.append(stats.kendalltau(u, v).statistic)
    taus = np.array(taus)
    se = taus.std(ddof=1) / np.sqrt(taus.size)
    assert abs(taus.mean() - theta / (theta + 2)) < 3 * se


def test_sampler_large_sample():
    u, v = sample_clayton_pair(2.0, np.random.default_rng(1), 100_000)
    assert stats.kendalltau(u, v).statistic == pytest.approx(0.5, abs=0.01)
    assert stats.kstest(u, "uniform").pvalue > 0.01
    assert stats.kstest(v, "uniform").pvalue > 0.01


def test_sampler_independence_limit():
    u, v = sample_clayton_pair(1e-12, np.random.default_rng(2), 50_000)
    assert abs(stats.kendalltau(u, v).statistic) < 0.01


def test_censoring_fraction_fixture():
    fix = json.loads((FIXTURES / "censoring_fraction.json").read_text())
    assert fix["monte_carlo"] == pytest.approx(fix["quadrature"], abs=4 * np.sqrt(0.25 / fix["n_pairs"]))
    data = generate_scenario(get_scenario(1), 50_000, seed=3)
    frac = 1 - np.mean(np.concatenate([g.status for g in data.groups]))
    assert frac == pytest.approx(fix["quadrature"], abs=4 * np.sqrt(0.25 / 150_000))


def test_generated_data_shape():
    s = get_scenario(8)
    data = generate_scenario(s, 40, seed=1, rep=2)
    assert data.d == 6 and data.sizes == (40,) * 6
    t = np.concatenate([g.time for g in data.groups])
    st = np.concatenate([g.status for g in data.groups])
    assert np.all(t <= 1.0)
    assert np.all(st[t == 1.0] == 0)
    again = generate_scenario(s, 40, seed=1, rep=2)
    for a, b in zip(data.groups, again.groups):
        assert np.array_equal(a.time, b.time) and np.array_equal(a.status, b.status)
    other = generate_scenario(s, 40, seed=1, rep=3)
    assert not np.array_equal(data.groups[0].time, other.groups[0].time)
    with pytest.raises(ValueError):
        generate_scenario(s, 2, seed=1)


def test_rng_streams_independent():
    a = rng_for(1, 0, 0).random(5)
    b = rng_for(1, 0, 1).random(5)
    assert not np.array_equal(a, b)
    assert np.array_equal(a, rng_for(1, 0, 0).random(5))


def test_replications_summary():
    s = get_scenario(3)
    summary = run_replications(s, 30, reps=100, theta_fit=2.0, seed=4, n_sim=200)
    d = summary.to_dict()
    assert d["reps"] == 100 and d["n_failed"] == 0
    for method in ("sim", "analytic"):
        assert set(d["rejection"][method]) == {"0.1", "0.05", "0.01"}
        assert all(0 <= r <= 1 for r in d["rejection"][method].values())
    assert all(0 <= c <= 1 for c in d["coverage"])
    np.testing.assert_allclose(np.array(d["mean"]) - d["true_p"], d["bias"])


def test_sweep_shares_data_with_single_run():
    s = get_scenario(2)
    sweep = misspecification_sweep(s, 25, [0.0, 2.0], reps=100, seed=8, n_sim=200)
    single = run_replications(s, 25, reps=100, theta_fit=2.0, seed=8, n_sim=200)
    assert sweep[1].to_dict() == single.to_dict()
    assert sweep[0].mean != sweep[1].mean


def test_sweep_rejects_few_reps():
    with pytest.raises(ValueError):
        run_replications(get_scenario(1), 20, reps=10)


def test_parallel_matches_serial():
    s = get_scenario(7)
    serial = run_replications(s, 15, reps=100, seed=5, n_sim=200)
    parallel = run_replications(s, 15, reps=100, seed=5, n_sim=200, n_jobs=2)
    assert serial.to_dict() == parallel.to_dict()

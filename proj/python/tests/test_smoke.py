"""Smoke tests for the Python bindings."""

import json
import math

import interbench


def test_registry_contains_required_entries():
    paths = interbench.list_registry()
    assert "evasion.attacks.pgd" in paths
    assert "unauth_model_ownership.metrics.fid_corr" in paths
    assert paths == sorted(paths)


def test_validate_config_flags_unknown_attack():
    cfg = {
        "dataset": {"type": "synthetic", "n": 100},
        "attacks": [{"name": "nosuch"}],
        "seeds": [1],
    }
    problems = interbench.validate_config(json.dumps(cfg))
    assert any("nosuch" in p for p in problems)
    cfg["attacks"] = []
    assert interbench.validate_config(json.dumps(cfg)) == []


def test_synth_gauss_shapes_and_correlation():
    X, y, z = interbench.synth_gauss(n=500, d=3, rho=0.6, ratio=0.5, seed=4)
    assert X.shape == (500, 3)
    assert len(y) == 500
    assert len(z) == 500
    n = len(y)
    my, mz = sum(y) / n, sum(z) / n
    cov = sum((yi - my) * (zi - mz) for yi, zi in zip(y, z))
    vy = sum((yi - my) ** 2 for yi in y)
    vz = sum((zi - mz) ** 2 for zi in z)
    assert abs(cov / math.sqrt(vy * vz) - 0.6) < 0.15


def test_run_experiment_end_to_end():
    cfg = {
        "dataset": {"type": "synthetic", "n": 200, "d": 4, "seed": 3},
        "model": {"hidden": [6]},
        "train": {"epochs": 3, "batch_size": 32, "learning_rate": 0.01},
        "attacks": [{"name": "pgd", "params": {"epsilon": 0.02}}],
        "seeds": [7],
    }
    report = json.loads(interbench.run_experiment(json.dumps(cfg)))
    assert report["per_seed"][0]["model"] == "std"
    metrics = report["per_seed"][0]["metrics"]
    assert 0.0 <= metrics["acc_te"] <= 1.0
    assert "std.acc_rob" in report["aggregate"]
    # identical config -> identical digest and metrics
    again = json.loads(interbench.run_experiment(json.dumps(cfg)))
    assert again["config_digest"] == report["config_digest"]
    assert again["per_seed"] == report["per_seed"]


def test_roc_and_rdp_helpers():
    roc = interbench.roc_metrics([2.0, 1.0, -1.0, -2.0], [True, True, False, False])
    assert roc["auc"] == 1.0
    eps = interbench.rdp_epsilon(noise_multiplier=1.0, delta=1e-5, steps=100)
    assert eps > 0.0
    assert math.isinf(interbench.rdp_epsilon(noise_multiplier=0.0, delta=1e-5, steps=1))


def test_fairness_metrics_dict():
    preds = [1] * 6 + [0] * 4 + [1] * 3 + [0] * 7
    labels = preds[:]
    groups = [0] * 10 + [1] * 10
    m = interbench.fairness_metrics(preds, labels, groups)
    assert abs(m["demographic_parity_gap"] - 0.3) < 1e-12
    assert abs(m["p_rule"] - 50.0) < 1e-9

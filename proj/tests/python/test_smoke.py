import math

import pytest

import tfim


def test_oracle_single_line():
    # uncoupled lines: <σ³(0)σ³(u)> = e^{-2δu} in the ground state
    est, se = tfim.correlation([(0, 0.0), (0, 0.4)], beta=float("inf"), lam=0.0, delta=1.3)
    assert se == 0.0
    assert est == pytest.approx(math.exp(-2 * 1.3 * 0.4), rel=1e-9)


def test_monte_carlo_matches_oracle():
    exact, _ = tfim.correlation([(0, 0.0), (1, 0.0)])
    est, se = tfim.correlation([(0, 0.0), (1, 0.0)], method="rpr", n_samples=20000, seed=3)
    assert abs(est - exact) <= 4 * se


def test_run_config_is_deterministic():
    text = "kind = correlation\nN = 1\nbeta = 1\npoints = 0@0; 1@0.2\nmethod = spin\nn_samples = 4000\n"
    a = tfim.run_config(text, seed=5, workers=1)
    b = tfim.run_config(text, seed=5, workers=2)
    assert a["ok"]
    assert a["tables"]["correlation"]["csv"] == b["tables"]["correlation"]["csv"]


def test_invalid_config_raises():
    with pytest.raises(ValueError):
        tfim.check_config("kind = correlation\nlambda = 1, 0.5\npoints = 0@0\n")
    assert tfim.check_config("kind = irb-check\nbeta = 1\nconvention = even-side\nN = 2\n") == "irb-check"


def test_crossing_needs_two_sizes():
    with pytest.raises(tfim.EstimationError):
        tfim.lambda_c_1d("kind = magnetization-sweep\nN = 2\nbeta = inf\nspace = w\ntime = w\n"
                         "lambda = 0.5, 1.5\nmethod = oracle\nseed = 1\n")


def test_closed_forms():
    assert tfim.rn_density("add_or_delete", 1, 1.3) == pytest.approx(1 / 1.3 + 1.3 / 2)
    assert tfim.rn_bound("delete_all", 0.7) == pytest.approx(math.exp(0.7))
    assert tfim.constant_A([0], 0.0, 1.0, 1.0) == pytest.approx(9 * math.exp(12))
    assert tfim.constant_A([1], 0.3, 1.0, 1.0, 1.0) == pytest.approx(3 * math.exp(6))
    assert tfim.E_function([math.pi], 0.0, 1.0, 1.0) == pytest.approx(1 / 12)
    assert abs(tfim.gap_crossing(6, 8) - 1.0) < 0.02

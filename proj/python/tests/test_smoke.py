import math

import pytest

import markedtime as mt


def test_alpha_and_closed_forms():
    spec = mt.MarketSpec()
    a = mt.market_alpha(spec)
    j = math.exp(-1) - 1
    assert a[0] == 0.0
    assert a[1] == pytest.approx(math.exp(-1) / j**2)
    vf = mt.closed_form_vf(spec)
    assert vf["theorem"] == pytest.approx(0.5 * math.exp(-2) / j**2)
    assert vf["printed"] == pytest.approx(math.exp(-1) / j**2 / 4)


def test_density_is_normalized():
    spec = mt.MarketSpec()
    assert mt.conditional_density(spec, 0.0, 0.0, 0, 0, 1.3, 2) == 1.0
    assert mt.density_normalization(spec, 0.8, 0.2, 1, 1) == pytest.approx(1.0, abs=1e-6)


def test_invalid_spec_raises():
    with pytest.raises(ValueError):
        mt.MarketSpec(sigma=-1.0)


def test_estimate_is_reproducible():
    spec = mt.MarketSpec()
    a = mt.estimate(spec, n_paths=300, n_steps=200, seed=4, workers=1)
    b = mt.estimate(spec, n_paths=300, n_steps=200, seed=4, workers=2)
    assert a == b
    assert a["se"] > 0


def test_compare_and_abort():
    spec = mt.MarketSpec(T_prime=1.5)
    r = mt.compare(spec, n_paths=300, n_steps=1500, seed=2)
    assert r["gain"]["mean"] == r["v_insider"]["mean"] - r["v_ordinary"]["mean"]
    with pytest.raises(RuntimeError):
        mt.compare(mt.MarketSpec(), n_paths=3000, n_steps=400)


def test_lab_check_small():
    ok, manifest = mt.lab_check(n_models=4)
    assert ok
    assert manifest["all_pass"]


def test_run_command(tmp_path):
    code, message, files = mt.run_command("simulate", '{"n_paths": 200, "n_steps": 100}', str(tmp_path))
    assert code == 0
    assert files and files[0].endswith("simulate.csv")

import json

import numpy as np
import pytest

import rom_surrogate as rs


def test_default_space_has_twenty_parameters():
    space = rs.default_space()
    assert len(space["names"]) == 20
    assert all(lo < hi for lo, hi in zip(space["lower"], space["upper"]))


def test_dft_roundtrip_and_parseval():
    x = np.random.default_rng(3).uniform(-5, 5, 120)
    c = rs.dft_forward(x)
    assert np.allclose(c, np.fft.fft(x), atol=1e-10)
    assert np.max(np.abs(rs.dft_inverse(c) - x)) < 1e-10
    assert abs(np.sum(np.abs(c) ** 2) / len(x) - np.sum(x**2)) < 1e-9 * np.sum(x**2)


def test_generate_is_seeded():
    x1, s1 = rs.generate(40, 64, seed=5)
    x2, s2 = rs.generate(40, 64, seed=5)
    assert x1.shape == (40, 20) and s1.shape == (40, 64)
    assert np.array_equal(x1, x2) and np.array_equal(s1, s2)
    assert np.all(s1 > 0)


def test_band_limited_reduction_is_lossless_at_eleven_components():
    _, s = rs.generate(200, 120, seed=2)
    assert rs.reconstruction_mae(s, 11) < 1e-10
    assert rs.reconstruction_mae(s, 5) > 0


def test_train_predict_evaluate_roundtrip(tmp_path):
    x, s = rs.generate(120, 120, seed=9)
    config = {"reduction": "dft", "rsm": "pce", "pce": {"max_degree": 2}}
    model = rs.Surrogate.train(x[:100], s[:100], config)
    assert (model.reduction, model.rsm) == ("dft", "pce")
    pred = model.predict(x[100:])
    assert pred.shape == (20, 120)
    report = model.evaluate(x[100:], s[100:])
    assert report["signal_mape"] < 0.05

    model.save(tmp_path / "bundle")
    again = rs.Surrogate.load(tmp_path / "bundle")
    assert np.array_equal(again.predict(x[100:]), pred)


def test_uq_passthrough_shapes():
    mean, std = rs.uq_synthetic(n=60, samples=1000, seed=4)
    assert mean.shape == (60,) and std.shape == (60,)
    assert np.all(std > 0)


def test_errors_carry_kind():
    x, s = rs.generate(10, 60, seed=1)
    with pytest.raises(rs.RomError) as info:
        rs.Surrogate.train(x, s[:5])
    assert info.value.kind == "data"
    with pytest.raises(rs.RomError) as info:
        rs.generate(10, 60, variant="unknown")
    assert info.value.kind == "usage"

import numpy as np
import pytest

from veloq.errors import FitError
from veloq.fitting import fit


def test_exact_line():
    xs = np.arange(5.0)
    r = fit("linear", xs, 2 * xs + 1)
    assert r["slope"] == pytest.approx(2.0)
    assert r["intercept"] == pytest.approx(1.0)
    assert r.residual_norm == pytest.approx(0.0, abs=1e-12)


def test_sinusoid_known_frequency():
    xs = np.linspace(0, 2 * np.pi, 16, endpoint=False)
    r = fit("sinusoid", xs, 0.3 + 0.8 * np.cos(2 * xs + 0.7), freq=2.0)
    assert r["amplitude"] == pytest.approx(0.8)
    assert r["phase"] == pytest.approx(0.7)
    assert r["offset"] == pytest.approx(0.3)


def test_sinusoid_free_frequency():
    xs = np.linspace(0, 10, 200)
    r = fit("sinusoid", xs, 1.5 * np.cos(3.3 * xs - 0.4))
    assert r["freq"] == pytest.approx(3.3, rel=1e-6)
    assert r["amplitude"] == pytest.approx(1.5, rel=1e-6)


def test_gaussian_decay_recovers_n0():
    rng = np.random.default_rng(3)
    n = np.arange(0, 200, 5.0)
    ys = 0.9 * np.exp(-(n / 90.0) ** 2) * (1 + 0.01 * rng.normal(size=n.size))
    r = fit("gaussian_decay", n, ys)
    assert r["n0"] == pytest.approx(90.0, rel=0.05)
    assert np.isfinite(r.stderr["n0"])


def test_rb_decay_recovers_p():
    m = np.array([1, 10, 50, 100, 200, 400, 800, 1600], float)
    rng = np.random.default_rng(5)
    ys = 0.5 * 0.999**m + 0.5 + 1e-4 * rng.normal(size=m.size)
    assert fit("rb_decay", m, ys)["p"] == pytest.approx(0.999, abs=1e-4)


def test_too_few_points():
    with pytest.raises(FitError):
        fit("rb_decay", [1, 2, 3], [1, 0.9, 0.8])


def test_singular_design():
    with pytest.raises(FitError):
        fit("linear", [1.0, 1.0, 1.0], [1.0, 2.0, 3.0])


def test_unknown_model():
    with pytest.raises(FitError):
        fit("spline", [1, 2, 3], [1, 2, 3])


def test_deterministic():
    xs = np.linspace(0, 1, 10)
    ys = np.exp(-xs)
    assert fit("gaussian_decay", xs, ys).params == fit("gaussian_decay", xs, ys).params

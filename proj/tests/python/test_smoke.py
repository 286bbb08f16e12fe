import math

import numpy as np
import pytest

import mvfbm


def test_fgn_and_path():
    inc = mvfbm.fgn(64, 1 / 64, 0.7, seed=3)
    path = mvfbm.fbm_path(64, 1 / 64, 0.7, seed=3)
    assert inc.shape == (64,)
    assert path[0] == 0.0
    assert np.array_equal(np.cumsum(inc), path[1:])
    assert np.array_equal(mvfbm.fgn(64, 1 / 64, 0.7, seed=3, method="cholesky").shape, (64,))
    coarse = mvfbm.coarsen(inc, 4)
    assert np.array_equal(np.cumsum(coarse), path[4::4])


def test_autocovariance():
    assert math.isclose(mvfbm.fgn_autocovariance(0, 0.25, 0.7), 0.25**1.4)
    assert mvfbm.fgn_autocovariance(3, 1.0, 0.5) == 0.0


def test_measures():
    x = np.array([1.0, -1.0])
    assert mvfbm.moment(x, 2) == 1.0
    assert mvfbm.wasserstein(np.array([0.0, 1.0]), np.array([1.0, 2.0]), 1) == 1.0
    cloud = np.random.default_rng(0).normal(size=(20, 3))
    assert math.isclose(mvfbm.wasserstein(cloud, np.zeros((20, 3)), 2), mvfbm.moment(cloud, 2), rel_tol=1e-12)


def test_opinion_kernel():
    assert math.isclose(mvfbm.opinion_kernel(0.0), math.sin(-0.5))
    with pytest.raises(ValueError):
        mvfbm.opinion_kernel(-1.0)


def test_fit():
    x = [2.0**-k for k in range(7, 11)]
    fit = mvfbm.fit_log_log(x, [3 * v**0.7 for v in x])
    assert abs(fit["slope"] - 0.7) < 1e-9


def test_simulate():
    out = mvfbm.simulate({"model": {"id": "opinion"}, "M": 8, "T": 0.5, "N": 10, "hurst": 0.7, "seed": 1})
    assert out["states"].shape == (8 + 32 + 1, 10, 1)
    assert out["t"][0] == -0.125
    assert out["finite"]
    again = mvfbm.simulate({"model": {"id": "opinion"}, "M": 8, "T": 0.5, "N": 10, "hurst": 0.7, "seed": 1})
    assert np.array_equal(out["states"], again["states"])


def test_studies():
    tables = mvfbm.convergence(
        {"model": {"id": "opinion"}, "N": 8, "hurst": 0.7, "fine_level": 8, "coarse_levels": [4, 5, 6], "repeats": 2}
    )
    assert len(tables) == 1 and len(tables[0]["rows"]) == 3
    chaos = mvfbm.chaos({"model": {"id": "opinion"}, "M": 4, "T": 0.25, "N_list": [4, 8], "N_ref": 16, "repeats": 2})
    assert [r["N"] for r in chaos["rows"]] == [4, 8]
    moments = mvfbm.probe_moments({"model": {"id": "opinion"}, "levels": [4, 5], "N": 8, "repeats": 1})
    assert moments["bounded"]


def test_errors():
    with pytest.raises(mvfbm.UsageError, match="missing model block"):
        mvfbm.simulate({})
    with pytest.raises(ValueError, match="allow-brownian"):
        mvfbm.simulate({"model": {"id": "zero"}, "hurst": 0.5})

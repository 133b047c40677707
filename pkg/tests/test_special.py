import math

import numpy as np
import pytest
import scipy.special

from misdiag.special import chi2_sf, gamma, gamma_p, gamma_q, gammaln


def test_gammaln_matches_scipy():
    for x in [0.25, 0.5, 1.0, 1.5, 2.0, 5.5, 30.0, 100.0, 500.5]:
        assert gammaln(x) == pytest.approx(scipy.special.gammaln(x), rel=1e-13)


def test_gamma_small_integers():
    # Gamma(n) = (n-1)!
    for n in range(1, 10):
        assert gamma(n) == pytest.approx(math.factorial(n - 1), rel=1e-13)


def test_gamma_half():
    assert gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-13)


def test_gammaln_rejects_nonpositive():
    with pytest.raises(ValueError):
        gammaln(0.0)
    with pytest.raises(ValueError):
        gammaln(-1.5)


def test_incomplete_gamma_matches_scipy():
    rng = np.random.default_rng(0)
    for _ in range(200):
        a = float(rng.uniform(0.1, 50.0))
        x = float(rng.uniform(0.0, 100.0))
        assert gamma_p(a, x) == pytest.approx(scipy.special.gammainc(a, x), abs=1e-12)
        assert gamma_q(a, x) == pytest.approx(scipy.special.gammaincc(a, x), abs=1e-12)


def test_incomplete_gamma_complementarity():
    rng = np.random.default_rng(1)
    for _ in range(100):
        a = float(rng.uniform(0.1, 30.0))
        x = float(rng.uniform(0.0, 60.0))
        assert gamma_p(a, x) + gamma_q(a, x) == pytest.approx(1.0, abs=1e-12)


def test_chi2_sf_matches_scipy():
    import scipy.stats
    rng = np.random.default_rng(2)
    for _ in range(100):
        df = int(rng.integers(1, 40))
        x = float(rng.uniform(0.0, 80.0))
        assert chi2_sf(x, df) == pytest.approx(scipy.stats.chi2.sf(x, df), abs=1e-12)

import math

import numpy as np
import pytest
from scipy import special, stats as sps

from stablearea import dist
from stablearea.dist import (
    ParameterError,
    RngState,
    SampleBatch,
    sample_beta,
    sample_exponential,
    sample_gamma,
    sample_positive_stable,
    sample_stable_increment,
    sample_uniform,
    stable_scale,
)
from stablearea.stats import ks_one_sample, ks_two_sample

N = 100_000


def within(values, target, k=4.0):
    v = np.asarray(values, dtype=float)
    se = v.std(ddof=1) / math.sqrt(v.size)
    return abs(v.mean() - target) <= k * se


class TestRngState:
    def test_same_state_same_stream(self):
        a = sample_uniform(50, RngState(3, 1)).values
        b = sample_uniform(50, RngState(3, 1)).values
        assert np.array_equal(a, b)

    def test_distinct_streams_differ(self):
        a = sample_uniform(50, RngState(3, 1)).values
        b = sample_uniform(50, RngState(3, 2)).values
        assert not np.array_equal(a, b)

    def test_substreams_are_independent(self):
        s = RngState(5)
        x = s.generator(0).random(20_000)
        y = s.generator(1).random(20_000)
        assert abs(np.corrcoef(x, y)[0, 1]) < 0.03

    def test_child_and_dict(self):
        s = RngState(9, 4)
        assert s.child(0) == RngState(9, 5)
        assert s.as_dict() == {"seed": 9, "stream_id": 4}

    @pytest.mark.parametrize("seed", [-1, 2**64])
    def test_seed_range(self, seed):
        with pytest.raises(ParameterError):
            RngState(seed)


def test_batch_rejects_non_finite():
    with pytest.raises(ValueError):
        SampleBatch("x", {}, [1.0, math.inf])


def test_batch_describe_carries_seed():
    b = sample_uniform(3, RngState(1, 2))
    d = b.describe()
    assert d["law_tag"] == "uniform" and d["n"] == 3 and d["seed"] == {"seed": 1, "stream_id": 2}


def test_uniform_open_interval_and_ks():
    u = sample_uniform(N, RngState(1)).values
    assert u.min() > 0.0 and u.max() < 1.0
    assert ks_one_sample(u, lambda x: x).passed


def test_exponential_ks():
    e = sample_exponential(N, RngState(2))
    assert ks_one_sample(e, lambda x: -np.expm1(-x)).passed


@pytest.mark.parametrize("a", [1.0, 1.0 / 3.0])
def test_gamma_mean(a):
    assert within(sample_gamma(a, N, RngState(3)).values, a)


def test_gamma_variance():
    g = sample_gamma(3.0, N, RngState(4)).values
    sq = (g - 3.0) ** 2  # mean is known, so this estimates the variance without bias
    assert within(sq, 3.0)


@pytest.mark.parametrize("a", [0.05, 0.5, 2.5, 30.0])
def test_gamma_ks_against_scipy(a):
    g = sample_gamma(a, 20_000, RngState(5))
    assert ks_one_sample(g, lambda x: special.gammainc(a, x)).passed


def test_gamma_tiny_shape_stays_positive():
    g = sample_gamma(1e-3, 10_000, RngState(6)).values
    assert np.all(g >= 0.0)


def test_gamma_bad_shape():
    with pytest.raises(ParameterError):
        sample_gamma(0.0, 3, RngState(0))


def test_beta_uniform_case():
    b = sample_beta(1.0, 1.0, 20_000, RngState(7))
    assert ks_one_sample(b, lambda x: x).passed


def test_beta_mean():
    assert within(sample_beta(0.5, 1.0 / 6.0, N, RngState(8)).values, 0.75)


def test_beta_half_moment():
    a, b, s = 0.5, 1.0 / 6.0, 0.5
    target = math.exp(special.gammaln(a + s) + special.gammaln(a + b) - special.gammaln(a) - special.gammaln(a + b + s))
    assert within(sample_beta(a, b, N, RngState(9)).values ** s, target)


@pytest.mark.parametrize("a, b", [(0.0, 1.0), (1.0, -2.0)])
def test_beta_bad_parameters(a, b):
    with pytest.raises(ParameterError):
        sample_beta(a, b, 3, RngState(0))


def test_inverse_beta_matches_reciprocal():
    g1 = RngState(10).generator()
    g2 = RngState(10).generator()
    inv = dist.inverse_beta(0.5, 0.1, 1000, g1)
    la = dist._log_gamma_variates(0.5, 1000, g2)
    lb = dist._log_gamma_variates(0.1, 1000, g2)
    assert np.allclose(inv, (np.exp(la) + np.exp(lb)) / np.exp(la), rtol=1e-12)


def test_positive_stable_laplace():
    z = sample_positive_stable(2.0 / 3.0, N, RngState(11)).values
    assert within(np.exp(-z), math.exp(-1.0))


def test_positive_stable_moment():
    a, s = 0.5, 0.2
    target = special.gamma(1.0 - s / a) / special.gamma(1.0 - s)
    assert within(sample_positive_stable(a, N, RngState(12)).values ** s, target)


def test_positive_stable_half_is_levy():
    # density z^{-3/2} e^{-1/(4z)} / (2 sqrt(pi)) is scipy's Lévy law with scale 1/2
    z = sample_positive_stable(0.5, 20_000, RngState(13))
    ref = sps.levy(scale=0.5).rvs(200_000, random_state=np.random.default_rng(14))
    assert ks_two_sample(z, ref).passed


@pytest.mark.parametrize("a", [0.0, 1.0, 1.5])
def test_positive_stable_bad_index(a):
    with pytest.raises(ParameterError):
        sample_positive_stable(a, 3, RngState(0))


def test_stable_scale_matches_definition():
    a = 1.5
    assert stable_scale(a) ** a == pytest.approx(-math.cos(math.pi * a / 2.0))


def test_increment_gaussian_case():
    dt = 0.3
    x = sample_stable_increment(2.0, dt, N, RngState(15)).values
    assert within(x, 0.0)
    assert within(x * x, 2.0 * dt)


def test_increment_laplace_normalisation():
    x = sample_stable_increment(1.5, 1.0, N, RngState(16)).values
    # e^{-L} has a finite variance since E[e^{-2L}] = e^{2^1.5}
    assert within(np.exp(-x), math.e)


def test_increment_self_similarity():
    a = 1.5
    x2 = sample_stable_increment(a, 2.0, 20_000, RngState(17))
    x1 = sample_stable_increment(a, 1.0, 20_000, RngState(18)).values * 2.0 ** (1.0 / a)
    assert ks_two_sample(x2, x1).passed


def test_increment_against_scipy_levy_stable():
    a = 1.7
    x = sample_stable_increment(a, 1.0, 5_000, RngState(19)).values
    ref = sps.levy_stable(a, 1.0, scale=stable_scale(a))
    assert ks_one_sample(x, ref.cdf).passed


@pytest.mark.parametrize("alpha, dt", [(1.0, 1.0), (2.5, 1.0), (1.5, 0.0)])
def test_increment_bad_parameters(alpha, dt):
    with pytest.raises(ParameterError):
        sample_stable_increment(alpha, dt, 3, RngState(0))


def test_n_must_be_positive():
    with pytest.raises(ParameterError):
        sample_uniform(0, RngState(0))


def test_generator_accepted_directly():
    g = np.random.default_rng(0)
    assert len(sample_gamma(2.0, 5, g)) == 5

import numpy as np
import pytest

from actionseg.encode import FisherVector, bow_encode, fisher_encode, normalize_fv
from actionseg.errors import ArgumentError, EmptyWindowError
from actionseg.vocab import Codebook, GmmVocabulary, Standardizer, posterior, sample_gmm

D = 14


def random_gmm(rng, K, d=D):
    w = rng.uniform(0.2, 1.0, K)
    std = Standardizer(mean=np.zeros(d), std=np.ones(d))
    return GmmVocabulary(
        weights=w / w.sum(),
        means=rng.normal(0.0, 2.0, size=(K, d)),
        variances=rng.uniform(0.3, 1.5, size=(K, d)),
        standardizer=std,
    )


def oracle_fisher(gmm, X):
    """Literal double loop over features then components, no shortcuts."""
    n = X.shape[0]
    K, d = gmm.K, gmm.dim
    sigma = np.sqrt(gmm.variances)
    g_mu = np.zeros((K, d))
    g_sigma = np.zeros((K, d))
    for i in range(n):
        gamma = posterior(gmm, X[i])
        for k in range(K):
            diff = (X[i] - gmm.means[k]) / sigma[k]
            g_mu[k] += gamma[k] * diff
            g_sigma[k] += gamma[k] * (diff ** 2 - 1.0)
    out = np.empty(2 * K * d)
    for k in range(K):
        out[k * d : (k + 1) * d] = g_mu[k] / (n * np.sqrt(gmm.weights[k]))
        out[(K + k) * d : (K + k + 1) * d] = g_sigma[k] / (n * np.sqrt(2.0 * gmm.weights[k]))
    return out


class TestFisherEncode:
    @pytest.mark.parametrize("K,expected", [(64, 1792), (128, 3584), (256, 7168)])
    def test_dimensionality(self, K, expected):
        rng = np.random.default_rng(0)
        gmm = random_gmm(rng, K)
        fv = fisher_encode(gmm, rng.normal(size=(5, D)))
        assert fv.values.shape == (expected,)
        assert not fv.normalized

    def test_matches_double_loop_oracle(self):
        rng = np.random.default_rng(1)
        for trial in range(50):
            K = int(rng.integers(1, 9))
            n = int(rng.integers(1, 101))
            gmm = random_gmm(rng, K)
            X = rng.normal(0.0, 1.5, size=(n, D))
            got = fisher_encode(gmm, X).values
            want = oracle_fisher(gmm, X)
            np.testing.assert_allclose(got, want, atol=1e-10)

    def test_single_feature_at_component_mean(self):
        # far-separated component with w_k = 0.25: gamma ~ 1 there, so the
        # mean block vanishes and the sigma block is -1/sqrt(2 * 0.25)
        std = Standardizer(mean=np.zeros(D), std=np.ones(D))
        means = np.zeros((4, D))
        means[1] = 100.0
        means[2] = -100.0
        means[3] = 200.0
        gmm = GmmVocabulary(
            weights=np.array([0.25, 0.25, 0.25, 0.25]),
            means=means,
            variances=np.ones((4, D)),
            standardizer=std,
        )
        fv = fisher_encode(gmm, means[1][None, :]).values
        blocks = fv.reshape(8, D)
        np.testing.assert_allclose(blocks[1], 0.0, atol=1e-6)
        np.testing.assert_allclose(blocks[4 + 1], -1.41421, atol=1e-4)

    def test_expected_zero_under_model(self):
        rng = np.random.default_rng(2)
        gmm = random_gmm(rng, 4)
        X = sample_gmm(gmm, 10_000, seed=3)
        fv = fisher_encode(gmm, X).values
        assert np.max(np.abs(fv)) < 0.05

    def test_order_invariance(self):
        rng = np.random.default_rng(3)
        gmm = random_gmm(rng, 5)
        X = rng.normal(size=(40, D))
        perm = rng.permutation(40)
        a = fisher_encode(gmm, X).values
        b = fisher_encode(gmm, X[perm]).values
        np.testing.assert_allclose(a, b, atol=1e-12)

    def test_empty_set_refused(self):
        rng = np.random.default_rng(4)
        gmm = random_gmm(rng, 2)
        with pytest.raises(EmptyWindowError):
            fisher_encode(gmm, np.empty((0, D)))

    def test_dim_mismatch(self):
        rng = np.random.default_rng(5)
        gmm = random_gmm(rng, 2)
        with pytest.raises(ArgumentError):
            fisher_encode(gmm, rng.normal(size=(3, D + 1)))


class TestNormalizeFv:
    def test_alpha_one_unit_vector_unchanged(self):
        v = np.zeros(8)
        v[0] = 1.0
        out = normalize_fv(FisherVector(values=v), alpha=1.0)
        np.testing.assert_allclose(out.values, v)
        assert out.normalized

    def test_signed_sqrt_hand_case(self):
        out = normalize_fv(FisherVector(values=np.array([4.0, -4.0])), alpha=0.5)
        np.testing.assert_allclose(out.values, [0.70711, -0.70711], atol=1e-5)

    def test_unit_norm(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            v = rng.normal(size=rng.integers(2, 50))
            out = normalize_fv(FisherVector(values=v))
            assert abs(np.linalg.norm(out.values) - 1.0) < 1e-9

    def test_zero_vector_maps_to_zero(self):
        out = normalize_fv(FisherVector(values=np.zeros(6)))
        np.testing.assert_array_equal(out.values, 0.0)

    def test_bad_alpha(self):
        with pytest.raises(ArgumentError):
            normalize_fv(FisherVector(values=np.ones(3)), alpha=0.0)
        with pytest.raises(ArgumentError):
            normalize_fv(FisherVector(values=np.ones(3)), alpha=1.5)


class TestBowEncode:
    def _codebook(self, rng, K, d=D):
        std = Standardizer(mean=np.zeros(d), std=np.ones(d))
        return Codebook(centers=rng.normal(size=(K, d)), standardizer=std)

    def test_one_hot_when_all_at_center(self):
        rng = np.random.default_rng(7)
        book = self._codebook(rng, 5)
        X = np.tile(book.centers[3], (9, 1))
        hist = bow_encode(book, X)
        want = np.zeros(5)
        want[3] = 1.0
        np.testing.assert_allclose(hist.values, want)

    def test_sums_to_one(self):
        rng = np.random.default_rng(8)
        book = self._codebook(rng, 6)
        hist = bow_encode(book, rng.normal(size=(50, D)))
        assert abs(hist.values.sum() - 1.0) < 1e-9
        assert np.all(hist.values >= 0.0)

    def test_matches_exhaustive_oracle(self):
        rng = np.random.default_rng(9)
        book = self._codebook(rng, 7)
        X = rng.normal(size=(60, D))
        hist = bow_encode(book, X)
        counts = np.zeros(7)
        for x in X:
            dists = [np.sum((x - c) ** 2) for c in book.centers]
            counts[int(np.argmin(dists))] += 1
        np.testing.assert_allclose(hist.values, counts / 60.0, atol=1e-12)

    def test_order_invariance(self):
        rng = np.random.default_rng(10)
        book = self._codebook(rng, 4)
        X = rng.normal(size=(30, D))
        a = bow_encode(book, X).values
        b = bow_encode(book, X[rng.permutation(30)]).values
        np.testing.assert_allclose(a, b, atol=1e-12)

    def test_empty_refused(self):
        rng = np.random.default_rng(11)
        book = self._codebook(rng, 3)
        with pytest.raises(EmptyWindowError):
            bow_encode(book, np.empty((0, D)))

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.pipeline import make_pipeline

from kmsketch import (
    ApproxSVDProjection,
    GaussianJLProjection,
    LeverageScoreSelector,
    LloydKMeans,
    RandomizedSamplingSelector,
    RandomSignProjection,
)


@pytest.fixture
def X():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((20, 40))
    X[10:] += 5.0
    return X


TRANSFORMERS = [
    LeverageScoreSelector(n_clusters=2, n_components=8, random_state=0),
    RandomizedSamplingSelector(n_clusters=2, eps=0.3, c1=0.05, random_state=0),
    RandomSignProjection(n_clusters=2, eps=0.3, random_state=0),
    RandomSignProjection(n_clusters=2, eps=0.3, variant="achlioptas", use_mailman=True, random_state=0),
    ApproxSVDProjection(n_clusters=2, random_state=0),
    GaussianJLProjection(n_components=6, random_state=0),
]


@pytest.mark.parametrize("est", TRANSFORMERS, ids=lambda e: type(e).__name__)
class TestTransformers:
    def test_fit_transform_matches_transform(self, est, X):
        est = clone(est)
        Xt = est.fit_transform(X)
        assert Xt.shape == (20, est.n_components_)
        np.testing.assert_allclose(est.transform(X), Xt, atol=1e-12)

    def test_params_round_trip(self, est):
        params = est.get_params()
        assert type(est)(**params).get_params() == params

    def test_feature_count_checked(self, est, X):
        est = clone(est).fit(X)
        with pytest.raises(ValueError):
            est.transform(X[:, :5])

    def test_unfitted(self, est, X):
        with pytest.raises(Exception, match="not fitted"):
            clone(est).transform(X)


def test_selector_support(X):
    sel = LeverageScoreSelector(n_clusters=2, n_components=5, random_state=1).fit(X)
    idx = sel.get_support()
    np.testing.assert_array_equal(sel.transform(X), X[:, idx] * sel.sketch_.selected()[1])


class TestLloydKMeans:
    def test_fit_predict(self, X):
        km = LloydKMeans(n_clusters=2, n_init=5, random_state=0).fit(X)
        assert km.cluster_centers_.shape == (2, 40)
        assert len(set(km.labels_[:10])) == 1 and km.labels_[0] != km.labels_[-1]
        np.testing.assert_array_equal(km.predict(X), km.labels_)
        D = km.transform(X)
        np.testing.assert_allclose(km.inertia_, np.sum(np.min(D, axis=1) ** 2), rtol=1e-10)

    def test_pipeline(self, X):
        pipe = make_pipeline(ApproxSVDProjection(n_clusters=2, random_state=0),
                             LloydKMeans(n_clusters=2, random_state=0))
        labels = pipe.fit_predict(X)
        assert len(set(labels[:10])) == 1 and len(set(labels[10:])) == 1

    def test_deterministic(self, X):
        a = LloydKMeans(n_clusters=3, random_state=4).fit(X)
        b = LloydKMeans(n_clusters=3, random_state=4).fit(X)
        np.testing.assert_array_equal(a.labels_, b.labels_)

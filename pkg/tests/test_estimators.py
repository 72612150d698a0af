import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from cmolsim.estimators import SBSTDPFeatureExtractor, SpikeCountClassifier, TemplateMatcher
from cmolsim.experiments import letter_to_features, load_glyphs, load_letters


def glyph_data():
    labels, gl = load_glyphs()
    return gl.reshape(64, -1), np.asarray(labels)


def test_template_matcher_params_and_clone():
    m = TemplateMatcher(threshold=0.6, random_state=3)
    assert m.get_params()["threshold"] == 0.6
    c = clone(m)
    assert c.get_params() == m.get_params()


@pytest.mark.filterwarnings("ignore:The number of unique classes")
def test_template_matcher_fit_predict():
    X, y = glyph_data()
    m = TemplateMatcher(random_state=0).fit(X, y)
    pred = m.predict(X)
    assert pred.shape == (64,) and set(pred) <= set(y)
    assert 0.2 < m.score(X, y) <= 1.0
    assert 0.3 < m.correct_spike_ratio(X, y) < 0.8
    assert np.array_equal(m.predict(X), pred)


def test_template_matcher_ideal_one_hot():
    X = np.eye(16, dtype=int)
    y = np.arange(16)
    m = TemplateMatcher(repeats=30, mismatch=0.0, p_program_fail=0.0).fit(X, y)
    assert m.score(X, y) == 1.0


def test_template_matcher_validation():
    X, y = glyph_data()
    with pytest.raises(NotFittedError):
        TemplateMatcher().predict(X)
    with pytest.raises(ValueError):
        TemplateMatcher().fit(X * 2, y)
    m = TemplateMatcher().fit(X, y)
    with pytest.raises(ValueError):
        m.predict(X[:, :10])
    with pytest.raises(ValueError):
        TemplateMatcher(random_state="x").fit(X, y)


def letter_stimuli():
    feats = [f.reshape(-1) for L in load_letters() for f in letter_to_features(L)]
    return np.array(feats), np.repeat(np.arange(4), 16)


def test_feature_extractor_pipeline():
    X, y = letter_stimuli()
    fe = SBSTDPFeatureExtractor(random_state=1).fit(X)
    assert fe.n_updates_ > 0 and np.any(fe.thresholds_ > 0.5)
    W = fe.weights()
    assert W.shape == (64, 64)
    Z = fe.transform(X)
    assert Z.shape == (64, 64) and Z.dtype.kind == "i"
    assert np.array_equal(fe.transform(X), Z)
    clf = SpikeCountClassifier().fit(Z, y)
    active = [Z[y == k].sum() > 0 for k in range(4)]
    assert np.allclose(clf.coef_.sum(axis=0)[active], 1.0)
    assert clf.predict(Z).shape == (64,)


def test_spike_count_classifier_oracle():
    Z = np.array([[3, 0], [0, 2], [1, 1]])
    y = np.array([0, 1, 1])
    clf = SpikeCountClassifier().fit(Z, y)
    # class 0 counts [3, 0] -> [1, 0]; class 1 counts [1, 3] -> [0.25, 0.75]
    assert clf.coef_.tolist() == [[1.0, 0.25], [0.0, 0.75]]
    assert clf.predict(np.array([[5, 0], [0, 5]])).tolist() == [0, 1]
    with pytest.raises(ValueError):
        SpikeCountClassifier().fit(-Z, y)

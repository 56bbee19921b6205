import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from safescout import ActiveParameterLearner, SafeRegionClassifier
from safescout.environment import grid_environment, table1_environment
from safescout.oracle import TrustOracle


def test_learner_params_and_clone():
    est = ActiveParameterLearner(n_max=30, random_state=3)
    params = est.get_params()
    assert params["n_max"] == 30 and params["delta"] == 0.02
    twin = clone(est)
    assert twin.get_params() == params
    assert est.set_params(delta=0.05).delta == 0.05


def test_learner_fit_transform_is_deterministic():
    env = table1_environment()
    a = ActiveParameterLearner(random_state=4).fit(env)
    b = ActiveParameterLearner(random_state=4).fit(env)
    np.testing.assert_array_equal(a.estimates_, b.estimates_)
    X = a.transform()
    assert X.shape == (9, 2)
    np.testing.assert_allclose(X[:, 0], X[:, 1] * (1 - X[:, 1]))
    assert a.terminated_ == "active_set_empty" and a.n_iter_ == a.log_.n_iterations
    assert np.all(a.eliminated_at_ >= 1)


def test_learner_with_explicit_oracle():
    env = grid_environment([1.0, 1.0, 1.0])
    est = ActiveParameterLearner(n_max=4, n_delta=10).fit(env, TrustOracle(env.true_p, 0))
    np.testing.assert_array_equal(est.estimates_, [1.0, 1.0, 1.0])
    assert est.n_iter_ == 12


def test_unfitted_errors():
    with pytest.raises(NotFittedError):
        ActiveParameterLearner().transform()
    with pytest.raises(NotFittedError):
        SafeRegionClassifier().predict([[0.1, 0.9], [0.2, 0.5]])


def test_classifier_predicts_table_labels(table1_final):
    X = np.column_stack([table1_final * (1 - table1_final), table1_final])
    clf = SafeRegionClassifier().fit(X)
    assert clf.threshold_ == pytest.approx(0.19359375)
    assert clf.route_ == "median" and clf.k_star_ == 1
    np.testing.assert_array_equal(clf.predict(X), [1, 1, 0, 1, 0, 1, 0, 1, 0])
    single = SafeRegionClassifier().fit(table1_final[:, None])
    np.testing.assert_array_equal(single.predict(table1_final[:, None]), clf.predict(X))


def test_pipeline_learner_into_classifier():
    env = table1_environment()
    X = ActiveParameterLearner(random_state=1).fit_transform(env)
    labels = SafeRegionClassifier().fit(X).predict(X)
    assert set(labels.tolist()) <= {0, 1}


def test_classifier_rejects_bad_shape():
    with pytest.raises(ValueError):
        SafeRegionClassifier().fit(np.ones((4, 3)) * 0.5)

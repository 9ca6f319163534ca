from __future__ import annotations

import math

import numpy as np
import pytest

from conftest import make_blobs
from phytosense.errors import NonFiniteInput, SingleClassInput, SingularCovariance
from phytosense.learn import QDA, GaussianNB


def hand_nb_posterior(x, class_stats, var_floor=1e-9):
    """Independent Gaussian-likelihood posterior; population variances."""
    joints = []
    for rows, prior in class_stats:
        rows = np.asarray(rows, dtype=float)
        mu = rows.mean()
        var = max(float(np.mean((rows - mu) ** 2)), var_floor)
        log_lik = -0.5 * ((x - mu) ** 2 / var + math.log(2 * math.pi * var))
        joints.append(math.log(prior) + log_lik)
    top = max(joints)
    exp = [math.exp(j - top) for j in joints]
    return exp[1] / sum(exp)  # P(second class)


class TestGaussianNB:
    A = [-1.0, -1.1, -0.9]
    B = [1.0, 0.9, 1.1]

    def _fit(self):
        X = np.array(self.A + self.B).reshape(-1, 1)
        y = np.array(["A"] * 3 + ["B"] * 3, dtype=object)
        return GaussianNB().fit(X, y, positive_label="B")

    def test_hand_computed_posteriors(self):
        model = self._fit()
        for x in (-1.0, 0.95, 0.2, -0.3):
            expected = hand_nb_posterior(x, [(self.A, 0.5), (self.B, 0.5)])
            got = model.predict_score(np.array([[x]]))[0]
            assert abs(got - expected) < 1e-9

    def test_predictions_from_spec_example(self):
        model = self._fit()
        assert model.predict(np.array([[0.95]]))[0] == "B"
        assert model.predict(np.array([[-1.0]]))[0] == "A"

    def test_variance_floor_keeps_constant_feature_finite(self):
        X = np.array([[0.0, 1.0], [0.0, 2.0], [0.0, 5.0], [0.0, 6.0]])
        y = np.array(["a", "a", "b", "b"], dtype=object)
        model = GaussianNB().fit(X, y)
        assert np.isfinite(model.predict_score(X)).all()

    def test_rejects_nonfinite(self):
        X = np.array([[np.nan, 1.0], [0.0, 2.0], [1.0, 5.0], [2.0, 6.0]])
        y = np.array(["a", "a", "b", "b"], dtype=object)
        with pytest.raises(NonFiniteInput):
            GaussianNB().fit(X, y)

    def test_rejects_single_class(self):
        X = np.zeros((4, 2))
        y = np.array(["a"] * 4, dtype=object)
        with pytest.raises(SingleClassInput):
            GaussianNB().fit(X, y)

    def test_persistence_bit_exact(self):
        X, y = make_blobs(seed=11)
        model = GaussianNB().fit(X, y)
        clone = GaussianNB().load_state(model.state_dict())
        np.testing.assert_array_equal(model.predict_score(X),
                                      clone.predict_score(X))


def hand_qda_scores(X_train_by_class, priors, x, ridge_scale=1e-6):
    """Independent QDA discriminants: population covariance + trace ridge."""
    joints = []
    d = len(x)
    for rows, prior in zip(X_train_by_class, priors):
        rows = np.asarray(rows, dtype=float)
        mu = rows.mean(axis=0)
        centered = rows - mu
        cov = centered.T @ centered / len(rows)
        cov = cov + (ridge_scale * np.trace(cov) / d) * np.eye(d)
        inv = np.linalg.inv(cov)
        _, logdet = np.linalg.slogdet(cov)
        diff = np.asarray(x) - mu
        joints.append(math.log(prior) - 0.5 * (logdet + diff @ inv @ diff))
    top = max(joints)
    exp = [math.exp(j - top) for j in joints]
    return exp[1] / sum(exp)


class TestQDA:
    def test_hand_computed_posteriors_six_points(self):
        cls_a = [[0.0, 0.0], [1.0, 0.5], [0.5, 1.0]]
        cls_b = [[3.0, 3.0], [4.0, 3.5], [3.5, 4.2]]
        X = np.array(cls_a + cls_b)
        y = np.array(["a"] * 3 + ["b"] * 3, dtype=object)
        model = QDA().fit(X, y, positive_label="b")
        for x in ([0.2, 0.3], [3.6, 3.6], [2.0, 2.0]):
            expected = hand_qda_scores([cls_a, cls_b], [0.5, 0.5], x)
            got = model.predict_score(np.array([x]))[0]
            assert abs(got - expected) < 1e-9

    def test_close_to_analytic_bayes_rule(self):
        # two known Gaussians with different covariances; the analytic
        # likelihood-ratio rule on the true parameters is the oracle
        rng = np.random.default_rng(42)
        mean_a, cov_a = np.array([0.0, 0.0]), np.array([[1.0, 0.3], [0.3, 0.5]])
        mean_b, cov_b = np.array([1.5, 1.0]), np.array([[0.6, -0.2], [-0.2, 1.2]])
        train_a = rng.multivariate_normal(mean_a, cov_a, 200)
        train_b = rng.multivariate_normal(mean_b, cov_b, 200)
        X = np.vstack([train_a, train_b])
        y = np.array(["a"] * 200 + ["b"] * 200, dtype=object)
        model = QDA().fit(X, y, positive_label="b")

        test_a = rng.multivariate_normal(mean_a, cov_a, 500)
        test_b = rng.multivariate_normal(mean_b, cov_b, 500)
        X_test = np.vstack([test_a, test_b])
        y_test = np.array(["a"] * 500 + ["b"] * 500, dtype=object)

        inv_a, inv_b = np.linalg.inv(cov_a), np.linalg.inv(cov_b)
        _, logdet_a = np.linalg.slogdet(cov_a)
        _, logdet_b = np.linalg.slogdet(cov_b)

        def bayes(x):
            da = -0.5 * (logdet_a + (x - mean_a) @ inv_a @ (x - mean_a))
            db = -0.5 * (logdet_b + (x - mean_b) @ inv_b @ (x - mean_b))
            return "b" if db > da else "a"

        bayes_pred = np.array([bayes(x) for x in X_test], dtype=object)
        acc_bayes = float(np.mean(bayes_pred == y_test))
        acc_qda = float(np.mean(model.predict(X_test) == y_test))
        assert abs(acc_qda - acc_bayes) <= 0.02

    def test_singular_covariance_raises(self):
        # identical points per class: zero trace, ridge cannot stabilize
        X = np.array([[1.0, 1.0]] * 3 + [[2.0, 2.0]] * 3)
        y = np.array(["a"] * 3 + ["b"] * 3, dtype=object)
        with pytest.raises(SingularCovariance):
            QDA().fit(X, y)

    def test_persistence_bit_exact(self):
        X, y = make_blobs(seed=12, d=3)
        model = QDA().fit(X, y)
        clone = QDA().load_state(model.state_dict())
        np.testing.assert_array_equal(model.predict_score(X),
                                      clone.predict_score(X))

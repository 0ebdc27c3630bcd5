import math

import numpy as np
import pytest

from procfp.svm import BinarySvc, MulticlassSvc, rbf_kernel, rbf_kernel_matrix

from oracles import qp_dual_optimum


def random_instance(seed):
    """Small random binary problem with both labels present."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 13))
    d = int(rng.integers(1, 5))
    X = rng.normal(0.0, 1.0, (n, d))
    y = np.ones(n, dtype=int)
    y[: int(rng.integers(1, n))] = -1
    rng.shuffle(y)
    if np.all(y == y[0]):
        y[0] = -y[0]
    C = float(rng.choice([0.5, 1.0, 10.0]))
    gamma = float(rng.choice([0.5, 1.0, 2.0]))
    return X, y, C, gamma


class TestKernel:
    def test_identical_inputs(self):
        v = np.array([1.0, -2.0, 3.0])
        assert rbf_kernel(v, v, 0.7) == 1.0

    def test_closed_form(self):
        assert rbf_kernel(np.array([0.0]), np.array([1.0]), 1.0) == pytest.approx(
            math.exp(-1.0), abs=1e-12
        )

    def test_symmetric(self):
        rng = np.random.default_rng(0)
        u, v = rng.standard_normal(4), rng.standard_normal(4)
        assert rbf_kernel(u, v, 2.0) == rbf_kernel(v, u, 2.0)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            rbf_kernel(np.zeros(3), np.zeros(4), 1.0)

    def test_matrix_agrees_with_scalar(self):
        rng = np.random.default_rng(1)
        A = rng.standard_normal((5, 3))
        B = rng.standard_normal((4, 3))
        K = rbf_kernel_matrix(A, B, 0.5)
        for i in range(5):
            for j in range(4):
                assert K[i, j] == pytest.approx(rbf_kernel(A[i], B[j], 0.5), abs=1e-12)


class TestBinarySvc:
    def test_two_point_symmetry(self):
        model = BinarySvc(C=10.0, gamma=1.0).fit(
            np.array([[-1.0], [1.0]]), np.array([-1, 1])
        )
        assert abs(model.decision_function(np.array([0.0]))) < 1e-6
        assert model.decision_function(np.array([-0.5])) < 0
        assert model.decision_function(np.array([0.5])) > 0

    def test_xor_separated(self):
        X = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
        y = np.array([1, 1, -1, -1])
        model = BinarySvc(C=10.0, gamma=1.0).fit(X, y)
        assert np.array_equal(model.predict(X), y)

    def test_single_class_rejected(self):
        with pytest.raises(ValueError, match="single class"):
            BinarySvc().fit(np.zeros((3, 2)), np.array([1, 1, 1]))

    def test_box_constraint_and_balance(self):
        for seed in (0, 1, 2, 3):
            X, y, C, gamma = random_instance(seed)
            model = BinarySvc(C=C, gamma=gamma).fit(X, y)
            alphas = np.abs(model.dual_coef_)
            assert np.all(alphas >= 0) and np.all(alphas <= C + 1e-12)
            assert abs(model.dual_coef_.sum()) <= 1e-6 * C

    def test_kkt_conditions_at_convergence(self):
        for seed in range(10):
            rng = np.random.default_rng(seed)
            X = rng.normal(0, 1, (40, 3))
            X[:20] += 2.0
            y = np.concatenate([np.ones(20, int), -np.ones(20, int)])
            C, tol = 10.0, 1e-3
            model = BinarySvc(C=C, gamma=0.5, kkt_tolerance=tol).fit(X, y)
            assert model.converged_

            # reconstruct every training point's multiplier (zeros for non-SVs)
            alpha = np.zeros(len(y))
            for coef, sv in zip(model.dual_coef_, model.support_vectors_):
                matches = np.flatnonzero((X == sv).all(axis=1))
                alpha[matches[0]] = abs(coef)
            margins = y * model.decision_function(X)
            for a, m in zip(alpha, margins):
                if a < 1e-12:
                    assert m >= 1 - tol
                elif a > C - 1e-12:
                    assert m <= 1 + tol
                else:
                    assert abs(m - 1) <= tol

    def test_free_support_vectors_on_margin(self):
        rng = np.random.default_rng(42)
        X = rng.normal(0, 1, (30, 2))
        X[:15] += 3.0
        y = np.concatenate([np.ones(15, int), -np.ones(15, int)])
        model = BinarySvc(C=10.0, gamma=0.5, kkt_tolerance=1e-3).fit(X, y)
        free = (np.abs(model.dual_coef_) > 1e-9) & (np.abs(model.dual_coef_) < 10.0 - 1e-9)
        margins = model.decision_function(model.support_vectors_) * np.sign(model.dual_coef_)
        assert np.all(np.abs(margins[free] - 1.0) <= 1e-3)

    def test_duplicating_non_support_point_preserves_decision(self):
        rng = np.random.default_rng(3)
        X = rng.normal(0, 1, (20, 2))
        X[:10] += 4.0
        y = np.concatenate([np.ones(10, int), -np.ones(10, int)])
        model = BinarySvc(C=10.0, gamma=0.5).fit(X, y)

        support = {tuple(sv) for sv in model.support_vectors_}
        idle = next(k for k in range(20) if tuple(X[k]) not in support)
        X2 = np.concatenate([X, X[idle : idle + 1]])
        y2 = np.concatenate([y, y[idle : idle + 1]])
        retrained = BinarySvc(C=10.0, gamma=0.5).fit(X2, y2)

        probes = rng.normal(1, 2, (50, 2))
        assert np.allclose(
            model.decision_function(probes), retrained.decision_function(probes), atol=1e-6
        )

    def test_interior_points_outside_margin(self):
        rng = np.random.default_rng(4)
        X = rng.normal(0, 0.5, (30, 2))
        X[:15] += 5.0
        y = np.concatenate([np.ones(15, int), -np.ones(15, int)])
        tol = 1e-3
        model = BinarySvc(C=10.0, gamma=0.2, kkt_tolerance=tol).fit(X, y)
        support = {tuple(sv) for sv in model.support_vectors_}
        for k in range(30):
            if tuple(X[k]) not in support:
                assert abs(model.decision_function(X[k])) > 1 - tol

    def test_dual_objective_matches_qp_oracle(self):
        worst = 0.0
        for seed in range(30):
            X, y, C, gamma = random_instance(1000 + seed)
            model = BinarySvc(C=C, gamma=gamma).fit(X, y)
            reference = qp_dual_optimum(rbf_kernel_matrix(X, X, gamma), y, C)
            gap = abs(model.dual_objective_ - reference) / max(abs(reference), 1e-9)
            worst = max(worst, gap)
        assert worst < 1e-4

    def test_coincident_opposite_points(self):
        # eta = 0 path: duplicate coordinates with opposite labels
        X = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 1.0], [-1.0, -1.0]])
        y = np.array([1, -1, 1, -1])
        model = BinarySvc(C=1.0, gamma=1.0).fit(X, y)
        assert np.all(np.abs(model.dual_coef_) <= 1.0 + 1e-12)

    def test_max_passes_reported_not_fatal(self):
        # an unreachable tolerance forces the solver to stall at the float
        # floor, which must be reported but still produce a usable model
        X = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
        y = np.array([1, 1, -1, -1])
        with pytest.warns(RuntimeWarning, match="SMO stopped"):
            model = BinarySvc(C=10.0, gamma=1.0, kkt_tolerance=1e-18, max_passes=3).fit(X, y)
        assert not model.converged_
        assert np.array_equal(model.predict(X), y)


class TestMulticlassSvc:
    def test_three_separated_clusters(self):
        rng = np.random.default_rng(5)
        X = np.concatenate(
            [
                rng.normal([0, 0], 1.0, (20, 2)),
                rng.normal([10, 0], 1.0, (20, 2)),
                rng.normal([0, 10], 1.0, (20, 2)),
            ]
        )
        y = np.array(["a"] * 20 + ["b"] * 20 + ["c"] * 20, dtype=object)
        model = MulticlassSvc(C=10.0, gamma=0.5).fit(X, y)
        assert np.mean(model.predict(X) == y) == 1.0
        assert len(model.models_) == 3

    def test_two_classes_single_binary_model(self):
        rng = np.random.default_rng(6)
        X = np.concatenate([rng.normal(0, 1, (10, 2)), rng.normal(5, 1, (10, 2))])
        y = np.array(["n"] * 10 + ["p"] * 10, dtype=object)
        model = MulticlassSvc(C=10.0, gamma=0.5).fit(X, y)
        assert len(model.models_) == 1
        binary = model.models_[(0, 1)]
        decisions = binary.decision_function(X)
        expected = np.where(decisions >= 0, "n", "p")
        assert np.array_equal(model.predict(X), expected)

    def test_label_permutation_symmetry(self):
        rng = np.random.default_rng(7)
        X = np.concatenate(
            [rng.normal([0, 0], 1, (15, 2)), rng.normal([8, 0], 1, (15, 2)), rng.normal([0, 8], 1, (15, 2))]
        )
        y = np.array(["a"] * 15 + ["b"] * 15 + ["c"] * 15, dtype=object)
        mapping = {"a": "c", "b": "a", "c": "b"}
        relabeled = np.array([mapping[l] for l in y], dtype=object)

        probes = rng.normal(3, 4, (40, 2))
        base = MulticlassSvc(C=10.0, gamma=0.5).fit(X, y).predict(probes)
        permuted = MulticlassSvc(C=10.0, gamma=0.5).fit(X, relabeled).predict(probes)
        assert np.array_equal(np.array([mapping[l] for l in base]), permuted)

    def test_feature_permutation_invariance(self):
        rng = np.random.default_rng(8)
        X = np.concatenate([rng.normal(0, 1, (20, 4)), rng.normal(4, 1, (20, 4))])
        y = np.array(["a"] * 20 + ["b"] * 20, dtype=object)
        perm = rng.permutation(4)
        probes = rng.normal(2, 2, (30, 4))
        base = MulticlassSvc(C=10.0, gamma=0.3).fit(X, y).predict(probes)
        shuffled = MulticlassSvc(C=10.0, gamma=0.3).fit(X[:, perm], y).predict(probes[:, perm])
        assert np.array_equal(base, shuffled)

    def test_single_class_rejected(self):
        with pytest.raises(ValueError, match="2 classes"):
            MulticlassSvc().fit(np.zeros((4, 2)), ["a"] * 4)

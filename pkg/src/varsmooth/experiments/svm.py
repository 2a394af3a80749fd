"""Gaussian-kernel SVM trained by variable smoothing on the hinge loss.

Training solves ``min_c 0.5 c'Kc + C sum_i max(1 - (Kc)_i y_i, 0)`` over the
kernel-expansion coefficients ``c``, with ``f(c) = 0.5 c'Kc`` kept smooth and
the hinge terms smoothed with ``mu_k = 1/(a k)`` from ``c0 = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.model_selection import KFold
from sklearn.utils.multiclass import unique_labels
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from ..linops import gaussian_gram, make_gram
from ..prox import catalog_hinge_sum, catalog_quadratic_form
from ..smoothing import CompositeProblem, Term
from ..solvers import SolverError, VariableSmoothF, run
from .data import SvmDataset

__all__ = [
    "ClassifierModel",
    "svm_problem",
    "svm_objective",
    "train_svm",
    "predict",
    "kfold_cv",
    "VariableSmoothingSVC",
]


@dataclass
class ClassifierModel:
    coefficients: np.ndarray
    points: np.ndarray
    kernel_std: float

    def decision_function(self, queries) -> np.ndarray:
        Q = np.asarray(queries, dtype=float)
        if Q.ndim == 1:
            Q = Q[:, None] if self.points.shape[1] == 1 else Q[None, :]
        return gaussian_gram(Q, self.points, self.kernel_std) @ self.coefficients


def svm_problem(gram, labels, C) -> CompositeProblem:
    """Quadratic form plus one separable hinge term sharing the Gram map."""
    return CompositeProblem(catalog_quadratic_form(gram), [Term(catalog_hinge_sum(labels, C), gram)])


def svm_objective(gram, labels, C, c) -> float:
    Kc = gram.forward(np.asarray(c, dtype=float))
    return float(0.5 * c @ Kc + C * np.sum(np.maximum(1.0 - Kc * labels, 0.0)))


def train_svm(ds: SvmDataset, a: float, iters: int, log_every: int = 0,
              return_report: bool = False):
    """Fit kernel coefficients by ``iters`` smooth-f variable smoothing steps.

    ``log_every=0`` logs only the first iteration, which keeps training
    at two Gram products per step.
    """
    gram = make_gram(ds.kernel_std, ds.points)
    problem = svm_problem(gram, ds.labels, ds.C)
    report = run(problem, VariableSmoothF(b=a), np.zeros(len(ds)), iters,
                 log_every=log_every or iters)
    c = report.final_x
    if not np.all(np.isfinite(c)):
        raise SolverError("non-finite SVM coefficients", report)
    model = ClassifierModel(coefficients=c.copy(), points=ds.points, kernel_std=ds.kernel_std)
    if return_report:
        return model, report
    return model


def predict(model: ClassifierModel, queries) -> np.ndarray:
    """Labels ``sign(sum_j c_j k(q, X_j))`` with ``sign(0) = +1``."""
    return np.where(model.decision_function(queries) >= 0, 1.0, -1.0)


def kfold_cv(ds: SvmDataset, folds: int, a: float, iters: int, seed: int = 0) -> float:
    """Average misclassification percentage over ``folds`` seeded folds."""
    if folds < 2:
        raise ValueError(f"folds must be >= 2, got {folds}")
    if folds > len(ds):
        raise ValueError(f"folds={folds} exceeds the number of points {len(ds)}")
    splitter = KFold(n_splits=folds, shuffle=True, random_state=seed)
    errors = []
    for train_idx, test_idx in splitter.split(ds.points):
        sub = SvmDataset(ds.points[train_idx], ds.labels[train_idx], ds.kernel_std, ds.C)
        model = train_svm(sub, a, iters)
        wrong = predict(model, ds.points[test_idx]) != ds.labels[test_idx]
        errors.append(100.0 * np.mean(wrong))
    return float(np.mean(errors))


class VariableSmoothingSVC(ClassifierMixin, BaseEstimator):
    """Binary kernel SVM fitted with the smooth-f variable smoothing scheme.

    Parameters
    ----------
    C : float, default=100.0
        Hinge-loss weight.
    sigma : float, default=0.5
        Gaussian kernel width.
    a : float, default=1e-3
        Smoothing schedule parameter, ``mu_k = 1/(a k)``.
    max_iter : int, default=10000
        Fixed iteration budget.
    """

    def __init__(self, C=100.0, sigma=0.5, a=1e-3, max_iter=10000):
        self.C = C
        self.sigma = sigma
        self.a = a
        self.max_iter = max_iter

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        self.classes_ = unique_labels(y)
        if len(self.classes_) > 2:
            raise ValueError("VariableSmoothingSVC is a binary classifier")
        # the last class maps to +1; a single class is treated as +1
        signed = np.where(y == self.classes_[-1], 1.0, -1.0)
        ds = SvmDataset(X, signed, kernel_std=self.sigma, C=self.C)
        self.model_ = train_svm(ds, self.a, self.max_iter)
        self.n_features_in_ = X.shape[1]
        return self

    def decision_function(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X)
        return self.model_.decision_function(X)

    def predict(self, X):
        scores = self.decision_function(X)
        if len(self.classes_) == 1:
            return np.full(scores.shape[0], self.classes_[0])
        return np.where(scores >= 0, self.classes_[-1], self.classes_[0])

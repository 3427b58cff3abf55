"""Scikit-learn style estimators wrapping the functional decompositions.

Each estimator factors the training matrix in ``fit`` and exposes the
leading right basis as ``components_`` (shape ``(n_components, n_features)``),
so ``transform`` projects data the same way ``TruncatedSVD`` does. This
lets the decompositions drop into pipelines and model-selection tooling.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .decompositions import pivoted_qlp, rand_qlp
from .errors import ParameterError
from .kernels import jacobi_svd
from .rng import GaussianStream
from .validation import as_matrix, require_finite

__all__ = ["RandQLP", "PivotedQLP", "JacobiSVD"]


class _QlpTransformer(BaseEstimator, TransformerMixin):
    """Shared fit/transform plumbing for the QLP-family estimators."""

    def __init__(self, n_components=None):
        self.n_components = n_components

    def _factorize(self, X):
        raise NotImplementedError

    def _resolve_components(self, n):
        if self.n_components is None:
            return n
        if not 1 <= self.n_components <= n:
            raise ParameterError(
                f"n_components must lie in [1, {n}], got {self.n_components}"
            )
        return self.n_components

    def fit(self, X, y=None):
        X = require_finite(as_matrix(X, "X"), "X")
        factors = self._factorize(X)
        k = self._resolve_components(X.shape[1])
        self.factors_ = factors
        self.n_components_ = k
        self.n_features_in_ = X.shape[1]
        self.singular_values_ = factors.diag_estimates()[:k]
        self.components_ = factors.p[:, :k].T.copy()
        return self

    def transform(self, X, y=None):
        if not hasattr(self, "components_"):
            raise ParameterError("estimator is not fitted; call fit first")
        X = as_matrix(X, "X")
        if X.shape[1] != self.n_features_in_:
            raise ParameterError(
                f"X has {X.shape[1]} features, fitted for {self.n_features_in_}"
            )
        return X @ self.components_.T

    def inverse_transform(self, X):
        X = as_matrix(X, "X")
        return X @ self.components_


class RandQLP(_QlpTransformer):
    """Randomized QLP factorization as a transformer.

    Parameters
    ----------
    n_components : number of leading directions kept by ``transform``
        (default: all).
    random_state : seed of the Gaussian sketch; fitted results are
        bit-reproducible for a fixed (X, random_state).

    Attributes
    ----------
    factors_ : the full QlpFactors of the training matrix.
    singular_values_ : leading diagonal magnitudes of L (descending).
    components_ : leading right basis, ``(n_components, n_features)``.
    """

    def __init__(self, n_components=None, random_state=0):
        super().__init__(n_components=n_components)
        self.random_state = random_state

    def _factorize(self, X):
        return rand_qlp(X, GaussianStream(self.random_state))


class PivotedQLP(_QlpTransformer):
    """Stewart's pivoted QLP as a (deterministic) transformer."""

    def _factorize(self, X):
        return pivoted_qlp(X)


class JacobiSVD(BaseEstimator, TransformerMixin):
    """Exact SVD via one-sided Jacobi, with the same transformer surface.

    Serves as the accuracy oracle next to the QLP estimators.
    """

    def __init__(self, n_components=None):
        self.n_components = n_components

    def fit(self, X, y=None):
        X = require_finite(as_matrix(X, "X"), "X")
        f = jacobi_svd(X)
        n = X.shape[1]
        k = n if self.n_components is None else self.n_components
        if not 1 <= k <= n:
            raise ParameterError(f"n_components must lie in [1, {n}], got {k}")
        self.factors_ = f
        self.n_components_ = k
        self.n_features_in_ = n
        self.singular_values_ = f.sigma[:k].copy()
        self.components_ = f.v[:, :k].T.copy()
        return self

    def transform(self, X, y=None):
        if not hasattr(self, "components_"):
            raise ParameterError("estimator is not fitted; call fit first")
        X = as_matrix(X, "X")
        if X.shape[1] != self.n_features_in_:
            raise ParameterError(
                f"X has {X.shape[1]} features, fitted for {self.n_features_in_}"
            )
        return X @ self.components_.T

    def inverse_transform(self, X):
        X = as_matrix(X, "X")
        return X @ self.components_

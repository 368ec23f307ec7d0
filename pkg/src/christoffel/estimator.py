"""Scikit-learn style front end.

ChristoffelFunction wraps the moment/Gram/Cholesky pipeline behind the
estimator API: fit() precomputes the factorization for the configured
domain and degree, predict() evaluates lambda_n at rows of points. This
keeps the evaluator composable with pipelines and parameter search.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .evaluator import evaluator_for_body
from .geometry import ConvexBody, from_spec
from .moments import DEGREE_CAP


def as_point_array(X) -> np.ndarray:
    """Validate and coerce input to a float64 array of shape (n_points, 2)."""
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 1:
        if arr.shape[0] != 2:
            raise ValueError("a single point must have exactly 2 coordinates")
        arr = arr.reshape(1, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"expected shape (n_points, 2), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("points must be finite")
    return arr


def resolve_domain(domain) -> ConvexBody:
    """Accept a ConvexBody, a spec dict, or a JSON string / kind name."""
    if isinstance(domain, ConvexBody):
        return domain
    if isinstance(domain, str) and not domain.lstrip().startswith("{"):
        return from_spec({"kind": domain})
    return from_spec(domain)


class ChristoffelFunction(BaseEstimator):
    """Degree-n Christoffel function of a planar convex domain.

    Parameters
    ----------
    domain : str, dict or ConvexBody, default="disk"
        Domain specification (see geometry.from_spec).
    degree : int, default=8
        Polynomial degree n (capped at 30).
    quadrature_tol : float, default=1e-12
        Relative tolerance for quadrature moments of non-analytic domains.
    """

    def __init__(self, domain="disk", degree=8, quadrature_tol=1e-12):
        self.domain = domain
        self.degree = degree
        self.quadrature_tol = quadrature_tol

    def fit(self, X=None, y=None):
        """Precompute moments and the Gram factorization; X and y are ignored
        (the estimator is determined by its parameters)."""
        if not 0 <= int(self.degree) <= DEGREE_CAP:
            raise ValueError(f"degree must lie in [0, {DEGREE_CAP}]")
        self.body_ = resolve_domain(self.domain)
        self.evaluator_ = evaluator_for_body(
            self.body_, int(self.degree), self.quadrature_tol
        )
        return self

    def _check_fitted(self):
        if not hasattr(self, "evaluator_"):
            raise NotFittedError(
                "This ChristoffelFunction instance is not fitted yet; "
                "call fit() first."
            )

    def predict(self, X) -> np.ndarray:
        """lambda_n at each row of X, shape (n_points,)."""
        self._check_fitted()
        pts = as_point_array(X)
        return np.array([self.evaluator_.evaluate(p).lam for p in pts])

    def transform(self, X) -> np.ndarray:
        """lambda_n as a single feature column, shape (n_points, 1)."""
        return self.predict(X).reshape(-1, 1)

    def fit_transform(self, X, y=None) -> np.ndarray:
        return self.fit(X, y).transform(X)

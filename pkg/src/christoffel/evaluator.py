"""Exact Christoffel-function evaluation from the moment Gram matrix.

lambda_n(D, x) = 1 / (m(x)^T M^{-1} m(x)) where m is the graded-lex
monomial vector and M the moment Gram matrix. The inverse quadratic form
is computed through the extended-precision Cholesky factor, so the
double-precision result is exact to rounding for every supported degree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from gmpy2 import mpfr

from . import hp
from .errors import OutOfRange, TooCloseToBoundary
from .geometry import ConvexBody
from .moments import (
    GramMatrix,
    MomentTable,
    alpha_ball_moments,
    disk_moments,
    gram_matrix,
    quadrature_moments,
)


@dataclass(frozen=True)
class Evaluation:
    """One pointwise evaluation: lam = lambda_n(D, x), kernel_diag = 1/lam."""

    point: tuple[float, float]
    n: int
    lam: float
    lam_hp: mpfr

    @property
    def kernel_diag(self) -> float:
        return 1.0 / self.lam


class ChristoffelEvaluator:
    """Holds the Cholesky factor of a Gram matrix; evaluation is pure.

    Construction factorizes once (single-threaded); evaluate() can then be
    called concurrently. FactorizationFailure at construction signals
    precision exhaustion: reduce the degree.
    """

    def __init__(self, gram: GramMatrix):
        self.gram = gram
        self.n = gram.n
        self.dim = gram.dim
        self.factor = hp.cholesky(gram.entries)

    def _monomial_vector(self, x: float, y: float):
        with hp.working_precision():
            xh, yh = mpfr(x), mpfr(y)
            xs = [mpfr(1)]
            ys = [mpfr(1)]
            for _ in range(self.n):
                xs.append(xs[-1] * xh)
                ys.append(ys[-1] * yh)
            return [xs[i] * ys[j] for (i, j) in self.gram.basis]

    def kernel_diag_hp(self, x: float, y: float) -> mpfr:
        """K_n(x, x) = m(x)^T M^{-1} m(x) in working precision."""
        m = self._monomial_vector(x, y)
        z = hp.solve_lower(self.factor, m)
        return hp.dot(z, z)

    def evaluate(self, x) -> Evaluation:
        """lambda_n at a point (defined for every x, not only members)."""
        px, py = float(x[0]), float(x[1])
        with hp.working_precision():
            lam_hp = 1 / self.kernel_diag_hp(px, py)
        return Evaluation((px, py), self.n, float(lam_hp), lam_hp)

    def minimizer_polynomial(self, x):
        """Graded-lex coefficients of f* = K_n(x, .) / K_n(x, x).

        f* attains the extremal property: f*(x) = 1 and the integral of
        f*^2 over D equals lambda_n(D, x).
        """
        px, py = float(x[0]), float(x[1])
        m = self._monomial_vector(px, py)
        with hp.working_precision():
            z = hp.solve_lower(self.factor, m)
            c = hp.solve_lower_t(self.factor, z)
            k = hp.dot(z, z)
            return [ci / k for ci in c]

    def factor_residual(self) -> float:
        """max |L L^T - M| / max |M|, for the factorization invariant."""
        return float(hp.max_rel_residual(self.factor, self.gram.entries))


def quadratic_form(gram: GramMatrix, coeffs) -> mpfr:
    """c^T M c: the integral of (sum c_k m_k)^2 over the domain."""
    with hp.working_precision():
        total = mpfr(0)
        for i, row in enumerate(gram.entries):
            ci = coeffs[i]
            if ci == 0:
                continue
            total += ci * hp.dot(row, coeffs)
        return total


def polynomial_value(gram: GramMatrix, coeffs, x) -> mpfr:
    """Evaluate a graded-lex coefficient vector at a point, in precision."""
    with hp.working_precision():
        xh, yh = mpfr(float(x[0])), mpfr(float(x[1]))
        total = mpfr(0)
        for (i, j), c in zip(gram.basis, coeffs):
            total += c * xh**i * yh**j
        return total


def disk_reference_shape(n: int, x, sigma: float = 4.0) -> float:
    """Constant-free disk shape n^-2 sqrt(1 - |x|^2) (valid away from the
    boundary layer: requires 1 - |x|^2 >= sigma n^-2)."""
    if n < 1:
        raise OutOfRange("degree n must be at least 1")
    w = 1.0 - (float(x[0]) ** 2 + float(x[1]) ** 2)
    if w < sigma / (n * n):
        raise TooCloseToBoundary(
            f"1 - |x|^2 = {w:.3e} below sigma n^-2 = {sigma / (n * n):.3e}"
        )
    return math.sqrt(w) / (n * n)


def moments_for_body(body: ConvexBody, max_degree: int,
                     quad_tol: float = 1e-12) -> MomentTable:
    """Closed-form moments for disk / alpha ball, quadrature otherwise."""
    if body.kind == "disk":
        return disk_moments(max_degree)
    if body.kind == "alpha_ball":
        return alpha_ball_moments(body.params["alpha"], max_degree)
    return quadrature_moments(body, max_degree, quad_tol)


def evaluator_for_body(body: ConvexBody, n: int,
                       quad_tol: float = 1e-12) -> ChristoffelEvaluator:
    """Build the degree-n evaluator for a body, choosing the moment route."""
    return ChristoffelEvaluator(gram_matrix(moments_for_body(body, n, quad_tol), n))

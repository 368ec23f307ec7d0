"""Extended-precision arithmetic helpers on top of gmpy2.

All moment storage, Gram assembly and factorization run at
``PRECISION_BITS`` bits of mantissa (default 256, override with the
``CHRISTOFFEL_PRECISION_BITS`` environment variable before import).
gmpy2 contexts are thread-local, so every computational entry point
wraps its arithmetic in ``working_precision()``.
"""

from __future__ import annotations

import math
import os
from functools import lru_cache

import gmpy2
from gmpy2 import mpfr

from .errors import FactorizationFailure

PRECISION_BITS = max(int(os.environ.get("CHRISTOFFEL_PRECISION_BITS", "256")), 64)


def working_precision():
    """Context manager activating the library's working precision."""
    return gmpy2.context(precision=PRECISION_BITS)


def mpf(x) -> mpfr:
    with working_precision():
        return mpfr(x)


def gamma(x) -> mpfr:
    with working_precision():
        return gmpy2.gamma(mpfr(x))


def pi() -> mpfr:
    with working_precision():
        return gmpy2.const_pi()


def sqrt(x) -> mpfr:
    with working_precision():
        return gmpy2.sqrt(mpfr(x))


def format_sig(x, digits: int) -> str:
    """Decimal string of ``x`` with ``digits`` significant digits."""
    with working_precision():
        x = mpfr(x)
    if gmpy2.is_nan(x):
        return "nan"
    if gmpy2.is_infinite(x):
        return "-inf" if x < 0 else "inf"
    if x == 0:
        return "0." + "0" * (digits - 1) + "e0"
    mant, exp, _ = x.digits(10, digits)
    sign = "-" if mant.startswith("-") else ""
    mant = mant.lstrip("-")
    # digits() returns exponent for "0.mant" scaling; shift one place left
    return f"{sign}{mant[0]}.{mant[1:]}e{exp - 1}"


def cholesky(rows):
    """Lower-triangular factor L with L L^T = M, in working precision.

    ``rows`` is a symmetric positive-definite matrix as a list of lists
    of mpfr. Raises FactorizationFailure on a nonpositive pivot.
    """
    with working_precision():
        n = len(rows)
        zero = mpfr(0)
        L = [[zero] * n for _ in range(n)]
        for i in range(n):
            Li = L[i]
            row = rows[i]
            for j in range(i + 1):
                Lj = L[j]
                s = row[j]
                for k in range(j):
                    s -= Li[k] * Lj[k]
                if i == j:
                    if s <= 0:
                        raise FactorizationFailure(
                            f"nonpositive pivot at index {i}: {float(s):.3e}"
                        )
                    Li[j] = gmpy2.sqrt(s)
                else:
                    Li[j] = s / Lj[j]
        return L


def solve_lower(L, b):
    """Solve L z = b for lower-triangular L."""
    with working_precision():
        z = []
        for i, Li in enumerate(L):
            s = b[i]
            for k in range(i):
                s -= Li[k] * z[k]
            z.append(s / Li[i])
        return z


def solve_lower_t(L, y):
    """Solve L^T x = y for lower-triangular L."""
    with working_precision():
        n = len(L)
        x = [mpfr(0)] * n
        for i in range(n - 1, -1, -1):
            s = y[i]
            for k in range(i + 1, n):
                s -= L[k][i] * x[k]
            x[i] = s / L[i][i]
        return x


def dot(u, v):
    with working_precision():
        s = mpfr(0)
        for a, b in zip(u, v):
            s = gmpy2.fma(a, b, s)
        return s


def max_rel_residual(L, rows):
    """max |L L^T - M| / max |M|, for factorization sanity checks."""
    with working_precision():
        n = len(rows)
        scale = max(abs(rows[i][j]) for i in range(n) for j in range(n))
        worst = mpfr(0)
        for i in range(n):
            for j in range(i + 1):
                s = mpfr(0)
                for k in range(min(i, j) + 1):
                    s = gmpy2.fma(L[i][k], L[j][k], s)
                worst = max(worst, abs(s - rows[i][j]))
        return worst / scale


@lru_cache(maxsize=16)
def gauss_legendre(order: int):
    """Gauss-Legendre nodes and weights on [-1, 1] in working precision.

    Newton iteration on the three-term recurrence, seeded by the Chebyshev
    approximation to the k-th root.
    """
    with working_precision():
        one = mpfr(1)
        nodes, weights = [], []
        tol = mpfr(2) ** (-PRECISION_BITS + 6)
        for k in range(1, order + 1):
            x = mpfr(math.cos(math.pi * (k - 0.25) / (order + 0.5)))
            for _ in range(100):
                p0, p1 = one, x
                for j in range(2, order + 1):
                    p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
                dp = order * (x * p1 - p0) / (x * x - 1)
                dx = p1 / dp
                x -= dx
                if abs(dx) < tol:
                    break
            p0, p1 = one, x
            for j in range(2, order + 1):
                p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
            dp = order * (x * p1 - p0) / (x * x - 1)
            nodes.append(x)
            weights.append(2 / ((1 - x * x) * dp * dp))
        return tuple(nodes), tuple(weights)

"""Uniform-measure monomial moments and the Gram matrix they induce.

Closed forms (disk, alpha ball) are evaluated with the extended-precision
gamma function; every other body goes through membership-driven slice
quadrature: an outer graded Gauss-Legendre rule in x against exact inner
monomial integrals over the chord [y_low(x), y_high(x)] found by
bisection on the oracle. Chord endpoints, nodes and accumulation all run
in extended precision so the Gram matrix sees moments accurate far below
double roundoff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from gmpy2 import fma, mpfr

from . import hp
from .errors import InsufficientMoments, NonConvergence, OutOfRange
from .geometry import ConvexBody

MAX_SUPPORTED_DEGREE = 64

# Gram factorization is only guaranteed accurate up to this polynomial
# degree at the default 256-bit working precision (conditioning grows
# exponentially in the degree).
DEGREE_CAP = 30


def monomials(n: int):
    """Monomial exponents of total degree <= n in graded-lex order, x first."""
    return [(d - k, k) for d in range(n + 1) for k in range(d + 1)]


@dataclass(frozen=True)
class MomentTable:
    """Moments integral x^i y^j over D for all i + j <= 2 max_total_degree."""

    max_total_degree: int
    values: dict
    kind: str = ""

    def value(self, i: int, j: int) -> mpfr:
        try:
            return self.values[(i, j)]
        except KeyError:
            raise InsufficientMoments(
                f"moment ({i}, {j}) beyond stored degree {2 * self.max_total_degree}"
            ) from None

    def area(self) -> mpfr:
        return self.values[(0, 0)]


@dataclass(frozen=True)
class GramMatrix:
    """Symmetric PD matrix of monomial inner products up to degree n."""

    n: int
    dim: int
    entries: list
    basis: tuple


def gram_matrix(moments: MomentTable, n: int) -> GramMatrix:
    """Assemble the Gram matrix in graded-lex order, in working precision."""
    if n > DEGREE_CAP:
        raise OutOfRange(f"degree {n} exceeds the supported cap {DEGREE_CAP}")
    if moments.max_total_degree < n:
        raise InsufficientMoments(
            f"need moments to degree {2 * n}, table holds {2 * moments.max_total_degree}"
        )
    mons = monomials(n)
    with hp.working_precision():
        entries = [
            [moments.value(i1 + i2, j1 + j2) for (i2, j2) in mons]
            for (i1, j1) in mons
        ]
    return GramMatrix(n, len(mons), entries, tuple(mons))


# ---------------------------------------------------------------------------
# closed forms


def disk_moments(max_degree: int) -> MomentTable:
    """Moments of the unit disk: Gamma(a+1/2) Gamma(b+1/2) / Gamma(a+b+2)
    for exponents (2a, 2b); odd moments vanish."""
    if max_degree > MAX_SUPPORTED_DEGREE:
        raise OutOfRange(f"max_degree {max_degree} exceeds {MAX_SUPPORTED_DEGREE}")
    deg = 2 * max_degree
    with hp.working_precision():
        zero = mpfr(0)
        half_gammas = {}
        for q in range(1, deg + 2, 2):
            half_gammas[q] = hp.gamma(mpfr(q) / 2)
        values = {}
        for i in range(deg + 1):
            for j in range(deg + 1 - i):
                if i % 2 or j % 2:
                    values[(i, j)] = zero
                else:
                    a, b = i // 2, j // 2
                    values[(i, j)] = (
                        half_gammas[i + 1]
                        * half_gammas[j + 1]
                        / hp.gamma(mpfr(a + b + 2))
                    )
    return MomentTable(max_degree, values, "disk")


def alpha_ball_moments(alpha: float, max_degree: int) -> MomentTable:
    """Moments of B_alpha:
    (4/alpha^2) Gamma((i+1)/a) Gamma((j+1)/a) / Gamma((i+j+2)/a + 1)
    for even exponents; odd moments vanish. alpha = 2 is accepted purely
    as a validation input (it must reproduce the disk)."""
    if not 1.0 < alpha <= 2.0:
        raise OutOfRange(f"alpha must lie in (1, 2] for moments, got {alpha}")
    if max_degree > MAX_SUPPORTED_DEGREE:
        raise OutOfRange(f"max_degree {max_degree} exceeds {MAX_SUPPORTED_DEGREE}")
    deg = 2 * max_degree
    with hp.working_precision():
        a = mpfr(alpha)
        zero = mpfr(0)
        gam = {q: hp.gamma(mpfr(q) / a) for q in range(1, deg + 2, 2)}
        values = {}
        for i in range(deg + 1):
            for j in range(deg + 1 - i):
                if i % 2 or j % 2:
                    values[(i, j)] = zero
                else:
                    values[(i, j)] = (
                        4 / (a * a) * gam[i + 1] * gam[j + 1]
                        / hp.gamma(mpfr(i + j + 2) / a + 1)
                    )
    return MomentTable(max_degree, values, f"alpha_ball:{alpha}")


# ---------------------------------------------------------------------------
# membership quadrature

# (gauss order, graded levels per side, uniform panels per half)
_PASSES = ((24, 46, 8), (32, 50, 16), (40, 54, 24))


def _kink_points(body: ConvexBody):
    """Boundary points where the body's boundary is not C^2."""
    if body.kind == "alpha_ball":
        return [(0.0, 1.0), (0.0, -1.0), (1.0, 0.0), (-1.0, 0.0)]
    if body.kind == "polygon":
        return list(body.params["vertices"])
    if body.kind == "affine":
        amap = body.params["map"]
        return [amap.apply(p) for p in _kink_points(body.params["base"])]
    return []


def _kink_abscissae(body: ConvexBody):
    """Interior x where the chord endpoints may lose smoothness.

    The outer integrand is analytic between these abscissae and the bbox
    ends, so panels are graded toward each of them.
    """
    return [p[0] for p in _kink_points(body)]


def _chord_float(member, x: float, ylo: float, yhi: float, seed):
    """Float bracket of the chord at abscissa x, or None if no member found."""
    ys = None
    if seed is not None and member(x, seed):
        ys = seed
    else:
        for yv in np.linspace(ylo, yhi, 65):
            if member(x, float(yv)):
                ys = float(yv)
                break
    if ys is None:
        return None
    lo_in, lo_out = ys, ylo
    hi_in, hi_out = ys, yhi
    for _ in range(48):
        m = 0.5 * (lo_in + lo_out)
        if member(x, m):
            lo_in = m
        else:
            lo_out = m
        m = 0.5 * (hi_in + hi_out)
        if member(x, m):
            hi_in = m
        else:
            hi_out = m
    return (lo_in, lo_out), (hi_in, hi_out)


def _polish_hp(member_hp, x, b_in, b_out, iters):
    # widen the float bracket first: float membership may misclassify a
    # ~1e-15 band around the true boundary
    w = abs(b_out - b_in) + 1e-13
    d = math.copysign(1.0, b_out - b_in)
    lo = mpfr(b_in) - d * w  # inside, with margin
    hi = mpfr(b_out) + d * w  # outside, with margin
    if not member_hp(x, lo) or member_hp(x, hi):
        # hair-thin chord: the widened bracket is unusable; keep the float value
        return mpfr(b_in)
    for _ in range(iters):
        mid = (lo + hi) / 2
        if member_hp(x, mid):
            lo = mid
        else:
            hi = mid
    return lo


def _uses_power_membership(body: ConvexBody) -> bool:
    if body.kind == "alpha_ball":
        return True
    if body.kind == "affine":
        return _uses_power_membership(body.params["base"])
    return False


def _quadrature_pass(body: ConvexBody, deg: int, order: int, levels: int,
                     mid_panels: int):
    """One composite-rule evaluation of all moments i + j <= deg."""
    xlo, xhi, ylo, yhi = body.bbox
    member = body.membership
    member_hp = body.membership_hp
    with hp.working_precision():
        gl_x, gl_w = hp.gauss_legendre(order)
        xlo_h, xhi_h = mpfr(xlo), mpfr(xhi)
        span = float(xhi - xlo)
        anchors = [xlo_h]
        for kx in sorted(set(_kink_abscissae(body))):
            if xlo + 1e-12 * span < kx < xhi - 1e-12 * span:
                anchors.append(mpfr(kx))
        anchors.append(xhi_h)
        edges = set()
        for a, b in zip(anchors[:-1], anchors[1:]):
            gap_half = (b - a) / 2
            if float(gap_half) <= 1e-12 * span:
                edges.update((a, b))
                continue
            edges.update(a + gap_half * mpfr(2) ** -k for k in range(1, levels + 1))
            edges.update(b - gap_half * mpfr(2) ** -k for k in range(1, levels + 1))
            # uniform panels across the central stretch between the ladders
            step = gap_half / mid_panels
            edges.update(a + gap_half / 2 + step * k for k in range(1, mid_panels))
        edges.update((xlo_h, xhi_h))
        edges = sorted(edges)
        X, W = [], []
        for a, b in zip(edges[:-1], edges[1:]):
            h2 = (b - a) / 2
            c = (a + b) / 2
            for xg, wg in zip(gl_x, gl_w):
                X.append(c + h2 * xg)
                W.append(h2 * wg)

        xc = 0.5 * (xlo + xhi)
        Xf = [float(x) for x in X]
        chords = [None] * len(X)
        # powers in the oracle make extended bisection expensive; a short
        # polish still removes the float-membership bias
        polish_iters = 14 if _uses_power_membership(body) else 44
        for side in (0, 1):
            idxs = [k for k in range(len(X)) if (Xf[k] <= xc) == (side == 0)]
            idxs.sort(key=lambda k: abs(Xf[k] - xc))
            seed = None
            for k in idxs:
                res = _chord_float(member, Xf[k], ylo, yhi, seed)
                if res is None:
                    continue
                (lo_in, lo_out), (hi_in, hi_out) = res
                if member_hp is not None:
                    yl = _polish_hp(member_hp, X[k], lo_in, lo_out, polish_iters)
                    yh = _polish_hp(member_hp, X[k], hi_in, hi_out, polish_iters)
                else:
                    yl, yh = mpfr(lo_in), mpfr(hi_in)
                chords[k] = (yl, yh)
                seed = 0.5 * (float(yl) + float(yh))

        mom = {}
        for i in range(deg + 1):
            for j in range(deg + 1 - i):
                mom[(i, j)] = mpfr(0)
        recip = [mpfr(1) / (j + 1) for j in range(deg + 1)]
        for k, ch in enumerate(chords):
            if ch is None:
                continue
            yl, yh = ch
            x, w = X[k], W[k]
            xp = [mpfr(1)]
            for _ in range(deg):
                xp.append(xp[-1] * x)
            ylp, yhp = yl, yh
            col = []
            for j in range(deg + 1):
                col.append((yhp - ylp) * recip[j])
                ylp *= yl
                yhp *= yh
            for i in range(deg + 1):
                wxi = w * xp[i]
                for j in range(deg + 1 - i):
                    key = (i, j)
                    mom[key] = fma(wxi, col[j], mom[key])
        return mom


def quadrature_moments(body: ConvexBody, max_degree: int,
                       tol: float = 1e-12) -> MomentTable:
    """Moments of an arbitrary convex body by slice quadrature.

    Successive refinements (higher rule order, deeper grading, more
    panels) are compared moment-by-moment; refinement stops when every
    difference is below tol relative (with an absolute floor for the
    symmetry-zero moments). Raises NonConvergence with the achieved error
    if the last two passes still disagree.
    """
    if tol < 1e-12:
        raise OutOfRange("tol below 1e-12 is not supported")
    if max_degree > MAX_SUPPORTED_DEGREE:
        raise OutOfRange(f"max_degree {max_degree} exceeds {MAX_SUPPORTED_DEGREE}")
    deg = 2 * max_degree
    prev = None
    achieved = math.inf
    with hp.working_precision():
        for order, levels, mid in _PASSES:
            cur = _quadrature_pass(body, deg, order, levels, mid)
            if prev is not None:
                scale = max(abs(v) for v in cur.values())
                floor = tol * 1e-3 * scale
                achieved = 0.0
                for key, v in cur.items():
                    diff = abs(prev[key] - v)
                    denom = max(abs(v), floor / tol)
                    achieved = max(achieved, float(diff / denom))
                if achieved <= tol:
                    return MomentTable(max_degree, cur, f"quadrature:{body.kind}")
            prev = cur
    raise NonConvergence(
        f"quadrature stalled at relative error {achieved:.3e} (target {tol:.1e})",
        achieved=achieved,
    )


# ---------------------------------------------------------------------------
# export


def to_json(table: MomentTable, digits: int = 60) -> dict:
    """{"degree": n, "moments": [[i, j, decimal-string], ...]} with
    digits significant digits, rows in graded-lex order."""
    rows = []
    for (i, j) in sorted(table.values, key=lambda ij: (ij[0] + ij[1], ij[1])):
        rows.append([i, j, hp.format_sig(table.values[(i, j)], digits)])
    return {"degree": table.max_total_degree, "moments": rows}

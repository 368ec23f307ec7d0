"""Closed forms for the l_alpha unit ball B_a = {|x|^a + |y|^a <= 1}, 1 < a < 2.

The upper boundary is y = f(x) = (1 - |x|^a)^(1/a). Everything here is
phrased in the canonical octant 0 <= x <= y; inputs from other octants
are folded in by the dihedral symmetry and results carry the fold so
they can be mapped back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

from .errors import (
    BracketFailure,
    ConvergenceFailure,
    NonNegativeCurvature,
    OutOfRange,
    PointOutsideDomain,
    TooCloseToBoundary,
)


def _pow(x: float, a: float) -> float:
    # x >= 0; 0**a for a > 0 must be 0 without touching log
    return 0.0 if x == 0.0 else math.pow(x, a)


@dataclass(frozen=True)
class AlphaBall:
    """B_alpha with its derived constants.

    c0 is the depth cutoff up to which the closed-form section estimate is
    exercised: min(1 - 2**(-1/alpha), 1/4). The first term keeps the
    x0 = 0 closed form l_i(t) = f^{-1}(1 - t) inside the canonical octant;
    the cap keeps sections well clear of the opposite side.
    c1 = ((2 - alpha)/(1 + alpha))**(1/alpha) is where f''' changes sign.
    """

    alpha: float

    def __post_init__(self):
        if not 1.0 < self.alpha < 2.0:
            raise OutOfRange(f"alpha must lie in (1, 2), got {self.alpha}")

    @cached_property
    def c0(self) -> float:
        return min(1.0 - 2.0 ** (-1.0 / self.alpha), 0.25)

    @cached_property
    def c1(self) -> float:
        return ((2.0 - self.alpha) / (1.0 + self.alpha)) ** (1.0 / self.alpha)

    @cached_property
    def diagonal(self) -> float:
        """x-coordinate of the diagonal boundary point, 2**(-1/alpha)."""
        return 2.0 ** (-1.0 / self.alpha)

    def section_line_exit_threshold(self) -> float:
        """Largest t for which the section line provably exits through the
        upper boundary arc at every admissible foot: (2**(1-1/a) - 1)/sqrt(3)."""
        return (2.0 ** (1.0 - 1.0 / self.alpha) - 1.0) / math.sqrt(3.0)

    def membership(self, x: float, y: float) -> bool:
        return _pow(abs(x), self.alpha) + _pow(abs(y), self.alpha) <= 1.0


# ---------------------------------------------------------------------------
# boundary function and derivatives


def boundary_f(alpha: float, x: float) -> float:
    """f(x) = (1 - |x|^alpha)^(1/alpha), the upper half of the boundary."""
    ax = abs(x)
    if ax > 1.0:
        raise OutOfRange(f"|x| = {ax} exceeds 1")
    return _pow(1.0 - _pow(ax, alpha), 1.0 / alpha)


def boundary_f_prime(alpha: float, x: float) -> float:
    """f'(x) = -sign(x) |x|^(a-1) (1-|x|^a)^(1/a-1); -inf at |x| = 1."""
    ax = abs(x)
    if ax > 1.0:
        raise OutOfRange(f"|x| = {ax} exceeds 1")
    if ax == 0.0:
        return 0.0
    if ax == 1.0:
        return -math.inf if x > 0 else math.inf
    mag = _pow(ax, alpha - 1.0) * _pow(1.0 - _pow(ax, alpha), 1.0 / alpha - 1.0)
    return -math.copysign(mag, x)


def boundary_f_double_prime(alpha: float, x: float) -> float:
    """f''(x) = -(a-1) |x|^(a-2) (1-|x|^a)^(1/a-2) (even in x)."""
    ax = abs(x)
    if ax > 1.0:
        raise OutOfRange(f"|x| = {ax} exceeds 1")
    if ax == 0.0 or ax == 1.0:
        return -math.inf
    return -(alpha - 1.0) * _pow(ax, alpha - 2.0) * _pow(
        1.0 - _pow(ax, alpha), 1.0 / alpha - 2.0
    )


def boundary_f_triple_prime(alpha: float, x: float) -> float:
    """f'''(x) = -(a-1) x^(a-3) (1-x^a)^(1/a-3) ((a-2) + (a+1) x^a), x > 0."""
    if not 0.0 < x < 1.0:
        raise OutOfRange("f''' is evaluated on 0 < x < 1")
    xa = _pow(x, alpha)
    return (
        -(alpha - 1.0)
        * _pow(x, alpha - 3.0)
        * _pow(1.0 - xa, 1.0 / alpha - 3.0)
        * ((alpha - 2.0) + (alpha + 1.0) * xa)
    )


def boundary_height(alpha: float, x: float) -> float:
    """1 - f(x), evaluated without cancellation.

    Near x = 0 the height is O(x^alpha) while f itself is near 1, so
    1 - boundary_f(x) loses all accuracy; log1p/expm1 keep the small
    quantity exact to rounding.
    """
    ax = abs(x)
    if ax > 1.0:
        raise OutOfRange(f"|x| = {ax} exceeds 1")
    u = _pow(ax, alpha)
    if u >= 1.0:
        return 1.0
    return -math.expm1(math.log1p(-u) / alpha)


def f_inverse(alpha: float, y: float) -> float:
    """Inverse of f on [0, 1]: (1 - y^alpha)^(1/alpha)."""
    if not 0.0 <= y <= 1.0:
        raise OutOfRange(f"y = {y} outside [0, 1]")
    return _pow(1.0 - _pow(y, alpha), 1.0 / alpha)


# ---------------------------------------------------------------------------
# nearest boundary point


_OCTANT_IDENTITY = (1.0, 1.0, False)


def _fold(px: float, py: float):
    """Map a point into the octant 0 <= x <= y; return it with the fold."""
    sx = 1.0 if px >= 0 else -1.0
    sy = 1.0 if py >= 0 else -1.0
    qx, qy = sx * px, sy * py
    swapped = qx > qy
    if swapped:
        qx, qy = qy, qx
    return qx, qy, (sx, sy, swapped)


def _unfold(wx: float, wy: float, fold) -> tuple[float, float]:
    """Inverse of _fold for points and vectors (the fold is orthogonal)."""
    sx, sy, swapped = fold
    if swapped:
        wx, wy = wy, wx
    return sx * wx, sy * wy


@dataclass(frozen=True)
class AlphaBallPoint:
    """Foot-point data at the boundary, in the canonical octant 0 <= x0 <= y0.

    u is the outward unit normal, v the tangent with positive x-component,
    delta the distance from the query point to the foot. octant_fold maps
    canonical coordinates back to the query point's frame.
    """

    x0: float
    y0: float
    u: tuple[float, float]
    v: tuple[float, float]
    delta: float
    octant_fold: tuple = _OCTANT_IDENTITY

    def foot_original(self) -> tuple[float, float]:
        return _unfold(self.x0, self.y0, self.octant_fold)

    def u_original(self) -> tuple[float, float]:
        return _unfold(self.u[0], self.u[1], self.octant_fold)

    def v_original(self) -> tuple[float, float]:
        return _unfold(self.v[0], self.v[1], self.octant_fold)


def _frame_at(alpha: float, x0: float):
    """(u, v) at the boundary point (x0, f(x0)) in the canonical octant."""
    if x0 == 0.0:
        return (0.0, 1.0), (1.0, 0.0)
    fp = boundary_f_prime(alpha, x0)
    nrm = math.hypot(fp, 1.0)
    return (-fp / nrm, 1.0 / nrm), (1.0 / nrm, fp / nrm)


def nearest_boundary_point_exact(ball: AlphaBall, x) -> AlphaBallPoint:
    """Global nearest boundary point of a strictly interior x.

    Works in the canonical octant: dense scan of the squared distance to
    (s, f(s)) over s in [0, 2**(-1/alpha)], golden refinement of the
    winning bracket, then safeguarded Newton on the first-order condition
    (x - foot) . (1, f'(s)) = 0. Raises ConvergenceFailure if the residual
    stays above 1e-10 (degenerate near-center queries); callers can fall
    back to the generic geometry search.
    """
    alpha = ball.alpha
    px, py = float(x[0]), float(x[1])
    if _pow(abs(px), alpha) + _pow(abs(py), alpha) >= 1.0:
        raise PointOutsideDomain("x must be strictly interior to the ball")
    cx, cy, fold = _fold(px, py)
    diag = ball.diagonal

    def dist2(s: float) -> float:
        return (cx - s) ** 2 + (cy - boundary_f(alpha, s)) ** 2

    def foc(s: float) -> float:
        return (cx - s) + (cy - boundary_f(alpha, s)) * boundary_f_prime(alpha, s)

    # diagonal queries: the diagonal foot is the unique nearest point
    if abs(cx - cy) < 1e-15:
        s_star = diag
    else:
        grid_n = 257
        svals = [diag * k / (grid_n - 1) for k in range(grid_n)]
        dvals = [dist2(s) for s in svals]
        k = min(range(grid_n), key=dvals.__getitem__)
        lo = svals[max(k - 1, 0)]
        hi = svals[min(k + 1, grid_n - 1)]
        inv = (math.sqrt(5.0) - 1.0) / 2.0
        m1 = hi - inv * (hi - lo)
        m2 = lo + inv * (hi - lo)
        g1, g2 = dist2(m1), dist2(m2)
        for _ in range(200):
            if hi - lo < 1e-14:
                break
            if g1 <= g2:
                hi, m2, g2 = m2, m1, g1
                m1 = hi - inv * (hi - lo)
                g1 = dist2(m1)
            else:
                lo, m1, g1 = m1, m2, g2
                m2 = lo + inv * (hi - lo)
                g2 = dist2(m2)
        s_star = 0.5 * (lo + hi)
        # Newton polish of the first-order condition, kept inside [0, diag]
        for _ in range(8):
            if not 0.0 < s_star < diag:
                break
            fp = boundary_f_prime(alpha, s_star)
            fpp = boundary_f_double_prime(alpha, s_star)
            h = foc(s_star)
            dh = -1.0 + (cy - boundary_f(alpha, s_star)) * fpp - fp * fp
            if dh == 0.0 or not math.isfinite(dh):
                break
            step = h / dh
            cand = s_star - step
            if 0.0 <= cand <= diag:
                s_star = cand
            if abs(step) < 1e-16:
                break
        interior = 1e-13 < s_star < diag - 1e-13
        if interior and abs(foc(s_star)) > 1e-10 * max(1.0, abs(cx) + abs(cy)):
            raise ConvergenceFailure(
                f"first-order residual {foc(s_star):.3e} at s = {s_star:.6g}; "
                "query too near the center"
            )

    y_star = boundary_f(alpha, s_star)
    u, v = _frame_at(alpha, s_star)
    delta = math.hypot(cx - s_star, cy - y_star)
    return AlphaBallPoint(s_star, y_star, u, v, delta, fold)


# ---------------------------------------------------------------------------
# section machinery at a boundary foot


def li_closed_form(ball: AlphaBall, x0: float, t: float) -> float:
    """Constant-free section shape t^(1/2) (max{t, x0^alpha})^(1/alpha - 1/2).

    Valid for 0 < t <= ball.c0 and 0 <= x0 <= 2**(-1/alpha); compare
    against measured sections via ratio bands only.
    """
    if not 0.0 <= x0 <= ball.diagonal + 1e-15:
        raise OutOfRange(f"x0 = {x0} outside [0, 2^(-1/alpha)]")
    if not 0.0 < t <= ball.c0 + 1e-15:
        raise OutOfRange(f"t = {t} outside (0, c0 = {ball.c0:.6g}]")
    return math.sqrt(t) * _pow(
        max(t, _pow(x0, ball.alpha)), 1.0 / ball.alpha - 0.5
    )


def section_line(ball: AlphaBall, x0: float, t: float, x: float) -> float:
    """l(x) = f(x0) + f'(x0)(x - x0) - t sqrt(1 + f'(x0)^2).

    The graph of l is the section line through (x0, f(x0)) - t u.
    """
    if not 0.0 < x0 < 1.0:
        raise OutOfRange("section_line needs 0 < x0 < 1")
    fp = boundary_f_prime(ball.alpha, x0)
    return boundary_f(ball.alpha, x0) + fp * (x - x0) - t * math.hypot(fp, 1.0)


def section_anchor_x(ball: AlphaBall, x0: float, t: float) -> float:
    """x1 = x0 + t f'(x0) / sqrt(1 + f'(x0)^2), the abscissa of the anchor."""
    if not 0.0 < x0 < 1.0:
        raise OutOfRange("section_anchor_x needs 0 < x0 < 1")
    fp = boundary_f_prime(ball.alpha, x0)
    return x0 + t * fp / math.hypot(fp, 1.0)


def tangent_parabola(ball: AlphaBall, x0: float, m: float, x: float) -> float:
    """P(m, x) = f(x0) + f'(x0)(x - x0) + (m/2)(x - x0)^2."""
    fp = boundary_f_prime(ball.alpha, x0)
    return boundary_f(ball.alpha, x0) + fp * (x - x0) + 0.5 * m * (x - x0) ** 2


def tangent_parabola_roots(ball: AlphaBall, x0: float, m: float, t: float):
    """Abscissae where the section line meets P(m, .):
    x = x0 +- sqrt(2 t sqrt(1 + f'(x0)^2) / (-m)).
    """
    if m >= 0.0:
        raise NonNegativeCurvature(f"curvature m = {m} must be negative")
    if not 0.0 < x0 < 1.0:
        raise OutOfRange("tangent_parabola_roots needs 0 < x0 < 1")
    if t <= 0.0:
        raise OutOfRange("t must be positive")
    fp = boundary_f_prime(ball.alpha, x0)
    r = math.sqrt(2.0 * t * math.hypot(fp, 1.0) / (-m))
    return x0 - r, x0 + r


def section_endpoints(ball: AlphaBall, x0: float, t: float):
    """x2 < x3 where the section line crosses the upper boundary arc.

    Bisection on [-1, x1] and [x1, 1]; requires l < f at x1 and l > f = 0
    at +-1 (raises BracketFailure otherwise, signalling t beyond the
    line-exit threshold for this foot).
    """
    alpha = ball.alpha
    if not 0.0 < x0 <= ball.diagonal + 1e-15:
        raise OutOfRange("section_endpoints needs 0 < x0 <= 2^(-1/alpha)")
    if t <= 0.0:
        raise OutOfRange("t must be positive")
    x1 = section_anchor_x(ball, x0, t)

    def g(x: float) -> float:
        return section_line(ball, x0, t, x) - boundary_f(alpha, x)

    if g(x1) >= 0.0:
        raise BracketFailure("anchor not strictly below the boundary")
    roots = []
    for a, b in ((-1.0, x1), (1.0, x1)):
        if g(a) <= 0.0:
            raise BracketFailure(
                f"section line does not exit through the upper arc at x = {a}"
            )
        out, inn = a, b
        for _ in range(100):
            mid = 0.5 * (out + inn)
            if g(mid) <= 0.0:
                inn = mid
            else:
                out = mid
            if abs(out - inn) < 1e-15:
                break
        roots.append(0.5 * (out + inn))
    x2, x3 = roots
    return x2, x3


def section_half_lengths(ball: AlphaBall, x0: float, t: float):
    """(l1, l2) from the endpoint abscissae:
    l1 = sqrt(1 + f'^2) (x1 - x2), l2 = sqrt(1 + f'^2) (x3 - x1).
    """
    x2, x3 = section_endpoints(ball, x0, t)
    x1 = section_anchor_x(ball, x0, t)
    fp = boundary_f_prime(ball.alpha, x0)
    s = math.hypot(fp, 1.0)
    return s * (x1 - x2), s * (x3 - x1)


def x_tilde(ball: AlphaBall, x0: float, t: float) -> float:
    """Diagnostic: the positive solution of f(xt) = l(x0)."""
    target = section_line(ball, x0, t, x0)
    if not 0.0 < target < 1.0:
        raise BracketFailure(f"l(x0) = {target:.6g} outside (0, 1)")
    lo, hi = 0.0, 1.0  # f decreasing: f(lo) = 1 > target > 0 = f(hi)
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if boundary_f(ball.alpha, mid) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def x_bar(ball: AlphaBall, x0: float, t: float) -> float:
    """Diagnostic: intersection of the section line with the tangent to f
    at x_tilde; an upper bound for x3."""
    alpha = ball.alpha
    xt = x_tilde(ball, x0, t)
    fp0 = boundary_f_prime(alpha, x0)
    fpt = boundary_f_prime(alpha, xt)
    num = (
        boundary_f(alpha, xt)
        - boundary_f(alpha, x0)
        + t * math.hypot(fp0, 1.0)
        + x0 * fp0
        - xt * fpt
    )
    return num / (fp0 - fpt)


# ---------------------------------------------------------------------------
# pointwise prediction


def christoffel_prediction(ball: AlphaBall, x, n: int, sigma: float = 4.0) -> float:
    """Constant-free pointwise shape n^-2 delta^(1/2) max{delta, x0^a}^(1/a - 1/2).

    (x0, delta) come from the exact nearest-boundary solve with x0 in the
    canonical octant. Requires delta >= sigma n^-2 (the regime below that
    is out of scope here).
    """
    if n < 1:
        raise OutOfRange("degree n must be at least 1")
    pt = nearest_boundary_point_exact(ball, x)
    if pt.delta < sigma / (n * n):
        raise TooCloseToBoundary(
            f"delta = {pt.delta:.3e} below sigma n^-2 = {sigma / (n * n):.3e}"
        )
    return (
        n ** -2
        * math.sqrt(pt.delta)
        * _pow(max(pt.delta, _pow(pt.x0, ball.alpha)), 1.0 / ball.alpha - 0.5)
    )

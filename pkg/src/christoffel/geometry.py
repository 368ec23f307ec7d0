"""Planar convex bodies and the section-function measurements built on them.

A body is known only through a membership oracle plus a bounding box;
every length here (ray extents, section half-lengths, nearest boundary
points) comes out of exponential bracketing followed by bisection on
that oracle. Analytic kinds (disk, alpha ball, polygon, affine images)
also carry an extended-precision oracle used by the moment quadrature.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from gmpy2 import mpfr

from .errors import (
    AnchorOutsideDomain,
    DegenerateProfile,
    DeltaTooLarge,
    DomainSpecError,
    NoExteriorFound,
    PointOutsideDomain,
    SingularTransform,
)

# Membership bisection: absolute tolerance on lengths, bracketing step.
BISECT_TOL = 1e-11
BRACKET_STEP = 1e-3

Point = tuple[float, float]


def _unit(v) -> Point:
    vx, vy = float(v[0]), float(v[1])
    n = math.hypot(vx, vy)
    if n == 0.0:
        raise ValueError("zero vector cannot be normalized")
    return (vx / n, vy / n)


def ccw_normal(u) -> Point:
    """Counterclockwise rotation of u by +90 degrees."""
    return (-u[1], u[0])


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class ConvexBody:
    """Immutable planar convex domain.

    membership(x, y) is true iff (x, y) lies in the (closed) body;
    bbox = (xmin, xmax, ymin, ymax) must contain the body. kind tags the
    construction (disk | alpha_ball | polygon | affine) and params holds
    the construction data. membership_hp, when present, is the same
    predicate over gmpy2.mpfr coordinates.
    """

    membership: Callable[[float, float], bool]
    bbox: tuple[float, float, float, float]
    kind: str
    params: dict = field(default_factory=dict)
    membership_hp: Optional[Callable] = None

    def bbox_diameter(self) -> float:
        xmin, xmax, ymin, ymax = self.bbox
        return math.hypot(xmax - xmin, ymax - ymin)


@dataclass(frozen=True)
class RayConfig:
    """Evaluation point x with the orthonormal frame (u, v)."""

    x: Point
    u: Point
    v: Point

    def __post_init__(self):
        for name, w in (("u", self.u), ("v", self.v)):
            if abs(math.hypot(*w) - 1.0) > 1e-12:
                raise ValueError(f"{name} must be a unit vector")
        if abs(self.u[0] * self.v[0] + self.u[1] * self.v[1]) > 1e-12:
            raise ValueError("u and v must be orthogonal")


def ray_config(x, u) -> RayConfig:
    """RayConfig with v fixed to the counterclockwise rotation of u."""
    u = _unit(u)
    return RayConfig((float(x[0]), float(x[1])), u, ccw_normal(u))


@dataclass(frozen=True)
class SectionProfile:
    """Sampled section half-lengths l1, l2 over a grid of inward depths t.

    l1[k] is measured toward -v, l2[k] toward +v, from the anchor
    x + (delta - t_k) u. The grid is geometric on [delta/2, beta] with
    t = delta inserted when it fits.
    """

    cfg: RayConfig
    delta: float
    beta: float
    t_grid: np.ndarray
    l1: np.ndarray
    l2: np.ndarray

    def at_delta(self) -> tuple[float, float]:
        """(l1, l2) at t = delta; the grid must contain t = delta."""
        k = int(np.argmin(np.abs(self.t_grid - self.delta)))
        if abs(self.t_grid[k] - self.delta) > 1e-12 * max(1.0, self.delta):
            raise ValueError("profile grid does not contain t = delta")
        return float(self.l1[k]), float(self.l2[k])


@dataclass(frozen=True)
class Ellipse:
    center: Point
    axis_u: Point
    axis_v: Point
    semi_u: float
    semi_v: float

    def __post_init__(self):
        if not (self.semi_u > 0 and self.semi_v > 0):
            raise ValueError("ellipse semi-axes must be strictly positive")


@dataclass(frozen=True)
class AffineMap:
    """p -> shift + A p with a nonsingular 2x2 matrix A."""

    matrix: tuple[tuple[float, float], tuple[float, float]]
    shift: Point = (0.0, 0.0)

    def det(self) -> float:
        (a, b), (c, d) = self.matrix
        return a * d - b * c

    def apply(self, p) -> Point:
        (a, b), (c, d) = self.matrix
        return (
            self.shift[0] + a * p[0] + b * p[1],
            self.shift[1] + c * p[0] + d * p[1],
        )

    @staticmethod
    def rotation(theta: float) -> "AffineMap":
        c, s = math.cos(theta), math.sin(theta)
        return AffineMap(((c, -s), (s, c)))

    @staticmethod
    def diagonal(sx: float, sy: float, shift=(0.0, 0.0)) -> "AffineMap":
        return AffineMap(((sx, 0.0), (0.0, sy)), (float(shift[0]), float(shift[1])))


# ---------------------------------------------------------------------------
# body constructors


def disk() -> ConvexBody:
    """Closed unit disk."""

    def member(x: float, y: float) -> bool:
        return x * x + y * y <= 1.0

    def member_hp(x, y) -> bool:
        return x * x + y * y <= 1

    return ConvexBody(member, (-1.0, 1.0, -1.0, 1.0), "disk", {}, member_hp)


def alpha_ball_body(alpha: float) -> ConvexBody:
    """The l_alpha unit ball |x|^a + |y|^a <= 1, 1 < alpha < 2."""
    alpha = float(alpha)
    if not 1.0 < alpha < 2.0:
        raise DomainSpecError(f"alpha must lie in (1, 2), got {alpha}")

    def member(x: float, y: float, a=alpha) -> bool:
        return abs(x) ** a + abs(y) ** a <= 1.0

    def member_hp(x, y, a=mpfr(alpha)) -> bool:
        return abs(x) ** a + abs(y) ** a <= 1

    return ConvexBody(
        member, (-1.0, 1.0, -1.0, 1.0), "alpha_ball", {"alpha": alpha}, member_hp
    )


def polygon_body(vertices: Sequence[Sequence[float]]) -> ConvexBody:
    """Convex polygon from counterclockwise vertices.

    Rejects clockwise or non-convex vertex lists.
    """
    verts = [(float(p[0]), float(p[1])) for p in vertices]
    n = len(verts)
    if n < 3:
        raise DomainSpecError("polygon needs at least 3 vertices")
    area2 = sum(
        verts[i][0] * verts[(i + 1) % n][1] - verts[(i + 1) % n][0] * verts[i][1]
        for i in range(n)
    )
    if area2 <= 0:
        raise DomainSpecError("polygon vertices must be in counterclockwise order")
    scale = max(max(abs(x), abs(y)) for x, y in verts) or 1.0
    for i in range(n):
        ax, ay = verts[i]
        bx, by = verts[(i + 1) % n]
        cx, cy = verts[(i + 2) % n]
        cross = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
        if cross < -1e-12 * scale * scale:
            raise DomainSpecError("polygon is not convex")

    edges = [
        (verts[i], verts[(i + 1) % n]) for i in range(n)
    ]
    tol = 1e-12 * scale

    def member(x: float, y: float) -> bool:
        for (ax, ay), (bx, by) in edges:
            if (bx - ax) * (y - ay) - (by - ay) * (x - ax) < -tol:
                return False
        return True

    edges_hp = [
        ((mpfr(ax), mpfr(ay)), (mpfr(bx), mpfr(by))) for (ax, ay), (bx, by) in edges
    ]
    tol_hp = mpfr(tol)

    def member_hp(x, y) -> bool:
        for (ax, ay), (bx, by) in edges_hp:
            if (bx - ax) * (y - ay) - (by - ay) * (x - ax) < -tol_hp:
                return False
        return True

    xs = [p[0] for p in verts]
    ys = [p[1] for p in verts]
    return ConvexBody(
        member,
        (min(xs), max(xs), min(ys), max(ys)),
        "polygon",
        {"vertices": tuple(verts)},
        member_hp,
    )


def apply_affine(body: ConvexBody, amap: AffineMap) -> ConvexBody:
    """Image body T D with membership pulled back through T^{-1}."""
    (a, b), (c, d) = amap.matrix
    det = amap.det()
    if abs(det) < 1e-14:
        raise SingularTransform(f"|det| = {abs(det):.3e} below 1e-14")
    sx, sy = amap.shift
    ia, ib, ic, id_ = d / det, -b / det, -c / det, a / det
    base = body.membership

    def member(x: float, y: float) -> bool:
        px, py = x - sx, y - sy
        return base(ia * px + ib * py, ic * px + id_ * py)

    member_hp = None
    if body.membership_hp is not None:
        det_hp = mpfr(a) * mpfr(d) - mpfr(b) * mpfr(c)
        iah, ibh = mpfr(d) / det_hp, mpfr(-b) / det_hp
        ich, idh = mpfr(-c) / det_hp, mpfr(a) / det_hp
        sxh, syh = mpfr(sx), mpfr(sy)
        base_hp = body.membership_hp

        def member_hp(x, y):
            px, py = x - sxh, y - syh
            return base_hp(iah * px + ibh * py, ich * px + idh * py)

    image = ConvexBody(
        member, (0.0, 0.0, 0.0, 0.0), "affine", {"base": body, "map": amap},
        member_hp,
    )
    try:
        # exact extent via the support function keeps the chord-function
        # singularities at panel-graded abscissae
        xs = (-_support(image, (-1.0, 0.0)), _support(image, (1.0, 0.0)))
        ys = (-_support(image, (0.0, -1.0)), _support(image, (0.0, 1.0)))
    except ValueError:
        xmin, xmax, ymin, ymax = body.bbox
        corners = [amap.apply(p) for p in
                   ((xmin, ymin), (xmin, ymax), (xmax, ymin), (xmax, ymax))]
        xs = (min(p[0] for p in corners), max(p[0] for p in corners))
        ys = (min(p[1] for p in corners), max(p[1] for p in corners))
    pad = 1e-12 * max(1.0, *map(abs, xs), *map(abs, ys))
    bbox = (xs[0] - pad, xs[1] + pad, ys[0] - pad, ys[1] + pad)
    return ConvexBody(
        member, bbox, "affine", {"base": body, "map": amap}, member_hp
    )


def from_spec(spec) -> ConvexBody:
    """Build a body from a domain-specification document.

    Accepts a dict or a JSON string of one of the forms
    {"kind": "disk"}, {"kind": "alpha_ball", "alpha": a},
    {"kind": "polygon", "vertices": [[x, y], ...]},
    {"kind": "affine", "base": spec, "matrix": [[a,b],[c,d]], "shift": [x,y]}.
    """
    if isinstance(spec, str):
        try:
            spec = json.loads(spec)
        except json.JSONDecodeError as e:
            raise DomainSpecError(f"invalid domain JSON: {e}") from e
    if not isinstance(spec, dict) or "kind" not in spec:
        raise DomainSpecError("domain spec must be an object with a 'kind' field")
    kind = spec["kind"]
    if kind == "disk":
        return disk()
    if kind == "alpha_ball":
        if "alpha" not in spec:
            raise DomainSpecError("alpha_ball spec needs 'alpha'")
        return alpha_ball_body(spec["alpha"])
    if kind == "polygon":
        if "vertices" not in spec:
            raise DomainSpecError("polygon spec needs 'vertices'")
        return polygon_body(spec["vertices"])
    if kind == "affine":
        for key in ("base", "matrix"):
            if key not in spec:
                raise DomainSpecError(f"affine spec needs '{key}'")
        m = spec["matrix"]
        try:
            matrix = ((float(m[0][0]), float(m[0][1])),
                      (float(m[1][0]), float(m[1][1])))
        except (TypeError, IndexError, ValueError) as e:
            raise DomainSpecError("affine matrix must be a 2x2 number array") from e
        shift = spec.get("shift", (0.0, 0.0))
        amap = AffineMap(matrix, (float(shift[0]), float(shift[1])))
        if abs(amap.det()) < 1e-14:
            raise DomainSpecError("affine matrix is singular")
        return apply_affine(from_spec(spec["base"]), amap)
    raise DomainSpecError(f"unknown domain kind {kind!r}")


# ---------------------------------------------------------------------------
# oracle-driven measurements


def _directed_extent(body: ConvexBody, ax: float, ay: float,
                     ux: float, uy: float) -> float:
    """max{s >= 0 : (ax, ay) + s (ux, uy) in D}; (ax, ay) must be a member."""
    member = body.membership
    s_out = BRACKET_STEP
    limit = 2.0 * body.bbox_diameter() + 1.0
    while member(ax + s_out * ux, ay + s_out * uy):
        s_out *= 2.0
        if s_out > limit:
            raise NoExteriorFound(
                "ray never left the bounding box; body bbox is inconsistent"
            )
    s_in = 0.0 if s_out == BRACKET_STEP else s_out / 2.0
    while s_out - s_in > BISECT_TOL:
        mid = 0.5 * (s_in + s_out)
        if member(ax + mid * ux, ay + mid * uy):
            s_in = mid
        else:
            s_out = mid
    return 0.5 * (s_in + s_out)


def ray_extent(body: ConvexBody, x, u) -> float:
    """delta = max{q : x + q u in D} for a member point x and unit u."""
    px, py = float(x[0]), float(x[1])
    if not body.membership(px, py):
        raise PointOutsideDomain(f"x = ({px}, {py}) is not a member of the body")
    ux, uy = _unit(u)
    return _directed_extent(body, px, py, ux, uy)


def _section_at(body: ConvexBody, ax: float, ay: float, v: Point):
    """Half-lengths (toward -v, toward +v) of the chord through (ax, ay)."""
    if not body.membership(ax, ay):
        raise AnchorOutsideDomain(f"anchor ({ax}, {ay}) is not a member of the body")
    l1 = _directed_extent(body, ax, ay, -v[0], -v[1])
    l2 = _directed_extent(body, ax, ay, v[0], v[1])
    return l1, l2


def section_lengths(body: ConvexBody, cfg: RayConfig, t: float):
    """(l1, l2) at inward depth t: l_i = max{s : x + (delta-t)u + (-1)^i s v in D}.

    i = 1 runs toward -v, i = 2 toward +v.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    delta = ray_extent(body, cfg.x, cfg.u)
    ax = cfg.x[0] + (delta - t) * cfg.u[0]
    ay = cfg.x[1] + (delta - t) * cfg.u[1]
    return _section_at(body, ax, ay, cfg.v)


def section_profile(body: ConvexBody, cfg: RayConfig, beta: float,
                    grid_size: int = 128) -> SectionProfile:
    """Sample l1, l2 on a geometric grid over [delta/2, beta].

    Geometric spacing resolves the t -> 0 end where l_i / sqrt(t) varies
    fastest; t = delta is inserted when delta <= beta so bound shapes can
    read the chord through x itself.
    """
    if grid_size < 16:
        raise ValueError("grid_size must be at least 16")
    if beta <= 0:
        raise ValueError("beta must be positive")
    delta = ray_extent(body, cfg.x, cfg.u)
    lo = delta / 2.0
    if lo > 0 and lo < beta:
        ts = np.geomspace(lo, beta, grid_size)
    else:
        ts = np.array([beta])
    if 0.0 < delta <= beta:
        ts = np.append(ts, delta)
    ts = np.unique(ts)
    ts = ts[ts > 0]
    l1 = np.empty_like(ts)
    l2 = np.empty_like(ts)
    for k, t in enumerate(ts):
        ax = cfg.x[0] + (delta - t) * cfg.u[0]
        ay = cfg.x[1] + (delta - t) * cfg.u[1]
        l1[k], l2[k] = _section_at(body, ax, ay, cfg.v)
    return SectionProfile(cfg, delta, beta, ts, l1, l2)


def inscribed_ellipse(profile: SectionProfile) -> Ellipse:
    """Ellipse with axis beta/3 along u and Lambda along v, contained in D.

    Lambda = sqrt(beta/6) * min over i and grid t in [delta/2, beta] of
    l_i(t)/sqrt(t). The ellipse is the set of anchor points
    x + (delta - t) u + s v with ((beta/3 + delta/2 - t)/(beta/3))^2 +
    (s/Lambda)^2 <= 1, so its center sits at x - (beta/3 - delta/2) u and
    x itself lies inside, near the +u end. Containment in the body follows
    from |s| <= Lambda sqrt(6/beta) sqrt(t - delta/2) <= min_i l_i(t) on
    the sampled range.
    """
    delta, beta = profile.delta, profile.beta
    if delta >= beta / 2.0:
        raise DeltaTooLarge(f"delta = {delta:.6g} must be < beta/2 = {beta / 2:.6g}")
    mask = (profile.t_grid >= delta / 2.0 - 1e-15) & (profile.t_grid <= beta + 1e-15)
    ts = profile.t_grid[mask]
    l1 = profile.l1[mask]
    l2 = profile.l2[mask]
    if np.any(l1 <= 1e-10) or np.any(l2 <= 1e-10):
        raise DegenerateProfile(
            "nonpositive section sample; x not interior or beta too large"
        )
    lam = math.sqrt(beta / 6.0) * float(
        min((l1 / np.sqrt(ts)).min(), (l2 / np.sqrt(ts)).min())
    )
    cx, cy = profile.cfg.x
    ux, uy = profile.cfg.u
    off = beta / 3.0 - delta / 2.0
    return Ellipse(
        (cx - off * ux, cy - off * uy),
        profile.cfg.u,
        profile.cfg.v,
        beta / 3.0,
        lam,
    )


def contains_ellipse(body: ConvexBody, e: Ellipse, samples: int = 512) -> bool:
    """True iff every sampled boundary point of e (shrunk by 1e-9) is a member."""
    if samples < 256:
        raise ValueError("samples must be at least 256")
    shrink = 1.0 - 1e-9
    a = e.semi_u * shrink
    b = e.semi_v * shrink
    cx, cy = e.center
    ux, uy = e.axis_u
    vx, vy = e.axis_v
    member = body.membership
    for k in range(samples):
        th = 2.0 * math.pi * k / samples
        ca, sb = a * math.cos(th), b * math.sin(th)
        if not member(cx + ca * ux + sb * vx, cy + ca * uy + sb * vy):
            return False
    return True


def nearest_boundary_point(body: ConvexBody, x) -> tuple[Point, float]:
    """Closest boundary point to an interior x, and the distance to it.

    Exact for the disk and the alpha ball; otherwise golden-section search
    on the ray direction with 8 deterministic multistarts. When the
    minimizer is not unique (e.g. the center of a square), the first one
    found in multistart order is returned.
    """
    px, py = float(x[0]), float(x[1])
    if not body.membership(px, py):
        raise PointOutsideDomain(f"x = ({px}, {py}) is not a member of the body")

    if body.kind == "disk":
        r = math.hypot(px, py)
        if r == 0.0:
            return (1.0, 0.0), 1.0
        return (px / r, py / r), 1.0 - r

    if body.kind == "alpha_ball":
        from . import alpha_ball as ab

        try:
            pt = ab.nearest_boundary_point_exact(
                ab.AlphaBall(body.params["alpha"]), (px, py)
            )
            return pt.foot_original(), pt.delta
        except Exception:
            pass  # fall through to the generic search

    best_delta = math.inf
    best_u = (1.0, 0.0)
    for j in range(8):
        lo = 2.0 * math.pi * j / 8.0
        hi = 2.0 * math.pi * (j + 1) / 8.0
        inv = (math.sqrt(5.0) - 1.0) / 2.0
        m1 = hi - inv * (hi - lo)
        m2 = lo + inv * (hi - lo)
        g1 = _directed_extent(body, px, py, math.cos(m1), math.sin(m1))
        g2 = _directed_extent(body, px, py, math.cos(m2), math.sin(m2))
        while hi - lo > 1e-12:
            if g1 <= g2:
                hi, m2, g2 = m2, m1, g1
                m1 = hi - inv * (hi - lo)
                g1 = _directed_extent(body, px, py, math.cos(m1), math.sin(m1))
            else:
                lo, m1, g1 = m1, m2, g2
                m2 = lo + inv * (hi - lo)
                g2 = _directed_extent(body, px, py, math.cos(m2), math.sin(m2))
        phi = 0.5 * (lo + hi)
        d = _directed_extent(body, px, py, math.cos(phi), math.sin(phi))
        if d < best_delta:
            best_delta = d
            best_u = (math.cos(phi), math.sin(phi))
    foot = (px + best_delta * best_u[0], py + best_delta * best_u[1])
    return foot, best_delta


def support_halfwidth(body: ConvexBody, u) -> float:
    """Half the width of the body in direction u: (h(u) + h(-u)) / 2."""
    ux, uy = _unit(u)
    return 0.5 * (_support(body, (ux, uy)) + _support(body, (-ux, -uy)))


def _support(body: ConvexBody, w) -> float:
    """Support function h(w) = max_{p in D} p . w for unit w (analytic kinds)."""
    wx, wy = w
    if body.kind == "disk":
        return 1.0
    if body.kind == "alpha_ball":
        alpha = body.params["alpha"]
        q = alpha / (alpha - 1.0)
        return (abs(wx) ** q + abs(wy) ** q) ** (1.0 / q)
    if body.kind == "polygon":
        return max(vx * wx + vy * wy for vx, vy in body.params["vertices"])
    if body.kind == "affine":
        amap: AffineMap = body.params["map"]
        (a, b), (c, d) = amap.matrix
        atw = (a * wx + c * wy, b * wx + d * wy)
        n = math.hypot(*atw)
        base = body.params["base"]
        if n == 0.0:
            return amap.shift[0] * wx + amap.shift[1] * wy
        return amap.shift[0] * wx + amap.shift[1] * wy + n * _support(
            base, (atw[0] / n, atw[1] / n)
        )
    raise ValueError(f"no analytic support function for kind {body.kind!r}")

"""Command-line front end.

Subcommands: eval, sections, bounds, predict, sweep, verify. All outputs
are machine-readable (CSV or JSON rows); stdout carries only data when no
--out path is given, human diagnostics go to stderr. Exit codes: 0 ok
(1: verify found failures), 2 configuration error, 3 numeric failure.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import sys
from functools import wraps

import click
import numpy as np

from . import hp
from .alpha_ball import AlphaBall, christoffel_prediction, nearest_boundary_point_exact
from .bounds import default_beta, two_sided_report
from .errors import ChristoffelError, DomainSpecError, TooCloseToBoundary
from .evaluator import (
    ChristoffelEvaluator,
    disk_reference_shape,
    evaluator_for_body,
    moments_for_body,
    quadratic_form,
)
from .geometry import (
    ConvexBody,
    contains_ellipse,
    from_spec,
    inscribed_ellipse,
    nearest_boundary_point,
    ray_config,
    ray_extent,
    section_profile,
)
from .moments import DEGREE_CAP, gram_matrix

EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _guarded(fn):
    @wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (DomainSpecError, ValueError) as e:
            click.echo(f"error: {e}", err=True)
            sys.exit(EXIT_CONFIG)
        except ChristoffelError as e:
            click.echo(f"numeric failure: {e}", err=True)
            sys.exit(EXIT_NUMERIC)

    return wrapper


def _load_domain(text: str) -> ConvexBody:
    text = text.strip()
    if not text.startswith("{"):
        if not os.path.exists(text):
            raise DomainSpecError(f"domain file not found: {text}")
        with open(text, "r", encoding="utf-8") as fh:
            text = fh.read()
    return from_spec(text)


def _parse_ns(text: str):
    text = text.strip()
    if ".." in text:
        a, b = text.split("..", 1)
        lo, hi = int(a), int(b)
        if lo > hi:
            raise ValueError(f"empty degree range {text!r}")
        ns = list(range(lo, hi + 1))
    else:
        ns = [int(text)]
    for n in ns:
        if not 0 <= n <= DEGREE_CAP:
            raise ValueError(f"degree {n} outside [0, {DEGREE_CAP}]")
    return ns


def _parse_point(text: str):
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError(f"point must be 'x,y', got {text!r}")
    return float(parts[0]), float(parts[1])


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _emit(headers, rows, fmt: str, out, comments=()):
    if fmt == "json":
        payload = [dict(zip(headers, row)) for row in rows]
        text = json.dumps(payload, indent=2, default=_fmt) + "\n"
    else:
        buf = io.StringIO()
        for line in comments:
            buf.write(f"# {line}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(headers)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
        text = buf.getvalue()
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


_common = [
    click.option("--domain", default='{"kind": "disk"}', show_default=True,
                 help="Domain spec JSON or a path to a JSON file."),
    click.option("--out", default=None, help="Output path (default: stdout)."),
    click.option("--format", "fmt", type=click.Choice(["csv", "json"]),
                 default="csv", show_default=True),
]


def _with_common(fn):
    for opt in reversed(_common):
        fn = opt(fn)
    return fn


@click.group()
def main():
    """Christoffel functions and section bounds on planar convex domains."""


@main.command("eval")
@_with_common
@click.option("--n", "n_spec", required=True, help="Degree, int or a..b.")
@click.option("--point", "points", multiple=True, help="x,y (repeatable).")
@click.option("--grid", default=None,
              help="box:K for a K x K bbox grid filtered to members.")
@click.option("--digits", default=17, show_default=True,
              type=click.IntRange(1, 50))
@_guarded
def cmd_eval(domain, out, fmt, n_spec, points, grid, digits):
    """Evaluate lambda_n at points: rows (x, y, n, lambda)."""
    body = _load_domain(domain)
    ns = _parse_ns(n_spec)
    pts = [_parse_point(p) for p in points]
    if grid:
        kind, _, num = grid.partition(":")
        if kind != "box" or not num.isdigit():
            raise ValueError(f"unsupported grid spec {grid!r}")
        k = int(num)
        xmin, xmax, ymin, ymax = body.bbox
        for gx in np.linspace(xmin, xmax, k):
            for gy in np.linspace(ymin, ymax, k):
                if body.membership(float(gx), float(gy)):
                    pts.append((float(gx), float(gy)))
    if not pts:
        raise ValueError("no evaluation points: pass --point or --grid")
    for (px, py) in pts:
        if not body.membership(px, py):
            click.echo(f"warning: point ({px}, {py}) is outside the domain",
                       err=True)
    rows = []
    for n in ns:
        ev = evaluator_for_body(body, n)
        for (px, py) in pts:
            res = ev.evaluate((px, py))
            rows.append((px, py, n, hp.format_sig(res.lam_hp, digits)))
    rows.sort(key=lambda r: (r[2], r[0], r[1]))
    _emit(("x", "y", "n", "lambda"), rows, fmt, out)


@main.command("sections")
@_with_common
@click.option("--point", required=True, help="Interior point x,y.")
@click.option("--u", "u_spec", default=None,
              help="Ray direction x,y (default: toward the nearest boundary).")
@click.option("--beta", type=float, default=None,
              help="Depth range end (default per body).")
@click.option("--grid-size", default=128, show_default=True,
              type=click.IntRange(16, 4096))
@click.option("--thresholds", default=None,
              help="ratio,monotonicity thresholds: adds the matching-"
                   "condition diagnostics to the header.")
@_guarded
def cmd_sections(domain, out, fmt, point, u_spec, beta, grid_size, thresholds):
    """Section profile CSV (t, l1, l2) with delta and beta in the header."""
    body = _load_domain(domain)
    x = _parse_point(point)
    if u_spec:
        u = _parse_point(u_spec)
    else:
        _, _, u = _normal_direction(body, x)
    cfg = ray_config(x, u)
    if beta is None:
        beta = default_beta(body, cfg.u)
    profile = section_profile(body, cfg, beta, grid_size)
    comments = [f"delta={_fmt(profile.delta)}", f"beta={_fmt(profile.beta)}"]
    if thresholds:
        from .bounds import check_conditions

        rt, mt = _parse_point(thresholds)
        rep = check_conditions(profile, rt, mt)
        comments += [
            f"ratio_l1_l2_max={_fmt(rep.ratio_l1_l2_max)}",
            f"quasi_monotonicity_defect={_fmt(rep.quasi_monotonicity_defect)}",
            f"conditions_pass={rep.passes}",
        ]
    rows = list(zip(profile.t_grid, profile.l1, profile.l2))
    _emit(("t", "l1", "l2"), rows, fmt, out, comments=comments)


_SWEEP_HEADERS = ("alpha", "x", "y", "x0", "y0", "delta", "n", "lambda",
                  "lower_shape", "upper_shape", "prediction",
                  "ratio_lower", "ratio_upper", "ratio_prediction")


def _normal_direction(body: ConvexBody, x):
    """Foot, distance and inward-to-boundary unit direction for an interior x."""
    foot, delta = nearest_boundary_point(body, x)
    if delta <= 0.0:
        raise TooCloseToBoundary(f"point ({x[0]}, {x[1]}) lies on the boundary")
    return foot, delta, ((foot[0] - x[0]) / delta, (foot[1] - x[1]) / delta)


def _bound_row(body: ConvexBody, alpha, x, n, sigma, beta, grid_size,
               evaluator: ChristoffelEvaluator):
    foot, delta, u = _normal_direction(body, x)
    est = two_sided_report(body, x, u, n, beta, sigma, evaluator, grid_size)
    if alpha is not None:
        pred = christoffel_prediction(AlphaBall(alpha), x, n, sigma)
    elif body.kind == "disk":
        pred = disk_reference_shape(n, x, sigma)
    else:
        pred = None
    lam = est.lambda_exact
    return (
        alpha, x[0], x[1], foot[0], foot[1], est.delta, n, lam,
        est.lower_shape, est.upper_shape, pred,
        est.ratio_lower, est.ratio_upper,
        (lam / pred) if pred else None,
    )


@main.command("bounds")
@_with_common
@click.option("--point", "points", multiple=True, required=True,
              help="Interior point x,y (repeatable).")
@click.option("--n", "n_spec", required=True, help="Degree, int or a..b.")
@click.option("--beta", type=float, default=None)
@click.option("--sigma", type=float, default=4.0, show_default=True)
@click.option("--grid-size", default=128, show_default=True,
              type=click.IntRange(16, 4096))
@_guarded
def cmd_bounds(domain, out, fmt, points, n_spec, beta, sigma, grid_size):
    """Two-sided bound report rows for explicit points."""
    body = _load_domain(domain)
    ns = _parse_ns(n_spec)
    alpha = body.params.get("alpha") if body.kind == "alpha_ball" else None
    rows = []
    for n in ns:
        ev = evaluator_for_body(body, n)
        for p in points:
            x = _parse_point(p)
            _, _, u = _normal_direction(body, x)
            b = beta if beta is not None else default_beta(body, u)
            rows.append(_bound_row(body, alpha, x, n, sigma, b, grid_size, ev))
    rows.sort(key=lambda r: (r[6], r[1], r[2]))
    _emit(_SWEEP_HEADERS, rows, fmt, out)


@main.command("predict")
@_with_common
@click.option("--point", "points", multiple=True, required=True)
@click.option("--n", "n_spec", required=True, help="Degree, int or a..b.")
@click.option("--sigma", type=float, default=4.0, show_default=True)
@click.option("--digits", default=17, show_default=True,
              type=click.IntRange(1, 50))
@_guarded
def cmd_predict(domain, out, fmt, points, n_spec, sigma, digits):
    """Pointwise alpha-ball prediction rows (x, y, x0, delta, n, prediction)."""
    body = _load_domain(domain)
    if body.kind != "alpha_ball":
        raise ValueError("predict requires an alpha_ball domain")
    ball = AlphaBall(body.params["alpha"])
    ns = _parse_ns(n_spec)
    rows = []
    for n in ns:
        for p in points:
            x = _parse_point(p)
            pt = nearest_boundary_point_exact(ball, x)
            pred = christoffel_prediction(ball, x, n, sigma)
            rows.append((x[0], x[1], pt.x0, pt.delta, n,
                         hp.format_sig(hp.mpf(pred), digits)))
    rows.sort(key=lambda r: (r[4], r[0], r[1]))
    _emit(("x", "y", "x0", "delta", "n", "prediction"), rows, fmt, out)


@main.command("sweep")
@_with_common
@click.option("--n", "n_spec", required=True, help="Degrees, int or a..b.")
@click.option("--sigma", type=float, default=4.0, show_default=True)
@click.option("--beta", type=float, default=None)
@click.option("--rays", default=5, show_default=True, type=click.IntRange(1, 64))
@click.option("--deltas", default=4, show_default=True, type=click.IntRange(1, 64))
@click.option("--grid-size", default=96, show_default=True,
              type=click.IntRange(16, 4096))
@_guarded
def cmd_sweep(domain, out, fmt, n_spec, sigma, beta, rays, deltas, grid_size):
    """Ratio sweep over rays and depths; CSV matches the bounds row schema."""
    body = _load_domain(domain)
    ns = _parse_ns(n_spec)
    if body.kind == "disk":
        alpha = None
        b = beta if beta is not None else 1.0

        def points_for(n):
            out_pts = []
            wmin = sigma / (n * n) * 1.05
            if wmin >= 0.9:
                return out_pts
            for j in range(rays):
                th = 2.0 * math.pi * j / rays
                for w in np.geomspace(0.9, wmin, deltas):
                    r = math.sqrt(1.0 - w)
                    if r <= 0:
                        continue
                    out_pts.append((r * math.cos(th), r * math.sin(th)))
            return out_pts

    elif body.kind == "alpha_ball":
        alpha = body.params["alpha"]
        ball = AlphaBall(alpha)
        b = beta if beta is not None else ball.c0

        def points_for(n):
            from .alpha_ball import boundary_f, boundary_f_prime

            out_pts = []
            dmin = sigma / (n * n) * 1.1
            if dmin >= ball.c0:
                return out_pts
            for x0 in np.linspace(0.0, ball.diagonal, rays):
                y0 = boundary_f(alpha, float(x0))
                if x0 == 0.0:
                    ux, uy = 0.0, 1.0
                else:
                    fp = boundary_f_prime(alpha, float(x0))
                    nrm = math.hypot(fp, 1.0)
                    ux, uy = -fp / nrm, 1.0 / nrm
                for d in np.geomspace(dmin, ball.c0, deltas):
                    out_pts.append((float(x0 - d * ux), float(y0 - d * uy)))
            return out_pts

    else:
        raise ValueError("sweep supports disk and alpha_ball domains")

    rows = []
    for n in ns:
        ev = evaluator_for_body(body, n)
        for x in points_for(n):
            try:
                rows.append(_bound_row(body, alpha, x, n, sigma, b,
                                       grid_size, ev))
            except TooCloseToBoundary:
                continue
    rows.sort(key=lambda r: (r[6], r[1], r[2]))
    _emit(_SWEEP_HEADERS, rows, fmt, out)


# ---------------------------------------------------------------------------
# verify


def _verify_suites(body: ConvexBody, corrupt: bool):
    from . import moments as mo

    checks = []

    def record(name, passed, measured):
        checks.append({"name": name, "passed": bool(passed),
                       "measured": measured})

    analytic = body.kind in ("disk", "alpha_ball")
    table = moments_for_body(body, 4)
    if corrupt:
        with hp.working_precision():
            bad = dict(table.values)
            bad[(2, 0)] = bad[(2, 0)] * (1 + hp.mpf("1e-6"))
        table = mo.MomentTable(table.max_total_degree, bad, table.kind)

    # dual-route moment agreement (the corruption-sensitive invariant)
    quad = mo.quadrature_moments(body, 4) if analytic else mo.MomentTable(
        4, mo._quadrature_pass(body, 8, *mo._PASSES[0]), "base-pass"
    )
    with hp.working_precision():
        scale = max(abs(v) for v in quad.values.values())
        worst = 0.0
        for key, v in table.values.items():
            q = quad.values[key]
            denom = max(abs(q), 1e-4 * scale)
            worst = max(worst, float(abs(v - q) / denom))
    record("moment_oracle_agreement", worst <= 1e-9, worst)

    gram = gram_matrix(table, 4)
    ev = ChristoffelEvaluator(gram)
    res = ev.factor_residual()
    record("gram_cholesky_residual", res <= 1e-40, res)

    cx = 0.5 * (body.bbox[0] + body.bbox[1])
    cy = 0.5 * (body.bbox[2] + body.bbox[3])
    pts = [(cx, cy), (cx + 0.2, cy), (cx, cy - 0.3)]
    pts = [p for p in pts if body.membership(*p)]
    if not pts:
        # bbox center can fall outside a thin body; scan for members
        for gx in np.linspace(body.bbox[0], body.bbox[1], 17):
            for gy in np.linspace(body.bbox[2], body.bbox[3], 17):
                if body.membership(float(gx), float(gy)):
                    pts.append((float(gx), float(gy)))
        pts = pts[:3]
        if not pts:
            raise DomainSpecError("could not find an interior point of the body")
    evs = {n: evaluator_for_body(body, n) for n in (2, 4, 6)}
    if corrupt:
        evs[4] = ev
    mono_ok = True
    worst_gap = 0.0
    for p in pts:
        lams = [evs[n].evaluate(p).lam for n in (2, 4, 6)]
        for a, b in zip(lams, lams[1:]):
            worst_gap = max(worst_gap, b - a)
            mono_ok = mono_ok and b <= a + 1e-18
    record("degree_monotonicity", mono_ok, worst_gap)

    rng = np.random.default_rng(20240817)
    worst_slack = np.inf
    ok = True
    with hp.working_precision():
        lam0 = ev.evaluate(pts[0]).lam_hp
        for _ in range(12):
            coeffs = [hp.mpf(c) for c in rng.normal(size=gram.dim)]
            from .evaluator import polynomial_value

            val = polynomial_value(gram, coeffs, pts[0])
            if abs(val) < 1e-8:
                continue
            coeffs = [c / val for c in coeffs]
            integral = quadratic_form(gram, coeffs)
            slack = float(integral - lam0)
            worst_slack = min(worst_slack, slack)
            ok = ok and slack >= -1e-20
    record("extremal_property", ok, worst_slack)

    ok = True
    tried = 0
    while tried < 12:
        px = rng.uniform(body.bbox[0], body.bbox[1])
        py = rng.uniform(body.bbox[2], body.bbox[3])
        if not body.membership(px, py):
            continue
        tried += 1
        foot, delta = nearest_boundary_point(body, (px, py))
        if delta <= 1e-6:
            continue
        u = ((foot[0] - px) / delta, (foot[1] - py) / delta)
        cfg = ray_config((px, py), u)
        back = ray_extent(body, (px, py), (-cfg.u[0], -cfg.u[1]))
        # anchors x + (delta - t) u must stay members up to t = beta
        beta = min(4.0 * delta, default_beta(body, u), 0.98 * (delta + back))
        if delta >= beta / 2.0:
            continue
        prof = section_profile(body, cfg, beta, 64)
        ok = ok and contains_ellipse(body, inscribed_ellipse(prof), 384)
    record("ellipse_containment", ok, None)

    if body.kind == "alpha_ball":
        from . import alpha_ball as ab

        alpha = body.params["alpha"]
        ball = AlphaBall(alpha)
        grid = np.linspace(1e-4, ball.diagonal - 1e-4, 200)
        ok = True
        for x0 in grid:
            fp = -ab.boundary_f_prime(alpha, float(x0))
            lo, hi = x0 ** (alpha - 1.0), math.sqrt(2.0) * x0 ** (alpha - 1.0)
            ok = ok and lo < fp < hi
            hgt = ab.boundary_height(alpha, float(x0))
            ok = ok and (x0**alpha / alpha <= hgt * (1 + 1e-12))
            ok = ok and (hgt <= 2 ** (1 - 1 / alpha) * x0**alpha / alpha
                         * (1 + 1e-12))
        record("derivative_and_height_bounds", ok, None)

        ratios = []
        for x0 in np.linspace(0.0, ball.diagonal, 8):
            for t in np.geomspace(1e-3, ball.c0, 6):
                shape = ab.li_closed_form(ball, float(x0), float(t))
                y0 = ab.boundary_f(alpha, float(x0))
                u, v = ab._frame_at(alpha, float(x0))
                ax, ay = x0 - t * u[0], y0 - t * u[1]
                from .geometry import _section_at

                l1, l2 = _section_at(body, ax, ay, v)
                ratios += [l1 / shape, l2 / shape]
        band = max(ratios) / min(ratios)
        record("section_closed_form_band", band <= 10.0, band)

    return checks


@main.command("verify")
@_with_common
@click.option("--corrupt-moments", is_flag=True, hidden=True,
              help="Negative control: perturb one moment before checking.")
@_guarded
def cmd_verify(domain, out, fmt, corrupt_moments):
    """Run the invariant suites; JSON summary with per-check pass/fail."""
    body = _load_domain(domain)
    checks = _verify_suites(body, corrupt_moments)
    passed = all(c["passed"] for c in checks)
    payload = {
        "domain": body.kind,
        "precision_bits": hp.PRECISION_BITS,
        "passed": passed,
        "checks": checks,
    }
    text = json.dumps(payload, indent=2, default=_fmt) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)
    if not passed:
        sys.exit(1)


if __name__ == "__main__":
    main()

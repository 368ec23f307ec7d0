"""Two-sided pointwise bound shapes and their matching-condition checks.

The lower shape comes from the inscribed-ellipse construction:
n^-2 sqrt(delta) min_{i, delta/2 <= t <= beta} l_i(t)/sqrt(t). The upper
shape needs only the chord through x itself:
n^-2 sqrt(min{l1(delta) l2(delta), delta}). Both are constant-free;
sweeps compare the exact lambda_n against them through ratio bands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DeltaTooLarge, TooCloseToBoundary
from .geometry import (
    ConvexBody,
    SectionProfile,
    ray_config,
    ray_extent,
    section_lengths,
    section_profile,
)


@dataclass(frozen=True)
class BoundEstimate:
    """Constant-free lower/upper shapes at one configuration.

    For delta >= beta/2 the lower shape switches to the inscribed-disk
    branch (a plain n^-2), which is how the deep-interior regime is
    handled.
    """

    n: int
    delta: float
    beta: float
    sigma: float
    lower_shape: float
    upper_shape: float
    lambda_exact: Optional[float] = None

    @property
    def ratio_lower(self) -> Optional[float]:
        if self.lambda_exact is None:
            return None
        return self.lambda_exact / self.lower_shape

    @property
    def ratio_upper(self) -> Optional[float]:
        if self.lambda_exact is None:
            return None
        return self.lambda_exact / self.upper_shape


@dataclass(frozen=True)
class ConditionReport:
    """Grid diagnostics of the two matching conditions.

    ratio_l1_l2_max bounds how far the two half-sections drift apart;
    quasi_monotonicity_defect is the largest backward slip of
    l_i(t)/sqrt(t) over ordered grid pairs. Both are >= 1 by definition.
    """

    ratio_l1_l2_max: float
    quasi_monotonicity_defect: float
    passes: bool


def _grid_view(profile: SectionProfile):
    mask = (profile.t_grid >= profile.delta / 2.0 - 1e-15) & (
        profile.t_grid <= profile.beta + 1e-15
    )
    return profile.t_grid[mask], profile.l1[mask], profile.l2[mask]


def lower_bound_shape(profile: SectionProfile, n: int) -> float:
    """n^-2 sqrt(delta) min over i and grid t in [delta/2, beta] of l_i/sqrt(t)."""
    if profile.delta >= profile.beta / 2.0:
        raise DeltaTooLarge(
            f"delta = {profile.delta:.6g} must be < beta/2 = {profile.beta / 2:.6g}"
        )
    ts, l1, l2 = _grid_view(profile)
    root_t = np.sqrt(ts)
    m = min(float((l1 / root_t).min()), float((l2 / root_t).min()))
    return math.sqrt(profile.delta) * m / (n * n)


def upper_bound_shape(profile: SectionProfile, n: int) -> float:
    """n^-2 sqrt(min{l1(delta) l2(delta), delta})."""
    l1d, l2d = profile.at_delta()
    return math.sqrt(min(l1d * l2d, profile.delta)) / (n * n)


def check_conditions(profile: SectionProfile, ratio_threshold: float,
                     monotonicity_threshold: float) -> ConditionReport:
    """Measure the two matching conditions over the profile grid."""
    if ratio_threshold <= 1.0 or monotonicity_threshold <= 1.0:
        raise ValueError("thresholds must exceed 1")
    ts, l1, l2 = _grid_view(profile)
    ratio = float(np.max(np.maximum(l1 / l2, l2 / l1)))
    defect = 1.0
    for li in (l1, l2):
        r = li / np.sqrt(ts)
        suffix_min = np.minimum.accumulate(r[::-1])[::-1]
        defect = max(defect, float(np.max(r / suffix_min)))
    return ConditionReport(
        ratio, defect,
        ratio <= ratio_threshold and defect <= monotonicity_threshold,
    )


def two_sided_report(body: ConvexBody, x, u, n: int, beta: float,
                     sigma: float = 4.0, evaluator=None,
                     grid_size: int = 128) -> BoundEstimate:
    """Assemble both bound shapes (and exact lambda if an evaluator is given).

    Requires sigma n^-2 < delta; for delta >= beta/2 the lower shape is the
    inscribed-disk branch n^-2.
    """
    cfg = ray_config(x, u)
    delta = ray_extent(body, cfg.x, cfg.u)
    if delta <= sigma / (n * n):
        raise TooCloseToBoundary(
            f"delta = {delta:.3e} not above sigma n^-2 = {sigma / (n * n):.3e}"
        )
    l1d, l2d = section_lengths(body, cfg, delta)
    upper = math.sqrt(min(l1d * l2d, delta)) / (n * n)
    if delta < beta / 2.0:
        profile = section_profile(body, cfg, beta, grid_size)
        lower = lower_bound_shape(profile, n)
    else:
        lower = 1.0 / (n * n)
    lam = None
    if evaluator is not None:
        lam = evaluator.evaluate(cfg.x).lam
    return BoundEstimate(n, delta, beta, sigma, lower, upper, lam)


def default_beta(body: ConvexBody, u) -> float:
    """Half the width of the body along u; for the alpha ball use c0(alpha)."""
    if body.kind == "alpha_ball":
        from .alpha_ball import AlphaBall

        return AlphaBall(body.params["alpha"]).c0
    from .geometry import support_halfwidth

    return support_halfwidth(body, u)

"""Privacy profiles, Renyi curves, and conversions between them.

A privacy profile maps eps to an upper bound on the tight delta at that
eps (the worst-case hockey-stick divergence between neighboring outputs).
Profiles are plain immutable evaluators; everything downstream composes
them functionally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import log_ndtr, ndtr

from .errors import UnreachableTargetError

BISECT_TOL = 1e-6
EPS_CAP = 1e4


@dataclass(frozen=True)
class PrivacyProfile:
    """Non-increasing map eps -> delta in [0,1].

    `knots` lists eps values where the curve has kinks (piecewise curves
    expose their corner points); optimizers add them to their candidate
    sets so piecewise-linear-in-exp(eps) curves are minimized exactly.
    """

    fn: Callable[[float], float]
    label: str = ""
    knots: tuple = ()

    def __call__(self, eps):
        return self.fn(eps)


@dataclass(frozen=True)
class PointDP:
    """A single (eps, delta) guarantee."""

    eps: float
    delta: float

    def __post_init__(self):
        if self.eps < 0:
            raise ValueError(f"eps must be non-negative, got {self.eps}")
        if not 0 <= self.delta <= 1:
            raise ValueError(f"delta must be in [0,1], got {self.delta}")


def default_orders():
    """Shared grid of Renyi orders: 1.1 to 10 in steps of 0.1, then integers to 256."""
    fine = [1 + k / 10 for k in range(1, 91)]
    coarse = [float(a) for a in range(11, 257)]
    return tuple(fine + coarse)


@dataclass(frozen=True)
class RdpCurve:
    """Map from Renyi order alpha > 1 to an eps(alpha) bound, with the
    finite order grid used for minimizations."""

    fn: Callable[[float], float]
    orders: tuple = field(default_factory=default_orders)

    def __call__(self, alpha):
        return self.fn(alpha)


def gaussian_profile(sigma, sensitivity=1.0):
    """Exact profile of the Gaussian mechanism, valid at every real eps.

    delta(eps) = Phi(r/2 - eps/r) - e^eps Phi(-r/2 - eps/r) with
    r = sensitivity/sigma; the second term is evaluated in log space so
    the curve stays accurate far into the tail.
    """
    if sigma <= 0 or sensitivity <= 0:
        raise ValueError("sigma and sensitivity must be positive")
    r = sensitivity / sigma

    def fn(eps):
        a = ndtr(r / 2 - eps / r)
        b = eps + log_ndtr(-r / 2 - eps / r)
        return min(1.0, max(0.0, float(a - np.exp(b))))

    return PrivacyProfile(fn, f"gaussian(sigma={sigma:g},sens={sensitivity:g})")


def gaussian_rdp_curve(sigma, sensitivity=1.0, orders=None):
    """Renyi curve alpha -> alpha * sensitivity^2 / (2 sigma^2) of the Gaussian mechanism."""
    c = sensitivity**2 / (2 * sigma**2)
    orders = default_orders() if orders is None else tuple(orders)
    return RdpCurve(lambda a: a * c, orders)


def profile_from_points(points):
    """Pessimistic profile through a list of (eps, delta) guarantees.

    Between stored points the curve uses delta_i + (e^{eps_i} - e^eps)_+,
    valid because the hockey-stick divergence is 1-Lipschitz in e^eps;
    the minimum over stored points is taken and clipped to [0,1].
    """
    pts = sorted(
        (p.eps, p.delta) if isinstance(p, PointDP) else (float(p[0]), float(p[1]))
        for p in points
    )
    if not pts:
        raise ValueError("need at least one point")
    eps_arr = np.array([p[0] for p in pts])
    del_arr = np.array([p[1] for p in pts])
    exp_arr = np.exp(eps_arr)
    top = eps_arr[-1]

    def fn(eps):
        e = math.exp(min(eps, top))
        val = float(np.min(del_arr + np.maximum(exp_arr - e, 0.0)))
        return min(1.0, max(0.0, val))

    label = "points(" + ",".join(f"({e:g},{d:g})" for e, d in pts) + ")"
    return PrivacyProfile(fn, label, knots=tuple(eps_arr))


def rdp_to_dp(curve, eps_target):
    """Delta at eps_target implied by a Renyi curve.

    Uses delta = exp((alpha-1)(eps' - eps)) / alpha * (1 - 1/alpha)^(alpha-1)
    minimized over the curve's order grid, clipped to [0,1].
    """
    orders = np.asarray(curve.orders)
    eps_alpha = np.array([curve(a) for a in curve.orders])
    log_d = (
        (orders - 1) * (eps_alpha - eps_target)
        + (orders - 1) * np.log1p(-1 / orders)
        - np.log(orders)
    )
    return float(np.exp(min(0.0, np.min(log_d))))


def rdp_profile(curve, label=""):
    """Wrap a Renyi curve as a PrivacyProfile via the conversion above."""
    return PrivacyProfile(lambda eps: rdp_to_dp(curve, eps), label or "rdp-converted")


def epsilon_for_delta(profile, delta_target, lo=0.0):
    """Smallest eps at which the profile drops to delta_target, within 1e-6.

    Brackets by doubling from 1 up to a hard cap of 1e4, then bisects.
    """
    if not 0 < delta_target <= 1:
        raise ValueError(f"delta target must be in (0,1], got {delta_target}")
    if profile(lo) <= delta_target:
        return lo
    hi = max(1.0, lo)
    while profile(hi) > delta_target:
        if hi >= EPS_CAP:
            raise UnreachableTargetError(
                f"profile still above delta={delta_target:g} at eps={EPS_CAP:g}"
            )
        lo = hi
        hi = min(2 * hi, EPS_CAP)
    while hi - lo > BISECT_TOL:
        mid = 0.5 * (lo + hi)
        if profile(mid) <= delta_target:
            hi = mid
        else:
            lo = mid
    return hi


def gaussian_sigma_for_eps_delta(eps, delta):
    """Noise scale sigma at which the unit-sensitivity Gaussian mechanism
    is exactly (eps, delta)-DP, to relative accuracy 1e-12 in delta."""
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if not 0 < delta < 1:
        raise ValueError(f"delta must be in (0,1), got {delta}")

    def delta_at(s):
        return gaussian_profile(s, 1.0)(eps)

    lo = 1e-3
    while delta_at(lo) <= delta:
        lo /= 2
    hi = 1.0
    while delta_at(hi) > delta:
        hi *= 2
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        v = delta_at(mid)
        if abs(v - delta) <= 1e-12 * delta:
            return mid
        if v > delta:
            lo = mid
        else:
            hi = mid
    return hi

"""Guarantees for releasing the best of a random number of private runs.

The tuning mechanism draws K from a count distribution, runs the base
mechanism K times, and releases the highest-scoring output.  Its
hockey-stick divergence at eps is bounded by E[K] times the base delta
evaluated at eps minus a penalty; the penalty depends only on a free
parameter eps1 and the base profile, so one penalty minimization serves
every queried eps.  Alongside the profile bounds live closed-form
corollaries, Renyi-divergence baselines, a guarantee-adjustment helper,
and a propose-test-release combiner.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .countdist import Binomial, Poisson, TruncNegBinomial
from .errors import EmptyCurveError, NoAdmissibleEps1Error, UnreachableTargetError
from .profiles import PointDP, PrivacyProfile, RdpCurve, epsilon_for_delta

GRID_POINTS = 200
GRID_LO = 1e-6
EPS1_CAP = 50.0
REFINE_TOL = 1e-6

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SelectionBoundResult:
    """A selection bound: the output profile, the eps1 the optimizer
    settled on, the induced shift subtracted from queried eps values,
    the count distribution, and the base profile's label."""

    profile: PrivacyProfile
    eps1: float
    shift: float
    dist: object
    base_label: str = ""

    def __post_init__(self):
        if self.eps1 < 0:
            raise ValueError(f"eps1 must be >= 0, got {self.eps1}")


def _golden(f, a, b, tol):
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def optimize_eps1(base, penalty, extra=()):
    """Minimize penalty(eps1, base(eps1)) over eps1 >= 0.

    Candidates are 0, a 200-point log-spaced grid up to where the base
    delta bottoms out (capped at 50), any kink locations the profile
    declares, and any caller-supplied extras; the best grid point is then
    sharpened by golden-section search to 1e-6.  Ties go to the smallest
    eps1.  A penalty may return +inf to mark an eps1 inadmissible.
    """
    try:
        eps_hi = min(epsilon_for_delta(base, 1e-15), EPS1_CAP)
    except UnreachableTargetError:
        eps_hi = EPS1_CAP
    eps_hi = max(eps_hi, 1e-3)

    cand = [0.0]
    cand.extend(np.geomspace(GRID_LO, eps_hi, GRID_POINTS))
    cand.extend(k for k in base.knots if 0.0 <= k <= eps_hi)
    cand.extend(e for e in extra if 0.0 <= e <= eps_hi)
    cand = sorted(set(float(c) for c in cand))

    def f(e1):
        return penalty(e1, base(e1))

    vals = [f(c) for c in cand]
    i = min(range(len(cand)), key=lambda j: (vals[j], cand[j]))
    best_e, best_v = cand[i], vals[i]

    lo = cand[i - 1] if i > 0 else cand[i]
    hi = cand[i + 1] if i + 1 < len(cand) else cand[i]
    if hi - lo > REFINE_TOL:
        refined = _golden(f, lo, hi, REFINE_TOL)
        rv = f(refined)
        if rv < best_v or (rv == best_v and refined < best_e):
            best_e, best_v = refined, rv
    return best_e


def _resolve_eps1(strategy, base, penalty, extra=()):
    if strategy == "optimized":
        return optimize_eps1(base, penalty, extra=extra)
    e1 = float(strategy)
    if e1 < 0:
        raise ValueError(f"fixed eps1 must be >= 0, got {e1}")
    return e1


def _shifted_profile(base, shift, factor, label, positive_eps_only):
    """min(1, factor * base(eps - shift)); optionally 1 for eps <= 0
    (families whose count can be zero certify nothing there)."""

    def fn(eps):
        if positive_eps_only and eps <= 0:
            return 1.0
        return min(1.0, factor * base(eps - shift))

    knots = tuple(k + shift for k in base.knots)
    return PrivacyProfile(fn, label, knots=knots)


def select_negbin_profile(base, eta, gamma, eps1_strategy="optimized"):
    """Best-of-K bound for K truncated negative binomial.

    The queried eps is reduced by
    (eta+1) * log(e^eps1 + ((1-gamma)/gamma) * base(eps1))
    and the base delta there is scaled by E[K].
    """
    dist = TruncNegBinomial(eta, gamma)
    ratio = (1.0 - gamma) / gamma

    def penalty(e1, d1):
        return (eta + 1.0) * math.log(math.exp(e1) + ratio * d1)

    eps1 = _resolve_eps1(eps1_strategy, base, penalty)
    shift = penalty(eps1, base(eps1))
    m = dist.mean()
    label = f"select-negbin(eta={eta:g},gamma={gamma:g})"
    profile = _shifted_profile(base, shift, m, label, positive_eps_only=False)
    return SelectionBoundResult(profile, eps1, shift, dist, base.label)


def select_binomial_profile(base, n, p, eps1_strategy="optimized"):
    """Best-of-K bound for K ~ Binomial(n, p).

    Valid only above the admissibility threshold
    eps1 >= log(1 + p/(1-p) * base(eps1)); the bound certifies nothing
    at eps <= 0 because K = 0 has positive probability.
    """
    dist = Binomial(n, p)
    odds = p / (1.0 - p)

    def g(e1):
        return e1 - math.log1p(odds * base(e1))

    if g(0.0) >= 0:
        eps1_min = 0.0
    else:
        hi = 1.0
        while g(hi) < 0 and hi < EPS1_CAP:
            hi *= 2
        if g(hi) < 0:
            raise NoAdmissibleEps1Error(
                f"no admissible eps1 below {EPS1_CAP} for n={n}, p={p}"
            )
        lo = 0.0
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if g(mid) < 0:
                lo = mid
            else:
                hi = mid
        eps1_min = hi

    def penalty(e1, d1):
        if e1 < eps1_min:
            return math.inf
        return (n - 1.0) * math.log1p(p * math.expm1(e1) + p * d1)

    eps1 = _resolve_eps1(eps1_strategy, base, penalty, extra=(eps1_min,))
    if penalty(eps1, base(eps1)) == math.inf:
        raise NoAdmissibleEps1Error(
            f"eps1={eps1:g} is below the admissibility threshold {eps1_min:g}"
        )
    shift = penalty(eps1, base(eps1))
    label = f"select-binomial(n={n},p={p:g})"
    profile = _shifted_profile(base, shift, n * p, label, positive_eps_only=True)
    return SelectionBoundResult(profile, eps1, shift, dist, base.label)


def select_poisson_profile(base, m, eps1_strategy="optimized"):
    """Best-of-K bound for K ~ Poisson(m); the queried eps is reduced by
    m*(e^eps1 - 1) + m*base(eps1).  Certifies nothing at eps <= 0."""
    dist = Poisson(m)

    def penalty(e1, d1):
        return m * math.expm1(e1) + m * d1

    eps1 = _resolve_eps1(eps1_strategy, base, penalty)
    shift = penalty(eps1, base(eps1))
    label = f"select-poisson(m={m:g})"
    profile = _shifted_profile(base, shift, m, label, positive_eps_only=True)
    return SelectionBoundResult(profile, eps1, shift, dist, base.label)


def bound_for_count(base, dist, eps1_strategy="optimized"):
    """Family bound matching a count distribution object."""
    if isinstance(dist, TruncNegBinomial):
        return select_negbin_profile(base, dist.shape, dist.success, eps1_strategy)
    if isinstance(dist, Binomial):
        return select_binomial_profile(base, dist.trials, dist.prob, eps1_strategy)
    if isinstance(dist, Poisson):
        return select_poisson_profile(base, dist.rate, eps1_strategy)
    raise TypeError(f"no selection bound for {type(dist).__name__}")


def select_negbin_pure(eps_base, eta):
    """Pure-DP special case: a base eps becomes (eta+2) * eps."""
    if eps_base < 0:
        raise ValueError(f"eps must be >= 0, got {eps_base}")
    if eta <= -1:
        raise ValueError(f"eta must exceed -1, got {eta}")
    return (eta + 2.0) * eps_base


def select_negbin_pointwise(point, eta, gamma):
    """Tuned guarantee from a single base point: (eps, delta) becomes
    ((eta+2)*eps + delta/gamma, E[K]*delta)."""
    m = TruncNegBinomial(eta, gamma).mean()
    return PointDP(
        (eta + 2.0) * point.eps + point.delta / gamma,
        min(1.0, m * point.delta),
    )


def select_gdp_eps(sigma, eta, gamma, delta):
    """Closed-form tuned eps for a Gaussian base:
    (eta+2) * (1/(2 sigma^2) + sqrt(2 log(1/(gamma delta))) / sigma) + delta."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if not 0 < gamma < 1:
        raise ValueError(f"gamma must be in (0,1), got {gamma}")
    if not 0 < delta < 1:
        raise ValueError(f"delta must be in (0,1), got {delta}")
    if gamma * delta >= 1:
        raise ValueError("requires gamma * delta < 1")
    return (eta + 2.0) * (
        1.0 / (2.0 * sigma**2)
        + math.sqrt(2.0 * math.log(1.0 / (gamma * delta))) / sigma
    ) + delta


def rdp_select_negbin(base_rdp, eta, gamma):
    """Renyi baseline for truncated-negative-binomial K.

    Adds to the base curve an order-independent term minimized over the
    curve's own grid, plus log(E[K])/(alpha-1).
    """
    if eta <= -1:
        raise ValueError(f"eta must exceed -1, got {eta}")
    if not 0 < gamma < 1:
        raise ValueError(f"gamma must be in (0,1), got {gamma}")
    orders = np.asarray(base_rdp.orders, dtype=float)
    vals = np.array([float(base_rdp(a)) for a in orders])
    extra = (eta + 1.0) * float(
        np.min((1.0 - 1.0 / orders) * vals + math.log(1.0 / gamma) / orders)
    )
    m = TruncNegBinomial(eta, gamma).mean()
    log_m = math.log(m)

    def fn(alpha):
        return base_rdp(alpha) + extra + log_m / (alpha - 1.0)

    return RdpCurve(fn, orders=base_rdp.orders)


def rdp_select_poisson(base_rdp, base_point, m):
    """Renyi baseline for Poisson K, valid only at orders alpha with
    e^(base eps) <= 1 + 1/(alpha-1); inadmissible orders are dropped."""
    if m <= 0:
        raise ValueError(f"m must be positive, got {m}")
    eps_hat, delta_hat = base_point.eps, base_point.delta
    if eps_hat == 0:
        orders = tuple(base_rdp.orders)
    else:
        cap = 1.0 + 1.0 / math.expm1(eps_hat)
        orders = tuple(a for a in base_rdp.orders if a <= cap)
    if not orders:
        raise EmptyCurveError(
            f"no order admissible for base eps {eps_hat:g}; "
            f"need alpha <= 1 + 1/(e^eps - 1)"
        )
    add = m * delta_hat
    log_m = math.log(m)

    def fn(alpha):
        return base_rdp(alpha) + add + log_m / (alpha - 1.0)

    return RdpCurve(fn, orders=orders)


def adjust_guarantee(eps1, delta1, eps_hat, eta, gamma, m, delta):
    """Final guarantee for a base that is both (eps1, delta1)-DP and
    (eps_hat, delta/m)-DP when the run count is truncated negative
    binomial with E[K] = m:
    (eps_hat + (eta+1) * log(e^eps1 + ((1-gamma)/gamma) * delta1), delta).

    m enters through the caller's delta/m certification, not the output
    arithmetic.
    """
    if min(eps1, delta1, eps_hat, delta) < 0:
        raise ValueError("inputs must be non-negative")
    if not 0 < gamma < 1:
        raise ValueError(f"gamma must be in (0,1), got {gamma}")
    if m <= 0:
        raise ValueError(f"m must be positive, got {m}")
    shift = (eta + 1.0) * math.log(
        math.exp(eps1) + (1.0 - gamma) / gamma * delta1
    )
    return PointDP(eps_hat + shift, delta)


def gptr_combine(eps, delta, eps_hat, delta_hat, delta_prime):
    """Propose-test-release combination:
    (eps + eps_hat, delta + delta_hat + delta_prime), delta clipped at 1."""
    if min(eps, delta, eps_hat, delta_hat, delta_prime) < 0:
        raise ValueError("inputs must be non-negative")
    return PointDP(eps + eps_hat, min(1.0, delta + delta_hat + delta_prime))

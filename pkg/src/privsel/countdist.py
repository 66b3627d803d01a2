"""Distributions over the number of base-mechanism runs.

Randomized selection draws a count K, runs the base mechanism K times and
releases the best run.  The privacy bounds only touch these distributions
through their pmf, mean and the derivative of the probability generating
function, so that is the whole interface.

The truncated negative binomial lives on {1, 2, ...}; binomial and Poisson
put mass on K = 0, which the selection bounds treat separately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import stats
from scipy.special import gammaln

from .errors import InfeasibleMeanError

# Validation sums truncate the support where the right tail drops below this.
TAIL_MASS = 1e-15


@dataclass(frozen=True)
class TruncNegBinomial:
    """Truncated negative binomial on {1, 2, ...}.

    `shape` may be any real > -1; `success` is the success probability in
    (0, 1) of the embedded geometric.  shape=1 is the geometric distribution
    with mean 1/success, shape=0 the logarithmic distribution.
    """

    shape: float
    success: float

    def __post_init__(self):
        if not self.shape > -1:
            raise ValueError(f"shape must exceed -1, got {self.shape}")
        if not 0 < self.success < 1:
            raise ValueError(f"success must be in (0,1), got {self.success}")

    def pmf(self, k):
        k = np.asarray(k)
        kf = k.astype(float)
        g = self.success
        eta = self.shape
        with np.errstate(divide="ignore"):
            if eta == 0:
                logp = kf * math.log1p(-g) - np.log(kf) - math.log(math.log(1 / g))
            else:
                # eta/(g^-eta - 1) > 0 for every eta > -1, so the log is safe
                pref = math.log(eta / (g ** (-eta) - 1))
                logp = (
                    pref
                    + kf * math.log1p(-g)
                    + gammaln(kf + eta)
                    - gammaln(1 + eta)
                    - gammaln(kf + 1)
                )
        out = np.where(k >= 1, np.exp(logp), 0.0)
        return float(out) if out.ndim == 0 else out

    def mean(self):
        g = self.success
        eta = self.shape
        if eta == 0:
            return (1 / g - 1) / math.log(1 / g)
        return eta * (1 - g) / (g * (1 - g**eta))

    def cdf(self, k):
        k = int(k)
        if k < 1:
            return 0.0
        return float(np.sum(self.pmf(np.arange(1, k + 1))))

    def pgf_deriv(self, z):
        _check_z(z)
        g = self.success
        return (1 - (1 - g) * z) ** (-self.shape - 1) * g ** (self.shape + 1) * self.mean()

    def support_upper(self, tail=TAIL_MASS):
        """Smallest k whose right tail mass is at most `tail`.

        The tail is accumulated from the right, where the terms are tiny
        and stay accurate; a forward cumsum compared against 1 - tail can
        stall inside its own rounding error and never terminate.
        """
        hi = max(64, int(8 * self.mean()))
        while True:
            p = self.pmf(np.arange(1, hi + 1))
            # successive pmf ratios are (1-g)(k+shape)/(k+1), so the mass
            # past the window is under a geometric envelope once that
            # ratio drops below 1
            r = (1 - self.success) * max(1.0, (hi + 1 + self.shape) / (hi + 2))
            beyond = p[-1] * r / (1 - r) if r < 1 else math.inf
            if beyond <= tail / 2:
                after = np.zeros(hi)
                after[:-1] = np.cumsum(p[:0:-1])[::-1]
                idx = np.nonzero(after + beyond <= tail)[0]
                if idx.size:
                    return int(idx[0]) + 1
            hi *= 2


@dataclass(frozen=True)
class Binomial:
    """Binomial count, trials n with success probability strictly inside (0,1)."""

    trials: int
    prob: float

    def __post_init__(self):
        if not (isinstance(self.trials, (int, np.integer)) and self.trials >= 1):
            raise ValueError(f"trials must be a positive integer, got {self.trials}")
        if not 0 < self.prob < 1:
            raise ValueError(f"prob must be in (0,1), got {self.prob}")

    def pmf(self, k):
        return stats.binom.pmf(k, self.trials, self.prob)

    def mean(self):
        return self.trials * self.prob

    def cdf(self, k):
        return float(stats.binom.cdf(k, self.trials, self.prob))

    def pgf_deriv(self, z):
        _check_z(z)
        n, p = self.trials, self.prob
        return n * p * (1 - p + p * z) ** (n - 1)

    def support_upper(self, tail=TAIL_MASS):
        return self.trials


@dataclass(frozen=True)
class Poisson:
    """Poisson count with the given mean."""

    rate: float

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError(f"rate must be positive, got {self.rate}")

    def pmf(self, k):
        return stats.poisson.pmf(k, self.rate)

    def mean(self):
        return self.rate

    def cdf(self, k):
        return float(stats.poisson.cdf(k, self.rate))

    def pgf_deriv(self, z):
        _check_z(z)
        return self.rate * math.exp(self.rate * (z - 1))

    def support_upper(self, tail=TAIL_MASS):
        k = int(stats.poisson.isf(tail, self.rate)) + 2
        while stats.poisson.sf(k, self.rate) > tail:
            k += 1
        return k


CountDistribution = Union[TruncNegBinomial, Binomial, Poisson]


def _check_z(z):
    if not 0 <= z <= 1:
        raise ValueError(f"pgf argument must lie in [0,1], got {z}")


def from_expected(kind, m, *, shape=None, trials=None):
    """Build a count distribution of the given kind with mean m.

    kind "negbin" needs `shape` and solves for the success parameter
    (exactly 1/m in the geometric case), "binomial" needs `trials`,
    "poisson" needs nothing extra.
    """
    if m <= 0:
        raise InfeasibleMeanError(f"mean must be positive, got {m}")
    if kind == "negbin":
        if shape is None:
            raise ValueError("negbin needs a shape parameter")
        if m <= 1:
            raise InfeasibleMeanError(
                f"truncated negative binomial has mean > 1, requested {m}"
            )
        if shape == 1:
            return TruncNegBinomial(1.0, 1.0 / m)
        return TruncNegBinomial(shape, _solve_success(shape, m))
    if kind == "binomial":
        if trials is None:
            raise ValueError("binomial needs a trials parameter")
        p = m / trials
        if not 0 < p < 1:
            raise InfeasibleMeanError(
                f"binomial with {trials} trials cannot have mean {m} (p={p:g})"
            )
        return Binomial(int(trials), p)
    if kind == "poisson":
        return Poisson(m)
    raise ValueError(f"unknown count distribution kind {kind!r}")


def _solve_success(shape, m):
    # mean is continuous and strictly decreasing in the success parameter,
    # from +inf near 0 down to 1 near 1, so plain bisection is safe
    def mean_at(g):
        return TruncNegBinomial(shape, g).mean()

    lo = min(0.5, 1 / m)
    while mean_at(lo) < m:
        lo /= 10
        if lo < 1e-280:
            raise InfeasibleMeanError(f"mean {m} out of reach for shape {shape}")
    hi = 1 - 1e-12
    if mean_at(hi) > m:
        raise InfeasibleMeanError(f"mean {m} out of reach for shape {shape}")
    # iterate to relative width ~1e-18 so the mean round-trips within 1e-9
    # even when the solution sits at success ~ 1/m with m in the thousands
    for _ in range(90):
        mid = 0.5 * (lo + hi)
        if mean_at(mid) > m:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)

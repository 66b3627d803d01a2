"""Independent quadrature and sampling oracles.

Everything here recomputes divergences from density definitions alone,
never through the analytic bounds, so agreement between the two paths is
meaningful evidence.  Shapes are restricted to Gaussians and two-component
Gaussian mixtures, which have accurate closed-form CDFs and cover every
scenario the bounds are tested on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.special import ndtr

from .countdist import Binomial, Poisson, TruncNegBinomial

QUAD_REL_TOL = 1e-12
MC_SEED = 947151  # fixed so every summary is bitwise reproducible
_SCAN_POINTS = 4097


@dataclass(frozen=True)
class DensityPair:
    """Two 1-d densities on a shared window, with optional CDFs."""

    pdf_p: Callable
    pdf_q: Callable
    lo: float
    hi: float
    cdf_p: Optional[Callable] = None
    cdf_q: Optional[Callable] = None
    label: str = ""

    def swapped(self):
        return DensityPair(
            self.pdf_q, self.pdf_p, self.lo, self.hi, self.cdf_q, self.cdf_p,
            label=self.label + "/swapped",
        )


def _norm_pdf(x, mu, sigma):
    z = (x - mu) / sigma
    return np.exp(-0.5 * z * z) / (sigma * math.sqrt(2 * math.pi))


def gaussian_pair(mu_p, mu_q, sigma):
    """Pair N(mu_p, sigma^2) vs N(mu_q, sigma^2)."""
    lo = min(mu_p, mu_q) - 10 * sigma
    hi = max(mu_p, mu_q) + 10 * sigma
    return DensityPair(
        lambda x: _norm_pdf(x, mu_p, sigma),
        lambda x: _norm_pdf(x, mu_q, sigma),
        lo,
        hi,
        lambda x: ndtr((x - mu_p) / sigma),
        lambda x: ndtr((x - mu_q) / sigma),
        label=f"N({mu_p:g},{sigma:g}^2)|N({mu_q:g},{sigma:g}^2)",
    )


def subsampled_gaussian_pair(q, sigma, direction="remove"):
    """Dominating pair of the Poisson-subsampled Gaussian mechanism.

    remove: (1-q) N(0,s^2) + q N(1,s^2) against N(0,s^2); add is the same
    pair with the roles exchanged.
    """

    def mix_pdf(x):
        return (1 - q) * _norm_pdf(x, 0, sigma) + q * _norm_pdf(x, 1, sigma)

    def mix_cdf(x):
        return (1 - q) * ndtr(x / sigma) + q * ndtr((x - 1) / sigma)

    def ref_pdf(x):
        return _norm_pdf(x, 0, sigma)

    def ref_cdf(x):
        return ndtr(x / sigma)

    lo, hi = -10 * sigma, 1 + 10 * sigma
    if direction == "remove":
        return DensityPair(mix_pdf, ref_pdf, lo, hi, mix_cdf, ref_cdf,
                           label=f"subsampled(q={q:g},sigma={sigma:g})/remove")
    if direction == "add":
        return DensityPair(ref_pdf, mix_pdf, lo, hi, ref_cdf, mix_cdf,
                           label=f"subsampled(q={q:g},sigma={sigma:g})/add")
    raise ValueError(f"direction must be add or remove, got {direction!r}")


def pair_normalization(pair):
    """Integral of each density over the window; both should be 1 within 1e-10."""
    ip = quad(pair.pdf_p, pair.lo, pair.hi, epsabs=1e-14, epsrel=QUAD_REL_TOL, limit=200)[0]
    iq = quad(pair.pdf_q, pair.lo, pair.hi, epsabs=1e-14, epsrel=QUAD_REL_TOL, limit=200)[0]
    return ip, iq


def _positive_part_integral(f, lo, hi):
    """Integral of max(f, 0) over [lo, hi].

    The integrand of a hockey-stick divergence has kinks where f changes
    sign, so sign changes are located first (grid scan plus root find) and
    each positive piece is integrated as a smooth function.
    """
    xs = np.linspace(lo, hi, _SCAN_POINTS)
    vals = np.array([float(f(x)) for x in xs])
    pos = vals > 0
    edges = [lo]
    for i in range(len(xs) - 1):
        if pos[i] != pos[i + 1]:
            try:
                root = brentq(f, xs[i], xs[i + 1], xtol=1e-14, rtol=8.9e-16)
            except ValueError:
                root = 0.5 * (xs[i] + xs[i + 1])
            edges.append(root)
    edges.append(hi)

    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (a + b)
        if f(mid) > 0:
            total += quad(f, a, b, epsabs=1e-15, epsrel=QUAD_REL_TOL, limit=300)[0]
    return max(0.0, total)


def hs_divergence_quadrature(pair, eps):
    """Hockey-stick divergence of the pair at e^eps, straight from densities."""
    ee = math.exp(eps)

    def f(x):
        return pair.pdf_p(x) - ee * pair.pdf_q(x)

    return _positive_part_integral(f, pair.lo, pair.hi)


def argmax_probabilities(means, sigma):
    """P(argmax_i of means_i + N(0, sigma^2) = i) for each coordinate."""
    means = np.asarray(means, dtype=float)
    m = len(means)
    lo = float(means.min()) - 10 * sigma
    hi = float(means.max()) + 10 * sigma
    probs = np.empty(m)
    for i in range(m):
        others = np.delete(means, i)

        def integrand(t):
            return _norm_pdf(t, means[i], sigma) * np.prod(ndtr((t - others) / sigma))

        probs[i] = quad(integrand, lo, hi, epsabs=1e-14, epsrel=QUAD_REL_TOL, limit=300)[0]
    return probs


def rnm_exact_divergence(mu, mu_prime, sigma, eps):
    """Exact hockey-stick divergence of the noisy-argmax output distribution
    on a fixed pair of query-mean vectors (at most 8 candidates)."""
    mu = np.asarray(mu, dtype=float)
    mu_prime = np.asarray(mu_prime, dtype=float)
    if mu.shape != mu_prime.shape or not 2 <= len(mu) <= 8:
        raise ValueError("need matching mean vectors with 2..8 entries")
    if np.max(np.abs(mu - mu_prime)) > 1 + 1e-12:
        raise ValueError("per-query sensitivity exceeds 1")
    p = argmax_probabilities(mu, sigma)
    p_prime = argmax_probabilities(mu_prime, sigma)
    return float(np.sum(np.maximum(p - math.exp(eps) * p_prime, 0.0)))


def selection_exact_divergence(pair, dist, eps):
    """Exact divergence of the best-of-K selection output on a fixed base pair.

    The selection output density is base density times pgf_deriv at the
    base CDF; for count distributions with mass at K=0 the formula drops
    the empty-run atom, which is harmless only at eps > 0.
    """
    if pair.cdf_p is None or pair.cdf_q is None:
        raise ValueError("selection oracle needs CDFs on the base pair")
    if dist.pmf(0) > 0 and eps <= 0:
        raise ValueError("count distributions with mass at 0 need eps > 0")
    ee = math.exp(eps)

    def f(y):
        a = pair.pdf_p(y) * dist.pgf_deriv(float(pair.cdf_p(y)))
        b = pair.pdf_q(y) * dist.pgf_deriv(float(pair.cdf_q(y)))
        return a - ee * b

    return _positive_part_integral(f, pair.lo, pair.hi)


def selection_mean_quadrature(pair, dist):
    """E[best score] (empty runs contributing zero) under the numerator density."""

    def g(y):
        return y * pair.pdf_p(y) * dist.pgf_deriv(float(pair.cdf_p(y)))

    return quad(g, pair.lo, pair.hi, epsabs=1e-12, epsrel=1e-10, limit=300)[0]


@dataclass(frozen=True)
class McSelectionSummary:
    """Empirical best-of-K statistics; best is nan where K drew 0."""

    best: np.ndarray
    trials: int
    seed: int

    def empty_fraction(self):
        return float(np.isnan(self.best).mean())

    def mean_best(self):
        """Mean best score across all trials, an empty draw counting as 0;
        comparable to the quadrature of y times the output density."""
        return float(np.nansum(self.best) / self.trials)

    def cdf(self, y):
        """Empirical P(best <= y and K >= 1)."""
        return float(np.sum(self.best <= y) / self.trials)

    @staticmethod
    def ci_radius(p, trials):
        return 3 * math.sqrt(p * (1 - p) / trials)


def mc_selection_sample(base_sampler, dist, trials, seed=MC_SEED):
    """Monte Carlo best-of-K draw: sample K, then the max of K base samples.

    base_sampler(rng, size) must return that many base scores.  The count
    is drawn by inverse CDF on a pmf table truncated at the far tail.
    """
    if trials < 10**5:
        raise ValueError("need at least 1e5 trials for a meaningful summary")
    rng = np.random.default_rng(seed)
    k0 = 1 if dist.pmf(0) == 0 else 0
    k_hi = dist.support_upper(1e-12)
    table = np.cumsum(dist.pmf(np.arange(k0, k_hi + 1)))
    table[-1] = max(table[-1], 1.0)
    counts = np.searchsorted(table, rng.random(trials)) + k0
    total = int(counts.sum())
    scores = np.asarray(base_sampler(rng, total), dtype=float)
    best = np.full(trials, np.nan)
    nonzero = counts > 0
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    best[nonzero] = np.maximum.reduceat(scores, starts[nonzero])
    return McSelectionSummary(best=best, trials=trials, seed=seed)


# Shared validation scenarios: a base pair description plus a count
# distribution.  Consumers build the matching analytic bound themselves,
# so this module stays independent of the bound implementations.
SELECTION_INSTANCES = (
    ("gaussian sigma=4, geometric count",
     ("gaussian", 4.0), TruncNegBinomial(1.0, 0.1)),
    ("gaussian sigma=4, log-series count",
     ("gaussian", 4.0), TruncNegBinomial(0.0, 0.05)),
    ("gaussian sigma=2, shape-2 count",
     ("gaussian", 2.0), TruncNegBinomial(2.0, 0.3)),
    ("gaussian sigma=4, binomial count",
     ("gaussian", 4.0), Binomial(50, 0.2)),
    ("gaussian sigma=4, poisson count",
     ("gaussian", 4.0), Poisson(10.0)),
    ("subsampled q=0.2 sigma=2, geometric count",
     ("subsampled", 0.2, 2.0), TruncNegBinomial(1.0, 0.2)),
)


def instance_pair(base_spec):
    """Density pair for a SELECTION_INSTANCES base description."""
    if base_spec[0] == "gaussian":
        return gaussian_pair(0.0, 1.0, base_spec[1])
    if base_spec[0] == "subsampled":
        return subsampled_gaussian_pair(base_spec[1], base_spec[2], "remove")
    raise ValueError(f"unknown base spec {base_spec!r}")

"""Bounds for reporting the index of the largest noised query.

Each query gets independent Gaussian noise and only the argmax index is
released.  The guarantees here come from a union-style reduction: the
divergence of the released index is at most the number of candidates
times the divergence of one noised score at doubled sensitivity (or at
the original sensitivity when all scores move the same way between
neighboring inputs).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .profiles import PrivacyProfile, gaussian_profile


@dataclass(frozen=True)
class RnmSpec:
    """Candidate count, whether all scores shift monotonically between
    neighbors, and the noise scale."""

    candidates: int
    monotone: bool
    sigma: float

    def __post_init__(self):
        if self.candidates < 1:
            raise ValueError(f"candidates must be >= 1, got {self.candidates}")
        if self.sigma <= 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")

    def noise_profile(self):
        """Profile of one noised score at the relevant sensitivity."""
        sens = 1.0 if self.monotone else 2.0
        return gaussian_profile(self.sigma, sens)


def rnm_profile(base, candidates):
    """Index-release profile min(1, candidates * base(eps)).

    base must be the profile of a single noised score at doubled
    sensitivity, or at unit sensitivity in the monotone case.
    """
    if candidates < 1:
        raise ValueError(f"candidates must be >= 1, got {candidates}")

    def fn(eps):
        return min(1.0, candidates * base(eps))

    return PrivacyProfile(fn, f"rnm(m={candidates})", knots=base.knots)


def rnm_composition_profile(base_comp, candidates, rounds):
    """Profile for rounds adaptive argmax releases.

    base_comp must already be the rounds-fold composed single-score
    profile (for Gaussian noise: gaussian_profile(sigma, sens*sqrt(rounds)));
    the candidate factor then enters once per round.
    """
    if candidates < 1:
        raise ValueError(f"candidates must be >= 1, got {candidates}")
    if rounds < 1:
        raise ValueError(f"rounds must be >= 1, got {rounds}")
    log_m = rounds * math.log(candidates)

    def fn(eps):
        d = base_comp(eps)
        if d <= 0.0:
            return 0.0
        return math.exp(min(0.0, log_m + math.log(d)))

    return PrivacyProfile(fn, f"rnm-composed(m={candidates},rounds={rounds})",
                          knots=base_comp.knots)


def rnm_gaussian_eps(sigma, candidates, delta):
    """Closed-form eps(delta) for the non-monotone Gaussian mechanism:
    2/sigma^2 + (2/sigma) sqrt(2 log(candidates/delta))."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if candidates < 1:
        raise ValueError(f"candidates must be >= 1, got {candidates}")
    if not 0 < delta < 1:
        raise ValueError(f"delta must be in (0,1), got {delta}")
    if candidates <= delta:
        raise ValueError("requires candidates/delta > 1")
    return 2.0 / sigma**2 + (2.0 / sigma) * math.sqrt(
        2.0 * math.log(candidates / delta)
    )

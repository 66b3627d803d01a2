"""Preset parameter sets and table builders behind the comparison commands.

Each builder returns (header, rows) ready for CSV formatting.  The
presets pin every parameter so repeated runs emit identical bytes.
"""

from __future__ import annotations

import math

import numpy as np

from .countdist import Binomial, Poisson
from .errors import EmptyCurveError
from .pld import (
    GridSpec,
    SubsampledGaussianParams,
    renyi_subsampled_gaussian,
    subsampled_gaussian_profile,
)
from .profiles import (
    PointDP,
    RdpCurve,
    default_orders,
    epsilon_for_delta,
    gaussian_profile,
    gaussian_rdp_curve,
    gaussian_sigma_for_eps_delta,
    rdp_profile,
    rdp_to_dp,
)
from .rnm import rnm_gaussian_eps, rnm_profile
from .selection import (
    adjust_guarantee,
    optimize_eps1,
    rdp_select_negbin,
    rdp_select_poisson,
    select_binomial_profile,
    select_gdp_eps,
    select_negbin_pointwise,
    select_negbin_profile,
    select_poisson_profile,
)

DELTA_DEFAULT = 1e-6

FIG6_PARAMS = SubsampledGaussianParams(q=256 / 60000, sigma=1.1, steps=14063)
# the long composition amplifies residual discretization error, so this
# preset refines the default loss grid
FIG6_GRID = GridSpec(spacing=2.5e-5)
FIG7_PARAMS = SubsampledGaussianParams(q=16384 / 50000, sigma=21.1, steps=250)
# target eps for the max-candidate-count comparison; chosen inside the
# region where both the hockey-stick and Renyi curves are defined
FIG7_TARGET_EPS = 2.5

FIG8_DEFAULTS = {
    "q": 0.01,
    "eps_q": 1.5,
    "delta": 1e-6,
    "m": 10.0,
    "eta": 1.0,
    "sigmas": (2.0, 3.0, 4.0),
}


def subsampled_rdp_curve(params, orders=None):
    """Renyi curve of the composed subsampled Gaussian on the shared
    order grid; per-order values are quadrature results cached process-wide."""
    grid = tuple(orders) if orders is not None else default_orders()

    def fn(alpha):
        return renyi_subsampled_gaussian(params, alpha)

    return RdpCurve(fn, orders=grid)


def rdp_curve_eps(curve, delta):
    """eps at delta for a Renyi curve, through the order-optimized conversion."""
    return epsilon_for_delta(rdp_profile(curve), delta)


def rdp_poisson_eps(base_rdp, m, delta, eps_hat_grid=None):
    """Best final eps over the base-point grid for the Poisson Renyi bound.

    The bound needs the base stated as a single (eps, delta) point; each
    candidate point is read off the base curve and the cheapest final
    guarantee wins.
    """
    grid = (
        np.asarray(eps_hat_grid, dtype=float)
        if eps_hat_grid is not None
        else np.geomspace(1e-3, 2.0, 40)
    )
    best = math.inf
    for eps_hat in grid:
        point = PointDP(float(eps_hat), rdp_to_dp(base_rdp, float(eps_hat)))
        try:
            curve = rdp_select_poisson(base_rdp, point, m)
        except EmptyCurveError:
            continue
        best = min(best, rdp_curve_eps(curve, delta))
    return best


def _int_ladder(lo, hi, count):
    return [int(v) for v in np.unique(np.round(np.geomspace(lo, hi, count)))]


def fig1_table(delta=DELTA_DEFAULT, sigma=4.0):
    """Noisy-argmax eps at fixed delta: profile inversion vs closed form."""
    base = gaussian_profile(sigma, 2.0)
    rows = []
    for m in _int_ladder(1, 10_000, 25):
        eps_hs = epsilon_for_delta(rnm_profile(base, m), delta)
        eps_cf = rnm_gaussian_eps(sigma, m, delta)
        rows.append((m, eps_hs, eps_cf))
    return ("m", "eps_hs", "eps_closed"), rows


def fig2_table(delta=DELTA_DEFAULT, sigma=4.0):
    """Geometric-count tuning of a Gaussian base: hockey-stick bound vs
    the Renyi baseline vs the single-point closed form."""
    base = gaussian_profile(sigma, 1.0)
    base_rdp = gaussian_rdp_curve(sigma, 1.0)
    rows = []
    for m in (30, 300, 3000):
        gamma = 1.0 / m
        eps_hs = epsilon_for_delta(
            select_negbin_profile(base, 1.0, gamma).profile, delta
        )
        eps_rdp = rdp_curve_eps(rdp_select_negbin(base_rdp, 1.0, gamma), delta)
        eps_hat = epsilon_for_delta(base, delta / m)
        point = select_negbin_pointwise(PointDP(eps_hat, delta / m), 1.0, gamma)
        rows.append((m, eps_hs, eps_rdp, point.eps))
    return ("m", "eps_hs", "eps_rdp", "eps_pointwise"), rows


def fig3_table(delta=DELTA_DEFAULT, sigma=4.0):
    """Growth of the tuned eps with the expected run count."""
    base = gaussian_profile(sigma, 1.0)
    base_rdp = gaussian_rdp_curve(sigma, 1.0)
    rows = []
    for m in _int_ladder(10, 3000, 15):
        gamma = 1.0 / m
        eps_hs = epsilon_for_delta(
            select_negbin_profile(base, 1.0, gamma).profile, delta
        )
        eps_rdp = rdp_curve_eps(rdp_select_negbin(base_rdp, 1.0, gamma), delta)
        eps_gdp = select_gdp_eps(sigma, 1.0, gamma, delta)
        rows.append((m, eps_hs, eps_rdp, eps_gdp))
    return ("m", "eps_hs", "eps_rdp", "eps_gdp"), rows


FIG4_TRIALS = (15, 20, 50, 1000)


def fig4_tables(sigma=4.0, m=10.0):
    """Binomial-count profiles stepping toward the Poisson-count profile,
    plus the count CDF table that explains the ordering."""
    base = gaussian_profile(sigma, 1.0)
    profiles = [
        select_binomial_profile(base, n, m / n).profile for n in FIG4_TRIALS
    ]
    profiles.append(select_poisson_profile(base, m).profile)

    eps_grid = np.linspace(0.25, 5.0, 20)
    rows = [(float(e), *(p(float(e)) for p in profiles)) for e in eps_grid]
    header = ("eps", *(f"delta_n{n}" for n in FIG4_TRIALS), "delta_poisson")

    dists = [Binomial(n, m / n) for n in FIG4_TRIALS]
    dists.append(Poisson(m))
    krows = [(k, *(d.cdf(k) for d in dists)) for k in range(31)]
    kheader = ("k", *(f"cdf_n{n}" for n in FIG4_TRIALS), "cdf_poisson")
    return (header, rows), (kheader, krows)


def fig6_table(delta=DELTA_DEFAULT, grid=None):
    """Tuned DP-SGD eps vs expected run count: hockey-stick bounds for
    geometric and Poisson counts against both Renyi baselines."""
    base = subsampled_gaussian_profile(FIG6_PARAMS, grid or FIG6_GRID)
    base_rdp = subsampled_rdp_curve(FIG6_PARAMS)
    rows = []
    for m in _int_ladder(2, 1000, 15):
        gamma = 1.0 / m
        eps_hs_nb = epsilon_for_delta(
            select_negbin_profile(base, 1.0, gamma).profile, delta
        )
        eps_hs_po = epsilon_for_delta(
            select_poisson_profile(base, float(m)).profile, delta
        )
        eps_rdp_nb = rdp_curve_eps(rdp_select_negbin(base_rdp, 1.0, gamma), delta)
        eps_rdp_po = rdp_poisson_eps(base_rdp, float(m), delta)
        rows.append((m, eps_hs_nb, eps_hs_po, eps_rdp_nb, eps_rdp_po))
    return ("m", "eps_hs_negbin", "eps_hs_poisson", "eps_rdp_negbin",
            "eps_rdp_poisson"), rows


def fig7_table(delta=DELTA_DEFAULT, grid=None):
    """Tuned eps vs expected run count for the large-batch DP-SGD setting."""
    base = subsampled_gaussian_profile(FIG7_PARAMS, grid)
    base_rdp = subsampled_rdp_curve(FIG7_PARAMS)
    rows = []
    for m in _int_ladder(2, 100_000, 21):
        gamma = 1.0 / m
        eps_hs = epsilon_for_delta(
            select_negbin_profile(base, 1.0, gamma).profile, delta
        )
        eps_rdp = rdp_curve_eps(rdp_select_negbin(base_rdp, 1.0, gamma), delta)
        rows.append((m, eps_hs, eps_rdp))
    return ("m", "eps_hs_negbin", "eps_rdp_negbin"), rows


def _max_m(eps_fn, target_eps, m_lo=2, m_cap=10**12):
    """Largest integer expected count whose eps stays at or below target."""
    if eps_fn(m_lo) > target_eps:
        return 0
    lo, hi = m_lo, 2 * m_lo
    while hi <= m_cap and eps_fn(hi) <= target_eps:
        lo, hi = hi, 2 * hi
    if hi > m_cap:
        return lo
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if eps_fn(mid) <= target_eps:
            lo = mid
        else:
            hi = mid
    return lo


def fig7_max_counts(target_eps=None, delta=DELTA_DEFAULT, grid=None):
    """(hockey-stick max count, Renyi max count) at the target eps."""
    target = FIG7_TARGET_EPS if target_eps is None else target_eps
    base = subsampled_gaussian_profile(FIG7_PARAMS, grid)
    base_rdp = subsampled_rdp_curve(FIG7_PARAMS)

    def eps_hs(m):
        return epsilon_for_delta(
            select_negbin_profile(base, 1.0, 1.0 / m).profile, delta
        )

    def eps_rdp(m):
        return rdp_curve_eps(rdp_select_negbin(base_rdp, 1.0, 1.0 / m), delta)

    return _max_m(eps_hs, target), _max_m(eps_rdp, target)


def fig8_adjust_table(q=None, eps_q=None, delta=None, m=None, eta=None,
                      sigmas=None, grid=None, steps_cap=1 << 20):
    """Per noise candidate: the largest step count whose composed profile
    stays inside both thresholds read off the target guarantee, the final
    adjusted guarantee, and the directly optimized bound for gap reporting.
    """
    q = FIG8_DEFAULTS["q"] if q is None else q
    eps_q = FIG8_DEFAULTS["eps_q"] if eps_q is None else eps_q
    delta = FIG8_DEFAULTS["delta"] if delta is None else delta
    m = FIG8_DEFAULTS["m"] if m is None else m
    eta = FIG8_DEFAULTS["eta"] if eta is None else eta
    sigmas = FIG8_DEFAULTS["sigmas"] if sigmas is None else sigmas

    gamma = 1.0 / m  # eta=1 count with this mean; general eta solved below
    if eta != 1.0:
        from .countdist import from_expected

        gamma = from_expected("negbin", m, shape=eta).success
    ratio = (1.0 - gamma) / gamma
    target = gaussian_profile(gaussian_sigma_for_eps_delta(eps_q, delta), 1.0)

    def penalty(e1, d1):
        return (eta + 1.0) * math.log(math.exp(e1) + ratio * d1)

    eps1 = optimize_eps1(target, penalty)
    delta1 = target(eps1)
    eps_hat = epsilon_for_delta(target, delta / m)
    final = adjust_guarantee(eps1, delta1, eps_hat, eta, gamma, m, delta)

    rows = []
    for sigma in sigmas:
        def profile_at(steps):
            return subsampled_gaussian_profile(
                SubsampledGaussianParams(q, sigma, steps), grid
            )

        def ok(steps):
            prof = profile_at(steps)
            return prof(eps1) <= delta1 and prof(eps_hat) <= delta / m

        if not ok(1):
            rows.append((sigma, 0, math.nan, delta, math.nan, math.nan))
            continue
        lo, hi = 1, 2
        while hi <= steps_cap and ok(hi):
            lo, hi = hi, 2 * hi
        if hi <= steps_cap:
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if ok(mid):
                    lo = mid
                else:
                    hi = mid
        max_steps = lo
        direct = select_negbin_profile(profile_at(max_steps), eta, gamma)
        eps_direct = epsilon_for_delta(direct.profile, delta)
        gap = final.eps / eps_direct - 1.0
        rows.append((sigma, max_steps, final.eps, final.delta, eps_direct, gap))
    return ("sigma", "max_steps", "eps_final", "delta_final", "eps_direct",
            "gap_rel"), rows

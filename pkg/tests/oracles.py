"""Independent oracles for expected-value generation and cross-checks.

Everything here is derived from first principles with its own code path:
closed-form copula derivatives, bisection inversion, one-dimensional
adaptive quadrature of conditional probabilities, and brute-force integer
search.  Nothing imports from the package's numeric internals, so
agreement between a production routine and its oracle is evidence, not
circularity.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate

from truncdep import CopulaFamily, ModelParams, StudyDesign

# ---------------------------------------------------------------------------
# copula building blocks (own derivation)
#
# With a = log(1-u), b = log(1-v) the Gumbel-Barnett copula is
# C = u + v - 1 + exp(a + b - vt*a*b), hence
#   dC/du   = 1 - (1 - vt*b) exp(b - vt*a*b)
#   dC/dv   = 1 - (1 - vt*a) exp(a - vt*a*b)
#   d2C/dudv = exp(-vt*a*b) [(1 - vt*a)(1 - vt*b) - vt]
# FGM: C = uv(1 + vt(1-u)(1-v)), dC/du = v(1 + vt(1-2u)(1-v)),
# density 1 + vt(1-2u)(1-2v).


def copula_cdf_oracle(family: CopulaFamily, u: float, v: float, vt: float) -> float:
    if family is CopulaFamily.GUMBEL_BARNETT:
        a, b = math.log1p(-u), math.log1p(-v)
        return u + v - 1.0 + math.exp(a + b - vt * a * b)
    return u * v * (1.0 + vt * (1.0 - u) * (1.0 - v))


def cond_cdf_oracle(family: CopulaFamily, u: float, v: float, vt: float) -> float:
    """dC/du at (u, v), the conditional CDF of V given U = u."""
    if v <= 0.0:
        return 0.0
    if v >= 1.0:
        return 1.0
    if family is CopulaFamily.GUMBEL_BARNETT:
        a, b = math.log1p(-u), math.log1p(-v)
        return 1.0 - (1.0 - vt * b) * math.exp(b - vt * a * b)
    return v * (1.0 + vt * (1.0 - 2.0 * u) * (1.0 - v))


def copula_density_oracle(family: CopulaFamily, u: float, v: float, vt: float) -> float:
    if family is CopulaFamily.GUMBEL_BARNETT:
        a, b = math.log1p(-u), math.log1p(-v)
        return math.exp(-vt * a * b) * ((1.0 - vt * a) * (1.0 - vt * b) - vt)
    return 1.0 + vt * (1.0 - 2.0 * u) * (1.0 - 2.0 * v)


def inv_cond_oracle(
    family: CopulaFamily, u: float, p: float, vt: float, tol: float = 1e-14
) -> float:
    """Solve cond_cdf_oracle(u, v) = p for v by plain bisection."""
    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if cond_cdf_oracle(family, u, mid, vt) < p:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# latent density and selection probability (own derivation)
#
# The latent (X, T) density is c(F(x), t/G) * theta*exp(-theta*x) / G with
# F(x) = 1 - exp(-theta*x).  The selection probability is the average over
# T ~ Unif[0, G] of the conditional hit probability
#   P(t <= X <= t+s | T = t) = D2C(F(t+s), t/G) - D2C(F(t), t/G),
# where D2C = dC/dv; a one-dimensional integral, unlike the production
# two-dimensional quadrature of the density.


def latent_density_oracle(params: ModelParams, design: StudyDesign, x: float, t: float) -> float:
    u = -math.expm1(-params.theta * x)
    v = t / design.big_g
    c = copula_density_oracle(params.family, u, v, params.vartheta)
    return c * params.theta * math.exp(-params.theta * x) / design.big_g


def _cond_cdf_given_v(family: CopulaFamily, u: float, v: float, vt: float) -> float:
    """dC/dv at (u, v): conditional CDF of U given V = v, by symmetry."""
    if u <= 0.0:
        return 0.0
    if u >= 1.0:
        return 1.0
    if family is CopulaFamily.GUMBEL_BARNETT:
        a, b = math.log1p(-u), math.log1p(-v)
        return 1.0 - (1.0 - vt * a) * math.exp(a - vt * a * b)
    return u * (1.0 + vt * (1.0 - u) * (1.0 - 2.0 * v))


def alpha_oracle(params: ModelParams, design: StudyDesign) -> float:
    theta, vt = params.theta, params.vartheta
    big_g, s = design.big_g, design.s

    def hit_prob(t: float) -> float:
        v = t / big_g
        u_hi = -math.expm1(-theta * (t + s))
        u_lo = -math.expm1(-theta * t)
        return _cond_cdf_given_v(params.family, u_hi, v, vt) - _cond_cdf_given_v(
            params.family, u_lo, v, vt
        )

    # At large theta the hit probability concentrates near t = 0; split
    # there so the adaptive rule cannot step over the spike.
    cut = min(big_g, 60.0 / theta)
    value, _ = integrate.quad(
        hit_prob, 0.0, cut, epsabs=1e-13, epsrel=1e-12, limit=200
    )
    if cut < big_g:
        tail, _ = integrate.quad(
            hit_prob, cut, big_g, epsabs=1e-13, epsrel=1e-12, limit=200
        )
        value += tail
    return value / big_g


# ---------------------------------------------------------------------------
# finite differences


def central_diff(fn, z: float, h: float) -> float:
    return (fn(z + h) - fn(z - h)) / (2.0 * h)


def fd_gradient(fn, z: np.ndarray, h: np.ndarray | float) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    h = np.broadcast_to(np.asarray(h, dtype=float), z.shape)
    out = np.empty_like(z)
    for i in range(z.size):
        zp, zm = z.copy(), z.copy()
        zp[i] += h[i]
        zm[i] -= h[i]
        out[i] = (fn(zp) - fn(zm)) / (zp[i] - zm[i])
    return out


# ---------------------------------------------------------------------------
# profiled sample size


def profile_n_candidates(
    m: int, alpha_value: float, window: int = 64, tol: float = 1e-8
) -> set[int]:
    """Integer maximizers of the binomial profiling objective, within tol.

    The n-dependent part of the likelihood for M successes out of n
    independent selection trials with probability alpha is
    log C(n, M) + (n - M) log(1 - alpha); searched over a window around
    m/alpha wide enough to contain the maximizer.  The step increment
    log(n(1-alpha)/(n-m)) vanishes as n crosses m/alpha, so at
    exact-integer m/alpha the two neighbors tie and lgamma rounding
    (abs error up to ~1e-9 near n=1e6) cannot order them; every n whose
    objective is within tol of the best is therefore returned.
    """

    def term(n: int) -> float:
        return (
            math.lgamma(n + 1)
            - math.lgamma(n - m + 1)
            + (n - m) * math.log1p(-alpha_value)
        )

    center = max(m, int(m / alpha_value))
    lo = max(m, center - window)
    vals = {n: term(n) for n in range(lo, center + window + 1)}
    best = max(vals.values())
    return {n for n, v in vals.items() if v >= best - tol}

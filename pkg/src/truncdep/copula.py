"""Copula layer of the dependent-truncation lifetime model.

Two one-parameter copula families link an exponential lifetime X (rate
``theta``) to a uniform birth time T on [0, G]:

* Gumbel-Barnett, ``C(u,v) = u + v - 1 + (1-u)(1-v) exp(-vt*log(1-u)*log(1-v))``
  with ``vt in [0, 1)``; it induces negative dependence only.
* Farlie-Gumbel-Morgenstern (FGM), ``C(u,v) = u*v*(1 + vt*(1-u)*(1-v))``
  with ``vt in (-1, 1)``.

This module holds the copula CDF, the conditional CDF ``c_u(v) = dC/du``
and its inverse (the workhorse of conditional-inversion sampling), the
joint density and CDF of (X, T) under the exponential-by-uniform margins,
and Kendall's tau.

Public operations take and return Python floats and validate their
domains.  The ``_*`` helpers are vectorized, assume interior inputs, and
skip validation; the sampling and likelihood modules build on them.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError, InvariantError

# Parameter box constants.  theta is confined to [EPS_THETA, 1/EPS_THETA];
# vartheta stays EPS_VARTHETA away from the degenerate endpoints of each
# family's range.
EPS_THETA = 1e-4
EPS_VARTHETA = 1e-6


class CopulaFamily(enum.Enum):
    """Dispatch tag for the two supported copula families."""

    GUMBEL_BARNETT = "gumbel_barnett"
    FGM = "fgm"


def vartheta_range(family: CopulaFamily) -> tuple[float, float]:
    """Admissible closed interval for the copula parameter of ``family``."""
    if family is CopulaFamily.GUMBEL_BARNETT:
        return (0.0, 1.0 - EPS_VARTHETA)
    return (EPS_VARTHETA - 1.0, 1.0 - EPS_VARTHETA)


@dataclass(frozen=True)
class ModelParams:
    """A parameter point (theta, vartheta) for one copula family.

    Parameters
    ----------
    family : CopulaFamily
    theta : float
        Exponential rate of the lifetime margin, in 1/years.
        Must lie in [EPS_THETA, 1/EPS_THETA].
    vartheta : float
        Copula parameter; family-dependent range, see ``vartheta_range``.

    Construction validates the box and raises DomainError on violation.
    """

    family: CopulaFamily
    theta: float
    vartheta: float

    def __post_init__(self) -> None:
        if not isinstance(self.family, CopulaFamily):
            raise DomainError(f"family must be a CopulaFamily, got {self.family!r}")
        th = self.theta
        if not (math.isfinite(th) and EPS_THETA <= th <= 1.0 / EPS_THETA):
            raise DomainError(
                f"theta={th!r} outside [{EPS_THETA}, {1.0 / EPS_THETA}]"
            )
        lo, hi = vartheta_range(self.family)
        vt = self.vartheta
        if not (math.isfinite(vt) and lo <= vt <= hi):
            raise DomainError(
                f"vartheta={vt!r} outside [{lo}, {hi}] for {self.family.value}"
            )


@dataclass(frozen=True)
class StudyDesign:
    """Study geometry: birth-period length G and observation window s.

    Both are strictly positive, finite, and expressed in years.  Births
    happen uniformly on [0, G]; a unit is observed when its failure falls
    inside the window of length ``s`` that follows the birth period.
    """

    big_g: float
    s: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.big_g) and self.big_g > 0.0):
            raise DomainError(f"big_g={self.big_g!r} must be positive and finite")
        if not (math.isfinite(self.s) and self.s > 0.0):
            raise DomainError(f"s={self.s!r} must be positive and finite")


# ---------------------------------------------------------------------------
# validation helpers


def _check_vartheta(family: CopulaFamily, vartheta: float) -> None:
    lo, hi = vartheta_range(family)
    if not (math.isfinite(vartheta) and lo <= vartheta <= hi):
        raise DomainError(
            f"vartheta={vartheta!r} outside [{lo}, {hi}] for {family.value}"
        )


def _check_unit(name: str, value: float, *, open_interval: bool) -> None:
    ok = math.isfinite(value) and (
        0.0 < value < 1.0 if open_interval else 0.0 <= value <= 1.0
    )
    if not ok:
        kind = "(0,1)" if open_interval else "[0,1]"
        raise DomainError(f"{name}={value!r} outside {kind}")


# ---------------------------------------------------------------------------
# copula CDF and conditionals


def copula_cdf(family: CopulaFamily, u: float, v: float, vartheta: float) -> float:
    """Copula CDF C(u, v).

    Accepts the closed unit square including the boundary, where the
    grounded/uniform-margin values are returned exactly.
    """
    _check_vartheta(family, vartheta)
    _check_unit("u", u, open_interval=False)
    _check_unit("v", v, open_interval=False)
    if family is CopulaFamily.FGM:
        c = u * v * (1.0 + vartheta * (1.0 - u) * (1.0 - v))
        return min(max(c, 0.0), 1.0)
    if u == 0.0 or v == 0.0:
        return 0.0
    if u == 1.0:
        return v
    if v == 1.0:
        return u
    a = math.log1p(-u)
    b = math.log1p(-v)
    # (1-u)(1-v)e^{-vt*a*b} == exp(a + b - vt*a*b), which avoids the
    # underflow of the separate product near the upper boundary.
    c = u + v - 1.0 + math.exp(a + b - vartheta * a * b)
    return min(max(c, 0.0), 1.0)


def _gb_cond_cdf(a, b, vartheta):
    """c_u(v) for Gumbel-Barnett at a = log(1-u), b = log(1-v), interior only."""
    return 1.0 - np.exp(b - vartheta * a * b) * (1.0 - vartheta * b)


def cond_cdf_given_u(family: CopulaFamily, u: float, v: float, vartheta: float) -> float:
    """Conditional CDF c_u(v) = dC(u,v)/du of V given U = u.

    ``u`` must be interior: the Gumbel-Barnett form involves log(1-u).
    Nondecreasing in v with c_u(0) = 0 and c_u(1) = 1.
    """
    _check_vartheta(family, vartheta)
    _check_unit("u", u, open_interval=True)
    _check_unit("v", v, open_interval=False)
    if family is CopulaFamily.FGM:
        c = v + vartheta * (1.0 - 2.0 * u) * v * (1.0 - v)
        return min(max(c, 0.0), 1.0)
    if v == 0.0:
        return 0.0
    if v == 1.0:
        return 1.0
    a = math.log1p(-u)
    b = math.log1p(-v)
    c = float(_gb_cond_cdf(a, b, vartheta))
    return min(max(c, 0.0), 1.0)


def _fgm_inv_cond(u, p, vartheta):
    """Closed-form inverse of the FGM conditional CDF, vectorized.

    Solves k*v^2 - (1+k)*v + p = 0 with k = vartheta*(1-2u) via the
    cancellation-free quadratic root; exact for k = 0.
    """
    k = vartheta * (1.0 - 2.0 * np.asarray(u, dtype=float))
    p = np.asarray(p, dtype=float)
    disc = (1.0 + k) ** 2 - 4.0 * k * p
    return 2.0 * p / ((1.0 + k) + np.sqrt(disc))


def _gb_inv_cond(u, p, vartheta, *, tol=1e-14, max_iter=100):
    """Inverse of the Gumbel-Barnett conditional CDF, vectorized.

    Works in w = -log(1-v) >= 0, where c_u(v) = p becomes

        g(w) = -(1 - vartheta*a) * w + log(1 + vartheta*w) - log(1-p) = 0

    with a = log(1-u) <= 0.  g is strictly decreasing and concave, so a
    Newton iteration started left of the root overshoots once and then
    converges monotonically from the right; a bracket guards against
    floating-point stalls.  |g| <= tol implies the conditional-CDF
    residual |c_u(v) - p| <= (1-p)*|g|.
    """
    u = np.asarray(u, dtype=float)
    p = np.asarray(p, dtype=float)
    a = np.log1p(-u)
    slope = 1.0 - vartheta * a  # >= 1
    target = np.log1p(-p)  # < 0
    if vartheta == 0.0:
        return -np.expm1(target / slope)  # slope == 1, exact root

    w = -target / slope  # g(w0) = log1p(vt*w0) >= 0: start left of the root
    lo = np.array(w, copy=True)
    hi = np.full_like(w, np.inf)
    g = np.log1p(vartheta * w)
    for _ in range(max_iter):
        done = np.abs(g) <= tol
        if done.all():
            break
        gp = vartheta / (1.0 + vartheta * w) - slope  # <= vartheta - 1 < 0
        step = g / gp
        w_new = w - step
        np.copyto(lo, w, where=(g > 0.0) & ~done)
        np.copyto(hi, w, where=(g < 0.0) & ~done)
        # Bisect wherever Newton leaves the current bracket.
        bad = (w_new <= lo) | (w_new >= hi)
        mid = np.where(np.isinf(hi), 2.0 * lo + 1.0, 0.5 * (lo + hi))
        w = np.where(done, w, np.where(bad, mid, w_new))
        g = np.where(
            done, g, -slope * w + np.log1p(vartheta * w) - target
        )
    else:
        if np.max(np.abs(g)) > 1e-12:
            raise ConvergenceError(
                "conditional-CDF inversion did not converge "
                f"(max residual {np.max(np.abs(g)):.3e})"
            )
    return -np.expm1(-w)


def inv_cond_cdf_given_u(
    family: CopulaFamily, u: float, p: float, vartheta: float
) -> float:
    """Inverse v of c_u(v) = p, accurate to |c_u(v) - p| <= 1e-12."""
    _check_vartheta(family, vartheta)
    _check_unit("u", u, open_interval=True)
    _check_unit("p", p, open_interval=True)
    if family is CopulaFamily.FGM:
        v = float(_fgm_inv_cond(u, p, vartheta))
    else:
        v = float(_gb_inv_cond(u, p, vartheta))
    return min(max(v, 5e-324), 1.0 - 1e-16)


# ---------------------------------------------------------------------------
# joint density / CDF of (X, T) under Exp(theta) x Unif[0, G] margins


def _gb_terms(theta, vartheta, big_g, x, t):
    """Stable building blocks of the Gumbel-Barnett joint density.

    Returns (L, B, P, f) elementwise for array x, t in the support:
    L = log(1 - t/G) <= 0, B = 1 - vartheta*L >= 1,
    P = (vartheta*theta*x + 1)*B - vartheta, f = (theta/G) e^{-theta*x*B} P.

    P equals minus the bracket of the printed density and stays >=
    1 - vartheta > 0 on the support; callers assert rather than clamp.
    """
    L = np.log1p(-t / big_g)
    B = 1.0 - vartheta * L
    P = (vartheta * theta * x + 1.0) * B - vartheta
    f = (theta / big_g) * np.exp(-theta * x * B) * P
    return L, B, P, f


def _fgm_terms(theta, vartheta, big_g, x, t):
    """(e^{-theta x}, copula-density factor, f) for FGM, elementwise."""
    ex = np.exp(-theta * x)
    c = 1.0 + vartheta * (2.0 * ex - 1.0) * (1.0 - 2.0 * t / big_g)
    f = (theta / big_g) * ex * c
    return ex, c, f


def _density_arrays(params: ModelParams, design: StudyDesign, x, t):
    """Joint density on arrays of support points; no domain validation."""
    if params.family is CopulaFamily.GUMBEL_BARNETT:
        return _gb_terms(params.theta, params.vartheta, design.big_g, x, t)[3]
    return _fgm_terms(params.theta, params.vartheta, design.big_g, x, t)[2]


def joint_density(params: ModelParams, design: StudyDesign, x: float, t: float) -> float:
    """Joint density f(x, t) of (X, T) at a support point.

    The support is x > 0, 0 < t < G.  For Gumbel-Barnett the printed
    density has a leading minus times a bracket that is negative on the
    support for admissible parameters; the sign is asserted, never
    absolute-valued.
    """
    if not (math.isfinite(x) and x > 0.0):
        raise DomainError(f"x={x!r} outside the support (need x > 0)")
    if not (math.isfinite(t) and 0.0 < t < design.big_g):
        raise DomainError(f"t={t!r} outside the support (need 0 < t < G)")
    if params.family is CopulaFamily.GUMBEL_BARNETT:
        _, _, P, f = _gb_terms(params.theta, params.vartheta, design.big_g, x, t)
        if not P > 0.0:
            raise InvariantError(
                f"density bracket sign violated at x={x}, t={t}: P={float(P)}"
            )
        return float(f)
    _, c, f = _fgm_terms(params.theta, params.vartheta, design.big_g, x, t)
    if not c > 0.0:
        raise InvariantError(
            f"FGM copula-density factor nonpositive at x={x}, t={t}: c={float(c)}"
        )
    return float(f)


def joint_cdf(params: ModelParams, design: StudyDesign, x: float, t: float) -> float:
    """Joint CDF F(x, t) = P{X <= x, T <= t}; total on the real plane.

    Piecewise: 0 when x <= 0 or t <= 0; the lifetime margin 1 - e^{-theta x}
    when t >= G; otherwise the copula applied to the margins.
    """
    if not (math.isfinite(x) and math.isfinite(t)):
        raise DomainError(f"x={x!r}, t={t!r} must be finite")
    if x <= 0.0 or t <= 0.0:
        return 0.0
    theta, vt, big_g = params.theta, params.vartheta, design.big_g
    if t >= big_g:
        return -math.expm1(-theta * x)
    if params.family is CopulaFamily.GUMBEL_BARNETT:
        # t/G - e^{-theta x} + e^{-theta x} (1 - t/G)^{vt*theta*x + 1}
        ex = math.exp(-theta * x)
        c = t / big_g + ex * math.expm1(
            (vt * theta * x + 1.0) * math.log1p(-t / big_g)
        )
        return min(max(c, 0.0), 1.0)
    u = -math.expm1(-theta * x)
    return copula_cdf(CopulaFamily.FGM, u, t / big_g, vt)


# ---------------------------------------------------------------------------
# Kendall's tau

_TAU_NODES = 128


def kendall_tau(family: CopulaFamily, vartheta: float) -> float:
    """Kendall's tau of the copula.

    FGM has the closed form 2*vartheta/9.  Gumbel-Barnett has none, so tau
    is computed as 1 - 4 * int int dC/du * dC/dv du dv with a 128-point
    tensor Gauss-Legendre rule; the integrand is smooth on (0,1)^2 and the
    rule is spectrally accurate.

    Unlike the model operations, tau is defined on the family's full
    copula-valid parameter interval ([0,1] Gumbel-Barnett, [-1,1] FGM),
    including the endpoints the estimation box keeps away from.
    """
    lo, hi = (0.0, 1.0) if family is CopulaFamily.GUMBEL_BARNETT else (-1.0, 1.0)
    if not (math.isfinite(vartheta) and lo <= vartheta <= hi):
        raise DomainError(
            f"vartheta={vartheta!r} outside [{lo}, {hi}] for {family.value}"
        )
    if family is CopulaFamily.FGM:
        return 2.0 * vartheta / 9.0
    if vartheta == 0.0:
        return 0.0
    nodes, weights = np.polynomial.legendre.leggauss(_TAU_NODES)
    q = 0.5 * (nodes + 1.0)
    w = 0.5 * weights
    a = np.log1p(-q)[:, None]  # log(1-u), column
    b = np.log1p(-q)[None, :]  # log(1-v), row
    du = _gb_cond_cdf(a, b, vartheta)
    dv = 1.0 - np.exp(a - vartheta * a * b) * (1.0 - vartheta * a)
    return float(1.0 - 4.0 * (w @ (du * dv) @ w))

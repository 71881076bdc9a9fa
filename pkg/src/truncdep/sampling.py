"""Latent-pair simulation and the truncation rule.

Latent pairs (X, T) are generated by conditional inversion: with U, V'
independent Unif(0,1), set V = (c_u)^{-1}(V') at u = U, then
X = -log(1-U)/theta and T = G*V.  A pair is observed only when it falls
in the truncation region D = {0 < t < G, t <= x <= t+s}; ``truncate``
applies that rule and ``simulate_truncated`` composes both steps.

Every latent draw consumes exactly two uniforms from the supplied
generator in a fixed order (U first), so streams are reproducible across
batch sizes and thread counts.  Exact zeros (probability 2^-53 per
uniform) are redrawn rather than clamped: U = 0 would put X on the
support boundary and V' = 0 is outside the inverse-CDF domain.  NumPy's
``random()`` never returns 1.0, so the infinite-lifetime case U = 1
cannot occur; a redraw guard covers it anyway for foreign generators.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .copula import (
    CopulaFamily,
    ModelParams,
    StudyDesign,
    _fgm_inv_cond,
    _gb_inv_cond,
)
from .errors import DataError, DomainError


@dataclass(frozen=True, slots=True)
class LatentPair:
    """A latent (lifetime, age-at-study-start) pair; x >= 0, 0 <= t <= G."""

    x: float
    t: float


@dataclass(frozen=True, slots=True)
class ObservedPair:
    """An observed pair, i.e. a latent pair that fell in D."""

    x_tilde: float
    t_tilde: float


@dataclass(frozen=True)
class TruncatedSample:
    """An ordered collection of observed pairs under one study design.

    Parameters
    ----------
    observations : tuple of ObservedPair
        Every pair must satisfy 0 < t <= x <= t+s and t < G; construction
        validates this against ``design`` and raises DataError otherwise.
    design : StudyDesign
    n_latent : int or None
        The latent sample size, known only in simulation.

    The float arrays backing the observations are built once and exposed
    through ``x_arr``/``t_arr`` for vectorized consumers.
    """

    observations: tuple[ObservedPair, ...]
    design: StudyDesign
    n_latent: int | None = None
    _x: np.ndarray = field(init=False, repr=False, compare=False)
    _t: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        obs = tuple(self.observations)
        object.__setattr__(self, "observations", obs)
        x = np.fromiter((o.x_tilde for o in obs), dtype=float, count=len(obs))
        t = np.fromiter((o.t_tilde for o in obs), dtype=float, count=len(obs))
        ok = (0.0 < t) & (t < self.design.big_g) & (t <= x) & (x <= t + self.design.s)
        if not bool(np.all(ok)):
            bad = int(np.argmin(ok))
            raise DataError(
                f"observation {bad} = ({x[bad]}, {t[bad]}) outside D "
                f"for G={self.design.big_g}, s={self.design.s}"
            )
        if self.n_latent is not None:
            if self.n_latent < 1 or self.n_latent != int(self.n_latent):
                raise DataError(f"n_latent={self.n_latent!r} must be a positive integer")
            if len(obs) > self.n_latent:
                raise DataError(
                    f"M={len(obs)} exceeds n_latent={self.n_latent}"
                )
        x.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "_x", x)
        object.__setattr__(self, "_t", t)

    @property
    def m(self) -> int:
        """Number of observations M."""
        return len(self.observations)

    @property
    def x_arr(self) -> np.ndarray:
        return self._x

    @property
    def t_arr(self) -> np.ndarray:
        return self._t

    @classmethod
    def from_arrays(
        cls,
        x: np.ndarray,
        t: np.ndarray,
        design: StudyDesign,
        n_latent: int | None = None,
    ) -> "TruncatedSample":
        obs = tuple(
            ObservedPair(float(xi), float(ti)) for xi, ti in zip(x, t, strict=True)
        )
        return cls(observations=obs, design=design, n_latent=n_latent)


def _draw_uniform_pairs(rng: np.random.Generator, n: int) -> np.ndarray:
    """(n, 2) uniforms; entries equal to 0 or 1 are redrawn in place."""
    u = rng.random((n, 2))
    bad = (u == 0.0) | (u == 1.0)
    while bad.any():
        u[bad] = rng.random(int(bad.sum()))
        bad = (u == 0.0) | (u == 1.0)
    return u


def _latent_from_uniforms(
    params: ModelParams, design: StudyDesign, uv: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    u, p = uv[:, 0], uv[:, 1]
    if params.family is CopulaFamily.GUMBEL_BARNETT:
        v = _gb_inv_cond(u, p, params.vartheta)
    else:
        v = _fgm_inv_cond(u, p, params.vartheta)
    x = -np.log1p(-u) / params.theta
    t = design.big_g * v
    return x, t


def _draw_latent_arrays(
    params: ModelParams, design: StudyDesign, n: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    return _latent_from_uniforms(params, design, _draw_uniform_pairs(rng, n))


def draw_latent(
    params: ModelParams, design: StudyDesign, rng: np.random.Generator
) -> LatentPair:
    """One latent pair by conditional inversion; consumes two uniforms."""
    x, t = _draw_latent_arrays(params, design, 1, rng)
    return LatentPair(float(x[0]), float(t[0]))


def _in_region(x: np.ndarray, t: np.ndarray, design: StudyDesign) -> np.ndarray:
    return (0.0 < t) & (t < design.big_g) & (t <= x) & (x <= t + design.s)


def truncate(
    latent: Sequence[LatentPair] | Iterable[LatentPair], design: StudyDesign
) -> TruncatedSample:
    """Keep the latent pairs lying in D, preserving order.

    Pairs with t exactly 0 or G sit on a probability-zero boundary and
    are dropped.
    """
    latent = list(latent)
    x = np.fromiter((p.x for p in latent), dtype=float, count=len(latent))
    t = np.fromiter((p.t for p in latent), dtype=float, count=len(latent))
    keep = _in_region(x, t, design)
    return TruncatedSample.from_arrays(
        x[keep], t[keep], design, n_latent=len(latent) if latent else None
    )


def simulate_truncated(
    params: ModelParams, design: StudyDesign, n: int, rng: np.random.Generator
) -> TruncatedSample:
    """Draw n latent pairs and truncate, recording n_latent = n.

    Equivalent to ``truncate([draw_latent(...) for _ in range(n)], design)``
    drawn from the same stream, but vectorized.
    """
    if n < 1 or n != int(n):
        raise DomainError(f"n={n!r} must be a positive integer")
    x, t = _draw_latent_arrays(params, design, int(n), rng)
    keep = _in_region(x, t, design)
    return TruncatedSample.from_arrays(x[keep], t[keep], design, n_latent=int(n))

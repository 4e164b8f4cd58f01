"""Core model definitions: parameters, states, and vector fields.

The model couples three deterministic dynamics on well-mixed populations:

* an SIR epidemic with birth/death rate ``mu`` in which newborns are
  vaccinated with probability ``x`` (entering the recovered class),
* imitation dynamics for the vaccinated fraction ``x``, driven by the
  payoff gap between the perceived vaccination cost ``V(n)`` and the
  expected infection cost ``f * C``,
* majority-rule opinion dynamics for the perceived vaccination risk
  ``n``, biased by the side-effect parameter ``theta`` so that the
  unvaccinated push the risk up more strongly than the vaccinated push
  it down.

Two variants are exposed.  The full five-dimensional system evolves
``(S, I, R, x, n)`` with the behavior/opinion blocks slowed down by the
time-scale factors ``eps1`` and ``eps2``.  The reduced two-dimensional
system evolves ``(x, n)`` against the epidemic's equilibrium infection
probability, which depends only on the basic reproduction ratio ``r0``;
it is the weak-selection, fast-epidemic limit of the full model.

Every function here is pure; the scalar cores are numba-compiled and are
reused verbatim by the integration kernels so that slow and fast code
paths produce bit-identical trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
from numba import njit

from .errors import DegenerateParameterError, DomainError, InvalidParameterError

__all__ = [
    "ModelParams",
    "ReducedState",
    "FullState",
    "perceived_cost",
    "infection_prob_dynamic",
    "infection_prob_equilibrium",
    "fermi_vacc_rate",
    "reduced_rhs",
    "full_rhs",
]

# Relative slack allowed between an explicit r0 and beta_t/(gamma+mu).
_R0_CONSISTENCY_TOL = 1e-12


class ReducedState(NamedTuple):
    """Point of the two-dimensional system: vaccinated fraction and perceived risk."""

    x: float
    n: float


class FullState(NamedTuple):
    """Point of the five-dimensional system, all components in [0, 1]."""

    s: float
    i: float
    r: float
    x: float
    n: float


@dataclass(frozen=True)
class ModelParams:
    """All rate constants, costs, biases, and time-scale factors of the model.

    ``beta_t`` is the epidemic transmission rate and ``sel_strength`` the
    imitation (Fermi) selection intensity; the two are deliberately kept
    as separate fields even though much of the literature writes both as
    beta.  For the full model ``r0`` must equal ``beta_t/(gamma+mu)``;
    use :meth:`full` to derive it.  For the reduced model ``r0`` is a
    free input and the SIR rates may stay at zero; use :meth:`reduced`.
    """

    r0: float
    cost_infection: float
    cost_vacc_high: float
    cost_vacc_low: float
    theta: float
    mu: float = 0.0
    beta_t: float = 0.0
    gamma: float = 0.0
    eps1: float = 1.0
    eps2: float = 1.0
    sel_strength: float = 0.0

    def __post_init__(self):
        c, vh, vl = self.cost_infection, self.cost_vacc_high, self.cost_vacc_low
        if not (c > vh > vl > 0.0):
            raise InvalidParameterError(
                f"costs must satisfy cost_infection > cost_vacc_high > "
                f"cost_vacc_low > 0, got ({c}, {vh}, {vl})"
            )
        if not self.theta > 0.0:
            raise InvalidParameterError(f"theta must be positive, got {self.theta}")
        if self.mu < 0.0 or self.gamma < 0.0 or self.beta_t < 0.0:
            raise InvalidParameterError("mu, gamma, beta_t must be nonnegative")
        if not 0.0 < self.eps1 <= 1.0 or not 0.0 < self.eps2 <= 1.0:
            raise InvalidParameterError("eps1, eps2 must lie in (0, 1]")
        if self.sel_strength < 0.0:
            raise InvalidParameterError("sel_strength must be nonnegative")
        if not self.r0 > 0.0:
            raise InvalidParameterError(f"r0 must be positive, got {self.r0}")
        if self.beta_t > 0.0:
            if self.gamma + self.mu <= 0.0:
                raise InvalidParameterError(
                    "full model needs gamma + mu > 0 to define r0"
                )
            derived = self.beta_t / (self.gamma + self.mu)
            if abs(self.r0 - derived) > _R0_CONSISTENCY_TOL * max(1.0, derived):
                raise InvalidParameterError(
                    f"explicit r0={self.r0!r} inconsistent with "
                    f"beta_t/(gamma+mu)={derived!r}"
                )

    @classmethod
    def reduced(
        cls,
        r0: float,
        cost_infection: float,
        cost_vacc_high: float,
        cost_vacc_low: float,
        theta: float,
        eps1: float = 1.0,
        eps2: float = 1.0,
        sel_strength: float = 0.0,
    ) -> "ModelParams":
        """Parameters for the two-dimensional system; r0 is a free input."""
        return cls(
            r0=r0,
            cost_infection=cost_infection,
            cost_vacc_high=cost_vacc_high,
            cost_vacc_low=cost_vacc_low,
            theta=theta,
            eps1=eps1,
            eps2=eps2,
            sel_strength=sel_strength,
        )

    @classmethod
    def full(
        cls,
        mu: float,
        beta_t: float,
        gamma: float,
        cost_infection: float,
        cost_vacc_high: float,
        cost_vacc_low: float,
        theta: float,
        eps1: float,
        eps2: float,
        sel_strength: float = 0.0,
    ) -> "ModelParams":
        """Parameters for the five-dimensional system; r0 is derived from the rates."""
        if gamma + mu <= 0.0:
            raise InvalidParameterError("full model needs gamma + mu > 0")
        return cls(
            r0=beta_t / (gamma + mu),
            cost_infection=cost_infection,
            cost_vacc_high=cost_vacc_high,
            cost_vacc_low=cost_vacc_low,
            theta=theta,
            mu=mu,
            beta_t=beta_t,
            gamma=gamma,
            eps1=eps1,
            eps2=eps2,
            sel_strength=sel_strength,
        )

    def with_theta(self, theta: float) -> "ModelParams":
        return replace(self, theta=theta)


# ---------------------------------------------------------------------------
# Scalar cores (numba).  The integration kernels call these directly, so any
# change here changes every code path identically.
# ---------------------------------------------------------------------------


@njit(cache=True)
def _perceived_cost_s(n, vh, vl):
    return n * vh + (1.0 - n) * vl


@njit(cache=True)
def _infection_prob_equilibrium_s(x, r0):
    # herd-immunity branch: zero infection probability at and above 1 - 1/r0
    if x < 1.0 - 1.0 / r0:
        return 1.0 - 1.0 / (r0 * (1.0 - x))
    return 0.0


@njit(cache=True)
def _reduced_rhs_s(x, n, c, r0, vh, vl, theta):
    f = _infection_prob_equilibrium_s(x, r0)
    v = _perceived_cost_s(n, vh, vl)
    dx = x * (1.0 - x) * (f * c - v)
    dn = n * (1.0 - n) * (-x + (1.0 + theta) * (1.0 - x))
    return dx, dn


@njit(cache=True)
def _full_rhs_s(s, i, r, x, n, mu, beta_t, gamma, c, vh, vl, theta, eps1, eps2):
    f = beta_t * i / (beta_t * i + mu)
    v = _perceived_cost_s(n, vh, vl)
    ds = mu * (1.0 - x) - beta_t * s * i - mu * s
    di = beta_t * s * i - gamma * i - mu * i
    dr = mu * x + gamma * i - mu * r
    dx = eps1 * x * (1.0 - x) * (f * c - v)
    dn = eps2 * n * (1.0 - n) * (-x + (1.0 + theta) * (1.0 - x))
    return ds, di, dr, dx, dn


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------


def perceived_cost(n: float, p: ModelParams) -> float:
    """Perceived vaccination cost, linear between the low- and high-risk costs."""
    if not 0.0 <= n <= 1.0:
        raise DomainError(f"perceived risk must lie in [0, 1], got {n}")
    return _perceived_cost_s(n, p.cost_vacc_high, p.cost_vacc_low)


def infection_prob_dynamic(i: float, p: ModelParams) -> float:
    """Instantaneous infection probability of a susceptible, beta*I/(beta*I + mu)."""
    if i < 0.0:
        raise DomainError(f"infected fraction must be nonnegative, got {i}")
    denom = p.beta_t * i + p.mu
    if denom == 0.0:
        raise DegenerateParameterError("beta_t*i + mu = 0: infection probability undefined")
    return p.beta_t * i / denom


def infection_prob_equilibrium(x: float, p: ModelParams) -> float:
    """Season-equilibrium infection probability of the unvaccinated.

    Equals 1 - 1/(r0*(1-x)) below the herd-immunity level 1 - 1/r0 and
    zero at or above it; continuous at the join.
    """
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"vaccinated fraction must lie in [0, 1], got {x}")
    return _infection_prob_equilibrium_s(x, p.r0)


def fermi_vacc_rate(st: ReducedState, f: float, p: ModelParams) -> float:
    """Imitation-dynamics rate of change of the vaccinated fraction.

    Pairwise comparison via the Fermi rule at selection intensity
    ``sel_strength``: the unvaccinated are split into a healthy part
    (weight 1-f, payoff 0) and an infected part (weight f, payoff -C),
    each compared against the vaccinated payoff -V(n).  For
    ``sel_strength -> 0`` this reduces to (s/2) * x(1-x) * [f*C - V(n)],
    the replicator-like form used by the shipped vector fields.
    """
    if not 0.0 <= f <= 1.0:
        raise DomainError(f"infection probability must lie in [0, 1], got {f}")
    x, n = st
    v = perceived_cost(n, p)
    half_sel = 0.5 * p.sel_strength
    return x * (1.0 - x) * (
        (1.0 - f) * math.tanh(half_sel * (-v))
        + f * math.tanh(half_sel * (-v + p.cost_infection))
    )


def reduced_rhs(st: ReducedState, p: ModelParams) -> tuple[float, float]:
    """Vector field (dx, dn) of the two-dimensional system."""
    x, n = st
    return _reduced_rhs_s(
        float(x), float(n), p.cost_infection, p.r0,
        p.cost_vacc_high, p.cost_vacc_low, p.theta,
    )


def full_rhs(st: FullState, p: ModelParams) -> tuple[float, float, float, float, float]:
    """Vector field (dS, dI, dR, dx, dn) of the five-dimensional system."""
    s, i, r, x, n = st
    return _full_rhs_s(
        float(s), float(i), float(r), float(x), float(n),
        p.mu, p.beta_t, p.gamma, p.cost_infection,
        p.cost_vacc_high, p.cost_vacc_low, p.theta, p.eps1, p.eps2,
    )


def reduced_rhs_array(y: np.ndarray, p: ModelParams) -> np.ndarray:
    """Array-in/array-out wrapper around :func:`reduced_rhs` for integrators."""
    dx, dn = _reduced_rhs_s(
        y[0], y[1], p.cost_infection, p.r0,
        p.cost_vacc_high, p.cost_vacc_low, p.theta,
    )
    return np.array([dx, dn])


def full_rhs_array(y: np.ndarray, p: ModelParams, theta: float | None = None) -> np.ndarray:
    """Array wrapper around :func:`full_rhs`; ``theta`` overrides the base bias."""
    th = p.theta if theta is None else theta
    out = _full_rhs_s(
        y[0], y[1], y[2], y[3], y[4],
        p.mu, p.beta_t, p.gamma, p.cost_infection,
        p.cost_vacc_high, p.cost_vacc_low, th, p.eps1, p.eps2,
    )
    return np.array(out)

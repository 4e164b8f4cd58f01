"""Shared fixtures and parameter-draw helpers."""

from __future__ import annotations

import numpy as np
import pytest

from vaxgame import ModelParams
from vaxgame.equilibria import classify_regime, regime_thresholds
from vaxgame.errors import BoundaryRegimeError


@pytest.fixture
def p_ref() -> ModelParams:
    """Reference bistable parameter set (case 1, subcase 4)."""
    return ModelParams.reduced(
        r0=3.5, cost_infection=10.0, cost_vacc_high=3.0, cost_vacc_low=1.0, theta=1.0
    )


@pytest.fixture
def p_mid() -> ModelParams:
    """Second bistable set with the saddle at (0.6, 0.5)."""
    return ModelParams.reduced(
        r0=4.0, cost_infection=4.0, cost_vacc_high=2.0, cost_vacc_low=1.0, theta=0.5
    )


@pytest.fixture
def p_full() -> ModelParams:
    """Full-model rates used by the time-scale experiments (r0 = 4)."""
    return ModelParams.full(
        mu=1.0, beta_t=16.0, gamma=3.0, cost_infection=10.0,
        cost_vacc_high=3.0, cost_vacc_low=1.0, theta=1.0, eps1=0.01, eps2=0.01,
    )


def draw_params(rng: np.random.Generator, *, boundary_margin: float = 1e-6) -> ModelParams:
    """Random parameters respecting the invariants, away from regime boundaries."""
    while True:
        c = rng.uniform(1.5, 20.0)
        vh = c * rng.uniform(0.15, 0.9)
        vl = vh * rng.uniform(0.05, 0.9)
        theta = rng.uniform(0.02, 3.0)
        p = ModelParams.reduced(
            r0=rng.uniform(0.2, 12.0), cost_infection=c,
            cost_vacc_high=vh, cost_vacc_low=vl, theta=theta,
        )
        ra, rb, rc, rd = regime_thresholds(p)
        if abs(rc - rb) <= boundary_margin * rb:
            continue
        if any(abs(p.r0 - b) <= boundary_margin * b for b in (ra, rb, rc, rd)):
            continue
        try:
            classify_regime(p)
        except BoundaryRegimeError:  # pragma: no cover - excluded by margins
            continue
        return p


def draw_bistable_params(rng: np.random.Generator) -> ModelParams:
    """Random parameters inside the saddle-existence window (two attractors)."""
    while True:
        c = rng.uniform(1.5, 20.0)
        vh = c * rng.uniform(0.15, 0.9)
        vl = vh * rng.uniform(0.05, 0.9)
        theta = rng.uniform(0.02, 3.0)
        rc = (2.0 + theta) * c / (c - vl)
        rd = (2.0 + theta) * c / (c - vh)
        r0 = rc + rng.uniform(0.05, 0.95) * (rd - rc)
        p = ModelParams.reduced(
            r0=r0, cost_infection=c, cost_vacc_high=vh, cost_vacc_low=vl, theta=theta
        )
        if classify_regime(p).bistable:
            return p

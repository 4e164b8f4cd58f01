"""Fixed-step RK4 integration with clamping, policies, and convergence detection.

The integrator is deliberately plain: classic fourth-order Runge-Kutta
at a fixed step, every state component clamped to the unit interval
after each step, and steady state declared when the max-norm of the
vector field stays below a tolerance for a whole detection window.
Field-norm detection (rather than state displacement) keeps slow transits
past the interior saddle from being mistaken for convergence, and the
fixed step makes every run bit-reproducible.

Model trajectories are produced by numba kernels; :func:`integrate` is
the generic pure-Python twin used for arbitrary vector fields and as a
reference implementation (it performs the exact same floating-point
operations, so it agrees with the kernels bit for bit).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .control import ControlPolicy, effective_theta
from .dynamics import FullState, ModelParams
from .errors import (
    AmbiguousEndpointError,
    DegenerateParameterError,
    DomainError,
    IntegrationDivergedError,
    InvalidParameterError,
)

__all__ = [
    "IntegrationConfig",
    "Trajectory",
    "integrate",
    "simulate_reduced",
    "simulate_full",
    "full_initial_state",
    "classify_endpoint",
    "trajectory_csv",
]

HORIZON_REACHED = "horizon_reached"
CONVERGED = "converged"
POLICY_STOPPED = "policy_stopped"

_STATUS_NAMES = {
    _kernels.STATUS_HORIZON: HORIZON_REACHED,
    _kernels.STATUS_CONVERGED: CONVERGED,
}

_POLICY_KINDS = {"none": _kernels.POLICY_NONE,
                 "threshold": _kernels.POLICY_THRESHOLD,
                 "window": _kernels.POLICY_WINDOW}

# Interior clamps larger than this are reported via Trajectory.clamp_warning.
CLAMP_WARN = 1e-9


@dataclass(frozen=True)
class IntegrationConfig:
    """Step size, horizon, sampling, and steady-state detection settings."""

    dt: float = 1e-3
    t_max: float = 100.0
    record_every: int = 1
    clamp_eps: float = 0.0
    convergence_tol: float = 1e-9
    convergence_window: float = 10.0

    def __post_init__(self):
        if not self.dt > 0.0:
            raise InvalidParameterError(f"dt must be positive, got {self.dt}")
        if not self.t_max > 0.0:
            raise InvalidParameterError(f"t_max must be positive, got {self.t_max}")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise InvalidParameterError(
                f"record_every must be an integer >= 1, got {self.record_every}"
            )
        if not self.convergence_tol > 0.0:
            raise InvalidParameterError("convergence_tol must be positive")
        if self.convergence_window < 0.0:
            raise InvalidParameterError("convergence_window must be nonnegative")
        if self.clamp_eps < 0.0:
            raise InvalidParameterError("clamp_eps must be nonnegative")

    @property
    def n_steps(self) -> int:
        n = int(round(self.t_max / self.dt))
        if n < 1:
            raise InvalidParameterError("t_max shorter than one step")
        return n

    @property
    def win_steps(self) -> int:
        return max(1, int(math.ceil(self.convergence_window / self.dt)))

    @property
    def bounds(self) -> tuple[float, float]:
        return (-self.clamp_eps, 1.0 + self.clamp_eps)


@dataclass
class Trajectory:
    """Recorded samples of one integration run.

    ``states`` has one row per sample; columns are (x, n) for the reduced
    model and (S, I, R, x, n) for the full model.  ``thetas`` carries the
    bias in effect at each sample time for full-model runs.
    ``policy_events`` lists (time, old_theta, new_theta) rewrites.
    Instances are treated as immutable once returned.
    """

    times: np.ndarray
    states: np.ndarray
    terminal_reason: str
    model: str = "generic"
    thetas: np.ndarray | None = None
    policy_events: list[tuple[float, float, float]] = field(default_factory=list)
    max_clamp: float = 0.0

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def final_time(self) -> float:
        return float(self.times[-1])

    @property
    def clamp_warning(self) -> bool:
        """True when some step was clipped by more than the benign round-off level."""
        return self.max_clamp > CLAMP_WARN

    def xn(self) -> np.ndarray:
        """The (x, n) sample columns regardless of model."""
        if self.model == "full":
            return self.states[:, 3:5]
        return self.states[:, 0:2]


def _sample_capacity(cfg: IntegrationConfig) -> int:
    return cfg.n_steps // int(cfg.record_every) + 2


def simulate_reduced(p: ModelParams, x0: float, n0: float,
                     cfg: IntegrationConfig) -> Trajectory:
    """Integrate the reduced (x, n) system from (x0, n0)."""
    if not (0.0 <= x0 <= 1.0 and 0.0 <= n0 <= 1.0):
        raise DomainError(f"initial state ({x0}, {n0}) outside the unit square")
    cap = _sample_capacity(cfg)
    out_t = np.empty(cap)
    out_x = np.empty(cap)
    out_n = np.empty(cap)
    lo, hi = cfg.bounds
    n_samples, status, steps, max_clamp = _kernels._reduced_traj(
        float(x0), float(n0),
        p.cost_infection, p.r0, p.cost_vacc_high, p.cost_vacc_low, p.theta,
        lo, hi, cfg.dt, cfg.n_steps, cfg.convergence_tol, cfg.win_steps,
        int(cfg.record_every), out_t, out_x, out_n,
    )
    if status == _kernels.STATUS_DIVERGED:
        raise IntegrationDivergedError(steps * cfg.dt)
    return Trajectory(
        times=out_t[:n_samples].copy(),
        states=np.column_stack((out_x[:n_samples], out_n[:n_samples])),
        terminal_reason=_STATUS_NAMES[status],
        model="reduced",
        max_clamp=max_clamp,
    )


def full_initial_state(x0: float, n0: float, i0: float = 0.1) -> FullState:
    """Season-start state: infected seed i0, no recovered, the rest susceptible."""
    if not (0.0 <= x0 <= 1.0 and 0.0 <= n0 <= 1.0):
        raise DomainError(f"(x0, n0)=({x0}, {n0}) outside the unit square")
    if not 0.0 <= i0 <= 1.0:
        raise DomainError(f"i0 must lie in [0, 1], got {i0}")
    s0 = 1.0 - i0 - x0
    if s0 < 0.0:
        raise DomainError(f"i0 + x0 = {i0 + x0} exceeds 1; no susceptibles left")
    return FullState(s=s0, i=i0, r=0.0, x=x0, n=n0)


def simulate_full(p: ModelParams, init: FullState | Sequence[float],
                  cfg: IntegrationConfig,
                  policy: ControlPolicy | None = None) -> Trajectory:
    """Integrate the full (S, I, R, x, n) system, optionally under a policy."""
    if p.beta_t <= 0.0 or p.mu <= 0.0:
        raise DegenerateParameterError(
            "full model needs beta_t > 0 and mu > 0 (otherwise the infection "
            "probability beta*I/(beta*I + mu) is ill-defined at I = 0)"
        )
    y0 = [float(v) for v in init]
    if len(y0) != 5:
        raise DomainError(f"full state needs 5 components, got {len(y0)}")
    for v in y0:
        if not 0.0 <= v <= 1.0:
            raise DomainError(f"initial component {v} outside [0, 1]")
    pol = policy or ControlPolicy.none()
    cap = _sample_capacity(cfg)
    out_t = np.empty(cap)
    out_states = np.empty((cap, 5))
    out_theta = np.empty(cap)
    out_events = np.empty((4096, 3))
    lo, hi = cfg.bounds
    n_samples, status, steps, max_clamp, n_events = _kernels._full_traj(
        y0[0], y0[1], y0[2], y0[3], y0[4],
        p.mu, p.beta_t, p.gamma, p.cost_infection,
        p.cost_vacc_high, p.cost_vacc_low, p.theta, p.eps1, p.eps2,
        _POLICY_KINDS[pol.kind], pol.i_threshold, pol.t_start, pol.t_end,
        pol.theta_controlled, pol.latching,
        lo, hi, cfg.dt, cfg.n_steps, cfg.convergence_tol, cfg.win_steps,
        int(cfg.record_every), out_t, out_states, out_theta, out_events,
    )
    if status == _kernels.STATUS_DIVERGED:
        raise IntegrationDivergedError(steps * cfg.dt)
    events = [
        (float(out_events[k, 0]), float(out_events[k, 1]), float(out_events[k, 2]))
        for k in range(min(n_events, out_events.shape[0]))
    ]
    return Trajectory(
        times=out_t[:n_samples].copy(),
        states=out_states[:n_samples].copy(),
        terminal_reason=_STATUS_NAMES[status],
        model="full",
        thetas=out_theta[:n_samples].copy(),
        policy_events=events,
        max_clamp=max_clamp,
    )


def integrate(rhs: Callable, y0: Sequence[float], cfg: IntegrationConfig,
              policy: ControlPolicy | None = None,
              base_theta: float | None = None,
              model: str = "generic") -> Trajectory:
    """Generic pure-Python RK4 driver for an arbitrary autonomous field.

    Without a policy, ``rhs(y)`` must return the derivative array.  With
    one, ``rhs(y, theta)`` is used and the policy may rewrite theta
    before every step from (t, state); ``base_theta`` is then required.
    Operation order matches the numba kernels exactly.
    """
    y = np.asarray(y0, dtype=float).copy()
    lo, hi = cfg.bounds
    dt = cfg.dt
    half = 0.5 * dt
    sixth = dt / 6.0
    n_steps = cfg.n_steps
    win_steps = cfg.win_steps
    record_every = int(cfg.record_every)

    pol = policy or ControlPolicy.none()
    if pol.kind != "none" and base_theta is None:
        raise InvalidParameterError("base_theta is required when a policy is supplied")

    def field(state, th):
        return rhs(state, th) if pol.kind != "none" or base_theta is not None else rhs(state)

    latched = False
    theta_prev = base_theta if base_theta is not None else math.nan
    events: list[tuple[float, float, float]] = []

    def peek(t, state):
        if base_theta is None:
            return math.nan
        return effective_theta(pol, t, state, base_theta, already_triggered=latched)

    times = [0.0]
    samples = [y.copy()]
    thetas = [peek(0.0, y)]
    streak = 0
    max_clamp = 0.0
    reason = HORIZON_REACHED
    for step in range(n_steps):
        t = step * dt
        th = peek(t, y)
        if pol.kind == "threshold" and pol.latching and not latched and y[1] >= pol.i_threshold:
            latched = True
        if base_theta is not None and th != theta_prev:
            events.append((t, theta_prev, th))
            theta_prev = th

        k1 = field(y, th)
        if np.max(np.abs(k1)) < cfg.convergence_tol:
            streak += 1
            if streak >= win_steps:
                reason = CONVERGED
                if step % record_every != 0:
                    times.append(t)
                    samples.append(y.copy())
                    thetas.append(th)
                break
        else:
            streak = 0
        k2 = field(y + half * k1, th)
        k3 = field(y + half * k2, th)
        k4 = field(y + dt * k3, th)
        y = y + sixth * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise IntegrationDivergedError((step + 1) * dt)
        clipped = np.minimum(np.maximum(y, lo), hi)
        exc = float(np.max(np.abs(y - clipped)))
        if exc > max_clamp:
            max_clamp = exc
        y = clipped
        if (step + 1) % record_every == 0 or step + 1 == n_steps:
            times.append((step + 1) * dt)
            samples.append(y.copy())
            thetas.append(peek((step + 1) * dt, y))

    return Trajectory(
        times=np.array(times),
        states=np.vstack(samples),
        terminal_reason=reason,
        model=model,
        thetas=np.array(thetas) if base_theta is not None else None,
        policy_events=events,
        max_clamp=max_clamp,
    )


def _candidate_xy(candidate) -> tuple[float, float]:
    if hasattr(candidate, "x") and hasattr(candidate, "n"):
        return float(candidate.x), float(candidate.n)
    cx, cn = candidate
    return float(cx), float(cn)


def match_endpoint(x: float, n: float, candidates: Sequence, tol: float) -> int | None:
    """Index of the unique candidate within ``tol`` of (x, n), else None."""
    hits = []
    for k, cand in enumerate(candidates):
        cx, cn = _candidate_xy(cand)
        if math.hypot(x - cx, n - cn) <= tol:
            hits.append(k)
    if len(hits) > 1:
        raise AmbiguousEndpointError(
            f"candidates {hits} all lie within tol={tol:g} of ({x:g}, {n:g})"
        )
    return hits[0] if hits else None


def classify_endpoint(traj: Trajectory, candidates: Sequence,
                      tol: float = 1e-3) -> int | None:
    """Match a converged trajectory's endpoint to one candidate fixed point.

    Returns the candidate index, or None (unresolved) when the run hit
    the horizon without converging or no candidate lies within ``tol``
    (Euclidean distance in the (x, n) plane).  Two candidates inside the
    tolerance raise :class:`AmbiguousEndpointError`.
    """
    if not candidates:
        raise DomainError("candidates must be nonempty")
    if traj.terminal_reason != CONVERGED:
        return None
    x, n = traj.xn()[-1]
    return match_endpoint(float(x), float(n), candidates, tol)


def trajectory_csv(traj: Trajectory) -> str:
    """CSV text for a model trajectory (12 significant digits per value)."""
    if traj.model == "full":
        header = "t,S,I,R,x,n,theta"
        thetas = traj.thetas
        if thetas is None:
            thetas = np.full(traj.times.shape, math.nan)
        rows = (
            f"{t:.12g},{s[0]:.12g},{s[1]:.12g},{s[2]:.12g},{s[3]:.12g},"
            f"{s[4]:.12g},{th:.12g}"
            for t, s, th in zip(traj.times, traj.states, thetas)
        )
    elif traj.model == "reduced":
        header = "t,x,n"
        rows = (
            f"{t:.12g},{s[0]:.12g},{s[1]:.12g}"
            for t, s in zip(traj.times, traj.states)
        )
    else:
        raise DomainError(f"no CSV schema for model {traj.model!r}")
    return header + "\n" + "\n".join(rows) + "\n"

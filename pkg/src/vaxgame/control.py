"""Side-effect-bias control policies and controlled-vs-uncontrolled metrics.

A policy rewrites the bias ``theta`` during integration of the full
model, either when the infected fraction crosses a trigger level
(optionally latching into the controlled value for the rest of the run)
or inside a fixed time window.  Policies are immutable values; their
evaluation is pure given the time, the state, and the latch flag, so
batches of controlled runs can execute in parallel.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .errors import ComparisonError, InvalidParameterError

if TYPE_CHECKING:  # pragma: no cover
    from .integrate import Trajectory

__all__ = ["ControlPolicy", "ControlReport", "effective_theta", "compare_runs"]

KIND_NONE = "none"
KIND_THRESHOLD = "threshold"
KIND_WINDOW = "window"


@dataclass(frozen=True)
class ControlPolicy:
    """Rule deciding the bias value in effect at a given time and state."""

    kind: str = KIND_NONE
    i_threshold: float = 0.0
    theta_controlled: float = 0.0
    t_start: float = 0.0
    t_end: float = 0.0
    latching: bool = True

    def __post_init__(self):
        if self.kind not in (KIND_NONE, KIND_THRESHOLD, KIND_WINDOW):
            raise InvalidParameterError(f"unknown policy kind {self.kind!r}")
        if self.kind == KIND_THRESHOLD:
            if not 0.0 < self.i_threshold < 1.0:
                raise InvalidParameterError(
                    f"i_threshold must lie in (0, 1), got {self.i_threshold}"
                )
            if not self.theta_controlled > 0.0:
                raise InvalidParameterError("theta_controlled must be positive")
        if self.kind == KIND_WINDOW:
            if not self.t_start < self.t_end:
                raise InvalidParameterError(
                    f"need t_start < t_end, got ({self.t_start}, {self.t_end})"
                )
            if not self.theta_controlled > 0.0:
                raise InvalidParameterError("theta_controlled must be positive")

    @classmethod
    def none(cls) -> "ControlPolicy":
        return cls(kind=KIND_NONE)

    @classmethod
    def threshold(cls, i_threshold: float, theta_controlled: float,
                  latching: bool = True) -> "ControlPolicy":
        return cls(kind=KIND_THRESHOLD, i_threshold=i_threshold,
                   theta_controlled=theta_controlled, latching=latching)

    @classmethod
    def window(cls, t_start: float, t_end: float,
               theta_controlled: float) -> "ControlPolicy":
        return cls(kind=KIND_WINDOW, t_start=t_start, t_end=t_end,
                   theta_controlled=theta_controlled)


def effective_theta(policy: ControlPolicy, t: float, state: Sequence[float],
                    base_theta: float, *, already_triggered: bool = False) -> float:
    """Bias in effect at time ``t`` for a full-model ``state``.

    ``already_triggered`` carries the latch of a threshold policy: once a
    latching policy has fired, it keeps returning the controlled value
    regardless of the current infected fraction.
    """
    if policy.kind == KIND_THRESHOLD:
        infected = state[1]
        if infected >= policy.i_threshold or (policy.latching and already_triggered):
            return policy.theta_controlled
        return base_theta
    if policy.kind == KIND_WINDOW:
        if policy.t_start < t < policy.t_end:
            return policy.theta_controlled
        return base_theta
    return base_theta


@dataclass(frozen=True)
class ControlReport:
    """Tail metrics of a controlled run relative to its uncontrolled twin."""

    mean_x_tail_delta: float
    n_end_delta: float
    amp_x_controlled: float
    amp_x_uncontrolled: float
    tail_fraction: float
    mean_x_tail_controlled: float
    mean_x_tail_uncontrolled: float
    n_end_controlled: float
    n_end_uncontrolled: float

    def to_dict(self) -> dict:
        return {
            "mean_x_tail_delta": self.mean_x_tail_delta,
            "n_end_delta": self.n_end_delta,
            "oscillation_amplitude_x": {
                "controlled": self.amp_x_controlled,
                "uncontrolled": self.amp_x_uncontrolled,
            },
            "tail_fraction": self.tail_fraction,
            "mean_x_tail": {
                "controlled": self.mean_x_tail_controlled,
                "uncontrolled": self.mean_x_tail_uncontrolled,
            },
            "n_end": {
                "controlled": self.n_end_controlled,
                "uncontrolled": self.n_end_uncontrolled,
            },
        }


def _xn_columns(traj: "Trajectory") -> tuple[int, int]:
    return (3, 4) if traj.model == "full" else (0, 1)


def compare_runs(controlled: "Trajectory", uncontrolled: "Trajectory",
                 tail_fraction: float = 0.25) -> ControlReport:
    """Tail-mean vaccination, final risk, and oscillation amplitudes.

    Both trajectories must share the sample time grid and the initial
    state; the tail covers the final ``tail_fraction`` of the samples.
    """
    if not 0.0 < tail_fraction <= 1.0:
        raise InvalidParameterError(f"tail_fraction must lie in (0, 1], got {tail_fraction}")
    if controlled.times.shape != uncontrolled.times.shape or not np.array_equal(
        controlled.times, uncontrolled.times
    ):
        raise ComparisonError("trajectories do not share a time grid")
    if not np.array_equal(controlled.states[0], uncontrolled.states[0]):
        raise ComparisonError("trajectories do not share the initial state")

    xi, ni = _xn_columns(controlled)
    n_samples = controlled.times.shape[0]
    tail_start = min(n_samples - 1, int(np.floor(n_samples * (1.0 - tail_fraction))))
    x_c = controlled.states[tail_start:, xi]
    x_u = uncontrolled.states[tail_start:, xi]
    mean_c = float(np.mean(x_c))
    mean_u = float(np.mean(x_u))
    n_end_c = float(controlled.states[-1, ni])
    n_end_u = float(uncontrolled.states[-1, ni])
    return ControlReport(
        mean_x_tail_delta=mean_c - mean_u,
        n_end_delta=n_end_c - n_end_u,
        amp_x_controlled=float(np.max(x_c) - np.min(x_c)),
        amp_x_uncontrolled=float(np.max(x_u) - np.min(x_u)),
        tail_fraction=tail_fraction,
        mean_x_tail_controlled=mean_c,
        mean_x_tail_uncontrolled=mean_u,
        n_end_controlled=n_end_c,
        n_end_uncontrolled=n_end_u,
    )

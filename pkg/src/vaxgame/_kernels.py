"""Numba-compiled fixed-step RK4 kernels for the model vector fields.

These loops are the hot paths behind trajectory simulation and the
basin-of-attraction grids (tens of thousands of independent integrations
at dt ~ 1e-3 over thousands of time units).  They reuse the scalar
vector-field cores from :mod:`vaxgame.dynamics`, and the pure-Python
integrator mirrors the exact same operation order, so both paths produce
bit-identical states.

Step layout, shared by every kernel and by the Python reference path:

1. evaluate the field k1 at the current state (doubles as the
   convergence probe: max-norm below tolerance for ``win_steps``
   consecutive step starts terminates the run),
2. classic RK4 stages k2..k4 and state update,
3. non-finite check on the raw update; divergence aborts with the
   offending step,
4. clamp each component to [lo, hi] (unit interval by default),
   tracking the largest excursion ever clipped.

Termination statuses: 0 horizon reached, 1 converged, 2 diverged.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit, prange

from .dynamics import _full_rhs_s, _reduced_rhs_s

STATUS_HORIZON = 0
STATUS_CONVERGED = 1
STATUS_DIVERGED = 2

POLICY_NONE = 0
POLICY_THRESHOLD = 1
POLICY_WINDOW = 2


@njit(cache=True)
def _clamp1(v, lo, hi, max_clamp):
    if v < lo:
        if lo - v > max_clamp:
            max_clamp = lo - v
        v = lo
    elif v > hi:
        if v - hi > max_clamp:
            max_clamp = v - hi
        v = hi
    return v, max_clamp


@njit(cache=True)
def _reduced_endpoint(x0, n0, c, r0, vh, vl, theta, lo, hi,
                      dt, n_steps, conv_tol, win_steps):
    """Integrate one (x, n) start to termination; returns endpoint only."""
    half = 0.5 * dt
    sixth = dt / 6.0
    x = x0
    n = n0
    streak = 0
    max_clamp = 0.0
    for step in range(n_steps):
        k1x, k1n = _reduced_rhs_s(x, n, c, r0, vh, vl, theta)
        m = abs(k1x)
        if abs(k1n) > m:
            m = abs(k1n)
        if m < conv_tol:
            streak += 1
            if streak >= win_steps:
                return x, n, STATUS_CONVERGED, step, max_clamp
        else:
            streak = 0
        k2x, k2n = _reduced_rhs_s(x + half * k1x, n + half * k1n, c, r0, vh, vl, theta)
        k3x, k3n = _reduced_rhs_s(x + half * k2x, n + half * k2n, c, r0, vh, vl, theta)
        k4x, k4n = _reduced_rhs_s(x + dt * k3x, n + dt * k3n, c, r0, vh, vl, theta)
        x = x + sixth * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        n = n + sixth * (k1n + 2.0 * k2n + 2.0 * k3n + k4n)
        if not (math.isfinite(x) and math.isfinite(n)):
            return x, n, STATUS_DIVERGED, step + 1, max_clamp
        x, max_clamp = _clamp1(x, lo, hi, max_clamp)
        n, max_clamp = _clamp1(n, lo, hi, max_clamp)
    return x, n, STATUS_HORIZON, n_steps, max_clamp


@njit(cache=True, parallel=True)
def _reduced_grid(xs, ns, c, r0, vh, vl, theta, lo, hi,
                  dt, n_steps, conv_tol, win_steps):
    """Independent endpoint integrations for every start in xs/ns (flat arrays)."""
    m = xs.shape[0]
    xf = np.empty(m)
    nf = np.empty(m)
    status = np.empty(m, dtype=np.int8)
    for k in prange(m):
        x, n, st, _, _ = _reduced_endpoint(
            xs[k], ns[k], c, r0, vh, vl, theta, lo, hi,
            dt, n_steps, conv_tol, win_steps,
        )
        xf[k] = x
        nf[k] = n
        status[k] = st
    return xf, nf, status


@njit(cache=True)
def _reduced_traj(x0, n0, c, r0, vh, vl, theta, lo, hi,
                  dt, n_steps, conv_tol, win_steps, record_every,
                  out_t, out_x, out_n):
    """Trajectory-recording variant; samples every record_every steps plus final."""
    half = 0.5 * dt
    sixth = dt / 6.0
    x = x0
    n = n0
    streak = 0
    max_clamp = 0.0
    out_t[0] = 0.0
    out_x[0] = x
    out_n[0] = n
    idx = 1
    for step in range(n_steps):
        k1x, k1n = _reduced_rhs_s(x, n, c, r0, vh, vl, theta)
        m = abs(k1x)
        if abs(k1n) > m:
            m = abs(k1n)
        if m < conv_tol:
            streak += 1
            if streak >= win_steps:
                if step % record_every != 0:
                    out_t[idx] = step * dt
                    out_x[idx] = x
                    out_n[idx] = n
                    idx += 1
                return idx, STATUS_CONVERGED, step, max_clamp
        else:
            streak = 0
        k2x, k2n = _reduced_rhs_s(x + half * k1x, n + half * k1n, c, r0, vh, vl, theta)
        k3x, k3n = _reduced_rhs_s(x + half * k2x, n + half * k2n, c, r0, vh, vl, theta)
        k4x, k4n = _reduced_rhs_s(x + dt * k3x, n + dt * k3n, c, r0, vh, vl, theta)
        x = x + sixth * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        n = n + sixth * (k1n + 2.0 * k2n + 2.0 * k3n + k4n)
        if not (math.isfinite(x) and math.isfinite(n)):
            return idx, STATUS_DIVERGED, step + 1, max_clamp
        x, max_clamp = _clamp1(x, lo, hi, max_clamp)
        n, max_clamp = _clamp1(n, lo, hi, max_clamp)
        if (step + 1) % record_every == 0 or step + 1 == n_steps:
            out_t[idx] = (step + 1) * dt
            out_x[idx] = x
            out_n[idx] = n
            idx += 1
    return idx, STATUS_HORIZON, n_steps, max_clamp


@njit(cache=True)
def _peek_theta(kind, t, i, base, latched, thr, t0, t1, theta_ctrl, latching):
    if kind == POLICY_THRESHOLD:
        if i >= thr or (latching and latched):
            return theta_ctrl
        return base
    if kind == POLICY_WINDOW:
        if t0 < t < t1:
            return theta_ctrl
        return base
    return base


@njit(cache=True)
def _full_traj(s0, i0, r0c, x0, n0,
               mu, beta_t, gamma, c, vh, vl, base_theta, eps1, eps2,
               kind, thr, t0, t1, theta_ctrl, latching,
               lo, hi, dt, n_steps, conv_tol, win_steps, record_every,
               out_t, out_states, out_theta, out_events):
    """Full five-compartment trajectory with an optional bias-control policy.

    ``out_states`` is (n_samples_max, 5); ``out_events`` holds rows of
    (time, old_theta, new_theta).  Returns (samples, status, steps,
    max_clamp, events); events beyond the buffer capacity are counted but
    dropped.
    """
    half = 0.5 * dt
    sixth = dt / 6.0
    s = s0
    i = i0
    r = r0c
    x = x0
    n = n0
    streak = 0
    max_clamp = 0.0
    latched = False
    theta_prev = base_theta
    n_events = 0
    ev_cap = out_events.shape[0]

    out_t[0] = 0.0
    out_states[0, 0] = s
    out_states[0, 1] = i
    out_states[0, 2] = r
    out_states[0, 3] = x
    out_states[0, 4] = n
    out_theta[0] = _peek_theta(kind, 0.0, i, base_theta, latched,
                               thr, t0, t1, theta_ctrl, latching)
    idx = 1
    for step in range(n_steps):
        t = step * dt
        th = _peek_theta(kind, t, i, base_theta, latched,
                         thr, t0, t1, theta_ctrl, latching)
        if kind == POLICY_THRESHOLD and latching and not latched and i >= thr:
            latched = True
        if th != theta_prev:
            if n_events < ev_cap:
                out_events[n_events, 0] = t
                out_events[n_events, 1] = theta_prev
                out_events[n_events, 2] = th
            n_events += 1
            theta_prev = th

        k1s, k1i, k1r, k1x, k1n = _full_rhs_s(
            s, i, r, x, n, mu, beta_t, gamma, c, vh, vl, th, eps1, eps2)
        m = abs(k1s)
        if abs(k1i) > m:
            m = abs(k1i)
        if abs(k1r) > m:
            m = abs(k1r)
        if abs(k1x) > m:
            m = abs(k1x)
        if abs(k1n) > m:
            m = abs(k1n)
        if m < conv_tol:
            streak += 1
            if streak >= win_steps:
                if step % record_every != 0:
                    out_t[idx] = t
                    out_states[idx, 0] = s
                    out_states[idx, 1] = i
                    out_states[idx, 2] = r
                    out_states[idx, 3] = x
                    out_states[idx, 4] = n
                    out_theta[idx] = th
                    idx += 1
                return idx, STATUS_CONVERGED, step, max_clamp, n_events
        else:
            streak = 0
        k2s, k2i, k2r, k2x, k2n = _full_rhs_s(
            s + half * k1s, i + half * k1i, r + half * k1r,
            x + half * k1x, n + half * k1n,
            mu, beta_t, gamma, c, vh, vl, th, eps1, eps2)
        k3s, k3i, k3r, k3x, k3n = _full_rhs_s(
            s + half * k2s, i + half * k2i, r + half * k2r,
            x + half * k2x, n + half * k2n,
            mu, beta_t, gamma, c, vh, vl, th, eps1, eps2)
        k4s, k4i, k4r, k4x, k4n = _full_rhs_s(
            s + dt * k3s, i + dt * k3i, r + dt * k3r,
            x + dt * k3x, n + dt * k3n,
            mu, beta_t, gamma, c, vh, vl, th, eps1, eps2)
        s = s + sixth * (k1s + 2.0 * k2s + 2.0 * k3s + k4s)
        i = i + sixth * (k1i + 2.0 * k2i + 2.0 * k3i + k4i)
        r = r + sixth * (k1r + 2.0 * k2r + 2.0 * k3r + k4r)
        x = x + sixth * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        n = n + sixth * (k1n + 2.0 * k2n + 2.0 * k3n + k4n)
        if not (math.isfinite(s) and math.isfinite(i) and math.isfinite(r)
                and math.isfinite(x) and math.isfinite(n)):
            return idx, STATUS_DIVERGED, step + 1, max_clamp, n_events
        s, max_clamp = _clamp1(s, lo, hi, max_clamp)
        i, max_clamp = _clamp1(i, lo, hi, max_clamp)
        r, max_clamp = _clamp1(r, lo, hi, max_clamp)
        x, max_clamp = _clamp1(x, lo, hi, max_clamp)
        n, max_clamp = _clamp1(n, lo, hi, max_clamp)
        if (step + 1) % record_every == 0 or step + 1 == n_steps:
            th_rec = _peek_theta(kind, (step + 1) * dt, i, base_theta, latched,
                                 thr, t0, t1, theta_ctrl, latching)
            out_t[idx] = (step + 1) * dt
            out_states[idx, 0] = s
            out_states[idx, 1] = i
            out_states[idx, 2] = r
            out_states[idx, 3] = x
            out_states[idx, 4] = n
            out_theta[idx] = th_rec
            idx += 1
    return idx, STATUS_HORIZON, n_steps, max_clamp, n_events

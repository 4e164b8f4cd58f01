"""Separatrix approximation and brute-force basins of attraction.

In a bistable regime the boundary between the two basins is the stable
manifold of the interior saddle.  Near the saddle it is approximated by
the straight line through the saddle along the stable eigendirection;
the module evaluates that line both from a numeric eigendecomposition of
the saddle Jacobian (authoritative) and from long closed-form expressions
in the raw parameters, cross-checking the two to guard against
transcription slips.

Basin areas are measured by integrating the reduced system from the
center of every cell of a regular grid over the open unit square and
matching each converged endpoint against the two attractors; the area
below the clipped separatrix line is reported alongside as the linear
estimate.  The two estimates genuinely differ where the manifold is
strongly curved, so both are kept.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .dynamics import ModelParams
from .equilibria import FixedPoint, enumerate_fixed_points, jacobian_reduced, stable_pair
from .errors import (
    AmbiguousEndpointError,
    ClosedFormMismatchError,
    DegenerateSaddleError,
    DomainError,
    NoSaddleError,
)
from .integrate import IntegrationConfig

__all__ = [
    "Separatrix",
    "BasinReport",
    "SweepPoint",
    "separatrix_linear",
    "basin_area_grid",
    "basin_area_sweep",
    "area_below_line",
    "basin_cfg_default",
]

LABEL_FP1 = 1
LABEL_FP2 = 2
LABEL_OTHER = 0
LABEL_UNRESOLVED = -1

_LABEL_NAMES = {LABEL_FP1: "fp1", LABEL_FP2: "fp2",
                LABEL_OTHER: "other", LABEL_UNRESOLVED: "unresolved"}

SWEEPABLE = ("theta", "cost_vacc_low", "r0")

# Fraction of unresolved cells above which a warning suggests a longer horizon.
UNRESOLVED_WARN = 1e-3


def basin_cfg_default() -> IntegrationConfig:
    """Default integration settings for basin grids (long horizon, sparse need)."""
    return IntegrationConfig(dt=1e-3, t_max=2000.0, record_every=1_000_000)


@dataclass(frozen=True)
class Separatrix:
    """Linear approximation n = slope*x + intercept of the basin boundary.

    ``lambda_pos``/``lambda_neg`` are the saddle eigenvalues,
    ``eigvec_neg`` the stable direction in (first component, 1) form.
    ``closed_form`` holds the same five quantities evaluated from the
    explicit parameter expressions, and ``closed_form_rel_err`` their
    worst relative deviation from the eigendecomposition values.
    """

    saddle: tuple[float, float]
    lambda_pos: float
    lambda_neg: float
    eigvec_neg: tuple[float, float]
    slope: float
    intercept: float
    closed_form: dict
    closed_form_rel_err: float

    def n_at(self, x: float) -> float:
        return self.slope * x + self.intercept


def _closed_form_saddle(c, vh, vl, th, r0):
    """Explicit saddle eigen-quantities in the raw parameters.

    Returns (lam_minus, lam_plus, eta1, k, b).  lam_minus/lam_plus take
    the minus/plus branch of the discriminant square root; lam_minus is
    the negative (stable) eigenvalue.  eta1 as written is the first
    component of the plus-branch (unstable) eigendirection scaled to
    second component 1; the stable direction is recovered as 1/k.
    """
    dv = vh - vl
    d = th * vh + 2.0 * vh - th * vl - 2.0 * vl
    c2 = c * c
    r2 = r0 * r0
    th2 = th * th
    g = (
        4.0 * c2 * r2 - 8.0 * c2 * r0 * th - 16.0 * c2 * r0
        - c2 * vh * th2 - 3.0 * c2 * vh * th - 2.0 * c2 * vh
        + c2 * vl * th2 + 3.0 * c2 * vl * th + 2.0 * c2 * vl
        + 4.0 * c2 * th2 + 16.0 * c2 * th + 16.0 * c2
        - 4.0 * c * r2 * vh - 4.0 * c * r2 * vl
        + 4.0 * c * r0 * vh * th + 8.0 * c * r0 * vh
        + 4.0 * c * r0 * vl * th + 8.0 * c * r0 * vl
        + 4.0 * r2 * vh * vl
    )
    q_disc = -dv * (th + 1.0) * (th + 2.0) * g
    if q_disc < 0.0:
        raise DegenerateSaddleError("negative discriminant: complex saddle eigenvalues")
    sq = math.sqrt(q_disc)
    lam_minus = (-c * (th + 1.0) * d - sq) / (2.0 * r0 * d)
    lam_plus = (-c * (th + 1.0) * d + sq) / (2.0 * r0 * d)

    e = (
        c2 * r2 * th + 2.0 * c2 * r2
        - 2.0 * c2 * r0 * th2 - 8.0 * c2 * r0 * th - 8.0 * c2 * r0
        + c2 * th2 * th + 6.0 * c2 * th2 + 12.0 * c2 * th + 8.0 * c2
        - c * r2 * vh * th - 2.0 * c * r2 * vh
        - c * r2 * vl * th - 2.0 * c * r2 * vl
        + c * r0 * vh * th2 + 4.0 * c * r0 * vh * th + 4.0 * c * r0 * vh
        + c * r0 * vl * th2 + 4.0 * c * r0 * vl * th + 4.0 * c * r0 * vl
        + r2 * vh * vl * th + 2.0 * r2 * vh * vl
    )
    eta1 = (
        -r0 * (c * (th + 1.0) * d - sq) * (vh * vh - 2.0 * vh * vl + vl * vl)
        / (2.0 * d * e)
    )

    q = 2.0 + 3.0 * th + th2
    w = (
        -4.0 * r2 * vh * vl
        - 4.0 * c * (2.0 + th - r0) * r0 * (vh + vl)
        + c2 * (
            th * (-16.0 + 8.0 * r0 + 3.0 * vh - 3.0 * vl)
            + th2 * (-4.0 + vh - vl)
            - 2.0 * (8.0 - 8.0 * r0 + 2.0 * r2 - vh + vl)
        )
    )
    bracket = q * c * dv + math.sqrt(q * dv) * math.sqrt(w)
    aa = c * (2.0 + th - r0) + r0 * vl
    bb = c * (2.0 + th - r0) + r0 * vh
    k = -(2.0 * (2.0 + th) ** 2 * bb * aa) / (r0 * dv * bracket)
    b_inner = (
        4.0 * r0 * vh + 6.0 * th * r0 * vh + 2.0 * th2 * r0 * vh
        + q * c * (4.0 + 2.0 * th - 2.0 * r0 - vh + vl)
        - math.sqrt(
            -q * dv * (
                4.0 * r2 * vh * vl
                + 4.0 * c * (2.0 + th - r0) * r0 * (vh + vl)
                + c2 * (
                    th2 * (4.0 - vh + vl)
                    + 2.0 * (8.0 - 8.0 * r0 + 2.0 * r2 - vh + vl)
                    + th * (16.0 - 8.0 * r0 - 3.0 * vh + 3.0 * vl)
                )
            )
        )
    )
    b = aa * b_inner / (r0 * dv * bracket)
    return lam_minus, lam_plus, eta1, k, b


def _rel_err(a: float, b: float) -> float:
    scale = max(abs(a), abs(b), 1e-300)
    return abs(a - b) / scale


def separatrix_linear(p: ModelParams, *, check_tol: float = 1e-8) -> Separatrix:
    """Stable-direction line through the saddle, numeric and closed-form.

    The eigendecomposition of the saddle Jacobian is the authoritative
    source; the closed forms are evaluated alongside and any relative
    deviation beyond ``check_tol`` raises
    :class:`ClosedFormMismatchError` instead of being averaged away.
    """
    stable_pair(p)  # raises NotBistableError / BoundaryRegimeError if not bistable
    saddle = next(fp for fp in enumerate_fixed_points(p) if fp.id == 3)
    if not saddle.exists:
        raise NoSaddleError(f"interior saddle does not exist: {saddle.violated}")
    jac = jacobian_reduced((saddle.x, saddle.n), p)
    lam = np.linalg.eigvals(jac)
    if np.iscomplexobj(lam) and np.any(np.abs(lam.imag) > 0.0):
        raise DegenerateSaddleError("complex eigenvalues at the saddle")
    lam = np.sort(lam.real)
    lam_neg, lam_pos = float(lam[0]), float(lam[1])
    if lam_neg == lam_pos:
        raise DegenerateSaddleError("repeated eigenvalues at the saddle")
    j21 = float(jac[1, 0])
    # For eigenvector (e1, 1): J @ (e1, 1) = lam*(e1, 1) gives e1 = lam/j21.
    eta_neg = (lam_neg / j21, 1.0)
    eta_pos = (lam_pos / j21, 1.0)
    slope = 1.0 / eta_neg[0]
    intercept = saddle.n - slope * saddle.x

    lam_m, lam_p, eta1_cf, k_cf, b_cf = _closed_form_saddle(
        p.cost_infection, p.cost_vacc_high, p.cost_vacc_low, p.theta, p.r0
    )
    closed = {
        "lambda_neg": lam_m,
        "lambda_pos": lam_p,
        "eta1_unstable": eta1_cf,
        "slope": k_cf,
        "intercept": b_cf,
    }
    devs = {
        "lambda_neg": _rel_err(lam_m, lam_neg),
        "lambda_pos": _rel_err(lam_p, lam_pos),
        "eta1_unstable": _rel_err(eta1_cf, eta_pos[0]),
        "slope": _rel_err(k_cf, slope),
        "intercept": _rel_err(b_cf, intercept),
    }
    worst = max(devs.values())
    if worst > check_tol:
        raise ClosedFormMismatchError(
            f"closed-form saddle quantities deviate from the eigendecomposition "
            f"by up to {worst:.3e} (per quantity: {devs})"
        )
    return Separatrix(
        saddle=(saddle.x, saddle.n),
        lambda_pos=lam_pos,
        lambda_neg=lam_neg,
        eigvec_neg=eta_neg,
        slope=slope,
        intercept=intercept,
        closed_form=closed,
        closed_form_rel_err=worst,
    )


def area_below_line(k: float, b: float) -> float:
    """Area of {(x, n) in the unit square : n < k*x + b}, exactly."""
    if k == 0.0:
        return min(max(b, 0.0), 1.0)
    cuts = {0.0, 1.0}
    for target in (0.0, 1.0):
        xc = (target - b) / k
        if 0.0 < xc < 1.0:
            cuts.add(xc)
    xs = sorted(cuts)
    total = 0.0
    for xa, xb in zip(xs[:-1], xs[1:]):
        xm = 0.5 * (xa + xb)
        val = k * xm + b
        if val >= 1.0:
            total += xb - xa
        elif val > 0.0:
            total += val * (xb - xa)  # midpoint rule is exact for a line
    return total


@dataclass(frozen=True)
class BasinReport:
    """Grid classification of the unit square between the two attractors.

    ``labels`` is a (grid_n, grid_n) int8 array indexed [ix, jn] over cell
    centers ((ix+0.5)/grid_n, (jn+0.5)/grid_n); values are 1 (basin of the
    high-vaccination point), 2 (basin of the other attractor), 0 (converged
    elsewhere), -1 (no convergence before the horizon).
    """

    grid_n: int
    labels: np.ndarray
    area_fp1: float
    area_fp2: float
    area_other: float
    area_unresolved: float
    area_fp1_linear: float
    fp1: FixedPoint
    fp2: FixedPoint
    separatrix: Separatrix
    cfg: IntegrationConfig
    endpoint_tol: float

    def to_json(self, indent: int | None = 2) -> str:
        sep = self.separatrix
        doc = {
            "grid_n": self.grid_n,
            "dt": self.cfg.dt,
            "t_max": self.cfg.t_max,
            "convergence_tol": self.cfg.convergence_tol,
            "convergence_window": self.cfg.convergence_window,
            "endpoint_tol": self.endpoint_tol,
            "areas": {
                "fp1": self.area_fp1,
                "fp2": self.area_fp2,
                "other": self.area_other,
                "unresolved": self.area_unresolved,
                "fp1_linear": self.area_fp1_linear,
            },
            "attractors": {
                "fp1": {"id": self.fp1.id, "location": [self.fp1.x, self.fp1.n]},
                "fp2": {"id": self.fp2.id, "location": [self.fp2.x, self.fp2.n]},
            },
            "separatrix": {
                "saddle": list(sep.saddle),
                "lambda_pos": sep.lambda_pos,
                "lambda_neg": sep.lambda_neg,
                "eigvec_neg": list(sep.eigvec_neg),
                "slope": sep.slope,
                "intercept": sep.intercept,
                "closed_form": sep.closed_form,
                "closed_form_rel_err": sep.closed_form_rel_err,
            },
        }
        return json.dumps(doc, indent=indent)

    def map_csv(self) -> str:
        """Cell map as ``x_center,n_center,label`` rows (x outer, n inner)."""
        gn = self.grid_n
        lines = ["x_center,n_center,label"]
        for ix in range(gn):
            xc = (ix + 0.5) / gn
            for jn in range(gn):
                nc = (jn + 0.5) / gn
                lines.append(f"{xc:.12g},{nc:.12g},{_LABEL_NAMES[int(self.labels[ix, jn])]}")
        return "\n".join(lines) + "\n"


def basin_area_grid(p: ModelParams, grid_n: int,
                    cfg: IntegrationConfig | None = None,
                    endpoint_tol: float = 1e-3) -> BasinReport:
    """Measure both basins by integrating one trajectory per grid cell.

    Cell centers (not corners) are integrated so that the count is an
    unbiased midpoint estimate of the area; the endpoint of every
    converged run is matched against the two attractors within
    ``endpoint_tol`` (Euclidean).  Unresolved cells are ones that hit the
    horizon before the field norm stayed below the convergence tolerance
    for the full detection window.
    """
    if int(grid_n) != grid_n or grid_n < 2:
        raise DomainError(f"grid_n must be an integer >= 2, got {grid_n}")
    grid_n = int(grid_n)
    cfg = cfg or basin_cfg_default()
    fp1, fp2 = stable_pair(p)

    centers = (np.arange(grid_n) + 0.5) / grid_n
    xs = np.repeat(centers, grid_n)
    ns = np.tile(centers, grid_n)
    lo, hi = cfg.bounds
    xf, nf, status = _kernels._reduced_grid(
        xs, ns, p.cost_infection, p.r0, p.cost_vacc_high, p.cost_vacc_low,
        p.theta, lo, hi, cfg.dt, cfg.n_steps, cfg.convergence_tol, cfg.win_steps,
    )
    converged = status == _kernels.STATUS_CONVERGED
    d1 = np.hypot(xf - fp1.x, nf - fp1.n) <= endpoint_tol
    d2 = np.hypot(xf - fp2.x, nf - fp2.n) <= endpoint_tol
    both = converged & d1 & d2
    if np.any(both):
        k = int(np.argmax(both))
        raise AmbiguousEndpointError(
            f"endpoint ({xf[k]:g}, {nf[k]:g}) matches both attractors at "
            f"tol={endpoint_tol:g}; shrink the tolerance"
        )
    labels = np.full(xs.shape, LABEL_UNRESOLVED, dtype=np.int8)
    labels[converged] = LABEL_OTHER
    labels[converged & d1] = LABEL_FP1
    labels[converged & d2] = LABEL_FP2

    total = float(labels.size)
    area1 = float(np.count_nonzero(labels == LABEL_FP1)) / total
    area2 = float(np.count_nonzero(labels == LABEL_FP2)) / total
    other = float(np.count_nonzero(labels == LABEL_OTHER)) / total
    unresolved = float(np.count_nonzero(labels == LABEL_UNRESOLVED)) / total
    if unresolved > UNRESOLVED_WARN:
        warnings.warn(
            f"{unresolved:.2%} of cells did not converge before t_max={cfg.t_max:g}; "
            f"consider a longer horizon",
            stacklevel=2,
        )
    sep = separatrix_linear(p)
    return BasinReport(
        grid_n=grid_n,
        labels=labels.reshape(grid_n, grid_n),
        area_fp1=area1,
        area_fp2=area2,
        area_other=other,
        area_unresolved=unresolved,
        area_fp1_linear=area_below_line(sep.slope, sep.intercept),
        fp1=fp1,
        fp2=fp2,
        separatrix=sep,
        cfg=cfg,
        endpoint_tol=endpoint_tol,
    )


@dataclass(frozen=True)
class SweepPoint:
    """One entry of a parameter sweep: an area or a per-value error."""

    value: float
    area_fp1: float | None
    error: str | None
    report: BasinReport | None

    @property
    def ok(self) -> bool:
        return self.error is None


def basin_area_sweep(p: ModelParams, parameter: str, values,
                     grid_n: int, cfg: IntegrationConfig | None = None,
                     endpoint_tol: float = 1e-3,
                     keep_reports: bool = True) -> list[SweepPoint]:
    """One basin grid per swept value; failures become per-value entries.

    ``parameter`` is one of ``theta``, ``cost_vacc_low``, ``r0``.  Values
    that leave the bistable regime (or hit a taxonomy boundary) yield an
    error entry and the sweep continues.
    """
    if parameter not in SWEEPABLE:
        raise DomainError(
            f"sweep parameter must be one of {SWEEPABLE}, got {parameter!r}"
        )
    out: list[SweepPoint] = []
    for value in values:
        try:
            pv = replace(p, **{parameter: float(value)})
            report = basin_area_grid(pv, grid_n, cfg, endpoint_tol)
        except Exception as err:  # per-value isolation is the contract
            out.append(SweepPoint(value=float(value), area_fp1=None,
                                  error=f"{type(err).__name__}: {err}", report=None))
            continue
        out.append(SweepPoint(value=float(value), area_fp1=report.area_fp1,
                              error=None, report=report if keep_reports else None))
    return out


def sweep_csv(points: list[SweepPoint], parameter: str) -> str:
    """Sweep summary as CSV: value, grid area, linear area, status."""
    lines = [f"{parameter},area_fp1,area_fp1_linear,status"]
    for pt in points:
        if pt.ok:
            lin = pt.report.area_fp1_linear if pt.report is not None else math.nan
            lines.append(f"{pt.value:.12g},{pt.area_fp1:.12g},{lin:.12g},ok")
        else:
            err = pt.error.replace(",", ";").replace("\n", " ")
            lines.append(f"{pt.value:.12g},,,{err}")
    return "\n".join(lines) + "\n"

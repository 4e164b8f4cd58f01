"""Closed-form equilibrium analysis of the reduced (x, n) system.

The reduced vector field has seven candidate fixed points: two interior-x
points on the risk boundaries n=0 and n=1, one interior saddle, and the
four corners of the unit square.  Each comes with a closed-form location,
an existence condition on the basic reproduction ratio, and an explicit
Jacobian.  The parameter space splits into two cases (by the ordering of
two critical reproduction ratios) of five subcases each; the stable set
of every subcase is known in closed form, including the bistable windows
in which a high-vaccination/low-risk state coexists with a second
attractor.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .dynamics import ModelParams, reduced_rhs
from .errors import BoundaryRegimeError, DegenerateParameterError

__all__ = [
    "FixedPoint",
    "RegimeReport",
    "enumerate_fixed_points",
    "jacobian_reduced",
    "classify_fixed_point",
    "classify_regime",
    "regime_thresholds",
    "stable_pair",
    "report_json",
]

STABLE = "stable"
UNSTABLE = "unstable"
SADDLE = "saddle"
NONHYPERBOLIC = "nonhyperbolic"


@dataclass(frozen=True)
class FixedPoint:
    """One equilibrium of the reduced system.

    ``id`` follows the conventional numbering 1-7 (1: high vaccination at
    n=0, 2: lower vaccination at n=1, 3: interior saddle, 4-7: corners).
    The location is reported even when the existence condition fails
    (it may then leave the unit square); ``exists`` is authoritative and
    ``violated`` states the failed condition.
    """

    id: int
    x: float
    n: float
    exists: bool
    violated: str | None
    jacobian: np.ndarray
    eigenvalues: tuple[complex, complex]
    classification: str

    @property
    def location(self) -> tuple[float, float]:
        return (self.x, self.n)


@dataclass(frozen=True)
class RegimeReport:
    """Stability taxonomy for one parameter set."""

    case_id: int
    subcase: int
    stable_points: tuple[int, ...]

    @property
    def bistable(self) -> bool:
        return len(self.stable_points) == 2


def regime_thresholds(p: ModelParams) -> tuple[float, float, float, float]:
    """The four critical reproduction ratios ordering the taxonomy.

    Returns (existence threshold of fp1, existence threshold of fp2,
    lower and upper existence thresholds of the interior saddle).
    """
    c, vh, vl, th = p.cost_infection, p.cost_vacc_high, p.cost_vacc_low, p.theta
    return (
        c / (c - vl),
        c / (c - vh),
        (2.0 + th) * c / (c - vl),
        (2.0 + th) * c / (c - vh),
    )


def _eig2(j: np.ndarray) -> tuple[complex, complex]:
    """Eigenvalues of a 2x2 real matrix, exact for triangular input.

    Triangular Jacobians (all boundary fixed points here) get their
    diagonal returned verbatim so that regime-boundary zeros are detected
    exactly instead of being blurred by round-off.
    """
    a, b = float(j[0, 0]), float(j[0, 1])
    c, d = float(j[1, 0]), float(j[1, 1])
    if b == 0.0 or c == 0.0:
        lams = (complex(a), complex(d))
    else:
        tr = a + d
        disc = (a - d) * (a - d) + 4.0 * b * c
        if disc >= 0.0:
            sq = math.sqrt(disc)
            if tr >= 0.0:
                l1 = 0.5 * (tr + sq)
            else:
                l1 = 0.5 * (tr - sq)
            det = a * d - b * c
            l2 = det / l1 if l1 != 0.0 else 0.5 * (tr - math.copysign(sq, tr))
            lams = (complex(l1), complex(l2))
        else:
            sq = math.sqrt(-disc)
            lams = (complex(0.5 * tr, 0.5 * sq), complex(0.5 * tr, -0.5 * sq))
    return tuple(sorted(lams, key=lambda z: (z.real, z.imag)))  # type: ignore[return-value]


def _classify(eigenvalues: tuple[complex, complex]) -> str:
    re1, re2 = eigenvalues[0].real, eigenvalues[1].real
    if re1 == 0.0 or re2 == 0.0:
        return NONHYPERBOLIC
    if re1 < 0.0 and re2 < 0.0:
        return STABLE
    if re1 > 0.0 and re2 > 0.0:
        return UNSTABLE
    return SADDLE


def classify_fixed_point(fp: FixedPoint) -> str:
    """Classification by the signs of the eigenvalue real parts."""
    return _classify(fp.eigenvalues)


def jacobian_reduced(point: tuple[float, float], p: ModelParams) -> np.ndarray:
    """Jacobian of the reduced vector field at ``point``.

    Piecewise in x: below the herd-immunity level the infection-pressure
    term contributes to d(dx)/dx, at or above it the infection probability
    is identically zero and that term drops.
    """
    x, n = float(point[0]), float(point[1])
    c, vh, vl, th, r0 = (
        p.cost_infection,
        p.cost_vacc_high,
        p.cost_vacc_low,
        p.theta,
        p.r0,
    )
    v = n * (vh - vl) + vl
    if x < 1.0 - 1.0 / r0:
        dxdx = c * (1.0 - 1.0 / r0 - 2.0 * x) + v * (-1.0 + 2.0 * x)
    else:
        dxdx = v * (-1.0 + 2.0 * x)
    dxdn = x * (vh - vl) * (x - 1.0)
    dndx = n * (th + 2.0) * (n - 1.0)
    dndn = (-1.0 + 2.0 * n) * (-1.0 - th + 2.0 * x + th * x)
    return np.array([[dxdx, dxdn], [dndx, dndn]])


def _make_fp(fp_id: int, x: float, n: float, exists: bool, violated: str | None,
             p: ModelParams) -> FixedPoint:
    jac = jacobian_reduced((x, n), p)
    eig = _eig2(jac)
    return FixedPoint(
        id=fp_id, x=x, n=n, exists=exists, violated=violated,
        jacobian=jac, eigenvalues=eig, classification=_classify(eig),
    )


def enumerate_fixed_points(p: ModelParams) -> list[FixedPoint]:
    """All seven fixed points with existence flags, Jacobians, and classes."""
    c, vh, vl, th, r0 = (
        p.cost_infection,
        p.cost_vacc_high,
        p.cost_vacc_low,
        p.theta,
        p.r0,
    )
    if vh == vl:
        raise DegenerateParameterError(
            "cost_vacc_high == cost_vacc_low: interior saddle location undefined"
        )
    ra, rb, rc, rd = regime_thresholds(p)

    x1 = 1.0 - c / (r0 * (c - vl))
    x2 = 1.0 - c / (r0 * (c - vh))
    x3 = (th + 1.0) / (th + 2.0)
    n3 = -(c * (2.0 - r0 + th) + r0 * vl) / (r0 * (vh - vl))

    out = [
        _make_fp(1, x1, 0.0, r0 > ra, None if r0 > ra else f"requires r0 > {ra:g}", p),
        _make_fp(2, x2, 1.0, r0 > rb, None if r0 > rb else f"requires r0 > {rb:g}", p),
        _make_fp(
            3, x3, n3, rc < r0 < rd,
            None if rc < r0 < rd else f"requires {rc:g} < r0 < {rd:g}", p,
        ),
        _make_fp(4, 0.0, 0.0, True, None, p),
        _make_fp(5, 0.0, 1.0, True, None, p),
        _make_fp(6, 1.0, 0.0, True, None, p),
        _make_fp(7, 1.0, 1.0, True, None, p),
    ]
    return out


_CASE1_STABLE = [(5,), (5,), (2,), (1, 2), (1,)]
_CASE2_STABLE = [(5,), (5,), (1, 5), (1, 2), (1,)]


def classify_regime(p: ModelParams) -> RegimeReport:
    """Select the taxonomy case and subcase for these parameters.

    Raises :class:`BoundaryRegimeError` when r0 sits exactly on one of
    the interval boundaries (or the two cases coincide); the taxonomy is
    silent there and the caller must perturb the parameters.
    """
    ra, rb, rc, rd = regime_thresholds(p)
    if rc == rb:
        raise BoundaryRegimeError(
            "case boundary: (2+theta)C/(C-V_L) equals C/(C-V_H)"
        )
    case_id = 1 if rc > rb else 2
    bounds = [ra, rb, rc, rd] if case_id == 1 else [ra, rc, rb, rd]
    r0 = p.r0
    for bound in bounds:
        if r0 == bound:
            raise BoundaryRegimeError(
                f"r0={r0:g} lies exactly on a regime boundary ({bound:g})"
            )
    subcase = 1 + sum(r0 > bound for bound in bounds)
    stable = _CASE1_STABLE[subcase - 1] if case_id == 1 else _CASE2_STABLE[subcase - 1]
    return RegimeReport(case_id=case_id, subcase=subcase, stable_points=stable)


def stable_pair(p: ModelParams) -> tuple[FixedPoint, FixedPoint]:
    """The two stable fixed points of a bistable regime, ordered by id.

    The first entry is always the high-vaccination/zero-risk point (id 1).
    """
    regime = classify_regime(p)
    if not regime.bistable:
        from .errors import NotBistableError

        raise NotBistableError(
            f"parameters are in case {regime.case_id} subcase {regime.subcase} "
            f"with stable set {regime.stable_points}; need exactly two attractors"
        )
    fps = {fp.id: fp for fp in enumerate_fixed_points(p)}
    a, b = sorted(regime.stable_points)
    return fps[a], fps[b]


def residual_norm(fp: FixedPoint, p: ModelParams) -> float:
    """Max-norm of the reduced vector field at the fixed point's location."""
    dx, dn = reduced_rhs((fp.x, fp.n), p)
    return max(abs(dx), abs(dn))


def report_json(p: ModelParams, indent: int | None = 2) -> str:
    """JSON report: all fixed points plus the regime taxonomy."""
    fps = enumerate_fixed_points(p)
    try:
        regime = classify_regime(p)
        regime_obj = {
            "case": regime.case_id,
            "subcase": regime.subcase,
            "stable_points": list(regime.stable_points),
            "bistable": regime.bistable,
        }
    except BoundaryRegimeError as err:
        regime_obj = {"error": str(err)}
    doc = {
        "fixed_points": [
            {
                "id": fp.id,
                "location": [fp.x, fp.n],
                "exists": fp.exists,
                "violated_condition": fp.violated,
                "jacobian": [list(map(float, row)) for row in fp.jacobian],
                "eigenvalues": [[z.real, z.imag] for z in fp.eigenvalues],
                "classification": fp.classification,
            }
            for fp in fps
        ],
        "regime": regime_obj,
    }
    return json.dumps(doc, indent=indent, sort_keys=False)

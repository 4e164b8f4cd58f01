#!/usr/bin/env python3
"""Render SVG phase portraits for the bistable parameter sets.

Covers the reference bistable case plus the three one-parameter families
(side-effect bias, low-risk vaccination cost, reproduction ratio) whose
basins the sweep scenarios measure.
"""

import sys
from pathlib import Path

from vaxgame.dynamics import ModelParams
from vaxgame.portrait import phase_portrait_svg

CASES = {
    "portrait_reference": dict(r0=3.5, cost_infection=10.0, cost_vacc_high=3.0,
                               cost_vacc_low=1.0, theta=1.0),
    "portrait_theta_005": dict(r0=4.0, cost_infection=4.0, cost_vacc_high=2.0,
                               cost_vacc_low=1.0, theta=0.05),
    "portrait_theta_05": dict(r0=4.0, cost_infection=4.0, cost_vacc_high=2.0,
                              cost_vacc_low=1.0, theta=0.5),
    "portrait_theta_08": dict(r0=4.0, cost_infection=4.0, cost_vacc_high=2.0,
                              cost_vacc_low=1.0, theta=0.8),
    "portrait_vl_1": dict(r0=3.6, cost_infection=10.0, cost_vacc_high=5.0,
                          cost_vacc_low=1.0, theta=0.1),
    "portrait_vl_3": dict(r0=3.6, cost_infection=10.0, cost_vacc_high=5.0,
                          cost_vacc_low=3.0, theta=0.1),
    "portrait_vl_4": dict(r0=3.6, cost_infection=10.0, cost_vacc_high=5.0,
                          cost_vacc_low=4.0, theta=0.1),
    "portrait_r0_36": dict(r0=3.6, cost_infection=3.5, cost_vacc_high=2.0,
                           cost_vacc_low=1.0, theta=0.5),
    "portrait_r0_40": dict(r0=4.0, cost_infection=3.5, cost_vacc_high=2.0,
                           cost_vacc_low=1.0, theta=0.5),
    "portrait_r0_55": dict(r0=5.5, cost_infection=3.5, cost_vacc_high=2.0,
                           cost_vacc_low=1.0, theta=0.5),
}


def main() -> int:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("out")
    out.mkdir(parents=True, exist_ok=True)
    for name, kw in CASES.items():
        svg = phase_portrait_svg(ModelParams.reduced(**kw))
        path = out / f"{name}.svg"
        path.write_text(svg)
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Scenario-driven command-line front end.

Usage::

    vaxgame <analysis> <config.toml> [--out DIR] [--grid N] [--svg]

where ``<analysis>`` is one of ``simulate``, ``equilibria``, ``basin``,
``sweep``, ``control-compare`` and must match the ``analysis`` declared
in the scenario file.  Artifacts are written atomically (temp file +
rename) into the output directory and one summary line is printed per
artifact.  Exit codes: 0 success, 1 analysis error, 2 invalid config.

The environment variable ``VAXGAME_THREADS`` caps the number of threads
used for basin grids (default: all cores).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .basins import basin_area_grid, basin_area_sweep, sweep_csv
from .config import ANALYSES, ScenarioConfig, load_scenario
from .control import compare_runs
from .equilibria import report_json
from .errors import ConfigError, VaxgameError
from .integrate import full_initial_state, simulate_full, simulate_reduced, trajectory_csv
from .portrait import phase_portrait_svg

__all__ = ["main", "run_scenario"]


def _configure_threads() -> None:
    value = os.environ.get("VAXGAME_THREADS")
    if not value:
        return
    import numba

    requested = max(1, int(value))
    numba.set_num_threads(min(requested, numba.config.NUMBA_NUM_THREADS))


def _write_text(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _emit(path: Path, text: str, what: str, written: list[Path]) -> None:
    _write_text(path, text)
    written.append(path)
    print(f"wrote {path} ({what})")


def run_scenario(sc: ScenarioConfig, out_dir: str | None = None,
                 grid_n: int | None = None, svg: bool | None = None) -> list[Path]:
    """Execute one scenario and return the paths written."""
    out = Path(out_dir if out_dir is not None else sc.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    gn = grid_n if grid_n is not None else sc.grid_n
    want_svg = sc.svg if svg is None else (svg or sc.svg)
    written: list[Path] = []

    if sc.analysis == "simulate":
        if sc.model == "reduced":
            traj = simulate_reduced(sc.params, sc.x0, sc.n0, sc.integration)
        else:
            init = full_initial_state(sc.x0, sc.n0, sc.i0)
            traj = simulate_full(sc.params, init, sc.integration, sc.policy)
        _emit(out / f"{sc.name}_trajectory.csv", trajectory_csv(traj),
              f"{sc.model} trajectory, {traj.terminal_reason} at t={traj.final_time:g}",
              written)

    elif sc.analysis == "equilibria":
        _emit(out / f"{sc.name}_equilibria.json", report_json(sc.params),
              "fixed points and regime", written)

    elif sc.analysis == "basin":
        report = basin_area_grid(sc.params, gn, sc.integration, sc.endpoint_tol)
        _emit(out / f"{sc.name}_basin.json", report.to_json(),
              f"basin areas fp1={report.area_fp1:.4f} fp2={report.area_fp2:.4f}",
              written)
        _emit(out / f"{sc.name}_basin_map.csv", report.map_csv(),
              f"{gn}x{gn} cell map", written)
        if want_svg:
            _emit(out / f"{sc.name}_phase.svg", phase_portrait_svg(sc.params),
                  "phase portrait", written)

    elif sc.analysis == "sweep":
        points = basin_area_sweep(sc.params, sc.sweep_parameter, sc.sweep_values,
                                  gn, sc.integration, sc.endpoint_tol,
                                  keep_reports=False)
        n_ok = sum(pt.ok for pt in points)
        _emit(out / f"{sc.name}_sweep.csv", sweep_csv(points, sc.sweep_parameter),
              f"{n_ok}/{len(points)} sweep values", written)

    else:  # control-compare
        init = full_initial_state(sc.x0, sc.n0, sc.i0)
        controlled = simulate_full(sc.params, init, sc.integration, sc.policy)
        uncontrolled = simulate_full(sc.params, init, sc.integration, None)
        report = compare_runs(controlled, uncontrolled, sc.tail_fraction)
        _emit(out / f"{sc.name}_controlled.csv", trajectory_csv(controlled),
              "controlled trajectory", written)
        _emit(out / f"{sc.name}_uncontrolled.csv", trajectory_csv(uncontrolled),
              "uncontrolled trajectory", written)
        doc = report.to_dict()
        doc["policy"] = {
            "kind": sc.policy.kind,
            "i_threshold": sc.policy.i_threshold,
            "theta_controlled": sc.policy.theta_controlled,
            "t_start": sc.policy.t_start,
            "t_end": sc.policy.t_end,
            "latching": sc.policy.latching,
        }
        doc["policy_events_controlled"] = controlled.policy_events
        _emit(out / f"{sc.name}_control.json", json.dumps(doc, indent=2),
              f"control deltas x_tail={report.mean_x_tail_delta:+.4f} "
              f"n_end={report.n_end_delta:+.4f}", written)

    return written


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="vaxgame",
        description="Coupled epidemic/vaccination/perceived-risk dynamics runner",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ANALYSES:
        sp = sub.add_parser(name, help=f"run a config with analysis={name}")
        sp.add_argument("config", help="scenario TOML file")
        sp.add_argument("--out", default=None, help="output directory override")
        sp.add_argument("--grid", type=int, default=None,
                        help="grid cells per axis override (basin/sweep)")
        sp.add_argument("--svg", action="store_true",
                        help="also write an SVG phase portrait (basin)")
    args = parser.parse_args(argv)

    try:
        _configure_threads()
        sc = load_scenario(args.config)
        if sc.analysis != args.command:
            raise ConfigError(
                f"config declares analysis={sc.analysis!r} but the "
                f"{args.command!r} subcommand was invoked",
                key="scenario.analysis",
            )
        run_scenario(sc, out_dir=args.out, grid_n=args.grid, svg=args.svg)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except VaxgameError as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

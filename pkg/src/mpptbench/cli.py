"""Command-line entry point: run, compare, oracle.

Exit codes: 0 success, 1 configuration error, 2 runtime/solver error.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, ScenarioConfig, load_scenario
from .harness import (
    SimulationError,
    compute_metrics,
    format_metrics,
    run_simulation,
    resolve_initial_duty,
    write_metrics_report,
    write_trace_csv,
)
from .oracle import MppOracle
from .profiles import celsius_to_kelvin, load_profile_csv
from .pvmodel import EnvCondition, ModelError

__all__ = ["main"]

_TRACE_FILES = {
    "conventional": "trace_conventional.csv",
    "revised-fixed-bound": "trace_revised_fixed.csv",
    "revised-adaptive-bound": "trace_revised_adaptive.csv",
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mpptbench",
        description="Desk-scale MPPT simulator and benchmark harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", required=True, help="scenario YAML file")
        p.add_argument("--out", default=None, help="output directory (overrides config)")
        p.add_argument("--profile", default=None, help="profile CSV (overrides config)")
        p.add_argument("--quiet", action="store_true", help="suppress the summary printout")

    p_run = sub.add_parser("run", help="run one simulation, write trace.csv and metrics.txt")
    common(p_run)

    p_cmp = sub.add_parser(
        "compare", help="run all three controllers on the scenario, write comparison.txt"
    )
    common(p_cmp)

    p_orc = sub.add_parser(
        "oracle", help="dump the P-V curve and the true MPP for one condition"
    )
    common(p_orc)
    p_orc.add_argument("--g", type=float, default=1000.0, help="irradiance, W/m^2")
    p_orc.add_argument("--temp", type=float, default=25.0, help="cell temperature, degC")
    return parser


def _load(args) -> ScenarioConfig:
    scenario = load_scenario(args.config)
    if args.profile is not None:
        csv_path = Path(args.profile)
        if not csv_path.exists():
            raise ConfigError(f"profile CSV not found: {csv_path}")
        scenario.profile = load_profile_csv(csv_path)
        scenario.profile_source = str(csv_path)
    if args.out is not None:
        scenario.output_dir = Path(args.out)
    scenario.output_dir.mkdir(parents=True, exist_ok=True)
    return scenario


def _simulate_kind(scenario: ScenarioConfig, kind: str):
    array = scenario.build_array()
    oracle = MppOracle(array)
    converter = scenario.build_converter(array, oracle)
    d0 = resolve_initial_duty(scenario.sim, converter, oracle, scenario.profile.env_at(0.0))
    controller = scenario.build_controller(d0, kind)
    trace = run_simulation(array, converter, controller, scenario.profile, scenario.sim, oracle)
    return trace, compute_metrics(trace)


def _cmd_run(args) -> int:
    scenario = _load(args)
    trace, metrics = _simulate_kind(scenario, scenario.controller_kind)
    trace_path = scenario.output_dir / "trace.csv"
    write_trace_csv(trace, trace_path)
    write_metrics_report(metrics, scenario.output_dir / "metrics.txt")
    if not args.quiet:
        print(f"{scenario.controller_kind}: {len(trace)} steps -> {trace_path}")
        print(f"energy_deficit_j: {metrics.energy_deficit:.6g}")
    return 0


def _cmd_compare(args) -> int:
    scenario = _load(args)
    results = {}
    for kind, filename in _TRACE_FILES.items():
        trace, metrics = _simulate_kind(scenario, kind)
        write_trace_csv(trace, scenario.output_dir / filename)
        results[kind] = metrics

    conv = results["conventional"]
    fixed = results["revised-fixed-bound"]
    adaptive = results["revised-adaptive-bound"]
    lines = []
    for name, m in results.items():
        lines.append(f"== {name} ==")
        lines.append(format_metrics(m).rstrip())
        lines.append("")
    lines.append("== orderings ==")
    lines.append(
        "energy_deficit_j: "
        f"conventional={conv.energy_deficit:.6g} "
        f"revised-fixed={fixed.energy_deficit:.6g} "
        f"revised-adaptive={adaptive.energy_deficit:.6g}"
    )
    lines.append(
        "energy_deficit(conventional) > energy_deficit(revised-adaptive): "
        f"{conv.energy_deficit > adaptive.energy_deficit}"
    )
    lines.append(
        "max_voltage_overshoot_v: "
        f"revised-fixed={fixed.max_voltage_overshoot:.6g} "
        f"revised-adaptive={adaptive.max_voltage_overshoot:.6g}"
    )
    lines.append(
        "max_voltage_overshoot(revised-adaptive) <= max_voltage_overshoot(revised-fixed): "
        f"{adaptive.max_voltage_overshoot <= fixed.max_voltage_overshoot}"
    )
    report = "\n".join(lines) + "\n"
    (scenario.output_dir / "comparison.txt").write_text(report)
    if not args.quiet:
        print(report, end="")
    return 0


def _cmd_oracle(args) -> int:
    scenario = _load(args)
    array = scenario.build_array()
    oracle = MppOracle(array)
    env = EnvCondition(g=args.g, t=celsius_to_kelvin(args.temp))
    mpp = oracle.find(env)
    v_oc = array.open_circuit_voltage(env)
    curve_path = scenario.output_dir / "pv_curve.csv"
    with curve_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["voltage_v", "current_a", "power_w"])
        if v_oc > 0:
            grid = np.linspace(0.0, v_oc, oracle.grid_points)
            current = np.asarray(array.current_at(grid, env))
            for v, i in zip(grid, current):
                writer.writerow([repr(float(v)), repr(float(i)), repr(float(v * i))])
    print(f"v_mpp_v: {mpp.v_mpp:.6g}")
    print(f"i_mpp_a: {mpp.i_mpp:.6g}")
    print(f"p_mpp_w: {mpp.p_mpp:.6g}")
    if not args.quiet:
        print(f"curve: {curve_path}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {"run": _cmd_run, "compare": _cmd_compare, "oracle": _cmd_oracle}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (ModelError, SimulationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

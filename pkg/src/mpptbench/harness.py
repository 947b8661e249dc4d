"""Closed-loop simulation driver and tracking metrics.

Each control instant: resolve the environment from the profile, map the
active duty to a terminal voltage through the converter, solve the array
current at that voltage, feed the measurement to the controller, and
apply the updated duty over the next interval.  One record is emitted
per instant; the duty in a record is the one that produced the recorded
operating point, while step size, bound, slope and action describe the
controller's response at that instant.
"""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass
from pathlib import Path

from .controllers import Measurement, MpptController, StepAction
from .converter import BuckBoost
from .oracle import MppOracle
from .pvmodel import EnvCondition, ModelError, PVArray
from .profiles import EnvProfile

__all__ = [
    "SimConfig",
    "SimRecord",
    "SimulationError",
    "SegmentMetrics",
    "TrackingMetrics",
    "run_simulation",
    "compute_metrics",
    "trace_header",
    "write_trace_csv",
    "format_metrics",
    "write_metrics_report",
]


class SimulationError(Exception):
    """Array solver failure mid-run; carries the partial trace."""

    def __init__(self, t: float, partial_trace: list[SimRecord], cause: Exception):
        super().__init__(f"simulation aborted at t={t:.3f} s: {cause}")
        self.t = t
        self.partial_trace = partial_trace
        self.cause = cause


@dataclass(frozen=True)
class SimConfig:
    """Control cadence, run length, and initialization.

    duration None falls back to the profile's duration.  initial_duty
    "auto" starts the run at initial_voltage_fraction of the first
    segment's MPP voltage, which forces a visible tracking transient.
    Optional uniform measurement noise is driven by a seeded generator.
    """

    control_interval: float = 0.010
    duration: float | None = None
    initial_duty: float | str = "auto"
    initial_voltage_fraction: float = 0.9
    noise_v: float = 0.0
    noise_i: float = 0.0
    noise_seed: int = 0

    def __post_init__(self):
        if self.control_interval <= 0:
            raise ValueError("control_interval must be > 0")
        if self.duration is not None and self.duration < self.control_interval:
            raise ValueError("duration must be >= control_interval")
        if isinstance(self.initial_duty, str):
            if self.initial_duty != "auto":
                raise ValueError('initial_duty must be a number in (0, 1) or "auto"')
        elif not (0.0 < self.initial_duty < 1.0):
            raise ValueError('initial_duty must be a number in (0, 1) or "auto"')
        if not (0.0 < self.initial_voltage_fraction <= 1.5):
            raise ValueError("initial_voltage_fraction must be in (0, 1.5]")
        if self.noise_v < 0 or self.noise_i < 0:
            raise ValueError("noise amplitudes must be >= 0")


@dataclass(frozen=True)
class SimRecord:
    t: float
    g: float
    temp: float
    v: float
    i: float
    p: float
    d: float
    delta_d: float
    delta_d_max: float
    p_mpp: float
    v_mpp: float
    p_deviation: float
    slope_term: float
    action: str


def resolve_initial_duty(
    cfg: SimConfig, converter: BuckBoost, oracle: MppOracle, env0: EnvCondition
) -> float:
    if cfg.initial_duty != "auto":
        return float(cfg.initial_duty)
    mpp = oracle.find(env0)
    if mpp.v_mpp <= 0:
        return 0.5
    return converter.duty_for_voltage(cfg.initial_voltage_fraction * mpp.v_mpp)


def run_simulation(
    array: PVArray,
    converter: BuckBoost,
    controller: MpptController,
    profile: EnvProfile,
    cfg: SimConfig = SimConfig(),
    oracle: MppOracle | None = None,
) -> list[SimRecord]:
    """Drive the loop on the control cadence; fully deterministic."""
    if oracle is None:
        oracle = MppOracle(array)
    dt = cfg.control_interval
    duration = cfg.duration if cfg.duration is not None else profile.duration
    n_steps = max(1, round(duration / dt))
    rng = random.Random(cfg.noise_seed) if (cfg.noise_v > 0 or cfg.noise_i > 0) else None

    records: list[SimRecord] = []
    for k in range(n_steps):
        t = k * dt
        env = profile.env_at(t)
        mpp = oracle.find(env)
        d_active = controller.state.d
        v = converter.terminal_voltage(d_active).voltage
        try:
            i_raw = float(array.current_at(v, env))
        except ModelError as exc:
            raise SimulationError(t, records, exc) from exc
        i = max(0.0, i_raw)  # source convention: a blocking diode stops reverse current
        v_meas, i_meas = v, i
        if rng is not None:
            v_meas = max(0.0, v + rng.uniform(-cfg.noise_v, cfg.noise_v))
            i_meas = max(0.0, i + rng.uniform(-cfg.noise_i, cfg.noise_i))
        outcome = controller.step(Measurement(v=v_meas, i=i_meas))
        records.append(
            SimRecord(
                t=t,
                g=env.g,
                temp=env.t,
                v=v,
                i=i,
                p=v * i,
                d=d_active,
                delta_d=outcome.new_state.delta_d,
                delta_d_max=outcome.new_state.delta_d_max,
                p_mpp=mpp.p_mpp,
                v_mpp=mpp.v_mpp,
                p_deviation=mpp.p_mpp - v * i,
                slope_term=outcome.slope_term,
                action=outcome.action.value,
            )
        )
    return records


@dataclass(frozen=True)
class SegmentMetrics:
    """Per-segment tracking figures.

    settling_time is None when the segment never settles or is too short
    to assess (see assessable).  max_voltage_overshoot is the excursion
    past the segment's MPP voltage beyond the side the segment entered
    from; it isolates genuine overshoot from the initial tracking gap.
    time_to_hold is when the controller first froze the duty, if it did.
    """

    t_start: float
    t_end: float
    g: float
    temp: float
    n_steps: int
    assessable: bool
    settling_time: float | None
    max_voltage_overshoot: float
    time_to_hold: float | None
    end_relative_deviation: float


@dataclass(frozen=True)
class TrackingMetrics:
    segments: tuple[SegmentMetrics, ...]
    energy_deficit: float
    mean_relative_deviation: float
    oscillation_fraction: float
    max_voltage_overshoot: float


def _segment_bounds(trace: list[SimRecord]) -> list[tuple[int, int]]:
    bounds = []
    start = 0
    for k in range(1, len(trace)):
        if (trace[k].g, trace[k].temp) != (trace[k - 1].g, trace[k - 1].temp):
            bounds.append((start, k))
            start = k
    bounds.append((start, len(trace)))
    return bounds


def _relative_deviation(rec: SimRecord) -> float:
    if rec.p_mpp <= 0:
        return 0.0
    return abs(rec.p_deviation) / rec.p_mpp


def _segment_overshoot(seg: list[SimRecord]) -> float:
    v_mpp = seg[0].v_mpp
    v0 = seg[0].v
    if v0 > v_mpp:  # approached from above: overshoot dips below v_mpp
        return max(0.0, max(v_mpp - r.v for r in seg))
    if v0 < v_mpp:  # approached from below: overshoot rises above v_mpp
        return max(0.0, max(r.v - v_mpp for r in seg))
    return max(abs(r.v - v_mpp) for r in seg)


def compute_metrics(
    trace: list[SimRecord],
    settle_tolerance: float = 0.01,
    settle_hold: float = 0.1,
) -> TrackingMetrics:
    """Settling, overshoot, post-settle oscillation, and energy deficit.

    A segment settles at the first instant from which the relative power
    deviation stays below settle_tolerance for settle_hold continuously.
    oscillation_fraction counts duty changes across all post-settle
    steps.  The energy deficit integrates p_deviation over the whole run
    by the rectangle rule.
    """
    if not trace:
        raise ValueError("trace is empty")
    dt = trace[1].t - trace[0].t if len(trace) > 1 else 0.01
    hold_steps = max(1, round(settle_hold / dt))

    segments: list[SegmentMetrics] = []
    post_settle_total = 0
    post_settle_changes = 0
    for a, b in _segment_bounds(trace):
        seg = trace[a:b]
        rel = [_relative_deviation(r) for r in seg]
        assessable = len(seg) >= hold_steps
        settle_idx: int | None = None
        if assessable:
            for j in range(len(seg) - hold_steps + 1):
                if all(r < settle_tolerance for r in rel[j : j + hold_steps]):
                    settle_idx = j
                    break
        if settle_idx is not None:
            for j in range(a + max(settle_idx, 1), b):
                post_settle_total += 1
                if trace[j].d != trace[j - 1].d:
                    post_settle_changes += 1
        hold_t = next((r.t for r in seg if r.action == StepAction.HELD_AT_MPP.value), None)
        segments.append(
            SegmentMetrics(
                t_start=seg[0].t,
                t_end=seg[-1].t + dt,
                g=seg[0].g,
                temp=seg[0].temp,
                n_steps=len(seg),
                assessable=assessable,
                settling_time=None if settle_idx is None else seg[settle_idx].t - seg[0].t,
                max_voltage_overshoot=_segment_overshoot(seg),
                time_to_hold=hold_t,
                end_relative_deviation=rel[-1],
            )
        )

    return TrackingMetrics(
        segments=tuple(segments),
        energy_deficit=sum(r.p_deviation for r in trace) * dt,
        mean_relative_deviation=sum(_relative_deviation(r) for r in trace) / len(trace),
        oscillation_fraction=(
            post_settle_changes / post_settle_total if post_settle_total else 0.0
        ),
        max_voltage_overshoot=max(s.max_voltage_overshoot for s in segments),
    )


def trace_header() -> list[str]:
    return [
        "t_s",
        "g_w_m2",
        "temp_k",
        "v_v",
        "i_a",
        "p_w",
        "d",
        "delta_d",
        "delta_d_max",
        "p_mpp_w",
        "v_mpp_v",
        "p_deviation_w",
        "slope_term",
        "action",
    ]


def write_trace_csv(trace: list[SimRecord], path: str | Path) -> None:
    """Write the trace with full float precision (byte-stable across runs)."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(trace_header())
        for r in trace:
            writer.writerow(
                [
                    repr(r.t),
                    repr(r.g),
                    repr(r.temp),
                    repr(r.v),
                    repr(r.i),
                    repr(r.p),
                    repr(r.d),
                    repr(r.delta_d),
                    repr(r.delta_d_max),
                    repr(r.p_mpp),
                    repr(r.v_mpp),
                    repr(r.p_deviation),
                    repr(r.slope_term),
                    r.action,
                ]
            )


def _fmt_settling(seg: SegmentMetrics) -> str:
    if not seg.assessable:
        return "not_assessable"
    if seg.settling_time is None:
        return "not_settled"
    return f"{seg.settling_time:.6g}"


def format_metrics(metrics: TrackingMetrics) -> str:
    lines = [
        f"energy_deficit_j: {metrics.energy_deficit:.6g}",
        f"mean_relative_deviation: {metrics.mean_relative_deviation:.6g}",
        f"oscillation_fraction: {metrics.oscillation_fraction:.6g}",
        f"max_voltage_overshoot_v: {metrics.max_voltage_overshoot:.6g}",
    ]
    for k, seg in enumerate(metrics.segments):
        prefix = f"segment[{k}]"
        lines.append(f"{prefix}.t_start_s: {seg.t_start:.6g}")
        lines.append(f"{prefix}.g_w_m2: {seg.g:.6g}")
        lines.append(f"{prefix}.settling_time_s: {_fmt_settling(seg)}")
        lines.append(f"{prefix}.max_voltage_overshoot_v: {seg.max_voltage_overshoot:.6g}")
        lines.append(
            f"{prefix}.time_to_hold_s: "
            + ("never" if seg.time_to_hold is None else f"{seg.time_to_hold:.6g}")
        )
        lines.append(f"{prefix}.end_relative_deviation: {seg.end_relative_deviation:.6g}")
    return "\n".join(lines) + "\n"


def write_metrics_report(metrics: TrackingMetrics, path: str | Path) -> None:
    Path(path).write_text(format_metrics(metrics))

"""Incremental-conductance MPPT controllers.

Two decision rules over the same slope test:

* ``conventional_step`` moves the duty ratio by a fixed increment toward
  the MPP every step, so it keeps perturbing after arrival.
* ``revised_step`` scales the increment by the magnitude of the P-V
  slope, accelerates it when the slope sign repeats (step too small),
  decelerates it when the sign flips (step too large), optionally
  shrinks the step upper bound on sign flips, and freezes the duty once
  the slope test passes, resetting the step to its nominal value.

The slope term is dI/dV + I/V, whose sign matches dP/dV: positive left
of the MPP (raise the voltage), negative right of it.  By default it is
normalized by V/I so thresholds are dimensionless and independent of
plant size; the raw conductance-valued form is available behind a flag.

Both step functions are pure: they take a state and return a new one.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import NamedTuple

__all__ = [
    "Measurement",
    "ControllerParams",
    "ControllerState",
    "StepAction",
    "StepOutcome",
    "DegenerateSampleError",
    "FALLBACK_SLOPE_MAGNITUDE",
    "DV_DEGENERATE_V",
    "DI_DEGENERATE_A",
    "slope_term",
    "initial_state",
    "conventional_step",
    "revised_step",
    "MpptController",
    "CONTROLLER_KINDS",
]

# Below these deltas a secant slope is meaningless.
DV_DEGENERATE_V = 1e-9
DI_DEGENERATE_A = 1e-9
# Currents below this are treated as a zero-power plateau (above V_oc).
ZERO_CURRENT_A = 1e-9
# Stand-in slope magnitude when only the direction is known (degenerate
# dV, or zero-current plateau): large enough that the duty step clamps
# to its upper bound, which is exactly the sized response to a sudden
# operating-condition change.
FALLBACK_SLOPE_MAGNITUDE = 10.0
# Floor for the V/I normalization when the current is at/near zero.
_NORM_CURRENT_FLOOR = 1e-12


class DegenerateSampleError(Exception):
    """Both dV and dI are degenerate and no slope history exists."""


class Measurement(NamedTuple):
    """Sampled terminal voltage (V) and current (A), source convention (both >= 0)."""

    v: float
    i: float

    def validate(self) -> "Measurement":
        if self.v < 0 or self.i < 0:
            raise ValueError(f"measurement must be non-negative, got {self}")
        return self


class StepAction(enum.Enum):
    MOVED_LEFT = "moved_left"    # duty change lowered the terminal voltage
    MOVED_RIGHT = "moved_right"  # duty change raised the terminal voltage
    HELD_AT_MPP = "held_at_mpp"  # duty unchanged


@dataclass(frozen=True)
class ControllerParams:
    """Tuning constants shared by both controllers.

    delta_d_nominal: initial/reset duty step
    delta_d_max_initial: initial step upper bound
    delta_d_max_floor: smallest value the adaptive upper bound may shrink to
    delta_d_floor: numerical floor that keeps the step from underflowing to 0
    epsilon: MPP detection threshold on |slope term|
    acc/deacc: step multipliers for repeated / flipped slope sign
    adaptive_upper_bound: shrink the bound on sign flips (else keep it fixed)
    slope_normalization: use the dimensionless slope term (V/I-scaled)
    dv_dd_sign: sign of dV/dd of the converter stage
    d_min/d_max: duty clamp range of the converter stage
    """

    delta_d_nominal: float = 0.001
    delta_d_max_initial: float = 0.01
    delta_d_max_floor: float = 0.001
    delta_d_floor: float = 1e-12
    epsilon: float = 5e-4
    acc: float = 1.2
    deacc: float = 0.8
    adaptive_upper_bound: bool = True
    slope_normalization: bool = True
    dv_dd_sign: int = -1
    d_min: float = 0.05
    d_max: float = 0.95

    def __post_init__(self):
        if not (0.0 < self.delta_d_nominal <= self.delta_d_max_initial < 1.0):
            raise ValueError("need 0 < delta_d_nominal <= delta_d_max_initial < 1")
        if not (0.0 < self.delta_d_max_floor <= self.delta_d_max_initial):
            raise ValueError("need 0 < delta_d_max_floor <= delta_d_max_initial")
        if self.delta_d_floor <= 0:
            raise ValueError("delta_d_floor must be > 0")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be > 0")
        if self.acc <= 1.0:
            raise ValueError("acc must be > 1")
        if not (0.0 < self.deacc < 1.0):
            raise ValueError("deacc must be in (0, 1)")
        if self.dv_dd_sign not in (-1, 1):
            raise ValueError("dv_dd_sign must be -1 or +1")
        if not (0.0 < self.d_min < self.d_max < 1.0):
            raise ValueError("need 0 < d_min < d_max < 1")


@dataclass(frozen=True)
class ControllerState:
    """Controller memory carried between steps.

    prev_slope_sign is None until the first slope has been computed and
    keeps the last tracking direction through holds, so a sudden
    environment change that reverses the direction registers as a sign
    flip.
    """

    d: float
    delta_d: float
    delta_d_max: float
    prev_v: float | None = None
    prev_i: float | None = None
    prev_slope_sign: int | None = None
    at_mpp: bool = False


class StepOutcome(NamedTuple):
    new_state: ControllerState
    action: StepAction
    slope_term: float  # nan on the seeding step, before any slope exists


class _SlopeKind(enum.Enum):
    NORMAL = "normal"
    DV_FALLBACK = "dv_fallback"    # dV degenerate, direction from sign(dI)
    DEGENERATE = "degenerate"      # both deltas degenerate, prior sign reused
    PLATEAU = "plateau"            # zero-current region above V_oc


def _slope(
    meas: Measurement,
    prev_v: float,
    prev_i: float,
    normalize: bool,
    prev_slope_sign: int | None,
) -> tuple[float, _SlopeKind]:
    dv = meas.v - prev_v
    di = meas.i - prev_i
    if abs(dv) < DV_DEGENERATE_V:
        if abs(di) < DI_DEGENERATE_A:
            if prev_slope_sign is None:
                raise DegenerateSampleError(
                    f"dV={dv:.3e} V and dI={di:.3e} A are both degenerate and no "
                    "slope history exists"
                )
            # nothing changed: zero slope keeps a held controller held
            return 0.0, _SlopeKind.DEGENERATE
        # duty was static and the current jumped: the environment changed;
        # a rising current at fixed voltage means the MPP moved right
        return math.copysign(FALLBACK_SLOPE_MAGNITUDE, di), _SlopeKind.DV_FALLBACK
    if meas.i < ZERO_CURRENT_A and prev_i < ZERO_CURRENT_A:
        # flat zero-power plateau beyond open circuit: slope carries no
        # information there, but the MPP is always at lower voltage
        return -FALLBACK_SLOPE_MAGNITUDE, _SlopeKind.PLATEAU
    raw = di / dv + meas.i / meas.v
    if not normalize:
        return raw, _SlopeKind.NORMAL
    return raw * meas.v / max(meas.i, _NORM_CURRENT_FLOOR), _SlopeKind.NORMAL


def slope_term(
    meas: Measurement,
    prev_v: float,
    prev_i: float,
    normalize: bool = True,
    prev_slope_sign: int | None = None,
) -> float:
    """Slope test value for one sample pair.

    Raw form dI/dV + I/V (siemens); normalized form multiplies by V/I,
    giving the dimensionless 1 + (V/I)*(dI/dV).  The sign matches the
    sign of dP/dV for well-conditioned inputs.
    """
    value, _ = _slope(meas, prev_v, prev_i, normalize, prev_slope_sign)
    return value


def initial_state(d0: float, params: ControllerParams) -> ControllerState:
    if not (0.0 < d0 < 1.0):
        raise ValueError("initial duty must be in (0, 1)")
    return ControllerState(
        d=d0,
        delta_d=params.delta_d_nominal,
        delta_d_max=params.delta_d_max_initial,
    )


def _clamp(x: float, lo: float, hi: float) -> float:
    return min(max(x, lo), hi)


def _apply_move(d: float, sign: int, delta_d: float, params: ControllerParams) -> float:
    # clamping at the converter limits never alters delta_d or the slope sign
    return _clamp(d + params.dv_dd_sign * sign * delta_d, params.d_min, params.d_max)


def _action_for(d_old: float, d_new: float, params: ControllerParams) -> StepAction:
    if d_new == d_old:
        return StepAction.HELD_AT_MPP
    raised_v = params.dv_dd_sign * (d_new - d_old) > 0
    return StepAction.MOVED_RIGHT if raised_v else StepAction.MOVED_LEFT


def _seed_step(
    state: ControllerState, meas: Measurement, params: ControllerParams, delta_d: float
) -> StepOutcome:
    # No history yet: perturb toward higher voltage so the next sample
    # yields a usable secant (holding would leave both deltas degenerate).
    # Flip the direction if the duty clamp swallowed the move.
    d_new = _apply_move(state.d, +1, delta_d, params)
    if d_new == state.d:
        d_new = _apply_move(state.d, -1, delta_d, params)
    new_state = replace(state, d=d_new, delta_d=delta_d, prev_v=meas.v, prev_i=meas.i)
    return StepOutcome(new_state, _action_for(state.d, d_new, params), math.nan)


def conventional_step(
    state: ControllerState, meas: Measurement, params: ControllerParams
) -> StepOutcome:
    """Fixed-increment IncCond step: move delta_d_nominal toward the MPP.

    Holds only when the slope is exactly zero, so in practice the duty
    keeps perturbing around the MPP indefinitely.
    """
    meas.validate()
    if state.prev_v is None:
        return _seed_step(state, meas, params, params.delta_d_nominal)
    s, _ = _slope(
        meas, state.prev_v, state.prev_i, params.slope_normalization, state.prev_slope_sign
    )
    if s == 0.0:
        new_state = replace(state, prev_v=meas.v, prev_i=meas.i, at_mpp=True)
        return StepOutcome(new_state, StepAction.HELD_AT_MPP, s)
    sign = 1 if s > 0 else -1
    d_new = _apply_move(state.d, sign, params.delta_d_nominal, params)
    new_state = replace(
        state, d=d_new, prev_v=meas.v, prev_i=meas.i, prev_slope_sign=sign, at_mpp=False
    )
    return StepOutcome(new_state, _action_for(state.d, d_new, params), s)


def revised_step(
    state: ControllerState, meas: Measurement, params: ControllerParams
) -> StepOutcome:
    """Adaptive IncCond step with slope-scaled increment and freeze at the MPP.

    Order of business: evaluate the slope term; if |s| <= epsilon hold
    the duty and reset step and bound to their initial values; otherwise
    pick acc (sign repeated) or deacc (sign flipped), shrink the bound on
    flips when the adaptive bound is enabled, update
    delta_d := delta_d * factor * |s| clamped into [floor, bound], and
    move the duty so the terminal voltage heads toward the MPP.
    """
    meas.validate()
    if state.prev_v is None:
        seed = _clamp(
            params.delta_d_nominal * FALLBACK_SLOPE_MAGNITUDE,
            params.delta_d_floor,
            state.delta_d_max,
        )
        return _seed_step(state, meas, params, seed)
    s, kind = _slope(
        meas, state.prev_v, state.prev_i, params.slope_normalization, state.prev_slope_sign
    )
    delta_d = state.delta_d
    if kind is _SlopeKind.DV_FALLBACK:
        # The duty has been static (held, or the step collapsed) and the
        # environment just changed: restart the step from its nominal
        # value or the response to the new transient stays microscopic.
        delta_d = params.delta_d_nominal
    if abs(s) <= params.epsilon:
        new_state = replace(
            state,
            delta_d=params.delta_d_nominal,
            delta_d_max=params.delta_d_max_initial,
            prev_v=meas.v,
            prev_i=meas.i,
            at_mpp=True,
        )
        return StepOutcome(new_state, StepAction.HELD_AT_MPP, s)

    sign = 1 if s > 0 else -1
    delta_d_max = state.delta_d_max
    if state.prev_slope_sign is None:
        factor = 1.0
    elif sign == state.prev_slope_sign:
        factor = params.acc
    else:
        factor = params.deacc
        if params.adaptive_upper_bound:
            delta_d_max = max(params.delta_d_max_floor, delta_d_max * params.deacc)
    delta_d_new = _clamp(delta_d * factor * abs(s), params.delta_d_floor, delta_d_max)
    d_new = _apply_move(state.d, sign, delta_d_new, params)
    new_state = replace(
        state,
        d=d_new,
        delta_d=delta_d_new,
        delta_d_max=delta_d_max,
        prev_v=meas.v,
        prev_i=meas.i,
        prev_slope_sign=sign,
        at_mpp=False,
    )
    return StepOutcome(new_state, _action_for(state.d, d_new, params), s)


CONTROLLER_KINDS = ("conventional", "revised-fixed-bound", "revised-adaptive-bound")


class MpptController:
    """One controller instance: a kind, its params, and the evolving state.

    Deterministic state machine; step it from a single thread.
    """

    def __init__(self, kind: str, params: ControllerParams, initial_duty: float):
        if kind not in CONTROLLER_KINDS:
            raise ValueError(f"unknown controller kind {kind!r}, expected one of {CONTROLLER_KINDS}")
        self.kind = kind
        if kind == "revised-fixed-bound":
            params = replace(params, adaptive_upper_bound=False)
        elif kind == "revised-adaptive-bound":
            params = replace(params, adaptive_upper_bound=True)
        self.params = params
        self.state = initial_state(initial_duty, params)
        self._step = conventional_step if kind == "conventional" else revised_step

    def step(self, meas: Measurement) -> StepOutcome:
        outcome = self._step(self.state, meas, self.params)
        self.state = outcome.new_state
        return outcome

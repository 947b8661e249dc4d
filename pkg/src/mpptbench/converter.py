"""Idealized buck-boost stage between the array and a stiff dc bus.

Lossless continuous-conduction steady state with a constant-voltage
output bus: the panel-side voltage is v_bus*(1-d)/d, strictly decreasing
in the duty ratio d.  Stateless; the operating point settles within one
control interval.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

__all__ = ["BuckBoost", "TerminalVoltage"]


class TerminalVoltage(NamedTuple):
    voltage: float
    clamped: bool


@dataclass(frozen=True)
class BuckBoost:
    """Buck-boost converter feeding a stiff bus of voltage v_bus."""

    v_bus: float
    d_min: float = 0.05
    d_max: float = 0.95

    # Sign of dV_panel/dd for this topology; raising d lowers the panel voltage.
    sign_of_dv_dd: int = -1

    def __post_init__(self):
        if self.v_bus <= 0:
            raise ValueError("v_bus must be > 0")
        if not (0.0 < self.d_min < self.d_max < 1.0):
            raise ValueError("duty clamps must satisfy 0 < d_min < d_max < 1")

    def clamp_duty(self, d: float) -> tuple[float, bool]:
        """Clamp d into [d_min, d_max]; the flag reports whether it engaged."""
        if d < self.d_min:
            return self.d_min, True
        if d > self.d_max:
            return self.d_max, True
        return d, False

    def terminal_voltage(self, d: float) -> TerminalVoltage:
        """Panel-side voltage for duty d (clamped first)."""
        d_c, clamped = self.clamp_duty(d)
        return TerminalVoltage(self.v_bus * (1.0 - d_c) / d_c, clamped)

    def duty_for_voltage(self, v_target: float) -> float:
        """Duty ratio that places the panel at v_target, clamped into range.

        Inverse of terminal_voltage on the interior of the clamp range.
        """
        if v_target <= 0:
            raise ValueError("v_target must be > 0")
        d, _ = self.clamp_duty(self.v_bus / (self.v_bus + v_target))
        return d

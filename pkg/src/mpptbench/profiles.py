"""Piecewise-constant environment profiles (irradiance transients)."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

from .pvmodel import EnvCondition

__all__ = [
    "EnvSegment",
    "EnvProfile",
    "builtin_table1_profile",
    "load_profile_csv",
    "celsius_to_kelvin",
    "PROFILE_CSV_HEADER",
]

PROFILE_CSV_HEADER = ["time_s", "irradiance_w_m2", "temperature_c"]


def celsius_to_kelvin(t_c: float) -> float:
    return t_c + 273.15


class EnvSegment(NamedTuple):
    t_start: float
    env: EnvCondition


@dataclass(frozen=True)
class EnvProfile:
    """Ordered step changes of (irradiance, temperature), plus a duration."""

    segments: tuple[EnvSegment, ...]
    duration: float

    def __post_init__(self):
        if not self.segments:
            raise ValueError("profile needs at least one segment")
        if self.segments[0].t_start != 0.0:
            raise ValueError("first segment must start at t = 0.0")
        starts = [s.t_start for s in self.segments]
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValueError("segment start times must be strictly increasing")
        if self.duration <= 0:
            raise ValueError("duration must be > 0")

    def env_at(self, t: float) -> EnvCondition:
        """Environment active at time t (step changes, no interpolation)."""
        current = self.segments[0].env
        for seg in self.segments:
            if seg.t_start <= t:
                current = seg.env
            else:
                break
        return current


# Benchmark cloud transient: 16 irradiance steps over 5 s at constant 298 K.
_TABLE1_STEPS = (
    (0.0, 1000.0), (0.2, 20.0), (0.7, 200.0), (0.9, 300.0),
    (1.2, 400.0), (1.5, 500.0), (1.9, 650.0), (2.5, 850.0),
    (3.0, 990.0), (4.0, 150.0), (4.2, 120.0), (4.3, 20.0),
    (4.4, 210.0), (4.5, 330.0), (4.8, 340.0), (4.9, 350.0),
)


def builtin_table1_profile() -> EnvProfile:
    """The bundled cloud-transient benchmark profile (5 s, 16 steps, 298 K)."""
    segments = tuple(
        EnvSegment(t_start=t, env=EnvCondition(g=g, t=298.0)) for t, g in _TABLE1_STEPS
    )
    return EnvProfile(segments=segments, duration=5.0)


def load_profile_csv(path: str | Path) -> EnvProfile:
    """Load a profile from CSV with header time_s,irradiance_w_m2,temperature_c.

    Temperatures are given in celsius and converted at this boundary.
    The profile duration defaults to the last segment's start time; runs
    normally override it via the simulation duration setting.
    """
    path = Path(path)
    segments: list[EnvSegment] = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != PROFILE_CSV_HEADER:
            raise ValueError(
                f"{path}: expected header {','.join(PROFILE_CSV_HEADER)}, got {header}"
            )
        for row_num, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 3:
                raise ValueError(f"{path}:{row_num}: expected 3 columns, got {len(row)}")
            try:
                t, g, temp_c = (float(cell) for cell in row)
            except ValueError as exc:
                raise ValueError(f"{path}:{row_num}: non-numeric value ({exc})") from None
            segments.append(EnvSegment(t, EnvCondition(g=g, t=celsius_to_kelvin(temp_c))))
    if not segments:
        raise ValueError(f"{path}: profile has no data rows")
    duration = max(segments[-1].t_start, segments[0].t_start + 1e-9)
    return EnvProfile(segments=tuple(segments), duration=duration)

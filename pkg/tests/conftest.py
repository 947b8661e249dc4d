"""Shared fixtures: the BP SX 150 preset model and common helpers."""

from __future__ import annotations

import pytest

from mpptbench.config import load_panel_preset
from mpptbench.controllers import ControllerParams
from mpptbench.converter import BuckBoost
from mpptbench.oracle import MppOracle
from mpptbench.pvmodel import STC, ArrayConfig, CellParams, EnvCondition, PVArray


@pytest.fixture(scope="session")
def bp_preset():
    return load_panel_preset("bp_sx150")


@pytest.fixture(scope="session")
def bp_cell(bp_preset) -> CellParams:
    return bp_preset.cell_params()


@pytest.fixture(scope="session")
def bp_panel(bp_cell) -> PVArray:
    """One 72-cell panel."""
    return PVArray(cell=bp_cell, layout=ArrayConfig(n_series=72, n_parallel=1))


@pytest.fixture(scope="session")
def bp_oracle(bp_panel) -> MppOracle:
    return MppOracle(bp_panel)


@pytest.fixture(scope="session")
def stc() -> EnvCondition:
    return STC


@pytest.fixture(scope="session")
def bp_converter(bp_oracle) -> BuckBoost:
    """Bus sized so the STC MPP sits at duty 0.5."""
    return BuckBoost(v_bus=bp_oracle.find(STC).v_mpp)


@pytest.fixture()
def default_params() -> ControllerParams:
    return ControllerParams()

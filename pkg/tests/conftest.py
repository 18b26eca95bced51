"""Shared helpers: small configurations that keep test runtimes low."""

import pytest

from subthzrx import (Architecture, ArrayGeometry, ClusterChannelParams, ReceiverConfig,
                      SimulationParams, validate_config)


def small_config(architecture=Architecture.SUBARRAY, rows=4, cols=2, rf=2, users=2,
                 user_rows=2, user_cols=1, subcarriers=4, snr=1.0, **overrides):
    cfg = ReceiverConfig(
        architecture=architecture,
        bs_geometry=ArrayGeometry(rows, cols),
        rf_chains=rows * cols if architecture is Architecture.DIGITAL else rf,
        users=users,
        user_geometry=ArrayGeometry(user_rows, user_cols),
        subcarriers=subcarriers,
        per_antenna_snr=snr,
        **overrides,
    )
    return validate_config(cfg)


@pytest.fixture
def fast_sim():
    return SimulationParams(symbols_per_trial=200, trials=2, seed=0, refine_sweeps=1)


@pytest.fixture
def chan_params():
    return ClusterChannelParams(seed=0)

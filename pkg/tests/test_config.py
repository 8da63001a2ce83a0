"""
test_config
===========

Tests for the `config` module of the `wavetail` package.
"""

# Import Python libraries
from pathlib import Path

import numpy as np
import pytest

# Import the library itself
import wavetail
from wavetail import config

CONFIG_PATH = Path(__file__).parent / "test_configs"


def test_default():
    default = wavetail.load_config()
    assert default == config.DEFAULT_CONFIG
    assert default.name == "barrier"
    assert default.orders == (0, 1, 2)
    assert default.potential() == wavetail.square_barrier(16.0, 1.0)
    assert default.packet(1) == wavetail.normalize(1, 1.0, 1.0, -20.0)

    times = default.times()
    assert times.size == 126
    assert times[0] == pytest.approx(1.0)
    assert times[-1] == pytest.approx(1e5)
    assert np.allclose(np.diff(np.log10(times)), 0.04)

    assert default.snapshots == (0.0, 5.0, 10.0, 20.0)
    assert default.oracle_times == (5.0, 10.0, 20.0)
    assert default.observation_xs().size == 401
    assert default.snapshot_xs()[0] == -40.0


def test_quadrature_and_slopes():
    default = config.DEFAULT_CONFIG
    assert default.quadrature() == {
        "order": 8,
        "panel_phase": pytest.approx(np.pi / 4),
        "cutoff": 8.0,
        "max_width": 0.05,
        "damping": 40.0,
        "depth": 0.05,
        "tolerance": 1e-6,
    }
    assert default.slope_tolerance(0) == 0.15
    assert default.slope_tolerance(2) == 0.25
    assert default.slope_tolerance(3) == 0.25


def test_free_preset():
    free = wavetail.load_config("free")
    assert free.name == "free"
    assert free.potential().is_free
    assert free.directory == Path("wavetail-free")
    assert free.orders == (0, 1, 2)


def test_piecewise_file():
    loaded = wavetail.load_config(CONFIG_PATH / "a.ini")
    assert loaded.name == "a"
    assert loaded.orders == (1,)
    pot = loaded.potential()
    assert isinstance(pot, wavetail.PiecewiseConstant)
    assert pot.barrier_momentum == pytest.approx(3.0)


@pytest.mark.parametrize(
    "name,fields",
    [
        ("b", ["potential.height"]),
        ("c", ["schedule.stop"]),
        ("d", ["packet.orders", "packet.width", "observation.right", "observation.points", "tolerances.ratio"]),
        ("e", ["potential.segments"]),
    ],
)
def test_invalid_files(name, fields):
    with pytest.raises(wavetail.ConfigError) as error:
        wavetail.load_config(CONFIG_PATH / f"{name}.ini")

    assert len(error.value.messages) == len(fields)
    for message, field in zip(error.value.messages, fields):
        assert message.startswith(f"{field}:")


def test_message_format():
    with pytest.raises(wavetail.ConfigError) as error:
        wavetail.load_config(CONFIG_PATH / "b.ini")
    assert error.value.messages == ["potential.height: must be nonnegative (got '-16.0')"]


def test_missing_sources(tmp_path):
    with pytest.raises(wavetail.ConfigError):
        wavetail.load_config("no_such_preset")
    with pytest.raises(wavetail.ConfigError):
        wavetail.load_config(tmp_path / "missing.ini")

    malformed = tmp_path / "malformed.ini"
    malformed.write_text("height = 1\n", encoding="utf-8")
    with pytest.raises(wavetail.ConfigError):
        wavetail.load_config(malformed)

"""
test_observables
================

Tests for the `observables` module of the `wavetail` package.
"""

# Import Python libraries
import numpy as np
import pytest

# Import the library itself
import wavetail
from wavetail import observables
from wavetail.propagation import Method, WaveField

FREE = wavetail.square_barrier(0.0, 1.0)


def _series(times, values):
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    return wavetail.ProbabilitySeries(
        -22.0, -18.0, times, values, np.zeros(times.size), ("spectral",) * times.size
    )


def test_nonescape():
    xs = np.linspace(-1.0, 1.0, 401)
    field = WaveField(xs, 1.0, np.exp(-(xs**2) / 2.0) + 0j, Method.SPECTRAL)
    result = wavetail.nonescape(field, -1.0, 1.0)

    assert result.value == pytest.approx(np.sqrt(np.pi) * 0.8427007929497149, rel=1e-9)
    assert result.error < 1e-4


@pytest.mark.parametrize("a,b,points", [(1.0, -1.0, 401), (-1.0, 1.0, 100), (-2.0, 1.0, 401)])
def test_nonescape_invalid(a, b, points):
    xs = np.linspace(-1.0, 1.0, points)
    field = WaveField(xs, 1.0, np.ones(points, dtype=complex), Method.SPECTRAL)
    with pytest.raises(ValueError):
        wavetail.nonescape(field, a, b)


def test_nonescape_series():
    packet = wavetail.normalize(0, 1.0, 1.0, -20.0)
    times = [1.0, 2.0, 4.0]
    series = wavetail.nonescape_series(FREE, packet, times, -22.0, -18.0, probe=-20.0)

    xs = np.linspace(-22.0, -18.0, 401)
    for t, value in zip(times, series.values):
        exact = WaveField(xs, t, wavetail.free_evolution(packet, xs, t), Method.SPECTRAL)
        assert value == pytest.approx(wavetail.nonescape(exact, -22.0, -18.0).value, abs=1e-8)

    probe = wavetail.free_evolution(packet, [-20.0], times[-1])[0]
    assert series.probe_values[-1] == pytest.approx(probe, abs=1e-8)
    assert series.methods == ("spectral",) * 3

    threaded = wavetail.nonescape_series(FREE, packet, times, -22.0, -18.0, workers=2)
    assert np.allclose(threaded.values, series.values, rtol=0.0, atol=1e-15)
    assert threaded.probe_values is None

    with pytest.raises(ValueError):
        wavetail.nonescape_series(FREE, packet, [2.0, 1.0], -22.0, -18.0)


def test_nonescape_series_resolution():
    barrier = wavetail.square_barrier(16.0, 1.0)
    packet = wavetail.normalize(0, 1.0, 1.0, -20.0)
    times = [50.0, 500.0, 5000.0]
    coarse = wavetail.nonescape_series(barrier, packet, times, -22.0, -18.0, 401)
    fine = wavetail.nonescape_series(barrier, packet, times, -22.0, -18.0, 801)

    assert np.allclose(fine.values, coarse.values, rtol=1e-6, atol=0.0)


def test_window():
    series = _series(np.arange(1.0, 11.0), np.arange(10.0, 0.0, -1.0))
    window = series.window(3.0, 5.0)
    assert np.allclose(window.times, [3.0, 4.0, 5.0])
    assert np.allclose(window.values, [8.0, 7.0, 6.0])
    assert len(window.methods) == 3


def test_fit_power_law():
    times = np.geomspace(1.0, 1e4, 41)
    series = _series(times, 2.0 * times**-3.0)

    fit = wavetail.fit_power_law(series)
    assert fit.exponent == pytest.approx(-3.0, abs=1e-10)
    assert fit.r_squared == pytest.approx(1.0)
    assert fit.points == 41
    assert not fit.binned

    binned = wavetail.fit_power_law(series, (10.0, 1e4), bins_per_decade=5)
    assert binned.exponent == pytest.approx(-3.0, abs=1e-10)
    assert binned.binned


def test_fit_power_law_invalid():
    times = np.geomspace(1.0, 1e4, 41)
    with pytest.raises(ValueError):
        wavetail.fit_power_law(_series(times, times**-3.0), (1.0, 2.0))

    values = times**-3.0
    values[20] = 0.0
    with pytest.raises(ValueError):
        wavetail.fit_power_law(_series(times, values))


def test_local_slopes():
    times = np.geomspace(1.0, 1e3, 31)
    midpoints, slopes = observables.local_slopes(_series(times, times**-1.5))
    assert midpoints.size == 30
    assert np.allclose(slopes, -1.5)


def test_select_window():
    times = np.geomspace(1.0, 1e4, 81)
    # Oscillating early part, clean power law later
    values = times**-3.0 * (1.0 + 0.5 * np.sin(times) * (times < 100.0))
    window, stable = observables.select_window(_series(times, values))

    assert stable
    assert window[1] == pytest.approx(1e4)
    assert np.log10(window[1] / window[0]) >= 0.99


def test_select_window_unstable():
    times = np.geomspace(1.0, 1e2, 41)
    values = times**-3.0 * (1.0 + 0.9 * np.sin(5.0 * times))
    window, stable = observables.select_window(_series(times, values))

    assert not stable
    assert window[1] == pytest.approx(1e2)


def test_profile_regions():
    times = np.arange(1.0, 9.0)
    profile = observables.profile_regions(_series(times, [1.0, 0.5, 0.2, 0.3, 0.4, 0.3, 0.2, 0.1]))
    assert profile.found
    assert profile.trough == 3.0
    assert profile.decay == 5.0
    assert profile.rises == 2

    profile = observables.profile_regions(_series(times, np.linspace(1.0, 0.1, 8)))
    assert not profile.found
    assert profile.decay is None


def test_profile_regions_several_revivals():
    # rises and falls alternate before the final decay sets in
    times = np.arange(1.0, 12.0)
    values = [1.0, 0.5, 0.2, 0.3, 0.25, 0.35, 0.3, 0.4, 0.3, 0.2, 0.1]
    profile = observables.profile_regions(_series(times, values))

    assert profile.found
    assert profile.trough == 3.0
    assert profile.decay == 8.0
    assert profile.rises == 3


def test_profile_regions_ending_on_rise():
    profile = observables.profile_regions(_series([1.0, 2.0, 3.0], [1.0, 0.5, 0.6]))
    assert not profile.found
    assert profile.trough == 2.0
    assert profile.decay is None

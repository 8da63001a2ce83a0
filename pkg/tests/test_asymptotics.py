"""
test_asymptotics
================

Tests for the `asymptotics` module of the `wavetail` package.
"""

# Import Python libraries
import numpy as np
import pytest

# Import the library itself
import wavetail
from wavetail import asymptotics

BARRIER = wavetail.square_barrier(16.0, 1.0)
FREE = wavetail.square_barrier(0.0, 1.0)
XS = np.linspace(-22.0, -18.0, 41)


def _packet(m):
    return wavetail.normalize(m, 1.0, 1.0, -20.0)


@pytest.mark.parametrize(
    "pot,m,power",
    [(BARRIER, 0, 1.5), (BARRIER, 1, 1.5), (BARRIER, 2, 2.5), (FREE, 0, 0.5), (FREE, 2, 1.5)],
)
def test_leading_power(pot, m, power):
    expansion = wavetail.tail_expansion(pot, _packet(m), XS)
    assert expansion.leading_power == power
    assert len(expansion.terms) == 2
    assert expansion.terms[0].power < expansion.terms[1].power


@pytest.mark.parametrize("pot", [BARRIER, FREE])
@pytest.mark.parametrize("m", [0, 1, 2])
def test_routes_agree(pot, m):
    identities = wavetail.tail_expansion(pot, _packet(m), XS)
    series = wavetail.tail_expansion(pot, _packet(m), XS, route="series")

    assert series.route == "series"
    for first, second in zip(identities.terms, series.terms):
        assert first.power == second.power
        scale = max(np.max(np.abs(first.coefficient)), 1e-300)
        assert np.max(np.abs(first.coefficient - second.coefficient)) <= 1e-12 * scale


def test_parity():
    assert wavetail.tail_expansion(BARRIER, _packet(0), XS).parity == "odd"
    assert wavetail.tail_expansion(FREE, _packet(0), XS).parity == "even"


def test_invalid():
    with pytest.raises(ValueError):
        wavetail.tail_expansion(BARRIER, _packet(0), XS, m=4)
    with pytest.raises(ValueError):
        wavetail.tail_expansion(BARRIER, _packet(0), XS, route="saddle")

    expansion = wavetail.tail_expansion(BARRIER, _packet(0), XS)
    with pytest.raises(ValueError):
        wavetail.tail_value(expansion, 0.0)
    with pytest.raises(ValueError):
        wavetail.asymptotic_nonescape(expansion, [10.0], 0.0, 1.0)


def test_tail_value_shapes():
    expansion = wavetail.tail_expansion(BARRIER, _packet(0), XS)
    assert wavetail.tail_value(expansion, 10.0).shape == XS.shape
    assert wavetail.tail_value(expansion, [10.0, 20.0, 30.0]).shape == (3, XS.size)

    leading = wavetail.tail_value(expansion, 10.0, leading_only=True)
    full = wavetail.tail_value(expansion, 10.0)
    # The barrier's first term vanishes, so only the leading one is left
    assert np.allclose(leading, full)


@pytest.mark.parametrize("m", [0, 2])
def test_free_tail_matches_closed_form(m):
    packet = _packet(m)
    xs = np.array([-20.0])
    t = 1e5
    expansion = wavetail.tail_expansion(FREE, packet, xs)
    exact = wavetail.free_evolution(packet, xs, t)

    assert abs(wavetail.tail_value(expansion, t)[0] / exact[0] - 1.0) < 1e-2


def test_barrier_tail_matches_spectral():
    packet = _packet(0)
    xs = np.array([-20.0])
    t = 1e5
    expansion = wavetail.tail_expansion(BARRIER, packet, xs)
    field = wavetail.evolve_spectral(BARRIER, packet, xs, t)

    assert abs(abs(wavetail.tail_value(expansion, t)[0]) / abs(field.values[0]) - 1.0) < 0.1


def test_barrier_tail_second_order():
    # amplitude and phase of the t^-5/2 tail
    packet = _packet(2)
    xs = np.array([-20.0])
    t = 1e5
    expansion = wavetail.tail_expansion(BARRIER, packet, xs)
    field = wavetail.evolve_spectral(BARRIER, packet, xs, t)
    ratio = wavetail.tail_value(expansion, t)[0] / field.values[0]

    assert expansion.leading_power == 2.5
    assert abs(abs(ratio) - 1.0) < 0.05
    assert abs(np.angle(ratio)) < 0.05


def test_asymptotic_nonescape():
    expansion = wavetail.tail_expansion(BARRIER, _packet(0), XS)
    times = np.geomspace(10.0, 1e4, 7)
    probabilities, envelope = wavetail.asymptotic_nonescape(expansion, times, -22.0, -18.0)

    assert probabilities.shape == envelope.shape == times.shape
    assert np.all(probabilities <= envelope * (1.0 + 1e-12))
    # P ~ t^(-3) from the leading power 3/2
    slopes = np.diff(np.log(envelope)) / np.diff(np.log(times))
    assert np.allclose(slopes, -3.0)


def test_order_terms():
    phi = np.zeros((2, 1), dtype=complex)
    dk_phi = np.ones((2, 1), dtype=complex)
    table = np.ones((2, 5), dtype=complex)
    first, second = asymptotics.order_terms(phi, dk_phi, table, 1)

    assert (first.power, second.power) == (1.0, 1.5)
    assert np.allclose(first.coefficient, 0.0)


def test_crossover_time():
    times = np.arange(1.0, 101.0)
    asymptote = times**-1.5
    exact = asymptote * (1.0 + 1.0 / times)

    assert asymptotics.crossover_time(times, exact, asymptote) == 7.0
    assert asymptotics.crossover_time(times, exact, asymptote, threshold=2.0) == 1.0
    assert asymptotics.crossover_time(times, 2.0 * asymptote, asymptote) is None

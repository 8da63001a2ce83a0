"""
test_potential
==============

Tests for the `potential` module of the `wavetail` package.
"""

# Import Python libraries
import numpy as np
import pytest

# Import the library itself
import wavetail
from wavetail import potential

KS = np.array([-30.0, -4.1, -1.0, -0.01, 0.01, 1.0, 3.99, 4.0, 4.01, 30.0])


@pytest.fixture
def barrier():
    return wavetail.square_barrier(16.0, 1.0)


def test_validation():
    with pytest.raises(ValueError):
        wavetail.square_barrier(-1.0, 1.0)
    with pytest.raises(ValueError):
        wavetail.square_barrier(1.0, 0.0)
    with pytest.raises(ValueError):
        wavetail.piecewise_constant([(-1.0, 0.5, 1.0), (0.0, 1.0, 2.0)], 1.0)
    with pytest.raises(ValueError):
        wavetail.piecewise_constant([(-1.0, 2.0, 1.0)], 1.0)
    with pytest.raises(ValueError):
        wavetail.piecewise_constant([(-1.0, 1.0, -1.0)], 1.0)


def test_properties(barrier):
    assert barrier.barrier_momentum == pytest.approx(4.0)
    assert not barrier.is_free
    assert wavetail.square_barrier(0.0, 1.0).is_free
    assert np.allclose(barrier.value([-2.0, 0.0, 2.0]), [0.0, 16.0, 0.0])
    assert barrier.as_piecewise() != barrier
    assert barrier.as_piecewise() == wavetail.piecewise_constant([(-1.0, 1.0, 16.0)], 1.0)


@pytest.mark.parametrize(
    "pot",
    [
        wavetail.square_barrier(16.0, 1.0),
        wavetail.piecewise_constant([(-1.0, -0.2, 4.0), (0.3, 1.0, 9.0)], 1.0),
    ],
)
def test_unitarity(pot):
    data = wavetail.amplitudes(pot, KS)
    error = np.abs(data.transmission) ** 2 + np.abs(data.reflection) ** 2 - 1.0
    assert np.max(np.abs(error)) < 1e-12


def test_transfer_matrix_matches_closed_form(barrier):
    closed = wavetail.amplitudes(barrier, KS)
    transfer = wavetail.amplitudes(barrier.as_piecewise(), KS)

    assert np.max(np.abs(closed.g_minus - transfer.g_minus)) < 1e-10
    assert np.max(np.abs(closed.h_plus - transfer.h_plus)) < 1e-10


def test_scalar_and_zero(barrier):
    data = wavetail.amplitudes(barrier, 1.0)
    assert isinstance(data.g_minus, complex)
    assert isinstance(data.transmission, complex)
    assert data.rho == pytest.approx(np.sqrt(15.0))

    with pytest.raises(ValueError):
        wavetail.amplitudes(barrier, 0.0)
    with pytest.raises(ValueError):
        wavetail.amplitudes(barrier, [1.0, 0.0])


def test_free_amplitudes():
    data = wavetail.amplitudes(wavetail.square_barrier(0.0, 1.0), KS)
    assert np.allclose(data.transmission, 1.0)
    assert np.allclose(data.reflection, 0.0)


def test_zero_momentum_limits(barrier):
    data = wavetail.amplitudes(barrier, np.array([1e-9, -1e-9]))
    assert abs(data.g_minus[0] + 1.0) < 1e-6
    assert abs(data.g_minus[1]) < 1e-6

    assert potential.g_minus_derivative_at_zero(barrier, 1, 0) == -1.0
    assert potential.g_minus_derivative_at_zero(barrier, -1, 0) == 0.0
    with pytest.raises(ValueError):
        potential.g_minus_derivative_at_zero(barrier, 1, 2)
    with pytest.raises(ValueError):
        potential.g_minus_derivative_at_zero(barrier.as_piecewise(), 1, 0)


@pytest.mark.parametrize("sign", [1, -1])
def test_g_minus_derivatives(barrier, sign):
    closed = wavetail.g_minus_derivatives(barrier, sign, 3)
    contour = wavetail.g_minus_derivatives(barrier.as_piecewise(), sign, 3)

    assert np.allclose(closed[:2], [potential.g_minus_derivative_at_zero(barrier, sign, n) for n in (0, 1)])
    assert np.allclose(contour, closed, rtol=1e-8, atol=1e-8)

    richardson = wavetail.g_minus_derivatives(barrier.as_piecewise(), sign, 1, "richardson")
    assert np.allclose(richardson, closed[:2], atol=1e-5)

    with pytest.raises(ValueError):
        wavetail.g_minus_derivatives(barrier, sign, 6)
    with pytest.raises(ValueError):
        wavetail.g_minus_derivatives(barrier, sign, 2, method="euler")


def test_pole_free_radius(barrier):
    assert potential.pole_free_radius(barrier, 1, 0.05) == 0.05


def test_state_continuity(barrier):
    for k in (-2.0, 0.5, 5.0):
        for edge in (-1.0, 1.0):
            xs = [edge - 1e-9, edge + 1e-9]
            values = wavetail.scattering_state(barrier, k, xs)
            slopes = wavetail.scattering_state(barrier, k, xs, derivative=True)
            assert abs(values[0] - values[1]) < 1e-6
            assert abs(slopes[0] - slopes[1]) < 1e-6


def test_state_exterior(barrier):
    xs = np.array([-3.0, -2.0])
    data = wavetail.amplitudes(barrier, 1.5)
    expected = (np.exp(1.5j * xs) + data.g_minus * np.exp(-1.5j * xs)) / np.sqrt(2.0 * np.pi)
    assert np.allclose(wavetail.scattering_state(barrier, 1.5, xs), expected)

    with pytest.raises(ValueError):
        wavetail.scattering_state(barrier, 0.0, xs)


def test_phi_at_zero(barrier):
    xs = np.linspace(-5.0, 5.0, 11)
    for sign in (1, -1):
        assert np.max(np.abs(wavetail.phi_at_zero(barrier, sign, xs))) < 1e-6

    free = wavetail.square_barrier(0.0, 1.0)
    assert np.allclose(wavetail.phi_at_zero(free, 1, xs), 1.0 / np.sqrt(2.0 * np.pi))


def test_dk_phi_at_zero(barrier):
    xs = np.array([-20.0, -2.0])
    g1 = potential.g_minus_derivative_at_zero(barrier, 1, 1)
    expected = (2j * xs + g1) / np.sqrt(2.0 * np.pi)
    assert np.allclose(wavetail.dk_phi_at_zero(barrier, 1, xs), expected)

    free = wavetail.square_barrier(0.0, 1.0)
    assert np.allclose(wavetail.dk_phi_at_zero(free, 1, xs), 1j * xs / np.sqrt(2.0 * np.pi))

    # Numeric derivative inside the barrier agrees with the exterior closed form at the edge
    inside = wavetail.dk_phi_at_zero(barrier, 1, [-1.0 - 1e-6, -1.0])
    assert abs(inside[0] - inside[1]) < 1e-4

"""
test_spectral
=============

Tests for the `spectral` module of the `wavetail` package.
"""

# Import Python libraries
import numpy as np
import pytest

# Import the library itself
import wavetail
from wavetail import packets, spectral

BARRIER = wavetail.square_barrier(16.0, 1.0)
FREE = wavetail.square_barrier(0.0, 1.0)


def _packet(m):
    return wavetail.normalize(m, 1.0, 1.0, -20.0)


def test_closed_form():
    packet = _packet(1)
    ks = np.array([-2.0, -0.5, 0.5, 2.0])
    data = wavetail.amplitudes(BARRIER, ks)
    psi_hat = wavetail.momentum_amplitude(packet, ks)
    mirrored = wavetail.momentum_amplitude(packet, -ks)
    expected = np.where(
        ks > 0, psi_hat + np.conj(data.g_minus) * mirrored, np.conj(data.g_minus) * psi_hat
    )

    result = wavetail.spectral_amplitude(BARRIER, packet, ks)
    assert result.method == "closed"
    assert result.warnings == ()
    assert np.allclose(result.values, expected)


@pytest.mark.parametrize("m", [0, 1, 2])
def test_direct_overlap(m):
    packet = _packet(m)
    ks = np.array([-1.0, -0.5, 0.5, 1.0, 2.5])
    closed = wavetail.spectral_amplitude(BARRIER, packet, ks)
    direct = wavetail.spectral_amplitude(BARRIER, packet, ks, method="quadrature")

    assert direct.method == "quadrature"
    assert np.max(np.abs(closed.values - direct.values)) < 1e-6


def test_support_warning():
    packet = wavetail.normalize(0, 1.0, 1.0, 0.0)
    result = wavetail.spectral_amplitude(BARRIER, packet, [1.0])
    assert len(result.warnings) == 1


def test_invalid():
    with pytest.raises(ValueError):
        wavetail.spectral_amplitude(BARRIER, _packet(0), [0.0, 1.0])
    with pytest.raises(ValueError):
        wavetail.spectral_amplitude(BARRIER, _packet(0), [1.0], method="fft")
    with pytest.raises(ValueError):
        wavetail.derivatives_at_zero(BARRIER, _packet(0), 5, 1)
    with pytest.raises(ValueError):
        wavetail.derivatives_at_zero(BARRIER, _packet(0), 1, 0)


def test_spectral_grid():
    grid = spectral.spectral_grid(_packet(0))
    assert np.all(np.diff(grid) > 0.0)
    assert np.allclose(grid, -grid[::-1])
    assert grid[-1] == pytest.approx(9.0)
    assert np.min(np.abs(grid)) == pytest.approx(1e-4)


@pytest.mark.parametrize("pot", [BARRIER, FREE])
@pytest.mark.parametrize("m", [0, 2])
def test_spectral_norm(pot, m):
    assert spectral.spectral_norm(pot, _packet(m)) == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize(
    "pot,m,expected",
    [(BARRIER, 0, 1), (BARRIER, 1, 1), (BARRIER, 2, 3), (FREE, 0, 0), (FREE, 1, 1), (FREE, 2, 2)],
)
def test_vanishing_order(pot, m, expected):
    assert wavetail.vanishing_order(pot, _packet(m)) == expected


def test_vanishing_order_undetermined():
    with pytest.raises(wavetail.OrderUndeterminedError):
        wavetail.vanishing_order(BARRIER, _packet(0), scale=np.inf)


@pytest.mark.parametrize("pot", [BARRIER, FREE])
@pytest.mark.parametrize("m", [0, 1, 2])
def test_derivative_oracles(pot, m):
    packet = _packet(m)
    formula = spectral.derivative_table(pot, packet)
    contour = spectral.derivative_table(pot, packet, "contour")

    assert formula.shape == (2, spectral.MAX_ORDER + 1)
    assert np.max(np.abs(formula[:, :4] - contour[:, :4])) < 1e-6


def test_derivative_richardson():
    packet = _packet(1)
    formula = spectral.derivative_table(BARRIER, packet)
    richardson = spectral.numeric_derivatives_at_zero(BARRIER, packet, 1, "richardson")
    scale = np.max(np.abs(formula[:, 1]))

    assert np.max(np.abs(richardson - formula[:, :2])) < 1e-2 * scale


def test_derivatives_at_zero():
    packet = _packet(1)
    # psi_tilde'(+0) = 2 psi_hat'(0) for a barrier, as g_minus(+0) = -1
    expected = 2.0 * packets.momentum_derivatives(packet, 1)[1]
    assert wavetail.derivatives_at_zero(BARRIER, packet, 1, 1) == pytest.approx(expected)
    assert wavetail.derivatives_at_zero(BARRIER, packet, 0, -1) == 0.0


def test_derivative_table_read_only():
    table = spectral.derivative_table(BARRIER, _packet(0))
    assert spectral.derivative_table(BARRIER, _packet(0)) is table
    with pytest.raises(ValueError):
        table[0, 0] = 1.0


def test_spectral_profile():
    profile = spectral.spectral_profile(BARRIER, _packet(2))
    assert profile.vanishing_order == 3
    assert profile.derivatives.shape == (2, spectral.MAX_ORDER + 1)
    assert profile.values.shape == profile.ks.shape

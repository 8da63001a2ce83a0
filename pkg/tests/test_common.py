"""
test_common
===========

Tests for the `common` module of the `wavetail` package.
"""

# Import Python libraries
import math

import numpy as np
import pytest

# Import the library itself
from wavetail import common


def test_gauss_panels_polynomial():
    nodes, weights = common.gauss_panels([0.0, 1.0, 3.0], 8)
    assert nodes.size == 16
    assert np.sum(weights * nodes**5) == pytest.approx(3.0**6 / 6.0, rel=1e-13)


def test_gauss_panels_complex_path():
    nodes, weights = common.gauss_panels([0.0, 1.0, 1.0 + 1.0j], 4)
    assert np.sum(weights * nodes**2) == pytest.approx((1.0 + 1.0j) ** 3 / 3.0, abs=1e-13)


@pytest.mark.parametrize("edges,order", [([1.0], 8), ([0.0, 1.0], 0)])
def test_gauss_panels_invalid(edges, order):
    with pytest.raises(ValueError):
        common.gauss_panels(edges, order)


@pytest.mark.parametrize("rate,reach", [(0.0, 20.0), (5.0, 0.0), (100.0, 42.0)])
def test_phase_edges(rate, reach):
    edges = common.phase_edges(0.0, 9.0, rate, reach, math.pi / 4, max_width=0.5)
    phase = rate * edges**2 + reach * edges

    assert edges[0] == 0.0 and edges[-1] == 9.0
    assert np.all(np.diff(edges) > 0.0)
    assert np.all(np.diff(edges) <= 0.5 + 1e-12)
    assert np.all(np.diff(phase) <= math.pi / 4 * (1.0 + 1e-9))


def test_phase_edges_pure_quadratic():
    with np.errstate(all="raise"):
        edges = common.phase_edges(0.0, 4.0, 10.0, 0.0)

    assert edges[0] == 0.0 and edges[-1] == 4.0
    assert np.all(np.diff(10.0 * edges**2) <= math.pi / 4 * (1.0 + 1e-9))


def test_phase_edges_invalid():
    with pytest.raises(ValueError):
        common.phase_edges(2.0, 1.0, 1.0, 1.0)


@pytest.mark.parametrize("side", [1, -1])
def test_richardson_limit(side):
    limit = common.richardson_limit(lambda h: math.sin(h) / h, side)
    assert limit == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("order", [1, 2, 3])
def test_richardson_derivative(order):
    value = common.richardson_derivative(math.exp, order, -1, (1e-2, 5e-3, 2.5e-3))
    assert value == pytest.approx(1.0, abs=1e-6)


def test_richardson_derivative_invalid():
    with pytest.raises(ValueError):
        common.richardson_derivative(math.exp, 0)


def test_taylor_coefficients():
    expected = np.array([1.0 / math.factorial(n) for n in range(7)])
    coefficients = common.taylor_coefficients(np.exp, 6, radius=0.5)
    assert np.allclose(coefficients, expected, rtol=1e-10, atol=1e-12)

    # roundoff grows like eps / radius**n on small circles
    coefficients = common.taylor_coefficients(np.exp, 6)
    assert np.all(np.abs(coefficients - expected) <= 1e-13 / 0.05 ** np.arange(7))

    derivatives = common.contour_derivatives(lambda z: np.exp(2.0 * z), 4, radius=0.1)
    assert np.allclose(derivatives, [2.0**n for n in range(5)], rtol=1e-10)

    with pytest.raises(ValueError):
        common.taylor_coefficients(np.exp, 8, points=8)


def test_winding_number():
    circle = np.exp(2j * np.pi * np.arange(256) / 256)
    assert common.winding_number(circle) == 1
    assert common.winding_number(circle**2) == 2
    assert common.winding_number(np.conj(circle)) == -1
    assert common.winding_number(circle + 3.0) == 0


def test_format_value():
    assert common.format_value(True) == "true"
    assert common.format_value(np.int64(3)) == "3"
    assert common.format_value(0.1) == "0.10000000000000001"
    assert common.format_value("spectral") == "spectral"


def test_csv(tmp_path):
    path = common.write_csv(tmp_path / "table.csv", ["t", "method"], [(1.5, "spectral")])

    with open(path, encoding="utf-8") as handler:
        assert handler.readline().strip() == "# hbar=1, 2M=1, E=k^2"
    assert common.read_csv(path) == [{"t": "1.5", "method": "spectral"}]

    with pytest.raises(ValueError):
        common.write_csv(tmp_path / "bad.csv", ["t", "method"], [(1.0,)])


def test_config_error():
    error = common.ConfigError(["a: missing", "b: missing"])
    assert error.messages == ["a: missing", "b: missing"]
    assert str(error) == "a: missing; b: missing"

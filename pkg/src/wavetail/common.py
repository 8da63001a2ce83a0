"""
Utility functions for `wavetail`.
"""

# Import standard modules
from functools import lru_cache
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Sequence, Tuple, Union
import csv
import logging
import math

# Import third-party libraries
import numpy as np
from numpy.polynomial.legendre import leggauss

LOGGER = logging.getLogger(__name__)

# Unit convention, written as the first line of every table
UNITS = "hbar=1, 2M=1, E=k^2"

SQRT_2PI = math.sqrt(2.0 * math.pi)

# Default steps for one-sided Richardson extrapolation at zero momentum
RICHARDSON_STEPS = (1e-3, 1e-4, 1e-5)


class ZeroEnergyResonanceError(ValueError):
    """
    Raised when a stationary state does not vanish at zero momentum.
    """


class ConditioningError(ArithmeticError):
    """
    Raised when a transfer-matrix system is numerically singular.
    """

    def __init__(self, message: str, condition: float) -> None:
        super().__init__(message)
        self.condition = condition  # largest condition estimate found


class OrderUndeterminedError(ValueError):
    """
    Raised when no one-sided derivative of the spectral amplitude is nonzero.
    """


class ConfigError(ValueError):
    """
    Raised by configuration validation, collecting one message per field.
    """

    def __init__(self, messages: Iterable[str]) -> None:
        self.messages = list(messages)
        super().__init__("; ".join(self.messages))


@lru_cache(maxsize=32)
def _gauss_rule(order: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = leggauss(order)
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights


def gauss_panels(edges: Sequence, order: int = 8) -> Tuple[np.ndarray, np.ndarray]:
    """
    Build a composite Gauss-Legendre rule over consecutive panel edges.

    The edges may be complex, in which case the rule integrates along the
    polygonal path joining them and the weights carry the path direction.

    Parameters
    ----------
    edges : Sequence
        Panel edges, in path order; at least two.
    order : int
        Number of Gauss-Legendre nodes per panel.

    Returns
    -------
    Tuple[np.ndarray, np.ndarray]
        The quadrature nodes and weights.

    Raises
    ------
    ValueError
        If fewer than two edges are given or the order is not positive.
    """

    edges = np.asarray(edges)
    if edges.ndim != 1 or edges.size < 2:
        raise ValueError("At least two panel edges are needed")
    if order < 1:
        raise ValueError(f"Invalid Gauss-Legendre order `{order}`")

    x, w = _gauss_rule(order)
    half = 0.5 * (edges[1:] - edges[:-1])
    middle = 0.5 * (edges[1:] + edges[:-1])

    nodes = (middle[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()

    return nodes, weights


def phase_edges(
    start: float,
    stop: float,
    rate: float,
    reach: float,
    max_phase: float = math.pi / 4,
    max_width: float = np.inf,
) -> np.ndarray:
    """
    Split a momentum interval so that no panel carries too much phase.

    The phase of the integrands is bounded by `rate * k**2 + reach * k`, with
    `rate` the time and `reach` a bound on the positions entering the
    plane-wave factors. Edges are placed at equal phase increments, merged
    with a uniform subdivision limiting the panel width.

    Parameters
    ----------
    start : float
        Lower end of the interval, nonnegative.
    stop : float
        Upper end of the interval.
    rate : float
        Coefficient of the quadratic phase (the time).
    reach : float
        Coefficient of the linear phase.
    max_phase : float
        Largest phase increment per panel.
    max_width : float
        Largest panel width.

    Returns
    -------
    np.ndarray
        The sorted panel edges, including both ends.
    """

    if not 0.0 <= start < stop:
        raise ValueError(f"Invalid momentum interval `[{start}, {stop}]`")

    def phase(k):
        return rate * k * k + reach * k

    span = phase(stop) - phase(start)
    count = max(1, int(math.ceil(span / max_phase)))
    levels = phase(start) + span * np.arange(count + 1) / count

    # Stable inverse of the quadratic phase, also valid for rate == 0; the
    # interior levels are positive, so the denominator never vanishes
    if rate > 0.0 or reach > 0.0:
        inner = levels[1:-1]
        edges = np.empty(levels.size)
        edges[1:-1] = 2.0 * inner / (reach + np.sqrt(reach * reach + 4.0 * rate * inner))
        edges[0], edges[-1] = start, stop
    else:
        edges = np.array([start, stop])

    if np.isfinite(max_width):
        width_count = max(1, int(math.ceil((stop - start) / max_width)))
        edges = np.union1d(edges, np.linspace(start, stop, width_count + 1))

    return edges


def _extrapolate(values: Sequence[complex], steps: Sequence[float]) -> complex:
    """
    Neville table extrapolating to h = 0 a quantity with an error expansion in
    integer powers of h.
    """

    table = [np.asarray(values, dtype=complex)]
    steps = np.asarray(steps, dtype=float)
    for level in range(1, len(steps)):
        prev = table[-1]
        ratio = steps[:-level] / steps[level:]
        ratio = ratio.reshape((-1,) + (1,) * (prev.ndim - 1))
        table.append((ratio * prev[1:] - prev[:-1]) / (ratio - 1.0))

    result = table[-1][0]

    return complex(result) if result.ndim == 0 else result


def richardson_limit(
    func: Callable[[float], complex], side: int = 1, steps: Sequence[float] = RICHARDSON_STEPS
) -> complex:
    """
    Estimate a one-sided limit at zero by Richardson extrapolation.

    Parameters
    ----------
    func : Callable
        Function of a real nonzero argument.
    side : int
        +1 for the limit from above, -1 from below.
    steps : Sequence[float]
        Decreasing positive step sizes.

    Returns
    -------
    complex
        The extrapolated limit.
    """

    values = [func(side * h) for h in steps]
    return _extrapolate(values, steps)


def richardson_derivative(
    func: Callable[[float], complex],
    order: int = 1,
    side: int = 1,
    steps: Sequence[float] = RICHARDSON_STEPS,
) -> complex:
    """
    Estimate a one-sided derivative at zero without evaluating at zero.

    For each step `h` the forward difference of the requested order is built
    from the samples at `side * h * j`, `j = 1 .. order + 1`, and the resulting
    O(h) estimates are extrapolated to `h = 0`. Roundoff grows like
    `h**-order`, so high orders need the larger steps.

    Parameters
    ----------
    func : Callable
        Function of a real nonzero argument.
    order : int
        Derivative order, at least one.
    side : int
        +1 for the derivative from above, -1 from below.
    steps : Sequence[float]
        Decreasing positive step sizes.

    Returns
    -------
    complex
        The extrapolated derivative.
    """

    if order < 1:
        raise ValueError(f"Invalid derivative order `{order}`")

    coefficients = [(-1) ** (order - j) * math.comb(order, j) for j in range(order + 1)]
    estimates = []
    for h in steps:
        samples = [func(side * h * (j + 1)) for j in range(order + 1)]
        total = sum(c * s for c, s in zip(coefficients, samples))
        estimates.append(total / (side * h) ** order)

    return _extrapolate(estimates, steps)


def taylor_coefficients(
    func: Callable[[np.ndarray], np.ndarray],
    order: int,
    radius: float = 0.05,
    points: int = 64,
    center: complex = 0.0,
) -> np.ndarray:
    """
    Taylor coefficients of an analytic function from samples on a circle.

    Parameters
    ----------
    func : Callable
        Vectorized function, analytic in a disk around `center` larger than
        `radius`.
    order : int
        Highest coefficient returned.
    radius : float
        Radius of the sampling circle.
    points : int
        Number of samples; must exceed `order`.
    center : complex
        Expansion point.

    Returns
    -------
    np.ndarray
        Coefficients `c_0 .. c_order`.
    """

    if points <= order:
        raise ValueError(f"Need more than `{order}` contour points, got `{points}`")

    angles = 2.0 * np.pi * np.arange(points) / points
    values = np.asarray(func(center + radius * np.exp(1j * angles)), dtype=complex)
    coefficients = np.fft.fft(values)[: order + 1] / points

    return coefficients / radius ** np.arange(order + 1)


def contour_derivatives(
    func: Callable[[np.ndarray], np.ndarray], order: int, **kwargs
) -> np.ndarray:
    """
    Derivatives `f(0) .. f^(order)(0)` of an analytic function, by contour sampling.
    """

    coefficients = taylor_coefficients(func, order, **kwargs)
    factorials = np.array([math.factorial(n) for n in range(order + 1)], dtype=float)

    return coefficients * factorials


def winding_number(values: np.ndarray) -> int:
    """
    Winding number around zero of a closed curve given by its samples.

    The curve is closed by joining the last sample to the first; samples must
    be dense enough for the phase to change by less than pi between them.
    """

    closed = np.append(values, values[:1])
    phase = np.unwrap(np.angle(closed))

    return int(round((phase[-1] - phase[0]) / (2.0 * np.pi)))


def format_value(value) -> str:
    """
    Format a table entry, writing floats with full double precision.
    """

    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"

    return str(value)


def write_csv(
    path: Union[str, Path],
    header: Sequence[str],
    rows: Iterable[Sequence],
    comment: str = UNITS,
) -> Path:
    """
    Write a comma-separated table with a comment line and a header row.

    Parameters
    ----------
    path : Union[str, Path]
        Destination file.
    header : Sequence[str]
        Column names.
    rows : Iterable[Sequence]
        Table rows, each with one entry per column.
    comment : str
        Text of the leading comment line.

    Returns
    -------
    Path
        The path written.
    """

    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as handler:
        handler.write(f"# {comment}\n")
        writer = csv.writer(handler)
        writer.writerow(header)
        for row in rows:
            if len(row) != len(header):
                raise ValueError(f"Row `{row}` does not match header `{header}`")
            writer.writerow([format_value(value) for value in row])

    return path


def read_csv(path: Union[str, Path]) -> List[Dict[str, str]]:
    """
    Read a table written by `write_csv`, skipping comment lines.
    """

    with open(path, encoding="utf-8", newline="") as handler:
        lines = [line for line in handler if not line.startswith("#")]

    return list(csv.DictReader(lines))

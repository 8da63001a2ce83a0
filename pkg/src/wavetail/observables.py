"""
Module for the nonescape probability and the power laws of its tail.
"""

# Import standard modules
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, Tuple
import logging

# Import third-party libraries
import numpy as np
from scipy import integrate, stats

# Import local modules
from .packets import PacketSpec
from .potential import PotentialSpec
from .propagation import WaveField, evolve_spectral

LOGGER = logging.getLogger(__name__)

# Fewest field samples inside the interval
MIN_POINTS = 200

# Fewest series points inside a fit window
MIN_FIT_POINTS = 10


class Nonescape(NamedTuple):
    value: float
    error: float


@dataclass(frozen=True)
class ProbabilitySeries:
    """
    Nonescape probabilities P(t) on the interval [left, right].
    """

    left: float
    right: float
    times: np.ndarray
    values: np.ndarray
    errors: np.ndarray
    methods: Tuple[str, ...]
    probe: Optional[float] = None
    probe_values: Optional[np.ndarray] = None

    def window(self, start: float, stop: float) -> "ProbabilitySeries":
        mask = (self.times >= start) & (self.times <= stop)
        return ProbabilitySeries(
            self.left,
            self.right,
            self.times[mask],
            self.values[mask],
            self.errors[mask],
            tuple(method for method, keep in zip(self.methods, mask) if keep),
            self.probe,
            None if self.probe_values is None else self.probe_values[mask],
        )


class PowerLawFit(NamedTuple):
    exponent: float
    stderr: float
    r_squared: float
    window: Tuple[float, float]
    points: int
    binned: bool = False


class Profile(NamedTuple):
    """
    End of the initial decrease, start of the final monotone decay, and the
    number of rising steps between them.
    """

    trough: Optional[float]
    decay: Optional[float]
    rises: int
    found: bool


def nonescape(field: WaveField, a: float, b: float, min_points: int = MIN_POINTS) -> Nonescape:
    """
    Probability of finding the particle in [a, b] at the time of `field`.

    Parameters
    ----------
    field : WaveField
        Samples of psi(x, t), sorted in x.
    a, b : float
        The interval.
    min_points : int
        Fewest samples required inside the interval.

    Returns
    -------
    Nonescape
        Simpson's rule value, with the difference to the trapezoidal rule as
        error estimate.

    Raises
    ------
    ValueError
        If the interval is empty or the samples do not cover it densely enough.
    """

    if not a < b:
        raise ValueError(f"Invalid interval `[{a}, {b}]`")

    xs = np.asarray(field.xs)
    spacing = (b - a) * 1e-9
    mask = (xs >= a - spacing) & (xs <= b + spacing)
    if mask.sum() < min_points or xs[mask][0] > a + spacing or xs[mask][-1] < b - spacing:
        raise ValueError(
            f"Field samples cover `[{a}, {b}]` with {int(mask.sum())} points, "
            f"at least {min_points} from edge to edge are needed"
        )

    density = np.abs(field.values[mask]) ** 2
    value = float(integrate.simpson(density, x=xs[mask]))
    error = abs(value - float(integrate.trapezoid(density, x=xs[mask])))

    return Nonescape(value, error)


def nonescape_series(
    pot: PotentialSpec,
    packet: PacketSpec,
    times: Sequence[float],
    a: float,
    b: float,
    points: int = 401,
    workers: int = 1,
    probe: Optional[float] = None,
    **quadrature,
) -> ProbabilitySeries:
    """
    P(t) from spectral fields sampled on `points` positions in [a, b].

    With more than one worker the times are evaluated concurrently and
    collected in order. When `probe` is given, psi(probe, t) is evaluated
    with the same quadrature and kept with the series.
    """

    times = np.asarray(times, dtype=float)
    if times.size and np.any(np.diff(times) <= 0.0):
        raise ValueError("Times must be strictly increasing")
    xs = np.linspace(a, b, points)
    sampled = xs if probe is None else np.append(xs, probe)

    def evaluate(t):
        field = evolve_spectral(pot, packet, sampled, t, **quadrature)
        inside = WaveField(xs, field.t, field.values[: xs.size], field.method)
        return nonescape(inside, a, b), field.values[-1]

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(evaluate, times))
    else:
        results = [evaluate(t) for t in times]
    LOGGER.debug("Nonescape series of %d times for %s", len(results), packet)

    return ProbabilitySeries(
        float(a),
        float(b),
        times,
        np.array([result.value for result, _ in results]),
        np.array([result.error for result, _ in results]),
        ("spectral",) * len(results),
        probe,
        None if probe is None else np.array([value for _, value in results]),
    )


def _positive_logs(series: ProbabilitySeries) -> Tuple[np.ndarray, np.ndarray]:
    if np.any(series.values <= 0.0):
        raise ValueError(
            "Nonpositive probabilities in the fit window (interference zeros); "
            "shift the window"
        )
    return np.log10(series.times), np.log10(series.values)


def _bin(logt: np.ndarray, logp: np.ndarray, bins_per_decade: int):
    # Average log P and log t within bins of equal width in log t
    labels = np.floor((logt - logt[0]) * bins_per_decade + 1e-9).astype(int)
    keys = np.unique(labels)
    return (
        np.array([logt[labels == key].mean() for key in keys]),
        np.array([logp[labels == key].mean() for key in keys]),
    )


def fit_power_law(
    series: ProbabilitySeries,
    window: Optional[Tuple[float, float]] = None,
    bins_per_decade: Optional[int] = None,
) -> PowerLawFit:
    """
    Least-squares exponent of P(t) on a log-log scale.

    Parameters
    ----------
    series : ProbabilitySeries
        The probabilities.
    window : Optional[Tuple[float, float]]
        Times [t1, t2] to fit; the whole series by default.
    bins_per_decade : Optional[int]
        When given, points are averaged within bins of this many per decade
        before fitting, smoothing interference oscillations.

    Returns
    -------
    PowerLawFit
        Exponent, its standard error and the coefficient of determination.

    Raises
    ------
    ValueError
        If the window holds fewer than ten points or a nonpositive value.
    """

    if window is None:
        window = (float(series.times[0]), float(series.times[-1]))
    selected = series.window(*window)
    if selected.times.size < MIN_FIT_POINTS:
        raise ValueError(
            f"Window `{window}` holds {selected.times.size} points, "
            f"at least {MIN_FIT_POINTS} are needed"
        )

    logt, logp = _positive_logs(selected)
    if bins_per_decade:
        logt, logp = _bin(logt, logp, bins_per_decade)
        if logt.size < 3:
            raise ValueError(f"Window `{window}` too short for {bins_per_decade} bins per decade")

    result = stats.linregress(logt, logp)

    return PowerLawFit(
        float(result.slope),
        float(result.stderr),
        float(result.rvalue**2),
        (float(window[0]), float(window[1])),
        int(logt.size),
        bool(bins_per_decade),
    )


def local_slopes(
    series: ProbabilitySeries, bins_per_decade: Optional[int] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Slopes of log P against log t between consecutive (optionally binned) points.

    Returns
    -------
    Tuple[np.ndarray, np.ndarray]
        Midpoint times and slopes.
    """

    logt, logp = _positive_logs(series)
    if bins_per_decade:
        logt, logp = _bin(logt, logp, bins_per_decade)

    return 10.0 ** (0.5 * (logt[1:] + logt[:-1])), np.diff(logp) / np.diff(logt)


def select_window(
    series: ProbabilitySeries,
    stability: float = 0.05,
    decades: float = 1.0,
    bins_per_decade: int = 5,
) -> Tuple[Tuple[float, float], bool]:
    """
    Latest window spanning `decades` in which the local slopes stay within
    `stability` of the median slope in that window, scanning back from the
    end of the series.

    Returns
    -------
    Tuple[Tuple[float, float], bool]
        The window and whether it met the criterion; otherwise the last
        `decades` of the series are returned and a warning is logged.
    """

    times = series.times
    slope_times, slopes = local_slopes(series, bins_per_decade)
    logt = np.log10(times)

    for end in range(times.size - 1, -1, -1):
        start = int(np.searchsorted(logt, logt[end] - decades - 1e-9))
        if logt[end] - logt[start] < decades * 0.99:
            break
        inside = (slope_times >= times[start]) & (slope_times <= times[end])
        if inside.sum() < 2:
            continue
        window_slopes = slopes[inside]
        if np.all(np.abs(window_slopes - np.median(window_slopes)) <= stability):
            return (float(times[start]), float(times[end])), True

    start = int(np.searchsorted(logt, logt[-1] - decades - 1e-9))
    LOGGER.warning(
        "No window with slopes stable to %g found, fitting the last %g decades", stability, decades
    )

    return (float(times[start]), float(times[-1])), False


def profile_regions(series: ProbabilitySeries, tolerance: float = 1e-6) -> Profile:
    """
    Detect an initial decrease, revivals and a final monotone decay.

    The revival region may hold several rises separated by decreases; the
    final decay starts at the last local maximum. Changes of P smaller than
    `tolerance` relative to P are ignored.
    """

    values = series.values
    change = np.diff(values) / np.maximum(values[:-1], np.finfo(float).tiny)
    signs = np.where(change > tolerance, 1, np.where(change < -tolerance, -1, 0))

    rising = np.nonzero(signs > 0)[0]
    if signs.size == 0 or signs[0] >= 0 or rising.size == 0:
        return Profile(None, None, int(rising.size), False)

    trough = float(series.times[rising[0]])
    peak = rising[-1] + 1
    if not np.any(signs[peak:] < 0):
        return Profile(trough, None, int(rising.size), False)

    return Profile(trough, float(series.times[peak]), int(rising.size), True)

"""
Module for the spectral amplitude of a packet, the overlap of the initial
state with the stationary scattering states.

For a packet supported on the left of the potential the overlap has the
closed form

    k > 0:  psi_tilde(k) = psi_hat(k) + conj(g_minus(k)) psi_hat(-k)
    k < 0:  psi_tilde(k) = conj(g_minus(k)) psi_hat(k)

and its one-sided derivatives at k = +-0 are linear combinations of the
derivatives of psi_hat at zero. The lowest nonvanishing one fixes the
vanishing order m, which controls the long-time tail.
"""

# Import standard modules
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple
import logging
import math

# Import third-party libraries
import numpy as np

# Import local modules
from .common import (
    OrderUndeterminedError,
    gauss_panels,
    phase_edges,
    richardson_derivative,
    richardson_limit,
    taylor_coefficients,
)
from .packets import (
    DEFAULT_CUTOFF,
    PacketSpec,
    free_evolution,
    momentum_amplitude,
    momentum_cutoff,
    momentum_derivatives,
    support_violation,
)
from .potential import PotentialSpec, g_minus_derivatives, pole_free_radius

LOGGER = logging.getLogger(__name__)

# Highest one-sided derivative of psi_tilde served at zero momentum
MAX_ORDER = 4

# Row of each branch in the derivative tables
SIGNS = (1, -1)

# Steps of the one-sided finite-difference oracle
ORACLE_STEPS = (1e-3, 2e-3, 4e-3)

# Support mass above which the closed form is flagged
SUPPORT_TOLERANCE = 1e-8


@dataclass(frozen=True)
class SpectralAmplitude:
    """
    Samples of psi_tilde and, when computed, its zero-momentum data.

    `derivatives` has one row per branch, in the order of `SIGNS`, holding
    psi_tilde^(n)(+-0) for n = 0 .. 4.
    """

    ks: np.ndarray
    values: np.ndarray
    method: str = "closed"
    derivatives: Optional[np.ndarray] = None
    vanishing_order: Optional[int] = None
    warnings: Tuple[str, ...] = ()


def branch_amplitude(pot: PotentialSpec, packet: PacketSpec, kappa, sign: int) -> np.ndarray:
    """
    Closed-form psi_tilde on the branch k = sign * kappa.

    Complex `kappa` gives the analytic continuation of the real-axis values,
    with conj(g_minus(k)) continued as conj(g_minus(conj(kappa))).
    """

    kappa = np.atleast_1d(np.asarray(kappa, dtype=complex))
    g_minus = np.conj(pot.branch(np.conj(kappa), sign).g_minus)
    mirrored = momentum_amplitude(packet, -kappa)
    if sign > 0:
        return momentum_amplitude(packet, kappa) + g_minus * mirrored

    return g_minus * mirrored


def _direct_overlap(pot: PotentialSpec, packet: PacketSpec, ks: np.ndarray) -> np.ndarray:
    """
    Overlap of the analytic initial state with the stationary states, by
    Gauss panels over y.
    """

    span = packet.a0 * (10.0 + 2.0 * packet.m)
    lower = min(packet.x0 - span, -pot.radius)
    upper = max(packet.x0 + span, pot.radius)
    count = max(1, int(math.ceil((upper - lower) / 0.1)))
    edges = np.union1d(
        np.linspace(lower, upper, count + 1),
        [edge for left, right, _ in pot.segments for edge in (left, right)],
    )
    nodes, weights = gauss_panels(edges, 8)
    initial = weights * free_evolution(packet, nodes, 0.0)

    values = np.empty(ks.shape, dtype=complex)
    for sign in SIGNS:
        mask = np.sign(ks) == sign
        if mask.any():
            states = pot.state(np.abs(ks[mask]), sign, nodes)
            values[mask] = np.conj(states).T @ initial

    return values


def spectral_amplitude(
    pot: PotentialSpec,
    packet: PacketSpec,
    ks,
    method: str = "closed",
    support_tolerance: float = SUPPORT_TOLERANCE,
) -> SpectralAmplitude:
    """
    Sample psi_tilde at real nonzero momenta.

    Parameters
    ----------
    pot : PotentialSpec
        The potential.
    packet : PacketSpec
        The initial packet.
    ks : array_like
        Nonzero momenta.
    method : str
        "closed" for the closed form in terms of psi_hat and g_minus, or
        "quadrature" for the direct overlap integral over positions.
    support_tolerance : float
        Mass of the packet on [-R, infinity) above which the closed form is
        flagged as approximate.

    Returns
    -------
    SpectralAmplitude
        The samples, with any warnings attached.

    Raises
    ------
    ValueError
        If a momentum is zero or the method is unknown.
    """

    ks = np.atleast_1d(np.asarray(ks, dtype=float))
    if np.any(ks == 0.0):
        raise ValueError("psi_tilde at `k=0` is only available as one-sided derivatives")

    warnings = []
    if method == "closed":
        violation = support_violation(packet, pot)
        if violation > support_tolerance:
            message = (
                f"Packet mass {violation:.3e} on [-R, inf) exceeds {support_tolerance:.1e}; "
                "closed-form spectral amplitude is approximate"
            )
            LOGGER.warning(message)
            warnings.append(message)

        values = np.empty(ks.shape, dtype=complex)
        for sign in SIGNS:
            mask = np.sign(ks) == sign
            if mask.any():
                values[mask] = branch_amplitude(pot, packet, np.abs(ks[mask]), sign)
    elif method == "quadrature":
        values = _direct_overlap(pot, packet, ks)
    else:
        raise ValueError(f"Unknown spectral method `{method}`")

    return SpectralAmplitude(ks, values, method, warnings=tuple(warnings))


def spectral_grid(
    packet: PacketSpec,
    cutoff: float = DEFAULT_CUTOFF,
    smallest: float = 1e-4,
    log_points: int = 60,
    linear_points: int = 400,
) -> np.ndarray:
    """
    Symmetric momentum grid, log-spaced near zero and uniform over the support.
    """

    largest = momentum_cutoff(packet, cutoff)
    near = np.geomspace(smallest, 0.1, log_points)
    far = np.linspace(0.1, largest, linear_points)
    positive = np.union1d(near, far)

    return np.concatenate([-positive[::-1], positive])


def spectral_norm(
    pot: PotentialSpec, packet: PacketSpec, cutoff: float = DEFAULT_CUTOFF, order: int = 8
) -> float:
    """
    The integral of |psi_tilde|^2 over the truncated momentum support.

    The cross term of the k > 0 branch oscillates like e^{2ik x0}, which
    sets the panel widths.
    """

    largest = momentum_cutoff(packet, cutoff)
    reach = 2.0 * (abs(packet.x0) + pot.radius)
    edges = phase_edges(0.0, largest, 0.0, reach, max_width=0.05)
    nodes, weights = gauss_panels(edges, order)

    total = 0.0
    for sign in SIGNS:
        total += float(np.sum(weights * np.abs(branch_amplitude(pot, packet, nodes, sign)) ** 2))

    return total


def _formula_derivatives(pot: PotentialSpec, packet: PacketSpec, order: int) -> np.ndarray:
    # Leibniz rule on the closed form, with d/dk conj(g) = conj(dg/dk) on the real axis
    psi_hat = momentum_derivatives(packet, order)
    table = np.zeros((len(SIGNS), order + 1), dtype=complex)
    for row, sign in enumerate(SIGNS):
        g_minus = np.conj(g_minus_derivatives(pot, sign, order))
        for n in range(order + 1):
            value = sign**n * psi_hat[n] if sign > 0 else 0.0
            for l in range(n + 1):
                value += math.comb(n, l) * (-sign) ** l * g_minus[n - l] * psi_hat[l]
            table[row, n] = value

    return table


def numeric_derivatives_at_zero(
    pot: PotentialSpec,
    packet: PacketSpec,
    order: int = MAX_ORDER,
    method: str = "contour",
    radius: float = 0.05,
) -> np.ndarray:
    """
    One-sided derivatives psi_tilde^(n)(+-0) from the closed-form values alone.

    Parameters
    ----------
    pot : PotentialSpec
        The potential.
    packet : PacketSpec
        The initial packet.
    order : int
        Highest derivative order.
    method : str
        "contour" samples the continued branch amplitude on a pole-free circle
        around zero; "richardson" extrapolates one-sided forward differences at
        momenta 1e-3, 2e-3 and 4e-3.
    radius : float
        Initial radius of the sampling circle.

    Returns
    -------
    np.ndarray
        Table with one row per branch, in the order of `SIGNS`.
    """

    if not 0 <= order <= MAX_ORDER:
        raise ValueError(f"Unsupported derivative order `{order}`")

    table = np.zeros((len(SIGNS), order + 1), dtype=complex)
    for row, sign in enumerate(SIGNS):
        if method == "contour":
            safe = pole_free_radius(pot, sign, radius)
            coefficients = taylor_coefficients(
                lambda kappa: branch_amplitude(pot, packet, kappa, sign), order, radius=safe
            )
            for n in range(order + 1):
                table[row, n] = sign**n * math.factorial(n) * coefficients[n]
        elif method == "richardson":

            def func(k):
                return branch_amplitude(pot, packet, abs(k), sign)[0]

            table[row, 0] = richardson_limit(func, sign, ORACLE_STEPS)
            for n in range(1, order + 1):
                table[row, n] = richardson_derivative(func, n, sign, ORACLE_STEPS)
        else:
            raise ValueError(f"Unknown differentiation method `{method}`")

    return table


@lru_cache(maxsize=64)
def derivative_table(
    pot: PotentialSpec, packet: PacketSpec, method: str = "formula"
) -> np.ndarray:
    """
    Read-only table of psi_tilde^(n)(+-0), n <= 4, cached per potential and packet.

    `method` is "formula" for the combination of psi_hat and g_minus
    derivatives, or one of the methods of `numeric_derivatives_at_zero`.
    """

    if method == "formula":
        table = _formula_derivatives(pot, packet, MAX_ORDER)
    else:
        table = numeric_derivatives_at_zero(pot, packet, MAX_ORDER, method)
    LOGGER.debug("Derivative table (%s) for %s and %s computed", method, pot, packet)
    table.flags.writeable = False

    return table


def derivatives_at_zero(pot: PotentialSpec, packet: PacketSpec, n: int, sign: int) -> complex:
    """
    The one-sided derivative psi_tilde^(n)(sign * 0).

    Raises
    ------
    ValueError
        If `n` exceeds 4 or `sign` is not +1 or -1.
    """

    if not 0 <= n <= MAX_ORDER:
        raise ValueError(f"Unsupported derivative order `{n}`")
    if sign not in SIGNS:
        raise ValueError(f"Invalid branch sign `{sign}`")

    return complex(derivative_table(pot, packet)[SIGNS.index(sign), n])


def vanishing_order(
    pot: PotentialSpec,
    packet: PacketSpec,
    tol: float = 1e-8,
    scale: Optional[float] = None,
) -> int:
    """
    Smallest n with a one-sided derivative psi_tilde^(n)(+-0) above `tol * scale`.

    The order is computed from psi_tilde, never from psi_hat: a zero of psi_hat
    at k = 0 of order m does not imply the same order for psi_tilde.

    Parameters
    ----------
    pot : PotentialSpec
        The potential.
    packet : PacketSpec
        The initial packet.
    tol : float
        Relative tolerance.
    scale : Optional[float]
        Reference magnitude; by default the largest |psi_tilde| on the
        `spectral_grid`.

    Returns
    -------
    int
        The vanishing order m.

    Raises
    ------
    OrderUndeterminedError
        If every derivative through order 4 is below the tolerance.
    """

    if scale is None:
        grid = spectral_grid(packet)
        scale = float(np.max(np.abs(spectral_amplitude(pot, packet, grid).values)))

    table = derivative_table(pot, packet)
    for n in range(MAX_ORDER + 1):
        if np.max(np.abs(table[:, n])) > tol * scale:
            return n

    raise OrderUndeterminedError(
        f"All one-sided derivatives of psi_tilde through order {MAX_ORDER} are below "
        f"`{tol * scale:.3e}`"
    )


def spectral_profile(
    pot: PotentialSpec, packet: PacketSpec, tol: float = 1e-8, cutoff: float = DEFAULT_CUTOFF
) -> SpectralAmplitude:
    """
    Samples on the `spectral_grid` together with the derivative table and the
    vanishing order.
    """

    sampled = spectral_amplitude(pot, packet, spectral_grid(packet, cutoff))
    scale = float(np.max(np.abs(sampled.values)))
    order = vanishing_order(pot, packet, tol, scale)

    return SpectralAmplitude(
        sampled.ks,
        sampled.values,
        sampled.method,
        np.array(derivative_table(pot, packet)),
        order,
        sampled.warnings,
    )

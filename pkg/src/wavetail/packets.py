"""
Module for the initial wave-packet family.

Packets are defined in momentum space as

    psi_hat(k) = N k^m exp(-a0^2 (k - k0)^2 / 2 - i k x0),

so that psi_hat and its first m - 1 derivatives vanish at k = 0. Position
representations are always derived from psi_hat.
"""

# Import standard modules
from dataclasses import dataclass
from typing import Tuple
import logging
import math

# Import third-party libraries
import numpy as np
from numpy.polynomial import Polynomial
from scipy import integrate

# Import local modules
from .common import SQRT_2PI, gauss_panels, phase_edges

LOGGER = logging.getLogger(__name__)

# Half width of the momentum support, in units of 1/a0
DEFAULT_CUTOFF = 8.0

# Half width, in units of 1/a0, of the normalization integral
NORM_CUTOFF = 12.0


@dataclass(frozen=True)
class PacketSpec:
    """
    Parameters of a k^m-Gaussian packet.

    `norm` is the normalization constant N; a spec built by `normalize` has
    unit norm in momentum space.
    """

    m: int
    a0: float
    k0: float
    x0: float
    norm: float = 1.0

    def renormalized(self) -> "PacketSpec":
        return normalize(self.m, self.a0, self.k0, self.x0)

    def __str__(self) -> str:
        return f"phi_{self.m} (a0={self.a0:g}, k0={self.k0:g}, x0={self.x0:g})"


def _check_width(a0: float) -> None:
    if not (np.isfinite(a0) and a0 > 0.0):
        raise ValueError(f"Invalid packet width `{a0}`")


def _gaussian_moment(m: int, a0: float, k0: float) -> float:
    """
    Closed form of the integral of k^(2m) exp(-a0^2 (k - k0)^2) for m <= 2.
    """

    base = math.sqrt(math.pi) / a0
    if m == 0:
        return base
    if m == 1:
        return base * (k0**2 + 1.0 / (2.0 * a0**2))
    if m == 2:
        return base * (k0**4 + 3.0 * k0**2 / a0**2 + 3.0 / (4.0 * a0**4))

    raise ValueError(f"No closed moment for order `{m}`")


def normalize(m: int, a0: float, k0: float, x0: float) -> PacketSpec:
    """
    Build a packet spec normalized in momentum space.

    Parameters
    ----------
    m : int
        Order of the zero of psi_hat at k = 0.
    a0 : float
        Width parameter; the momentum spread is 1/a0.
    k0 : float
        Central momentum.
    x0 : float
        Central position.

    Returns
    -------
    PacketSpec
        The spec, with N such that the integral of |psi_hat|^2 is one.

    Raises
    ------
    ValueError
        If `m` is negative or `a0` is not positive.
    """

    if int(m) != m or m < 0:
        raise ValueError(f"Invalid packet order `{m}`")
    _check_width(a0)
    m = int(m)

    half = NORM_CUTOFF / a0
    mass, error = integrate.quad(
        lambda k: k ** (2 * m) * math.exp(-((a0 * (k - k0)) ** 2)),
        k0 - half,
        k0 + half,
        points=[k0],
        epsabs=0.0,
        epsrel=1e-13,
        limit=200,
    )
    LOGGER.debug("Packet phi_%d normalization mass %.17g (error %.3e)", m, mass, error)

    if m <= 2:
        closed = _gaussian_moment(m, a0, k0)
        if abs(mass - closed) > 1e-10 * closed:
            LOGGER.warning(
                "Normalization quadrature %.17g differs from the closed moment %.17g",
                mass,
                closed,
            )

    return PacketSpec(m, float(a0), float(k0), float(x0), 1.0 / math.sqrt(mass))


def momentum_amplitude(spec: PacketSpec, k):
    """
    Evaluate psi_hat(k), an entire function of k.
    """

    k = np.asarray(k)
    exponent = -0.5 * (spec.a0 * (k - spec.k0)) ** 2 - 1j * k * spec.x0
    values = spec.norm * k**spec.m * np.exp(exponent)

    return complex(values) if values.ndim == 0 else values


def momentum_derivatives(spec: PacketSpec, order: int) -> np.ndarray:
    """
    Exact derivatives psi_hat^(l)(0) for l = 0 .. `order`.

    The Gaussian factor is expanded as exp(q1 k + q2 k^2) times a constant,
    whose Taylor coefficients satisfy (n + 1) g_(n+1) = q1 g_n + 2 q2 g_(n-1).
    """

    if order < 0:
        raise ValueError(f"Invalid derivative order `{order}`")

    q1 = spec.a0**2 * spec.k0 - 1j * spec.x0
    q2 = -0.5 * spec.a0**2
    gaussian = [complex(math.exp(-0.5 * (spec.a0 * spec.k0) ** 2))]
    for n in range(order):
        previous = gaussian[n - 1] if n >= 1 else 0.0
        gaussian.append((q1 * gaussian[n] + 2.0 * q2 * previous) / (n + 1))

    derivatives = np.zeros(order + 1, dtype=complex)
    for n in range(spec.m, order + 1):
        derivatives[n] = math.factorial(n) * spec.norm * gaussian[n - spec.m]

    return derivatives


def free_evolution(spec: PacketSpec, xs, t: float) -> np.ndarray:
    """
    Closed-form free evolution of the packet.

    With alpha = a0^2 + 2it and beta = a0^2 k0 + i(x - x0) the Gaussian
    integral gives N/sqrt(alpha) exp(beta^2/(2 alpha) - a0^2 k0^2/2) Q_m(beta),
    where Q_0 = 1 and Q_(j+1) = Q_j' + (beta/alpha) Q_j.

    Parameters
    ----------
    spec : PacketSpec
        The packet.
    xs : array_like
        Positions.
    t : float
        Time, nonnegative; t = 0 gives the initial position amplitude.

    Returns
    -------
    np.ndarray
        Samples of psi(x, t) without any potential.
    """

    if t < 0:
        raise ValueError(f"Invalid time `{t}`")

    xs = np.asarray(xs, dtype=float)
    alpha = spec.a0**2 + 2j * t
    beta = spec.a0**2 * spec.k0 + 1j * (xs - spec.x0)

    prefactor = Polynomial([1.0 + 0j])
    shift = Polynomial([0.0, 1.0 / alpha])
    for _ in range(spec.m):
        prefactor = prefactor.deriv() + shift * prefactor

    exponent = beta**2 / (2.0 * alpha) - 0.5 * (spec.a0 * spec.k0) ** 2

    return spec.norm / np.sqrt(alpha) * np.exp(exponent) * prefactor(beta)


def momentum_cutoff(spec: PacketSpec, cutoff: float = DEFAULT_CUTOFF) -> float:
    """
    Largest |k| kept by the momentum quadratures.
    """

    return abs(spec.k0) + cutoff / spec.a0


def truncation_bound(spec: PacketSpec, cutoff: float = DEFAULT_CUTOFF) -> float:
    """
    Bound on the pointwise error from dropping |k| > `momentum_cutoff`.

    The spectral amplitude is bounded by |psi_hat(k)| + |psi_hat(-k)| and the
    stationary states by 2/sqrt(2 pi), so twice the L1 mass of psi_hat outside
    the cutoff, times 2/sqrt(2 pi), bounds the dropped part of any integral.
    """

    limit = momentum_cutoff(spec, cutoff)
    mass, _ = integrate.quad(
        lambda k: abs(momentum_amplitude(spec, k)) + abs(momentum_amplitude(spec, -k)),
        limit,
        np.inf,
        epsabs=0.0,
        epsrel=1e-8,
    )

    return 4.0 * mass / SQRT_2PI


def _momentum_moment(spec: PacketSpec, power: int) -> float:
    half = NORM_CUTOFF / spec.a0
    moment, _ = integrate.quad(
        lambda k: k**power * abs(momentum_amplitude(spec, k)) ** 2,
        spec.k0 - half,
        spec.k0 + half,
        points=[spec.k0],
        epsabs=0.0,
        epsrel=1e-12,
        limit=200,
    )

    return moment


def momentum_norm(spec: PacketSpec) -> float:
    """
    The integral of |psi_hat|^2.
    """

    return _momentum_moment(spec, 0)


def mean_energy(spec: PacketSpec) -> float:
    """
    Expectation value of the free Hamiltonian, the integral of k^2 |psi_hat|^2.
    """

    return _momentum_moment(spec, 2)


def _position_span(spec: PacketSpec) -> float:
    # |x - x0| beyond which |psi(x)| is below double precision
    return spec.a0 * (10.0 + 2.0 * spec.m)


def position_amplitude(
    spec: PacketSpec,
    xs,
    method: str = "quadrature",
    cutoff: float = DEFAULT_CUTOFF,
    order: int = 8,
) -> np.ndarray:
    """
    Initial position amplitude psi(x) = (2 pi)^(-1/2) int e^{ikx} psi_hat(k) dk.

    Parameters
    ----------
    spec : PacketSpec
        The packet.
    xs : array_like
        Positions.
    method : str
        "quadrature" for Gauss panels over |k - k0| <= cutoff/a0, or
        "analytic" for the closed form of `free_evolution` at t = 0.
    cutoff : float
        Momentum truncation in units of 1/a0.
    order : int
        Gauss-Legendre order per panel.

    Returns
    -------
    np.ndarray
        Samples of psi(x); zero where |x - x0| exceeds the packet span.
    """

    xs = np.asarray(xs, dtype=float)
    if method == "analytic":
        return free_evolution(spec, xs, 0.0)
    if method != "quadrature":
        raise ValueError(f"Unknown transform method `{method}`")

    values = np.zeros(xs.shape, dtype=complex)
    span = _position_span(spec)
    mask = np.abs(xs - spec.x0) <= span
    if not mask.any():
        return values

    # Only x - x0 enters the phase once the factor e^{-ikx0} is absorbed
    half = cutoff / spec.a0
    lower, upper = spec.k0 - half, spec.k0 + half
    edges = lower + phase_edges(0.0, upper - lower, 0.0, span, max_width=0.5 / spec.a0)
    nodes, weights = gauss_panels(edges, order)

    amplitude = weights * momentum_amplitude(spec, nodes)
    values[mask] = np.exp(1j * np.outer(xs[mask], nodes)) @ amplitude

    return values / SQRT_2PI


def support_violation(spec: PacketSpec, pot) -> float:
    """
    Probability mass of the initial packet on [-R, infinity).

    The packets are not strictly supported on the left of the potential; this
    mass measures how far the closed-form spectral amplitude is from exact.
    """

    def density(x):
        return abs(complex(free_evolution(spec, x, 0.0))) ** 2

    split = max(-pot.radius, spec.x0 + _position_span(spec))
    mass = 0.0
    if split > -pot.radius:
        inner = [spec.x0] if -pot.radius < spec.x0 < split else None
        part, _ = integrate.quad(
            density, -pot.radius, split, points=inner, epsabs=0.0, epsrel=1e-10, limit=200
        )
        mass += part
    tail, _ = integrate.quad(density, split, np.inf, epsabs=0.0, epsrel=1e-10, limit=200)

    return mass + tail


def packet_family(a0: float, k0: float, x0: float, orders: Tuple[int, ...] = (0, 1, 2)):
    """
    Normalized packets phi_m sharing the same width, momentum and position.
    """

    _check_width(a0)
    return tuple(normalize(m, a0, k0, x0) for m in orders)

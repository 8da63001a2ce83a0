"""
Module for the time evolution of packets, by eigenfunction expansion and by
implicit time stepping on a grid.

The spectral path evaluates

    psi(x, t) = sum over sign of int_0^K e^{-it kappa^2} phi(x, sign kappa)
                psi_tilde(sign kappa) d kappa

with Gauss panels that keep the phase per panel bounded. For large t the
part of each half-line beyond a split momentum is moved into the lower half
plane, where e^{-it kappa^2} decays; what remains of the deformed path is
bounded and added to the error budget. The grid path is an independent
Crank-Nicolson oracle used for moderate times.
"""

# Import standard modules
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple
import logging
import math

# Import third-party libraries
import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

# Import local modules
from .common import gauss_panels, phase_edges, winding_number
from .packets import (
    DEFAULT_CUTOFF,
    PacketSpec,
    free_evolution,
    momentum_cutoff,
    truncation_bound,
)
from .potential import PotentialSpec
from .spectral import SIGNS, branch_amplitude

LOGGER = logging.getLogger(__name__)

# Fixed fine panel edge next to zero momentum
NEAR_ZERO = 1e-2

# Momentum nodes processed at once
CHUNK = 2048


class Method(Enum):
    SPECTRAL = "spectral"
    GRID = "grid"


@dataclass(frozen=True)
class WaveField:
    """
    Samples of psi(x, t) at a single time.
    """

    xs: np.ndarray
    t: float
    values: np.ndarray
    method: Method
    error_budget: float = 0.0
    warnings: Tuple[str, ...] = ()
    norm_drift: float = 0.0

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def restrict(self, left: float, right: float) -> "WaveField":
        """
        The samples with positions in [`left`, `right`].
        """

        mask = (self.xs >= left) & (self.xs <= right)
        return WaveField(
            self.xs[mask],
            self.t,
            self.values[mask],
            self.method,
            self.error_budget,
            self.warnings,
            self.norm_drift,
        )


@dataclass(frozen=True)
class QuadratureRule:
    """
    Nodes and weights for one half-line, possibly along a deformed path.
    """

    nodes: np.ndarray
    weights: np.ndarray
    deformed: bool = False
    split: Optional[float] = None
    depth: float = 0.0
    dropped: Tuple[np.ndarray, ...] = field(default=(), repr=False)


def _rectangle(lower: float, upper: float, depth: float, points: int) -> np.ndarray:
    # Closed boundary of [lower, upper] x [-depth, 0], counterclockwise
    steps = np.linspace(0.0, 1.0, points, endpoint=False)
    bottom = lower + (upper - lower) * steps - 1j * depth
    right = upper - 1j * depth * (1.0 - steps)
    top = upper - (upper - lower) * steps
    left = lower - 1j * depth * steps
    return np.concatenate([bottom, right, top, left])


def quadrature_rule(
    pot: PotentialSpec,
    sign: int,
    t: float,
    largest: float,
    reach: float,
    order: int = 8,
    panel_phase: float = math.pi / 4,
    max_width: float = 0.05,
    damping: float = 40.0,
    depth: float = 0.05,
) -> QuadratureRule:
    """
    Build the quadrature rule for one branch at time `t`.

    Parameters
    ----------
    pot : PotentialSpec
        The potential, whose pole indicator guards the deformation.
    sign : int
        Branch, +1 or -1.
    t : float
        Time.
    largest : float
        Upper end K of the momentum support.
    reach : float
        Bound on the positions entering the plane-wave factors.
    order : int
        Gauss-Legendre order per panel.
    panel_phase : float
        Largest phase change per panel.
    max_width : float
        Largest panel width on the real axis.
    damping : float
        Decay exponent of e^{-it kappa^2} required on the dropped segment.
    depth : float
        Initial depth of the deformation below the real axis.

    Returns
    -------
    QuadratureRule
        Nodes and weights; for a deformed rule, the dropped segments as well.
    """

    split = largest
    if t > 0.0:
        for _ in range(8):
            split = (damping + depth * reach) / (2.0 * t * depth)
            if split >= largest:
                break
            points = max(1024, int(64 * (largest - split) * (reach + 1.0)))
            boundary = _rectangle(split, largest, depth, points)
            if winding_number(pot.jost(boundary, sign)) == 0:
                break
            LOGGER.debug("Pole below [%g, %g] at depth %g, halving", split, largest, depth)
            depth /= 2.0
        else:
            LOGGER.warning("No pole-free deformation found at t=%g, staying on the real axis", t)
            split = largest

    upper = min(split, largest)
    edges = phase_edges(0.0, upper, t, reach, panel_phase, max_width)
    if NEAR_ZERO < upper:
        edges = np.union1d(edges, [NEAR_ZERO])
    nodes, weights = gauss_panels(edges, order)

    if split >= largest:
        return QuadratureRule(nodes, weights.astype(complex))

    count = int(math.ceil(t * depth**2 / panel_phase) + math.ceil(2.0 * t * split * depth)) + 1
    vertical = split - 1j * depth * np.linspace(0.0, 1.0, count + 1)
    extra_nodes, extra_weights = gauss_panels(vertical, order)
    LOGGER.debug(
        "Deformed path at t=%g: %d real panels up to %g, %d vertical panels of depth %g",
        t,
        edges.size - 1,
        split,
        count,
        depth,
    )

    # Dropped segments: horizontal at -depth and the vertical back to K
    samples = np.linspace(0.0, 1.0, 65)
    dropped = (
        split + (largest - split) * samples - 1j * depth,
        largest - 1j * depth * (1.0 - samples),
    )

    return QuadratureRule(
        np.concatenate([nodes, extra_nodes]),
        np.concatenate([weights, extra_weights]),
        True,
        split,
        depth,
        dropped,
    )


def _integrate(pot, packet, sign, xs, t, nodes, weights) -> np.ndarray:
    values = np.zeros(xs.shape, dtype=complex)
    for start in range(0, nodes.size, CHUNK):
        kappa = nodes[start : start + CHUNK]
        amplitude = (
            weights[start : start + CHUNK]
            * np.exp(-1j * t * kappa * kappa)
            * branch_amplitude(pot, packet, kappa, sign)
        )
        values += pot.state(kappa, sign, xs) @ amplitude

    return values


def _dropped_bound(pot, packet, sign, xs, t, segment: np.ndarray) -> float:
    # Length times the largest sampled integrand on the segment
    integrand = (
        np.abs(pot.state(segment, sign, xs))
        * np.abs(np.exp(-1j * t * segment * segment) * branch_amplitude(pot, packet, segment, sign))
    )
    return float(np.max(integrand)) * float(abs(segment[-1] - segment[0]))


def evolve_spectral(
    pot: PotentialSpec,
    packet: PacketSpec,
    xs,
    t: float,
    order: int = 8,
    panel_phase: float = math.pi / 4,
    cutoff: float = DEFAULT_CUTOFF,
    max_width: float = 0.05,
    damping: float = 40.0,
    depth: float = 0.05,
    tolerance: float = 1e-6,
) -> WaveField:
    """
    Evaluate psi(x, t) by the eigenfunction expansion.

    Parameters
    ----------
    pot : PotentialSpec
        The potential.
    packet : PacketSpec
        The initial packet, supported on the left of the potential.
    xs : array_like
        Positions.
    t : float
        Time, nonnegative.
    order, panel_phase, max_width, damping, depth
        Quadrature settings, see `quadrature_rule`.
    cutoff : float
        Momentum support, in units of 1/a0 around |k0|.
    tolerance : float
        Error budget above which the result is flagged.

    Returns
    -------
    WaveField
        The field, with the error budget and any warnings.

    Raises
    ------
    ValueError
        If `t` is negative.
    """

    if not t >= 0.0:
        raise ValueError(f"Invalid time `{t}`")

    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    largest = momentum_cutoff(packet, cutoff)
    reach = float(np.max(np.abs(xs))) + abs(packet.x0) + 2.0 * pot.radius

    values = np.zeros(xs.shape, dtype=complex)
    budget = truncation_bound(packet, cutoff)
    for sign in SIGNS:
        rule = quadrature_rule(
            pot, sign, t, largest, reach, order, panel_phase, max_width, damping, depth
        )
        values += _integrate(pot, packet, sign, xs, t, rule.nodes, rule.weights)
        for segment in rule.dropped:
            budget += _dropped_bound(pot, packet, sign, xs, t, segment)

    warnings = []
    if budget > tolerance:
        message = f"Spectral error budget {budget:.3e} at t={t:g} exceeds {tolerance:.1e}"
        LOGGER.warning(message)
        warnings.append(message)

    return WaveField(xs, float(t), values, Method.SPECTRAL, budget, tuple(warnings))


def minimum_half_width(packet: PacketSpec, t: float) -> float:
    """
    Smallest box half width keeping reflections off the box edges until `t`.

    Components up to |k0| + 5/a0 are tracked, moving with group velocity 2k.
    """

    return abs(packet.x0) + 2.0 * (abs(packet.k0) + 5.0 / packet.a0) * t + 10.0 * packet.a0


def _cell_average(pot: PotentialSpec, nodes: np.ndarray, dx: float) -> np.ndarray:
    values = np.zeros(nodes.shape)
    for left, right, value in pot.segments:
        overlap = np.minimum(right, nodes + dx / 2) - np.maximum(left, nodes - dx / 2)
        values += value * np.clip(overlap, 0.0, None) / dx

    return values


class GridPropagator:
    """
    Crank-Nicolson propagator on a uniform grid with Dirichlet ends.

    The "numerov" scheme uses the fourth-order compact Laplacian, solving
    M dpsi/dt = -i A psi with M = tridiag(1, 10, 1)/12 and a symmetric A;
    the "standard" scheme uses the three-point Laplacian with M = 1. Both
    conserve dx psi^H M psi exactly, up to roundoff.
    """

    def __init__(
        self,
        pot: PotentialSpec,
        half_width: float,
        dx: float,
        dt: float,
        scheme: str = "numerov",
    ) -> None:
        if not (dx > 0.0 and dt > 0.0):
            raise ValueError(f"Invalid grid steps `dx={dx}`, `dt={dt}`")
        if half_width <= pot.radius:
            raise ValueError(f"Box half width `{half_width}` does not contain the potential")
        if scheme not in ("numerov", "standard"):
            raise ValueError(f"Unknown grid scheme `{scheme}`")

        self.dx = dx
        self.dt = dt
        self.scheme = scheme

        count = int(round(2.0 * half_width / dx))
        self.xs = -half_width + dx * np.arange(1, count)
        size = self.xs.size

        laplacian = sparse.diags(
            [np.ones(size - 1), -2.0 * np.ones(size), np.ones(size - 1)], [-1, 0, 1]
        ) / (dx * dx)
        potential = sparse.diags(_cell_average(pot, self.xs, dx))
        if scheme == "numerov":
            mass = sparse.diags(
                [np.ones(size - 1) / 12.0, 10.0 * np.ones(size) / 12.0, np.ones(size - 1) / 12.0],
                [-1, 0, 1],
            )
            hamiltonian = -laplacian + 0.5 * (mass @ potential + potential @ mass)
        else:
            mass = sparse.identity(size)
            hamiltonian = -laplacian + potential

        self._mass = sparse.csc_matrix(mass)
        self._forward = sparse.csc_matrix(mass - 0.5j * dt * hamiltonian)
        self._solver = splu(sparse.csc_matrix(mass + 0.5j * dt * hamiltonian))
        LOGGER.debug("Grid of %d nodes, dx=%g, dt=%g, scheme %s", size, dx, dt, scheme)

    def norm(self, psi: np.ndarray) -> float:
        return float(self.dx * np.real(np.vdot(psi, self._mass @ psi)))

    def step(self, psi: np.ndarray, steps: int = 1) -> Tuple[np.ndarray, float]:
        """
        Advance `psi` by `steps` time steps.

        Returns
        -------
        Tuple[np.ndarray, float]
            The new state and the largest norm drift met along the way.
        """

        reference = self.norm(psi)
        drift = 0.0
        for _ in range(steps):
            psi = self._solver.solve(self._forward @ psi)
            drift = max(drift, abs(self.norm(psi) - reference))

        return psi, drift

    def evolve(self, psi: np.ndarray, t: float) -> Tuple[np.ndarray, float]:
        """
        Advance `psi` by time `t`, rounded to a whole number of steps.
        """

        steps = int(round(t / self.dt))
        LOGGER.debug("Grid propagation over %d steps", steps)
        return self.step(psi, steps)


def evolve_grid(
    pot: PotentialSpec,
    packet: PacketSpec,
    half_width: float,
    dx: float,
    dt: float,
    t: float,
    scheme: str = "numerov",
) -> WaveField:
    """
    Evaluate psi(x, t) by implicit time stepping in the box [-L, L].

    Parameters
    ----------
    pot : PotentialSpec
        The potential.
    packet : PacketSpec
        The initial packet, sampled from its closed-form position amplitude.
    half_width : float
        Box half width L.
    dx, dt : float
        Grid and time steps.
    t : float
        Final time.
    scheme : str
        "numerov" or "standard" spatial discretization.

    Returns
    -------
    WaveField
        The field on the interior grid nodes, with the norm drift recorded.

    Raises
    ------
    ValueError
        If the box is smaller than `minimum_half_width` or a step is invalid.
    """

    if t < 0.0:
        raise ValueError(f"Invalid time `{t}`")
    needed = minimum_half_width(packet, t)
    if half_width < needed:
        raise ValueError(f"Box half width `{half_width}` below the required `{needed:.6g}`")

    warnings = []
    largest = abs(packet.k0) + 5.0 / packet.a0
    if largest * dx > 0.5:
        warnings.append(f"Grid step dx={dx:g} coarse for momenta up to {largest:g}")
    if largest**2 * dt > 0.5:
        warnings.append(f"Time step dt={dt:g} coarse for energies up to {largest**2:g}")
    for message in warnings:
        LOGGER.warning(message)

    propagator = GridPropagator(pot, half_width, dx, dt, scheme)
    psi, drift = propagator.evolve(free_evolution(packet, propagator.xs, 0.0), t)

    return WaveField(
        propagator.xs, float(t), psi, Method.GRID, 0.0, tuple(warnings), drift
    )


def relative_l2(values, reference) -> float:
    """
    Relative L2 distance between two fields sampled on the same uniform grid.
    """

    values, reference = np.asarray(values), np.asarray(reference)
    return float(np.linalg.norm(values - reference) / np.linalg.norm(reference))

"""
Module for finite-range potentials and their stationary scattering states.

Units are hbar = 1 and 2M = 1, so that a plane wave of momentum k has energy
k**2. The stationary states follow the outgoing-wave convention: for k > 0 a
wave e^{ikx} comes in from the left, for k < 0 a wave e^{ikx} comes in from the
right, and outside [-R, R] every state is written as

    x < -R:  [g_plus(k) e^{i|k|x} + g_minus(k) e^{-i|k|x}] / sqrt(2 pi)
    x > +R:  [h_plus(k) e^{i|k|x} + h_minus(k) e^{-i|k|x}] / sqrt(2 pi)

with g_plus = 1 for k > 0 and 0 for k < 0. Inside the range the state is
propagated through the layers with 2x2 matrices acting on (psi, dpsi/dx);
their entries are entire functions of k**2, so no branch choice is involved
and the amplitudes can be continued to complex momenta.
"""

# Import standard modules
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional, Sequence, Tuple, Union
import logging
import math

# Import third-party libraries
import numpy as np

# Import local modules
from .common import (
    ConditioningError,
    SQRT_2PI,
    ZeroEnergyResonanceError,
    contour_derivatives,
    richardson_derivative,
    richardson_limit,
    winding_number,
)

LOGGER = logging.getLogger(__name__)

# Largest acceptable condition estimate of a transfer-matrix system
MAX_CONDITION = 1e12

# |phi(x, +-0)| above this value is taken as a zero-energy resonance
RESONANCE_TOLERANCE = 1e-6

# Steps for the zero-momentum limits of the states, smaller than the default
# derivative steps since the limit is extrapolated from O(h) values
LIMIT_STEPS = (1e-4, 1e-5, 1e-6)

# Highest one-sided derivative of g_minus served at zero momentum
MAX_G_ORDER = 5


class PotentialKind(Enum):
    SQUARE_BARRIER = "square_barrier"
    PIECEWISE_CONSTANT = "piecewise_constant"


class Branch(NamedTuple):
    """
    Exterior coefficients on one branch (sign of k), as arrays over |k|.
    """

    g_plus: np.ndarray
    g_minus: np.ndarray
    h_plus: np.ndarray
    h_minus: np.ndarray


@dataclass(frozen=True)
class ScatteringData:
    """
    Scattering amplitudes at real nonzero momenta.

    For k > 0 `g_minus` is the reflection amplitude and `h_plus` the
    transmission amplitude; for k < 0 `g_minus` is the transmission amplitude
    and `h_plus` the reflection amplitude. The `transmission` and `reflection`
    properties select them by sign.
    """

    k: Union[float, np.ndarray]
    g_plus: Union[complex, np.ndarray]
    g_minus: Union[complex, np.ndarray]
    h_plus: Union[complex, np.ndarray]
    h_minus: Union[complex, np.ndarray]
    rho: Union[complex, np.ndarray]

    def _select(self, positive, negative):
        value = np.where(np.asarray(self.k) > 0, positive, negative)
        return complex(value) if value.ndim == 0 else value

    @property
    def transmission(self):
        return self._select(self.h_plus, self.g_minus)

    @property
    def reflection(self):
        return self._select(self.g_minus, self.h_plus)


def _cos_sinc(q2: np.ndarray, width) -> Tuple[np.ndarray, np.ndarray]:
    """
    Return cos(q w) and sin(q w)/q for q**2 = `q2`, both even in q.
    """

    q = np.sqrt(np.asarray(q2, dtype=complex))
    qw = q * width

    return np.cos(qw), width * np.sinc(qw / np.pi)


def _sinhc(rho: np.ndarray, length: float) -> np.ndarray:
    """
    Return sinh(rho L)/rho, by its series where |rho| R is tiny.
    """

    z = rho * length
    small = np.abs(rho) * (length / 2.0) < 1e-4
    safe = np.where(small, 1.0, rho)
    series = length * (1.0 + z * z / 6.0 + z**4 / 120.0)

    return np.where(small, series, np.sinh(z) / safe)


class PotentialSpec:
    """
    Base class for nonnegative piecewise-constant potentials of finite range.
    """

    kind: Optional[PotentialKind] = None

    def __init__(self, radius: float, segments: Sequence[Tuple[float, float, float]]) -> None:
        """
        Initialize a potential from its range and constant segments.

        Parameters
        ----------
        radius : float
            The range R; the potential vanishes for |x| > R.
        segments : Sequence[Tuple[float, float, float]]
            Triples (left edge, right edge, value) inside [-R, R].

        Raises
        ------
        ValueError
            If the range is not positive, if a segment is empty, outside the
            range or overlapping another one, or if a value is negative (which
            could introduce bound states).
        """

        if not (np.isfinite(radius) and radius > 0.0):
            raise ValueError(f"Invalid potential range `{radius}`")

        self.radius = float(radius)  # range R

        # Validate and sort segments, then fill the gaps with zero layers
        parsed = []
        for segment in segments:
            left, right, value = (float(entry) for entry in segment)
            if not left < right:
                raise ValueError(f"Empty segment `{segment}`")
            if left < -self.radius - 1e-12 or right > self.radius + 1e-12:
                raise ValueError(f"Segment `{segment}` outside range `{self.radius}`")
            if value < 0.0:
                raise ValueError(f"Negative potential value `{value}` in segment `{segment}`")
            parsed.append((max(left, -self.radius), min(right, self.radius), value))
        parsed.sort()

        for first, second in zip(parsed, parsed[1:]):
            if second[0] < first[1] - 1e-12:
                raise ValueError(f"Overlapping segments `{first}` and `{second}`")

        self.segments = tuple(parsed)  # (left, right, value) triples

        layers = []
        position = -self.radius
        for left, right, value in self.segments:
            if left > position + 1e-12:
                layers.append((position, left - position, 0.0))
            layers.append((left, right - left, value))
            position = right
        if position < self.radius - 1e-12:
            layers.append((position, self.radius - position, 0.0))
        self._layers = tuple(layers)  # (left edge, width, value), covering [-R, R]

    @property
    def barrier_momentum(self) -> float:
        """
        The momentum k_b = sqrt(max V).
        """

        return math.sqrt(max((value for _, _, value in self.segments), default=0.0))

    @property
    def is_free(self) -> bool:
        return all(value == 0.0 for _, _, value in self.segments)

    def value(self, xs) -> np.ndarray:
        """
        Evaluate V(x); at a shared edge the value of the right segment is used.
        """

        xs = np.asarray(xs, dtype=float)
        values = np.zeros_like(xs)
        for left, right, value in self.segments:
            values[(xs >= left) & (xs <= right)] = value

        return values

    def branch(self, kappa, sign: int, check: bool = False) -> Branch:
        """
        Exterior coefficients on the branch k = sign * kappa.

        `kappa` may be complex, giving the analytic continuation of the branch
        from the positive real axis.
        """

        raise NotImplementedError

    def jost(self, kappa, sign: int) -> np.ndarray:
        """
        An entire function of kappa whose zeros are the poles of the branch.
        """

        raise NotImplementedError

    def state(self, kappa, sign: int, xs, derivative: bool = False) -> np.ndarray:
        """
        Stationary states on the branch k = sign * kappa.

        Parameters
        ----------
        kappa : array_like
            Momenta |k|, real positive or continued to complex values.
        sign : int
            Branch, +1 or -1.
        xs : array_like
            Positions.
        derivative : bool
            Whether to return d(phi)/dx instead of phi.

        Returns
        -------
        np.ndarray
            Array of shape (len(xs), len(kappa)).
        """

        kappa = np.atleast_1d(np.asarray(kappa, dtype=complex))
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        coeffs = self.branch(kappa, sign)

        result = np.empty((xs.size, kappa.size), dtype=complex)
        left = xs < -self.radius
        right = xs > self.radius
        inside = ~(left | right)

        for mask, plus, minus in [
            (left, coeffs.g_plus, coeffs.g_minus),
            (right, coeffs.h_plus, coeffs.h_minus),
        ]:
            if mask.any():
                phase = np.exp(1j * np.outer(xs[mask], kappa))
                if derivative:
                    result[mask] = 1j * kappa * (plus * phase - minus / phase)
                else:
                    result[mask] = plus * phase + minus / phase

        if inside.any():
            # Values at x = -R, propagated layer by layer
            outgoing = np.exp(-1j * kappa * self.radius)
            psi = coeffs.g_plus * outgoing + coeffs.g_minus / outgoing
            dpsi = 1j * kappa * (coeffs.g_plus * outgoing - coeffs.g_minus / outgoing)
            for edge, width, value in self._layers:
                q2 = kappa * kappa - value
                mask = inside & (xs >= edge) & (xs <= edge + width)
                if mask.any():
                    cos, sinc = _cos_sinc(q2[None, :], (xs[mask] - edge)[:, None])
                    if derivative:
                        result[mask] = -q2 * sinc * psi + cos * dpsi
                    else:
                        result[mask] = cos * psi + sinc * dpsi
                cos, sinc = _cos_sinc(q2, width)
                psi, dpsi = cos * psi + sinc * dpsi, -q2 * sinc * psi + cos * dpsi

        return result / SQRT_2PI

    def _free_branch(self, kappa: np.ndarray, sign: int) -> Branch:
        one, zero = np.ones_like(kappa), np.zeros_like(kappa)
        if sign > 0:
            return Branch(one, zero, one, zero)
        return Branch(zero, one, zero, one)

    def __eq__(self, other) -> bool:
        return (
            type(self) is type(other)
            and self.radius == other.radius
            and self.segments == other.segments
        )

    def __hash__(self) -> int:
        return hash((type(self).__name__, self.radius, self.segments))

    def __repr__(self) -> str:
        return f"{type(self).__name__}(radius={self.radius}, segments={self.segments})"

    def __str__(self) -> str:
        layers = "; ".join(f"[{l:g}, {r:g}]: {v:g}" for l, r, v in self.segments)
        return f"{self.kind.value} potential, R={self.radius:g} ({layers or 'empty'})"


class PiecewiseConstant(PotentialSpec):
    """
    General nonnegative piecewise-constant potential, solved by transfer matrices.
    """

    kind = PotentialKind.PIECEWISE_CONSTANT

    def _transfer(self, kappa: np.ndarray) -> Tuple[np.ndarray, ...]:
        # Entries of the matrix mapping (psi, dpsi) from -R to +R
        m00, m01 = np.ones_like(kappa), np.zeros_like(kappa)
        m10, m11 = np.zeros_like(kappa), np.ones_like(kappa)
        for _, width, value in self._layers:
            q2 = kappa * kappa - value
            cos, sinc = _cos_sinc(q2, width)
            m00, m01, m10, m11 = (
                cos * m00 + sinc * m10,
                cos * m01 + sinc * m11,
                -q2 * sinc * m00 + cos * m10,
                -q2 * sinc * m01 + cos * m11,
            )

        return m00, m01, m10, m11

    def _system(self, kappa: np.ndarray, sign: int):
        """
        Columns and right-hand side of the 2x2 matching system of a branch.

        For sign +1 the unknowns are (g_minus, h_plus); for sign -1 they are
        (g_minus, h_plus) again, the incident wave coming from the right.
        """

        m00, m01, m10, m11 = self._transfer(kappa)
        outgoing = np.exp(1j * kappa * self.radius)  # e^{i kappa R}
        ik = 1j * kappa

        # (psi, dpsi) of e^{-i kappa x} at x = -R, propagated to +R
        col0 = m00 * outgoing + m01 * (-ik * outgoing)
        col1 = m10 * outgoing + m11 * (-ik * outgoing)

        # e^{i kappa x} at x = +R, moved to the left-hand side
        rhs_col0, rhs_col1 = -outgoing, -ik * outgoing

        if sign > 0:
            # incident e^{i kappa x} at -R, propagated
            inc0 = m00 / outgoing + m01 * ik / outgoing
            inc1 = m10 / outgoing + m11 * ik / outgoing
            y0, y1 = -inc0, -inc1
        else:
            # incident e^{-i kappa x} at +R
            y0, y1 = 1.0 / outgoing, -ik / outgoing

        return (col0, rhs_col0, col1, rhs_col1), (y0, y1)

    def branch(self, kappa, sign: int, check: bool = False) -> Branch:
        kappa = np.atleast_1d(np.asarray(kappa, dtype=complex))
        if self.is_free:
            return self._free_branch(kappa, sign)

        (a00, a01, a10, a11), (y0, y1) = self._system(kappa, sign)
        det = a00 * a11 - a01 * a10

        if check:
            matrices = np.stack([np.stack([a00, a01], -1), np.stack([a10, a11], -1)], -2)
            condition = float(np.max(np.linalg.cond(matrices)))
            if not condition < MAX_CONDITION:
                raise ConditioningError(
                    f"Transfer-matrix system near singular, condition `{condition:.3e}`",
                    condition,
                )

        g_minus = (y0 * a11 - a01 * y1) / det
        h_plus = (a00 * y1 - a10 * y0) / det
        one, zero = np.ones_like(kappa), np.zeros_like(kappa)
        if sign > 0:
            return Branch(one, g_minus, h_plus, zero)
        return Branch(zero, g_minus, h_plus, one)

    def jost(self, kappa, sign: int) -> np.ndarray:
        kappa = np.atleast_1d(np.asarray(kappa, dtype=complex))
        if self.is_free:
            return np.ones_like(kappa)
        (a00, a01, a10, a11), _ = self._system(kappa, sign)
        return a00 * a11 - a01 * a10


class SquareBarrier(PotentialSpec):
    """
    Square barrier of height V0 on [-R, R], with closed-form amplitudes.
    """

    kind = PotentialKind.SQUARE_BARRIER

    def __init__(self, height: float, radius: float) -> None:
        if not (np.isfinite(height) and height >= 0.0):
            raise ValueError(f"Invalid barrier height `{height}`")
        if not (np.isfinite(radius) and radius > 0.0):
            raise ValueError(f"Invalid potential range `{radius}`")

        self.height = float(height)  # V0
        super().__init__(radius, [(-radius, radius, height)])

    def as_piecewise(self) -> PiecewiseConstant:
        return PiecewiseConstant(self.radius, self.segments)

    def _denominator(self, kappa: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        # kappa * D(kappa), entire, and sinh(2 rho R)/rho
        length = 2.0 * self.radius
        rho = np.sqrt(self.height - kappa * kappa + 0j)
        sinhc = _sinhc(rho, length)
        scaled = kappa * np.cosh(rho * length) + (2.0 * kappa * kappa - self.height) / 2j * sinhc
        return scaled, sinhc

    def branch(self, kappa, sign: int, check: bool = False) -> Branch:
        kappa = np.atleast_1d(np.asarray(kappa, dtype=complex))
        if self.is_free:
            return self._free_branch(kappa, sign)

        scaled, sinhc = self._denominator(kappa)
        transmission = kappa * np.exp(-2j * kappa * self.radius) / scaled
        reflection = self.height * sinhc / (2j * kappa) * transmission

        one, zero = np.ones_like(kappa), np.zeros_like(kappa)
        if sign > 0:
            return Branch(one, reflection, transmission, zero)
        return Branch(zero, transmission, reflection, one)

    def jost(self, kappa, sign: int) -> np.ndarray:
        kappa = np.atleast_1d(np.asarray(kappa, dtype=complex))
        if self.is_free:
            return np.ones_like(kappa)
        return self._denominator(kappa)[0]

    def __repr__(self) -> str:
        return f"SquareBarrier(height={self.height}, radius={self.radius})"


def square_barrier(height: float, radius: float) -> SquareBarrier:
    """
    Build a square barrier of height `height` on [-`radius`, `radius`].

    A zero height gives the free particle, whose amplitudes are trivial.

    Raises
    ------
    ValueError
        If the range is not positive or the height is negative.
    """

    return SquareBarrier(height, radius)


def piecewise_constant(
    segments: Sequence[Tuple[float, float, float]], radius: float
) -> PiecewiseConstant:
    """
    Build a piecewise-constant potential from (left, right, value) triples.
    """

    return PiecewiseConstant(radius, segments)


def _signed(ks) -> Tuple[np.ndarray, np.ndarray]:
    ks = np.asarray(ks, dtype=float)
    if np.any(ks == 0.0) or not np.all(np.isfinite(ks)):
        raise ValueError(
            "Amplitudes at `k=0` are only available as one-sided limits, "
            "see `g_minus_derivatives`"
        )
    return ks, np.where(ks > 0, 1, -1)


def amplitudes(pot: PotentialSpec, ks) -> ScatteringData:
    """
    Compute the scattering amplitudes at real nonzero momenta.

    Parameters
    ----------
    pot : PotentialSpec
        The potential.
    ks : float or array_like
        Momenta; a scalar gives scalar fields.

    Returns
    -------
    ScatteringData
        The exterior coefficients and rho = sqrt(k_b**2 - k**2).

    Raises
    ------
    ValueError
        If any momentum is zero.
    ConditioningError
        If a transfer-matrix system is numerically singular.
    """

    ks, signs = _signed(ks)
    flat, flat_signs = ks.ravel(), signs.ravel()

    fields = {name: np.empty(flat.shape, dtype=complex) for name in Branch._fields}
    for sign in (1, -1):
        mask = flat_signs == sign
        if mask.any():
            coeffs = pot.branch(np.abs(flat[mask]), sign, check=True)
            for name in Branch._fields:
                fields[name][mask] = getattr(coeffs, name)

    rho = np.sqrt(pot.barrier_momentum**2 - ks * ks + 0j)
    if ks.ndim == 0:
        return ScatteringData(
            float(ks), *(complex(fields[name][0]) for name in Branch._fields), complex(rho)
        )

    return ScatteringData(
        ks, *(fields[name].reshape(ks.shape) for name in Branch._fields), rho
    )


def scattering_state(pot: PotentialSpec, k: float, xs, derivative: bool = False) -> np.ndarray:
    """
    Sample the stationary state phi(x, k), or its x-derivative, at positions `xs`.

    Raises
    ------
    ValueError
        If `k` is zero.
    """

    k, sign = _signed(k)
    if k.ndim != 0:
        raise ValueError("`scattering_state` takes a single momentum")

    return pot.state(abs(float(k)), int(sign), xs, derivative=derivative)[:, 0]


def g_minus_derivative_at_zero(pot: PotentialSpec, sign: int, order: int) -> complex:
    """
    Closed-form one-sided derivative of g_minus at k = +-0 for a square barrier.

    Parameters
    ----------
    pot : PotentialSpec
        A square barrier with positive height.
    sign : int
        +1 for k -> +0, -1 for k -> -0.
    order : int
        0 or 1.

    Returns
    -------
    complex
        The derivative d^n g_minus/dk^n at the requested side of zero.

    Raises
    ------
    ValueError
        If the potential is not a square barrier, if it is free, or if the
        order is not 0 or 1 (higher orders are served by `g_minus_derivatives`).
    """

    if not isinstance(pot, SquareBarrier):
        raise ValueError(f"Closed forms need a square barrier, got `{pot!r}`")
    if pot.is_free:
        raise ValueError("Zero-momentum limits of the free particle differ from the barrier ones")
    if sign not in (1, -1):
        raise ValueError(f"Invalid branch sign `{sign}`")
    if order not in (0, 1):
        raise ValueError(f"No closed form for derivative order `{order}`")

    if order == 0:
        return -1.0 + 0j if sign > 0 else 0j

    kb, radius = pot.barrier_momentum, pot.radius
    argument = 2.0 * kb * radius
    if sign > 0:
        return 2j * radius + 2.0 / (1j * kb * np.tanh(argument))

    return complex(-2.0 / (1j * kb * np.sinh(argument)))


def pole_free_radius(pot: PotentialSpec, sign: int, radius: float) -> float:
    """
    Halve `radius` until the disk around zero momentum holds no pole of the branch.
    """

    angles = 2.0 * np.pi * np.arange(512) / 512
    for _ in range(12):
        if winding_number(pot.jost(radius * np.exp(1j * angles), sign)) == 0:
            return radius
        LOGGER.debug("Pole inside contour of radius %g, halving", radius)
        radius /= 2.0

    raise ConditioningError("No pole-free disk found around zero momentum", np.inf)


def g_minus_derivatives(
    pot: PotentialSpec,
    sign: int,
    order: int,
    method: str = "contour",
    radius: float = 0.05,
) -> np.ndarray:
    """
    One-sided derivatives of g_minus at k = +-0, orders 0 to `order`.

    Square barriers use the closed forms for orders 0 and 1; all other values
    are numeric, either by contour sampling of the analytically continued
    branch or by one-sided Richardson differences.

    Parameters
    ----------
    pot : PotentialSpec
        The potential.
    sign : int
        +1 for k -> +0, -1 for k -> -0.
    order : int
        Highest derivative order, at most 5.
    method : str
        "contour" or "richardson".
    radius : float
        Initial radius of the sampling circle for the contour method.

    Returns
    -------
    np.ndarray
        The derivatives with respect to k, lowest order first.
    """

    if sign not in (1, -1):
        raise ValueError(f"Invalid branch sign `{sign}`")
    if not 0 <= order <= MAX_G_ORDER:
        raise ValueError(f"Unsupported derivative order `{order}`")

    if pot.is_free:
        derivatives = np.zeros(order + 1, dtype=complex)
        if sign < 0:
            derivatives[0] = 1.0
        return derivatives

    if method == "contour":
        radius = pole_free_radius(pot, sign, radius)
        values = contour_derivatives(
            lambda kappa: pot.branch(kappa, sign).g_minus, order, radius=radius
        )
        derivatives = values * np.array([sign**n for n in range(order + 1)])
    elif method == "richardson":

        def func(k):
            return pot.branch(np.array([abs(k)]), sign).g_minus[0]

        derivatives = np.array(
            [richardson_limit(func, sign)]
            + [richardson_derivative(func, n, sign) for n in range(1, order + 1)]
        )
    else:
        raise ValueError(f"Unknown differentiation method `{method}`")

    if isinstance(pot, SquareBarrier):
        for n in range(min(order, 1) + 1):
            derivatives[n] = g_minus_derivative_at_zero(pot, sign, n)

    return derivatives


def phi_at_zero(pot: PotentialSpec, sign: int, xs) -> np.ndarray:
    """
    One-sided limit phi(x, +-0), by Richardson extrapolation.
    """

    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    if pot.is_free:
        return np.full(xs.shape, 1.0 / SQRT_2PI, dtype=complex)

    return richardson_limit(lambda k: pot.state(abs(k), sign, xs)[:, 0], sign, LIMIT_STEPS)


def dk_phi_at_zero(pot: PotentialSpec, sign: int, xs) -> np.ndarray:
    """
    One-sided momentum derivative of the stationary states at k = +-0.

    For x < -R the exterior closed form is used; elsewhere the states are
    differentiated numerically over k. The free particle gives i x/sqrt(2 pi).

    Parameters
    ----------
    pot : PotentialSpec
        The potential.
    sign : int
        +1 for k -> +0, -1 for k -> -0.
    xs : array_like
        Positions.

    Returns
    -------
    np.ndarray
        Samples of d(phi)/dk at the requested side of zero.

    Raises
    ------
    ZeroEnergyResonanceError
        If phi(x, +-0) does not vanish, the case of a zero-energy resonance.
    """

    if sign not in (1, -1):
        raise ValueError(f"Invalid branch sign `{sign}`")

    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    if pot.is_free:
        return 1j * xs / SQRT_2PI + 0j

    limit = phi_at_zero(pot, sign, xs)
    worst = float(np.max(np.abs(limit)))
    if worst > RESONANCE_TOLERANCE:
        raise ZeroEnergyResonanceError(
            f"phi(x, {'+' if sign > 0 else '-'}0) = `{worst:.3e}` does not vanish; "
            "potentials with a zero-energy resonance are not supported"
        )

    result = np.empty(xs.shape, dtype=complex)
    left = xs < -pot.radius
    if left.any():
        g0, g1 = g_minus_derivatives(pot, sign, 1)
        g_plus = 1.0 if sign > 0 else 0.0
        x = xs[left]
        # d/dk = sign * d/dkappa on the branch k = sign * kappa
        result[left] = sign * (g_plus * 1j * x + sign * g1 - 1j * x * g0) / SQRT_2PI
    if (~left).any():
        others = xs[~left]
        result[~left] = richardson_derivative(
            lambda k: pot.state(abs(k), sign, others)[:, 0], 1, sign
        )

    return result

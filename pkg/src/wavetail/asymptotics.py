"""
Module for the long-time expansion of scattered packets.

Writing the wave function as two half-line integrals of
e^{-it kappa^2} phi(x, sign kappa) psi_tilde(sign kappa) and expanding the
integrands around kappa = 0, each power kappa^n contributes

    (1/2) Gamma((n + 1)/2) (it)^(-(n + 1)/2),

so odd n give integer powers of 1/t and even n half-integer ones. With
psi_tilde vanishing to order m at zero momentum, the two leading powers are
m/2 + 1/2 and m/2 + 1.
"""

# Import standard modules
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple
import logging
import math

# Import third-party libraries
import numpy as np
from scipy import integrate
from scipy.special import gamma

# Import local modules
from .common import SQRT_2PI
from .packets import PacketSpec
from .potential import PotentialSpec, dk_phi_at_zero
from .spectral import SIGNS, derivative_table, vanishing_order

LOGGER = logging.getLogger(__name__)

# Highest vanishing order with a coefficient formula (needs psi_tilde^(m+1))
MAX_TAIL_ORDER = 3

ROUTES = ("identities", "series")


@dataclass(frozen=True)
class TailTerm:
    """
    A term coefficient(x) (it)^(-power), with the coefficient kept per branch.
    """

    power: float
    parts: np.ndarray  # shape (2, len(xs)), rows in the order of SIGNS

    @property
    def coefficient(self) -> np.ndarray:
        return self.parts.sum(axis=0)


@dataclass(frozen=True)
class TailExpansion:
    m: int
    xs: np.ndarray
    terms: Tuple[TailTerm, ...]
    route: str = "identities"

    @property
    def parity(self) -> str:
        return "even" if self.m % 2 == 0 else "odd"

    @property
    def leading_power(self) -> float:
        """
        Power of the first term with a nonvanishing coefficient.
        """

        scale = max(float(np.max(np.abs(term.coefficient))) for term in self.terms)
        for term in self.terms:
            if np.max(np.abs(term.coefficient)) > 1e-14 * scale:
                return term.power

        raise ValueError("All tail coefficients vanish")


def _check_order(m: int) -> None:
    if not 0 <= m <= MAX_TAIL_ORDER:
        raise ValueError(f"Unsupported vanishing order `{m}`")


def _series_coefficients(phi, dk_phi, table, n: int) -> np.ndarray:
    """
    Taylor coefficients c_n(sign) of phi psi_tilde in k at +-0, keeping
    derivatives of phi up to first order.
    """

    value = phi * table[:, n, None] / math.factorial(n)
    if n >= 1:
        value = value + dk_phi * table[:, n - 1, None] / math.factorial(n - 1)

    return value


def order_terms(
    phi: np.ndarray,
    dk_phi: np.ndarray,
    table: np.ndarray,
    m: int,
    route: str = "identities",
) -> Tuple[TailTerm, TailTerm]:
    """
    The two leading tail terms for vanishing order `m`.

    Parameters
    ----------
    phi : np.ndarray
        phi(x, +-0), one row per branch.
    dk_phi : np.ndarray
        The momentum derivative of phi at +-0, one row per branch.
    table : np.ndarray
        psi_tilde^(n)(+-0), one row per branch, through order m + 1.
    m : int
        Vanishing order, 0 to 3.
    route : str
        "identities" evaluates the closed coefficient formulas of each parity;
        "series" assembles the same powers from the Taylor coefficients of
        phi psi_tilde.

    Returns
    -------
    Tuple[TailTerm, TailTerm]
        The terms, lowest power first; a coefficient may vanish identically.
    """

    _check_order(m)
    signs = np.array(SIGNS, dtype=float)[:, None]
    phi = np.asarray(phi, dtype=complex)
    dk_phi = np.asarray(dk_phi, dtype=complex)
    table = np.asarray(table, dtype=complex)
    upper, lower = table[:, m + 1, None], table[:, m, None]

    if route == "series":
        terms = []
        for n in (m, m + 1):
            coefficient = _series_coefficients(phi, dk_phi, table, n)
            if n % 2:
                j = (n - 1) // 2
                terms.append(TailTerm(j + 1.0, 0.5 * signs * math.factorial(j) * coefficient))
            else:
                j = n // 2
                terms.append(TailTerm(j + 0.5, 0.5 * gamma(j + 0.5) * coefficient))
        return tuple(terms)
    if route != "identities":
        raise ValueError(f"Unknown coefficient route `{route}`")

    if m % 2 == 0:
        half = m // 2
        first = TailTerm(half + 0.5, 0.5 * gamma(half + 0.5) / math.factorial(m) * phi * lower)
        second = TailTerm(
            half + 1.0,
            0.5 * signs * math.factorial(half) / math.factorial(m) * dk_phi * lower,
        )
    else:
        half = (m + 1) // 2
        first = TailTerm(
            float(half),
            0.5 * signs * math.factorial(half - 1) / math.factorial(m) * phi * lower,
        )
        second = TailTerm(
            half + 0.5,
            0.5
            * gamma(half + 0.5)
            / math.factorial(m + 1)
            * ((m + 1) * dk_phi * lower + phi * upper),
        )

    return first, second


def tail_expansion(
    pot: PotentialSpec,
    packet: PacketSpec,
    xs,
    route: str = "identities",
    tol: float = 1e-8,
    m: Optional[int] = None,
) -> TailExpansion:
    """
    Leading long-time expansion of psi(x, t) at positions `xs`.

    Without a zero-energy resonance phi(x, +-0) vanishes, and so do the terms
    built from it; the free particle has phi(x, +-0) = 1/sqrt(2 pi).

    Parameters
    ----------
    pot : PotentialSpec
        The potential.
    packet : PacketSpec
        The initial packet.
    xs : array_like
        Positions.
    route : str
        Coefficient route, see `order_terms`.
    tol : float
        Relative tolerance of the vanishing-order detection.
    m : Optional[int]
        Vanishing order, detected when not given.

    Returns
    -------
    TailExpansion
        The two leading terms.

    Raises
    ------
    OrderUndeterminedError
        If the vanishing order cannot be determined.
    ZeroEnergyResonanceError
        If phi(x, +-0) does not vanish for a nontrivial potential.
    """

    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    if m is None:
        m = vanishing_order(pot, packet, tol)
    _check_order(m)

    # dk_phi_at_zero also checks that phi(x, +-0) vanishes
    dk_phi = np.array([dk_phi_at_zero(pot, sign, xs) for sign in SIGNS])
    if pot.is_free:
        phi = np.full(dk_phi.shape, 1.0 / SQRT_2PI, dtype=complex)
    else:
        phi = np.zeros(dk_phi.shape, dtype=complex)

    terms = order_terms(phi, dk_phi, derivative_table(pot, packet), m, route)
    LOGGER.debug("Tail of %s: m=%d, powers %s", packet, m, [term.power for term in terms])

    return TailExpansion(m, xs, terms, route)


def tail_value(expansion: TailExpansion, t, leading_only: bool = False) -> np.ndarray:
    """
    Evaluate the expansion, sum of coefficient (it)^(-power), at times `t`.

    A scalar `t` gives values over `expansion.xs`; an array gives one row per
    time. With `leading_only`, only the term of `leading_power` is kept.

    Raises
    ------
    ValueError
        If a time is not positive.
    """

    times = np.asarray(t, dtype=float)
    if np.any(times <= 0.0):
        raise ValueError(f"Tail needs positive times, got `{t}`")

    terms = expansion.terms
    if leading_only:
        terms = [term for term in terms if term.power == expansion.leading_power]

    scalar = times.ndim == 0
    times = np.atleast_1d(times)[:, None]
    values = sum(term.coefficient[None, :] * np.power(1j * times, -term.power) for term in terms)

    return values[0] if scalar else values


def asymptotic_nonescape(
    expansion: TailExpansion, times, a: float, b: float
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Nonescape probability of the expansion on [a, b], with its envelope.

    The envelope adds the magnitudes of every branch part of every term,
    dropping all interference between them.

    Returns
    -------
    Tuple[np.ndarray, np.ndarray]
        The probabilities and the envelopes, one per time.
    """

    mask = (expansion.xs >= a) & (expansion.xs <= b)
    if mask.sum() < 3:
        raise ValueError(f"Tail positions do not cover `[{a}, {b}]`")
    xs = expansion.xs[mask]

    times = np.atleast_1d(np.asarray(times, dtype=float))
    values = tail_value(expansion, times)[:, mask]
    envelope = sum(
        np.abs(term.parts[:, mask]).sum(axis=0)[None, :] * times[:, None] ** -term.power
        for term in expansion.terms
    )

    return (
        integrate.simpson(np.abs(values) ** 2, x=xs, axis=1),
        integrate.simpson(envelope**2, x=xs, axis=1),
    )


def crossover_time(
    times: Sequence[float], exact: Sequence[float], asymptotic: Sequence[float], threshold: float = 0.15
) -> Optional[float]:
    """
    Earliest time from which |exact/asymptotic - 1| stays below `threshold`.

    Returns None when the last sample is still above the threshold.
    """

    times = np.asarray(times, dtype=float)
    deviation = np.abs(np.asarray(exact) / np.asarray(asymptotic) - 1.0)
    above = np.nonzero(~(deviation < threshold))[0]
    if above.size == 0:
        return float(times[0])
    if above[-1] == times.size - 1:
        return None

    return float(times[above[-1] + 1])

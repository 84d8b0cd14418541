"""Closed-form edge-mode solutions for the symmetric chain (units of g = 1).

At the high-symmetry point (equal hopping and pairings, zero detuning,
quarter-flux phase) the zero-mode equations of the semi-infinite chain
reduce to single-step recursions whose solutions are exponentials:

* right singular vector  ``V_l = A exp((i k + lambda) l)`` (right edge),
* left singular vector   ``U_l = exp(i phi_u) A exp(i k l) exp(lambda (n-1-l))``,

with inverse localization length ``lambda(omega)``, generalized momentum
``k(omega)``, relative phase ``phi_u = pi/2 - k``, and normalization ``A``.
Hybridization of the two edge solutions gives the finite-size value of the
smallest singular value.  All expressions carry ``O(exp(-2 lambda n))``
relative error from the semi-infinite ansatz.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np


class PhaseRegion(enum.Enum):
    """Edge-localization regions of the (gamma, omega) plane."""

    BOTH_EDGES = "both_edges"
    SINGLE_EDGE_TOPOLOGICAL = "single_edge_topological"
    NONE = "none"


def lambda_plus(omega: float, gamma: float) -> float:
    """Inverse localization length of the right-localized channel."""
    return -0.5 * math.log(((gamma - 2.0) ** 2 + 4.0 * omega**2) / 16.0)


def lambda_minus(omega: float, gamma: float) -> float:
    """Inverse localization length of the left-localized channel."""
    return 0.5 * math.log(((gamma + 2.0) ** 2 + 4.0 * omega**2) / 16.0)


def k_plus(omega: float, gamma: float) -> float:
    return math.atan2(2.0 * omega, gamma - 2.0)


def k_minus(omega: float, gamma: float) -> float:
    return -math.atan2(2.0 * omega, gamma + 2.0)


def phase_region(omega: float, gamma: float) -> PhaseRegion:
    """Classify which edge solutions are normalizable.

    The two ellipse conditions ``((gamma +- 2)^2 + 4 omega^2)/16 <= 1``
    decide normalizability of the left/right channel respectively.
    """
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    right = ((gamma - 2.0) ** 2 + 4.0 * omega**2) / 16.0 < 1.0
    left = ((gamma + 2.0) ** 2 + 4.0 * omega**2) / 16.0 < 1.0
    if right and left:
        return PhaseRegion.BOTH_EDGES
    if right:
        return PhaseRegion.SINGLE_EDGE_TOPOLOGICAL
    return PhaseRegion.NONE


@dataclass(frozen=True)
class EdgeSolution:
    """Closed-form edge singular vectors at one (omega, gamma, n)."""

    lambda_plus: float
    lambda_minus: float
    k_plus: float
    k_minus: float
    amplitude_a: float
    phi_u: float
    n: int
    omega: float
    gamma: float

    def v_vector(self) -> np.ndarray:
        """Doubled right singular vector (hole block = +i particle block)."""
        sites = np.arange(self.n)
        top = self.amplitude_a * np.exp((1j * self.k_plus + self.lambda_plus) * sites)
        return np.concatenate([top, 1j * top])

    def u_vector(self) -> np.ndarray:
        """Doubled left singular vector, localized at the opposite edge."""
        sites = np.arange(self.n)
        top = (
            np.exp(1j * self.phi_u)
            * self.amplitude_a
            * np.exp(1j * self.k_plus * sites)
            * np.exp(self.lambda_plus * (self.n - 1 - sites))
        )
        return np.concatenate([top, 1j * top])


def edge_solution(omega: float, gamma: float, n: int) -> EdgeSolution:
    """Closed-form quantities of the right-edge zero mode.

    Only defined inside the single-edge topological ellipse; outside it the
    exponential ansatz is not normalizable and a ``ValueError`` is raised.
    """
    if phase_region(omega, gamma) is not PhaseRegion.SINGLE_EDGE_TOPOLOGICAL:
        raise ValueError(
            f"(omega={omega}, gamma={gamma}) is outside the single-edge region"
        )
    lam = lambda_plus(omega, gamma)
    k = k_plus(omega, gamma)
    amp = math.sqrt((math.expm1(2 * lam)) / (math.expm1(2 * lam * n)) / 2.0)
    return EdgeSolution(
        lambda_plus=lam,
        lambda_minus=lambda_minus(omega, gamma),
        k_plus=k,
        k_minus=k_minus(omega, gamma),
        amplitude_a=amp,
        phi_u=math.pi / 2 - k,
        n=n,
        omega=omega,
        gamma=gamma,
    )


def zero_singular_value(omega: float, gamma: float, n: int) -> tuple[float, float]:
    """Smallest singular value from edge-mode hybridization.

    Returns ``(finite_n, asymptotic)``: the finite-size closed form and its
    thermodynamic limit ``2 (1 - exp(-2 lambda)) exp(-lambda n)``.  The
    magnitude is returned (a singular value is nonnegative).  Accuracy
    degrades as ``exp(-2 lambda n)`` approaches one near the region
    boundary.
    """
    if phase_region(omega, gamma) is not PhaseRegion.SINGLE_EDGE_TOPOLOGICAL:
        raise ValueError(
            f"(omega={omega}, gamma={gamma}) is outside the single-edge region"
        )
    lam = lambda_plus(omega, gamma)
    finite = abs(
        2.0 * math.exp(lam * (n - 2)) * math.expm1(2 * lam) / math.expm1(2 * lam * n)
    )
    asymptotic = 2.0 * (1.0 - math.exp(-2 * lam)) * math.exp(-lam * n)
    return finite, asymptotic


def gaussian_prediction(l: int, j: int) -> float:
    """Universal normalized equal-time correlation in the topological phase.

    ``sqrt(2 sqrt(l j)/(l + j)) * exp(-(l - j)^2 / (2 (l + j)))`` for site
    indices counted from the edge opposite the localized right vector.  The
    anomalous companion equals ``1j`` times this value.
    """
    if l < 1 or j < 1:
        raise ValueError("site indices must be >= 1")
    return math.sqrt(2.0 * math.sqrt(l * j) / (l + j)) * math.exp(
        -((l - j) ** 2) / (2.0 * (l + j))
    )


def linearized_dispersion(omega: float, gamma: float) -> tuple[float, float]:
    """Small-frequency expansions of the momentum and localization length.

    Returns ``(k_lin, lambda_quad)`` with ``k_lin = 2 omega/(gamma-2)`` and
    ``lambda_quad = log(4/(gamma-2)) - 2 omega^2/(gamma-2)^2``; valid for
    ``|omega| << gamma - 2``.
    """
    if gamma <= 2.0:
        raise ValueError("expansion requires gamma > 2")
    k_lin = 2.0 * omega / (gamma - 2.0)
    lam0 = math.log(4.0 / (gamma - 2.0))
    return k_lin, lam0 - 2.0 * omega**2 / (gamma - 2.0) ** 2


def characteristic_beta_roots(
    omega: float, gamma: float, j: float, g_s: float, g_c: float, channel: int = +1
):
    """Roots of the general decay-rate characteristic polynomial.

    Channel ``eta = +-1`` labels the symmetry sector whose hole block is
    ``+1j*eta`` times the particle block; its zero-mode recursion has the
    characteristic equation ``i (J - eta g_c) beta^2 + (omega + i gamma/2 -
    i eta g_s) beta - i (J + eta g_c) = 0``.  Returns the two roots, with
    ``inf`` standing in for the escaped root when the leading coefficient
    vanishes (e.g. ``J = g_c`` in the ``+`` channel, where the recursion
    degenerates to a single exponential).  A root of modulus below (above)
    one decays away from the left (right) edge.
    """
    if channel not in (+1, -1):
        raise ValueError("channel must be +1 or -1")
    a = 1j * (j - channel * g_c)
    b = omega + 0.5j * gamma - 1j * channel * g_s
    c = -1j * (j + channel * g_c)
    if abs(a) < 1e-300:
        if abs(b) < 1e-300:
            raise ValueError("degenerate recursion: both leading coefficients vanish")
        return complex(-c / b), complex(np.inf)
    disc = np.sqrt(np.complex128(b * b - 4 * a * c))
    return complex((-b + disc) / (2 * a)), complex((-b - disc) / (2 * a))

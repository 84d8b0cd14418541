"""SVD of the shifted dynamical matrix, Green's functions, and spectral scalars.

All frequency-domain quantities descend from the factorization
``w*I - H = U S V^dagger`` with singular values stored ascending, so
``s[0]`` is always the candidate topological zero.  The Green's function is
``V diag(1/s) U^dagger`` and the amplification matrix contracts the bath
moments with the left singular vectors.

For the symmetric chain (pure imaginary uniform hopping matching the
off-diagonal pairing, zero detuning, uniform loss, no gain) the shifted
matrix splits into two bidiagonal channels.  ``svd_at`` detects this and
routes through a phase-rescaled real bidiagonal SVD, which resolves the
exponentially small topological singular value to full relative accuracy;
the generic dense SVD only bounds its error in units of ``eps * s_max``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from .models import CouplingSet, DynamicalMatrix

RESONANCE_TOL = 1e-14
_GAUGE_ANCHOR_REL = 1e-8
_INVERSE_REFINE_REL = 1e-12


class ResonanceError(RuntimeError):
    """The frequency sits on a resonance: a singular value is numerically zero."""


@dataclass(frozen=True)
class SvdTriple:
    """Full SVD of ``w*I - H`` at one frequency, singular values ascending."""

    omega: float
    u: NDArray[np.complex128]
    s: NDArray[np.float64]
    v: NDArray[np.complex128]

    @property
    def n(self) -> int:
        return self.s.size // 2

    @property
    def u_particle(self):
        return self.u[: self.n]

    @property
    def u_hole(self):
        return self.u[self.n:]

    @property
    def v_particle(self):
        return self.v[: self.n]

    @property
    def v_hole(self):
        return self.v[self.n:]


@dataclass(frozen=True)
class GreenFunction:
    """Resolvent ``(w*I - H)^{-1}`` with its four site-space blocks."""

    omega: float
    g_full: NDArray[np.complex128]

    @property
    def n(self) -> int:
        return self.g_full.shape[0] // 2

    @property
    def g(self):
        return self.g_full[: self.n, : self.n]

    @property
    def g_bar(self):
        return self.g_full[: self.n, self.n:]

    @property
    def g_bar_prime(self):
        return self.g_full[self.n:, : self.n]

    @property
    def g_prime(self):
        return self.g_full[self.n:, self.n:]

    @cached_property
    def condition_number(self) -> float:
        s = np.linalg.svd(self.g_full, compute_uv=False)
        return float(s[0] / s[-1])


def _symmetric_channels(c: CouplingSet):
    """Return (J, g_s, gamma) if the chain splits into bidiagonal channels."""
    n = c.n
    if n < 2 or c.unit_cell != 1:
        return None
    if np.any(c.p_mat != 0):
        return None
    gam = c.gamma_mat[0, 0]
    if not np.allclose(c.gamma_mat, gam * np.eye(n), atol=1e-14):
        return None
    if np.any(np.abs(np.diag(c.j_mat)) > 1e-14):
        return None
    hop = c.j_mat[1, 0]
    if abs(hop.real) > 1e-14:
        return None
    j = hop.imag
    g_s = c.k_mat[0, 0]
    g_c = c.k_mat[1, 0]
    if abs(g_c - j) > 1e-14 or abs(g_s.imag) > 1e-14 or abs(g_c.imag) > 1e-14:
        return None
    expect_j = np.zeros((n, n), dtype=complex)
    expect_k = np.zeros((n, n), dtype=complex)
    np.fill_diagonal(expect_k, g_s)
    for m in range(n - 1):
        expect_j[m + 1, m] = 1j * j
        expect_j[m, m + 1] = -1j * j
        expect_k[m + 1, m] = g_c
        expect_k[m, m + 1] = g_c
    # exp(1j*pi/2) carries ~1e-16 real dirt, so compare with a tolerance far
    # below any physical scale but above that dirt
    if np.linalg.norm(c.j_mat - expect_j, np.inf) > 1e-13:
        return None
    if np.linalg.norm(c.k_mat - expect_k, np.inf) > 1e-13:
        return None
    return float(j), float(g_s.real), float(gam)


def _bidiagonal_svd(n, diag, offdiag, lower):
    """SVD of a bidiagonal Toeplitz matrix via its real phase-equivalent form.

    Factoring out site-dependent phases leaves a nonnegative real bidiagonal
    matrix.  The QR-iteration driver (gesvd) computes bidiagonal singular
    values to high relative accuracy, which the divide-and-conquer default
    does not; the exponentially small topological value needs the former.
    """
    br = np.diag(np.full(n, abs(diag)))
    if lower:
        br[np.arange(1, n), np.arange(n - 1)] = abs(offdiag)
    else:
        br[np.arange(n - 1), np.arange(1, n)] = abs(offdiag)
    ur, s, vtr = scipy.linalg.svd(br, lapack_driver="gesvd")
    s = s[::-1].copy()
    ur = ur[:, ::-1]
    vtr = vtr[::-1]
    if s[0] < _INVERSE_REFINE_REL * s[-1]:
        s0, u0, v0 = _smallest_triple_via_inverse(n, diag, offdiag, lower)
        if s0 is not None:
            s[0] = s0
            # vectors replaced below after phase restoration
            phase_fix = (u0, v0)
        else:
            phase_fix = None
    else:
        phase_fix = None
    step = np.angle(offdiag) - np.angle(diag)
    theta = (np.arange(n) * step) if lower else (-np.arange(n) * step)
    phi = np.angle(diag) - theta
    u = np.exp(1j * theta)[:, None] * ur
    v = vtr.conj().T * np.exp(-1j * phi)[:, None]
    if phase_fix is not None:
        u[:, 0] = phase_fix[0]
        v[:, 0] = phase_fix[1]
    return u, s, v


def _smallest_triple_via_inverse(n, diag, offdiag, lower):
    """Smallest singular triple of a bidiagonal Toeplitz matrix, via its
    explicit triangular Toeplitz inverse.

    Deflation thresholds floor QR-iteration singular values near
    ``eps * s_max``; the largest singular value of the inverse carries full
    relative accuracy instead.  Returns ``None`` when the inverse would
    overflow.
    """
    ratio = -offdiag / diag
    log_biggest = n * np.log(max(abs(ratio), 1.0)) - np.log(abs(diag))
    if log_biggest > 650.0:
        return None, None, None
    col = ratio ** np.arange(n) / diag
    first = np.zeros(n, dtype=complex)
    first[0] = col[0]
    inv = scipy.linalg.toeplitz(col, first) if lower else scipy.linalg.toeplitz(first, col)
    u_inv, s_inv, vh_inv = np.linalg.svd(inv)
    # B = V Sigma^{-1} U+ when B^{-1} = U Sigma V+, so the smallest triple of
    # B is (1/sigma_max, V[:, 0], U[:, 0]).
    return 1.0 / s_inv[0], vh_inv[0].conj(), u_inv[:, 0]


def _channel_svd(omega, j, g_s, gamma, n):
    """Assemble the full 2n SVD from the two bidiagonal symmetry channels."""
    # eta = +1 sector (hole block = +i particle block): lower bidiagonal
    up, sp, vp = _bidiagonal_svd(n, omega + 1j * (gamma / 2 - g_s), -2j * j, lower=True)
    # eta = -1 sector: upper bidiagonal
    um, sm, vm = _bidiagonal_svd(n, omega + 1j * (gamma / 2 + g_s), 2j * j, lower=False)
    s = np.concatenate([sp, sm])
    u = np.zeros((2 * n, 2 * n), dtype=complex)
    v = np.zeros((2 * n, 2 * n), dtype=complex)
    r = 1.0 / np.sqrt(2.0)
    u[:n, :n] = r * up
    u[n:, :n] = 1j * r * up
    u[:n, n:] = r * um
    u[n:, n:] = -1j * r * um
    v[:n, :n] = r * vp
    v[n:, :n] = 1j * r * vp
    v[:n, n:] = r * vm
    v[n:, n:] = -1j * r * vm
    order = np.argsort(s, kind="stable")
    return u[:, order], s[order], v[:, order]


_DENSE_FLOOR_REL = 1e-10


def _det_refined_smallest(a, s):
    """Recover the smallest singular value of ``a`` from its determinant.

    Dense SVD floors tiny singular values at ``~eps * s_max``; the product
    of ALL singular values equals ``|det a|``, and both the LU
    log-determinant and every bulk singular value carry full relative
    accuracy, so dividing them out reconstructs the lone tiny value.  Only
    valid when exactly one singular value sits below the noise floor.
    """
    _, logdet = np.linalg.slogdet(a)
    if not np.isfinite(logdet):
        return None
    log_s0 = logdet - float(np.sum(np.log(s[1:])))
    if log_s0 > 700.0:
        return None
    return float(np.exp(log_s0))


def _dense_svd_ascending(a):
    """Dense SVD sorted ascending, with the single-tiny-value refinement."""
    u, s, vh = np.linalg.svd(a)
    order = np.argsort(s, kind="stable")
    u, s, v = u[:, order], s[order], vh.conj().T[:, order]
    if s[0] < _DENSE_FLOOR_REL * s[-1] and s[1] > _DENSE_FLOOR_REL * s[-1]:
        refined = _det_refined_smallest(a, s)
        if refined is not None and refined < s[1]:
            s = s.copy()
            s[0] = refined
    return u, s, v


def _fix_gauge(u, v):
    """Rotate each singular-vector pair so the anchoring component of the
    right vector (first component above 1e-8 of the column max) is real
    positive."""
    mags = np.abs(v)
    anchors = np.argmax(mags > _GAUGE_ANCHOR_REL * mags.max(axis=0), axis=0)
    phases = np.exp(-1j * np.angle(v[anchors, np.arange(v.shape[1])]))
    return u * phases, v * phases


def svd_at(h: DynamicalMatrix, omega: float) -> SvdTriple:
    """Full SVD of ``omega*I - H`` with ascending singular values.

    The phase gauge of each singular-vector pair is fixed deterministically
    (see :func:`_fix_gauge`); comparisons against analytic vectors should
    still use overlap magnitudes since degenerate subspaces remain free.
    """
    n2 = h.h.shape[0]
    channels = _symmetric_channels(h.source) if h.source is not None else None
    if channels is not None:
        u, s, v = _channel_svd(omega, *channels, n2 // 2)
    else:
        a = omega * np.eye(n2) - h.h
        try:
            u, s, v = _dense_svd_ascending(a)
        except np.linalg.LinAlgError as exc:
            raise ResonanceError(f"SVD failed to converge at omega={omega}") from exc
    u, v = _fix_gauge(u, v)
    return SvdTriple(omega=float(omega), u=u, s=s, v=v)


def green_function(t: SvdTriple) -> GreenFunction:
    """Resolvent from the SVD: ``V diag(1/s) U^dagger``.

    Raises :class:`ResonanceError` if any singular value sits below the
    resonance threshold; exponentially small topological values above it
    are legitimate and simply produce large amplification.
    """
    if t.s[0] < RESONANCE_TOL:
        raise ResonanceError(
            f"omega={t.omega} is numerically resonant (s0={t.s[0]:.3e})"
        )
    g_full = (t.v / t.s) @ t.u.conj().T
    return GreenFunction(omega=t.omega, g_full=g_full)


def amplification_matrix(t: SvdTriple, c: CouplingSet) -> NDArray[np.complex128]:
    """Noise-channel weight matrix in the singular basis.

    ``Sigma = S^{-1} (U_p^T P U_p^* + U_h^T Gamma U_h^*) S^{-1}``; Hermitian
    positive semidefinite whenever the bath matrices are.
    """
    if t.s[0] <= 0:
        raise ResonanceError("amplification matrix undefined at a resonance")
    core = (
        t.u_particle.T @ c.p_mat @ t.u_particle.conj()
        + t.u_hole.T @ c.gamma_mat @ t.u_hole.conj()
    )
    return core / np.outer(t.s, t.s)


def hermitize(h: DynamicalMatrix, omega: float) -> NDArray[np.complex128]:
    """Chirally symmetric doubling whose eigensystem is the SVD of w*I - H."""
    n2 = h.h.shape[0]
    a = omega * np.eye(n2) - h.h
    out = np.zeros((2 * n2, 2 * n2), dtype=complex)
    out[:n2, n2:] = a
    out[n2:, :n2] = a.conj().T
    return out


def singular_gap(t: SvdTriple, n_edge: int) -> float:
    """Gap separating the ``n_edge`` near-zero values from the bulk.

    For ``n_edge = 0`` (no edge modes expected) the smallest singular value
    itself is returned as the bulk floor.
    """
    if not 0 <= n_edge < t.s.size:
        raise ValueError(f"n_edge={n_edge} out of range for {t.s.size} values")
    if n_edge == 0:
        return float(t.s[0])
    return float(t.s[n_edge] - t.s[n_edge - 1])


def r_parameter(t: SvdTriple) -> float:
    """Spacing ratio (s1 - s0)/(s1 + s0) of the two smallest singular values."""
    s0, s1 = t.s[0], t.s[1]
    if s0 + s1 <= 0:
        raise ValueError("degenerate all-zero singular spectrum")
    return float((s1 - s0) / (s1 + s0))

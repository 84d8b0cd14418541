"""Two-point correlations: frequency-resolved, equal-time, and their diagnostics.

Frequency-resolved normal and anomalous correlation matrices come straight
from the singular basis: ``N(w) = Vp* Sigma Vp^T`` and ``M(w) = Vp* Sigma
Vh^T`` with ``Sigma`` the amplification matrix and ``Vp``/``Vh`` the
particle/hole blocks of the right singular vectors.  Equal-time matrices
integrate the frequency-resolved ones over all frequencies with an adaptive
composite Gauss-Legendre rule plus an analytic large-frequency tail.

Normalization divides every entry by the geometric mean of the
corresponding diagonal occupations, so normalized diagonals are exactly one
and off-diagonals are correlation coefficients.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from numpy.typing import NDArray

from .models import CouplingSet, assert_stable, dynamical_matrix
from .greensvd import SvdTriple, amplification_matrix, svd_at

ZERO_OCCUPATION_TOL = 1e-14
RANK1_VALIDITY_RATIO = 0.1


@dataclass(frozen=True)
class QuadratureSpec:
    """Controls for the equal-time frequency integral."""

    rel_tol: float = 1e-6
    tail_tol: float = 1e-8
    panel_nodes: int = 32
    max_panels: int = 4096
    omega_max: float | None = None  # override the automatic cutoff


@dataclass(frozen=True)
class QuadratureReport:
    omega_max: float
    panels: int
    est_error: float


@dataclass(frozen=True)
class FreqCorrelations:
    """Normal/anomalous correlation matrices at one frequency."""

    omega: float
    n_mat: NDArray[np.complex128]
    m_mat: NDArray[np.complex128]
    n_bar: NDArray[np.complex128]
    m_bar: NDArray[np.complex128]
    excluded_sites: tuple[int, ...] = ()


@dataclass(frozen=True)
class EqualTimeCorrelations:
    """Frequency-integrated correlation matrices with the quadrature record."""

    n_mat: NDArray[np.complex128]
    m_mat: NDArray[np.complex128]
    n_bar: NDArray[np.complex128]
    m_bar: NDArray[np.complex128]
    quadrature_report: QuadratureReport
    excluded_sites: tuple[int, ...] = ()

    @property
    def correlation_matrix(self) -> NDArray[np.complex128]:
        """Full doubled matrix [[N, M], [M*, N^T + I]]."""
        n = self.n_mat.shape[0]
        return np.block([
            [self.n_mat, self.m_mat],
            [self.m_mat.conj(), self.n_mat.T + np.eye(n)],
        ])


@dataclass(frozen=True)
class DecayFit:
    """Least-squares comparison of exponential vs Gaussian spatial decay."""

    xi: float
    sigma2: float
    residual_exp: float
    residual_gauss: float
    better: str
    amp_exp: float = field(default=float("nan"))
    amp_gauss: float = field(default=float("nan"))


def _normalize(mat, diag):
    scale = np.sqrt(np.outer(diag, diag))
    with np.errstate(divide="ignore", invalid="ignore"):
        out = mat / scale
    return out


def normalized_forms(n_mat, m_mat):
    """Normalized matrices and the sites excluded for vanishing occupation."""
    diag = np.real(np.diag(n_mat)).copy()
    excluded = tuple(int(i) for i in np.nonzero(diag < ZERO_OCCUPATION_TOL)[0])
    diag[diag < ZERO_OCCUPATION_TOL] = np.nan
    n_bar = _normalize(n_mat, diag)
    m_bar = _normalize(m_mat, diag)
    idx = np.arange(diag.size)
    n_bar[idx, idx] = np.where(np.isnan(diag), np.nan, 1.0)
    return n_bar, m_bar, excluded


def correlation_blocks(t: SvdTriple, c: CouplingSet):
    """Raw N(w), M(w) from the singular basis (no stability or resonance gate)."""
    sigma = amplification_matrix(t, c)
    vp, vh = t.v_particle, t.v_hole
    left = vp.conj() @ sigma
    return left @ vp.T, left @ vh.T


def freq_correlations(t: SvdTriple, c: CouplingSet) -> FreqCorrelations:
    """Frequency-resolved normal and anomalous correlations with normalization.

    Requires a dynamically stable chain; sites whose occupation density
    vanishes (decoupled, lossless) are flagged and excluded from the
    normalized matrices rather than divided by zero.
    """
    assert_stable(dynamical_matrix(c), "freq_correlations")
    n_mat, m_mat = correlation_blocks(t, c)
    n_bar, m_bar, excluded = normalized_forms(n_mat, m_mat)
    return FreqCorrelations(
        omega=t.omega, n_mat=n_mat, m_mat=m_mat, n_bar=n_bar, m_bar=m_bar,
        excluded_sites=excluded,
    )


def rank1_approximation(t: SvdTriple, c: CouplingSet) -> FreqCorrelations:
    """Correlations rebuilt from the smallest singular value alone.

    Valid deep in a topological phase where one singular value is strongly
    suppressed; emits a warning when ``s0/s1`` exceeds 0.1.
    """
    ratio = t.s[0] / t.s[1] if t.s[1] > 0 else np.inf
    if ratio > RANK1_VALIDITY_RATIO:
        warnings.warn(
            f"rank-1 approximation unreliable: s0/s1 = {ratio:.3g} > "
            f"{RANK1_VALIDITY_RATIO}",
            stacklevel=2,
        )
    sigma00 = amplification_matrix(t, c)[0, 0]
    v0p = t.v_particle[:, 0]
    v0h = t.v_hole[:, 0]
    n_mat = sigma00 * np.outer(v0p.conj(), v0p)
    m_mat = sigma00 * np.outer(v0p.conj(), v0h)
    n_bar, m_bar, excluded = normalized_forms(n_mat, m_mat)
    return FreqCorrelations(
        omega=t.omega, n_mat=n_mat, m_mat=m_mat, n_bar=n_bar, m_bar=m_bar,
        excluded_sites=excluded,
    )


# ---------------------------------------------------------------------------
# Equal-time integration


def _integrand_factory(c: CouplingSet):
    """Return w -> G*(w) diag(P, Gamma) G(w)^T evaluated through the SVD.

    The SVD gauge cancels inside the product, so the factory bypasses the
    per-call symmetry detection and phase fixing of :func:`svd_at`.
    """
    from .greensvd import _channel_svd, _dense_svd_ascending, _symmetric_channels

    h = dynamical_matrix(c)
    n = c.n
    channels = _symmetric_channels(c)
    p_zero = not np.any(c.p_mat)

    def factorize(omega):
        if channels is not None:
            return _channel_svd(omega, *channels, n)
        return _dense_svd_ascending(omega * np.eye(2 * n) - h.h)

    def integrand(omega):
        u, s, v = factorize(omega)
        core = u[n:].T @ c.gamma_mat @ u[n:].conj()
        if not p_zero:
            core = core + u[:n].T @ c.p_mat @ u[:n].conj()
        sigma = core / np.outer(s, s)
        return v.conj() @ sigma @ v.T

    return integrand


def _tail_correction(h, noise, omega_max):
    """Analytic value of the integral beyond ``+-omega_max``.

    From the resolvent series ``G = I/w + H/w^2 + ...`` the symmetric tail
    contributes ``D/(pi W)`` at leading order plus the third-order moment
    term; odd orders cancel by symmetry.
    """
    hc = h.conj()
    first = noise / (np.pi * omega_max)
    third = (hc @ hc @ noise + hc @ noise @ h.T + noise @ h.T @ h.T) / (
        3 * np.pi * omega_max**3
    )
    return first + third


def _tail_next_order(h, noise, omega_max):
    norm_h = np.linalg.norm(h, 2)
    return np.linalg.norm(noise, "fro") * norm_h**4 / (5 * np.pi * omega_max**5) * 3


def _choose_omega_max(c, integrand, quad):
    if quad.omega_max is not None:
        return float(quad.omega_max)
    h = dynamical_matrix(c).h
    omega_max = 4.0 * max(np.max(np.abs(np.linalg.eigvals(h))), 1.0)
    probe = np.linspace(-omega_max, omega_max, 41)
    peak = max(float(np.trace(integrand(w)).real) for w in probe)
    while float(np.trace(integrand(omega_max)).real) > quad.tail_tol * peak:
        omega_max *= 2.0
    # the analytic tail handles what remains; make sure its own truncation
    # error is small relative to the leading tail term
    noise = c.noise_matrix
    while _tail_next_order(h, noise, omega_max) > 0.1 * np.linalg.norm(
        _tail_correction(h, noise, omega_max), "fro"
    ):
        omega_max *= 2.0
    return omega_max


def equal_time(c: CouplingSet, quad: QuadratureSpec = QuadratureSpec()) -> EqualTimeCorrelations:
    """Equal-time correlations by adaptive frequency integration.

    Composite Gauss-Legendre panels over ``[-W, W]`` are bisected wherever
    the two-half refinement changes the panel integral by more than its
    share of the tolerance; the analytic resolvent-series tail covers
    ``|w| > W``.  The chain must be dynamically stable for the integral to
    exist.
    """
    assert_stable(dynamical_matrix(c), "equal_time")
    integrand = _integrand_factory(c)
    omega_max = _choose_omega_max(c, integrand, quad)
    nodes, weights = leggauss(quad.panel_nodes)

    def panel_integral(lo, hi):
        mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
        acc = None
        for x, w in zip(nodes, weights):
            val = integrand(mid + half * x)
            acc = w * val if acc is None else acc + w * val
        return half * acc / (2 * np.pi)

    # first pass: moderate uniform panels give an initial tolerance scale
    n_seed = 16
    edges = np.linspace(-omega_max, omega_max, n_seed + 1)
    worklist = [(edges[i], edges[i + 1], panel_integral(edges[i], edges[i + 1]))
                for i in range(n_seed)]
    scale = max(float(np.linalg.norm(sum(item[2] for item in worklist), "fro")), 1e-300)

    total = None
    n_accepted = 0
    est_error = 0.0
    while worklist:
        lo, hi, coarse = worklist.pop()
        mid = 0.5 * (lo + hi)
        left = panel_integral(lo, mid)
        right = panel_integral(mid, hi)
        fine = left + right
        diff = np.linalg.norm(coarse - fine, "fro")
        # Accept on a width-proportional share of the running global budget
        # or on convergence relative to the panel's own magnitude; sharply
        # peaked integrands dwarf the seed estimate, so the global scale is
        # refreshed as panels land.
        budget = max(
            quad.rel_tol * scale * (hi - lo) / (2 * omega_max),
            quad.rel_tol * np.linalg.norm(fine, "fro"),
        )
        n_panels = n_accepted + len(worklist) + 2
        if diff <= budget or n_panels >= quad.max_panels:
            total = fine if total is None else total + fine
            n_accepted += 2
            est_error += diff
            scale = max(scale, float(np.linalg.norm(total, "fro")))
        else:
            worklist.append((lo, mid, left))
            worklist.append((mid, hi, right))
    if n_accepted >= quad.max_panels:
        warnings.warn(
            f"quadrature hit the panel limit ({quad.max_panels}); "
            f"estimated error {est_error:.3e}",
            stacklevel=2,
        )
    h = dynamical_matrix(c).h
    noise = c.noise_matrix
    total = total + _tail_correction(h, noise, omega_max)
    est_error += _tail_next_order(h, noise, omega_max)

    n = c.n
    n_mat = total[:n, :n]
    m_mat = total[:n, n:]
    n_bar, m_bar, excluded = normalized_forms(n_mat, m_mat)
    report = QuadratureReport(
        omega_max=omega_max, panels=n_accepted, est_error=float(est_error)
    )
    return EqualTimeCorrelations(
        n_mat=n_mat, m_mat=m_mat, n_bar=n_bar, m_bar=m_bar,
        quadrature_report=report, excluded_sites=excluded,
    )


# ---------------------------------------------------------------------------
# Scalar diagnostics


def lro_parameter(corr: NDArray) -> float:
    """Mean absolute entry of a normalized correlation matrix."""
    return float(np.nanmean(np.abs(corr)))


def lro_curvature(curve: NDArray, dx: float = 1.0) -> NDArray[np.float64]:
    """Second derivative of a uniformly sampled curve.

    Central differences in the interior, second-order one-sided stencils at
    the endpoints; exact for quadratics.
    """
    y = np.asarray(curve, dtype=float)
    if y.size < 5:
        raise ValueError("need at least 5 samples for curvature")
    out = np.empty_like(y)
    out[1:-1] = (y[2:] - 2 * y[1:-1] + y[:-2]) / dx**2
    out[0] = (2 * y[0] - 5 * y[1] + 4 * y[2] - y[3]) / dx**2
    out[-1] = (2 * y[-1] - 5 * y[-2] + 4 * y[-3] - y[-4]) / dx**2
    return out


def classify_decay(
    profile: NDArray, center: int, d_min: int = 2, d_max: int | None = None
) -> DecayFit:
    """Fit log-profile against exponential and Gaussian decay laws.

    ``profile`` holds positive values indexed by site; distances are taken
    from ``center``.  Both models are fit by linear least squares on the
    log: ``a - d/xi`` and ``a - d^2/(2 sigma^2)``; the model with the
    smaller residual sum wins.  Distances below ``d_min`` and above
    ``d_max`` (default half the profile length) are excluded to avoid
    boundary contamination.
    """
    p = np.asarray(profile, dtype=float)
    if d_max is None:
        d_max = max(p.size // 2, d_min + 2)
    ds, vals = [], []
    for idx in range(p.size):
        d = abs(idx - center)
        if d_min <= d <= d_max and p[idx] > 0:
            ds.append(float(d))
            vals.append(p[idx])
    if len(ds) < 4:
        raise ValueError(f"only {len(ds)} usable points in [{d_min}, {d_max}]")
    d_arr = np.array(ds)
    logv = np.log(np.array(vals))

    def linfit(x):
        a = np.vstack([np.ones_like(x), x]).T
        coef, *_ = np.linalg.lstsq(a, logv, rcond=None)
        residual = float(np.sum((a @ coef - logv) ** 2))
        return coef, residual

    (a_e, slope_e), res_e = linfit(d_arr)
    (a_g, slope_g), res_g = linfit(d_arr**2)
    xi = -1.0 / slope_e if slope_e < 0 else float("inf")
    sigma2 = -0.5 / slope_g if slope_g < 0 else float("inf")
    return DecayFit(
        xi=float(xi),
        sigma2=float(sigma2),
        residual_exp=res_e,
        residual_gauss=res_g,
        better="exponential" if res_e <= res_g else "gaussian",
        amp_exp=float(np.exp(a_e)),
        amp_gauss=float(np.exp(a_g)),
    )

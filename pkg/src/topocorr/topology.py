"""Winding numbers, gap-closing detection, and the winding-number array.

The spectral winding number at a frequency is the integer phase winding of
``det(w*I - H(k))`` as ``k`` traverses the Brillouin zone.  Collecting its
value on every frequency interval between singular-gap closings yields the
winding-number array, the steady-state invariant: two chains are
topologically equivalent iff their arrays have equal length and equal
entries.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .models import CouplingSet, DynamicalMatrix

DET_CLOSING_TOL = 1e-12
_PHASE_INTEGER_TOL = 1e-6
_MAX_NK = 1 << 18


class GapClosingError(RuntimeError):
    """det(w*I - H(k)) vanishes on the momentum grid: the gap is closed."""


@dataclass(frozen=True)
class WindingArray:
    """Gap-closing frequencies and the per-interval winding numbers.

    ``nus`` has one more entry than ``closings``; the outermost entries are
    zero.  ``stable`` records whether the array has odd length, i.e. whether
    the chain sits in a stable topological phase rather than at a critical
    point where two closings coalesce.
    """

    closings: tuple[float, ...]
    nus: tuple[int, ...]
    stable: bool

    def __post_init__(self):
        if len(self.nus) != len(self.closings) + 1:
            raise ValueError("nus must have one more entry than closings")
        if list(self.closings) != sorted(self.closings):
            raise ValueError("closings must be ascending")

    def to_json(self) -> str:
        return json.dumps(
            {"closings": list(self.closings), "nus": list(self.nus), "stable": self.stable}
        )

    @classmethod
    def from_json(cls, text: str) -> "WindingArray":
        d = json.loads(text)
        return cls(closings=tuple(d["closings"]), nus=tuple(int(x) for x in d["nus"]),
                   stable=bool(d["stable"]))


def _bloch_determinants(c: CouplingSet, omega: float, n_k: int) -> NDArray[np.complex128]:
    """det(w*I - H(k)) on the momentum grid, assembled in one batch."""
    ks = np.linspace(-np.pi, np.pi, n_k, endpoint=False)
    m = c.unit_cell
    jk = np.zeros((n_k, m, m), dtype=complex)
    kk = np.zeros((n_k, m, m), dtype=complex)
    dk = np.zeros((n_k, m, m), dtype=complex)
    jmk = np.zeros((n_k, m, m), dtype=complex)
    kmk = np.zeros((n_k, m, m), dtype=complex)
    for d, (jd, kd, gd, pd) in c.cell_blocks.items():
        w = np.exp(1j * ks * d)[:, None, None]
        jk += jd * w
        kk += kd * w
        dk += 0.5j * (pd - gd) * w
        jmk += jd * w.conj()
        kmk += kd * w.conj()
    mats = np.empty((n_k, 2 * m, 2 * m), dtype=complex)
    mats[:, :m, :m] = -(jk + dk)
    mats[:, :m, m:] = -kk
    mats[:, m:, :m] = kmk.conj()
    mats[:, m:, m:] = jmk.conj() - dk
    mats[:, np.arange(2 * m), np.arange(2 * m)] += omega
    return np.linalg.det(mats)


def winding_number(c: CouplingSet, omega: float, n_k: int = 256) -> int:
    """Phase winding of det(w*I - H(k)) around the Brillouin zone.

    Accumulates principal-branch phase increments between consecutive grid
    points (cyclically), doubling the grid until every increment is below
    pi/2 and the total is within 1e-6 of an integer.

    Raises
    ------
    GapClosingError
        If the determinant vanishes on the grid (the frequency sits on a
        gap closing) or the phase accumulation fails to settle.
    """
    if not c.translationally_invariant:
        raise ValueError("winding number requires a translationally invariant chain")
    if n_k < 64:
        raise ValueError("n_k must be at least 64")
    while n_k <= _MAX_NK:
        dets = _bloch_determinants(c, omega, n_k)
        if np.min(np.abs(dets)) < DET_CLOSING_TOL:
            raise GapClosingError(f"gap closing at omega={omega}")
        increments = np.angle(np.roll(dets, -1) / dets)
        total = increments.sum() / (2 * np.pi)
        if np.max(np.abs(increments)) < np.pi / 2 and abs(total - round(total)) < _PHASE_INTEGER_TOL:
            return int(round(total))
        n_k *= 2
    raise GapClosingError(
        f"winding at omega={omega} did not converge; frequency is likely at a closing"
    )


def topologically_equivalent(a: WindingArray, b: WindingArray) -> bool:
    """Same array length and componentwise-equal winding numbers."""
    return len(a.nus) == len(b.nus) and all(x == y for x, y in zip(a.nus, b.nus))


def _refine_closing(c, lo, hi, nu_lo, nu_hi, refine_tol, n_k):
    """Bisect a winding change down to ``refine_tol`` in frequency.

    When a bracket hides several closings (hairline intervals below the
    scan resolution), converge to the one adjacent to the outer (larger
    ``|omega|``) endpoint, so merged arrays stay reflection symmetric.
    """
    follow_lo = abs(lo) >= abs(hi)
    while hi - lo > refine_tol:
        mid = 0.5 * (lo + hi)
        try:
            nu_mid = winding_number(c, mid, n_k)
        except GapClosingError:
            return mid
        if follow_lo:
            if nu_mid == nu_lo:
                lo = mid
            else:
                hi = mid
        else:
            if nu_mid == nu_hi:
                hi = mid
            else:
                lo = mid
    return 0.5 * (lo + hi)


def winding_array(
    c: CouplingSet,
    omega_max: float = 4.0,
    n_omega: int = 601,
    refine_tol: float = 1e-4,
    n_k: int = 256,
) -> WindingArray:
    """Winding numbers on the intervals between singular-gap closings.

    Scans a uniform frequency grid over ``[-omega_max, omega_max]``; each
    change of the winding number brackets a closing which bisection then
    localizes to ``refine_tol``.  Closings narrower than the grid spacing
    are absorbed into a single detected transition.
    """
    omegas = np.linspace(-omega_max, omega_max, n_omega)
    nus: list[int] = []
    grid_vals: list[tuple[float, int]] = []
    for w in omegas:
        try:
            nu = winding_number(c, w, n_k)
        except GapClosingError:
            # The grid landed on (or numerically at) a closing; nudge off it.
            nu = winding_number(c, w + (omegas[1] - omegas[0]) * 1e-3, n_k)
        grid_vals.append((w, nu))
    if grid_vals[0][1] != 0 or grid_vals[-1][1] != 0:
        raise ValueError(
            f"winding at +-omega_max={omega_max} is nonzero; enlarge the window"
        )
    closings: list[float] = []
    nus = [grid_vals[0][1]]
    for (w_lo, nu_lo), (w_hi, nu_hi) in zip(grid_vals[:-1], grid_vals[1:]):
        if nu_hi != nu_lo:
            closings.append(
                _refine_closing(c, w_lo, w_hi, nu_lo, nu_hi, refine_tol, n_k)
            )
            nus.append(nu_hi)
    return WindingArray(
        closings=tuple(closings), nus=tuple(nus), stable=len(nus) % 2 == 1
    )


def deformation_gap_bound(
    h1: DynamicalMatrix, h2: DynamicalMatrix, omega: float = 0.0
) -> float:
    """Spectral norm of the deformation, bounding each singular-value shift.

    Every singular value of ``w*I - H`` moves by at most this norm under
    the deformation ``h1 -> h2``, at every frequency (``omega`` is accepted
    for signature symmetry with the gap being compared; the bound itself is
    frequency independent).
    """
    if h1.h.shape != h2.h.shape:
        raise ValueError("dynamical matrices must have equal dimensions")
    return float(np.linalg.norm(h2.h - h1.h, 2))


def count_edge_modes_obc(t, nu_abs: int) -> int:
    """Number of singular values an order of magnitude below the bulk floor.

    The floor is ``s[nu_abs]``, the first singular value expected to belong
    to the bulk when ``|nu|`` edge modes are present.  Returns zero when
    ``nu_abs`` is zero (no threshold is defined in a trivial phase).
    """
    if nu_abs < 0:
        raise ValueError("nu_abs must be nonnegative")
    if nu_abs == 0:
        return 0
    threshold = t.s[nu_abs] / 10.0
    return int(np.sum(t.s < threshold))

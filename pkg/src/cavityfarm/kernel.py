"""Fast fixed-step propagator for one interaction cycle.

The Hamiltonian matrix of the detector-cavity system is sparse and highly
structured: diagonal 2x2 oscillator blocks plus q-q couplings between the
two detectors and every field mode.  The cycle propagator integrates
dS/dt = Omega F(t) S with classic RK4, written as row operations on S so a
step costs O(n_modes^2) instead of dense matrix products.

Switching values and mode frequencies are precomputed on a half-step grid:
entry j of ``chi`` (and row j of ``omg``) belongs to time t0 + j*h/2, so
step i reads indices 2i, 2i+1, 2i+2.

Compiled with numba when available, with a plain numpy fallback kept in
lock-step (same grids, same arithmetic order up to rounding).
"""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


@njit(cache=True)
def _rhs(omega_det: float, c1, c2, chi: float, omg, s, out) -> None:
    """out = Omega F s for the structured F(chi, omg)."""
    n2 = s.shape[0]
    nm = c1.shape[0]
    for j in range(n2):
        out[0, j] = omega_det * s[1, j]
        out[1, j] = -omega_det * s[0, j]
        out[2, j] = omega_det * s[3, j]
        out[3, j] = -omega_det * s[2, j]
    for k in range(nm):
        iq = 4 + 2 * k
        w1 = chi * c1[k]
        w2 = chi * c2[k]
        if w1 != 0.0 or w2 != 0.0:
            for j in range(n2):
                out[1, j] -= w1 * s[iq, j]
                out[3, j] -= w2 * s[iq, j]
    for k in range(nm):
        iq = 4 + 2 * k
        wk = omg[k]
        w1 = chi * c1[k]
        w2 = chi * c2[k]
        for j in range(n2):
            out[iq, j] = wk * s[iq + 1, j]
            out[iq + 1, j] = -(wk * s[iq, j] + w1 * s[0, j] + w2 * s[2, j])


@njit(cache=True)
def _cycle_rk4(omega_det: float, c1, c2, chi, omg, h: float):
    n_steps = (chi.shape[0] - 1) // 2
    nm = c1.shape[0]
    n2 = 2 * nm + 4
    s = np.eye(n2)
    k1 = np.empty((n2, n2))
    k2 = np.empty((n2, n2))
    k3 = np.empty((n2, n2))
    k4 = np.empty((n2, n2))
    tmp = np.empty((n2, n2))
    for i in range(n_steps):
        j0 = 2 * i
        _rhs(omega_det, c1, c2, chi[j0], omg[j0], s, k1)
        for a in range(n2):
            for b in range(n2):
                tmp[a, b] = s[a, b] + 0.5 * h * k1[a, b]
        _rhs(omega_det, c1, c2, chi[j0 + 1], omg[j0 + 1], tmp, k2)
        for a in range(n2):
            for b in range(n2):
                tmp[a, b] = s[a, b] + 0.5 * h * k2[a, b]
        _rhs(omega_det, c1, c2, chi[j0 + 1], omg[j0 + 1], tmp, k3)
        for a in range(n2):
            for b in range(n2):
                tmp[a, b] = s[a, b] + h * k3[a, b]
        _rhs(omega_det, c1, c2, chi[j0 + 2], omg[j0 + 2], tmp, k4)
        for a in range(n2):
            for b in range(n2):
                s[a, b] += h / 6.0 * (k1[a, b] + 2.0 * (k2[a, b] + k3[a, b]) + k4[a, b])
    return s


def _rhs_numpy(omega_det, c1, c2, chi, omg, s, out):
    nm = c1.shape[0]
    iq = slice(4, 4 + 2 * nm, 2)
    ip = slice(5, 5 + 2 * nm, 2)
    out[0] = omega_det * s[1]
    out[1] = -omega_det * s[0] - chi * (c1 @ s[iq])
    out[2] = omega_det * s[3]
    out[3] = -omega_det * s[2] - chi * (c2 @ s[iq])
    out[iq] = omg[:, None] * s[ip]
    out[ip] = -(omg[:, None] * s[iq] + chi * (np.outer(c1, s[0]) + np.outer(c2, s[2])))


def _cycle_rk4_numpy(omega_det, c1, c2, chi, omg, h):
    n_steps = (chi.shape[0] - 1) // 2
    n2 = 2 * c1.shape[0] + 4
    s = np.eye(n2)
    k1, k2, k3, k4 = (np.empty((n2, n2)) for _ in range(4))
    for i in range(n_steps):
        j = 2 * i
        _rhs_numpy(omega_det, c1, c2, chi[j], omg[j], s, k1)
        _rhs_numpy(omega_det, c1, c2, chi[j + 1], omg[j + 1], s + 0.5 * h * k1, k2)
        _rhs_numpy(omega_det, c1, c2, chi[j + 1], omg[j + 1], s + 0.5 * h * k2, k3)
        _rhs_numpy(omega_det, c1, c2, chi[j + 2], omg[j + 2], s + h * k3, k4)
        s += h / 6.0 * (k1 + 2.0 * (k2 + k3) + k4)
    return s


def cycle_rk4(
    omega_det: float,
    c1: NDArray[np.float64],
    c2: NDArray[np.float64],
    chi: NDArray[np.float64],
    omg: NDArray[np.float64],
    h: float,
) -> NDArray[np.float64]:
    """Propagator over one cycle from half-step grids of chi and omega_n."""
    c1 = np.ascontiguousarray(c1, dtype=np.float64)
    c2 = np.ascontiguousarray(c2, dtype=np.float64)
    chi = np.ascontiguousarray(chi, dtype=np.float64)
    omg = np.ascontiguousarray(omg, dtype=np.float64)
    if chi.shape[0] != omg.shape[0] or chi.shape[0] % 2 == 0:
        raise ValueError("need 2*n_steps+1 half-step samples of chi and omega")
    if HAVE_NUMBA:
        return _cycle_rk4(omega_det, c1, c2, chi, omg, h)
    return _cycle_rk4_numpy(omega_det, c1, c2, chi, omg, h)

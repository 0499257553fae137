"""Cavity field, detector pair, and the quadratic Hamiltonian they share.

The field is a massless scalar on [0, L] with Dirichlet walls, truncated to
its lowest ``n_modes`` standing waves of frequency omega_n = n pi / L.  Two
harmonic detectors of gap Omega sit at fixed fractional positions r1, r2
(fixed relative to the instantaneous length) and couple to the field through
a smooth switching window chi(t).

Quadrature ordering everywhere: (q_d1, p_d1, q_d2, p_d2, q_1, p_1, ...,
q_N, p_N), i.e. detectors first, then field modes; 2*(n_modes + 2) rows.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np
from numpy.typing import NDArray


def window_profile(x: float) -> float:
    """Monotone ramp (1 - tanh(cot x))/2 on (0, pi): 0 -> 1 with flat ends."""
    if x <= 0.0:
        return 0.0
    if x >= np.pi:
        return 1.0
    return 0.5 * (1.0 - np.tanh(1.0 / np.tan(x)))


def switching(t: float, duration: float, ramp: float) -> float:
    """Switching window on [0, duration]: smooth ramp up, flat top, ramp down.

    The ramps occupy [0, ramp] and [duration - ramp, duration]; the function
    is C^infinity, hits 1/2 at ramp/2, and vanishes outside the window.
    """
    if not 0.0 < 2.0 * ramp <= duration:
        raise ValueError("need 0 < 2*ramp <= duration")
    if t < 0.0 or t > duration:
        return 0.0
    if t < ramp:
        return window_profile(np.pi * t / ramp)
    if t > duration - ramp:
        return window_profile(np.pi * (duration - t) / ramp)
    return 1.0


def sharp_switching(t: float, duration: float) -> float:
    """Rectangular window: full coupling on [0, duration], zero outside."""
    return 1.0 if 0.0 <= t <= duration else 0.0


def switching_many(ts, duration: float, ramp: float) -> NDArray[np.float64]:
    """Vectorized ``switching`` over an array of times."""
    if not 0.0 < 2.0 * ramp <= duration:
        raise ValueError("need 0 < 2*ramp <= duration")
    ts = np.asarray(ts, dtype=float)
    out = np.zeros_like(ts)
    inside = (ts >= 0.0) & (ts <= duration)
    out[inside] = 1.0
    up = inside & (ts < ramp) & (ts > 0.0)
    out[ts == 0.0] = 0.0
    out[up] = 0.5 * (1.0 - np.tanh(1.0 / np.tan(np.pi * ts[up] / ramp)))
    down = inside & (ts > duration - ramp) & (ts < duration)
    out[down] = 0.5 * (1.0 - np.tanh(1.0 / np.tan(np.pi * (duration - ts[down]) / ramp)))
    out[ts == duration] = 0.0
    return out


@dataclass(frozen=True)
class CavityConfig:
    """Geometry, spectrum, coupling and protocol timing of one farming setup.

    Lengths and times are in natural units (hbar = c = 1).  Default values
    left as None resolve to the standard protocol: detector gap locked to
    the fundamental (omega_gap = pi / length), interaction time 2.5 lengths,
    ramp one fifth of the interaction time.

    readout picks the picture of the recorded detector covariance: with
    "interaction" the free detector phase accumulated over one interaction
    window is rotated out before recording, with "lab" the raw covariance is
    kept.  Entanglement is identical either way; the q1 p2 correlator is not.
    """

    length: float = 8.0
    n_modes: int = 10
    coupling: float = 0.01
    omega_gap: float | None = None
    cycle_time: float | None = None
    ramp: float | None = None
    delay: float = 0.0
    r1: float = 1.0 / 3.0
    r2: float = 2.0 / 3.0
    sharp: bool = False
    readout: str = "interaction"

    def __post_init__(self) -> None:
        if self.length <= 0:
            raise ValueError("length must be positive")
        if self.n_modes < 1:
            raise ValueError("need at least one field mode")
        if not 0.0 < self.r1 < self.r2 < 1.0:
            raise ValueError("need 0 < r1 < r2 < 1")
        if self.omega_gap is None:
            object.__setattr__(self, "omega_gap", np.pi / self.length)
        if self.omega_gap <= 0:
            raise ValueError("omega_gap must be positive")
        if self.cycle_time is None:
            object.__setattr__(self, "cycle_time", 2.5 * self.length)
        if self.cycle_time <= 0:
            raise ValueError("cycle_time must be positive")
        if self.ramp is None:
            object.__setattr__(self, "ramp", 0.2 * self.cycle_time)
        if not 0.0 < self.ramp <= 0.5 * self.cycle_time:
            raise ValueError("need 0 < ramp <= cycle_time / 2")
        if self.delay < 0:
            raise ValueError("delay must be non-negative")
        if self.readout not in ("interaction", "lab"):
            raise ValueError("readout must be 'interaction' or 'lab'")
        crossing = (self.r2 - self.r1) * self.length
        if self.cycle_time < crossing:
            warnings.warn(
                f"interaction time {self.cycle_time} is below the light-crossing "
                f"time {crossing} between the detectors",
                stacklevel=2,
            )

    @property
    def n_osc(self) -> int:
        return self.n_modes + 2

    @property
    def omega_max(self) -> float:
        """Fastest frequency in the rest configuration."""
        return max(self.omega_gap, self.n_modes * np.pi / self.length)

    @property
    def repetition_time(self) -> float:
        return self.cycle_time + self.delay

    @property
    def flight_factor(self) -> float:
        """Repetition time in units of the light-crossing time of the cavity."""
        return self.repetition_time / self.length

    def with_flight_factor(self, f: float) -> "CavityConfig":
        """Set the delay so (cycle_time + delay) = f * length."""
        delay = f * self.length - self.cycle_time
        if delay < 0:
            raise ValueError(
                f"flight factor {f} shorter than the interaction itself "
                f"({self.cycle_time / self.length})"
            )
        return replace(self, delay=delay)

    def chi(self, t: float) -> float:
        """Switching value at time t measured from the cycle start."""
        if self.sharp:
            return sharp_switching(t, self.cycle_time)
        return switching(t, self.cycle_time, self.ramp)

    def chi_many(self, ts) -> NDArray[np.float64]:
        ts = np.asarray(ts, dtype=float)
        if self.sharp:
            return ((ts >= 0.0) & (ts <= self.cycle_time)).astype(float)
        return switching_many(ts, self.cycle_time, self.ramp)

    def mode_frequencies(self, length: float | None = None) -> NDArray[np.float64]:
        """omega_n = n pi / L for n = 1..n_modes at the given (or rest) length."""
        ell = self.length if length is None else length
        if ell <= 0:
            raise ValueError(f"cavity length must stay positive, got {ell}")
        return np.arange(1, self.n_modes + 1) * np.pi / ell

    def coupling_row(self, position: float) -> NDArray[np.float64]:
        """q-q coupling of a detector at fractional position r to each mode.

        Entry n is 2 * lambda * sin(n pi r) / sqrt(n pi): the monopole
        b + b^dag contributes one sqrt(2), the mode amplitude sqrt(2/(n pi))
        the other.  Positions are fractions of the instantaneous length, so
        the row never depends on the length history.  The switching value
        multiplies this externally.
        """
        n = np.arange(1, self.n_modes + 1)
        return 2.0 * self.coupling * np.sin(n * np.pi * position) / np.sqrt(n * np.pi)


def assemble_f(
    config: CavityConfig,
    chi: float,
    length: float | None = None,
) -> NDArray[np.float64]:
    """Hamiltonian matrix F at switching value chi and cavity length L.

    H = (1/2) x^T F x with detector blocks Omega I, field blocks omega_n I,
    and q-q coupling chi * lambda_n between each detector and every mode.
    All p-p and q-p entries vanish.
    """
    n_osc = config.n_osc
    f = np.zeros((2 * n_osc, 2 * n_osc))
    f[0, 0] = f[1, 1] = f[2, 2] = f[3, 3] = config.omega_gap
    omegas = config.mode_frequencies(length)
    for k, w in enumerate(omegas):
        i = 4 + 2 * k
        f[i, i] = f[i + 1, i + 1] = w
    for det, pos in ((0, config.r1), (2, config.r2)):
        row = chi * config.coupling_row(pos)
        for k in range(config.n_modes):
            j = 4 + 2 * k
            f[det, j] = f[j, det] = row[k]
    return f


def f_supplier(config: CavityConfig, driver=None, t_start: float = 0.0):
    """Callable t_cycle -> F for one interaction window [0, cycle_time].

    The switching phase runs on cycle time; the cavity length is read from
    the driver at global time t_start + t_cycle.  Without a driver the
    cavity is rigid at the rest length.
    """
    if driver is None:
        return lambda t: assemble_f(config, config.chi(t))

    def supply(t: float) -> NDArray[np.float64]:
        ell, _ = driver.length(t_start + t)
        return assemble_f(config, config.chi(t), ell)

    return supply

"""Cavity length histories: static, sinusoidal, file-sampled, and a
gravitational-wave-driven spring model of the mirror mounting.

Every driver answers ``length(t) -> (L, Ldot)`` at a global time and
``length_many(ts)`` for vectorized sampling.  Times before zero mean "before
the vibration started" and return the rest configuration.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from scipy.interpolate import CubicSpline


@dataclass(frozen=True)
class StaticDriver:
    """Rigid cavity, L(t) = L0."""

    rest_length: float

    def __post_init__(self) -> None:
        if self.rest_length <= 0:
            raise ValueError("rest length must be positive")

    def length(self, t: float) -> tuple[float, float]:
        return self.rest_length, 0.0

    def length_many(self, ts) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        ts = np.asarray(ts, dtype=float)
        return np.full_like(ts, self.rest_length), np.zeros_like(ts)


@dataclass(frozen=True)
class SinusoidDriver:
    """L(t) = L0 + A sin(gamma t) for t >= 0, at rest before that.

    The product gamma * A is the peak wall speed; it must stay far below 1
    (the speed of light) for the quasi-static mode picture to make sense.
    """

    rest_length: float
    amplitude: float
    gamma: float

    def __post_init__(self) -> None:
        if self.rest_length <= 0:
            raise ValueError("rest length must be positive")
        if not 0.0 <= self.amplitude < self.rest_length:
            raise ValueError("need 0 <= amplitude < rest length")
        if self.gamma < 0:
            raise ValueError("gamma must be non-negative")

    @property
    def adiabaticity(self) -> float:
        """Peak wall speed A * gamma."""
        return self.amplitude * self.gamma

    def length(self, t: float) -> tuple[float, float]:
        if t < 0.0:
            return self.rest_length, 0.0
        return (
            self.rest_length + self.amplitude * np.sin(self.gamma * t),
            self.amplitude * self.gamma * np.cos(self.gamma * t),
        )

    def length_many(self, ts) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        ts = np.asarray(ts, dtype=float)
        on = ts >= 0.0
        ell = np.full_like(ts, self.rest_length)
        ell[on] += self.amplitude * np.sin(self.gamma * ts[on])
        rate = np.zeros_like(ts)
        rate[on] = self.amplitude * self.gamma * np.cos(self.gamma * ts[on])
        return ell, rate


class SampledDriver:
    """Length history given as a sampled table, interpolated with a cubic spline.

    Sample times must be strictly increasing and lengths positive; queries
    outside the sampled window raise.
    """

    def __init__(self, times, lengths) -> None:
        times = np.asarray(times, dtype=float)
        lengths = np.asarray(lengths, dtype=float)
        if times.ndim != 1 or times.shape != lengths.shape or len(times) < 4:
            raise ValueError("need matching 1-d arrays with at least 4 samples")
        if np.any(np.diff(times) <= 0):
            raise ValueError("sample times must be strictly increasing")
        if np.any(lengths <= 0):
            raise ValueError("sampled lengths must be positive")
        self.t_min = float(times[0])
        self.t_max = float(times[-1])
        self._spline = CubicSpline(times, lengths)
        self._rate = self._spline.derivative()

    @classmethod
    def from_csv(cls, path) -> "SampledDriver":
        times, values, kind = load_waveform(path)
        if kind != "L":
            raise ValueError(f"{path} holds a strain column, not lengths")
        return cls(times, values)

    def _check(self, t) -> None:
        if np.any(np.asarray(t) < self.t_min) or np.any(np.asarray(t) > self.t_max):
            raise ValueError(f"time outside sampled window [{self.t_min}, {self.t_max}]")

    def length(self, t: float) -> tuple[float, float]:
        self._check(t)
        ell = float(self._spline(t))
        if ell <= 0:
            raise ValueError(f"interpolated length {ell} is not positive")
        return ell, float(self._rate(t))

    def length_many(self, ts) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        ts = np.asarray(ts, dtype=float)
        self._check(ts)
        return self._spline(ts), self._rate(ts)


@dataclass(frozen=True)
class SineStrain:
    """h(t) = h0 sin(omega t) for t >= 0, zero before."""

    h0: float
    omega: float

    def h(self, t: float) -> float:
        return self.h0 * np.sin(self.omega * t) if t >= 0.0 else 0.0

    def hdot(self, t: float) -> float:
        return self.h0 * self.omega * np.cos(self.omega * t) if t >= 0.0 else 0.0

    def h_many(self, ts) -> NDArray[np.float64]:
        ts = np.asarray(ts, dtype=float)
        return np.where(ts >= 0.0, self.h0 * np.sin(self.omega * ts), 0.0)

    def hdot_many(self, ts) -> NDArray[np.float64]:
        ts = np.asarray(ts, dtype=float)
        return np.where(ts >= 0.0, self.h0 * self.omega * np.cos(self.omega * ts), 0.0)

    @property
    def max_abs(self) -> float:
        return abs(self.h0)

    @property
    def fastest_angular_frequency(self) -> float:
        return abs(self.omega)


@dataclass(frozen=True)
class StaticStrain:
    """Constant strain switched on at t = 0."""

    h0: float

    def h(self, t: float) -> float:
        return self.h0 if t >= 0.0 else 0.0

    def hdot(self, t: float) -> float:
        return 0.0

    def h_many(self, ts) -> NDArray[np.float64]:
        ts = np.asarray(ts, dtype=float)
        return np.where(ts >= 0.0, self.h0, 0.0)

    def hdot_many(self, ts) -> NDArray[np.float64]:
        return np.zeros_like(np.asarray(ts, dtype=float))

    @property
    def max_abs(self) -> float:
        return abs(self.h0)

    @property
    def fastest_angular_frequency(self) -> float:
        return 0.0


class SampledStrain:
    """Strain history from a sampled table, cubic-interpolated."""

    def __init__(self, times, values) -> None:
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        if np.any(np.diff(times) <= 0):
            raise ValueError("sample times must be strictly increasing")
        self._spline = CubicSpline(times, values)
        self._rate = self._spline.derivative()
        self.t_min, self.t_max = float(times[0]), float(times[-1])
        self._max_abs = float(np.max(np.abs(values)))
        dt = float(np.min(np.diff(times)))
        self._omega_fast = np.pi / dt

    @classmethod
    def from_csv(cls, path) -> "SampledStrain":
        times, values, kind = load_waveform(path)
        if kind != "h":
            raise ValueError(f"{path} holds a length column, not strain")
        return cls(times, values)

    def h(self, t: float) -> float:
        return float(self._spline(np.clip(t, self.t_min, self.t_max)))

    def hdot(self, t: float) -> float:
        return float(self._rate(np.clip(t, self.t_min, self.t_max)))

    def h_many(self, ts) -> NDArray[np.float64]:
        return self._spline(np.clip(np.asarray(ts, dtype=float), self.t_min, self.t_max))

    def hdot_many(self, ts) -> NDArray[np.float64]:
        return self._rate(np.clip(np.asarray(ts, dtype=float), self.t_min, self.t_max))

    @property
    def max_abs(self) -> float:
        return self._max_abs

    @property
    def fastest_angular_frequency(self) -> float:
        return self._omega_fast


MAX_STRAIN = 1e-3


class GwSpringDriver:
    """Cavity mirrors on a damped spring mounting driven by a strain h(t).

    The relative mirror displacement obeys
        d2(dx)/dt2 = -(omega0/Q) d(dx)/dt - omega0^2 dx - h(t) omega0^2 L0 / 2
    and the optical length is L(t) = L0 (1 + h(t)/2) + dx(t).  A constant
    strain therefore relaxes to dx = -h0 L0 / 2, i.e. L = L0: a rigid rod
    does not stretch with slow coordinate strain.

    The displacement is integrated once over [0, horizon] with a fixed-step
    4th-order scheme and interpolated afterwards; times before zero return
    the rest configuration.
    """

    def __init__(
        self,
        rest_length: float,
        omega0: float,
        q_factor: float,
        strain,
        horizon: float,
        dx0: float = 0.0,
        vx0: float = 0.0,
        steps_per_period: int = 400,
    ) -> None:
        if rest_length <= 0 or omega0 <= 0 or q_factor <= 0 or horizon <= 0:
            raise ValueError("rest_length, omega0, q_factor and horizon must be positive")
        if strain.max_abs >= MAX_STRAIN:
            raise ValueError(f"|h| must stay below {MAX_STRAIN} for the linearized model")
        self.rest_length = rest_length
        self.omega0 = omega0
        self.q_factor = q_factor
        self.strain = strain
        self.horizon = horizon

        omega_fast = max(omega0, strain.fastest_angular_frequency)
        n_steps = max(64, int(np.ceil(horizon * omega_fast / (2.0 * np.pi) * steps_per_period)))
        ts = np.linspace(0.0, horizon, n_steps + 1)
        h_half = strain.h_many(np.linspace(0.0, horizon, 2 * n_steps + 1))
        dt = horizon / n_steps
        drive = -0.5 * omega0 * omega0 * rest_length * h_half
        damp, k2 = omega0 / q_factor, omega0 * omega0

        x, v = np.empty(n_steps + 1), np.empty(n_steps + 1)
        x[0], v[0] = dx0, vx0
        xi, vi = float(dx0), float(vx0)
        for i in range(n_steps):
            f0, fm, f1 = drive[2 * i], drive[2 * i + 1], drive[2 * i + 2]
            a1 = f0 - damp * vi - k2 * xi
            x2, v2 = xi + 0.5 * dt * vi, vi + 0.5 * dt * a1
            a2 = fm - damp * v2 - k2 * x2
            x3, v3 = xi + 0.5 * dt * v2, vi + 0.5 * dt * a2
            a3 = fm - damp * v3 - k2 * x3
            x4, v4 = xi + dt * v3, vi + dt * a3
            a4 = f1 - damp * v4 - k2 * x4
            xi += dt / 6.0 * (vi + 2.0 * (v2 + v3) + v4)
            vi += dt / 6.0 * (a1 + 2.0 * (a2 + a3) + a4)
            x[i + 1], v[i + 1] = xi, vi
        self._dx = CubicSpline(ts, x)
        self._vx = CubicSpline(ts, v)

    def displacement(self, t: float) -> tuple[float, float]:
        """Mirror displacement and velocity (dx, dx_dot) at time t >= 0."""
        if t < 0.0:
            return 0.0, 0.0
        if t > self.horizon:
            raise ValueError(f"time {t} beyond integrated horizon {self.horizon}")
        return float(self._dx(t)), float(self._vx(t))

    def length(self, t: float) -> tuple[float, float]:
        if t < 0.0:
            return self.rest_length, 0.0
        dx, vx = self.displacement(t)
        ell = self.rest_length * (1.0 + 0.5 * self.strain.h(t)) + dx
        rate = 0.5 * self.rest_length * self.strain.hdot(t) + vx
        if ell <= 0:
            raise ValueError("driver produced a non-positive cavity length")
        return ell, rate

    def length_many(self, ts) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        ts = np.asarray(ts, dtype=float)
        if np.any(ts > self.horizon):
            raise ValueError("time beyond integrated horizon")
        on = ts >= 0.0
        tt = np.where(on, ts, 0.0)
        ell = np.where(
            on, self.rest_length * (1.0 + 0.5 * self.strain.h_many(tt)) + self._dx(tt),
            self.rest_length,
        )
        rate = np.where(on, 0.5 * self.rest_length * self.strain.hdot_many(tt) + self._vx(tt), 0.0)
        return ell, rate

    def check_rigidity(self, omega_gw: float, sound_speed: float) -> None:
        """Warn when the spring picture is dubious: the mounting responds as a
        single mode only while omega_gw stays well below sound_speed / L0."""
        if omega_gw >= 0.1 * sound_speed / self.rest_length:
            warnings.warn(
                f"strain frequency {omega_gw} is not small against "
                f"sound crossing rate {sound_speed / self.rest_length}",
                stacklevel=2,
            )


def adiabaticity_figure(driver, t_span: tuple[float, float], n_samples: int = 4001) -> float:
    """Largest wall speed |dL/dt| over the span, from dense sampling."""
    t0, t1 = t_span
    if t1 <= t0:
        raise ValueError("need t1 > t0")
    _, rate = driver.length_many(np.linspace(t0, t1, n_samples))
    return float(np.max(np.abs(rate)))


def load_waveform(path) -> tuple[NDArray[np.float64], NDArray[np.float64], str]:
    """Read a two-column CSV (t, L) or (t, h) with a header naming the columns.

    Returns (times, values, kind) with kind "L" or "h".
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise ValueError(f"{path}: need a header row and at least one sample")
    header = [c.strip() for c in rows[0]]
    if len(header) != 2 or header[0].lower() != "t" or header[1] not in ("L", "h"):
        raise ValueError(f"{path}: header must be 't,L' or 't,h', got {rows[0]}")
    data = np.array([[float(c) for c in row] for row in rows[1:] if row])
    return data[:, 0], data[:, 1], header[1]

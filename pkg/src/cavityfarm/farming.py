"""The two-stage farming protocol.

Stage 1: pairs of ground-state detectors repeatedly couple to a rigid cavity
for a time T (with a delay between pairs) until the field state stops
changing the pairs it produces: the fixed point.  Stage 2: from that fixed
point, further pairs run while the cavity length follows a driver, and every
exiting pair is recorded.

Per-cycle observables live in CycleRecord; the detector covariance is
reported in the readout picture chosen by the config (free detector phase
over the interaction window rotated out by default).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.integrate import simpson

from cavityfarm.cavity import CavityConfig
from cavityfarm.drivers import StaticDriver, adiabaticity_figure
from cavityfarm.gaussian import (
    GaussianState,
    IntegratorConfig,
    SymplecticDefectError,
    log_negativity,
    rotation_matrix,
    symplectic_defect,
    symplectify,
    thermal_state,
    vacuum_state,
)
from cavityfarm.kernel import cycle_rk4

ADIABATIC_WARN = 0.1


@dataclass(frozen=True)
class InitialFieldSpec:
    """Initial field state: vacuum, thermal with nbar quanta per mode, or
    vacuum with one single-mode-squeezed oscillator (squeezing r, 1-based
    field mode index)."""

    kind: str = "vacuum"
    nbar: float = 0.0
    r: float = 0.0
    mode: int = 1

    def __post_init__(self) -> None:
        if self.kind not in ("vacuum", "thermal", "squeezed"):
            raise ValueError("kind must be vacuum, thermal or squeezed")
        if self.nbar < 0:
            raise ValueError("nbar must be non-negative")
        if self.mode < 1:
            raise ValueError("mode index is 1-based")

    def state(self, config: CavityConfig) -> GaussianState:
        """Full-system state: detectors in vacuum, field as specified."""
        if self.mode > config.n_modes:
            raise ValueError(f"mode {self.mode} beyond truncation {config.n_modes}")
        if self.kind == "vacuum":
            return vacuum_state(config.n_osc)
        if self.kind == "thermal":
            sigma = thermal_state(config.n_osc, self.nbar).sigma
            sigma[:4, :4] = 0.5 * np.eye(4)
            return GaussianState(sigma)
        sigma = 0.5 * np.eye(2 * config.n_osc)
        i = 4 + 2 * (self.mode - 1)
        sigma[i, i] = 0.5 * np.exp(-2.0 * self.r)
        sigma[i + 1, i + 1] = 0.5 * np.exp(2.0 * self.r)
        return GaussianState(sigma)


@dataclass
class CycleRecord:
    """Observables of one exiting pair, taken at the end of the interaction."""

    cycle_index: int
    t_start: float
    t_end: float
    detector_cov: NDArray[np.float64]
    e_n: float
    corr_q1p2: float


@dataclass
class FixedPointReport:
    converged: bool
    cycles_used: int
    residual: float
    field_state: GaussianState
    last_record: CycleRecord


def inject_fresh_pair(state: GaussianState) -> GaussianState:
    """Replace the detector pair with ground-state detectors.

    The detector 4x4 block becomes I/2, detector-field correlations vanish,
    and the field block is kept bit-exactly.
    """
    sigma = state.sigma.copy()
    sigma[:4, :] = 0.0
    sigma[:, :4] = 0.0
    sigma[:4, :4] = 0.5 * np.eye(4)
    return GaussianState(sigma)


def readout_block(sigma_exit: NDArray[np.float64], config: CavityConfig) -> NDArray[np.float64]:
    """Detector 4x4 covariance in the configured readout picture.

    "interaction" rotates each detector by -Omega*T, undoing the free phase
    accumulated over the window; "lab" keeps the raw exit covariance.
    """
    block = sigma_exit[:4, :4].copy()
    if config.readout == "lab":
        return block
    r = rotation_matrix(-config.omega_gap * config.cycle_time)
    big = np.zeros((4, 4))
    big[:2, :2] = r
    big[2:, 2:] = r
    return big @ block @ big.T


def _make_record(
    sigma_exit: NDArray[np.float64],
    config: CavityConfig,
    cycle_index: int,
    t_start: float,
) -> CycleRecord:
    block = readout_block(sigma_exit, config)
    return CycleRecord(
        cycle_index=cycle_index,
        t_start=t_start,
        t_end=t_start + config.cycle_time,
        detector_cov=block,
        e_n=log_negativity(block),
        corr_q1p2=2.0 * block[0, 3],
    )


def _halfstep_grids(config, driver, t_start, n_steps):
    ts = np.linspace(0.0, config.cycle_time, 2 * n_steps + 1)
    chi = config.chi_many(ts)
    ell, _ = driver.length_many(t_start + ts)
    if np.any(ell <= 0):
        raise ValueError("driver produced a non-positive cavity length")
    omg = (np.pi / ell)[:, None] * np.arange(1, config.n_modes + 1)
    return chi, omg


def cycle_propagator(
    config: CavityConfig,
    driver=None,
    t_start: float = 0.0,
    control: IntegratorConfig | None = None,
) -> NDArray[np.float64]:
    """Symplectic propagator for one interaction window [t_start, t_start+T].

    Uses the structured RK4 kernel on precomputed switching and frequency
    grids; the step is refined (halved) if the symplectic defect exceeds the
    integrator tolerance, and failing that by a wide margin is an error.
    The accepted matrix is projected onto the symplectic group so that long
    cycle products stay exactly canonical.
    """
    control = control or IntegratorConfig()
    driver = driver or StaticDriver(config.length)
    c1 = config.coupling_row(config.r1)
    c2 = config.coupling_row(config.r2)
    ell_min = float(np.min(driver.length_many(
        t_start + np.linspace(0.0, config.cycle_time, 257))[0]))
    omega_max = max(config.omega_gap, config.n_modes * np.pi / ell_min)
    n_steps = control.step_count(omega_max, config.cycle_time)

    s = None
    for attempt in range(control.max_refinements + 1):
        chi, omg = _halfstep_grids(config, driver, t_start, n_steps)
        s = cycle_rk4(config.omega_gap, c1, c2, chi, omg, config.cycle_time / n_steps)
        if symplectic_defect(s) <= control.symplectic_tol:
            return symplectify(s)
        n_steps *= 2
    defect = symplectic_defect(s)
    if defect > 10.0 * control.symplectic_tol:
        raise SymplecticDefectError(
            f"cycle propagator defect {defect:.3e} after {control.max_refinements} refinements"
        )
    return symplectify(s)


def delay_phases(config: CavityConfig, driver=None, t_start: float = 0.0) -> NDArray[np.float64]:
    """Free-evolution phases of the field modes across the delay window.

    theta_n = n pi * integral dt / L(t) over [t_start, t_start + delay]; with
    a rigid cavity this is omega_n * delay.
    """
    n = np.arange(1, config.n_modes + 1)
    if config.delay == 0.0:
        return np.zeros(config.n_modes)
    if driver is None or isinstance(driver, StaticDriver):
        return n * np.pi * config.delay / config.length
    ts = np.linspace(t_start, t_start + config.delay, 2049)
    ell, _ = driver.length_many(ts)
    if np.any(ell <= 0):
        raise ValueError("driver produced a non-positive cavity length")
    return n * np.pi * float(simpson(1.0 / ell, x=ts))


def delay_rotation(config: CavityConfig, phases: NDArray[np.float64]) -> NDArray[np.float64]:
    """Full-system delay map: field modes rotate, the just-removed detector
    pair is left untouched (its block is overwritten at the next injection)."""
    n2 = 2 * config.n_osc
    rot = np.eye(n2)
    for k, theta in enumerate(phases):
        i = 4 + 2 * k
        rot[i : i + 2, i : i + 2] = rotation_matrix(theta)
    return rot


def run_cycle(
    state: GaussianState,
    config: CavityConfig,
    driver=None,
    t_start: float = 0.0,
    control: IntegratorConfig | None = None,
    cycle_index: int = 0,
) -> tuple[GaussianState, CycleRecord]:
    """One full cycle: inject a fresh pair, interact for T, record the pair,
    then carry the field through the delay.  Returns the state at
    t_start + T + delay and the pair's record."""
    if state.dim != config.n_osc:
        raise ValueError(f"state has {state.dim} oscillators, config wants {config.n_osc}")
    s = cycle_propagator(config, driver, t_start, control)
    sigma = inject_fresh_pair(state).sigma
    sigma_exit = s @ sigma @ s.T
    sigma_exit = 0.5 * (sigma_exit + sigma_exit.T)
    record = _make_record(sigma_exit, config, cycle_index, t_start)
    rot = delay_rotation(config, delay_phases(config, driver, t_start + config.cycle_time))
    sigma_next = rot @ sigma_exit @ rot.T
    return GaussianState(0.5 * (sigma_next + sigma_next.T)), record


def _stage_one_maps(config, control):
    """Precomputed pieces of the rigid-cavity cycle map.

    With S the cycle propagator and D the delay rotation, one cycle acts on
    the field block as sigma_ff -> G sigma_ff G^T + W, and the exit detector
    block is A sigma_ff A^T + K."""
    s = cycle_propagator(config, None, 0.0, control)
    d = delay_rotation(config, delay_phases(config))
    s_field = s[:, 4:]
    const = 0.5 * (s[:, :4] @ s[:, :4].T)
    g = d[4:, 4:] @ s_field[4:, :]
    w = d[4:, 4:] @ const[4:, 4:] @ d[4:, 4:].T
    a = s_field[:4, :]
    k = const[:4, :4]
    return s, g, w, a, k


def run_to_fixed_point(
    initial: InitialFieldSpec | GaussianState,
    config: CavityConfig,
    tol: float = 1e-9,
    max_cycles: int = 500,
    control: IntegratorConfig | None = None,
    min_cycles: int = 0,
) -> FixedPointReport:
    """Iterate rigid-cavity cycles until successive exit pairs agree.

    Stops once the max-abs difference between successive detector covariances
    drops below tol (but not before min_cycles); hitting max_cycles first
    reports converged=False rather than raising.  The returned field_state is
    the full-system state at a cycle boundary, ready for further cycles.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_cycles < 2:
        raise ValueError("need max_cycles >= 2")
    state = initial.state(config) if isinstance(initial, InitialFieldSpec) else initial
    if state.dim != config.n_osc:
        raise ValueError(f"state has {state.dim} oscillators, config wants {config.n_osc}")

    _, g, w, a, k = _stage_one_maps(config, control)
    sigma_ff = state.sigma[4:, 4:].copy()
    prev_block = None
    residual = np.inf
    cycles = 0
    exit_block = np.empty((4, 4))
    while cycles < max_cycles:
        # observables are only needed once the stopping test is live
        track = cycles + 2 >= min_cycles
        if track:
            exit_block = a @ sigma_ff @ a.T + k
            exit_block = 0.5 * (exit_block + exit_block.T)
        sigma_ff = g @ sigma_ff @ g.T + w
        sigma_ff = 0.5 * (sigma_ff + sigma_ff.T)
        cycles += 1
        if not track:
            continue
        block = readout_block(exit_block, config)
        if prev_block is not None:
            residual = float(np.max(np.abs(block - prev_block)))
            if residual < tol and cycles >= min_cycles:
                break
        prev_block = block

    record = _make_record(exit_block, config, cycles - 1, (cycles - 1) * config.repetition_time)
    full = 0.5 * np.eye(2 * config.n_osc)
    full[4:, 4:] = sigma_ff
    return FixedPointReport(
        converged=bool(residual < tol),
        cycles_used=cycles,
        residual=float(residual),
        field_state=GaussianState(full),
        last_record=record,
    )


def run_perturbed(
    fixed_point: FixedPointReport,
    config: CavityConfig,
    driver,
    n_cycles: int,
    control: IntegratorConfig | None = None,
    on_record=None,
) -> list[CycleRecord]:
    """Continue the protocol from a fixed point while the length follows the
    driver.  Global time starts at 0 (vibration onset) with the first
    injection; cycle k occupies [k*(T+delay), (k+1)*(T+delay)].
    """
    if not fixed_point.converged:
        raise ValueError("fixed point did not converge; refusing to perturb it")
    if n_cycles < 1:
        raise ValueError("need n_cycles >= 1")
    span = (0.0, n_cycles * config.repetition_time)
    rate = adiabaticity_figure(driver, span)
    if rate > ADIABATIC_WARN:
        warnings.warn(
            f"wall speed {rate:.3g} is not small; the quasi-static mode "
            f"picture is unreliable above {ADIABATIC_WARN}",
            stacklevel=2,
        )
    state = fixed_point.field_state
    records: list[CycleRecord] = []
    for k in range(n_cycles):
        state, rec = run_cycle(
            state, config, driver, k * config.repetition_time, control, cycle_index=k
        )
        records.append(rec)
        if on_record is not None:
            on_record(rec)
    return records

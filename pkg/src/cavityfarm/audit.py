"""Moving-wall corrections and an audit of the quasi-static approximation.

Production runs treat the vibrating cavity as static modes with
time-dependent frequencies omega_n(t) = n pi / L(t).  A moving wall
additionally mixes the modes through terms proportional to Ldot and Ldot^2
built from two constant matrices alpha and beta (Fourier coefficients of the
mode functions' response to a boundary shift).  This module assembles the
corrected Hamiltonian and measures how small the corrections actually are
for a given driver, which is the entire justification for neglecting them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from cavityfarm.cavity import CavityConfig, assemble_f
from cavityfarm.drivers import GwSpringDriver


@dataclass(frozen=True)
class AlphaBetaMatrices:
    """Mode-mixing coefficient matrices, 0-based index (n-1, m-1) for modes n, m."""

    alpha: NDArray[np.float64]
    beta: NDArray[np.float64]


def alpha_beta(n_modes: int) -> AlphaBetaMatrices:
    """Closed-form mode-mixing coefficients.

    alpha_nm = -2 (-1)^{n+m} sqrt(nm) / (pi (n^2 - m^2)) off the diagonal and
    1/(2 pi n) on it; beta_nm = 2 (-1)^{n+m} sqrt(nm) (n^2 + m^2) /
    (pi (n^2 - m^2)^2) off the diagonal and n pi/6 + 1/(4 pi n) on it.
    alpha is antisymmetric off the diagonal, beta symmetric.
    """
    if n_modes < 1:
        raise ValueError("need at least one mode")
    n = np.arange(1, n_modes + 1, dtype=float)
    nn, mm = np.meshgrid(n, n, indexing="ij")
    sign = np.where((nn + mm) % 2 == 0, 1.0, -1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        alpha = -2.0 * sign * np.sqrt(nn * mm) / (np.pi * (nn * nn - mm * mm))
        beta = 2.0 * sign * np.sqrt(nn * mm) * (nn * nn + mm * mm) / (
            np.pi * (nn * nn - mm * mm) ** 2
        )
    di = np.diag_indices(n_modes)
    alpha[di] = 1.0 / (2.0 * np.pi * n)
    beta[di] = n * np.pi / 6.0 + 1.0 / (4.0 * np.pi * n)
    return AlphaBetaMatrices(alpha=alpha, beta=beta)


def correction_blocks(
    config: CavityConfig,
    t: float,
    driver,
    mats: AlphaBetaMatrices,
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Field-block corrections (qp_block, qq_block) at global time t.

    qp_block[n-1, m-1] is the F entry coupling p_n to q_m,
    -Ldot * alpha_nm * omega_n; qq_block[n-1, m-1] couples q_n to q_m,
    Ldot^2 (sum_k alpha_nk alpha_mk omega_k) + 2 (Ldot^2/L) beta_nm.
    When the wall is strain-driven both pick up the strain's (1 + h/2) scale
    factor carried by the mode functions.
    """
    ell, rate = driver.length(t)
    omg = config.mode_frequencies(ell)
    scale = 1.0
    if isinstance(driver, GwSpringDriver):
        scale = 1.0 + 0.5 * driver.strain.h(t)
    qp = -rate * scale * mats.alpha * omg[:, None]
    qq = rate * rate * scale * (
        (mats.alpha * omg) @ mats.alpha.T + 2.0 * mats.beta / ell
    )
    return qp, qq


def assemble_f_full(
    config: CavityConfig,
    t: float,
    driver,
    mats: AlphaBetaMatrices,
) -> NDArray[np.float64]:
    """Hamiltonian matrix with moving-wall corrections at global time t.

    The switching phase is taken from the position of t inside its cycle
    (t mod repetition time), so the function can be integrated across whole
    cycles including the delays, where only the wall terms act.
    """
    ell, _ = driver.length(t)
    f = assemble_f(config, config.chi(t % config.repetition_time), ell)
    qp, qq = correction_blocks(config, t, driver, mats)
    qi = 2 * np.arange(config.n_modes) + 4
    pi = qi + 1
    f[np.ix_(pi, qi)] += qp
    f[np.ix_(qi, pi)] += qp.T
    f[np.ix_(qi, qi)] += qq
    return f


@dataclass
class AuditReport:
    """How large the neglected wall terms are, relative to the kept ones.

    ratio_1 compares the Ldot (q-p mixing) block, ratio_2 the Ldot^2 (q-q)
    block, both by max-abs entry against the max-abs of the kept field
    diagonal, sampled over a time span.  observable_drift, when a dual
    evolution was run, is the largest per-entry difference in the recorded
    detector covariance between the two generators.
    """

    ratio_1: float
    ratio_2: float
    observable_drift: float | None = None


def audit(
    config: CavityConfig,
    driver,
    t_span: tuple[float, float],
    small_case_cycles: int | None = None,
    n_samples: int = 256,
) -> AuditReport:
    """Measure the size of the moving-wall corrections for this driver.

    Ratios are sampled on n_samples times across t_span.  If
    small_case_cycles is given, the farming protocol is integrated for that
    many cycles under both the quasi-static and the corrected Hamiltonian
    (generic integrator, practical only for small n_modes) and the largest
    detector-covariance discrepancy is reported.
    """
    if n_samples < 100:
        raise ValueError("need at least 100 samples for the ratios")
    mats = alpha_beta(config.n_modes)
    ts = np.linspace(t_span[0], t_span[1], n_samples)
    r1 = r2 = 0.0
    for t in ts:
        ell, _ = driver.length(t)
        lead = float(np.max(config.mode_frequencies(ell)))
        qp, qq = correction_blocks(config, t, driver, mats)
        r1 = max(r1, float(np.max(np.abs(qp))) / lead)
        r2 = max(r2, float(np.max(np.abs(qq))) / lead)
    drift = None
    if small_case_cycles is not None:
        drift = _dual_evolution_drift(config, driver, mats, small_case_cycles)
    return AuditReport(ratio_1=r1, ratio_2=r2, observable_drift=drift)


def _dual_evolution_drift(config, driver, mats, n_cycles: int) -> float:
    """Max detector-covariance discrepancy at the record points over n_cycles
    of the protocol, quasi-static vs corrected generator, same integrator."""
    from cavityfarm.farming import inject_fresh_pair, readout_block
    from cavityfarm.gaussian import IntegratorConfig, evolve, vacuum_state

    control = IntegratorConfig()
    state_a = vacuum_state(config.n_osc)
    state_f = vacuum_state(config.n_osc)

    def f_adiabatic(t: float):
        ell, _ = driver.length(t)
        return assemble_f(config, config.chi(t % config.repetition_time), ell)

    def f_full(t: float):
        return assemble_f_full(config, t, driver, mats)

    drift = 0.0
    for k in range(n_cycles):
        t0 = k * config.repetition_time
        t_rec = t0 + config.cycle_time
        t1 = t0 + config.repetition_time
        state_a = inject_fresh_pair(state_a)
        state_f = inject_fresh_pair(state_f)
        n_steps = control.step_count(config.omega_max, t_rec - t0)
        state_a = evolve(state_a, f_adiabatic, t0, t_rec, control=control, n_steps=n_steps)
        state_f = evolve(state_f, f_full, t0, t_rec, control=control, n_steps=n_steps)
        block_a = readout_block(state_a.sigma, config)
        block_f = readout_block(state_f.sigma, config)
        drift = max(drift, float(np.max(np.abs(block_a - block_f))))
        if t1 > t_rec:
            n_delay = control.step_count(config.omega_max, t1 - t_rec)
            state_a = evolve(state_a, f_adiabatic, t_rec, t1, control=control, n_steps=n_delay)
            state_f = evolve(state_f, f_full, t_rec, t1, control=control, n_steps=n_delay)
    return drift

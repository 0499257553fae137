"""Covariance-matrix machinery against independent oracles.

The propagator is checked against closed-form matrix exponentials and a
high-accuracy generic ODE solver; entanglement against the closed form for
two-mode squeezing and a brute-force Fock-basis partial transpose.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from cavityfarm.gaussian import (
    GaussianState,
    IntegratorConfig,
    SymplecticDefectError,
    evolve,
    free_rotation,
    log_negativity,
    propagator,
    rotation_matrix,
    squeezed_state,
    symplectic_defect,
    symplectic_eigenvalues,
    symplectic_form,
    symplectify,
    thermal_state,
    two_mode_squeezed_cov,
    vacuum_state,
)


def random_symmetric(n: int, rng) -> np.ndarray:
    m = rng.normal(size=(n, n))
    return 0.5 * (m + m.T)


def random_symplectic(n_osc: int, rng) -> np.ndarray:
    """exp(Omega F) for a random symmetric F is exactly symplectic."""
    f = random_symmetric(2 * n_osc, rng)
    return expm(symplectic_form(n_osc) @ f)


def fock_tms_log_negativity(r: float, n_max: int = 26) -> float:
    """Brute-force E_N of a two-mode squeezed state, Fock basis.

    The state is sum_n tanh^n r / cosh r |nn>; the partial transpose is
    diagonalized numerically and E_N = log2 of its trace norm.
    """
    c = np.tanh(r) ** np.arange(n_max + 1) / np.cosh(r)
    d = n_max + 1
    rho_pt = np.zeros((d * d, d * d))
    for m in range(d):
        for p in range(d):
            rho_pt[m * d + p, p * d + m] = c[m] * c[p]
    eig = np.linalg.eigvalsh(rho_pt)
    return float(np.log2(np.sum(np.abs(eig))))


class TestStates:
    def test_symplectic_form_blocks(self):
        omega = symplectic_form(2)
        one = np.array([[0.0, 1.0], [-1.0, 0.0]])
        assert np.array_equal(omega[:2, :2], one)
        assert np.array_equal(omega[2:, 2:], one)
        assert np.array_equal(omega[:2, 2:], np.zeros((2, 2)))
        assert np.array_equal(omega, -omega.T)

    def test_vacuum_is_half_identity(self):
        state = vacuum_state(3)
        assert np.array_equal(state.sigma, 0.5 * np.eye(6))
        assert state.is_physical()
        assert np.allclose(symplectic_eigenvalues(state.sigma), 0.5)

    def test_thermal_occupation_shifts_eigenvalues(self):
        state = thermal_state(2, nbar=1.5)
        assert np.allclose(symplectic_eigenvalues(state.sigma), 2.0)

    def test_squeezed_state_is_pure(self):
        state = squeezed_state(2, r=0.7, mode=1)
        assert np.allclose(symplectic_eigenvalues(state.sigma), 0.5)
        # squeezed quadrature variance drops by e^{-2r}
        assert state.sigma[2, 2] == pytest.approx(0.5 * np.exp(-2 * 0.7))
        assert state.sigma[3, 3] == pytest.approx(0.5 * np.exp(2 * 0.7))

    def test_sigma_must_be_symmetric_even_dimensional(self):
        with pytest.raises(ValueError):
            GaussianState(np.array([[1.0, 0.1], [0.2, 1.0]]))
        with pytest.raises(ValueError):
            GaussianState(np.eye(3))

    def test_unphysical_covariance_detected(self):
        assert not GaussianState(0.1 * np.eye(2)).is_physical()


class TestPropagator:
    def test_matches_matrix_exponential_static(self, rng):
        # indefinite F grows hyperbolically, so compare relative to the scale
        f = random_symmetric(6, rng)
        t1 = 3.7
        oracle = expm(symplectic_form(3) @ f * t1)
        s = propagator(lambda t: f, 0.0, t1, n_steps=4000)
        assert np.max(np.abs(s - oracle)) < 1e-11 * np.max(np.abs(oracle))

    def test_matches_generic_ode_solver_time_dependent(self):
        # one oscillator with a breathing frequency, one linearly coupled probe
        def f_of_t(t):
            w = 1.0 + 0.3 * np.sin(0.7 * t)
            return np.array(
                [
                    [w, 0.0, 0.05, 0.0],
                    [0.0, w, 0.0, 0.0],
                    [0.05, 0.0, 2.0, 0.0],
                    [0.0, 0.0, 0.0, 2.0],
                ]
            )

        omega = symplectic_form(2)

        def rhs(t, y):
            return (omega @ f_of_t(t) @ y.reshape(4, 4)).ravel()

        sol = solve_ivp(
            rhs, (0.0, 5.0), np.eye(4).ravel(), rtol=1e-12, atol=1e-14, method="DOP853"
        )
        oracle = sol.y[:, -1].reshape(4, 4)
        s = propagator(f_of_t, 0.0, 5.0, n_steps=2000)
        assert np.max(np.abs(s - oracle)) < 1e-9

    def test_rotation_closed_form(self):
        # H = (w/2)(q^2 + p^2) propagates to the phase-space rotation R(w t)
        w, t1 = 1.3, 2.1
        s = propagator(lambda t: w * np.eye(2), 0.0, t1, n_steps=2000)
        assert np.max(np.abs(s - rotation_matrix(w * t1))) < 1e-12

    def test_defect_below_tolerance_and_det_conserved(self, rng):
        # positive-definite F: bounded (elliptic) motion, like the physical model
        m = random_symmetric(4, rng)
        f = 0.25 * m @ m.T + 0.5 * np.eye(4)
        omega_max = float(np.max(np.abs(np.linalg.eigvalsh(f))))
        control = IntegratorConfig()
        s = propagator(lambda t: f, 0.0, 10.0, control=control, omega_max=omega_max)
        assert symplectic_defect(s) <= control.symplectic_tol
        start = thermal_state(2, nbar=0.3)
        end = evolve(start, lambda t: f, 0.0, 10.0, control=control, omega_max=omega_max)
        assert np.linalg.det(end.sigma) == pytest.approx(
            np.linalg.det(start.sigma), rel=1e-8
        )

    def test_symplectify_restores_canonical_structure(self, rng):
        # a small non-symplectic bump must be removed without moving the
        # matrix by more than the bump itself; exact inputs stay put
        bumped = rotation_matrix(0.8) + np.array([[3e-7, 0.0], [0.0, 0.0]])
        fixed = symplectify(bumped)
        assert symplectic_defect(bumped) > 1e-7
        assert symplectic_defect(fixed) < 1e-13
        assert np.max(np.abs(fixed - bumped)) < 1e-6
        exact = rotation_matrix(0.8)
        assert np.max(np.abs(symplectify(exact) - exact)) < 1e-14

        s = expm(symplectic_form(3) @ (0.3 * random_symmetric(6, rng)))
        noisy = s + 1e-6 * rng.normal(size=s.shape)
        fixed = symplectify(noisy)
        assert symplectic_defect(fixed) < 1e-13
        assert np.max(np.abs(fixed - noisy)) < 1e-4

    def test_propagator_output_is_machine_symplectic(self, rng):
        # long products of returned propagators must stay on the group, so
        # the projected defect has to sit at roundoff, not integrator, level
        m = random_symmetric(4, rng)
        f = 0.25 * m @ m.T + 0.5 * np.eye(4)
        omega_max = float(np.max(np.abs(np.linalg.eigvalsh(f))))
        s = propagator(lambda t: f, 0.0, 10.0, omega_max=omega_max)
        assert symplectic_defect(s) < 1e-13

    def test_hopeless_step_raises(self):
        control = IntegratorConfig(symplectic_tol=1e-12, max_refinements=0)
        with pytest.raises(SymplecticDefectError):
            propagator(lambda t: 5.0 * np.eye(2), 0.0, 50.0, control=control, n_steps=5)

    def test_zero_span_is_identity(self):
        s = propagator(lambda t: np.eye(2), 1.0, 1.0, n_steps=10)
        assert np.array_equal(s, np.eye(2))

    def test_free_rotation_matches_propagator(self):
        state = GaussianState(np.diag([0.7, 0.4, 1.1, 0.6]))
        phases = np.array([0.9, 2.4])
        f = np.diag([0.9, 0.9, 2.4, 2.4])
        oracle = evolve(state, lambda t: f, 0.0, 1.0, n_steps=2000)
        rotated = free_rotation(state, phases)
        assert np.max(np.abs(rotated.sigma - oracle.sigma)) < 1e-12


class TestLogNegativity:
    def test_two_mode_squeezed_closed_form(self):
        for r in (0.1, 0.3, 0.5, 1.0):
            e_n = log_negativity(two_mode_squeezed_cov(r))
            assert e_n == pytest.approx(2.0 * r * np.log2(np.e), abs=1e-6)

    def test_against_fock_partial_transpose(self):
        for r in (0.1, 0.3, 0.5):
            gaussian = log_negativity(two_mode_squeezed_cov(r))
            fock = fock_tms_log_negativity(r)
            assert gaussian == pytest.approx(fock, abs=1e-6)

    def test_vacuum_and_thermal_pairs_are_separable(self):
        assert log_negativity(0.5 * np.eye(4)) == 0.0
        assert log_negativity(1.5 * np.eye(4)) == 0.0

    def test_rejects_wrong_shape_and_unphysical_input(self):
        with pytest.raises(ValueError):
            log_negativity(np.eye(6))
        with pytest.raises(ValueError):
            log_negativity(0.1 * np.eye(4))

    @settings(max_examples=25, deadline=None)
    @given(
        r=st.floats(0.05, 1.2),
        theta1=st.floats(0.0, 2.0 * np.pi),
        theta2=st.floats(0.0, 2.0 * np.pi),
    )
    def test_invariant_under_local_rotations(self, r, theta1, theta2):
        # E_N is a function of the state, not of local phase conventions
        sigma = two_mode_squeezed_cov(r)
        local = np.zeros((4, 4))
        local[:2, :2] = rotation_matrix(theta1)
        local[2:, 2:] = rotation_matrix(theta2)
        rotated = local @ sigma @ local.T
        assert log_negativity(rotated) == pytest.approx(log_negativity(sigma), abs=1e-10)

    def test_symplectic_eigenvalues_invariant(self, rng):
        sigma = np.asarray(thermal_state(3, nbar=0.8).sigma)
        s = random_symplectic(3, rng)
        before = symplectic_eigenvalues(sigma)
        after = symplectic_eigenvalues(s @ sigma @ s.T)
        assert np.allclose(np.sort(before), np.sort(after), atol=1e-9)

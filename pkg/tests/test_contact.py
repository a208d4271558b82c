"""Jenkins element kernel tests against closed-form hysteresis results."""
import numpy as np
import pytest

from jointdyn import contact
from jointdyn.contact import ContactParams, dissipation, march_period, normal_force


PARAMS = ContactParams(kt=3e7, kn=4e8, mu=0.4)


def sinusoid(amplitude, N=256, phase=0.0):
    t = 2 * np.pi * np.arange(N) / N
    return amplitude * np.sin(t + phase)


def gross_slip_energy(A_t, f_n, params):
    """Closed-form loop area of the trapezoidal Jenkins cycle."""
    slip = params.mu * f_n
    return 4.0 * slip * (A_t - slip / params.kt)


class TestNormalForce:
    def test_penetration(self):
        assert normal_force(1e-6, 4e6) == pytest.approx(4.0)

    def test_separation_is_zero(self):
        assert normal_force(-1e-6, 4e6) == 0.0

    def test_boundary_is_zero(self):
        assert normal_force(0.0, 4e6) == 0.0


class TestMarchPeriod:
    def test_full_stick_is_linear_spring(self):
        pen = np.full(256, 1e-5)
        f_n = PARAMS.kn * 1e-5
        A = 0.5 * PARAMS.mu * f_n / PARAMS.kt
        du_t = sinusoid(A)
        trace = march_period(du_t, pen, PARAMS)
        np.testing.assert_allclose(
            trace.force_t, PARAMS.kt * du_t,
            rtol=1e-12, atol=1e-12 * PARAMS.kt * A,
        )
        assert np.all(trace.phases == contact.PHASE_STICK)
        assert dissipation(trace) == pytest.approx(0.0, abs=1e-12 * PARAMS.kt * A**2)

    def test_gross_slip_trapezoid_energy(self):
        pen = np.full(256, 1e-5)
        f_n = PARAMS.kn * 1e-5
        A = 10.0 * PARAMS.mu * f_n / PARAMS.kt
        trace = march_period(sinusoid(A), pen, PARAMS)
        assert np.any(trace.phases == contact.PHASE_SLIP)
        expected = gross_slip_energy(A, f_n, PARAMS)
        assert dissipation(trace) == pytest.approx(expected, rel=0.01)

    def test_separation_everywhere_zero_forces(self):
        du_n = np.full(64, -1e-6)
        trace = march_period(sinusoid(1e-5, 64), du_n, PARAMS)
        np.testing.assert_array_equal(trace.force_t, 0.0)
        np.testing.assert_array_equal(trace.force_n, 0.0)
        assert np.all(trace.phases == contact.PHASE_SEPARATION)
        assert dissipation(trace) == 0.0

    def test_slip_bound_respected(self):
        rng = np.random.default_rng(3)
        coeffs_t = 1e-5 * rng.standard_normal(7)
        coeffs_n = 1e-5 * rng.standard_normal(7)
        coeffs_n[0] = 2e-5
        from jointdyn import harmonics as hm

        du_t = hm.synthesize(coeffs_t, 256)
        du_n = hm.synthesize(coeffs_n, 256)
        trace = march_period(du_t, du_n, PARAMS)
        slack = PARAMS.mu * trace.force_n + 1e-9 * PARAMS.kt
        assert np.all(np.abs(trace.force_t) <= slack)
        # separation implies zero friction
        sep = trace.force_n == 0.0
        assert np.all(trace.force_t[sep] == 0.0)

    def test_masing_closure_within_three_periods(self):
        pen = 1e-5 + sinusoid(5e-6, phase=1.0)
        du_t = sinusoid(3e-5)
        trace = march_period(du_t, pen, PARAMS)
        assert trace.warmup_used <= 3
        assert trace.state_mismatch < 1e-10

    def test_rate_independence(self):
        # identical displacement loops at any frequency produce identical forces
        pen = np.full(128, 1e-5)
        du_t = sinusoid(4e-6, 128)
        t1 = march_period(du_t, pen, PARAMS)
        t2 = march_period(du_t, pen, PARAMS)
        np.testing.assert_array_equal(t1.force_t, t2.force_t)
        assert dissipation(t1, omega=10.0) == dissipation(t1, omega=20.0)

    def test_c0_continuity_jump_halves_with_resolution(self):
        def max_jump(N):
            pen = 1e-5 + sinusoid(9e-6, N, phase=0.7)
            du_t = sinusoid(5e-5, N)
            tr = march_period(du_t, pen, PARAMS)
            return np.max(np.abs(np.diff(tr.force_t)))

        assert max_jump(512) <= 0.6 * max_jump(256)

    def test_dissipation_nonnegative_random_loops(self):
        from jointdyn import harmonics as hm

        rng = np.random.default_rng(11)
        for _ in range(20):
            ct = 2e-5 * rng.standard_normal(9)
            cn = 2e-5 * rng.standard_normal(9)
            cn[0] = abs(cn[0]) + 1e-5
            du_t = hm.synthesize(ct, 256)
            du_n = hm.synthesize(cn, 256)
            tr = march_period(du_t, du_n, PARAMS)
            floor = -1e-12 * PARAMS.kt * np.max(np.abs(du_t)) ** 2
            assert dissipation(tr) >= floor

    def test_nonconvergence_raises_with_mismatch(self):
        pen = np.full(64, 1e-5)
        du_t = sinusoid(5e-5, 64)
        with pytest.raises(contact.JenkinsConvergenceError) as exc:
            march_period(du_t, pen, PARAMS, warmup_periods=1)
        assert exc.value.mismatch == np.inf or exc.value.mismatch >= 0


class TestParams:
    def test_rejects_nonpositive_stiffness(self):
        with pytest.raises(ValueError):
            ContactParams(kt=0.0, kn=1.0, mu=0.1)
        with pytest.raises(ValueError):
            ContactParams(kt=1.0, kn=-1.0, mu=0.1)

    def test_rejects_negative_friction(self):
        with pytest.raises(ValueError):
            ContactParams(kt=1.0, kn=1.0, mu=-0.1)


def test_dissipation_matches_reference_at_n256():
    pen = np.full(256, 1e-5)
    f_n = PARAMS.kn * 1e-5
    for ratio in (3.0, 6.0, 20.0):
        A = ratio * PARAMS.mu * f_n / PARAMS.kt
        tr = march_period(sinusoid(A), pen, PARAMS)
        assert dissipation(tr) == pytest.approx(
            gross_slip_energy(A, f_n, PARAMS), rel=0.01
        )

"""Transform-pair and harmonic-vector algebra tests."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jointdyn import harmonics as hm


class TestSynthesize:
    def test_static_only_gives_constant_trace(self):
        U = hm.HarmonicVector.zeros(3, 2)
        U.comps[0] = [1.0, -2.0, 0.5]
        trace = hm.synthesize_time(U, 16)
        assert trace.shape == (16, 3)
        np.testing.assert_allclose(trace, np.tile(U.comps[0], (16, 1)))

    def test_unit_cosine_harmonic(self):
        U = hm.HarmonicVector.zeros(4, 1)
        U.cos(1)[2] = 1.0
        trace = hm.synthesize_time(U, 8)
        expected = np.cos(2 * np.pi * np.arange(8) / 8)
        np.testing.assert_allclose(trace[:, 2], expected, atol=1e-14)
        np.testing.assert_allclose(trace[:, [0, 1, 3]], 0.0, atol=1e-15)

    def test_rejects_undersampling(self):
        U = hm.HarmonicVector.zeros(2, 3)
        with pytest.raises(ValueError):
            hm.synthesize_time(U, 7)


class TestAnalyze:
    def test_constant_signal(self):
        f = np.full(32, 4.2)
        coeffs = hm.analyze(f, 3)
        assert coeffs[0] == pytest.approx(4.2)
        np.testing.assert_allclose(coeffs[1:], 0.0, atol=1e-14)

    def test_pure_cosine(self):
        t = 2 * np.pi * np.arange(64) / 64
        coeffs = hm.analyze(3.0 * np.cos(t), 4)
        assert coeffs[hm.cos_comp(1)] == pytest.approx(3.0, abs=1e-12)
        mask = np.ones(9, bool)
        mask[hm.cos_comp(1)] = False
        np.testing.assert_allclose(coeffs[mask], 0.0, atol=1e-12)

    def test_square_wave_odd_sine_series(self):
        N = 256
        i = np.arange(N)
        f = np.where(i < N // 2, 1.0, -1.0)
        f[0] = f[N // 2] = 0.0
        coeffs = hm.analyze(f, 5)
        for j in (1, 3, 5):
            assert coeffs[hm.sin_comp(j)] == pytest.approx(4 / (np.pi * j), abs=8.0 / N)
        for j in (2, 4):
            assert abs(coeffs[hm.sin_comp(j)]) < 1e-12
            assert abs(coeffs[hm.cos_comp(j)]) < 1e-12

    def test_square_wave_alias_error_shrinks_with_n(self):
        def err(N):
            i = np.arange(N)
            f = np.where(i < N // 2, 1.0, -1.0)
            f[0] = f[N // 2] = 0.0
            c = hm.analyze(f, 5)
            return abs(c[hm.sin_comp(3)] - 4 / (3 * np.pi))

        assert err(512) < 0.6 * err(256)


class TestRoundTrip:
    @settings(max_examples=60, deadline=None)
    @given(
        n=st.integers(1, 8),
        H=st.integers(1, 5),
        seed=st.integers(0, 2**32 - 1),
    )
    def test_analyze_synthesize_identity(self, n, H, seed):
        rng = np.random.default_rng(seed)
        U = rng.standard_normal((2 * H + 1, n))
        N = max(2 * H + 2, 16)
        back = hm.analyze(hm.synthesize(U, N), H)
        np.testing.assert_allclose(back, U, atol=1e-12)

    def test_derivative_coeffs_match_numerical(self):
        rng = np.random.default_rng(0)
        H, omega, N = 3, 7.0, 512
        U = rng.standard_normal((2 * H + 1, 2))
        v = hm.derivative_coeffs(U, omega)
        tv = hm.synthesize(v, N)
        tu = hm.synthesize(U, N)
        T = 2 * np.pi / omega
        dt = T / N
        num = (np.roll(tu, -1, axis=0) - np.roll(tu, 1, axis=0)) / (2 * dt)
        np.testing.assert_allclose(tv, num, atol=2e-2 * np.max(np.abs(tv)))


def test_single_dof_amplitude_ignores_static():
    coeffs = np.zeros(5)
    coeffs[0] = 10.0
    coeffs[hm.cos_comp(1)] = 3.0
    coeffs[hm.sin_comp(1)] = 4.0
    assert hm.single_dof_amplitude(coeffs, 512) == pytest.approx(5.0, rel=1e-3)


def test_comp_indexing_labels():
    assert [hm.comp_label(b) for b in range(5)] == ["h0", "h1c", "h1s", "h2c", "h2s"]
    assert hm.harmonic_of_comp(hm.cos_comp(4)) == 4
    assert hm.harmonic_of_comp(hm.sin_comp(4)) == 4

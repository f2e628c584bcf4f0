import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from televar.field_algebra import (
    FrequencyGrid,
    SpectralMatrix,
    TransferMatrix,
    compose,
    ponderomotive,
    propagate,
    rotation,
    vacuum,
)

angles = st.floats(-20.0, 20.0, allow_nan=False)
kimbles = st.floats(0.0, 1e3, allow_nan=False)


def random_spectral(rng) -> SpectralMatrix:
    # PSD by construction: S = A A~ for a random complex 2x2
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    s = a @ a.conj().T
    return SpectralMatrix(s[0, 0].real, s[1, 1].real, s[0, 1])


class TestRotation:
    def test_zero_is_identity(self):
        np.testing.assert_allclose(rotation(0.0).m, np.eye(2))

    def test_quarter_turn(self):
        np.testing.assert_allclose(
            rotation(math.pi / 2).m, [[0, -1], [1, 0]], atol=1e-15
        )

    def test_matches_direct_trig(self):
        # independent oracle: evaluate the trig entries directly
        th = math.atan(1.0)
        m = rotation(th).m
        assert m[0, 0] == pytest.approx(math.cos(th), abs=1e-15)
        assert m[0, 1] == pytest.approx(-math.sin(th), abs=1e-15)
        assert abs(m[1, 0]) == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-15)

    @pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
    def test_rejects_non_finite(self, bad):
        with pytest.raises(ValueError):
            rotation(bad)

    @given(angles)
    def test_inverse(self, th):
        prod = compose(rotation(th), rotation(-th))
        np.testing.assert_allclose(prod.m, np.eye(2), atol=1e-12)


class TestPonderomotive:
    def test_zero_coupling_is_identity(self):
        t = ponderomotive(0.0, 0.0)
        np.testing.assert_allclose(t.m, np.eye(2))
        assert t.scalar_phase == pytest.approx(1.0)

    def test_unit_coupling_matrix(self):
        np.testing.assert_allclose(ponderomotive(1.0).m, [[1, 0], [-1, 1]])

    def test_phase_periodicity(self):
        t = ponderomotive(2.0, math.pi)
        assert t.scalar_phase == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(t.m, [[1, 0], [-2, 1]])

    def test_rejects_negative_coupling(self):
        with pytest.raises(ValueError):
            ponderomotive(-0.5)

    @given(kimbles, angles)
    def test_area_preserving(self, k, beta):
        assert np.linalg.det(ponderomotive(k, beta).m) == pytest.approx(1.0)


class TestPropagate:
    def test_identity(self):
        s = SpectralMatrix(2.0, 0.5, 0.1 + 0.2j)
        out = propagate(TransferMatrix(np.eye(2)), s)
        assert (out.s11, out.s22, out.s12) == (s.s11, s.s22, s.s12)

    def test_ponderomotive_on_vacuum(self):
        # hand matrix multiplication oracle: M I M~ for M = [[1,0],[-K,1]]
        k = 1.7
        m = np.array([[1.0, 0.0], [-k, 1.0]])
        ref = m @ np.eye(2) @ m.conj().T
        out = propagate(ponderomotive(k, 0.3), vacuum())
        assert out.s11 == pytest.approx(ref[0, 0])
        assert out.s22 == pytest.approx(ref[1, 1]) == pytest.approx(1 + k * k)
        assert out.s12 == pytest.approx(ref[0, 1]) == pytest.approx(-k)

    @given(angles)
    def test_rotation_fixes_vacuum(self, th):
        out = propagate(rotation(th), vacuum())
        assert out.s11 == pytest.approx(1.0, abs=1e-12)
        assert out.s22 == pytest.approx(1.0, abs=1e-12)
        assert abs(out.s12) < 1e-12

    def test_psd_preserved_bulk(self):
        rng = np.random.default_rng(11)
        for _ in range(1000):
            s = random_spectral(rng)
            if rng.random() < 0.5:
                t = rotation(rng.uniform(-3, 3))
            else:
                t = ponderomotive(rng.uniform(0, 50), rng.uniform(0, 6))
            out = propagate(t, s)
            assert out.s11 * out.s22 - abs(out.s12) ** 2 >= -1e-9 * max(
                1.0, out.s11 * out.s22
            )


class TestCompose:
    def test_identity_law(self):
        t = ponderomotive(2.5, 0.4)
        out = compose(TransferMatrix(np.eye(2)), t)
        np.testing.assert_allclose(out.m, t.m)
        assert out.scalar_phase == pytest.approx(t.scalar_phase)

    @given(angles, angles)
    def test_rotation_group(self, a, b):
        lhs = compose(rotation(a), rotation(b))
        np.testing.assert_allclose(lhs.m, rotation(a + b).m, atol=1e-12)

    def test_ponderomotive_additivity(self):
        # lower-triangular product oracle
        k1, k2 = 0.8, 2.3
        out = compose(ponderomotive(k1), ponderomotive(k2))
        np.testing.assert_allclose(out.m, [[1, 0], [-(k1 + k2), 1]], atol=1e-15)

    def test_associative_with_propagate(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            t1 = ponderomotive(rng.uniform(0, 5), rng.uniform(0, 6))
            t2 = rotation(rng.uniform(-3, 3))
            s = random_spectral(rng)
            a = propagate(compose(t1, t2), s)
            b = propagate(t1, propagate(t2, s))
            scale = max(1.0, a.s11, a.s22)
            assert abs(a.s11 - b.s11) <= 1e-12 * scale
            assert abs(a.s22 - b.s22) <= 1e-12 * scale
            assert abs(a.s12 - b.s12) <= 1e-12 * scale


class TestValidation:
    def test_spectral_matrix_rejects_negative_psd(self):
        with pytest.raises(ValueError):
            SpectralMatrix(-1.0, 1.0)

    def test_spectral_matrix_rejects_excess_cross(self):
        with pytest.raises(ValueError):
            SpectralMatrix(1.0, 1.0, 2.0)

    def test_transfer_matrix_rejects_non_unit_phase(self):
        with pytest.raises(ValueError):
            TransferMatrix(np.eye(2), 2.0)

    def test_grid_must_increase(self):
        with pytest.raises(ValueError):
            FrequencyGrid(np.array([1.0, 1.0, 2.0]))
        with pytest.raises(ValueError):
            FrequencyGrid(np.array([-1.0, 2.0]))

    def test_log_spaced_density(self):
        grid = FrequencyGrid.log_spaced(1e-2, 1e2, 12, angular=True)
        assert len(grid) == 49
        # hits the decade points exactly
        assert grid.omegas[0] == pytest.approx(1e-2)
        assert grid.omegas[24] == pytest.approx(1.0)
        ratios = grid.omegas[1:] / grid.omegas[:-1]
        np.testing.assert_allclose(ratios, 10 ** (1 / 12), rtol=1e-12)

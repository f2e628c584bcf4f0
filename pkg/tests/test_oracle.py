import math

import numpy as np
import pytest

from televar import oracle
from televar.teleportation import (
    EntanglementParams,
    filtered_spectrum,
    qtvr_closed_form,
    variational_filters,
    wiener_filters,
)

R18 = math.log(10.0) * 0.9


def tuned_state(r, kimble, victor=None, theta_a=None, **betas):
    epr = victor if victor is not None else EntanglementParams(r)
    th = math.atan(kimble) if theta_a is None else theta_a
    return oracle.apply_plant(oracle.build_initial_state(epr), kimble, th, **betas)


class TestInitialState:
    def test_no_squeezing_gives_three_vacua(self):
        st = oracle.build_initial_state(EntanglementParams(0.0))
        np.testing.assert_allclose(st.cov, np.eye(6), atol=1e-15)

    def test_pair_diagonals(self):
        r = 1.1
        st = oracle.build_initial_state(EntanglementParams(r))
        np.testing.assert_allclose(np.diag(st.cov)[2:].real,
                                   math.cosh(2 * r), rtol=1e-13)

    def test_pair_is_pure(self):
        # symplectic eigenvalues of the entangled 4x4 block are all 1
        r = 0.9
        st = oracle.build_initial_state(EntanglementParams(r))
        block = st.cov[2:, 2:].real
        omega4 = oracle.symplectic_form()[2:, 2:]
        nus = np.abs(np.linalg.eigvals(1j * omega4 @ block))
        np.testing.assert_allclose(np.sort(nus), np.ones(4), rtol=1e-10)

    def test_uncertainty_relation_holds(self):
        for r, rv in ((0.0, 0.0), (1.5, 0.0), (0.7, 1.2)):
            st = oracle.build_initial_state(EntanglementParams(r, rv, 0.3))
            st.check_uncertainty()


class TestPlantTransform:
    def test_zero_coupling_zero_rotation_is_identity(self):
        st = oracle.build_initial_state(EntanglementParams(0.8))
        out = oracle.apply_plant(st, 0.0, 0.0)
        np.testing.assert_allclose(out.cov, st.cov, atol=1e-14)

    def test_signal_row_in_probe_phase_slot_only(self):
        st = tuned_state(1.0, 2.5, beta_v=0.6)
        row = st.signal_row
        assert row[1] == pytest.approx(math.sqrt(2.5) * np.exp(0.6j))
        assert np.all(row[[0, 2, 3, 4, 5]] == 0)

    def test_block_assembly_oracle(self):
        # hand-built 6x6 against the module's block matrix
        k, th = 1.7, 0.4
        m = np.zeros((6, 6), dtype=complex)
        m[0, 0] = 1.0
        m[1, 0], m[1, 1] = -k, 1.0
        m[2, 2] = m[3, 3] = math.cos(th)
        m[2, 3], m[3, 2] = -math.sin(th), math.sin(th)
        m[4, 4] = m[5, 5] = 1.0
        np.testing.assert_allclose(oracle.plant_block_matrix(k, th), m, atol=1e-15)

    def test_transforms_are_symplectic(self):
        omega = oracle.symplectic_form()
        rng = np.random.default_rng(12)
        for _ in range(50):
            m = oracle.plant_block_matrix(rng.uniform(0, 30),
                                          rng.uniform(0, math.pi / 2)).real
            np.testing.assert_allclose(m @ omega @ m.T, omega, atol=1e-9)


class TestCatalogLock:
    def test_matches_fast_path_on_random_draws(self):
        rng = np.random.default_rng(42)
        for _ in range(200):
            r = rng.uniform(0.0, 2.4)
            k = 10 ** rng.uniform(-3, 3)
            th = rng.uniform(0.0, math.pi / 2)
            vic = EntanglementParams(r, rng.uniform(0, 1.5), rng.uniform(0, math.pi))
            ba, bb = rng.uniform(0, math.pi, 2)
            st = oracle.apply_plant(oracle.build_initial_state(vic), k, th,
                                    beta_b=bb, beta_a=ba)
            got = oracle.measured_catalog(st)

            from televar.field_algebra import SpectralMatrix
            from televar.plant import alice_output, bob_output, victor_output_from_kimble
            from televar.teleportation import bell_combine_catalog, victor_input_spectrum

            v_out, _ = victor_output_from_kimble(k, victor_input_spectrum(vic),
                                                 beta_b=bb)
            c2 = math.cosh(2 * r)
            want = bell_combine_catalog(
                v_out,
                alice_output(th, ba, SpectralMatrix(c2, c2)),
                bob_output(SpectralMatrix(c2, c2)),
                vic, th, ba, bb,
            )
            for name in ("s_bb", "s_a1a1", "s_a2a2", "s_a1a2", "s_ba1", "s_ba2"):
                g, w = complex(getattr(got, name)), complex(getattr(want, name))
                assert abs(g - w) <= 1e-9 * max(1.0, abs(w)), (name, g, w)

    def test_cross_spectra_signs(self):
        st = tuned_state(1.0, 1.0, theta_a=0.3)
        cat = oracle.measured_catalog(st)
        # negative crosses with the sin/cos split of the idler rotation
        assert cat.s_ba1.real < 0 and cat.s_ba2.real < 0
        assert cat.s_ba1.real / cat.s_ba2.real == pytest.approx(math.tan(0.3))


class TestMeasureAndFilter:
    def test_zero_filters_give_reference_variance(self):
        st = tuned_state(1.2, 0.7)
        res, gain = oracle.measure_and_filter(st, 0.0, 0.0)
        assert res == pytest.approx(math.cosh(2.4), rel=1e-12)
        assert gain == 0

    def test_matches_filtered_spectrum_at_wiener_point(self):
        rng = np.random.default_rng(8)
        for _ in range(40):
            st = tuned_state(rng.uniform(0.1, 2.3), 10 ** rng.uniform(-1, 1),
                             theta_a=rng.uniform(0, math.pi / 2))
            cat = oracle.measured_catalog(st)
            w = wiener_filters(cat)
            res, _ = oracle.measure_and_filter(st, w.g1, w.g2)
            assert res == pytest.approx(filtered_spectrum(cat, w), rel=1e-9)

    def test_random_filters_quadratic_form(self):
        rng = np.random.default_rng(15)
        st = tuned_state(0.9, 2.0)
        s3 = oracle.BELL_MAP @ st.cov @ oracle.BELL_MAP.T
        for _ in range(50):
            g1 = rng.normal() + 1j * rng.normal()
            g2 = rng.normal() + 1j * rng.normal()
            res, _ = oracle.measure_and_filter(st, g1, g2)
            # explicit double loop, no matrix shortcuts
            c = [1.0, -g1, -g2]
            want = sum(
                c[i] * s3[i, j] * np.conj(c[j]) for i in range(3) for j in range(3)
            )
            assert res == pytest.approx(want.real, rel=1e-12)

    def test_signal_gain_through_bell_combination(self):
        st = tuned_state(1.0, 4.0)
        _, gain = oracle.measure_and_filter(st, 0.0, -1.0)
        # alpha2 carries sqrt(K)/sqrt(2) of the signal
        assert abs(gain) == pytest.approx(math.sqrt(4.0 / 2.0), rel=1e-12)


class TestGridSearch:
    def test_zero_correlation_state_keeps_zero_filters(self):
        st = tuned_state(0.0, 1.0)
        g1, g2, best = oracle.grid_search_filters(st, resolution=16)
        assert abs(g1) < 1e-3 and abs(g2) < 1e-3
        assert best == pytest.approx(1.0, abs=1e-6)

    def test_requires_three_levels(self):
        st = tuned_state(0.5, 1.0)
        with pytest.raises(ValueError):
            oracle.grid_search_filters(st, resolution=2)

    def test_residual_search_agrees_with_analytic(self):
        rng = np.random.default_rng(21)
        for _ in range(20):
            st = tuned_state(rng.uniform(0.1, 2.3), 10 ** rng.uniform(-1.5, 1.5),
                             theta_a=rng.uniform(0, math.pi / 2))
            cat = oracle.measured_catalog(st)
            res_w = filtered_spectrum(cat, wiener_filters(cat))
            _, _, best = oracle.grid_search_filters(st, resolution=22)
            assert best >= res_w - 1e-6 * res_w
            assert best == pytest.approx(res_w, rel=1e-6)

    def test_scheme_strain_search_hits_closed_form(self):
        for k in (0.5, 1.0, 3.0):
            st = tuned_state(R18, k)
            _, g2, best = oracle.grid_search_filters(
                st, resolution=26, objective="strain", kimble=k,
                back_action_evading=True,
            )
            want = qtvr_closed_form(1.0, k, R18, 1.0)
            assert best == pytest.approx(want, rel=1e-6)
            assert best >= want - 1e-6 * want
            cat = oracle.measured_catalog(st)
            w = variational_filters(cat, k)
            assert abs(g2 - w.g2) <= 1e-3 * abs(w.g2)

import numpy as np
import pytest

from so4body import core

LAM = core.InertiaSpectrum(4, 3, 2, 1)


def random_states(n, seed=0, scale=2.0):
    rng = np.random.default_rng(seed)
    return rng.uniform(-scale, scale, size=(n, 6))


class TestInertiaSpectrum:
    def test_values_ordered(self):
        assert np.allclose(LAM.values, [4, 3, 2, 1])
        assert np.allclose(LAM.pair_sums, [5, 6, 7, 5, 4, 3])

    def test_rejects_unordered(self):
        with pytest.raises(ValueError):
            core.InertiaSpectrum(1, 2, 3, 4)
        with pytest.raises(ValueError):
            core.InertiaSpectrum(4, 3, 3, 1)

    def test_rejects_nonpositive_pair_sum(self):
        with pytest.raises(ValueError):
            core.InertiaSpectrum(4, 3, 2, -2)

    def test_allows_negative_smallest_moment(self):
        lam = core.InertiaSpectrum(4, 3, 2, -1.5)
        assert np.all(lam.pair_sums > 0)

    def test_from_values(self):
        assert core.InertiaSpectrum.from_values([4, 3, 2, 1]) == LAM
        with pytest.raises(ValueError):
            core.InertiaSpectrum.from_values([4, 3, 2])


class TestChart:
    def test_embed_extract_roundtrip(self):
        for m in random_states(20, seed=1):
            mat = core.embed(m)
            assert np.allclose(mat, -mat.T)
            assert np.allclose(core.extract(mat), m)

    def test_state_validation(self):
        with pytest.raises(ValueError):
            core.as_state([1, 2, 3])
        with pytest.raises(ValueError):
            core.as_state([np.nan, 0, 0, 0, 0, 0])


class TestOmega:
    def test_zero(self):
        assert np.allclose(core.omega_from_m(np.zeros(6), LAM), 0.0)

    def test_single_component(self):
        m = np.array([5.0, 0, 0, 0, 0, 0])
        omega = core.omega_from_m(m, LAM)
        assert omega[0] == pytest.approx(1.0)  # 5 / (lambda2 + lambda3)
        assert np.all(omega[1:] == 0.0)

    def test_all_ones(self):
        omega = core.omega_from_m(np.ones(6), LAM)
        assert np.allclose(omega, [1 / 5, 1 / 6, 1 / 7, 1 / 5, 1 / 4, 1 / 3])


class TestVectorField:
    def test_zero_at_origin(self):
        assert np.allclose(core.vector_field(np.zeros(6), LAM), 0.0)

    def test_matches_commutator_oracle(self):
        # dM/dt must equal the matrix commutator M*Omega - Omega*M
        worst = 0.0
        for m in random_states(1000, seed=2):
            omega = core.embed(core.omega_from_m(m, LAM))
            mm = core.embed(m)
            oracle = core.extract(mm @ omega - omega @ mm)
            f = core.vector_field(m, LAM)
            scale = core.tolerance_scale(np.linalg.norm(m) ** 2)
            worst = max(worst, np.max(np.abs(f - oracle)) / scale)
        assert worst <= 1e-12

    def test_commutator_oracle_random_spectra(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            lam_vals = np.sort(rng.uniform(0.5, 5.0, size=4))[::-1]
            if min(np.diff(lam_vals[::-1])) < 1e-3:
                continue
            lam = core.InertiaSpectrum(*lam_vals)
            m = rng.uniform(-2, 2, size=6)
            omega = core.embed(core.omega_from_m(m, lam))
            mm = core.embed(m)
            oracle = core.extract(mm @ omega - omega @ mm)
            assert np.allclose(core.vector_field(m, lam), oracle, atol=1e-12)


class TestIntegralValues:
    def test_c1_at_ones(self):
        assert core.integral_value("C1", np.ones(6), LAM) == pytest.approx(3.0)

    def test_c2_dot_product(self):
        m = np.array([1.0, 2.0, 3.0, 3.0, 2.0, 1.0])
        assert core.integral_value("C2", m, LAM) == pytest.approx(10.0)

    def test_i_single_term(self):
        m = np.array([1.0, 0, 0, 0, 0, 0])
        assert core.integral_value("I", m, LAM) == pytest.approx(13.0)  # lambda2^2 + lambda3^2

    def test_h_from_trace(self):
        # H(M) = -Trace(M @ Omega) / 4
        for m in random_states(20, seed=4):
            mm = core.embed(m)
            om = core.embed(core.omega_from_m(m, LAM))
            assert core.integral_value("H", m, LAM) == pytest.approx(
                -0.25 * np.trace(mm @ om), rel=1e-12)

    def test_casimirs_from_matrix_invariants(self):
        # C1 = -Trace(M^2)/4; |C2| = |Pfaffian(M)| = sqrt(det M)
        for m in random_states(20, seed=5):
            mm = core.embed(m)
            assert core.integral_value("C1", m, LAM) == pytest.approx(
                -0.25 * np.trace(mm @ mm), rel=1e-12)
            assert abs(core.integral_value("C2", m, LAM)) == pytest.approx(
                np.sqrt(np.linalg.det(mm)), rel=1e-9)

    def test_unknown_tag(self):
        with pytest.raises(ValueError):
            core.integral_value("G5", np.ones(6), LAM)


class TestGradients:
    def test_grad_c1_is_state(self):
        for m in random_states(10, seed=6):
            assert np.allclose(core.integral_gradient("C1", m, LAM), m)

    def test_grad_c2_swaps_blocks(self):
        m = np.arange(1.0, 7.0)
        g = core.integral_gradient("C2", m, LAM)
        assert np.allclose(g, [4, 5, 6, 1, 2, 3])

    def test_grad_h_at_ones(self):
        g = core.integral_gradient("H", np.ones(6), LAM)
        assert np.allclose(g, [1 / 5, 1 / 6, 1 / 7, 1 / 5, 1 / 4, 1 / 3])

    def test_matches_central_differences(self):
        h = 1e-5
        for m in random_states(5, seed=7):
            for name in core.INTEGRALS:
                grad = core.integral_gradient(name, m, LAM)
                fd = np.zeros(6)
                for k in range(6):
                    e = np.zeros(6)
                    e[k] = h
                    fd[k] = (core.integral_value(name, m + e, LAM)
                             - core.integral_value(name, m - e, LAM)) / (2 * h)
                assert np.allclose(grad, fd, rtol=1e-6, atol=1e-8)


class TestConservation:
    def test_all_integrals_constant_along_field(self):
        worst = 0.0
        for m in random_states(1000, seed=8):
            f = core.vector_field(m, LAM)
            for name in core.INTEGRALS:
                g = core.integral_gradient(name, m, LAM)
                scale = core.tolerance_scale(np.linalg.norm(g) * np.linalg.norm(f))
                worst = max(worst, abs(g @ f) / scale)
        assert worst <= 1e-10


class TestPoissonBracket:
    def test_casimir_brackets_vanish(self):
        for m in random_states(50, seed=9):
            for g in core.INTEGRALS:
                assert abs(core.poisson_bracket("C1", g, m, LAM)) <= 1e-12 * core.tolerance_scale(
                    np.linalg.norm(m) ** 3)
                assert abs(core.poisson_bracket("C2", g, m, LAM)) <= 1e-12 * core.tolerance_scale(
                    np.linalg.norm(m) ** 3)

    def test_h_commutes_with_extra_integral(self):
        for m in random_states(100, seed=10):
            s = core.tolerance_scale(
                np.linalg.norm(core.integral_gradient("H", m, LAM))
                * np.linalg.norm(core.integral_gradient("I", m, LAM))
                * np.linalg.norm(m))
            assert abs(core.poisson_bracket("H", "I", m, LAM)) <= 1e-10 * s

    def test_antisymmetry_diagonal(self):
        for m in random_states(10, seed=11):
            assert core.poisson_bracket("H", "H", m, LAM) == pytest.approx(0.0, abs=1e-14)

    def test_bracket_generates_flow(self):
        # {F, H} equals the derivative of F along the field
        for m in random_states(30, seed=12):
            f = core.vector_field(m, LAM)
            for name in ("C1", "I", "G2"):
                lhs = core.integral_gradient(name, m, LAM) @ f
                rhs = core.poisson_bracket(name, "H", m, LAM)
                assert lhs == pytest.approx(rhs, abs=1e-11 * core.tolerance_scale(
                    np.linalg.norm(m) ** 4))


class TestPopovDecomposition:
    def test_mu2_value(self):
        d = core.popov_decomposition(1, LAM)
        assert d.mu2 == pytest.approx(1 / 60)  # 1 / ((10)(1)(2)(3))

    def test_identity_all_k(self):
        worst = 0.0
        for m in random_states(100, seed=13):
            for k in (1, 2, 3, 4):
                d = core.popov_decomposition(k, LAM)
                combo = (d.mu1 * core.integral_value("H", m, LAM)
                         + d.mu2 * core.integral_value("I", m, LAM)
                         + d.m_prime * core.integral_value("C1", m, LAM))
                gk = core.integral_value(f"G{k}", m, LAM)
                worst = max(worst, abs(gk - combo) / core.tolerance_scale(abs(gk)))
        assert worst <= 1e-10

    def test_printed_mixed_index_variant_fails(self):
        # The ambiguous mu2 denominator for G3: the mixed-index variant
        # (lambda2 - lambda4) breaks the decomposition identity, the
        # index-patterned variant (lambda3 - lambda4) is the one that holds.
        l1, l2, l3, l4 = LAM.values
        d = core.popov_decomposition(3, LAM)
        assert d.mu2 == pytest.approx(
            1.0 / ((l1 + l2 + l3 + l4) * (l1 - l3) * (l2 - l3) * (l3 - l4)))
        mu2_mixed = 1.0 / ((l1 + l2 + l3 + l4) * (l1 - l3) * (l2 - l3) * (l2 - l4))
        worst = 0.0
        for m in random_states(50, seed=14):
            combo = (d.mu1 * core.integral_value("H", m, LAM)
                     + mu2_mixed * core.integral_value("I", m, LAM)
                     + d.m_prime * core.integral_value("C1", m, LAM))
            g3 = core.integral_value("G3", m, LAM)
            worst = max(worst, abs(g3 - combo) / core.tolerance_scale(abs(g3)))
        assert worst > 1e-3

    def test_mu2_sign_alternates_with_k(self):
        # odd-index quantities carry +1/denominator, even-index -1/denominator
        for k, sign in ((1, 1), (2, -1), (3, 1), (4, -1)):
            assert np.sign(core.popov_decomposition(k, LAM).mu2) == sign

    def test_sum_is_casimir_multiple(self):
        # the four quantities sum to (sum of m') * C1 pointwise
        mp = sum(core.popov_decomposition(k, LAM).m_prime for k in (1, 2, 3, 4))
        mu1 = sum(core.popov_decomposition(k, LAM).mu1 for k in (1, 2, 3, 4))
        mu2 = sum(core.popov_decomposition(k, LAM).mu2 for k in (1, 2, 3, 4))
        assert mu1 == pytest.approx(0.0, abs=1e-12)
        assert mu2 == pytest.approx(0.0, abs=1e-15)
        for m in random_states(50, seed=15):
            total = sum(core.integral_value(f"G{k}", m, LAM) for k in (1, 2, 3, 4))
            assert total == pytest.approx(mp * core.integral_value("C1", m, LAM), abs=1e-11)

    def test_sum_commutes_with_h(self):
        # the sum being a Casimir combination, its bracket with H vanishes
        for m in random_states(100, seed=16):
            total = sum(core.poisson_bracket("H", f"G{k}", m, LAM) for k in (1, 2, 3, 4))
            assert abs(total) <= 1e-10 * core.tolerance_scale(np.linalg.norm(m) ** 3)

    def test_identity_random_spectra(self):
        rng = np.random.default_rng(17)
        for _ in range(50):
            vals = np.sort(rng.uniform(0.5, 5.0, size=4))[::-1]
            if min(-np.diff(vals)) < 0.05:
                continue
            lam = core.InertiaSpectrum(*vals)
            m = rng.uniform(-2, 2, size=6)
            for k in (1, 2, 3, 4):
                d = core.popov_decomposition(k, lam)
                combo = (d.mu1 * core.integral_value("H", m, lam)
                         + d.mu2 * core.integral_value("I", m, lam)
                         + d.m_prime * core.integral_value("C1", m, lam))
                gk = core.integral_value(f"G{k}", m, lam)
                assert abs(gk - combo) <= 1e-10 * core.tolerance_scale(abs(gk))

    def test_rejects_bad_k(self):
        with pytest.raises(ValueError):
            core.popov_decomposition(5, LAM)

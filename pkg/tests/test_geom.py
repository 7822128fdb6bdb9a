import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hmcfront.geom import (
    cut_mismatch,
    curvatures,
    densities,
    evaluate,
    fd_forms,
    fundamental_forms,
    hopf_Q,
    is_front,
    principal_curvatures,
    pseudometric_curvature,
    sample_surface,
    sasakian_metric,
    singular_residual,
    subharmonicity_check,
)
from hmcfront.sampler import interior_samples, random_samples
from hmcfront.scene import example_scene
from hmcfront.weier import FrameError, SceneData, moving_frame


def data(name, **kw):
    return example_scene(name, **kw).data()


def alpha_radius(alpha):
    c = 2 * alpha ** 2 / abs(alpha ** 2 - 1)
    return (-math.sqrt(c) + math.sqrt(c + 1)) ** (1 / alpha)


class TestDensities:
    def test_identity_h_at_origin(self):
        eta2, _ = densities(moving_frame(SceneData.from_strings("exp(z)", "z"), 0))
        assert eta2 == pytest.approx(4)

    def test_totally_geodesic_pi_vanishes(self):
        for z in (0.1, 0.5 + 0.3j, -0.7j):
            _, pi2 = densities(moving_frame(data("zalpha", alpha=1.0), z))
            assert pi2 == 0

    def test_expk_pi_at_origin(self):
        _, pi2 = densities(moving_frame(data("expk", k=4), 0))
        assert pi2 == pytest.approx(4 ** 4 / 16)

    @pytest.mark.parametrize("alpha", [2.0, 0.5])
    @pytest.mark.parametrize("z", [0.3 + 0.1j, 0.6, -0.2 + 0.5j])
    def test_power_closed_forms(self, alpha, z):
        eta2, pi2 = densities(moving_frame(data("zalpha", alpha=alpha), z))
        r = abs(z)
        assert eta2 == pytest.approx(4 * alpha ** 2 * r ** (2 * alpha - 2) / (1 - r ** (2 * alpha)) ** 2, rel=1e-12)
        want = (alpha ** 2 - 1) ** 2 / (16 * alpha ** 2) * (1 - r ** (2 * alpha)) ** 2 / r ** (2 * alpha + 2)
        assert pi2 == pytest.approx(want, rel=1e-12)

    @pytest.mark.parametrize("z", [0.3 + 0.1j, -0.6j])
    def test_joukowski_pi(self, z):
        _, pi2 = densities(moving_frame(data("joukowski"), z))
        assert pi2 == pytest.approx(9 * (1 - abs(z) ** 2) ** 2 / abs(z * z - 1) ** 4, rel=1e-12)


class TestCurvatures:
    def test_totally_geodesic(self):
        s, _ = evaluate(data("zalpha", alpha=1.0), random_samples(example_scene("zalpha", alpha=1.0).domain, 200, 1))
        assert np.all(s.K == -1) and np.all(s.H == 0)

    def test_direct_substitution(self):
        assert curvatures(1.0, 2.0) == (1.0, 2.0)

    def test_singular_is_nan(self):
        K, H = curvatures(1.0, 1.0 + 1e-12)
        assert math.isnan(K) and math.isnan(H)

    def test_sign_inside_and_outside_circle(self):
        d, r0 = data("zalpha", alpha=2.0), alpha_radius(2.0)
        for r in np.linspace(0.05, r0 - 0.01, 8):
            assert sample_surface(d, r * np.exp(0.4j)).K >= 0
        for r in np.linspace(r0 + 0.01, 0.99, 8):
            assert sample_surface(d, r * np.exp(0.4j)).K <= -1

    @given(st.floats(1e-6, 1e6), st.floats(1e-6, 1e6))
    def test_H_minus_K_is_one(self, eta2, pi2):
        K, H = curvatures(eta2, pi2)
        if not math.isnan(K):
            assert abs(H - K - 1) <= 1e-10 * max(1.0, abs(H))
            assert K <= -1 + 1e-9 or K >= -1e-9

    def test_closed_form_in_h_theta(self, scenes):
        for sc in scenes.values():
            d = sc.data()
            for z in random_samples(sc.domain, 50, 4):
                fr = moving_frame(d, z)
                s = sample_surface(d, z)
                if s.is_singular:
                    continue
                m = 1 - abs(fr.h) ** 2
                K = 4 * abs(fr.dh_dz) ** 2 / (m ** 4 * abs(fr.theta_dz) ** 2 - 4 * abs(fr.dh_dz) ** 2)
                assert abs(K - s.K) <= 1e-9 * max(1.0, abs(s.K))


class TestFundamentalForms:
    def test_totally_geodesic(self):
        fr = moving_frame(data("zalpha", alpha=1.0), 0.3 - 0.2j)
        I, II, III = fundamental_forms(fr)
        eta2, _ = densities(fr)
        assert np.array_equal(II, np.zeros((2, 2))) and np.array_equal(III, np.zeros((2, 2)))
        assert np.allclose(I, eta2 * np.eye(2), rtol=1e-15)

    def test_totally_geodesic_fd_second_form_vanishes(self):
        d = data("zalpha", alpha=1.0)
        for z in (0.0, 0.4 + 0.3j, -0.6):
            assert np.abs(fd_forms(d, z).II).max() < 1e-8

    @pytest.mark.parametrize("name,kw", [("zalpha", {"alpha": 2.0}), ("expk", {"k": 4}), ("joukowski", {})])
    def test_closed_form_matches_fd(self, name, kw):
        sc = example_scene(name, **kw)
        d = sc.data()
        for z in random_samples(sc.domain, 30, 8):
            cf = fundamental_forms(moving_frame(d, z))
            fd = fd_forms(d, z)
            scale = np.abs(cf.I).max()
            for a, b in zip(cf, fd):
                assert np.abs(a - b).max() <= 1e-6 * scale

    def test_I_minus_2II_is_conformal(self, scenes):
        for sc in scenes.values():
            d = sc.data()
            for z in random_samples(sc.domain, 30, 6):
                fr = moving_frame(d, z)
                I, II, _ = fundamental_forms(fr)
                eta2, pi2 = densities(fr)
                assert np.allclose(I - 2 * II, (eta2 - pi2) * np.eye(2), rtol=1e-12, atol=1e-12 * np.abs(I).max())

    def test_third_form_relation(self, scenes):
        for sc in scenes.values():
            d = sc.data()
            for z in random_samples(sc.domain, 30, 6):
                s = sample_surface(d, z)
                if s.is_singular:
                    continue
                I, II, III = fundamental_forms(moving_frame(d, z))
                rhs = 2 * s.H * II - (s.K + 1) * I
                assert np.abs(III - rhs).max() <= 1e-8 * max(1.0, np.abs(III).max())


class TestPrincipalCurvatures:
    def test_totally_geodesic(self):
        I, II, _ = fundamental_forms(moving_frame(data("zalpha", alpha=1.0), 0.2))
        assert principal_curvatures(I, II) == (0.0, 0.0)

    def test_expk_origin_harmonic_mean(self):
        I, II, _ = fundamental_forms(moving_frame(data("expk", k=1), 0))
        k1, k2 = principal_curvatures(I, II)
        assert 1 / k1 + 1 / k2 == pytest.approx(2, abs=1e-7)

    def test_gauss_and_mean(self, scenes):
        # |K| < 1e3 keeps away from the singular locus, where det I is a
        # cancellation of order (pi2 - eta2)^2 and loses most of its digits
        for sc in scenes.values():
            d = sc.data()
            for z in random_samples(sc.domain, 40, 12):
                s = sample_surface(d, z)
                if s.is_singular or s.K == -1 or abs(s.K) > 1e3:
                    continue
                k1, k2 = principal_curvatures(*fundamental_forms(moving_frame(d, z))[:2])
                tol = 1e-7 * max(1.0, abs(s.K))
                assert abs(k1 * k2 - (s.K + 1)) <= tol
                assert abs((k1 + k2) / 2 - s.H) <= tol
                assert abs(1 / k1 + 1 / k2 - 2) <= 1e-7

    def test_positive_K_points(self):
        d = data("expk", k=4)
        for z in (0.0, 0.1 + 0.2j, -0.3j, 0.45):
            s = sample_surface(d, z)
            assert s.K >= 0
            k1, k2 = principal_curvatures(*fundamental_forms(moving_frame(d, z))[:2])
            assert k1 * k2 == pytest.approx(s.K + 1, abs=1e-7)

    def test_degenerate_first_form(self):
        with pytest.raises(ValueError, match="degenerate"):
            principal_curvatures(np.diag([1.0, 0.0]), np.eye(2))


class TestHopf:
    @pytest.mark.parametrize("alpha", [2.0, 0.5, 3.0])
    def test_power(self, alpha):
        z = 0.4 + 0.3j
        Q = hopf_Q(moving_frame(data("zalpha", alpha=alpha), z))
        assert Q == pytest.approx((1 - alpha ** 2) / (2 * z * z), rel=1e-10)

    @pytest.mark.parametrize("k", [1, 2 * math.sqrt(2), 4, 2 - 1j])
    def test_exponential(self, k):
        Q = hopf_Q(moving_frame(data("expk", k=k), 0.1 - 0.3j))
        assert Q == pytest.approx(k * k / 2, rel=1e-10)

    def test_joukowski(self):
        z = 0.5 - 0.2j
        assert hopf_Q(moving_frame(data("joukowski"), z)) == pytest.approx(6 / (z * z - 1) ** 2, rel=1e-10)

    def test_modulus_compatibility(self, scenes):
        for sc in scenes.values():
            s, status = evaluate(sc.data(), random_samples(sc.domain, 200, 2))
            ok = status == 0
            lhs, rhs = np.abs(s.Q_dz2[ok]) ** 2, s.eta2[ok] * s.pi2[ok]
            assert np.all(np.abs(lhs - rhs) <= 1e-10 * np.maximum(rhs, 1e-300) + 1e-300)


class TestFrontPredicates:
    def test_residual_sign_change_at_expk_circle(self):
        d, r0 = data("expk", k=4), math.sqrt(1 - 2 * math.sqrt(2) / 4)
        inner = sample_surface(d, (r0 - 1e-3) * 1j)
        outer = sample_surface(d, (r0 + 1e-3) * 1j)
        assert singular_residual(inner.eta2, inner.pi2) < 0 < singular_residual(outer.eta2, outer.pi2)

    def test_expk_small_k_has_no_singularities(self):
        sc = example_scene("expk", k=1)
        s, _ = evaluate(sc.data(), random_samples(sc.domain, 1000, 3))
        assert np.all(singular_residual(s.eta2, s.pi2) > 0)

    def test_both_forms_vanish(self):
        assert not is_front(0.0, 0.0)
        assert is_front(1.0, 0.0)


class TestSubharmonicity:
    def test_joukowski_laplacian(self):
        d = data("joukowski")
        s = sample_surface(d, 0.3)
        x0 = float(s.f.trace()) / 2
        assert subharmonicity_check(d, 0.3) / 4 == pytest.approx(s.eta2 * x0, rel=1e-4)

    def test_geodesic_origin(self):
        d = data("zalpha", alpha=1.0)
        x0 = float(sample_surface(d, 0).f.trace()) / 2
        assert subharmonicity_check(d, 0) / 4 == pytest.approx(4 * x0, rel=1e-4)

    def test_nonnegative(self, scenes):
        for sc in scenes.values():
            d = sc.data()
            for z in random_samples(sc.domain, 30, 21):
                try:
                    assert subharmonicity_check(d, z) >= 0
                except (FrameError, ValueError):
                    continue


class TestPseudometricCurvature:
    def test_eta_is_hyperbolic(self, scenes):
        for sc in scenes.values():
            d = sc.data()
            for z in interior_samples(sc.domain, 10, 5):
                assert pseudometric_curvature(d, z, which="eta") == pytest.approx(-1, abs=1e-3)

    def test_pi_matches_K_over_K_plus_1(self):
        d = data("expk", k=4)
        K = sample_surface(d, 0.2).K
        assert pseudometric_curvature(d, 0.2, which="pi") == pytest.approx(K / (K + 1), abs=1e-3)

    def test_pi_near_flat(self):
        # near the puncture of the alpha = 2 front K tends to zero
        d = data("zalpha", alpha=2.0)
        K = sample_surface(d, 0.01).K
        assert abs(K) < 1e-3
        assert abs(pseudometric_curvature(d, 0.01, step=1e-5, which="pi")) < 1e-3

    def test_bad_selector(self):
        with pytest.raises(ValueError):
            pseudometric_curvature(data("expk", k=1), 0.1, which="zeta")

    def test_vanishing_density(self):
        with pytest.raises(ValueError, match="vanishes"):
            pseudometric_curvature(data("zalpha", alpha=1.0), 0.1, which="pi")


class TestSasakian:
    def test_is_I_plus_III_and_positive(self):
        d = data("joukowski")
        S = sasakian_metric(d, 0.4 + 0.1j)
        cf = fundamental_forms(moving_frame(d, 0.4 + 0.1j))
        assert np.allclose(S, cf.I + cf.III, rtol=1e-8)
        assert np.all(np.linalg.eigvalsh(S) > 0)


class TestInvariants:
    def test_weingarten_and_compatibility(self, scenes):
        for sc in scenes.values():
            s, status = evaluate(sc.data(), random_samples(sc.domain, 500, 42))
            good = (status == 0) & ~s.is_singular
            K, H, eta2, pi2 = s.K[good], s.H[good], s.eta2[good], s.pi2[good]
            assert np.max(np.abs((H - 1) - K)) < 1e-9 * max(1.0, np.abs(K).max())
            # both sides vanish identically on the totally geodesic front
            scale = eta2 * np.abs(H) + pi2 * np.abs(K)
            assert np.all(np.abs(eta2 * H - pi2 * K) <= 1e-9 * scale)
            assert np.all(np.where(pi2 < eta2, K <= -1 + 1e-9, K >= -1e-9))

    def test_hopf_holomorphic(self, scenes):
        from hmcfront.geom import gradient

        for sc in scenes.values():
            d = sc.data()

            def q(pts):
                return evaluate(d, pts)[0].Q_dz2

            for z in interior_samples(sc.domain, 10, 1):
                qx, qy = gradient(q, z, 1e-5)
                dbar = abs(0.5 * (qx + 1j * qy))
                assert dbar < 1e-5 * abs(q(np.array([z]))[0]) + 1e-9


class TestCutMismatch:
    R = np.linspace(0.05, 0.95, 16)

    @pytest.mark.parametrize("h", ["z^0.5", "(0.3+0.2i)*z^0.5", "(0.5+0.3i)*z + 0.1*z^2"])
    def test_single_valued_metric(self, h):
        assert cut_mismatch(SceneData.from_strings("z", h), math.pi, self.R) < 1e-6

    def test_jump_detected(self):
        assert cut_mismatch(SceneData.from_strings("z", "0.5*z^0.5 + 0.2i*z"), math.pi, self.R) > 0.5

    def test_all_invalid(self):
        assert math.isnan(cut_mismatch(SceneData.from_strings("z", "3*z"), math.pi, [0.5, 0.9]))

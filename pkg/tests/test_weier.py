import numpy as np
import pytest

from hmcfront.lorentz import Herm2, congruence, herm_inner, is_in_H3
from hmcfront.sampler import random_samples
from hmcfront.weier import (
    FrameError,
    SceneData,
    Status,
    ab_pair,
    check_structure,
    frame_log_derivative,
    frames,
    gauss_map_distance,
    immerse,
    immerse_grid,
    matrix_H,
    matrix_Htilde,
    moving_frame,
    theta_from_ab,
    wronskian_residual,
)


def scene(G, h):
    return SceneData.from_strings(G, h)


GALLERY_DATA = [("z", "z"), ("z", "z^2"), ("z", "z^0.5"), ("exp(z)", "z"), ("exp(4*z)", "z"), ("z + 1/z", "z")]
POINTS = [0.3 + 0.2j, -0.5 + 0.1j, 0.05 - 0.6j, 0.7j]


class TestMovingFrame:
    def test_totally_geodesic_origin(self):
        fr = moving_frame(scene("z", "z"), 0)
        assert abs(fr.Gframe.det() - 1) < 1e-15
        assert fr.theta_dz == 0

    def test_exponential_theta(self):
        assert moving_frame(scene("exp(4*z)", "z"), 0.2).theta_dz == pytest.approx(4, rel=1e-12)

    def test_square_det(self):
        assert abs(moving_frame(scene("z", "z^2"), 0.5).Gframe.det() - 1) < 1e-10

    @pytest.mark.parametrize("alpha", [2.0, 0.5, 3.0])
    @pytest.mark.parametrize("z", [0.5, 0.3 + 0.4j, -0.2 + 0.1j])
    def test_power_theta_closed_form(self, alpha, z):
        fr = moving_frame(scene("z", f"z^{alpha}"), z)
        want = (1 - alpha ** 2) / (4 * alpha) * z ** (-alpha - 1)
        assert fr.theta_dz == pytest.approx(want, rel=1e-9)

    @pytest.mark.parametrize("z", POINTS)
    def test_joukowski_theta_closed_form(self, z):
        fr = moving_frame(scene("z + 1/z", "z"), z)
        assert fr.theta_dz == pytest.approx(3 / (z * z - 1) ** 2, rel=1e-9)

    @pytest.mark.parametrize("G,h", GALLERY_DATA)
    def test_lambda(self, G, h):
        fr = moving_frame(scene(G, h), 0.3 + 0.2j)
        assert fr.Lambda * (1 - abs(fr.h) ** 2) == pytest.approx(2, abs=1e-12)

    def test_critical_h(self):
        with pytest.raises(FrameError, match="dh/dz = 0.*z=0j"):
            moving_frame(scene("z", "z^2"), 0)

    def test_branch_point_of_G(self):
        with pytest.raises(FrameError, match="dG/dh = 0"):
            moving_frame(scene("z^2", "z"), 0)

    def test_outside_disk(self):
        with pytest.raises(FrameError, match=r"\|h\(z\)\| >= 1"):
            moving_frame(scene("z", "1.5*z"), 0.8)

    def test_pole(self):
        with pytest.raises(FrameError, match="not finite"):
            moving_frame(scene("z + 1/z", "z"), 0)

    def test_grid_status(self):
        z = np.array([0.5, 0.0, 0.99 + 0.5j])
        _, status = frames(scene("z", "z^2"), z)
        assert list(status) == [Status.OK, Status.CRITICAL_H, Status.OUTSIDE_DISK]


class TestMatrices:
    def test_origin(self):
        assert np.array_equal(matrix_H(0j).matrix(), np.eye(2))
        assert np.array_equal(matrix_Htilde(0j).matrix(), np.diag([1, -1]))

    def test_half(self):
        assert abs(matrix_H(0.5).det() - 1) < 1e-12

    def test_random_disk(self):
        rng = np.random.default_rng(3)
        h = np.sqrt(rng.uniform(0, 0.999, 200)) * np.exp(2j * np.pi * rng.uniform(size=200))
        Hm, Ht = matrix_H(h), matrix_Htilde(h)
        assert np.all(np.abs(Hm.det() - 1) < 1e-9) and np.all(Hm.trace() > 0)
        assert np.all(np.abs(Ht.det() + 1) < 1e-12)
        assert np.all(np.abs(herm_inner(Hm, Ht)) < 1e-9)

    @pytest.mark.parametrize("h", [1.0, 1.2j])
    def test_outside_disk(self, h):
        with pytest.raises(ValueError):
            matrix_H(h)
        with pytest.raises(ValueError):
            matrix_Htilde(h)


class TestImmerse:
    def test_origin_on_hyperboloid(self):
        f, _ = immerse(moving_frame(scene("z", "z"), 0))
        assert herm_inner(f, f) == pytest.approx(-1, abs=1e-15)

    @pytest.mark.parametrize("G,h", GALLERY_DATA)
    def test_invariants(self, G, h):
        data = scene(G, h)
        z = random_samples(_domain(h), 500, 11)
        f, nu, _, status = immerse_grid(data, z)
        ok = status == Status.OK
        assert ok.mean() > 0.9
        f, nu = f.take(ok), nu.take(ok)
        assert np.all(is_in_H3(f, tol=1e-8))
        assert np.max(np.abs(herm_inner(nu, nu) - 1)) < 1e-8
        assert np.max(np.abs(herm_inner(f, nu))) < 1e-8

    @pytest.mark.parametrize("G,h", GALLERY_DATA)
    def test_branch_independence(self, G, h):
        data = scene(G, h)
        for z in random_samples(_domain(h), 100, 5):
            fr = moving_frame(data, z)
            F = _extended(fr.Gframe)
            Hm = matrix_H(np.clongdouble(fr.h))
            f1, f2 = congruence(F, Hm), congruence(-F, Hm)
            assert float(abs(f1.a - f2.a) + abs(f1.b - f2.b) + abs(f1.d - f2.d)) <= 1e-10

    def test_grid_marks_invalid_with_nan(self):
        f, _, _, status = immerse_grid(scene("z", "z^2"), np.array([0.0, 0.5]))
        assert status[0] == Status.CRITICAL_H and np.isnan(float(f.a[0]))


class TestStructureEquation:
    def test_exponential(self):
        assert check_structure(scene("exp(z)", "z"), 0.1, 1e-5) < 1e-6

    def test_joukowski(self):
        assert check_structure(scene("z + 1/z", "z"), 0.3 + 0.2j) < 1e-6

    def test_geodesic_top_right_entry_vanishes(self):
        L = frame_log_derivative(scene("z", "z"), 0.2 - 0.1j)
        assert abs(L.q) < 1e-8

    def test_stencil_failure(self):
        with pytest.raises(FrameError):
            check_structure(scene("exp(z)", "z"), 1 - 1e-5)


class TestABPair:
    def test_identity_data(self):
        _, B, _ = ab_pair(moving_frame(scene("z", "z"), 0.3))
        assert B * B == pytest.approx(-1)

    def test_gauss_map_quotient(self):
        fr = moving_frame(scene("exp(z)", "z"), 0.4 + 0.1j)
        A, B, _ = ab_pair(fr)
        assert A / B == pytest.approx(fr.G_h.c0)

    def test_theta_cross_check_joukowski(self):
        data = scene("z + 1/z", "z")
        for z in random_samples(_domain("z", annulus=True), 50, 2):
            assert abs(theta_from_ab(data, z) - moving_frame(data, z).theta_dz) < 1e-6

    @pytest.mark.parametrize("G,h", GALLERY_DATA)
    def test_wronskian(self, G, h):
        data = scene(G, h)
        for z in POINTS:
            assert wronskian_residual(data, z) < 1e-8


class TestGaussMap:
    @pytest.mark.parametrize("G,h", GALLERY_DATA)
    def test_ideal_point_is_G(self, G, h):
        data = scene(G, h)
        for z in random_samples(_domain(h), 100, 9):
            assert gauss_map_distance(moving_frame(data, z)) < 1e-7


def _extended(F):
    from hmcfront.lorentz import Mat2C

    return Mat2C(*(np.clongdouble(v) for v in (F.p, F.q, F.r, F.s)))


def _domain(h, annulus=False):
    import math

    from hmcfront.sampler import DomainSpec

    if annulus:
        return DomainSpec("annulus", 0.05, 1.0)
    if h == "z^0.5":
        return DomainSpec("sector", 0.0, 1.0, theta_min=-math.pi + 1e-3, theta_max=math.pi - 1e-3)
    return DomainSpec("punctured_disk") if h != "z" else DomainSpec()

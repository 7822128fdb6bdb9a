"""Frames and immersions built from the Weierstrass-type data (G, h).

G is the hyperbolic Gauss map and h a holomorphic map into the unit disk
whose pullback of the Poincare metric is |eta|^2.  From the h-derivatives
of G we form the SL(2, C) frame

    F = (-G_h)^(-3/2) [[-G G_h, G G_hh / 2 - G_h^2],
                       [-G_h,   G_hh / 2          ]]

and the surface f = F Hm F*, unit normal nu = F Ht F*, where Hm and Ht
depend on h alone (see :func:`matrix_H`, :func:`matrix_Htilde`).

Everything is vectorized: :func:`frames` evaluates whole grids and marks
bad samples in a status array, while :func:`moving_frame` is the scalar
entry point that raises :class:`FrameError` instead.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional

import numpy as np

from .cjet import ComplexJet, as_complex_array, Expr, eval_jet_array, parse_expr, reparam_in_h, schwarzian
from .lorentz import Herm2, Mat2C, congruence

if TYPE_CHECKING:
    from .sampler import DomainSpec


class Status(enum.IntEnum):
    OK = 0
    OUTSIDE_DISK = 1  # |h| >= 1
    CRITICAL_H = 2  # dh/dz = 0
    BRANCH_G = 3  # G_h = 0
    OVERFLOW = 4  # pole of G or non-finite frame


class FrameError(ValueError):
    def __init__(self, status: Status, z: complex):
        messages = {
            Status.OUTSIDE_DISK: "|h(z)| >= 1, h must map into the unit disk",
            Status.CRITICAL_H: "dh/dz = 0, h is critical",
            Status.BRANCH_G: "dG/dh = 0, branch point of G",
            Status.OVERFLOW: "G or its derivatives are not finite (pole)",
        }
        super().__init__(f"{messages[status]} at z={z}")
        self.status = status
        self.z = z


@dataclass(frozen=True)
class SceneData:
    G_expr: Expr
    h_expr: Expr
    domain: Optional["DomainSpec"] = None

    @classmethod
    def from_strings(cls, G: str, h: str, domain: Optional["DomainSpec"] = None) -> "SceneData":
        return cls(parse_expr(G), parse_expr(h), domain)


@dataclass(frozen=True)
class FrameData:
    z: complex
    h: complex
    dh_dz: complex
    Gframe: Mat2C
    theta_dz: complex
    Lambda: float
    G_h: ComplexJet  # G and its derivatives with respect to h

    def take(self, index) -> "FrameData":
        pick = lambda v: np.asarray(v)[index]  # noqa: E731
        F = self.Gframe
        return FrameData(
            pick(self.z), pick(self.h), pick(self.dh_dz),
            Mat2C(pick(F.p), pick(F.q), pick(F.r), pick(F.s)),
            pick(self.theta_dz), pick(self.Lambda),
            ComplexJet(*(pick(c) for c in self.G_h.as_tuple())),
        )


def frames(scene: SceneData, z) -> tuple[FrameData, np.ndarray]:
    """Frames on an array of points, with a per-sample :class:`Status` array.

    Entries of invalid samples are unspecified (often nan).  Extended-precision
    input gives extended-precision frames.
    """
    z = as_complex_array(z)
    Gz = eval_jet_array(scene.G_expr, z)
    hz = eval_jet_array(scene.h_expr, z)
    with np.errstate(all="ignore"):
        h = hz.c0 * np.ones_like(z)
        h1 = hz.c1 * np.ones_like(z)
        Gh = reparam_in_h(
            ComplexJet(*(c * np.ones_like(z) for c in Gz.as_tuple())),
            ComplexJet(h, h1, hz.c2 * np.ones_like(z), hz.c3 * np.ones_like(z)),
        )
        G, g1, g2 = Gh.c0, Gh.c1, Gh.c2
        scale = np.power(-g1, -1.5)
        F = Mat2C(-G * g1, G * g2 / 2 - g1 * g1, -g1, g2 / 2).scale(scale)
        theta_dz = -0.5 * schwarzian(Gh) * h1
        Lambda = 2 / (1 - np.abs(h) ** 2)

    status = np.full(z.shape, Status.OK, dtype=np.int8)
    finite = lambda *vs: np.logical_and.reduce([np.isfinite(v) for v in vs])  # noqa: E731
    overflow = ~finite(G, g1, g2, Gh.c3, F.p, F.q, F.r, F.s, theta_dz)
    status[overflow] = Status.OVERFLOW
    status[finite(g1) & (g1 == 0)] = Status.BRANCH_G
    status[~finite(h1) | (h1 == 0)] = Status.CRITICAL_H
    status[~finite(h) | (np.abs(h) >= 1)] = Status.OUTSIDE_DISK
    return FrameData(z, h, h1, F, theta_dz, Lambda, Gh), status


def moving_frame(scene: SceneData, z: complex) -> FrameData:
    """Frame at a single point; raises :class:`FrameError` on bad input."""
    z = complex(z)
    data, status = frames(scene, np.array([z]))
    if status[0] != Status.OK:
        raise FrameError(Status(int(status[0])), z)
    return _scalarize(data.take(0))


def _scalarize(fr: FrameData) -> FrameData:
    c = complex
    F = fr.Gframe
    return FrameData(
        c(fr.z), c(fr.h), c(fr.dh_dz), Mat2C(c(F.p), c(F.q), c(F.r), c(F.s)),
        c(fr.theta_dz), float(fr.Lambda), ComplexJet(*(c(v) for v in fr.G_h.as_tuple())),
    )


def _check_disk(h):
    if np.any(np.abs(h) >= 1):
        raise ValueError("|h| must be < 1")


def matrix_H(h) -> Herm2:
    _check_disk(h)
    m = np.abs(h) ** 2
    return Herm2((1 + m) / (1 - m), np.conj(h), 1 - m)


def matrix_Htilde(h) -> Herm2:
    _check_disk(h)
    m = np.abs(h) ** 2
    return Herm2(np.ones_like(m), -np.conj(h), -1 + m)


def _extended(F: Mat2C, h) -> tuple[Mat2C, np.ndarray]:
    # far from the origin of H^3 the entries of f grow like x0 and det f
    # loses eps * x0^2 to cancellation; long double keeps it below 1e-11
    up = lambda v: np.asarray(v, dtype=np.clongdouble)  # noqa: E731
    return Mat2C(up(F.p), up(F.q), up(F.r), up(F.s)), up(h)


def immerse(frame: FrameData) -> tuple[Herm2, Herm2]:
    """Surface point f and unit normal nu (extended-precision entries)."""
    F, h = _extended(frame.Gframe, frame.h)
    return congruence(F, matrix_H(h)), congruence(F, matrix_Htilde(h))


def immerse_grid(scene: SceneData, z) -> tuple[Herm2, Herm2, FrameData, np.ndarray]:
    """Vectorized :func:`immerse`; invalid samples carry nan."""
    data, status = frames(scene, z)
    ok = status == Status.OK
    F, h = _extended(data.Gframe, np.where(ok, data.h, 0))
    with np.errstate(all="ignore"):
        f = congruence(F, matrix_H(h))
        nu = congruence(F, matrix_Htilde(h))
    nan = np.where(ok, 1.0, np.nan)
    f = Herm2(f.a * nan, f.b * nan, f.d * nan)
    nu = Herm2(nu.a * nan, nu.b * nan, nu.d * nan)
    return f, nu, data, status


def point(scene: SceneData, z: complex) -> tuple[Herm2, Herm2]:
    return immerse(moving_frame(scene, z))


# ---------------------------------------------------------------------------
# finite-difference checks

# 8th-order central first derivative; the frame entries blow up like
# negative powers of the distance to a pole of theta, and a low-order stencil
# at step 1e-5 is truncation-dominated within ~1e-2 of such a point
_D1 = (
    (-4, 1 / 280), (-3, -4 / 105), (-2, 1 / 5), (-1, -4 / 5),
    (1, 4 / 5), (2, -1 / 5), (3, 4 / 105), (4, -1 / 280),
)


def _stencil(scene: SceneData, z: complex, step: float) -> FrameData:
    """Frames at z and at z + k*step for the stencil offsets, in long double.

    Near poles of theta the frame entries are large and a float64 difference
    quotient loses eps * |F|^2 / step; extended precision keeps the finite
    differences accurate to well below the truncation error.
    """
    offsets = np.array([0] + [k for k, _ in _D1], dtype=np.longdouble)
    pts = np.clongdouble(complex(z)) + offsets * np.longdouble(step)
    data, status = frames(scene, pts)
    bad = np.flatnonzero(status != Status.OK)
    if bad.size:
        raise FrameError(Status(int(status[bad[0]])), complex(pts[bad[0]]))
    return data


def _aligned(M: np.ndarray) -> np.ndarray:
    """Flip the sign of stencil entries to match entry 0 (principal branch jumps).

    ``M`` has the sample index on its last axis.
    """
    ref = M[..., :1]
    flip = np.sum(np.abs(M + ref) ** 2, axis=tuple(range(M.ndim - 1))) < np.sum(
        np.abs(M - ref) ** 2, axis=tuple(range(M.ndim - 1))
    )
    return np.where(flip, -M, M)


def _diff(M: np.ndarray, step: float) -> np.ndarray:
    return sum(w * M[..., i + 1] for i, (_, w) in enumerate(_D1)) / np.longdouble(step)


def _log_derivative(data: FrameData, step: float) -> Mat2C:
    F = data.Gframe
    M = _aligned(np.array([F.p, F.q, F.r, F.s]))
    return Mat2C(*M[:, 0]).inverse() @ Mat2C(*_diff(M, step))


def frame_log_derivative(scene: SceneData, z: complex, step: float = 1e-5) -> Mat2C:
    """F^-1 dF/dz by central differences."""
    L = _log_derivative(_stencil(scene, z, step), step)
    return Mat2C(complex(L.p), complex(L.q), complex(L.r), complex(L.s))


def check_structure(scene: SceneData, z: complex, step: float = 1e-5) -> float:
    """Norm of F^-1 dF - [[0, theta], [dh, 0]] per unit dz."""
    data = _stencil(scene, z, step)
    zero = np.clongdouble(0)
    expected = Mat2C(zero, data.theta_dz[0], data.dh_dz[0], zero)
    return float((_log_derivative(data, step) - expected).frobenius())


def ab_pair(frame: FrameData) -> tuple[complex, complex, complex]:
    """Holomorphic lift (A, B) of the Gauss map G = A/B, and dB/dh.

    B is the principal square root of -1/G_h, so A dB - B dA = dh.
    """
    G, g1, g2 = frame.G_h.c0, frame.G_h.c1, frame.G_h.c2
    if np.any(g1 == 0):
        raise FrameError(Status.BRANCH_G, frame.z)
    B = np.sqrt(-1 / g1)
    A = G * B
    dB_dh = 0.5 / B * g2 / g1 ** 2
    return A, B, dB_dh


def _ab_stencil(scene: SceneData, z: complex, step: float):
    data = _stencil(scene, z, step)
    A, B, dB = ab_pair(data)
    return data, _aligned(np.array([A, B, dB]))


def theta_from_ab(scene: SceneData, z: complex, step: float = 1e-5) -> complex:
    """theta/dz as (1/B) d(dB/dh)/dz, differentiated numerically."""
    _, (A, B, dB) = _ab_stencil(scene, z, step)
    return complex(_diff(dB, step) / B[0])


def wronskian_residual(scene: SceneData, z: complex, step: float = 1e-5) -> float:
    """|A B_z - A_z B - h_z| with the z-derivatives taken numerically."""
    data, (A, B, _) = _ab_stencil(scene, z, step)
    A_z, B_z = _diff(A, step), _diff(B, step)
    return float(abs(A[0] * B_z - A_z * B[0] - data.dh_dz[0]))


def gauss_map_distance(frame: FrameData) -> float:
    """Chordal distance between the ideal point [f + nu] and G."""
    f, nu = immerse(frame)
    P = f + nu
    if abs(P.a) >= abs(P.d):
        u = (P.a, np.conj(P.b))
    else:
        u = (P.b, P.d)
    G = frame.G_h.c0
    v = (G, 1.0)
    num = abs(u[0] * v[1] - u[1] * v[0])
    den = np.hypot(abs(u[0]), abs(u[1])) * np.hypot(abs(v[0]), abs(v[1]))
    return float(num / den)

"""Pointwise geometry of HMC-1 fronts.

Everything is expressed through two conformal densities relative to |dz|^2:

    eta2 = 4 |h_z|^2 / (1 - |h|^2)^2      (pullback of the Poincare metric)
    pi2  = (1 - |h|^2)^2 |theta_z|^2      (third fundamental form)

and the holomorphic quadratic differential Q = 2 theta_z h_z dz^2.  The
Gaussian and mean curvatures follow as K = eta2 / (pi2 - eta2) and
H = pi2 / (pi2 - eta2); the front is singular where eta2 = pi2.

Quadratic forms are returned as symmetric (..., 2, 2) arrays in (dx, dy),
z = x + iy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .lorentz import Herm2, vec4_from_herm
from .weier import FrameData, SceneData, Status, immerse_grid, moving_frame

SINGULAR_TOL = 1e-9


class FundamentalForms(NamedTuple):
    I: np.ndarray
    II: np.ndarray
    III: np.ndarray


@dataclass(frozen=True)
class SurfaceSample:
    z: complex
    f: Herm2
    nu: Herm2
    eta2: float
    pi2: float
    K: float
    H: float
    Q_dz2: complex
    is_front_ok: bool
    is_singular: bool
    valid: bool


def densities(frame: FrameData) -> tuple:
    m = 1 - np.abs(frame.h) ** 2
    eta2 = 4 * np.abs(frame.dh_dz) ** 2 / m ** 2
    pi2 = m ** 2 * np.abs(frame.theta_dz) ** 2
    return eta2, pi2


def is_singular(eta2, pi2, tol: float = SINGULAR_TOL):
    return np.abs(pi2 - eta2) <= tol * (pi2 + eta2)


def curvatures(eta2, pi2, singular_tol: float = SINGULAR_TOL) -> tuple:
    """(K, H); nan where the densities agree to ``singular_tol``."""
    eta2 = np.asarray(eta2, dtype=float)
    pi2 = np.asarray(pi2, dtype=float)
    sing = is_singular(eta2, pi2, singular_tol)
    with np.errstate(all="ignore"):
        denom = np.where(sing, np.nan, pi2 - eta2)
        K, H = eta2 / denom, pi2 / denom
    if K.ndim == 0:
        return float(K), float(H)
    return K, H


def _re_dz2(c) -> np.ndarray:
    """Matrix of Re(c dz^2) as a form in (dx, dy)."""
    c = np.asarray(c, dtype=complex)
    out = np.empty(c.shape + (2, 2))
    out[..., 0, 0] = c.real
    out[..., 1, 1] = -c.real
    out[..., 0, 1] = out[..., 1, 0] = -c.imag
    return out


def _conformal(density) -> np.ndarray:
    density = np.asarray(density, dtype=float)
    return density[..., None, None] * np.eye(2)


def hopf_Q(frame: FrameData):
    return 2 * frame.theta_dz * frame.dh_dz


def fundamental_forms(frame: FrameData) -> FundamentalForms:
    eta2, pi2 = densities(frame)
    Q = hopf_Q(frame)
    first = _conformal(eta2 + pi2) + _re_dz2(2 * Q)
    second = _conformal(pi2) + _re_dz2(Q)
    third = _conformal(pi2)
    return FundamentalForms(first, second, third)


def principal_curvatures(I: np.ndarray, II: np.ndarray, tol: float = 1e-14) -> tuple:
    """Eigenvalues (k1 <= k2) of the shape operator I^-1 II."""
    I = np.asarray(I, dtype=float)
    II = np.asarray(II, dtype=float)
    detI = I[..., 0, 0] * I[..., 1, 1] - I[..., 0, 1] ** 2
    scale = (I[..., 0, 0] + I[..., 1, 1]) ** 2
    if np.any(detI <= tol * scale):
        raise ValueError("first fundamental form is degenerate (singular point)")
    detII = II[..., 0, 0] * II[..., 1, 1] - II[..., 0, 1] ** 2
    mixed = I[..., 0, 0] * II[..., 1, 1] + I[..., 1, 1] * II[..., 0, 0] - 2 * I[..., 0, 1] * II[..., 0, 1]
    disc = np.sqrt(np.maximum(mixed ** 2 - 4 * detI * detII, 0.0))
    # avoid cancellation: the larger-magnitude root first, then Vieta
    big = (mixed + np.copysign(disc, mixed)) / (2 * detI)
    with np.errstate(all="ignore"):
        small = np.where(big != 0, detII / (detI * big), 0.0)
    k1, k2 = np.minimum(big, small), np.maximum(big, small)
    if np.ndim(k1) == 0:
        return float(k1), float(k2)
    return k1, k2


def is_front(eta2, pi2, tol: float = 1e-12):
    return eta2 + pi2 > tol


def singular_residual(eta2, pi2):
    return eta2 - pi2


def relative_residual(eta2, pi2):
    """(eta2 - pi2) / (eta2 + pi2): bounded, same zero set as the residual."""
    with np.errstate(all="ignore"):
        return (eta2 - pi2) / (eta2 + pi2)


# ---------------------------------------------------------------------------
# sampling


def evaluate(scene: SceneData, z, singular_tol: float = SINGULAR_TOL) -> tuple[SurfaceSample, np.ndarray]:
    """Surface samples on an array of points, plus the frame status array."""
    f, nu, data, status = immerse_grid(scene, z)
    ok = status == Status.OK
    with np.errstate(all="ignore"):
        eta2, pi2 = densities(data)
    eta2 = np.where(ok, eta2, np.nan)
    pi2 = np.where(ok, pi2, np.nan)
    sing = ok & is_singular(eta2, pi2, singular_tol)
    K, H = curvatures(np.where(ok, eta2, 0.0), np.where(ok, pi2, 0.0), singular_tol)
    K = np.where(ok, K, np.nan)
    H = np.where(ok, H, np.nan)
    Q = np.where(ok, hopf_Q(data), np.nan)
    sample = SurfaceSample(
        z=data.z, f=f, nu=nu, eta2=eta2, pi2=pi2, K=K, H=H, Q_dz2=Q,
        is_front_ok=ok & is_front(np.nan_to_num(eta2), np.nan_to_num(pi2)),
        is_singular=sing, valid=ok,
    )
    return sample, status


def sample_surface(scene: SceneData, z: complex, singular_tol: float = SINGULAR_TOL) -> SurfaceSample:
    """Single-point sample; raises :class:`~hmcfront.weier.FrameError` on invalid z."""
    moving_frame(scene, z)
    s, _ = evaluate(scene, np.array([complex(z)]), singular_tol)
    f = s.f.take(0)
    nu = s.nu.take(0)
    return SurfaceSample(
        z=complex(z), f=f, nu=nu,
        eta2=float(s.eta2[0]), pi2=float(s.pi2[0]), K=float(s.K[0]), H=float(s.H[0]),
        Q_dz2=complex(s.Q_dz2[0]), is_front_ok=bool(s.is_front_ok[0]),
        is_singular=bool(s.is_singular[0]), valid=True,
    )


# ---------------------------------------------------------------------------
# finite-difference machinery

# 4th-order central first derivative
_D1 = ((-2, 1 / 12), (-1, -8 / 12), (1, 8 / 12), (2, -1 / 12))


def _stencil_values(func: Callable, z: complex, offsets) -> np.ndarray:
    # extended-precision sample points: the difference quotients cancel
    # leading digits, and the pipeline evaluates clongdouble input natively
    offsets = np.array(offsets, dtype=np.clongdouble)
    pts = np.clongdouble(complex(z)) + offsets
    return np.asarray(func(pts))


def gradient(func: Callable, z: complex, step: float) -> tuple[np.ndarray, np.ndarray]:
    """(d/dx, d/dy) of a vectorized function of z, 4th-order central."""
    offsets = [k * step for k, _ in _D1] + [1j * k * step for k, _ in _D1]
    vals = _stencil_values(func, z, offsets)
    w = np.array([c for _, c in _D1])
    wshape = (4,) + (1,) * (vals.ndim - 1)
    dx = np.sum(w.reshape(wshape) * vals[:4], axis=0) / step
    dy = np.sum(w.reshape(wshape) * vals[4:], axis=0) / step
    return dx, dy


def laplacian(func: Callable, z: complex, step: float) -> float:
    """Five-point Laplacian with one Richardson extrapolation (h, 2h)."""
    def five(h):
        vals = _stencil_values(func, z, [0, h, -h, 1j * h, -1j * h])
        return (vals[1] + vals[2] + vals[3] + vals[4] - 4 * vals[0]) / h ** 2

    return (4 * five(step) - five(2 * step)) / 3


def _as_coords(X: Herm2) -> np.ndarray:
    x = vec4_from_herm(X)
    return np.stack(np.broadcast_arrays(x.x0, x.x1, x.x2, x.x3), -1)


def _minkowski(u: np.ndarray, v: np.ndarray):
    return -u[..., 0] * v[..., 0] + np.sum(u[..., 1:] * v[..., 1:], axis=-1)


def forms_from_point_map(point_map: Callable, z: complex, step: float = 1e-5) -> FundamentalForms:
    """I, II, III of a front from numerical derivatives of its (f, nu) map.

    ``point_map`` takes an array of z and returns (f, nu) as Herm2 arrays.
    Uses II = -<df, dnu>.
    """
    def coords(pts):
        f, nu = point_map(pts)
        return np.concatenate([_as_coords(f), _as_coords(nu)], axis=-1)

    dx, dy = gradient(coords, z, step)
    fx, fy, nx, ny = dx[:4], dy[:4], dx[4:], dy[4:]

    def form(u1, u2, v1, v2, sign=1.0):
        a = sign * _minkowski(u1, v1)
        b = sign * 0.5 * (_minkowski(u1, v2) + _minkowski(u2, v1))
        c = sign * _minkowski(u2, v2)
        return np.array([[a, b], [b, c]])

    return FundamentalForms(*(
        np.asarray(m, dtype=np.float64)
        for m in (form(fx, fy, fx, fy), form(fx, fy, nx, ny, -1.0), form(nx, ny, nx, ny))
    ))


def scene_point_map(scene: SceneData) -> Callable:
    def point_map(pts):
        f, nu, _, status = immerse_grid(scene, pts)
        if np.any(status != Status.OK):
            raise ValueError("finite-difference stencil leaves the valid domain")
        return f, nu

    return point_map


def fd_forms(scene: SceneData, z: complex, step: float = 1e-5) -> FundamentalForms:
    return forms_from_point_map(scene_point_map(scene), z, step)


def curvatures_from_forms(forms: FundamentalForms) -> tuple[float, float]:
    """(K, H) from I and II via the shape operator, K = -1 + det S."""
    S = np.linalg.solve(forms.I, forms.II)
    return float(np.linalg.det(S) - 1), float(np.trace(S) / 2)


def subharmonicity_check(scene: SceneData, z: complex, step: float = 1e-3) -> float:
    """Numerical Laplacian of tr(f + nu); nonnegative on any HMC-1 front.

    Analytically it equals 4 * eta2 * x0, with x0 = tr(f) / 2.
    """
    point_map = scene_point_map(scene)

    def trace(pts):
        f, nu = point_map(pts)
        return (f + nu).trace()

    return float(laplacian(trace, z, step))


def pseudometric_curvature(scene: SceneData, z: complex, step: float = 1e-3, which: str = "eta") -> float:
    """Gauss curvature -(1/2 lam) Laplacian(log lam) of lam |dz|^2.

    ``which`` selects lam = eta2 (always -1) or lam = pi2 (equals K/(K+1)).
    """
    if which not in ("eta", "pi"):
        raise ValueError(f"which must be 'eta' or 'pi', not {which!r}")
    index = 0 if which == "eta" else 1

    def log_density(pts):
        s, status = evaluate(scene, pts)
        if np.any(status != Status.OK):
            raise ValueError("finite-difference stencil leaves the valid domain")
        lam = (s.eta2, s.pi2)[index]
        if np.any(lam <= 0):
            raise ValueError(f"density |{which}|^2 vanishes on the stencil")
        return np.log(lam)

    lam0 = np.exp(log_density(np.array([complex(z)]))[0])
    return float(-laplacian(log_density, z, step) / (2 * lam0))


def sasakian_metric(scene: SceneData, z: complex, step: float = 1e-5) -> np.ndarray:
    """|df|^2 + |dnu|^2, the pulled-back Sasakian metric (diagnostic only)."""
    forms = fd_forms(scene, z, step)
    return forms.I + forms.III


def cut_mismatch(scene: SceneData, cut_angle: float, radii, delta: float = 1e-9) -> float:
    """Largest relative jump of eta2 across the ray arg z = ``cut_angle``.

    A multivalued h is sampled on one sheet; the pulled-back metric must
    still agree on both sides of the cut for the front to be well defined.
    Radii where either side is invalid are skipped; nan when none remain.
    """
    r = np.asarray(radii, dtype=float)
    lo, st_lo = evaluate(scene, r * np.exp(1j * (cut_angle - delta)))
    hi, st_hi = evaluate(scene, r * np.exp(1j * (cut_angle + delta)))
    ok = (st_lo == Status.OK) & (st_hi == Status.OK)
    if not ok.any():
        return float("nan")
    a, b = lo.eta2[ok], hi.eta2[ok]
    return float(np.max(np.abs(a - b) / (a + b)))

"""Parallel families f_t = cosh(t) f + sinh(t) nu and Weingarten classes.

A surface with H - 1 = lam K has parallel surfaces with
H_t - 1 = lam_t K_t, where 2 lam_t - 1 = (2 lam - 1) e^(2t).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .geom import curvatures_from_forms, evaluate, forms_from_point_map
from .lorentz import Herm2
from .weier import SceneData, Status, immerse_grid

DENOM_TOL = 1e-10


class WeingartenClass(enum.Enum):
    W0 = "W0"  # flat
    W1 = "W1"  # lam < 1/2
    W2 = "W2"  # lam = 1/2
    W3 = "W3"  # lam > 1/2


class DistinguishedKind(enum.Enum):
    CMC1 = "CMC1"
    HMC1 = "HMC1"


@dataclass(frozen=True)
class WeingartenTag:
    lam: float
    cls: WeingartenClass

    @classmethod
    def of(cls, lam: float) -> "WeingartenTag":
        return cls(lam, classify(lam))


def classify(lam: float, flat: bool = False) -> WeingartenClass:
    if flat:
        return WeingartenClass.W0
    if lam < 0.5:
        return WeingartenClass.W1
    if lam == 0.5:
        return WeingartenClass.W2
    return WeingartenClass.W3


@dataclass(frozen=True)
class ParallelSample:
    t: float
    f_t: Herm2
    nu_t: Herm2
    K_t: float
    H_t: float
    lambda_t: float


class SingularParallel(ArithmeticError):
    """f_t fails to be an immersion at this point."""


def parallel_point(f: Herm2, nu: Herm2, t: float) -> tuple[Herm2, Herm2]:
    c, s = math.cosh(t), math.sinh(t)
    return f.scale(c) + nu.scale(s), f.scale(s) + nu.scale(c)


def _denominator(K, H, t):
    c, s = np.cosh(t), np.sinh(t)
    return K * s * s - 2 * H * c * s + c * c + s * s


def parallel_curvatures(K: float, H: float, t: float) -> tuple[float, float]:
    """Curvatures of the parallel surface at distance ``t``."""
    denom = _denominator(K, H, t)
    if abs(denom) < DENOM_TOL * (1 + abs(K) + abs(H)):
        raise SingularParallel(f"parallel surface at t={t} is singular here (K={K}, H={H})")
    c, s = math.cosh(t), math.sinh(t)
    K_t = K / denom
    H_t = (H * (c * c + s * s) - (2 + K) * c * s) / denom
    return K_t, H_t


def parallel_curvatures_array(K, H, t: float):
    """Vectorized form; nan where f_t is singular."""
    K = np.asarray(K, dtype=float)
    H = np.asarray(H, dtype=float)
    denom = _denominator(K, H, t)
    bad = np.abs(denom) < DENOM_TOL * (1 + np.abs(K) + np.abs(H))
    c, s = np.cosh(t), np.sinh(t)
    with np.errstate(all="ignore"):
        denom = np.where(bad, np.nan, denom)
        return K / denom, (H * (c * c + s * s) - (2 + K) * c * s) / denom


def lambda_t(lam: float, t: float) -> float:
    return ((2 * lam - 1) * math.exp(2 * t) + 1) / 2


def solve_distinguished(lam: float) -> tuple[float, DistinguishedKind]:
    """Distance to the unique CMC-1 (lam < 1/2) or HMC-1 (lam > 1/2) member."""
    if lam == 0.5:
        raise ValueError("lam = 1/2 is invariant under parallel transport; no distinguished member")
    if lam < 0.5:
        return 0.5 * math.log(1 / (1 - 2 * lam)), DistinguishedKind.CMC1
    return 0.5 * math.log(1 / (2 * lam - 1)), DistinguishedKind.HMC1


def curvature_bound_ok(K, lam: float, tol: float = 1e-9):
    """The admissible-curvature region of a lam-Weingarten surface."""
    K = np.asarray(K, dtype=float)
    if lam == 0.5:
        return np.ones_like(K, dtype=bool)
    if lam == 0:
        return K <= tol
    edge = (1 - 2 * lam) / lam ** 2
    if lam < 0.5:
        return (K <= tol) | (K >= edge - tol * max(1.0, abs(edge)))
    return (K <= edge + tol * max(1.0, abs(edge))) | (K >= -tol)


@dataclass
class FamilyReport:
    t: float
    lambda_t: float
    samples: int
    singular: int
    max_residual: float
    bound_violations: int
    residuals: np.ndarray = field(repr=False, default=None)


def transported(scene: SceneData, z, t: float) -> tuple[ParallelSample, np.ndarray]:
    """Parallel samples on an array of z, curvatures from the closed formulas."""
    s, status = evaluate(scene, z)
    f_t, nu_t = parallel_point(s.f, s.nu, t)
    K_t, H_t = parallel_curvatures_array(s.K, s.H, t)
    lam = lambda_t(1.0, t)
    return ParallelSample(t, f_t, nu_t, K_t, H_t, lam), status


def verify_weingarten_family(scene: SceneData, t: float, samples) -> FamilyReport:
    """Check H_t - 1 = lam_t K_t and the curvature bound on an HMC-1 seed."""
    z = np.asarray(samples, dtype=complex)
    ps, status = transported(scene, z, t)
    finite = np.isfinite(ps.K_t) & np.isfinite(ps.H_t) & (status == Status.OK)
    resid = np.abs((ps.H_t - 1) - ps.lambda_t * ps.K_t)[finite]
    bound = curvature_bound_ok(ps.K_t[finite], ps.lambda_t)
    return FamilyReport(
        t=t, lambda_t=ps.lambda_t, samples=int(finite.sum()), singular=int((~finite).sum()),
        max_residual=float(resid.max()) if resid.size else 0.0,
        bound_violations=int((~bound).sum()), residuals=resid,
    )


def fd_parallel_curvatures(scene: SceneData, z: complex, t: float, step: float = 1e-5) -> tuple[float, float]:
    """(K_t, H_t) by differentiating the transported point cloud numerically."""
    def point_map(pts):
        f, nu, _, status = immerse_grid(scene, pts)
        if np.any(status != Status.OK):
            raise ValueError("finite-difference stencil leaves the valid domain")
        return parallel_point(f, nu, t)

    return curvatures_from_forms(forms_from_point_map(point_map, z, step))

"""Seeded numerical verification of a scene, reported as JSON."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .geom import cut_mismatch, evaluate, gradient, sasakian_metric, subharmonicity_check
from .lorentz import herm_inner
from .sampler import DomainKind, DomainSpec, interior_samples, random_samples, sector_clearance
from .scene import Scene
from .weier import (
    FrameError,
    Status,
    check_structure,
    frames,
    gauss_map_distance,
    moving_frame,
    theta_from_ab,
)

MIN_VALID_FRACTION = 0.5
CUT_TOL = 1e-6
SASAKIAN_SAMPLES = 20
FD_REACH = 2e-3  # widest stencil: the Richardson Laplacian at step 1e-3


@dataclass
class Check:
    name: str
    samples: int
    max_residual: float
    threshold: float
    passed: bool


@dataclass
class VerifyReport:
    seed: int
    samples: int
    valid: int
    singular: int
    invalid: dict
    K_min: float
    K_max: float
    checks: list
    passed: bool
    diagnostics: dict
    warnings: list

    def to_json(self) -> str:
        doc = asdict(self)
        return json.dumps(doc, indent=2, sort_keys=True, allow_nan=True)


def _check(name, values, threshold, lower=False) -> Check:
    """Pass when max(values) <= threshold.

    With ``lower`` the check is one-sided: the reported residual is the
    shortfall max(0, -min(values)).
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return Check(name, 0, 0.0, threshold, True)
    if lower:
        worst = max(0.0, float(-values.min()))
    else:
        worst = float(values.max())
    return Check(name, int(values.size), worst, threshold, bool(worst <= threshold))


def _cut_angle(spec: DomainSpec):
    """The ray left out by a sector that covers all but a sliver of the plane."""
    gap = 2 * math.pi - (spec.theta_max - spec.theta_min)
    if spec.kind is not DomainKind.SECTOR or not 0 < gap <= 0.1:
        return None
    return spec.theta_max + gap / 2


def _pointwise(fn, zs):
    """Apply a scalar finite-difference check; stencil failures are skipped."""
    out = []
    for z in zs:
        try:
            out.append(fn(complex(z)))
        except (FrameError, ValueError, ArithmeticError):
            continue
    return np.array(out)


def run_verification(scene: Scene, samples: int = 500, seed: int = 42, tol=None, fd_samples: int = 100) -> VerifyReport:
    tols = dict(scene.tolerances)
    if tol is not None:
        tols["weingarten"] = tol
    data = scene.data()
    z = random_samples(scene.domain, samples, seed)
    s, status = evaluate(data, z)
    fr, _ = frames(data, z)
    ok = status == Status.OK
    good = ok & ~s.is_singular
    invalid = {Status(int(c)).name.lower(): int((status == c).sum()) for c in np.unique(status) if c != Status.OK}

    checks = []
    checks.append(_check("valid_fraction", [1 - ok.mean()], 1 - MIN_VALID_FRACTION))
    checks.append(_check("h_in_unit_disk", [(status == Status.OUTSIDE_DISK).sum()], 0))

    detG = np.abs(fr.Gframe.det() - 1)[ok]
    checks.append(_check("frame_det", detG, 1e-9))
    f, nu = s.f, s.nu
    model = np.maximum.reduce([
        np.abs(f.det() - 1), np.abs(herm_inner(nu, nu) - 1), np.abs(herm_inner(f, nu)),
    ])[ok]
    checks.append(_check("model_invariants", model, 1e-8))
    checks.append(_check("positive_trace", np.where(f.trace()[ok] > 0, 0.0, 1.0), 0))

    K, H, eta2, pi2 = s.K[good], s.H[good], s.eta2[good], s.pi2[good]
    checks.append(_check("weingarten", np.abs((H - 1) - K), tols["weingarten"]))
    with np.errstate(all="ignore"):
        compat = np.abs(eta2 * H - pi2 * K) / (eta2 * np.abs(H) + pi2 * np.abs(K))
    checks.append(_check("compatibility", np.nan_to_num(compat), 1e-9))
    dichotomy = np.where(pi2 < eta2, K > -1 + 1e-9, K < -1e-9)
    checks.append(_check("sign_dichotomy", dichotomy.astype(float), 0))
    closed_K = 4 * np.abs(fr.dh_dz[good]) ** 2 / (
        (1 - np.abs(fr.h[good]) ** 2) ** 4 * np.abs(fr.theta_dz[good]) ** 2 - 4 * np.abs(fr.dh_dz[good]) ** 2
    )
    checks.append(_check("closed_form_K", np.abs(closed_K - K) / np.maximum(1, np.abs(K)), 1e-9))

    zs = z[ok]
    checks.append(_check("gauss_map", _pointwise(lambda w: gauss_map_distance(moving_frame(data, w)), zs), 1e-7))

    zfd = zs[sector_clearance(scene.domain, zs) > FD_REACH][:fd_samples]
    checks.append(_check("structure_equation", _pointwise(lambda w: check_structure(data, w), zfd), tols["structure"]))
    checks.append(_check(
        "theta_cross_check",
        _pointwise(lambda w: abs(theta_from_ab(data, w) - moving_frame(data, w).theta_dz), zfd),
        tols["structure"],
    ))

    def dbar_Q(w):
        def q(pts):
            ss, st = evaluate(data, pts)
            if np.any(st != Status.OK):
                raise ValueError("stencil")
            return ss.Q_dz2
        qx, qy = gradient(q, w, 1e-5)
        q0 = q(np.array([w]))[0]
        return abs(0.5 * (qx + 1j * qy)) / (1e-5 * abs(q0) + 1e-9)

    checks.append(_check("hopf_holomorphic", _pointwise(dbar_Q, zfd), 1.0))

    def subharm(w):
        lap = subharmonicity_check(data, w)
        ss, _ = evaluate(data, np.array([w]))
        scale = 4 * ss.eta2[0] * float(ss.f.trace()[0]) / 2
        return lap / scale

    checks.append(_check("subharmonic", _pointwise(subharm, zfd), 1e-6, lower=True))
    zin = interior_samples(scene.domain, fd_samples, seed)
    zin = zin[sector_clearance(scene.domain, zin) > FD_REACH]
    checks.append(_check("laplacian_identity", np.abs(_pointwise(subharm, zin) - 1), 1e-4))

    Ks = s.K[good]
    range_bad = ~((Ks <= -1 + 1e-9) | (Ks >= -1e-9))
    checks.append(_check("curvature_range", range_bad.astype(float), 0))

    diagnostics, warnings = {}, []
    cut = _cut_angle(scene.domain)
    if cut is not None:
        lo = scene.domain.r_inner + scene.domain.margin
        hi = scene.domain.r_outer - scene.domain.margin
        jump = cut_mismatch(data, cut, np.linspace(lo, hi, 32))
        diagnostics["cut_mismatch"] = jump
        if not jump <= CUT_TOL:
            warnings.append(f"eta2 jumps by {jump:.3g} (relative) across the sector cut; h may not give a single-valued metric")
    eig = _pointwise(lambda w: float(np.linalg.eigvalsh(sasakian_metric(data, w)).min()), zfd[:SASAKIAN_SAMPLES])
    diagnostics["sasakian_min_eigenvalue"] = float(eig.min()) if eig.size else float("nan")

    return VerifyReport(
        seed=seed, samples=samples, valid=int(ok.sum()), singular=int((ok & s.is_singular).sum()),
        invalid=invalid,
        K_min=float(np.min(Ks)) if Ks.size else float("nan"),
        K_max=float(np.max(Ks)) if Ks.size else float("nan"),
        checks=[asdict(c) for c in checks],
        passed=all(c.passed for c in checks),
        diagnostics=diagnostics,
        warnings=warnings,
    )

"""Polar sampling, mesh assembly, singular-locus tracing and export."""

from __future__ import annotations

import enum
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .geom import evaluate, relative_residual
from .lorentz import ball_coordinates
from .parallel import parallel_curvatures_array, parallel_point
from .weier import SceneData, Status

MAX_INVALID_FRACTION = 0.5


class DomainKind(str, enum.Enum):
    DISK = "disk"
    PUNCTURED_DISK = "punctured_disk"
    ANNULUS = "annulus"
    SECTOR = "sector"


class DomainMismatch(ValueError):
    pass


@dataclass(frozen=True)
class DomainSpec:
    kind: DomainKind = DomainKind.DISK
    r_inner: float = 0.0
    r_outer: float = 1.0
    n_r: int = 64
    n_theta: int = 128
    theta_min: float = -math.pi
    theta_max: float = math.pi
    margin: float = 1e-3
    ratio: float = 1.0  # >1: radial gaps shrink geometrically toward r_outer

    def __post_init__(self):
        object.__setattr__(self, "kind", DomainKind(self.kind))
        if not self.r_inner < self.r_outer:
            raise ValueError(f"r_inner ({self.r_inner}) must be < r_outer ({self.r_outer})")
        if self.r_inner < 0:
            raise ValueError("r_inner must be >= 0")
        if self.n_r < 2 or self.n_theta < 4:
            raise ValueError("need n_r >= 2 and n_theta >= 4")
        if self.kind is DomainKind.DISK and self.r_inner != 0:
            raise ValueError("a disk has r_inner = 0; use 'annulus'")
        if self.kind is DomainKind.ANNULUS and self.r_inner <= 0:
            raise ValueError("an annulus needs r_inner > 0")
        if not self.theta_min < self.theta_max:
            raise ValueError("theta_min must be < theta_max")
        if self.kind is not DomainKind.SECTOR and not math.isclose(
            self.theta_max - self.theta_min, 2 * math.pi
        ):
            raise ValueError("only a sector may restrict the angular range")
        lo, hi = self.r_inner + self.margin, self.r_outer - self.margin
        if not lo < hi:
            raise ValueError("margin leaves no radial extent")
        if self.ratio < 1:
            raise ValueError("ratio must be >= 1")

    @property
    def periodic(self) -> bool:
        return self.kind is not DomainKind.SECTOR

    def radii(self) -> np.ndarray:
        lo, hi = self.r_inner + self.margin, self.r_outer - self.margin
        if self.ratio == 1:
            return np.linspace(lo, hi, self.n_r)
        gaps = self.ratio ** -np.arange(self.n_r - 1.0)
        return lo + (hi - lo) * np.concatenate([[0.0], np.cumsum(gaps) / gaps.sum()])

    def angles(self) -> np.ndarray:
        if self.periodic:
            return self.theta_min + (self.theta_max - self.theta_min) * np.arange(self.n_theta) / self.n_theta
        return np.linspace(self.theta_min, self.theta_max, self.n_theta)


def sample_domain(spec: DomainSpec) -> np.ndarray:
    """Polar grid z[i, j] = r_i exp(i theta_j), shape (n_r, n_theta)."""
    r = spec.radii()
    th = spec.angles()
    return r[:, None] * np.exp(1j * th[None, :])


def random_samples(spec: DomainSpec, n: int, seed: int) -> np.ndarray:
    """Uniform draws in the polar parameter rectangle."""
    rng = np.random.default_rng(seed)
    r = rng.uniform(spec.r_inner + spec.margin, spec.r_outer - spec.margin, n)
    th = rng.uniform(spec.theta_min, spec.theta_max, n)
    return r * np.exp(1j * th)


def interior_samples(spec: DomainSpec, n: int, seed: int, inset: float = 0.1) -> np.ndarray:
    """Uniform draws kept a fraction ``inset`` of the radial range (and of the
    angular range for sectors) away from the domain boundary."""
    if not 0 <= inset < 0.5:
        raise ValueError("inset must lie in [0, 0.5)")
    rng = np.random.default_rng(seed)
    dr = inset * (spec.r_outer - spec.r_inner)
    r = rng.uniform(spec.r_inner + dr, spec.r_outer - dr, n)
    dt = 0.0 if spec.periodic else inset * (spec.theta_max - spec.theta_min)
    th = rng.uniform(spec.theta_min + dt, spec.theta_max - dt, n)
    return r * np.exp(1j * th)


def sector_clearance(spec: DomainSpec, z) -> np.ndarray:
    """Distance from z to the nearer boundary ray of a sector (inf otherwise).

    Finite-difference stencils wider than this would straddle the cut.
    """
    z = np.asarray(z, dtype=complex)
    if spec.periodic:
        return np.full(z.shape, np.inf)
    r, th = np.abs(z), np.angle(z)
    out = np.full(z.shape, np.inf)
    for edge in (spec.theta_min, spec.theta_max):
        d = np.angle(np.exp(1j * (th - edge)))
        out = np.minimum(out, np.where(np.abs(d) < np.pi / 2, r * np.abs(np.sin(d)), r))
    return out


# ---------------------------------------------------------------------------
# mesh


@dataclass
class FrontMesh:
    vertices: np.ndarray  # (N, 3) ball coordinates
    K: np.ndarray
    H: np.ndarray
    eta2: np.ndarray
    pi2: np.ndarray
    singular: np.ndarray
    faces: np.ndarray  # (M, 4) vertex indices
    face_singular: np.ndarray
    z: np.ndarray
    invalid_counts: dict = field(default_factory=dict)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)


def _status_counts(status: np.ndarray) -> dict:
    counts = Counter(Status(int(s)).name.lower() for s in status.ravel() if s != Status.OK)
    return dict(sorted(counts.items()))


def grid_faces(valid: np.ndarray, periodic: bool) -> np.ndarray:
    """Quads over an (n_r, n_theta) grid, as flat grid indices, skipping invalid corners."""
    n_r, n_t = valid.shape
    cols = n_t if periodic else n_t - 1
    i, j = np.meshgrid(np.arange(n_r - 1), np.arange(cols), indexing="ij")
    j1 = (j + 1) % n_t
    quads = np.stack([i * n_t + j, (i + 1) * n_t + j, (i + 1) * n_t + j1, i * n_t + j1], -1).reshape(-1, 4)
    flat = valid.ravel()
    return quads[np.all(flat[quads], axis=1)]


def build_mesh(scene: SceneData, spec: Optional[DomainSpec] = None, t: float = 0.0) -> FrontMesh:
    """Evaluate the front on the polar grid of ``spec`` (default: the scene's).

    With ``t != 0`` the vertices are moved to the parallel front at distance t
    and K, H are its curvatures; eta2 and pi2 stay those of the seed, and a
    vertex is flagged singular where the parallel front fails to immerse.
    """
    spec = spec or scene.domain
    if spec is None:
        raise ValueError("no domain given")
    z = sample_domain(spec)
    s, status = evaluate(scene, z)
    valid = status == Status.OK
    if (~valid).sum() > MAX_INVALID_FRACTION * valid.size:
        raise DomainMismatch(
            f"domain mismatch: {(~valid).sum()} of {valid.size} samples invalid {_status_counts(status)}"
        )
    f, K, H, singular = s.f, s.K, s.H, s.is_singular
    if t != 0.0:
        f, _ = parallel_point(s.f, s.nu, t)
        K, H = parallel_curvatures_array(s.K, s.H, t)
        singular = ~np.isfinite(K)
    with np.errstate(all="ignore"):
        ball = ball_coordinates(f)

    faces_grid = grid_faces(valid, spec.periodic)
    index = np.full(valid.size, -1)
    index[valid.ravel()] = np.arange(valid.sum())
    faces = index[faces_grid]
    sing = singular.ravel()[valid.ravel()]
    flat = lambda a: np.asarray(a).ravel()[valid.ravel()]  # noqa: E731
    return FrontMesh(
        vertices=ball.reshape(-1, 3)[valid.ravel()],
        K=flat(K), H=flat(H), eta2=flat(s.eta2), pi2=flat(s.pi2),
        singular=sing,
        faces=faces,
        face_singular=np.any(sing[faces], axis=1) if len(faces) else np.zeros(0, bool),
        z=flat(z),
        invalid_counts=_status_counts(status),
    )


# ---------------------------------------------------------------------------
# singular locus


@dataclass
class LocusPolyline:
    z: np.ndarray
    ball: np.ndarray
    residual: np.ndarray  # (eta2 - pi2) / (eta2 + pi2)
    closed: bool = False

    def __len__(self) -> int:
        return len(self.z)


def _residual_fn(scene: SceneData):
    def fn(z):
        s, _ = evaluate(scene, z)
        return relative_residual(s.eta2, s.pi2)

    return fn


def _bisect(fn, za: np.ndarray, zb: np.ndarray, ra: np.ndarray, tol: float = 1e-9, iters: int = 60):
    """Vectorized bisection on the segments za-zb (polar-linear)."""
    lo = np.zeros(len(za))
    hi = np.ones(len(za))
    rlo = ra.copy()
    ra_r, ra_t = np.abs(za), np.angle(za)
    dt = np.angle(zb / za)
    rb_r = np.abs(zb)

    def at(s):
        return (ra_r + s * (rb_r - ra_r)) * np.exp(1j * (ra_t + s * dt))

    mid = 0.5 * (lo + hi)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        rm = fn(at(mid))
        same = np.sign(rm) == np.sign(rlo)
        lo = np.where(same, mid, lo)
        rlo = np.where(same, rm, rlo)
        hi = np.where(same, hi, mid)
        if np.all(np.abs(rm) < tol):
            break
    # the endpoint with smaller residual
    rhi = fn(at(hi))
    rlo_final = fn(at(lo))
    best = np.where(np.abs(rlo_final) <= np.abs(rhi), lo, hi)
    zs = at(best)
    return zs, fn(zs)


def trace_locus(scene: SceneData, spec: Optional[DomainSpec] = None) -> list[LocusPolyline]:
    """Zero set of eta2 - pi2 by marching squares on the polar grid."""
    spec = spec or scene.domain
    z = sample_domain(spec)
    fn = _residual_fn(scene)
    res = fn(z)
    n_r, n_t = z.shape
    cols = n_t if spec.periodic else n_t - 1

    # crossing points keyed by grid edge
    edge_point: dict = {}
    crossings_a, crossings_b, keys = [], [], []

    def edge_key(p, q):
        return (min(p, q), max(p, q))

    def node(i, j):
        return (i, j % n_t)

    ext = np.concatenate([res, res[:, :1]], axis=1) if spec.periodic else res
    c00, c10, c11, c01 = ext[:-1, :cols], ext[1:, :cols], ext[1:, 1:cols + 1], ext[:-1, 1:cols + 1]
    finite = np.isfinite(c00) & np.isfinite(c10) & np.isfinite(c11) & np.isfinite(c01)
    npos = (c00 > 0).astype(int) + (c10 > 0) + (c11 > 0) + (c01 > 0)
    active = finite & (npos > 0) & (npos < 4)

    cells = []
    for i, j in zip(*np.nonzero(active)):
        corners = [node(i, j), node(i + 1, j), node(i + 1, j + 1), node(i, j + 1)]
        vals = [res[c] for c in corners]
        signs = [v > 0 for v in vals]
        edges = []
        for k in range(4):
            p, q = corners[k], corners[(k + 1) % 4]
            if signs[k] != signs[(k + 1) % 4]:
                key = edge_key(p, q)
                edges.append(key)
                if key not in edge_point:
                    edge_point[key] = len(keys)
                    keys.append(key)
                    crossings_a.append(z[key[0]])
                    crossings_b.append(z[key[1]])
        if len(edges) == 2:
            cells.append((edges[0], edges[1]))
        elif (np.mean(vals) > 0) == signs[0]:
            # saddle, center joins corners 0 and 2: cut off corners 1 and 3
            cells.append((edges[0], edges[1]))
            cells.append((edges[2], edges[3]))
        else:
            cells.append((edges[3], edges[0]))
            cells.append((edges[1], edges[2]))

    if not keys:
        return []

    za = np.array(crossings_a)
    zb = np.array(crossings_b)
    ra = np.array([res[k[0]] for k in keys])
    pts, pres = _bisect(fn, za, zb, ra)

    # link segments into polylines
    adj: dict = {}
    for a, b in cells:
        ia, ib = edge_point[a], edge_point[b]
        adj.setdefault(ia, []).append(ib)
        adj.setdefault(ib, []).append(ia)
    seen: set = set()
    chains = []
    # open chains first (endpoints have degree 1), then loops
    starts = [v for v, nb in adj.items() if len(nb) == 1] + list(adj)
    for start in starts:
        if start in seen:
            continue
        chain = [start]
        seen.add(start)
        prev, cur = None, start
        while True:
            nxt = [n for n in adj[cur] if n != prev and n not in seen]
            if not nxt:
                break
            prev, cur = cur, nxt[0]
            chain.append(cur)
            seen.add(cur)
        closed = len(chain) > 2 and start in adj[chain[-1]]
        chains.append((chain, closed))

    from .weier import immerse_grid

    out = []
    for chain, closed in chains:
        zc = pts[chain]
        f, _, _, _ = immerse_grid(scene, zc)
        with np.errstate(all="ignore"):
            ball = ball_coordinates(f)
        out.append(LocusPolyline(z=zc, ball=ball, residual=pres[chain], closed=closed))
    return out


# ---------------------------------------------------------------------------
# export


def _num(x) -> str:
    return format(float(x), ".17g")


def export_mesh(mesh: FrontMesh, path, format: str = "obj") -> None:
    if mesh.n_vertices == 0:
        raise ValueError("mesh has no vertices")
    text = {"obj": mesh_to_obj, "ply": mesh_to_ply}[format](mesh)
    Path(path).write_text(text)


def mesh_to_obj(mesh: FrontMesh) -> str:
    lines = [
        "# HMC-1 front, Poincare ball model",
        f"# vertices {mesh.n_vertices} faces {len(mesh.faces)}",
        "# per-vertex '# attr K H sing' follows each v line",
    ]
    for v, k, h, s in zip(mesh.vertices, mesh.K, mesh.H, mesh.singular):
        lines.append(f"v {_num(v[0])} {_num(v[1])} {_num(v[2])}")
        lines.append(f"# attr {_num(k)} {_num(h)} {int(s)}")
    for face in mesh.faces:
        lines.append("f " + " ".join(str(int(i) + 1) for i in face))
    return "\n".join(lines) + "\n"


def mesh_to_ply(mesh: FrontMesh) -> str:
    header = [
        "ply",
        "format ascii 1.0",
        "comment HMC-1 front, Poincare ball model",
        f"element vertex {mesh.n_vertices}",
        "property double x",
        "property double y",
        "property double z",
        "property double K",
        "property double H",
        "property double eta2",
        "property double pi2",
        "property uchar singular",
        f"element face {len(mesh.faces)}",
        "property list uchar int vertex_indices",
        "end_header",
    ]
    rows = [
        " ".join([_num(v[0]), _num(v[1]), _num(v[2]), _num(k), _num(h), _num(e), _num(p), str(int(s))])
        for v, k, h, e, p, s in zip(mesh.vertices, mesh.K, mesh.H, mesh.eta2, mesh.pi2, mesh.singular)
    ]
    faces = [f"{len(face)} " + " ".join(str(int(i)) for i in face) for face in mesh.faces]
    return "\n".join(header + rows + faces) + "\n"


def read_obj(path) -> tuple[np.ndarray, np.ndarray, list]:
    """Vertices, attribute rows (K, H, sing) and faces (0-based) of an OBJ we wrote."""
    verts, attrs, faces = [], [], []
    for line in Path(path).read_text().splitlines():
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "v":
            verts.append([float(p) for p in parts[1:4]])
        elif parts[0] == "f":
            faces.append([int(p.split("/")[0]) - 1 for p in parts[1:]])
        elif parts[:2] == ["#", "attr"]:
            attrs.append([float(parts[2]), float(parts[3]), float(parts[4])])
    return np.array(verts), np.array(attrs), faces


def read_ply(path) -> tuple[dict, list]:
    """Vertex properties by name and faces of an ascii PLY."""
    lines = Path(path).read_text().splitlines()
    if lines[0] != "ply" or lines[1] != "format ascii 1.0":
        raise ValueError("not an ascii 1.0 PLY file")
    counts, props, element = {}, [], None
    body = 0
    for n, line in enumerate(lines):
        parts = line.split()
        if parts[0] == "element":
            element = parts[1]
            counts[element] = int(parts[2])
        elif parts[0] == "property" and element == "vertex":
            props.append(parts[-1])
        elif parts[0] == "end_header":
            body = n + 1
            break
    nv = counts.get("vertex", 0)
    rows = np.array([[float(x) for x in lines[body + i].split()] for i in range(nv)]).reshape(nv, len(props))
    faces = [[int(x) for x in lines[body + nv + i].split()[1:]] for i in range(counts.get("face", 0))]
    return {name: rows[:, k] for k, name in enumerate(props)}, faces


def locus_to_json(loci: list[LocusPolyline]) -> str:
    doc = [
        {
            "closed": bool(p.closed),
            "z": [[float(w.real), float(w.imag)] for w in p.z],
            "ball": [[float(x) for x in b] for b in p.ball],
            "residual": [float(r) for r in p.residual],
        }
        for p in loci
    ]
    return json.dumps(doc, indent=1)


def export_locus(loci: list[LocusPolyline], path) -> None:
    Path(path).write_text(locus_to_json(loci) + "\n")

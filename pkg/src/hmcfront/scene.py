"""Scene files (TOML) and the built-in example gallery."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .cjet import ExprError
from .sampler import DomainSpec
from .weier import SceneData

DEFAULT_TOLERANCES = {"weingarten": 1e-8, "structure": 1e-6, "locus": 1e-3}
_DOMAIN_KEYS = {f.name for f in fields(DomainSpec)}
_SECTIONS = {
    "functions": {"G", "h"},
    "domain": _DOMAIN_KEYS,
    "output": {"format", "path"},
    "tolerances": set(DEFAULT_TOLERANCES),
}
EXAMPLES = ("zalpha", "expk", "joukowski")


class SceneError(ValueError):
    pass


@dataclass
class Scene:
    G: str
    h: str
    domain: DomainSpec
    output_format: str = "obj"
    output_path: Optional[str] = None
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))

    def data(self) -> SceneData:
        try:
            return SceneData.from_strings(self.G, self.h, self.domain)
        except ExprError as exc:
            raise SceneError(f"bad expression: {exc}") from None


def scene_from_dict(doc: dict) -> Scene:
    for section, body in doc.items():
        if section not in _SECTIONS:
            raise SceneError(f"unknown table [{section}]")
        if not isinstance(body, dict):
            raise SceneError(f"[{section}] must be a table")
        unknown = set(body) - _SECTIONS[section]
        if unknown:
            raise SceneError(f"unknown key(s) in [{section}]: {', '.join(sorted(unknown))}")
    funcs = doc.get("functions", {})
    for key in ("G", "h"):
        if not isinstance(funcs.get(key), str):
            raise SceneError(f"[functions] needs a string {key}")
    try:
        domain = DomainSpec(**doc.get("domain", {}))
    except (TypeError, ValueError) as exc:
        raise SceneError(f"bad [domain]: {exc}") from None
    out = doc.get("output", {})
    fmt = out.get("format", "obj")
    if fmt not in ("obj", "ply"):
        raise SceneError(f"output format must be obj or ply, not {fmt!r}")
    tol = dict(DEFAULT_TOLERANCES)
    for key, value in doc.get("tolerances", {}).items():
        if not isinstance(value, (int, float)) or value <= 0:
            raise SceneError(f"tolerance {key} must be a positive number")
        tol[key] = float(value)
    scene = Scene(funcs["G"], funcs["h"], domain, fmt, out.get("path"), tol)
    scene.data()  # surface expression errors now
    return scene


def load_scene(path) -> Scene:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SceneError(f"cannot read scene {path}: {exc.strerror}") from None
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise SceneError(f"malformed TOML in {path}: {exc}") from None
    return scene_from_dict(doc)


def _toml_value(v) -> str:
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    return repr(float(v))


def dump_scene(scene: Scene) -> str:
    d = scene.domain
    tables = {
        "functions": {"G": scene.G, "h": scene.h},
        "domain": {f.name: getattr(d, f.name) for f in fields(DomainSpec)},
        "output": {"format": scene.output_format},
        "tolerances": scene.tolerances,
    }
    tables["domain"]["kind"] = d.kind.value
    if scene.output_path:
        tables["output"]["path"] = scene.output_path
    lines = []
    for name, body in tables.items():
        lines.append(f"[{name}]")
        lines.extend(f"{k} = {_toml_value(v)}" for k, v in body.items())
        lines.append("")
    return "\n".join(lines)


def _fmt(x: float) -> str:
    return repr(float(x))


def example_scene(name: str, alpha: float = 2.0, k: complex = 1 + 0j, n: int = 128) -> Scene:
    """The three gallery fronts: (z, z^alpha), (exp(kz), z), (z + 1/z, z)."""
    if name == "zalpha":
        if alpha <= 0:
            raise SceneError("alpha must be positive")
        h = "z" if alpha == 1 else f"z^{_fmt(alpha)}"
        if alpha == 1:
            domain = DomainSpec("disk", 0.0, 1.0, n, n)
        elif float(alpha).is_integer():
            domain = DomainSpec("punctured_disk", 0.0, 1.0, n, n)
        else:
            # principal branch of z^alpha: one sheet, cut along the negative axis
            eps = 1e-3
            domain = DomainSpec("sector", 0.0, 1.0, n, n, -math.pi + eps, math.pi - eps)
        return Scene("z", h, domain)
    if name == "expk":
        k = complex(k)
        if k == 0:
            raise SceneError("k must be nonzero")
        sign = "-" if k.imag < 0 else "+"
        G = f"exp(({_fmt(k.real)}{sign}{_fmt(abs(k.imag))}i)*z)"
        return Scene(G, "z", DomainSpec("disk", 0.0, 1.0, n, n))
    if name == "joukowski":
        return Scene("z + 1/z", "z", DomainSpec("annulus", 0.05, 1.0, n, n, ratio=1.02))
    raise SceneError(f"unknown example {name!r}; choose from {', '.join(EXAMPLES)}")

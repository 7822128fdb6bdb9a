"""Command-line front end.

Exit codes:
  0  success (verify: all checks passed)
  1  scene error (unreadable/malformed scene, bad expression, domain mismatch,
     unknown example)
  2  verification failed
  3  I/O error writing output
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .sampler import DomainMismatch, build_mesh, export_locus, export_mesh, trace_locus
from .scene import EXAMPLES, Scene, SceneError, dump_scene, example_scene, load_scene
from .verify import run_verification

EXIT_OK, EXIT_SCENE, EXIT_FAIL, EXIT_IO = 0, 1, 2, 3


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _format_for(args, scene: Scene, out: str) -> str:
    if args.format:
        return args.format
    suffix = Path(out).suffix.lower().lstrip(".")
    return suffix if suffix in ("obj", "ply") else scene.output_format


def _mesh_command(args, t: float = 0.0) -> int:
    try:
        scene = load_scene(args.scene)
        out = args.out or scene.output_path
        if not out:
            raise SceneError("no output path (--out or [output].path)")
        mesh = build_mesh(scene.data(), scene.domain, t=t)
    except (SceneError, DomainMismatch) as exc:
        return _fail(EXIT_SCENE, str(exc))
    try:
        export_mesh(mesh, out, _format_for(args, scene, out))
    except OSError as exc:
        return _fail(EXIT_IO, f"cannot write {out}: {exc.strerror}")
    print(f"wrote {mesh.n_vertices} vertices, {len(mesh.faces)} faces to {out}")
    return EXIT_OK


def cmd_generate(args) -> int:
    return _mesh_command(args)


def cmd_parallel(args) -> int:
    return _mesh_command(args, t=args.t)


def cmd_verify(args) -> int:
    try:
        scene = load_scene(args.scene)
        report = run_verification(scene, samples=args.samples, seed=args.seed, tol=args.tol)
    except (SceneError, DomainMismatch) as exc:
        return _fail(EXIT_SCENE, str(exc))
    for message in report.warnings:
        print(f"warning: {message}", file=sys.stderr)
    text = report.to_json()
    print(text)
    if args.report:
        try:
            Path(args.report).write_text(text + "\n")
        except OSError as exc:
            return _fail(EXIT_IO, f"cannot write {args.report}: {exc.strerror}")
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_locus(args) -> int:
    try:
        scene = load_scene(args.scene)
        loci = trace_locus(scene.data(), scene.domain)
    except (SceneError, DomainMismatch) as exc:
        return _fail(EXIT_SCENE, str(exc))
    try:
        export_locus(loci, args.out)
    except OSError as exc:
        return _fail(EXIT_IO, f"cannot write {args.out}: {exc.strerror}")
    print(f"wrote {len(loci)} polylines, {sum(len(p) for p in loci)} points to {args.out}")
    return EXIT_OK


def _parse_k(text: str) -> complex:
    parts = text.split(",")
    if len(parts) == 1:
        return complex(float(parts[0]), 0.0)
    if len(parts) == 2:
        return complex(float(parts[0]), float(parts[1]))
    raise ValueError(text)


def cmd_example(args) -> int:
    try:
        k = _parse_k(args.k)
    except ValueError:
        return _fail(EXIT_SCENE, f"--k must be RE or RE,IM, not {args.k!r}")
    try:
        scene = example_scene(args.name, alpha=args.alpha, k=k)
    except (SceneError, ValueError) as exc:
        return _fail(EXIT_SCENE, str(exc))
    try:
        Path(args.out).write_text(dump_scene(scene))
    except OSError as exc:
        return _fail(EXIT_IO, f"cannot write {args.out}: {exc.strerror}")
    print(f"wrote scene {args.name} to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hmcfront",
        description="HMC-1 fronts in hyperbolic 3-space from Weierstrass-type data (G, h).",
        epilog="exit codes: 0 ok, 1 scene error, 2 verification failed, 3 I/O error",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write the front mesh (OBJ or PLY)")
    p.add_argument("--scene", required=True)
    p.add_argument("--out")
    p.add_argument("--format", choices=("obj", "ply"))
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("verify", help="run the numerical identity checks")
    p.add_argument("--scene", required=True)
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--tol", type=float, help="override the Weingarten tolerance")
    p.add_argument("--report", help="also write the report to this file")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("locus", help="trace the singular locus to a JSON document")
    p.add_argument("--scene", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_locus)

    p = sub.add_parser("parallel", help="write the parallel front at distance t")
    p.add_argument("--scene", required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--out")
    p.add_argument("--format", choices=("obj", "ply"))
    p.set_defaults(func=cmd_parallel)

    p = sub.add_parser("example", help="write a gallery scene file")
    p.add_argument("--name", required=True, help=", ".join(EXAMPLES))
    p.add_argument("--alpha", type=float, default=2.0, help="zalpha exponent (default 2)")
    p.add_argument("--k", default="1,0", help="expk constant as RE,IM (default 1,0)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_example)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

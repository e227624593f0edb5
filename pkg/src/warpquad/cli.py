"""Command-line front end.

Subcommands: preset, build, verify, eval, mesh.  Exit codes: 0 success /
all checks passed, 1 verification failure, 2 input error, 3 synthesis
failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from typing import Optional, Sequence

import numpy as np

from .atlas import NonpositiveIntegrandError
from .embed import EvalDomainError, RadicandError, WitnessError, build
from .expr import ExprError
from .quadrature import QuadratureError
from .specfile import (
    PRESET_NAMES,
    load_spec,
    preset_spec_text,
)
from .steps import StepSynthesisError
from .verify import default_grid, isometry_profile, report_lines, run_verification
from .warped import SpecError

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_INPUT = 2
EXIT_SYNTH = 3

_INPUT_ERRORS = (SpecError, ExprError, EvalDomainError, WitnessError,
                 FileNotFoundError, IsADirectoryError, PermissionError,
                 ValueError)
_SYNTH_ERRORS = (StepSynthesisError, NonpositiveIntegrandError,
                 RadicandError, QuadratureError)


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def _load(path: str):
    return load_spec(path)


def cmd_preset(args) -> int:
    text = preset_spec_text(
        args.name,
        function=args.function,
        n=args.n,
        a=args.a,
        c=args.c,
        target=args.target,
        variant=args.variant,
    )
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_build(args) -> int:
    spec = _load(args.spec)
    model = build(spec)
    lines = [
        f"kind: {model.kind}",
        f"ambient: {model.ambient.describe()}",
        f"quadric: {model.quadric.describe() if model.quadric else 'none'}",
        "blocks: " + " + ".join(
            f"{name}[{len(signs)}]" for name, signs in model.blocks
        ),
        f"t0: {_fmt(spec.t0)}",
    ]
    lines.extend(model.steps.certificate.lines())
    print("\n".join(lines))
    return EXIT_OK


def cmd_verify(args) -> int:
    spec = _load(args.spec)
    model = build(spec)
    report = run_verification(
        model,
        grid_density=args.grid_density,
        seed=args.seed,
        x_box=args.x_box,
        pair_samples=args.pairs,
        quadric_samples=args.quadric_samples,
    )
    lines = report_lines(model, report)
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.out_dir:
        import os

        os.makedirs(args.out_dir, exist_ok=True)
        with open(os.path.join(args.out_dir, "report.txt"), "w",
                  encoding="utf-8") as fh:
            fh.write(text)
        ts, xs = default_grid(model, args.grid_density, args.x_box)
        errs = isometry_profile(model, ts, xs)
        with open(os.path.join(args.out_dir, "errors.csv"), "w",
                  encoding="utf-8") as fh:
            fh.write("t,max_rel_error\n")
            for t, e in zip(ts, errs):
                fh.write(f"{_fmt(t)},{_fmt(e)}\n")
        if not args.no_figures:
            from .figures import render_report_figures

            render_report_figures(model, report, ts, errs, args.out_dir)
    return EXIT_OK if report.all_pass() else EXIT_VERIFY_FAIL


def _parse_grid(groups: str, expected: int) -> list[np.ndarray]:
    parts = groups.split(",")
    if len(parts) != expected:
        raise SpecError(
            f"--grid needs {expected} comma-separated lo:hi:count groups, "
            f"got {len(parts)}"
        )
    axes = []
    for part in parts:
        bits = part.split(":")
        if len(bits) != 3:
            raise SpecError(f"bad grid group {part!r} (want lo:hi:count)")
        lo, hi = float(bits[0]), float(bits[1])
        count = int(bits[2])
        if count < 1:
            raise SpecError(f"grid count must be >= 1 in {part!r}")
        axes.append(np.linspace(lo, hi, count) if count > 1
                    else np.array([lo]))
    return axes


def _read_points(path: str, n: int) -> list[np.ndarray]:
    pts = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            vals = [float(v) for v in line.replace(",", " ").split()]
            if len(vals) != n:
                raise SpecError(
                    f"{path}:{lineno}: expected {n} coordinates, got {len(vals)}"
                )
            pts.append(np.asarray(vals))
    return pts


def _csv_row(values) -> str:
    return ",".join(_fmt(float(v)) for v in values)


def cmd_eval(args) -> int:
    spec = _load(args.spec)
    model = build(spec)
    n = spec.n
    if (args.points is None) == (args.grid is None):
        raise SpecError("eval needs exactly one of --points or --grid")
    if args.points:
        points = _read_points(args.points, n)
    else:
        axes = _parse_grid(args.grid, n)
        mesh = np.meshgrid(*axes, indexing="ij")
        points = np.stack([m.ravel() for m in mesh], axis=-1)
    header = (
        ["t"]
        + [f"x{i}" for i in range(1, n)]
        + [f"y{i}" for i in range(model.ambient.dim)]
    )
    out = [",".join(header)]
    for p in points:
        y = model.eval(p[0], p[1:])
        out.append(_csv_row(list(p) + list(y)))
    text = "\n".join(out) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _parse_slice(text: Optional[str], n: int) -> dict[int, float]:
    """--slice 'x2=0,...' to {domain coordinate index: value}; t is index 0."""
    fixed: dict[int, float] = {}
    if not text:
        return fixed
    names = {"t": 0}
    names.update({f"x{i}": i for i in range(1, n)})
    for part in text.split(","):
        if "=" not in part:
            raise SpecError(f"bad slice entry {part!r} (want name=value)")
        name, value = part.split("=", 1)
        name = name.strip()
        if name not in names:
            raise SpecError(f"unknown domain coordinate {name!r}")
        fixed[names[name]] = float(value)
    return fixed


def cmd_mesh(args) -> int:
    spec = _load(args.spec)
    model = build(spec)
    n = spec.n
    fixed = _parse_slice(args.slice, n)
    free = [i for i in range(n) if i not in fixed]
    if len(free) != 2:
        raise SpecError(
            f"mesh needs exactly 2 free domain coordinates; {len(free)} free "
            f"after --slice (domain has {n})"
        )
    axes = _parse_grid(args.grid, 2)
    dim = model.ambient.dim
    project = tuple(int(v) for v in args.project.split(","))
    if len(project) != 3 or len(set(project)) != 3 or not all(
        0 <= i < dim for i in project
    ):
        raise SpecError(
            f"--project needs 3 distinct ambient indices in [0, {dim - 1}]"
        )
    n1, n2 = len(axes[0]), len(axes[1])
    rows = []
    coords = np.zeros(n)
    for i, v in fixed.items():
        coords[i] = v
    verts = np.empty((n1, n2, dim))
    dom = np.empty((n1, n2, n))
    for i, u in enumerate(axes[0]):
        for j, w in enumerate(axes[1]):
            coords[free[0]] = u
            coords[free[1]] = w
            dom[i, j] = coords
            verts[i, j] = model.eval(coords[0], coords[1:])
    if args.format == "csv":
        header = (
            ["t"]
            + [f"x{i}" for i in range(1, n)]
            + [f"y{i}" for i in range(dim)]
        )
        rows.append(",".join(header))
        for i in range(n1):
            for j in range(n2):
                rows.append(_csv_row(list(dom[i, j]) + list(verts[i, j])))
        text = "\n".join(rows) + "\n"
    else:  # obj
        out = []
        for i in range(n1):
            for j in range(n2):
                p = verts[i, j]
                out.append(
                    "v "
                    f"{_fmt(p[project[0]])} {_fmt(p[project[1]])} "
                    f"{_fmt(p[project[2]])}"
                )
        for i in range(n1 - 1):
            for j in range(n2 - 1):
                v00 = i * n2 + j + 1
                v01 = i * n2 + j + 2
                v11 = (i + 1) * n2 + j + 2
                v10 = (i + 1) * n2 + j + 1
                out.append(f"f {v00} {v01} {v11} {v10}")
        text = "\n".join(out) + "\n"
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(text)
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="warpquad",
        description=(
            "Build, verify, evaluate and export explicit isometric "
            "immersions/embeddings of warped product metrics into "
            "semi-Euclidean spaces and quadrics."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preset", help="emit a named preset spec file")
    p.add_argument("name", choices=PRESET_NAMES)
    p.add_argument("--function", "-f", default=None,
                   help="coefficient function for rozendorn/azov presets")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--a", type=int, default=0)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--target", default="flat",
                   choices=("flat", "sphere", "hyperbolic"))
    p.add_argument("--variant", default="immersion",
                   choices=("immersion", "embedding"))
    p.add_argument("--output", "-o", default=None)
    p.set_defaults(func=cmd_preset)

    p = sub.add_parser("build", help="build a model and print its summary")
    p.add_argument("spec")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("verify", help="run the verification battery")
    p.add_argument("spec")
    p.add_argument("--grid-density", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--x-box", type=float, default=3.0)
    p.add_argument("--pairs", type=int, default=1000)
    p.add_argument("--quadric-samples", type=int, default=1000)
    p.add_argument("--out-dir", default=None,
                   help="write report.txt, errors.csv and figures here")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("eval", help="evaluate the map on points or a grid")
    p.add_argument("spec")
    p.add_argument("--points", default=None,
                   help="file of domain points, one per line")
    p.add_argument("--grid", default=None,
                   help="lo:hi:count per domain coordinate, comma separated")
    p.add_argument("--output", "-o", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("mesh", help="export a 2D slice as csv or obj")
    p.add_argument("spec")
    p.add_argument("--slice", default=None,
                   help="fix domain coordinates, e.g. 'x2=0,x3=1'")
    p.add_argument("--grid", required=True,
                   help="lo:hi:count for each of the 2 free coordinates")
    p.add_argument("--out", required=True)
    p.add_argument("--format", default="obj", choices=("csv", "obj"))
    p.add_argument("--project", default="0,1,2",
                   help="3 ambient axes for obj projection")
    p.set_defaults(func=cmd_mesh)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on bad usage, matching the input-error contract
        return int(e.code) if e.code else EXIT_OK
    try:
        return args.func(args)
    except _SYNTH_ERRORS as e:
        print(f"synthesis failure: {e}", file=sys.stderr)
        return EXIT_SYNTH
    except _INPUT_ERRORS as e:
        print(f"input error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

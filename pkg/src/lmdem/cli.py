"""Command-line entry point.

Exit codes: 1 for schema/parse errors, 2 for solver failures, 3 for
mesher/LLM failures.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import expressions as ex
from .io import SchemaError, parse_config
from .mesh import GeoRequest, MeshError, mesh_from_geo, write_msh

EXIT_SCHEMA = 1
EXIT_SOLVER = 2
EXIT_MESHER = 3


def _cmd_mesh(args) -> int:
    try:
        with open(args.geo) as fh:
            geo_text = fh.read()
        mesh = mesh_from_geo(
            GeoRequest(geo_text=geo_text, characteristic_length=args.lc, dim=args.dim)
        )
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except MeshError as exc:
        print(f"mesher error: {exc}", file=sys.stderr)
        return EXIT_MESHER
    write_msh(mesh, args.output)
    print(f"wrote {args.output}: {len(mesh.nodes)} nodes, {len(mesh.elements)} elements")
    return 0


def _cmd_solve(args) -> int:
    from .network import load_params
    from .runner import run_config

    try:
        with open(args.config) as fh:
            config = parse_config(fh.read())
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except SchemaError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    if args.solver:
        config.training["solver"] = args.solver

    initial = None
    if args.load_model:
        try:
            initial = load_params(args.load_model)
        except (OSError, ValueError) as exc:
            print(f"error loading model: {exc}", file=sys.stderr)
            return EXIT_SCHEMA

    def progress(epoch, loss):
        if epoch % 100 == 0:
            print(f"epoch {epoch:6d}  loss {loss:.6e}")

    try:
        summary = run_config(
            config,
            args.outdir,
            progress=progress if args.verbose else None,
            initial_params=initial,
        )
    except MeshError as exc:
        print(f"mesher error: {exc}", file=sys.stderr)
        return EXIT_MESHER
    except Exception as exc:
        print(f"solver error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER

    if args.save_model:
        import shutil

        model_path = f"{args.outdir}/model.bin"
        try:
            shutil.copyfile(model_path, args.save_model)
        except OSError as exc:
            print(f"error saving model: {exc}", file=sys.stderr)
            return EXIT_SOLVER
    print(json.dumps(summary, indent=2))
    return 0


def _cmd_expr_check(args) -> int:
    symbols = ex.GRAD_SYMBOLS if not args.spatial else ex.SPATIAL_SYMBOLS
    try:
        ast = ex.parse(args.expression, symbols=symbols)
        if not args.spatial:
            ex.validate(ast, args.dim)
    except ex.ExprError as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    used = sorted(ex.symbols_of(ast))
    print(f"ok: {ex.pretty(ast)}")
    print(f"symbols: {used}")
    if args.spatial:
        return 0
    # identity state (zero displacement gradient) and a finite-difference
    # check of the forward-mode partials there
    bindings = {s: 0.0 for s in used}
    try:
        value, parts = ex.partials(ast, bindings)
    except ex.ExprError as exc:
        print(f"invalid at identity state: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    print(f"value at identity: {value}")
    h = 1e-6
    worst = 0.0
    for s in used:
        bp = dict(bindings, **{s: h})
        bm = dict(bindings, **{s: -h})
        fd = (ex.evaluate(ast, bp) - ex.evaluate(ast, bm)) / (2 * h)
        worst = max(worst, abs(fd - parts.get(s, 0.0)) / max(1.0, abs(fd)))
    status = "PASS" if worst < 1e-5 else "FAIL"
    print(f"gradient check: {status} (max rel err {worst:.2e})")
    return 0 if status == "PASS" else EXIT_SCHEMA


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(args.job_root)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lmdem")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mesh", help="mesh a .geo file with gmsh")
    p.add_argument("geo")
    p.add_argument("-o", "--output", default="out.msh")
    p.add_argument("--lc", type=float, default=0.1)
    p.add_argument("--dim", type=int, choices=(2, 3), default=2)
    p.set_defaults(func=_cmd_mesh)

    p = sub.add_parser("solve", help="run a solver from a YAML config")
    p.add_argument("config")
    p.add_argument("-o", "--outdir", default="run")
    p.add_argument("--save-model", default=None)
    p.add_argument("--load-model", default=None)
    p.add_argument(
        "--solver",
        choices=("dem", "fem", "both"),
        default=None,
        help="override training.solver from the config",
    )
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("expr-check", help="validate an energy-density expression")
    p.add_argument("expression")
    p.add_argument("--dim", type=int, choices=(2, 3), default=3)
    p.add_argument("--spatial", action="store_true", help="use x,y,z symbols")
    p.set_defaults(func=_cmd_expr_check)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--job-root", default="jobs")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

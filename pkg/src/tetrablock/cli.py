"""Command line interface: ``python -m tetrablock <verb> ...``.

Exit status is 0 when every check passes, 1 when any check fails and 2 on
unreadable or malformed input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import CONFIG_ENV, KINDS, InstanceSpec, RunConfig
from .dilation import DilationHypothesisError, build_unitary_dilation, truncate_to_matrix
from .fundamental import (
    FundamentalEquationError,
    necessary_checks,
    solve_adjoint_fundamental,
    solve_fundamental,
)
from .generators import GeneratorError, build_instance
from .io import InputError, load_triple, matrix_to_json, read_json, save_triple, write_json
from .linalg import NotAContractionError
from .report import VerificationReport
from .suite import fundamental_residual_checks, run_suite, verify_triple

EXIT_PASS, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def _emit(text: str, out: str | None) -> None:
    if out:
        p = Path(out)
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text + "\n")
    else:
        print(text)


def _emit_report(rep: VerificationReport, args) -> int:
    _emit(rep.render_text() if args.text else rep.to_json(), args.out)
    return EXIT_PASS if rep.passed else EXIT_FAIL


def cmd_check(args, cfg: RunConfig) -> int:
    t = load_triple(args.file)
    return _emit_report(necessary_checks(t, cfg.tol), args)


def cmd_fundamental(args, cfg: RunConfig) -> int:
    t = load_triple(args.file)
    fp = solve_fundamental(t, cfg.rank_tol, cfg.tol)
    gp = solve_adjoint_fundamental(t, cfg.rank_tol, cfg.tol)
    rep = fundamental_residual_checks(t, fp, gp, cfg.tol)
    F1, F2 = fp.lifted()
    G1, G2 = gp.lifted()
    payload = {
        "defect_ranks": [fp.dim, gp.dim],
        "F1": matrix_to_json(F1), "F2": matrix_to_json(F2),
        "G1": matrix_to_json(G1), "G2": matrix_to_json(G2),
        "report": rep.to_dict(),
    }
    _emit(json.dumps(payload, indent=2, sort_keys=True), args.out)
    return EXIT_PASS if rep.passed else EXIT_FAIL


def cmd_dilate(args, cfg: RunConfig) -> int:
    t = load_triple(args.file)
    fp = solve_fundamental(t, cfg.rank_tol, cfg.tol)
    gp = solve_adjoint_fundamental(t, cfg.rank_tol, cfg.tol)
    dil = build_unitary_dilation(t, fp, gp, cfg.tol)
    out = Path(args.out)
    meta = {"levels": args.levels, "dims": [dil.dims.n, dil.dims.r, dil.dims.s],
            "basis": "H, then D_P positions 0..levels-1, then D_P* positions 0..levels-1",
            "edge_defect": {}}
    for name in ("R1", "R2", "U"):
        M, edge = truncate_to_matrix(getattr(dil, name), args.levels, return_edge=True)
        write_json(out / f"{name}.json", matrix_to_json(M))
        meta["edge_defect"][name] = edge
    write_json(out / "meta.json", meta)
    print(json.dumps(meta, indent=2, sort_keys=True))
    return EXIT_PASS


def cmd_verify(args, cfg: RunConfig) -> int:
    if args.spec:
        spec = InstanceSpec.from_dict(read_json(args.spec))
        rep = run_suite(spec, cfg)
    else:
        rep = verify_triple(load_triple(args.file), cfg)
        rep.meta["source"] = str(args.file)
    return _emit_report(rep, args)


def cmd_generate(args, cfg: RunConfig) -> int:
    params = json.loads(args.params) if args.params else {}
    spec = InstanceSpec(args.kind, params, seed=args.seed)
    t = build_instance(spec)
    save_triple(args.out, t)
    print(f"wrote {args.kind} instance (n={t.n}) to {args.out}")
    return EXIT_PASS


def cmd_report(args, cfg: RunConfig) -> int:
    rep = VerificationReport.from_dict(read_json(args.file))
    text = rep.render_text() if args.text else rep.to_json()
    print(text)
    return EXIT_PASS if rep.passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tetrablock", description=__doc__.splitlines()[0])
    ap.add_argument("--config", help=f"JSON RunConfig file (default: ${CONFIG_ENV} or built-ins)")
    sub = ap.add_subparsers(dest="verb", required=True)

    def with_format(p):
        g = p.add_mutually_exclusive_group()
        g.add_argument("--json", action="store_true", help="JSON output (default)")
        g.add_argument("--text", action="store_true", help="human-readable output")
        p.add_argument("--out", help="write output to this path instead of stdout")

    p = sub.add_parser("check", help="commutation and contractivity of a triple file")
    p.add_argument("file")
    with_format(p)
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("fundamental", help="solve for F1, F2, G1, G2")
    p.add_argument("file")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_fundamental)

    p = sub.add_parser("dilate", help="export truncated R1, R2, U matrices")
    p.add_argument("file")
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(fn=cmd_dilate)

    p = sub.add_parser("verify", help="run the full verification suite")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("file", nargs="?")
    src.add_argument("--spec", help="InstanceSpec JSON file")
    with_format(p)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("generate", help="write a generated triple file")
    kinds = ", ".join(k for k in KINDS if k != "file")
    p.add_argument("--kind", required=True, help=f"one of: {kinds}")
    p.add_argument("--params", help='JSON object, e.g. \'{"n": 4}\'')
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_generate)

    p = sub.add_parser("report", help="render a saved report")
    p.add_argument("file")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--json", action="store_true")
    g.add_argument("--text", action="store_true")
    p.set_defaults(fn=cmd_report)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_PASS
    if args.verb == "dilate" and args.levels < 1:
        print("error: --levels must be >= 1", file=sys.stderr)
        return EXIT_INPUT
    try:
        cfg = RunConfig.load(args.config)
        return args.fn(args, cfg)
    except (InputError, GeneratorError, FileNotFoundError, json.JSONDecodeError, KeyError,
            ValueError) as exc:
        if isinstance(exc, (FundamentalEquationError, DilationHypothesisError,
                            NotAContractionError)):
            print(f"fail: {exc}", file=sys.stderr)
            return EXIT_FAIL
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

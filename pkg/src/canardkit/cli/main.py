"""Command-line entry point.

Exit codes: 0 success, 2 assumption violation or rejected weights, 1 parse/IO
error (and non-finite states in ``simulate``).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from ..blowup import BlowupError
from ..dynamics import DynamicsError, trajectory_csv
from ..polycore import PolyError
from ..system import FIXTURES, SlowFastSystem, SystemFileError, load_system, parse_box, parse_weights
from . import report as rp
from . import svg
from .schema import validate
from .serialize import SCHEMA_VERSION, dumps
from .verify import format_table, run_checks, verify_report

EXIT_OK, EXIT_ERROR, EXIT_ASSUMPTION = 0, 1, 2


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_ERROR):
        super().__init__(message)
        self.code = code


def _floats(text: str, n: int | None = None) -> tuple[float, ...]:
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if n is not None and len(vals) != n:
        raise argparse.ArgumentTypeError(f"expected {n} numbers, got {text!r}")
    return vals


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _common(p: argparse.ArgumentParser, formats: tuple[str, ...]) -> None:
    p.add_argument("--out", help="write output to this path instead of stdout")
    p.add_argument("--format", choices=formats, default="json")
    p.add_argument("--box", help="xmin,xmax,ymin,ymax (rationals)")
    p.add_argument("--weights", help="a_x,a_y,a_eps")
    p.add_argument("--eps", type=float, help="epsilon override")
    p.add_argument("--delta", type=float, help="Euler step override")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="canardkit", description="Singular canards at transverse self-intersections.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="critical set, stratifications, canard verdicts")
    p.add_argument("file", help="system file, or a built-in fixture name")
    _common(p, ("json", "svg"))

    p = sub.add_parser("blowup", help="weighted blow-up: charts, sphere, equator, connections")
    p.add_argument("file")
    p.add_argument("view", nargs="?", default="equator", choices=("charts", "sphere", "equator", "connect"))
    _common(p, ("json", "svg"))

    p = sub.add_parser("simulate", help="full flow or Euler map with canard metrics")
    p.add_argument("file")
    p.add_argument("--q0", type=lambda s: _floats(s, 2), help="start point x,y")
    p.add_argument("--t-end", type=float, help="end time (default 2/eps)")
    p.add_argument("--tube", type=float, help="tube radius (default max(10 sqrt(eps), 1e-3))")
    p.add_argument("--angles", type=_floats, default=(0.1, -0.1, 0.3, -0.3),
                   help="rotation angles of X1 compared with the aligned run")
    p.add_argument("--delta-sweep", type=_floats, default=(), help="Euler steps for the shadowing check")
    p.add_argument("--euler", action="store_true", help="iterate the Euler map instead of integrating")
    _common(p, ("json", "csv", "svg"))

    p = sub.add_parser("circle-lemma", help="circle dynamics of x' = x^(2k+1) + eps")
    p.add_argument("--k", type=_ints, required=True, help="k or comma-separated list of k")
    p.add_argument("--out")
    p.add_argument("--format", choices=("json",), default="json")

    p = sub.add_parser("verify-paper", help="reproduction checks on the built-in reference systems")
    p.add_argument("--transcritical", help="system file replacing the transcritical fixture")
    p.add_argument("--pitchfork", help="system file replacing the pitchfork fixture")
    p.add_argument("--out", help="also write the JSON report here")
    return ap


def _load(name: str) -> SlowFastSystem:
    if name in FIXTURES and not Path(name).exists():
        return FIXTURES[name]
    try:
        return load_system(name)
    except OSError as exc:
        raise CliError(f"cannot read {name}: {exc.strerror or exc}") from None


def _apply_flags(sys: SlowFastSystem, args) -> SlowFastSystem:
    kw = {}
    if getattr(args, "box", None):
        kw["box"] = parse_box(args.box)
    if getattr(args, "weights", None):
        kw["weights"] = parse_weights(args.weights)
    if getattr(args, "eps", None) is not None:
        kw["epsilon"] = args.eps
    if getattr(args, "delta", None) is not None:
        kw["delta"] = args.delta
    return sys.with_overrides(**kw)


def _emit(text: str, out: str | None, stdout) -> None:
    if out:
        try:
            Path(out).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise CliError(f"cannot write {out}: {exc.strerror or exc}") from None
    else:
        stdout.write(text)


def _json(doc: dict) -> str:
    doc = {"schema": SCHEMA_VERSION, **doc}
    text = dumps(doc)
    validate(json.loads(text))
    return text


def _error_doc(command: str, exc: Exception, component: str | None = None) -> str:
    err = {"type": type(exc).__name__, "message": str(exc)}
    if component:
        err["component"] = component
    return dumps({"schema": SCHEMA_VERSION, "command": command, "error": err, "warnings": []})


def _cmd_analyze(args, stdout) -> int:
    sys_ = _apply_flags(_load(args.file), args)
    doc, code, an = rp.analyze_report(sys_)
    if args.format == "svg":
        canards = [b for rep in an.reports for b in rep.canard_branches]
        text = svg.plane_svg(an.cs, an.box, canards, None, an.points, title=f"{sys_.name}: critical set")
    else:
        text = _json(doc)
    _emit(text, args.out, stdout)
    return code


def _cmd_blowup(args, stdout) -> int:
    sys_ = _apply_flags(_load(args.file), args)
    try:
        doc, extras = rp.blowup_report(sys_, args.view)
    except BlowupError as exc:
        _emit(_error_doc("blowup", exc, exc.component), args.out, stdout)
        return EXIT_ASSUMPTION
    if args.format == "svg":
        text = svg.hemisphere_svg(extras.get("equator", ()), extras.get("orbits", ()),
                                  title=f"{sys_.name}: blown-up hemisphere")
    else:
        text = _json(doc)
    _emit(text, args.out, stdout)
    return EXIT_OK


def _cmd_simulate(args, stdout) -> int:
    sys_ = _apply_flags(_load(args.file), args)
    if args.t_end is not None and args.t_end < 0:
        raise CliError("--t-end must be non-negative")
    opts = rp.SimOptions(
        q0=args.q0, t_end=args.t_end, tube=args.tube, angles=tuple(args.angles),
        delta_sweep=tuple(args.delta_sweep), euler=args.euler,
    )
    try:
        doc, code, trajs = rp.simulate_report(sys_, opts)
    except DynamicsError as exc:
        raise CliError(str(exc)) from None
    if args.format == "csv":
        text = trajectory_csv(trajs["aligned"])
    elif args.format == "svg":
        an = rp.run_analysis(sys_)
        canards = [b for rep in an.reports for b in rep.canard_branches]
        text = svg.plane_svg(an.cs, an.box, canards, trajs, an.points, title=f"{sys_.name}: trajectories")
    else:
        text = _json(doc)
    _emit(text, args.out, stdout)
    return code


def _cmd_circle(args, stdout) -> int:
    if any(k < 1 for k in args.k):
        raise CliError("k must be a positive integer")
    _emit(_json(rp.circle_report(args.k)), args.out, stdout)
    return EXIT_OK


def _cmd_verify(args, stdout) -> int:
    from ..system import PITCHFORK, TRANSCRITICAL

    T = _load(args.transcritical) if args.transcritical else TRANSCRITICAL
    P = _load(args.pitchfork) if args.pitchfork else PITCHFORK
    checks = run_checks(T, P)
    stdout.write(format_table(checks))
    if args.out:
        _emit(_json(verify_report(checks)), args.out, stdout)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_ERROR


COMMANDS = {
    "analyze": _cmd_analyze,
    "blowup": _cmd_blowup,
    "simulate": _cmd_simulate,
    "circle-lemma": _cmd_circle,
    "verify-paper": _cmd_verify,
}


def main(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse usage errors
        return EXIT_ERROR if exc.code else EXIT_OK
    try:
        return COMMANDS[args.command](args, stdout)
    except (SystemFileError, PolyError, CliError) as exc:
        stderr.write(f"canardkit {args.command}: {exc}\n")
        return getattr(exc, "code", EXIT_ERROR)


def run() -> None:
    try:
        code = main()
        sys.stdout.flush()
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the flush at exit
        devnull = os.open(os.devnull, os.O_WRONLY)
        os.dup2(devnull, sys.stdout.fileno())
        code = EXIT_OK
    sys.exit(code)

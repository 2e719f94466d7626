"""Command line interface ``whitehead-calc``.

Data goes to stdout, diagnostics to stderr.  Exit status is 0 on success,
1 for a negative verdict (``validate`` rejects, ``eq`` differs, ``jacobi``
finds a nonzero sum) and 2 for errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import serialize
from .abgroup import FGAbelianGroup, GroupSpecError, finite_wedge_kernel_group, tensor, truncated_W_group
from .dsl import parse
from .earring import (default_horizon, format_standard_form, format_tensor_sequence, phi_inv, project_Q,
                      sf_eq, sf_nonzero_position, sf_sub, to_standard_form)
from .errors import WhiteheadError
from .expr import WedgeSpec, grade, validate
from .rewrite import jacobi_check


class UsageError(WhiteheadError):
    code = "usage_error"


# ----------------------------------------------------------------------
# inputs


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8") if path != "-" else sys.stdin.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _group(spec) -> FGAbelianGroup:
    if isinstance(spec, list):
        return FGAbelianGroup(tuple(int(x) for x in spec))
    if isinstance(spec, int):
        return FGAbelianGroup((spec,))
    try:
        return FGAbelianGroup.parse(str(spec))
    except GroupSpecError as exc:
        raise UsageError(str(exc)) from None


def wedge_from_config(data: dict, grade_n: int | None = None) -> WedgeSpec:
    """Wedge from a sidecar object ``{"groups": [...], "tail": ..., "grade_n": n}``.

    Groups are order lists (``[2, 0]``) or text (``"Z_2 + Z"``); a missing
    ``tail`` means the earring tail ``Z`` and ``null`` a finite wedge.
    """
    if data.get("schema") == serialize.SCHEMA:
        w = serialize.from_json(data)
        return WedgeSpec(w.groups, w.tail, grade_n or w.grade_n)
    groups = tuple(_group(g) for g in data.get("groups", []))
    tail = _group(data["tail"]) if data.get("tail", "Z") is not None else None
    return WedgeSpec(groups, tail, grade_n or int(data.get("grade_n", 2)))


def wedge_from_spec(spec: str, grade_n: int | None = None) -> WedgeSpec:
    """``earring``, a sidecar file, or comma-separated groups (a finite wedge)."""
    if spec == "earring":
        return WedgeSpec.earring(grade_n or 2)
    p = Path(spec)
    if p.suffix == ".json" or p.is_file():
        try:
            return wedge_from_config(json.loads(_read(spec)), grade_n)
        except json.JSONDecodeError as exc:
            raise UsageError(f"{spec}: invalid JSON ({exc.msg})") from None
    return WedgeSpec.finite([_group(s) for s in spec.split(",")], grade_n or 2)


def _wedge(args) -> WedgeSpec:
    if args.wedge:
        return wedge_from_spec(args.wedge, args.grade_n if args.grade_n_given else None)
    return WedgeSpec.earring(args.grade_n)


def _expr(args, path: str):
    wedge = _wedge(args)
    return parse(_read(path), wedge.grade_n), wedge


def _horizon(args) -> int:
    return args.truncate if args.truncate is not None else default_horizon()


# ----------------------------------------------------------------------
# commands


def cmd_validate(args, out) -> int:
    e, wedge = _expr(args, args.file)
    try:
        validate(e, wedge)
    except WhiteheadError as err:
        if args.format == "json":
            out.write(serialize.dumps(serialize.error_to_json(err)) + "\n")
        else:
            out.write(f"invalid: {err}\n")
        return 1
    if args.format == "json":
        out.write(serialize.dumps({"schema": serialize.SCHEMA, "kind": "verdict", "valid": True,
                                   "grade": grade(e)}) + "\n")
    else:
        out.write("ok\n")
    return 0


def _standard(args, path):
    e, wedge = _expr(args, path)
    return to_standard_form(e, wedge)


def cmd_normalize(args, out) -> int:
    sf = _standard(args, args.file)
    if args.format == "json":
        out.write(serialize.dumps(sf) + "\n")
        return 0
    if args.truncate is not None:
        out.write(format_standard_form(sf, args.truncate) + "\n")
        return 0
    out.write(format_standard_form(sf) + "\n")
    if sf.entries:
        n = _horizon(args)
        out.write(f"# table up to index {n}\n")
        out.write(format_standard_form(sf, n) + "\n")
    return 0


def cmd_eq(args, out) -> int:
    a, b = _standard(args, args.file1), _standard(args, args.file2)
    same = sf_eq(a, b)
    if args.format == "json":
        doc = {"schema": serialize.SCHEMA, "kind": "verdict", "equal": same}
        if not same:
            j, s, k, t = sf_nonzero_position(sf_sub(a, b))
            doc["witness"] = [str(j), str(s), str(k), str(t)]
        out.write(serialize.dumps(doc) + "\n")
    elif same:
        out.write("equal\n")
    else:
        j, s, k, t = sf_nonzero_position(sf_sub(a, b))
        out.write(f"different at (j={j}, s={s}, k={k}, t={t}): "
                  f"{a.value(j, s, k, t)} vs {b.value(j, s, k, t)}\n")
    return 0 if same else 1


def cmd_phi_inv(args, out) -> int:
    ts = phi_inv(_standard(args, args.file))
    out.write((serialize.dumps(ts) if args.format == "json" else format_tensor_sequence(ts)) + "\n")
    return 0


def cmd_project(args, out) -> int:
    sf = _standard(args, args.file)
    x = project_Q(args.K, args.J, sf)
    out.write((serialize.dumps(x) if args.format == "json" else str(x)) + "\n")
    return 0


def _write_group(args, out, g: FGAbelianGroup) -> int:
    out.write((serialize.dumps(g) if args.format == "json" else str(g)) + "\n")
    return 0


def cmd_group(args, out) -> int:
    if args.finite_wedge:
        w = wedge_from_spec(args.finite_wedge, args.grade_n)
        if w.tail is not None:
            raise UsageError("--finite-wedge needs a finite list of groups")
        return _write_group(args, out, finite_wedge_kernel_group(list(w.groups)))
    spec, n = args.truncated
    try:
        horizon = int(n)
    except ValueError:
        raise UsageError(f"horizon must be an integer, got {n!r}") from None
    w = wedge_from_spec(spec, args.grade_n)
    try:
        return _write_group(args, out, truncated_W_group(w, horizon))
    except (IndexError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def cmd_tensor(args, out) -> int:
    return _write_group(args, out, tensor(_group(args.spec1), _group(args.spec2)).canonical())


def cmd_jacobi(args, out) -> int:
    wedge = _wedge(args)
    f, g, h = (parse(_read(p), wedge.grade_n) for p in (args.file1, args.file2, args.file3))
    depth = args.depth if args.depth is not None else default_horizon()
    ok = jacobi_check(f, g, h, depth)
    if args.format == "json":
        out.write(serialize.dumps({"schema": serialize.SCHEMA, "kind": "verdict", "zero": ok,
                                   "depth": str(depth)}) + "\n")
    else:
        out.write(("zero" if ok else "nonzero") + "\n")
    return 0 if ok else 1


# ----------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    # defaults are filled in by main() so the flags work before or after
    # the subcommand
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--wedge", metavar="FILE", help="wedge sidecar (JSON); default: the earring")
    common.add_argument("--grade-n", type=int, help="sphere dimension n (default 2)")
    common.add_argument("--format", choices=("text", "json"), help="output format (default text)")
    common.add_argument("--truncate", type=int, metavar="N",
                        help="table horizon (default $WHITEHEAD_CALC_TRUNCATE or 8)")

    p = argparse.ArgumentParser(prog="whitehead-calc", parents=[common],
                                description="Whitehead products in shrinking wedges of spheres.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", parents=[common], help="check clustering and wedge-disjointness")
    s.add_argument("file")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("normalize", parents=[common], help="print the standard form")
    s.add_argument("file")
    s.set_defaults(func=cmd_normalize)

    s = sub.add_parser("eq", parents=[common], help="compare two expressions")
    s.add_argument("file1")
    s.add_argument("file2")
    s.set_defaults(func=cmd_eq)

    s = sub.add_parser("phi-inv", parents=[common], help="print the tensor sequence")
    s.add_argument("file")
    s.set_defaults(func=cmd_phi_inv)

    s = sub.add_parser("project", parents=[common], help="(K, J) tensor coordinate")
    s.add_argument("file")
    s.add_argument("K", type=int)
    s.add_argument("J", type=int)
    s.set_defaults(func=cmd_project)

    s = sub.add_parser("group", parents=[common], help="kernel and truncated W groups")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--finite-wedge", metavar="SPEC")
    g.add_argument("--truncated", nargs=2, metavar=("SPEC", "N"))
    s.set_defaults(func=cmd_group)

    s = sub.add_parser("tensor", parents=[common], help="tensor product of two groups")
    s.add_argument("spec1")
    s.add_argument("spec2")
    s.set_defaults(func=cmd_tensor)

    s = sub.add_parser("jacobi", parents=[common], help="check the graded Jacobi identity")
    s.add_argument("file1")
    s.add_argument("file2")
    s.add_argument("file3")
    s.add_argument("--depth", type=int, default=None)
    s.set_defaults(func=cmd_jacobi)
    return p


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    for name, value in (("wedge", None), ("format", "text"), ("truncate", None)):
        if not hasattr(args, name):
            setattr(args, name, value)
    args.grade_n_given = hasattr(args, "grade_n")
    if not args.grade_n_given:
        args.grade_n = 2
    try:
        return args.func(args, out)
    except (WhiteheadError, IndexError, ValueError) as exc:
        if args.format == "json":
            err.write(serialize.dumps(serialize.error_to_json(exc)) + "\n")
        else:
            err.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())

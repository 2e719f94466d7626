"""JSON encoding ``whitehead-calc/v1``.

Every document is an object with ``"schema": "whitehead-calc/v1"`` and a
``"kind"``.  Integers that carry data (coefficients, orders, table values,
subscript constants) are decimal strings so precision never depends on the
reader; small structural integers (``grade_n``, generator labels) are JSON
numbers.  Polynomials are ``{"vars": [...], "coeffs": {"e1,e2,...": c}}``
where the key lists the exponent of each variable in ``vars`` order and ``c``
is a decimal string, or ``"p/q"`` for the rational coefficients that appear in
intermediate sums.

:func:`dumps` is deterministic: keys are sorted and lists keep a canonical
order, so equal values give byte-identical text.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any

from .abgroup import FGAbelianGroup, TensorElement
from .affine import Affine, Cong, Eq, Ineq, LinForm
from .earring import Entry, StandardForm, TensorSequence
from .errors import WhiteheadError
from .expr import (Bracket, Const, FinSum, Gen, InfSum, IntMul, LoopExpr, Neg, Schema, SupportDesc,
                   WedgeSpec)
from .poly import Poly

SCHEMA = "whitehead-calc/v1"


class SchemaError(WhiteheadError):
    code = "schema_error"


# ----------------------------------------------------------------------
# scalars


def _num(v) -> str:
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    return str(int(v))


def _parse_num(text) -> int | Fraction:
    if not isinstance(text, str):
        raise SchemaError(f"expected a decimal string, got {text!r}")
    try:
        if "/" in text:
            v = Fraction(text)
            return int(v) if v.denominator == 1 else v
        return int(text)
    except ValueError:
        raise SchemaError(f"not a number: {text!r}") from None


def _int(text) -> int:
    v = _parse_num(text)
    if isinstance(v, Fraction):
        raise SchemaError(f"expected an integer, got {text!r}")
    return v


def poly_to_json(p: Poly, variables=None) -> dict:
    names = sorted(variables if variables is not None else p.variables())
    coeffs = {}
    for mono, c in p.terms:
        exps = dict(mono)
        coeffs[",".join(str(exps.get(v, 0)) for v in names)] = _num(c)
    return {"vars": names, "coeffs": coeffs}


def poly_from_json(d: dict) -> Poly:
    names = d["vars"]
    terms = []
    for key, c in d["coeffs"].items():
        exps = [int(x) for x in key.split(",")] if key else []
        if len(exps) != len(names):
            raise SchemaError(f"monomial {key!r} does not match variables {names}")
        terms.append((tuple((v, e) for v, e in zip(names, exps) if e), _parse_num(c)))
    return Poly(terms)


def _lin_to_json(f: LinForm) -> dict:
    return {"coeffs": {v: _num(a) for v, a in sorted(f.coeffs.items())}, "const": _num(f.const)}


def _lin_from_json(d: dict) -> LinForm:
    return LinForm({v: _parse_num(a) for v, a in d["coeffs"].items()}, _parse_num(d["const"]))


def constraint_to_json(c) -> dict:
    out = _lin_to_json(c.form)
    if isinstance(c, Ineq):
        out["op"] = ">="
    elif isinstance(c, Eq):
        out["op"] = "="
    else:
        out["op"] = "mod"
        out["modulus"] = _num(c.modulus)
    return out


def constraint_from_json(d: dict):
    f = _lin_from_json(d)
    op = d.get("op")
    if op == ">=":
        return Ineq(f)
    if op == "=":
        return Eq(f)
    if op == "mod":
        return Cong(f, _int(d["modulus"]))
    raise SchemaError(f"unknown constraint operator {op!r}")


def _affine_to_json(a: Affine) -> dict:
    return {"var": a.var, "coeff": _num(a.coeff), "const": _num(a.const)}


def _affine_from_json(d: dict) -> Affine:
    if d["var"] is None:
        return Affine.constant(_int(d["const"]))
    return Affine(_int(d["coeff"]), d["var"], _int(d["const"]))


# ----------------------------------------------------------------------
# groups and wedges


def group_to_json(g: FGAbelianGroup) -> list:
    return [_num(o) for o in g.orders]


def group_from_json(d: list) -> FGAbelianGroup:
    return FGAbelianGroup(tuple(_int(o) for o in d))


def wedge_to_json(w: WedgeSpec) -> dict:
    return {"groups": [group_to_json(g) for g in w.groups],
            "tail": None if w.tail is None else group_to_json(w.tail),
            "grade_n": w.grade_n}


def wedge_from_json(d: dict) -> WedgeSpec:
    tail = None if d.get("tail") is None else group_from_json(d["tail"])
    return WedgeSpec(tuple(group_from_json(g) for g in d.get("groups", [])), tail,
                     int(d.get("grade_n", 2)))


# ----------------------------------------------------------------------
# expressions


def expr_to_json(e: LoopExpr) -> dict:
    if isinstance(e, Gen):
        return {"node": "gen", "sub": _affine_to_json(e.sub), "label": e.label, "grade": e.gen_grade}
    if isinstance(e, Const):
        return {"node": "const", "grade": e.const_grade}
    if isinstance(e, Neg):
        return {"node": "neg", "arg": expr_to_json(e.arg)}
    if isinstance(e, IntMul):
        return {"node": "mul", "coeff": poly_to_json(e.coeff), "arg": expr_to_json(e.arg)}
    if isinstance(e, FinSum):
        return {"node": "sum", "args": [expr_to_json(a) for a in e.args]}
    if isinstance(e, InfSum):
        return {"node": "infsum", "var": e.var, "bounds": [_affine_to_json(b) for b in e.bounds],
                "body": expr_to_json(e.body)}
    if isinstance(e, Bracket):
        return {"node": "bracket", "left": expr_to_json(e.left), "right": expr_to_json(e.right)}
    raise TypeError(f"not an expression: {e!r}")


def expr_from_json(d: dict) -> LoopExpr:
    node = d.get("node")
    if node == "gen":
        return Gen(_affine_from_json(d["sub"]), int(d["label"]), int(d["grade"]))
    if node == "const":
        return Const(int(d["grade"]))
    if node == "neg":
        return Neg(expr_from_json(d["arg"]))
    if node == "mul":
        return IntMul(poly_from_json(d["coeff"]), expr_from_json(d["arg"]))
    if node == "sum":
        return FinSum(tuple(expr_from_json(a) for a in d["args"]))
    if node == "infsum":
        return InfSum(d["var"], tuple(_affine_from_json(b) for b in d["bounds"]), expr_from_json(d["body"]))
    if node == "bracket":
        return Bracket(expr_from_json(d["left"]), expr_from_json(d["right"]))
    raise SchemaError(f"unknown expression node {node!r}")


def support_to_json(s: SupportDesc) -> dict:
    return {"schemas": [{"sub": _affine_to_json(sc.sub),
                         "context": [{"var": v, "bounds": [_affine_to_json(b) for b in bs]}
                                     for v, bs in sc.context]} for sc in s.schemas]}


def support_from_json(d: dict) -> SupportDesc:
    schemas = []
    for sc in d["schemas"]:
        ctx = tuple((c["var"], tuple(_affine_from_json(b) for b in c["bounds"])) for c in sc["context"])
        schemas.append(Schema(_affine_from_json(sc["sub"]), ctx))
    return SupportDesc(tuple(schemas))


# ----------------------------------------------------------------------
# tables and tensors


def _entry_to_json(e: Entry) -> dict:
    return {"region": [constraint_to_json(c) for c in e.region], "j_gen": e.j_gen, "k_gen": e.k_gen,
            "coeff": poly_to_json(e.coeff, ("j", "k"))}


def _entry_from_json(d: dict) -> Entry:
    return Entry(tuple(constraint_from_json(c) for c in d["region"]), int(d["j_gen"]),
                 int(d["k_gen"]), poly_from_json(d["coeff"]))


def standard_form_body(sf: StandardForm) -> dict:
    return {"grade_n": sf.wedge.grade_n,
            "wedge": wedge_to_json(sf.wedge),
            "entries": [_entry_to_json(e) for e in sf.entries],
            "overrides": [[_num(x) for x in (*key, v)] for key, v in sf.overrides]}


def standard_form_from_json(d: dict) -> StandardForm:
    wedge = wedge_from_json(d["wedge"]) if "wedge" in d else WedgeSpec.earring(int(d["grade_n"]))
    overrides = []
    for row in d["overrides"]:
        j, s, k, t, c = (_int(x) for x in row)
        overrides.append(((j, s, k, t), c))
    return StandardForm(wedge, tuple(_entry_from_json(e) for e in d["entries"]), tuple(overrides))


def tensor_element_body(x: TensorElement) -> dict:
    return {"left": group_to_json(x.left), "right": group_to_json(x.right),
            "coords": [[str(s), str(t), _num(c)] for (s, t), c in x.coords]}


def tensor_element_from_json(d: dict) -> TensorElement:
    coords = {(_int(s), _int(t)): _int(c) for s, t, c in d["coords"]}
    return TensorElement(group_from_json(d["left"]), group_from_json(d["right"]), coords)


def tensor_sequence_body(ts: TensorSequence) -> dict:
    return {"grade_n": ts.wedge.grade_n,
            "wedge": wedge_to_json(ts.wedge),
            "rows": [{"j": _num(j), "s": _num(s), "components": [[_num(k), _num(t), _num(c)] for k, t, c in comps]}
                     for j, s, comps in ts.rows],
            "entries": [_entry_to_json(e) for e in ts.schematic]}


def tensor_sequence_from_json(d: dict) -> TensorSequence:
    rows = tuple((_int(r["j"]), _int(r["s"]), tuple(tuple(_int(x) for x in c) for c in r["components"]))
                 for r in d["rows"])
    return TensorSequence(wedge_from_json(d["wedge"]), rows,
                          tuple(_entry_from_json(e) for e in d["entries"]))


# ----------------------------------------------------------------------
# documents

_KINDS = {
    "standard_form": (StandardForm, standard_form_body, standard_form_from_json),
    "tensor_sequence": (TensorSequence, tensor_sequence_body, tensor_sequence_from_json),
    "tensor_element": (TensorElement, tensor_element_body, tensor_element_from_json),
    "group": (FGAbelianGroup, lambda g: {"orders": group_to_json(g)}, lambda d: group_from_json(d["orders"])),
    "support": (SupportDesc, support_to_json, support_from_json),
    "expr": (LoopExpr, lambda e: {"expr": expr_to_json(e)}, lambda d: expr_from_json(d["expr"])),
    "wedge": (WedgeSpec, lambda w: {"wedge": wedge_to_json(w)}, lambda d: wedge_from_json(d["wedge"])),
}


def to_json(value: Any) -> dict:
    """Wrap ``value`` in a ``whitehead-calc/v1`` document."""
    for kind, (cls, body, _) in _KINDS.items():
        if isinstance(value, cls):
            return {"schema": SCHEMA, "kind": kind, **body(value)}
    raise TypeError(f"no JSON encoding for {type(value).__name__}")


def from_json(doc: dict) -> Any:
    if doc.get("schema") != SCHEMA:
        raise SchemaError(f"expected schema {SCHEMA!r}, got {doc.get('schema')!r}")
    kind = doc.get("kind")
    if kind not in _KINDS:
        raise SchemaError(f"unknown kind {kind!r}")
    return _KINDS[kind][2](doc)


def error_to_json(err: Exception) -> dict:
    body = err.to_json() if isinstance(err, WhiteheadError) else {"error": type(err).__name__,
                                                                  "message": str(err)}
    return {"schema": SCHEMA, "kind": "error", **body}


def dumps(value: Any) -> str:
    doc = value if isinstance(value, dict) else to_json(value)
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False)


def loads(text: str) -> Any:
    return from_json(json.loads(text))

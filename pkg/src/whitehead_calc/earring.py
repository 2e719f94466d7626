"""Standard forms of elements of the closure W of wedge-disjoint brackets.

Every element is ``sum_j [l_j, sum_{k>j} m_{j,k} l_k]`` for a unique table
``m``; with several generators per summand the table is indexed by
``(j, s, k, t)`` and ``m`` lives in ``Z_gcd(d_{j,s}, d_{k,t})``.

A :class:`StandardForm` stores the table as

* schematic ``entries``: a region over ``(j, k)``, a generator pair and a
  polynomial in ``j, k``.  Entries add up where they overlap.
* ``overrides``: explicit values at finitely many positions, superseding the
  entries there.

The tensor side of the isomorphism is a :class:`TensorSequence` whose
``j``-th row is ``sum_s e_s (x) h_{j,s}`` with ``h_{j,s}`` in the product of
the later summands.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Iterable, Mapping, Sequence

from .abgroup import FGAbelianGroup, TensorElement, reduce_mod
from .affine import Eq, Ineq, LinForm, constraint_key, implied, integer_points, simplify, var_bounds
from .errors import GradeMismatch, HeterogeneousSchema, NotInW, WedgeMismatch
from .expr import (Bracket, Const, FinSum, Gen, InfSum, IntMul, LoopExpr, Neg, WedgeSpec, grade,
                   support, truncate, validate)
from .poly import Poly
from .regions import evaluate_pieces, find_nonzero, sum_out
from .errors import InvalidExpression
from .rewrite import NormalExpr, collect, finite_vector, normalize

DEFAULT_HORIZON = 8


def default_horizon() -> int:
    """Horizon from ``WHITEHEAD_CALC_TRUNCATE``, falling back to 8."""
    raw = os.environ.get("WHITEHEAD_CALC_TRUNCATE", "")
    try:
        value = int(raw)
    except ValueError:
        return DEFAULT_HORIZON
    return value if value >= 1 else DEFAULT_HORIZON


@dataclass(frozen=True)
class Entry:
    region: tuple
    j_gen: int
    k_gen: int
    coeff: Poly

    def holds(self, j: int, k: int) -> bool:
        env = {"j": j, "k": k}
        return all(c.holds(env) for c in self.region)

    def key(self):
        return (self.j_gen, self.k_gen, tuple(constraint_key(c) for c in self.region),
                self.coeff.sort_key())

    def __str__(self):
        conds = ", ".join(_constraint_text(c) for c in self.region)
        return f"M(j:{self.j_gen},k:{self.k_gen})={self.coeff} for {conds}"


def _constraint_text(c) -> str:
    return str(c)


def pair_order(wedge: WedgeSpec, j: int, s: int, k: int, t: int) -> int:
    return gcd(wedge.order(j, s), wedge.order(k, t))


@dataclass(frozen=True)
class StandardForm:
    wedge: WedgeSpec
    entries: tuple = ()
    overrides: tuple = ()  # (((j, s, k, t), value), ...)

    # -- evaluation ---------------------------------------------------
    def schematic_value(self, j: int, s: int, k: int, t: int) -> int:
        total = 0
        for e in self.entries:
            if e.j_gen == s and e.k_gen == t and e.holds(j, k):
                total += e.coeff.evaluate({"j": j, "k": k})
        return _as_int(total)

    def value(self, j: int, s: int, k: int, t: int) -> int:
        if not 1 <= j < k:
            raise IndexError(f"table positions need 1 <= j < k, got ({j}, {k})")
        over = dict(self.overrides)
        if (j, s, k, t) in over:
            return over[(j, s, k, t)]
        return reduce_mod(self.schematic_value(j, s, k, t), pair_order(self.wedge, j, s, k, t))

    def table(self, horizon: int) -> dict:
        """Nonzero values ``{(j, s, k, t): m}`` with ``k <= horizon``."""
        out: dict = {}
        for e in self.entries:
            cons = list(e.region) + [Ineq(LinForm.constant(horizon) - LinForm.var("k"))]
            for pt in integer_points(cons, ["j", "k"]):
                key = (pt["j"], e.j_gen, pt["k"], e.k_gen)
                out[key] = out.get(key, 0) + e.coeff.evaluate(pt)
        for key, v in self.overrides:
            if key[2] <= horizon:
                out[key] = v
        result = {}
        for key in sorted(out):
            v = reduce_mod(_as_int(out[key]), pair_order(self.wedge, *key))
            if v:
                result[key] = v
        return result

    @property
    def is_finite(self) -> bool:
        return not self.entries

    def __str__(self):
        return format_standard_form(self)


def _as_int(v) -> int:
    if isinstance(v, Fraction):
        if v.denominator != 1:
            raise ArithmeticError(f"table value {v} is not an integer")
        return int(v.numerator)
    return int(v)


# ----------------------------------------------------------------------
# construction


def _entry_modulus(wedge: WedgeSpec, region, s: int, t: int) -> int:
    h = wedge.homogeneous_from()
    jb = var_bounds(region, "j")
    if jb is None:
        return 0
    lo, hi = jb
    if lo is not None and lo == hi:
        gj = wedge.group(lo)
    elif lo is not None and lo >= h:
        gj = wedge.tail
    else:
        raise HeterogeneousSchema("schematic rows must lie where the wedge is homogeneous")
    if wedge.tail is None:
        raise HeterogeneousSchema("a finite wedge admits only finitely supported tables")
    if not (0 <= s < len(gj.orders) and 0 <= t < len(wedge.tail.orders)):
        raise InvalidExpression(f"generator pair ({s}, {t}) out of range")
    return gcd(gj.orders[s], wedge.tail.orders[t])


def _split_prefix(wedge: WedgeSpec, region: tuple) -> list:
    """Cut a region so every piece either fixes ``j`` below the homogeneous
    tail or lies inside it, and fixes ``k`` when ``k`` is below it."""
    h = wedge.homogeneous_from()
    if h <= 1:
        return [region]
    out = []
    jb = var_bounds(region, "j")
    if jb is None:
        return []
    lo = jb[0] if jb[0] is not None else 1
    for j0 in range(max(lo, 1), h):
        sub = simplify(list(region) + [Eq(LinForm.var("j") - j0)])
        if sub is None:
            continue
        kb = var_bounds(sub, "k")
        if kb is None:
            continue
        klo = kb[0] if kb[0] is not None else 1
        for k0 in range(klo, h):
            pt = simplify(list(sub) + [Eq(LinForm.var("k") - k0)])
            if pt is not None:
                out.append(tuple(pt))
        tail = simplify(list(sub) + [Ineq(LinForm.var("k") - h)])
        if tail is not None:
            out.append(tuple(tail))
    rest = simplify(list(region) + [Ineq(LinForm.var("j") - h)])
    if rest is not None:
        out.append(tuple(rest))
    return out


def _prune_region(region) -> tuple:
    """Drop inequalities implied by the remaining constraints."""
    cons = list(region)
    i = 0
    while i < len(cons):
        rest = cons[:i] + cons[i + 1:]
        if isinstance(cons[i], Ineq) and implied(rest, cons[i]):
            cons = rest
            continue
        i += 1
    return tuple(cons)


def _is_bounded(region) -> bool:
    for v in ("j", "k"):
        b = var_bounds(region, v)
        if b is None:
            return True
        if b[0] is None or b[1] is None:
            return False
    return True


def build_standard_form(wedge: WedgeSpec, pieces: Iterable, points: Mapping | None = None) -> StandardForm:
    """Assemble a standard form from schematic ``pieces`` ``(region, s, t, poly)``
    and explicit additive ``points`` ``{(j, s, k, t): value}``."""
    contrib: dict = dict(points or {})
    merged: dict = {}
    for region, s, t, poly in pieces:
        region = simplify(list(region) + [Ineq(LinForm.var("j") - 1),
                                          Ineq(LinForm.var("k") - LinForm.var("j") - 1)])
        if region is None:
            continue
        for part in _split_prefix(wedge, tuple(region)):
            if _is_bounded(part):
                for pt in integer_points(list(part), ["j", "k"]):
                    key = (pt["j"], s, pt["k"], t)
                    contrib[key] = contrib.get(key, 0) + _as_int(poly.evaluate(pt))
                continue
            part = _prune_region(part)
            m = _entry_modulus(wedge, part, s, t)
            key = (part, s, t)
            merged[key] = (merged.get(key, (Poly(), m))[0] + poly, m)
    entries = []
    for (region, s, t), (poly, m) in merged.items():
        poly = poly.reduce_mod(m)
        if not poly.is_zero():
            entries.append(Entry(region, s, t, poly))
    entries.sort(key=Entry.key)
    sf = StandardForm(wedge, tuple(entries), ())
    overrides = []
    for key in sorted(contrib):
        j, s, k, t = key
        if not 1 <= j < k:
            raise NotInW(f"table position ({j}, {k}) is not above the diagonal")
        order = pair_order(wedge, j, s, k, t)
        base = sf.schematic_value(*key)
        v = reduce_mod(base + contrib[key], order)
        if v != reduce_mod(base, order) or (v == 0 and reduce_mod(base, order) != 0):
            overrides.append((key, v))
        elif contrib[key] % order if order else contrib[key]:
            overrides.append((key, v))
    return StandardForm(wedge, tuple(entries), tuple(overrides))


def _wedge_for(e: LoopExpr, wedge: WedgeSpec | None) -> WedgeSpec:
    if wedge is not None:
        return wedge
    gens = [g for g in _gens(e)]
    n = gens[0].gen_grade if gens else 2
    return WedgeSpec.earring(n)


def _gens(e):
    from .expr import gens

    return gens(e)


def to_standard_form(e: LoopExpr | NormalExpr, wedge: WedgeSpec | None = None,
                     *, check: bool = True) -> StandardForm:
    """Coefficient table of a valid grade ``2n-1`` expression."""
    if isinstance(e, NormalExpr):
        nf = e
        wedge = wedge or WedgeSpec.earring((nf.grade + 1) // 2)
    else:
        wedge = _wedge_for(e, wedge)
        g = grade(e)
        if g != 2 * wedge.grade_n - 1:
            raise GradeMismatch(f"expected grade {2 * wedge.grade_n - 1}, got {g}")
        if check:
            validate(e, wedge)
        nf = normalize(e)
    return normal_to_standard(nf, wedge)


def normal_to_standard(nf: NormalExpr, wedge: WedgeSpec) -> StandardForm:
    pieces = []
    points: dict = {}
    for term in nf.terms:
        for ref in (term.left, term.right):
            if ref.grade != wedge.grade_n:
                raise GradeMismatch(f"generator {ref} has grade {ref.grade}, wedge has {wedge.grade_n}")
        if not term.vars:
            key = (term.left.sub.const, term.left.label, term.right.sub.const, term.right.label)
            points[key] = points.get(key, 0) + _as_int(term.coeff.constant_value())
            continue
        ren = {v: f"_x{i}" for i, v in enumerate(term.vars)}
        cons = [c.rename(ren) for c in term.constraints]
        a = term.left.sub.rename(ren)
        b = term.right.sub.rename(ren)
        for region, poly in sum_out(list(ren.values()), cons, term.coeff.rename(ren),
                                    (a.coeff, a.var, a.const), (b.coeff, b.var, b.const)):
            pieces.append((region, term.left.label, term.right.label, poly))
    return build_standard_form(wedge, pieces, points)


# ----------------------------------------------------------------------
# group structure


def _same_wedge(a: StandardForm, b: StandardForm):
    if a.wedge != b.wedge:
        raise WedgeMismatch("standard forms over different wedges")


def _pieces_of(sf: StandardForm, sign: int = 1) -> list:
    return [(e.region, e.j_gen, e.k_gen, e.coeff * sign) for e in sf.entries]


def sf_add(a: StandardForm, b: StandardForm) -> StandardForm:
    _same_wedge(a, b)
    pieces = _pieces_of(a) + _pieces_of(b)
    points = {}
    for key in set(dict(a.overrides)) | set(dict(b.overrides)):
        # overrides supersede the schema; add the difference back as a point
        points[key] = (a.value(*key) - a.schematic_value(*key)
                       + b.value(*key) - b.schematic_value(*key))
    return build_standard_form(a.wedge, pieces, points)


def sf_neg(a: StandardForm) -> StandardForm:
    points = {key: -(v - a.schematic_value(*key)) for key, v in a.overrides}
    return build_standard_form(a.wedge, _pieces_of(a, -1), points)


def sf_sub(a: StandardForm, b: StandardForm) -> StandardForm:
    return sf_add(a, sf_neg(b))


def sf_nonzero_position(a: StandardForm) -> tuple | None:
    """Some ``(j, s, k, t)`` with a nonzero coefficient, or ``None``."""
    for key, v in a.overrides:
        if v:
            return key
    groups: dict = {}
    for e in a.entries:
        m = _entry_modulus(a.wedge, e.region, e.j_gen, e.k_gen)
        groups.setdefault((e.j_gen, e.k_gen, m), []).append((e.region, e.coeff))
    over = {key for key, _ in a.overrides}
    for (s, t, m), pieces in sorted(groups.items()):
        exclude = [(j, k) for (j, s2, k, t2) in over if (s2, t2) == (s, t)]
        hit = find_nonzero(pieces, m, exclude)
        if hit is not None:
            return (hit["j"], s, hit["k"], t)
    return None


def sf_is_zero(a: StandardForm) -> bool:
    return sf_nonzero_position(a) is None


def sf_eq(a: StandardForm, b: StandardForm) -> bool:
    _same_wedge(a, b)
    if a == b:
        return True
    return sf_is_zero(sf_sub(a, b))


def project_Q(K: int, j: int, sf: StandardForm) -> TensorElement:
    """The ``(K, j)`` coordinate of ``sf`` in ``G_K (x) G_j``."""
    if not 1 <= K < j:
        raise IndexError(f"project_Q needs 1 <= K < j, got K={K}, j={j}")
    gk, gj = sf.wedge.group(K), sf.wedge.group(j)
    coords = {}
    for s in range(len(gk.orders)):
        for t in range(len(gj.orders)):
            v = sf.value(K, s, j, t)
            if v:
                coords[(s, t)] = v
    return TensorElement(gk, gj, coords)


# ----------------------------------------------------------------------
# tensor sequences and the isomorphism


@dataclass(frozen=True)
class TensorSequence:
    """``(sum_s e_s (x) h_{j,s})_j``.

    ``rows`` holds finitely supported components ``(j, s, ((k, t, c), ...))``;
    ``schematic`` holds entries describing infinite tails row by row (row
    ``j`` of an entry is ``e_s (x) (coeff(j,k) f_t)_{k in region}``).
    """

    wedge: WedgeSpec
    rows: tuple = ()
    schematic: tuple = ()

    def __add__(self, other: "TensorSequence") -> "TensorSequence":
        if self.wedge != other.wedge:
            raise WedgeMismatch("tensor sequences over different wedges")
        return TensorSequence(self.wedge, self.rows + other.rows, self.schematic + other.schematic)

    def row(self, j: int) -> dict:
        """Explicit part of row ``j``: ``{s: {(k, t): c}}``."""
        out: dict = {}
        for jj, s, comps in self.rows:
            if jj == j:
                d = out.setdefault(s, {})
                for k, t, c in comps:
                    d[(k, t)] = d.get((k, t), 0) + c
        return out

    def normalized(self) -> "TensorSequence":
        return phi_inv(phi(self))

    def __str__(self):
        return format_tensor_sequence(self)


def simple_tensor(wedge: WedgeSpec, j: int, a: Sequence[int], b: Mapping) -> TensorSequence:
    """The sequence with ``a (x) b`` in row ``j``; ``b`` maps ``(k, t)`` to ints."""
    rows = []
    for s, x in enumerate(a):
        if x:
            rows.append((j, s, tuple(sorted((k, t, x * c) for (k, t), c in b.items()))))
    return TensorSequence(wedge, tuple(rows), ())


def phi(ts: TensorSequence) -> StandardForm:
    """Expand every simple tensor ``e_s (x) c f_t`` into the table entry ``(j, s, k, t)``."""
    points: dict = {}
    for j, s, comps in ts.rows:
        for k, t, c in comps:
            if k <= j:
                raise IndexError(f"row {j} has a component at index {k} <= {j}")
            key = (j, s, k, t)
            points[key] = points.get(key, 0) + c
    pieces = [(e.region, e.j_gen, e.k_gen, e.coeff) for e in ts.schematic]
    return build_standard_form(ts.wedge, pieces, points)


def phi_inv(sf: StandardForm) -> TensorSequence:
    """Row-wise reassembly; ``phi(phi_inv(sf)) == sf``."""
    byrow: dict = {}
    for (j, s, k, t), v in sf.overrides:
        c = v - sf.schematic_value(j, s, k, t)
        c = reduce_mod(c, pair_order(sf.wedge, j, s, k, t))
        if c:
            byrow.setdefault((j, s), []).append((k, t, c))
    rows = tuple((j, s, tuple(sorted(comps))) for (j, s), comps in sorted(byrow.items()))
    return TensorSequence(sf.wedge, rows, sf.entries)


# ----------------------------------------------------------------------
# kernel of the summation map


def restrict_to(e: LoopExpr, index: int) -> LoopExpr:
    """Keep only generators in summand ``index`` (closed finite ``e``)."""
    if isinstance(e, Gen):
        return e if e.sub.evaluate({}) == index else Const(e.gen_grade)
    if isinstance(e, Const):
        return e
    if isinstance(e, Neg):
        return Neg(restrict_to(e.arg, index))
    if isinstance(e, IntMul):
        return IntMul(e.coeff, restrict_to(e.arg, index))
    if isinstance(e, FinSum):
        return FinSum(tuple(restrict_to(a, index) for a in e.args))
    if isinstance(e, Bracket):
        return Bracket(restrict_to(e.left, index), restrict_to(e.right, index))
    raise InvalidExpression("restrict_to needs a truncated expression")


def sigma_kernel_check(e: LoopExpr, horizon: int | None = None) -> bool:
    """Whether every retraction onto a single summand kills ``e``, checked at
    all summands up to ``horizon``."""
    horizon = horizon or default_horizon()
    try:
        t = truncate(e, horizon)
        indices = sorted(support(t).indices({}, horizon))
        for i in indices:
            r = restrict_to(t, i)
            if any(isinstance(x, Bracket) for x in _walk(r)):
                if collect(r).terms:
                    return False
            elif finite_vector(r):
                return False
    except Exception:
        return False
    return True


def _walk(e):
    from .expr import _nodes

    return _nodes(e)


# ----------------------------------------------------------------------
# text


def _gen_text(wedge: WedgeSpec, j: int, s: int) -> str:
    try:
        single = len(wedge.group(j).orders) == 1
    except IndexError:
        single = False
    return f"{j}" if single and s == 0 else f"{j}:{s}"


def format_standard_form(sf: StandardForm, horizon: int | None = None) -> str:
    lines = []
    if horizon is not None:
        for (j, s, k, t), v in sf.table(horizon).items():
            lines.append(f"M({_gen_text(sf.wedge, j, s)},{_gen_text(sf.wedge, k, t)})={v}")
        return "\n".join(lines) if lines else "0"
    for e in sf.entries:
        conds = ", ".join(_region_text(c) for c in e.region)
        lab = "" if (e.j_gen, e.k_gen) == (0, 0) else f"[{e.j_gen},{e.k_gen}]"
        lines.append(f"M(j,k){lab}={_poly_text(e.coeff)} for {conds}")
    for (j, s, k, t), v in sf.overrides:
        lines.append(f"M({_gen_text(sf.wedge, j, s)},{_gen_text(sf.wedge, k, t)})={v}")
    return "\n".join(lines) if lines else "0"


def _poly_text(p: Poly) -> str:
    return str(p)


def _region_text(c) -> str:
    from .affine import Cong

    f = c.form
    pos = LinForm({v: a for v, a in f.coeffs.items() if a > 0}, 0)
    neg = LinForm({v: -a for v, a in f.coeffs.items() if a < 0}, 0)
    if isinstance(c, Cong):
        return f"{f} = 0 mod {c.modulus}"
    op = "=" if isinstance(c, Eq) else ">="
    lhs, rhs = pos, neg - f.const
    return f"{_lin_text(lhs)} {op} {_lin_text(rhs)}"


def _lin_text(f: LinForm) -> str:
    parts = []
    for v, a in f.coeffs.items():
        parts.append(v if a == 1 else f"{a}{v}")
    text = " + ".join(parts)
    if f.const or not parts:
        if parts:
            text += f" + {f.const}" if f.const > 0 else f" - {-f.const}"
        else:
            text = str(f.const)
    return text


def format_tensor_sequence(ts: TensorSequence) -> str:
    lines = []
    for j, s, comps in ts.rows:
        body = " + ".join(f"{c}*[l_{_gen_text(ts.wedge, k, t)}]" for k, t, c in comps)
        lines.append(f"g_{j} += [l_{_gen_text(ts.wedge, j, s)}] (x) ({body})")
    single = ts.wedge.tail is not None and len(ts.wedge.tail.orders) == 1
    for e in ts.schematic:
        conds = ", ".join(_region_text(c) for c in e.region)
        a, b = ("l_j", "l_k") if single else (f"l_j:{e.j_gen}", f"l_k:{e.k_gen}")
        lines.append(f"g_j += [{a}] (x) (sum_k {_poly_text(e.coeff)}*[{b}]) for {conds}")
    return "\n".join(lines) if lines else "0"

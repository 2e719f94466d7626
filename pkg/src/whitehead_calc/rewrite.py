"""Rewrite rules and normal forms for sums of Whitehead brackets.

The individual rules act on :mod:`~whitehead_calc.expr` trees and each one
strictly shrinks a simple measure:

``push_negation``                number of ``Neg`` nodes
``expand_bilinear``              brackets with a sum, multiple or negation as argument
``expand_infinite_bilinearity``  brackets of two infinite sums
``flatten_sums``                 nested sums and repeated like terms
``apply_graded_symmetry``        brackets whose right argument provably precedes the left

:func:`normalize` runs them in that order and then collects the result into a
:class:`NormalExpr`: a sorted list of schematic terms
``coeff * [l_A, l_B]`` summed over the integer points of a constraint region,
with ``A < B`` at every point.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .affine import (Affine, Eq, Ineq, LinForm, constraint_key, feasible, find_point, implied,
                     integer_points, simplify)
from .errors import GradeMismatch, InvalidExpression, NotInW, UnorderableSupports
from .expr import (Bracket, Const, FinSum, Gen, InfSum, IntMul, LoopExpr, Neg, all_vars,
                   binder_constraints, bound_vars, check_binders, fresh_names, fsum, grade, rename, support)
from .poly import Poly

# ----------------------------------------------------------------------
# individual rules


def push_negation(e: LoopExpr) -> LoopExpr:
    """Replace every ``Neg`` by a coefficient sign."""
    return _neg(e, False)


def _neg(e: LoopExpr, flip: bool) -> LoopExpr:
    sign = -1 if flip else 1
    if isinstance(e, Neg):
        return _neg(e.arg, not flip)
    if isinstance(e, Const):
        return e
    if isinstance(e, Gen):
        return IntMul(Poly.const(-1), e) if flip else e
    if isinstance(e, IntMul):
        inner = _neg(e.arg, False)
        return IntMul(e.coeff * sign, inner)
    if isinstance(e, FinSum):
        return FinSum(tuple(_neg(a, flip) for a in e.args))
    if isinstance(e, InfSum):
        return InfSum(e.var, e.bounds, _neg(e.body, flip))
    if isinstance(e, Bracket):
        b = Bracket(_neg(e.left, False), _neg(e.right, False))
        return IntMul(Poly.const(-1), b) if flip else b
    raise TypeError(e)


def expand_bilinear(e: LoopExpr) -> LoopExpr:
    """Distribute brackets over finite sums, multiples and negations, and
    absorb brackets with a constant argument."""
    if isinstance(e, (Gen, Const)):
        return e
    if isinstance(e, Neg):
        return Neg(expand_bilinear(e.arg))
    if isinstance(e, IntMul):
        return IntMul(e.coeff, expand_bilinear(e.arg))
    if isinstance(e, FinSum):
        return FinSum(tuple(expand_bilinear(a) for a in e.args))
    if isinstance(e, InfSum):
        return InfSum(e.var, e.bounds, expand_bilinear(e.body))
    if isinstance(e, Bracket):
        return _distribute(expand_bilinear(e.left), expand_bilinear(e.right))
    raise TypeError(e)


def _distribute(a: LoopExpr, b: LoopExpr) -> LoopExpr:
    g = grade(a) + grade(b) - 1
    if isinstance(a, Const) or isinstance(b, Const):
        return Const(g)
    if isinstance(a, FinSum):
        return fsum([_distribute(x, b) for x in a.args], g)
    if isinstance(b, FinSum):
        return fsum([_distribute(a, y) for y in b.args], g)
    if isinstance(a, IntMul):
        return _scaled(a.coeff, _distribute(a.arg, b))
    if isinstance(b, IntMul):
        return _scaled(b.coeff, _distribute(a, b.arg))
    if isinstance(a, Neg):
        return _scaled(Poly.const(-1), _distribute(a.arg, b))
    if isinstance(b, Neg):
        return _scaled(Poly.const(-1), _distribute(a, b.arg))
    return Bracket(a, b)


def _scaled(c: Poly, e: LoopExpr) -> LoopExpr:
    if isinstance(e, Const):
        return e
    if c.is_zero():
        return Const(grade(e))
    if isinstance(e, IntMul):
        return _scaled(c * e.coeff, e.arg)
    return e if c == Poly.const(1) else IntMul(c, e)


def expand_infinite_bilinearity(e: LoopExpr) -> LoopExpr:
    """``[sum_t f_t, sum_s g_s]`` becomes the diagonal sum plus the two
    one-sided tails ``sum_t [f_t, sum_{s>t} g_s] + sum_t [sum_{s>t} f_s, g_t]``.

    Families with different lower bounds are padded with constants, so the
    diagonal runs over both bounds and each tail keeps its own.  Brackets
    with a finite side are left alone.  Innermost brackets go first.
    """
    return _infbil(e, all_vars(e), ())


def _infbil(e: LoopExpr, taken: set, ctx: tuple) -> LoopExpr:
    if isinstance(e, (Gen, Const)):
        return e
    if isinstance(e, Neg):
        return Neg(_infbil(e.arg, taken, ctx))
    if isinstance(e, IntMul):
        return IntMul(e.coeff, _infbil(e.arg, taken, ctx))
    if isinstance(e, FinSum):
        return FinSum(tuple(_infbil(a, taken, ctx) for a in e.args))
    if isinstance(e, InfSum):
        return InfSum(e.var, e.bounds, _infbil(e.body, taken, ctx + ((e.var, e.bounds),)))
    if not isinstance(e, Bracket):
        raise TypeError(e)
    left = _infbil(e.left, taken, ctx)
    right = _infbil(e.right, taken, ctx)
    if not (isinstance(left, InfSum) and isinstance(right, InfSum)):
        return Bracket(left, right)
    # keep the left index name when that cannot capture anything
    clash = (all_vars(right.body) - {right.var}) | bound_vars(left.body) | {v for v, _ in ctx}
    outer = left.var if left.var not in clash else next(fresh_names(taken))
    taken |= {outer}
    inner = next(fresh_names(taken))
    taken |= {inner}
    f = rename(left.body, {left.var: outer})
    g = rename(right.body, {right.var: outer})
    f_in = rename(left.body, {left.var: inner})
    g_in = rename(right.body, {right.var: inner})
    t1 = Affine.of(outer, 1, 1)
    both = prune_bounds(left.bounds + right.bounds, ctx)
    octx_l = ctx + ((outer, left.bounds),)
    octx_r = ctx + ((outer, right.bounds),)
    diag = InfSum(outer, both, Bracket(f, g))
    upper = InfSum(outer, left.bounds,
                   Bracket(f, InfSum(inner, prune_bounds(right.bounds + (t1,), octx_l), g_in)))
    lower = InfSum(outer, right.bounds,
                   Bracket(InfSum(inner, prune_bounds(left.bounds + (t1,), octx_r), f_in), g))
    return FinSum((_infbil(diag, taken, ctx), _infbil(upper, taken, ctx), _infbil(lower, taken, ctx)))


def prune_bounds(bounds: Sequence[Affine], ctx: Sequence = ()) -> tuple:
    """Drop lower bounds implied by another bound in the binder context."""
    bounds = list(dict.fromkeys(bounds))
    base = binder_constraints(ctx)
    keep = []
    for i, b in enumerate(bounds):
        dominated = False
        for k, other in enumerate(bounds):
            if k == i or not implied(base, Ineq(other.to_lin() - b.to_lin())):
                continue
            # equivalent bounds: the earlier one survives
            if k < i or not implied(base, Ineq(b.to_lin() - other.to_lin())):
                dominated = True
                break
        if not dominated:
            keep.append(b)
    return tuple(keep)


def flatten_sums(e: LoopExpr) -> LoopExpr:
    """Flatten nested finite sums, push multiples and infinite sums through
    finite sums, and collect like terms."""
    terms = _flat_terms(e)
    g = grade(e)
    out = []
    for body, c in _collect_like(terms):
        out.append(_scaled(c, body))
    out = [t for t in out if not isinstance(t, Const)]
    return fsum(out, g)


def _flat_terms(e: LoopExpr) -> list:
    """``e`` as a list of ``(coefficient, term)`` with no top-level sum."""
    if isinstance(e, Const):
        return []
    if isinstance(e, Neg):
        return [(-c, t) for c, t in _flat_terms(e.arg)]
    if isinstance(e, IntMul):
        return [(e.coeff * c, t) for c, t in _flat_terms(e.arg)]
    if isinstance(e, FinSum):
        return [x for a in e.args for x in _flat_terms(a)]
    if isinstance(e, InfSum):
        out = []
        for body, c in _collect_like(_flat_terms(e.body)):
            out.append((Poly.const(1), InfSum(e.var, e.bounds, _scaled(c, body))))
        return out
    if isinstance(e, Bracket):
        return [(Poly.const(1), Bracket(_flat_arg(e.left), _flat_arg(e.right)))]
    return [(Poly.const(1), e)]


def _flat_arg(e: LoopExpr) -> LoopExpr:
    return flatten_sums(e) if not isinstance(e, Gen) else e


def _collect_like(terms: Iterable) -> list:
    acc: dict = {}
    for c, t in terms:
        acc[t] = acc.get(t, Poly()) + c
    items = [(t, c) for t, c in acc.items() if not c.is_zero()]
    items.sort(key=lambda tc: str(tc[0]))
    return items


def apply_graded_symmetry(e: LoopExpr, *, strict: bool = True) -> LoopExpr:
    """Orient every bracket so that its left support precedes its right one,
    paying ``(-1)^(pq)`` per swap.

    With ``strict`` an interleaved pair of supports raises
    :class:`UnorderableSupports`; otherwise such a bracket is left as it is
    and orientation is settled pointwise when terms are collected.
    """
    return _sym(e, (), strict)


def _sym(e: LoopExpr, ctx: tuple, strict: bool) -> LoopExpr:
    if isinstance(e, (Gen, Const)):
        return e
    if isinstance(e, Neg):
        return Neg(_sym(e.arg, ctx, strict))
    if isinstance(e, IntMul):
        return IntMul(e.coeff, _sym(e.arg, ctx, strict))
    if isinstance(e, FinSum):
        return FinSum(tuple(_sym(a, ctx, strict) for a in e.args))
    if isinstance(e, InfSum):
        return InfSum(e.var, e.bounds, _sym(e.body, ctx + ((e.var, e.bounds),), strict))
    if not isinstance(e, Bracket):
        raise TypeError(e)
    a = _sym(e.left, ctx, strict)
    b = _sym(e.right, ctx, strict)
    if precedes(a, b, ctx):
        return Bracket(a, b)
    if precedes(b, a, ctx):
        p, q = grade(a), grade(b)
        return _scaled(Poly.const((-1) ** (p * q)), Bracket(b, a))
    if strict:
        raise UnorderableSupports(f"neither argument of W({a}, {b}) provably comes first")
    return Bracket(a, b)


def precedes(a: LoopExpr, b: LoopExpr, ctx: Sequence = ()) -> bool:
    """Every summand touched by ``a`` is below every summand touched by ``b``."""
    sa, sb = support(a), support(b)
    if not sa or not sb:
        return True
    taken = {v for v, _ in ctx} | all_vars(a) | all_vars(b)
    names = fresh_names(taken)
    base = binder_constraints(ctx)
    for x in sa:
        for y in sb:
            ren = {v: next(names) for v, _ in y.context if v in {w for w, _ in x.context}}
            y2 = y.rename(ren)
            cons = base + x.constraints() + y2.constraints()
            if not implied(cons, Ineq(y2.sub.to_lin() - x.sub.to_lin() - 1)):
                return False
    return True


# ----------------------------------------------------------------------
# schematic terms


@dataclass(frozen=True)
class GenRef:
    """A generator leaf inside a term: summand ``sub``, label, grade."""

    sub: Affine
    label: int = 0
    grade: int = 2

    def __str__(self):
        return f"l[{self.sub}]" + (f":{self.label}" if self.label else "")


@dataclass(frozen=True)
class Term:
    """``coeff * [left, right]`` summed over integer points of ``constraints``
    in the variables ``vars``; ``left.sub < right.sub`` at every point."""

    vars: tuple
    constraints: tuple
    coeff: Poly
    left: GenRef
    right: GenRef

    def key(self):
        return (self.left.sub, self.left.label, self.right.sub, self.right.label,
                tuple(constraint_key(c) for c in self.constraints), self.vars, self.coeff.sort_key())

    def points(self, horizon: int) -> Iterable[dict]:
        cap = [Ineq(LinForm.constant(horizon) - self.left.sub.to_lin()),
               Ineq(LinForm.constant(horizon) - self.right.sub.to_lin())]
        if not self.vars:
            if all(c.holds({}) for c in list(self.constraints) + cap):
                yield {}
            return
        yield from integer_points(list(self.constraints) + cap, self.vars)

    def __str__(self):
        body = f"W({self.left}, {self.right})"
        c = self.coeff
        if c != Poly.const(1):
            body = f"{{{c}}}*{body}"
        if not self.vars:
            return body
        return f"sum[{', '.join(self.vars)} : {', '.join(map(str, self.constraints))}] {body}"


@dataclass(frozen=True)
class NormalExpr:
    """Canonical sum of generator brackets."""

    terms: tuple = ()
    grade: int = 3

    def is_empty(self) -> bool:
        return not self.terms

    def table(self, horizon: int, orders=None) -> dict:
        """Coefficients ``{(A, s, B, t): m}`` of ``[l_A:s, l_B:t]`` with ``A < B <= horizon``.

        ``orders(A, s, B, t)`` (optional) gives the modulus of each entry.
        """
        out: dict = {}
        for term in self.terms:
            for pt in term.points(horizon):
                key = (term.left.sub.evaluate(pt), term.left.label,
                       term.right.sub.evaluate(pt), term.right.label)
                out[key] = out.get(key, 0) + term.coeff.evaluate(pt)
        return _reduce_table(out, orders)

    def truncate(self, horizon: int) -> LoopExpr:
        """The finite loop expression ``sum m [l_A:s, l_B:t]`` over :meth:`table`."""
        n = (self.grade + 1) // 2
        parts = []
        for (a, s, b, t), m in sorted(self.table(horizon).items()):
            if m:
                br = Bracket(Gen(Affine.constant(a), s, n), Gen(Affine.constant(b), t, n))
                parts.append(br if m == 1 else IntMul(Poly.const(m), br))
        return fsum(parts, self.grade)

    def __str__(self):
        return " + ".join(map(str, self.terms)) if self.terms else "0"


def _reduce_table(table: dict, orders) -> dict:
    out = {}
    for key, v in sorted(table.items()):
        if orders is not None:
            m = orders(*key)
            if m:
                v %= m
        if v:
            out[key] = v
    return out


# ----------------------------------------------------------------------
# collection


def _lin_terms(e: LoopExpr) -> list:
    """Grade-preserving expansion of a bracket argument into
    ``(binders, coeff, Gen)``; binders are ``(var, bounds)`` outermost first."""
    if isinstance(e, Gen):
        return [((), Poly.const(1), e)]
    if isinstance(e, Const):
        return []
    if isinstance(e, Neg):
        return [(b, -c, g) for b, c, g in _lin_terms(e.arg)]
    if isinstance(e, IntMul):
        return [(b, e.coeff * c, g) for b, c, g in _lin_terms(e.arg)]
    if isinstance(e, FinSum):
        return [x for a in e.args for x in _lin_terms(a)]
    if isinstance(e, InfSum):
        return [(((e.var, e.bounds),) + b, c, g) for b, c, g in _lin_terms(e.body)]
    if isinstance(e, Bracket):
        raise InvalidExpression("iterated brackets are not part of normal forms")
    raise TypeError(e)


def _bracket_terms(e: LoopExpr, taken: set) -> list:
    if isinstance(e, Gen):
        raise NotInW(f"generator {e.sub} of grade {e.gen_grade} is not a bracket")
    if isinstance(e, Const):
        return []
    if isinstance(e, Neg):
        return [(b, -c, x, y) for b, c, x, y in _bracket_terms(e.arg, taken)]
    if isinstance(e, IntMul):
        return [(b, e.coeff * c, x, y) for b, c, x, y in _bracket_terms(e.arg, taken)]
    if isinstance(e, FinSum):
        return [t for a in e.args for t in _bracket_terms(a, taken)]
    if isinstance(e, InfSum):
        return [(((e.var, e.bounds),) + b, c, x, y) for b, c, x, y in _bracket_terms(e.body, taken)]
    if isinstance(e, Bracket):
        out = []
        lefts = _lin_terms(e.left)
        rights = _lin_terms(e.right)
        for bl, cl, gl in lefts:
            lnames = {v for v, _ in bl}
            for br, cr, gr in rights:
                ren = {}
                names = fresh_names(taken | lnames)
                for v, _ in br:
                    if v in lnames:
                        ren[v] = next(names)
                br2 = tuple((ren.get(v, v), tuple(b.rename(ren) for b in bs)) for v, bs in br)
                gr2 = Gen(gr.sub.rename(ren), gr.label, gr.gen_grade)
                out.append((bl + br2, cl * cr.rename(ren), gl, gr2))
        return out
    raise TypeError(e)


def collect(e: LoopExpr) -> NormalExpr:
    """Expand ``e`` bilinearly into schematic generator brackets, orient each
    pointwise and merge like terms."""
    check_binders(e)
    g = grade(e)
    raw = _bracket_terms(e, all_vars(e))
    acc: dict = {}
    for binders, coeff, gl, gr in raw:
        for term in _oriented(binders, coeff, gl, gr):
            k = (term.vars, term.constraints, term.left, term.right)
            acc[k] = acc.get(k, Poly()) + term.coeff
    terms = [Term(v, c, coeff, l, r) for (v, c, l, r), coeff in acc.items() if not coeff.is_zero()]
    terms.sort(key=Term.key)
    return NormalExpr(tuple(terms), g)


def _oriented(binders, coeff, gl: Gen, gr: Gen) -> list:
    names = [v for v, _ in binders]
    base = binder_constraints(binders)
    a, b = gl.sub.to_lin(), gr.sub.to_lin()
    touching = base + [Eq(a - b)]
    if feasible(touching):
        pt = find_point(touching, names)
        if pt is not None:
            raise NotInW(f"W({gl.sub}, {gr.sub}) has both arguments in summand "
                         f"{gl.sub.evaluate(pt)} at {pt}")
        raise UnorderableSupports(f"cannot separate summands {gl.sub} and {gr.sub}")
    out = []
    p, q = gl.gen_grade, gr.gen_grade
    for cons, c, x, y in ((base + [Ineq(b - a - 1)], coeff, gl, gr),
                          (base + [Ineq(a - b - 1)], coeff * ((-1) ** (p * q)), gr, gl)):
        simp = simplify(cons)
        if simp is None or not feasible(simp):
            continue
        out.append(_canonical_term(names, simp, c, x, y))
    return out


def _canonical_term(names, cons, coeff, x: Gen, y: Gen) -> Term:
    used = set()
    for c in cons:
        used |= set(c.variables())
    used |= set(coeff.variables())
    for s in (x.sub, y.sub):
        if s.var:
            used.add(s.var)
    order = [v for v in names if v in used]
    canon = dict(zip(order, fresh_names(())))
    cons2 = simplify([c.rename(canon) for c in cons])
    return Term(tuple(canon[v] for v in order), tuple(cons2), coeff.rename(canon),
                GenRef(x.sub.rename(canon), x.label, x.gen_grade),
                GenRef(y.sub.rename(canon), y.label, y.gen_grade))


# ----------------------------------------------------------------------
# the pipeline


def normalize(e: LoopExpr | NormalExpr) -> NormalExpr:
    """Normal form of a (valid) sum of wedge-disjoint brackets."""
    if isinstance(e, NormalExpr):
        return e
    check_binders(e)
    cur = e
    while True:
        nxt = expand_infinite_bilinearity(expand_bilinear(push_negation(cur)))
        if nxt == cur:
            break
        cur = nxt
    cur = flatten_sums(cur)
    cur = apply_graded_symmetry(cur, strict=False)
    return collect(cur)


# ----------------------------------------------------------------------
# finite evaluation (no infinite sums, no free variables)


def finite_vector(e: LoopExpr) -> dict:
    """Coordinates ``{(index, label): coeff}`` of a closed grade-preserving
    finite expression built from generators."""
    out: dict = {}
    for binders, c, g in _lin_terms(e):
        if binders:
            raise InvalidExpression("finite_vector needs a truncated expression")
        key = (g.sub.evaluate({}), g.label)
        out[key] = out.get(key, 0) + c.constant_value()
    return {k: v for k, v in sorted(out.items()) if v}


def finite_table(e: LoopExpr, orders=None) -> dict:
    """Bracket table of a closed finite expression (orientation ``A < B``)."""
    nf = collect(e)
    big = 0
    for t in nf.terms:
        if t.vars:
            raise InvalidExpression("finite_table needs a truncated expression")
        big = max(big, t.right.sub.const)
    return nf.table(max(big, 1), orders)


# ----------------------------------------------------------------------
# Jacobi identity over the free graded Lie algebra


def _free(e: LoopExpr) -> dict:
    """Element of the free associative algebra on generators, words as tuples
    of ``(index, label, grade)``; a bracket of grades ``p, q`` is
    ``(-1)^p (xy - (-1)^((p-1)(q-1)) yx)``, which satisfies the Whitehead sign
    laws exactly."""
    if isinstance(e, Gen):
        return {((e.sub.evaluate({}), e.label, e.gen_grade),): 1}
    if isinstance(e, Const):
        return {}
    if isinstance(e, Neg):
        return {w: -c for w, c in _free(e.arg).items()}
    if isinstance(e, IntMul):
        k = e.coeff.constant_value()
        return {w: k * c for w, c in _free(e.arg).items()}
    if isinstance(e, FinSum):
        out: dict = {}
        for a in e.args:
            for w, c in _free(a).items():
                out[w] = out.get(w, 0) + c
        return out
    if isinstance(e, Bracket):
        p, q = grade(e.left), grade(e.right)
        x, y = _free(e.left), _free(e.right)
        s = (-1) ** p
        t = (-1) ** ((p - 1) * (q - 1))
        out = {}
        for (w1, c1), (w2, c2) in itertools.product(x.items(), y.items()):
            out[w1 + w2] = out.get(w1 + w2, 0) + s * c1 * c2
            out[w2 + w1] = out.get(w2 + w1, 0) - s * t * c1 * c2
        return out
    raise InvalidExpression("infinite sums must be truncated before free expansion")


def jacobi_sum(f: LoopExpr, g: LoopExpr, h: LoopExpr) -> LoopExpr:
    """``(-1)^(pr)[[f,g],h] + (-1)^(pq)[[g,h],f] + (-1)^(rq)[[h,f],g]``."""
    p, q, r = grade(f), grade(g), grade(h)
    return FinSum((IntMul(Poly.const((-1) ** (p * r)), Bracket(Bracket(f, g), h)),
                   IntMul(Poly.const((-1) ** (p * q)), Bracket(Bracket(g, h), f)),
                   IntMul(Poly.const((-1) ** (r * q)), Bracket(Bracket(h, f), g))))


def jacobi_check(f: LoopExpr, g: LoopExpr, h: LoopExpr, depth: int) -> bool:
    """Truncate at ``depth``, expand the Jacobi sum in the free algebra and
    report whether it vanishes."""
    from .expr import truncate

    for x in (f, g, h):
        grade(x)
    total = jacobi_sum(truncate(f, depth), truncate(g, depth), truncate(h, depth))
    return not any(_free(total).values())

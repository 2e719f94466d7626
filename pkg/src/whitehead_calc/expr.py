"""Expressions for n-loops in a shrinking wedge and their side conditions.

An expression is a tree of immutable nodes:

``Gen``      inclusion of the ``label``-th cyclic generator of summand ``sub``
``Const``    the constant loop (zero) of a given grade
``Neg``      reversal
``IntMul``   integer multiple; the coefficient may be a polynomial in the
             indices of enclosing infinite sums
``FinSum``   finite concatenation (at least two summands)
``InfSum``   infinite concatenation over ``var >= b`` for every bound ``b``
``Bracket``  Whitehead product

Subscripts and bounds are single-variable affine forms with non-negative
variable coefficient (see :class:`~whitehead_calc.affine.Affine`), which keeps
every side condition decidable by integer linear reasoning.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence, Union

from .abgroup import FGAbelianGroup
from .affine import Affine, Eq, Ineq, LinForm, feasible, find_point, implied
from .errors import (ClusterViolation, ConservativeReject, GradeMismatch, HeterogeneousSchema,
                     InvalidExpression, OverlapViolation)
from .poly import Poly

# ----------------------------------------------------------------------
# the wedge


@dataclass(frozen=True)
class WedgeSpec:
    """Summand groups ``pi_n(X_j)`` of a shrinking wedge.

    ``groups`` lists the first summands explicitly; every later summand is
    ``tail``.  The homogeneous earring is ``WedgeSpec((), Z, n)``.
    """

    groups: tuple[FGAbelianGroup, ...] = ()
    tail: FGAbelianGroup | None = FGAbelianGroup((0,))
    grade_n: int = 2

    def __post_init__(self):
        object.__setattr__(self, "groups", tuple(self.groups))
        if self.grade_n < 2:
            raise ValueError("grade_n must be at least 2")
        for g in self.groups + ((self.tail,) if self.tail is not None else ()):
            if not isinstance(g, FGAbelianGroup):
                raise TypeError(f"summand group must be an FGAbelianGroup, got {g!r}")

    @classmethod
    def earring(cls, grade_n: int = 2) -> "WedgeSpec":
        return cls((), FGAbelianGroup((0,)), grade_n)

    @classmethod
    def finite(cls, groups: Sequence[FGAbelianGroup], grade_n: int = 2) -> "WedgeSpec":
        return cls(tuple(groups), None, grade_n)

    def group(self, j: int) -> FGAbelianGroup:
        if j < 1:
            raise IndexError(f"summand indices start at 1, got {j}")
        if j <= len(self.groups):
            return self.groups[j - 1]
        if self.tail is None:
            raise IndexError(f"wedge has only {len(self.groups)} summands")
        return self.tail

    def order(self, j: int, s: int) -> int:
        orders = self.group(j).orders
        if not 0 <= s < len(orders):
            raise IndexError(f"summand {j} has no generator {s}")
        return orders[s]

    def homogeneous_from(self) -> int:
        """Smallest ``h`` such that all summands ``>= h`` share one group."""
        if self.tail is None:
            return len(self.groups) + 1
        h = len(self.groups) + 1
        while h > 1 and self.groups[h - 2] == self.tail:
            h -= 1
        return h

    @property
    def is_homogeneous(self) -> bool:
        return self.tail is not None and self.homogeneous_from() == 1


# ----------------------------------------------------------------------
# nodes


class LoopExpr:
    """Base class of expression nodes."""

    __slots__ = ()

    @property
    def grade(self) -> int:
        return grade(self)

    def __add__(self, other: "LoopExpr") -> "LoopExpr":
        return FinSum((self, other))

    def __sub__(self, other: "LoopExpr") -> "LoopExpr":
        return FinSum((self, Neg(other)))

    def __neg__(self) -> "LoopExpr":
        return Neg(self)

    def __rmul__(self, k) -> "LoopExpr":
        return IntMul(Poly.coerce(k), self)

    def __str__(self):
        from .dsl import to_text

        return to_text(self)


@dataclass(frozen=True, eq=True)
class Gen(LoopExpr):
    sub: Affine
    label: int = 0
    gen_grade: int = 2

    def __post_init__(self):
        if isinstance(self.sub, int):
            object.__setattr__(self, "sub", Affine.constant(self.sub))
        if self.sub.coeff < 0:
            raise InvalidExpression(f"subscript {self.sub} must be non-decreasing in its variable")


@dataclass(frozen=True, eq=True)
class Const(LoopExpr):
    const_grade: int = 2


@dataclass(frozen=True, eq=True)
class Neg(LoopExpr):
    arg: LoopExpr


@dataclass(frozen=True, eq=True)
class IntMul(LoopExpr):
    coeff: Poly
    arg: LoopExpr

    def __post_init__(self):
        if not isinstance(self.coeff, Poly):
            object.__setattr__(self, "coeff", Poly.coerce(self.coeff))
        if not self.coeff.is_integral():
            raise InvalidExpression("multiplier must have integer coefficients")


@dataclass(frozen=True, eq=True)
class FinSum(LoopExpr):
    args: tuple

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        if len(self.args) < 2:
            raise InvalidExpression("a finite sum needs at least two summands; use fsum()")


@dataclass(frozen=True, eq=True)
class InfSum(LoopExpr):
    var: str
    bounds: tuple
    body: LoopExpr

    def __post_init__(self):
        bounds = tuple(Affine.constant(b) if isinstance(b, int) else b for b in self.bounds)
        if not bounds:
            raise InvalidExpression(f"infinite sum over {self.var} needs a lower bound")
        for b in bounds:
            if b.coeff < 0:
                raise InvalidExpression(f"bound {b} must be non-decreasing")
            if b.var == self.var:
                raise InvalidExpression(f"bound {b} refers to its own index {self.var}")
        object.__setattr__(self, "bounds", tuple(sorted(set(bounds))))


@dataclass(frozen=True, eq=True)
class Bracket(LoopExpr):
    left: LoopExpr
    right: LoopExpr


Node = Union[Gen, Const, Neg, IntMul, FinSum, InfSum, Bracket]


# -- convenience constructors -------------------------------------------


def gen(sub: Affine | int | str, label: int = 0, grade: int = 2) -> Gen:
    """``gen(3)``, ``gen("j")``, ``gen(Affine.of("j", 2, -1))``."""
    if isinstance(sub, str):
        sub = Affine.of(sub)
    elif isinstance(sub, int):
        sub = Affine.constant(sub)
    return Gen(sub, label, grade)


def fsum(items: Iterable[LoopExpr], grade_hint: int | None = None) -> LoopExpr:
    """Finite sum with the degenerate arities folded away."""
    items = tuple(items)
    if not items:
        if grade_hint is None:
            raise InvalidExpression("empty sum without a grade")
        return Const(grade_hint)
    if len(items) == 1:
        return items[0]
    return FinSum(items)


def mul(coeff: Poly | int, e: LoopExpr) -> LoopExpr:
    coeff = Poly.coerce(coeff)
    if coeff.is_zero():
        return Const(grade(e))
    if coeff == Poly.const(1):
        return e
    return IntMul(coeff, e)


def bracket(a: LoopExpr, b: LoopExpr) -> Bracket:
    return Bracket(a, b)


def infsum(var: str, bounds: Affine | int | Sequence, body: LoopExpr) -> InfSum:
    if isinstance(bounds, (Affine, int)):
        bounds = (bounds,)
    return InfSum(var, tuple(bounds), body)


# ----------------------------------------------------------------------
# grade


def grade(e: LoopExpr) -> int:
    if isinstance(e, Gen):
        return e.gen_grade
    if isinstance(e, Const):
        return e.const_grade
    if isinstance(e, (Neg, IntMul)):
        return grade(e.arg)
    if isinstance(e, FinSum):
        grades = {grade(a) for a in e.args}
        if len(grades) != 1:
            raise GradeMismatch(f"summands of a finite sum have grades {sorted(grades)}")
        return grades.pop()
    if isinstance(e, InfSum):
        return grade(e.body)
    if isinstance(e, Bracket):
        return grade(e.left) + grade(e.right) - 1
    raise TypeError(f"not an expression node: {e!r}")


# ----------------------------------------------------------------------
# traversal helpers


def children(e: LoopExpr) -> tuple:
    if isinstance(e, (Neg, IntMul)):
        return (e.arg,)
    if isinstance(e, FinSum):
        return e.args
    if isinstance(e, InfSum):
        return (e.body,)
    if isinstance(e, Bracket):
        return (e.left, e.right)
    return ()


def bound_vars(e: LoopExpr) -> set:
    out = set()
    if isinstance(e, InfSum):
        out.add(e.var)
    for c in children(e):
        out |= bound_vars(c)
    return out


def free_vars(e: LoopExpr) -> set:
    if isinstance(e, Gen):
        return {e.sub.var} if e.sub.var else set()
    if isinstance(e, IntMul):
        return set(e.coeff.variables()) | free_vars(e.arg)
    if isinstance(e, InfSum):
        inner = free_vars(e.body) - {e.var}
        return inner | {b.var for b in e.bounds if b.var}
    out = set()
    for c in children(e):
        out |= free_vars(c)
    return out


def rename(e: LoopExpr, mapping: Mapping[str, str]) -> LoopExpr:
    """Rename free variables (capture is the caller's concern)."""
    if not mapping:
        return e
    if isinstance(e, Gen):
        return Gen(e.sub.rename(mapping), e.label, e.gen_grade)
    if isinstance(e, Const):
        return e
    if isinstance(e, Neg):
        return Neg(rename(e.arg, mapping))
    if isinstance(e, IntMul):
        return IntMul(e.coeff.rename(mapping), rename(e.arg, mapping))
    if isinstance(e, FinSum):
        return FinSum(tuple(rename(a, mapping) for a in e.args))
    if isinstance(e, InfSum):
        inner = {k: v for k, v in mapping.items() if k != e.var}
        return InfSum(e.var, tuple(b.rename(mapping) for b in e.bounds), rename(e.body, inner))
    if isinstance(e, Bracket):
        return Bracket(rename(e.left, mapping), rename(e.right, mapping))
    raise TypeError(e)


def bind(e: LoopExpr, var: str, value: int) -> LoopExpr:
    """Substitute an integer for a free variable."""
    if isinstance(e, Gen):
        return Gen(e.sub.bind(var, value), e.label, e.gen_grade) if e.sub.var == var else e
    if isinstance(e, Const):
        return e
    if isinstance(e, Neg):
        return Neg(bind(e.arg, var, value))
    if isinstance(e, IntMul):
        return IntMul(e.coeff.subs({var: value}), bind(e.arg, var, value))
    if isinstance(e, FinSum):
        return FinSum(tuple(bind(a, var, value) for a in e.args))
    if isinstance(e, InfSum):
        bounds = tuple(b.bind(var, value) for b in e.bounds)
        if e.var == var:
            return InfSum(e.var, bounds, e.body)
        return InfSum(e.var, bounds, bind(e.body, var, value))
    if isinstance(e, Bracket):
        return Bracket(bind(e.left, var, value), bind(e.right, var, value))
    raise TypeError(e)


def gens(e: LoopExpr) -> Iterator[Gen]:
    if isinstance(e, Gen):
        yield e
    for c in children(e):
        yield from gens(c)


def fresh_names(taken: Iterable[str]) -> Iterator[str]:
    """Single letters first (the text grammar's idiom), then ``v1, v2, ...``."""
    taken = set(taken)
    for ch in "jkimnpqrstuvwxyzabcdefgh":
        if ch not in taken:
            yield ch
    for i in itertools.count(1):
        name = f"v{i}"
        if name not in taken:
            yield name


def all_vars(e: LoopExpr) -> set:
    return bound_vars(e) | free_vars(e)


# ----------------------------------------------------------------------
# supports

Binder = tuple  # (var, bounds)


@dataclass(frozen=True)
class Schema:
    """Summand indices ``sub`` over all assignments of ``context`` binders
    (outermost first) satisfying their bounds."""

    sub: Affine
    context: tuple = ()

    def constraints(self) -> list:
        return binder_constraints(self.context)

    def min_candidates(self) -> tuple:
        """Affine forms in the free variables whose maximum is the least value
        of ``sub``; subscripts and bounds are non-decreasing so the minimum is
        attained with every binder at its least value."""
        lows: dict = {}
        for var, bounds in self.context:
            cands = set()
            for b in bounds:
                if b.var in lows:
                    cands |= {Affine(b.coeff * c.coeff, c.var, b.coeff * c.const + b.const) for c in lows[b.var]}
                else:
                    cands.add(b)
            lows[var] = cands
        if self.sub.var in lows:
            s = self.sub
            return tuple(sorted({Affine(s.coeff * c.coeff, c.var, s.coeff * c.const + s.const)
                                 for c in lows[s.var]}))
        return (self.sub,)

    def min_at(self, env: Mapping[str, int]) -> int:
        return max(c.evaluate(env) for c in self.min_candidates())

    def rename(self, mapping: Mapping[str, str]) -> "Schema":
        ctx = tuple((mapping.get(v, v), tuple(b.rename(mapping) for b in bs)) for v, bs in self.context)
        return Schema(self.sub.rename(mapping), ctx)

    def __str__(self):
        if not self.context:
            return "{" + str(self.sub) + "}"
        conds = ", ".join(f"{v}>={b}" for v, bs in self.context for b in bs)
        return "{" + f"{self.sub} : {conds}" + "}"


def binder_constraints(context: Sequence[Binder]) -> list:
    out = []
    for var, bounds in context:
        for b in bounds:
            out.append(Ineq(LinForm.var(var) - b.to_lin()))
    return out


@dataclass(frozen=True)
class SupportDesc:
    """Sound over-approximation of the wedge summands an expression touches."""

    schemas: tuple = ()

    def __iter__(self):
        return iter(self.schemas)

    def __bool__(self):
        return bool(self.schemas)

    @property
    def lower_bound(self) -> tuple:
        """``min`` over schemas of ``max`` over each schema's candidates."""
        return tuple(s.min_candidates() for s in self.schemas)

    def min_at(self, env: Mapping[str, int]) -> int | None:
        if not self.schemas:
            return None
        return min(s.min_at(env) for s in self.schemas)

    def indices(self, env: Mapping[str, int], horizon: int) -> set:
        """Concrete summand indices ``<= horizon`` for a free-variable assignment."""
        out = set()
        for s in self.schemas:
            _enumerate_schema(s, dict(env), 0, horizon, out)
        return out

    def __str__(self):
        return " u ".join(str(s) for s in self.schemas) or "{}"


def _enumerate_schema(s: Schema, env: dict, i: int, horizon: int, out: set):
    if i == len(s.context):
        val = s.sub.evaluate(env)
        if val <= horizon:
            out.add(val)
        return
    var, bounds = s.context[i]
    lo = max(b.evaluate(env) for b in bounds)
    rest = Schema(s.sub, s.context[i + 1:])
    val = lo
    while True:
        env[var] = val
        if rest.min_at(env) > horizon:
            break
        _enumerate_schema(s, env, i + 1, horizon, out)
        val += 1
    env.pop(var, None)


def support(e: LoopExpr) -> SupportDesc:
    out: list = []
    _support(e, (), out)
    uniq = list(dict.fromkeys(out))
    return SupportDesc(tuple(uniq))


def _support(e: LoopExpr, ctx: tuple, out: list):
    if isinstance(e, Gen):
        out.append(Schema(e.sub, tuple(b for b in ctx if b[0] in _reaching(e.sub.var, ctx))))
    elif isinstance(e, InfSum):
        _support(e.body, ctx + ((e.var, e.bounds),), out)
    else:
        for c in children(e):
            _support(c, ctx, out)


def _reaching(var: str | None, ctx: tuple) -> set:
    """Binders the subscript variable depends on through bounds."""
    if var is None:
        return set()
    table = dict(ctx)
    seen = set()
    stack = [var]
    while stack:
        v = stack.pop()
        if v in seen or v not in table:
            continue
        seen.add(v)
        stack.extend(b.var for b in table[v] if b.var)
    return seen


# ----------------------------------------------------------------------
# validators


def check_cluster(e: LoopExpr) -> None:
    """Raise :class:`ClusterViolation` unless every infinite sum in ``e`` has
    summands whose least touched index grows without bound."""
    for node in _nodes(e):
        if not isinstance(node, InfSum):
            continue
        for s in support(node.body):
            if not any(c.var == node.var and c.coeff > 0 for c in s.min_candidates()):
                raise ClusterViolation(_short(node), str(s))


def _nodes(e: LoopExpr) -> Iterator[LoopExpr]:
    yield e
    for c in children(e):
        yield from _nodes(c)


def _short(e: LoopExpr, width: int = 80) -> str:
    text = str(e)
    return text if len(text) <= width else text[: width - 3] + "..."


def check_wedge_disjoint(b: Bracket, context: Sequence[Binder] = (), *, window: int = 10) -> None:
    """Certify that the two arguments of ``b`` touch disjoint sets of summands.

    Raises :class:`OverlapViolation` with a witness assignment when an overlap
    is found and :class:`ConservativeReject` when disjointness cannot be
    certified either way.
    """
    if not isinstance(b, Bracket):
        raise TypeError("check_wedge_disjoint expects a Bracket")
    ctx_vars = {v for v, _ in context}
    left = support(b.left)
    right = support(b.right)
    taken = ctx_vars | free_vars(b) | {v for s in left for v, _ in s.context}
    names = fresh_names(taken)
    right_inner = {v for s in right for v, _ in s.context}
    ren = {v: next(names) for v in sorted(right_inner) if v in taken}
    right = SupportDesc(tuple(s.rename(ren) for s in right))
    base = binder_constraints(context)
    for sa in left:
        for sb in right:
            cons = base + sa.constraints() + sb.constraints() + [Eq(sa.sub.to_lin() - sb.sub.to_lin())]
            if not feasible(cons):
                continue
            order = [v for v, _ in context]
            order += sorted((free_vars(b) - ctx_vars))
            order += [v for v, _ in sa.context] + [v for v, _ in sb.context]
            order = list(dict.fromkeys(order))
            pt = find_point(cons, order, window=window)
            if pt is not None:
                raise OverlapViolation(_short(b), pt, sa.sub.evaluate(pt))
            raise ConservativeReject(f"cannot certify that {sa} and {sb} are disjoint in {_short(b)}")


def check_subscripts(e: LoopExpr, wedge: WedgeSpec | None = None) -> None:
    """Every subscript is >= 1, labels exist, and schematic subscripts only
    range over summands that share one group."""
    h = wedge.homogeneous_from() if wedge is not None else 1
    for g, ctx in _gens_with_context(e, ()):
        cons = binder_constraints(ctx)
        if not implied(cons, Ineq(g.sub.to_lin() - 1)):
            raise InvalidExpression(f"subscript {g.sub} may drop below 1")
        if wedge is None:
            continue
        if g.sub.var is not None and g.sub.var in {v for v, _ in ctx}:
            if h > 1 and not implied(cons, Ineq(g.sub.to_lin() - h)):
                raise HeterogeneousSchema(
                    f"schematic generator l[{g.sub}] ranges over summands with different groups")
            grp = wedge.tail if h <= len(wedge.groups) + 1 and wedge.tail is not None else None
            if grp is not None and not 0 <= g.label < len(grp.orders):
                raise InvalidExpression(f"generator label {g.label} out of range for {grp}")
        elif g.sub.var is None:
            try:
                wedge.order(g.sub.const, g.label)
            except IndexError as exc:
                raise InvalidExpression(str(exc)) from None


def _gens_with_context(e: LoopExpr, ctx: tuple):
    if isinstance(e, Gen):
        yield e, ctx
    elif isinstance(e, InfSum):
        yield from _gens_with_context(e.body, ctx + ((e.var, e.bounds),))
    else:
        for c in children(e):
            yield from _gens_with_context(c, ctx)


def check_binders(e: LoopExpr, path: frozenset = frozenset()) -> None:
    if isinstance(e, InfSum):
        if e.var in path:
            raise InvalidExpression(f"summation index {e.var} is rebound inside its own sum")
        for b in e.bounds:
            if b.var is not None and b.var not in path:
                raise InvalidExpression(f"bound {b} of sum over {e.var} uses an unbound index")
        path = path | {e.var}
    elif isinstance(e, Gen):
        if e.sub.var is not None and e.sub.var not in path:
            raise InvalidExpression(f"subscript {e.sub} uses an unbound index")
    elif isinstance(e, IntMul):
        stray = set(e.coeff.variables()) - path
        if stray:
            raise InvalidExpression(f"multiplier {e.coeff} uses unbound indices {sorted(stray)}")
    for c in children(e):
        check_binders(c, path)


def brackets_with_context(e: LoopExpr, ctx: tuple = ()):
    if isinstance(e, Bracket):
        yield e, ctx
    if isinstance(e, InfSum):
        yield from brackets_with_context(e.body, ctx + ((e.var, e.bounds),))
    else:
        for c in children(e):
            yield from brackets_with_context(c, ctx)


def validate(e: LoopExpr, wedge: WedgeSpec | None = None) -> None:
    """All side conditions: grades, closed binders, subscripts, clustering and
    wedge-disjointness of every bracket."""
    grade(e)
    for node in _nodes(e):
        grade(node)
    check_binders(e)
    check_subscripts(e, wedge)
    check_cluster(e)
    for b, ctx in brackets_with_context(e):
        check_wedge_disjoint(b, ctx)


def is_valid(e: LoopExpr, wedge: WedgeSpec | None = None) -> bool:
    try:
        validate(e, wedge)
    except Exception:
        return False
    return True


# ----------------------------------------------------------------------
# truncation


def truncate(e: LoopExpr, horizon: int) -> LoopExpr:
    """Image under the retraction onto the first ``horizon`` summands.

    Generators beyond the horizon become constants and every infinite sum
    becomes the finite sum of its surviving summands.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if not isinstance(e, LoopExpr) and hasattr(e, "truncate"):
        return e.truncate(horizon)
    check_binders(e)
    return _trunc(e, horizon, {})


def _trunc(e: LoopExpr, n: int, env: dict) -> LoopExpr:
    if isinstance(e, Gen):
        val = e.sub.evaluate(env)
        if val > n:
            return Const(e.gen_grade)
        return Gen(Affine.constant(val), e.label, e.gen_grade)
    if isinstance(e, Const):
        return e
    if isinstance(e, Neg):
        a = _trunc(e.arg, n, env)
        return a if isinstance(a, Const) else Neg(a)
    if isinstance(e, IntMul):
        c = e.coeff.evaluate(env) if e.coeff.variables() else e.coeff.constant_value()
        a = _trunc(e.arg, n, env)
        if c == 0 or isinstance(a, Const):
            return Const(grade(e))
        return a if c == 1 else IntMul(Poly.const(c), a)
    if isinstance(e, FinSum):
        parts = [p for p in (_trunc(a, n, env) for a in e.args) if not isinstance(p, Const)]
        return fsum(parts, grade(e))
    if isinstance(e, Bracket):
        a = _trunc(e.left, n, env)
        b = _trunc(e.right, n, env)
        if isinstance(a, Const) or isinstance(b, Const):
            return Const(grade(e))
        return Bracket(a, b)
    if isinstance(e, InfSum):
        sup = support(e.body)
        g = grade(e)
        if not sup:
            return Const(g)
        val = max(b.evaluate(env) for b in e.bounds)
        start = val
        parts = []
        while True:
            env[e.var] = val
            low = sup.min_at(env)
            if low > n:
                break
            p = _trunc(e.body, n, env)
            if not isinstance(p, Const):
                parts.append(p)
            val += 1
            if val - start > 100 * n + 1000:
                del env[e.var]
                raise ClusterViolation(_short(e), str(sup))
        del env[e.var]
        return fsum(parts, g)
    raise TypeError(e)

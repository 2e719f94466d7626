"""Affine index arithmetic and integer constraint reasoning.

Subscripts and summation bounds are single-variable affine forms ``c*v + b``.
Once several summations interact (orientation splits, variable elimination)
general linear forms over several variables appear; those are ``LinForm``
values combined into ``Ineq`` (``form >= 0``), ``Eq`` (``form == 0``) and
``Cong`` (``form == 0 mod m``) constraints.

Feasibility is decided conservatively: Fourier-Motzkin elimination over the
rationals with integer tightening of every derived inequality, plus a gcd
test on equalities.  ``False`` from :func:`feasible` is a proof that no
integer point exists; ``True`` only means no contradiction was found.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import ceil, floor, gcd, lcm
from typing import Iterable, Iterator, Mapping, Sequence, Union

Number = Union[int, Fraction]


def _norm(c: Number) -> Number:
    if isinstance(c, Fraction) and c.denominator == 1:
        return int(c.numerator)
    return c


@dataclass(frozen=True, order=True)
class Affine:
    """``coeff * var + const``; ``var`` is ``None`` for constants."""

    coeff: int
    var: str | None
    const: int

    def __post_init__(self):
        if self.var is None and self.coeff != 0:
            raise ValueError("constant affine form must have coeff 0")
        if self.coeff == 0 and self.var is not None:
            object.__setattr__(self, "var", None)

    @classmethod
    def constant(cls, b: int) -> "Affine":
        return cls(0, None, b)

    @classmethod
    def of(cls, var: str, coeff: int = 1, const: int = 0) -> "Affine":
        return cls(coeff, var, const)

    @property
    def is_constant(self) -> bool:
        return self.var is None

    def evaluate(self, env: Mapping[str, int]) -> int:
        if self.var is None:
            return self.const
        return self.coeff * env[self.var] + self.const

    def rename(self, mapping: Mapping[str, str]) -> "Affine":
        if self.var is None or self.var not in mapping:
            return self
        return Affine(self.coeff, mapping[self.var], self.const)

    def bind(self, var: str, value: int) -> "Affine":
        if self.var != var:
            return self
        return Affine.constant(self.coeff * value + self.const)

    def shift(self, k: int) -> "Affine":
        return Affine(self.coeff, self.var, self.const + k)

    def to_lin(self) -> "LinForm":
        if self.var is None:
            return LinForm.constant(self.const)
        return LinForm({self.var: self.coeff}, self.const)

    def __str__(self):
        if self.var is None:
            return str(self.const)
        head = self.var if self.coeff == 1 else f"{self.coeff}{self.var}"
        if self.const > 0:
            return f"{head}+{self.const}"
        if self.const < 0:
            return f"{head}{self.const}"
        return head


class LinForm:
    """Linear form ``sum_v a_v * v + c`` with exact coefficients."""

    __slots__ = ("coeffs", "const", "_key")

    def __init__(self, coeffs: Mapping[str, Number] | None = None, const: Number = 0):
        items = {}
        for v, a in (coeffs or {}).items():
            if a != 0:
                items[v] = _norm(Fraction(a)) if isinstance(a, Fraction) else a
        self.coeffs = dict(sorted(items.items()))
        self.const = _norm(const) if isinstance(const, Fraction) else const
        self._key = None

    @classmethod
    def constant(cls, c: Number) -> "LinForm":
        return cls({}, c)

    @classmethod
    def var(cls, v: str, a: Number = 1) -> "LinForm":
        return cls({v: a}, 0)

    def key(self):
        if self._key is None:
            self._key = (tuple(self.coeffs.items()), self.const)
        return self._key

    def __eq__(self, other):
        return isinstance(other, LinForm) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def variables(self) -> frozenset:
        return frozenset(self.coeffs)

    def is_constant(self) -> bool:
        return not self.coeffs

    def coeff(self, v: str) -> Number:
        return self.coeffs.get(v, 0)

    def __add__(self, other: "LinForm | Number") -> "LinForm":
        if not isinstance(other, LinForm):
            return LinForm(self.coeffs, self.const + other)
        out = dict(self.coeffs)
        for v, a in other.coeffs.items():
            out[v] = out.get(v, 0) + a
        return LinForm(out, self.const + other.const)

    __radd__ = __add__

    def __neg__(self) -> "LinForm":
        return self.scale(-1)

    def __sub__(self, other: "LinForm | Number") -> "LinForm":
        return self + (-other)

    def __rsub__(self, other: Number) -> "LinForm":
        return (-self) + other

    def scale(self, k: Number) -> "LinForm":
        return LinForm({v: a * k for v, a in self.coeffs.items()}, self.const * k)

    def subs(self, mapping: Mapping[str, "LinForm | Number"]) -> "LinForm":
        out = LinForm.constant(self.const)
        for v, a in self.coeffs.items():
            if v in mapping:
                rep = mapping[v]
                out = out + (rep.scale(a) if isinstance(rep, LinForm) else a * rep)
            else:
                out = out + LinForm({v: a})
        return out

    def rename(self, mapping: Mapping[str, str]) -> "LinForm":
        out: dict = {}
        for v, a in self.coeffs.items():
            w = mapping.get(v, v)
            out[w] = out.get(w, 0) + a
        return LinForm(out, self.const)

    def evaluate(self, env: Mapping[str, Number]) -> Number:
        total = self.const
        for v, a in self.coeffs.items():
            total = total + a * env[v]
        return _norm(total) if isinstance(total, Fraction) else total

    def to_poly(self):
        from .poly import Poly

        out = Poly.const(self.const)
        for v, a in self.coeffs.items():
            out = out + Poly.var(v) * a
        return out

    def integerized(self) -> "LinForm":
        """Positive multiple with integer coefficients."""
        den = lcm(1, *(Fraction(a).denominator for a in self.coeffs.values()), Fraction(self.const).denominator)
        return self.scale(den) if den != 1 else self

    def __repr__(self):
        return f"LinForm({self})"

    def __str__(self):
        parts = []
        for v, a in self.coeffs.items():
            if a == 1:
                parts.append(v)
            elif a == -1:
                parts.append(f"-{v}")
            else:
                parts.append(f"{a}{v}")
        if self.const != 0 or not parts:
            parts.append(str(self.const))
        return " + ".join(parts).replace("+ -", "- ")


@dataclass(frozen=True)
class Ineq:
    form: LinForm

    def holds(self, env) -> bool:
        return self.form.evaluate(env) >= 0

    def rename(self, m):
        return Ineq(self.form.rename(m))

    def subs(self, m):
        return Ineq(self.form.subs(m))

    def variables(self):
        return self.form.variables()

    def __str__(self):
        return f"{self.form} >= 0"


@dataclass(frozen=True)
class Eq:
    form: LinForm

    def holds(self, env) -> bool:
        return self.form.evaluate(env) == 0

    def rename(self, m):
        return Eq(self.form.rename(m))

    def subs(self, m):
        return Eq(self.form.subs(m))

    def variables(self):
        return self.form.variables()

    def __str__(self):
        return f"{self.form} = 0"


@dataclass(frozen=True)
class Cong:
    form: LinForm
    modulus: int

    def holds(self, env) -> bool:
        v = self.form.evaluate(env)
        if isinstance(v, Fraction):
            return False
        return v % self.modulus == 0

    def rename(self, m):
        return Cong(self.form.rename(m), self.modulus)

    def subs(self, m):
        return Cong(self.form.subs(m), self.modulus)

    def variables(self):
        return self.form.variables()

    def __str__(self):
        return f"{self.form} = 0 mod {self.modulus}"


Constraint = Union[Ineq, Eq, Cong]


def ge(a: LinForm, b: LinForm | Number) -> Ineq:
    """``a >= b``."""
    return Ineq(a - b)


def gt(a: LinForm, b: LinForm | Number) -> Ineq:
    """``a > b`` over the integers, i.e. ``a >= b + 1``."""
    return Ineq(a - b - 1)


def canonical(c: Constraint) -> Constraint | bool:
    """Integer-tightened primitive form, or a truth value for ground constraints."""
    f = c.form
    den = lcm(1, *(Fraction(a).denominator for a in f.coeffs.values()), Fraction(f.const).denominator)
    form = f.scale(den) if den != 1 else f
    if isinstance(c, Cong):
        # F/den = m*t  <=>  F = (m*den)*t
        m = c.modulus * den
        coeffs = {v: a % m for v, a in form.coeffs.items() if a % m}
        const = form.const % m
        if not coeffs:
            return const == 0
        g = gcd(m, *coeffs.values(), const)
        if g > 1:
            m //= g
            coeffs = {v: a // g for v, a in coeffs.items()}
            const //= g
        if m == 1:
            return True
        return Cong(LinForm(coeffs, const), m)
    if not form.coeffs:
        if isinstance(c, Eq):
            return form.const == 0
        return form.const >= 0
    g = 0
    for a in form.coeffs.values():
        g = gcd(g, a)
    if isinstance(c, Eq):
        if form.const % g:
            return False
        lead = next(iter(form.coeffs.values()))
        sign = 1 if lead > 0 else -1
        return Eq(LinForm({v: sign * a // g for v, a in form.coeffs.items()}, sign * form.const // g))
    return Ineq(LinForm({v: a // g for v, a in form.coeffs.items()}, floor(Fraction(form.const, g))))


def simplify(constraints: Iterable[Constraint]) -> list[Constraint] | None:
    """Canonicalize, drop tautologies and duplicates; ``None`` if a ground
    constraint is false."""
    out: list = []
    seen = set()
    tight: dict = {}
    for c in constraints:
        cc = canonical(c)
        if cc is True:
            continue
        if cc is False:
            return None
        if isinstance(cc, Ineq):
            k = tuple(cc.form.coeffs.items())
            if k in tight and tight[k] <= cc.form.const:
                continue
            tight[k] = cc.form.const
            continue
        if cc not in seen:
            seen.add(cc)
            out.append(cc)
    for k, const in tight.items():
        out.append(Ineq(LinForm(dict(k), const)))
    # opposite inequality pairs that pin a value become equalities
    ineqs = {tuple(c.form.coeffs.items()): c.form.const for c in out if isinstance(c, Ineq)}
    result = []
    for c in out:
        if isinstance(c, Ineq):
            k = tuple(c.form.coeffs.items())
            neg = tuple((v, -a) for v, a in k)
            if neg in ineqs:
                total = c.form.const + ineqs[neg]
                if total < 0:
                    return None
                if total == 0:
                    eq = canonical(Eq(c.form))
                    if eq not in seen:
                        seen.add(eq)
                        result.append(eq)
                    continue
        result.append(c)
    return sorted(result, key=constraint_key)


def constraint_key(c: Constraint):
    tag = {Eq: 0, Ineq: 1, Cong: 2}[type(c)]
    f = c.form
    return (tag, tuple((v, (Fraction(a).numerator, Fraction(a).denominator)) for v, a in f.coeffs.items()),
            (Fraction(f.const).numerator, Fraction(f.const).denominator), getattr(c, "modulus", 0))


# ----------------------------------------------------------------------
# Fourier-Motzkin


def _tight_row(coeffs: dict, const: Number):
    """Integer-tighten ``sum coeffs + const >= 0``; returns hashable row or bool."""
    den = lcm(1, *(Fraction(a).denominator for a in coeffs.values()), Fraction(const).denominator)
    co = {v: int(a * den) for v, a in coeffs.items() if a != 0}
    c = Fraction(const) * den
    if not co:
        return c >= 0
    g = 0
    for a in co.values():
        g = gcd(g, a)
    return (tuple(sorted((v, a // g) for v, a in co.items())), floor(c / g))


def _eliminate_equalities(constraints: Sequence[Constraint], keep: Iterable[str] = ()):
    """Substitute equalities away, sparing ``keep`` where possible.  Returns
    (rows, ok) where rows are ``(coeffs, const)`` inequality rows; ``ok``
    False means infeasible."""
    keep = set(keep)
    eqs = [c.form for c in constraints if isinstance(c, Eq)]
    ineqs = [c.form for c in constraints if isinstance(c, Ineq)]
    for f in eqs:
        if f.coeffs and all(isinstance(a, int) for a in f.coeffs.values()) and isinstance(f.const, int):
            g = 0
            for a in f.coeffs.values():
                g = gcd(g, a)
            if f.const % g:
                return [], False
    while eqs:
        f = eqs.pop()
        if not f.coeffs:
            if f.const != 0:
                return [], False
            continue
        free = [(v, a) for v, a in f.coeffs.items() if v not in keep]
        if not free:
            ineqs += [f, -f]
            continue
        v, a = free[0]
        rep = LinForm({w: Fraction(-b, 1) / a for w, b in f.coeffs.items() if w != v}, Fraction(-f.const) / a)
        eqs = [g.subs({v: rep}) for g in eqs]
        ineqs = [g.subs({v: rep}) for g in ineqs]
    return [(dict(g.coeffs), g.const) for g in ineqs], True


def _fm_rows(rows) -> set | bool:
    out = set()
    best: dict = {}
    for coeffs, const in rows:
        t = _tight_row(coeffs, const)
        if t is True:
            continue
        if t is False:
            return False
        k, c = t
        if k in best and best[k] <= c:
            continue
        best[k] = c
    for k, c in best.items():
        neg = tuple((v, -a) for v, a in k)
        if neg in best and best[neg] + c < 0:
            return False
        out.add((k, c))
    return out


def _fm_eliminate(rows: set, var: str) -> set | bool:
    pos, neg, rest = [], [], []
    for k, c in rows:
        a = dict(k).get(var, 0)
        (pos if a > 0 else neg if a < 0 else rest).append((dict(k), c))
    new = [(d, c) for d, c in rest]
    for dp, cp in pos:
        ap = dp[var]
        for dn, cn in neg:
            an = -dn[var]
            comb = {}
            for v in set(dp) | set(dn):
                if v == var:
                    continue
                val = an * dp.get(v, 0) + ap * dn.get(v, 0)
                if val:
                    comb[v] = val
            new.append((comb, an * cp + ap * cn))
    return _fm_rows(new)


def _project(constraints: Sequence[Constraint], keep: Iterable[str] = ()):
    keep = set(keep)
    rows, ok = _eliminate_equalities(constraints, keep)
    if not ok:
        return False
    cur = _fm_rows(rows)
    if cur is False:
        return False
    keep = set(keep)
    while True:
        vars_left = {v for k, _ in cur for v, _ in k} - keep
        if not vars_left:
            return cur

        def cost(v):
            p = sum(1 for k, _ in cur if dict(k).get(v, 0) > 0)
            n = sum(1 for k, _ in cur if dict(k).get(v, 0) < 0)
            return (p * n - p - n, v)

        v = min(vars_left, key=cost)
        cur = _fm_eliminate(cur, v)
        if cur is False:
            return False
        if len(cur) > 4000:
            # give up precision rather than time; the relaxation stays sound
            return cur


def feasible(constraints: Sequence[Constraint]) -> bool:
    """``False`` certifies integer infeasibility; ``True`` means not refuted."""
    simp = simplify(constraints)
    if simp is None:
        return False
    return _project(simp) is not False


def implied(constraints: Sequence[Constraint], target: Ineq) -> bool:
    """Certify that ``target`` holds at every integer point of ``constraints``."""
    return not feasible(list(constraints) + [Ineq(-target.form - 1)])


def var_bounds(constraints: Sequence[Constraint], var: str) -> tuple[int | None, int | None] | None:
    """Integer bounds on ``var`` implied by the relaxation; ``None`` if infeasible."""
    simp = simplify(constraints)
    if simp is None:
        return None
    proj = _project(simp, keep=[var])
    if proj is False:
        return None
    lo = hi = None
    for k, c in proj:
        d = dict(k)
        if set(d) != {var}:
            continue
        a = d[var]
        if a > 0:
            b = ceil(Fraction(-c, a))
            lo = b if lo is None else max(lo, b)
        else:
            b = floor(Fraction(c, -a))
            hi = b if hi is None else min(hi, b)
    if lo is not None and hi is not None and lo > hi:
        return None
    return lo, hi


def integer_points(constraints: Sequence[Constraint], order: Sequence[str], *,
                   window: int = 12, limit: int | None = None) -> Iterator[dict]:
    """Enumerate integer points by backtracking over ``order``.

    Each variable ranges over the bounds implied by the remaining system;
    an unbounded side is capped ``window`` steps away from the other bound
    (or from 0), so for unbounded systems this is a bounded search only.
    """
    simp = simplify(constraints)
    if simp is None:
        return
    count = 0

    def rec(i, cons, env):
        nonlocal count
        if limit is not None and count >= limit:
            return
        if i == len(order):
            if all(c.holds(env) for c in constraints):
                count += 1
                yield dict(env)
            return
        v = order[i]
        b = var_bounds(cons, v)
        if b is None:
            return
        lo, hi = b
        if lo is None and hi is None:
            lo, hi = -window, window
        elif lo is None:
            lo = hi - 2 * window
        elif hi is None:
            hi = lo + 2 * window
        for val in range(lo, hi + 1):
            sub = simplify([c.subs({v: val}) for c in cons])
            if sub is None:
                continue
            env[v] = val
            yield from rec(i + 1, sub, env)
            del env[v]

    yield from rec(0, simp, {})


def find_point(constraints: Sequence[Constraint], order: Sequence[str], window: int = 12) -> dict | None:
    for p in integer_points(constraints, order, window=window, limit=1):
        return p
    return None


def residues(modulus: int) -> range:
    return range(modulus)


def split_congruence(form: LinForm, modulus: int) -> list[Cong]:
    """The ``modulus`` residue classes of ``form``."""
    return [Cong(form - r, modulus) for r in range(modulus)]


def product_env(ranges: Mapping[str, Iterable[int]]) -> Iterator[dict]:
    names = list(ranges)
    for vals in itertools.product(*(ranges[n] for n in names)):
        yield dict(zip(names, vals))

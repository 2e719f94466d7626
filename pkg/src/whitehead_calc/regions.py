"""Piecewise polynomial functions on the index lattice.

A *piece* is a pair ``(constraints, poly)``: a conjunction of affine
inequalities, equalities and congruences, and a polynomial with rational
coefficients that is integer valued on the integer points of the region.

:func:`sum_out` turns a schematic bracket term over arbitrary summation
indices into pieces over the two summand indices ``j < k``.  Eliminated
variables are either solved from equalities or summed in closed form; floors
and ceilings of bounds are made exact by splitting on residues, and the
maximum of several lower bounds (minimum of upper bounds) by splitting on
which one is active.

:func:`find_nonzero` decides whether a finite sum of pieces vanishes modulo
``m`` at every lattice point with ``1 <= j < k``.  After fixing residues
modulo the congruence moduli, the constraint lines cut the plane into cells
on which the function is a single polynomial.  A polynomial of degree ``d``
that is integer valued vanishes mod ``m`` on a whole line (plane) as soon as
it does on ``d+1`` consecutive points (a ``(d+1) x (d+1)`` box), by Newton's
forward-difference expansion; bounded cells are enumerated.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Sequence

from .abgroup import extended_gcd
from .affine import (Cong, Eq, Ineq, LinForm, feasible, find_point, integer_points, simplify,
                     var_bounds)
from .poly import Poly

J, K = "j", "k"


def _subst(cons, poly: Poly, var: str, rep: LinForm):
    return [c.subs({var: rep}) for c in cons], poly.subs({var: rep.to_poly()})


def _affine_rep(coeff: int, var: str | None, const: int, target: str) -> tuple:
    """Solve ``target = coeff*var + const`` for ``var``; returns the linear
    form for ``var`` and the congruence making it integral."""
    rep = LinForm({target: Fraction(1, coeff)}, Fraction(-const, coeff))
    cong = Cong(LinForm({target: 1}, -const), coeff) if coeff > 1 else None
    return rep, cong


def sum_out(variables: Sequence[str], constraints: Sequence, poly: Poly,
            a: tuple, b: tuple, *, limit: int = 20000) -> list:
    """Pieces over ``(j, k)`` of ``f(j,k) = sum poly`` over the points of
    ``constraints`` with ``a(x) == j`` and ``b(x) == k``.

    ``a`` and ``b`` are ``(coeff, var, const)`` triples (``var`` may be None).
    Variable names must not be ``j`` or ``k``; rename first.
    """
    if J in variables or K in variables:
        raise ValueError("rename the term variables away from 'j' and 'k'")
    cons = list(constraints)
    rest = list(variables)
    solved: dict = {}
    for target, (c, v, kk) in ((J, a), (K, b)):
        lhs = LinForm({target: 1}, 0)
        if v is None:
            cons.append(Eq(lhs - kk))
            continue
        if v in solved:
            # both subscripts in one variable: the second becomes an equation
            cons.append(Eq(lhs - LinForm({v: c}, kk).subs(solved)))
            continue
        rep, cong = _affine_rep(c, v, kk, target)
        if cong is not None:
            cons.append(cong)
        cons, poly = _subst(cons, poly, v, rep)
        solved[v] = rep
        rest.remove(v)
    out = []
    stack = [(cons, poly, rest)]
    while stack:
        cons, poly, rest = stack.pop()
        simp = simplify(cons)
        if simp is None or not feasible(simp):
            continue
        if not rest:
            out.append((tuple(simp), poly))
            if len(out) > limit:
                raise RuntimeError("region splitting exceeded its budget")
            continue
        stack.extend(_eliminate_one(simp, poly, rest))
    return out


def _eliminate_one(cons, poly: Poly, rest: list) -> list:
    r = rest[-1]
    # equalities: solve for r
    for c in cons:
        if isinstance(c, Eq) and c.form.coeff(r):
            a = c.form.coeff(r)
            other = c.form - LinForm.var(r, a)
            new = [x for x in cons if x is not c]
            if abs(a) > 1:
                new.append(Cong(other, abs(a)))
            rep = other.scale(Fraction(-1, 1) / a)
            new, p = _subst(new, poly, r, rep)
            return [(new, p, rest[:-1])]
    # congruences: split r into residue classes
    mods = [c.modulus for c in cons if isinstance(c, Cong) and c.form.coeff(r)]
    if mods:
        m = lcm(*mods)
        out = []
        for rho in range(m):
            rep = LinForm({r: m}, rho)
            new, p = _subst(cons, poly, r, rep)
            out.append((new, p, rest))
        return out
    lowers, uppers, keep = [], [], []
    for c in cons:
        a = c.form.coeff(r) if isinstance(c, Ineq) else 0
        if a > 0:
            lowers.append((a, c.form - LinForm.var(r, a)))
        elif a < 0:
            uppers.append((-a, c.form - LinForm.var(r, a)))
        else:
            keep.append(c)
    if not lowers or not uppers:
        raise ValueError(f"summation index {r} is unbounded")
    out = []
    # exact ceilings / floors via residues of the bound numerators
    split = [(i, a, e) for i, (a, e) in enumerate(lowers + uppers) if a > 1]
    for rhos in itertools.product(*(range(a) for _, a, _ in split)):
        extra = [Cong(e - rho, a) for (_, a, e), rho in zip(split, rhos)]
        rmap = {i: rho for (i, _, _), rho in zip(split, rhos)}
        los = [(-e + rmap.get(i, 0)).scale(Fraction(1, a)) for i, (a, e) in enumerate(lowers)]
        n = len(lowers)
        his = [(e - rmap.get(n + i, 0)).scale(Fraction(1, a)) for i, (a, e) in enumerate(uppers)]
        for li, lo in enumerate(los):
            for hi_i, hi in enumerate(his):
                region = list(keep) + extra
                for x, other in enumerate(los):
                    if x != li:
                        region.append(Ineq(lo - other - (1 if x < li else 0)))
                for y, other in enumerate(his):
                    if y != hi_i:
                        region.append(Ineq(other - hi - (1 if y < hi_i else 0)))
                region.append(Ineq(hi - lo))
                summed = poly.sum_over(r, lo.to_poly(), hi.to_poly())
                out.append((region, summed, rest[:-1]))
    return out


# ----------------------------------------------------------------------
# zero test


def _value_mod(v, m: int) -> int | Fraction:
    if isinstance(v, Fraction):
        if v.denominator != 1:
            return v
        v = v.numerator
    return v % m if m else v


def _is_zero(v, m: int) -> bool:
    r = _value_mod(v, m)
    return not isinstance(r, Fraction) and r == 0


def evaluate_pieces(pieces: Iterable, point: dict):
    total = 0
    for cons, poly in pieces:
        if all(c.holds(point) for c in cons):
            total += poly.evaluate(point)
    return total


def find_nonzero(pieces: Sequence, modulus: int, exclude: Iterable = ()) -> dict | None:
    """A point ``{j, k}`` with ``1 <= j < k`` where the sum of ``pieces`` is
    not ``0 mod modulus`` (``modulus == 0`` means exact), skipping the points
    in ``exclude``; ``None`` if there is none."""
    pieces = [(tuple(c), p) for c, p in pieces if not p.is_zero()]
    if not pieces:
        return None
    exclude = {tuple(pt) for pt in exclude}
    mod = 1
    for cons, _ in pieces:
        for c in cons:
            if isinstance(c, Cong):
                mod = lcm(mod, c.modulus)
    base = [Ineq(LinForm.var(J) - 1), Ineq(LinForm({K: 1, J: -1}, -1))]
    for rj, rk in itertools.product(range(mod), repeat=2):
        rep = {J: LinForm({"x": mod}, rj), K: LinForm({"y": mod}, rk)}
        local = []
        for cons, p in pieces:
            sub = simplify([c.subs(rep) for c in cons])
            if sub is None:
                continue
            local.append((sub, p.subs({J: rep[J].to_poly(), K: rep[K].to_poly()})))
        if not local:
            continue
        cell_base = simplify([c.subs(rep) for c in base])
        if cell_base is None:
            continue
        ex = set()
        for (pj, pk) in exclude:
            if (pj - rj) % mod == 0 and (pk - rk) % mod == 0:
                ex.add(((pj - rj) // mod, (pk - rk) // mod))
        hit = _scan_cells(local, cell_base, modulus, ex)
        if hit is not None:
            x, y = hit
            return {J: mod * x + rj, K: mod * y + rk}
    return None


def _line_key(form: LinForm):
    """Primitive, sign-normalized ``(a, b, c)`` for ``a x + b y + c`` and the
    sign relating ``form`` to it."""
    a, b, c = form.coeff("x"), form.coeff("y"), form.const
    den = lcm(Fraction(a).denominator, Fraction(b).denominator, Fraction(c).denominator)
    a, b, c = int(a * den), int(b * den), int(c * den)
    g = gcd(gcd(a, b), c)
    a, b, c = a // g, b // g, c // g
    s = 1
    if a < 0 or (a == 0 and b < 0):
        a, b, c, s = -a, -b, -c, -1
    return (a, b, c), s


def _scan_cells(local, base, modulus: int, exclude: set):
    lines = {}
    for cons, _ in local:
        for c in cons:
            if isinstance(c, (Ineq, Eq)) and c.form.coeffs:
                key, _ = _line_key(c.form)
                lines[key] = True
    lines = sorted(lines)

    def form_of(key):
        a, b, c = key
        return LinForm({"x": a, "y": b}, c)

    def rec(i, cell, signs):
        if not feasible(cell):
            return None
        if i == len(lines):
            return _check_cell(cell, signs, local, lines, modulus, exclude)
        f = form_of(lines[i])
        for s, con in ((-1, Ineq(-f - 1)), (0, Eq(f)), (1, Ineq(f - 1))):
            hit = rec(i + 1, cell + [con], signs + (s,))
            if hit is not None:
                return hit
        return None

    return rec(0, list(base), ())


def _holds_by_sign(c, lines, signs) -> bool:
    key, s = _line_key(c.form)
    sign = signs[lines.index(key)] * s
    if isinstance(c, Eq):
        return sign == 0
    return sign >= 0


def _cell_poly(local, lines, signs) -> Poly:
    total = Poly()
    for cons, p in local:
        ok = True
        for c in cons:
            if isinstance(c, Cong):
                raise AssertionError("congruences are resolved by the residue split")
            if not c.form.coeffs:
                continue
            if not _holds_by_sign(c, lines, signs):
                ok = False
                break
        if ok:
            total = total + p
    return total


def _check_cell(cell, signs, local, lines, modulus, exclude):
    f = _cell_poly(local, lines, signs)
    if f.is_zero():
        return None
    cell = simplify(cell)
    if cell is None:
        return None
    d = f.degree()

    def bad(pt):
        return pt not in exclude and not _is_zero(f.evaluate({"x": pt[0], "y": pt[1]}), modulus)

    bx = var_bounds(cell, "x")
    by = var_bounds(cell, "y")
    if bx is None or by is None:
        return None
    if None not in bx and None not in by:
        for pt in integer_points(cell, ["x", "y"]):
            p = (pt["x"], pt["y"])
            if bad(p):
                return p
        return None
    eqs = [c for c in cell if isinstance(c, Eq)]
    if eqs:
        return _check_line(cell, eqs[0], d, bad, exclude)
    return _check_plane(cell, d, bad, exclude)


def _check_line(cell, eq: Eq, d: int, bad, exclude):
    """Cells on the line ``eq``: parametrize its lattice points by one integer."""
    a, b, c = eq.form.coeff("x"), eq.form.coeff("y"), eq.form.const
    g, u, v = extended_gcd(a, b)
    if c % g:
        return None
    x0, y0 = -c // g * u, -c // g * v
    dx, dy = b // g, -a // g
    rep = {"x": LinForm({"s": dx}, x0), "y": LinForm({"s": dy}, y0)}
    line = simplify([k.subs(rep) for k in cell])
    if line is None:
        return None
    bs = var_bounds(line, "s")
    if bs is None:
        return None
    lo, hi = bs
    ex_s = [((px - x0) // dx if dx else (py - y0) // dy) for px, py in exclude
            if a * px + b * py + c == 0]

    def point(s):
        return (x0 + dx * s, y0 + dy * s)

    def holds(s):
        env = {"s": s}
        return all(k.holds(env) for k in line)

    if lo is not None and hi is not None:
        for s in range(lo, hi + 1):
            if holds(s) and bad(point(s)):
                return point(s)
        return None
    if lo is not None:
        start = max([lo] + [s + 1 for s in ex_s])
        window = range(start, start + d + 1)
    elif hi is not None:
        stop = min([hi] + [s - 1 for s in ex_s])
        window = range(stop - d, stop + 1)
    else:
        start = max([0] + [s + 1 for s in ex_s])
        window = range(start, start + d + 1)
    for s in window:
        if not holds(s):
            raise AssertionError("window left the cell")
        if bad(point(s)):
            return point(s)
    return None


def _check_plane(cell, d: int, bad, exclude):
    normals = [(c.form.coeff("x"), c.form.coeff("y")) for c in cell if isinstance(c, Ineq)]
    cands = set()
    for ax, ay in normals:
        cands |= {(-ay, ax), (ay, -ax), (ax, ay)}
    cands |= {(1, 0), (0, 1), (-1, 0), (0, -1)}

    def inside(v, strict):
        return all((ax * v[0] + ay * v[1]) > 0 if strict else (ax * v[0] + ay * v[1]) >= 0
                   for ax, ay in normals)

    rays = [v for v in cands if v != (0, 0) and inside(v, False)]
    interior = None
    for v in rays + [(p[0] + q[0], p[1] + q[1]) for p, q in itertools.combinations(rays, 2)]:
        if v != (0, 0) and inside(v, True):
            interior = v
            break
    if interior is None:
        # the cell lies in a strip: slice it into parallel lines
        if not rays:
            raise AssertionError("unbounded cell without recession direction")
        rx, ry = rays[0]
        g = gcd(rx, ry)
        wx, wy = -ry // g, rx // g
        zform = LinForm({"x": wx, "y": wy}, 0)
        zb = var_bounds(list(cell) + [Eq(zform - LinForm.var("z"))], "z")
        if zb is None:
            return None
        zlo, zhi = zb
        if zlo is None or zhi is None:
            raise AssertionError("strip of unbounded width")
        for z in range(zlo, zhi + 1):
            eq = Eq(zform - z)
            sub = simplify(list(cell) + [eq])
            if sub is None or not feasible(sub):
                continue
            eq_c = [c for c in sub if isinstance(c, Eq)][0]
            hit = _check_line(sub, eq_c, d, bad, exclude)
            if hit is not None:
                return hit
        return None
    p = find_point(cell, ["x", "y"], window=40)
    if p is None:
        raise AssertionError("feasible cell without a lattice point in the search window")
    px, py = p["x"], p["y"]
    ix, iy = interior
    lam = 0
    for c in cell:
        if not isinstance(c, Ineq):
            continue
        ax, ay = c.form.coeff("x"), c.form.coeff("y")
        slack = ax * px + ay * py + c.form.const
        need = -slack + (abs(ax) + abs(ay)) * d
        dot = ax * ix + ay * iy
        lam = max(lam, -(-need // dot))
    while True:
        bx, by = px + lam * ix, py + lam * iy
        box = [(bx + s, by + t) for s in range(d + 1) for t in range(d + 1)]
        if not any(q in exclude for q in box):
            break
        lam += d + 1
    for q in box:
        env = {"x": q[0], "y": q[1]}
        if not all(c.holds(env) for c in cell):
            raise AssertionError("box left the cell")
        if bad(q):
            return q
    return None

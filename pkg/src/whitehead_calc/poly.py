"""Sparse multivariate polynomials with exact rational coefficients.

Coefficients are ``int`` whenever they are integral and ``Fraction``
otherwise, so integer polynomials stay integer polynomials through
arithmetic.  Monomials are tuples of ``(variable, exponent)`` pairs sorted by
variable name; the term list is sorted, which makes equality and hashing
structural.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd, lcm
from typing import Iterable, Mapping, Union

Number = Union[int, Fraction]
Monomial = tuple  # tuple[tuple[str, int], ...]


def _norm(c: Number) -> Number:
    if isinstance(c, Fraction) and c.denominator == 1:
        return int(c.numerator)
    return c


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    out = dict(a)
    for v, e in b:
        out[v] = out.get(v, 0) + e
    return tuple(sorted(out.items()))


class Poly:
    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, Number] | Iterable = ()):
        acc: dict = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for mono, c in items:
            if c == 0:
                continue
            mono = tuple(sorted((v, e) for v, e in mono if e))
            acc[mono] = acc.get(mono, 0) + c
        self._terms = tuple(sorted((m, _norm(c)) for m, c in acc.items() if c != 0))
        self._hash = None

    # -- constructors -------------------------------------------------
    @classmethod
    def const(cls, c: Number) -> "Poly":
        return cls({(): c})

    @classmethod
    def var(cls, name: str) -> "Poly":
        return cls({((name, 1),): 1})

    @classmethod
    def coerce(cls, x: "Poly | Number") -> "Poly":
        return x if isinstance(x, Poly) else cls.const(x)

    # -- inspection ---------------------------------------------------
    @property
    def terms(self) -> tuple:
        return self._terms

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(not m for m, _ in self._terms)

    def constant_value(self) -> Number:
        if not self.is_constant():
            raise ValueError(f"polynomial {self} is not constant")
        return self._terms[0][1] if self._terms else 0

    def variables(self) -> frozenset:
        return frozenset(v for m, _ in self._terms for v, _ in m)

    def degree(self, var: str | None = None) -> int:
        if var is None:
            return max((sum(e for _, e in m) for m, _ in self._terms), default=0)
        return max((e for m, _ in self._terms for v, e in m if v == var), default=0)

    def denominator(self) -> int:
        return lcm(1, *(c.denominator for _, c in self._terms if isinstance(c, Fraction)))

    def is_integral(self) -> bool:
        return self.denominator() == 1

    # -- arithmetic ---------------------------------------------------
    def __add__(self, other):
        other = Poly.coerce(other)
        return Poly(list(self._terms) + list(other._terms))

    __radd__ = __add__

    def __neg__(self):
        return Poly([(m, -c) for m, c in self._terms])

    def __sub__(self, other):
        return self + (-Poly.coerce(other))

    def __rsub__(self, other):
        return Poly.coerce(other) - self

    def __mul__(self, other):
        other = Poly.coerce(other)
        out: dict = {}
        for m1, c1 in self._terms:
            for m2, c2 in other._terms:
                m = _mono_mul(m1, m2)
                out[m] = out.get(m, 0) + c1 * c2
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        result = Poly.const(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Poly.const(other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._terms)
        return self._hash

    def __lt__(self, other: "Poly"):
        return self.sort_key() < other.sort_key()

    def sort_key(self):
        return tuple((m, (Fraction(c).numerator, Fraction(c).denominator)) for m, c in self._terms)

    # -- evaluation and substitution ----------------------------------
    def evaluate(self, env: Mapping[str, Number]) -> Number:
        total: Number = 0
        for mono, c in self._terms:
            val = c
            for v, e in mono:
                val = val * env[v] ** e
            total += val
        return _norm(total) if isinstance(total, Fraction) else total

    def subs(self, mapping: Mapping[str, "Poly | Number"]) -> "Poly":
        """Substitute polynomials for variables (simultaneously)."""
        if not mapping:
            return self
        cache: dict = {}
        result = Poly()
        for mono, c in self._terms:
            term = Poly.const(c)
            for v, e in mono:
                if v in mapping:
                    key = (v, e)
                    if key not in cache:
                        cache[key] = Poly.coerce(mapping[v]) ** e
                    term = term * cache[key]
                else:
                    term = term * Poly({((v, e),): 1})
            result = result + term
        return result

    def rename(self, mapping: Mapping[str, str]) -> "Poly":
        return Poly([(tuple((mapping.get(v, v), e) for v, e in m), c) for m, c in self._terms])

    def coefficients_in(self, var: str) -> dict:
        """Split as ``sum_d coeff_d * var**d``; returns ``{d: coeff_d}``."""
        out: dict = {}
        for mono, c in self._terms:
            d = 0
            rest = []
            for v, e in mono:
                if v == var:
                    d = e
                else:
                    rest.append((v, e))
            out.setdefault(d, []).append((tuple(rest), c))
        return {d: Poly(ts) for d, ts in out.items()}

    def sum_over(self, var: str, lo: "Poly | Number", hi: "Poly | Number") -> "Poly":
        """Closed form of ``sum_{var=lo}^{hi} self``.

        Valid as a polynomial identity whenever ``hi >= lo - 1``.
        """
        lo = Poly.coerce(lo)
        hi = Poly.coerce(hi)
        out = Poly()
        for d, coeff in self.coefficients_in(var).items():
            s = power_sum(d)
            out = out + coeff * (s.subs({"n": hi}) - s.subs({"n": lo - 1}))
        return out

    def reduce_mod(self, m: int) -> "Poly":
        """Reduce coefficients so values stay congruent mod ``m`` on integer points
        where the polynomial is integer-valued.  ``m == 0`` leaves it unchanged."""
        if m == 0:
            return self
        if m == 1:
            return Poly()
        den = self.denominator()
        mod = m * den
        return Poly([(mono, Fraction(int(c * den) % mod, den)) for mono, c in self._terms])

    # -- printing -----------------------------------------------------
    def __repr__(self):
        return f"Poly({str(self)!r})"

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        # highest degree first reads naturally
        for mono, c in sorted(self._terms, key=lambda t: (-sum(e for _, e in t[0]), t[0])):
            body = "*".join(v if e == 1 else f"{v}^{e}" for v, e in mono)
            if not body:
                parts.append(str(c))
            elif c == 1:
                parts.append(body)
            elif c == -1:
                parts.append("-" + body)
            else:
                parts.append(f"{c}*{body}")
        text = " + ".join(parts)
        return text.replace("+ -", "- ")


@lru_cache(maxsize=None)
def power_sum(d: int) -> Poly:
    """``sum_{t=0}^{n} t**d`` as a polynomial in ``n``.

    Uses the falling-factorial expansion with Stirling numbers of the second
    kind: ``t**d = sum_k S(d,k) t^(k)`` and
    ``sum_{t=0}^{n} t^(k) = (n+1)^(k+1) / (k+1)``.
    """
    n = Poly.var("n")
    total = Poly()
    for k in range(d + 1):
        s = _stirling2(d, k)
        if not s:
            continue
        ff = Poly.const(1)
        for i in range(k + 1):
            ff = ff * (n + 1 - i)
        total = total + ff * Fraction(s, k + 1)
    return total


@lru_cache(maxsize=None)
def _stirling2(d: int, k: int) -> int:
    if d == k:
        return 1
    if k == 0 or k > d:
        return 0
    return k * _stirling2(d - 1, k) + _stirling2(d - 1, k - 1)


def content(values: Iterable[int]) -> int:
    g = 0
    for v in values:
        g = gcd(g, v)
    return g

"""Text syntax for loop expressions.

Grammar (whitespace is insignificant)::

    expr      := ['-'] term (('+' | '-') term)*
    term      := ['-'] int '*' atom | '{' poly '}' '*' atom | atom
    atom      := 'l[' subscript ']' (':' int)? | '0' | 'W(' expr ',' expr ')'
               | 'sum_{' clause (',' clause)* '}' '(' expr ')' | '(' expr ')'
    clause    := var ('>' affine | '>=' affine)
    subscript := affine
    affine    := ['-'] int | [int] var (('+' | '-') int)?
    poly      := ['-'] mono (('+' | '-') mono)*
    mono      := int ('*' factor)* | factor ('*' factor)*
    factor    := var ('^' int)?

Variables are identifiers other than ``l``, ``W`` and ``sum``.  A leading
``-`` negates the first term; ``{poly}`` multipliers carry polynomial
coefficients in the summation indices.  :func:`to_text` prints the canonical
form and ``parse(to_text(e)) == e`` for every expression whose finite sums
have no constant summands.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .affine import Affine
from .errors import ParseError
from .expr import Bracket, Const, FinSum, Gen, InfSum, IntMul, LoopExpr, Neg, grade
from .poly import Poly

_KEYWORDS = {"l", "W", "sum"}
_TOKEN_RE = re.compile(r"\s*(?:(\d+)|([A-Za-z][A-Za-z0-9]*)|(>=|[-+*()\[\]{},:>^_]))")


@dataclass(frozen=True)
class Token:
    kind: str  # "int", "name", "op", "eof"
    text: str
    line: int
    col: int


def tokenize(text: str) -> list:
    tokens = []
    pos = 0
    line, line_start = 1, 0
    n = len(text)
    while True:
        # skip whitespace, tracking lines
        while pos < n and text[pos].isspace():
            if text[pos] == "\n":
                line += 1
                line_start = pos + 1
            pos += 1
        if pos >= n:
            tokens.append(Token("eof", "", line, pos - line_start + 1))
            return tokens
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if not m or m.end() == pos:
            raise ParseError(line, col, ["token"], text[pos])
        if m.group(1) is not None:
            tokens.append(Token("int", m.group(1), line, col))
        elif m.group(2) is not None:
            tokens.append(Token("name", m.group(2), line, col))
        else:
            tokens.append(Token("op", m.group(3), line, col))
        pos = m.end()


class _Parser:
    def __init__(self, text: str, grade_n: int):
        self.toks = tokenize(text)
        self.i = 0
        self.grade_n = grade_n

    # -- helpers --------------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, expected):
        t = self.tok
        raise ParseError(t.line, t.col, expected, t.text or "end of input")

    def at(self, text: str) -> bool:
        return self.tok.kind in ("op", "name") and self.tok.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error([repr(text)])
        t = self.tok
        self.i += 1
        return t

    def expect_int(self) -> int:
        if self.tok.kind != "int":
            self.error(["integer"])
        v = int(self.tok.text)
        self.i += 1
        return v

    def is_var(self, t: Token | None = None) -> bool:
        t = t or self.tok
        return t.kind == "name" and t.text not in _KEYWORDS

    # -- grammar ----------------------------------------------------------
    def parse(self) -> LoopExpr:
        e = self.expr()
        if self.tok.kind != "eof":
            self.error(["'+'", "'-'", "end of input"])
        return e

    def expr(self) -> LoopExpr:
        items = []
        if self.at("-"):
            self.i += 1
            items.append(Neg(self.term()))
        else:
            items.append(self.term())
        while self.at("+") or self.at("-"):
            neg = self.tok.text == "-"
            self.i += 1
            t = self.term()
            items.append(Neg(t) if neg else t)
        if len(items) == 1:
            return items[0]
        return FinSum(tuple(items))

    def term(self) -> LoopExpr:
        if self.at("-") and self.peek().kind == "int" and self.peek(2).text == "*":
            self.i += 1
            c = -self.expect_int()
            self.expect("*")
            return IntMul(Poly.const(c), self.atom())
        if self.tok.kind == "int" and self.peek().text == "*":
            c = self.expect_int()
            self.expect("*")
            return IntMul(Poly.const(c), self.atom())
        if self.at("{"):
            self.i += 1
            c = self.poly()
            self.expect("}")
            self.expect("*")
            return IntMul(c, self.atom())
        return self.atom()

    def atom(self) -> LoopExpr:
        t = self.tok
        if t.kind == "int":
            if t.text != "0":
                self.i += 1
                self.error(["'*'"])
            self.i += 1
            return Const(self.grade_n)
        if self.at("l") and self.peek().text == "[":
            self.i += 2
            sub = self.affine()
            self.expect("]")
            label = 0
            if self.at(":"):
                self.i += 1
                label = self.expect_int()
            return Gen(sub, label, self.grade_n)
        if self.at("W") and self.peek().text == "(":
            self.i += 2
            a = self.expr()
            self.expect(",")
            b = self.expr()
            self.expect(")")
            return Bracket(a, b)
        if self.at("sum"):
            self.i += 1
            self.expect("_")
            self.expect("{")
            var, bounds = self.clause(None)
            bounds = [bounds]
            while self.at(","):
                self.i += 1
                _, b = self.clause(var)
                bounds.append(b)
            self.expect("}")
            self.expect("(")
            body = self.expr()
            self.expect(")")
            return InfSum(var, tuple(bounds), body)
        if self.at("("):
            self.i += 1
            e = self.expr()
            self.expect(")")
            return e
        self.error(["'l['", "'W('", "'sum_{'", "'('", "'0'", "integer", "'{'"])

    def clause(self, var):
        if not self.is_var():
            self.error(["variable"])
        name = self.tok.text
        if var is not None and name != var:
            self.error([repr(var)])
        self.i += 1
        if self.at(">="):
            self.i += 1
            return name, self.affine()
        if self.at(">"):
            self.i += 1
            return name, self.affine().shift(1)
        self.error(["'>'", "'>='"])

    def affine(self) -> Affine:
        sign = 1
        if self.at("-"):
            sign = -1
            self.i += 1
        if self.tok.kind == "int" and not self.is_var(self.peek()):
            return Affine.constant(sign * self.expect_int())
        coeff = 1
        if self.tok.kind == "int":
            coeff = self.expect_int()
        if not self.is_var():
            self.error(["variable", "integer"])
        if sign < 0:
            # subscripts must be non-decreasing in their variable
            self.error(["integer", "variable"])
        var = self.tok.text
        self.i += 1
        const = 0
        if (self.at("+") or self.at("-")) and self.peek().kind == "int":
            s = 1 if self.tok.text == "+" else -1
            self.i += 1
            const = s * self.expect_int()
        return Affine.of(var, coeff, const)

    def poly(self) -> Poly:
        total = Poly()
        sign = 1
        if self.at("-"):
            sign = -1
            self.i += 1
        while True:
            total = total + self.mono() * sign
            if self.at("+") or self.at("-"):
                sign = 1 if self.tok.text == "+" else -1
                self.i += 1
                continue
            return total

    def mono(self) -> Poly:
        if self.tok.kind == "int":
            out = Poly.const(self.expect_int())
        else:
            out = self.factor()
        while self.at("*"):
            self.i += 1
            out = out * self.factor()
        return out

    def factor(self) -> Poly:
        if not self.is_var():
            self.error(["variable"])
        p = Poly.var(self.tok.text)
        self.i += 1
        if self.at("^"):
            self.i += 1
            p = p ** self.expect_int()
        return p


def parse(text: str, grade_n: int = 2) -> LoopExpr:
    """Parse expression text; generators get grade ``grade_n``.

    Constants adopt the grade of their siblings in a sum, so ``0`` may stand
    for the zero of any grade.
    """
    e = _Parser(text, grade_n).parse()
    return _regrade(e, None)


def _regrade(e: LoopExpr, want: int | None) -> LoopExpr:
    if isinstance(e, Const):
        return Const(want) if want is not None and want != e.const_grade else e
    if isinstance(e, Gen):
        return e
    if isinstance(e, Neg):
        return Neg(_regrade(e.arg, want))
    if isinstance(e, IntMul):
        return IntMul(e.coeff, _regrade(e.arg, want))
    if isinstance(e, InfSum):
        return InfSum(e.var, e.bounds, _regrade(e.body, want))
    if isinstance(e, Bracket):
        return Bracket(_regrade(e.left, None), _regrade(e.right, None))
    if isinstance(e, FinSum):
        if want is None:
            for a in e.args:
                g = _known_grade(a)
                if g is not None:
                    want = g
                    break
        return FinSum(tuple(_regrade(a, want) for a in e.args))
    raise TypeError(e)


def _known_grade(e: LoopExpr) -> int | None:
    """Grade of ``e`` if it does not hinge on a bare constant."""
    if isinstance(e, Const):
        return None
    if isinstance(e, Gen):
        return e.gen_grade
    if isinstance(e, (Neg, IntMul)):
        return _known_grade(e.arg)
    if isinstance(e, InfSum):
        return _known_grade(e.body)
    if isinstance(e, FinSum):
        for a in e.args:
            g = _known_grade(a)
            if g is not None:
                return g
        return None
    if isinstance(e, Bracket):
        a, b = _known_grade(e.left), _known_grade(e.right)
        if a is None or b is None:
            return None
        return a + b - 1
    return None


# ----------------------------------------------------------------------
# printing


def to_text(e: LoopExpr) -> str:
    """Canonical text of ``e``."""
    if isinstance(e, Neg):
        return "-" + _term(e.arg)
    if isinstance(e, FinSum):
        parts = []
        for i, a in enumerate(e.args):
            if i == 0:
                parts.append(to_text(a) if not isinstance(a, FinSum) else "(" + to_text(a) + ")")
            elif isinstance(a, Neg):
                parts.append(" - " + _term(a.arg))
            else:
                parts.append(" + " + _term(a))
        return "".join(parts)
    return _term(e)


def _term(e: LoopExpr) -> str:
    if isinstance(e, IntMul):
        c = e.coeff
        if c.is_constant() and c.constant_value() > 0:
            head = str(c.constant_value())
        else:
            head = "{" + format_poly(c) + "}"
        return head + "*" + _atom(e.arg)
    return _atom(e)


def _atom(e: LoopExpr) -> str:
    if isinstance(e, Gen):
        return f"l[{e.sub}]" + (f":{e.label}" if e.label else "")
    if isinstance(e, Const):
        return "0"
    if isinstance(e, Bracket):
        return f"W({to_text(e.left)}, {to_text(e.right)})"
    if isinstance(e, InfSum):
        clauses = ", ".join(_clause(e.var, b) for b in e.bounds)
        return f"sum_{{{clauses}}}({to_text(e.body)})"
    if isinstance(e, (Neg, FinSum, IntMul)):
        return "(" + to_text(e) + ")"
    raise TypeError(f"not a loop expression: {type(e).__name__}")


def _clause(var: str, b: Affine) -> str:
    if b.var is not None and b.const >= 1:
        return f"{var}>{b.shift(-1)}"
    return f"{var}>={b}"


def format_poly(p: Poly) -> str:
    """Polynomial text in the ``{...}`` multiplier syntax (integer coefficients)."""
    if p.is_zero():
        return "0"
    parts = []
    for mono, c in sorted(p.terms, key=lambda t: (-sum(e for _, e in t[0]), t[0])):
        body = "*".join(v if e == 1 else f"{v}^{e}" for v, e in mono)
        if not body:
            text = str(abs(c))
        elif abs(c) == 1:
            text = body
        else:
            text = f"{abs(c)}*{body}"
        if not parts:
            parts.append(("-" if c < 0 else "") + text)
        else:
            parts.append((" - " if c < 0 else " + ") + text)
    return "".join(parts)

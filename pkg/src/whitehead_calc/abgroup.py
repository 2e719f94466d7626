"""Finitely generated abelian groups, tensor products and the theta map.

A group is stored as the list of orders of its cyclic factors (``0`` for an
infinite cyclic factor), in the order the user presented them.  Each factor
is one generator; elements are integer coordinate vectors reduced modulo the
factor orders.  :meth:`FGAbelianGroup.canonical` produces the invariant
factor form ``Z_d1 + ... + Z_dr + Z^f`` with ``d1 | d2 | ...``.

Tensor products of cyclic factors use ``Z_a (x) Z_b = Z_gcd(a, b)`` with the
conventions ``gcd(a, 0) = a`` and ``gcd(0, 0) = 0``, which is exactly what
``math.gcd`` returns.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from math import gcd
from typing import Iterable, Sequence


class GroupSpecError(ValueError):
    pass


# ----------------------------------------------------------------------
# integer helpers


def extended_gcd(a: int, b: int) -> tuple[int, int, int]:
    """Return ``(g, x, y)`` with ``a*x + b*y == g == gcd(a, b) >= 0``."""
    old_r, r = a, b
    old_x, x = 1, 0
    old_y, y = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_x, x = x, old_x - q * x
        old_y, y = y, old_y - q * y
    if old_r < 0:
        old_r, old_x, old_y = -old_r, -old_x, -old_y
    return old_r, old_x, old_y


def reduce_mod(value: int, order: int) -> int:
    """Canonical residue; order 0 means the infinite cyclic group."""
    return value if order == 0 else value % order


# ----------------------------------------------------------------------
# Smith normal form


def _identity(n: int) -> list[list[int]]:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def matmul(a: Sequence[Sequence[int]], b: Sequence[Sequence[int]]) -> list[list[int]]:
    if not a:
        return []
    inner = len(b)
    cols = len(b[0]) if b else 0
    return [[sum(a[i][k] * b[k][j] for k in range(inner)) for j in range(cols)] for i in range(len(a))]


@dataclass
class SmithForm:
    """``matrix == left @ diagonal @ right`` with ``left``/``right`` unimodular."""

    diagonal: list[list[int]]
    left: list[list[int]]
    right: list[list[int]]

    @property
    def factors(self) -> list[int]:
        n = min(len(self.diagonal), len(self.diagonal[0]) if self.diagonal else 0)
        return [self.diagonal[i][i] for i in range(n)]


def smith_normal_form(matrix: Sequence[Sequence[int]]) -> SmithForm:
    """Smith normal form with transformation witnesses.

    Works on a copy ``A`` while maintaining ``M == U @ A @ V``: a row operation
    ``A <- E A`` updates ``U <- U E^-1`` (a column operation on ``U``) and a
    column operation ``A <- A F`` updates ``V <- F^-1 V``.
    """
    a = [list(map(int, row)) for row in matrix]
    m = len(a)
    n = len(a[0]) if m else 0
    u = _identity(m)
    v = _identity(n)

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        for row in u:
            row[i], row[j] = row[j], row[i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        v[i], v[j] = v[j], v[i]

    def add_row(dst, src, c):  # row dst += c * row src
        if c == 0:
            return
        a[dst] = [x + c * y for x, y in zip(a[dst], a[src])]
        for row in u:
            row[src] -= c * row[dst]

    def add_col(dst, src, c):  # col dst += c * col src
        if c == 0:
            return
        for row in a:
            row[dst] += c * row[src]
        v[src] = [x - c * y for x, y in zip(v[src], v[dst])]

    def negate_row(i):
        a[i] = [-x for x in a[i]]
        for row in u:
            row[i] = -row[i]

    for t in range(min(m, n)):
        while True:
            nonzero = [(abs(a[i][j]), i, j) for i in range(t, m) for j in range(t, n) if a[i][j]]
            if not nonzero:
                break
            _, pi, pj = min(nonzero)
            swap_rows(t, pi)
            swap_cols(t, pj)
            done = True
            for i in range(t + 1, m):
                q = a[i][t] // a[t][t]
                add_row(i, t, -q)
                if a[i][t]:
                    done = False
            for j in range(t + 1, n):
                q = a[t][j] // a[t][t]
                add_col(j, t, -q)
                if a[t][j]:
                    done = False
            if not done:
                continue
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n) if a[i][j] % a[t][t]), None)
            if bad is None:
                break
            add_row(t, bad[0], 1)
        if t < m and a[t][t] < 0:
            negate_row(t)
    return SmithForm(a, u, v)


def invariant_factors(matrix: Sequence[Sequence[int]], generators: int | None = None) -> list[int]:
    """Orders of the cyclic factors of ``Z^generators / rowspace(matrix)``,
    trivial factors dropped, free factors reported as ``0`` at the end."""
    if generators is None:
        generators = len(matrix[0]) if matrix else 0
    if not matrix:
        return [0] * generators
    snf = smith_normal_form(matrix)
    diag = snf.factors
    torsion = [d for d in diag if d not in (0, 1)]
    free = generators - sum(1 for d in diag if d != 0)
    return torsion + [0] * free


# ----------------------------------------------------------------------
# groups


_FACTOR_RE = re.compile(r"^Z(?:_?(\d+))?(?:\^(\d+))?$")


@dataclass(frozen=True)
class FGAbelianGroup:
    orders: tuple[int, ...] = ()
    labels: tuple[str, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        orders = tuple(int(o) for o in self.orders)
        if any(o < 0 for o in orders):
            raise GroupSpecError(f"cyclic orders must be >= 0, got {orders}")
        object.__setattr__(self, "orders", orders)
        if self.labels is not None and len(self.labels) != len(orders):
            raise GroupSpecError("one label per cyclic factor")

    # -- construction -------------------------------------------------
    @classmethod
    def free(cls, rank: int) -> "FGAbelianGroup":
        return cls((0,) * rank)

    @classmethod
    def cyclic(cls, order: int) -> "FGAbelianGroup":
        return cls((order,))

    @classmethod
    def trivial(cls) -> "FGAbelianGroup":
        return cls(())

    @classmethod
    def parse(cls, text: str) -> "FGAbelianGroup":
        """Parse ``"Z"``, ``"Z_4"``, ``"Z4"``, ``"Z^3"``, ``"Z_2^2 + Z"``, ``"0"``."""
        text = text.strip()
        if text in ("0", "", "trivial", "Z_1", "Z1"):
            return cls.trivial()
        orders: list[int] = []
        for part in text.replace("(+)", "+").replace("⊕", "+").split("+"):
            part = part.strip().replace("ℤ", "Z").replace(" ", "")
            if part in ("0", "trivial"):
                continue
            m = _FACTOR_RE.match(part)
            if not m:
                raise GroupSpecError(f"cannot parse group factor {part!r}")
            order = int(m.group(1)) if m.group(1) else 0
            count = int(m.group(2)) if m.group(2) else 1
            orders.extend([order] * count)
        return cls(tuple(orders))

    # -- structure ----------------------------------------------------
    def __len__(self) -> int:
        return len(self.orders)

    @property
    def rank(self) -> int:
        return sum(1 for o in self.orders if o == 0)

    def order(self) -> int | None:
        if self.rank:
            return None
        out = 1
        for o in self.orders:
            out *= o
        return out

    def canonical(self) -> "FGAbelianGroup":
        factors = invariant_factors([[o if i == j else 0 for j in range(len(self.orders))]
                                     for i, o in enumerate(self.orders)], len(self.orders))
        return FGAbelianGroup(tuple(factors))

    def is_canonical(self) -> bool:
        return self.orders == self.canonical().orders

    def invariant_factors(self) -> tuple[int, ...]:
        return self.canonical().orders

    def isomorphic(self, other: "FGAbelianGroup") -> bool:
        return self.canonical().orders == other.canonical().orders

    def __add__(self, other: "FGAbelianGroup") -> "FGAbelianGroup":
        return FGAbelianGroup(self.orders + other.orders)

    def reduce(self, vec: Sequence[int]) -> tuple[int, ...]:
        if len(vec) != len(self.orders):
            raise ValueError(f"vector {tuple(vec)} has wrong length for {self}")
        return tuple(reduce_mod(x, o) for x, o in zip(vec, self.orders))

    def zero(self) -> tuple[int, ...]:
        return (0,) * len(self.orders)

    def generator(self, s: int) -> tuple[int, ...]:
        return tuple(int(i == s) for i in range(len(self.orders)))

    def label(self, s: int) -> str:
        return self.labels[s] if self.labels else f"e{s}"

    def elements(self, window: int = 2) -> Iterable[tuple[int, ...]]:
        """All elements; infinite factors contribute ``-window..window``."""
        import itertools

        ranges = [range(o) if o else range(-window, window + 1) for o in self.orders]
        return itertools.product(*ranges)

    def __str__(self):
        return format_group(self.orders)


def format_group(orders: Sequence[int]) -> str:
    torsion = [o for o in orders if o not in (0, 1)]
    free = sum(1 for o in orders if o == 0)
    parts = [f"Z_{o}" for o in torsion]
    if free == 1:
        parts.append("Z")
    elif free > 1:
        parts.append(f"Z^{free}")
    return " + ".join(parts) if parts else "0"


def tensor_order(a: int, b: int) -> int:
    return gcd(a, b)


def tensor(g: FGAbelianGroup, h: FGAbelianGroup) -> FGAbelianGroup:
    """``G (x) H`` in invariant factor form."""
    orders = tuple(gcd(a, b) for a in g.orders for b in h.orders)
    return FGAbelianGroup(orders).canonical()


def direct_sum(groups: Iterable[FGAbelianGroup]) -> FGAbelianGroup:
    orders: tuple[int, ...] = ()
    for grp in groups:
        orders += grp.orders
    return FGAbelianGroup(orders)


# ----------------------------------------------------------------------
# tensor elements


@dataclass(frozen=True)
class TensorElement:
    """Element of ``G (x) H`` in coordinates over generator pairs ``(s, t)``.

    The coordinate of ``e_s (x) f_t`` lives in ``Z_gcd(d_s, e_t)``.
    """

    left: FGAbelianGroup
    right: FGAbelianGroup
    coords: tuple[tuple[tuple[int, int], int], ...] = ()

    def __post_init__(self):
        lo, ro = self.left.orders, self.right.orders
        acc: dict = {}
        for (s, t), c in (self.coords.items() if isinstance(self.coords, dict) else self.coords):
            if not (0 <= s < len(lo) and 0 <= t < len(ro)):
                raise IndexError(f"generator pair {(s, t)} out of range")
            acc[(s, t)] = acc.get((s, t), 0) + c
        reduced = []
        for (s, t), c in sorted(acc.items()) if len(acc) > 1 else acc.items():
            c = reduce_mod(c, gcd(lo[s], ro[t]))
            if c:
                reduced.append(((s, t), c))
        object.__setattr__(self, "coords", tuple(reduced))

    def pair_order(self, s: int, t: int) -> int:
        return gcd(self.left.orders[s], self.right.orders[t])

    @classmethod
    def zero(cls, g: FGAbelianGroup, h: FGAbelianGroup) -> "TensorElement":
        return cls(g, h, ())

    @classmethod
    def simple(cls, g: FGAbelianGroup, h: FGAbelianGroup, a: Sequence[int], b: Sequence[int]) -> "TensorElement":
        """``a (x) b`` for coordinate vectors ``a`` in G and ``b`` in H."""
        coords = {}
        for s, x in enumerate(a):
            for t, y in enumerate(b):
                if x and y:
                    coords[(s, t)] = x * y
        return cls(g, h, coords)

    def as_dict(self) -> dict:
        return dict(self.coords)

    def get(self, s: int, t: int) -> int:
        return dict(self.coords).get((s, t), 0)

    def is_zero(self) -> bool:
        return not self.coords

    def _check(self, other: "TensorElement"):
        if self.left != other.left or self.right != other.right:
            raise ValueError("tensor elements live in different groups")

    def __add__(self, other: "TensorElement") -> "TensorElement":
        self._check(other)
        acc = self.as_dict()
        for k, c in other.coords:
            acc[k] = acc.get(k, 0) + c
        return TensorElement(self.left, self.right, acc)

    def __neg__(self) -> "TensorElement":
        return TensorElement(self.left, self.right, {k: -c for k, c in self.coords})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, k: int) -> "TensorElement":
        return TensorElement(self.left, self.right, {key: k * c for key, c in self.coords})

    def __str__(self):
        if not self.coords:
            return "0"
        return " + ".join(f"{c}*(e{s}(x)f{t})" for (s, t), c in self.coords)


# ----------------------------------------------------------------------
# theta:  G (x) prod_j H_j  ->  prod_j (G (x) H_j)


@dataclass(frozen=True)
class ProductTensor:
    """Finite sum of simple tensors ``a (x) (b_j)_j`` in ``G (x) prod_j H_j``
    for a finite index list ``J``."""

    g: FGAbelianGroup
    hs: tuple[FGAbelianGroup, ...]
    terms: tuple[tuple[tuple[int, ...], tuple[tuple[int, ...], ...]], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "hs", tuple(self.hs))
        fixed = []
        for a, bs in self.terms:
            a = tuple(a)
            bs = tuple(tuple(b) for b in bs)
            if len(a) != len(self.g.orders) or len(bs) != len(self.hs):
                raise ValueError("simple tensor shape does not match the groups")
            for b, h in zip(bs, self.hs):
                if len(b) != len(h.orders):
                    raise ValueError("component vector has wrong length")
            fixed.append((a, bs))
        object.__setattr__(self, "terms", tuple(fixed))

    def __add__(self, other: "ProductTensor") -> "ProductTensor":
        if (self.g, self.hs) != (other.g, other.hs):
            raise ValueError("different groups")
        return ProductTensor(self.g, self.hs, self.terms + other.terms)

    def normal_form(self) -> "ProductTensor":
        """``sum_s e_s (x) h_s`` with ``h_s`` reduced modulo ``d_s * prod H_j``.

        By bilinearity ``a (x) b = sum_s a_s e_s (x) b``; the component ``h_s``
        only matters modulo ``d_s`` times the product, and in a cyclic factor
        ``Z_e`` the subgroup ``d Z_e`` has index ``gcd(d, e)``.
        """
        rows = []
        for s, d in enumerate(self.g.orders):
            h = [[0] * len(hj.orders) for hj in self.hs]
            for a, bs in self.terms:
                if not a[s]:
                    continue
                for j, b in enumerate(bs):
                    for t, x in enumerate(b):
                        h[j][t] += a[s] * x
            h = tuple(tuple(reduce_mod(x, gcd(d, hj.orders[t])) for t, x in enumerate(hv))
                      for hv, hj in zip(h, self.hs))
            if any(any(x for x in hv) for hv in h):
                rows.append((self.g.generator(s), h))
        return ProductTensor(self.g, self.hs, tuple(rows))

    def __eq__(self, other):
        if not isinstance(other, ProductTensor):
            return NotImplemented
        a, b = self.normal_form(), other.normal_form()
        return (a.g, a.hs, a.terms) == (b.g, b.hs, b.terms)

    def __hash__(self):
        nf = self.normal_form()
        return hash((nf.g, nf.hs, nf.terms))


def theta_forward(x: ProductTensor) -> tuple[TensorElement, ...]:
    """``a (x) (b_j)_j  |->  (a (x) b_j)_j``, extended additively."""
    acc: list = [{} for _ in x.hs]
    for a, bs in x.terms:
        for j, b in enumerate(bs):
            for s, u in enumerate(a):
                for t, v in enumerate(b):
                    if u and v:
                        acc[j][(s, t)] = acc[j].get((s, t), 0) + u * v
    return tuple(TensorElement(x.g, h, c) for h, c in zip(x.hs, acc))


def theta_inverse(components: Sequence[TensorElement]) -> ProductTensor:
    """Inverse of :func:`theta_forward` on a finite truncation.

    Each cyclic factor ``e_s`` of ``G`` contributes the simple tensor
    ``e_s (x) (h_j)_j`` where ``h_j`` lifts the ``(s, .)`` coordinates of the
    ``j``-th component back into ``H_j``.
    """
    if not components:
        raise ValueError("need at least one component to know G")
    g = components[0].left
    if any(c.left != g for c in components):
        raise ValueError("components over different G")
    hs = tuple(c.right for c in components)
    rows = []
    for s in range(len(g.orders)):
        h = tuple(tuple(c.get(s, t) for t in range(len(c.right.orders))) for c in components)
        if any(any(v for v in hv) for hv in h):
            rows.append((g.generator(s), h))
    return ProductTensor(g, hs, tuple(rows))


def null_witness(m: int, ns: Sequence[int], hs: Sequence[int]) -> tuple[int, ...]:
    """Bezout certificate that ``1 (x) (h_j)_j`` vanishes in ``Z_m (x) prod Z_{n_j}``.

    Requires ``h_j == 0 mod gcd(m, n_j)`` for all ``j``.  Writing
    ``h_j = k_j g_j`` and ``g_j = p_j m + q_j n_j`` gives ``h_j == m * (k_j p_j)``
    in ``Z_{n_j}``, hence ``1 (x) (h_j) = m (x) (k_j p_j) = 0``.  Returns the
    vector ``(k_j p_j)_j``.
    """
    out = []
    for n, h in zip(ns, hs):
        g, p, _ = extended_gcd(m, n)
        if g == 0:
            if h != 0:
                raise ValueError("1 (x) h is nonzero in Z (x) Z")
            out.append(0)
            continue
        if h % g:
            raise ValueError(f"component {h} is not divisible by gcd({m}, {n}) = {g}")
        out.append((h // g) * p)
    return tuple(out)


# ----------------------------------------------------------------------
# the groups of the finite and truncated wedges


def finite_wedge_kernel_group(groups: Sequence[FGAbelianGroup]) -> FGAbelianGroup:
    """``sum_{k<m} G_k (x) (sum_{j>k} G_j)`` for a finite wedge of ``m`` summands."""
    orders: list[int] = []
    for k, gk in enumerate(groups):
        for gj in groups[k + 1:]:
            orders.extend(gcd(a, b) for a in gk.orders for b in gj.orders)
    return FGAbelianGroup(tuple(orders)).canonical()


def truncated_W_group(wedge, horizon: int) -> FGAbelianGroup:
    """The horizon-``N`` approximation ``sum_{j<N} G_j (x) sum_{j<k<=N} G_k``.

    ``wedge`` is anything with a ``group(j)`` method (1-based summand index).
    """
    if horizon < 2:
        raise ValueError("horizon must be at least 2")
    return finite_wedge_kernel_group([wedge.group(j) for j in range(1, horizon + 1)])

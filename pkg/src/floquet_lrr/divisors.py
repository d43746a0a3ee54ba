"""Rigged point divisors, secondary spaces and degrees.

Two settings are supported:

* lattice divisors, where each side is a finite point set D together with an
  explicit basis of functions supported on D (plain deltas by default);
* continuum divisors in R^n, where each side is a finite set of points with
  a set of multi-indices alpha at each, spanning derivatives of deltas.

Operators in the continuum are constant-coefficient polynomials in the
partial derivatives, stored as ``{multi-index: Fraction}``.
"""
from __future__ import annotations

import itertools
import json
import math
from collections.abc import Mapping
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import sympy

from .errors import ConfigError, RankUnstableError
from .lattice import LatticeFunction, LatticePoint, PeriodicLatticeOperator, apply, transpose

RANK_REL_TOL = 1e-10


def binom0(a: int, b: int) -> int:
    """Binomial coefficient that vanishes when ``a < b``."""
    if b < 0:
        raise ValueError("binom0 needs b >= 0")
    return math.comb(a, b) if a >= b else 0


def numeric_rank(mat, rel_tol: float = RANK_REL_TOL) -> int:
    """SVD rank with a relative threshold; errors if rank moves under a x10 change."""
    mat = np.asarray(mat)
    if mat.size == 0:
        return 0
    sv = np.linalg.svd(mat, compute_uv=False)
    if sv[0] == 0:
        return 0
    counts = {int(np.sum(sv > f * rel_tol * sv[0])) for f in (0.1, 1.0, 10.0)}
    if len(counts) != 1:
        raise RankUnstableError(f"numerical rank depends on the threshold: {sorted(counts)}",
                                singular_values=sv)
    return counts.pop()


def exact_rank(rows) -> int:
    rows = [list(r) for r in rows]
    if not rows or not rows[0]:
        return 0
    return int(sympy.Matrix(rows).rank())


# -- spans -------------------------------------------------------------------

@dataclass(frozen=True)
class LatticeSpan:
    """Functions supported on a finite point set ``support``."""

    support: frozenset
    basis: tuple = ()

    @classmethod
    def deltas(cls, points) -> "LatticeSpan":
        pts = [LatticePoint(tuple(p[0]), int(p[1])) for p in points]
        return cls(frozenset(pts), tuple(LatticeFunction.delta(p.g, p.c) for p in pts))

    @classmethod
    def from_functions(cls, functions, support=None) -> "LatticeSpan":
        funcs = tuple(functions)
        supp = set(support or ())
        for f in funcs:
            supp |= set(f)
        return cls(frozenset(LatticePoint(tuple(p[0]), int(p[1])) for p in supp), funcs)

    @property
    def points(self):
        return self.support

    @property
    def dim(self) -> int:
        return _function_rank(self.basis)

    def is_empty(self) -> bool:
        return not self.support and not self.basis


def _function_rank(funcs) -> int:
    if not funcs:
        return 0
    keys = sorted(set().union(*[set(f) for f in funcs]))
    mat = np.array([[f[k] for k in keys] for f in funcs])
    return numeric_rank(mat) if keys else 0


@dataclass(frozen=True)
class ContinuumSpan:
    """``span{d^alpha delta(. - x) : alpha in S_x}`` over finitely many points ``x``."""

    entries: tuple = ()  # ((point, frozenset of alphas), ...) sorted by point

    def __init__(self, entries=()):
        items = entries.items() if isinstance(entries, Mapping) else entries
        merged: dict[tuple, set] = {}
        for x, alphas in items:
            key = tuple(float(v) for v in x)
            merged.setdefault(key, set()).update(tuple(int(a) for a in al) for al in alphas)
        object.__setattr__(self, "entries", tuple(sorted((x, frozenset(a)) for x, a in merged.items() if a)))

    @property
    def points(self):
        return [x for x, _ in self.entries]

    @property
    def dim(self) -> int:
        return sum(len(a) for _, a in self.entries)

    def is_empty(self) -> bool:
        return not self.entries

    def translated(self, shift) -> "ContinuumSpan":
        return ContinuumSpan([(tuple(np.add(x, shift)), a) for x, a in self.entries])


def multi_indices(n: int, max_order: int, min_order: int = 0):
    out = []
    for t in range(min_order, max_order + 1):
        for combo in itertools.combinations_with_replacement(range(n), t):
            beta = [0] * n
            for a in combo:
                beta[a] += 1
            out.append(tuple(beta))
    return out


def derivative_ball(point, n: int, max_order: int, min_order: int = 0) -> ContinuumSpan:
    """All ``d^alpha delta(. - point)`` with ``min_order <= |alpha| <= max_order``."""
    return ContinuumSpan([(tuple(point), multi_indices(n, max_order, min_order))])


# -- divisors ------------------------------------------------------------------

@dataclass(frozen=True)
class RiggedPointDivisor:
    plus: object
    minus: object

    def __post_init__(self):
        if type(self.plus) is not type(self.minus):
            raise ConfigError("both sides of a divisor must be of the same kind")
        if set(self.plus.points) & set(self.minus.points):
            raise ConfigError("positive and negative supports must be disjoint")

    @property
    def kind(self) -> str:
        return "lattice" if isinstance(self.plus, LatticeSpan) else "continuum"

    def is_positive(self) -> bool:
        return self.minus.is_empty()

    def is_trivial(self) -> bool:
        return self.plus.is_empty() and self.minus.is_empty()


def _empty_like(span):
    return LatticeSpan(frozenset()) if isinstance(span, LatticeSpan) else ContinuumSpan()


def inverse_divisor(mu: RiggedPointDivisor) -> RiggedPointDivisor:
    return RiggedPointDivisor(mu.minus, mu.plus)


def positive_part(mu: RiggedPointDivisor) -> RiggedPointDivisor:
    return RiggedPointDivisor(mu.plus, _empty_like(mu.minus))


def negative_part(mu: RiggedPointDivisor) -> RiggedPointDivisor:
    return RiggedPointDivisor(_empty_like(mu.plus), mu.minus)


def trivial_divisor(kind: str = "continuum") -> RiggedPointDivisor:
    e = LatticeSpan(frozenset()) if kind == "lattice" else ContinuumSpan()
    return RiggedPointDivisor(e, e)


# -- secondary spaces ------------------------------------------------------------

def secondary_dim_lattice(op: PeriodicLatticeOperator, span: LatticeSpan) -> int:
    """``dim {u supported on D : A u in span L}``."""
    pts = sorted(span.support)
    if not pts:
        return 0
    images = [apply(op, LatticeFunction.delta(p.g, p.c)) for p in pts]
    basis = list(span.basis)
    keys = sorted(set().union(*[set(f) for f in images + basis]) or {pts[0]})
    cols = [[f[k] for k in keys] for f in images] + [[-f[k] for k in keys] for f in basis]
    mat = np.array(cols, dtype=complex).T
    return mat.shape[1] - numeric_rank(mat)


class Symbol:
    """Constant-coefficient operator ``sum_gamma p_gamma d^gamma``."""

    def __init__(self, coeffs: Mapping, n: int):
        self.n = n
        self.coeffs = {tuple(g): Fraction(c) for g, c in coeffs.items() if c != 0}
        for g in self.coeffs:
            if len(g) != n:
                raise ConfigError("multi-index length does not match the dimension")

    @property
    def order(self) -> int:
        return max((sum(g) for g in self.coeffs), default=0)

    def transposed(self) -> "Symbol":
        return Symbol({g: c * (-1) ** sum(g) for g, c in self.coeffs.items()}, self.n)

    def __mul__(self, other: "Symbol") -> "Symbol":
        out: dict = {}
        for g1, c1 in self.coeffs.items():
            for g2, c2 in other.coeffs.items():
                g = tuple(a + b for a, b in zip(g1, g2))
                out[g] = out.get(g, 0) + c1 * c2
        return Symbol(out, self.n)

    def __eq__(self, other):
        return isinstance(other, Symbol) and self.n == other.n and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.n, tuple(sorted(self.coeffs.items()))))


def neg_laplacian_symbol(n: int) -> Symbol:
    return Symbol({tuple(2 if i == a else 0 for i in range(n)): -1 for a in range(n)}, n)


def bilaplacian_symbol(n: int) -> Symbol:
    s = neg_laplacian_symbol(n)
    return s * s


def _secondary_at_point(symbol: Symbol, alphas: frozenset) -> int:
    top = max(sum(a) for a in alphas)
    bound = top - symbol.order
    if bound < 0:
        return 0
    unknowns = multi_indices(symbol.n, bound)
    images = []
    for beta in unknowns:
        img = {}
        for g, c in symbol.coeffs.items():
            key = tuple(a + b for a, b in zip(beta, g))
            img[key] = img.get(key, 0) + c
        images.append(img)
    forbidden = sorted(set().union(*[set(i) for i in images]) - set(alphas))
    if not forbidden:
        return len(unknowns)
    rows = [[img.get(key, 0) for img in images] for key in forbidden]
    return len(unknowns) - exact_rank(rows)


def secondary_dim_continuum(symbol: Symbol, span: ContinuumSpan) -> int:
    """``dim {u = sum c_alpha d^alpha delta : P u in span}``, point by point, exact."""
    return sum(_secondary_at_point(symbol, a) for _, a in span.entries)


# -- degree ----------------------------------------------------------------------

@dataclass(frozen=True)
class LatticeContext:
    op: PeriodicLatticeOperator

    def transposed(self) -> "LatticeContext":
        return LatticeContext(transpose(self.op))

    def secondary(self, span) -> int:
        return secondary_dim_lattice(self.op, span)


@dataclass(frozen=True)
class ContinuumContext:
    symbol: Symbol

    @property
    def n(self) -> int:
        return self.symbol.n

    def transposed(self) -> "ContinuumContext":
        return ContinuumContext(self.symbol.transposed())

    def secondary(self, span) -> int:
        return secondary_dim_continuum(self.symbol, span)


@dataclass(frozen=True)
class DegreeReport:
    ell_plus: int
    ell_tilde_plus: int
    ell_minus: int
    ell_tilde_minus: int

    def __post_init__(self):
        if self.ell_plus < self.ell_tilde_plus or self.ell_minus < self.ell_tilde_minus:
            raise RankUnstableError("secondary space larger than its span")

    @property
    def degree(self) -> int:
        return (self.ell_plus - self.ell_tilde_plus) - (self.ell_minus - self.ell_tilde_minus)

    def to_dict(self) -> dict:
        return {"ell_plus": self.ell_plus, "ell_tilde_plus": self.ell_tilde_plus,
                "ell_minus": self.ell_minus, "ell_tilde_minus": self.ell_tilde_minus,
                "degree": self.degree}


def degree(ctx, mu: RiggedPointDivisor) -> DegreeReport:
    """``(l+ - l~+) - (l- - l~-)``; the minus side uses the transposed operator."""
    dual = ctx.transposed()
    return DegreeReport(mu.plus.dim, ctx.secondary(mu.plus), mu.minus.dim, dual.secondary(mu.minus))


def inverse_degree(ctx, mu: RiggedPointDivisor) -> DegreeReport:
    """Degree of the inverse divisor measured with the transposed operator."""
    return degree(ctx.transposed(), inverse_divisor(mu))


def point_divisor_degree_closed_form(n: int, m: int, poles=(), zeros=()) -> int:
    """Degree of a point divisor with pole orders ``p_j > 0`` and zero orders ``q_j < 0``."""
    total = 0
    for p in poles:
        total += binom0(p + n - 1, n) - binom0(p + n - 1 - m, n)
    for q in zeros:
        a = abs(q)
        total -= binom0(a + n - 1, n) - binom0(a + n - 1 - m, n)
    return total


def point_divisor(n: int, poles=(), zeros=()) -> RiggedPointDivisor:
    """Divisor with ``d^alpha delta``, ``|alpha| <= p-1`` at each ``(x, p)`` pole and
    ``|alpha| <= |q|-1`` at each ``(x, q)`` zero."""
    plus = ContinuumSpan([(x, multi_indices(n, p - 1)) for x, p in poles])
    minus = ContinuumSpan([(x, multi_indices(n, abs(q) - 1)) for x, q in zeros])
    return RiggedPointDivisor(plus, minus)


# -- serialization -------------------------------------------------------------------

def _side_from_json(items, d=None):
    if not items:
        return None, []
    kinds = {"g" in it["point"] for it in items}
    if len(kinds) != 1:
        raise ConfigError("divisor mixes lattice and continuum points")
    return ("lattice" if kinds.pop() else "continuum"), items


def _lattice_side(items):
    support, funcs = set(), []
    for it in items:
        pt = LatticePoint(tuple(int(x) for x in it["point"]["g"]), int(it["point"].get("c", 0)))
        support.add(pt)
        if "functions" in it:
            for fn in it["functions"]:
                funcs.append(LatticeFunction({(tuple(e["g"]), int(e.get("c", 0))):
                                              complex(e.get("re", 0.0), e.get("im", 0.0)) for e in fn}))
        else:
            for al in it.get("alphas", [[0] * len(pt.g)]):
                if any(al):
                    raise ConfigError("lattice divisors only allow plain deltas or explicit functions")
                funcs.append(LatticeFunction.delta(pt.g, pt.c))
    for f in funcs:
        if not set(f) <= support:
            support |= set(f)
    return LatticeSpan(frozenset(support), tuple(funcs))


def _continuum_side(items):
    return ContinuumSpan([(tuple(float(v) for v in it["point"]["x"]),
                           [tuple(int(a) for a in al) for al in it["alphas"]]) for it in items])


def divisor_from_dict(data: Mapping) -> RiggedPointDivisor:
    try:
        plus_items, minus_items = data.get("plus", []), data.get("minus", [])
        kinds = {_side_from_json(plus_items)[0], _side_from_json(minus_items)[0]} - {None}
        if len(kinds) > 1:
            raise ConfigError("divisor mixes lattice and continuum points")
        kind = kinds.pop() if kinds else "lattice"
        side = _lattice_side if kind == "lattice" else _continuum_side
        return RiggedPointDivisor(side(plus_items), side(minus_items))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"malformed divisor description: {exc!r}") from exc


def divisor_from_json(text: str) -> RiggedPointDivisor:
    try:
        return divisor_from_dict(json.loads(text))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"divisor file is not JSON: {exc}") from exc


def divisor_to_dict(mu: RiggedPointDivisor) -> dict:
    def side(span):
        if isinstance(span, ContinuumSpan):
            return [{"point": {"x": list(x)}, "alphas": [list(a) for a in sorted(al)]}
                    for x, al in span.entries]
        out = []
        plain = {next(iter(f)) for f in span.basis if len(f) == 1 and next(iter(f.values())) == 1}
        if plain == set(span.support) and len(span.basis) == len(plain):
            for p in sorted(plain):
                out.append({"point": {"g": list(p.g), "c": p.c}, "alphas": [[0] * len(p.g)]})
            return out
        pts = sorted(span.support)
        funcs = [[{"g": list(k.g), "c": k.c, "re": v.real, "im": v.imag} for k, v in sorted(f.items())]
                 for f in span.basis]
        out.append({"point": {"g": list(pts[0].g), "c": pts[0].c}, "functions": funcs})
        for p in pts[1:]:
            out.append({"point": {"g": list(p.g), "c": p.c}, "functions": []})
        return out
    return {"plus": side(mu.plus), "minus": side(mu.minus)}

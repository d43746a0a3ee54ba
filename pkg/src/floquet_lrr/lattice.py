"""Discrete periodic covering Z^d x Cell and finite-range periodic operators.

A site of the covering is a :class:`LatticePoint` ``(g, c)``: a deck
translation ``g`` in Z^d and an index ``c`` into the fundamental cell.
A :class:`PeriodicLatticeOperator` is a finite list of hopping terms
``(i, j, h, a)`` acting as::

    (A f)(g, i) = sum_{(i, j, h, a)} a * f(g + h, j) - shift * f(g, i)

so ``shift`` plays the role of the spectral level being subtracted.
"""
from __future__ import annotations

import itertools
import json
import math
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError


class LatticePoint(NamedTuple):
    g: tuple[int, ...]
    c: int = 0


@dataclass(frozen=True, order=True)
class HoppingTerm:
    from_cell: int
    to_cell: int
    offset: tuple[int, ...]
    value: complex = field(compare=False)

    @property
    def key(self):
        return (self.from_cell, self.to_cell, self.offset)


def _canonical_terms(terms: Iterable[HoppingTerm]) -> tuple[HoppingTerm, ...]:
    merged: dict[tuple, complex] = {}
    for t in terms:
        merged[t.key] = merged.get(t.key, 0j) + complex(t.value)
    return tuple(
        HoppingTerm(i, j, g, v) for (i, j, g), v in sorted(merged.items()) if v != 0
    )


@dataclass(frozen=True)
class PeriodicLatticeOperator:
    """Finite-hopping Z^d-periodic operator on an ``n_cells``-site cell.

    Terms are canonicalized on construction (sorted by
    ``(from_cell, to_cell, offset)``, duplicates merged, zeros dropped), so
    two operators compare equal iff they act identically.
    """

    d: int
    n_cells: int
    terms: tuple[HoppingTerm, ...]
    shift: float = 0.0

    def __post_init__(self):
        if self.d < 1 or self.n_cells < 1:
            raise ConfigError("need d >= 1 and n_cells >= 1")
        fixed = []
        for t in self.terms:
            off = tuple(int(x) for x in t.offset)
            if len(off) != self.d:
                raise ConfigError(f"offset {off} has wrong length for d={self.d}")
            if not (0 <= t.from_cell < self.n_cells and 0 <= t.to_cell < self.n_cells):
                raise ConfigError(f"cell index out of range in {t}")
            fixed.append(HoppingTerm(int(t.from_cell), int(t.to_cell), off, complex(t.value)))
        object.__setattr__(self, "terms", _canonical_terms(fixed))
        object.__setattr__(self, "shift", float(self.shift))

    @classmethod
    def from_tuples(cls, d, n_cells, terms, shift=0.0):
        """Build from ``(i, j, offset, value)`` tuples."""
        return cls(d, n_cells, tuple(HoppingTerm(i, j, tuple(g), a) for i, j, g, a in terms), shift)

    @property
    def hop_radius(self) -> int:
        return max((max(abs(x) for x in t.offset) for t in self.terms), default=0)

    @property
    def is_real(self) -> bool:
        return all(t.value.imag == 0 for t in self.terms)

    @property
    def is_self_adjoint(self) -> bool:
        table = {t.key: t.value for t in self.terms}
        for t in self.terms:
            partner = table.get((t.to_cell, t.from_cell, tuple(-x for x in t.offset)))
            if partner is None or partner != t.value.conjugate():
                return False
        return True

    def shifted(self, level: float) -> "PeriodicLatticeOperator":
        """The operator ``A - level``."""
        return PeriodicLatticeOperator(self.d, self.n_cells, self.terms, self.shift + level)

    def plus_constant(self, c: float) -> "PeriodicLatticeOperator":
        return self.shifted(-c)

    # -- serialization ---------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "cell": self.n_cells,
            "shift": self.shift,
            "terms": [
                {"i": t.from_cell, "j": t.to_cell, "g": list(t.offset),
                 "re": t.value.real, "im": t.value.imag}
                for t in self.terms
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "PeriodicLatticeOperator":
        try:
            terms = tuple(
                HoppingTerm(int(t["i"]), int(t["j"]), tuple(int(x) for x in t["g"]),
                            complex(float(t["re"]), float(t.get("im", 0.0))))
                for t in data["terms"]
            )
            return cls(int(data["d"]), int(data["cell"]), terms, float(data.get("shift", 0.0)))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"malformed operator description: {exc!r}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "PeriodicLatticeOperator":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"operator file is not JSON: {exc}") from exc
        return cls.from_dict(data)


class LatticeFunction(Mapping):
    """Finitely supported complex function on the covering.

    Zero entries are never stored, so ``len(f)`` is the support size.
    """

    __slots__ = ("_data",)

    def __init__(self, entries: Mapping | Iterable = ()):
        items = entries.items() if isinstance(entries, Mapping) else entries
        data = {}
        for key, v in items:
            v = complex(v)
            if v != 0:
                data[LatticePoint(tuple(int(x) for x in key[0]), int(key[1]))] = v
        self._data = data

    @classmethod
    def delta(cls, g, c=0, value=1.0):
        return cls({(tuple(g), c): value})

    def __getitem__(self, key):
        return self._data.get(LatticePoint(tuple(key[0]), key[1]), 0j)

    def __iter__(self) -> Iterator[LatticePoint]:
        return iter(self._data)

    def __len__(self):
        return len(self._data)

    def __contains__(self, key):
        return LatticePoint(tuple(key[0]), key[1]) in self._data

    def __repr__(self):
        inner = ", ".join(f"{k.g},{k.c}: {v:.6g}" for k, v in sorted(self._data.items()))
        return f"LatticeFunction({{{inner}}})"

    def __add__(self, other: "LatticeFunction") -> "LatticeFunction":
        out = dict(self._data)
        for k, v in other.items():
            out[k] = out.get(k, 0j) + v
        return LatticeFunction(out)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __rmul__(self, scalar) -> "LatticeFunction":
        return LatticeFunction({k: scalar * v for k, v in self._data.items()})

    __mul__ = __rmul__

    def translated(self, h) -> "LatticeFunction":
        """``(T_h f)(g, c) = f(g - h, c)``: moves the support by ``+h``."""
        h = tuple(h)
        return LatticeFunction({(tuple(a + b for a, b in zip(k.g, h)), k.c): v
                                for k, v in self._data.items()})

    def sup_distance(self, other: "LatticeFunction") -> float:
        keys = set(self) | set(other)
        return max((abs(self[k] - other[k]) for k in keys), default=0.0)

    def l2_norm_squared(self) -> float:
        return float(sum(abs(v) ** 2 for v in self._data.values()))

    def support_radius(self) -> int:
        return max((max(abs(x) for x in k.g) for k in self._data), default=0)


def apply(op: PeriodicLatticeOperator, f: LatticeFunction) -> LatticeFunction:
    by_target: dict[int, list[HoppingTerm]] = {}
    for t in op.terms:
        by_target.setdefault(t.to_cell, []).append(t)
    out: dict[LatticePoint, complex] = {}
    for (g, c), val in f.items():
        # (A f)(x, i) += a f(x + h, c) with x + h = g
        for t in by_target.get(c, ()):
            x = LatticePoint(tuple(a - b for a, b in zip(g, t.offset)), t.from_cell)
            out[x] = out.get(x, 0j) + t.value * val
        if op.shift:
            x = LatticePoint(g, c)
            out[x] = out.get(x, 0j) - op.shift * val
    return LatticeFunction(out)


def transpose(op: PeriodicLatticeOperator) -> PeriodicLatticeOperator:
    """Bilinear transpose: ``<A u, v> = <u, A^T v>`` with ``<u, v> = sum u v``."""
    terms = tuple(HoppingTerm(t.to_cell, t.from_cell, tuple(-x for x in t.offset), t.value)
                  for t in op.terms)
    return PeriodicLatticeOperator(op.d, op.n_cells, terms, op.shift)


def pairing(u: LatticeFunction, v: LatticeFunction) -> complex:
    """Bilinear duality ``sum_x u(x) v(x)`` (no conjugation)."""
    if len(u) > len(v):
        u, v = v, u
    return sum((val * v[k] for k, val in u.items()), 0j)


def weight(g, N: float) -> float:
    """Polynomial weight ``<g>^N = (1 + |g|_2^2)^(N/2)``."""
    g = np.asarray(g, dtype=float)
    return float((1.0 + g @ g) ** (N / 2.0))


# -- box discretization -----------------------------------------------------

class Box:
    """Sites ``[-R, R]^d x Cell`` with a fixed linear ordering."""

    def __init__(self, d: int, n_cells: int, radius: int):
        self.d, self.n_cells, self.radius = d, n_cells, radius
        self.width = 2 * radius + 1
        self.size = self.width ** d * n_cells

    def index(self, g, c) -> int | None:
        idx = 0
        for x in g:
            x += self.radius
            if not 0 <= x < self.width:
                return None
            idx = idx * self.width + x
        return idx * self.n_cells + c

    def points(self) -> Iterator[LatticePoint]:
        rng = range(-self.radius, self.radius + 1)
        for g in itertools.product(rng, repeat=self.d):
            for c in range(self.n_cells):
                yield LatticePoint(g, c)

    def deck_coords(self) -> np.ndarray:
        """Array of shape (size, d) with the deck vector of every site."""
        grid = np.indices((self.width,) * self.d).reshape(self.d, -1).T - self.radius
        return np.repeat(grid, self.n_cells, axis=0)

    def to_vector(self, f: LatticeFunction) -> np.ndarray:
        vec = np.zeros(self.size, dtype=complex)
        for (g, c), v in f.items():
            i = self.index(g, c)
            if i is None:
                raise ValueError(f"site {(g, c)} outside box of radius {self.radius}")
            vec[i] = v
        return vec

    def to_function(self, vec) -> LatticeFunction:
        return LatticeFunction(zip(self.points(), vec))


def box_matrix(op: PeriodicLatticeOperator, box: Box) -> sp.csr_matrix:
    """Matrix of ``op`` on the box with zero exterior (Dirichlet truncation)."""
    rows, cols, vals = [], [], []
    coords = box.deck_coords()[:: box.n_cells]
    width = box.width
    for t in op.terms:
        tgt = coords + np.asarray(t.offset)
        inside = np.all((tgt >= -box.radius) & (tgt <= box.radius), axis=1)
        src_site = np.nonzero(inside)[0]
        tgt_lin = np.zeros(len(src_site), dtype=np.int64)
        for axis in range(box.d):
            tgt_lin = tgt_lin * width + (tgt[inside, axis] + box.radius)
        rows.append(src_site * box.n_cells + t.from_cell)
        cols.append(tgt_lin * box.n_cells + t.to_cell)
        vals.append(np.full(len(src_site), t.value))
    if op.shift:
        rows.append(np.arange(box.size))
        cols.append(np.arange(box.size))
        vals.append(np.full(box.size, -op.shift, dtype=complex))
    if not rows:
        return sp.csr_matrix((box.size, box.size), dtype=complex)
    mat = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(box.size, box.size),
    )
    return mat.tocsr()


def interior_mask(op: PeriodicLatticeOperator, box: Box) -> np.ndarray:
    """Sites whose whole stencil lies inside the box."""
    inner = box.radius - op.hop_radius
    coords = box.deck_coords()
    return np.all(np.abs(coords) <= inner, axis=1)


def multi_index_norm(g) -> int:
    return sum(abs(int(x)) for x in g)


def euclidean(g) -> float:
    return math.sqrt(sum(float(x) ** 2 for x in g))

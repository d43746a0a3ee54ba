"""Brute-force kernel of A on Floquet polynomials ``e^{ik.g} g^j`` (cellwise)."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from ..divisors import binom0, multi_indices
from ..errors import RankUnstableError, WindowOverflowError
from ..floquet import k_distance
from ..lattice import Box, PeriodicLatticeOperator, box_matrix, interior_mask

NULL_REL_TOL = 1e-9


@dataclass(frozen=True)
class FloquetPolynomialBasis:
    """Functions ``u(g, c') = e^{ik.g} g^j [c' = c]`` with ``|j| <= N``."""

    k: tuple
    N: int
    n_cells: int

    @property
    def d(self) -> int:
        return len(self.k)

    @property
    def exponents(self):
        return multi_indices(self.d, self.N)

    @property
    def labels(self):
        return [(j, c) for j in self.exponents for c in range(self.n_cells)]

    def __len__(self):
        return binom0(self.d + self.N, self.d) * self.n_cells


def _shift_expansion(j, h):
    """``(g + h)^j = sum_{j' <= j} C(j, j') h^{j - j'} g^{j'}`` as ``{j': int}``."""
    out = {}
    for jp in itertools.product(*[range(a + 1) for a in j]):
        coef = 1
        for a, b, s in zip(j, jp, h):
            coef *= math.comb(a, b) * s ** (a - b)
        if coef:
            out[jp] = out.get(jp, 0) + coef
    return out


def action_matrix(op: PeriodicLatticeOperator, basis: FloquetPolynomialBasis) -> np.ndarray:
    """Matrix of A on the basis: column ``(j, c)`` holds the coefficients of ``A u_{j,c}``."""
    labels = basis.labels
    index = {lab: i for i, lab in enumerate(labels)}
    k = np.asarray(basis.k, dtype=float)
    mat = np.zeros((len(labels), len(labels)), dtype=complex)
    for col, (j, c) in enumerate(labels):
        for t in op.terms:
            if t.to_cell != c:
                continue
            phase = t.value * np.exp(1j * float(np.dot(k, t.offset)))
            for jp, coef in _shift_expansion(j, t.offset).items():
                mat[index[(jp, t.from_cell)], col] += phase * coef
        if op.shift:
            mat[col, col] -= op.shift
    return mat


def _nullspace(mat, scale: float):
    """Null vectors, treating singular values below ``1e-9 * scale`` as zero.

    ``scale`` is at least the coefficient size of the operator, so an
    entirely vanishing matrix is recognised as such.
    """
    if mat.size == 0:
        return np.zeros((mat.shape[1], 0))
    _, sv, vh = np.linalg.svd(mat)
    smax = max(sv[0] if sv.size else 0.0, scale)
    n = mat.shape[1]
    ranks = {int(np.sum(sv > f * NULL_REL_TOL * smax)) if smax > 0 else 0 for f in (0.1, 1.0, 10.0)}
    if len(ranks) != 1:
        raise RankUnstableError(f"nullity of the Floquet polynomial system is threshold dependent: {ranks}",
                                singular_values=sv)
    rank = ranks.pop()
    return vh[rank:].conj().T if rank < n else np.zeros((n, 0))


@dataclass
class VinfOracleResult:
    total: int
    per_k: list
    null_vectors: list
    bases: list


def vinf_dim_oracle(op: PeriodicLatticeOperator, ks, N: int) -> VinfOracleResult:
    """Dimension of polynomially bounded solutions of degree <= N, by direct nullity.

    Uses only the quasimomenta ``ks``; multiplicities and Taylor data are not consulted.
    """
    ks = [np.asarray(k, dtype=float) for k in ks]
    for a, b in itertools.combinations(range(len(ks)), 2):
        if k_distance(ks[a], ks[b]) <= 1e-9:
            raise ValueError("quasimomenta must be distinct modulo 2 pi")
    per_k, vecs, bases = [], [], []
    scale = sum(abs(t.value) for t in op.terms) + abs(op.shift)
    for k in ks:
        basis = FloquetPolynomialBasis(tuple(k.tolist()), N, op.n_cells)
        ns = _nullspace(action_matrix(op, basis), scale)
        per_k.append(ns.shape[1])
        vecs.append(ns)
        bases.append(basis)
    return VinfOracleResult(int(sum(per_k)), per_k, vecs, bases)


# -- sampled functions ---------------------------------------------------------

@dataclass
class SampledFunction:
    """Values on the box ``[-radius, radius]^d x Cell``; array shape ``(w,)*d + (n_c,)``."""

    radius: int
    values: np.ndarray

    @property
    def d(self) -> int:
        return self.values.ndim - 1

    def at(self, g, c=0):
        return self.values[tuple(int(x) + self.radius for x in g) + (c,)]


def materialize(vector, basis: FloquetPolynomialBasis, radius: int) -> SampledFunction:
    d, n = basis.d, basis.n_cells
    w = 2 * radius + 1
    grid = np.indices((w,) * d).reshape(d, -1).T - radius
    phase = np.exp(1j * grid @ np.asarray(basis.k))
    vals = np.zeros((len(grid), n), dtype=complex)
    for coef, (j, c) in zip(vector, basis.labels):
        vals[:, c] += coef * np.prod(grid.astype(float) ** np.asarray(j), axis=1)
    vals *= phase[:, None]
    return SampledFunction(radius, vals.reshape((w,) * d + (n,)))


def twisted_difference(u: SampledFunction, g, k) -> SampledFunction:
    """``x -> e^{-ik.g} u(x + g) - u(x)`` on the largest centred box where it is defined."""
    g = np.asarray(g, dtype=int)
    r = u.radius - int(np.max(np.abs(g))) if g.size else u.radius
    if r < 0:
        raise WindowOverflowError("shift larger than the sampled window")
    d = u.d
    base = tuple(slice(u.radius - r, u.radius + r + 1) for _ in range(d))
    moved = tuple(slice(u.radius - r + s, u.radius + r + 1 + s) for s in g)
    phase = np.exp(-1j * float(np.dot(np.asarray(k, dtype=float), g)))
    return SampledFunction(r, phase * u.values[moved] - u.values[base])


def residual_on_window(op: PeriodicLatticeOperator, u: SampledFunction) -> float:
    """``max |A u|`` over sites whose stencil stays inside the window."""
    box = Box(u.d, u.values.shape[-1], u.radius)
    vec = u.values.reshape(-1)
    res = box_matrix(op, box) @ vec
    mask = interior_mask(op, box)
    return float(np.max(np.abs(res[mask]))) if mask.any() else 0.0

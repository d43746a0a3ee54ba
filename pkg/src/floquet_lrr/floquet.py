"""Floquet transform, its inverse on DFT grids, and fiber matrices A(k)."""
from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass

import numpy as np

from ._parallel import chunked, ordered_map, thread_cap
from .errors import ConfigError, WindowOverflowError
from .lattice import LatticeFunction, PeriodicLatticeOperator, apply

TWO_PI = 2.0 * math.pi
QM_TOL = 1e-9


def canonical_k(k) -> np.ndarray:
    """Representative with real part in [-pi, pi)."""
    k = np.asarray(k)
    re = np.mod(k.real + math.pi, TWO_PI) - math.pi
    if np.iscomplexobj(k):
        return re + 1j * k.imag
    return re


def k_distance(k1, k2) -> float:
    """Sup-distance between quasimomenta modulo 2 pi Z^d."""
    diff = np.asarray(k1) - np.asarray(k2)
    re = np.abs(np.mod(diff.real + math.pi, TWO_PI) - math.pi)
    im = np.abs(diff.imag) if np.iscomplexobj(diff) else 0.0
    return float(np.max(np.maximum(re, im))) if diff.size else 0.0


@dataclass(frozen=True, eq=False)
class Quasimomentum:
    k: tuple

    def __init__(self, k):
        arr = canonical_k(np.atleast_1d(np.asarray(k)))
        object.__setattr__(self, "k", tuple(arr.tolist()))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.k)

    @property
    def d(self) -> int:
        return len(self.k)

    def __eq__(self, other):
        if not isinstance(other, Quasimomentum):
            return NotImplemented
        return self.d == other.d and k_distance(self.array, other.array) <= QM_TOL

    __hash__ = None


def _as_k(k) -> np.ndarray:
    if isinstance(k, Quasimomentum):
        return k.array
    return np.atleast_1d(np.asarray(k))


class _TermTable:
    """Array view of an operator's terms, used by the vectorized evaluators."""

    def __init__(self, op: PeriodicLatticeOperator):
        n = op.n_cells
        self.op = op
        self.offsets = np.array([t.offset for t in op.terms], dtype=float).reshape(-1, op.d)
        self.values = np.array([t.value for t in op.terms], dtype=complex)
        flat = np.array([t.from_cell * n + t.to_cell for t in op.terms], dtype=int)
        self.scatter = np.zeros((len(op.terms), n * n))
        self.scatter[np.arange(len(op.terms)), flat] = 1.0

    def evaluate(self, ks: np.ndarray, weights=None) -> np.ndarray:
        n = self.op.n_cells
        phases = np.exp(1j * (ks @ self.offsets.T))
        coeff = phases * self.values
        if weights is not None:
            coeff = coeff * weights
        mats = (coeff @ self.scatter).reshape(len(ks), n, n)
        if self.op.shift and weights is None:
            mats = mats - self.op.shift * np.eye(n)
        return mats


def fiber_matrices(op: PeriodicLatticeOperator, ks) -> np.ndarray:
    """Stack of fiber matrices, shape ``(len(ks), n_c, n_c)``; ``ks`` may be complex."""
    ks = np.asarray(ks)
    if ks.ndim == 1:
        ks = ks.reshape(-1, op.d)
    if len(op.terms) == 0:
        return np.broadcast_to(-op.shift * np.eye(op.n_cells, dtype=complex),
                               (len(ks), op.n_cells, op.n_cells)).copy()
    return _TermTable(op).evaluate(ks)


def fiber_matrix(op: PeriodicLatticeOperator, k) -> np.ndarray:
    """``A(k)_{ij} = sum a e^{i k.g} - shift delta_ij`` over terms ``(i, j, g, a)``."""
    k = _as_k(k)
    if k.shape != (op.d,):
        raise ConfigError(f"quasimomentum has shape {k.shape}, expected ({op.d},)")
    return fiber_matrices(op, k[None, :])[0]


def fiber_derivative(op: PeriodicLatticeOperator, k, beta) -> np.ndarray:
    """Analytic ``d^beta A(k)`` = ``sum a (i g)^beta e^{i k.g}``."""
    k = _as_k(k)
    beta = np.asarray(beta, dtype=int)
    if not beta.any():
        return fiber_matrix(op, k)
    if len(op.terms) == 0:
        return np.zeros((op.n_cells, op.n_cells), dtype=complex)
    table = _TermTable(op)
    w = np.prod((1j * table.offsets) ** beta, axis=1)
    return table.evaluate(k[None, :], weights=w)[0]


def fiber_gradient(op: PeriodicLatticeOperator, k) -> np.ndarray:
    """All first derivatives, shape ``(d, n_c, n_c)``."""
    return np.stack([fiber_derivative(op, k, np.eye(op.d, dtype=int)[a]) for a in range(op.d)])


def lipschitz_bound(op: PeriodicLatticeOperator) -> float:
    """Upper bound for ``||A(k) - A(k')|| / |k - k'|`` (operator norm, Euclidean k)."""
    return float(sum(abs(t.value) * math.sqrt(sum(x * x for x in t.offset)) for t in op.terms))


# -- transform ------------------------------------------------------------

def floquet_transform(f: LatticeFunction, k, n_cells: int) -> np.ndarray:
    """``(F f)(k, c) = sum_g f(g, c) e^{-i k.g}``."""
    k = _as_k(k)
    out = np.zeros(n_cells, dtype=complex)
    if not len(f):
        return out
    items = sorted(f.items())
    gs = np.array([p.g for p, _ in items], dtype=float)
    cs = np.array([p.c for p, _ in items], dtype=int)
    vals = np.array([v for _, v in items])
    contrib = vals * np.exp(-1j * (gs @ k))
    np.add.at(out, cs, contrib)
    return out


def dft_axis(M: int) -> np.ndarray:
    if M < 1 or M % 2 == 0:
        raise ConfigError(f"DFT grid needs an odd number of points per axis, got {M}")
    h = (M - 1) // 2
    return TWO_PI * np.arange(-h, h + 1) / M


def dft_grid(M: int, d: int) -> np.ndarray:
    """Tensor grid ``k = 2 pi m / M``, ``|m| <= (M-1)/2``; shape ``(M^d, d)``."""
    axis = dft_axis(M)
    return np.array(list(itertools.product(axis, repeat=d)), dtype=float).reshape(-1, d)


def window_radius(M: int) -> int:
    return (M - 1) // 2


def sample_transform(f: LatticeFunction, M: int, d: int, n_cells: int) -> np.ndarray:
    """``F f`` on the DFT grid, shape ``(M^d, n_c)`` in :func:`dft_grid` order."""
    ks = dft_grid(M, d)
    return np.array([floquet_transform(f, k, n_cells) for k in ks])


def inverse_floquet(samples, M: int, d: int, points=None) -> LatticeFunction:
    """Trapezoidal inverse ``f(g, c) = M^{-d} sum_k F(k, c) e^{i k.g}``.

    Reconstructs on the exactness window ``|g_i| <= (M-1)/2`` by default.
    Explicit ``points`` outside that window raise :class:`WindowOverflowError`.
    """
    samples = np.asarray(samples)
    ks = dft_grid(M, d)
    if samples.shape[0] != len(ks):
        raise ConfigError(f"expected {len(ks)} samples, got {samples.shape[0]}")
    r = window_radius(M)
    if points is None:
        gs = np.array(list(itertools.product(range(-r, r + 1), repeat=d)), dtype=float).reshape(-1, d)
    else:
        gs = np.array([tuple(g) for g in points], dtype=float).reshape(-1, d)
        if gs.size and np.max(np.abs(gs)) > r:
            raise WindowOverflowError(f"requested deck vector outside window radius {r}")
    kernel = np.exp(1j * (gs @ ks.T)) / len(ks)
    values = kernel @ samples
    out = {}
    for g, row in zip(gs.astype(int), values):
        for c, v in enumerate(row):
            if abs(v) > 1e-14:
                out[(tuple(g.tolist()), c)] = v
    return LatticeFunction(out)


@dataclass(frozen=True)
class RoundTrip:
    result: LatticeFunction
    aliased: bool
    max_error: float


def floquet_round_trip(f: LatticeFunction, M: int, d: int, n_cells: int) -> RoundTrip:
    """Transform on the DFT grid and invert; flags support outside the window."""
    r = window_radius(M)
    aliased = f.support_radius() > r
    back = inverse_floquet(sample_transform(f, M, d, n_cells), M, d)
    return RoundTrip(back, aliased, back.sup_distance(f))


def verify_fiber_action(op: PeriodicLatticeOperator, f: LatticeFunction, k) -> float:
    """``|| F(Af)(k) - A(k) Ff(k) ||_inf``."""
    lhs = floquet_transform(apply(op, f), k, op.n_cells)
    rhs = fiber_matrix(op, k) @ floquet_transform(f, k, op.n_cells)
    return float(np.max(np.abs(lhs - rhs))) if lhs.size else 0.0


def verify_plancherel(f: LatticeFunction, M: int, d: int, n_cells: int) -> tuple[float, float]:
    """Returns ``(sum |f|^2, M^{-d} sum_k ||F f(k)||^2)``."""
    if f.support_radius() > window_radius(M):
        raise WindowOverflowError("support exceeds the exactness window of the grid")
    lhs = f.l2_norm_squared()
    samples = sample_transform(f, M, d, n_cells)
    rhs = float(np.sum(np.abs(samples) ** 2) / samples.shape[0])
    return lhs, rhs


# -- sweeps and dumps -----------------------------------------------------

def band_grid(M: int, d: int) -> np.ndarray:
    """Closed grid ``linspace(-pi, pi, M)^d`` (seam duplicated), shape ``(M^d, d)``."""
    if M < 2:
        raise ConfigError("band grid needs at least 2 points per axis")
    axis = np.linspace(-math.pi, math.pi, M)
    return np.array(list(itertools.product(axis, repeat=d)), dtype=float).reshape(-1, d)


def sweep(fn, ks: np.ndarray) -> np.ndarray:
    """Apply a vectorized ``fn`` to chunks of ``ks`` on the thread pool, in order."""
    parts = ordered_map(fn, chunked(ks, 4 * thread_cap()))
    return np.concatenate(parts, axis=0) if parts else np.empty((0,))


def fiber_csv(op: PeriodicLatticeOperator, ks) -> str:
    ks = np.asarray(ks, dtype=float).reshape(-1, op.d)
    n = op.n_cells
    header = [f"k_{a + 1}" for a in range(op.d)]
    for i in range(n):
        for j in range(n):
            header += [f"re_{i}{j}", f"im_{i}{j}"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for k, mat in zip(ks, fiber_matrices(op, ks)):
        row = [format(x, ".17g") for x in k]
        for z in mat.reshape(-1):
            row += [format(z.real, ".17g"), format(z.imag, ".17g")]
        w.writerow(row)
    return buf.getvalue()

"""Solution spaces of -Laplace in R^d (d >= 3) with point singularities and zeros.

Candidates are derivatives of the fundamental solution ``|x - y|^{2-d}`` at
the poles plus harmonic polynomials.  Growth at infinity is imposed on the
multipole expansion of the singular part: the degree ``2-d-t`` piece must
vanish whenever that decay rate is not allowed by the growth class, which
lets cancelling combinations of poles through.  Zeros are imposed as
vanishing derivatives at the prescribed points.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
import sympy

from ..divisors import (ContinuumContext, ContinuumSpan, RiggedPointDivisor, degree, exact_rank,
                        inverse_divisor, multi_indices, neg_laplacian_symbol, numeric_rank)
from ..errors import ConfigError, RankUnstableError
from ..liouville import INF, GrowthSpec, effective_degree, harmonic_dim

DECAYING = "decaying"
MAX_RESAMPLES = 5


# -- exact polynomial helpers ----------------------------------------------------

def _padd(p, q, scale=1):
    out = dict(p)
    for k, v in q.items():
        out[k] = out.get(k, 0) + scale * v
        if out[k] == 0:
            del out[k]
    return out


def _pdiff(p, i):
    out = {}
    for mono, c in p.items():
        if mono[i]:
            m = list(mono)
            m[i] -= 1
            out[tuple(m)] = out.get(tuple(m), 0) + c * mono[i]
    return {k: v for k, v in out.items() if v != 0}


def _pmul_var(p, i):
    out = {}
    for mono, c in p.items():
        m = list(mono)
        m[i] += 1
        out[tuple(m)] = c
    return out


def _peval(p, x):
    x = np.asarray(x, dtype=float)
    return float(sum(float(c) * np.prod(x ** np.asarray(m)) for m, c in p.items()))


# -- singular family P(w) |w|^s ------------------------------------------------------

@dataclass(frozen=True)
class ContinuumBasisFunction:
    kind: str  # "singular" | "harmonic"
    center: tuple = ()
    alpha: tuple = ()
    poly: dict = field(default_factory=dict, hash=False, compare=False)

    def derivative_value(self, beta, z) -> float:
        z = np.asarray(z, dtype=float)
        if self.kind == "singular":
            gamma = tuple(a + b for a, b in zip(self.alpha, beta))
            return evaluate_singular(len(z), gamma, z - np.asarray(self.center))
        p = self.poly
        for i, b in enumerate(beta):
            for _ in range(b):
                p = _pdiff(p, i)
        return _peval(p, z)


@lru_cache(maxsize=None)
def singular_derivative(d: int, gamma: tuple):
    """``d^gamma |w|^{2-d}`` as ``((s, ((mono, coef), ...)), ...)`` meaning ``sum P_s(w) |w|^s``."""
    if not any(gamma):
        return (((2 - d), (((0,) * d, 1),)),)
    i = next(a for a, g in enumerate(gamma) if g)
    prev = list(gamma)
    prev[i] -= 1
    terms: dict[int, dict] = {}
    for s, poly in singular_derivative(d, tuple(prev)):
        p = dict(poly)
        terms[s] = _padd(terms.get(s, {}), _pdiff(p, i))
        terms[s - 2] = _padd(terms.get(s - 2, {}), _pmul_var(p, i), s)
    return tuple((s, tuple(sorted(p.items()))) for s, p in sorted(terms.items()) if p)


def evaluate_singular(d: int, gamma, w) -> float:
    r2 = float(np.dot(w, w))
    if r2 == 0.0:
        raise ConfigError("derivative of the fundamental solution evaluated at its centre")
    total = 0.0
    for s, poly in singular_derivative(d, tuple(gamma)):
        total += _peval(dict(poly), w) * r2 ** (s / 2)
    return total


# -- harmonic polynomials ---------------------------------------------------------------

@lru_cache(maxsize=None)
def harmonic_basis(d: int, N: int):
    """Exact basis of harmonic polynomials of degree <= N as ``{mono: Fraction}`` dicts."""
    if N < 0:
        return ()
    monos = multi_indices(d, N)
    targets = multi_indices(d, N - 2) if N >= 2 else []
    tindex = {m: i for i, m in enumerate(targets)}
    mat = sympy.zeros(len(targets), len(monos))
    for col, m in enumerate(monos):
        lap = {}
        for i in range(d):
            lap = _padd(lap, _pdiff(_pdiff({m: 1}, i), i))
        for mono, c in lap.items():
            mat[tindex[mono], col] += c
    if not targets:
        null = [sympy.eye(len(monos))[:, i] for i in range(len(monos))]
    else:
        null = mat.nullspace()
    out = []
    for vec in null:
        out.append({monos[i]: Fraction(int(v.p), int(v.q)) for i, v in enumerate(vec) if v != 0})
    return tuple(out)


# -- reduction modulo |xi|^2 -------------------------------------------------------------

@lru_cache(maxsize=None)
def reduce_monomial(gamma: tuple):
    """Normal form of ``xi^gamma`` modulo ``|xi|^2``: last exponent at most 1."""
    d = len(gamma)
    if gamma[-1] <= 1:
        return ((gamma, 1),)
    out: dict = {}
    for i in range(d - 1):
        g = list(gamma)
        g[-1] -= 2
        g[i] += 2
        for mono, c in reduce_monomial(tuple(g)):
            out[mono] = out.get(mono, 0) - c
    return tuple((m, c) for m, c in sorted(out.items()) if c)


def representation_kernel(alphas, d: int) -> int:
    """Number of independent ``sum c_alpha d^alpha Phi`` vanishing identically."""
    alphas = sorted(alphas)
    reduced = [dict(reduce_monomial(tuple(a))) for a in alphas]
    keys = sorted(set().union(*[set(r) for r in reduced]))
    if not keys:
        return len(alphas)
    rows = [[r.get(k, 0) for r in reduced] for k in keys]
    return len(alphas) - exact_rank(rows)


# -- admissibility ---------------------------------------------------------------------------

def layer_admissible(t: int, d: int, growth) -> bool:
    """Whether a homogeneous harmonic piece of degree ``2-d-t`` has the requested growth."""
    e = 2 - d - t
    if growth == DECAYING:
        return e < 0
    if growth.p == INF:
        return e <= growth.N
    return growth.p * (e - growth.N) < -d


def forbidden_layers(d: int, growth) -> list[int]:
    out, t = [], 0
    while not layer_admissible(t, d, growth):
        out.append(t)
        t += 1
        if t > 64:
            raise ConfigError("growth class forbids every multipole layer")
    return out


def polynomial_degree(d: int, growth) -> int | None:
    if growth == DECAYING:
        return None
    return effective_degree(growth, d)


# -- the oracle ------------------------------------------------------------------------------------

def _multipole_row_block(columns, t, d):
    """Coefficient rows of the degree-(2-d-t) multipole piece, one per reduced monomial."""
    acc: list[dict] = []
    for col in columns:
        if col.kind != "singular" or sum(col.alpha) > t:
            acc.append({})
            continue
        y = np.asarray(col.center, dtype=float)
        piece: dict = {}
        for beta in multi_indices(d, t - sum(col.alpha), t - sum(col.alpha)):
            coef = float(np.prod((-y) ** np.asarray(beta))) / math.prod(math.factorial(b) for b in beta)
            gamma = tuple(a + b for a, b in zip(col.alpha, beta))
            for mono, c in reduce_monomial(gamma):
                piece[mono] = piece.get(mono, 0.0) + coef * c
        acc.append(piece)
    keys = sorted(set().union(*[set(p) for p in acc]))
    return [[p.get(k, 0.0) for p in acc] for k in keys]


@dataclass
class ContinuumDimReport:
    dim: int
    n_candidates: int
    rank: int
    kernel: int
    forbidden_layers: list
    polynomial_degree: int | None


def continuum_space_dim(mu: RiggedPointDivisor, growth, d: int, report: bool = False):
    """Dimension of ``{u : -Laplace u in L+, (u, L-) = 0, u in the growth class}`` on R^d."""
    if d < 3:
        raise ConfigError("continuum oracle needs d >= 3")
    if not isinstance(mu.plus, ContinuumSpan):
        raise ConfigError("continuum oracle needs a continuum divisor")
    for x, _ in mu.plus.entries + mu.minus.entries:
        if len(x) != d:
            raise ConfigError("divisor point has the wrong dimension")
    for z, _ in mu.minus.entries:
        for y, _ in mu.plus.entries:
            if np.linalg.norm(np.subtract(z, y)) < 1e-12:
                raise ConfigError("zero constraint placed at a pole")

    columns = [ContinuumBasisFunction("singular", y, a) for y, alphas in mu.plus.entries for a in sorted(alphas)]
    n_poly = polynomial_degree(d, growth)
    if n_poly is not None:
        columns += [ContinuumBasisFunction("harmonic", poly=p) for p in harmonic_basis(d, n_poly)]
    kernel = sum(representation_kernel(a, d) for _, a in mu.plus.entries)
    if not columns:
        return ContinuumDimReport(0, 0, 0, 0, [], n_poly) if report else 0

    rows = []
    layers = forbidden_layers(d, growth)
    for t in layers:
        rows += _multipole_row_block(columns, t, d)
    for z, betas in mu.minus.entries:
        for beta in sorted(betas):
            rows.append([col.derivative_value(beta, z) for col in columns])
    rows = [r for r in rows if np.max(np.abs(r)) > 0]
    if rows:
        mat = np.array(rows, dtype=float)
        mat /= np.max(np.abs(mat), axis=1, keepdims=True)
        norms = np.linalg.norm(mat, axis=0)
        mat /= np.where(norms > 0, norms, 1.0)
        rank = numeric_rank(mat)
    else:
        rank = 0
    dim = len(columns) - rank - kernel
    if dim < 0:
        raise RankUnstableError("negative dimension: representation kernel not resolved")
    if report:
        return ContinuumDimReport(dim, len(columns), rank, kernel, layers, n_poly)
    return dim


# -- experiments -------------------------------------------------------------------------------------

def _generic_points(rng, count, d):
    return [tuple(rng.uniform(-1.0, 1.0, size=d)) for _ in range(count)]


def _with_resampling(seed, fn):
    rng = np.random.default_rng(seed)
    last = None
    for _ in range(MAX_RESAMPLES):
        try:
            return fn(rng)
        except RankUnstableError as exc:
            last = exc
    raise last


def first_order(d):
    return [tuple(1 if i == a else 0 for i in range(d)) for a in range(d)]


@dataclass
class RiemannRochResult:
    k: int
    l: int
    dim_mu: int
    dim_inverse: int
    degree: int
    seed: int

    @property
    def difference(self) -> int:
        return self.dim_mu - self.dim_inverse


def riemann_roch_experiment(k: int, l: int, d: int = 3, seed: int = 0) -> RiemannRochResult:
    """k simple poles and l points with all first derivatives as zeros, decaying class."""
    def run(rng):
        pts = _generic_points(rng, k + l, d)
        mu = RiggedPointDivisor(ContinuumSpan([(y, [(0,) * d]) for y in pts[:k]]),
                                ContinuumSpan([(z, first_order(d)) for z in pts[k:]]))
        deg = degree(ContinuumContext(neg_laplacian_symbol(d)), mu).degree
        return RiemannRochResult(k, l, continuum_space_dim(mu, DECAYING, d),
                                 continuum_space_dim(inverse_divisor(mu), DECAYING, d), deg, seed)
    return _with_resampling(seed, run)


@dataclass
class GapResult:
    ell: int
    d: int
    N: float
    lhs: int
    rhs: int
    seed: int

    @property
    def gap(self) -> int:
        return self.lhs - self.rhs


def rrl_gap_experiment(ell: int, d: int = 3, N: float = 0, seed: int = 0) -> GapResult:
    """Zeros with all first derivatives at ``ell`` points; compares both sides."""
    def run(rng):
        pts = _generic_points(rng, ell, d)
        mu = RiggedPointDivisor(ContinuumSpan(), ContinuumSpan([(z, first_order(d)) for z in pts]))
        lhs = (continuum_space_dim(mu, GrowthSpec(INF, N), d)
               - continuum_space_dim(inverse_divisor(mu), GrowthSpec(1.0, -N), d))
        deg = degree(ContinuumContext(neg_laplacian_symbol(d)), mu).degree
        rhs = harmonic_dim(d, math.floor(N)) + deg
        return GapResult(ell, d, N, lhs, rhs, seed)
    return _with_resampling(seed, run)


@dataclass
class NegativeDivisorResult:
    d: int
    M0: int
    M1: int
    growth: GrowthSpec
    dim: int
    dim_V: int
    degree: int
    expected: int

    @property
    def formula_value(self) -> int:
        return self.dim_V + self.degree

    @property
    def equality(self) -> bool:
        return self.dim == self.formula_value


def negative_divisor_equality_experiment(d: int, M0: int, M1: int, growth: GrowthSpec,
                                         seed: int = 0) -> NegativeDivisorResult:
    """Zeros ``d^alpha delta(. - x0)``, ``M1 <= |alpha| <= M0``, with no poles."""
    n_eff = effective_degree(growth, d)
    ok = (growth.p == INF and growth.N >= M0) or (growth.p != INF and growth.N > d / growth.p + M0)
    if not ok:
        raise ConfigError("growth class too small for the negative-divisor experiment")

    def run(rng):
        x0 = _generic_points(rng, 1, d)[0]
        mu = RiggedPointDivisor(ContinuumSpan(), ContinuumSpan([(x0, multi_indices(d, M0, M1))]))
        dim = continuum_space_dim(mu, growth, d)
        deg = degree(ContinuumContext(neg_laplacian_symbol(d)), mu).degree
        dim_v = harmonic_dim(d, n_eff) if n_eff is not None else 0
        expected = dim_v - (harmonic_dim(d, M0) - harmonic_dim(d, M1 - 1))
        return NegativeDivisorResult(d, M0, M1, growth, dim, dim_v, deg, expected)
    return _with_resampling(seed, run)

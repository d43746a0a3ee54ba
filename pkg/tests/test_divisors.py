import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from floquet_lrr import models
from floquet_lrr.divisors import (ContinuumContext, ContinuumSpan, LatticeContext, LatticeSpan,
                                  RiggedPointDivisor, bilaplacian_symbol, degree, divisor_from_json,
                                  divisor_to_dict, exact_rank, inverse_degree, inverse_divisor,
                                  multi_indices, neg_laplacian_symbol, numeric_rank, point_divisor,
                                  point_divisor_degree_closed_form, secondary_dim_lattice)
from floquet_lrr.errors import ConfigError, RankUnstableError
from floquet_lrr.lattice import LatticeFunction


def _plain(points):
    return LatticeSpan.deltas(points)


def _empty():
    return LatticeSpan(frozenset())


def test_numeric_rank_and_instability():
    assert numeric_rank(np.diag([1.0, 1.0, 0.0])) == 2
    with pytest.raises(RankUnstableError):
        numeric_rank(np.diag([1.0, 1e-10]))
    assert exact_rank([[1, 2], [2, 4]]) == 1


@pytest.mark.parametrize("K,deg", [(0, 1), (1, 2), (3, 2), (6, 2)])
def test_lattice_degree_interval_1d(K, deg):
    # u on {0..K} with A u supported there must vanish at both ends
    mu = RiggedPointDivisor(_plain([((g,), 0) for g in range(K + 1)]), _empty())
    assert degree(LatticeContext(models.laplacian(1)), mu).degree == deg


@pytest.mark.parametrize("K", [1, 2, 3, 4])
def test_lattice_degree_square_2d(K):
    pts = [((a, b), 0) for a in range(K + 1) for b in range(K + 1)]
    rep = degree(LatticeContext(models.laplacian(2)), RiggedPointDivisor(_plain(pts), _empty()))
    assert rep.ell_tilde_plus == (K - 1) ** 2
    assert rep.degree == 4 * K


def test_secondary_with_function_span():
    # A delta_0 itself spans L, so the delta is admissible
    op = models.laplacian(1)
    image = LatticeFunction({((-1,), 0): -1.0, ((0,), 0): 2.0, ((1,), 0): -1.0})
    span = LatticeSpan.from_functions([image], support=[((0,), 0)])
    assert secondary_dim_lattice(op, span) == 1


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_degree_antisymmetry_random_lattice(seed):
    rng = np.random.default_rng(seed)
    op = models.random_operator(rng, 2, 2, complex_values=False)
    ctx = LatticeContext(op)
    pts = list(dict.fromkeys(((int(a), int(b)), int(c))
                             for a, b, c in rng.integers([-2, -2, 0], [3, 3, 2], size=(5, 3))))
    split = int(rng.integers(0, len(pts) + 1))
    mu = RiggedPointDivisor(_plain(pts[:split]), _plain(pts[split:]))
    assert degree(ctx, mu).degree + inverse_degree(ctx, mu).degree == 0


@pytest.mark.parametrize("n", [2, 3, 4])
def test_closed_form_several_points(n):
    rng = np.random.default_rng(n)
    for sym, m in ((neg_laplacian_symbol(n), 2), (bilaplacian_symbol(n), 4)):
        poles = [(tuple(rng.normal(size=n)), int(p)) for p in rng.integers(1, 5, size=2)]
        zeros = [(tuple(rng.normal(size=n)), -int(q)) for q in rng.integers(1, 5, size=2)]
        got = degree(ContinuumContext(sym), point_divisor(n, poles, zeros)).degree
        assert got == point_divisor_degree_closed_form(n, m, [p for _, p in poles], [q for _, q in zeros])


def test_continuum_secondary_for_full_ball():
    # -Delta u in the span of all derivatives up to order P-1: every u of order <= P-3 works
    sym = neg_laplacian_symbol(3)
    for P in range(1, 6):
        span = ContinuumSpan([((0.0, 0.0, 0.0), multi_indices(3, P - 1))])
        rep = degree(ContinuumContext(sym), RiggedPointDivisor(span, ContinuumSpan()))
        assert rep.ell_tilde_plus == (len(multi_indices(3, P - 3)) if P >= 3 else 0)


def test_symbol_transpose_and_square():
    lap = neg_laplacian_symbol(3)
    assert lap.transposed() == lap
    first = type(lap)({(1, 0, 0): 1}, 3)
    assert first.transposed() == type(lap)({(1, 0, 0): -1}, 3)
    assert bilaplacian_symbol(3).order == 4


def test_disjointness_enforced():
    with pytest.raises(ConfigError):
        RiggedPointDivisor(_plain([((0,), 0)]), _plain([((0,), 0)]))


def test_serialization_round_trip():
    mu = RiggedPointDivisor(_plain([((0, 1), 0), ((2, 2), 1)]), _plain([((5, 5), 0)]))
    back = divisor_from_json(json.dumps(divisor_to_dict(mu)))
    ctx = LatticeContext(models.two_cell_potential(2))
    assert degree(ctx, back) == degree(ctx, mu)
    cont = point_divisor(3, [((0.0, 0.0, 0.0), 2)], [((1.0, 0.0, 0.0), -1)])
    back = divisor_from_json(json.dumps(divisor_to_dict(cont)))
    assert back.plus.dim == 4 and back.minus.dim == 1


def test_malformed_divisor_rejected():
    for bad in ("[", '{"plus": [{"point": {"g": [0]}, "alphas": [[1]]}], "minus": []}'):
        with pytest.raises(ConfigError):
            divisor_from_json(bad)


def test_inverse_is_involution():
    mu = point_divisor(2, [((0.0, 0.0), 3)], [((1.0, 1.0), -2)])
    assert inverse_divisor(inverse_divisor(mu)) == mu
    d = degree(ContinuumContext(neg_laplacian_symbol(2)), mu).degree
    assert d == point_divisor_degree_closed_form(2, 2, [3], [-2])

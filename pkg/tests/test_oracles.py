import math

import numpy as np
import pytest

from floquet_lrr import models, spectral
from floquet_lrr import liouville as lv
from floquet_lrr.divisors import ContinuumSpan, LatticeSpan, RiggedPointDivisor, inverse_divisor
from floquet_lrr.errors import SingularSystemError
from floquet_lrr.lattice import LatticePoint, PeriodicLatticeOperator
from floquet_lrr.liouville import INF, GrowthSpec
from floquet_lrr.oracles import (DECAYING, continuum_space_dim, dedekind_shifts, green_function,
                                 materialize, negative_divisor_equality_experiment,
                                 residual_on_window, riemann_roch_experiment, rrl_gap_experiment,
                                 truncated_L_dim_estimate, twisted_difference, vinf_dim_oracle)
from floquet_lrr.oracles.continuum import harmonic_basis


# -- Floquet polynomial kernel ------------------------------------------------------

@pytest.mark.parametrize("op,N", [(models.laplacian(2), 2), (models.graphene(), 1),
                                  (models.two_cell_potential(1).shifted(models.two_cell_bottom_edge(1)), 2)])
def test_null_vectors_solve_the_equation(op, N):
    pts = spectral.fermi_points(op)
    res = vinf_dim_oracle(op, [p.k for p in pts], N)
    for vecs, basis in zip(res.null_vectors, res.bases):
        for v in vecs.T:
            u = materialize(v, basis, 6)
            assert residual_on_window(op, u) < 1e-9 * max(1.0, np.max(np.abs(u.values)))


def test_twisted_differences_annihilate_polynomial_part():
    op = models.laplacian(2)
    N = 3
    res = vinf_dim_oracle(op, [np.zeros(2)], N)
    basis, vecs = res.bases[0], res.null_vectors[0]
    for v in vecs.T:
        u = materialize(v, basis, 8)
        for _ in range(N + 1):
            u = twisted_difference(u, (1, 0), np.zeros(2))
        assert np.max(np.abs(u.values)) < 1e-8


def test_oracle_invariant_under_reciprocal_shift():
    op = models.graphene()
    ks = [p.k for p in spectral.fermi_points(op)]
    shifted = [k + 2 * math.pi * np.array([1, -1]) for k in ks]
    assert vinf_dim_oracle(op, ks, 2).total == vinf_dim_oracle(op, shifted, 2).total == 12


def test_oracle_off_fermi_point_is_zero():
    assert vinf_dim_oracle(models.laplacian(2), [np.array([0.5, 0.0])], 3).total == 0


# -- continuum oracle -----------------------------------------------------------------

def test_harmonic_basis_dimension():
    for d in (3, 4):
        for N in range(4):
            assert len(harmonic_basis(d, N)) == lv.harmonic_dim(d, N)


@pytest.mark.parametrize("k,l", [(1, 0), (2, 1), (3, 2)])
def test_riemann_roch_frozen(k, l):
    res = riemann_roch_experiment(k, l, 3, seed=0)
    assert res.difference == k - 3 * l


def test_gap_values_frozen():
    assert [rrl_gap_experiment(ell, 3, 0).gap for ell in (1, 2, 3)] == [3, 6, 8]


def test_negative_divisor_frozen():
    got = [negative_divisor_equality_experiment(3, 0, 0, GrowthSpec(INF, N)).dim for N in range(4)]
    assert got == [0, 3, 8, 15]
    got = [negative_divisor_equality_experiment(3, 1, 0, GrowthSpec(INF, N)).dim for N in (1, 2, 3)]
    assert got == [0, 5, 12]


def test_continuum_translation_invariance():
    rng = np.random.default_rng(0)
    pts = [tuple(rng.uniform(-1, 1, 3)) for _ in range(3)]
    mu = RiggedPointDivisor(ContinuumSpan([(pts[0], [(0, 0, 0)]), (pts[1], [(0, 0, 0), (1, 0, 0)])]),
                            ContinuumSpan([(pts[2], [(0, 0, 0)])]))
    shift = (5.0, -2.0, 0.5)
    moved = RiggedPointDivisor(mu.plus.translated(shift), mu.minus.translated(shift))
    for growth in (DECAYING, GrowthSpec(INF, 1)):
        assert continuum_space_dim(mu, growth, 3) == continuum_space_dim(moved, growth, 3)


def test_continuum_simple_counts():
    origin = (0.0, 0.0, 0.0)
    one_pole = RiggedPointDivisor(ContinuumSpan([(origin, [(0, 0, 0)])]), ContinuumSpan())
    assert continuum_space_dim(one_pole, DECAYING, 3) == 1
    # bounded: constants plus the fundamental solution
    assert continuum_space_dim(one_pole, GrowthSpec(INF, 0), 3) == 2
    assert continuum_space_dim(inverse_divisor(one_pole), DECAYING, 3) == 0


# -- Dedekind --------------------------------------------------------------------------

def test_dedekind_two_characters():
    cert = dedekind_shifts([[0.0], [math.pi]])
    assert cert.shifts.astype(int).tolist() == [[0], [1]]
    assert cert.sigma_min == pytest.approx(math.sqrt(2))
    assert cert.C == pytest.approx(math.sqrt(2) / 2)


def test_dedekind_rejects_nothing_on_random_vectors():
    rng = np.random.default_rng(1)
    ks = rng.uniform(-math.pi, math.pi, size=(3, 2))
    cert = dedekind_shifts(ks)
    vs = rng.normal(size=(500, 3)) + 1j * rng.normal(size=(500, 3))
    assert all(cert.check(v) for v in vs)


# -- Green's function ------------------------------------------------------------------

def test_green_residual_and_decay_ordering():
    rates = []
    for c in (1.0, 4.0, 16.0):
        g = green_function(models.laplacian(2, c), LatticePoint((0, 0), 0), 24)
        assert g.residual < 1e-10
        rates.append(g.decay_rate)
    assert rates == sorted(rates) and rates[0] > 0


def test_green_decay_close_to_axis_rate():
    # along an axis the exact rate for L + I is arccosh(3/2)
    g = green_function(models.laplacian(2, 1.0), LatticePoint((0, 0), 0), 30)
    assert 0.9 * math.acosh(1.5) < g.decay_rate < 1.15 * math.acosh(1.5)


def test_green_singular_system():
    zero = PeriodicLatticeOperator.from_tuples(1, 1, [(0, 0, (0,), 1.0)]).shifted(1.0)
    with pytest.raises(SingularSystemError):
        green_function(zero, LatticePoint((0,), 0), 5)


def test_truncated_estimate_negative_divisor():
    op = models.laplacian(2, 1.0)
    mu = RiggedPointDivisor(LatticeSpan(frozenset()), LatticeSpan.deltas([((0, 0), 0)]))
    est = truncated_L_dim_estimate(op, mu, [8, 12, 16])
    assert est.dims == [0, 0, 0] and est.stabilized == 0

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from floquet_lrr import models
from floquet_lrr.errors import ConfigError, WindowOverflowError
from floquet_lrr.floquet import (Quasimomentum, canonical_k, dft_axis, fiber_derivative, fiber_matrix,
                                 floquet_round_trip, floquet_transform, inverse_floquet,
                                 sample_transform, verify_fiber_action, verify_plancherel)
from floquet_lrr.lattice import LatticeFunction, transpose

seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 3))
def test_self_adjoint_fibers_are_hermitian(seed, d):
    rng = np.random.default_rng(seed)
    op = models.random_operator(rng, d, 2)
    sym = _symmetrized(op)
    A = fiber_matrix(sym, rng.uniform(-math.pi, math.pi, size=d))
    assert np.max(np.abs(A - A.conj().T)) < 1e-12


def _symmetrized(op):
    """op + op^* built from terms, so that the result is self-adjoint."""
    terms = [(t.from_cell, t.to_cell, t.offset, t.value) for t in op.terms]
    terms += [(t.to_cell, t.from_cell, tuple(-x for x in t.offset), np.conj(t.value)) for t in op.terms]
    return type(op).from_tuples(op.d, op.n_cells, terms)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 3))
def test_transpose_fiber_identity_and_periodicity(seed, d):
    rng = np.random.default_rng(seed)
    op = models.random_operator(rng, d, 2)
    k = rng.uniform(-math.pi, math.pi, size=d)
    assert np.max(np.abs(fiber_matrix(transpose(op), k) - fiber_matrix(op, -k).T)) < 1e-12
    shift = 2 * math.pi * rng.integers(-2, 3, size=d)
    assert np.max(np.abs(fiber_matrix(op, k + shift) - fiber_matrix(op, k))) < 1e-11


def test_fiber_derivative_against_finite_differences():
    rng = np.random.default_rng(4)
    op = models.random_operator(rng, 2, 2)
    k = rng.uniform(-1, 1, size=2)
    h = 1e-6
    for a in range(2):
        e = np.zeros(2)
        e[a] = h
        fd = (fiber_matrix(op, k + e) - fiber_matrix(op, k - e)) / (2 * h)
        beta = tuple(1 if b == a else 0 for b in range(2))
        assert np.max(np.abs(fd - fiber_derivative(op, k, beta))) < 1e-7


def test_laplacian_dispersion():
    for k in np.linspace(-3, 3, 7):
        assert fiber_matrix(models.laplacian(1), [k])[0, 0] == pytest.approx(2 - 2 * math.cos(k))


def test_round_trip_exact_inside_window_and_aliasing_flagged():
    f = LatticeFunction({((1, -2), 0): 1.5, ((0, 0), 1): -2j})
    rt = floquet_round_trip(f, 5, 2, 2)
    assert not rt.aliased and rt.max_error < 1e-12
    far = LatticeFunction({((3,), 0): 1.0})
    rt = floquet_round_trip(far, 5, 1, 1)
    assert rt.aliased and rt.max_error > 0.5


def test_inverse_rejects_points_outside_window():
    s = sample_transform(LatticeFunction.delta((0,)), 5, 1, 1)
    with pytest.raises(WindowOverflowError):
        inverse_floquet(s, 5, 1, points=[(3,)])


def test_even_grid_rejected():
    with pytest.raises(ConfigError):
        dft_axis(4)


def test_transform_of_delta():
    f = LatticeFunction.delta((2,), value=3.0)
    assert floquet_transform(f, [0.5], 1)[0] == pytest.approx(3.0 * np.exp(-1j))


def test_fiber_action_and_plancherel_random():
    rng = np.random.default_rng(8)
    for _ in range(10):
        op = models.random_operator(rng, 2, 2)
        f = LatticeFunction({(tuple(int(x) for x in rng.integers(-2, 3, size=2)), int(rng.integers(2))):
                             float(rng.normal()) for _ in range(4)})
        assert verify_fiber_action(op, f, rng.uniform(-3, 3, size=2)) < 1e-12
        lhs, rhs = verify_plancherel(f, 7, 2, 2)
        assert lhs == pytest.approx(rhs, rel=1e-12)


def test_quasimomentum_equality_is_modulo_two_pi():
    assert Quasimomentum([math.pi]) == Quasimomentum([-math.pi])
    assert canonical_k([3 * math.pi / 2])[0] == pytest.approx(-math.pi / 2)

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from floquet_lrr import models
from floquet_lrr.errors import ConfigError
from floquet_lrr.lattice import (Box, LatticeFunction, PeriodicLatticeOperator, apply, box_matrix,
                                 pairing, transpose, weight)


def _random_function(rng, d, nc, n=5, radius=3):
    return LatticeFunction({(tuple(int(x) for x in rng.integers(-radius, radius + 1, size=d)),
                             int(rng.integers(nc))): complex(*rng.normal(size=2)) for _ in range(n)})


seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 3), st.integers(1, 2))
def test_apply_is_linear(seed, d, nc):
    rng = np.random.default_rng(seed)
    op = models.random_operator(rng, d, nc)
    f, g = _random_function(rng, d, nc), _random_function(rng, d, nc)
    a = complex(*rng.normal(size=2))
    lhs = apply(op, a * f + g)
    rhs = a * apply(op, f) + apply(op, g)
    assert lhs.sup_distance(rhs) < 1e-12


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 3), st.integers(1, 2))
def test_transpose_is_involution_and_adjoint_for_pairing(seed, d, nc):
    rng = np.random.default_rng(seed)
    op = models.random_operator(rng, d, nc)
    assert transpose(transpose(op)) == op
    f, g = _random_function(rng, d, nc), _random_function(rng, d, nc)
    assert abs(pairing(apply(op, f), g) - pairing(f, apply(transpose(op), g))) < 1e-12


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 3))
def test_translation_equivariance(seed, d):
    rng = np.random.default_rng(seed)
    op = models.random_operator(rng, d, 2)
    f = _random_function(rng, d, 2)
    h = tuple(int(x) for x in rng.integers(-4, 5, size=d))
    assert apply(op, f.translated(h)).sup_distance(apply(op, f).translated(h)) < 1e-12


def test_laplacian_on_delta():
    u = apply(models.laplacian(2), LatticeFunction.delta((0, 0)))
    assert u[((0, 0), 0)] == 4
    assert all(u[(g, 0)] == -1 for g in [(1, 0), (-1, 0), (0, 1), (0, -1)])
    assert len(u) == 5


def test_json_round_trip_and_rejection():
    op = models.graphene()
    assert PeriodicLatticeOperator.from_json(op.to_json()) == op
    with pytest.raises(ConfigError):
        PeriodicLatticeOperator.from_json('{"d": 1}')
    with pytest.raises(ConfigError):
        PeriodicLatticeOperator.from_json("not json")


def test_shift_and_constant():
    op = models.laplacian(1)
    f = LatticeFunction.delta((0,))
    assert apply(op.shifted(1.5), f).sup_distance(apply(op, f) - 1.5 * f) < 1e-15
    assert apply(op.plus_constant(2.0), f).sup_distance(apply(op, f) + 2.0 * f) < 1e-15


def test_box_matrix_matches_apply_in_interior():
    rng = np.random.default_rng(3)
    op = models.random_operator(rng, 2, 2)
    box = Box(2, 2, 5)
    f = _random_function(rng, 2, 2, radius=2)
    vec = box_matrix(op, box) @ box.to_vector(f)
    assert box.to_function(vec).sup_distance(apply(op, f)) < 1e-12


def test_weight():
    assert weight((0, 0), 3) == 1.0
    assert weight((3, 4), 2) == pytest.approx(26.0)

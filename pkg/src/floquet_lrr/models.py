"""Stock operators used throughout the tests, the CLI and the README."""
from __future__ import annotations

import math

import numpy as np

from .lattice import HoppingTerm, PeriodicLatticeOperator


def _unit(d, axis, sign=1):
    e = [0] * d
    e[axis] = sign
    return tuple(e)


def laplacian(d: int, constant: float = 0.0) -> PeriodicLatticeOperator:
    """Nonnegative discrete Laplacian ``2d u(x) - sum of neighbours`` plus ``constant``."""
    terms = [HoppingTerm(0, 0, (0,) * d, 2 * d + constant)]
    for a in range(d):
        terms.append(HoppingTerm(0, 0, _unit(d, a, 1), -1.0))
        terms.append(HoppingTerm(0, 0, _unit(d, a, -1), -1.0))
    return PeriodicLatticeOperator(d, 1, tuple(terms))


def two_cell_potential(d: int, v: float = 1.0, constant: float = 0.0) -> PeriodicLatticeOperator:
    """Laplacian plus an alternating potential ``+v, -v`` along axis 1.

    The period along the first axis is doubled, so the cell holds two sites:
    cell 0 sits at even and cell 1 at odd positions of the original chain.
    """
    zero = (0,) * d
    e1 = _unit(d, 0)
    terms = [
        HoppingTerm(0, 0, zero, 2 * d + v + constant),
        HoppingTerm(1, 1, zero, 2 * d - v + constant),
        HoppingTerm(0, 1, zero, -1.0),
        HoppingTerm(0, 1, _unit(d, 0, -1), -1.0),
        HoppingTerm(1, 0, zero, -1.0),
        HoppingTerm(1, 0, e1, -1.0),
    ]
    for a in range(1, d):
        for c in (0, 1):
            terms.append(HoppingTerm(c, c, _unit(d, a, 1), -1.0))
            terms.append(HoppingTerm(c, c, _unit(d, a, -1), -1.0))
    return PeriodicLatticeOperator(d, 2, tuple(terms))


def two_cell_bottom_edge(d: int, v: float = 1.0, constant: float = 0.0) -> float:
    """Bottom of the spectrum of :func:`two_cell_potential`, attained at k=0."""
    return 2.0 - math.sqrt(v * v + 4.0) + constant


def graphene(t: float = 1.0) -> PeriodicLatticeOperator:
    """Nearest-neighbour honeycomb model with two sublattices.

    Fiber: ``[[0, h(k)], [conj h(k), 0]]`` with
    ``h(k) = -t (1 + e^{-i k1} + e^{-i k2})``; conical zeros at
    ``+-(-2pi/3, 2pi/3)``.
    """
    hops = [(0, 0), (-1, 0), (0, -1)]
    terms = []
    for g in hops:
        terms.append(HoppingTerm(0, 1, g, -t))
        terms.append(HoppingTerm(1, 0, (-g[0], -g[1]), -t))
    return PeriodicLatticeOperator(2, 2, tuple(terms))


GRAPHENE_DIRAC_POINTS = (
    np.array([-2 * math.pi / 3, 2 * math.pi / 3]),
    np.array([2 * math.pi / 3, -2 * math.pi / 3]),
)


def drift_laplacian(b: float) -> PeriodicLatticeOperator:
    """1-D operator ``2u(x) - u(x+1) - u(x-1) + b (u(x+1) - u(x))``."""
    return PeriodicLatticeOperator.from_tuples(
        1, 1, [(0, 0, (0,), 2.0 - b), (0, 0, (1,), -1.0 + b), (0, 0, (-1,), -1.0)]
    )


def drift_principal_curve(xi: float, b: float) -> float:
    """Closed form of the principal eigenvalue of :func:`drift_laplacian`."""
    return 2.0 - 2.0 * math.cosh(xi) + b * (math.exp(-xi) - 1.0)


def drift_maximizer(b: float) -> float:
    """Solves ``d/dxi`` of the curve ``= 0``: ``e^{2 xi} = 1 - b`` (needs b < 1)."""
    return 0.5 * math.log(1.0 - b)


def random_operator(rng: np.random.Generator, d: int, n_cells: int, radius: int = 1,
                    n_terms: int = 6, complex_values: bool = True) -> PeriodicLatticeOperator:
    terms = []
    for _ in range(n_terms):
        i, j = rng.integers(n_cells, size=2)
        g = tuple(int(x) for x in rng.integers(-radius, radius + 1, size=d))
        val = rng.normal() + (1j * rng.normal() if complex_values else 0.0)
        terms.append(HoppingTerm(int(i), int(j), g, val))
    return PeriodicLatticeOperator(d, n_cells, tuple(terms), float(rng.normal()))


SHIPPED_MODELS = {
    "laplacian1d": lambda: laplacian(1),
    "laplacian2d": lambda: laplacian(2),
    "laplacian3d": lambda: laplacian(3),
    "two_cell1d": lambda: two_cell_potential(1),
    "two_cell2d": lambda: two_cell_potential(2),
    "graphene": graphene,
}

import numpy as np
import pytest

from floquet_lrr import models, spectral
from floquet_lrr import liouville as lv
from floquet_lrr.divisors import LatticeContext, LatticeSpan, RiggedPointDivisor, trivial_divisor
from floquet_lrr.errors import SpectralMarginError
from floquet_lrr.liouville import INF, GrowthSpec

# Values below were produced by the brute-force Floquet-polynomial kernel
# oracle and frozen here; the formula must reproduce them.
FROZEN_VINF = {
    "laplacian-1": [1, 2, 2, 2],
    "laplacian-2": [1, 3, 5, 7],
    "laplacian-3": [1, 4, 9, 16],
    "two-cell-1": [1, 2, 2],
    "two-cell-2": [1, 3, 5],
    "graphene": [4, 8, 12],
}


def _case(name):
    if name.startswith("laplacian"):
        d = int(name[-1])
        return models.laplacian(d), 0.0
    if name.startswith("two-cell"):
        d = int(name[-1])
        return models.two_cell_potential(d), models.two_cell_bottom_edge(d)
    return models.graphene(), 0.0


@pytest.mark.parametrize("name", sorted(FROZEN_VINF))
def test_dim_vinf_matches_frozen_oracle(name):
    op, level = _case(name)
    pts = spectral.fermi_points(op, level)
    assert [lv.dim_Vinf(pts, N, op.d).value for N in range(len(FROZEN_VINF[name]))] == FROZEN_VINF[name]


def test_harmonic_and_homogeneous_dims():
    assert [lv.harmonic_dim(3, N) for N in range(5)] == [1, 4, 9, 16, 25]
    assert [lv.harmonic_dim(2, N) for N in range(4)] == [1, 3, 5, 7]
    assert [lv.homogeneous_dim(3, N) for N in range(4)] == [1, 3, 6, 10]


def test_strict_floor():
    assert [lv.strict_floor(x) for x in (2.0, 2.5, 0.0, -0.5)] == [1, 2, -1, -1]


def test_monotonicity_in_N_and_p():
    pts = spectral.fermi_points(models.laplacian(3))
    ps = [1, 1.5, 2, 4, 8, INF]
    Ns = np.arange(0, 5.01, 0.5)
    table = [[lv.dim_Vp(pts, GrowthSpec(p, float(N)), 3).value for N in Ns] for p in ps]
    for row in table:
        assert row == sorted(row)
    for col in zip(*table):
        assert list(col) == sorted(col)


def test_empty_fermi_list_gives_zero():
    assert lv.dim_Vinf([], 3, 2).value == 0


def test_growth_label():
    assert GrowthSpec(INF, 2).label() == "p=inf,N=2"


def _lattice_ctx(op):
    return LatticeContext(op)


def test_lrr_bounds_baseline_d3():
    op = models.laplacian(3)
    pts = spectral.fermi_points(op)
    a1 = spectral.integrability_audit(op, pts, 1)
    a2 = spectral.integrability_audit(op, pts, 2)
    mu = RiggedPointDivisor(LatticeSpan.deltas([((0, 0, 0), 0)]), LatticeSpan(frozenset()))
    rep = lv.lrr_bounds(_lattice_ctx(op), mu, GrowthSpec(INF, 0), pts, 3, a1, a2)
    assert rep.status == "ok" and rep.extra["regime"] == "baseline"
    assert rep.lower_bound == rep.upper_bound == 2
    assert rep.equality_claims and rep.existence


def test_lrr_bounds_improved_regime_d5():
    op = models.laplacian(5)
    pts = spectral.fermi_points(op)
    a1 = spectral.integrability_audit(op, pts, 1)
    a2 = spectral.integrability_audit(op, pts, 2)
    rep = lv.lrr_bounds(_lattice_ctx(op), trivial_divisor("lattice"), GrowthSpec(2, 0), pts, 5, a1, a2)
    assert rep.status == "ok" and rep.extra["regime"] == "improved"
    assert any("L_2" in c["claim"] for c in rep.equality_claims)


def test_lrr_bounds_inapplicable_d3_square_integrability():
    op = models.laplacian(3)
    pts = spectral.fermi_points(op)
    a2 = spectral.integrability_audit(op, pts, 2)
    rep = lv.lrr_bounds(_lattice_ctx(op), trivial_divisor("lattice"), GrowthSpec(2, 0), pts, 3, None, a2)
    assert not rep.applicable
    assert rep.failed_hypotheses == ["inverse-square-integrability"]
    assert rep.lower_bound is None and rep.equality_claims == []


def test_empty_fermi_bounds():
    op = models.laplacian(2, 1.0)
    ctx = _lattice_ctx(op)
    plus = RiggedPointDivisor(LatticeSpan.deltas([((0, 0), 0), ((3, 0), 0)]), LatticeSpan(frozenset()))
    rep = lv.empty_fermi_bounds(ctx, plus, 1.0)
    assert rep.extra["dim_L"] == 2
    minus = RiggedPointDivisor(LatticeSpan(frozenset()), LatticeSpan.deltas([((0, 0), 0)]))
    assert lv.empty_fermi_bounds(ctx, minus, 1.0).extra["dim_L"] == 0
    mixed = RiggedPointDivisor(LatticeSpan.deltas([((0, 0), 0)]), LatticeSpan.deltas([((5, 5), 0)]))
    assert lv.empty_fermi_bounds(ctx, mixed, 1.0).extra["dual_term"] == "unknown"
    with pytest.raises(SpectralMarginError):
        lv.empty_fermi_bounds(ctx, plus, 1e-8)

"""Truncated-box solvers for operators with 0 outside the spectrum."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg as spla

from ..divisors import LatticeSpan, RiggedPointDivisor, numeric_rank, secondary_dim_lattice
from ..errors import SingularSystemError
from ..lattice import Box, LatticeFunction, LatticePoint, PeriodicLatticeOperator, box_matrix, interior_mask


def _factor(op: PeriodicLatticeOperator, box: Box):
    mat = box_matrix(op, box).tocsc()
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        try:
            lu = spla.splu(mat)
        except (RuntimeError, spla.MatrixRankWarning) as exc:
            raise SingularSystemError(f"truncated system on radius {box.radius} is singular") from exc
    diag = np.abs(lu.U.diagonal())
    if diag.min() <= 1e-13 * diag.max():
        raise SingularSystemError(f"truncated system on radius {box.radius} is numerically singular")
    return mat, lu


@dataclass
class GreenResult:
    radius: int
    values: LatticeFunction
    decay_rate: float
    r_squared: float
    n_fit: int
    residual: float

    def to_dict(self):
        return {"radius": self.radius, "decay_rate": self.decay_rate, "r_squared": self.r_squared,
                "n_fit_points": self.n_fit, "residual": self.residual}


def green_function(op: PeriodicLatticeOperator, source: LatticePoint, radius: int) -> GreenResult:
    """Solve ``A u = delta_source`` on ``[-R, R]^d x Cell`` with zero exterior; fit the decay."""
    source = LatticePoint(tuple(source[0]), int(source[1]))
    box = Box(op.d, op.n_cells, radius)
    mat, lu = _factor(op, box)
    rhs = box.to_vector(LatticeFunction.delta(source.g, source.c))
    u = lu.solve(rhs)
    mask = interior_mask(op, box)
    res = mat @ u - rhs
    residual = float(np.max(np.abs(res[mask])) / max(np.max(np.abs(u)), 1e-300))

    per_site = np.sqrt(np.sum(np.abs(u.reshape(-1, op.n_cells)) ** 2, axis=1))
    coords = box.deck_coords()[:: op.n_cells] - np.asarray(source.g)
    dist = np.linalg.norm(coords, axis=1)
    peak = per_site[np.argmin(dist)]
    alive = per_site >= 1e-12 * peak
    sel = alive & (dist >= radius / 2) & (dist <= radius - 2)
    if sel.sum() < 8:
        sel = alive & (dist >= 1) & (dist <= radius - 2)
    x, y = dist[sel], np.log(per_site[sel])
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum((y - pred) ** 2)) / ss_tot if ss_tot > 0 else 0.0
    return GreenResult(radius, box.to_function(u), float(-slope), r2, int(sel.sum()), residual)


@dataclass
class TruncatedEstimate:
    radii: list
    dims: list
    stabilized: int | None

    @property
    def status(self) -> str:
        return "stable" if self.stabilized is not None else "unstable"

    def to_dict(self):
        return {"radii": self.radii, "dims": self.dims,
                "stabilized": self.stabilized if self.stabilized is not None else "unstable"}


def _span_columns(span: LatticeSpan, box: Box):
    return np.array([box.to_vector(f) for f in span.basis]).T.reshape(box.size, -1)


def truncated_L_dim_estimate(op: PeriodicLatticeOperator, mu: RiggedPointDivisor, radii) -> TruncatedEstimate:
    """Dimension of ``{u : A u in L+, (u, L-) = 0}`` on growing Dirichlet boxes.

    Functions supported on the positive support that solve the system are
    quotiented out, since they vanish away from it.
    """
    ell_plus = mu.plus.dim
    tilde_plus = secondary_dim_lattice(op, mu.plus) if ell_plus else 0
    dims = []
    for R in radii:
        box = Box(op.d, op.n_cells, R)
        if ell_plus == 0:
            _factor(op, box)
            dims.append(0)
            continue
        _, lu = _factor(op, box)
        X = lu.solve(_span_columns(mu.plus, box).astype(complex))
        X = X.reshape(box.size, -1)
        if mu.minus.basis:
            S = _span_columns(mu.minus, box).T @ X
            rank = numeric_rank(S)
        else:
            rank = 0
        dims.append(int(ell_plus - rank - tilde_plus))
    stabilized = None
    for i in range(len(dims) - 2):
        if dims[i] == dims[i + 1] == dims[i + 2]:
            stabilized = dims[i + 2]
    return TruncatedEstimate(list(radii), dims, stabilized)

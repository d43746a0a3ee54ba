"""Dimension formulas for polynomially growing solutions and bound assembly.

This module only evaluates the formula side.  Actual solution-space
dimensions come from :mod:`floquet_lrr.oracles`, and the two are never
mixed inside a report.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .divisors import DegreeReport, binom0, degree, inverse_divisor, positive_part
from .errors import ConfigError, SpectralMarginError

INF = math.inf
MARGIN_MIN = 1e-6


def harmonic_dim(d: int, N: int) -> int:
    """Dimension of harmonic polynomials of degree <= N in d variables."""
    if d < 1:
        raise ConfigError("d must be >= 1")
    if N < 0:
        return 0
    return binom0(d + N, d) - binom0(d + N - 2, d)


def homogeneous_dim(d: int, N: int) -> int:
    """Dimension of homogeneous polynomials of degree N in d variables."""
    if N < 0:
        return 0
    return binom0(d + N - 1, N)


def strict_floor(r: float) -> int:
    """Largest integer strictly less than ``r``."""
    f = math.floor(r)
    return int(f - 1 if f == r else f)


@dataclass(frozen=True)
class GrowthSpec:
    p: float
    N: float

    def __post_init__(self):
        if not self.p >= 1:
            raise ConfigError("growth exponent p must be >= 1")

    @property
    def p_conjugate(self) -> float:
        if self.p == INF:
            return 1.0
        if self.p == 1:
            return INF
        return self.p / (self.p - 1)

    def dual(self) -> "GrowthSpec":
        return GrowthSpec(self.p_conjugate, -self.N)

    def label(self) -> str:
        return f"p={'inf' if self.p == INF else format(self.p, 'g')},N={self.N:g}"


@dataclass(frozen=True)
class DimResult:
    value: int | None
    status: str  # valid | valid-all-N | outside-guarantee | inapplicable | trivial

    def to_dict(self):
        return {"value": self.value, "status": self.status}


def dim_Vinf(fermi, N: int, d: int | None = None) -> DimResult:
    """Sum over Fermi points of ``m [C(d+N, d) - C(d+N-l0, d)]``."""
    if not fermi:
        return DimResult(0, "valid-all-N")
    if N < 0:
        return DimResult(0, "valid-all-N")
    if any(p.ell0 is None for p in fermi):
        return DimResult(None, "inapplicable")
    d = d if d is not None else len(fermi[0].k)
    value = sum(p.m * (binom0(d + N, d) - binom0(d + N - p.ell0, d)) for p in fermi)
    if all(p.det_leading_nonzero for p in fermi):
        status = "valid-all-N"
    elif N < min(p.ell0 for p in fermi):
        status = "valid"
    else:
        status = "outside-guarantee"
    return DimResult(int(value), status)


def effective_degree(growth: GrowthSpec, d: int) -> int | None:
    """Highest polynomial degree compatible with the growth class, or None."""
    p, N = growth.p, growth.N
    if p == INF:
        return math.floor(N) if N >= 0 else None
    if p * N <= d:
        return None
    n_eff = strict_floor(N - d / p)
    return n_eff if n_eff >= 0 else None


def dim_Vp(fermi, growth: GrowthSpec, d: int) -> DimResult:
    """Reduce ``(p, N)`` growth to the sup-norm case and evaluate the formula."""
    n_eff = effective_degree(growth, d)
    if n_eff is None:
        return DimResult(0, "trivial")
    return dim_Vinf(fermi, n_eff, d)


def crude_bound(fermi, N: int, d: int, kernel_dims=None) -> int:
    kernel_dims = kernel_dims if kernel_dims is not None else [p.kernel_dim for p in fermi]
    return binom0(d + N, N) * int(sum(kernel_dims))


# -- reports ----------------------------------------------------------------------

@dataclass
class LRRReport:
    growth: GrowthSpec | None
    dim_VpN: object
    deg: DegreeReport
    deg_positive: DegreeReport | None
    lower_bound: int | None
    upper_bound: int | None
    equality_claims: list
    existence: bool
    audit: list
    status: str  # ok | inapplicable | unverified-hypothesis
    failed_hypotheses: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def applicable(self) -> bool:
        return self.status != "inapplicable"

    def to_dict(self) -> dict:
        out = {
            "status": self.status,
            "growth": None if self.growth is None else
            {"p": "inf" if self.growth.p == INF else self.growth.p, "N": self.growth.N},
            "dim_VpN": self.dim_VpN.to_dict() if isinstance(self.dim_VpN, DimResult) else self.dim_VpN,
            "degree": self.deg.to_dict(),
            "degree_positive_part": None if self.deg_positive is None else self.deg_positive.to_dict(),
            "lower_bound": self.lower_bound,
            "upper_bound": self.upper_bound,
            "equality_claims": list(self.equality_claims),
            "existence": self.existence,
            "audit": list(self.audit),
            "failed_hypotheses": list(self.failed_hypotheses),
        }
        out.update(self.extra)
        return out


def _all_integrable(reports) -> bool | None:
    if reports is None:
        return None
    return all(r.verdict == "integrable" for r in reports)


def lrr_bounds(ctx, mu, growth: GrowthSpec, fermi, d: int, audit_q1=None, audit_q2=None) -> LRRReport:
    """Assemble the lower/upper bounds on ``dim L_p(mu, A, N)`` with a hypothesis gate.

    ``audit_q1`` and ``audit_q2`` are the integrability reports for the first
    and second power of the inverse reduced matrix.  With an empty Fermi list
    both hypotheses hold vacuously.
    """
    p, N = growth.p, growth.N
    deg = degree(ctx, mu)
    deg_plus = degree(ctx, positive_part(mu))
    dimv = dim_Vp(fermi, growth, d)
    audit = []

    base_growth = (p == INF and N >= 0) or (p != INF and p * N > d)
    imp_growth = (p >= 2 and N >= 0) or (1 <= p < 2 and 2 * p * N > (2 - p) * d)
    integ1 = True if not fermi else _all_integrable(audit_q1)
    integ2 = True if not fermi else _all_integrable(audit_q2)
    audit.append({"hypothesis": "finite-fermi-surface", "outcome": "pass"})
    audit.append({"hypothesis": "growth-regime-baseline", "outcome": "pass" if base_growth else "fail"})
    audit.append({"hypothesis": "growth-regime-improved", "outcome": "pass" if imp_growth else "fail"})
    for name, val, reps in (("inverse-integrability", integ1, audit_q1),
                            ("inverse-square-integrability", integ2, audit_q2)):
        entry = {"hypothesis": name, "outcome": "unchecked" if val is None else ("pass" if val else "fail")}
        if reps:
            entry["verdicts"] = [r.verdict for r in reps]
        audit.append(entry)
    audit.append({"hypothesis": "taylor-order-guarantee", "outcome": dimv.status})

    baseline = base_growth and bool(integ1)
    improved = imp_growth and bool(integ2)
    if not (baseline or improved) or dimv.value is None:
        failed = []
        if dimv.value is None:
            failed.append("taylor-order-determined")
        if not base_growth and not imp_growth:
            failed.append("growth-regime")
        if base_growth and not integ1:
            failed.append("inverse-integrability")
        if imp_growth and not integ2:
            failed.append("inverse-square-integrability")
        if not failed:
            failed.append("inverse-integrability" if not integ1 else "inverse-square-integrability")
        return LRRReport(growth, dimv, deg, deg_plus, None, None, [], False, audit,
                         "inapplicable", failed)

    lower = dimv.value + deg.degree
    upper = dimv.value + deg_plus.degree
    claims = []
    if mu.is_positive():
        claims.append({"claim": "dim L_p(mu,A,N) = dim V + deg(mu)", "value": lower})
    if improved and p == 2 and N == 0:
        claims.append({"claim": "dim L_2(mu+,A,0) = deg(mu+)", "value": deg_plus.degree})
    status = "unverified-hypothesis" if dimv.status == "outside-guarantee" else "ok"
    regime = "improved" if improved and not baseline else "baseline"
    return LRRReport(growth, dimv, deg, deg_plus, lower, upper, claims, lower > 0, audit, status,
                     extra={"regime": regime})


def empty_fermi_bounds(ctx, mu, margin: float, dual_dim: int | None = None) -> LRRReport:
    """Bookkeeping when 0 is outside the spectrum.

    ``dim L = deg(mu) + dim L_inf(mu^{-1}, A^T)``; the second term is exact
    when ``mu^{-1}`` is positive (it equals ``-deg(mu)``), zero-free when
    ``mu`` is positive, and otherwise taken from ``dual_dim`` or left unknown.
    """
    if not margin >= MARGIN_MIN:
        raise SpectralMarginError(f"invertibility margin {margin:g} below {MARGIN_MIN:g}")
    deg = degree(ctx, mu)
    deg_plus = degree(ctx, positive_part(mu))
    audit = [{"hypothesis": "invertibility-margin", "outcome": "pass", "margin": margin}]
    if mu.is_positive():
        dual = 0
        dual_source = "positive-divisor"
    elif mu.plus.is_empty():
        dual = degree(ctx.transposed(), inverse_divisor(mu)).degree
        dual_source = "inverse-is-positive"
    elif dual_dim is not None:
        dual, dual_source = int(dual_dim), "oracle"
    else:
        dual, dual_source = None, "unknown"
    dim = None if dual is None else deg.degree + dual
    claims = [{"claim": "all growth classes give the same space", "value": True}]
    if dim is not None:
        claims.append({"claim": "dim L(mu,A) = deg(mu) + dim L(mu^-1,A^T)", "value": dim})
    return LRRReport(None, 0, deg, deg_plus, deg.degree, dim if dim is not None else None, claims,
                     deg.degree > 0, audit, "ok",
                     extra={"dim_L": dim, "dual_term": dual if dual is not None else "unknown",
                            "dual_term_source": dual_source})

"""Band structure, Fermi points, Riesz projectors and spectral-edge data.

Everything here works on fiber matrices A(k) (see :mod:`floquet`).  The main
entry point is :func:`fermi_points`, which scans the Brillouin zone for
zeros of A(k), refines them, and annotates each point with its
multiplicity, Taylor order and (for simple quadratic edges) Hessian.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.sparse.csgraph import connected_components

from .errors import (BasisDegenerationError, ConfigError, EigenvalueOnContourError,
                     FermiSurfaceNotFiniteError, PerronError)
from .floquet import (TWO_PI, band_grid, canonical_k, fiber_gradient, fiber_matrices,
                      fiber_matrix, k_distance, lipschitz_bound, sweep)
from .lattice import PeriodicLatticeOperator

ROOT_TOL = 1e-9
MULTIPLICITY_TOL = 1e-8
DEDUP_TOL = 1e-9
MAX_FERMI_POINTS = 64
ANNULUS_DELTA = 0.1
TAYLOR_RADII = (1e-2, 5e-3, 2.5e-3)
LAYER_REL_TOL = 1e-6
LAYER_ABS_FLOOR = 1e-12
DET_TOL = 1e-8
DEFAULT_SEED = 20240611


def default_grid(d: int) -> int:
    return 33 if d <= 3 else 9


def sigma_min(op: PeriodicLatticeOperator, k) -> float:
    return float(np.linalg.svd(fiber_matrix(op, np.asarray(k, dtype=float)), compute_uv=False)[-1])


def sigma_min_batch(op: PeriodicLatticeOperator, ks: np.ndarray) -> np.ndarray:
    def chunk(part):
        return np.linalg.svd(fiber_matrices(op, part), compute_uv=False)[:, -1]
    return sweep(chunk, np.asarray(ks, dtype=float))


# -- bands ----------------------------------------------------------------

@dataclass
class BandStructure:
    op: PeriodicLatticeOperator
    M: int
    ks: np.ndarray
    values: np.ndarray  # (n_k, n_c), real sorted or complex
    hermitian: bool

    def to_csv(self) -> str:
        d = self.ks.shape[1]
        head = [f"k_{a + 1}" for a in range(d)] + [f"lambda_{j + 1}" for j in range(self.values.shape[1])]
        lines = [",".join(head)]
        for k, row in zip(self.ks, self.values):
            if self.hermitian:
                cells = [format(float(x), ".17g") for x in row]
            else:
                cells = [f"{complex(x).real:.17g}{complex(x).imag:+.17g}j" for x in row]
            lines.append(",".join([format(float(x), ".17g") for x in k] + cells))
        return "\n".join(lines) + "\n"


def band_structure(op: PeriodicLatticeOperator, M: int = 33, sorted_real: bool | None = None) -> BandStructure:
    """Eigenvalues of A(k) on the closed grid ``linspace(-pi, pi, M)^d``."""
    if sorted_real is None:
        sorted_real = op.is_self_adjoint
    if sorted_real and not op.is_self_adjoint:
        raise ConfigError("sorted real bands requested for a non-self-adjoint operator")
    ks = band_grid(M, op.d)

    def chunk(part):
        mats = fiber_matrices(op, part)
        if sorted_real:
            return np.linalg.eigvalsh(mats)
        return np.linalg.eigvals(mats)

    values = sweep(chunk, ks)
    return BandStructure(op, M, ks, values, bool(sorted_real))


def _band_value(op, j, k):
    return float(np.linalg.eigvalsh(fiber_matrix(op, np.asarray(k)))[j])


def spectrum_intervals(bands: BandStructure, tol: float = 1e-9):
    """Closed intervals covered by the bands, after local refinement of extremes.

    Returns ``(intervals, gaps)``; overlapping bands are merged.
    """
    if not bands.hermitian:
        raise ConfigError("spectrum intervals need a self-adjoint operator")
    op, h = bands.op, TWO_PI / max(bands.M - 1, 1)
    per_band = []
    for j in range(bands.values.shape[1]):
        col = bands.values[:, j]
        lo, hi = float(col.min()), float(col.max())
        for sign, idx in ((1.0, int(np.argmin(col))), (-1.0, int(np.argmax(col)))):
            k0 = bands.ks[idx]
            simplex = np.vstack([k0] + [k0 + 0.5 * h * e for e in np.eye(op.d)])
            res = minimize(lambda k: sign * _band_value(op, j, k), k0, method="Nelder-Mead",
                           options={"initial_simplex": simplex, "xatol": tol, "fatol": tol * 1e-3,
                                    "maxiter": 4000})
            val = sign * float(res.fun)
            lo, hi = (min(lo, val), hi) if sign > 0 else (lo, max(hi, val))
        per_band.append([lo, hi])
    per_band.sort()
    merged = []
    for lo, hi in per_band:
        if merged and lo <= merged[-1][1] + tol:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    intervals = [tuple(x) for x in merged]
    gaps = [(intervals[i][1], intervals[i + 1][0]) for i in range(len(intervals) - 1)]
    return intervals, gaps


def invertibility_margin(op: PeriodicLatticeOperator, M: int | None = None) -> float:
    """Refined ``min_k sigma_min(A(k))``; for self-adjoint ops the distance from 0 to the spectrum."""
    M = M or default_grid(op.d)
    ks = band_grid(M, op.d)
    vals = sigma_min_batch(op, ks)
    best = float(vals.min())
    h = TWO_PI / (M - 1)
    for idx in np.argsort(vals)[:3]:
        k0 = ks[idx]
        simplex = np.vstack([k0] + [k0 + 0.5 * h * e for e in np.eye(op.d)])
        res = minimize(lambda k: sigma_min(op, k), k0, method="Nelder-Mead",
                       options={"initial_simplex": simplex, "xatol": 1e-12, "fatol": 1e-14})
        best = min(best, float(res.fun))
    return best


# -- Riesz projector --------------------------------------------------------

@dataclass(frozen=True)
class ContourSpec:
    center: complex
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ConfigError("contour radius must be positive")


def _check_annulus(evs, contour: ContourSpec, delta=ANNULUS_DELTA):
    dist = np.abs(np.asarray(evs) - contour.center)
    bad = (dist >= contour.radius * (1 - delta)) & (dist <= contour.radius * (1 + delta))
    if np.any(bad):
        raise EigenvalueOnContourError(
            f"eigenvalue within {delta:.0%} of the contour |z-{contour.center}|={contour.radius:g}")
    return dist < contour.radius


def _quadrature_projector(A, contour: ContourSpec, nodes=256):
    n = A.shape[0]
    theta = TWO_PI * (np.arange(nodes) + 0.5) / nodes
    out = np.zeros((n, n), dtype=complex)
    eye = np.eye(n)
    for t in theta:
        dz = contour.radius * np.exp(1j * t)
        out += dz * np.linalg.inv((contour.center + dz) * eye - A)
    return out / nodes


def projector_from_matrix(A: np.ndarray, contour: ContourSpec) -> tuple[np.ndarray, str]:
    evs, V = np.linalg.eig(A)
    inside = _check_annulus(evs, contour)
    if not inside.any():
        return np.zeros_like(A, dtype=complex), "eigendecomposition"
    if inside.all():
        return np.eye(A.shape[0], dtype=complex), "eigendecomposition"
    if np.linalg.cond(V) > 1e8:
        return _quadrature_projector(A, contour), "contour-quadrature"
    Vinv = np.linalg.inv(V)
    return V[:, inside] @ Vinv[inside, :], "eigendecomposition"


def riesz_projector(op: PeriodicLatticeOperator, k, contour: ContourSpec) -> np.ndarray:
    """Spectral projector of A(k) for the eigenvalues inside ``contour``.

    Falls back to trapezoidal quadrature of ``(1/2 pi i) oint (z - A)^{-1} dz``
    when the eigenvector matrix is ill conditioned.
    """
    return projector_from_matrix(fiber_matrix(op, k), contour)[0]


def auto_contour(op: PeriodicLatticeOperator, k) -> tuple[ContourSpec, int, float]:
    """Circle around 0 enclosing the near-zero cluster of A(k).

    Returns ``(contour, cluster size, validity radius in k)``.
    """
    A = fiber_matrix(op, k)
    evs = np.linalg.eigvals(A)
    mags = np.abs(evs)
    cluster = mags <= MULTIPLICITY_TOL
    m = int(cluster.sum())
    outside = mags[~cluster]
    L = max(lipschitz_bound(op), 1e-300)
    if outside.size == 0:
        # every eigenvalue stays inside while |dk| L stays below the free margin 1
        return ContourSpec(0j, 1.0 + float(np.linalg.norm(A, 2))), m, min(math.pi, 0.4 / L)
    s = float(outside.min())
    return ContourSpec(0j, s / 2), m, min(math.pi, 0.4 * s / L)


class ReducedMatrix:
    """The m x m matrix of A(k) Pi(k) on the basis Pi(k) e_j near a Fermi point."""

    def __init__(self, op: PeriodicLatticeOperator, k_r, contour: ContourSpec):
        self.op = op
        self.k_r = np.asarray(k_r, dtype=float)
        self.contour = contour
        P0, _ = projector_from_matrix(fiber_matrix(op, self.k_r), contour)
        evs = np.linalg.eigvals(fiber_matrix(op, self.k_r))
        self.m = int((np.abs(evs - contour.center) < contour.radius).sum())
        U, _, _ = np.linalg.svd(P0)
        self.basis = U[:, : self.m]

    def batch(self, ks) -> np.ndarray:
        ks = np.asarray(ks, dtype=float).reshape(-1, self.op.d)
        mats = fiber_matrices(self.op, ks)
        out = np.empty((len(ks), self.m, self.m), dtype=complex)
        for idx, A in enumerate(mats):
            P, _ = projector_from_matrix(A, self.contour)
            F = P @ self.basis
            gram = F.conj().T @ F
            if abs(np.linalg.det(gram)) < 1e-8:
                raise BasisDegenerationError("projected basis degenerate; shrink the neighbourhood")
            out[idx] = np.linalg.solve(gram, F.conj().T @ (A @ F))
        return out

    def __call__(self, k) -> np.ndarray:
        return self.batch(np.asarray(k, dtype=float)[None, :])[0]


def reduced_matrix(op, point: "FermiPoint", k) -> np.ndarray:
    return ReducedMatrix(op, point.k, point.contour)(k)


# -- Taylor layers ----------------------------------------------------------

def monomials(d: int, max_order: int):
    out = []
    for t in range(max_order + 1):
        for combo in itertools.combinations_with_replacement(range(d), t):
            beta = [0] * d
            for a in combo:
                beta[a] += 1
            out.append(tuple(beta))
    return out


def _ball_samples(rng, d, n):
    dirs = rng.normal(size=(n, d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = rng.uniform(size=n) ** (1.0 / d)
    return np.vstack([np.zeros((1, d)), dirs * radii[:, None]])


def unit_directions(rng, d, n):
    dirs = rng.normal(size=(n, d))
    return dirs / np.linalg.norm(dirs, axis=1, keepdims=True)


def eval_layer(layer: dict, thetas: np.ndarray) -> np.ndarray:
    """Evaluate a homogeneous matrix polynomial ``{beta: matrix}`` at each row of ``thetas``."""
    out = 0
    for beta, mat in layer.items():
        out = out + np.prod(thetas ** np.asarray(beta), axis=1)[:, None, None] * mat[None]
    return out


@dataclass
class TaylorResult:
    ell0: int | None
    leading: dict
    det_leading_nonzero: bool
    layer_norms: list
    richardson_consistent: bool
    coefficients: dict = field(repr=False, default_factory=dict)

    @property
    def determined(self) -> bool:
        return self.ell0 is not None


def _fit_layers(func, d, m, max_order, rho, rng):
    mons = monomials(d, max_order)
    s = _ball_samples(rng, d, max(3 * len(mons), 40))
    vals = np.asarray(func(rho * s)).reshape(len(s), m * m)
    V = np.stack([np.prod(s ** np.asarray(b), axis=1) for b in mons], axis=1)
    coef, *_ = np.linalg.lstsq(V, vals, rcond=None)
    return {b: coef[i].reshape(m, m) / rho ** sum(b) for i, b in enumerate(mons)}


def _layers(coeffs, max_order):
    norms = []
    for t in range(max_order + 1):
        norms.append(math.sqrt(sum(np.sum(np.abs(c) ** 2) for b, c in coeffs.items() if sum(b) == t)))
    return norms


def _order_from_norms(norms):
    scale = max(norms[1:], default=0.0)
    if scale < LAYER_ABS_FLOOR:
        return None
    for t in range(1, len(norms)):
        if norms[t] > LAYER_REL_TOL * scale:
            return t
    return None


def taylor_order(func, d: int, m: int, max_order: int = 4, radii=TAYLOR_RADII,
                 seed: int = DEFAULT_SEED) -> TaylorResult:
    """Order of the first non-vanishing homogeneous layer of ``func`` at 0.

    ``func`` maps an ``(n, d)`` array of offsets to an ``(n, m, m)`` stack.
    Layers are fitted by least squares on balls of each radius in ``radii``;
    the first radius is used for the reported data and the others serve as a
    Richardson-style consistency check.
    """
    fits = [_fit_layers(func, d, m, max_order, rho, np.random.default_rng(seed)) for rho in radii]
    orders = [_order_from_norms(_layers(f, max_order)) for f in fits]
    main = fits[0]
    norms = _layers(main, max_order)
    ell0 = orders[0]
    if ell0 is None:
        return TaylorResult(None, {}, False, norms, len(set(orders)) == 1, main)
    leading = {b: c for b, c in main.items() if sum(b) == ell0}
    consistent = len(set(orders)) == 1
    if consistent:
        for other in fits[1:]:
            diff = math.sqrt(sum(np.sum(np.abs(other[b] - leading[b]) ** 2) for b in leading))
            if diff > 1e-3 * max(norms[ell0], 1e-300):
                consistent = False
    thetas = unit_directions(np.random.default_rng(seed + 1), d, 50)
    dets = np.abs(np.linalg.det(eval_layer(leading, thetas)))
    det_nonzero = bool(np.max(dets) > DET_TOL * norms[ell0] ** m)
    return TaylorResult(ell0, leading, det_nonzero, norms, consistent, main)


def hessian_from_layer(leading: dict, d: int) -> np.ndarray:
    """Symmetric matrix H with ``layer(k) = k^T H k / 2`` for a scalar quadratic layer."""
    H = np.zeros((d, d))
    for beta, c in leading.items():
        val = float(np.real(np.asarray(c).reshape(-1)[0]))
        idx = [a for a in range(d) for _ in range(beta[a])]
        a, b = idx
        if a == b:
            H[a, a] = 2.0 * val
        else:
            H[a, b] = H[b, a] = val
    return H


# -- Fermi points -----------------------------------------------------------

@dataclass
class FermiPoint:
    k: np.ndarray
    m: int
    ell0: int | None
    leading_taylor: dict
    hessian: np.ndarray | None
    det_leading_nonzero: bool
    sigma_min: float
    contour: ContourSpec
    validity_radius: float
    kernel_dim: int
    richardson_consistent: bool = True

    @property
    def simple(self) -> bool:
        return self.m == 1

    @property
    def is_dirac(self) -> bool:
        return self.m == 2 and self.ell0 == 1 and self.det_leading_nonzero

    def to_dict(self) -> dict:
        out = {
            "k": [float(x) for x in self.k],
            "m": int(self.m),
            "ell0": int(self.ell0) if self.ell0 is not None else "undetermined",
            "det_leading_nonzero": bool(self.det_leading_nonzero),
        }
        if self.hessian is not None:
            out["hessian"] = [[float(x) for x in row] for row in self.hessian]
        return out


def _grid_candidates(op, M):
    d = op.d
    axis = -math.pi + TWO_PI * np.arange(M - 1) / (M - 1)
    ks = np.array(list(itertools.product(axis, repeat=d)), dtype=float).reshape(-1, d)
    sig = sigma_min_batch(op, ks).reshape((M - 1,) * d)
    h = TWO_PI / (M - 1)
    threshold = lipschitz_bound(op) * h * math.sqrt(d) / 2 + 1e-12
    is_min = np.ones_like(sig, dtype=bool)
    for shift in itertools.product((-1, 0, 1), repeat=d):
        if any(shift):
            is_min &= sig <= np.roll(sig, shift, axis=tuple(range(d)))
    mask = is_min & (sig <= threshold)
    flat = sig.reshape(-1)
    idx = list(np.nonzero(mask.reshape(-1))[0])
    if not idx and flat.min() <= threshold:
        idx = [int(np.argmin(flat))]
    idx.sort(key=lambda i: (flat[i], i))
    return ks[idx], h, float(flat.min()), threshold


def _cluster(A, scale):
    evs, V = np.linalg.eig(A)
    inside = np.abs(evs) < scale
    return evs, V, inside


def _gauss_newton(op, k, iters=30):
    best_k, best_s = k.copy(), sigma_min(op, k)
    for _ in range(iters):
        A = fiber_matrix(op, k)
        evs, V, inside = _cluster(A, 1e-4 * (1 + np.linalg.norm(A, 2)))
        if not inside.any():
            break
        Vinv = np.linalg.inv(V)
        Q, W = V[:, inside], Vinv[inside, :]
        R = (W @ A @ Q).reshape(-1)
        J = np.stack([(W @ dA @ Q).reshape(-1) for dA in fiber_gradient(op, k)], axis=1)
        Jr = np.vstack([J.real, J.imag])
        rr = -np.concatenate([R.real, R.imag])
        step, *_ = np.linalg.lstsq(Jr, rr, rcond=None)
        k = k + step
        s = sigma_min(op, k)
        if s < best_s:
            best_k, best_s = k.copy(), s
        if np.linalg.norm(step) < 1e-15:
            break
    return best_k, best_s


def _branch_gradient(op, k):
    A = fiber_matrix(op, k)
    evs, V = np.linalg.eig(A)
    i = int(np.argmin(np.abs(evs)))
    Vinv = np.linalg.inv(V)
    v, w = V[:, i], Vinv[i, :]
    return np.array([(w @ dA @ v).real for dA in fiber_gradient(op, k)])


def _newton_critical(op, k, iters=20, step=1e-5):
    """Newton iteration on the gradient of the branch nearest 0 (quadratic edges)."""
    d = op.d
    best_k, best_g = k.copy(), np.linalg.norm(_branch_gradient(op, k))
    for _ in range(iters):
        g = _branch_gradient(op, k)
        H = np.empty((d, d))
        for a in range(d):
            e = np.zeros(d)
            e[a] = step
            H[:, a] = (_branch_gradient(op, k + e) - _branch_gradient(op, k - e)) / (2 * step)
        H = 0.5 * (H + H.T)
        try:
            delta = np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            break
        k = k - delta
        gn = np.linalg.norm(_branch_gradient(op, k))
        if gn < best_g:
            best_k, best_g = k.copy(), gn
        if np.linalg.norm(delta) < 1e-15:
            break
    return best_k, sigma_min(op, best_k)


def refine_root(op, k0, h):
    """Nelder-Mead on sigma_min followed by Newton / Gauss-Newton polishing.

    A polished point replaces the current one unless it is worse by more
    than the round-off floor of sigma_min.
    """
    d = op.d
    simplex = np.vstack([k0] + [k0 + 0.5 * h * e for e in np.eye(d)])
    res = minimize(lambda k: sigma_min(op, k), k0, method="Nelder-Mead",
                   options={"initial_simplex": simplex, "xatol": 1e-13, "fatol": 1e-16,
                            "maxiter": 4000 * d, "maxfev": 8000 * d})
    k, s = np.asarray(res.x, dtype=float), float(res.fun)
    floor = 1e-14 * (1.0 + np.linalg.norm(fiber_matrix(op, k), 2))
    for polish in (_gauss_newton, _newton_critical):
        try:
            k2, s2 = polish(op, k.copy())
        except (np.linalg.LinAlgError, ValueError):
            continue
        if np.all(np.isfinite(k2)) and s2 <= max(s, floor):
            k, s = k2, s2
    return canonical_k(k), s


def _isolated(op, k, radius=1e-2, seed=DEFAULT_SEED) -> bool:
    d = op.d
    rng = np.random.default_rng(seed)
    dirs = np.vstack([np.eye(d), -np.eye(d), unit_directions(rng, d, 16 * d * d)])
    vals = sigma_min_batch(op, k + radius * dirs)
    if vals.min() < ROOT_TOL:
        return False
    if d == 1:
        return True

    def on_sphere(v):
        n = np.linalg.norm(v)
        return sigma_min(op, k + radius * v / n) if n > 0 else 1e300

    for idx in np.argsort(vals)[:3]:
        res = minimize(on_sphere, dirs[idx], method="Nelder-Mead",
                       options={"xatol": 1e-13, "fatol": 1e-16, "maxiter": 3000})
        if res.fun < ROOT_TOL:
            return False
    return True


def annotate_point(op, k, s, max_order=4, seed=DEFAULT_SEED) -> FermiPoint:
    A = fiber_matrix(op, k)
    contour, m, validity = auto_contour(op, k)
    m = max(m, 1)
    sv = np.linalg.svd(A, compute_uv=False)
    kernel_dim = int((sv <= MULTIPLICITY_TOL).sum()) or 1
    red = ReducedMatrix(op, k, contour)
    rho0 = min(TAYLOR_RADII[0], 0.5 * validity)
    radii = tuple(rho0 * r / TAYLOR_RADII[0] for r in TAYLOR_RADII)
    tay = taylor_order(lambda kap: red.batch(k + kap), op.d, red.m, max_order, radii, seed)
    hessian = None
    if red.m == 1 and tay.ell0 == 2:
        hessian = hessian_from_layer(tay.leading, op.d)
    return FermiPoint(np.asarray(k), red.m, tay.ell0, tay.leading, hessian, tay.det_leading_nonzero,
                      s, contour, validity, kernel_dim, tay.richardson_consistent)


def fermi_points(op: PeriodicLatticeOperator, level: float = 0.0, M: int | None = None,
                 max_points: int = MAX_FERMI_POINTS, max_order: int = 4) -> list[FermiPoint]:
    """Real quasimomenta where ``A - level`` has a kernel, annotated with edge data.

    Raises :class:`FermiSurfaceNotFiniteError` when zeros are not isolated or
    more than ``max_points`` distinct ones are found.
    """
    work = op.shifted(level) if level else op
    M = M or default_grid(op.d)
    if M < 3:
        raise ConfigError("Fermi scan needs at least 3 grid points per axis")
    cands, h, _, _ = _grid_candidates(work, M)
    roots: list[tuple[np.ndarray, float]] = []
    for k0 in cands:
        if any(k_distance(k0, r) <= h / 4 for r, _ in roots):
            continue
        k, s = refine_root(work, k0, h)
        if s > ROOT_TOL:
            continue
        if any(k_distance(k, r) <= DEDUP_TOL for r, _ in roots):
            continue
        roots.append((k, s))
        if len(roots) > max_points:
            raise FermiSurfaceNotFiniteError(f"more than {max_points} distinct zeros of A(k)")
    for k, _ in roots:
        if not _isolated(work, k):
            raise FermiSurfaceNotFiniteError(f"zero of A(k) at {np.round(k, 6)} is not isolated")
    roots.sort(key=lambda r: tuple(np.round(r[0], 9)))
    return [annotate_point(work, k, s, max_order) for k, s in roots]


# -- integrability ----------------------------------------------------------

@dataclass
class IntegrabilityReport:
    k: np.ndarray
    q: int
    radii: list
    estimates: list
    ratios: list
    numeric_verdict: str
    analytic_verdict: str | None

    @property
    def verdict(self) -> str:
        return self.analytic_verdict or self.numeric_verdict

    @property
    def converged(self) -> bool:
        return self.verdict == "integrable"

    def to_dict(self) -> dict:
        return {"k": [float(x) for x in self.k], "q": self.q, "radii": self.radii,
                "estimates": self.estimates, "ratios": self.ratios,
                "numeric_verdict": self.numeric_verdict,
                "analytic_verdict": self.analytic_verdict, "verdict": self.verdict}


def _leading_definite(point: FermiPoint, d: int) -> bool:
    if point.m != 1 or point.ell0 is None:
        return False
    if point.hessian is not None:
        ev = np.linalg.eigvalsh(point.hessian)
        return bool(ev.min() > 0 or ev.max() < 0)
    vals = eval_layer(point.leading_taylor, unit_directions(np.random.default_rng(7), d, 200))[:, 0, 0]
    re = vals.real
    return bool((re > 0).all() or (re < 0).all()) and np.min(np.abs(vals)) > 1e-8 * np.max(np.abs(vals))


def _sphere_area(d):
    return 2 * math.pi ** (d / 2) / math.gamma(d / 2)


def integrability_audit(op: PeriodicLatticeOperator, points, q: int, level: float = 0.0,
                        levels: int = 10, n_dirs: int = 256, seed: int = DEFAULT_SEED):
    """Dyadic-annulus estimates of ``int ||lambda(k)^{-1}||^q dk`` near each Fermi point."""
    if q not in (1, 2):
        raise ConfigError("integrability exponent must be 1 or 2")
    work = op.shifted(level) if level else op
    d = op.d
    nodes, weights = np.polynomial.legendre.leggauss(8)
    dirs = unit_directions(np.random.default_rng(seed), d, n_dirs)
    reports = []
    for p in points:
        if p.ell0 is None:
            raise ConfigError("integrability audit needs a determined Taylor order")
        red = ReducedMatrix(work, p.k, p.contour)
        rho0 = min(0.1, p.validity_radius)
        radii = [rho0 * 2.0 ** (-j) for j in range(levels + 1)]
        estimates = []
        for j in range(levels):
            outer, inner = radii[j], radii[j + 1]
            rs = 0.5 * (outer - inner) * nodes + 0.5 * (outer + inner)
            ws = 0.5 * (outer - inner) * weights
            pts = (rs[:, None, None] * dirs[None, :, :]).reshape(-1, d)
            lam = red.batch(p.k + pts)
            smin = np.linalg.svd(lam, compute_uv=False)[:, -1].reshape(len(rs), n_dirs)
            integrand = (1.0 / np.maximum(smin, 1e-300)) ** q
            radial = integrand.mean(axis=1) * rs ** (d - 1)
            estimates.append(float(np.sum(ws * radial) * _sphere_area(d)))
        ratios = [estimates[j + 1] / estimates[j] for j in range(levels - 1)]
        tail = float(np.median(ratios[-4:]))
        if tail < 0.9:
            numeric = "integrable"
        elif tail >= 0.97:
            numeric = "not-integrable"
        else:
            numeric = "inconclusive"
        analytic = None
        if _leading_definite(p, d):
            analytic = "integrable" if q * p.ell0 < d else "not-integrable"
        reports.append(IntegrabilityReport(np.asarray(p.k), q, radii, estimates, ratios, numeric, analytic))
    return reports


# -- principal eigenvalue -----------------------------------------------------

def _imag_fiber(op, xi):
    return fiber_matrix(op, 1j * np.asarray(xi, dtype=float)).real


def check_perron_class(op: PeriodicLatticeOperator, xi=None):
    if not op.is_real:
        raise PerronError("principal eigenvalue needs real coefficients")
    B = _imag_fiber(op, np.zeros(op.d) if xi is None else xi)
    off = B - np.diag(np.diag(B))
    if np.any(off > 1e-14):
        raise PerronError("off-diagonal entries of A(i xi) must be nonpositive")
    n_comp, _ = connected_components(np.abs(off) > 0, directed=True, connection="strong")
    if op.n_cells > 1 and n_comp != 1:
        raise PerronError("A(i xi) is reducible")


def principal_eigenvalue(op: PeriodicLatticeOperator, xi):
    """``(Lambda(xi), v)``: the real eigenvalue of A(i xi) with positive eigenvector.

    ``A(i xi)`` has entries ``sum a e^{-xi.g}``; ``v`` is scaled to max 1.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    check_perron_class(op, xi)
    B = _imag_fiber(op, xi)
    evs, V = np.linalg.eig(B)
    i = int(np.argmin(evs.real))
    lam = evs[i]
    if abs(lam.imag) > 1e-10 * (1 + abs(lam)):
        raise PerronError("Perron eigenvalue is not real")
    v = V[:, i].real if np.max(np.abs(V[:, i].imag)) < 1e-12 * np.max(np.abs(V[:, i])) else V[:, i]
    v = np.real_if_close(v * (np.conj(v[np.argmax(np.abs(v))]) / abs(v[np.argmax(np.abs(v))])))
    v = np.real(v) / np.max(np.real(v))
    if v.min() <= 1e-10:
        raise PerronError("principal eigenvector is not positive")
    return float(lam.real), v


def principal_gradient(op, xi):
    xi = np.asarray(xi, dtype=float)
    B = _imag_fiber(op, xi)
    evs, V = np.linalg.eig(B)
    i = int(np.argmin(evs.real))
    Vinv = np.linalg.inv(V)
    v, w = V[:, i], Vinv[i, :]
    # d/dxi_a of sum a e^{-xi.g} is sum a (-g_a) e^{-xi.g} = d/dk_a A(k) at k = i xi, times i
    grads = fiber_gradient(op, 1j * xi)
    return np.array([(w @ (1j * dA) @ v).real for dA in grads])


@dataclass
class PrincipalEigenvalueCurve:
    xis: np.ndarray
    values: np.ndarray
    xi0: np.ndarray
    Lambda: float
    gradient_norm: float
    concavity_tests: int
    concavity_violations: int
    worst_concavity_slack: float

    def to_dict(self):
        return {"xi0": [float(x) for x in self.xi0], "Lambda": self.Lambda,
                "gradient_norm": self.gradient_norm, "concavity_tests": self.concavity_tests,
                "concavity_violations": self.concavity_violations,
                "worst_concavity_slack": self.worst_concavity_slack}


def maximize_principal(op: PeriodicLatticeOperator, M: int = 9, span: float = 2.0,
                       n_concavity: int = 100, seed: int = DEFAULT_SEED) -> PrincipalEigenvalueCurve:
    """Grid search of Lambda(xi) on ``[-span, span]^d`` then damped Newton ascent."""
    d = op.d
    axis = np.linspace(-span, span, M)
    xis = np.array(list(itertools.product(axis, repeat=d)), dtype=float).reshape(-1, d)
    values = np.array([principal_eigenvalue(op, x)[0] for x in xis])
    xi = xis[int(np.argmax(values))].copy()
    val = principal_eigenvalue(op, xi)[0]
    h = 1e-5
    for _ in range(100):
        g = principal_gradient(op, xi)
        if np.linalg.norm(g) < 1e-8:
            break
        H = np.empty((d, d))
        for a in range(d):
            e = np.zeros(d)
            e[a] = h
            H[:, a] = (principal_gradient(op, xi + e) - principal_gradient(op, xi - e)) / (2 * h)
        H = 0.5 * (H + H.T)
        if np.all(np.linalg.eigvalsh(H) < 0):
            step = -np.linalg.solve(H, g)
        else:
            step = g
        t = 1.0
        while t > 1e-12:
            cand = xi + t * step
            cv = principal_eigenvalue(op, cand)[0]
            if cv >= val - 1e-15:
                xi, val = cand, cv
                break
            t /= 2
        else:
            break
    gnorm = float(np.linalg.norm(principal_gradient(op, xi)))
    rng = np.random.default_rng(seed)
    worst, violations = math.inf, 0
    for _ in range(n_concavity):
        a, b = rng.uniform(-span, span, size=(2, d))
        slack = (principal_eigenvalue(op, (a + b) / 2)[0]
                 - 0.5 * (principal_eigenvalue(op, a)[0] + principal_eigenvalue(op, b)[0]))
        worst = min(worst, slack)
        if slack < -1e-10:
            violations += 1
    return PrincipalEigenvalueCurve(xis, values, xi, float(val), gnorm, n_concavity, violations, float(worst))

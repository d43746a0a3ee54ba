"""Lattice shifts that make a family of distinct characters visibly independent."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, SearchExhaustedError
from ..floquet import k_distance

MIN_SIGMA = 1e-8
MAX_RADIUS = 20


@dataclass
class DedekindCertificate:
    ks: np.ndarray
    shifts: np.ndarray  # (l, d)
    sigma_min: float
    C: float

    @property
    def matrix(self) -> np.ndarray:
        """``W[s, r] = exp(i k_r . g_s)``."""
        return np.exp(1j * self.shifts @ self.ks.T)

    def check(self, v) -> bool:
        v = np.asarray(v)
        return bool(np.max(np.abs(self.matrix @ v)) >= self.C * np.max(np.abs(v)) * (1 - 1e-12))

    def to_dict(self):
        return {"shifts": self.shifts.astype(int).tolist(), "sigma_min": self.sigma_min, "C": self.C}


def _candidates(d, radius):
    pts = list(itertools.product(range(-radius, radius + 1), repeat=d))
    # shortest first, then lexicographically largest so +e_i precedes -e_i
    pts.sort(key=lambda g: (sum(abs(x) for x in g), tuple(-x for x in g)))
    return np.array(pts, dtype=float)


def dedekind_shifts(ks, tol: float = 1e-9) -> DedekindCertificate:
    """Greedy search for shifts ``g_1 = 0, g_2, ...`` maximizing ``sigma_min(W)``.

    ``C = sigma_min(W) / l`` certifies ``max_s |sum_r v_r e^{i k_r.g_s}| >= C max_r |v_r|``.
    """
    ks = np.atleast_2d(np.asarray(ks, dtype=float))
    ell, d = ks.shape
    for a, b in itertools.combinations(range(ell), 2):
        if k_distance(ks[a], ks[b]) <= tol:
            raise ConfigError("characters must be distinct modulo 2 pi")
    for radius in range(1, MAX_RADIUS + 1):
        cands = _candidates(d, radius)
        chosen = [np.zeros(d)]
        for _ in range(1, ell):
            best, best_s = None, -1.0
            for g in cands:
                if any(np.array_equal(g, c) for c in chosen):
                    continue
                E = np.exp(1j * ks @ np.vstack(chosen + [g]).T)
                s = np.linalg.svd(E, compute_uv=False)[-1]
                if s > best_s + 1e-14:
                    best, best_s = g, s
            if best is None:
                break
            chosen.append(best)
        if len(chosen) < ell:
            continue
        shifts = np.vstack(chosen)
        sig = float(np.linalg.svd(np.exp(1j * shifts @ ks.T), compute_uv=False)[-1])
        if sig >= MIN_SIGMA:
            return DedekindCertificate(ks, shifts, sig, sig / ell)
    raise SearchExhaustedError("no certifying shifts within the search radius")

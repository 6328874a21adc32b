"""Objects indexed by the central parameter lambda.

S(lambda)_ij = lambda([X_i, Y_j]), X(lambda)_ij = lambda([X_i, X_j]) for i < j,
B(lambda) = [[I, 0], [-X, -S]], the skew matrix M(lambda), jump indices, the
regions E, K, Q, I, Plancherel density and packing certificates.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .algebra import LieAlgebraSpec, exact_rank

RANK_TOL = 1e-9


def _structure_arrays(spec: LieAlgebraSpec) -> tuple[np.ndarray, np.ndarray]:
    """Float arrays xy[i, j, k] and xx[i, j, k] of the structure constants."""
    xy = np.array([[[float(t) for t in spec.xy[i][j]] for j in range(spec.d)]
                   for i in range(spec.d)], dtype=float).reshape(spec.d, spec.d, spec.c)
    xx = np.array([[[float(t) for t in spec.xx[i][j]] for j in range(spec.d)]
                   for i in range(spec.d)], dtype=float).reshape(spec.d, spec.d, spec.c)
    return xy, xx


def _check_lam(spec, lam):
    if len(lam) != spec.c:
        raise ValueError(f"lambda must have length {spec.c}, got {len(lam)}")


def s_matrix(spec: LieAlgebraSpec, lam: Sequence, exact: bool = False):
    """S(lambda). With ``exact`` the result is a nested list of ``Fraction``."""
    _check_lam(spec, lam)
    if exact:
        lam = [Fraction(x) for x in lam]
        return [[sum((t * x for t, x in zip(spec.xy[i][j], lam)), Fraction(0))
                 for j in range(spec.d)] for i in range(spec.d)]
    xy, _ = _structure_arrays(spec)
    return xy @ np.asarray(lam, dtype=float)


def x_matrix(spec: LieAlgebraSpec, lam: Sequence, exact: bool = False):
    """Strictly upper triangular X(lambda)."""
    _check_lam(spec, lam)
    if exact:
        lam = [Fraction(x) for x in lam]
        return [[sum((t * x for t, x in zip(spec.xx[i][j], lam)), Fraction(0)) if i < j
                 else Fraction(0) for j in range(spec.d)] for i in range(spec.d)]
    _, xx = _structure_arrays(spec)
    return np.triu(xx @ np.asarray(lam, dtype=float), k=1)


def b_matrix(spec: LieAlgebraSpec, lam: Sequence, exact: bool = False):
    """B(lambda) = [[I, 0], [-X(lambda), -S(lambda)]]."""
    d = spec.d
    if exact:
        s, x = s_matrix(spec, lam, exact=True), x_matrix(spec, lam, exact=True)
        top = [[Fraction(int(i == j)) for j in range(d)] + [Fraction(0)] * d for i in range(d)]
        bottom = [[-x[i][j] for j in range(d)] + [-s[i][j] for j in range(d)] for i in range(d)]
        return top + bottom
    s, x = s_matrix(spec, lam), x_matrix(spec, lam)
    return np.block([[np.eye(d), np.zeros((d, d))], [-x, -s]])


@dataclass(frozen=True)
class SpectralPoint:
    lam: np.ndarray
    S: np.ndarray
    X: np.ndarray
    B: np.ndarray
    det_s: float

    @property
    def abs_det(self) -> float:
        return abs(self.det_s)


def build_spectral_point(spec: LieAlgebraSpec, lam: Sequence) -> SpectralPoint:
    lam = np.asarray(lam, dtype=float)
    S, X = s_matrix(spec, lam), x_matrix(spec, lam)
    B = np.block([[np.eye(spec.d), np.zeros((spec.d, spec.d))], [-X, -S]])
    det = float(np.linalg.det(S)) if spec.d > 0 else 1.0
    for arr in (lam, S, X, B):
        arr.setflags(write=False)
    return SpectralPoint(lam=lam, S=S, X=X, B=B, det_s=det)


# ---------------------------------------------------------------- M(lambda)

def m_matrix(spec: LieAlgebraSpec, lam: Sequence, exact: bool = False):
    """Skew matrix M_ij = lambda([B_i, B_j]) and its nullity.

    Float path: rank from singular values above ``RANK_TOL`` times the largest.
    Exact path: Fraction entries and elimination rank.
    """
    _check_lam(spec, lam)
    n = spec.n
    if exact:
        lamf = [Fraction(x) for x in lam]
        mat = [[Fraction(0)] * n for _ in range(n)]
        for (a, b), val in spec.brackets.items():
            w = sum((t * x for t, x in zip(val, lamf)), Fraction(0))
            mat[a][b], mat[b][a] = w, -w
        return mat, n - exact_rank(mat)
    lam = np.asarray(lam, dtype=float)
    mat = np.zeros((n, n))
    for (a, b), val in spec.brackets.items():
        w = float(np.dot([float(t) for t in val], lam))
        mat[a, b], mat[b, a] = w, -w
    return mat, n - _numeric_rank(mat)


def _numeric_rank(mat: np.ndarray) -> int:
    if mat.size == 0:
        return 0
    sv = np.linalg.svd(mat, compute_uv=False)
    if sv[0] == 0.0:
        return 0
    return int(np.sum(sv > RANK_TOL * sv[0]))


def _null_basis(mat: np.ndarray) -> np.ndarray:
    n = mat.shape[0]
    if not mat.any():
        return np.eye(n)
    _, sv, vt = np.linalg.svd(mat)
    rank = int(np.sum(sv > RANK_TOL * sv[0]))
    return vt[rank:].T


def jump_indices(spec: LieAlgebraSpec, lam: Sequence) -> tuple[int, ...]:
    """e(lambda) = {k : n_k not inside n_{k-1} + n(lambda)}, 1-based."""
    mat, _ = m_matrix(spec, lam)
    null = _null_basis(mat)
    n = spec.n
    jumps = []
    prev = _numeric_rank(null.T) if null.size else 0
    for k in range(1, n + 1):
        stacked = np.hstack([np.eye(n)[:, :k], null]) if null.size else np.eye(n)[:, :k]
        rank = _numeric_rank(stacked)
        if rank > prev:
            jumps.append(k)
        prev = rank
    return tuple(jumps)


# ---------------------------------------------------------------- regions

@dataclass(frozen=True)
class RegionFlags:
    in_E: bool
    in_K: bool
    in_Q: bool
    in_I: bool
    det_value: float
    norm_value: float


def transpose_row_sum_norm(S: np.ndarray) -> float:
    """Max absolute row sum of S^T, i.e. the induced max-norm of S^T."""
    return float(np.max(np.sum(np.abs(S.T), axis=1))) if S.size else 0.0


def region_flags(spec: LieAlgebraSpec, lam: Sequence) -> RegionFlags:
    pt = build_spectral_point(spec, lam)
    det = pt.det_s
    norm = transpose_row_sum_norm(pt.S)
    in_k = bool(np.all(np.abs(pt.lam) <= 0.5))
    in_e = bool(det != 0.0 and abs(det) <= 1.0)
    in_q = bool(norm < 1.0)
    return RegionFlags(in_E=in_e, in_K=in_k, in_Q=in_q, in_I=in_e and in_k and in_q,
                       det_value=det, norm_value=norm)


def plancherel_density(spec: LieAlgebraSpec, lam: Sequence) -> float:
    return build_spectral_point(spec, lam).abs_det


def lambda_grid(spec: LieAlgebraSpec, q: int) -> np.ndarray:
    """Cell midpoints of the uniform q^c grid on K = [-1/2, 1/2]^c, C order."""
    axis = -0.5 + (np.arange(q) + 0.5) / q
    mesh = np.meshgrid(*([axis] * spec.c), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def region_table(spec: LieAlgebraSpec, q: int) -> dict[str, np.ndarray]:
    """Vectorized region flags over the midpoint grid of K."""
    lams = lambda_grid(spec, q)
    xy, _ = _structure_arrays(spec)
    S = np.einsum("ijk,nk->nij", xy, lams)
    det = np.linalg.det(S)
    norm = np.max(np.sum(np.abs(S), axis=1), axis=1)  # rows of S^T are columns of S
    in_k = np.all(np.abs(lams) <= 0.5, axis=1)
    in_e = (det != 0.0) & (np.abs(det) <= 1.0)
    in_q = norm < 1.0
    return {"lam": lams, "det": det, "norm": norm, "in_E": in_e, "in_K": in_k,
            "in_Q": in_q, "in_I": in_e & in_k & in_q}


def measure_of_I(spec: LieAlgebraSpec, q: int) -> dict[str, float]:
    """Midpoint-rule estimates of the Lebesgue and Plancherel measures of I."""
    if q < 2:
        raise ValueError("q must be at least 2")
    table = region_table(spec, q)
    vol = float(q) ** (-spec.c)
    mask = table["in_I"]
    # np.sum on a fixed contiguous array uses pairwise summation: order is fixed
    m_i = float(np.sum(mask.astype(float)) * vol)
    mu_i = float(np.sum(np.where(mask, np.abs(table["det"]), 0.0)) * vol)
    return {"lebesgue_m": m_i, "mu": mu_i, "q": q}


# ---------------------------------------------------------------- packing

@dataclass(frozen=True)
class PackingCertificate:
    passed: bool
    witness: tuple | None
    lattice_points_checked: int
    trials: int


def packing_certificate(spec: LieAlgebraSpec, lam: Sequence, trials: int = 1000,
                        seed: int = 0) -> PackingCertificate:
    """Evidence that [-1/2,1/2)^d is a packing set for S(lambda)^{-T} Z^d.

    Two cube points collide modulo the lattice iff some nonzero lattice
    point lies in the difference set (-1, 1)^d. Those candidates are
    enumerated exhaustively; random pairs additionally confirm the bound
    ||S^T (s1 - s2)||_max < 1 used in the argument.
    """
    pt = build_spectral_point(spec, lam)
    if not transpose_row_sum_norm(pt.S) < 1.0:
        raise ValueError("lambda is not in Q: the packing argument does not apply")
    if pt.det_s == 0.0:
        raise ValueError("S(lambda) is singular")
    d = spec.d
    st = pt.S.T
    st_inv_t = np.linalg.inv(st)
    # kappa = S^{-T} j in (-1,1)^d forces |j|_inf = |S^T kappa|_inf < ||S^T||
    bound = int(np.ceil(transpose_row_sum_norm(pt.S)))
    checked = 0
    for j in itertools.product(range(-bound, bound + 1), repeat=d):
        if not any(j):
            continue
        checked += 1
        kappa = st_inv_t @ np.asarray(j, dtype=float)
        if np.all(np.abs(kappa) < 1.0):
            s1 = np.clip(kappa, 0.0, None) - 0.5 + 1e-12
            return PackingCertificate(False, (tuple(s1), tuple(s1 - kappa), j), checked, 0)
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        s1, s2 = rng.uniform(-0.5, 0.5, size=(2, d))
        j = st @ (s1 - s2)
        if np.max(np.abs(j)) >= 1.0:
            return PackingCertificate(False, (tuple(s1), tuple(s2), tuple(j)), checked, trials)
    return PackingCertificate(True, None, checked, trials)

"""Frame operators, frame-bound estimation and Gabor-window certification.

The window phi(lambda) = |det S|^{1/2} U chi is supported in the unit cube, so
every member M_{-Sl-Xk} T_k phi of the lattice system lives on one cell k + Q
and the frame operator is block diagonal over cells. Two routes build the
blocks:

* ``"lattice"`` evaluates the operator of the full modulation lattice by
  Poisson summation over l (the Walnut representation)

      S f(x) = |det S|^{-1} sum_k sum_p g_k(x) conj(g_k(x - p)) f(x - p),

  with p over S^{-T} Z^d inside (-1, 1)^d and g_k = M_{-Xk} T_k phi. Grid
  functions are piecewise constant on cells of width h; the cell averages
  use ``subsamples`` midpoints per axis.
* ``"direct"`` sums an explicit truncated family, keeping the modulations
  whose frequency lies in the Nyquist box [-q/2, q/2)^d. It is exact only
  when the discrete frequencies tile that box, e.g. when q S^{-1} is integral.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .algebra import GroupElement, LieAlgebraSpec
from .representation import (Grid, GridFunction, chirp_U, gabor_indices, gabor_member,
                             pi_action, pi_phase_batch, window_phi)
from .spectra import build_spectral_point, region_flags, transpose_row_sum_norm

TAU_PARSEVAL_DEFAULT = 2e-2
TAU_PARSEVAL_FINE = 5e-3
FRAME_LOWER_MIN = 1e-2


@dataclass(frozen=True)
class FrameReport:
    A: float
    B: float
    family_size: int | None
    grid: tuple
    verdict: str
    converged: bool
    iterations: int
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"A": self.A, "B": self.B, "family_size": self.family_size,
                "grid": list(self.grid), "verdict": self.verdict,
                "converged": self.converged, "iterations": self.iterations, **self.details}


def verdict_for(A: float, B: float, tau: float) -> str:
    if max(abs(A - 1.0), abs(B - 1.0)) <= tau:
        return "parseval"
    if A >= FRAME_LOWER_MIN:
        return "frame"
    return "not_frame_evidence"


def parseval_tolerance(grid: Grid) -> float:
    return TAU_PARSEVAL_FINE if grid.q >= 32 else TAU_PARSEVAL_DEFAULT


# ---------------------------------------------------------------- explicit families

def _members(family) -> list[GridFunction]:
    members = list(family.values()) if isinstance(family, Mapping) else list(family)
    if not members:
        raise ValueError("family is empty")
    grid = members[0].grid
    for f in members:
        if f.grid != grid:
            raise ValueError("family members live on different grids")
    return members


def analysis_coefficients(family, v: GridFunction) -> np.ndarray:
    members = _members(family)
    if v.grid != members[0].grid:
        raise ValueError("grid mismatch")
    return np.array([v.inner(f) for f in members])


def analysis_energy(family, v: GridFunction) -> float:
    """sum_n |<v, f_n>|^2."""
    return float(np.sum(np.abs(analysis_coefficients(family, v)) ** 2))


def frame_operator_apply(family, v: GridFunction) -> GridFunction:
    """S v = sum_n <v, f_n> f_n."""
    members = _members(family)
    coef = analysis_coefficients(members, v)
    stack = np.stack([f.values for f in members])
    return GridFunction(v.grid, np.tensordot(coef, stack, axes=1))


class CoreOperator:
    """Hermitian operator on grid values inside a core mask.

    Vectors are the grid values at the core points, so the Riemann weight is
    already absorbed and eigenvalues are frame bounds.
    """

    def __init__(self, grid: Grid, mask: np.ndarray, matvec: Callable[[np.ndarray], np.ndarray],
                 family_size: int | None = None, dense: Callable[[], np.ndarray] | None = None):
        self.grid = grid
        self.mask = mask
        self.size = int(mask.sum())
        self._matvec = matvec
        self.family_size = family_size
        self._dense = dense

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self._matvec(x)

    def to_dense(self) -> np.ndarray:
        if self._dense is not None:
            return self._dense()
        eye = np.eye(self.size, dtype=complex)
        return np.stack([self.matvec(col) for col in eye.T], axis=1)

    def embed(self, x: np.ndarray) -> GridFunction:
        vals = np.zeros(self.grid.shape, dtype=complex)
        vals[self.mask] = x
        return GridFunction(self.grid, vals)

    def quadratic_form(self, v: GridFunction) -> float:
        """<S v, v> for v supported in the core."""
        x = v.values[self.mask]
        return float(np.real(np.vdot(x, self.matvec(x)))) * self.grid.cell_volume


def family_operator(family, mask: np.ndarray | None = None) -> CoreOperator:
    """Frame operator of an explicit family, compressed to the core."""
    members = _members(family)
    grid = members[0].grid
    if mask is None:
        mask = grid.core_mask()
    F = np.stack([f.values[mask] for f in members])  # members x core
    h = grid.cell_volume

    def matvec(x):
        return h * (F.T @ (F.conj() @ x))

    return CoreOperator(grid, mask, matvec, family_size=len(members),
                        dense=lambda: h * (F.T @ F.conj()))


class CellBlockOperator(CoreOperator):
    """Block-diagonal operator with one dense block per unit cell."""

    def __init__(self, grid: Grid, mask: np.ndarray, blocks: list[tuple[np.ndarray, np.ndarray]],
                 family_size: int | None = None):
        self.blocks = blocks
        flat_index = -np.ones(grid.size, dtype=int)
        flat_index[mask.ravel()] = np.arange(int(mask.sum()))
        self._local = [(flat_index[idx], M) for idx, M in blocks]

        def matvec(x):
            y = np.zeros_like(x, dtype=complex)
            for loc, M in self._local:
                y[loc] += M @ x[loc]
            return y

        def dense():
            out = np.zeros((self.size, self.size), dtype=complex)
            for loc, M in self._local:
                out[np.ix_(loc, loc)] += M
            return out

        super().__init__(grid, mask, matvec, family_size=family_size, dense=dense)

    def block_eigenvalues(self) -> np.ndarray:
        return np.concatenate([np.linalg.eigvalsh(M) for _, M in self.blocks])


# ---------------------------------------------------------------- bounds

def frame_bounds(operator, iterations: int = 2000, seed: int = 0, tol: float = 1e-12,
                 mask: np.ndarray | None = None, tau: float | None = None) -> FrameReport:
    """Extremal eigenvalues of the core-compressed frame operator.

    B comes from power iteration, A from power iteration on (B + delta) I - S.
    Non-convergence within ``iterations`` is reported in the result.
    """
    if not isinstance(operator, CoreOperator):
        operator = family_operator(operator, mask)
    rng = np.random.default_rng(seed)
    n = operator.size
    start = rng.normal(size=n) + 1j * rng.normal(size=n)

    B, ok_b, it_b = _power(operator.matvec, start, iterations, tol)
    delta = 0.05 * max(B, 1e-12) + 1e-12
    shifted = lambda x: (B + delta) * x - operator.matvec(x)
    top, ok_a, it_a = _power(shifted, start, iterations, tol)
    A = max(B + delta - top, 0.0)
    A = min(A, B)
    grid = operator.grid
    tau = parseval_tolerance(grid) if tau is None else tau
    return FrameReport(A=float(A), B=float(B), family_size=operator.family_size,
                       grid=(grid.d, grid.T, grid.q), verdict=verdict_for(A, B, tau),
                       converged=ok_a and ok_b, iterations=it_a + it_b)


def _power(apply, start, iterations, tol):
    x = start / np.linalg.norm(start)
    rho = 0.0
    for it in range(1, iterations + 1):
        y = apply(x)
        rho_new = float(np.real(np.vdot(x, y)))
        ny = np.linalg.norm(y)
        if ny == 0.0:
            return 0.0, True, it
        x = y / ny
        if it > 1 and abs(rho_new - rho) <= tol * max(abs(rho_new), 1.0):
            return rho_new, True, it
        rho = rho_new
    return rho, False, iterations


# ---------------------------------------------------------------- lattice operators

def dual_offsets(S: np.ndarray) -> np.ndarray:
    """Points p of S^{-T} Z^d with |p|_inf < 1, zero first."""
    d = S.shape[0]
    st = S.T
    inv = np.linalg.inv(st)
    bound = int(np.floor(transpose_row_sum_norm(S) + 1e-12))
    pts = [np.zeros(d)]
    for j in itertools.product(range(-bound, bound + 1), repeat=d):
        if not any(j):
            continue
        p = inv @ np.asarray(j, dtype=float)
        if np.all(np.abs(p) < 1.0 - 1e-12):
            pts.append(p)
    return np.array(pts)


def _cell_points(grid: Grid, k: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Flat indices of grid points in cell k + [-1/2,1/2)^d that lie in mask."""
    ax = grid.axis()
    sel = []
    for kk in k:
        sel.append(np.nonzero((ax >= kk - 0.5) & (ax < kk + 0.5))[0])
    mesh = np.meshgrid(*sel, indexing="ij")
    flat = np.ravel_multi_index(tuple(m.ravel() for m in mesh), grid.shape)
    return flat[mask.ravel()[flat]]


def _core_cells(grid: Grid, radius: int | None) -> list[np.ndarray]:
    """Cells meeting the core box [-T/4, T/4)^d, optionally limited to |k| <= radius."""
    reach = int(np.floor(grid.T / 4 + 0.5))
    if radius is not None:
        reach = min(reach, radius)
    rng = range(-reach, reach + 1)
    return [np.array(k, dtype=float) for k in itertools.product(rng, repeat=grid.d)]


def lattice_operator(spec: LieAlgebraSpec, lam: Sequence, grid: Grid, subsamples: int = 4,
                     k_radius: int | None = None, mask: np.ndarray | None = None
                     ) -> CellBlockOperator:
    """Frame operator of G(phi(lambda), B(lambda) Z^2d) over all modulations."""
    pt = build_spectral_point(spec, lam)
    if pt.det_s == 0.0:
        raise ValueError("S(lambda) is singular")
    d, h, r = grid.d, grid.h, subsamples
    mask = grid.core_mask() if mask is None else mask
    X = pt.X
    offsets = dual_offsets(pt.S)
    sub = (np.arange(r) + 0.5) / r * h - h / 2
    sub_mesh = np.stack(np.meshgrid(*([sub] * d), indexing="ij")).reshape(d, -1)
    coords = grid.coords().reshape(d, -1)
    n_axis = grid.points_per_axis

    def chirp(u):
        return np.einsum("i...,ij,j...->...", u, X, u)

    blocks = []
    for k in _core_cells(grid, k_radius):
        pts = _cell_points(grid, k, mask)
        if pts.size == 0:
            continue
        npts = pts.size
        local = -np.ones(grid.size, dtype=int)
        local[pts] = np.arange(npts)
        # sub-points x of shape (d, npts, r^d)
        x = coords[:, pts][:, :, None] + sub_mesh[:, None, :]
        M = np.zeros((npts, npts), dtype=complex)
        for p in offsets:
            y = x - p[:, None, None]
            inside = np.all((y - k[:, None, None] >= -0.5) & (y - k[:, None, None] < 0.5), axis=0)
            inside &= np.all((x - k[:, None, None] >= -0.5) & (x - k[:, None, None] < 0.5), axis=0)
            # g_k(x) conj(g_k(y)) / |det S|: the |det S| from phi cancels
            phase = (-np.tensordot(X @ k, x - y, axes=1)
                     - chirp(x - k[:, None, None]) + chirp(y - k[:, None, None]))
            weight = np.where(inside, np.exp(2j * np.pi * phase), 0.0) / r ** d
            idx = np.floor((y + grid.T / 2) * grid.q).astype(int)
            valid = np.all((idx >= 0) & (idx < n_axis), axis=0) & inside
            flat = np.zeros(valid.shape, dtype=int)
            flat[valid] = np.ravel_multi_index(tuple(i[valid] for i in idx), grid.shape)
            col = np.where(valid, local[flat], -1)
            keep = col >= 0
            rows = np.broadcast_to(np.arange(npts)[:, None], col.shape)
            np.add.at(M, (rows[keep], col[keep]), weight[keep])
        M = 0.5 * (M + M.conj().T)
        blocks.append((pts, M))
    return CellBlockOperator(grid, mask, blocks, family_size=None)


def nyquist_modulations(S: np.ndarray, X: np.ndarray, k: np.ndarray, q: int) -> np.ndarray:
    """Integer l with -S l - X k in the Nyquist box [-q/2, q/2)^d."""
    d = S.shape[0]
    shift = X @ k
    inv = np.linalg.inv(S)
    corners = np.array(list(itertools.product([-q / 2, q / 2], repeat=d)))
    reach = np.abs((corners + shift) @ inv.T).max(axis=0)
    rad = int(np.ceil(reach.max())) + 1
    ls = np.array(list(itertools.product(range(-rad, rad + 1), repeat=d)), dtype=float)
    xi = -(ls @ S.T) - shift
    keep = np.all((xi >= -q / 2) & (xi < q / 2), axis=1)
    return ls[keep]


def direct_operator(spec: LieAlgebraSpec, lam: Sequence, grid: Grid,
                    k_radius: int | None = None, mask: np.ndarray | None = None
                    ) -> CellBlockOperator:
    """Frame operator of the explicit family with Nyquist-box modulations."""
    pt = build_spectral_point(spec, lam)
    mask = grid.core_mask() if mask is None else mask
    phi = window_phi(spec, lam, grid)
    coords = grid.coords().reshape(grid.d, -1)
    blocks, size = [], 0
    for k in _core_cells(grid, k_radius):
        pts = _cell_points(grid, k, mask)
        if pts.size == 0:
            continue
        ls = nyquist_modulations(pt.S, pt.X, k, grid.q)
        shifted = phi.translate(k, allow_truncation=True).values.ravel()[pts]
        xi = -(ls @ pt.S.T) - pt.X @ k
        F = np.exp(2j * np.pi * (xi @ coords[:, pts])) * shifted[None, :]
        blocks.append((pts, grid.cell_volume * (F.T @ F.conj())))
        size += len(ls)
    return CellBlockOperator(grid, mask, blocks, family_size=size)


def lattice_family(spec: LieAlgebraSpec, lam: Sequence, grid: Grid, k_radius: int
                   ) -> dict:
    """Explicit members of the Nyquist-truncated family for |k| <= k_radius."""
    pt = build_spectral_point(spec, lam)
    phi = window_phi(spec, lam, grid)
    out = {}
    for k in itertools.product(range(-k_radius, k_radius + 1), repeat=grid.d):
        k = np.array(k, dtype=float)
        base = phi.translate(k, allow_truncation=True)
        for l in nyquist_modulations(pt.S, pt.X, k, grid.q):
            out[(tuple(int(a) for a in k), tuple(int(a) for a in l))] = base.modulate(
                -(pt.S @ l) - pt.X @ k)
    return out


def parseval_certify(spec: LieAlgebraSpec, lam: Sequence, grid: Grid | None = None,
                     index_box: int | None = None, method: str = "lattice",
                     subsamples: int = 4, iterations: int = 2000, seed: int = 0
                     ) -> FrameReport:
    """Frame bounds of the chirped cube window system at lambda in I."""
    flags = region_flags(spec, lam)
    if not flags.in_I:
        raise ValueError(f"lambda={tuple(lam)} is not in I")
    grid = Grid(spec.d) if grid is None else grid
    phi = window_phi(spec, lam, grid)
    radius = int(np.floor(grid.T / 4 + 0.5)) if index_box is None else index_box
    reports = []
    for rad in (radius, 2 * radius):
        if method == "lattice":
            op = lattice_operator(spec, lam, grid, subsamples=subsamples, k_radius=rad)
        elif method == "direct":
            op = direct_operator(spec, lam, grid, k_radius=rad)
        else:
            raise ValueError(f"unknown method {method!r}")
        reports.append(frame_bounds(op, iterations=iterations, seed=seed))
    base, wide = reports
    details = {
        "lambda": [float(t) for t in lam],
        "method": method,
        "window_norm_sq": phi.norm() ** 2,
        "abs_det_S": abs(flags.det_value),
        "index_radius": radius,
        "A_2R": wide.A,
        "B_2R": wide.B,
        "tau": parseval_tolerance(grid),
    }
    return FrameReport(A=base.A, B=base.B, family_size=base.family_size, grid=base.grid,
                       verdict=base.verdict, converged=base.converged and wide.converged,
                       iterations=base.iterations, details=details)


# ---------------------------------------------------------------- checks

def intertwining_regression(spec: LieAlgebraSpec, lam: Sequence, v: GridFunction,
                            box: int, chunk: int = 4096) -> float:
    """Max deviation between pi_lambda over Gamma_1 and the Gabor family.

    Both sides translate v by an integer vector, so after checking that the
    translations agree the values are compared on the translated support of
    v, for all members at once. No mass is lost at the grid edge.
    """
    pt = build_spectral_point(spec, lam)
    d = spec.d
    ks, ls = _index_arrays(d, box)
    nxi = np.concatenate([ks, ls], axis=1) @ pt.B.T
    shift, xi = nxi[:, :d], nxi[:, d:]
    # pi_lambda(exp(l.Y) exp(k.X)) translates by m = k
    shift_gap = float(np.max(np.abs(shift - ks))) if len(ks) else 0.0
    support = np.nonzero(v.values)
    coords = v.grid.coords()
    y = np.stack([coords[a][support] for a in range(d)], axis=1)  # (P, d)
    vals = v.values[support]
    worst = shift_gap
    zeros = np.zeros((0, spec.c))
    for lo in range(0, len(ks), chunk):
        k = ks[lo:lo + chunk].astype(float)
        l = ls[lo:lo + chunk].astype(float)
        x = y[None, :, :] + k[:, None, :]
        z = np.zeros((len(k), spec.c)) if spec.c else zeros
        a = np.exp(2j * np.pi * pi_phase_batch(spec, lam, z, l, k, x)) * vals
        b = np.exp(2j * np.pi * np.einsum("npd,nd->np", x, xi[lo:lo + chunk])) * vals
        worst = max(worst, float(np.max(np.abs(a - b))))
    return worst


def intertwining_regression_dense(spec: LieAlgebraSpec, lam: Sequence, v: GridFunction,
                                  box: int) -> float:
    """Member-by-member comparison of whole grid functions (small boxes)."""
    worst = 0.0
    zero = (0.0,) * spec.c
    for idx in gabor_indices(spec.d, box):
        g = GroupElement(zero, tuple(float(t) for t in idx.l), tuple(float(t) for t in idx.k))
        a = pi_action(spec, lam, g, v, allow_truncation=True)
        b = gabor_member(spec, v, lam, idx, allow_truncation=True)
        worst = max(worst, float(np.max(np.abs(a.values - b.values))))
    return worst


def _index_arrays(d: int, box: int) -> tuple[np.ndarray, np.ndarray]:
    rng = np.arange(-box, box + 1)
    grid = np.array(np.meshgrid(*([rng] * (2 * d)), indexing="ij")).reshape(2 * d, -1).T
    return grid[:, :d], grid[:, d:]


def span_residual(family, probe: GridFunction) -> float:
    """||v - P v|| / ||v|| with P the projection onto the span of the family."""
    members = _members(family)
    stack = np.stack([f.values.ravel() for f in members], axis=1)
    target = probe.values.ravel()
    rows = np.nonzero(np.any(stack != 0, axis=1) | (target != 0))[0]
    A, b = stack[rows], target[rows]
    coef, *_ = np.linalg.lstsq(A, b, rcond=None)
    resid = b - A @ coef
    return float(np.linalg.norm(resid) / np.linalg.norm(b))


def density_probes(spec: LieAlgebraSpec, lam: Sequence, grid: Grid) -> list[GridFunction]:
    """Chirped half-cell indicators, one per axis, on the unit cell."""
    coords = grid.coords()
    cube = grid.cube_indicator()
    out = []
    for axis in range(grid.d):
        half = cube & (coords[axis] >= 0.0)
        base = GridFunction(grid, half.astype(complex))
        out.append(chirp_U(spec, lam, base))
    return out


def density_check(spec: LieAlgebraSpec, lam: Sequence, grid: Grid | None = None) -> dict:
    """Span residuals of probes against the cell-0 members of the system."""
    grid = Grid(spec.d) if grid is None else grid
    pt = build_spectral_point(spec, lam)
    family = lattice_family(spec, lam, grid, k_radius=0)
    residuals = [span_residual(family, v) for v in density_probes(spec, lam, grid)]
    return {"lambda": [float(t) for t in lam], "abs_det_B": abs(float(np.linalg.det(pt.B))),
            "members": len(family), "residuals": residuals, "max_residual": max(residuals)}

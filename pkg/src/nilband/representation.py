"""Grid discretization of L^2(R^d) and the representations pi_lambda.

Grid points are cell midpoints x_i = -T/2 + (i + 1/2)/q on [-T/2, T/2)^d.
A grid function is read as piecewise constant on the cells of width h = 1/q,
so integer (and h-multiple) translations are exact index shifts and the
indicator of [-1/2, 1/2)^d has norm exactly 1.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .algebra import GroupElement, LieAlgebraSpec
from .spectra import _structure_arrays, build_spectral_point

TRUNCATION_TOL = 1e-10
ALIGN_TOL = 1e-9

MAGIC = b"NBGF"
HEADER_FORMAT = "<4sI6I"  # magic, d, samples per axis for up to 6 axes
HEADER_SIZE = struct.calcsize(HEADER_FORMAT)
assert HEADER_SIZE == 32


class SupportOverflow(ValueError):
    """A translation pushed more than the allowed mass off the grid."""


@dataclass(frozen=True)
class Grid:
    d: int
    T: int = 8
    q: int = 16

    def __post_init__(self):
        if self.q < 2:
            raise ValueError("q must be at least 2")
        if self.d < 1:
            raise ValueError("d must be positive")
        if abs(self.T * self.q - round(self.T * self.q)) > 0:
            raise ValueError("T*q must be an integer")

    @property
    def h(self) -> float:
        return 1.0 / self.q

    @property
    def points_per_axis(self) -> int:
        return int(round(self.T * self.q))

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_axis,) * self.d

    @property
    def size(self) -> int:
        return self.points_per_axis ** self.d

    @property
    def cell_volume(self) -> float:
        return self.h ** self.d

    def axis(self) -> np.ndarray:
        return -self.T / 2 + (np.arange(self.points_per_axis) + 0.5) / self.q

    def coords(self) -> np.ndarray:
        """Coordinates of shape (d, *shape); coords()[k] is x_{k+1}."""
        ax = self.axis()
        return np.stack(np.meshgrid(*([ax] * self.d), indexing="ij"))

    def shift_steps(self, m: Sequence[float]) -> tuple[int, ...]:
        """Translation vector in grid steps; raises unless grid-aligned."""
        steps = []
        for mk in m:
            s = float(mk) * self.q
            r = round(s)
            if abs(s - r) > ALIGN_TOL:
                raise ValueError(f"translation {float(mk)} is not a multiple of 1/{self.q}")
            steps.append(int(r))
        return tuple(steps)

    def cube_indicator(self) -> np.ndarray:
        """Indicator of [-1/2, 1/2)^d sampled at midpoints."""
        ax = self.axis()
        mask1 = (ax >= -0.5) & (ax < 0.5)
        out = np.ones(self.shape, dtype=bool)
        for k in range(self.d):
            shape = [1] * self.d
            shape[k] = -1
            out = out & mask1.reshape(shape)
        return out

    def core_mask(self) -> np.ndarray:
        """Points of the core box [-T/4, T/4)^d."""
        ax = self.axis()
        mask1 = (ax >= -self.T / 4) & (ax < self.T / 4)
        out = np.ones(self.shape, dtype=bool)
        for k in range(self.d):
            shape = [1] * self.d
            shape[k] = -1
            out = out & mask1.reshape(shape)
        return out


def shift_array(values: np.ndarray, steps: Sequence[int]) -> tuple[np.ndarray, float]:
    """out[i] = values[i - steps] with zero fill; returns (out, lost energy)."""
    out = np.zeros_like(values)
    src, dst = [], []
    for s, size in zip(steps, values.shape):
        if abs(s) >= size:
            return out, float(np.sum(np.abs(values) ** 2))
        if s >= 0:
            src.append(slice(0, size - s))
            dst.append(slice(s, size))
        else:
            src.append(slice(-s, size))
            dst.append(slice(0, size + s))
    out[tuple(dst)] = values[tuple(src)]
    lost = float(np.sum(np.abs(values) ** 2) - np.sum(np.abs(out) ** 2))
    return out, max(lost, 0.0)


@dataclass(frozen=True, eq=False)
class GridFunction:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != self.grid.shape:
            vals = vals.reshape(self.grid.shape)
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def zeros(cls, grid: Grid) -> "GridFunction":
        return cls(grid, np.zeros(grid.shape, dtype=complex))

    def inner(self, other: "GridFunction") -> complex:
        """<self, other>, linear in the first slot."""
        _same_grid(self, other)
        return complex(self.grid.cell_volume * np.vdot(other.values, self.values))

    def norm(self) -> float:
        return float(np.sqrt(self.grid.cell_volume * np.sum(np.abs(self.values) ** 2)))

    def __add__(self, other):
        _same_grid(self, other)
        return GridFunction(self.grid, self.values + other.values)

    def __sub__(self, other):
        _same_grid(self, other)
        return GridFunction(self.grid, self.values - other.values)

    def __mul__(self, scalar):
        return GridFunction(self.grid, self.values * scalar)

    __rmul__ = __mul__

    def translate(self, m: Sequence[float], allow_truncation: bool = False) -> "GridFunction":
        out, lost = shift_array(self.values, self.grid.shift_steps(m))
        total = float(np.sum(np.abs(self.values) ** 2))
        if not allow_truncation and total > 0 and lost > TRUNCATION_TOL * total:
            raise SupportOverflow(f"translation by {tuple(m)} loses {lost / total:.3e} of the mass")
        return GridFunction(self.grid, out)

    def modulate(self, xi: Sequence[float]) -> "GridFunction":
        """Multiply by exp(2 pi i <xi, x>)."""
        x = self.grid.coords()
        phase = np.tensordot(np.asarray(xi, dtype=float), x, axes=1)
        return GridFunction(self.grid, self.values * np.exp(2j * np.pi * phase))


def _same_grid(a: GridFunction, b: GridFunction):
    if a.grid != b.grid:
        raise ValueError(f"grid mismatch: {a.grid} vs {b.grid}")


# ---------------------------------------------------------------- pi_lambda

def pi_phase(spec: LieAlgebraSpec, lam: Sequence, g: GroupElement, x: np.ndarray) -> np.ndarray:
    """Phase (in turns) of pi_lambda(g) at points x of shape (d, ...).

    sum_j z_j lambda(Z_j) - sum_{j,k} x_k l_j lambda[X_k, Y_j]
      - sum_{j>r} m_j x_r lambda[X_r, X_j],
    evaluated term by term from the structure constants.
    """
    lam = np.asarray(lam, dtype=float)
    xy, xx = _structure_arrays(spec)
    lxy = xy @ lam  # lxy[k, j] = lambda[X_{k+1}, Y_{j+1}]
    lxx = xx @ lam
    z = np.asarray([float(t) for t in g.z])
    l = np.asarray([float(t) for t in g.l])
    m = np.asarray([float(t) for t in g.m])
    phase = np.full(x.shape[1:], float(np.dot(z, lam)))
    for k in range(spec.d):
        for j in range(spec.d):
            if l[j] and lxy[k, j]:
                phase = phase - x[k] * (l[j] * lxy[k, j])
    for r in range(spec.d):
        for j in range(r + 1, spec.d):
            if m[j] and lxx[r, j]:
                phase = phase - x[r] * (m[j] * lxx[r, j])
    return phase


def pi_phase_batch(spec: LieAlgebraSpec, lam: Sequence, z: np.ndarray, l: np.ndarray,
                   m: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Vectorized :func:`pi_phase` for N elements at per-element points.

    z, l, m have shapes (N, c), (N, d), (N, d); x has shape (N, P, d).
    Returns phases of shape (N, P).
    """
    lam = np.asarray(lam, dtype=float)
    xy, xx = _structure_arrays(spec)
    lxy = xy @ lam
    lxx = xx @ lam
    phase = np.repeat((np.asarray(z, dtype=float) @ lam)[:, None], x.shape[1], axis=1)
    for k in range(spec.d):
        for j in range(spec.d):
            if lxy[k, j]:
                phase = phase - x[:, :, k] * (l[:, j:j + 1] * lxy[k, j])
    for r in range(spec.d):
        for j in range(r + 1, spec.d):
            if lxx[r, j]:
                phase = phase - x[:, :, r] * (m[:, j:j + 1] * lxx[r, j])
    return phase


def pi_action(spec: LieAlgebraSpec, lam: Sequence, g: GroupElement, v: GridFunction,
              allow_truncation: bool = False) -> GridFunction:
    """(pi_lambda(g) v)(x) = exp(2 pi i phase(x)) v(x - m)."""
    if v.grid.d != spec.d:
        raise ValueError("grid dimension must equal d")
    shifted = v.translate([float(t) for t in g.m], allow_truncation=allow_truncation)
    phase = pi_phase(spec, lam, g, v.grid.coords())
    return GridFunction(v.grid, shifted.values * np.exp(2j * np.pi * phase))


def chirp_U(spec: LieAlgebraSpec, lam: Sequence, v: GridFunction,
            inverse: bool = False) -> GridFunction:
    """Multiply by exp(-2 pi i <t, X(lambda) t>), or its conjugate for the inverse."""
    X = build_spectral_point(spec, lam).X
    t = v.grid.coords()
    quad = np.einsum("i...,ij,j...->...", t, X, t)
    sign = 1.0 if inverse else -1.0
    return GridFunction(v.grid, v.values * np.exp(sign * 2j * np.pi * quad))


def window_phi(spec: LieAlgebraSpec, lam: Sequence, grid: Grid) -> GridFunction:
    """|det S(lambda)|^{1/2} U(chi) with chi the indicator of [-1/2, 1/2)^d."""
    if grid.T < 1:
        raise ValueError("grid must cover the unit cube")
    pt = build_spectral_point(spec, lam)
    chi = GridFunction(grid, grid.cube_indicator().astype(complex))
    return chirp_U(spec, lam, chi) * np.sqrt(pt.abs_det)


def window_phi_pointwise(spec: LieAlgebraSpec, lam: Sequence, t: np.ndarray) -> np.ndarray:
    """Continuum window at arbitrary points t of shape (d, ...)."""
    pt = build_spectral_point(spec, lam)
    inside = np.all((t >= -0.5) & (t < 0.5), axis=0)
    quad = np.einsum("i...,ij,j...->...", t, pt.X, t)
    return np.sqrt(pt.abs_det) * inside * np.exp(-2j * np.pi * quad)


@dataclass(frozen=True)
class GaborIndex:
    k: tuple[int, ...]
    l: tuple[int, ...]


def _index_range(box, d):
    if isinstance(box, int):
        return box, box
    rk, rl = box
    return int(rk), int(rl)


def gabor_indices(d: int, box) -> list[GaborIndex]:
    rk, rl = _index_range(box, d)
    ks = np.array(np.meshgrid(*([np.arange(-rk, rk + 1)] * d), indexing="ij")).reshape(d, -1).T
    ls = np.array(np.meshgrid(*([np.arange(-rl, rl + 1)] * d), indexing="ij")).reshape(d, -1).T
    return [GaborIndex(tuple(int(a) for a in k), tuple(int(a) for a in l)) for k in ks for l in ls]


def gabor_member(spec: LieAlgebraSpec, v: GridFunction, lam: Sequence, idx: GaborIndex,
                 allow_truncation: bool = False) -> GridFunction:
    """M_xi T_n v with (n, xi) = B(lambda) (k, l)."""
    B = build_spectral_point(spec, lam).B
    nxi = B @ np.concatenate([idx.k, idx.l]).astype(float)
    n, xi = nxi[:spec.d], nxi[spec.d:]
    return v.translate(n, allow_truncation=allow_truncation).modulate(xi)


def gabor_system(spec: LieAlgebraSpec, v: GridFunction, lam: Sequence, box,
                 allow_truncation: bool = False) -> dict[GaborIndex, GridFunction]:
    """Family {M_{-S l - X k} T_k v} for |k|, |l| within the index box.

    ``box`` is a radius for both k and l or a pair (R_k, R_l).
    """
    return {idx: gabor_member(spec, v, lam, idx, allow_truncation)
            for idx in gabor_indices(spec.d, box)}


# ---------------------------------------------------------------- serialization

def save_grid_function(v: GridFunction, path: str | Path, extra: Mapping | None = None) -> Path:
    """Write little-endian complex128 samples with a 32-byte header and a manifest."""
    path = Path(path)
    if v.grid.d > 6:
        raise ValueError("the header has room for at most 6 axes")
    axes = list(v.grid.shape) + [0] * (6 - v.grid.d)
    header = struct.pack(HEADER_FORMAT, MAGIC, v.grid.d, *axes)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(v.values, dtype="<c16").tobytes())
    manifest = {"file": path.name, "dtype": "complex128-le", "order": "row-major",
                "header_bytes": HEADER_SIZE, "d": v.grid.d, "T": v.grid.T, "q": v.grid.q,
                "shape": list(v.grid.shape)}
    if extra:
        manifest.update(extra)
    manifest_path = path.with_suffix(path.suffix + ".json")
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest_path


def load_grid_function(path: str | Path) -> GridFunction:
    path = Path(path)
    manifest = json.loads(path.with_suffix(path.suffix + ".json").read_text())
    raw = path.read_bytes()
    magic, d, *axes = struct.unpack(HEADER_FORMAT, raw[:HEADER_SIZE])
    if magic != MAGIC:
        raise ValueError("not a grid function dump")
    shape = tuple(axes[:d])
    grid = Grid(d=d, T=manifest["T"], q=manifest["q"])
    if grid.shape != shape:
        raise ValueError("header and manifest disagree")
    values = np.frombuffer(raw[HEADER_SIZE:], dtype="<c16").reshape(shape)
    return GridFunction(grid, values)

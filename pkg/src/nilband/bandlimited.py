"""Band-limited vectors in the Plancherel domain and sampling on Gamma.

A vector h of H_{u,I} is stored as the field lambda -> v_lambda (x) u_lambda on
the midpoint grid of K restricted to I. Norms and pairings carry the
Plancherel weight |det S(lambda)| and the cell volume w:

    ||h||^2         = sum_lambda w ||v_lambda||^2 ||u_lambda||^2 |det S|,
    <h, L(x) f>     = sum_lambda w <v^h, pi_lambda(x) v^f> <u, u> |det S|.

Central coordinates of Gamma enter only through exp(-2 pi i <z, lambda>).
Over one full period of q_lambda consecutive integers per axis those
exponentials are orthogonal on the quadrature nodes, so a complete central
sum is evaluated exactly as sum_lambda w |.|^2 (the discrete form of
Parseval on L^2(K)).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .algebra import GroupElement, LieAlgebraSpec, group_inverse, group_multiply
from .representation import Grid, GridFunction, shift_array
from .spectra import _structure_arrays, lambda_grid, region_table


@dataclass(frozen=True, eq=False)
class SpectralQuadrature:
    nodes: np.ndarray      # (N, c)
    weights: np.ndarray    # (N,)
    abs_det: np.ndarray    # (N,)
    q_lambda: int

    @property
    def size(self) -> int:
        return len(self.weights)

    @property
    def mu(self) -> float:
        return float(np.sum(self.weights * self.abs_det))


def spectral_quadrature(spec: LieAlgebraSpec, q_lambda: int) -> SpectralQuadrature:
    """Midpoint nodes of K that lie in I, each with weight q_lambda^{-c}."""
    table = region_table(spec, q_lambda)
    mask = table["in_I"]
    nodes = table["lam"][mask]
    w = np.full(len(nodes), float(q_lambda) ** (-spec.c))
    return SpectralQuadrature(nodes=nodes, weights=w, abs_det=np.abs(table["det"][mask]),
                              q_lambda=q_lambda)


@dataclass(frozen=True, eq=False)
class VectorFieldU:
    """Unit vectors u_lambda, one per quadrature node."""

    grid: Grid
    values: np.ndarray  # (N, *grid.shape)

    def norms_sq(self) -> np.ndarray:
        axes = tuple(range(1, self.values.ndim))
        return self.grid.cell_volume * np.sum(np.abs(self.values) ** 2, axis=axes)


def constant_u_field(quad: SpectralQuadrature, grid: Grid) -> VectorFieldU:
    """The normalized cube indicator at every node."""
    chi = grid.cube_indicator().astype(complex)
    chi /= np.sqrt(grid.cell_volume * np.sum(np.abs(chi) ** 2))
    return VectorFieldU(grid, np.broadcast_to(chi, (quad.size,) + grid.shape))


class BandLimitedVector:
    """Field lambda -> v_lambda on a shared quadrature and u-field.

    Values are kept on the smallest index box containing their support.
    """

    def __init__(self, spec: LieAlgebraSpec, quad: SpectralQuadrature, ufield: VectorFieldU,
                 values: np.ndarray, origin: Sequence[int] | None = None):
        grid = ufield.grid
        values = np.asarray(values, dtype=complex)
        if origin is None:
            if values.shape[1:] != grid.shape:
                raise ValueError("values must cover the full grid when no origin is given")
            values, origin = _crop(values)
        self.spec = spec
        self.quad = quad
        self.ufield = ufield
        self.grid = grid
        self.values = values
        self.values.setflags(write=False)
        self.origin = tuple(int(o) for o in origin)

    def full_values(self) -> np.ndarray:
        out = np.zeros((self.quad.size,) + self.grid.shape, dtype=complex)
        sl = tuple(slice(o, o + s) for o, s in zip(self.origin, self.values.shape[1:]))
        out[(slice(None),) + sl] = self.values
        return out

    def field_norms_sq(self) -> np.ndarray:
        axes = tuple(range(1, self.values.ndim))
        return self.grid.cell_volume * np.sum(np.abs(self.values) ** 2, axis=axes)

    def norm_sq(self) -> float:
        q = self.quad
        return float(np.sum(q.weights * self.field_norms_sq() * self.ufield.norms_sq()
                            * q.abs_det))

    def combine(self, coeffs: Sequence[complex], others: Sequence["BandLimitedVector"]
                ) -> "BandLimitedVector":
        """sum_j coeffs[j] others[j] (self is only used for the shared data)."""
        full = np.zeros((self.quad.size,) + self.grid.shape, dtype=complex)
        for c, o in zip(coeffs, others):
            _same_domain(self, o)
            full += c * o.full_values()
        return BandLimitedVector(self.spec, self.quad, self.ufield, full)


def _crop(values: np.ndarray) -> tuple[np.ndarray, tuple[int, ...]]:
    nz = np.any(values != 0, axis=0)
    if not nz.any():
        return values[(slice(None),) + (slice(0, 1),) * (values.ndim - 1)] * 0, (0,) * (values.ndim - 1)
    ranges = []
    for ax in range(nz.ndim):
        other = tuple(a for a in range(nz.ndim) if a != ax)
        hit = np.nonzero(np.any(nz, axis=other) if other else nz)[0]
        ranges.append((int(hit[0]), int(hit[-1]) + 1))
    sl = tuple(slice(a, b) for a, b in ranges)
    return values[(slice(None),) + sl].copy(), tuple(a for a, _ in ranges)


def _same_domain(a: BandLimitedVector, b: BandLimitedVector):
    if a.quad is not b.quad or a.ufield is not b.ufield:
        if not (np.array_equal(a.quad.nodes, b.quad.nodes) and a.grid == b.grid):
            raise ValueError("band-limited vectors use different quadratures")


def synthesize_admissible_f(spec: LieAlgebraSpec, quad: SpectralQuadrature,
                            ufield: VectorFieldU, grid: Grid | None = None) -> BandLimitedVector:
    """v_lambda = |det B(lambda)|^{-1/2} phi(lambda) = U chi at every node."""
    if quad.size == 0:
        raise ValueError("empty quadrature")
    grid = ufield.grid if grid is None else grid
    coords = grid.coords()
    cube = grid.cube_indicator()
    _, Xs = _linear_maps(spec, quad.nodes)
    chirp = np.einsum("i...,nij,j...->n...", coords, Xs, coords)
    phi = np.sqrt(quad.abs_det).reshape((-1,) + (1,) * grid.d) * np.exp(-2j * np.pi * chirp) * cube
    # |det B| = |det S|
    values = phi / np.sqrt(quad.abs_det).reshape((-1,) + (1,) * grid.d)
    return BandLimitedVector(spec, quad, ufield, values)


# ---------------------------------------------------------------- pairings

def _linear_maps(spec: LieAlgebraSpec, nodes: np.ndarray):
    """S(lambda) and X(lambda) stacked over the nodes."""
    xy, xx = _structure_arrays(spec)
    return np.einsum("ijk,nk->nij", xy, nodes), _upper(np.einsum("ijk,nk->nij", xx, nodes))


def _upper(mats: np.ndarray) -> np.ndarray:
    d = mats.shape[-1]
    mask = np.triu(np.ones((d, d), dtype=bool), k=1)
    return np.where(mask, mats, 0.0)


class _PairingEngine:
    """Evaluates <A_lambda, pi_lambda(x) B_lambda> for all nodes at once.

    Batches share the translation m and vary (z, l); the exponential
    exp(2 pi i <t, S l + X m>) factors over the grid axes.
    """

    def __init__(self, spec: LieAlgebraSpec, quad: SpectralQuadrature, grid: Grid):
        self.spec, self.quad, self.grid = spec, quad, grid
        self.S, self.X = _linear_maps(spec, quad.nodes)
        self.axis = grid.axis()
        letters = "abcdefgh"[:grid.d]
        self._subscripts = "n" + letters + "," + ",".join(f"Ln{c}" for c in letters) + "->Ln"

    def _overlap(self, a: BandLimitedVector, b: BandLimitedVector, m: Sequence[float]):
        steps = self.grid.shift_steps(m)
        b_origin = tuple(o + s for o, s in zip(b.origin, steps))
        lo = [max(ao, bo) for ao, bo in zip(a.origin, b_origin)]
        hi = [min(ao + n, bo + n2) for ao, n, bo, n2 in
              zip(a.origin, a.values.shape[1:], b_origin, b.values.shape[1:])]
        if any(l >= h for l, h in zip(lo, hi)):
            return None
        a_sl = tuple(slice(l - o, h - o) for l, h, o in zip(lo, hi, a.origin))
        b_sl = tuple(slice(l - o, h - o) for l, h, o in zip(lo, hi, b_origin))
        product = a.values[(slice(None),) + a_sl] * np.conj(b.values[(slice(None),) + b_sl])
        return product, lo, hi

    def pair_batch(self, a: BandLimitedVector, b: BandLimitedVector, m: Sequence[float],
                   ls: np.ndarray, zs: np.ndarray | None = None) -> np.ndarray:
        """Array (L, N) of <a_lambda, pi_lambda(z_i, l_i, m) b_lambda>."""
        ls = np.atleast_2d(np.asarray(ls, dtype=float))
        out_shape = (ls.shape[0], self.quad.size)
        ov = self._overlap(a, b, m)
        if ov is None:
            return np.zeros(out_shape, dtype=complex)
        product, lo, hi = ov
        m = np.asarray(m, dtype=float)
        # xi[L, n, :] = S_n l_L + X_n m
        xi = np.einsum("nij,Lj->Lni", self.S, ls) + (self.X @ m)[None, :, :]
        top = float(np.max(np.abs(xi))) if xi.size else 0.0
        if top > self.grid.q / 2:
            raise ValueError(f"modulation {top:.4g} exceeds the grid Nyquist limit "
                             f"{self.grid.q / 2:g}; refine the grid or lower the radius")
        factors = []
        for k in range(self.grid.d):
            t = self.axis[lo[k]:hi[k]]
            factors.append(np.exp(2j * np.pi * xi[:, :, k, None] * t[None, None, :]))
        vals = np.einsum(self._subscripts, product, *factors, optimize=True)
        vals *= self.grid.cell_volume
        if zs is not None:
            zs = np.atleast_2d(np.asarray(zs, dtype=float))
            vals *= np.exp(-2j * np.pi * (zs @ self.quad.nodes.T))
        return vals

    def pair(self, a: BandLimitedVector, b: BandLimitedVector, x: GroupElement) -> np.ndarray:
        """Vector over nodes of <a_lambda, pi_lambda(x) b_lambda>."""
        return self.pair_batch(a, b, [float(t) for t in x.m], [[float(t) for t in x.l]],
                               [[float(t) for t in x.z]])[0]

    def node_weight(self, a: BandLimitedVector) -> np.ndarray:
        """|det S| <u, u> per node."""
        return self.quad.abs_det * a.ufield.norms_sq()

    def weighted(self, a: BandLimitedVector, b: BandLimitedVector, x: GroupElement) -> np.ndarray:
        """Node terms |det S| <u, u> <a, pi(x) b> of the Plancherel pairing."""
        return self.node_weight(a) * self.pair(a, b, x)


def _engine(h: BandLimitedVector) -> _PairingEngine:
    eng = getattr(h, "_engine", None)
    if eng is None:
        eng = _PairingEngine(h.spec, h.quad, h.grid)
        h._engine = eng
    return eng


def coefficient_transform(h: BandLimitedVector, f: BandLimitedVector, x: GroupElement) -> complex:
    """V_f h(x) = <h, L(x) f>."""
    _same_domain(h, f)
    terms = _engine(h).weighted(h, f, x)
    return complex(np.sum(h.quad.weights * terms))


def coefficient_transform_batch(h: BandLimitedVector, f: BandLimitedVector, m: Sequence[float],
                                ls: np.ndarray, zs: np.ndarray) -> np.ndarray:
    """V_f h at the points (z_i, l_i, m) for all rows i."""
    _same_domain(h, f)
    eng = _engine(h)
    vals = eng.pair_batch(h, f, m, ls, zs) * eng.node_weight(h)[None, :]
    return vals @ h.quad.weights


def left_translate(h: BandLimitedVector, g: GroupElement) -> BandLimitedVector:
    """L(g) h, i.e. v_lambda -> pi_lambda(g) v_lambda."""
    eng = _engine(h)
    grid = h.grid
    steps = grid.shift_steps([float(t) for t in g.m])
    full = h.full_values()
    shifted = np.stack([shift_array(row, steps)[0] for row in full])
    coords = grid.coords()
    l = np.array([float(t) for t in g.l])
    m = np.array([float(t) for t in g.m])
    z = np.array([float(t) for t in g.z])
    xi = eng.S @ l + eng.X @ m
    phase = (h.quad.nodes @ z).reshape((-1,) + (1,) * grid.d) - np.tensordot(xi, coords, axes=1)
    return BandLimitedVector(h.spec, h.quad, h.ufield, shifted * np.exp(2j * np.pi * phase))


# ---------------------------------------------------------------- Gamma sums

def _int_box(radius: int, d: int) -> np.ndarray:
    rng = np.arange(-radius, radius + 1, dtype=float)
    return np.array(list(itertools.product(rng, repeat=d))).reshape(-1, d)


def gamma1_points(spec: LieAlgebraSpec, radius: int, m_range: int | None = None
                  ) -> list[GroupElement]:
    """Gamma_1 points with |l|_inf <= radius and |m|_inf <= min(radius, m_range)."""
    zero = (0.0,) * spec.c
    mr = radius if m_range is None else min(radius, m_range)
    return [GroupElement(zero, tuple(l), tuple(m))
            for l in _int_box(radius, spec.d) for m in _int_box(mr, spec.d)]


def central_period(spec: LieAlgebraSpec, q_lambda: int) -> np.ndarray:
    """One full period of integer central coordinates, centred on zero."""
    rng = np.arange(-(q_lambda // 2), q_lambda - q_lambda // 2, dtype=float)
    return np.array(list(itertools.product(rng, repeat=spec.c))).reshape(-1, spec.c)


def _support_reach(v: BandLimitedVector) -> int:
    """Smallest integer r such that the support lies in [-r-1/2, r+1/2)^d."""
    ax = v.grid.axis()
    lo = [ax[o] for o in v.origin]
    hi = [ax[o + n - 1] for o, n in zip(v.origin, v.values.shape[1:])]
    return int(np.ceil(max(max(abs(a) for a in lo), max(abs(b) for b in hi)) - 0.5 - 1e-12))


def _m_values(g: BandLimitedVector, f: BandLimitedVector, radius: int) -> np.ndarray:
    """Integer translations that can give a nonzero pairing, clipped to the radius."""
    reach = _support_reach(g) + _support_reach(f) + 1
    return _int_box(min(radius, reach), g.spec.d)


def frame_energy(g: BandLimitedVector, f: BandLimitedVector, radius: int) -> float:
    """sum over gamma = (z, eta), eta in Gamma_1 with |eta| <= R, z complete.

    The complete central sum equals sum_lambda w |<g, L(eta) f>_lambda|^2.
    """
    eng = _engine(g)
    ls = _int_box(radius, g.spec.d)
    weight = eng.node_weight(g)
    total = 0.0
    for m in _m_values(g, f, radius):
        terms = eng.pair_batch(g, f, m, ls) * weight[None, :]
        total += float(np.sum(np.abs(terms) ** 2 @ g.quad.weights))
    return total


def parseval_LGamma_check(f: BandLimitedVector, g: BandLimitedVector, gamma_radius: int
                          ) -> float:
    """sum_{|gamma| <= R} |<g, L(gamma) f>|^2 / ||g||^2."""
    _same_domain(f, g)
    return frame_energy(g, f, gamma_radius) / g.norm_sq()


def parseval_ratio_direct(f: BandLimitedVector, g: BandLimitedVector, gamma_radius: int,
                          central_radius: int | None = None) -> float:
    """Same ratio with the central sum done point by point.

    ``central_radius=None`` sums one full period; an integer truncates z.
    """
    spec = g.spec
    zs = (central_period(spec, g.quad.q_lambda) if central_radius is None
          else _int_box(central_radius, spec.c))
    total = 0.0
    for m in _m_values(g, f, gamma_radius):
        for l in _int_box(gamma_radius, spec.d):
            vals = coefficient_transform_batch(g, f, m, np.repeat(l[None, :], len(zs), 0), zs)
            total += float(np.sum(np.abs(vals) ** 2))
    return total / g.norm_sq()


# ---------------------------------------------------------------- reconstruction

class SincTable(Mapping):
    """Values s(y) = V_f f(y) keyed by rounded coordinates."""

    def __init__(self, f: BandLimitedVector, digits: int = 9):
        self.f = f
        self.digits = digits
        self._values: dict = {}

    def key(self, y: GroupElement) -> tuple:
        return tuple(round(float(t), self.digits) + 0.0 for t in y.as_tuple())

    def fill(self, points: Iterable[GroupElement]) -> "SincTable":
        for y in points:
            k = self.key(y)
            if k not in self._values:
                self._values[k] = coefficient_transform(self.f, self.f, y)
        return self

    def __getitem__(self, y) -> complex:
        k = self.key(y) if isinstance(y, GroupElement) else y
        if k not in self._values:
            raise KeyError(f"sinc value missing at {k}")
        return self._values[k]

    def __iter__(self):
        return iter(self._values)

    def __len__(self):
        return len(self._values)


def reconstruct(spec: LieAlgebraSpec, samples: Mapping, sinc: Mapping, x: GroupElement) -> complex:
    """sum_gamma h(gamma) s(gamma^{-1} x) over the supplied samples.

    ``samples`` maps GroupElement -> complex and ``sinc`` must hold a value
    at every gamma^{-1} x.
    """
    total = 0j
    for gamma, value in samples.items():
        if value == 0:
            continue
        total += value * sinc[group_multiply(spec, group_inverse(spec, gamma), x)]
    return complex(total)


def _as_arrays(points: Sequence[GroupElement]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    z = np.array([[float(t) for t in p.z] for p in points])
    l = np.array([[float(t) for t in p.l] for p in points])
    m = np.array([[float(t) for t in p.m] for p in points])
    return z, l, m


def reconstruct_complete_central(h: BandLimitedVector, f: BandLimitedVector,
                                 xs: Sequence[GroupElement], radius: int) -> np.ndarray:
    """Reconstruction at probes with Gamma_1 truncated at R and z complete.

    Summing H(z, eta) s((z, eta)^{-1} x) over a full central period collapses
    the two node sums onto the diagonal, leaving for each eta

        sum_lambda w c_eta(lambda) |det S| <u,u> <v^f, pi(eta^{-1} x) v^f>,

    with c_eta = |det S| <u,u> <v^h, pi(eta) v^f>.
    """
    from .algebra import group_inverse_batch, group_multiply_batch

    eng = _engine(h)
    spec = h.spec
    weight = eng.node_weight(h)
    ls = _int_box(radius, spec.d)
    xz, xl, xm = _as_arrays(xs)
    out = np.zeros(len(xs), dtype=complex)
    for m in _m_values(h, f, radius):
        a = eng.pair_batch(h, f, m, ls) * weight[None, :]  # (L, N)
        if not np.any(a):
            continue
        inv = group_inverse_batch(spec, (np.zeros((len(ls), spec.c)), ls,
                                         np.repeat(m[None, :], len(ls), 0)))
        for i in range(len(xs)):
            yz, yl, ym = group_multiply_batch(spec, inv, (xz[i:i + 1], xl[i:i + 1], xm[i:i + 1]))
            b = eng.pair_batch(f, f, ym[0], yl, yz) * weight[None, :]
            out[i] += np.sum((a * b) @ h.quad.weights)
    return out


def reconstruction_error(h: BandLimitedVector, f: BandLimitedVector, radii: Sequence[int],
                         probes: Sequence[GroupElement]) -> dict:
    """Relative l2 error over the probes for each truncation radius."""
    H = np.array([coefficient_transform(h, f, x) for x in probes])
    curve = []
    for R in radii:
        rec = reconstruct_complete_central(h, f, probes, R)
        curve.append(float(np.linalg.norm(H - rec) / np.linalg.norm(H)))
    return {"radii": list(radii), "errors": curve, "rel_l2_error": curve[-1]}


def default_probes(spec: LieAlgebraSpec, grid: Grid, count: int = 12, seed: int = 0
                   ) -> list[GroupElement]:
    """Grid-aligned probes near the identity: the identity, one Gamma point
    and points with fractional coordinates off Gamma."""
    rng = np.random.default_rng(seed)
    probes = [GroupElement((0.0,) * spec.c, (0.0,) * spec.d, (0.0,) * spec.d),
              GroupElement((1.0,) * spec.c, (1.0,) + (0.0,) * (spec.d - 1), (0.0,) * spec.d)]
    while len(probes) < count:
        z = tuple(float(t) for t in rng.uniform(-1.0, 1.0, spec.c).round(3))
        l = tuple(float(t) for t in rng.uniform(-1.0, 1.0, spec.d).round(3))
        m = tuple(float(t) for t in rng.integers(-grid.q // 2, grid.q // 2 + 1, spec.d) / grid.q)
        probes.append(GroupElement(z, l, m))
    return probes


def random_band_limited(f: BandLimitedVector, rng: np.random.Generator, terms: int = 3,
                        radius: int = 1) -> BandLimitedVector:
    """Random element of span L(Gamma) f: sum_j c_j L(gamma_j) f.

    gamma_j are drawn uniformly from Gamma with coordinates in [-radius, radius]
    and c_j are standard complex Gaussians.
    """
    spec = f.spec
    parts, coeffs = [], []
    for _ in range(terms):
        coords = rng.integers(-radius, radius + 1, spec.n).astype(float)
        g = GroupElement(tuple(coords[:spec.c]), tuple(coords[spec.c:spec.c + spec.d]),
                         tuple(coords[spec.c + spec.d:]))
        parts.append(left_translate(f, g))
        coeffs.append(complex(rng.normal(), rng.normal()))
    return f.combine(coeffs, parts)


# ---------------------------------------------------------------- isometry

def isometry_sum(h: BandLimitedVector, f: BandLimitedVector, l_radius: float,
                 l_step: float = 0.5, m_step: float = 0.5) -> float:
    """sum_x |V_f h(x)|^2 vol(x) over x = (z, l, m): z a full central period
    (unit cells), l in l_step Z^d with |l| <= l_radius, m in m_step Z^d
    covering every translation that meets the supports."""
    eng = _engine(h)
    spec = h.spec
    reach = _support_reach(h) + _support_reach(f) + 1
    nl = int(np.floor(l_radius / l_step + 1e-12))
    nm = int(np.floor(reach / m_step + 1e-12))
    ls = _int_box(nl, spec.d) * l_step
    ms = _int_box(nm, spec.d) * m_step
    weight = eng.node_weight(h)
    vol = (l_step * m_step) ** spec.d
    total = 0.0
    for m in ms:
        terms = eng.pair_batch(h, f, m, ls) * weight[None, :]
        total += float(np.sum(np.abs(terms) ** 2 @ h.quad.weights))
    return total * vol

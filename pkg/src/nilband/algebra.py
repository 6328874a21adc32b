"""Step-2 nilpotent Lie algebras n = z + b + a and their groups.

The basis is ordered B_1..B_n = (Z_c, ..., Z_1, Y_d, ..., Y_1, X_d, ..., X_1)
with c = n - 2d central directions. Brackets are stored only for pairs of
non-central basis vectors and always take values in the center.

Group elements use coordinates of the second kind,

    (z, l, m) <-> exp(z_c Z_c) ... exp(z_1 Z_1) exp(l_d Y_d) ... exp(l_1 Y_1)
                  exp(m_d X_d) ... exp(m_1 X_1),

with ``z[k-1] = z_k`` and likewise for ``l`` and ``m``. All arithmetic here is
generic over the scalar type, so ``Fraction`` inputs give exact results.
"""
from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from types import MappingProxyType
from pathlib import Path
from typing import Iterable, Mapping, Sequence

DEFAULT_ENUMERATION_CAP = 10**7

_NAME_RE = re.compile(r"^([XYZ])([1-9][0-9]*)$")


class SpecError(ValueError):
    """Raised for malformed or non-representable algebra descriptions."""


def _as_fraction(value) -> Fraction:
    if isinstance(value, bool):
        raise SpecError(f"boolean is not a rational coefficient: {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise SpecError(f"invalid rational {value!r}") from exc
    raise SpecError(f"coefficients must be integers or 'p/q' strings, got {value!r}")


@dataclass(frozen=True)
class LieAlgebraSpec:
    """Structure constants of n = z + b + a.

    ``xy[i][j]`` is the central vector of [X_{i+1}, Y_{j+1}] and ``xx[i][j]``
    that of [X_{i+1}, X_{j+1}]; both are tuples of ``Fraction`` indexed by
    ``k - 1`` for Z_k.
    """

    n: int
    d: int
    xy: tuple
    xx: tuple
    name: str = field(default="", compare=False)

    @property
    def c(self) -> int:
        """Dimension of the center."""
        return self.n - 2 * self.d

    @property
    def basis_names(self) -> tuple[str, ...]:
        zs = [f"Z{k}" for k in range(self.c, 0, -1)]
        ys = [f"Y{j}" for j in range(self.d, 0, -1)]
        xs = [f"X{i}" for i in range(self.d, 0, -1)]
        return tuple(zs + ys + xs)

    def index(self, name: str) -> int:
        """0-based position of a basis name in B_1..B_n."""
        kind, k = _split_name(name)
        bound = self.c if kind == "Z" else self.d
        if not 1 <= k <= bound:
            raise SpecError(f"basis index out of range: {name}")
        if kind == "Z":
            return self.c - k
        if kind == "Y":
            return self.c + self.d - k
        return self.n - k

    def basis_vector(self, name: str) -> tuple[Fraction, ...]:
        v = [Fraction(0)] * self.n
        v[self.index(name)] = Fraction(1)
        return tuple(v)

    @cached_property
    def brackets(self) -> Mapping[tuple[int, int], tuple[Fraction, ...]]:
        """Nonzero brackets [B_i, B_j], i < j (0-based), as central vectors."""
        out = {}
        zero = (Fraction(0),) * self.c
        for a in range(self.n):
            for b in range(a + 1, self.n):
                val = self.basis_bracket(a, b)
                if val != zero:
                    out[(a, b)] = val
        return MappingProxyType(out)

    @cached_property
    def _sparse_xy(self) -> tuple:
        """Nonzero (i, j, k, t) with [X_{i+1}, Y_{j+1}] having t in slot k."""
        return tuple((i, j, k, t) for i in range(self.d) for j in range(self.d)
                     for k, t in enumerate(self.xy[i][j]) if t)

    @cached_property
    def _sparse_xx(self) -> tuple:
        """Nonzero (i, j, k, t) of [X_{i+1}, X_{j+1}], i != j."""
        return tuple((i, j, k, t) for i in range(self.d) for j in range(self.d) if i != j
                     for k, t in enumerate(self.xx[i][j]) if t)

    def basis_bracket(self, a: int, b: int) -> tuple[Fraction, ...]:
        """[B_{a+1}, B_{b+1}] for 0-based indices."""
        ka, ia = self._role(a)
        kb, ib = self._role(b)
        zero = (Fraction(0),) * self.c
        if ka == "X" and kb == "Y":
            return self.xy[ia][ib]
        if ka == "Y" and kb == "X":
            return tuple(-t for t in self.xy[ib][ia])
        if ka == "X" and kb == "X":
            return self.xx[ia][ib]
        return zero

    def _role(self, a: int) -> tuple[str, int]:
        if a < self.c:
            return "Z", self.c - 1 - a
        if a < self.c + self.d:
            return "Y", self.c + self.d - 1 - a
        return "X", self.n - 1 - a

    def s_entry(self, i: int, j: int) -> tuple[Fraction, ...]:
        """Central vector of [X_{i+1}, Y_{j+1}]."""
        return self.xy[i][j]

    def to_json(self) -> dict:
        entries = []
        zero = (Fraction(0),) * self.c
        for i in range(self.d):
            for j in range(i + 1, self.d):
                if self.xx[i][j] != zero:
                    entries.append((f"X{i + 1}", f"X{j + 1}", self.xx[i][j]))
        for i in range(self.d):
            for j in range(self.d):
                if self.xy[i][j] != zero:
                    entries.append((f"X{i + 1}", f"Y{j + 1}", self.xy[i][j]))
        brackets = [
            {"left": a, "right": b,
             "value": {f"Z{k + 1}": str(t) for k, t in enumerate(v) if t != 0}}
            for a, b, v in entries
        ]
        return {"n": self.n, "d": self.d, "brackets": brackets}


def _split_name(name: str) -> tuple[str, int]:
    if not isinstance(name, str):
        raise SpecError(f"basis name must be a string, got {name!r}")
    match = _NAME_RE.match(name.strip())
    if not match:
        raise SpecError(f"unknown basis name {name!r}")
    return match.group(1), int(match.group(2))


def parse_spec(text: str, name: str = "") -> LieAlgebraSpec:
    """Parse the JSON algebra description into a :class:`LieAlgebraSpec`."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"syntax error at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return spec_from_dict(data, name=name)


def spec_from_dict(data: Mapping, name: str = "") -> LieAlgebraSpec:
    if not isinstance(data, Mapping):
        raise SpecError("top level must be an object")
    for key in ("n", "d", "brackets"):
        if key not in data:
            raise SpecError(f"missing field {key!r}")
    n, d = data["n"], data["d"]
    if not (isinstance(n, int) and isinstance(d, int)) or isinstance(n, bool) or isinstance(d, bool):
        raise SpecError("n and d must be integers")
    if d < 1 or n < 1:
        raise SpecError("n and d must be positive")
    c = n - 2 * d
    if c < 1:
        raise SpecError(f"dimension mismatch: n={n} leaves no center for d={d}")
    if "central_dim" in data and data["central_dim"] != c:
        raise SpecError(f"dimension mismatch: n={n} != central_dim+2d={data['central_dim'] + 2 * d}")

    zero = [Fraction(0)] * c
    xy = [[list(zero) for _ in range(d)] for _ in range(d)]
    xx = [[list(zero) for _ in range(d)] for _ in range(d)]
    seen = set()
    if not isinstance(data["brackets"], list):
        raise SpecError("brackets must be a list")
    for pos, entry in enumerate(data["brackets"]):
        where = f"bracket #{pos}"
        if not isinstance(entry, Mapping) or not {"left", "right", "value"} <= set(entry):
            raise SpecError(f"{where}: needs left, right and value")
        lk, li = _split_name(entry["left"])
        rk, ri = _split_name(entry["right"])
        for kind, idx in ((lk, li), (rk, ri)):
            bound = c if kind == "Z" else d
            if idx > bound:
                raise SpecError(f"{where}: bracket index out of range: {kind}{idx}")
        value = entry["value"]
        if not isinstance(value, Mapping):
            raise SpecError(f"{where}: value must be an object of central coefficients")
        vec = list(zero)
        for key, coef in value.items():
            vk, vi = _split_name(key)
            if vk != "Z":
                raise SpecError(f"{where}: non-central bracket value component {key}")
            if vi > c:
                raise SpecError(f"{where}: bracket index out of range: {key}")
            vec[vi - 1] += _as_fraction(coef)
        nonzero = any(t != 0 for t in vec)
        sign = 1
        if lk == "Y" and rk == "X":
            lk, li, rk, ri, sign = rk, ri, lk, li, -1
        elif lk == "X" and rk == "X" and li > ri:
            li, ri, sign = ri, li, -1
        if lk == "X" and rk == "Y":
            key = ("XY", li, ri)
            target = xy[li - 1]
            col = ri - 1
        elif lk == "X" and rk == "X":
            if li == ri:
                if nonzero:
                    raise SpecError(f"{where}: [X{li},X{li}] must vanish")
                continue
            key = ("XX", li, ri)
            target = xx[li - 1]
            col = ri - 1
        else:
            if nonzero:
                raise SpecError(
                    f"{where}: non-representable bracket [{entry['left']},{entry['right']}] "
                    "(center and b must stay commutative)")
            continue
        if key in seen:
            raise SpecError(f"{where}: duplicate bracket {entry['left']},{entry['right']}")
        seen.add(key)
        target[col] = [sign * t for t in vec]
    for i in range(d):
        for j in range(i + 1, d):
            xx[j][i] = [-t for t in xx[i][j]]
    freeze = lambda rows: tuple(tuple(tuple(v) for v in row) for row in rows)
    return LieAlgebraSpec(n=n, d=d, xy=freeze(xy), xx=freeze(xx), name=name)


def load_spec(path: str | Path) -> LieAlgebraSpec:
    path = Path(path)
    return parse_spec(path.read_text(), name=path.stem)


def bracket(spec: LieAlgebraSpec, u: Sequence, v: Sequence) -> tuple:
    """Bilinear antisymmetric bracket of two coefficient vectors over B_1..B_n.

    Returns the coefficient vector over Z_1..Z_c.
    """
    if len(u) != spec.n or len(v) != spec.n:
        raise ValueError(f"vectors must have length {spec.n}")
    out = [Fraction(0)] * spec.c
    for (a, b), val in spec.brackets.items():
        coef = u[a] * v[b] - u[b] * v[a]
        if coef:
            for k in range(spec.c):
                out[k] += coef * val[k]
    return tuple(out)


# ---------------------------------------------------------------- rank utils

def exact_rank(rows: Iterable[Sequence]) -> int:
    """Rank of a rational matrix by Gaussian elimination over ``Fraction``."""
    mat = [[Fraction(x) for x in row] for row in rows]
    if not mat:
        return 0
    rank, ncols = 0, len(mat[0])
    for col in range(ncols):
        pivot = next((r for r in range(rank, len(mat)) if mat[r][col] != 0), None)
        if pivot is None:
            continue
        mat[rank], mat[pivot] = mat[pivot], mat[rank]
        p = mat[rank][col]
        for r in range(len(mat)):
            if r != rank and mat[r][col] != 0:
                f = mat[r][col] / p
                mat[r] = [x - f * y for x, y in zip(mat[r], mat[rank])]
        rank += 1
        if rank == len(mat):
            break
    return rank


# ---------------------------------------------------------------- validation

CHECK_NAMES = ("jacobi", "center_is_z", "zb_maximal_commutative", "ab_in_z",
               "detS_nontrivial", "detS_homogeneous")


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple  # of (name, passed, detail)
    det_s: object = None

    @property
    def passed(self) -> bool:
        return all(ok for _, ok, _ in self.checks)

    def failing(self) -> list[str]:
        return [name for name, ok, _ in self.checks if not ok]

    def as_dict(self) -> dict:
        return {name: {"pass": ok, "detail": detail} for name, ok, detail in self.checks}


def s_matrix_symbolic(spec: LieAlgebraSpec) -> list[list[tuple]]:
    """S as a d x d matrix of central vectors, S_ij = [X_i, Y_j]."""
    return [[spec.xy[i][j] for j in range(spec.d)] for i in range(spec.d)]


def validate(spec: LieAlgebraSpec) -> ValidationReport:
    """Check the structural assumptions on n, returning one verdict per item."""
    from .poly import det_of_central_matrix, homogeneity_degree, is_nontrivial

    n, c, d = spec.n, spec.c, spec.d
    basis = [tuple(Fraction(int(i == a)) for i in range(n)) for a in range(n)]
    zero = (Fraction(0),) * c

    def embed(zvec):
        # central vector over Z_1..Z_c -> coefficient vector over B
        v = [Fraction(0)] * n
        for k, t in enumerate(zvec):
            v[c - 1 - k] = t
        return v

    # Jacobi: [[a,b],c] + cyclic, every bracket lands in the center
    jacobi_ok = True
    for a, b, e in itertools.combinations(range(n), 3):
        total = [Fraction(0)] * c
        for x, y, w in ((a, b, e), (b, e, a), (e, a, b)):
            inner = embed(bracket(spec, basis[x], basis[y]))
            total = [s + t for s, t in zip(total, bracket(spec, inner, basis[w]))]
        if any(total):
            jacobi_ok = False
            break
    jacobi = ("jacobi", jacobi_ok, "all basis triples" if jacobi_ok else f"fails at {(a, b, e)}")

    # center: the map v -> [v, .] on the non-central part must be injective
    rows = []
    for a in range(c, n):
        rows.append([t for b in range(n) for t in bracket(spec, basis[a], basis[b])])
    rank = exact_rank(rows)
    center_ok = rank == 2 * d
    center = ("center_is_z", center_ok,
              f"rank of bracket pairing on b+a is {rank} (need {2 * d})")

    # maximality of z+b: A in a with [A, b] = 0 must vanish
    rows = [[t for j in range(d) for t in spec.xy[i][j]] for i in range(d)]
    rank_s = exact_rank(rows)
    comm_ok = all(spec.basis_bracket(a, b) == zero
                  for a in range(c + d) for b in range(c + d))
    maximal_ok = comm_ok and rank_s == d
    maximal = ("zb_maximal_commutative", maximal_ok,
               f"z+b commutative: {comm_ok}; rank of S over a is {rank_s} (need {d})")

    ab_ok = all(len(v) == c for v in spec.brackets.values())
    ab = ("ab_in_z", ab_ok, "bracket table takes values in span(Z)")

    det_s = det_of_central_matrix(s_matrix_symbolic(spec), nvars=c)
    nontrivial = ("detS_nontrivial", is_nontrivial(det_s), f"det S = {det_s}")
    deg = homogeneity_degree(det_s)
    homogeneous = ("detS_homogeneous", deg == d,
                   f"homogeneity degree {deg} (need {d})")
    return ValidationReport(checks=(jacobi, center, maximal, ab, nontrivial, homogeneous),
                            det_s=det_s)


# ---------------------------------------------------------------- group law

@dataclass(frozen=True)
class GroupElement:
    """Point of N in coordinates of the second kind."""

    z: tuple
    l: tuple
    m: tuple

    @classmethod
    def identity(cls, spec: LieAlgebraSpec) -> "GroupElement":
        return cls((Fraction(0),) * spec.c, (Fraction(0),) * spec.d, (Fraction(0),) * spec.d)

    @classmethod
    def make(cls, z, l, m) -> "GroupElement":
        return cls(tuple(z), tuple(l), tuple(m))

    def as_tuple(self) -> tuple:
        return self.z + self.l + self.m


def _xy_form(spec, m, l):
    """Central vector of [m.X, l.Y] = sum_ij m_i l_j [X_i, Y_j]."""
    out = [Fraction(0)] * spec.c
    for i, j, k, t in spec._sparse_xy:
        if m[i] and l[j]:
            out[k] += m[i] * l[j] * t
    return out


def _xx_form(spec, m, mm):
    """Central vector of [m.X, mm.X]."""
    out = [Fraction(0)] * spec.c
    for i, j, k, t in spec._sparse_xx:
        if m[i] and mm[j]:
            out[k] += m[i] * mm[j] * t
    return out


def _ordering_correction(spec, l, m):
    """Central part of log(exp(lY) exp(m_d X_d) ... exp(m_1 X_1)) minus zZ.

    Equals 1/2 [lY, mX] + 1/2 sum_{i>j} m_i m_j [X_i, X_j].
    """
    corr = [-t / 2 for t in _xy_form(spec, m, l)]
    for i, j, k, t in spec._sparse_xx:
        if i > j and m[i] and m[j]:
            corr[k] += m[i] * m[j] * t / 2
    return corr


def group_multiply(spec: LieAlgebraSpec, g: GroupElement, h: GroupElement) -> GroupElement:
    """Product g.h via the step-2 Baker-Campbell-Hausdorff formula."""
    l = tuple(a + b for a, b in zip(g.l, h.l))
    m = tuple(a + b for a, b in zip(g.m, h.m))
    cg = _ordering_correction(spec, g.l, g.m)
    ch = _ordering_correction(spec, h.l, h.m)
    c = _ordering_correction(spec, l, m)
    # 1/2 [W_g, W_h] restricted to the non-central parts
    cross = _xx_form(spec, g.m, h.m)
    a1 = _xy_form(spec, g.m, h.l)
    a2 = _xy_form(spec, h.m, g.l)
    z = tuple(
        g.z[k] + h.z[k] + cg[k] + ch[k] + (cross[k] + a1[k] - a2[k]) / 2 - c[k]
        for k in range(spec.c)
    )
    return GroupElement(z, l, m)


def group_inverse(spec: LieAlgebraSpec, g: GroupElement) -> GroupElement:
    """Inverse element; exp(W)^{-1} = exp(-W) in first-kind coordinates."""
    l = tuple(-a for a in g.l)
    m = tuple(-a for a in g.m)
    cg = _ordering_correction(spec, g.l, g.m)
    c = _ordering_correction(spec, l, m)
    z = tuple(-g.z[k] - cg[k] - c[k] for k in range(spec.c))
    return GroupElement(z, l, m)


def exp_basis(spec: LieAlgebraSpec, index: int, t) -> GroupElement:
    """exp(t B_{index+1}) as a group element."""
    z = [Fraction(0)] * spec.c
    l = [Fraction(0)] * spec.d
    m = [Fraction(0)] * spec.d
    kind, pos = spec._role(index)
    {"Z": z, "Y": l, "X": m}[kind][pos] = t
    return GroupElement(tuple(z), tuple(l), tuple(m))


def ordered_product(spec: LieAlgebraSpec, factors: Sequence[tuple[int, object]]) -> GroupElement:
    """Product exp(t_1 B_{a_1}) exp(t_2 B_{a_2}) ... in canonical coordinates."""
    g = GroupElement.identity(spec)
    for index, t in factors:
        g = group_multiply(spec, g, exp_basis(spec, index, t))
    return g


def gamma_enumerate(spec: LieAlgebraSpec, radius: int, cap: int = DEFAULT_ENUMERATION_CAP,
                    x_order: Sequence[int] | None = None,
                    y_order: Sequence[int] | None = None,
                    z_order: Sequence[int] | None = None) -> list[GroupElement]:
    """Points of the discrete set Gamma with integer exponents in [-R, R]^n.

    The default factor order is the canonical basis order, so the result is
    the integer grid in second-kind coordinates, in lexicographic order of
    (z_c..z_1, l_d..l_1, m_d..m_1). Passing ``x_order`` (a permutation of
    1..d listing X indices left to right) enumerates the products with the
    X-factors rearranged, expressed in canonical coordinates; ``y_order`` and
    ``z_order`` do the same for the other blocks.
    """
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    count = (2 * radius + 1) ** spec.n
    if count > cap:
        raise OverflowError(f"enumeration of {count} elements exceeds cap {cap}")
    z_order = list(z_order) if z_order is not None else list(range(spec.c, 0, -1))
    y_order = list(y_order) if y_order is not None else list(range(spec.d, 0, -1))
    x_order = list(x_order) if x_order is not None else list(range(spec.d, 0, -1))
    for order, size in ((z_order, spec.c), (y_order, spec.d), (x_order, spec.d)):
        if sorted(order) != list(range(1, size + 1)):
            raise ValueError(f"not a permutation of 1..{size}: {order}")
    canonical = (z_order == list(range(spec.c, 0, -1)) and y_order == list(range(spec.d, 0, -1))
                 and x_order == list(range(spec.d, 0, -1)))
    names = ([f"Z{k}" for k in z_order] + [f"Y{j}" for j in y_order]
             + [f"X{i}" for i in x_order])
    indices = [spec.index(nm) for nm in names]
    if not canonical and _dyadic_constants(spec):
        return _ordered_grid_batch(spec, indices, radius)
    out = []
    rng = range(-radius, radius + 1)
    for exps in itertools.product(rng, repeat=spec.n):
        if canonical:
            coords = [Fraction(0)] * spec.n
            for idx, t in zip(indices, exps):
                coords[idx] = Fraction(t)
            out.append(_from_basis_coords(spec, coords))
        else:
            out.append(ordered_product(spec, [(idx, Fraction(t)) for idx, t in zip(indices, exps)]))
    return out


def _dyadic_constants(spec: LieAlgebraSpec) -> bool:
    def dyadic(t):
        den = Fraction(t).denominator
        return den & (den - 1) == 0
    return all(dyadic(t) for table in (spec.xy, spec.xx) for row in table
               for vec in row for t in vec)


def _ordered_grid_batch(spec: LieAlgebraSpec, indices: list[int], radius: int
                        ) -> list[GroupElement]:
    """Integer-exponent ordered products evaluated with the float group law.

    With dyadic structure constants every intermediate coordinate is a dyadic
    rational of modest size, so float64 arithmetic is exact here.
    """
    import numpy as np

    exps = np.array(list(itertools.product(range(-radius, radius + 1), repeat=spec.n)),
                    dtype=float)
    count = len(exps)
    g = (np.zeros((count, spec.c)), np.zeros((count, spec.d)), np.zeros((count, spec.d)))
    for col, index in enumerate(indices):
        kind, pos = spec._role(index)
        factor = [np.zeros((count, spec.c)), np.zeros((count, spec.d)), np.zeros((count, spec.d))]
        factor["ZYX".index(kind)][:, pos] = exps[:, col]
        g = group_multiply_batch(spec, g, tuple(factor))
    z, l, m = g
    exact = {v: Fraction(v) for v in np.unique(np.concatenate([z, l, m], axis=1)).tolist()}
    return [GroupElement(tuple(exact[v] for v in zr), tuple(exact[v] for v in lr),
                         tuple(exact[v] for v in mr)) for zr, lr, mr in
            zip(z.tolist(), l.tolist(), m.tolist())]


def gamma1_enumerate(spec: LieAlgebraSpec, radius: int) -> list[GroupElement]:
    """Points of Gamma_1 = exp(Z Y) exp(Z X) with integer entries in [-R, R]."""
    zero = (Fraction(0),) * spec.c
    rng = range(-radius, radius + 1)
    out = []
    for ls in itertools.product(rng, repeat=spec.d):
        for ms in itertools.product(rng, repeat=spec.d):
            out.append(GroupElement(zero, tuple(Fraction(t) for t in reversed(ls)),
                                    tuple(Fraction(t) for t in reversed(ms))))
    return out


def _from_basis_coords(spec, coords) -> GroupElement:
    """Second-kind coordinates listed in basis order B_1..B_n -> GroupElement."""
    c, d = spec.c, spec.d
    z = tuple(coords[c - k] for k in range(1, c + 1))
    l = tuple(coords[c + d - j] for j in range(1, d + 1))
    m = tuple(coords[spec.n - i] for i in range(1, d + 1))
    return GroupElement(z, l, m)


# ---------------------------------------------------------------- batched float law

def _float_tables(spec: LieAlgebraSpec):
    import numpy as np

    xy = np.array([[[float(t) for t in spec.xy[i][j]] for j in range(spec.d)]
                   for i in range(spec.d)], dtype=float).reshape(spec.d, spec.d, spec.c)
    xx = np.array([[[float(t) for t in spec.xx[i][j]] for j in range(spec.d)]
                   for i in range(spec.d)], dtype=float).reshape(spec.d, spec.d, spec.c)
    lower = np.tril(np.ones((spec.d, spec.d)), k=-1)[:, :, None] * xx
    return xy, xx, lower


def _bilinear(a, b, table):
    """Rows of sum_ij a_i b_j table[i, j, :], as one matrix product."""
    outer = a[:, :, None] * b[:, None, :]
    return outer.reshape(len(outer), -1) @ table.reshape(-1, table.shape[2])


def _batch_correction(tables, l, m):
    xy, _, lower = tables
    return -0.5 * _bilinear(m, l, xy) + 0.5 * _bilinear(m, m, lower)


def group_multiply_batch(spec: LieAlgebraSpec, g: tuple, h: tuple) -> tuple:
    """Floating-point group law on stacked coordinates.

    ``g`` and ``h`` are (z, l, m) arrays of shapes (L, c), (L, d), (L, d),
    broadcastable against each other. Same formula as :func:`group_multiply`.
    """
    import numpy as np

    tables = _float_tables(spec)
    xy, xx, _ = tables
    gz, gl, gm = (np.atleast_2d(np.asarray(a, dtype=float)) for a in g)
    hz, hl, hm = (np.atleast_2d(np.asarray(a, dtype=float)) for a in h)
    l, m = gl + hl, gm + hm
    gl, gm, hl, hm = (np.broadcast_to(a, l.shape) for a in (gl, gm, hl, hm))
    cross = _bilinear(gm, hm, xx) + _bilinear(gm, hl, xy) - _bilinear(hm, gl, xy)
    z = (gz + hz + _batch_correction(tables, gl, gm) + _batch_correction(tables, hl, hm)
         + 0.5 * cross - _batch_correction(tables, l, m))
    return z, l, m


def group_inverse_batch(spec: LieAlgebraSpec, g: tuple) -> tuple:
    import numpy as np

    tables = _float_tables(spec)
    gz, gl, gm = (np.atleast_2d(np.asarray(a, dtype=float)) for a in g)
    return -gz - 2.0 * _batch_correction(tables, gl, gm), -gl, -gm

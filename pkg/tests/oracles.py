"""Independent reference computations used by the tests.

Nothing here imports the group law or the determinant code under test.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np
import sympy

from nilband.algebra import LieAlgebraSpec, bracket


def lie_bracket(spec: LieAlgebraSpec, u, v) -> list[Fraction]:
    """[u, v] as a full coefficient vector over B_1..B_n."""
    central = bracket(spec, u, v)
    out = [Fraction(0)] * spec.n
    for k, t in enumerate(central):
        out[spec.c - 1 - k] = t
    return out


def bch(spec, a, b) -> list[Fraction]:
    """log(exp a exp b) for a step-2 algebra: a + b + [a, b]/2."""
    br = lie_bracket(spec, a, b)
    return [x + y + w / 2 for x, y, w in zip(a, b, br)]


def first_kind(spec, g) -> list[Fraction]:
    """Fold the ordered exponential product B_1..B_n into one exponent."""
    coords = [Fraction(0)] * spec.n
    for k in range(1, spec.c + 1):
        coords[spec.index(f"Z{k}")] = Fraction(g.z[k - 1])
    for j in range(1, spec.d + 1):
        coords[spec.index(f"Y{j}")] = Fraction(g.l[j - 1])
    for i in range(1, spec.d + 1):
        coords[spec.index(f"X{i}")] = Fraction(g.m[i - 1])
    acc = [Fraction(0)] * spec.n
    for a in range(spec.n):
        step = [Fraction(0)] * spec.n
        step[a] = coords[a]
        acc = bch(spec, acc, step)
    return acc


def symbolic_det_S(spec):
    """det S through sympy, as an expanded expression in l1..lc."""
    lam = sympy.symbols(f"l1:{spec.c + 1}")
    mat = sympy.Matrix(spec.d, spec.d, lambda i, j: sum(
        sympy.Rational(t.numerator, t.denominator) * lam[k]
        for k, t in enumerate(spec.xy[i][j])))
    return sympy.expand(mat.det()), lam


def fraction_det(mat) -> Fraction:
    """Exact determinant by Gaussian elimination over the rationals."""
    m = [list(map(Fraction, row)) for row in mat]
    n, det = len(m), Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        det *= m[col][col]
        for r in range(col + 1, n):
            f = m[r][col] / m[col][col]
            m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return det


def riemann_inner(a: np.ndarray, b: np.ndarray, h: float, d: int) -> complex:
    return complex(np.sum(a * np.conj(b)) * h ** d)


def heisenberg_sinc_energy(values: np.ndarray, axis: np.ndarray, h: float, lam: float,
                           L: int, k_range=range(-4, 5)) -> float:
    """sum_{k, |l| <= L} |<f, M_{-lam l} T_k phi>|^2 for the d = 1 window
    phi = |lam|^{1/2} chi_[-1/2,1/2), with f piecewise constant on cells of
    width h. Each cell integral is computed in closed form."""
    ls = np.arange(-L, L + 1)
    xi = -lam * ls
    total = 0.0
    for k in k_range:
        cell = (axis >= k - 0.5) & (axis < k + 0.5)
        if not np.any(values[cell]):
            continue
        kern = h * np.sinc(xi[:, None] * h) * np.exp(-2j * np.pi * xi[:, None]
                                                      * axis[cell][None, :])
        coef = np.sqrt(abs(lam)) * (kern @ values[cell])
        total += float(np.sum(np.abs(coef) ** 2))
    return total

"""Exact sparse polynomials in the central variables lambda_1..lambda_c."""
from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Sequence

ZERO = "zero"
NOT_HOMOGENEOUS = "not homogeneous"


class CentralPolynomial:
    """Polynomial with rational coefficients stored as {exponent tuple: Fraction}."""

    __slots__ = ("nvars", "_terms")

    def __init__(self, nvars: int, terms: Mapping[tuple, object] | None = None):
        self.nvars = nvars
        clean = {}
        for exps, coef in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != nvars or any(e < 0 for e in exps):
                raise ValueError(f"bad exponent {exps} for {nvars} variables")
            coef = Fraction(coef)
            if coef:
                clean[exps] = clean.get(exps, Fraction(0)) + coef
                if not clean[exps]:
                    del clean[exps]
        self._terms = dict(sorted(clean.items(), key=lambda kv: _grlex_key(kv[0])))

    # construction --------------------------------------------------------
    @classmethod
    def constant(cls, nvars: int, value) -> "CentralPolynomial":
        return cls(nvars, {(0,) * nvars: value})

    @classmethod
    def linear(cls, coeffs: Sequence) -> "CentralPolynomial":
        """The linear form sum_k coeffs[k] lambda_{k+1}."""
        nv = len(coeffs)
        return cls(nv, {tuple(int(i == k) for i in range(nv)): c for k, c in enumerate(coeffs)})

    # access ----------------------------------------------------------------
    @property
    def terms(self) -> dict:
        return dict(self._terms)

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self._terms), default=-1)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CentralPolynomial):
            return NotImplemented
        return self.nvars == other.nvars and self._terms == other._terms

    def __hash__(self):
        return hash((self.nvars, tuple(self._terms.items())))

    def __bool__(self) -> bool:
        return bool(self._terms)

    # arithmetic ------------------------------------------------------------
    def _check(self, other):
        if isinstance(other, CentralPolynomial):
            if other.nvars != self.nvars:
                raise ValueError("variable count mismatch")
            return other
        return CentralPolynomial.constant(self.nvars, other)

    def __add__(self, other):
        other = self._check(other)
        out = dict(self._terms)
        for e, c in other._terms.items():
            out[e] = out.get(e, Fraction(0)) + c
        return CentralPolynomial(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return CentralPolynomial(self.nvars, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return self._check(other) - self

    def __mul__(self, other):
        other = self._check(other)
        out: dict = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, Fraction(0)) + c1 * c2
        return CentralPolynomial(self.nvars, out)

    __rmul__ = __mul__

    # evaluation ------------------------------------------------------------
    def __call__(self, lam):
        return evaluate(self, lam)

    def __str__(self) -> str:
        return format_poly(self)

    def __repr__(self) -> str:
        return f"CentralPolynomial({self.nvars}, {format_poly(self)!r})"


def _grlex_key(exps: tuple) -> tuple:
    # descending total degree, then descending lexicographic exponents
    return (-sum(exps), tuple(-e for e in exps))


def format_poly(p: CentralPolynomial, var: str = "λ") -> str:
    """Canonical text form, e.g. ``λ1^2 - λ2^2`` or ``-3·λ1^2·λ2 - λ2^3``."""
    if not p._terms:
        return "0"
    parts = []
    for exps, coef in p._terms.items():
        factors = []
        for k, e in enumerate(exps):
            if e == 1:
                factors.append(f"{var}{k + 1}")
            elif e > 1:
                factors.append(f"{var}{k + 1}^{e}")
        mag = abs(coef)
        if not factors:
            body = str(mag)
        elif mag == 1:
            body = "·".join(factors)
        else:
            body = "·".join([str(mag)] + factors)
        sign = "-" if coef < 0 else "+"
        parts.append((sign, body))
    first_sign, first = parts[0]
    text = ("-" if first_sign == "-" else "") + first
    for sign, body in parts[1:]:
        text += f" {sign} {body}"
    return text


def evaluate(p: CentralPolynomial, lam: Sequence):
    """Evaluate p at lam.

    Rational inputs give an exact ``Fraction``; floating inputs give a float.
    Nested Horner scheme in the first variable with recursion on the rest.
    """
    if len(lam) != p.nvars:
        raise ValueError(f"expected {p.nvars} values, got {len(lam)}")
    exact = all(isinstance(x, (int, Fraction)) for x in lam)
    vals = [Fraction(x) for x in lam] if exact else [float(x) for x in lam]
    result = _horner(list(p._terms.items()), vals, 0, exact)
    return result if exact else float(result)


def _horner(terms, vals, var, exact):
    zero = Fraction(0) if exact else 0.0
    if not terms:
        return zero
    if var == len(vals):
        total = zero
        for _, c in terms:
            total += c if exact else float(c)
        return total
    groups: dict = {}
    for exps, c in terms:
        groups.setdefault(exps[var], []).append((exps, c))
    top = max(groups)
    acc = zero
    x = vals[var]
    for power in range(top, -1, -1):
        acc = acc * x + _horner(groups.get(power, []), vals, var + 1, exact)
    return acc


def homogeneity_degree(p: CentralPolynomial):
    """Common total degree of all terms, ``ZERO`` or ``NOT_HOMOGENEOUS``."""
    degrees = {sum(e) for e in p._terms}
    if not degrees:
        return ZERO
    if len(degrees) > 1:
        return NOT_HOMOGENEOUS
    return degrees.pop()


def is_nontrivial(p: CentralPolynomial) -> bool:
    return bool(p._terms)


def det_of_central_matrix(matrix: Sequence[Sequence[Sequence]], nvars: int | None = None
                          ) -> CentralPolynomial:
    """Determinant of a square matrix of linear forms, by cofactor expansion.

    Each entry is a coefficient vector over Z_1..Z_c read as the linear form
    sum_k v[k] lambda_{k+1}. Minors are memoized by their column set.
    """
    size = len(matrix)
    if any(len(row) != size for row in matrix):
        raise ValueError("matrix must be square")
    if nvars is None:
        if size == 0:
            raise ValueError("nvars required for an empty matrix")
        nvars = len(matrix[0][0])
    entries = [[CentralPolynomial.linear(v) if not isinstance(v, CentralPolynomial) else v
                for v in row] for row in matrix]
    memo: dict = {}

    def minor(row: int, cols: tuple) -> CentralPolynomial:
        if row == size:
            return CentralPolynomial.constant(nvars, 1)
        if cols in memo:
            return memo[cols]
        total = CentralPolynomial(nvars)
        for pos, col in enumerate(cols):
            entry = entries[row][col]
            if not entry:
                continue
            rest = cols[:pos] + cols[pos + 1:]
            term = entry * minor(row + 1, rest)
            total = total - term if pos % 2 else total + term
        memo[cols] = total
        return total

    return minor(0, tuple(range(size)))

"""Exterior-algebra engine for characteristic-class densities.

Forms live in a single graded-commutative algebra on generators
e_1 .. e_{2n}; a FormElement stores sparse {subset: coefficient} terms and a
FormMatrix is a square matrix of even-degree elements. Curvature-style
inputs are nilpotent (no degree-0 part), so every matrix power series here
terminates; series coefficients are derived once from exact rationals.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from fractions import Fraction
from math import factorial, pi

from .errors import (
    DimensionMismatch,
    NonpositiveTime,
    NotAntisymmetric,
    ValidationError,
)

_COEFF_TOL = 1e-13


def _shuffle_sign(s1, s2) -> int:
    inv = 0
    for a in s1:
        for b in s2:
            if b < a:
                inv += 1
    return -1 if inv % 2 else 1


@dataclass(frozen=True)
class FormElement:
    """Sparse element of the exterior algebra on 2n generators."""

    dim2n: int
    terms: tuple  # ((subset, coeff), ...) with sorted subsets

    def __post_init__(self):
        if self.dim2n < 0 or self.dim2n % 2:
            raise ValidationError("generator count must be a nonnegative even integer")
        for subset, _ in self.terms:
            if list(subset) != sorted(set(subset)):
                raise ValidationError("subsets must be strictly increasing")
            if subset and (subset[0] < 1 or subset[-1] > self.dim2n):
                raise ValidationError("generator index out of range")

    # -- ring structure ----------------------------------------------------
    def __add__(self, other: "FormElement") -> "FormElement":
        if self.dim2n != other.dim2n:
            raise DimensionMismatch("mixed generator counts")
        acc = dict(self.terms)
        for subset, c in other.terms:
            acc[subset] = acc.get(subset, 0.0) + c
        return form(self.dim2n, acc)

    def __sub__(self, other: "FormElement") -> "FormElement":
        return self + (-1.0) * other

    def __mul__(self, scalar) -> "FormElement":
        return form(self.dim2n, {s: scalar * c for s, c in self.terms})

    __rmul__ = __mul__

    def coefficient(self, subset) -> complex:
        want = tuple(subset)
        for s, c in self.terms:
            if s == want:
                return c
        return 0.0

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def degrees(self):
        return sorted({len(s) for s, _ in self.terms})

    def distance(self, other: "FormElement") -> float:
        diff = self - other
        return max((abs(c) for _, c in diff.terms), default=0.0)


def form(dim2n: int, terms: dict) -> FormElement:
    kept = []
    for subset, c in terms.items():
        c = complex(c)
        if c != 0.0:
            kept.append((tuple(subset), c))
    kept.sort(key=lambda t: (len(t[0]), t[0]))
    return FormElement(dim2n, tuple(kept))


def zero_form(dim2n: int) -> FormElement:
    return form(dim2n, {})


def const_form(dim2n: int, value) -> FormElement:
    return form(dim2n, {(): value})


def basis_form(dim2n: int, subset, coeff=1.0) -> FormElement:
    return form(dim2n, {tuple(subset): coeff})


def wedge(a: FormElement, b: FormElement) -> FormElement:
    if a.dim2n != b.dim2n:
        raise DimensionMismatch("mixed generator counts")
    acc: dict = {}
    for s1, c1 in a.terms:
        set1 = set(s1)
        for s2, c2 in b.terms:
            if set1 & set(s2):
                continue
            merged = tuple(sorted(s1 + s2))
            acc[merged] = acc.get(merged, 0.0) + _shuffle_sign(s1, s2) * c1 * c2
    return form(a.dim2n, acc)


def exp_form(x: FormElement) -> FormElement:
    """exp of a form; the degree-0 part exponentiates numerically."""
    x0 = x.coefficient(())
    rest = x - const_form(x.dim2n, x0)
    result = const_form(x.dim2n, 1.0)
    power = const_form(x.dim2n, 1.0)
    k = 1
    while True:
        power = wedge(power, rest)
        if power.is_zero or k > x.dim2n:
            break
        result = result + (1.0 / factorial(k)) * power
        k += 1
    return cmath.exp(x0) * result


def top_coefficient(x: FormElement) -> complex:
    return x.coefficient(tuple(range(1, x.dim2n + 1)))


# ------------------------------------------------------------- FormMatrix

@dataclass(frozen=True)
class FormMatrix:
    """Square matrix over the subring of even-degree forms."""

    dim2n: int
    size: int
    entries: tuple  # size x size nested tuple of FormElement

    def __post_init__(self):
        if self.size < 1:
            raise ValidationError("size must be positive")
        if len(self.entries) != self.size:
            raise ValidationError("entry grid does not match size")
        for row in self.entries:
            if len(row) != self.size:
                raise ValidationError("entry grid does not match size")
            for x in row:
                if x.dim2n != self.dim2n:
                    raise DimensionMismatch("mixed generator counts")
                if any(len(s) % 2 for s, _ in x.terms):
                    raise ValidationError("matrix entries must be even-degree forms")

    def is_antisymmetric(self, tol: float = _COEFF_TOL) -> bool:
        for i in range(self.size):
            for j in range(self.size):
                if self.entries[i][j].distance(-1.0 * self.entries[j][i]) > tol:
                    return False
        return True

    def is_symmetric(self, tol: float = _COEFF_TOL) -> bool:
        for i in range(self.size):
            for j in range(i, self.size):
                if self.entries[i][j].distance(self.entries[j][i]) > tol:
                    return False
        return True

    def has_constant_part(self) -> bool:
        return any(x.coefficient(()) != 0.0 for row in self.entries for x in row)

    def scale(self, c) -> "FormMatrix":
        return FormMatrix(self.dim2n, self.size,
                          tuple(tuple(c * x for x in row) for row in self.entries))

    def matmul(self, other: "FormMatrix") -> "FormMatrix":
        if self.dim2n != other.dim2n or self.size != other.size:
            raise DimensionMismatch("matrix shapes differ")
        rows = []
        for i in range(self.size):
            row = []
            for j in range(self.size):
                acc = zero_form(self.dim2n)
                for k in range(self.size):
                    acc = acc + wedge(self.entries[i][k], other.entries[k][j])
                row.append(acc)
            rows.append(tuple(row))
        return FormMatrix(self.dim2n, self.size, tuple(rows))

    def trace(self) -> FormElement:
        acc = zero_form(self.dim2n)
        for i in range(self.size):
            acc = acc + self.entries[i][i]
        return acc

    @property
    def is_zero(self) -> bool:
        return all(x.is_zero for row in self.entries for x in row)


def form_matrix(dim2n: int, entries) -> FormMatrix:
    return FormMatrix(dim2n, len(entries), tuple(tuple(row) for row in entries))


def zero_form_matrix(dim2n: int, size: int) -> FormMatrix:
    z = zero_form(dim2n)
    return FormMatrix(dim2n, size, tuple(tuple(z for _ in range(size)) for _ in range(size)))


def form_matrix_direct_sum(a: FormMatrix, b: FormMatrix) -> FormMatrix:
    if a.dim2n != b.dim2n:
        raise DimensionMismatch("mixed generator counts")
    n = a.size + b.size
    big = [[zero_form(a.dim2n) for _ in range(n)] for _ in range(n)]
    for i in range(a.size):
        for j in range(a.size):
            big[i][j] = a.entries[i][j]
    for i in range(b.size):
        for j in range(b.size):
            big[a.size + i][a.size + j] = b.entries[i][j]
    return form_matrix(a.dim2n, big)


# ------------------------------------------------------- series machinery

def _series_coeffs(order: int):
    """Rational coefficients, in z = y^2, of (y/2)/sinh(y/2), its log, and
    (y/2)/tanh(y/2)."""
    # sinh(y/2)/(y/2) = sum_k z^k / (4^k (2k+1)!)
    s = [Fraction(1, 4**k * factorial(2 * k + 1)) for k in range(order + 1)]
    # cosh(y/2) = sum_k z^k / (4^k (2k)!)
    c = [Fraction(1, 4**k * factorial(2 * k)) for k in range(order + 1)]
    # g = 1/s by series inversion
    g = [Fraction(1)]
    for k in range(1, order + 1):
        g.append(-sum(s[j] * g[k - j] for j in range(1, k + 1)))
    # log g = log(1 + (g-1)) via powers of the (nilpotent-to-order) tail
    logg = [Fraction(0)] * (order + 1)
    gm1 = [Fraction(0)] + g[1:]
    powm = [Fraction(1)] + [Fraction(0)] * order
    for m in range(1, order + 1):
        new = [Fraction(0)] * (order + 1)
        for i, a in enumerate(powm):
            if a == 0:
                continue
            for j, b in enumerate(gm1):
                if i + j <= order:
                    new[i + j] += a * b
        powm = new
        sign = Fraction((-1) ** (m + 1), m)
        for i in range(order + 1):
            logg[i] += sign * powm[i]
    # tanh factor = cosh(y/2) * g(z)
    t = [sum(c[j] * g[k - j] for j in range(k + 1)) for k in range(order + 1)]
    return g, logg, t


def _apply_series(coeffs, z: FormMatrix) -> FormElement:
    """trace of sum_k coeffs[k] z^k (k >= 1); terminates on nilpotency."""
    acc = zero_form(z.dim2n)
    power = z
    for k in range(1, len(coeffs)):
        if power.is_zero:
            break
        acc = acc + float(coeffs[k]) * power.trace()
        if k + 1 < len(coeffs):
            power = power.matmul(z)
    return acc


def _matrix_series(coeffs, z: FormMatrix) -> FormMatrix:
    """sum_k coeffs[k] z^k including the k = 0 identity term."""
    out = zero_form_matrix(z.dim2n, z.size)
    one = const_form(z.dim2n, float(coeffs[0]))
    rows = [list(r) for r in out.entries]
    for i in range(z.size):
        rows[i][i] = one
    out = form_matrix(z.dim2n, rows)
    power = z
    for k in range(1, len(coeffs)):
        if power.is_zero:
            break
        out_rows = [list(r) for r in out.entries]
        for i in range(z.size):
            for j in range(z.size):
                out_rows[i][j] = out_rows[i][j] + float(coeffs[k]) * power.entries[i][j]
        out = form_matrix(z.dim2n, out_rows)
        if k + 1 < len(coeffs):
            power = power.matmul(z)
    return out


def _check_curvature(d: FormMatrix):
    if not d.is_antisymmetric():
        raise NotAntisymmetric("curvature matrix must be antisymmetric")
    if d.has_constant_part():
        raise ValidationError("curvature entries must be nilpotent (no degree-0 part)")


def a_hat(d: FormMatrix, r: float = 1.0, order: int = None) -> FormElement:
    """A-roof genus of the scaled curvature, via exp(0.5 tr log of the
    generating series) in the nilpotent argument z = -(rD)^2."""
    _check_curvature(d)
    rd = d.scale(r)
    z = rd.matmul(rd).scale(-1.0)
    if order is None:
        order = max(1, d.dim2n // 2)
    _, logg, _ = _series_coeffs(order)
    return exp_form(0.5 * _apply_series(logg, z))


def chern_char(l: FormMatrix, r: float = 1.0) -> FormElement:
    """trace(exp(rL)) with nilpotent even-degree entries."""
    if l.has_constant_part():
        raise ValidationError("entries must be nilpotent (no degree-0 part)")
    rl = l.scale(r)
    acc = const_form(l.dim2n, float(l.size))
    power = rl
    k = 1
    while not power.is_zero and k <= l.dim2n:
        acc = acc + (1.0 / factorial(k)) * power.trace()
        power = power.matmul(rl)
        k += 1
    return acc


def adiabatic_density(d: FormMatrix, l: FormMatrix, z_trace: float, r: float,
                      convention: str = "raw") -> complex:
    """Pointwise decoupled density: supertrace factor times the top part of
    A-hat wedge Chern character.

    convention="raw" keeps the full (2/i)^(n/2) (4 pi r)^(-n/2) prefactor
    with its principal branch (the source display leaves the branch
    undefined, so it is pinned here); convention="limit" drops the scale
    and the prefactor entirely and evaluates the bare top coefficient.
    """
    if d.dim2n != l.dim2n:
        raise DimensionMismatch("mixed generator counts")
    if convention == "limit":
        return z_trace * top_coefficient(wedge(a_hat(d, 1.0), chern_char(l, 1.0)))
    if convention != "raw":
        raise ValidationError("convention must be 'raw' or 'limit'")
    if r <= 0:
        raise NonpositiveTime("scale must be positive")
    n = d.dim2n // 2
    pref = (2.0 / 1j) ** (n / 2.0) * (4.0 * pi * r) ** (-n / 2.0)
    return z_trace * pref * top_coefficient(wedge(a_hat(d, r), chern_char(l, r)))


def mehler_kernel(d: FormMatrix, c_sym: FormMatrix, l: FormMatrix, x, r: float) -> FormElement:
    """Closed-form model heat kernel at (x, 0).

    Gaussian prefactor times A-hat(rD), the symmetric-part exponential
    exp(x^t C x / 8), the nilpotent correction of the tanh factor, and the
    traced bundle exponential.
    """
    if r <= 0:
        raise NonpositiveTime("time must be positive")
    _check_curvature(d)
    if not c_sym.is_symmetric():
        raise ValidationError("expected a symmetric matrix")
    x = [float(v) for v in x]
    dlen = len(x)
    if d.size != dlen or c_sym.size != dlen:
        raise DimensionMismatch("matrix size must match the point dimension")

    order = max(1, d.dim2n // 2)
    _, _, tanh_coeffs = _series_coeffs(order)
    rd = d.scale(r)
    z = rd.matmul(rd).scale(-1.0)
    tfac = _matrix_series(tanh_coeffs, z)  # identity + nilpotent part

    def quad(m: FormMatrix) -> FormElement:
        acc = zero_form(d.dim2n)
        for i in range(dlen):
            for j in range(dlen):
                if x[i] != 0.0 and x[j] != 0.0:
                    acc = acc + (x[i] * x[j]) * m.entries[i][j]
        return acc

    xx = sum(v * v for v in x)
    tplus = quad(tfac) - const_form(d.dim2n, xx)  # strips the identity part
    scalar = (4.0 * pi * r) ** (-dlen / 2.0) * cmath.exp(-xx / (4.0 * r))
    out = wedge(a_hat(d, r), exp_form((1.0 / 8.0) * quad(c_sym)))
    out = wedge(out, exp_form((-1.0 / (4.0 * r)) * tplus))
    out = wedge(out, chern_char(l, r))
    return scalar * out

"""Finite cochain complexes of Hilbertian modules.

Holds the graded modules and differentials (d^2 = 0), one-parameter metric
families A_q(u), the u-dependent Laplacians and their Hodge decomposition.
Conventions: the base adjoint X* is the blockwise conjugate transpose, the
u-adjoint is X^{*u} = A_dom(u)^{-1} X* A_cod(u), and

    box_q(u) = d_q^{*u} d_q + d_{q-1} d_{q-1}^{*u}.

Spectra are extracted from the conjugated operator A^{1/2} box A^{-1/2},
which is Hermitian in the base inner product.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._linalg import column_space, gram_schmidt, jacobi_eigh
from .errors import (
    DegreeOutOfRange,
    MissingDerivative,
    NotPositive,
    NotSelfAdjoint,
    ShapeMismatch,
    ValidationError,
)
from .vn_core import (
    KERNEL_TOL,
    CommutantOp,
    Module,
    SpectralDensity,
    canonical_trace,
    identity_op,
    spectral_density,
)


@dataclass(frozen=True)
class FiniteComplex:
    degrees: tuple          # Modules Omega^0 .. Omega^n
    diffs: tuple            # d_q: Omega^q -> Omega^{q+1}, length n
    p: int = 0              # bookkeeping tag, never interpreted

    def __post_init__(self):
        if not self.degrees:
            raise ValidationError("complex needs at least one degree")
        if len(self.diffs) != len(self.degrees) - 1:
            raise ShapeMismatch("need one differential per adjacent degree pair")
        for q, d in enumerate(self.diffs):
            if d.domain != self.degrees[q] or d.codomain != self.degrees[q + 1]:
                raise ShapeMismatch("differential %d does not match the grading" % q)

    @property
    def algebra(self):
        return self.degrees[0].algebra

    @property
    def top(self) -> int:
        return len(self.degrees) - 1


def finite_complex(degrees, diffs, p: int = 0) -> FiniteComplex:
    return FiniteComplex(tuple(degrees), tuple(diffs), p)


@dataclass(frozen=True)
class ValidationReport:
    square_norms: tuple     # ||d_{q+1} d_q|| per q
    diff_norm: float
    ok: bool

    @property
    def max_violation(self) -> float:
        return max(self.square_norms) if self.square_norms else 0.0


def validate_complex(c: FiniteComplex) -> ValidationReport:
    """Check d^2 = 0; returns the violation norms instead of raising."""
    norms = []
    dnorm = max([d.norm() for d in c.diffs], default=0.0)
    for q in range(len(c.diffs) - 1):
        norms.append((c.diffs[q + 1] @ c.diffs[q]).norm())
    tol = 1e-10 * max(dnorm * dnorm, 1e-300)
    ok = all(v <= tol for v in norms) if norms else True
    return ValidationReport(tuple(norms), dnorm, ok)


def require_valid(c: FiniteComplex):
    rep = validate_complex(c)
    if not rep.ok:
        raise ValidationError(
            "complex fails d^2 = 0 (max violation %.3e)" % rep.max_violation
        )
    return rep


# -- metric families ----------------------------------------------------------


class ExpMetricFamily:
    """A_q(u) = exp(u * B_q) for fixed self-adjoint generators B_q.

    The generators are eigendecomposed once; every query A(u), A(u)^{-1},
    A(u)^{1/2} comes from the same spectral data, so positivity is exact
    and Z_u = A_u^{-1} dA_u/du equals B_q at every u.
    """

    def __init__(self, generators):
        self.generators = tuple(generators)
        self._eig = []
        for b in self.generators:
            if not b.is_self_adjoint(1e-12):
                raise NotSelfAdjoint("metric generator must be self-adjoint")
            self._eig.append([jacobi_eigh(blk) for blk in b.blocks])

    @property
    def modules(self):
        return tuple(b.domain for b in self.generators)

    def _check_degree(self, q: int):
        if not 0 <= q < len(self.generators):
            raise DegreeOutOfRange("degree %d outside family range" % q)

    def _apply(self, q: int, fn) -> CommutantOp:
        self._check_degree(q)
        m = self.generators[q].domain
        blocks = []
        for lam, v in self._eig[q]:
            w = (v * fn(lam)) @ v.conj().T
            blocks.append(0.5 * (w + w.conj().T))
        return CommutantOp(m, m, blocks)

    def a(self, q: int, u: float) -> CommutantOp:
        return self._apply(q, lambda lam: np.exp(u * lam))

    def a_inv(self, q: int, u: float) -> CommutantOp:
        return self._apply(q, lambda lam: np.exp(-u * lam))

    def a_sqrt(self, q: int, u: float) -> CommutantOp:
        return self._apply(q, lambda lam: np.exp(0.5 * u * lam))

    def a_inv_sqrt(self, q: int, u: float) -> CommutantOp:
        return self._apply(q, lambda lam: np.exp(-0.5 * u * lam))

    def z(self, q: int, u: float) -> CommutantOp:
        self._check_degree(q)
        return self.generators[q]


class CallableMetricFamily:
    """Metric family given as a callable (q, u) -> positive CommutantOp.

    The derivative callable is optional; operations needing Z_u raise
    MissingDerivative without it. A(0) must be the identity.
    """

    def __init__(self, modules, a_fn, da_fn=None):
        self.modules_ = tuple(modules)
        self.a_fn = a_fn
        self.da_fn = da_fn
        self._cache = {}
        for q, m in enumerate(self.modules_):
            if (self.a_fn(q, 0.0) - identity_op(m)).norm() > 1e-12:
                raise ValidationError("metric family must satisfy A(0) = I")

    @property
    def modules(self):
        return self.modules_

    def _check_degree(self, q: int):
        if not 0 <= q < len(self.modules_):
            raise DegreeOutOfRange("degree %d outside family range" % q)

    def _eig(self, q: int, u: float):
        key = (q, float(u))
        if key not in self._cache:
            self._check_degree(q)
            a = self.a_fn(q, u)
            if not a.is_self_adjoint(1e-10):
                raise NotSelfAdjoint("A(u) must be self-adjoint")
            eigs = []
            for blk in a.blocks:
                lam, v = jacobi_eigh(blk)
                if blk.size and lam[0] <= 0:
                    raise NotPositive("A(u) must be positive definite")
                eigs.append((lam, v))
            self._cache[key] = (a.domain, eigs)
        return self._cache[key]

    def _apply(self, q, u, fn) -> CommutantOp:
        m, eigs = self._eig(q, u)
        blocks = []
        for lam, v in eigs:
            w = (v * fn(lam)) @ v.conj().T
            blocks.append(0.5 * (w + w.conj().T))
        return CommutantOp(m, m, blocks)

    def a(self, q, u):
        return self._apply(q, u, lambda lam: lam)

    def a_inv(self, q, u):
        return self._apply(q, u, lambda lam: 1.0 / lam)

    def a_sqrt(self, q, u):
        return self._apply(q, u, np.sqrt)

    def a_inv_sqrt(self, q, u):
        return self._apply(q, u, lambda lam: 1.0 / np.sqrt(lam))

    def z(self, q, u):
        if self.da_fn is None:
            raise MissingDerivative("metric family has no derivative callable")
        return self.a_inv(q, u) @ self.da_fn(q, u)


def constant_family(degrees) -> ExpMetricFamily:
    """A(u) = I for all u: exp family with zero generators."""
    gens = []
    for m in degrees:
        gens.append(CommutantOp(m, m, [np.zeros((k, k), dtype=complex) for k in m.mults]))
    return ExpMetricFamily(gens)


def conformal_family(degrees, scale: float) -> ExpMetricFamily:
    """A_q(u) = e^{scale * u} I on every degree; conjugation cancels in box."""
    gens = [scale * identity_op(m) for m in degrees]
    return ExpMetricFamily(gens)


def _check_family(c: FiniteComplex, mf):
    if tuple(mf.modules) != tuple(c.degrees):
        raise ShapeMismatch("metric family degrees do not match the complex")


def direct_sum_complex(c1: FiniteComplex, c2: FiniteComplex) -> FiniteComplex:
    if len(c1.degrees) != len(c2.degrees):
        raise ShapeMismatch("direct sum needs equal degree ranges")
    from .vn_core import direct_sum_module, direct_sum_op

    degrees = tuple(direct_sum_module(a, b) for a, b in zip(c1.degrees, c2.degrees))
    diffs = tuple(direct_sum_op(a, b) for a, b in zip(c1.diffs, c2.diffs))
    return FiniteComplex(degrees, diffs, c1.p)


def direct_sum_exp_family(f1: ExpMetricFamily, f2: ExpMetricFamily) -> ExpMetricFamily:
    from .vn_core import direct_sum_op

    return ExpMetricFamily(
        [direct_sum_op(a, b) for a, b in zip(f1.generators, f2.generators)]
    )


# -- Laplacians and Hodge theory ----------------------------------------------


def u_adjoint(c: FiniteComplex, mf, q: int, u: float) -> CommutantOp:
    """d_q^{*u} = A_q(u)^{-1} d_q^* A_{q+1}(u), a map Omega^{q+1} -> Omega^q."""
    if not 0 <= q < len(c.diffs):
        raise DegreeOutOfRange("no differential at degree %d" % q)
    return mf.a_inv(q, u) @ c.diffs[q].adjoint() @ mf.a(q + 1, u)


def laplacian(c: FiniteComplex, mf, q: int, u: float) -> CommutantOp:
    _check_family(c, mf)
    if not 0 <= q <= c.top:
        raise DegreeOutOfRange("degree %d outside 0..%d" % (q, c.top))
    box = None
    if q < c.top:
        box = u_adjoint(c, mf, q, u) @ c.diffs[q]
    if q > 0:
        down = c.diffs[q - 1] @ u_adjoint(c, mf, q - 1, u)
        box = down if box is None else box + down
    if box is None:
        box = 0.0 * identity_op(c.degrees[q])
    return box


def _symmetrized_laplacian(c, mf, q, u) -> CommutantOp:
    """A^{1/2} box A^{-1/2}: Hermitian with the same spectrum as box."""
    w = mf.a_sqrt(q, u)
    wi = mf.a_inv_sqrt(q, u)
    s = w @ laplacian(c, mf, q, u) @ wi
    blocks = [0.5 * (b + b.conj().T) for b in s.blocks]
    return CommutantOp(s.domain, s.codomain, blocks)


def laplacian_density(c: FiniteComplex, mf, q: int, u: float) -> SpectralDensity:
    """tau-weighted spectrum of box_q(u)."""
    return spectral_density(_symmetrized_laplacian(c, mf, q, u))


def harmonic_basis(c: FiniteComplex, mf, q: int, u: float, kernel_tol: float = KERNEL_TOL):
    """Per-factor u-orthonormal bases of ker box_q(u).

    Kernel eigenvectors of the symmetrized Laplacian are pulled back by
    A^{-1/2} and orthonormalized in the u-inner product <A_u x, y>.
    """
    _check_family(c, mf)
    s = _symmetrized_laplacian(c, mf, q, u)
    wi = mf.a_inv_sqrt(q, u)
    au = mf.a(q, u)
    out = []
    for blk, wiblk, aublk in zip(s.blocks, wi.blocks, au.blocks):
        k = blk.shape[0]
        if k == 0:
            out.append(np.zeros((0, 0), dtype=complex))
            continue
        lam, v = jacobi_eigh(blk)
        cut = kernel_tol * max(lam[-1] if len(lam) else 0.0, 1.0)
        ker = v[:, lam < cut]
        if ker.shape[1] == 0:
            out.append(np.zeros((k, 0), dtype=complex))
            continue
        x = wiblk @ ker
        out.append(gram_schmidt(x, weight=aublk))
    return out


def hodge_projectors(c: FiniteComplex, mf, q: int, u: float, kernel_tol: float = KERNEL_TOL):
    """(P_harm, P_exact, P_coexact): u-orthogonal idempotents summing to I."""
    _check_family(c, mf)
    if not 0 <= q <= c.top:
        raise DegreeOutOfRange("degree %d outside 0..%d" % (q, c.top))
    m = c.degrees[q]
    au = mf.a(q, u)

    def proj_from_columns(cols_per_factor):
        blocks = []
        for cols, aublk in zip(cols_per_factor, au.blocks):
            k = aublk.shape[0]
            if cols.shape[1] == 0:
                blocks.append(np.zeros((k, k), dtype=complex))
                continue
            y = gram_schmidt(cols, weight=aublk)
            blocks.append(y @ y.conj().T @ aublk)
        return CommutantOp(m, m, blocks)

    p_harm = proj_from_columns(harmonic_basis(c, mf, q, u, kernel_tol))
    if q > 0:
        p_exact = proj_from_columns([column_space(b) for b in c.diffs[q - 1].blocks])
    else:
        p_exact = 0.0 * identity_op(m)
    if q < c.top:
        coex = u_adjoint(c, mf, q, u)
        p_coexact = proj_from_columns([column_space(b) for b in coex.blocks])
    else:
        p_coexact = 0.0 * identity_op(m)
    return p_harm, p_exact, p_coexact


def betti(c: FiniteComplex, mf, q: int, u: float, kernel_tol: float = KERNEL_TOL) -> float:
    """b_q = Tr_tau of the harmonic projector; metric-independent."""
    basis = harmonic_basis(c, mf, q, u, kernel_tol)
    w = c.algebra.weights
    return float(sum(wi * cols.shape[1] for wi, cols in zip(w, basis)))


def harmonic_projector_trace(c, mf, q, u, z: CommutantOp, kernel_tol: float = KERNEL_TOL) -> float:
    """Re Tr_tau(Z P_harm) without forming the full projector."""
    basis = harmonic_basis(c, mf, q, u, kernel_tol)
    au = mf.a(q, u)
    w = c.algebra.weights
    acc = 0.0
    for wi, cols, zblk, aublk in zip(w, basis, z.blocks, au.blocks):
        if cols.shape[1] == 0:
            continue
        # Tr(Z X X^H A) with u-orthonormal columns X
        acc += wi * np.trace(cols.conj().T @ aublk @ zblk @ cols).real
    return float(acc)

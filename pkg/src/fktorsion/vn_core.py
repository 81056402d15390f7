"""Finite von Neumann algebra model.

An algebra is a direct sum of matrix factors M_{n_i} with trace weights w_i,
normalized so that sum(w_i * n_i) = 1. A module is described by per-factor
multiplicities k_i; operators in the commutant are per-factor k'_i x k_i
blocks. The canonical trace, tau-dimension, spectral density and the
Fuglede-Kadison determinant are all exact finite sums in this model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._linalg import jacobi_eigh, smallest_singular_value
from .errors import (
    EmptyFactorList,
    NonNormalizedTrace,
    NotAProjection,
    NotInvertible,
    NotPositive,
    NotSelfAdjoint,
    PathNotAtIdentity,
    ShapeMismatch,
    SingularSample,
    ValidationError,
)

TRACE_TOL = 1e-12
KERNEL_TOL = 1e-10
MERGE_TOL = 1e-9


@dataclass(frozen=True)
class Algebra:
    factors: tuple  # ((n_i, w_i), ...)

    @property
    def num_factors(self) -> int:
        return len(self.factors)

    @property
    def sizes(self):
        return tuple(n for n, _ in self.factors)

    @property
    def weights(self):
        return tuple(w for _, w in self.factors)


def make_algebra(factors, auto_normalize: bool = False) -> Algebra:
    """Build an Algebra from (size, weight) pairs.

    The trace normalization sum(w_i * n_i) = 1 is enforced to 1e-12;
    with auto_normalize the weights are rescaled to make it hold exactly.
    """
    factors = [(int(n), float(w)) for n, w in factors]
    if not factors:
        raise EmptyFactorList("algebra needs at least one factor")
    for n, w in factors:
        if n < 1:
            raise ValidationError("factor size must be a positive integer, got %r" % n)
        if w <= 0:
            raise ValidationError("trace weight must be positive, got %r" % w)
    total = sum(w * n for n, w in factors)
    if abs(total - 1.0) > TRACE_TOL:
        if not auto_normalize:
            raise NonNormalizedTrace(
                "sum w_i * n_i = %.17g, expected 1 (pass auto_normalize=True to rescale)"
                % total
            )
        factors = [(n, w / total) for n, w in factors]
    return Algebra(tuple(factors))


@dataclass(frozen=True)
class Module:
    algebra: Algebra
    mults: tuple

    def __post_init__(self):
        if len(self.mults) != self.algebra.num_factors:
            raise ShapeMismatch(
                "module needs one multiplicity per factor (%d != %d)"
                % (len(self.mults), self.algebra.num_factors)
            )
        for k in self.mults:
            if not isinstance(k, (int, np.integer)) or k < 0:
                raise ValidationError("multiplicity must be a nonnegative integer")

    @property
    def is_zero(self) -> bool:
        return all(k == 0 for k in self.mults)


def module(algebra: Algebra, mults) -> Module:
    return Module(algebra, tuple(int(k) for k in mults))


def l2_module(algebra: Algebra) -> Module:
    """The module modeling l2(A): multiplicity n_i in every factor."""
    return Module(algebra, algebra.sizes)


def direct_sum_module(m: Module, n: Module) -> Module:
    if m.algebra != n.algebra:
        raise ShapeMismatch("direct sum needs modules over the same algebra")
    return Module(m.algebra, tuple(a + b for a, b in zip(m.mults, n.mults)))


class CommutantOp:
    """Morphism of modules over one algebra: a k'_i x k_i block per factor."""

    __slots__ = ("domain", "codomain", "blocks")

    def __init__(self, domain: Module, codomain: Module, blocks):
        if domain.algebra != codomain.algebra:
            raise ShapeMismatch("domain and codomain live over different algebras")
        blocks = tuple(np.asarray(b, dtype=complex) for b in blocks)
        if len(blocks) != domain.algebra.num_factors:
            raise ShapeMismatch("one block per factor required")
        for i, b in enumerate(blocks):
            want = (codomain.mults[i], domain.mults[i])
            if b.shape != want:
                raise ShapeMismatch(
                    "block %d has shape %r, expected %r" % (i, b.shape, want)
                )
        self.domain = domain
        self.codomain = codomain
        self.blocks = blocks

    # -- algebra of operators ------------------------------------------------

    @property
    def is_endomorphism(self) -> bool:
        return self.domain == self.codomain

    def adjoint(self) -> "CommutantOp":
        return CommutantOp(
            self.codomain, self.domain, [b.conj().T for b in self.blocks]
        )

    def __matmul__(self, other: "CommutantOp") -> "CommutantOp":
        if other.codomain != self.domain:
            raise ShapeMismatch("composition shape mismatch")
        return CommutantOp(
            other.domain,
            self.codomain,
            [a @ b for a, b in zip(self.blocks, other.blocks)],
        )

    def __add__(self, other: "CommutantOp") -> "CommutantOp":
        if other.domain != self.domain or other.codomain != self.codomain:
            raise ShapeMismatch("sum shape mismatch")
        return CommutantOp(
            self.domain,
            self.codomain,
            [a + b for a, b in zip(self.blocks, other.blocks)],
        )

    def __sub__(self, other: "CommutantOp") -> "CommutantOp":
        return self + (-1.0) * other

    def __mul__(self, scalar) -> "CommutantOp":
        return CommutantOp(
            self.domain, self.codomain, [scalar * b for b in self.blocks]
        )

    __rmul__ = __mul__

    def norm(self) -> float:
        return float(
            np.sqrt(sum(np.linalg.norm(b) ** 2 for b in self.blocks))
        )

    def is_self_adjoint(self, tol: float = 1e-12) -> bool:
        if not self.is_endomorphism:
            return False
        scale = max(self.norm(), 1.0)
        return all(
            np.linalg.norm(b - b.conj().T) <= tol * scale for b in self.blocks
        )

    def inverse(self) -> "CommutantOp":
        inv = []
        for i, b in enumerate(self.blocks):
            if b.shape[0] != b.shape[1]:
                raise NotInvertible("block %d is not square" % i)
            if b.size:
                smin = smallest_singular_value(b)
                smax = float(np.linalg.norm(b, 2))
                if smin <= 1e-13 * max(smax, 1.0):
                    raise NotInvertible("block %d is numerically singular" % i)
                inv.append(np.linalg.inv(b))
            else:
                inv.append(b.copy())
        return CommutantOp(self.codomain, self.domain, inv)


def op(domain: Module, codomain: Module, blocks) -> CommutantOp:
    return CommutantOp(domain, codomain, blocks)


def identity_op(m: Module) -> CommutantOp:
    return CommutantOp(m, m, [np.eye(k, dtype=complex) for k in m.mults])


def zero_op(domain: Module, codomain: Module) -> CommutantOp:
    return CommutantOp(
        domain,
        codomain,
        [np.zeros((kc, kd), dtype=complex) for kc, kd in zip(codomain.mults, domain.mults)],
    )


def direct_sum_op(a: CommutantOp, b: CommutantOp) -> CommutantOp:
    """Block-diagonal sum acting on the direct sums of domains/codomains."""
    dom = direct_sum_module(a.domain, b.domain)
    cod = direct_sum_module(a.codomain, b.codomain)
    blocks = []
    for ba, bb in zip(a.blocks, b.blocks):
        blk = np.zeros((ba.shape[0] + bb.shape[0], ba.shape[1] + bb.shape[1]), dtype=complex)
        blk[: ba.shape[0], : ba.shape[1]] = ba
        blk[ba.shape[0] :, ba.shape[1] :] = bb
        blocks.append(blk)
    return CommutantOp(dom, cod, blocks)


def from_blocks2x2(tl: CommutantOp, tr: CommutantOp, bl: CommutantOp, br: CommutantOp) -> CommutantOp:
    """Assemble [[tl, tr], [bl, br]] on (dom tl + dom tr) -> (cod tl + cod bl)."""
    if tl.domain != bl.domain or tr.domain != br.domain:
        raise ShapeMismatch("column domains disagree")
    if tl.codomain != tr.codomain or bl.codomain != br.codomain:
        raise ShapeMismatch("row codomains disagree")
    dom = direct_sum_module(tl.domain, tr.domain)
    cod = direct_sum_module(tl.codomain, bl.codomain)
    blocks = []
    for a, b, c, d in zip(tl.blocks, tr.blocks, bl.blocks, br.blocks):
        blocks.append(np.block([[a, b], [c, d]]))
    return CommutantOp(dom, cod, blocks)


# -- trace, dimension, spectrum ----------------------------------------------


def canonical_trace(t: CommutantOp) -> complex:
    """Tr_tau(T) = sum_i w_i * trace(T_i); defined for endomorphisms only."""
    if not t.is_endomorphism:
        raise ShapeMismatch("trace needs an endomorphism")
    w = t.domain.algebra.weights
    return complex(sum(wi * np.trace(b) for wi, b in zip(w, t.blocks)))


def tau_dimension(x) -> float:
    """tau-dimension of a Module, or Tr_tau of a projection."""
    if isinstance(x, Module):
        return float(sum(w * k for (n, w), k in zip(x.algebra.factors, x.mults)))
    if not isinstance(x, CommutantOp):
        raise ValidationError("expected a Module or a CommutantOp projection")
    if not x.is_endomorphism:
        raise NotAProjection("projection must be an endomorphism")
    scale = max(x.norm(), 1.0)
    idem = (x @ x - x).norm()
    sa = (x - x.adjoint()).norm()
    if idem > 1e-10 * scale or sa > 1e-10 * scale:
        raise NotAProjection(
            "not a self-adjoint idempotent (|P^2-P|=%.2e, |P-P*|=%.2e)" % (idem, sa)
        )
    return float(canonical_trace(x).real)


@dataclass(frozen=True)
class SpectralDensity:
    """tau-weighted eigenvalue steps of a self-adjoint operator, ascending."""

    steps: tuple  # ((lambda_j, jump_j), ...)

    @property
    def total(self) -> float:
        return float(sum(j for _, j in self.steps))

    def counting(self, lam: float) -> float:
        return float(sum(j for l, j in self.steps if l <= lam))


def spectral_density(a: CommutantOp, merge_tol: float = MERGE_TOL) -> SpectralDensity:
    """Eigenvalues of a self-adjoint endomorphism with tau-weight jumps.

    Each eigenvalue of block i carries jump w_i; eigenvalues closer than
    merge_tol * max|lambda| are merged into a single step.
    """
    if not a.is_endomorphism:
        raise NotSelfAdjoint("spectral density needs an endomorphism")
    scale = max(a.norm(), 1.0)
    pairs = []
    for (n, w), b in zip(a.domain.algebra.factors, a.blocks):
        if b.size == 0:
            continue
        if np.linalg.norm(b - b.conj().T) > 1e-12 * scale:
            raise NotSelfAdjoint("block is not self-adjoint within 1e-12")
        lam, _ = jacobi_eigh(b)
        pairs.extend((float(l), w) for l in lam)
    if not pairs:
        return SpectralDensity(())
    pairs.sort(key=lambda p: p[0])
    lmax = max(abs(l) for l, _ in pairs)
    tol = merge_tol * max(lmax, 0.0)
    merged = []
    for l, j in pairs:
        if merged and l - merged[-1][0] <= tol:
            # jump-weighted running mean keeps the merged eigenvalue stable
            lt, jt = merged[-1]
            merged[-1] = ((lt * jt + l * j) / (jt + j), jt + j)
        else:
            merged.append((l, j))
    return SpectralDensity(tuple((l, j) for l, j in merged))


# -- Fuglede-Kadison determinant ---------------------------------------------


def fk_determinant(a: CommutantOp, kernel_tol: float = KERNEL_TOL):
    """Det_tau of a positive semidefinite endomorphism.

    Returns (value, d_class). The value is exp of the tau-weighted log over
    the spectrum above the kernel cut lambda <= kernel_tol * max(lambda_max, 1);
    d_class is always True here since the spectral integral is a finite sum.
    """
    dens = spectral_density(a)
    if not dens.steps:
        return 1.0, True
    lam_max = max(l for l, _ in dens.steps)
    if min(l for l, _ in dens.steps) < -1e-10 * max(lam_max, 1.0):
        raise NotPositive("operator has a negative eigenvalue")
    cut = kernel_tol * max(lam_max, 1.0)
    log_det = sum(j * np.log(l) for l, j in dens.steps if l > cut)
    return float(np.exp(log_det)), True


def fk_determinant_invertible(f: CommutantOp, kernel_tol: float = KERNEL_TOL) -> float:
    """Det_tau(|f|) = Det_tau(f* f)^(1/2) for an invertible morphism."""
    for i, b in enumerate(f.blocks):
        if b.shape[0] != b.shape[1]:
            raise NotInvertible("block %d is not square" % i)
        if b.size:
            smin = smallest_singular_value(b)
            smax = float(np.linalg.norm(b, 2))
            if smin <= 1e-13 * max(smax, 1.0):
                raise NotInvertible("block %d is numerically singular" % i)
    val, _ = fk_determinant(f.adjoint() @ f, kernel_tol)
    return float(np.sqrt(val))


def _path_samples(path, n_samples):
    if callable(path):
        if n_samples < 5 or (n_samples - 1) % 4:
            raise ValidationError("n_samples must be 4m+1 with m >= 1")
        ts = np.linspace(0.0, 1.0, n_samples)
        return [path(float(t)) for t in ts]
    samples = list(path)
    if len(samples) < 5 or (len(samples) - 1) % 4:
        raise ValidationError("sampled path length must be 4m+1 with m >= 1")
    return samples


def _path_integrand(samples, h):
    # d/dt by central differences, one-sided second order at the ends
    n = len(samples)
    vals = np.empty(n)
    inv = []
    for j, a in enumerate(samples):
        try:
            inv.append(a.inverse())
        except NotInvertible as exc:
            raise SingularSample("path sample %d is singular" % j) from exc
    for j in range(n):
        if j == 0:
            da = (-3.0 * samples[0] + 4.0 * samples[1] - 1.0 * samples[2]) * (1.0 / (2 * h))
        elif j == n - 1:
            da = (3.0 * samples[-1] - 4.0 * samples[-2] + 1.0 * samples[-3]) * (1.0 / (2 * h))
        else:
            da = (samples[j + 1] - samples[j - 1]) * (1.0 / (2 * h))
        vals[j] = canonical_trace(inv[j] @ da).real
    return vals


def _simpson(vals, h):
    acc = vals[0] + vals[-1] + 4.0 * np.sum(vals[1:-1:2]) + 2.0 * np.sum(vals[2:-1:2])
    return acc * h / 3.0


def fk_determinant_path(path, n_samples: int = 257) -> float:
    """Det_tau from the path formula: exp of the integral of Re Tr_tau(A^-1 A').

    `path` is a callable on [0, 1] or a uniformly sampled list; the path must
    start at the identity. Derivatives are central differences, the integral
    is composite Simpson with one Richardson extrapolation step.
    """
    samples = _path_samples(path, n_samples)
    ident = identity_op(samples[0].domain)
    if (samples[0] - ident).norm() > 1e-10:
        raise PathNotAtIdentity("path must start at the identity")
    n = len(samples)
    h = 1.0 / (n - 1)
    fine = _simpson(_path_integrand(samples, h), h)
    coarse = _simpson(_path_integrand(samples[::2], 2 * h), 2 * h)
    log_det = (4.0 * fine - coarse) / 3.0
    return float(np.exp(log_det))

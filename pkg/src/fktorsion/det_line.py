"""Determinant lines of modules and flat determinant-line-bundle holonomy.

det(M) is coordinatized by one real number against the base symbol coming
from the standard inner product; admissible metrics give positive
coefficients (the canonical orientation), and metric changes act by
Det_tau(A)^{-1/2} factors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._linalg import column_space, null_space_of_columns
from .errors import (
    AlgebraMismatch,
    DimensionMismatch,
    GeneratorCountMismatch,
    MalformedWord,
    NotExact,
    NotInvertible,
    NotPositive,
    ShapeMismatch,
    Singular,
    SingularGenerator,
    ValidationError,
    ZeroTorsion,
)
from .vn_core import (
    CommutantOp,
    Module,
    direct_sum_module,
    fk_determinant_invertible,
    spectral_density,
    tau_dimension,
)


@dataclass(frozen=True)
class DetLineElement:
    module: Module
    coeff: float

    @property
    def orientation(self) -> int:
        return 1 if self.coeff > 0 else (-1 if self.coeff < 0 else 0)

    def scaled(self, factor: float) -> "DetLineElement":
        return DetLineElement(self.module, self.coeff * factor)


@dataclass(frozen=True)
class GradedDetLine:
    lines: tuple  # DetLineElement per degree, contiguous from 0
    exponents: tuple  # (-1)^q convention record

    def __post_init__(self):
        if len(self.lines) != len(self.exponents):
            raise ShapeMismatch("one exponent per degree")

    @property
    def coefficient(self) -> float:
        out = 1.0
        for e in self.lines:
            out *= e.coeff
        return out


def graded_line(lines) -> GradedDetLine:
    lines = tuple(lines)
    return GradedDetLine(lines, tuple((-1) ** q for q in range(len(lines))))


def base_element(m: Module) -> DetLineElement:
    return DetLineElement(m, 1.0)


def metric_element(a: CommutantOp) -> DetLineElement:
    """Element of det(M) for the metric <v,w> = <A v, w>_base."""
    if not a.is_endomorphism:
        raise ShapeMismatch("metric operator must be an endomorphism")
    dens = spectral_density(a)
    if dens.steps:
        lam_min = dens.steps[0][0]
        lam_max = dens.steps[-1][0]
        if lam_min < -1e-10 * max(lam_max, 1.0):
            raise NotPositive("metric operator has a negative eigenvalue")
        if lam_min <= 1e-10 * max(lam_max, 1.0):
            raise Singular("metric operator is singular")
    log_det = sum(j * np.log(l) for l, j in dens.steps)
    return DetLineElement(a.domain, float(np.exp(-0.5 * log_det)))


def direct_sum(e1: DetLineElement, e2: DetLineElement) -> DetLineElement:
    if e1.module.algebra != e2.module.algebra:
        raise AlgebraMismatch("elements live over different algebras")
    return DetLineElement(
        direct_sum_module(e1.module, e2.module), e1.coeff * e2.coeff
    )


def induced_map(f: CommutantOp, e: DetLineElement) -> DetLineElement:
    """Push e along the isomorphism f; multiplies the coefficient by Det_tau(|f|)."""
    if f.domain != e.module:
        raise ShapeMismatch("map domain does not match the element's module")
    if abs(tau_dimension(f.domain) - tau_dimension(f.codomain)) > 1e-12:
        raise DimensionMismatch("tau-dimensions differ")
    return DetLineElement(f.codomain, fk_determinant_invertible(f) * e.coeff)


def exact_sequence_iso(
    e1: DetLineElement,
    e2: DetLineElement,
    alpha: CommutantOp,
    beta: CommutantOp,
) -> DetLineElement:
    """Canonical element of det(M) from 0 -> M' -> M -> M'' -> 0.

    A splitting s: M'' -> M is built over the base-orthogonal complement of
    im(alpha); the result [alpha | s] pushes e1 (x) e2 into det(M). The
    coefficient does not depend on the splitting: two splittings differ by a
    unitriangular block factor of unit determinant.
    """
    mp, m, mpp = alpha.domain, alpha.codomain, beta.codomain
    if beta.domain != m or mp != e1.module or mpp != e2.module:
        raise ShapeMismatch("sequence maps do not chain")
    comp = beta @ alpha
    scale = max(alpha.norm() * beta.norm(), 1.0)
    if comp.norm() > 1e-10 * scale:
        raise NotExact("beta o alpha does not vanish")
    for kp, kpp, k in zip(mp.mults, mpp.mults, m.mults):
        if kp + kpp != k:
            raise NotExact("multiplicities do not add up per factor")
    blocks = []
    for ab, bb, kp, kpp in zip(alpha.blocks, beta.blocks, mp.mults, mpp.mults):
        if kp and np.linalg.matrix_rank(ab) < kp:
            raise NotExact("alpha is not injective")
        if kpp:
            comp_basis = null_space_of_columns(ab)
            bc = bb @ comp_basis
            if np.linalg.matrix_rank(bc) < kpp:
                raise NotExact("beta does not surject off im(alpha)")
            s = comp_basis @ np.linalg.pinv(bc)
        else:
            s = np.zeros((ab.shape[0], 0), dtype=complex)
        blocks.append(np.hstack([ab, s]))
    phi = CommutantOp(direct_sum_module(mp, mpp), m, blocks)
    return induced_map(phi, direct_sum(e1, e2))


# -- flat determinant line bundles ---------------------------------------------


@dataclass(frozen=True)
class Holonomy:
    generator_values: tuple
    consistent: bool


def rep_holonomy(generators, relators=()) -> Holonomy:
    """Holonomy of the flat bundle: gamma_j -> Det_tau(|rho(gamma_j)|)."""
    generators = list(generators)
    if not generators:
        raise ValidationError("need at least one generator")
    m = generators[0].domain
    values = []
    for j, g in enumerate(generators):
        if not g.is_endomorphism or g.domain != m:
            raise ShapeMismatch("generators must act on one module")
        try:
            values.append(fk_determinant_invertible(g))
        except NotInvertible as exc:
            raise SingularGenerator("generator %d is singular" % j) from exc
    consistent = True
    for word in relators:
        log_val = 0.0
        for item in word:
            try:
                j, e = item
            except (TypeError, ValueError) as exc:
                raise MalformedWord("relator letters must be (index, exponent)") from exc
            if not 0 <= j < len(values) or e not in (1, -1):
                raise MalformedWord("bad letter (%r, %r)" % (j, e))
            log_val += e * np.log(values[j])
        if abs(log_val) > 1e-9:
            consistent = False
    return Holonomy(tuple(values), consistent)


def bundle_iso_exists(h1: Holonomy, h2: Holonomy) -> bool:
    """Flat positive-line bundles are isomorphic iff holonomies coincide."""
    if len(h1.generator_values) != len(h2.generator_values):
        raise GeneratorCountMismatch("different generator counts")
    if not (h1.consistent and h2.consistent):
        raise ValidationError("holonomies must be consistent")
    for a, b in zip(h1.generator_values, h2.generator_values):
        if abs(a - b) > 1e-9 * max(abs(a), abs(b), 1e-300):
            return False
    return True


def correspondence_scalar(rho_e: float, rho_f: float) -> float:
    """Ratio rho_f / rho_e defining the correspondence on graded lines."""
    if rho_e == 0.0:
        raise ZeroTorsion("torsion element must be nonzero")
    return rho_f / rho_e

"""Zeta functions of Laplacians, torsion elements, and metric variation.

The torsion of a complex at metric parameter u is

    rho(u) = exp(1/2 * zeta'(0,0)) * rho'(u)

where zeta' is the graded sum over degrees weighted by (-1)^q q, and rho'
collects the determinant-line coefficients of the u-harmonic scalar products
against the u=0 harmonics. All spectra are finite, so every zeta value is a
closed-form sum over eigenvalue steps.

Sign convention for the variation: with the anomaly

    c(u) = 1/2 * sum_q (-1)^q Tr_tau(Z_u on degree q)

the logarithmic derivative of the torsion coefficient equals -c(u). This is
the sign forced by the two constituent identities (the zeta-prime variation
Tr^s(Z P) - 2c and the rho-prime variation -1/2 Tr^s(Z P)), both of which
variation_check verifies separately.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .det_line import DetLineElement, GradedDetLine, graded_line
from .errors import (
    NonConstantBetti,
    NonpositiveTime,
    ShiftedSpectrumNonpositive,
    StepTooLarge,
    ValidationError,
    ZeroTorsion,
)
from .hilbert_complex import (
    FiniteComplex,
    harmonic_basis,
    laplacian_density,
    require_valid,
)
from .vn_core import (
    KERNEL_TOL,
    CommutantOp,
    Module,
    SpectralDensity,
    canonical_trace,
    fk_determinant,
    tau_dimension,
)

MAX_VARIATION_STEP = 0.05
CONDITION_WARN = 1e8


@dataclass(frozen=True)
class ThetaSeries:
    """Nonzero spectrum of a Laplacian plus the harmonic tau-dimension."""

    spectrum: SpectralDensity
    b: float

    @property
    def dim(self) -> float:
        return self.spectrum.total + self.b


def theta_series(c: FiniteComplex, mf, q: int, u: float, kernel_tol: float = KERNEL_TOL) -> ThetaSeries:
    dens = laplacian_density(c, mf, q, u)
    if not dens.steps:
        return ThetaSeries(SpectralDensity(()), 0.0)
    lam_max = max(l for l, _ in dens.steps)
    cut = kernel_tol * max(lam_max, 1.0)
    b = sum(j for l, j in dens.steps if l <= cut)
    kept = tuple((l, j) for l, j in dens.steps if l > cut)
    return ThetaSeries(SpectralDensity(kept), float(b))


def theta(ts: ThetaSeries, t: float) -> float:
    """theta(t) = sum of jump * exp(-t * lambda) over the nonzero spectrum."""
    if t <= 0:
        raise NonpositiveTime("theta needs t > 0")
    return float(sum(j * np.exp(-t * l) for l, j in ts.spectrum.steps))


def zeta(ts: ThetaSeries, s, lam: float = 0.0) -> complex:
    """zeta(s, lam) = sum of jump * (lambda_j + lam)^(-s); entire in s."""
    for l, _ in ts.spectrum.steps:
        if l + lam <= 0:
            raise ShiftedSpectrumNonpositive("shifted eigenvalue %.3e <= 0" % (l + lam))
    return complex(sum(j * (l + lam) ** (-complex(s)) for l, j in ts.spectrum.steps))


def zeta_prime0(ts: ThetaSeries) -> float:
    """d/ds at s=0 of the closed-form sum: -sum jump * log(lambda_j)."""
    return float(-sum(j * np.log(l) for l, j in ts.spectrum.steps))


def graded_zeta_prime0(c: FiniteComplex, mf, u: float, kernel_tol: float = KERNEL_TOL) -> float:
    out = 0.0
    for q in range(c.top + 1):
        if q == 0:
            continue
        ts = theta_series(c, mf, q, u, kernel_tol)
        out += (-1) ** q * q * zeta_prime0(ts)
    return out


# -- harmonic determinant lines -------------------------------------------------


def _gram_change(c, mf, q, u, kernel_tol):
    """C_u per factor: Gram matrix of the u=0 harmonics in the u-metric,
    transported through the u-harmonic projector."""
    q0 = harmonic_basis(c, mf, q, 0.0, kernel_tol)
    qu = harmonic_basis(c, mf, q, u, kernel_tol)
    au = mf.a(q, u)
    blocks = []
    for x0, xu, ablk in zip(q0, qu, au.blocks):
        if x0.shape[1] != xu.shape[1]:
            raise NonConstantBetti(
                "harmonic multiplicity changed along the family (%d vs %d)"
                % (x0.shape[1], xu.shape[1])
            )
        g = xu.conj().T @ ablk @ x0
        blocks.append(g.conj().T @ g)
    return blocks, [x.shape[1] for x in q0]


def rho_prime(c: FiniteComplex, mf, u: float, kernel_tol: float = KERNEL_TOL) -> GradedDetLine:
    """Graded determinant-line element of the u-harmonic scalar products.

    Degree q carries Det_tau'(C_u)^((-1)^(q+1)/2) relative to the u=0
    element, with C_u the transported Gram matrix; acyclic degrees carry the
    canonical coefficient 1.
    """
    lines = []
    for q in range(c.top + 1):
        blocks, mults = _gram_change(c, mf, q, u, kernel_tol)
        hmod = Module(c.algebra, tuple(mults))
        if sum(mults) == 0:
            lines.append(DetLineElement(hmod, 1.0))
            continue
        cu = CommutantOp(hmod, hmod, [0.5 * (b + b.conj().T) for b in blocks])
        for b in blocks:
            if b.size:
                sv = np.linalg.svd(b, compute_uv=False)
                if sv[0] > CONDITION_WARN * max(sv[-1], 1e-300):
                    warnings.warn(
                        "harmonic Gram matrix poorly conditioned; "
                        "torsion coefficients may lose accuracy",
                        RuntimeWarning,
                    )
        det, _ = fk_determinant(cu, kernel_tol)
        lines.append(DetLineElement(hmod, float(det ** (0.5 * (-1) ** (q + 1)))))
    return graded_line(lines)


@dataclass(frozen=True)
class TorsionElement:
    graded: GradedDetLine
    scalar: float
    u: float
    family: object

    @property
    def coefficient(self) -> float:
        return self.scalar * self.graded.coefficient


def torsion(c: FiniteComplex, mf, u: float, kernel_tol: float = KERNEL_TOL) -> TorsionElement:
    """Torsion element exp(1/2 zeta'(0,0)) * rho'(u) of the graded det line."""
    require_valid(c)
    scalar = float(np.exp(0.5 * graded_zeta_prime0(c, mf, u, kernel_tol)))
    return TorsionElement(rho_prime(c, mf, u, kernel_tol), scalar, u, mf)


def anomaly_c(c: FiniteComplex, mf, u: float) -> float:
    """c(u) = 1/2 sum_q (-1)^q Tr_tau(Z_u on degree q)."""
    out = 0.0
    for q in range(c.top + 1):
        out += (-1) ** q * canonical_trace(mf.z(q, u)).real
    return 0.5 * out


def _supertrace_zp(c, mf, u, kernel_tol):
    """Tr^s_tau(Z_u P(u)) = sum_q (-1)^q Tr_tau(Z_q P_harm,q)."""
    from .hilbert_complex import harmonic_projector_trace

    out = 0.0
    for q in range(c.top + 1):
        out += (-1) ** q * harmonic_projector_trace(
            c, mf, q, u, mf.z(q, u), kernel_tol
        )
    return out


@dataclass(frozen=True)
class VariationResult:
    lhs: float              # d/du log torsion coefficient, central difference
    rhs: float              # -c(u)
    gap: float
    zeta_prime_gap: float   # residual of the zeta-prime variation identity
    rho_prime_gap: float    # residual of the rho-prime variation identity


def variation_check(c: FiniteComplex, mf, u: float, h: float = 1e-4,
                    kernel_tol: float = KERNEL_TOL) -> VariationResult:
    """Check d/du log rho = -c(u) and its two constituent identities at u."""
    if h <= 0 or h > MAX_VARIATION_STEP:
        raise StepTooLarge("h must lie in (0, %.3g]" % MAX_VARIATION_STEP)
    require_valid(c)
    zp = graded_zeta_prime0(c, mf, u + h, kernel_tol)
    zm = graded_zeta_prime0(c, mf, u - h, kernel_tol)
    rp = np.log(rho_prime(c, mf, u + h, kernel_tol).coefficient)
    rm = np.log(rho_prime(c, mf, u - h, kernel_tol).coefficient)
    dzeta = (zp - zm) / (2 * h)
    drho = (rp - rm) / (2 * h)
    lhs = 0.5 * dzeta + drho

    cval = anomaly_c(c, mf, u)
    rhs = -cval
    trs = _supertrace_zp(c, mf, u, kernel_tol)
    zeta_gap = abs(dzeta - (trs - 2.0 * cval))
    rho_gap = abs(drho - (-0.5 * trs))

    return VariationResult(float(lhs), float(rhs), float(abs(lhs - rhs)),
                           float(zeta_gap), float(rho_gap))


def relative_torsion(c_e: FiniteComplex, c_f: FiniteComplex, mf_e, mf_f, u: float,
                     kernel_tol: float = KERNEL_TOL):
    """Both torsions and the coefficient ratio rho_E / rho_F at u."""
    te = torsion(c_e, mf_e, u, kernel_tol)
    tf = torsion(c_f, mf_f, u, kernel_tol)
    if tf.coefficient == 0.0:
        raise ZeroTorsion("reference torsion vanishes")
    return te, tf, te.coefficient / tf.coefficient


def correspondence_apply(rho_e: TorsionElement, rho_f: TorsionElement,
                         x: GradedDetLine) -> GradedDetLine:
    """Image of x under the correspondence sending rho_E to rho_F.

    The graded determinant line is one-dimensional, so the map is fixed by
    lambda = x / rho_E; the result is lambda * rho_F with the scaling folded
    into the degree-0 coefficient.
    """
    if rho_e.coefficient == 0.0:
        raise ZeroTorsion("defining torsion element vanishes")
    if len(x.lines) != len(rho_e.graded.lines):
        raise ValidationError("element does not live on the source graded line")
    lam = x.coefficient / rho_e.coefficient
    lines = list(rho_f.graded.lines)
    lines[0] = lines[0].scaled(lam * rho_f.scalar)
    return graded_line(lines)

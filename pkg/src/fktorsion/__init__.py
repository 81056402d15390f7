"""Exactly-computable L2 torsion machinery over finite von Neumann algebra models."""

from .errors import ConvergenceError, TorsionError, ValidationError
from .vn_core import (
    Algebra,
    CommutantOp,
    Module,
    SpectralDensity,
    canonical_trace,
    fk_determinant,
    fk_determinant_invertible,
    fk_determinant_path,
    identity_op,
    l2_module,
    make_algebra,
    module,
    op,
    spectral_density,
    tau_dimension,
    zero_op,
)
from .hilbert_complex import (
    CallableMetricFamily,
    ExpMetricFamily,
    FiniteComplex,
    betti,
    conformal_family,
    constant_family,
    finite_complex,
    harmonic_basis,
    hodge_projectors,
    laplacian,
    laplacian_density,
    validate_complex,
)
from .det_line import (
    DetLineElement,
    GradedDetLine,
    Holonomy,
    bundle_iso_exists,
    correspondence_scalar,
    direct_sum,
    exact_sequence_iso,
    graded_line,
    induced_map,
    metric_element,
    rep_holonomy,
)
from .zeta_torsion import (
    ThetaSeries,
    TorsionElement,
    VariationResult,
    anomaly_c,
    correspondence_apply,
    graded_zeta_prime0,
    relative_torsion,
    rho_prime,
    theta,
    theta_series,
    torsion,
    variation_check,
    zeta,
    zeta_prime0,
)
from .hyperbolic_zeta import (
    QuadratureResult,
    QuadratureSpec,
    adaptive_quadrature,
    randol_zeta,
    randol_zeta_prime0,
    surface_torsion_scalar,
    symmetric_space_scaling,
    torsion_constant_C,
)
from .index_density import (
    FormElement,
    FormMatrix,
    a_hat,
    adiabatic_density,
    basis_form,
    chern_char,
    const_form,
    exp_form,
    form,
    form_matrix,
    mehler_kernel,
    top_coefficient,
    wedge,
    zero_form,
)

__version__ = "0.1.0"

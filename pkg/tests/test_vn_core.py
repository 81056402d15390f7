import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fktorsion import testing
from fktorsion.errors import (
    EmptyFactorList,
    NonNormalizedTrace,
    NotAProjection,
    NotPositive,
    NotSelfAdjoint,
    PathNotAtIdentity,
    ShapeMismatch,
    SingularSample,
    ValidationError,
)
from fktorsion.vn_core import (
    CommutantOp,
    canonical_trace,
    direct_sum_op,
    fk_determinant,
    fk_determinant_invertible,
    fk_determinant_path,
    from_blocks2x2,
    identity_op,
    l2_module,
    make_algebra,
    module,
    op,
    spectral_density,
    tau_dimension,
    zero_op,
)


def fk_oracle(t):
    """Independent route: product of |det| of the blocks raised to the weights."""
    out = 0.0
    for (n, w), b in zip(t.domain.algebra.factors, t.blocks):
        if b.size == 0:
            continue
        sign, logdet = np.linalg.slogdet(b)
        out += w * logdet
    return float(np.exp(out))


# -- algebra / module ---------------------------------------------------------


def test_make_algebra_examples():
    a = make_algebra([(1, 1.0)])
    assert a.factors == ((1, 1.0),)
    make_algebra([(2, 0.5)])
    make_algebra([(1, 0.25), (3, 0.25)])


def test_make_algebra_rejects():
    with pytest.raises(EmptyFactorList):
        make_algebra([])
    with pytest.raises(NonNormalizedTrace):
        make_algebra([(2, 1.0)])
    with pytest.raises(ValidationError):
        make_algebra([(0, 1.0)])
    with pytest.raises(ValidationError):
        make_algebra([(1, -1.0)])


def test_make_algebra_auto_normalize():
    a = make_algebra([(2, 1.0), (3, 2.0)], auto_normalize=True)
    assert abs(sum(w * n for n, w in a.factors) - 1.0) < 1e-15


def test_module_shape_checks():
    a = make_algebra([(1, 0.25), (3, 0.25)])
    with pytest.raises(ShapeMismatch):
        module(a, [1])
    with pytest.raises(ValidationError):
        module(a, [1, -2])
    assert module(a, [0, 0]).is_zero


# -- trace and dimension ------------------------------------------------------


def test_trace_identity_example():
    a = make_algebra([(2, 0.5)])
    m = module(a, [3])
    assert canonical_trace(identity_op(m)) == pytest.approx(1.5)


def test_trace_zero_and_shape():
    a = make_algebra([(2, 0.5)])
    m = module(a, [3])
    assert canonical_trace(zero_op(m, m)) == 0
    n = module(a, [2])
    with pytest.raises(ShapeMismatch):
        canonical_trace(zero_op(m, n))


def test_trace_block_additivity():
    # trace of [[A,B],[C,D]] on M+N picks up only the diagonal blocks
    rng = np.random.default_rng(0)
    a = make_algebra([(1, 0.4), (2, 0.3)])
    m = module(a, [2, 1])
    n = module(a, [1, 2])
    ta = testing.random_op(rng, m, m)
    td = testing.random_op(rng, n, n)
    tb = testing.random_op(rng, n, m)
    tc = testing.random_op(rng, m, n)
    big = from_blocks2x2(ta, tb, tc, td)
    assert canonical_trace(big) == pytest.approx(
        canonical_trace(ta) + canonical_trace(td)
    )


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_trace_property_cyclic(seed):
    rng = np.random.default_rng(seed)
    alg = testing.random_algebra(rng)
    m = testing.random_module(rng, alg)
    s = testing.random_op(rng, m)
    t = testing.random_op(rng, m)
    assert canonical_trace(s @ t) == pytest.approx(canonical_trace(t @ s), abs=1e-10)


def test_tau_dimension_examples():
    a = make_algebra([(2, 0.5)])
    assert tau_dimension(l2_module(a)) == pytest.approx(1.0)
    assert tau_dimension(module(a, [0])) == 0
    b = make_algebra([(1, 1.0)])
    m = module(b, [2])
    proj = op(m, m, [np.diag([1.0, 0.0])])
    assert tau_dimension(proj) == pytest.approx(1.0)


def test_tau_dimension_rejects_non_projection():
    a = make_algebra([(1, 1.0)])
    m = module(a, [2])
    with pytest.raises(NotAProjection):
        tau_dimension(op(m, m, [np.diag([1.0, 0.5])]))


def test_trace_faithful_on_projections():
    rng = np.random.default_rng(5)
    alg = testing.random_algebra(rng)
    m = testing.random_module(rng, alg)
    for _ in range(10):
        p = testing.random_projection(rng, m)
        if tau_dimension(p) < 1e-12:
            assert p.norm() < 1e-10


# -- spectral density ---------------------------------------------------------


def test_spectral_density_examples():
    a = make_algebra([(1, 1.0)])
    m = module(a, [3])
    dens = spectral_density(op(m, m, [np.diag([1.0, 1.0, 3.0])]))
    assert len(dens.steps) == 2
    assert dens.steps[0] == pytest.approx((1.0, 2.0))
    assert dens.steps[1] == pytest.approx((3.0, 1.0))

    b = make_algebra([(2, 0.5)])
    n = module(b, [1])
    dens = spectral_density(identity_op(n))
    assert dens.steps == ((1.0, 0.5),)

    dens = spectral_density(zero_op(n, n))
    assert dens.steps == ((0.0, 0.5),)


def test_spectral_density_total_is_dimension():
    rng = np.random.default_rng(9)
    for _ in range(10):
        alg = testing.random_algebra(rng)
        m = testing.random_module(rng, alg)
        h = testing.random_hermitian(rng, m)
        dens = spectral_density(h)
        assert dens.total == pytest.approx(tau_dimension(m), abs=1e-10)


def test_spectral_density_rejects_nonhermitian():
    a = make_algebra([(1, 1.0)])
    m = module(a, [2])
    with pytest.raises(NotSelfAdjoint):
        spectral_density(op(m, m, [np.array([[0.0, 1.0], [0.0, 0.0]])]))


def test_spectral_density_merges_close_eigenvalues():
    a = make_algebra([(1, 0.5), (1, 0.5)])
    m = module(a, [1, 1])
    t = op(m, m, [np.array([[2.0]]), np.array([[2.0 + 1e-13]])])
    dens = spectral_density(t)
    assert len(dens.steps) == 1
    assert dens.steps[0][1] == pytest.approx(1.0)


# -- Fuglede-Kadison determinant ----------------------------------------------


def test_fk_examples():
    a = make_algebra([(1, 1.0)])
    m = module(a, [2])
    val, d_class = fk_determinant(op(m, m, [np.diag([4.0, 9.0])]))
    assert val == pytest.approx(36.0, rel=1e-12)
    assert d_class is True

    assert fk_determinant(identity_op(m))[0] == pytest.approx(1.0)

    b = make_algebra([(2, 0.5)])
    n = module(b, [1])
    assert fk_determinant(op(n, n, [np.array([[4.0]])]))[0] == pytest.approx(2.0)


def test_fk_kernel_excluded():
    a = make_algebra([(1, 1.0)])
    m = module(a, [3])
    val, _ = fk_determinant(op(m, m, [np.diag([0.0, 2.0, 3.0])]))
    assert val == pytest.approx(6.0, rel=1e-12)


def test_fk_rejects_negative():
    a = make_algebra([(1, 1.0)])
    m = module(a, [2])
    with pytest.raises(NotPositive):
        fk_determinant(op(m, m, [np.diag([-1.0, 2.0])]))


def test_fk_oracle_random():
    rng = np.random.default_rng(21)
    for _ in range(25):
        alg = testing.random_algebra(rng)
        m = testing.random_module(rng, alg)
        t = testing.random_positive_invertible(rng, m)
        val, _ = fk_determinant(t)
        assert val == pytest.approx(fk_oracle(t), rel=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_fk_multiplicative(seed):
    rng = np.random.default_rng(seed)
    alg = testing.random_algebra(rng)
    m = testing.random_module(rng, alg)
    s = testing.random_positive_invertible(rng, m)
    t = testing.random_positive_invertible(rng, m)
    lhs = fk_determinant_invertible(s @ t)
    rhs = fk_determinant_invertible(s) * fk_determinant_invertible(t)
    assert lhs == pytest.approx(rhs, rel=1e-9)


def test_fk_block_triangular():
    rng = np.random.default_rng(3)
    alg = testing.random_algebra(rng)
    m = testing.random_module(rng, alg)
    n = testing.random_module(rng, alg)
    a = testing.random_positive_invertible(rng, m)
    b = testing.random_positive_invertible(rng, n)
    gam = testing.random_op(rng, n, m)
    tri = from_blocks2x2(a, gam, zero_op(m, n), b)
    lhs = fk_determinant_invertible(tri)
    rhs = fk_determinant_invertible(a) * fk_determinant_invertible(b)
    assert lhs == pytest.approx(rhs, rel=1e-9)


def test_fk_direct_sum():
    rng = np.random.default_rng(13)
    alg = testing.random_algebra(rng)
    m = testing.random_module(rng, alg)
    a = testing.random_positive_invertible(rng, m)
    b = testing.random_positive_invertible(rng, m)
    assert fk_determinant(direct_sum_op(a, b))[0] == pytest.approx(
        fk_determinant(a)[0] * fk_determinant(b)[0], rel=1e-10
    )


# -- path formula -------------------------------------------------------------


def _linear_path(m, target_blocks):
    ident = identity_op(m)
    target = CommutantOp(m, m, target_blocks)

    def path(t):
        return (1.0 - t) * ident + t * target

    return path


def test_path_constant_identity():
    a = make_algebra([(1, 1.0)])
    m = module(a, [2])
    assert fk_determinant_path(lambda t: identity_op(m)) == pytest.approx(1.0)


def test_path_linear_example():
    a = make_algebra([(1, 1.0)])
    m = module(a, [2])
    path = _linear_path(m, [np.diag([4.0, 9.0])])
    assert fk_determinant_path(path) == pytest.approx(36.0, rel=1e-6)


def test_path_exponential_matches_trace():
    rng = np.random.default_rng(17)
    alg = testing.random_algebra(rng)
    m = testing.random_module(rng, alg)
    b = testing.random_hermitian(rng, m)
    eig = [np.linalg.eigh(blk) for blk in b.blocks]

    def path(t):
        return CommutantOp(
            m, m, [(v * np.exp(t * lam)) @ v.conj().T for lam, v in eig]
        )

    expected = np.exp(canonical_trace(b).real)
    assert fk_determinant_path(path) == pytest.approx(expected, rel=1e-6)


def test_path_independence():
    # linear segment and spectral power path reach the same endpoint
    rng = np.random.default_rng(29)
    alg = testing.random_algebra(rng)
    m = testing.random_module(rng, alg)
    t = testing.random_positive_invertible(rng, m)
    eig = [np.linalg.eigh(blk) for blk in t.blocks]

    def power_path(s):
        return CommutantOp(m, m, [(v * lam**s) @ v.conj().T for lam, v in eig])

    d1 = fk_determinant_path(_linear_path(m, list(t.blocks)))
    d2 = fk_determinant_path(power_path)
    assert abs(np.log(d1) - np.log(d2)) < 1e-6


def test_path_agrees_with_spectral_route():
    rng = np.random.default_rng(31)
    for _ in range(5):
        alg = testing.random_algebra(rng)
        m = testing.random_module(rng, alg)
        t = testing.random_positive_invertible(rng, m)
        d_path = fk_determinant_path(_linear_path(m, list(t.blocks)))
        d_spec, _ = fk_determinant(t)
        assert abs(np.log(d_path) - np.log(d_spec)) < 1e-6


def test_path_rejections():
    a = make_algebra([(1, 1.0)])
    m = module(a, [1])
    with pytest.raises(PathNotAtIdentity):
        fk_determinant_path(lambda t: op(m, m, [np.array([[2.0]])]))
    with pytest.raises(SingularSample):
        fk_determinant_path(lambda t: op(m, m, [np.array([[1.0 - t]])]))
    with pytest.raises(ValidationError):
        fk_determinant_path([identity_op(m)] * 4)  # not 4m+1 samples

"""Random instance generators for tests and reproducible experiments.

All generators take an optional numpy Generator; without one they seed from
the FKT_SEED environment variable (default 0), so runs are reproducible.
The complex generator produces differentials satisfying d^2 = 0 exactly (in
floating point) together with the intended Betti numbers as an oracle.
"""

from __future__ import annotations

import os

import numpy as np

from .hilbert_complex import ExpMetricFamily, FiniteComplex
from .vn_core import Algebra, CommutantOp, Module, identity_op, make_algebra, tau_dimension


def default_rng(rng=None) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None:
        rng = int(os.environ.get("FKT_SEED", "0"))
    return np.random.default_rng(rng)


def random_algebra(rng=None, max_factors: int = 3, max_size: int = 3) -> Algebra:
    rng = default_rng(rng)
    nf = int(rng.integers(1, max_factors + 1))
    sizes = [int(s) for s in rng.integers(1, max_size + 1, size=nf)]
    weights = rng.uniform(0.5, 2.0, size=nf)
    return make_algebra(list(zip(sizes, weights)), auto_normalize=True)


def random_module(rng, algebra: Algebra, max_mult: int = 4, min_mult: int = 1) -> Module:
    rng = default_rng(rng)
    mults = [int(k) for k in rng.integers(min_mult, max_mult + 1, size=algebra.num_factors)]
    return Module(algebra, tuple(mults))


def _complex_matrix(rng, rows: int, cols: int) -> np.ndarray:
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def random_op(rng, domain: Module, codomain: Module | None = None) -> CommutantOp:
    rng = default_rng(rng)
    codomain = codomain or domain
    blocks = [
        _complex_matrix(rng, kc, kd) for kc, kd in zip(codomain.mults, domain.mults)
    ]
    return CommutantOp(domain, codomain, blocks)


def random_unitary_block(rng, k: int) -> np.ndarray:
    if k == 0:
        return np.zeros((0, 0), dtype=complex)
    q, r = np.linalg.qr(_complex_matrix(rng, k, k))
    # fix the phase ambiguity of QR so the result is haar-ish and reproducible
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_unitary(rng, m: Module) -> CommutantOp:
    rng = default_rng(rng)
    return CommutantOp(m, m, [random_unitary_block(rng, k) for k in m.mults])


def random_hermitian(rng, m: Module, scale: float = 1.0) -> CommutantOp:
    rng = default_rng(rng)
    blocks = []
    for k in m.mults:
        b = _complex_matrix(rng, k, k)
        blocks.append(scale * 0.5 * (b + b.conj().T))
    return CommutantOp(m, m, blocks)


def random_positive_invertible(rng, m: Module, lo: float = 0.5, hi: float = 2.0) -> CommutantOp:
    """Random positive operator with spectrum inside [lo, hi] per block."""
    rng = default_rng(rng)
    blocks = []
    for k in m.mults:
        u = random_unitary_block(rng, k)
        lam = rng.uniform(lo, hi, size=k)
        b = (u * lam) @ u.conj().T
        blocks.append(0.5 * (b + b.conj().T))
    return CommutantOp(m, m, blocks)


def random_projection(rng, m: Module) -> CommutantOp:
    rng = default_rng(rng)
    blocks = []
    for k in m.mults:
        u = random_unitary_block(rng, k)
        r = int(rng.integers(0, k + 1))
        lam = np.zeros(k)
        lam[:r] = 1.0
        b = (u * lam) @ u.conj().T
        blocks.append(0.5 * (b + b.conj().T))
    return CommutantOp(m, m, blocks)


def random_complex(
    rng=None,
    algebra: Algebra | None = None,
    max_degrees: int = 5,
    max_mult: int = 6,
    p: int = 0,
    mults=None,
):
    """Random finite complex with d^2 = 0 exact, plus its Betti numbers.

    Differentials are built in normal form with disjoint coordinate supports
    (rank r_q occupying rows 0..r_q and columns r_{q-1}..r_{q-1}+r_q) and then
    conjugated by unitaries, so the composite d_{q+1} d_q vanishes exactly.
    Returns (FiniteComplex, [b_0, ..., b_top]).
    """
    rng = default_rng(rng)
    if algebra is None:
        algebra = random_algebra(rng)
    nf = algebra.num_factors
    if mults is None:
        nq = int(rng.integers(2, max_degrees + 1))
        mults = [[int(k) for k in rng.integers(1, max_mult + 1, size=nf)] for _ in range(nq)]
    else:
        mults = [list(m) for m in mults]
        nq = len(mults)
    ranks = [[0] * nf for _ in range(nq - 1)]
    for i in range(nf):
        r_prev = 0
        for q in range(nq - 1):
            hi = min(mults[q][i] - r_prev, mults[q + 1][i])
            ranks[q][i] = int(rng.integers(0, hi + 1))
            r_prev = ranks[q][i]
    degrees = [Module(algebra, tuple(m)) for m in mults]
    unitaries = [
        [random_unitary_block(rng, mults[q][i]) for i in range(nf)] for q in range(nq)
    ]
    diffs = []
    for q in range(nq - 1):
        blocks = []
        for i in range(nf):
            d = np.zeros((mults[q + 1][i], mults[q][i]), dtype=complex)
            off = ranks[q - 1][i] if q > 0 else 0
            for a in range(ranks[q][i]):
                d[a, off + a] = rng.uniform(0.5, 2.0)
            blocks.append(unitaries[q + 1][i] @ d @ unitaries[q][i].conj().T)
        diffs.append(CommutantOp(degrees[q], degrees[q + 1], blocks))
    w = algebra.weights
    betti = []
    for q in range(nq):
        r_out = ranks[q] if q < nq - 1 else [0] * nf
        r_in = ranks[q - 1] if q > 0 else [0] * nf
        betti.append(
            float(sum(w[i] * (mults[q][i] - r_out[i] - r_in[i]) for i in range(nf)))
        )
    return FiniteComplex(tuple(degrees), tuple(diffs), p), betti


def random_acyclic_two_term(rng=None, algebra: Algebra | None = None, max_mult: int = 4):
    """Two-term complex 0 -> M -> M -> 0 with invertible differential."""
    rng = default_rng(rng)
    if algebra is None:
        algebra = random_algebra(rng)
    m = random_module(rng, algebra, max_mult=max_mult)
    d = random_positive_invertible(rng, m) @ random_unitary(rng, m)
    return FiniteComplex((m, m), (d,), 0)


def random_exp_family(rng, c: FiniteComplex, scale: float = 1.0) -> ExpMetricFamily:
    """Exp metric family with random self-adjoint generators per degree."""
    rng = default_rng(rng)
    return ExpMetricFamily([random_hermitian(rng, m, scale) for m in c.degrees])


def traceless_exp_family(rng, c: FiniteComplex, scale: float = 1.0) -> ExpMetricFamily:
    """Exp family whose generators are tau-traceless in every degree."""
    rng = default_rng(rng)
    gens = []
    for m in c.degrees:
        b = random_hermitian(rng, m, scale)
        dim = tau_dimension(m)
        if dim > 0:
            w = m.algebra.weights
            tr = sum(wi * np.trace(blk).real for wi, blk in zip(w, b.blocks))
            b = b - (tr / dim) * identity_op(m)
        gens.append(b)
    return ExpMetricFamily(gens)

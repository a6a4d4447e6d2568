"""Exact scalar, matrix, and subspace layer."""

import random
from fractions import Fraction

import numpy as np
import pytest

from pptlab import exactmat as em
from pptlab.errors import DimensionMismatch, NotHermitian, RangeViolation


def rnd_scalar(rng, span=3, den=3):
    return em.GaussianRational(Fraction(rng.randint(-span, span), rng.randint(1, den)),
                               Fraction(rng.randint(-span, span), rng.randint(1, den)))


def rnd_matrix(rng, rows, cols, **kw):
    return em.ExactMatrix([[rnd_scalar(rng, **kw) for _ in range(cols)] for _ in range(rows)])


def rnd_hermitian(rng, n, **kw):
    A = rnd_matrix(rng, n, n, **kw)
    return A + A.adjoint()


# -- scalars ------------------------------------------------------------------

def test_scalar_field_axioms():
    rng = random.Random(0)
    for _ in range(200):
        a, b, c = (rnd_scalar(rng) for _ in range(3))
        assert (a + b) * c == a * c + b * c
        assert a * b == b * a
        if b:
            assert (a / b) * b == a
    z = rnd_scalar(rng)
    assert z.conj().conj() == z


def test_scalar_canonical_and_hash():
    z = em.GaussianRational(Fraction(2, 4), Fraction(0, 5))
    assert z.re == Fraction(1, 2) and z.im == 0
    assert z == Fraction(1, 2)
    assert hash(em.GaussianRational(3)) == hash(3)


def test_abs2_real_nonnegative():
    rng = random.Random(1)
    for _ in range(50):
        z = rnd_scalar(rng)
        n2 = z.abs2()
        assert n2 >= 0
        w = z * z.conj()
        assert w.im == 0 and w.re == n2


def test_scalar_serialization_roundtrip():
    rng = random.Random(2)
    for _ in range(100):
        z = rnd_scalar(rng, span=7, den=9)
        assert em.parse_scalar(em.format_scalar(z)) == z
    assert em.format_scalar(em.GaussianRational(Fraction(1, 2))) == "1/2"
    assert em.format_scalar(em.GaussianRational(Fraction(1, 2), Fraction(-3, 4))) == "1/2-3/4 i"
    assert em.parse_scalar("3") == em.GaussianRational(3)


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        em.ONE / em.ZERO


# -- rank and kernel ------------------------------------------------------------

def test_rank_zero_matrix():
    r, kern = em.rank_and_kernel(em.ExactMatrix.zeros(3, 3))
    assert r == 0 and kern.dim == 3


def test_rank_kernel_dimension_sum():
    rng = random.Random(3)
    for _ in range(30):
        M = rnd_matrix(rng, rng.randint(1, 5), rng.randint(1, 5))
        r, kern = em.rank_and_kernel(M)
        assert r + kern.dim == M.cols
        for v in kern.basis:
            assert em.is_zero_vector(M.matvec(v))


def test_rank_invariant_under_adjoint_and_conjugate():
    rng = random.Random(4)
    for _ in range(20):
        M = rnd_matrix(rng, rng.randint(1, 4), rng.randint(1, 4))
        r = em.rank(M)
        assert r == em.rank(M.adjoint()) == em.rank(M.conjugate())


# -- psd_check ------------------------------------------------------------------

def test_psd_identity():
    assert em.psd_check(em.ExactMatrix.identity(2)).is_psd


def test_psd_symmetric_indefinite_example():
    M = em.ExactMatrix([[1, 2], [2, 1]])
    res = em.psd_check(M)
    assert not res.is_psd
    v = res.witness
    val = em.vdot(v, M.matvec(v))
    assert val.im == 0 and val.re < 0 and val.re == res.witness_value
    # the textbook witness evaluates to -2
    w = em.vector([1, -1])
    assert em.vdot(w, M.matvec(w)) == -2


def test_psd_requires_hermitian():
    with pytest.raises(NotHermitian):
        em.psd_check(em.ExactMatrix([[0, 1], [0, 0]]))


def test_psd_gram_reconstruction():
    rng = random.Random(5)
    for _ in range(20):
        n = rng.randint(1, 5)
        B = rnd_matrix(rng, n, rng.randint(1, n))
        G = B.matmul(B.adjoint())
        res = em.psd_check(G)
        assert res.is_psd
        assert res.reconstruct(n) == G
        assert all(d > 0 for _, d in res.pivots)


def test_psd_zero_pivot_with_coupling_detected():
    # [[0, 1], [1, 1]] has a zero diagonal coupled off-diagonally
    M = em.ExactMatrix([[0, 1], [1, 1]])
    res = em.psd_check(M)
    assert not res.is_psd
    assert em.vdot(res.witness, M.matvec(res.witness)).re < 0


def test_psd_float_cross_validation():
    """Exact verdicts agree with floating-point spectra on random matrices."""
    rng = random.Random(6)
    for _ in range(60):
        n = rng.randint(1, 8)
        if rng.random() < 0.5:
            B = rnd_matrix(rng, n, rng.randint(1, n), span=5, den=5)
            M = B.matmul(B.adjoint())
        else:
            M = rnd_hermitian(rng, n, span=5, den=5)
        verdict = em.psd_check(M).is_psd
        eigmin = float(np.linalg.eigvalsh(np.array(M.to_complex_rows())).min()) if n else 0.0
        assert verdict == (eigmin >= -1e-8)


# -- projectors -------------------------------------------------------------------

def test_projector_axis_and_diagonal():
    P = em.orth_projector(em.Subspace(2, [em.basis_vector(2, 0)]))
    assert P == em.ExactMatrix.diag([1, 0])
    P2 = em.orth_projector(em.Subspace(2, [em.vector([1, 1])]))
    assert all(P2.entry(i, j) == Fraction(1, 2) for i in range(2) for j in range(2))


def test_projector_properties_random():
    rng = random.Random(7)
    for _ in range(20):
        n = rng.randint(1, 5)
        k = rng.randint(0, n)
        S = em.Subspace(n, [tuple(rnd_scalar(rng) for _ in range(n)) for _ in range(k)])
        P = em.orth_projector(S)
        assert P.matmul(P) == P
        assert P.adjoint() == P
        assert P.trace() == S.dim
        for b in S.basis:
            assert P.matvec(b) == b


def test_kernel_plus_corange_projectors_sum_to_identity():
    rng = random.Random(8)
    for _ in range(15):
        M = rnd_matrix(rng, rng.randint(1, 4), rng.randint(1, 4))
        _, kern = em.rank_and_kernel(M)
        corange = em.column_space(M.adjoint())
        P = em.orth_projector(kern) + em.orth_projector(corange)
        assert P == em.ExactMatrix.identity(M.cols)


# -- solve_on_range -----------------------------------------------------------------

def test_solve_identity_and_diagonal():
    b = em.vector([3, Fraction(-1, 2)])
    assert em.solve_on_range(em.ExactMatrix.identity(2), b) == b
    A = em.ExactMatrix.diag([1, 0])
    assert em.solve_on_range(A, em.vector([2, 0])) == em.vector([2, 0])
    with pytest.raises(RangeViolation):
        em.solve_on_range(A, em.vector([0, 1]))


def test_solve_reproduces_rhs_and_minimal_norm():
    rng = random.Random(9)
    for _ in range(25):
        rows, cols = rng.randint(1, 4), rng.randint(1, 4)
        A = rnd_matrix(rng, rows, cols)
        x0 = tuple(rnd_scalar(rng) for _ in range(cols))
        b = A.matvec(x0)
        x = em.solve_on_range(A, b)
        assert A.matvec(x) == b
        # minimal-norm solution lies in R(A*)
        assert em.column_space(A.adjoint()).contains(x)


# -- subspaces -----------------------------------------------------------------------

def test_subspace_canonical_equality():
    U = em.Subspace(3, [em.vector([1, 1, 0]), em.vector([0, 0, 1])])
    V = em.Subspace(3, [em.vector([2, 2, 2]), em.vector([0, 0, -5])])
    assert U == V
    assert U.contains(em.vector([3, 3, 7]))
    assert not U.contains(em.vector([1, 0, 0]))


def test_intersection_examples():
    full = em.Subspace(2, [em.basis_vector(2, 0), em.basis_vector(2, 1)])
    assert em.subspace_intersection(full, full).dim == 2
    U = em.Subspace(2, [em.basis_vector(2, 0)])
    V = em.Subspace(2, [em.basis_vector(2, 1)])
    assert em.subspace_intersection(U, V).dim == 0
    U = em.Subspace(3, [em.basis_vector(3, 0), em.basis_vector(3, 1)])
    V = em.Subspace(3, [em.basis_vector(3, 1), em.basis_vector(3, 2)])
    W = em.subspace_intersection(U, V)
    assert W.basis == (em.basis_vector(3, 1),)


def test_intersection_dimension_bound_and_mismatch():
    rng = random.Random(10)
    for _ in range(20):
        n = rng.randint(1, 4)
        U = em.Subspace(n, [tuple(rnd_scalar(rng) for _ in range(n))
                            for _ in range(rng.randint(0, n))])
        V = em.Subspace(n, [tuple(rnd_scalar(rng) for _ in range(n))
                            for _ in range(rng.randint(0, n))])
        W = em.subspace_intersection(U, V)
        assert W.dim >= U.dim + V.dim - n
    with pytest.raises(DimensionMismatch):
        em.subspace_intersection(em.Subspace(2), em.Subspace(3))


def test_intersection_oracle_equivalence():
    """Projector-based intersection equals the stacked-kernel computation on
    all subspace pairs built from {-1, 0, 1} vectors in ambient dim <= 4."""
    rng = random.Random(11)
    for _ in range(60):
        n = rng.randint(1, 4)
        def sub():
            k = rng.randint(0, n)
            return em.Subspace(n, [tuple(em.as_scalar(rng.choice((-1, 0, 1)))
                                         for _ in range(n)) for _ in range(k)])
        U, V = sub(), sub()
        assert em.subspace_intersection(U, V) == em.intersection_via_stacked_kernel(U, V)


def test_matrix_kron_and_outer():
    a = em.ExactMatrix([[1, 2], [3, 4]])
    i2 = em.ExactMatrix.identity(2)
    k = a.kron(i2)
    assert k.entry(0, 0) == 1 and k.entry(1, 1) == 1 and k.entry(0, 2) == 2
    u = em.vector([1, em.I_UNIT])
    P = em.ExactMatrix.outer(u, u)
    assert P.is_hermitian()
    assert P.entry(0, 1) == em.GaussianRational(0, -1)


def test_projector_onto_rho3x3_range_has_trace_five():
    from pptlab import qstates as qs

    P = em.orth_projector(em.column_space(qs.rho_3x3().matrix))
    assert P.trace() == 5  # trace of a projector equals the rank

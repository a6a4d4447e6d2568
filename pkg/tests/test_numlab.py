"""Floating-point sampling laboratory."""

import numpy as np
import pytest

from pptlab import exactmat as em
from pptlab import extender as ex
from pptlab import numlab as nl
from pptlab import qstates as qs
from pptlab.errors import ConvergenceFailure, DimensionMismatch, RankAmbiguity


def test_random_hermitian_deterministic_and_hermitian():
    a = nl.random_hermitian(5, 42)
    b = nl.random_hermitian(5, 42)
    assert np.array_equal(a, b)
    assert np.array_equal(a, a.conj().T)  # exactly, by construction
    assert nl.random_hermitian(1, 0).shape == (1, 1)
    with pytest.raises(DimensionMismatch):
        nl.random_hermitian(0, 0)


def test_random_hermitian_moments():
    rng = np.random.default_rng(123)
    samples = np.stack([nl.random_hermitian(3, rng) for _ in range(10_000)])
    means = samples.mean(axis=0)
    # entry means vanish within 5 sigma / sqrt(N); diagonal variance 1,
    # off-diagonal real part variance 1/2
    assert np.all(np.abs(means) < 5 / np.sqrt(10_000) * 1.1)


def test_eig_hermitian_examples():
    w, _ = nl.eig_hermitian(np.diag([3.0, 1.0, 2.0]))
    assert np.allclose(w, [1, 2, 3])
    w, _ = nl.eig_hermitian(np.array([[0, 1], [1, 0]], dtype=float))
    assert np.allclose(w, [-1, 1])


def test_eig_hermitian_reconstruction():
    rng = np.random.default_rng(7)
    a = nl.random_hermitian(8, rng)
    w, v = nl.eig_hermitian(a)
    assert np.linalg.norm(v @ np.diag(w) @ v.conj().T - a) <= 1e-10 * np.linalg.norm(a)
    assert np.allclose(v.conj().T @ v, np.eye(8), atol=1e-10)


def test_eig_matches_exact_characteristic_roots():
    """Eigenvalues agree with exact-layer PSD structure on rational matrices."""
    import random
    rng = random.Random(11)
    for _ in range(10):
        B = em.ExactMatrix([[em.GaussianRational(rng.randint(-3, 3), rng.randint(-3, 3))
                             for _ in range(3)] for _ in range(3)])
        G = B.matmul(B.adjoint())
        w, _ = nl.eig_hermitian(np.array(G.to_complex_rows()))
        res = em.psd_check(G)
        assert res.is_psd
        assert np.all(w >= -1e-9)
        assert np.sum(np.abs(w) > 1e-9) == res.rank


def test_gauss_newton_full_birank_immediate():
    st = nl.gauss_newton_birank(2, 2, 4, 4, seed=3)
    assert st.iterations == 0
    assert st.residual == 0.0


def test_gauss_newton_3x3_rank44():
    st = nl.gauss_newton_birank(3, 3, 4, 4, seed=0)
    assert st.residual < 1e-9
    w1 = np.linalg.eigvalsh(st.matrix)
    w2 = np.linalg.eigvalsh(nl.partial_transpose_np(st.matrix, 3, 3))
    assert w1.min() > -1e-10 and w2.min() > -1e-10
    assert np.sum(np.abs(w1) > 1e-7) == 4
    assert np.sum(np.abs(w2) > 1e-7) == 4


def test_gauss_newton_2x4_target():
    ok = 0
    for seed in range(10):
        try:
            st = nl.gauss_newton_birank(2, 4, 7, 8, seed=seed, max_iter=200)
        except ConvergenceFailure:
            continue
        assert st.residual < 1e-9
        ok += 1
    assert ok >= 9


def test_gauss_newton_determinism():
    a = nl.gauss_newton_birank(3, 3, 5, 6, seed=9)
    b = nl.gauss_newton_birank(3, 3, 5, 6, seed=9)
    assert np.array_equal(a.matrix, b.matrix)


def test_numeric_extension_dimension_oracle_agreement():
    cases = [
        qs.rho_3x3(),
        qs.rho_family(2),
        qs.tiles_complement(),
        qs.BipartiteState(2, 2, em.ExactMatrix.identity(4), label="mm"),
    ]
    for st in cases:
        exact = ex.ppt_extension_space(st).dimension
        numeric = nl.numeric_extension_dimension(nl.from_exact(st))
        assert numeric == exact, st.label


def test_numeric_extension_dimension_sampled():
    st = nl.gauss_newton_birank(3, 3, 4, 4, seed=12)
    assert nl.numeric_extension_dimension(st) == 3


def test_numeric_extension_dimension_report_gap():
    st = nl.from_exact(qs.rho_3x3())
    dim, report = nl.numeric_extension_dimension(st, return_report=True)
    assert dim == report["dimension"]
    lo, hi = report["spectral_gap"]
    assert lo < 1e-7 < hi


def test_rank_ambiguity_detection():
    st = nl.from_exact(qs.rho_3x3())
    # an eigenvalue of rho3x3/13 is 1/13; a tolerance within its decade trips
    with pytest.raises(RankAmbiguity):
        nl.numeric_extension_dimension(st, svd_tol=1 / 13)


def test_rationalize_round_trip():
    converged = []
    for seed in range(10):
        try:
            converged.append(nl.gauss_newton_birank(3, 3, 4, 4, seed=200 + seed))
        except ConvergenceFailure:
            continue
    ok = 0
    for st in converged:
        try:
            exact = nl.rationalize_to_birank(st)
        except Exception:
            continue
        assert em.psd_check(exact.matrix).is_psd
        assert em.psd_check(exact.partial_transpose("B")).is_psd
        ok += 1
    assert ok >= 0.8 * len(converged)


def test_survey_empty():
    assert nl.unextendibility_survey([(2, 2)], [(4, 4)], samples=0) [0].converged == 0


def test_survey_rank44_and_rank56():
    reports = nl.unextendibility_survey([(3, 3)], [(4, 4), (5, 6)], samples=5, seed=31)
    by_birank = {r.birank: r for r in reports}
    r44 = by_birank[(4, 4)]
    assert r44.converged == 5
    assert set(r44.extension_dims) == {3}
    r56 = by_birank[(5, 6)]
    assert r56.bound == 3
    assert all(d >= 6 for d in r56.extension_dims)
    assert not r56.deviations
    table = nl.survey_table(reports)
    assert "3x" in table and "4, 4" in str(table)


def test_eigenvalues_match_exact_characteristic_polynomial():
    """Numeric eigenvalues are roots of the exactly computed characteristic
    polynomial of random rational symmetric matrices."""
    import random
    from fractions import Fraction
    from pptlab import algcert as ac

    rng = random.Random(17)
    ring = ac.PolyRing(["x"])
    x = ring.var("x")
    for _ in range(10):
        entries = [[Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(3)]
                   for _ in range(3)]
        for i in range(3):
            for j in range(i + 1, 3):
                entries[j][i] = entries[i][j]
        sym_entries = [[x.scale(1 if i == j else 0) - ring.constant(entries[i][j])
                        for j in range(3)] for i in range(3)]
        charpoly = ac._symbolic_det(sym_entries, (0, 1, 2), (0, 1, 2), ring)
        M = np.array([[float(v) for v in row] for row in entries])
        w = np.linalg.eigvalsh(M)
        scale = max(1.0, np.abs(w).max()) ** 3
        for lam in w:
            val = sum(float(c) * lam ** m[0] for m, c in charpoly.terms.items())
            assert abs(val) <= 1e-9 * scale

"""Local extension engine."""

import random
from fractions import Fraction

import pytest

from pptlab import exactmat as em
from pptlab import extender as ex
from pptlab import qstates as qs
from pptlab.errors import PreconditionViolation, RangeViolation


def rnd_scalar(rng, span=2):
    return em.GaussianRational(Fraction(rng.randint(-span, span), rng.randint(1, 2)),
                               Fraction(rng.randint(-span, span), rng.randint(1, 2)))


def random_psd_state(rng, m, n, nvec=None):
    nvec = nvec or rng.randint(1, 3)
    acc = em.ExactMatrix.zeros(m * n, m * n)
    for _ in range(nvec):
        v = tuple(rnd_scalar(rng) for _ in range(m * n))
        acc = acc + em.ExactMatrix.outer(v, v)
    return qs.BipartiteState(m, n, acc, label="random")


# -- split / assemble ----------------------------------------------------------

def test_direct_sum_split_has_zero_coupling():
    core = qs.rho_3x3()
    edge = em.ExactMatrix.diag([3, 0, 3])
    blocks = ex.ExtensionBlocks(core, em.ExactMatrix.zeros(9, 3), edge, "A", 3)
    st = ex.assemble_extension(blocks)
    back = ex.split_blocks(st, "A", 3)
    assert back.coupling.is_zero()
    assert back.core.matrix == core.matrix
    assert back.edge == edge


def test_split_rho45_at_last_b_index():
    final = qs.rho_4x5().final
    blocks = ex.split_blocks(final, "B", 4)
    assert blocks.core.dims == (4, 4)
    nz_cols = [c for c in range(blocks.coupling.cols) if any(blocks.coupling.col(c))]
    assert nz_cols == [3]  # the |02><3|-type coupling targets A-index 3
    assert ex.assemble_extension(blocks).matrix == final.matrix


def test_split_assemble_roundtrip_random():
    rng = random.Random(0)
    for _ in range(20):
        m, n = rng.randint(2, 3), rng.randint(2, 3)
        st = random_psd_state(rng, m, n)
        side = "A" if rng.random() < 0.5 else "B"
        perp = rng.randrange(m if side == "A" else n)
        blocks = ex.split_blocks(st, side, perp)
        assert ex.assemble_extension(blocks).matrix == st.matrix


# -- Schur complements -----------------------------------------------------------

def test_schur_zero_coupling_returns_edge():
    core = qs.rho_3x3()
    edge = em.ExactMatrix.diag([1, 2, 3])
    blocks = ex.ExtensionBlocks(core, em.ExactMatrix.zeros(9, 3), edge, "A", 3)
    assert ex.schur_complement(blocks) == edge


def test_schur_scalar_example():
    core = qs.BipartiteState(1, 1, em.ExactMatrix([[2]]), label="s")
    blocks = ex.ExtensionBlocks(core, em.ExactMatrix([[1]]), em.ExactMatrix([[1]]), "A", 1)
    assert ex.schur_complement(blocks).entry(0, 0) == Fraction(1, 2)


def test_schur_flat_extension_vanishes():
    rng = random.Random(1)
    core = random_psd_state(rng, 2, 2)
    R = em.ExactMatrix([[rnd_scalar(rng) for _ in range(2)] for _ in range(4)])
    chi = core.matrix.matmul(R)
    flat = ex.flat_extension(core, chi)
    blocks = ex.split_blocks(flat, "A", 2)
    assert ex.schur_complement(blocks).is_zero()
    # flat extensions preserve the range dimension
    assert em.rank(flat.matrix) == em.rank(core.matrix)


def test_schur_range_violation_signals_non_psd():
    core = qs.BipartiteState(1, 2, em.ExactMatrix.diag([1, 0]), label="c")
    chi = em.ExactMatrix([[0, 0], [1, 0]])  # column outside R(core)
    blocks = ex.ExtensionBlocks(core, chi, em.ExactMatrix.identity(2), "A", 1)
    with pytest.raises(RangeViolation):
        ex.schur_complement(blocks)


# -- the constraint system ---------------------------------------------------------

def test_extension_count_bound_values():
    assert ex.extension_count_bound(3, 3, 5, 6) == 3
    assert ex.extension_count_bound(3, 3, 4, 4) == -6
    assert ex.extension_count_bound(2, 4, 8, 8) == 30


def test_extension_space_maximally_mixed():
    mm = qs.BipartiteState(2, 2, em.ExactMatrix.identity(4), label="mm")
    space = ex.ppt_extension_space(mm)
    assert space.bound == 6
    assert space.dimension == 8  # every coupling solves the full-rank system
    assert space.real_dimension == 16
    assert space.trivial_dimension == 2


def test_extension_space_rho3x3():
    space = ex.ppt_extension_space(qs.rho_3x3())
    assert space.bound == 3
    assert space.trivial_dimension == 3
    assert space.dimension >= space.bound + 3
    assert space.dimension == 7  # frozen exact value (one above the counting bound)


def test_extension_space_cross_check_stacked():
    for st in (qs.rho_3x3(), qs.rho_family(2)):
        space = ex.ppt_extension_space(st)
        stacked = ex.ppt_extension_space_stacked(st)
        assert stacked == space.solution_space


def test_extension_space_tiles_is_slocc_only():
    space = ex.ppt_extension_space(qs.tiles_complement())
    assert space.dimension == 3
    assert space.trivial_dimension == 3


def test_slocc_couplings_always_solve():
    for st in (qs.rho_3x3(), qs.rho_family(2)):
        space = ex.ppt_extension_space(st)
        m, n = st.dims
        for i in range(m):
            chi = ex.slocc_coupling(st, em.basis_vector(m, i))
            assert space.solution_space.contains(ex.coupling_choi_vector(chi, m, n))


# -- slocc ---------------------------------------------------------------------------

def test_slocc_zero_phi_is_direct_sum():
    rho = qs.rho_3x3()
    st = ex.slocc_extension(rho, em.zero_vector(3))
    blocks = ex.split_blocks(st, "A", 3)
    assert blocks.coupling.is_zero() and blocks.edge.is_zero()
    assert blocks.core.matrix == rho.matrix


def test_slocc_preserves_birank_and_ppt():
    rho = qs.rho_3x3()
    st = ex.slocc_extension(rho, em.basis_vector(3, 0))
    assert qs.birank(st) == (5, 6)
    assert em.psd_check(st.partial_transpose("A")).is_psd


def test_slocc_does_not_raise_schmidt_rank():
    rho = qs.rho_3x3()
    phi = em.vector([1, Fraction(1, 2), 0])
    st = ex.slocc_extension(rho, phi)
    for e in rho.edges:
        # the lifted edge is (S (x) 1) e
        lifted = list(qs._sites_vec([], 4, 3))
        for a in range(3):
            for b in range(3):
                lifted[a * 3 + b] = e.vec[a * 3 + b]
        for b in range(3):
            acc = em.ZERO
            for a in range(3):
                acc = acc + phi[a].conj() * e.vec[a * 3 + b]
            lifted[9 + b] = acc
        assert qs.schmidt_rank(tuple(lifted), 4, 3) <= qs.schmidt_rank(e.vec, 3, 3)


def test_slocc_side_b():
    rho = qs.rho_3x3()
    st = ex.slocc_extension(rho, em.basis_vector(3, 1), side="B")
    assert st.dims == (3, 4)
    assert em.psd_check(st.partial_transpose("A")).is_psd


# -- product-pair extensions ----------------------------------------------------------

def test_product_pair_parallel_rejected():
    pipe = qs.rho_4x5()
    sw = qs.swap_subsystems(pipe.stage1)
    beta = em.basis_vector(4, 2)
    with pytest.raises(PreconditionViolation, match="parallel"):
        ex.product_pair_extension(sw, em.basis_vector(3, 0), beta, beta, side="A")


def test_product_pair_range_precondition():
    pipe = qs.rho_4x5()
    sw = qs.swap_subsystems(pipe.stage1)
    # |alpha beta> with beta = |1>_A is not in the range
    with pytest.raises(PreconditionViolation, match="range"):
        ex.product_pair_extension(sw, em.basis_vector(3, 0), em.basis_vector(4, 1),
                                  em.basis_vector(4, 3), side="A")


def test_product_pair_local_rank_precondition():
    # a core with rank(<alpha|rho|alpha>) = 2 is rejected
    rng = random.Random(3)
    v1 = em.kron_vec(em.basis_vector(2, 0), em.vector([1, 0, 0]))
    v2 = em.kron_vec(em.basis_vector(2, 0), em.vector([0, 1, 0]))
    acc = em.ExactMatrix.outer(v1, v1) + em.ExactMatrix.outer(v2, v2)
    core = qs.BipartiteState(2, 3, acc, label="rank2")
    with pytest.raises(PreconditionViolation, match="rank"):
        ex.product_pair_extension(core, em.basis_vector(2, 0), em.vector([1, 0, 0]),
                                  em.vector([0, 1, 0]))


def test_product_pair_pipeline_steps_are_ppt_and_nontrivial():
    pipe = qs.rho_4x5()
    blocks2 = ex.product_pair_extension(pipe.stage1, em.basis_vector(3, 0),
                                        em.basis_vector(4, 2), em.basis_vector(4, 3),
                                        side="B")
    stage2 = ex.assemble_extension(blocks2)
    assert stage2.matrix == pipe.stage2.matrix
    blocks3 = ex.product_pair_extension(pipe.stage2, em.basis_vector(4, 2),
                                        em.basis_vector(4, 0), em.basis_vector(4, 3),
                                        side="B")
    final = ex.assemble_extension(blocks3)
    assert final.matrix == pipe.final.matrix
    for st in (stage2, final):
        assert em.psd_check(st.partial_transpose("A")).is_psd


def test_product_pair_edge_block_minimal_form():
    pipe = qs.rho_4x5()
    blocks = ex.product_pair_extension(pipe.stage1, em.basis_vector(3, 0),
                                       em.basis_vector(4, 2), em.basis_vector(4, 3),
                                       side="B")
    # rho_e = s1 |gamma><gamma| + s2 |beta><beta| with s1 = s2 = 1/3 here
    expect = em.ExactMatrix.diag([0, 0, Fraction(1, 3), Fraction(1, 3)])
    assert blocks.edge == expect


# -- lifting ----------------------------------------------------------------------------

def test_lift_zero_coupling_keeps_vectors():
    rng = random.Random(4)
    core = random_psd_state(rng, 2, 2, nvec=2)
    edge = em.ExactMatrix.diag([1, 1])
    blocks = ex.ExtensionBlocks(core, em.ExactMatrix.zeros(4, 2), edge, "A", 2)
    st = ex.assemble_extension(blocks)
    vecs = [e for e in _decomposition_of(core)]
    lifted, remainder = ex.lift_decomposition(st, "A", 2, [v for v, _ in vecs],
                                              [w for _, w in vecs])
    for (v0, _), (v1, _) in zip(vecs, lifted):
        assert v1[:4] == v0 and em.is_zero_vector(v1[4:])


def _decomposition_of(state):
    res = em.psd_check(state.matrix)
    return [(col, Fraction(d)) for (_, d), col in zip(res.pivots, res.columns)]


def test_lift_single_pure_core():
    v = em.vector([1, 0, 0, 1])
    core = qs.BipartiteState(2, 2, em.ExactMatrix.outer(v, v), label="pure")
    R = em.ExactMatrix([[1, 0], [0, 1], [1, 1], [0, 0]])
    chi = core.matrix.matmul(R)
    st = ex.flat_extension(core, chi)
    lifted, remainder = ex.lift_decomposition(st, "A", 2, [v])
    assert len(lifted) == 1
    assert remainder.is_zero()
    assert qs.schmidt_rank(lifted[0][0], 3, 2) <= qs.schmidt_rank(v, 2, 2) + 1


def test_lift_mismatched_core_rejected():
    rng = random.Random(5)
    core = random_psd_state(rng, 2, 2)
    edge = em.ExactMatrix.identity(2)
    blocks = ex.ExtensionBlocks(core, em.ExactMatrix.zeros(4, 2), edge, "A", 2)
    st = ex.assemble_extension(blocks)
    from pptlab.errors import DecompositionMismatch
    with pytest.raises(DecompositionMismatch):
        ex.lift_decomposition(st, "A", 2, [em.vector([1, 0, 0, 0])])


def test_lift_through_recorded_pipeline():
    pipe = qs.rho_4x5()
    lifted, remainder = ex.lift_decomposition(
        pipe.stage2, "B", 3,
        [e.vec for e in pipe.stage1.edges], [e.weight for e in pipe.stage1.edges])
    for (v1, _), e in zip(lifted, pipe.stage1.edges):
        sr0 = qs.schmidt_rank(e.vec, 4, 3)
        assert qs.schmidt_rank(v1, 4, 4) <= sr0 + 1


# -- projection bounds --------------------------------------------------------------------

def test_projection_bound_on_separable_state():
    d = qs.BipartiteState(2, 2, em.ExactMatrix.diag([1, 1, 2, 1]), label="sep")
    rec = ex.sn_bounds_from_projection(d, "B", em.basis_vector(2, 0))
    assert rec.separability.separable
    assert rec.sn_upper == 2
    assert "SN(state) <= SN(projected) + 1" == rec.relation


def test_projection_bound_stage2():
    pipe = qs.rho_4x5()
    rec = ex.sn_bounds_from_projection(pipe.stage2, "B", em.basis_vector(4, 0))
    assert rec.separability.separable
    assert rec.separability.rule == "R2"
    assert rec.sn_upper == 2


def test_projection_bound_final_state_uninformative():
    pipe = qs.rho_4x5()
    rec = ex.sn_bounds_from_projection(pipe.final, "B", em.basis_vector(5, 0))
    assert not rec.separability.separable
    assert rec.sn_upper is None


def test_projection_bound_non_basis_vector():
    d = qs.BipartiteState(2, 2, em.ExactMatrix.diag([1, 1, 2, 1]), label="sep")
    rec = ex.sn_bounds_from_projection(d, "A", em.vector([1, 1]))
    assert rec.projected.dims == (2, 2)
    # (1 - |phi><phi|/2) applied on side A annihilates the symmetric part
    assert rec.projected.matrix.trace().re < d.matrix.trace().re


# -- extremality ----------------------------------------------------------------------------

def test_extremality_psd_flat_and_perturbed():
    rng = random.Random(6)
    core = random_psd_state(rng, 2, 2)
    R = em.ExactMatrix([[rnd_scalar(rng) for _ in range(2)] for _ in range(4)])
    chi = core.matrix.matmul(R)
    flat = ex.flat_extension(core, chi)
    blocks = ex.split_blocks(flat, "A", 2)
    assert ex.extremality_check_psd(blocks).extremal
    bumped = ex.ExtensionBlocks(blocks.core, blocks.coupling,
                                blocks.edge + em.ExactMatrix.diag([1, 0]), "A", 2)
    verdict = ex.extremality_check_psd(bumped)
    assert not verdict.extremal
    assert len(verdict.rank_one_parts) == 1
    # the decomposition reassembles the extension
    total = verdict.flat_part
    for v, w in verdict.rank_one_parts:
        total = total + em.ExactMatrix.outer(v, v).scale(w)
    assert total == ex.assemble_extension(bumped).matrix


def test_extremality_psd_rank_one_edge_with_zero_core():
    core = qs.BipartiteState(1, 2, em.ExactMatrix.zeros(2, 2), label="0")
    v = em.vector([1, 1])
    blocks = ex.ExtensionBlocks(core, em.ExactMatrix.zeros(2, 2),
                                em.ExactMatrix.outer(v, v), "A", 1)
    assert ex.extremality_check_psd(blocks).extremal


def test_extremality_ppt_counterexample_not_certified():
    # |phi+><phi+| + (|01><01| + |10><10|)/2, scaled by 2 for exactness:
    # satisfies the trivial range intersection yet decomposes
    M = em.ExactMatrix([[1, 0, 0, 1], [0, 1, 0, 0], [0, 0, 1, 0], [1, 0, 0, 1]])
    tau = qs.BipartiteState(2, 2, M, label="bell-plus-products")
    verdict = ex.extremality_check_ppt(ex.split_blocks(tau, "A", 1))
    assert verdict.triv_intersection_ok
    assert verdict.perturbation_dimension == 1
    assert verdict.verdict == "NotCertified"


def test_extremality_ppt_direct_sum_overlap_not_certified():
    core = qs.BipartiteState(1, 2, em.ExactMatrix.identity(2), label="c")
    blocks = ex.ExtensionBlocks(core, em.ExactMatrix.zeros(2, 2),
                                em.ExactMatrix.identity(2), "A", 1)
    verdict = ex.extremality_check_ppt(blocks)
    assert not verdict.triv_intersection_ok
    assert verdict.verdict == "NotCertified"


def test_extremality_ppt_product_pair_regression():
    pipe = qs.rho_4x5()
    blocks = ex.product_pair_extension(pipe.stage1, em.basis_vector(3, 0),
                                       em.basis_vector(4, 2), em.basis_vector(4, 3),
                                       side="B")
    verdict = ex.extremality_check_ppt(blocks)
    # frozen regression: trivial range intersection holds, one perturbation direction
    assert verdict.triv_intersection_ok
    assert verdict.perturbation_dimension == 1
    assert verdict.verdict == "NotCertified"


def test_extremality_ppt_slocc_extension_certified():
    st = ex.slocc_extension(qs.rho_3x3(), em.basis_vector(3, 0))
    verdict = ex.extremality_check_ppt(ex.split_blocks(st, "A", 3))
    assert verdict.verdict == "Extremal"


# -- witness peel ------------------------------------------------------------------------------

def test_witness_peel_block_diagonal():
    rng = random.Random(7)
    Wc = em.ExactMatrix([[1, em.I_UNIT], [-em.I_UNIT, 2]])  # on 1x2 core of a 2x2 split
    We = em.ExactMatrix.diag([1, 2])
    W = ex.assemble_matrix(Wc, em.ExactMatrix.zeros(2, 2), We, (1, 2), "A", 1)
    peeled, psd_part = ex.witness_schur_peel(W, (2, 2), "A", 1)
    assert peeled == Wc
    assert em.psd_check(psd_part).is_psd
    back_core, back_chi, back_edge, _ = ex.split_matrix(psd_part, 2, 2, "A", 1)
    assert back_core.is_zero() and back_chi.is_zero() and back_edge == We


def test_witness_peel_invertible_edge_identity():
    rng = random.Random(8)
    for _ in range(10):
        We_root = em.ExactMatrix([[rnd_scalar(rng) for _ in range(2)] for _ in range(2)])
        We = We_root.matmul(We_root.adjoint()) + em.ExactMatrix.identity(2)
        chi = em.ExactMatrix([[rnd_scalar(rng) for _ in range(2)] for _ in range(2)])
        A = em.ExactMatrix([[rnd_scalar(rng) for _ in range(2)] for _ in range(2)])
        Wc = A + A.adjoint()
        W = ex.assemble_matrix(Wc, chi, We, (1, 2), "A", 1)
        peeled, psd_part = ex.witness_schur_peel(W, (2, 2), "A", 1)
        assert em.psd_check(psd_part).is_psd


def test_witness_peel_range_violation():
    Wc = em.ExactMatrix.identity(2)
    chi = em.ExactMatrix([[1, 0], [0, 1]])
    We = em.ExactMatrix.diag([1, 0])  # R(chi*) not inside R(We)
    W = ex.assemble_matrix(Wc, chi, We, (1, 2), "A", 1)
    with pytest.raises(RangeViolation):
        ex.witness_schur_peel(W, (2, 2), "A", 1)


def test_extension_space_complex_covariance_and_completions():
    """Complex local rotations preserve the solution dimension, and every
    basis coupling admits an exactly-PPT completion (the semantic ground
    truth of the constraint system, exercising the conjugation conventions)."""
    A = em.ExactMatrix([[1, em.I_UNIT, 0],
                        [0, 1, em.GaussianRational(0, Fraction(1, 2))],
                        [0, 0, 1]])
    B = em.ExactMatrix([[1, 0, em.GaussianRational(1, -1)],
                        [0, 1, 0],
                        [0, em.GaussianRational(0, -1), 1]])
    assert em.rank(A) == 3 and em.rank(B) == 3
    op = A.kron(B)
    expectations = [(qs.tiles_complement(), 3), (qs.rho_3x3(), 7)]
    for base, dim in expectations:
        mat = op.matmul(base.matrix).matmul(op.adjoint())
        rot = qs.BipartiteState(3, 3, mat, label=f"{base.label}-rotated")
        assert em.psd_check(rot.partial_transpose("A")).is_psd
        space = ex.ppt_extension_space(rot)
        assert space.dimension == dim
        rho_ta = rot.partial_transpose("A")
        for chi in space.basis:
            K1 = em.solve_on_range_matrix(rot.matrix, chi)
            X = ex.pt_coupling(chi, 3, 3)
            K2 = em.solve_on_range_matrix(rho_ta, X)
            edge = chi.adjoint().matmul(K1) + X.adjoint().matmul(K2)
            ext = ex.assemble_extension(ex.ExtensionBlocks(rot, chi, edge, "A", 3))
            pt = qs.partial_transpose_matrix(ext.matrix, 4, 3, "A")
            assert em.psd_check(pt).is_psd

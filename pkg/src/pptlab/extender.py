"""Local extensions of bipartite states and their exact analysis.

A (1,0)-extension adjoins one level ``|perp>`` to side A of a core state
``rho_c`` and has the block form

    rho = [[rho_c, chi], [chi*, rho_e]],

where ``chi`` couples the new level into the core and ``rho_e`` lives on
``|perp> (x) C^n``.  Extensions of side B reuse the same machinery through
subsystem swaps.  The linear constraints a PPT extension places on ``chi``
are solved exactly in the tripartite Choi-dual picture, where the coupling
becomes a vector ``|chi>`` in A (x) B (x) B' and partial transposition acts
as the swap of B and B'.

Coupling matrices are stored with rows indexed by the core product basis
and columns indexed by the local space of the new block (B-side space of
dimension n when extending A, A-side space of dimension m when extending B).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal, Sequence

from . import exactmat as em
from . import qstates as qs
from .errors import (
    BoundsViolation,
    DecompositionMismatch,
    DimensionMismatch,
    NotHermitian,
    NotPPT,
    NotPsd,
    PPTFailure,
    PreconditionViolation,
)

Side = Literal["A", "B"]


# ---------------------------------------------------------------------------
# block form
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExtensionBlocks:
    """Block data of a single-level local extension."""

    core: qs.BipartiteState
    coupling: em.ExactMatrix
    edge: em.ExactMatrix
    side: Side
    perp_index: int

    def __post_init__(self):
        m, n = self.core.dims
        new_local = n if self.side == "A" else m
        if self.coupling.shape != (m * n, new_local):
            raise DimensionMismatch("coupling block has the wrong shape")
        if self.edge.shape != (new_local, new_local):
            raise DimensionMismatch("edge block has the wrong shape")
        ext_local = (m if self.side == "A" else n) + 1
        if not (0 <= self.perp_index < ext_local):
            raise BoundsViolation("perp_index outside the extended local space")

    @property
    def ext_dims(self) -> tuple:
        m, n = self.core.dims
        return (m + 1, n) if self.side == "A" else (m, n + 1)


def split_matrix(M: em.ExactMatrix, m: int, n: int, side: Side, perp_index: int):
    """Split an operator on an ``m x n`` system at one local level.

    Returns ``(core, coupling, edge, core_dims)`` where ``core`` excludes
    the level ``perp_index`` of the chosen side.
    """
    if M.shape != (m * n, m * n):
        raise DimensionMismatch("operator size does not match dimensions")
    if side == "A":
        if not (0 <= perp_index < m):
            raise BoundsViolation("perp_index outside side A")
        amap = [a for a in range(m) if a != perp_index]
        core_idx = [a * n + b for a in amap for b in range(n)]
        new_idx = [perp_index * n + b for b in range(n)]
        core_dims = (m - 1, n)
    else:
        if not (0 <= perp_index < n):
            raise BoundsViolation("perp_index outside side B")
        bmap = [b for b in range(n) if b != perp_index]
        core_idx = [a * n + b for a in range(m) for b in bmap]
        new_idx = [a * n + perp_index for a in range(m)]
        core_dims = (m, n - 1)
    core = em.ExactMatrix([[M.entry(r, c) for c in core_idx] for r in core_idx])
    chi = em.ExactMatrix([[M.entry(r, c) for c in new_idx] for r in core_idx])
    edge = em.ExactMatrix([[M.entry(r, c) for c in new_idx] for r in new_idx])
    return core, chi, edge, core_dims


def assemble_matrix(core: em.ExactMatrix, chi: em.ExactMatrix, edge: em.ExactMatrix,
                    core_dims: tuple, side: Side, perp_index: int) -> em.ExactMatrix:
    """Inverse of :func:`split_matrix`."""
    m, n = core_dims
    if side == "A":
        m_ext, n_ext = m + 1, n
        amap = [a for a in range(m_ext) if a != perp_index]
        core_idx = [a * n_ext + b for a in amap for b in range(n_ext)]
        new_idx = [perp_index * n_ext + b for b in range(n_ext)]
    else:
        m_ext, n_ext = m, n + 1
        bmap = [b for b in range(n_ext) if b != perp_index]
        core_idx = [a * n_ext + b for a in range(m_ext) for b in bmap]
        new_idx = [a * n_ext + perp_index for a in range(m_ext)]
    size = m_ext * n_ext
    out = [[em.ZERO] * size for _ in range(size)]
    for i, r in enumerate(core_idx):
        for j, c in enumerate(core_idx):
            out[r][c] = core.entry(i, j)
        for j, c in enumerate(new_idx):
            out[r][c] = chi.entry(i, j)
            out[c][r] = chi.entry(i, j).conj()
    for i, r in enumerate(new_idx):
        for j, c in enumerate(new_idx):
            out[r][c] = edge.entry(i, j)
    return em.ExactMatrix(out)


def split_blocks(s: qs.BipartiteState, side: Side, perp_index: int) -> ExtensionBlocks:
    """Exact block extraction; :func:`assemble_extension` inverts it bit-exactly."""
    core_m, chi, edge, core_dims = split_matrix(s.matrix, s.dim_a, s.dim_b, side, perp_index)
    core = qs.BipartiteState(core_dims[0], core_dims[1], core_m,
                             label=f"{s.label}|core", _skip_checks=True)
    return ExtensionBlocks(core, chi, edge, side, perp_index)


def assemble_extension(blocks: ExtensionBlocks, label: str = "") -> qs.BipartiteState:
    m, n = blocks.core.dims
    M = assemble_matrix(blocks.core.matrix, blocks.coupling, blocks.edge,
                        (m, n), blocks.side, blocks.perp_index)
    dims = blocks.ext_dims
    return qs.BipartiteState(dims[0], dims[1], M, label=label or "extension")


# ---------------------------------------------------------------------------
# Schur complements
# ---------------------------------------------------------------------------

def schur_complement(blocks: ExtensionBlocks, which: str = "edge_minus_core") -> em.ExactMatrix:
    """``rho_e - chi* rho_c^{-1} chi`` or ``rho_c - chi rho_e^{-1} chi*``.

    The pseudoinverse acts through range-restricted solving; a range
    violation signals that the assembled operator cannot be PSD.
    """
    rho_c = blocks.core.matrix
    chi, rho_e = blocks.coupling, blocks.edge
    if which == "edge_minus_core":
        K = em.solve_on_range_matrix(rho_c, chi)
        return rho_e - chi.adjoint().matmul(K)
    if which == "core_minus_edge":
        K = em.solve_on_range_matrix(rho_e, chi.adjoint())
        return rho_c - chi.matmul(K)
    raise ValueError(f"unknown Schur complement {which!r}")


def pt_coupling(chi: em.ExactMatrix, m: int, n: int) -> em.ExactMatrix:
    """Coupling block of the partial transpose on the extended side A.

    For real ``|perp>`` the transpose of the extension has coupling
    ``X[(a,b), c] = conj(chi[(a,c), b])``.
    """
    if chi.shape != (m * n, n):
        raise DimensionMismatch("coupling of unexpected shape")
    out = [[em.ZERO] * n for _ in range(m * n)]
    for a in range(m):
        for b in range(n):
            for c in range(n):
                out[a * n + b][c] = chi.entry(a * n + c, b).conj()
    return em.ExactMatrix(out)


def schur_complement_pt(blocks: ExtensionBlocks) -> em.ExactMatrix:
    """Edge Schur complement of the partial transpose of the extension."""
    blocks = _to_a_frame(blocks)
    m, n = blocks.core.dims
    rho_ta = blocks.core.partial_transpose("A")
    X = pt_coupling(blocks.coupling, m, n)
    K = em.solve_on_range_matrix(rho_ta, X)
    return blocks.edge - X.adjoint().matmul(K)


def _to_a_frame(blocks: ExtensionBlocks) -> ExtensionBlocks:
    """Rewrite side-B blocks as side-A blocks of the swapped core."""
    if blocks.side == "A":
        return blocks
    core_sw = qs.swap_subsystems(blocks.core)
    m, n = blocks.core.dims
    chi = blocks.coupling
    rows = [[chi.entry(a * n + b, c) for c in range(m)] for b in range(n) for a in range(m)]
    return ExtensionBlocks(core_sw, em.ExactMatrix(rows), blocks.edge, "A", blocks.perp_index)


# ---------------------------------------------------------------------------
# the PPT constraint system (Choi dual form)
# ---------------------------------------------------------------------------

def coupling_choi_vector(chi: em.ExactMatrix, m: int, n: int) -> em.Vector:
    """Vectorize an A-side coupling into the tripartite index ``(a, b, c)``."""
    out = [em.ZERO] * (m * n * n)
    for ab in range(m * n):
        for c in range(n):
            out[ab * n + c] = chi.entry(ab, c)
    return tuple(out)


def coupling_from_choi(w: em.Vector, m: int, n: int) -> em.ExactMatrix:
    return em.ExactMatrix([[w[ab * n + c] for c in range(n)] for ab in range(m * n)])


@dataclass(frozen=True)
class ExtensionSpace:
    """Solution space of the PPT coupling constraints for a fixed core.

    ``dimension`` counts complex dimensions of the chi-space (the edge block
    is not a degree of freedom: a valid edge exists for every solution).
    ``bound`` is the counting lower bound ``(p+q-mn)n - m`` on the number of
    nontrivial extensions; it may be negative.
    """

    dimension: int
    basis: tuple                       # tuple[ExactMatrix, ...]
    trivial_dimension: int
    bound: int
    solution_space: em.Subspace | None = field(compare=False, default=None)

    @property
    def real_dimension(self) -> int:
        return 2 * self.dimension


def extension_count_bound(m: int, n: int, p: int, q: int) -> int:
    """Counting bound ``(p + q - m n) n - m`` for nontrivial extensions."""
    return (p + q - m * n) * n - m


def slocc_coupling(core: qs.BipartiteState, phi: em.Vector) -> em.ExactMatrix:
    """Coupling of the trivial extension generated by ``1 + |perp><phi|``."""
    m, n = core.dims
    if len(phi) != m:
        raise DimensionMismatch("phi must live on the extended side")
    cols = []
    for c in range(n):
        target = [em.ZERO] * (m * n)
        for a in range(m):
            if phi[a]:
                target[a * n + c] = phi[a]
        cols.append(core.matrix.matvec(tuple(target)))
    return em.ExactMatrix.from_cols(cols)


def ppt_extension_space(core: qs.BipartiteState) -> ExtensionSpace:
    """Solve the joint fixed-point system for side-A PPT couplings.

    Builds the projector ``P`` on R(rho_c) acting on (A,B) and the
    conjugated projector on R(rho_c^Ta) acting on (A,B'), both extended by
    the identity on the remaining factor, and intersects their ranges
    exactly.  Side-B extensions are analyzed on the swapped core.
    """
    m, n = core.dims
    rho = core.matrix
    rho_ta = core.partial_transpose("A")
    if not em.psd_check(rho_ta).is_psd:
        raise NotPPT("core state is not PPT")
    P = em.orth_projector(em.column_space(rho))
    Q = em.orth_projector(em.column_space(rho_ta)).conjugate()
    N = m * n * n
    P1 = P.kron(em.ExactMatrix.identity(n))
    rows = [[em.ZERO] * N for _ in range(N)]
    for a in range(m):
        for c in range(n):
            for a2 in range(m):
                for c2 in range(n):
                    v = Q.entry(a * n + c, a2 * n + c2)
                    if v:
                        for b in range(n):
                            rows[(a * n + b) * n + c][(a2 * n + b) * n + c2] = v
    P2 = em.ExactMatrix(rows)
    joint = P1 + P2 - em.ExactMatrix.identity(N).scale(2)
    _, sol = em.rank_and_kernel(joint)
    basis = tuple(coupling_from_choi(w, m, n) for w in sol.basis)

    trivial_vecs = [coupling_choi_vector(slocc_coupling(core, em.basis_vector(m, i)), m, n)
                    for i in range(m)]
    trivial_dim = em.Subspace(N, trivial_vecs).dim
    p = em.rank(rho)
    q = em.rank(rho_ta)
    return ExtensionSpace(dimension=sol.dim, basis=basis, trivial_dimension=trivial_dim,
                          bound=extension_count_bound(m, n, p, q), solution_space=sol)


def ppt_extension_space_stacked(core: qs.BipartiteState) -> em.Subspace:
    """Independent solver route: null space of the stacked complements."""
    m, n = core.dims
    rho = core.matrix
    rho_ta = core.partial_transpose("A")
    P = em.orth_projector(em.column_space(rho))
    Q = em.orth_projector(em.column_space(rho_ta)).conjugate()
    N = m * n * n
    iden = em.ExactMatrix.identity(N)
    P1 = P.kron(em.ExactMatrix.identity(n))
    rows2 = [[em.ZERO] * N for _ in range(N)]
    for a in range(m):
        for c in range(n):
            for a2 in range(m):
                for c2 in range(n):
                    v = Q.entry(a * n + c, a2 * n + c2)
                    if v:
                        for b in range(n):
                            rows2[(a * n + b) * n + c][(a2 * n + b) * n + c2] = v
    stacked = [list((iden - P1).row(i)) for i in range(N)]
    stacked += [list((iden - em.ExactMatrix(rows2)).row(i)) for i in range(N)]
    _, kern = em.rank_and_kernel(em.ExactMatrix(stacked))
    return kern


# ---------------------------------------------------------------------------
# concrete extensions
# ---------------------------------------------------------------------------

def slocc_extension(core: qs.BipartiteState, phi: em.Vector, side: Side = "A",
                    label: str = "") -> qs.BipartiteState:
    """Trivial extension ``(S (x) 1) rho (S (x) 1)*`` with ``S = 1 + |perp><phi|``.

    The new level is appended as the last local index.  The output is PPT
    iff the core is, and no decomposition vector gains Schmidt rank.
    """
    if side == "B":
        sw = slocc_extension(qs.swap_subsystems(core), phi, "A")
        out = qs.swap_subsystems(sw)
        return qs.BipartiteState(out.dim_a, out.dim_b, out.matrix,
                                 label=label or f"slocc({core.label})", _skip_checks=True)
    m, n = core.dims
    chi = slocc_coupling(core, phi)
    # edge[b, c] = <phi b| rho |phi c>
    edge = em.ExactMatrix([[_phi_sandwich(core.matrix, phi, b, c, m, n) for c in range(n)]
                           for b in range(n)])
    blocks = ExtensionBlocks(core, chi, edge, "A", m)
    return assemble_extension(blocks, label=label or f"slocc({core.label})")


def _phi_sandwich(rho: em.ExactMatrix, phi: em.Vector, b: int, c: int, m: int, n: int):
    """Entry ``<phi, b| rho |phi, c>``."""
    acc = em.ZERO
    for a in range(m):
        if not phi[a]:
            continue
        for a2 in range(m):
            if phi[a2]:
                v = rho.entry(a * n + b, a2 * n + c)
                if v:
                    acc = acc + phi[a].conj() * v * phi[a2]
    return acc


def product_pair_extension(core: qs.BipartiteState, alpha: em.Vector, beta: em.Vector,
                           gamma: em.Vector, side: Side = "A") -> ExtensionBlocks:
    """Nontrivial PPT extension with coupling ``|alpha beta><gamma|``.

    ``alpha`` lives on the extended side, ``beta`` and ``gamma`` on the other
    side.  Preconditions, checked exactly: ``|alpha beta>`` in R(rho_c),
    ``|conj(alpha) gamma>`` in R(rho_c^Ta), ``beta`` and ``gamma`` not
    parallel, and ``rank(<alpha|rho_c|alpha>) > 2``.  The edge block takes
    the minimal-rank form

        rho_e = <ab|rho_c^{-1}|ab> |gamma><gamma| + <ag|(rho^Ta)^{-1}|ag> |beta><beta|.

    The assembled extension is verified PPT exactly before returning, and
    verified to lie outside the trivial SLOCC coupling family.
    """
    if side == "B":
        blocks_sw = product_pair_extension(qs.swap_subsystems(core), alpha, beta, gamma, "A")
        m, n = core.dims
        chi_sw = blocks_sw.coupling
        rows = [[chi_sw.entry(b * m + a, c) for c in range(m)] for a in range(m) for b in range(n)]
        return ExtensionBlocks(core, em.ExactMatrix(rows), blocks_sw.edge, "B", n)

    m, n = core.dims
    if len(alpha) != m or len(beta) != n or len(gamma) != n:
        raise DimensionMismatch("alpha on the extended side, beta/gamma on the other side")
    rho = core.matrix
    rho_ta = core.partial_transpose("A")
    bg = em.vdot(beta, gamma)
    if bg.abs2() == em.vdot(beta, beta).re * em.vdot(gamma, gamma).re:
        raise PreconditionViolation("beta and gamma are parallel")
    ab = em.kron_vec(alpha, beta)
    ag = em.kron_vec(em.vec_conj(alpha), gamma)
    if not em.column_space(rho).contains(ab):
        raise PreconditionViolation("product vector |alpha beta> is not in the range of rho_c")
    if not em.column_space(rho_ta).contains(ag):
        raise PreconditionViolation("partial conjugate not in the transposed range of rho_c")
    loc = em.ExactMatrix([[_alpha_sandwich(rho, alpha, b, c, m, n) for c in range(n)]
                          for b in range(n)])
    r_loc = em.rank(loc)
    if r_loc <= 2:
        raise PreconditionViolation(
            f"rank(<alpha|rho_c|alpha>) = {r_loc} is not > 2 (boundary cases are rejected)")
    chi = em.ExactMatrix.outer(ab, gamma)
    s1 = em.vdot(ab, em.solve_on_range(rho, ab))
    s2 = em.vdot(ag, em.solve_on_range(rho_ta, ag))
    edge = em.ExactMatrix.outer(gamma, gamma).scale(s1) + em.ExactMatrix.outer(beta, beta).scale(s2)
    blocks = ExtensionBlocks(core, chi, edge, "A", m)
    try:
        ext = assemble_extension(blocks)
    except NotPsd as exc:
        raise PPTFailure(f"assembled extension is not PSD: {exc}") from exc
    pt = qs.partial_transpose_matrix(ext.matrix, m + 1, n, "A")
    if not em.psd_check(pt).is_psd:
        raise PPTFailure("assembled extension fails the exact PPT check")
    trivial = [coupling_choi_vector(slocc_coupling(core, em.basis_vector(m, i)), m, n)
               for i in range(m)]
    span = em.Subspace(m * n * n, trivial)
    if span.contains(coupling_choi_vector(chi, m, n)):
        raise PreconditionViolation("coupling lies inside the trivial SLOCC family")
    return blocks


def _alpha_sandwich(rho: em.ExactMatrix, alpha: em.Vector, b: int, c: int, m: int, n: int):
    """Entry ``<alpha, b| rho |alpha, c>`` of the local B-side operator."""
    acc = em.ZERO
    for a in range(m):
        if not alpha[a]:
            continue
        for a2 in range(m):
            if alpha[a2]:
                v = rho.entry(a * n + b, a2 * n + c)
                if v:
                    acc = acc + alpha[a].conj() * v * alpha[a2]
    return acc


def flat_extension(core: qs.BipartiteState, chi: em.ExactMatrix, side: Side = "A",
                   label: str = "") -> qs.BipartiteState:
    """Extension with the unique edge block making the Schur complement zero."""
    if side == "B":
        m, n = core.dims
        rows = [[chi.entry(a * n + b, c) for c in range(m)] for b in range(n) for a in range(m)]
        sw = flat_extension(qs.swap_subsystems(core), em.ExactMatrix(rows), "A")
        out = qs.swap_subsystems(sw)
        return qs.BipartiteState(out.dim_a, out.dim_b, out.matrix,
                                 label=label or f"flat({core.label})", _skip_checks=True)
    m, n = core.dims
    K = em.solve_on_range_matrix(core.matrix, chi)
    edge = chi.adjoint().matmul(K)
    blocks = ExtensionBlocks(core, chi, edge, "A", m)
    return assemble_extension(blocks, label=label or f"flat({core.label})")


# ---------------------------------------------------------------------------
# decomposition lifting and projection bounds
# ---------------------------------------------------------------------------

def lift_decomposition(ext: qs.BipartiteState, side: Side, perp_index: int,
                       core_vectors: Sequence[em.Vector],
                       weights: Sequence[Fraction] | None = None):
    """Lift a conic decomposition of the core through an extension.

    Given ``sum_i w_i |v_i><v_i| = rho_c`` exactly, produces lifted vectors
    ``(v_i ; chi* rho_c^{-1} v_i)`` and the separable remainder
    ``rho_{e\\c} (x) |perp><perp|`` such that the weighted sum reproduces the
    extension bit-exactly.  Each lift raises the Schmidt rank by at most 1.

    Returns ``(lifted, remainder)`` where ``lifted`` is a list of
    ``(vector, weight)`` pairs on the extended space and ``remainder`` is the
    embedded remainder matrix.
    """
    if weights is None:
        weights = [Fraction(1)] * len(core_vectors)
    if len(weights) != len(core_vectors):
        raise DimensionMismatch("one weight per core vector")
    blocks = split_blocks(ext, side, perp_index)
    m, n = blocks.core.dims
    acc = em.ExactMatrix.zeros(m * n, m * n)
    for v, w in zip(core_vectors, weights):
        acc = acc + em.ExactMatrix.outer(v, v).scale(w)
    if acc != blocks.core.matrix:
        raise DecompositionMismatch("core vectors do not reproduce the core block")
    K = em.solve_on_range_matrix(blocks.core.matrix, blocks.coupling)
    Kadj = K.adjoint()
    m_ext, n_ext = ext.dims
    lifted = []
    for v, w in zip(core_vectors, weights):
        tail = Kadj.matvec(v)
        out = [em.ZERO] * (m_ext * n_ext)
        if side == "A":
            amap = [a for a in range(m_ext) if a != perp_index]
            for a in range(m):
                for b in range(n):
                    out[amap[a] * n_ext + b] = v[a * n + b]
            for b, t in enumerate(tail):
                out[perp_index * n_ext + b] = t
        else:
            bmap = [b for b in range(n_ext) if b != perp_index]
            for a in range(m):
                for b in range(n):
                    out[a * n_ext + bmap[b]] = v[a * n + b]
            for a, t in enumerate(tail):
                out[a * n_ext + perp_index] = t
        lifted.append((tuple(out), w))
    remainder_edge = blocks.edge - blocks.coupling.adjoint().matmul(K)
    zero_core = em.ExactMatrix.zeros(m * n, m * n)
    zero_chi = em.ExactMatrix.zeros(m * n, remainder_edge.rows)
    remainder = assemble_matrix(zero_core, zero_chi, remainder_edge, (m, n), side, perp_index)
    total = remainder
    for v, w in lifted:
        total = total + em.ExactMatrix.outer(v, v).scale(w)
    assert total == ext.matrix, "lift identity failed"
    return lifted, remainder


@dataclass(frozen=True)
class ProjectionBound:
    """Certified relation between a state and one local projection of it.

    Records ``SN(state) <= SN(projected) + 1`` for the projector
    ``1 - |phi><phi|`` on the chosen side; when the projected state is
    certified separable this pins ``SN(state) <= 2``.
    """

    side: Side
    removed_vector: em.Vector
    projected: qs.BipartiteState
    separability: object
    sn_upper: int | None

    @property
    def relation(self) -> str:
        return "SN(state) <= SN(projected) + 1"


def sn_bounds_from_projection(s: qs.BipartiteState, side: Side,
                              removed_vector: em.Vector) -> ProjectionBound:
    """Project out one local direction and certify the remainder.

    When the removed vector is a computational basis direction the projected
    state is restricted to the surviving local indices before the
    separability rules run.
    """
    from . import algcert  # deferred: algcert has no dependency back on this module

    local_dim = s.dim_a if side == "A" else s.dim_b
    if len(removed_vector) != local_dim:
        raise DimensionMismatch("removed vector must live on the chosen side")
    nz = [i for i, x in enumerate(removed_vector) if x]
    if not nz:
        raise PreconditionViolation("removed vector must be nonzero")
    if len(nz) == 1:
        keep = [i for i in range(local_dim) if i != nz[0]]
        projected = qs.project_local_block(
            s, keep if side == "A" else list(range(s.dim_a)),
            keep if side == "B" else list(range(s.dim_b)))
    else:
        phi = removed_vector
        norm2 = em.vdot(phi, phi)
        A = em.ExactMatrix.identity(local_dim) - em.ExactMatrix.outer(phi, phi).scale(em.ONE / norm2)
        op = A.kron(em.ExactMatrix.identity(s.dim_b)) if side == "A" \
            else em.ExactMatrix.identity(s.dim_a).kron(A)
        mat = op.matmul(s.matrix).matmul(op.adjoint())
        projected = qs.BipartiteState(s.dim_a, s.dim_b, mat, label=f"{s.label}|proj",
                                      _skip_checks=True)
    verdict = algcert.separability_rules(projected)
    upper = 2 if verdict.separable else None
    return ProjectionBound(side, removed_vector, projected, verdict, upper)


# ---------------------------------------------------------------------------
# extremality
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PsdExtremality:
    extremal: bool
    reason: str
    flat_part: em.ExactMatrix | None = None      # assembled flat extension
    rank_one_parts: tuple = ()                   # weighted vectors in R(rho_ec) (x) |perp>


def extremality_check_psd(blocks: ExtensionBlocks) -> PsdExtremality:
    """Extremality in the cone of PSD local extensions.

    Flat extensions are extremal; a nonflat extension splits into its flat
    part plus rank-one terms supported on the new level.
    """
    blocks_a = _to_a_frame(blocks)
    m, n = blocks_a.core.dims
    if blocks_a.core.matrix.is_zero():
        r = em.rank(blocks_a.edge)
        if r <= 1:
            return PsdExtremality(True, "rank-one edge with zero core")
        res = em.psd_check(blocks_a.edge)
        parts = _embedded_rank_ones(res, blocks_a, m, n)
        return PsdExtremality(False, "edge block of rank above one", None, parts)
    rho_ec = schur_complement(blocks_a, "edge_minus_core")
    if rho_ec.is_zero():
        return PsdExtremality(True, "flat extension")
    K = em.solve_on_range_matrix(blocks_a.core.matrix, blocks_a.coupling)
    flat_edge = blocks_a.coupling.adjoint().matmul(K)
    flat = assemble_matrix(blocks_a.core.matrix, blocks_a.coupling, flat_edge,
                           (m, n), "A", blocks_a.perp_index)
    res = em.psd_check(rho_ec)
    parts = _embedded_rank_ones(res, blocks_a, m, n)
    return PsdExtremality(False, "nonzero Schur complement", flat, parts)


def _embedded_rank_ones(res: em.PsdResult, blocks_a: ExtensionBlocks, m: int, n: int) -> tuple:
    parts = []
    for (_, d), col in zip(res.pivots, res.columns):
        vec = [em.ZERO] * ((m + 1) * n)
        for b, x in enumerate(col):
            vec[blocks_a.perp_index * n + b] = x
        parts.append((tuple(vec), Fraction(d)))
    return tuple(parts)


@dataclass(frozen=True)
class PptExtremality:
    """Sufficient-condition verdict for extremality in the PPT extension cone.

    ``Extremal`` requires the edge Schur complements of the extension and of
    its partial transpose to have trivially intersecting ranges, and the
    exact perturbation space of couplings compatible with both range
    structures to vanish.  When the conditions fail the verdict is
    ``NotCertified``: the criterion is one-sided.
    """

    certified: bool
    triv_intersection_ok: bool
    perturbation_dimension: int
    verdict: str

    @property
    def notes(self) -> str:
        return ("sufficient condition only; NotCertified does not assert "
                "non-extremality")


def extremality_check_ppt(blocks: ExtensionBlocks) -> PptExtremality:
    blocks_a = _to_a_frame(blocks)
    m, n = blocks_a.core.dims
    ext = assemble_extension(blocks_a)
    pt = qs.partial_transpose_matrix(ext.matrix, m + 1, n, "A")
    if not em.psd_check(pt).is_psd:
        raise NotPPT("extension is not PPT")
    rho_ec = schur_complement(blocks_a, "edge_minus_core")
    rho_ta_ec = schur_complement_pt(blocks_a)
    r1 = em.column_space(rho_ec)
    r2 = em.column_space(rho_ta_ec)
    triv = em.subspace_intersection(r1, r2).dim == 0

    rho = blocks_a.core.matrix
    rho_ta = blocks_a.core.partial_transpose("A")
    u_basis = em.column_space(rho).basis
    w_basis = em.column_space(rho_ec.conjugate()).basis
    v_basis = em.column_space(rho_ta.conjugate()).basis
    y_basis = r2.basis
    N = m * n * n
    s1 = []
    for u in u_basis:
        for w in w_basis:
            vec = [em.ZERO] * N
            for ab in range(m * n):
                if u[ab]:
                    for c in range(n):
                        if w[c]:
                            vec[ab * n + c] = u[ab] * w[c]
            s1.append(tuple(vec))
    s2 = []
    for v in v_basis:
        for y in y_basis:
            vec = [em.ZERO] * N
            for a in range(m):
                for c in range(n):
                    x = v[a * n + c]
                    if x:
                        for b in range(n):
                            if y[b]:
                                vec[(a * n + b) * n + c] = x * y[b]
            s2.append(tuple(vec))
    inter = em.subspace_intersection(em.Subspace(N, s1), em.Subspace(N, s2))
    certified = triv and inter.dim == 0
    verdict = "Extremal" if certified else "NotCertified"
    return PptExtremality(certified, triv, inter.dim, verdict)


# ---------------------------------------------------------------------------
# witness peel-off
# ---------------------------------------------------------------------------

def witness_schur_peel(W: em.ExactMatrix, dims: tuple, side: Side, perp_index: int):
    """Peel one local level off a Hermitian witness by a Schur complement.

    Splits ``W`` at the given level and returns ``(W_peeled, psd_part)``
    with ``W_peeled = W_c - chi W_e^{-1} chi*`` and ``psd_part`` the flat
    completion ``[[chi W_e^{-1} chi*, chi], [chi*, W_e]]``; the original
    witness equals the embedded peeled block plus ``psd_part`` bit-exactly.
    Requires ``R(chi*) <= R(W_e)``; the violation of that range condition is
    exactly the obstruction the peel-off detects.
    """
    m, n = dims
    if not W.is_hermitian():
        raise NotHermitian("witness must be Hermitian")
    Wc, chi, We, core_dims = split_matrix(W, m, n, side, perp_index)
    K = em.solve_on_range_matrix(We, chi.adjoint())  # W_e^{-1} chi*
    flat_core = chi.matmul(K)
    W_peeled = Wc - flat_core
    psd_part = assemble_matrix(flat_core, chi, We, core_dims, side, perp_index)
    embedded = assemble_matrix(W_peeled, em.ExactMatrix.zeros(*chi.shape),
                               em.ExactMatrix.zeros(*We.shape), core_dims, side, perp_index)
    assert embedded + psd_part == W, "peel identity failed"
    return W_peeled, psd_part

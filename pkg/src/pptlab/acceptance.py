"""End-to-end acceptance suite.

Each criterion is a function returning a :class:`CriterionResult`; the
pytest module and the ``reproduce`` CLI verb both drive :func:`run_all`.
Criterion 4's k=5 member is an opt-in long job (set ``PPTLAB_RUN_K5=1``);
when skipped it is reported as not-desk-scale without failing the suite.
"""

from __future__ import annotations

import os
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction

from . import algcert as ac
from . import exactmat as em
from . import extender as ex
from . import qstates as qs

SURVEY_SEED = 2026
RANDOM_SEED = 7


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    seconds: float
    limit: float | None
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        budget = f" (limit {self.limit:.0f}s)" if self.limit else ""
        return f"{status}  criterion {self.number}: {self.name}  [{self.seconds:.2f}s{budget}]"


def _run(number, name, limit, fn) -> CriterionResult:
    t0 = time.time()
    try:
        details = fn()
        passed = True
    except AssertionError as exc:
        details = {"error": str(exc)}
        passed = False
    dt = time.time() - t0
    if passed and limit is not None and dt > limit:
        passed = False
        details["error"] = f"runtime {dt:.2f}s exceeds the {limit:.0f}s budget"
    return CriterionResult(number, name, passed, dt, limit, details)


# ---------------------------------------------------------------------------

def criterion_1() -> CriterionResult:
    """rho3x3 regression: exact PPT, birank, PT decomposition, minor chain,
    edge-state verdict."""

    def body():
        rho = qs.rho_3x3()
        assert em.psd_check(rho.matrix).is_psd, "rho not PSD"
        pt = rho.partial_transpose("B")
        assert em.psd_check(pt).is_psd, "partial transpose not PSD"
        assert qs.birank(rho) == (5, 6), f"birank {qs.birank(rho)}"
        fs = [
            (qs._sites_vec([(0, 2), (1, 1)], 3, 3, minus=[(2, 0)]), 1),
            (qs._sites_vec([(0, 2), (2, 0)], 3, 3), 2),
            (qs._sites_vec([(0, 1), (1, 0)], 3, 3), 1),
            (qs._sites_vec([(1, 2), (2, 1)], 3, 3), 1),
            (qs._sites_vec([(0, 0)], 3, 3), 1),
            (qs._sites_vec([(2, 2)], 3, 3), 1),
        ]
        acc = em.ExactMatrix.zeros(9, 9)
        for v, w in fs:
            acc = acc + em.ExactMatrix.outer(v, v).scale(w)
        assert acc == pt, "PT does not equal the weighted f-decomposition bit-exactly"
        sym = ac.range_coordinate_matrix(rho, require_orthogonal_basis=True)
        minors = ac.minor_ideal(sym, 2)
        gb = ac.buchberger(minors)
        ring = sym.ring
        psi00, psi01, psi10 = (ring.var(v) for v in ("psi00", "psi01", "psi10"))
        assert ac.in_ideal(psi00 ** 2, gb), "psi00^2 not in the 2-minor ideal"
        assert ac.in_ideal(psi01 * psi10, gb), "psi01*psi10 not in the 2-minor ideal"
        cands = [qs._sites_vec([(0, 2)], 3, 3), qs._sites_vec([(2, 0)], 3, 3)]
        verdict = ac.edge_state_check(rho, cands)
        assert verdict.is_edge_for_candidates, "edge-state check failed"
        assert all(d["in_range"] for d in verdict.details)
        return {"birank": [5, 6], "edge_state": True,
                "groebner_size": len(gb)}

    return _run(1, "rho3x3 regression", 1.0, body)


def criterion_2() -> CriterionResult:
    """The 4x5 pipeline: three recorded steps, exact PPT, lower bound with
    N=4, cofactor identity, upper bound 3, combined SN = 3."""

    def body():
        pipe = qs.rho_4x5()
        assert [s.kind for s in pipe.steps] == ["direct_sum", "product_pair", "product_pair"]
        final = pipe.final
        assert final.dims == (4, 5)
        assert em.psd_check(final.partial_transpose("A")).is_psd, "final state not PPT"
        witness = final.edges[0].vec
        cert = ac.certify_sn_lower(final, witness, 3)
        assert isinstance(cert, ac.SNCertificate), f"lower bound inconclusive: {cert}"
        assert cert.evidence["power"] == 4, f"observed N = {cert.evidence['power']}"
        assert ac.cofactor_identity_check(), "cofactor identity failed"
        upper = ac.sn_upper_from_decomposition([e.vec for e in final.edges],
                                               [e.weight for e in final.edges], final)
        assert upper.value <= 3, f"upper bound {upper.value}"
        assert cert.value == upper.value == 3
        return {"lower": cert.value, "power": cert.evidence["power"], "upper": upper.value,
                "schmidt_number": 3}

    return _run(2, "4x5 extension pipeline, SN = 3", 10.0, body)


def criterion_3() -> CriterionResult:
    """Intermediate 4x4 state: separable projection and SN <= 2."""

    def body():
        pipe = qs.rho_4x5()
        bound = ex.sn_bounds_from_projection(pipe.stage2, "B", em.basis_vector(4, 0))
        verdict = bound.separability
        assert verdict.separable and verdict.rule == "R2", \
            f"projection not R2-separable: {verdict}"
        block_dims = [tuple(sorted(b["dims"])) for b in verdict.details["blocks"]]
        assert (2, 3) in block_dims, f"no 2x3 block found: {block_dims}"
        ph_blocks = [b for b in verdict.details["blocks"] if b["rule"] == "peres-horodecki"]
        assert len(ph_blocks) == 1
        assert bound.sn_upper == 2
        return {"rule": verdict.rule, "blocks": verdict.details["blocks"],
                "products": len(verdict.details["products"]), "sn_upper": 2}

    return _run(3, "stage-2 projection separable (R2), SN <= 2", 1.0, body)


def criterion_4(include_k5: bool | None = None) -> CriterionResult:
    """Scaling family: exact PPT, SR <= 2 transpose decomposition, minimal
    antidiagonal weights, SN = k for k in {2, 3, 4} (k=5 opt-in)."""
    if include_k5 is None:
        include_k5 = os.environ.get("PPTLAB_RUN_K5", "") == "1"

    def body():
        details = {}
        ks = (2, 3, 4, 5) if include_k5 else (2, 3, 4)
        for k in ks:
            st = qs.rho_family(k)
            dim = 2 * k - 1
            pt = st.partial_transpose("A")
            assert em.psd_check(pt).is_psd, f"k={k} not PPT"
            dec = qs.family_pt_decomposition(k)
            acc = em.ExactMatrix.zeros(dim * dim, dim * dim)
            for e in dec:
                acc = acc + em.ExactMatrix.outer(e.vec, e.vec).scale(e.weight)
            assert acc == pt, f"k={k}: transpose decomposition not bit-exact"
            assert max(qs.schmidt_rank(e.vec, dim, dim) for e in dec) <= 2
            omega = qs.family_kernel_vector(k)
            assert not any(pt.matvec(omega)), f"k={k}: Omega not in the kernel"
            deltas = [e for e in st.edges if e.name.startswith("delta")]
            assert deltas and all(em.vdot(omega, e.vec) for e in deltas), \
                f"k={k}: Omega overlaps vanish"
            alpha = st.edges[0].vec
            excl = [e.name for e in st.edges if e.name.startswith("delta")]
            # k <= 4 runs the Groebner route; the k=5 minor system is handled
            # by the homogeneous cofactor solver (explicit Nullstellensatz
            # identity), which the smaller members cross-check against
            method = "groebner" if k <= 4 else "linear"
            cert = ac.certify_sn_lower(st, alpha, k, exclude_vars=excl, naming="edge",
                                       method=method)
            assert isinstance(cert, ac.SNCertificate), f"k={k} lower bound inconclusive"
            assert cert.evidence["power"] == k, \
                f"k={k}: observed power {cert.evidence['power']}"
            upper = ac.sn_upper_from_decomposition([e.vec for e in st.edges],
                                                   [e.weight for e in st.edges], st)
            assert upper.value == k, f"k={k}: upper bound {upper.value}"
            details[f"k{k}"] = {"power": cert.evidence["power"], "sn": k, "method": method}
        if not include_k5:
            details["k5"] = "skipped long job (set PPTLAB_RUN_K5=1 to include)"
        return details

    limit = None if include_k5 else 600.0
    return _run(4, "scaling family SN = k (k = 2, 3, 4)", limit, body)


def criterion_5() -> CriterionResult:
    """Tiles-complement: kernel products by substitution, extension space of
    dimension exactly 3 (trivial extensions only)."""

    def body():
        tiles = qs.tiles_complement()
        for v in qs.tiles_kernel_products():
            assert not any(tiles.matrix.matvec(v)), "kernel substitution failed"
        assert qs.birank(tiles) == (4, 4)
        space = ex.ppt_extension_space(tiles)
        assert space.dimension == 3, f"extension dimension {space.dimension}"
        assert space.trivial_dimension == 3
        return {"birank": [4, 4], "dimension": 3, "trivial": 3}

    return _run(5, "Tiles-complement unextendibility (dimension 3)", 5.0, body)


def criterion_6() -> CriterionResult:
    """Counting-bound consistency over the corpus; the two pipeline couplings
    solve the linear constraint system and are nontrivial."""

    def body():
        pipe = qs.rho_4x5()
        corpus = {
            "rho3x3": qs.rho_3x3(),
            "family-k2": qs.rho_family(2),
            "tiles": qs.tiles_complement(),
            "mixed-2x2": qs.BipartiteState(2, 2, em.ExactMatrix.identity(4), label="mm"),
            "stage1-swapped": qs.swap_subsystems(pipe.stage1),
            "stage2-swapped": qs.swap_subsystems(pipe.stage2),
        }
        summary = {}
        spaces = {}
        for name, st in corpus.items():
            space = ex.ppt_extension_space(st)
            spaces[name] = space
            m = st.dim_a
            assert space.dimension >= m, f"{name}: dim {space.dimension} < m"
            if space.bound > 0:
                assert space.dimension >= space.bound + m, \
                    f"{name}: dim {space.dimension} < bound {space.bound} + m"
            summary[name] = {"dimension": space.dimension, "bound": space.bound,
                             "trivial": space.trivial_dimension}
        assert spaces["rho3x3"].bound == 3
        assert ex.extension_count_bound(3, 3, 5, 6) == 3
        assert ex.extension_count_bound(3, 3, 4, 4) == -6
        assert ex.extension_count_bound(2, 4, 8, 8) == 30

        # the two nontrivial pipeline couplings solve the constraint system
        step_specs = [
            ("stage1-swapped", pipe.stage1, em.basis_vector(3, 0),
             em.basis_vector(4, 2), em.basis_vector(4, 3)),
            ("stage2-swapped", pipe.stage2, em.basis_vector(4, 2),
             em.basis_vector(4, 0), em.basis_vector(4, 3)),
        ]
        for name, core, alpha, beta, gamma in step_specs:
            sw = qs.swap_subsystems(core)
            blocks = ex.product_pair_extension(sw, alpha, beta, gamma, side="A")
            m, n = sw.dims
            chi_vec = ex.coupling_choi_vector(blocks.coupling, m, n)
            space = spaces[name]
            assert space.solution_space.contains(chi_vec), f"{name}: coupling not a solution"
            trivial = em.Subspace(m * n * n, [
                ex.coupling_choi_vector(ex.slocc_coupling(sw, em.basis_vector(m, i)), m, n)
                for i in range(m)])
            assert not trivial.contains(chi_vec), f"{name}: coupling is trivial"
            summary[name]["pipeline_coupling"] = "nontrivial solution"
        return summary

    return _run(6, "counting-bound consistency and pipeline couplings", 5.0, body)


def criterion_7(seed: int = RANDOM_SEED) -> CriterionResult:
    """50 randomized decomposition lifts reconstruct bit-exactly with all
    Schmidt-rank increments at most 1."""

    def body():
        rng = random.Random(seed)
        cases = 0
        while cases < 50:
            m = rng.randint(1, 3)
            n = rng.randint(1, 3)
            nvec = rng.randint(1, 4)
            vecs = [_random_vector(rng, m * n) for _ in range(nvec)]
            if all(em.is_zero_vector(v) for v in vecs):
                continue
            core_mat = em.ExactMatrix.zeros(m * n, m * n)
            for v in vecs:
                core_mat = core_mat + em.ExactMatrix.outer(v, v)
            core = qs.BipartiteState(m, n, core_mat, label="random-core")
            R = em.ExactMatrix([[_random_scalar(rng) for _ in range(n)]
                                for _ in range(m * n)])
            chi = core_mat.matmul(R)
            K = em.solve_on_range_matrix(core_mat, chi)
            gcols = rng.randint(1, 2)
            G = em.ExactMatrix([[_random_scalar(rng) for _ in range(gcols)]
                                for _ in range(n)])
            edge = chi.adjoint().matmul(K) + G.matmul(G.adjoint())
            blocks = ex.ExtensionBlocks(core, chi, edge, "A", m)
            ext = ex.assemble_extension(blocks)
            lifted, remainder = ex.lift_decomposition(ext, "A", m, vecs)
            total = remainder
            for v, w in lifted:
                total = total + em.ExactMatrix.outer(v, v).scale(w)
            assert total == ext.matrix, "reconstruction not bit-exact"
            for v0, (v1, _) in zip(vecs, lifted):
                sr0 = qs.schmidt_rank(v0, m, n)
                sr1 = qs.schmidt_rank(v1, m + 1, n)
                assert sr1 <= sr0 + 1, f"SR increment {sr1 - sr0}"
            cases += 1
        return {"cases": 50, "failures": 0}

    return _run(7, "decomposition lifting property suite (50 cases)", None, body)


def criterion_8(seed: int = SURVEY_SEED) -> CriterionResult:
    """Survey replication: 3x3 birank (4,4), 100 samples: at least 90
    converge below 1e-9 and every converged sample has extension dimension
    3; the numeric dimension agrees with the exact solver on rho3x3 and the
    k=2 family member."""

    def body():
        from . import numlab as nl

        reports = nl.unextendibility_survey([(3, 3)], [(4, 4)], samples=100, seed=seed)
        r = reports[0]
        assert r.converged >= 90, f"only {r.converged}/100 converged"
        assert r.residual_max < 1e-9, f"residual {r.residual_max}"
        assert set(r.extension_dims) == {3}, f"dimensions {r.extension_dims}"
        assert sum(r.extension_dims.values()) + r.ambiguous == r.converged
        assert not r.deviations
        oracle = {}
        for name, st in (("rho3x3", qs.rho_3x3()), ("family-k2", qs.rho_family(2))):
            exact_dim = ex.ppt_extension_space(st).dimension
            num_dim = nl.numeric_extension_dimension(nl.from_exact(st))
            assert num_dim == exact_dim, f"{name}: numeric {num_dim} vs exact {exact_dim}"
            oracle[name] = exact_dim
        return {"converged": r.converged, "residual_max": r.residual_max,
                "extension_dims": r.extension_dims, "oracle": oracle}

    return _run(8, "random birank-(4,4) survey, dimension 3 throughout", 120.0, body)


def criterion_9(seed: int = RANDOM_SEED) -> CriterionResult:
    """50 witness peels reconstruct bit-exactly with a PSD completion."""

    def body():
        rng = random.Random(seed + 1)
        for case in range(50):
            m = rng.randint(2, 3)
            n = rng.randint(2, 3)
            side = "A" if rng.random() < 0.5 else "B"
            edge_dim = n if side == "A" else m
            core_cells = (m - 1) * n if side == "A" else m * (n - 1)
            gcols = rng.randint(1, edge_dim)
            G = em.ExactMatrix([[_random_scalar(rng) for _ in range(gcols)]
                                for _ in range(edge_dim)])
            We = G.matmul(G.adjoint())
            C = em.ExactMatrix([[_random_scalar(rng) for _ in range(edge_dim)]
                                for _ in range(core_cells)])
            chi = C.matmul(We)
            A = em.ExactMatrix([[_random_scalar(rng) for _ in range(core_cells)]
                                for _ in range(core_cells)])
            Wc = A + A.adjoint()
            perp = rng.randrange(m if side == "A" else n)
            core_dims = (m - 1, n) if side == "A" else (m, n - 1)
            W = ex.assemble_matrix(Wc, chi, We, core_dims, side, perp)
            peeled, psd_part = ex.witness_schur_peel(W, (m, n), side, perp)
            assert em.psd_check(psd_part).is_psd, f"case {case}: completion not PSD"
        return {"cases": 50, "failures": 0}

    return _run(9, "witness Schur peel identity suite (50 cases)", None, body)


def _random_scalar(rng) -> em.GaussianRational:
    return em.GaussianRational(Fraction(rng.randint(-2, 2), rng.randint(1, 2)),
                               Fraction(rng.randint(-2, 2), rng.randint(1, 2)))


def _random_vector(rng, size) -> em.Vector:
    return tuple(_random_scalar(rng) for _ in range(size))


ALL_CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
                criterion_6, criterion_7, criterion_8, criterion_9)


def run_all(seed: int = RANDOM_SEED, include_k5: bool | None = None) -> list:
    results = []
    for fn in ALL_CRITERIA:
        if fn is criterion_4:
            results.append(fn(include_k5))
        elif fn in (criterion_7, criterion_9):
            results.append(fn(seed))
        elif fn is criterion_8:
            results.append(fn())
        else:
            results.append(fn())
    return results


def manifest(results) -> dict:
    return {
        "passed": all(r.passed for r in results),
        "criteria": [{
            "number": r.number, "name": r.name, "passed": r.passed,
            "seconds": round(r.seconds, 3), "limit": r.limit, "details": r.details,
        } for r in results],
    }

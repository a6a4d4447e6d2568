"""Floating-point laboratory: random birank-constrained PPT states.

Samples random PPT states with a prescribed birank by driving the smallest
eigenvalues of a random Hermitian matrix and of its partial transpose to
zero with a damped Gauss-Newton iteration, then measures extension-space
dimensions numerically.  Everything here is double precision; the exact
layer is the oracle these routines are validated against.

Calibration defaults (residual tolerance 1e-10, 200 iterations, step
halving on residual increase) were fixed empirically and are quoted in the
survey headers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import exactmat as em
from . import qstates as qs
from .errors import ConvergenceFailure, DimensionMismatch, RankAmbiguity

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 200
DEFAULT_SVD_TOL = 1e-7
_START_NOISE = 0.1


@dataclass
class FloatState:
    """Double-precision Hermitian state with its targeted birank."""

    dim_a: int
    dim_b: int
    matrix: np.ndarray
    birank_target: tuple
    residual: float = float("nan")
    iterations: int = 0


def random_hermitian(n: int, seed) -> np.ndarray:
    """Random Hermitian matrix: complex normal off-diagonals, real normal
    diagonal.  Deterministic per seed."""
    if n < 1:
        raise DimensionMismatch("dimension must be at least 1")
    rng = np.random.default_rng(seed) if not isinstance(seed, np.random.Generator) else seed
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (a + a.conj().T) / 2


def eig_hermitian(matrix: np.ndarray, tol: float = 1e-9):
    """Ascending eigenvalues and orthonormal eigenvectors of a Hermitian matrix.

    Residuals ``|A v - w v|`` are verified against ``tol * |A|``.
    """
    a = np.asarray(matrix, dtype=complex)
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch("matrix must be square")
    w, v = np.linalg.eigh(a)
    scale = max(np.linalg.norm(a, 2), 1e-300)
    resid = np.linalg.norm(a @ v - v * w, axis=0)
    if np.any(resid > tol * scale):
        raise ConvergenceFailure(f"eigen residual {resid.max():.3e} above {tol:.1e} * |A|")
    return w, v


def partial_transpose_np(x: np.ndarray, m: int, n: int, side: str = "B") -> np.ndarray:
    t = x.reshape(m, n, m, n)
    if side == "B":
        return t.transpose(0, 3, 2, 1).reshape(m * n, m * n)
    return t.transpose(2, 1, 0, 3).reshape(m * n, m * n)


# -- Hermitian real parametrization -----------------------------------------

def _herm_to_params(h: np.ndarray) -> np.ndarray:
    n = h.shape[0]
    iu = np.triu_indices(n, 1)
    return np.concatenate([np.real(np.diag(h)), np.real(h[iu]), np.imag(h[iu])])


def _params_to_herm(p: np.ndarray, n: int) -> np.ndarray:
    iu = np.triu_indices(n, 1)
    k = len(iu[0])
    h = np.zeros((n, n), dtype=complex)
    h[np.diag_indices(n)] = p[:n]
    h[iu] = p[n:n + k] + 1j * p[n + k:]
    return h + np.triu(h, 1).conj().T


def _grad_to_params(g: np.ndarray) -> np.ndarray:
    """Gradient of a real function of a Hermitian matrix, in parameter form.

    For ``d lambda = tr(G dX)`` with Hermitian ``G``: diagonal entries give
    the diagonal derivatives, ``2 Re / 2 Im`` the off-diagonal ones.
    """
    n = g.shape[0]
    iu = np.triu_indices(n, 1)
    return np.concatenate([np.real(np.diag(g)), 2 * np.real(g[iu]), 2 * np.imag(g[iu])])


def gauss_newton_birank(m: int, n: int, p: int, q: int, seed=0,
                        tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> FloatState:
    """Sample a random PPT state of birank ``(p, q)``.

    The convergence residual stacks the ``mn - p`` smallest eigenvalues of
    ``X`` with the ``mn - q`` smallest eigenvalues of ``X^Tb`` into a single
    vector driven to zero.  The Gauss-Newton step additionally zeroes the
    off-diagonal entries of the compressed blocks ``K* X K`` on the target
    eigenspaces: because the target eigenvalues coalesce at zero, per-
    eigenvalue gradients alone stall at linear rate, while the block rows
    (pairwise outer products of eigenvectors, with the partial-transpose
    pullback for the second block) restore quadratic convergence.  Steps
    are halved while the max eigenvalue residual increases.
    """
    size = m * n
    if not (1 <= p <= size and 1 <= q <= size):
        raise DimensionMismatch("birank outside the valid range")
    rng = np.random.default_rng(seed)
    x = np.eye(size, dtype=complex) / size + _START_NOISE * random_hermitian(size, rng)
    x = x / np.trace(x).real
    kp, kq = size - p, size - q

    def residual(mat):
        w1, v1 = np.linalg.eigh(mat)
        w2, v2 = np.linalg.eigh(partial_transpose_np(mat, m, n))
        return np.concatenate([w1[:kp], w2[:kq]]), (v1, v2)

    r, eig = residual(x)
    it = 0
    while it < max_iter:
        if r.size == 0 or np.max(np.abs(r)) < tol:
            return FloatState(m, n, x, (p, q),
                              residual=0.0 if r.size == 0 else float(np.max(np.abs(r))),
                              iterations=it)
        v1, v2 = eig
        rows, vals = [], []
        for vecs, kk, transpose in ((v1, kp, False), (v2, kq, True)):
            K = vecs[:, :kk]
            target = partial_transpose_np(x, m, n) if transpose else x
            B = K.conj().T @ target @ K
            for i in range(kk):
                g = np.outer(K[:, i], K[:, i].conj())
                rows.append(_grad_to_params(partial_transpose_np(g, m, n) if transpose else g))
                vals.append(B[i, i].real)
                for j in range(i + 1, kk):
                    g_re = (np.outer(K[:, j], K[:, i].conj()) + np.outer(K[:, i], K[:, j].conj())) / 2
                    g_im = (np.outer(K[:, j], K[:, i].conj()) - np.outer(K[:, i], K[:, j].conj())) / 2j
                    for g2, val in ((g_re, B[i, j].real), (g_im, B[i, j].imag)):
                        rows.append(_grad_to_params(
                            partial_transpose_np(g2, m, n) if transpose else g2))
                        vals.append(val)
        jac = np.array(rows)
        step = np.linalg.lstsq(jac, -np.array(vals), rcond=None)[0]
        base = np.max(np.abs(r))
        scale = 1.0
        for _ in range(40):
            x_new = _params_to_herm(_herm_to_params(x) + scale * step, size)
            tr = np.trace(x_new).real
            if abs(tr) > 1e-12:
                x_new = x_new / tr
            r_new, eig_new = residual(x_new)
            if np.max(np.abs(r_new)) < base or scale < 1e-9:
                break
            scale *= 0.5
        x, r, eig = x_new, r_new, eig_new
        it += 1
    if r.size == 0 or np.max(np.abs(r)) < tol:
        return FloatState(m, n, x, (p, q),
                          residual=0.0 if r.size == 0 else float(np.max(np.abs(r))),
                          iterations=it)
    raise ConvergenceFailure(
        f"residual {np.max(np.abs(r)):.3e} above {tol:.1e} after {max_iter} iterations")


# -- numerical extension dimension -------------------------------------------

def _range_projector(mat: np.ndarray, svd_tol: float):
    w, v = np.linalg.eigh(mat)
    mags = np.abs(w)
    lo, hi = svd_tol / np.sqrt(10), svd_tol * np.sqrt(10)
    if np.any((mags >= lo) & (mags <= hi)):
        raise RankAmbiguity(
            f"eigenvalue magnitude within a decade of the rank tolerance {svd_tol:.1e}")
    keep = mags > svd_tol
    vv = v[:, keep]
    return vv @ vv.conj().T, int(keep.sum())


def numeric_extension_dimension(state: FloatState, svd_tol: float = DEFAULT_SVD_TOL,
                                return_report: bool = False):
    """Dimension of the PPT coupling solution space, from float range bases.

    Mirrors the exact solver: builds the projector on the numerical range of
    ``rho`` acting on (A,B) and the conjugated range projector of
    ``rho^Ta`` acting on (A,B'), stacks the complements, and counts the
    singular values below the tolerance.  Raises :class:`RankAmbiguity`
    when singular values cluster within a decade of the threshold.
    """
    m, n = state.dim_a, state.dim_b
    rho = np.asarray(state.matrix, dtype=complex)
    rho_ta = partial_transpose_np(rho, m, n, "A")
    P, p = _range_projector(rho, svd_tol)
    Q, q = _range_projector(rho_ta, svd_tol)
    N = m * n * n
    P1 = np.kron(np.eye(m * n) - P, np.eye(n))
    swap = np.zeros((N, N))
    for a in range(m):
        for b in range(n):
            for c in range(n):
                swap[a * n * n + b * n + c, a * n * n + c * n + b] = 1.0
    P2 = np.kron(np.eye(m * n) - Q.conj(), np.eye(n)) @ swap
    sv = np.linalg.svd(np.vstack([P1, P2]), compute_uv=False)
    lo, hi = svd_tol / np.sqrt(10), svd_tol * np.sqrt(10)
    if np.any((sv >= lo) & (sv <= hi)):
        raise RankAmbiguity("singular values within a decade of the rank tolerance")
    dim = int(np.sum(sv < svd_tol))
    if not return_report:
        return dim
    above = sv[sv > svd_tol]
    below = sv[sv < svd_tol]
    report = {
        "dimension": dim,
        "ranks": (p, q),
        "spectral_gap": [float(below.max()) if below.size else 0.0,
                         float(above.min()) if above.size else float("inf")],
    }
    return dim, report


def from_exact(state: qs.BipartiteState, normalize: bool = True) -> FloatState:
    """Cast an exact state to floats (optionally trace-normalized)."""
    mat = np.array(state.to_complex_rows(), dtype=complex)
    if normalize:
        mat = mat / np.trace(mat).real
    p, q = qs.birank(state)
    return FloatState(state.dim_a, state.dim_b, mat, (p, q), residual=0.0)


# -- exact rounding of sampled states -----------------------------------------

def rationalize_to_birank(state: FloatState, max_denominator: int = 10 ** 7,
                          shift: Fraction = Fraction(1, 2 ** 16)):
    """Round a converged sample to a nearby exactly-PPT rational state.

    Rank-truncates the sample to its target rank, rationalizes the factor
    columns, and adds ``shift`` times the identity.  The shift commutes with
    partial transposition and dominates the rounding perturbation of the
    near-zero eigenvalues (entrywise error about 1/max_denominator), so the
    result passes the exact PPT verification while staying within about
    ``shift`` of the sample in operator norm.  Both positivity checks run
    exactly; :class:`~pptlab.errors.NotPsd` signals a failed rounding.
    """
    from .errors import NotPsd

    m, n = state.dim_a, state.dim_b
    size = m * n
    p, _ = state.birank_target
    x = np.asarray(state.matrix, dtype=complex)
    w, v = np.linalg.eigh(x)
    cols = []
    for i in range(size - p, size):
        if w[i] <= 0:
            continue
        cols.append(_rationalize_vector(np.sqrt(w[i]) * v[:, i], max_denominator))
    B = em.ExactMatrix.from_cols(cols)
    sigma = B.matmul(B.adjoint()) + em.ExactMatrix.identity(size).scale(shift)
    exact = qs.BipartiteState(m, n, sigma, label="rounded-sample")
    if not em.psd_check(exact.partial_transpose("B")).is_psd:
        raise NotPsd("partial transpose of the rounded state is not PSD")
    return exact


def _rationalize_vector(v: np.ndarray, max_denominator: int) -> em.Vector:
    out = []
    for z in v:
        out.append(em.GaussianRational(
            Fraction(float(np.real(z))).limit_denominator(max_denominator),
            Fraction(float(np.imag(z))).limit_denominator(max_denominator)))
    return tuple(out)


# -- survey -------------------------------------------------------------------

@dataclass
class SurveyReport:
    """Per-(dims, birank) sampling summary."""

    dims: tuple
    birank: tuple
    samples: int
    converged: int
    residual_max: float
    residual_median: float
    extension_dims: dict          # dimension -> count
    ambiguous: int
    bound: int
    expected_dimension: int       # m + max(bound, 0)
    deviations: list = field(default_factory=list)
    calibration: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "dims": list(self.dims),
            "birank": list(self.birank),
            "samples": self.samples,
            "converged": self.converged,
            "residual_max": self.residual_max,
            "residual_median": self.residual_median,
            "extension_dims": {str(k): v for k, v in sorted(self.extension_dims.items())},
            "ambiguous": self.ambiguous,
            "bound": self.bound,
            "expected_dimension": self.expected_dimension,
            "deviations": self.deviations,
            "calibration": self.calibration,
        }


def unextendibility_survey(dims_list, biranks, samples: int, seed: int = 0,
                           tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                           svd_tol: float = DEFAULT_SVD_TOL) -> list:
    """Sample fixed-birank states and histogram their extension dimensions.

    For each (dims, birank) pair, samples are drawn with consecutive seeds;
    every converged sample's numerical extension dimension is compared to
    ``m + max(bound, 0)`` and deviations are flagged.
    """
    reports = []
    calibration = {"tol": tol, "max_iter": max_iter, "svd_tol": svd_tol,
                   "note": "defaults are empirical calibration choices"}
    for (m, n) in dims_list:
        for (p, q) in biranks:
            if not (1 <= p <= m * n and 1 <= q <= m * n):
                continue
            residuals = []
            dims_hist: dict = {}
            ambiguous = 0
            deviations = []
            converged = 0
            for i in range(samples):
                try:
                    st = gauss_newton_birank(m, n, p, q, seed=seed + i,
                                             tol=tol, max_iter=max_iter)
                except ConvergenceFailure:
                    continue
                converged += 1
                residuals.append(st.residual)
                try:
                    d = numeric_extension_dimension(st, svd_tol=svd_tol)
                except RankAmbiguity:
                    ambiguous += 1
                    continue
                dims_hist[d] = dims_hist.get(d, 0) + 1
                expected = m + max(extension_count_bound_local(m, n, p, q), 0)
                if d != expected:
                    deviations.append({"seed": seed + i, "dimension": d, "expected": expected})
            bound = extension_count_bound_local(m, n, p, q)
            reports.append(SurveyReport(
                dims=(m, n), birank=(p, q), samples=samples, converged=converged,
                residual_max=float(max(residuals)) if residuals else float("nan"),
                residual_median=float(np.median(residuals)) if residuals else float("nan"),
                extension_dims=dims_hist, ambiguous=ambiguous, bound=bound,
                expected_dimension=m + max(bound, 0), deviations=deviations,
                calibration=calibration))
    return reports


def extension_count_bound_local(m: int, n: int, p: int, q: int) -> int:
    return (p + q - m * n) * n - m


def survey_table(reports) -> str:
    """Aligned-column text rendering of survey reports."""
    header = f"{'dims':>6} {'birank':>8} {'conv':>9} {'res_max':>10} {'ext dims':>18} {'bound':>6} {'flags':>6}"
    lines = [header, "-" * len(header)]
    for r in reports:
        hist = ",".join(f"{k}:{v}" for k, v in sorted(r.extension_dims.items()))
        lines.append(
            f"{r.dims[0]}x{r.dims[1]:>4} {str(r.birank):>8} {r.converged:>4}/{r.samples:<4} "
            f"{r.residual_max:>10.2e} {hist:>18} {r.bound:>6} {len(r.deviations):>6}")
    return "\n".join(lines)
